//! The form factor `chi`, its rescalings and quadrature-based smoothing.
//!
//! All radial profiles are unit-mass densities on R^3 that depend on `|x|`
//! only. The standard profile is the bump `c exp(-1/(1-s^2))` on `s < 1`.
//! A [`Mollifier`] is a profile rescaled to a radius `r`, i.e.
//! `r^-3 p(|x|/r)`.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use vlamax_kinematics::{Mat3, Vec3};

use crate::error::{FieldError, Result};
use crate::quadrature::{gauss, orthonormal_pair};

/// Radially symmetric unit-mass density.
pub trait RadialProfile: Send + Sync + std::fmt::Debug {
    /// Identifier used in cache keys and metadata.
    fn name(&self) -> &str;
    /// Radius outside of which the density vanishes.
    fn support(&self) -> f64;
    /// Density at radius `s`.
    fn density(&self, s: f64) -> f64;
    /// Radial derivative of the density.
    fn derivative(&self, s: f64) -> f64;
    /// Mass inside the ball of radius `s`, `4 pi int_0^s r^2 p(r) dr`.
    fn enclosed(&self, s: f64) -> f64;
}

/// Uniformly sampled radial function with cubic interpolation.
#[derive(Debug, Clone)]
pub struct RadialTable {
    h: f64,
    values: Vec<f64>,
    derivs: Option<Vec<f64>>,
    /// Value returned beyond the last node.
    tail: f64,
}

impl RadialTable {
    pub fn new(h: f64, values: Vec<f64>, derivs: Option<Vec<f64>>, tail: f64) -> Self {
        assert!(values.len() >= 4);
        Self { h, values, derivs, tail }
    }

    pub fn end(&self) -> f64 {
        self.h * (self.values.len() - 1) as f64
    }

    pub fn eval(&self, s: f64) -> f64 {
        let s = s.abs();
        if s >= self.end() {
            return self.tail;
        }
        let u = s / self.h;
        let k = (u as usize).min(self.values.len() - 2);
        let t = u - k as f64;
        match &self.derivs {
            Some(d) => {
                let (p0, p1) = (self.values[k], self.values[k + 1]);
                let (m0, m1) = (d[k] * self.h, d[k + 1] * self.h);
                let t2 = t * t;
                let t3 = t2 * t;
                (2.0 * t3 - 3.0 * t2 + 1.0) * p0
                    + (t3 - 2.0 * t2 + t) * m0
                    + (-2.0 * t3 + 3.0 * t2) * p1
                    + (t3 - t2) * m1
            }
            None => {
                let (j, w) = lagrange4(k, t, self.values.len());
                let mut acc = 0.0;
                for (i, wi) in w.iter().enumerate() {
                    acc += wi * self.values[j + i];
                }
                acc
            }
        }
    }

    pub fn eval_deriv(&self, s: f64) -> f64 {
        let sign = if s < 0.0 { -1.0 } else { 1.0 };
        let s = s.abs();
        if s >= self.end() {
            return 0.0;
        }
        let u = s / self.h;
        let k = (u as usize).min(self.values.len() - 2);
        let t = u - k as f64;
        let d = match &self.derivs {
            Some(d) => {
                let (p0, p1) = (self.values[k], self.values[k + 1]);
                let (m0, m1) = (d[k] * self.h, d[k + 1] * self.h);
                let t2 = t * t;
                ((6.0 * t2 - 6.0 * t) * p0
                    + (3.0 * t2 - 4.0 * t + 1.0) * m0
                    + (-6.0 * t2 + 6.0 * t) * p1
                    + (3.0 * t2 - 2.0 * t) * m1)
                    / self.h
            }
            None => {
                let (j, _) = lagrange4(k, t, self.values.len());
                let x = u - j as f64;
                let mut acc = 0.0;
                for i in 0..4 {
                    let mut dl = 0.0;
                    for m in 0..4 {
                        if m == i {
                            continue;
                        }
                        let mut term = 1.0 / (i as f64 - m as f64);
                        for q in 0..4 {
                            if q != i && q != m {
                                term *= (x - q as f64) / (i as f64 - q as f64);
                            }
                        }
                        dl += term;
                    }
                    acc += dl * self.values[j + i];
                }
                acc / self.h
            }
        };
        sign * d
    }
}

/// Four-point Lagrange weights on nodes `j..j+4` for the point `k + t`.
fn lagrange4(k: usize, t: f64, len: usize) -> (usize, [f64; 4]) {
    let j = k.saturating_sub(1).min(len - 4);
    let x = (k - j) as f64 + t;
    let mut w = [0.0; 4];
    for (i, wi) in w.iter_mut().enumerate() {
        let mut p = 1.0;
        for m in 0..4 {
            if m != i {
                p *= (x - m as f64) / (i as f64 - m as f64);
            }
        }
        *wi = p;
    }
    (j, w)
}

fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

fn bump_derivative(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        let q = 1.0 - s * s;
        -2.0 * s / (q * q) * (-1.0 / q).exp()
    }
}

const ENCLOSED_INTERVALS: usize = 4096;

/// The standard form factor: the normalized smooth bump of radius one.
#[derive(Debug, Clone)]
pub struct FormFactor {
    norm: f64,
    enclosed: Arc<RadialTable>,
}

impl FormFactor {
    /// Normalized bump profile `exp(-1/(1-s^2))` on `s < 1`.
    pub fn standard() -> Self {
        static STD: OnceLock<FormFactor> = OnceLock::new();
        STD.get_or_init(|| {
            let z = 4.0 * PI * composite(0.0, 1.0, 64, 16, |s| s * s * bump(s));
            let norm = 1.0 / z;
            let h = 1.0 / ENCLOSED_INTERVALS as f64;
            let g = gauss(10);
            let mut values = Vec::with_capacity(ENCLOSED_INTERVALS + 1);
            let mut derivs = Vec::with_capacity(ENCLOSED_INTERVALS + 1);
            let mut acc = 0.0;
            for k in 0..=ENCLOSED_INTERVALS {
                let s = k as f64 * h;
                if k > 0 {
                    acc += g.integrate(s - h, s, |r| 4.0 * PI * r * r * norm * bump(r));
                }
                values.push(acc);
                derivs.push(4.0 * PI * s * s * norm * bump(s));
            }
            FormFactor {
                norm,
                enclosed: Arc::new(RadialTable::new(h, values, Some(derivs), 1.0)),
            }
        })
        .clone()
    }

    /// Normalization constant `c` of `c exp(-1/(1-s^2))`.
    pub fn normalization(&self) -> f64 {
        self.norm
    }

    /// Profile value at radius `s`.
    pub fn profile(&self, s: f64) -> f64 {
        self.norm * bump(s)
    }

    /// Value at a point.
    pub fn value(&self, x: &Vec3) -> f64 {
        self.profile(x.norm())
    }

    /// Supremum of the profile, attained at the origin.
    pub fn sup_norm(&self) -> f64 {
        self.profile(0.0)
    }
}

impl RadialProfile for FormFactor {
    fn name(&self) -> &str {
        "bump"
    }
    fn support(&self) -> f64 {
        1.0
    }
    fn density(&self, s: f64) -> f64 {
        self.profile(s)
    }
    fn derivative(&self, s: f64) -> f64 {
        self.norm * bump_derivative(s)
    }
    fn enclosed(&self, s: f64) -> f64 {
        if s >= 1.0 {
            1.0
        } else {
            self.enclosed.eval(s)
        }
    }
}

/// Profile stored as radial tables, e.g. the self-convolution of `chi`.
#[derive(Debug, Clone)]
pub struct TabulatedProfile {
    name: String,
    support: f64,
    density: RadialTable,
    enclosed: RadialTable,
}

impl RadialProfile for TabulatedProfile {
    fn name(&self) -> &str {
        &self.name
    }
    fn support(&self) -> f64 {
        self.support
    }
    fn density(&self, s: f64) -> f64 {
        if s >= self.support {
            0.0
        } else {
            self.density.eval(s).max(0.0)
        }
    }
    fn derivative(&self, s: f64) -> f64 {
        if s >= self.support {
            0.0
        } else {
            self.density.eval_deriv(s)
        }
    }
    fn enclosed(&self, s: f64) -> f64 {
        self.enclosed.eval(s)
    }
}

/// Composite Gauss rule with `pieces` panels of `order` nodes.
fn composite<F: FnMut(f64) -> f64>(a: f64, b: f64, pieces: usize, order: usize, mut f: F) -> f64 {
    let g = gauss(order);
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| g.integrate(a + i as f64 * h, a + (i + 1) as f64 * h, &mut f))
        .sum()
}

/// Tabulates the radial convolution `p * q` on `intervals` uniform cells.
///
/// Uses `(p*q)(r) = (2 pi / r) int a p(a) [P(min(r+a, Sq)) - P(|r-a|)] da`
/// with `P(x) = int_0^x b q(b) db`.
pub fn convolve_radial(
    name: &str,
    p: &dyn RadialProfile,
    q: &dyn RadialProfile,
    intervals: usize,
) -> TabulatedProfile {
    let sp = p.support();
    let sq = q.support();
    let fine = 8 * intervals;
    let hq = sq / fine as f64;
    let g10 = gauss(10);
    let mut pv = Vec::with_capacity(fine + 1);
    let mut pd = Vec::with_capacity(fine + 1);
    let mut acc = 0.0;
    for k in 0..=fine {
        let b = k as f64 * hq;
        if k > 0 {
            acc += g10.integrate(b - hq, b, |x| x * q.density(x));
        }
        pv.push(acc);
        pd.push(b * q.density(b));
    }
    let big_p = RadialTable::new(hq, pv, Some(pd), acc);
    let inner = |x: f64| if x >= sq { big_p.tail } else { big_p.eval(x) };

    let support = sp + sq;
    let h = support / intervals as f64;
    let g = gauss(48);
    let mut values = Vec::with_capacity(intervals + 1);
    for k in 0..=intervals {
        let r = k as f64 * h;
        let v = if k == 0 {
            composite(0.0, sp.min(sq), 64, 16, |a| 4.0 * PI * a * a * p.density(a) * q.density(a))
        } else {
            let mut cuts = vec![0.0, sp, r - sq, r, sq - r, r + sq];
            cuts.retain(|c| *c >= 0.0 && *c <= sp);
            cuts.sort_by(f64::total_cmp);
            cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
            let mut sum = 0.0;
            for w in cuts.windows(2) {
                sum += g.integrate(w[0], w[1], |a| {
                    let hi = (r + a).min(sq);
                    let lo = (r - a).abs();
                    if lo >= hi {
                        0.0
                    } else {
                        a * p.density(a) * (inner(hi) - inner(lo))
                    }
                });
            }
            2.0 * PI * sum / r
        };
        values.push(v.max(0.0));
    }
    let density = RadialTable::new(h, values, None, 0.0);
    let g4 = gauss(4);
    let mut ev = Vec::with_capacity(intervals + 1);
    let mut ed = Vec::with_capacity(intervals + 1);
    let mut acc = 0.0;
    for k in 0..=intervals {
        let s = k as f64 * h;
        if k > 0 {
            acc += g4.integrate(s - h, s, |x| 4.0 * PI * x * x * density.eval(x));
        }
        ev.push(acc);
        ed.push(4.0 * PI * s * s * density.eval(s));
    }
    let enclosed = RadialTable::new(h, ev, Some(ed), acc);
    TabulatedProfile { name: name.to_string(), support, density, enclosed }
}

/// The self-convolution `chi * chi` of the standard profile, support radius 2.
pub fn double_profile() -> Arc<TabulatedProfile> {
    static PSI: OnceLock<Arc<TabulatedProfile>> = OnceLock::new();
    PSI.get_or_init(|| {
        let chi = FormFactor::standard();
        Arc::new(convolve_radial("bump*bump", &chi, &chi, 2048))
    })
    .clone()
}

/// Quadrature controls for [`Mollifier::smooth_kernel`].
#[derive(Debug, Clone, Copy)]
pub struct SmoothingOptions {
    /// Relative error target.
    pub rel_tol: f64,
    /// Absolute error floor.
    pub abs_tol: f64,
    /// Initial order of the product rule.
    pub start_order: usize,
    /// Largest order tried before reporting non-convergence.
    pub max_order: usize,
    /// Point where the kernel may be singular.
    pub singular_point: Vec3,
}

impl Default for SmoothingOptions {
    fn default() -> Self {
        Self {
            rel_tol: vlamax_kinematics::tol::QUADRATURE_REL,
            abs_tol: 1e-13,
            start_order: 8,
            max_order: 64,
            singular_point: Vec3::zeros(),
        }
    }
}

/// A radial profile rescaled to radius `r`: `r^-3 p(|x| / r)`.
#[derive(Debug, Clone)]
pub struct Mollifier {
    profile: Arc<dyn RadialProfile>,
    radius: f64,
}

impl Mollifier {
    pub fn new(profile: Arc<dyn RadialProfile>, radius: f64) -> Self {
        assert!(radius > 0.0 && radius.is_finite(), "mollifier radius must be positive");
        Self { profile, radius }
    }

    pub fn profile(&self) -> &Arc<dyn RadialProfile> {
        &self.profile
    }

    /// Scale `r` of the rescaling.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Radius of the support ball.
    pub fn support(&self) -> f64 {
        self.profile.support() * self.radius
    }

    pub fn density(&self, s: f64) -> f64 {
        self.profile.density(s / self.radius) / self.radius.powi(3)
    }

    pub fn value(&self, x: &Vec3) -> f64 {
        self.density(x.norm())
    }

    /// Gradient of the density at `x`.
    pub fn gradient(&self, x: &Vec3) -> Vec3 {
        let s = x.norm();
        if s == 0.0 {
            return Vec3::zeros();
        }
        x * (self.profile.derivative(s / self.radius) / (self.radius.powi(4) * s))
    }

    /// Mass of the density inside the ball of radius `s`.
    pub fn enclosed(&self, s: f64) -> f64 {
        self.profile.enclosed(s / self.radius)
    }

    /// Field of the smoothed unit point charge at offset `w`, `-grad G * rho`.
    pub fn coulomb(&self, w: &Vec3) -> Vec3 {
        let s = w.norm();
        if s < 1e-9 * self.radius {
            return w * (self.density(0.0) / 3.0);
        }
        w * (self.enclosed(s) / (4.0 * PI * s * s * s))
    }

    /// `(rho * h)(x)` by adaptive ray quadrature over the support ball.
    pub fn smooth_kernel<F>(&self, h: F, x: &Vec3, opts: &SmoothingOptions) -> Result<Vec3>
    where
        F: Fn(&Vec3) -> Vec3,
    {
        let run = |order: usize| -> Vec3 {
            let mut acc = Vec3::zeros();
            self.ball_rule(x, &opts.singular_point, order, |z, w| {
                acc += h(z) * (w * self.value(&(x - z)));
            });
            acc
        };
        adapt(run, opts, |v| v.norm())
    }

    /// `((grad rho) * h)(x)`, entry `(i, j)` being `int d_j rho(x - y) h_i(y) dy`.
    pub fn smooth_kernel_grad<F>(&self, h: F, x: &Vec3, opts: &SmoothingOptions) -> Result<Mat3>
    where
        F: Fn(&Vec3) -> Vec3,
    {
        let run = |order: usize| -> Mat3 {
            let mut acc = Mat3::zeros();
            self.ball_rule(x, &opts.singular_point, order, |z, w| {
                acc += h(z) * (self.gradient(&(x - z)) * w).transpose();
            });
            acc
        };
        adapt(run, opts, |m| m.norm())
    }

    /// Visits quadrature nodes `z` and weights of a product rule on the ball
    /// `B(x, support)`, using rays from `singular` when it is near the ball.
    pub fn ball_rule<V: FnMut(&Vec3, f64)>(&self, x: &Vec3, singular: &Vec3, order: usize, visit: V) {
        let s = self.support();
        let d = (x - singular).norm();
        let center = if d < 2.0 * s { *singular } else { *x };
        ray_rule(&center, x, s, order, 2 * order, order, visit);
    }
}

/// Product rule over the ball `B(x, s)` using rays from `center`.
///
/// Directions are Gauss nodes in `cos` of the angle to the pole
/// `(x - center)` times a trapezoid in azimuth; along each ray the chord
/// inside the ball gets a Gauss rule of `n_r` nodes.
pub fn ray_rule<V: FnMut(&Vec3, f64)>(
    center: &Vec3,
    x: &Vec3,
    s: f64,
    n_mu: usize,
    n_phi: usize,
    n_r: usize,
    visit: V,
) {
    ray_rule_split(center, x, s, (n_mu, n_phi, n_r), &[], visit)
}

/// [`ray_rule`] with each chord split where it crosses the given spheres
/// `(center, radius)`, so that integrands jumping across them converge.
pub fn ray_rule_split<V: FnMut(&Vec3, f64)>(
    center: &Vec3,
    x: &Vec3,
    s: f64,
    (n_mu, n_phi, n_r): (usize, usize, usize),
    spheres: &[(Vec3, f64)],
    mut visit: V,
) {
    let dvec = x - center;
    let d = dvec.norm();
    let pole = if d > 1e-14 * s { dvec / d } else { Vec3::z() };
    let (q1, q2) = orthonormal_pair(&pole);
    let mu_lo = if d < s { -1.0 } else { (1.0 - (s / d).powi(2)).max(0.0).sqrt() };
    let gm = gauss(n_mu);
    let gr = gauss(n_r);
    let dphi = 2.0 * PI / n_phi as f64;
    let mut cuts: Vec<f64> = Vec::with_capacity(2 + 2 * spheres.len());
    for (mu, wmu) in gm.mapped(mu_lo, 1.0) {
        let sig = (1.0 - mu * mu).max(0.0).sqrt();
        let disc = s * s - d * d * (1.0 - mu * mu);
        if disc <= 0.0 {
            continue;
        }
        let root = disc.sqrt();
        let r_hi = d * mu + root;
        let r_lo = (d * mu - root).max(0.0);
        if r_hi <= r_lo {
            continue;
        }
        for k in 0..n_phi {
            let phi = (k as f64 + 0.5) * dphi;
            let omega = pole * mu + (q1 * phi.cos() + q2 * phi.sin()) * sig;
            cuts.clear();
            cuts.push(r_lo);
            for (c, rad) in spheres {
                // |center + r omega - c|^2 = rad^2
                let w = center - c;
                let b = omega.dot(&w);
                let disc = b * b - (w.norm_squared() - rad * rad);
                if disc > 0.0 {
                    let q = disc.sqrt();
                    for r in [-b - q, -b + q] {
                        if r > r_lo && r < r_hi {
                            cuts.push(r);
                        }
                    }
                }
            }
            cuts.push(r_hi);
            cuts.sort_by(f64::total_cmp);
            for win in cuts.windows(2) {
                for (r, wr) in gr.mapped(win[0], win[1]) {
                    let z = center + omega * r;
                    visit(&z, wmu * dphi * wr * r * r);
                }
            }
        }
    }
}

fn adapt<T, R, N>(run: R, opts: &SmoothingOptions, norm: N) -> Result<T>
where
    T: Copy + std::ops::Sub<Output = T>,
    R: Fn(usize) -> T,
    N: Fn(&T) -> f64,
{
    let mut order = opts.start_order.max(2);
    let mut prev = run(order);
    loop {
        let next_order = order * 2;
        let next = run(next_order);
        let err = norm(&(next - prev));
        if err <= opts.rel_tol * norm(&next) + opts.abs_tol {
            return Ok(next);
        }
        if next_order >= opts.max_order {
            return Err(FieldError::QuadratureBudget { estimate: err, order: next_order });
        }
        prev = next;
        order = next_order;
    }
}

/// The form factor `chi` rescaled to `chi^N(x) = r^-3 chi(x / r)`.
#[derive(Debug, Clone)]
pub struct RescaledFormFactor {
    pub base: FormFactor,
    r: f64,
}

/// Largest `gamma` accepted in strict mode (exclusive).
pub const STRICT_GAMMA: f64 = 1.0 / 12.0;

impl RescaledFormFactor {
    /// `r_N = N^-gamma`; strict mode demands `gamma < 1/12`.
    pub fn rescale(chi: FormFactor, n: usize, gamma: f64, strict: bool) -> Result<Self> {
        if n == 0 {
            return Err(FieldError::InvalidParameter("particle count must be positive".into()));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(FieldError::InvalidParameter(format!("gamma must be positive, got {gamma}")));
        }
        if strict && gamma >= STRICT_GAMMA {
            return Err(FieldError::StrictMode(format!("gamma = {gamma} >= 1/12")));
        }
        Ok(Self { base: chi, r: (n as f64).powf(-gamma) })
    }

    /// Explicit radius, bypassing the `N^-gamma` rule.
    pub fn with_radius(chi: FormFactor, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(FieldError::InvalidParameter(format!("radius must be positive, got {r}")));
        }
        Ok(Self { base: chi, r })
    }

    pub fn radius(&self) -> f64 {
        self.r
    }

    pub fn value(&self, x: &Vec3) -> f64 {
        self.base.value(&(x / self.r)) / self.r.powi(3)
    }

    pub fn sup_norm(&self) -> f64 {
        self.base.sup_norm() / self.r.powi(3)
    }

    /// `chi^N` as a generic mollifier.
    pub fn mollifier(&self) -> Mollifier {
        Mollifier::new(Arc::new(self.base.clone()), self.r)
    }

    /// `chi^N * chi^N`, the kernel of the doubly smoothed force.
    pub fn double_mollifier(&self) -> Mollifier {
        Mollifier::new(double_profile(), self.r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_profile_examples() {
        let chi = FormFactor::standard();
        assert_eq!(chi.profile(1.0), 0.0);
        assert_eq!(chi.profile(1.5), 0.0);
        let total = 4.0 * PI * composite(0.0, 1.0, 128, 20, |s| s * s * chi.profile(s));
        assert!((total - 1.0).abs() < 1e-12);
        assert!((chi.enclosed(1.0) - 1.0).abs() < 1e-12);
        assert!((chi.enclosed.eval(1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rescale_examples() {
        let chi = FormFactor::standard();
        let f = RescaledFormFactor::rescale(chi.clone(), 4096, 1.0 / 12.0, false).unwrap();
        assert!((f.radius() - 0.5).abs() < 1e-15);
        let f1 = RescaledFormFactor::rescale(chi.clone(), 1, 0.05, true).unwrap();
        assert_eq!(f1.radius(), 1.0);
        assert!((f.sup_norm() / chi.sup_norm() - 8.0).abs() < 1e-9);
        assert!(matches!(
            RescaledFormFactor::rescale(chi.clone(), 64, 1.0 / 12.0, true),
            Err(FieldError::StrictMode(_))
        ));
        assert!(RescaledFormFactor::rescale(chi, 0, 0.05, false).is_err());
    }

    #[test]
    fn double_profile_is_normalized() {
        let psi = double_profile();
        assert!((psi.enclosed(2.0) - 1.0).abs() < 1e-10);
        let chi = FormFactor::standard();
        let at_zero = 4.0 * PI * composite(0.0, 1.0, 128, 20, |s| s * s * chi.profile(s).powi(2));
        assert!((psi.density(0.0) - at_zero).abs() < 1e-10 * at_zero);
        assert_eq!(psi.density(2.0), 0.0);
    }

    #[test]
    fn double_profile_matches_direct_convolution() {
        let chi = FormFactor::standard();
        let psi = double_profile();
        let m = Mollifier::new(Arc::new(chi.clone()), 1.0);
        for r in [0.1, 0.5, 0.9, 1.0, 1.3, 1.8] {
            let x = Vec3::new(r, 0.0, 0.0);
            let mut direct = 0.0;
            m.ball_rule(&x, &x, 96, |z, w| direct += w * chi.value(z) * m.value(&(x - z)));
            assert!((psi.density(r) - direct).abs() < 1e-8 * psi.density(0.0), "r={r}");
        }
    }

    #[test]
    fn smoothing_constants_and_coulomb() {
        let f = RescaledFormFactor::with_radius(FormFactor::standard(), 0.4).unwrap();
        let m = f.mollifier();
        let c = Vec3::new(1.0, -2.0, 0.5);
        let v = m.smooth_kernel(|_| c, &Vec3::new(0.3, 0.1, 0.0), &SmoothingOptions::default()).unwrap();
        assert!((v - c).norm() < 1e-8);
        for x in [Vec3::new(0.05, 0.0, 0.0), Vec3::new(0.3, 0.2, -0.1), Vec3::new(2.0, 0.0, 1.0)] {
            let q = m
                .smooth_kernel(|y| y / (4.0 * PI * y.norm().powi(3)), &x, &SmoothingOptions {
                    rel_tol: 1e-9,
                    max_order: 128,
                    ..Default::default()
                })
                .unwrap();
            let exact = m.coulomb(&x);
            assert!((q - exact).norm() < 1e-7 * exact.norm(), "{q} vs {exact}");
        }
    }
}
