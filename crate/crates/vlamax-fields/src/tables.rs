//! Tabulated smoothed retarded kernels.
//!
//! For a unit-scale radial profile `phi` and source velocity `v`, the
//! smoothed kernels are
//!
//! * `E_vel(d) = (phi * k(., v))(d)` and `B_vel = (phi * (n x k))(d)`,
//! * `E_acc(d) = (phi * A(., v))(d)` and `B_acc = (phi * (n x A))(d)`,
//!
//! where `k` is the relativistic Coulomb kernel and `A` the radiation
//! matrix mapping an acceleration to a field. Both kernels factor as an
//! angular part times a power of `|y|`, so each convolution reduces to a
//! sphere integral of the angular part against the ray transform of `phi`.
//!
//! Tables are built in the frame `e_z = v / |v|`, `e_x` along the part of
//! `d` orthogonal to `v`, on the axes rapidity `atanh |v|`, angle between
//! `d` and `v`, and `asinh(|d| / s)` with `s` the profile support. Lookup is tricubic Lagrange
//! interpolation; a radius `r` rescales velocity parts by `r^-2` and
//! acceleration parts by `r^-1`.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use sha2::{Digest, Sha256};
use vlamax_kinematics::{Mat3, Vec3};

use crate::form_factor::RadialProfile;
use crate::kernels;
use crate::quadrature::{gauss, orthonormal_pair};

/// Smoothed kernels at one offset, in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothedKernels {
    pub e_vel: Vec3,
    pub b_vel: Vec3,
    /// Maps the source acceleration to the electric radiation field.
    pub e_acc: Mat3,
    /// Maps the source acceleration to the magnetic radiation field.
    pub b_acc: Mat3,
}

impl SmoothedKernels {
    pub fn zero() -> Self {
        Self { e_vel: Vec3::zeros(), b_vel: Vec3::zeros(), e_acc: Mat3::zeros(), b_acc: Mat3::zeros() }
    }

    /// Unsmoothed kernels of a point charge.
    pub fn raw(d: &Vec3, v: &Vec3) -> Self {
        let r = d.norm();
        if r == 0.0 {
            return Self::zero();
        }
        let n = d / r;
        let e_vel = kernels::velocity_field(d, v).unwrap_or_else(|_| Vec3::zeros());
        let e_acc = kernels::acceleration_matrix(d, v).unwrap_or_else(|_| Mat3::zeros());
        Self { e_vel, b_vel: n.cross(&e_vel), e_acc, b_acc: n.cross_matrix() * e_acc }
    }

    fn scaled(self, vel: f64, acc: f64) -> Self {
        Self { e_vel: self.e_vel * vel, b_vel: self.b_vel * vel, e_acc: self.e_acc * acc, b_acc: self.b_acc * acc }
    }
}

/// Grid and quadrature parameters of a [`KernelTable`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelTableSpec {
    /// Largest tabulated speed.
    pub v_max: f64,
    /// Intervals in rapidity.
    pub n_v: usize,
    /// Intervals in the angle between `d` and `v`.
    pub n_theta: usize,
    /// Intervals in `asinh(|d| / support)`.
    pub n_rho: usize,
    /// Outer radius of the table in multiples of the profile support.
    pub rho_max_factor: f64,
    /// Gauss nodes in the polar cosine of the sphere rule.
    pub sphere_mu: usize,
    /// Trapezoid nodes in azimuth.
    pub sphere_phi: usize,
    /// Gauss nodes along each chord.
    pub chord: usize,
    /// Reuse tables stored in the system temp directory.
    pub disk_cache: bool,
}

impl Default for KernelTableSpec {
    fn default() -> Self {
        Self {
            v_max: 0.8,
            n_v: 16,
            n_theta: 64,
            n_rho: 256,
            rho_max_factor: 48.0,
            sphere_mu: 48,
            sphere_phi: 24,
            chord: 32,
            disk_cache: true,
        }
    }
}

const COMPONENTS: usize = 12;
const FORMAT_VERSION: u32 = 2;

/// One node of the sphere rule with its ray-transform weights.
struct RayNode {
    omega: Vec3,
    /// Weight times `int phi dr` along the ray.
    w0: f64,
    /// Weight times `int r phi dr` along the ray.
    w1: f64,
}

fn ray_nodes(profile: &dyn RadialProfile, d: &Vec3, spec: &KernelTableSpec) -> Vec<RayNode> {
    let s = profile.support();
    let rho = d.norm();
    let pole = if rho > 1e-14 { d / rho } else { Vec3::z() };
    let (q1, q2) = orthonormal_pair(&pole);
    let mu_lo = if rho < s { -1.0 } else { (1.0 - (s / rho).powi(2)).max(0.0).sqrt() };
    let gc = gauss(spec.chord);
    let dphi = 2.0 * PI / spec.sphere_phi as f64;
    let mut out = Vec::with_capacity(spec.sphere_mu * spec.sphere_phi);
    for (mu, wmu) in gauss(spec.sphere_mu).mapped(mu_lo, 1.0) {
        let disc = s * s - rho * rho * (1.0 - mu * mu);
        if disc <= 0.0 {
            continue;
        }
        let root = disc.sqrt();
        let hi = rho * mu + root;
        let lo = (rho * mu - root).max(0.0);
        if hi <= lo {
            continue;
        }
        let (mut l0, mut l1) = (0.0, 0.0);
        for (r, wr) in gc.mapped(lo, hi) {
            let p = profile.density((rho * rho - 2.0 * rho * r * mu + r * r).max(0.0).sqrt());
            l0 += wr * p;
            l1 += wr * r * p;
        }
        if l0 == 0.0 && l1 == 0.0 {
            continue;
        }
        let sig = (1.0 - mu * mu).max(0.0).sqrt();
        for k in 0..spec.sphere_phi {
            let phi = (k as f64 + 0.5) * dphi;
            let omega = pole * mu + (q1 * phi.cos() + q2 * phi.sin()) * sig;
            out.push(RayNode { omega, w0: wmu * dphi * l0, w1: wmu * dphi * l1 });
        }
    }
    out
}

fn integrate_nodes(nodes: &[RayNode], v: &Vec3) -> SmoothedKernels {
    let g = 1.0 - v.norm_squared();
    let mut out = SmoothedKernels::zero();
    for nd in nodes {
        let om = &nd.omega;
        let q = 1.0 - v.dot(om);
        let c = 1.0 / (4.0 * PI * q * q * q);
        let u = om - v;
        let e = u * (g * c);
        out.e_vel += e * nd.w0;
        out.b_vel += om.cross(&e) * nd.w0;
        // A a = (u (om.a) - a (om.u)) c
        let ou = om.dot(&u);
        let ea = (u * om.transpose() - Mat3::identity() * ou) * (c * nd.w1);
        out.b_acc += om.cross_matrix() * ea;
        out.e_acc += ea;
    }
    out
}

/// Smoothed kernels of a unit-scale profile by direct ray quadrature.
pub fn ray_transform(profile: &dyn RadialProfile, d: &Vec3, v: &Vec3, spec: &KernelTableSpec) -> SmoothedKernels {
    integrate_nodes(&ray_nodes(profile, d, spec), v)
}

/// Frame `(e_x, e_y, e_z)` with `e_z` along `v` and `d` in the `xz` half-plane.
fn frame(d: &Vec3, v: &Vec3) -> (Vec3, Vec3, Vec3) {
    let vn = v.norm();
    let ez = if vn > 1e-300 {
        v / vn
    } else if d.norm() > 1e-300 {
        d.normalize()
    } else {
        Vec3::z()
    };
    let perp = d - ez * d.dot(&ez);
    let pn = perp.norm();
    let ex = if pn > 1e-14 * d.norm().max(1e-300) { perp / pn } else { orthonormal_pair(&ez).0 };
    (ex, ez.cross(&ex), ez)
}

fn pack(k: &SmoothedKernels) -> [f64; COMPONENTS] {
    [
        k.e_vel.x,
        k.e_vel.z,
        k.b_vel.y,
        k.e_acc[(0, 0)],
        k.e_acc[(0, 2)],
        k.e_acc[(2, 0)],
        k.e_acc[(2, 2)],
        k.e_acc[(1, 1)],
        k.b_acc[(0, 1)],
        k.b_acc[(1, 0)],
        k.b_acc[(1, 2)],
        k.b_acc[(2, 1)],
    ]
}

fn unpack(c: &[f64; COMPONENTS], ex: &Vec3, ey: &Vec3, ez: &Vec3) -> SmoothedKernels {
    let basis = Mat3::from_columns(&[*ex, *ey, *ez]);
    let e_loc = Mat3::new(c[3], 0.0, c[4], 0.0, c[7], 0.0, c[5], 0.0, c[6]);
    let b_loc = Mat3::new(0.0, c[8], 0.0, c[9], 0.0, c[10], 0.0, c[11], 0.0);
    SmoothedKernels {
        e_vel: ex * c[0] + ez * c[1],
        b_vel: ey * c[2],
        e_acc: basis * e_loc * basis.transpose(),
        b_acc: basis * b_loc * basis.transpose(),
    }
}

/// Smoothed kernels of one profile on a `(rapidity, angle, log radius)` grid.
#[derive(Debug)]
pub struct KernelTable {
    profile: Arc<dyn RadialProfile>,
    spec: KernelTableSpec,
    dw: f64,
    dth: f64,
    du: f64,
    rho0: f64,
    rho_max: f64,
    data: Vec<f64>,
    direct_evaluations: AtomicU64,
}

impl KernelTable {
    /// Builds the table, reusing a cached copy when allowed.
    pub fn build(profile: Arc<dyn RadialProfile>, spec: KernelTableSpec) -> Self {
        let w_max = spec.v_max.atanh();
        let rho_max = spec.rho_max_factor * profile.support();
        let mut table = Self {
            dw: w_max / spec.n_v as f64,
            dth: PI / spec.n_theta as f64,
            du: (rho_max / profile.support()).asinh() / spec.n_rho as f64,
            rho0: profile.support(),
            rho_max,
            profile,
            spec,
            data: Vec::new(),
            direct_evaluations: AtomicU64::new(0),
        };
        let path = table.cache_path();
        if spec.disk_cache {
            if let Some(data) = read_cache(&path, table.len()) {
                log::debug!("kernel table loaded from {}", path.display());
                table.data = data;
                return table;
            }
        }
        table.fill();
        if spec.disk_cache {
            if let Err(e) = write_cache(&path, &table.data) {
                log::warn!("could not cache kernel table at {}: {e}", path.display());
            }
        }
        table
    }

    pub fn spec(&self) -> &KernelTableSpec {
        &self.spec
    }

    pub fn profile(&self) -> &Arc<dyn RadialProfile> {
        &self.profile
    }

    /// Radius beyond which the unsmoothed kernels are returned.
    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }

    /// Number of lookups that fell back to direct quadrature.
    pub fn direct_evaluations(&self) -> u64 {
        self.direct_evaluations.load(Ordering::Relaxed)
    }

    fn dims(&self) -> (usize, usize, usize) {
        (self.spec.n_v + 3, self.spec.n_theta + 3, self.spec.n_rho + 3)
    }

    fn len(&self) -> usize {
        let (a, b, c) = self.dims();
        a * b * c * COMPONENTS
    }

    fn cache_key(&self) -> String {
        let s = &self.spec;
        let mut h = Sha256::new();
        h.update(FORMAT_VERSION.to_le_bytes());
        h.update(self.profile.name().as_bytes());
        for x in [s.v_max, s.rho_max_factor, self.profile.support(), self.profile.density(0.0), self.profile.density(0.5)] {
            h.update(x.to_le_bytes());
        }
        for n in [s.n_v, s.n_theta, s.n_rho, s.sphere_mu, s.sphere_phi, s.chord] {
            h.update((n as u64).to_le_bytes());
        }
        h.finalize().iter().take(12).map(|b| format!("{b:02x}")).collect()
    }

    fn cache_path(&self) -> PathBuf {
        std::env::temp_dir().join(format!("vlamax-kernel-{}.bin", self.cache_key()))
    }

    fn fill(&mut self) {
        let (nv, nt, nu) = self.dims();
        log::info!("building kernel table for {} ({} nodes)", self.profile.name(), nv * nt * nu);
        let mut data = vec![0.0; self.len()];
        let speeds: Vec<f64> = (0..nv).map(|i| ((i as f64 - 1.0) * self.dw).tanh()).collect();
        for iu in 0..nu {
            let rho = self.rho0 * ((iu as f64 - 1.0) * self.du).sinh();
            for it in 0..nt {
                let th = (it as f64 - 1.0) * self.dth;
                let d = Vec3::new(th.sin(), 0.0, th.cos()) * rho;
                let nodes = ray_nodes(self.profile.as_ref(), &d, &self.spec);
                for (iv, &v) in speeds.iter().enumerate() {
                    let k = integrate_nodes(&nodes, &Vec3::new(0.0, 0.0, v));
                    let (sv, sa) = ((1.0 + rho).powi(2), 1.0 + rho);
                    let c = pack(&k.scaled(sv, sa));
                    let at = ((iv * nt + it) * nu + iu) * COMPONENTS;
                    data[at..at + COMPONENTS].copy_from_slice(&c);
                }
            }
        }
        self.data = data;
    }

    /// Direct quadrature, bypassing the table.
    pub fn direct(&self, d: &Vec3, v: &Vec3) -> SmoothedKernels {
        ray_transform(self.profile.as_ref(), d, v, &self.spec)
    }

    /// Smoothed kernels of the unit-scale profile at offset `d`.
    pub fn lookup(&self, d: &Vec3, v: &Vec3) -> SmoothedKernels {
        let rho = d.norm();
        if rho >= self.rho_max {
            return SmoothedKernels::raw(d, v);
        }
        let vn = v.norm();
        if vn > self.spec.v_max {
            self.direct_evaluations.fetch_add(1, Ordering::Relaxed);
            return self.direct(d, v);
        }
        let (ex, ey, ez) = frame(d, v);
        let th = d.dot(&ex).max(0.0).atan2(d.dot(&ez));
        let (iv, wv) = stencil(vn.atanh() / self.dw, self.spec.n_v);
        let (it, wt) = stencil(th / self.dth, self.spec.n_theta);
        let (iu, wu) = stencil((rho / self.rho0).asinh() / self.du, self.spec.n_rho);
        let (_, nt, nu) = self.dims();
        let mut c = [0.0; COMPONENTS];
        for (a, wa) in wv.iter().enumerate() {
            for (b, wb) in wt.iter().enumerate() {
                let wab = wa * wb;
                let base = ((iv + a) * nt + it + b) * nu + iu;
                for (e, we) in wu.iter().enumerate() {
                    let w = wab * we;
                    let at = (base + e) * COMPONENTS;
                    for (ci, x) in c.iter_mut().enumerate() {
                        *x += w * self.data[at + ci];
                    }
                }
            }
        }
        let k = unpack(&c, &ex, &ey, &ez);
        k.scaled((1.0 + rho).powi(-2), 1.0 / (1.0 + rho))
    }
}

/// First stored index and Lagrange weights of the four nodes around `u`.
///
/// Stored index `j` corresponds to grid node `j - 1`.
fn stencil(u: f64, n: usize) -> (usize, [f64; 4]) {
    let k = (u.max(0.0) as usize).min(n - 1);
    let t = u - k as f64;
    let x = t + 1.0;
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
    (k, w)
}

fn read_cache(path: &PathBuf, len: usize) -> Option<Vec<f64>> {
    let mut f = std::fs::File::open(path).ok()?;
    let mut bytes = Vec::new();
    f.read_to_end(&mut bytes).ok()?;
    if bytes.len() != 8 * len {
        return None;
    }
    Some(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8"))).collect())
}

fn write_cache(path: &PathBuf, data: &[f64]) -> std::io::Result<()> {
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        let mut buf = Vec::with_capacity(data.len() * 8);
        for x in data {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        f.write_all(&buf)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

/// Process-wide table shared by all evaluators with the same profile and spec.
pub fn shared_table(profile: Arc<dyn RadialProfile>, spec: KernelTableSpec) -> Arc<KernelTable> {
    type Registry = Mutex<HashMap<String, Arc<KernelTable>>>;
    static TABLES: OnceLock<Registry> = OnceLock::new();
    let key = format!("{}:{:?}", profile.name(), spec);
    let mut map = TABLES.get_or_init(Default::default).lock().unwrap_or_else(|e| e.into_inner());
    map.entry(key).or_insert_with(|| Arc::new(KernelTable::build(profile, spec))).clone()
}

/// A [`KernelTable`] rescaled to mollifier radius `r`.
#[derive(Debug, Clone)]
pub struct ScaledKernels {
    table: Arc<KernelTable>,
    radius: f64,
}

impl ScaledKernels {
    pub fn new(table: Arc<KernelTable>, radius: f64) -> Self {
        Self { table, radius }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn table(&self) -> &Arc<KernelTable> {
        &self.table
    }

    /// Support radius of the smoothing profile.
    pub fn support(&self) -> f64 {
        self.table.profile.support() * self.radius
    }

    /// Smoothed kernels at physical offset `d` from the source.
    pub fn eval(&self, d: &Vec3, v: &Vec3) -> SmoothedKernels {
        let r = self.radius;
        self.table.lookup(&(d / r), v).scaled(1.0 / (r * r), 1.0 / r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form_factor::{FormFactor, Mollifier, SmoothingOptions};

    #[test]
    fn ray_transform_matches_direct_convolution() {
        let chi = Arc::new(FormFactor::standard());
        let m = Mollifier::new(chi.clone(), 1.0);
        let spec = KernelTableSpec::default();
        let opts = SmoothingOptions { rel_tol: 1e-8, abs_tol: 1e-9, max_order: 64, ..Default::default() };
        let v = Vec3::new(0.2, -0.3, 0.4);
        let a = Vec3::new(0.7, 0.1, -0.5);
        for d in [Vec3::new(0.2, 0.1, -0.3), Vec3::new(0.9, 0.5, 0.0), Vec3::new(1.5, -1.0, 2.0)] {
            let k = ray_transform(chi.as_ref(), &d, &v, &spec);
            let e = m.smooth_kernel(|y| kernels::velocity_field(y, &v).unwrap(), &d, &opts).unwrap();
            assert!((k.e_vel - e).norm() < 1e-6 * e.norm(), "{} vs {}", k.e_vel, e);
            let b = m.smooth_kernel(|y| y.normalize().cross(&kernels::velocity_field(y, &v).unwrap()), &d, &opts).unwrap();
            assert!((k.b_vel - b).norm() < 1e-6 * e.norm());
            let ea = m.smooth_kernel(|y| kernels::acceleration_field(y, &v, &a).unwrap(), &d, &opts).unwrap();
            assert!((k.e_acc * a - ea).norm() < 1e-6 * ea.norm());
            let ba = m
                .smooth_kernel(|y| y.normalize().cross(&kernels::acceleration_field(y, &v, &a).unwrap()), &d, &opts)
                .unwrap();
            assert!((k.b_acc * a - ba).norm() < 1e-6 * ea.norm());
        }
    }

    #[test]
    fn stencil_weights_reproduce_cubics() {
        for u in [0.0, 0.3, 2.5, 9.99] {
            let (k, w) = stencil(u, 10);
            let f = |x: f64| 1.0 + x - 0.5 * x * x + 0.1 * x * x * x;
            let val: f64 = (0..4).map(|i| w[i] * f((k + i) as f64 - 1.0)).sum();
            assert!((val - f(u)).abs() < 1e-12);
        }
    }
}
