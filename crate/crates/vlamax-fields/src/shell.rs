//! Light-sphere terms that depend only on the initial data.
//!
//! For a source that sat at `y0` with momentum `xi0` at `t = 0`, and a
//! smoothing profile `phi`, the field point `y0 + D` at time `t` sees
//!
//! * `E0  = -(t / 4 pi) int omega phi(D - t omega) d omega`, the shell part of
//!   the free evolution of the initial Coulomb field;
//! * `E0' = (t / 4 pi) int (omega - v) / (1 - v.omega) phi(D - t omega) d omega`;
//! * `B0' = (t / 4 pi) int omega x (omega - v) / (1 - v.omega) phi(D - t omega) d omega`.
//!
//! The azimuthal integrals about `D` are done in closed form; the polar
//! integral uses Gauss-Legendre on the band where `phi` is supported.

use std::f64::consts::PI;

use vlamax_kinematics::Vec3;

use crate::form_factor::Mollifier;
use crate::quadrature::{gauss, orthonormal_pair};

/// Shell contributions of one source.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ShellTerms {
    pub e0: Vec3,
    pub e0_prime: Vec3,
    pub b0_prime: Vec3,
}

/// Default number of polar nodes.
pub const DEFAULT_SHELL_ORDER: usize = 24;

/// Azimuthal means of `1`, `cos`, `cos^2` over `c - b cos(phi)`, times `2 pi`.
fn azimuthal(c: f64, b: f64) -> (f64, f64, f64) {
    let beta = b / c;
    let root = (1.0 - beta * beta).sqrt();
    let i0 = 2.0 * PI / (c * root);
    let i2 = 2.0 * PI / (c * root * (1.0 + root));
    (i0, beta * i2, i2)
}

/// Shell terms for offset `d` from the initial position at time `t`, source
/// velocity `v` at `t = 0` and smoothing profile `phi`.
pub fn shell_terms(phi: &Mollifier, t: f64, d: &Vec3, v: &Vec3, order: usize) -> ShellTerms {
    let s = phi.support();
    let dn = d.norm();
    if t <= 0.0 || (dn - t).abs() >= s {
        return ShellTerms::default();
    }
    let e3 = if dn > 1e-12 * s { d / dn } else { Vec3::z() };
    let v_par = v.dot(&e3);
    let perp = v - e3 * v_par;
    let v_perp = perp.norm();
    let e1 = if v_perp > 1e-15 { perp / v_perp } else { orthonormal_pair(&e3).0 };
    let e2 = e3.cross(&e1);
    let mu_lo = if dn * t > 0.0 { ((dn * dn + t * t - s * s) / (2.0 * dn * t)).max(-1.0) } else { -1.0 };
    if mu_lo >= 1.0 {
        return ShellTerms::default();
    }
    let mut e0 = 0.0;
    let (mut p1, mut p3, mut q2) = (0.0, 0.0, 0.0);
    for (mu, w) in gauss(order).mapped(mu_lo, 1.0) {
        let rho2 = (dn * dn + t * t - 2.0 * dn * t * mu).max(0.0);
        let f = phi.density(rho2.sqrt());
        if f == 0.0 {
            continue;
        }
        let sig = (1.0 - mu * mu).max(0.0).sqrt();
        let a = mu * v_par;
        let b = sig * v_perp;
        let (i0, i1, _) = azimuthal(1.0 - a, b);
        let wf = w * f;
        e0 -= wf * 2.0 * PI * mu;
        p1 += wf * (sig * i1 - v_perp * i0);
        p3 += wf * (mu - v_par) * i0;
        q2 -= wf * (mu * v_perp * i0 - sig * v_par * i1);
    }
    let scale = t / (4.0 * PI);
    ShellTerms {
        e0: e3 * (e0 * scale),
        e0_prime: (e1 * p1 + e3 * p3) * scale,
        b0_prime: e2 * (q2 * scale),
    }
}

/// Mass fraction of `phi` centered at distance `dn` from the origin that
/// lies inside the ball of radius `t` about the origin.
pub fn inside_fraction(phi: &Mollifier, dn: f64, t: f64, order: usize) -> f64 {
    let s = phi.support();
    if t <= 0.0 || dn >= t + s {
        return 0.0;
    }
    if dn + s <= t {
        return 1.0;
    }
    // A sphere of radius r about the center lies inside for
    // mu > (dn^2 + r^2 - t^2) / (2 dn r), a cap of relative area (1 - mu) / 2.
    let cap = |r: f64| -> f64 {
        if dn <= 1e-12 * s {
            return if r < t { 1.0 } else { 0.0 };
        }
        let mu = ((dn * dn + r * r - t * t) / (2.0 * dn * r)).clamp(-1.0, 1.0);
        0.5 * (1.0 - mu)
    };
    let mut cuts = vec![0.0, s];
    for c in [(dn - t).abs(), dn + t] {
        if c > 0.0 && c < s {
            cuts.push(c);
        }
    }
    cuts.sort_by(|a, b| a.total_cmp(b));
    let g = gauss(order);
    cuts.windows(2)
        .map(|w| g.integrate(w[0], w[1], |r| 4.0 * PI * r * r * phi.density(r) * cap(r)))
        .sum::<f64>()
        .clamp(0.0, 1.0)
}
