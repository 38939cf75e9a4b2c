//! The initial phase-space density `f0` and sampling from it.
//!
//! `f0(x, xi) = chi_a(x) chi_b(xi)` is a product of two normalized radial
//! bumps with radii `a` (position) and `b` (momentum).

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use vlamax_fields::form_factor::{convolve_radial, FormFactor, Mollifier, RadialProfile};
use vlamax_kinematics::{PhaseState, Vec3};

use crate::error::{Result, SimError};

/// Lowest acceptance rate tolerated by the rejection sampler.
pub const ACCEPTANCE_FLOOR: f64 = 1e-4;

/// Product-bump initial density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F0Spec {
    /// Support radius in position.
    pub x_radius: f64,
    /// Support radius in momentum.
    pub xi_radius: f64,
}

impl Default for F0Spec {
    fn default() -> Self {
        Self { x_radius: 1.0, xi_radius: 0.5 }
    }
}

/// A unit-radius profile rescaled to radius `radius`.
#[derive(Debug, Clone)]
pub struct ScaledProfile {
    inner: Arc<dyn RadialProfile>,
    radius: f64,
    name: String,
}

impl ScaledProfile {
    pub fn new(inner: Arc<dyn RadialProfile>, radius: f64) -> Self {
        let name = format!("{}@{radius:e}", inner.name());
        Self { inner, radius, name }
    }

    /// The standard bump at radius `radius`.
    pub fn bump(radius: f64) -> Self {
        Self::new(Arc::new(FormFactor::standard()), radius)
    }
}

impl RadialProfile for ScaledProfile {
    fn name(&self) -> &str {
        &self.name
    }
    fn support(&self) -> f64 {
        self.inner.support() * self.radius
    }
    fn density(&self, s: f64) -> f64 {
        self.inner.density(s / self.radius) / self.radius.powi(3)
    }
    fn derivative(&self, s: f64) -> f64 {
        self.inner.derivative(s / self.radius) / self.radius.powi(4)
    }
    fn enclosed(&self, s: f64) -> f64 {
        self.inner.enclosed(s / self.radius)
    }
}

impl F0Spec {
    pub fn validate(&self) -> Result<()> {
        let ok = |r: f64| r > 0.0 && r.is_finite();
        if ok(self.x_radius) && ok(self.xi_radius) {
            Ok(())
        } else {
            Err(SimError::InvalidConfig(format!("f0 radii must be positive: {self:?}")))
        }
    }

    pub fn spatial(&self) -> ScaledProfile {
        ScaledProfile::bump(self.x_radius)
    }

    pub fn momentum(&self) -> ScaledProfile {
        ScaledProfile::bump(self.xi_radius)
    }

    /// Position marginal `rho[f0](x)`.
    pub fn spatial_density(&self, x: &Vec3) -> f64 {
        self.spatial().density(x.norm())
    }

    /// Joint density at a phase-space point.
    pub fn density(&self, z: &PhaseState) -> f64 {
        self.spatial().density(z.x.norm()) * self.momentum().density(z.xi.norm())
    }

    /// Whether `z` lies in the open support.
    pub fn contains(&self, z: &PhaseState) -> bool {
        z.x.norm() < self.x_radius && z.xi.norm() < self.xi_radius
    }

    /// `E[x_1^2]` under `f0`, by radial quadrature.
    pub fn coordinate_variance(&self) -> f64 {
        let p = self.spatial();
        let n = 4000;
        let h = self.x_radius / n as f64;
        // Simpson on s^4 rho(s)
        let f = |s: f64| 4.0 * PI * s.powi(4) * p.density(s);
        let mut acc = f(0.0) + f(self.x_radius);
        for i in 1..n {
            acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0 / 3.0
    }

    /// `m * rho[f0]` as a radial profile.
    pub fn smoothed_spatial(&self, m: &Mollifier) -> Arc<dyn RadialProfile> {
        let scaled = ScaledProfile::new(m.profile().clone(), m.radius());
        Arc::new(convolve_radial("rho_f0*m", &self.spatial(), &scaled, 1024))
    }

    /// Electrostatic field `-grad G * (m * rho[f0])` as a unit-radius mollifier.
    ///
    /// With `m = chi^N` this is the macroscopic initial field `E^N_in`.
    pub fn smoothed_coulomb(&self, m: &Mollifier) -> Mollifier {
        Mollifier::new(self.smoothed_spatial(m), 1.0)
    }

    /// `n` i.i.d. draws; deterministic in `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<PhaseState>> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sampler = BumpSampler::default();
        (0..n)
            .map(|_| {
                let x = sampler.draw(&mut rng, self.x_radius)?;
                let xi = sampler.draw(&mut rng, self.xi_radius)?;
                Ok(PhaseState::new(x, xi))
            })
            .collect()
    }

    /// `m` draws in point-reflected pairs `(x, xi), (-x, -xi)`.
    pub fn sample_antithetic(&self, m: usize, seed: u64) -> Result<Vec<PhaseState>> {
        let half = self.sample(m.div_ceil(2), seed)?;
        let mut out = Vec::with_capacity(m);
        for z in half {
            out.push(z);
            if out.len() < m {
                out.push(PhaseState::new(-z.x, -z.xi));
            }
        }
        Ok(out)
    }
}

/// Rejection sampler for the radial bump with acceptance bookkeeping.
#[derive(Debug, Default)]
struct BumpSampler {
    trials: u64,
    accepted: u64,
}

impl BumpSampler {
    fn draw(&mut self, rng: &mut ChaCha8Rng, radius: f64) -> Result<Vec3> {
        loop {
            self.trials += 1;
            if self.trials >= 10_000 {
                let rate = self.accepted as f64 / self.trials as f64;
                if rate < ACCEPTANCE_FLOOR {
                    return Err(SimError::RejectionFloor { rate });
                }
            }
            let u = Vec3::new(
                2.0 * rng.random::<f64>() - 1.0,
                2.0 * rng.random::<f64>() - 1.0,
                2.0 * rng.random::<f64>() - 1.0,
            );
            let s2 = u.norm_squared();
            if s2 >= 1.0 {
                continue;
            }
            // bump(s) / bump(0) = exp(1 - 1 / (1 - s^2))
            let ratio = (1.0 - 1.0 / (1.0 - s2)).exp();
            if rng.random::<f64>() < ratio {
                self.accepted += 1;
                return Ok(u * radius);
            }
        }
    }
}
