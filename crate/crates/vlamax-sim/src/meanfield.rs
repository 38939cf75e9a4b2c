//! The regularized mean-field flow, represented by a reference ensemble.
//!
//! `M` characteristics sampled from `f0` (in point-reflected pairs) carry
//! weight `1/M` and evolve in their own smoothed retarded field. Tracers
//! started at a configuration `Z` are then integrated through the frozen
//! reference histories with the same step and the same lag, so a tracer
//! started on a reference characteristic reproduces it exactly.

use vlamax_kinematics::{PhaseState, Vec3};

use crate::dynamics::{Drive, Dynamics, Ensemble};
use crate::error::{Result, SimError};
use crate::f0::F0Spec;

/// Reference characteristics of the mean-field density.
#[derive(Debug, Clone)]
pub struct ReferenceEnsemble {
    pub ensemble: Ensemble,
    pub f0: F0Spec,
    pub seed: u64,
}

impl ReferenceEnsemble {
    /// Samples `m` characteristics from `f0` with a static past.
    pub fn sample(f0: F0Spec, m: usize, seed: u64, dt: f64) -> Result<Self> {
        if m == 0 {
            return Err(SimError::InvalidConfig("reference ensemble needs at least one member".into()));
        }
        let states = f0.sample_antithetic(m, seed)?;
        Ok(Self { ensemble: Ensemble::normalized(states, dt)?, f0, seed })
    }

    /// Wraps existing characteristics, e.g. a cached ensemble.
    pub fn from_ensemble(ensemble: Ensemble, f0: F0Spec, seed: u64) -> Self {
        Self { ensemble, f0, seed }
    }

    pub fn len(&self) -> usize {
        self.ensemble.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ensemble.is_empty()
    }

    /// Self-consistent evolution by `steps` steps.
    pub fn evolve(&mut self, dynamics: &Dynamics, steps: usize) -> Result<()> {
        dynamics.run(&mut self.ensemble, Drive::SelfConsistent, steps)
    }

    /// Mean-field force `psi^N * (E + v x B)` at `(t, x)` for momentum `xi`.
    pub fn force(&self, dynamics: &Dynamics, t: f64, x: &Vec3, xi: &Vec3) -> Result<Vec3> {
        let sources = self.ensemble.sources();
        dynamics.force_from(&sources, None, t, &PhaseState::new(*x, *xi))
    }
}

/// Tracers `Phi_{t,0}(Z)` moving in the reference field.
#[derive(Debug, Clone)]
pub struct MeanFieldFlow {
    pub tracers: Ensemble,
}

impl MeanFieldFlow {
    /// Tracers at `z`, weighted `1/N` so that their empirical measure is normalized.
    pub fn new(z: Vec<PhaseState>, dt: f64) -> Result<Self> {
        Ok(Self { tracers: Ensemble::normalized(z, dt)? })
    }

    /// Tracers started at step `origin`, for `Phi_{t,s}` with `s = origin dt`.
    pub fn starting_at(z: Vec<PhaseState>, dt: f64, origin: usize) -> Result<Self> {
        let w = 1.0 / z.len().max(1) as f64;
        Ok(Self { tracers: Ensemble::starting_at(z, w, dt, origin)? })
    }

    /// Integrates the tracers through the reference histories by `steps` steps.
    pub fn advance(&mut self, dynamics: &Dynamics, reference: &ReferenceEnsemble, steps: usize) -> Result<()> {
        let have = reference.ensemble.steps();
        let need = self.tracers.origin() + self.tracers.steps() + steps;
        if need > have + 1 {
            return Err(SimError::InvalidConfig(format!("reference covers {have} steps, tracers need {need}")));
        }
        dynamics.run(&mut self.tracers, Drive::External(&reference.ensemble), steps)
    }
}

/// Evolves the reference first and then tracks `z` through it for `steps` steps.
pub fn track_flow(
    dynamics: &Dynamics,
    reference: &ReferenceEnsemble,
    z: Vec<PhaseState>,
    steps: usize,
) -> Result<MeanFieldFlow> {
    let outside = z.iter().filter(|p| !reference.f0.contains(p)).count();
    if outside > 0 {
        log::warn!("{outside} tracer start points lie outside supp f0");
    }
    let mut flow = MeanFieldFlow::new(z, reference.ensemble.dt())?;
    flow.advance(dynamics, reference, steps)?;
    Ok(flow)
}

/// Builds and evolves a reference ensemble for form factor `ff`.
pub fn evolve_reference(
    dynamics: &Dynamics,
    f0: F0Spec,
    m: usize,
    seed: u64,
    dt: f64,
    steps: usize,
) -> Result<ReferenceEnsemble> {
    let mut r = ReferenceEnsemble::sample(f0, m, seed, dt)?;
    r.evolve(dynamics, steps)?;
    Ok(r)
}

/// Radius `r_bar = a + T + 1` that bounds every position up to time `T`.
pub fn position_bound(f0: &F0Spec, t: f64) -> f64 {
    f0.x_radius + t + 1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use vlamax_fields::form_factor::{FormFactor, RescaledFormFactor};

    #[test]
    fn weights_sum_to_one() {
        let r = ReferenceEnsemble::sample(F0Spec::default(), 10, 1, 0.1).unwrap();
        assert!((r.ensemble.weight() * r.len() as f64 - 1.0).abs() < 1e-15);
        assert!(ReferenceEnsemble::sample(F0Spec::default(), 0, 1, 0.1).is_err());
    }

    #[test]
    fn tracers_need_reference_coverage() {
        let ff = RescaledFormFactor::with_radius(FormFactor::standard(), 0.5).unwrap();
        let d = Dynamics::new(&ff, Default::default());
        let r = evolve_reference(&d, F0Spec::default(), 4, 2, 0.05, 2).unwrap();
        let z = vec![PhaseState::new(Vec3::zeros(), Vec3::zeros())];
        assert!(track_flow(&d, &r, z.clone(), 4).is_err());
        let flow = track_flow(&d, &r, z, 2).unwrap();
        assert_eq!(flow.tracers.steps(), 2);
    }
}
