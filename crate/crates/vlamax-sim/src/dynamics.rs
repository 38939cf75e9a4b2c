//! Ensembles of rigid charges and their RK4 time stepping.
//!
//! Every step evaluates retarded fields against histories cut off at the
//! start of the step. Stage times beyond the cut-off see each source's
//! second-order extrapolation. The force of the fourth stage is stored with
//! the new sample, so the acceleration entering radiation terms at the
//! current time lags by one step.

use rayon::prelude::*;
use vlamax_fields::field::{FieldConfig, FieldEvaluator, Smoothing, Source};
use vlamax_fields::form_factor::RescaledFormFactor;
use vlamax_fields::history::TrajectoryHistory;
use vlamax_kinematics::{lorentz_force, velocity, PhaseState, Vec3};

use crate::error::{Result, SimError};

/// Charges of equal weight with their sampled trajectories.
#[derive(Debug, Clone)]
pub struct Ensemble {
    states: Vec<PhaseState>,
    histories: Vec<TrajectoryHistory>,
    weight: f64,
    dt: f64,
    origin: usize,
}

impl Ensemble {
    /// Charges at `states` with a static past, each carrying `weight`.
    pub fn new(states: Vec<PhaseState>, weight: f64, dt: f64) -> Result<Self> {
        if states.is_empty() {
            return Err(SimError::InvalidConfig("an ensemble needs at least one charge".into()));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SimError::InvalidConfig(format!("time step must be positive, got {dt}")));
        }
        if let Some(i) = states.iter().position(|z| !z.is_finite()) {
            return Err(SimError::NonFinite { particle: i, t: 0.0 });
        }
        let histories = states.iter().map(|z| TrajectoryHistory::new(dt, z, Vec3::zeros())).collect();
        Ok(Self { states, histories, weight, dt, origin: 0 })
    }

    /// Passive charges starting at time `origin * dt`.
    ///
    /// Their histories start at the origin, so such ensembles can be driven
    /// externally or move freely but never source fields.
    pub fn starting_at(states: Vec<PhaseState>, weight: f64, dt: f64, origin: usize) -> Result<Self> {
        let mut e = Self::new(states, weight, dt)?;
        e.origin = origin;
        Ok(e)
    }

    /// Step index of the first sample on the global time grid.
    pub fn origin(&self) -> usize {
        self.origin
    }

    /// `n` charges of weight `1 / n`.
    pub fn normalized(states: Vec<PhaseState>, dt: f64) -> Result<Self> {
        let w = 1.0 / states.len().max(1) as f64;
        Self::new(states, w, dt)
    }

    /// Rebuilds an ensemble from complete histories.
    pub fn from_histories(histories: Vec<TrajectoryHistory>, weight: f64) -> Result<Self> {
        let first = histories.first().ok_or_else(|| SimError::InvalidConfig("empty history set".into()))?;
        let (dt, len) = (first.dt(), first.len());
        if histories.iter().any(|h| h.len() != len || h.dt() != dt) {
            return Err(SimError::InvalidConfig("histories differ in length or step".into()));
        }
        let states = histories
            .iter()
            .map(|h| {
                let s = h.samples().last().expect("histories are never empty");
                PhaseState::new(s.x, s.xi)
            })
            .collect();
        Ok(Self { states, histories, weight, dt, origin: 0 })
    }

    pub fn states(&self) -> &[PhaseState] {
        &self.states
    }

    pub fn histories(&self) -> &[TrajectoryHistory] {
        &self.histories
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of completed steps.
    pub fn steps(&self) -> usize {
        self.histories[0].len() - 1
    }

    /// Current time `(origin + steps) dt`.
    pub fn time(&self) -> f64 {
        (self.origin + self.steps()) as f64 * self.dt
    }

    /// Forces recorded with the latest samples.
    pub fn forces(&self) -> Vec<Vec3> {
        self.histories.iter().map(|h| h.samples().last().expect("non-empty").k).collect()
    }

    /// State of particle `i` after step `n`.
    pub fn state_at(&self, i: usize, n: usize) -> PhaseState {
        let s = &self.histories[i].samples()[n];
        PhaseState::new(s.x, s.xi)
    }

    /// All states after step `n`.
    pub fn states_at(&self, n: usize) -> Vec<PhaseState> {
        (0..self.len()).map(|i| self.state_at(i, n)).collect()
    }

    /// Sources seeing samples up to step `n`.
    pub fn sources_upto(&self, n: usize) -> Vec<Source<'_>> {
        self.histories.iter().map(|h| Source { view: h.view_upto(n), weight: self.weight }).collect()
    }

    /// Sources seeing the complete histories.
    pub fn sources(&self) -> Vec<Source<'_>> {
        self.sources_upto(self.steps())
    }

    /// `R(t) = max_i |xi_i|` at the current time.
    pub fn momentum_support(&self) -> f64 {
        self.states.iter().map(|z| z.xi.norm()).fold(0.0, f64::max)
    }

    /// Largest `|xi|` over all recorded samples.
    pub fn max_momentum_support(&self) -> f64 {
        self.histories.iter().flat_map(|h| h.samples()).map(|s| s.xi.norm()).fold(0.0, f64::max)
    }

    /// Number of recorded samples with `|v| >= 1`.
    pub fn superluminal_samples(&self) -> usize {
        self.histories.iter().flat_map(|h| h.samples()).filter(|s| !(velocity(&s.xi).norm() < 1.0)).count()
    }

    fn set_initial_forces(&mut self, k: &[Vec3]) {
        for (h, k) in self.histories.iter_mut().zip(k) {
            h.set_last_force(*k);
        }
    }

    fn push(&mut self, states: Vec<PhaseState>, k: &[Vec3]) {
        for ((h, z), k) in self.histories.iter_mut().zip(&states).zip(k) {
            h.push(z.x, z.xi, *k);
        }
        self.states = states;
    }
}

/// What drives an ensemble.
#[derive(Debug, Clone, Copy)]
pub enum Drive<'a> {
    /// The ensemble's own fields.
    SelfConsistent,
    /// Fields of another ensemble, e.g. tracers in a reference ensemble.
    External(&'a Ensemble),
    /// No force.
    Free,
}

/// Settings of the particle dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsConfig {
    pub field: FieldConfig,
    /// Whether a charge feels its own smoothed field.
    pub include_self: bool,
    /// `C` in the abort threshold `|dxi| / dt > C / r_N^2`.
    pub stability_constant: f64,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        Self { field: FieldConfig::default(), include_self: true, stability_constant: 10.0 }
    }
}

/// Force evaluation and time stepping for one form factor.
#[derive(Debug, Clone)]
pub struct Dynamics {
    evaluator: FieldEvaluator,
    config: DynamicsConfig,
}

impl Dynamics {
    pub fn new(ff: &RescaledFormFactor, config: DynamicsConfig) -> Self {
        Self { evaluator: FieldEvaluator::new(ff, config.field), config }
    }

    pub fn evaluator(&self) -> &FieldEvaluator {
        &self.evaluator
    }

    pub fn config(&self) -> &DynamicsConfig {
        &self.config
    }

    /// Largest tolerated `|dxi| / dt`.
    pub fn stability_bound(&self) -> f64 {
        self.config.stability_constant / self.evaluator.radius().powi(2)
    }

    /// Smoothed Lorentz force from `sources`, skipping index `skip`, summed in index order.
    pub fn force_from(&self, sources: &[Source<'_>], skip: Option<usize>, t: f64, z: &PhaseState) -> Result<Vec3> {
        let mut acc = vlamax_fields::field::FieldBreakdown::default();
        for (j, s) in sources.iter().enumerate() {
            if Some(j) == skip {
                continue;
            }
            acc += s.weight * self.evaluator.source_breakdown(Smoothing::Force, &s.view, t, &z.x)?;
        }
        Ok(lorentz_force(&acc.sample(), &z.xi))
    }

    /// Force on particle `i` of `ens` at its current state and time.
    pub fn force_on(&self, ens: &Ensemble, i: usize, drive: Drive<'_>) -> Result<Vec3> {
        let n = ens.steps();
        let t = ens.time();
        match drive {
            Drive::Free => Ok(Vec3::zeros()),
            Drive::SelfConsistent => {
                let skip = (!self.config.include_self).then_some(i);
                self.force_from(&ens.sources_upto(n), skip, t, &ens.states[i])
            }
            Drive::External(d) => self.force_from(&d.sources_upto(ens.origin + n), None, t, &ens.states[i]),
        }
    }

    /// Records the forces at `t = 0` with the initial samples.
    pub fn initialize(&self, ens: &mut Ensemble, drive: Drive<'_>) -> Result<()> {
        if ens.steps() != 0 {
            return Err(SimError::InvalidConfig("forces can only be initialized before the first step".into()));
        }
        let k = (0..ens.len()).into_par_iter().map(|i| self.force_on(ens, i, drive)).collect::<Result<Vec<_>>>()?;
        ens.set_initial_forces(&k);
        Ok(())
    }

    /// Advances `ens` by one step of its history spacing.
    pub fn step(&self, ens: &mut Ensemble, drive: Drive<'_>) -> Result<()> {
        let n = ens.steps();
        let t = ens.time();
        let dt = ens.dt;
        let global = ens.origin + n;
        match drive {
            Drive::External(d) if d.steps() < global || d.dt != dt || d.origin != 0 => {
                return Err(SimError::InvalidConfig("driving ensemble does not cover the step".into()));
            }
            Drive::SelfConsistent if ens.origin != 0 => {
                return Err(SimError::InvalidConfig("ensembles with a shifted origin cannot source fields".into()));
            }
            _ => {}
        }
        let (next, k4) = {
            let own = ens.sources_upto(n);
            let ext = match drive {
                Drive::External(d) => d.sources_upto(global),
                _ => Vec::new(),
            };
            let force = |i: usize, s: f64, z: &PhaseState| -> Result<Vec3> {
                match drive {
                    Drive::Free => Ok(Vec3::zeros()),
                    Drive::SelfConsistent => {
                        self.force_from(&own, (!self.config.include_self).then_some(i), s, z)
                    }
                    Drive::External(_) => self.force_from(&ext, None, s, z),
                }
            };
            rk4_step(&ens.states, t, dt, force)?
        };
        let bound = self.stability_bound();
        for (i, (a, b)) in ens.states.iter().zip(&next).enumerate() {
            if !b.is_finite() {
                return Err(SimError::NonFinite { particle: i, t: t + dt });
            }
            let jump = (b.xi - a.xi).norm();
            if jump > bound * dt {
                return Err(SimError::Instability { particle: i, t: t + dt, jump, bound: bound * dt });
            }
        }
        ens.push(next, &k4);
        Ok(())
    }

    /// Initializes if needed and performs `steps` steps.
    pub fn run(&self, ens: &mut Ensemble, drive: Drive<'_>, steps: usize) -> Result<()> {
        if ens.steps() == 0 {
            self.initialize(ens, drive)?;
        }
        for _ in 0..steps {
            self.step(ens, drive)?;
        }
        Ok(())
    }
}

/// One classical RK4 step of `x' = v(xi)`, `xi' = K(t, x, xi)`.
///
/// Returns the new states and the force of the last stage. Stages are
/// evaluated in parallel over particles; results do not depend on the
/// number of workers.
pub fn rk4_step<F>(states: &[PhaseState], t: f64, dt: f64, force: F) -> Result<(Vec<PhaseState>, Vec<Vec3>)>
where
    F: Fn(usize, f64, &PhaseState) -> Result<Vec3> + Sync,
{
    let eval = |s: f64, zs: &[PhaseState]| -> Result<Vec<Vec3>> {
        zs.par_iter().enumerate().map(|(i, z)| force(i, s, z)).collect()
    };
    let shift = |c: f64, k: &[Vec3]| -> Vec<PhaseState> {
        states.iter().zip(k).map(|(z, k)| PhaseState::new(z.x + velocity(&z.xi) * c, z.xi + k * c)).collect()
    };
    let shift_from = |base: &[PhaseState], c: f64, src: &[PhaseState], k: &[Vec3]| -> Vec<PhaseState> {
        base.iter()
            .zip(src)
            .zip(k)
            .map(|((z, s), k)| PhaseState::new(z.x + velocity(&s.xi) * c, z.xi + k * c))
            .collect()
    };
    let h = 0.5 * dt;
    let k1 = eval(t, states)?;
    let z2 = shift(h, &k1);
    let k2 = eval(t + h, &z2)?;
    let z3 = shift_from(states, h, &z2, &k2);
    let k3 = eval(t + h, &z3)?;
    let z4 = shift_from(states, dt, &z3, &k3);
    let k4 = eval(t + dt, &z4)?;
    let w = dt / 6.0;
    let next = (0..states.len())
        .map(|i| {
            let (z, a, b, c) = (&states[i], &states[i].xi, &z2[i].xi, &z3[i].xi);
            let dx = velocity(a) + velocity(b) * 2.0 + velocity(c) * 2.0 + velocity(&z4[i].xi);
            let dxi = k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i];
            PhaseState::new(z.x + dx * w, z.xi + dxi * w)
        })
        .collect();
    Ok((next, k4))
}

#[cfg(test)]
mod tests {
    use super::*;
    use vlamax_fields::form_factor::FormFactor;

    fn free(_: usize, _: f64, _: &PhaseState) -> Result<Vec3> {
        Ok(Vec3::zeros())
    }

    #[test]
    fn free_motion_drifts_exactly() {
        let z = PhaseState::new(Vec3::new(0.1, 0.2, 0.3), Vec3::new(1.0, 0.0, 0.0));
        let (next, k) = rk4_step(&[z], 0.0, 0.01, free).unwrap();
        let expect = z.x + velocity(&z.xi) * 0.01;
        assert!((next[0].x - expect).norm() < 1e-15);
        assert_eq!(next[0].xi, z.xi);
        assert_eq!(k[0], Vec3::zeros());
    }

    #[test]
    fn free_motion_is_reversible() {
        let z = PhaseState::new(Vec3::new(-0.4, 0.2, 0.9), Vec3::new(0.3, -2.0, 0.7));
        let (fwd, _) = rk4_step(&[z], 0.0, 0.05, free).unwrap();
        let (back, _) = rk4_step(&fwd, 0.05, -0.05, free).unwrap();
        assert!((back[0].x - z.x).norm() < 1e-12);
    }

    #[test]
    fn constant_force_is_integrated_exactly_in_momentum() {
        let z = PhaseState::new(Vec3::zeros(), Vec3::zeros());
        let k = Vec3::new(0.0, 0.0, 0.5);
        let (next, _) = rk4_step(&[z], 0.0, 0.1, |_, _, _| Ok(k)).unwrap();
        assert!((next[0].xi - k * 0.1).norm() < 1e-15);
    }

    #[test]
    fn ensemble_validation() {
        assert!(Ensemble::normalized(vec![], 0.1).is_err());
        let bad = PhaseState::new(Vec3::new(f64::NAN, 0.0, 0.0), Vec3::zeros());
        assert!(matches!(Ensemble::normalized(vec![bad], 0.1), Err(SimError::NonFinite { .. })));
        let ok = PhaseState::new(Vec3::zeros(), Vec3::new(3.0, 4.0, 0.0));
        let e = Ensemble::normalized(vec![ok], 0.1).unwrap();
        assert_eq!(e.momentum_support(), 5.0);
        assert_eq!(e.steps(), 0);
    }

    #[test]
    fn free_drive_steps_and_records() {
        let ff = RescaledFormFactor::with_radius(FormFactor::standard(), 0.5).unwrap();
        let dynamics = Dynamics::new(&ff, DynamicsConfig::default());
        let z = PhaseState::new(Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0));
        let mut e = Ensemble::normalized(vec![z], 0.1).unwrap();
        dynamics.run(&mut e, Drive::Free, 3).unwrap();
        assert_eq!(e.steps(), 3);
        assert!((e.states()[0].x.x - 3.0 * 0.1 / 2f64.sqrt()).abs() < 1e-14);
        assert!((e.time() - 0.3).abs() < 1e-15);
        assert!(dynamics.initialize(&mut e, Drive::Free).is_err());
    }
}
