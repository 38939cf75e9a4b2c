//! Stored trajectories and the retarded-time solve.
//!
//! A history holds samples `(x, xi, K)` on a uniform time grid starting at
//! `t = 0`. Before `t = 0` each charge is at rest at its initial position
//! (static past). Between samples the position is a cubic Hermite
//! interpolant of `(x, v(xi))`, the momentum a Hermite interpolant of
//! `(xi, K)` and the force is linear. After the last visible sample the
//! motion is extrapolated to second order.

use vlamax_kinematics::{acceleration, tol, velocity, PhaseState, Vec3};

use crate::error::{FieldError, Result};

/// One stored sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub x: Vec3,
    pub xi: Vec3,
    /// Force acting at the sample time.
    pub k: Vec3,
}

/// Kinematic state of a source at some time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceState {
    pub x: Vec3,
    pub xi: Vec3,
    /// Velocity `v(xi)`.
    pub v: Vec3,
    /// Time derivative of the interpolated position.
    pub dx: Vec3,
    pub k: Vec3,
}

impl SourceState {
    /// Acceleration implied by the stored force.
    pub fn acceleration(&self) -> Vec3 {
        acceleration(&self.xi, &self.k)
    }
}

/// Uniformly sampled trajectory of one charge.
#[derive(Debug, Clone)]
pub struct TrajectoryHistory {
    dt: f64,
    samples: Vec<Sample>,
}

impl TrajectoryHistory {
    /// Starts a history at `t = 0` from `initial` with force `k0`.
    pub fn new(dt: f64, initial: &PhaseState, k0: Vec3) -> Self {
        assert!(dt > 0.0 && dt.is_finite(), "history step must be positive");
        Self { dt, samples: vec![Sample { x: initial.x, xi: initial.xi, k: k0 }] }
    }

    /// A charge at rest at `x` forever.
    pub fn at_rest(dt: f64, x: Vec3) -> Self {
        Self::new(dt, &PhaseState::new(x, Vec3::zeros()), Vec3::zeros())
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    /// Time of the last sample.
    pub fn end_time(&self) -> f64 {
        self.dt * (self.samples.len() - 1) as f64
    }

    pub fn initial_position(&self) -> Vec3 {
        self.samples[0].x
    }

    /// Appends the sample at `end_time() + dt`.
    pub fn push(&mut self, x: Vec3, xi: Vec3, k: Vec3) {
        self.samples.push(Sample { x, xi, k });
    }

    /// Replaces the force stored with the last sample.
    pub fn set_last_force(&mut self, k: Vec3) {
        if let Some(s) = self.samples.last_mut() {
            s.k = k;
        }
    }

    /// Largest sampled speed.
    pub fn max_speed(&self) -> f64 {
        self.samples.iter().map(|s| velocity(&s.xi).norm()).fold(0.0, f64::max)
    }

    /// View of all samples.
    pub fn view(&self) -> HistoryView<'_> {
        HistoryView { hist: self, upto: self.samples.len() - 1 }
    }

    /// View that ignores samples after index `upto`.
    pub fn view_upto(&self, upto: usize) -> HistoryView<'_> {
        HistoryView { hist: self, upto: upto.min(self.samples.len() - 1) }
    }

    /// Builds a history by sampling an analytic trajectory `s -> (x, xi, K)`.
    pub fn from_fn<F: Fn(f64) -> (Vec3, Vec3, Vec3)>(dt: f64, steps: usize, f: F) -> Self {
        let samples = (0..=steps)
            .map(|i| {
                let (x, xi, k) = f(i as f64 * dt);
                Sample { x, xi, k }
            })
            .collect();
        Self { dt, samples }
    }
}

/// Read-only window on a history, cut off after sample `upto`.
#[derive(Debug, Clone, Copy)]
pub struct HistoryView<'a> {
    hist: &'a TrajectoryHistory,
    upto: usize,
}

impl<'a> HistoryView<'a> {
    pub fn history(&self) -> &'a TrajectoryHistory {
        self.hist
    }

    /// Index of the last visible sample.
    pub fn upto(&self) -> usize {
        self.upto
    }

    /// Time of the last visible sample.
    pub fn end_time(&self) -> f64 {
        self.hist.dt * self.upto as f64
    }

    pub fn initial_position(&self) -> Vec3 {
        self.hist.samples[0].x
    }

    /// Interpolated state at time `s`.
    pub fn state(&self, s: f64) -> SourceState {
        let samples = &self.hist.samples;
        if s < 0.0 {
            let x = samples[0].x;
            return SourceState { x, xi: Vec3::zeros(), v: Vec3::zeros(), dx: Vec3::zeros(), k: Vec3::zeros() };
        }
        let h = self.hist.dt;
        let end = self.end_time();
        if s >= end {
            let last = &samples[self.upto];
            let tau = s - end;
            let v = velocity(&last.xi);
            let a = acceleration(&last.xi, &last.k);
            let xi = last.xi + last.k * tau;
            return SourceState {
                x: last.x + v * tau + a * (0.5 * tau * tau),
                xi,
                v: velocity(&xi),
                dx: v + a * tau,
                k: last.k,
            };
        }
        let u = s / h;
        let i = (u as usize).min(self.upto - 1);
        let t = u - i as f64;
        let (a, b) = (&samples[i], &samples[i + 1]);
        let (va, vb) = (velocity(&a.xi), velocity(&b.xi));
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let d00 = (6.0 * t2 - 6.0 * t) / h;
        let d10 = (3.0 * t2 - 4.0 * t + 1.0) / h;
        let d01 = -d00;
        let d11 = (3.0 * t2 - 2.0 * t) / h;
        let x = a.x * h00 + va * (h10 * h) + b.x * h01 + vb * (h11 * h);
        let dx = a.x * d00 + va * (d10 * h) + b.x * d01 + vb * (d11 * h);
        let xi = a.xi * h00 + a.k * (h10 * h) + b.xi * h01 + b.k * (h11 * h);
        let k = a.k * (1.0 - t) + b.k * t;
        SourceState { x, xi, v: velocity(&xi), dx, k }
    }
}

/// Source state at the retarded time of a field point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetardedPoint {
    pub t_ret: f64,
    pub x: Vec3,
    pub xi: Vec3,
    pub v: Vec3,
    pub k: Vec3,
    /// Unit vector from the retarded position to the field point.
    pub n: Vec3,
    /// Distance from the retarded position to the field point.
    pub r: f64,
}

impl RetardedPoint {
    /// Offset from the retarded source position to the field point.
    pub fn offset(&self) -> Vec3 {
        self.n * self.r
    }

    /// Acceleration implied by the stored force.
    pub fn acceleration(&self) -> Vec3 {
        acceleration(&self.xi, &self.k)
    }
}

const MAX_ITER: usize = 200;

/// Solves `|x - y(s)| = t - s` for the retarded time `s`.
///
/// Returns `None` when the initial position lies outside the closed ball
/// `B_t(x)`, i.e. when the backward cone only meets the static past. Uses
/// Newton steps safeguarded by a bisection bracket.
pub fn retarded_time(view: &HistoryView<'_>, t: f64, x: &Vec3) -> Result<Option<RetardedPoint>> {
    let d0 = (x - view.initial_position()).norm();
    if !(d0 <= t) {
        return Ok(None);
    }
    let eval = |s: f64| {
        let st = view.state(s);
        let w = x - st.x;
        let r = w.norm();
        (st, w, r, r - (t - s))
    };
    let finish = |s: f64, st: SourceState, w: Vec3, r: f64| {
        let n = if r > 0.0 { w / r } else { Vec3::zeros() };
        RetardedPoint { t_ret: s, x: st.x, xi: st.xi, v: st.v, k: st.k, n, r }
    };
    let (mut lo, mut hi) = (0.0_f64, t);
    let (st_hi, w_hi, r_hi, h_hi) = eval(hi);
    if h_hi <= 0.0 {
        return Ok(Some(finish(hi, st_hi, w_hi, r_hi)));
    }
    let mut s = (t - r_hi).clamp(lo, hi);
    for _ in 0..MAX_ITER {
        let (st, w, r, h) = eval(s);
        if h.abs() < 1e-13 * (1.0 + t) {
            return Ok(Some(finish(s, st, w, r)));
        }
        if h < 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        let slope = if r > 0.0 { 1.0 - w.dot(&st.dx) / r } else { 1.0 };
        if !(slope > 0.0) {
            return Err(FieldError::CorruptHistory { s, slope });
        }
        let next = s - h / slope;
        s = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        if hi - lo < 1e-15 * (1.0 + t) {
            let (st, w, r, h) = eval(s);
            if h.abs() < tol::RETARDED_RESIDUAL {
                return Ok(Some(finish(s, st, w, r)));
            }
            return Err(FieldError::RetardedResidual { residual: h.abs() });
        }
    }
    let (st, w, r, h) = eval(s);
    if h.abs() < tol::RETARDED_RESIDUAL {
        Ok(Some(finish(s, st, w, r)))
    } else {
        Err(FieldError::RetardedResidual { residual: h.abs() })
    }
}
