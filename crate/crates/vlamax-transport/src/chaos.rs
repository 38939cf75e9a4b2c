//! The capped chaos process comparing microscopic and mean-field trajectories.
//!
//! `J(t) = min{1, lambda(N) N^delta sup_{s<=t} |X - Y|_inf + N^delta sup_{s<=t} |P - Q|_inf}`
//! where `X, P` are the microscopic positions and momenta, `Y, Q` the
//! mean-field ones, `|.|_inf` is the maximum over particles of the Euclidean
//! norm and `lambda(N) = max{1, sqrt(log N)}`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TransportError};

/// `max{1, sqrt(ln N)}`.
pub fn lambda_n(n: usize) -> f64 {
    (n.max(1) as f64).ln().sqrt().max(1.0)
}

/// Parameters of the chaos process for one particle number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChaosMetricConfig {
    pub n: usize,
    pub delta: f64,
    pub lambda_n: f64,
}

impl ChaosMetricConfig {
    pub fn new(n: usize, delta: f64) -> Result<Self> {
        if n == 0 || !delta.is_finite() {
            return Err(TransportError::InvalidParameter(format!("need N >= 1 and finite delta, got N = {n}, delta = {delta}")));
        }
        Ok(Self { n, delta, lambda_n: lambda_n(n) })
    }

    /// `N^delta`.
    pub fn scale(&self) -> f64 {
        (self.n as f64).powf(self.delta)
    }
}

/// Positions and momenta of `N` particles at a common list of times.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectories {
    pub times: Vec<f64>,
    /// `x[k][i]`: position of particle `i` at `times[k]`.
    pub x: Vec<Vec<[f64; 3]>>,
    pub xi: Vec<Vec<[f64; 3]>>,
}

impl Trajectories {
    pub fn push(&mut self, t: f64, x: Vec<[f64; 3]>, xi: Vec<[f64; 3]>) {
        self.times.push(t);
        self.x.push(x);
        self.xi.push(xi);
    }

    pub fn particles(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.times.len() != other.times.len() {
            return Err(TransportError::GridMismatch(format!("{} vs {} samples", self.times.len(), other.times.len())));
        }
        for (a, b) in self.times.iter().zip(&other.times) {
            if (a - b).abs() > 1e-12 * (1.0 + a.abs()) {
                return Err(TransportError::GridMismatch(format!("time {a} vs {b}")));
            }
        }
        let sizes_ok = |t: &Self| t.x.len() == t.times.len() && t.xi.len() == t.times.len();
        if !sizes_ok(self) || !sizes_ok(other) {
            return Err(TransportError::GridMismatch("frame count differs from time count".into()));
        }
        let n = self.particles();
        let all = |t: &Self| t.x.iter().chain(&t.xi).all(|f| f.len() == n);
        if !all(self) || !all(other) {
            return Err(TransportError::SizeMismatch { left: n, right: other.particles() });
        }
        Ok(())
    }
}

/// Components of `J(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChaosReport {
    pub t: f64,
    /// `sup_{s<=t} max_i |x_i - y_i|`.
    pub sup_x: f64,
    /// `sup_{s<=t} max_i |xi_i - q_i|`.
    pub sup_xi: f64,
    /// The uncapped value.
    pub raw: f64,
    /// `min{1, raw}`.
    pub j: f64,
}

fn max_dev(a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt())
        .fold(0.0, f64::max)
}

/// `J(t)` with the supremum taken over the stored samples with time `<= t`.
pub fn chaos_process_j(micro: &Trajectories, mf: &Trajectories, cfg: &ChaosMetricConfig, t: f64) -> Result<ChaosReport> {
    micro.check(mf)?;
    let end = micro.times.last().copied().ok_or_else(|| TransportError::GridMismatch("no samples".into()))?;
    let tol = 1e-12 * (1.0 + t.abs());
    if t > end + tol || micro.times[0] > tol {
        return Err(TransportError::GridMismatch(format!("samples cover [{}, {end}], need [0, {t}]", micro.times[0])));
    }
    let mut sup_x: f64 = 0.0;
    let mut sup_xi: f64 = 0.0;
    for k in (0..micro.times.len()).take_while(|&k| micro.times[k] <= t + tol) {
        sup_x = sup_x.max(max_dev(&micro.x[k], &mf.x[k]));
        sup_xi = sup_xi.max(max_dev(&micro.xi[k], &mf.xi[k]));
    }
    let raw = cfg.scale() * (cfg.lambda_n * sup_x + sup_xi);
    Ok(ChaosReport { t, sup_x, sup_xi, raw, j: raw.min(1.0) })
}

/// `J` at every stored time.
pub fn chaos_series(micro: &Trajectories, mf: &Trajectories, cfg: &ChaosMetricConfig) -> Result<Vec<ChaosReport>> {
    micro.times.iter().map(|&t| chaos_process_j(micro, mf, cfg, t)).collect()
}
