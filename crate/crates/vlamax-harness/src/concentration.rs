//! Concentration of the initial empirical measure around `f0`.

use vlamax_sim::F0Spec;
use vlamax_transport::{concentration_probe, ConcentrationSummary, EmpiricalMeasure, ProbeOptions, TransportError};

/// `N` draws from `f0` as phase-space atoms `(x, xi)`.
pub fn f0_measure(f0: &F0Spec, n: usize, seed: u64) -> vlamax_transport::Result<EmpiricalMeasure> {
    let z = f0.sample(n, seed).map_err(|e| TransportError::InvalidParameter(e.to_string()))?;
    EmpiricalMeasure::new(6, z.iter().flat_map(|p| [p.x.x, p.x.y, p.x.z, p.xi.x, p.xi.y, p.xi.z]).collect())
}

/// Two-sample `W_p` statistics between `N` draws and an independent reference draw, over seeds.
pub fn f0_concentration(f0: &F0Spec, n: usize, opts: &ProbeOptions) -> vlamax_transport::Result<ConcentrationSummary> {
    concentration_probe(|size, seed| f0_measure(f0, size, seed), n, opts)
}
