//! Concentration of empirical measures around their sampling density.
//!
//! `W_p(mu_N, f0)` for a continuous `f0` is estimated by the two-sample
//! distance between `mu_N` and an independent reference sample of size
//! `k N`. The `N` atoms are replicated `k` times so that both sides have
//! equal size and the assignment stays exact.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::{greedy_upper_bound, wasserstein_p};
use crate::error::{Result, TransportError};
use crate::measure::EmpiricalMeasure;
use crate::stats::quantile;

/// Settings of [`concentration_probe`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeOptions {
    pub p: f64,
    pub seeds: Vec<u64>,
    /// Reference size as a multiple of `N`.
    pub reference_factor: usize,
    /// Added to each seed to seed the reference sample.
    pub reference_offset: u64,
    /// Largest assignment solved exactly; larger problems use the greedy
    /// upper bound and are flagged approximate.
    pub max_exact: usize,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self { p: 1.0, seeds: (0..20).collect(), reference_factor: 1, reference_offset: 0x5eed_0000_0000, max_exact: 8192 }
    }
}

/// Distribution over seeds of the two-sample distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationSummary {
    pub n: usize,
    pub p: f64,
    pub reference_size: usize,
    pub values: Vec<f64>,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    /// Whether any value is a greedy upper bound rather than exact.
    pub approximate: bool,
}

/// `W_p` between `sample` replicated to the size of `reference` and `reference`.
pub fn two_sample_wp(sample: &EmpiricalMeasure, reference: &EmpiricalMeasure, p: f64) -> Result<f64> {
    let k = reference.len() / sample.len();
    if k == 0 || k * sample.len() != reference.len() {
        return Err(TransportError::SizeMismatch { left: sample.len(), right: reference.len() });
    }
    if k == 1 {
        wasserstein_p(sample, reference, p)
    } else {
        wasserstein_p(&sample.replicate(k), reference, p)
    }
}

/// Two-sample `W_p` statistics for `n` draws over the configured seeds.
///
/// `sample(m, seed)` must return `m` i.i.d. draws from `f0`, deterministic in `seed`.
pub fn concentration_probe<S>(sample: S, n: usize, opts: &ProbeOptions) -> Result<ConcentrationSummary>
where
    S: Fn(usize, u64) -> Result<EmpiricalMeasure> + Sync,
{
    if n == 0 || opts.reference_factor == 0 || opts.seeds.is_empty() {
        return Err(TransportError::InvalidParameter("need N, reference factor and seeds to be non-empty".into()));
    }
    let size = n * opts.reference_factor;
    let approximate = size > opts.max_exact;
    let one = |seed: &u64| -> Result<f64> {
        let mu = sample(n, *seed)?;
        let reference = sample(size, seed.wrapping_add(opts.reference_offset))?;
        if approximate {
            greedy_upper_bound(&mu.replicate(opts.reference_factor), &reference, opts.p)
        } else {
            two_sample_wp(&mu, &reference, opts.p)
        }
    };
    // Large cost matrices are solved one at a time to bound memory.
    let values: Vec<f64> = if size <= 2048 {
        opts.seeds.par_iter().map(one).collect::<Result<_>>()?
    } else {
        opts.seeds.iter().map(one).collect::<Result<_>>()?
    };
    Ok(ConcentrationSummary {
        n,
        p: opts.p,
        reference_size: size,
        median: quantile(&values, 0.5),
        q25: quantile(&values, 0.25),
        q75: quantile(&values, 0.75),
        values,
        approximate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(m: usize, seed: u64) -> Result<EmpiricalMeasure> {
        EmpiricalMeasure::new(1, (0..m).map(|i| ((i as u64 * 37 + seed * 11) % 101) as f64).collect())
    }

    #[test]
    fn identical_reference_gives_zero() {
        let opts = ProbeOptions { reference_offset: 0, seeds: vec![1, 2, 3], ..Default::default() };
        let s = concentration_probe(grid, 16, &opts).unwrap();
        assert_eq!(s.values, vec![0.0; 3]);
        assert!(!s.approximate);
    }

    #[test]
    fn replicated_reference_and_flags() {
        let a = EmpiricalMeasure::from_points(&[[0.0], [1.0]]).unwrap();
        let r = EmpiricalMeasure::from_points(&[[0.0], [0.0], [1.0], [1.0]]).unwrap();
        assert_eq!(two_sample_wp(&a, &r, 1.0).unwrap(), 0.0);
        assert!(two_sample_wp(&a, &EmpiricalMeasure::from_points(&[[0.0], [0.0], [1.0]]).unwrap(), 1.0).is_err());
        let opts = ProbeOptions { max_exact: 8, seeds: vec![4], ..Default::default() };
        assert!(concentration_probe(grid, 16, &opts).unwrap().approximate);
    }
}
