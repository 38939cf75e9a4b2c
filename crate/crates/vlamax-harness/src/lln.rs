//! Law-of-large-numbers probe: particle sums of a smoothed kernel over
//! tracers against the same sum over the reference ensemble.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use vlamax_fields::form_factor::Mollifier;
use vlamax_kinematics::{PhaseState, Vec3};

use crate::error::{HarnessError, Result};
use crate::lattice::LatticeSpec;

/// Gap statistics over a lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlnReport {
    pub t: f64,
    pub tracers: usize,
    pub reference: usize,
    pub n_lat: usize,
    /// `(3 n_lat + 1)^3`.
    pub lattice_points: usize,
    pub gap_max: f64,
    pub gap_mean: f64,
}

fn kernel_mean(chi: &Mollifier, states: &[PhaseState], x: &Vec3) -> Vec3 {
    states.iter().fold(Vec3::zeros(), |acc, z| acc + chi.coulomb(&(x - z.x))) / states.len() as f64
}

/// `|(1/N) sum_i h(x - X_i) - (1/M) sum_j h(x - Y_j)|` at every lattice point,
/// with `h` the smoothed Coulomb field.
pub fn lln_probe(chi: &Mollifier, t: f64, tracers: &[PhaseState], reference: &[PhaseState], lattice: &LatticeSpec) -> Result<LlnReport> {
    if tracers.is_empty() || reference.is_empty() {
        return Err(HarnessError::Config("empty ensemble in law-of-large-numbers probe".into()));
    }
    let points = lattice.points();
    let gaps: Vec<f64> =
        points.par_iter().map(|x| (kernel_mean(chi, tracers, x) - kernel_mean(chi, reference, x)).norm()).collect();
    Ok(LlnReport {
        t,
        tracers: tracers.len(),
        reference: reference.len(),
        n_lat: lattice.n_lat,
        lattice_points: points.len(),
        gap_max: gaps.iter().copied().fold(0.0, f64::max),
        gap_mean: gaps.iter().sum::<f64>() / gaps.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use vlamax_fields::form_factor::{FormFactor, RescaledFormFactor};

    #[test]
    fn duplicated_reference_has_zero_gap() {
        let chi = RescaledFormFactor::with_radius(FormFactor::standard(), 0.4).unwrap().mollifier();
        let z: Vec<PhaseState> =
            (0..5).map(|i| PhaseState::new(Vec3::new(0.1 * i as f64, -0.2, 0.3), Vec3::zeros())).collect();
        let lat = LatticeSpec::new(1.0, 2).unwrap();
        let r = lln_probe(&chi, 0.0, &z, &z, &lat).unwrap();
        assert_eq!(r.gap_max, 0.0);
        assert_eq!(r.lattice_points, 7 * 7 * 7);
    }
}
