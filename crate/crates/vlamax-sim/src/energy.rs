//! Total energy `(1/N) sum gamma_i + 1/2 int (E^2 + B^2)`.
//!
//! Outside the light-cone neighbourhood `|x - y_j(0)| > t + S` of every
//! initial position the field is still the static field of the initial
//! configuration. The field energy is therefore split into the exact static
//! energy `1/2 sum_jk q_j q_k V(|y_j - y_k|)`, with `V = G * psi^N` the
//! interaction potential of two smoothed unit charges, plus a grid
//! quadrature of the time-dependent difference `1/2 (E^2 + B^2 - E_static^2)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use vlamax_fields::field::{FieldEvaluator, Smoothing};
use vlamax_fields::form_factor::Mollifier;
use vlamax_fields::quadrature::gauss;
use vlamax_kinematics::{gamma, Vec3};

use crate::dynamics::Ensemble;
use crate::error::{Result, SimError};

/// Uniform cell-centered grid on `[-L, L]^3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub spacing: f64,
    /// Half width `L`; chosen to cover every light cone when absent.
    pub half_width: Option<f64>,
}

impl GridSpec {
    pub fn new(spacing: f64) -> Self {
        Self { spacing, half_width: None }
    }
}

/// Energy balance at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub t: f64,
    pub kinetic: f64,
    pub field: f64,
    pub total: f64,
    /// Static self-energy `1/2 sum_j q_j^2 V(0)`, part of `field`.
    pub static_self: f64,
    /// Energy of the static field of the initial configuration.
    pub static_field: f64,
    pub spacing: f64,
    pub half_width: f64,
    pub points_per_axis: usize,
    /// Whether the grid contains every region where the field has changed.
    pub covers_light_cones: bool,
}

/// `V(d) = (G * m)(d)` for a radial unit mass `m`: the potential at distance `d`.
pub fn radial_potential(m: &Mollifier, d: f64) -> f64 {
    let s = m.support();
    if d >= s {
        return 1.0 / (4.0 * PI * d);
    }
    let g = gauss(16);
    let pieces = 32;
    let h = (s - d) / pieces as f64;
    let inner: f64 = (0..pieces)
        .map(|i| {
            let a = d + i as f64 * h;
            g.integrate(a, a + h, |r| m.enclosed(r) / (4.0 * PI * r * r))
        })
        .sum();
    1.0 / (4.0 * PI * s) + inner
}

/// Kinetic energy `w sum gamma_i`.
pub fn kinetic_energy(ens: &Ensemble) -> f64 {
    ens.weight() * ens.states().iter().map(|z| gamma(&z.xi)).sum::<f64>()
}

/// Energy of `ens` at its current time.
///
/// Fields come from `ev`, which may use a different model than the forces.
pub fn energy(ev: &FieldEvaluator, ens: &Ensemble, grid: &GridSpec) -> Result<EnergyReport> {
    let h = grid.spacing;
    if !(h > 0.0 && h.is_finite()) {
        return Err(SimError::InvalidConfig(format!("grid spacing must be positive, got {h}")));
    }
    let field_m = ev.mollifier(Smoothing::Field);
    let force_m = ev.mollifier(Smoothing::Force);
    let s = field_m.support();
    let t = ens.time();
    let w = ens.weight();
    let y0: Vec<Vec3> = ens.histories().iter().map(|hh| hh.initial_position()).collect();
    let reach = y0.iter().map(|y| y.amax()).fold(0.0, f64::max) + t + s;
    let wanted = grid.half_width.unwrap_or(reach + 2.0 * h);
    let per_axis = ((2.0 * wanted / h).ceil() as usize).max(1);
    let half = 0.5 * per_axis as f64 * h;
    let covers = half >= reach;
    if !covers {
        log::warn!("energy grid half width {half} misses field changes out to {reach}");
    }

    let v0 = radial_potential(force_m, 0.0);
    let mut static_field = 0.0;
    for a in &y0 {
        for b in &y0 {
            static_field += 0.5 * w * w * radial_potential(force_m, (a - b).norm());
        }
    }
    let static_self = 0.5 * w * w * v0 * y0.len() as f64;

    let sources = ens.sources();
    let coord = |i: usize| -half + (i as f64 + 0.5) * h;
    let slabs: Vec<f64> = (0..per_axis)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut acc = 0.0;
            for j in 0..per_axis {
                for k in 0..per_axis {
                    let x = Vec3::new(coord(i), coord(j), coord(k));
                    if y0.iter().all(|y| (x - y).norm() > t + s) {
                        continue;
                    }
                    let f = ev.field(&sources, t, &x)?;
                    let es: Vec3 = y0.iter().fold(Vec3::zeros(), |e, y| e + field_m.coulomb(&(x - y)) * w);
                    acc += 0.5 * (f.e().norm_squared() + f.b().norm_squared() - es.norm_squared());
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let dynamic: f64 = slabs.iter().sum::<f64>() * h * h * h;
    let kinetic = kinetic_energy(ens);
    let field = static_field + dynamic;
    Ok(EnergyReport {
        t,
        kinetic,
        field,
        total: kinetic + field,
        static_self,
        static_field,
        spacing: h,
        half_width: half,
        points_per_axis: per_axis,
        covers_light_cones: covers,
    })
}
