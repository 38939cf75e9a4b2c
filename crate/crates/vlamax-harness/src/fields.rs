//! Initial fields, lattice field sampling and field-slice export.
//!
//! With the pure Coulomb choice `E_in = -grad G * rho[f0]`, `B_in = 0`:
//!
//! * macroscopic: `E^N_in = chi^N * E_in`, `B^N_in = 0`;
//! * microscopic: `E^mu_in = E^N_in - grad G * (rho~[mu] - rho~[f0])`, which is
//!   the superposition of the smoothed Coulomb fields of the `N` charges, and
//!   `B^mu_in = B^N_in = 0`.
//!
//! The time evolution starts from the static past of the charges, which
//! reproduces exactly these fields at `t = 0`.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use vlamax_fields::field::{FieldBreakdown, FieldEvaluator, Source};
use vlamax_fields::form_factor::{Mollifier, RadialProfile, RescaledFormFactor};
use vlamax_kinematics::{PhaseState, Vec3};
use vlamax_sim::F0Spec;

use crate::error::{HarnessError, Result};

/// Schema tag of field-slice files.
pub const FIELD_SCHEMA: &str = "vlamax.fields.v1";

/// The two sets of initial fields for one configuration.
#[derive(Debug, Clone)]
pub struct InitialFields {
    chi: Mollifier,
    macro_field: Mollifier,
    smoothed_f0: Arc<dyn RadialProfile>,
    positions: Vec<Vec3>,
    weight: f64,
}

/// Largest `|div E_in - rho[f0]|` relative to the peak of `rho[f0]` at a few probes.
pub fn compatibility_defect(f0: &F0Spec) -> f64 {
    let e_in = Mollifier::new(Arc::new(f0.spatial()), 1.0);
    let peak = f0.spatial_density(&Vec3::zeros());
    let h = 1e-4 * f0.x_radius;
    let probes = [
        Vec3::new(0.1, 0.2, -0.1),
        Vec3::new(0.5, 0.0, 0.3),
        Vec3::new(-0.3, 0.6, 0.2),
        Vec3::new(0.0, 0.0, 0.9),
        Vec3::new(1.5, 0.2, 0.0),
    ]
    .map(|p| p * f0.x_radius);
    probes
        .iter()
        .map(|x| {
            let div: f64 = (0..3)
                .map(|a| {
                    let mut d = Vec3::zeros();
                    d[a] = h;
                    (e_in.coulomb(&(x + d))[a] - e_in.coulomb(&(x - d))[a]) / (2.0 * h)
                })
                .sum();
            (div - f0.spatial_density(x)).abs() / peak
        })
        .fold(0.0, f64::max)
}

/// Builds both initial field sets for the configuration `z`.
pub fn build_fields(f0: &F0Spec, z: &[PhaseState], ff: &RescaledFormFactor) -> Result<InitialFields> {
    let defect = compatibility_defect(f0);
    if defect > 1e-4 {
        return Err(HarnessError::Config(format!("initial field violates div E = rho by {defect:e}")));
    }
    if z.is_empty() {
        return Err(HarnessError::Config("no particles".into()));
    }
    let chi = ff.mollifier();
    let smoothed_f0 = f0.smoothed_spatial(&chi);
    Ok(InitialFields {
        macro_field: f0.smoothed_coulomb(&chi),
        chi,
        smoothed_f0,
        positions: z.iter().map(|p| p.x).collect(),
        weight: 1.0 / z.len() as f64,
    })
}

impl InitialFields {
    /// `E^N_in(x)`.
    pub fn e_macro(&self, x: &Vec3) -> Vec3 {
        self.macro_field.coulomb(x)
    }

    /// `B^N_in(x)`.
    pub fn b_macro(&self, _x: &Vec3) -> Vec3 {
        Vec3::zeros()
    }

    /// `E^mu_in(x)`, summed in particle order.
    pub fn e_micro(&self, x: &Vec3) -> Vec3 {
        self.positions.iter().fold(Vec3::zeros(), |e, y| e + self.chi.coulomb(&(x - y)) * self.weight)
    }

    /// `B^mu_in(x) = B^N_in(x)`.
    pub fn b_micro(&self, x: &Vec3) -> Vec3 {
        self.b_macro(x)
    }

    /// `rho~[mu](x)`.
    pub fn rho_micro(&self, x: &Vec3) -> f64 {
        self.positions.iter().map(|y| self.chi.value(&(x - y))).sum::<f64>() * self.weight
    }

    /// `rho~[f0](x)`.
    pub fn rho_macro(&self, x: &Vec3) -> f64 {
        self.smoothed_f0.density(x.norm())
    }
}

/// `rho~(x) = w sum chi(x - y_i)` for the given positions.
pub fn smoothed_density(chi: &Mollifier, positions: &[Vec3], weight: f64, x: &Vec3) -> f64 {
    positions.iter().map(|y| chi.value(&(x - y))).sum::<f64>() * weight
}

/// Field breakdowns at `points`, in point order.
pub fn lattice_fields(ev: &FieldEvaluator, sources: &[Source<'_>], t: f64, points: &[Vec3]) -> Result<Vec<FieldBreakdown>> {
    Ok(points.par_iter().map(|x| ev.field(sources, t, x)).collect::<std::result::Result<Vec<_>, _>>()?)
}

/// Maxima of field differences over a lattice.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FieldDifference {
    pub e: f64,
    pub b: f64,
    /// `max |(E, B) - (E', B')|` with the Euclidean norm on `R^6`.
    pub total: f64,
}

pub fn sup_difference(a: &[FieldBreakdown], b: &[FieldBreakdown]) -> FieldDifference {
    a.iter().zip(b).fold(FieldDifference::default(), |acc, (p, q)| {
        let de = (p.e() - q.e()).norm();
        let db = (p.b() - q.b()).norm();
        FieldDifference { e: acc.e.max(de), b: acc.b.max(db), total: acc.total.max(de.hypot(db)) }
    })
}

/// Column names of a field-slice file.
pub fn field_slice_header() -> Vec<String> {
    let mut cols: Vec<String> = ["t", "x", "y", "z"].iter().map(|s| s.to_string()).collect();
    for name in FieldBreakdown::NAMES {
        for c in ["x", "y", "z"] {
            cols.push(format!("{name}_{c}"));
        }
    }
    for name in ["E", "B"] {
        for c in ["x", "y", "z"] {
            cols.push(format!("{name}_{c}"));
        }
    }
    cols
}

/// Writes `# schema=...`, a header and one row per point.
pub fn write_field_slice<W: Write>(out: W, t: f64, points: &[Vec3], fields: &[FieldBreakdown]) -> Result<()> {
    let mut out = out;
    writeln!(out, "# schema={FIELD_SCHEMA}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(field_slice_header())?;
    for (x, f) in points.iter().zip(fields) {
        let mut row = vec![t, x.x, x.y, x.z];
        for c in f.components().iter().chain([f.e(), f.b()].iter()) {
            row.extend_from_slice(&[c.x, c.y, c.z]);
        }
        w.write_record(row.iter().map(|v| format!("{v:e}")))?;
    }
    w.flush()?;
    Ok(())
}
