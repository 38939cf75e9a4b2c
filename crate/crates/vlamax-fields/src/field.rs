//! Decomposed smoothed fields of an ensemble of charges.
//!
//! Each source contributes, at `(t, x)` and with `y0`, `v0` its initial
//! position and velocity:
//!
//! * `E0`: the smoothed Coulomb field of `y0` while `(t, x)` has not yet
//!   seen the source move, plus the shell part of the free evolution;
//! * `E0'`, `B0'`: the light-sphere shock terms of the initial data;
//! * `E1`, `B1`: the smoothed relativistic Coulomb term at the retarded time;
//! * `E2`, `B2`: the smoothed radiation term driven by the stored force.
//!
//! `B0` vanishes because the initial magnetic field is zero.
//!
//! Two models are offered. [`FieldModel::Frozen`] evaluates the retarded
//! point of the smoothing center only and applies tabulated smoothed
//! kernels there; it is cheap and used for ensembles. Across the initial
//! light sphere it blends the static field and the retarded kernels by the
//! profile mass inside the sphere, using the initial motion continued
//! uniformly into the past outside it, so that fields stay continuous in
//! time. [`FieldModel::Exact`]
//! integrates the unsmoothed retarded field against the profile by ray
//! quadrature, splitting rays at the light sphere of the initial position.
//! [`FieldModel::Hybrid`] is exact within a few supports of the source's
//! present position and frozen farther out, where the frozen error decays
//! like `(S / d)^2`.

use std::ops::{Add, AddAssign, Mul};
use std::sync::Arc;

use vlamax_kinematics::{lorentz_force, velocity, FieldSample, Vec3};

use crate::error::Result;
use crate::form_factor::{ray_rule_split, Mollifier, RadialProfile, RescaledFormFactor};
use crate::history::{retarded_time, HistoryView, RetardedPoint};
use crate::kernels;
use crate::shell::{inside_fraction, shell_terms, DEFAULT_SHELL_ORDER};
use crate::tables::{shared_table, KernelTableSpec, ScaledKernels};

/// The eight field components at one space-time point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FieldBreakdown {
    pub e0: Vec3,
    pub e0_prime: Vec3,
    pub e1: Vec3,
    pub e2: Vec3,
    pub b0: Vec3,
    pub b0_prime: Vec3,
    pub b1: Vec3,
    pub b2: Vec3,
}

impl FieldBreakdown {
    /// Component names in the order of [`FieldBreakdown::components`].
    pub const NAMES: [&'static str; 8] = ["E0", "E0p", "E1", "E2", "B0", "B0p", "B1", "B2"];

    /// Total electric field, summed in component order.
    pub fn e(&self) -> Vec3 {
        ((self.e0 + self.e0_prime) + self.e1) + self.e2
    }

    /// Total magnetic field, summed in component order.
    pub fn b(&self) -> Vec3 {
        ((self.b0 + self.b0_prime) + self.b1) + self.b2
    }

    pub fn sample(&self) -> FieldSample {
        FieldSample::new(self.e(), self.b())
    }

    pub fn components(&self) -> [Vec3; 8] {
        [self.e0, self.e0_prime, self.e1, self.e2, self.b0, self.b0_prime, self.b1, self.b2]
    }

    pub fn is_finite(&self) -> bool {
        self.components().iter().all(vlamax_kinematics::is_finite)
    }
}

impl Add for FieldBreakdown {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        self += o;
        self
    }
}

impl AddAssign for FieldBreakdown {
    fn add_assign(&mut self, o: Self) {
        self.e0 += o.e0;
        self.e0_prime += o.e0_prime;
        self.e1 += o.e1;
        self.e2 += o.e2;
        self.b0 += o.b0;
        self.b0_prime += o.b0_prime;
        self.b1 += o.b1;
        self.b2 += o.b2;
    }
}

impl Mul<FieldBreakdown> for f64 {
    type Output = FieldBreakdown;
    fn mul(self, f: FieldBreakdown) -> FieldBreakdown {
        FieldBreakdown {
            e0: f.e0 * self,
            e0_prime: f.e0_prime * self,
            e1: f.e1 * self,
            e2: f.e2 * self,
            b0: f.b0 * self,
            b0_prime: f.b0_prime * self,
            b1: f.b1 * self,
            b2: f.b2 * self,
        }
    }
}

/// How smoothed retarded fields are evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldModel {
    /// Tabulated kernels at the retarded point of the smoothing center.
    Frozen,
    /// Ray quadrature of the unsmoothed field with the given order.
    Exact { order: usize },
    /// Exact when the field point lies within `near` supports of the
    /// source's present position, frozen otherwise.
    Hybrid { order: usize, near: f64 },
}

/// Field evaluation settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldConfig {
    pub model: FieldModel,
    pub tables: KernelTableSpec,
    /// Polar nodes of the shell quadrature.
    pub shell_order: usize,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self { model: FieldModel::Frozen, tables: KernelTableSpec::default(), shell_order: DEFAULT_SHELL_ORDER }
    }
}

/// A charge with its trajectory and weight.
#[derive(Debug, Clone, Copy)]
pub struct Source<'a> {
    pub view: HistoryView<'a>,
    pub weight: f64,
}

/// Selects the profile used for an evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothing {
    /// Fields of `chi^N`-smoothed charges.
    Field,
    /// Fields felt by a `chi^N`-smoothed charge, i.e. smoothed twice.
    Force,
}

#[derive(Debug, Clone)]
struct Smoother {
    mollifier: Mollifier,
    kernels: Option<ScaledKernels>,
}

impl Smoother {
    fn new(mollifier: Mollifier, config: &FieldConfig) -> Self {
        let kernels = match config.model {
            FieldModel::Frozen | FieldModel::Hybrid { .. } => {
                let profile: Arc<dyn RadialProfile> = mollifier.profile().clone();
                Some(ScaledKernels::new(shared_table(profile, config.tables), mollifier.radius()))
            }
            FieldModel::Exact { .. } => None,
        };
        Self { mollifier, kernels }
    }
}

/// Evaluates smoothed fields and forces of ensembles of charges.
#[derive(Debug, Clone)]
pub struct FieldEvaluator {
    field: Smoother,
    force: Smoother,
    config: FieldConfig,
}

impl FieldEvaluator {
    pub fn new(ff: &RescaledFormFactor, config: FieldConfig) -> Self {
        Self {
            field: Smoother::new(ff.mollifier(), &config),
            force: Smoother::new(ff.double_mollifier(), &config),
            config,
        }
    }

    pub fn config(&self) -> &FieldConfig {
        &self.config
    }

    /// Cut-off radius `r_N`.
    pub fn radius(&self) -> f64 {
        self.field.mollifier.radius()
    }

    pub fn mollifier(&self, which: Smoothing) -> &Mollifier {
        &self.smoother(which).mollifier
    }

    fn smoother(&self, which: Smoothing) -> &Smoother {
        match which {
            Smoothing::Field => &self.field,
            Smoothing::Force => &self.force,
        }
    }

    /// Contribution of one source of unit weight.
    pub fn source_breakdown(&self, which: Smoothing, view: &HistoryView<'_>, t: f64, x: &Vec3) -> Result<FieldBreakdown> {
        let sm = self.smoother(which);
        let mut out = match (self.config.model, &sm.kernels) {
            (FieldModel::Frozen, Some(k)) => frozen(&sm.mollifier, k, view, t, x, self.config.shell_order)?,
            (FieldModel::Exact { order }, _) => exact(&sm.mollifier, order, view, t, x)?,
            (FieldModel::Hybrid { order, near }, Some(k)) => {
                if (x - view.state(t).x).norm() < near * sm.mollifier.support() {
                    exact(&sm.mollifier, order, view, t, x)?
                } else {
                    frozen(&sm.mollifier, k, view, t, x, self.config.shell_order)?
                }
            }
            (_, None) => unreachable!("frozen and hybrid evaluators always carry tables"),
        };
        let y0 = view.initial_position();
        let v0 = velocity(&view.history().samples()[0].xi);
        let sh = shell_terms(&sm.mollifier, t, &(x - y0), &v0, self.config.shell_order);
        out.e0 += sh.e0;
        out.e0_prime = sh.e0_prime;
        out.b0_prime = sh.b0_prime;
        Ok(out)
    }

    /// Weighted sum over sources in index order.
    pub fn breakdown(&self, which: Smoothing, sources: &[Source<'_>], t: f64, x: &Vec3) -> Result<FieldBreakdown> {
        let mut acc = FieldBreakdown::default();
        for s in sources {
            acc += s.weight * self.source_breakdown(which, &s.view, t, x)?;
        }
        Ok(acc)
    }

    /// Field of the ensemble at `(t, x)`.
    pub fn field(&self, sources: &[Source<'_>], t: f64, x: &Vec3) -> Result<FieldBreakdown> {
        self.breakdown(Smoothing::Field, sources, t, x)
    }

    /// Smoothed Lorentz force on a charge centered at `x` with momentum `xi`.
    pub fn force(&self, sources: &[Source<'_>], t: f64, x: &Vec3, xi: &Vec3) -> Result<Vec3> {
        let f = self.breakdown(Smoothing::Force, sources, t, x)?;
        Ok(lorentz_force(&f.sample(), xi))
    }

    /// `(E0, 0)`: evolved initial Coulomb field.
    pub fn e0(&self, sources: &[Source<'_>], t: f64, x: &Vec3) -> Result<Vec3> {
        Ok(self.field(sources, t, x)?.e0)
    }

    /// `(E0', B0')`: shock terms of the initial data.
    pub fn e0prime_b0prime(&self, sources: &[Source<'_>], t: f64, x: &Vec3) -> Result<(Vec3, Vec3)> {
        let f = self.field(sources, t, x)?;
        Ok((f.e0_prime, f.b0_prime))
    }

    /// `(E1, B1)`: smoothed relativistic Coulomb term.
    pub fn e1_b1(&self, sources: &[Source<'_>], t: f64, x: &Vec3) -> Result<(Vec3, Vec3)> {
        let f = self.field(sources, t, x)?;
        Ok((f.e1, f.b1))
    }

    /// `(E2, B2)`: smoothed radiation term.
    pub fn e2_b2(&self, sources: &[Source<'_>], t: f64, x: &Vec3) -> Result<(Vec3, Vec3)> {
        let f = self.field(sources, t, x)?;
        Ok((f.e2, f.b2))
    }
}

fn frozen(m: &Mollifier, k: &ScaledKernels, view: &HistoryView<'_>, t: f64, x: &Vec3, order: usize) -> Result<FieldBreakdown> {
    let y0 = view.initial_position();
    let d0 = x - y0;
    let inside = inside_fraction(m, d0.norm(), t, order);
    let mut out = FieldBreakdown::default();
    if inside < 1.0 {
        out.e0 = m.coulomb(&d0) * (1.0 - inside);
    }
    if inside > 0.0 {
        let rp = match retarded_time(view, t, x)? {
            Some(rp) => rp,
            None => virtual_retarded(view, t, x),
        };
        let sk = k.eval(&(x - rp.x), &rp.v);
        let a = rp.acceleration();
        out.e1 = sk.e_vel * inside;
        out.b1 = sk.b_vel * inside;
        out.e2 = sk.e_acc * a * inside;
        out.b2 = sk.b_acc * a * inside;
    }
    Ok(out)
}

/// Retarded point of the initial motion continued uniformly into `s < 0`,
/// for field points outside the initial light sphere.
fn virtual_retarded(view: &HistoryView<'_>, t: f64, x: &Vec3) -> RetardedPoint {
    let first = view.history().samples()[0];
    let v = velocity(&first.xi);
    let w = x - first.x;
    // |w - v s| = t - s  <=>  (1 - v^2) s^2 - 2 (t - w.v) s - (w^2 - t^2) = 0
    let a = 1.0 - v.norm_squared();
    let b = t - w.dot(&v);
    let c = (w.norm_squared() - t * t).max(0.0);
    let s = (b - (b * b + a * c).sqrt()) / a;
    let y = first.x + v * s;
    let off = x - y;
    let r = off.norm();
    let n = if r > 0.0 { off / r } else { Vec3::zeros() };
    RetardedPoint { t_ret: s, x: y, xi: first.xi, v, k: first.k, n, r }
}

fn exact(m: &Mollifier, order: usize, view: &HistoryView<'_>, t: f64, x: &Vec3) -> Result<FieldBreakdown> {
    let y0 = view.initial_position();
    let s = m.support();
    let mut out = FieldBreakdown::default();
    if (x - y0).norm() > t + s {
        out.e0 = m.coulomb(&(x - y0));
        return Ok(out);
    }
    let present = view.state(t).x;
    let center = if (x - present).norm() < 1.5 * s { present } else { *x };
    let spheres = [(y0, t.max(0.0))];
    let mut failure = None;
    ray_rule_split(&center, x, s, (order, 2 * order, order), &spheres, |z, w| {
        let wz = w * m.value(&(x - z));
        if wz == 0.0 || failure.is_some() {
            return;
        }
        let dz = z - y0;
        let ret = if dz.norm() > t { Ok(None) } else { retarded_time(view, t, z) };
        match ret {
            Ok(None) => {
                if let Ok(c) = kernels::coulomb(&dz) {
                    out.e0 += c * wz;
                }
            }
            Ok(Some(rp)) => {
                let off = z - rp.x;
                let (Ok(e1), Ok(e2)) =
                    (kernels::velocity_field(&off, &rp.v), kernels::acceleration_field(&off, &rp.v, &rp.acceleration()))
                else {
                    return;
                };
                out.e1 += e1 * wz;
                out.b1 += rp.n.cross(&e1) * wz;
                out.e2 += e2 * wz;
                out.b2 += rp.n.cross(&e2) * wz;
            }
            Err(e) => failure = Some(e),
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}
