//! Invariant battery behind `vlamax check`: kernels, retarded solver,
//! smoothed-kernel envelopes, static charge oracle, energy conservation and
//! transport distances. Each check reports one pass/fail line.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use vlamax_fields::field::{FieldConfig, FieldEvaluator, FieldModel, Smoothing, Source};
use vlamax_fields::form_factor::{FormFactor, RescaledFormFactor, SmoothingOptions};
use vlamax_fields::history::{retarded_time, TrajectoryHistory};
use vlamax_fields::kernels::{alpha0, alpha_minus1, grad_alpha0, kernel_k};
use vlamax_kinematics::{momentum_from_velocity, tol, velocity, PhaseState, Vec3};
use vlamax_sim::energy::{energy, GridSpec};
use vlamax_sim::{Drive, Dynamics, DynamicsConfig, Ensemble};
use vlamax_transport::assignment::matched_cost;
use vlamax_transport::distance::{cost_matrix, optimal_assignment};
use vlamax_transport::{wasserstein_p, winf_upper, EmpiricalMeasure};

/// Result of one check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

impl CheckLine {
    fn from_result(name: &str, r: std::result::Result<String, String>) -> Self {
        match r {
            Ok(detail) => Self { name: name.into(), passed: true, detail },
            Err(detail) => Self { name: name.into(), passed: false, detail },
        }
    }
}

type Outcome = std::result::Result<String, String>;

fn fail<E: fmt::Display>(e: E) -> String {
    e.to_string()
}

fn rand_vec(rng: &mut ChaCha8Rng, r: f64) -> Vec3 {
    Vec3::new(rng.random_range(-r..r), rng.random_range(-r..r), rng.random_range(-r..r))
}

/// Closed-form kernels against finite differences and symbolic forms on
/// `inputs` random points, and `k(x, 0)` against Coulomb.
pub fn kernel_exactness(inputs: usize, seed: u64) -> CheckLine {
    CheckLine::from_result("kernel exactness", kernel_exactness_inner(inputs, seed))
}

fn kernel_exactness_inner(inputs: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < inputs {
        let x = rand_vec(&mut rng, 2.0);
        let xi = rand_vec(&mut rng, 0.6);
        if x.norm() < 0.3 {
            continue;
        }
        let t = x.norm();
        let g = grad_alpha0(t, &x, &xi).map_err(fail)?;
        let h = 1e-5;
        for i in 0..3 {
            let mut e = Vec3::zeros();
            e[i] = h;
            let fd = (alpha0(t, &x, &(xi + e)).map_err(fail)? - alpha0(t, &x, &(xi - e)).map_err(fail)?) / (2.0 * h);
            for j in 0..3 {
                worst = worst.max((fd[j] - g[(i, j)]).abs() / g[(i, j)].abs().max(1.0));
            }
        }
        let v = velocity(&xi);
        let n = x / t;
        let am1 = alpha_minus1(t, &x, &xi).map_err(fail)?;
        let expect = (n - v) * ((1.0 - v.norm_squared()) / (t * (1.0 - v.dot(&n)).powi(2)));
        worst = worst.max((am1 - expect).norm() / expect.norm());
        let k = kernel_k(&x, &xi).map_err(fail)?;
        worst = worst.max((k * (4.0 * PI * t * (1.0 - v.dot(&n))) - am1).norm() / am1.norm());
        done += 1;
    }
    let mut coulomb: f64 = 0.0;
    for x in [Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.3, -0.4, 1.2), Vec3::new(1e-3, 2e-3, -5e-4)] {
        let k = kernel_k(&x, &Vec3::zeros()).map_err(fail)?;
        let c = x / (4.0 * PI * x.norm().powi(3));
        coulomb = coulomb.max((k - c).norm() / (c.norm() * f64::EPSILON));
    }
    let detail = format!("{inputs} inputs, worst relative error {worst:.1e}, Coulomb limit within {coulomb:.1} eps");
    if worst <= tol::KERNEL_ORACLE && coulomb <= 4.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Smooth random trajectory with speed at most `vmax`, sampled on `[0, t_end]`.
pub fn random_history(rng: &mut ChaCha8Rng, vmax: f64, t_end: f64, dt: f64) -> TrajectoryHistory {
    let y0 = rand_vec(rng, 1.0);
    let modes: Vec<(Vec3, f64, f64)> =
        (0..3).map(|_| (rand_vec(rng, 1.0), rng.random_range(0.5..3.0), rng.random_range(0.0..6.3))).collect();
    let drift = rand_vec(rng, 1.0);
    let vel = move |s: f64| modes.iter().fold(drift, |v, (a, w, p)| v + a * (w * s + p).sin());
    let peak = (0..2000).map(|i| vel(i as f64 * t_end / 2000.0).norm()).fold(0.0, f64::max);
    let scale = vmax / (peak * 1.01);
    let steps = (t_end / dt).round() as usize;
    let sub = 20;
    let hs = dt / sub as f64;
    let mut x = y0;
    let mut samples = vec![x];
    for i in 0..steps {
        for k in 0..sub {
            x += vel(i as f64 * dt + (k as f64 + 0.5) * hs) * (scale * hs);
        }
        samples.push(x);
    }
    let xi = |s: f64| momentum_from_velocity(&(vel(s) * scale));
    TrajectoryHistory::from_fn(dt, steps, |s| {
        let i = (s / dt).round() as usize;
        let h = 1e-6;
        (samples[i], xi(s), (xi(s + h) - xi(s - h)) / (2.0 * h))
    })
}

fn sup_speed(h: &TrajectoryHistory) -> f64 {
    let view = h.view();
    (0..=4000).map(|i| view.state(h.end_time() * i as f64 / 4000.0).dx.norm()).fold(0.0, f64::max)
}

/// Root residuals on random trajectories, constant-velocity closed form,
/// and the close-retarded-point inequality on `pairs` trajectory pairs.
pub fn retarded_solver(pairs: usize, seed: u64) -> CheckLine {
    CheckLine::from_result("retarded solver", retarded_inner(pairs, seed))
}

fn retarded_inner(pairs: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut residual: f64 = 0.0;
    let mut solved = 0;
    for _ in 0..20 {
        let hist = random_history(&mut rng, 0.9, 4.0, 0.05);
        let view = hist.view();
        for _ in 0..40 {
            let t = rng.random_range(0.0..4.0);
            let x = rand_vec(&mut rng, 3.0);
            if let Some(p) = retarded_time(&view, t, &x).map_err(fail)? {
                residual = residual.max(((x - view.state(p.t_ret).x).norm() - (t - p.t_ret)).abs());
                solved += 1;
            }
        }
    }

    let mut closed: f64 = 0.0;
    for _ in 0..500 {
        let xi = momentum_from_velocity(&rand_vec(&mut rng, 0.5));
        let v = velocity(&xi);
        let y0 = rand_vec(&mut rng, 1.0);
        let hist = TrajectoryHistory::from_fn(0.05, 100, |s| (y0 + v * s, xi, Vec3::zeros()));
        let t = rng.random_range(0.1..5.0);
        let x = rand_vec(&mut rng, 3.0);
        let Some(p) = retarded_time(&hist.view(), t, &x).map_err(fail)? else { continue };
        let w = x - y0;
        let a = v.norm_squared() - 1.0;
        let b = 2.0 * t - 2.0 * w.dot(&v);
        let c = w.norm_squared() - t * t;
        let disc = (b * b - 4.0 * a * c).sqrt();
        let s = [(-b + disc) / (2.0 * a), (-b - disc) / (2.0 * a)]
            .into_iter()
            .filter(|s| *s <= t + 1e-12)
            .fold(f64::NEG_INFINITY, f64::max);
        closed = closed.max((p.t_ret - s).abs());
    }

    let mut checked = 0;
    let mut violations = 0;
    while checked < pairs {
        let h1 = random_history(&mut rng, 0.8, 3.0, 0.05);
        let h2 = random_history(&mut rng, 0.8, 3.0, 0.05);
        let vbar = sup_speed(&h1).max(sup_speed(&h2));
        for _ in 0..25 {
            let t = rng.random_range(0.5..3.0);
            let x = rand_vec(&mut rng, 2.0);
            let (Some(p1), Some(p2)) =
                (retarded_time(&h1.view(), t, &x).map_err(fail)?, retarded_time(&h2.view(), t, &x).map_err(fail)?)
            else {
                continue;
            };
            let r = (p1.x - h2.view().state(p1.t_ret).x).norm();
            if (p1.x - p2.x).norm() > r / (1.0 - vbar) + 1e-9 {
                violations += 1;
            }
            checked += 1;
        }
    }
    let detail = format!(
        "max residual {residual:.1e} over {solved} roots, closed form within {closed:.1e}, {violations} of {checked} pair violations"
    );
    if residual < tol::RETARDED_RESIDUAL && closed < tol::CLOSED_FORM_RETARDED && violations == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Largest ratio of `|chi^N * h|` (or its gradient) to `min(r^-p, |x|^-p)` over a log radial grid.
pub fn envelope_constant(r: f64, power: i32, grad: bool) -> vlamax_fields::Result<f64> {
    let m = RescaledFormFactor::with_radius(FormFactor::standard(), r)?.mollifier();
    let opts = SmoothingOptions { rel_tol: 1e-7, abs_tol: 1e-12, max_order: 128, ..Default::default() };
    let h = |y: &Vec3| y / y.norm().powi(3);
    let mut worst: f64 = 0.0;
    let n = 40;
    for i in 0..n {
        let s = 1e-3 * (50.0f64 / 1e-3).powf(i as f64 / (n - 1) as f64);
        let a = 0.7 * i as f64;
        let x = Vec3::new(a.cos() * 0.6, a.sin() * 0.6, 0.8 - 0.1 * (i % 3) as f64).normalize() * s;
        let value = if grad { m.smooth_kernel_grad(h, &x, &opts)?.norm() } else { m.smooth_kernel(h, &x, &opts)?.norm() };
        worst = worst.max(value / r.powi(-power).min(s.powi(-power)));
    }
    Ok(worst)
}

/// One constant fits the value and gradient envelopes for two radii.
pub fn envelope_bounds() -> CheckLine {
    let inner = || -> Outcome {
        let (v1, v2) = (envelope_constant(0.5, 2, false).map_err(fail)?, envelope_constant(0.2, 2, false).map_err(fail)?);
        let (g1, g2) = (envelope_constant(0.5, 3, true).map_err(fail)?, envelope_constant(0.2, 3, true).map_err(fail)?);
        let close = |a: f64, b: f64| a.is_finite() && b.is_finite() && a <= 1.05 * b && b <= 1.05 * a;
        let detail = format!("value constants {v1:.4} / {v2:.4}, gradient constants {g1:.4} / {g2:.4} at r = 0.5 / 0.2");
        if close(v1, v2) && close(g1, g2) {
            Ok(detail)
        } else {
            Err(detail)
        }
    };
    CheckLine::from_result("smoothed kernel envelopes", inner())
}

/// A charge at rest reproduces the smoothed Coulomb field at `probes` points.
pub fn static_oracle(probes: usize, seed: u64) -> CheckLine {
    let inner = || -> Outcome {
        let r = 0.4;
        let ff = RescaledFormFactor::with_radius(FormFactor::standard(), r).map_err(fail)?;
        let ev = FieldEvaluator::new(&ff, FieldConfig { model: FieldModel::Frozen, ..Default::default() });
        let hist = TrajectoryHistory::at_rest(0.05, Vec3::zeros());
        let src = [Source { view: hist.view(), weight: 1.0 }];
        let m = ev.mollifier(Smoothing::Field).clone();
        let opts = SmoothingOptions { rel_tol: 1e-8, max_order: 128, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = 1.5;
        let mut worst: f64 = 0.0;
        for _ in 0..probes {
            let d = rand_vec(&mut rng, 1.0);
            let x = d.normalize() * (3.0 * rng.random::<f64>().powi(2) + 1e-3);
            let f = ev.field(&src, t, &x).map_err(fail)?;
            let oracle = m.smooth_kernel(|y| y / (4.0 * PI * y.norm().powi(3)), &x, &opts).map_err(fail)?;
            worst = worst.max((f.e() - oracle).norm() / oracle.norm());
            worst = worst.max(f.b().norm() / oracle.norm());
        }
        let detail = format!("{probes} probes, worst relative error {worst:.1e}");
        if worst <= tol::STATIC_ORACLE_REL {
            Ok(detail)
        } else {
            Err(detail)
        }
    };
    CheckLine::from_result("static charge oracle", inner())
}

/// Settings of the two-body energy run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyRun {
    pub t_end: f64,
    pub dt: f64,
    pub spacing: f64,
    pub radius: f64,
    /// Field quadrature is used within this many radii of a charge when measuring energy.
    pub near: f64,
}

impl Default for EnergyRun {
    fn default() -> Self {
        Self { t_end: 1.0, dt: 1e-3, spacing: 0.14, radius: 0.3, near: 6.0 }
    }
}

/// Two charges crossing each other's smoothing support.
pub fn energy_pair() -> Vec<PhaseState> {
    vec![
        PhaseState::new(Vec3::new(-0.35, 0.0, 0.0), Vec3::new(0.3, 0.1, 0.0)),
        PhaseState::new(Vec3::new(0.35, 0.05, 0.0), Vec3::new(-0.3, 0.0, 0.05)),
    ]
}

/// Relative energy drift `|E(T) - E(0)| / E(0)` of the two-body run.
/// Forces use quadrature kernels; the field energy uses quadrature near the charges.
pub fn energy_drift(run: &EnergyRun) -> vlamax_sim::Result<f64> {
    let ff = RescaledFormFactor::with_radius(FormFactor::standard(), run.radius)?;
    let exact = FieldConfig { model: FieldModel::Exact { order: 8 }, ..Default::default() };
    let d = Dynamics::new(&ff, DynamicsConfig { field: exact, ..Default::default() });
    let probe = FieldEvaluator::new(&ff, FieldConfig { model: FieldModel::Hybrid { order: 8, near: run.near }, ..Default::default() });
    let grid = GridSpec::new(run.spacing);
    let mut e = Ensemble::normalized(energy_pair(), run.dt)?;
    d.run(&mut e, Drive::SelfConsistent, 0)?;
    let start = energy(&probe, &e, &grid)?;
    d.run(&mut e, Drive::SelfConsistent, (run.t_end / run.dt).round() as usize)?;
    let end = energy(&probe, &e, &grid)?;
    Ok((end.total - start.total).abs() / start.total)
}

/// Energy drift below the tolerance at the base resolution, and not
/// growing under step halving or grid refinement. Drifts below `floor`, the
/// resolution of the grid quadrature, count as converged.
pub fn energy_conservation(base: EnergyRun, floor: f64) -> CheckLine {
    let inner = || -> Outcome {
        let d0 = energy_drift(&base).map_err(fail)?;
        let d_dt = energy_drift(&EnergyRun { dt: base.dt / 2.0, ..base }).map_err(fail)?;
        let d_h = energy_drift(&EnergyRun { spacing: base.spacing / 2.0, ..base }).map_err(fail)?;
        let detail = format!(
            "T = {}, dt = {}, spacing {}: drift {d0:.2e}; dt/2 {d_dt:.2e}; spacing/2 {d_h:.2e}; floor {floor:.0e}",
            base.t_end, base.dt, base.spacing
        );
        let settled = |x: f64| x <= d0 || x <= floor;
        if d0 <= tol::ENERGY_DRIFT_REL && settled(d_dt) && settled(d_h) {
            Ok(detail)
        } else {
            Err(detail)
        }
    };
    CheckLine::from_result("energy conservation", inner())
}

fn random_measure(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> EmpiricalMeasure {
    EmpiricalMeasure::new(dim, (0..n * dim).map(|_| rng.random_range(-1.0..1.0)).collect()).expect("valid atoms")
}

/// Minimum matched cost over all permutations.
pub fn brute_force_cost(n: usize, cost: &[f64]) -> f64 {
    fn rec(n: usize, cost: &[f64], used: &mut Vec<bool>, picked: &mut Vec<f64>, best: &mut f64) {
        let row = picked.len();
        if row == n {
            *best = best.min(matched_cost(picked.iter().copied()));
            return;
        }
        for j in 0..n {
            if !used[j] {
                used[j] = true;
                picked.push(cost[row * n + j]);
                rec(n, cost, used, picked, best);
                picked.pop();
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    rec(n, cost, &mut vec![false; n], &mut Vec::new(), &mut best);
    best
}

/// Exact solver against brute force, metric axioms, order monotonicity and the pairing bound.
pub fn transport_battery(instances: usize, pairs: usize, seed: u64) -> CheckLine {
    let inner = || -> Outcome {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut mismatches = 0;
        for k in 0..instances {
            let n = 1 + k % 7;
            let dim = [1, 2, 3, 6][k % 4];
            let p = [1.0, 2.0, 3.0, 1.5][(k / 4) % 4];
            let (a, b) = (random_measure(&mut rng, n, dim), random_measure(&mut rng, n, dim));
            let c = cost_matrix(&a, &b, p).map_err(fail)?;
            if optimal_assignment(&a, &b, p).map_err(fail)?.cost != brute_force_cost(n, &c) {
                mismatches += 1;
            }
        }
        let mut axiom: f64 = 0.0;
        let mut order = 0;
        for k in 0..instances {
            let n = 2 + k % 10;
            let [a, b, c] = [0, 1, 2].map(|_| random_measure(&mut rng, n, 3));
            for p in [1.0, 2.0, 3.0] {
                let w = |x: &EmpiricalMeasure, y: &EmpiricalMeasure| wasserstein_p(x, y, p);
                let (ab, ba, bc, ac, aa) = (w(&a, &b), w(&b, &a), w(&b, &c), w(&a, &c), w(&a, &a));
                let (ab, ba, bc, ac, aa) = (ab.map_err(fail)?, ba.map_err(fail)?, bc.map_err(fail)?, ac.map_err(fail)?, aa.map_err(fail)?);
                axiom = axiom.max((ab - ba).abs()).max(aa).max(ac - ab - bc);
                if ab <= 0.0 {
                    axiom = f64::INFINITY;
                }
                if ab > wasserstein_p(&a, &b, p + 0.5).map_err(fail)? * (1.0 + tol::METRIC_AXIOM) {
                    order += 1;
                }
            }
        }
        let mut pairing = 0;
        for k in 0..pairs {
            let n = 2 + k % 12;
            let (x, y) = (random_measure(&mut rng, n, 6), random_measure(&mut rng, n, 6));
            let bound = winf_upper(&x, &y).map_err(fail)?;
            for p in [1.0, 2.0, 3.0] {
                if wasserstein_p(&x, &y, p).map_err(fail)? > bound * (1.0 + tol::METRIC_AXIOM) {
                    pairing += 1;
                }
            }
        }
        let detail = format!(
            "{mismatches} of {instances} brute-force mismatches, axiom defect {axiom:.1e}, {order} order and {pairing} pairing violations over {pairs} pairs"
        );
        if mismatches == 0 && axiom <= tol::METRIC_AXIOM && order == 0 && pairing == 0 {
            Ok(detail)
        } else {
            Err(detail)
        }
    };
    CheckLine::from_result("transport distances", inner())
}

/// How much work the battery does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckScale {
    /// Small sample sizes, seconds.
    Quick,
    /// The full sample sizes.
    Full,
}

/// Runs every check at the given scale.
pub fn run_checks(scale: CheckScale, seed: u64) -> Vec<CheckLine> {
    let full = scale == CheckScale::Full;
    let energy = if full { EnergyRun::default() } else { EnergyRun { t_end: 0.5, dt: 0.05, ..Default::default() } };
    vec![
        kernel_exactness(if full { 100 } else { 20 }, seed),
        retarded_solver(if full { 1000 } else { 100 }, seed),
        envelope_bounds(),
        static_oracle(20, seed),
        energy_conservation(energy, 0.1 * tol::ENERGY_DRIFT_REL),
        transport_battery(if full { 200 } else { 40 }, if full { 1000 } else { 100 }, seed),
    ]
}
