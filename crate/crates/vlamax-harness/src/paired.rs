//! One paired run: microscopic charges and mean-field characteristics from
//! the same initial configuration, compared along the way.

use serde::{Deserialize, Serialize};
use vlamax_kinematics::{PhaseState, Vec3};
use vlamax_sim::energy::{energy, GridSpec};
use vlamax_sim::meanfield::{evolve_reference, position_bound};
use vlamax_sim::{Drive, Dynamics, Ensemble, MeanFieldFlow, ReferenceEnsemble};
use vlamax_transport::chaos::Trajectories;
use vlamax_transport::{chaos_process_j, wasserstein_p, winf_upper, ChaosMetricConfig, ChaosReport, EmpiricalMeasure};

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::fields::{build_fields, lattice_fields, smoothed_density, sup_difference, FieldDifference};
use crate::lattice::LatticeSpec;

/// `C0` is judged plausible when `rho~` stays below this multiple of the peak of `rho~[f0]`.
pub const C0_FACTOR: f64 = 4.0;

/// The mean-field side shared by every seed at one `N`.
#[derive(Debug, Clone)]
pub struct MeanFieldSide {
    pub n: usize,
    pub dynamics: Dynamics,
    pub reference: ReferenceEnsemble,
}

/// Builds the form factor for `N` and evolves the reference ensemble to `t_end`.
pub fn build_reference(cfg: &ExperimentConfig, n: usize) -> Result<MeanFieldSide> {
    cfg.validate()?;
    let ff = cfg.form_factor(n)?;
    let dynamics = Dynamics::new(&ff, cfg.dynamics_config());
    let reference =
        evolve_reference(&dynamics, cfg.f0, cfg.run.reference_size, cfg.run.reference_seed, cfg.run.dt, cfg.steps())?;
    Ok(MeanFieldSide { n, dynamics, reference })
}

/// Distances between the two empirical measures at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub t: f64,
    /// `(p, W_p(mu[Psi_t], mu[Phi_t]))`.
    pub wasserstein: Vec<(f64, f64)>,
    pub winf_upper: f64,
    /// The pairing bound and the chaos budget both hold.
    pub linkage_ok: bool,
}

/// One line of the sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub config_hash: String,
    pub n: usize,
    pub seed: u64,
    pub status: String,
    pub error: String,
    pub control: bool,
    pub r_n: f64,
    pub gamma: f64,
    pub delta: f64,
    pub t_end: f64,
    pub dt: f64,
    pub m_ref: usize,
    pub lambda_n: f64,
    /// `sup_{s<=T} max_i |x_i - y_i|`.
    pub sup_dx: f64,
    /// `sup_{s<=T} max_i |xi_i - q_i|`.
    pub sup_dxi: f64,
    /// `sup_{s<=T} max_i |z_i - w_i|` in phase space.
    pub sup_dev: f64,
    pub j_t: f64,
    pub j_raw: f64,
    pub w1_final: f64,
    pub w2_final: f64,
    pub w1_max: f64,
    pub w2_max: f64,
    pub winf_max: f64,
    pub linkage_ok: bool,
    /// Two-sample `W_1` between the initial configuration and an independent draw.
    pub w1_initial: f64,
    /// `max |E^N_in - E^mu_in|` on the lattice.
    pub field_err_initial: f64,
    pub field_err: f64,
    pub field_err_e: f64,
    pub field_err_b: f64,
    pub lattice_n_lat: usize,
    pub lattice_points: usize,
    pub energy_drift: f64,
    /// `max_t max_i |xi_i(t)|` of the microscopic charges.
    pub r_max: f64,
    /// `max_t max_x rho~[mu_t](x)` over lattice points and charge positions.
    pub rho_max: f64,
    pub c0_plausible: bool,
    pub superluminal: usize,
}

impl SweepRow {
    fn blank(cfg: &ExperimentConfig, n: usize, seed: u64) -> Self {
        let nan = f64::NAN;
        Self {
            config_hash: cfg.hash(),
            n,
            seed,
            status: "ok".into(),
            error: String::new(),
            control: cfg.run.control,
            r_n: (n as f64).powf(-cfg.form_factor.gamma),
            gamma: cfg.form_factor.gamma,
            delta: cfg.chaos.delta,
            t_end: cfg.run.t_end,
            dt: cfg.run.dt,
            m_ref: cfg.run.reference_size,
            lambda_n: vlamax_transport::lambda_n(n),
            sup_dx: nan,
            sup_dxi: nan,
            sup_dev: nan,
            j_t: nan,
            j_raw: nan,
            w1_final: nan,
            w2_final: nan,
            w1_max: nan,
            w2_max: nan,
            winf_max: nan,
            linkage_ok: false,
            w1_initial: nan,
            field_err_initial: nan,
            field_err: nan,
            field_err_e: nan,
            field_err_b: nan,
            lattice_n_lat: 0,
            lattice_points: 0,
            energy_drift: nan,
            r_max: nan,
            rho_max: nan,
            c0_plausible: false,
            superluminal: 0,
        }
    }

    /// A row recording a failed run.
    pub fn failed(cfg: &ExperimentConfig, n: usize, seed: u64, err: &dyn std::fmt::Display) -> Self {
        Self { status: "error".into(), error: err.to_string(), ..Self::blank(cfg, n, seed) }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Everything produced by a paired run.
#[derive(Debug, Clone)]
pub struct PairedOutcome {
    pub row: SweepRow,
    pub checkpoints: Vec<Checkpoint>,
    pub chaos: ChaosReport,
    pub micro: Ensemble,
    pub tracers: Ensemble,
}

/// Phase-space atoms `(x, xi)` of a configuration.
pub fn phase_measure(z: &[PhaseState]) -> Result<EmpiricalMeasure> {
    Ok(EmpiricalMeasure::new(6, z.iter().flat_map(|p| [p.x.x, p.x.y, p.x.z, p.xi.x, p.xi.y, p.xi.z]).collect())?)
}

/// All stored samples of an ensemble as trajectories.
pub fn trajectories(ens: &Ensemble) -> Trajectories {
    let mut t = Trajectories::default();
    let arr = |v: &Vec3| [v.x, v.y, v.z];
    for n in 0..=ens.steps() {
        let s = ens.states_at(n);
        t.push((ens.origin() + n) as f64 * ens.dt(), s.iter().map(|p| arr(&p.x)).collect(), s.iter().map(|p| arr(&p.xi)).collect());
    }
    t
}

/// The lattice used for `N` particles.
pub fn lattice_for(cfg: &ExperimentConfig, n: usize) -> Result<LatticeSpec> {
    let bound = cfg.lattice.bound.unwrap_or_else(|| position_bound(&cfg.f0, cfg.run.t_end));
    LatticeSpec::new(bound, cfg.lattice.n_lat.unwrap_or_else(|| LatticeSpec::default_n_lat(n)))
}

/// Builds the reference for `N` and runs one seed.
pub fn run_paired(cfg: &ExperimentConfig, n: usize, seed: u64) -> Result<PairedOutcome> {
    let side = build_reference(cfg, n)?;
    run_paired_with(cfg, &side, seed)
}

/// Runs one seed against a prepared mean-field side.
pub fn run_paired_with(cfg: &ExperimentConfig, side: &MeanFieldSide, seed: u64) -> Result<PairedOutcome> {
    let n = side.n;
    let d = &side.dynamics;
    let reference = &side.reference;
    let steps = cfg.steps();
    let mut row = SweepRow::blank(cfg, n, seed);

    let z = cfg.f0.sample(n, seed)?;
    let ff = cfg.form_factor(n)?;
    let initial = build_fields(&cfg.f0, &z, &ff)?;
    let lattice = lattice_for(cfg, n)?;
    let points = if cfg.lattice.disabled { Vec::new() } else { lattice.points() };
    row.lattice_n_lat = lattice.n_lat;
    row.lattice_points = points.len();
    row.field_err_initial = points
        .iter()
        .map(|x| (initial.e_macro(x) - initial.e_micro(x)).norm().hypot((initial.b_macro(x) - initial.b_micro(x)).norm()))
        .fold(0.0, f64::max);

    // Microscopic charges.
    let mut micro = Ensemble::normalized(z.clone(), cfg.run.dt)?;
    let energy_ev = cfg.energy.enabled.then(|| vlamax_fields::field::FieldEvaluator::new(&ff, cfg.energy.model.field_config()));
    let grid = GridSpec::new(cfg.energy.spacing);
    let e_start = match &energy_ev {
        Some(ev) => Some(energy(ev, &micro, &grid)?),
        None => None,
    };
    let drive = if cfg.run.control { Drive::External(&reference.ensemble) } else { Drive::SelfConsistent };
    d.run(&mut micro, drive, steps)?;
    if let (Some(ev), Some(start)) = (&energy_ev, e_start) {
        let end = energy(ev, &micro, &grid)?;
        row.energy_drift = (end.total - start.total) / start.total;
    }

    // Mean-field characteristics from the same configuration.
    let mut flow = MeanFieldFlow::new(z.clone(), cfg.run.dt)?;
    flow.advance(d, reference, steps)?;
    let tracers = flow.tracers;

    // Chaos process and distances.
    let chaos_cfg = ChaosMetricConfig::new(n, cfg.chaos.delta)?;
    let (tm, tf) = (trajectories(&micro), trajectories(&tracers));
    let chaos = chaos_process_j(&tm, &tf, &chaos_cfg, cfg.run.t_end)?;
    row.sup_dx = chaos.sup_x;
    row.sup_dxi = chaos.sup_xi;
    row.j_t = chaos.j;
    row.j_raw = chaos.raw;
    row.sup_dev = (0..=steps)
        .map(|k| Ok(winf_upper(&phase_measure(&micro.states_at(k))?, &phase_measure(&tracers.states_at(k))?)?))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let mut orders = vec![1.0, 2.0];
    for p in &cfg.chaos.p_values {
        if !orders.contains(p) {
            orders.push(*p);
        }
    }
    let budget = chaos.raw / chaos_cfg.scale();
    let mut checkpoints = Vec::new();
    for k in cfg.checkpoints() {
        let a = phase_measure(&micro.states_at(k))?;
        let b = phase_measure(&tracers.states_at(k))?;
        let bound = winf_upper(&a, &b)?;
        let wasserstein = orders.iter().map(|&p| Ok((p, wasserstein_p(&a, &b, p)?))).collect::<Result<Vec<_>>>()?;
        let tol = 1e-12 * (1.0 + bound);
        let linkage_ok = wasserstein.iter().all(|(_, w)| *w <= bound + tol) && (chaos.j >= 1.0 || bound <= budget + tol);
        checkpoints.push(Checkpoint { t: k as f64 * cfg.run.dt, wasserstein, winf_upper: bound, linkage_ok });
    }
    let w = |c: &Checkpoint, p: f64| c.wasserstein.iter().find(|(q, _)| *q == p).map_or(f64::NAN, |x| x.1);
    let last = checkpoints.last().expect("at least one checkpoint");
    row.w1_final = w(last, 1.0);
    row.w2_final = w(last, 2.0);
    row.w1_max = checkpoints.iter().map(|c| w(c, 1.0)).fold(0.0, f64::max);
    row.w2_max = checkpoints.iter().map(|c| w(c, 2.0)).fold(0.0, f64::max);
    row.winf_max = checkpoints.iter().map(|c| c.winf_upper).fold(0.0, f64::max);
    row.linkage_ok = checkpoints.iter().all(|c| c.linkage_ok);

    let other = cfg.f0.sample(n, seed ^ 0x9e37_79b9_7f4a_7c15)?;
    row.w1_initial = wasserstein_p(&phase_measure(&z)?, &phase_measure(&other)?, 1.0)?;

    // Fields on the lattice at the final time.
    if !points.is_empty() {
        let ev = d.evaluator();
        let t = cfg.run.t_end;
        let fm = lattice_fields(ev, &micro.sources_upto(steps), t, &points)?;
        let fr = lattice_fields(ev, &reference.ensemble.sources_upto(steps), t, &points)?;
        let FieldDifference { e, b, total } = sup_difference(&fm, &fr);
        row.field_err = total;
        row.field_err_e = e;
        row.field_err_b = b;
    }

    // Density and momentum bounds of the microscopic charges.
    let chi = ff.mollifier();
    let mut rho_max: f64 = 0.0;
    for k in cfg.checkpoints() {
        let pos: Vec<Vec3> = micro.states_at(k).iter().map(|p| p.x).collect();
        for x in points.iter().chain(&pos) {
            rho_max = rho_max.max(smoothed_density(&chi, &pos, micro.weight(), x));
        }
    }
    row.rho_max = rho_max;
    row.c0_plausible = rho_max <= C0_FACTOR * cfg.f0.smoothed_spatial(&chi).density(0.0);
    row.r_max = micro.max_momentum_support();
    row.superluminal = micro.superluminal_samples() + tracers.superluminal_samples() + reference.ensemble.superluminal_samples();

    Ok(PairedOutcome { row, checkpoints, chaos, micro, tracers })
}

/// Runs one seed and records any failure in the row instead of returning it.
pub fn paired_row(cfg: &ExperimentConfig, side: &MeanFieldSide, seed: u64) -> SweepRow {
    match run_paired_with(cfg, side, seed) {
        Ok(o) => o.row,
        Err(e) => {
            log::warn!("N = {}, seed = {seed}: {e}", side.n);
            SweepRow::failed(cfg, side.n, seed, &e)
        }
    }
}
