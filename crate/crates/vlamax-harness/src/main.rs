//! `vlamax`: run microscopic and mean-field simulations, paired comparisons,
//! sweeps, distance metrics, lattice field export and the invariant battery.

use std::fs::File;
use std::io::{BufWriter, Read};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use vlamax_harness::checks::{run_checks, CheckScale};
use vlamax_harness::config::ExperimentConfig;
use vlamax_harness::fields::write_field_slice;
use vlamax_harness::lattice::LatticeSpec;
use vlamax_harness::paired::{build_reference, lattice_for, phase_measure, run_paired_with};
use vlamax_harness::sweep::run_sweep;
use vlamax_sim::snapshot::{read_trajectory, write_trajectory, TRAJECTORY_MAGIC};
use vlamax_sim::{Drive, Dynamics, Ensemble, MeanFieldFlow, Role, Snapshot};
use vlamax_transport::chaos::Trajectories;
use vlamax_transport::{chaos_process_j, wasserstein_p, winf_upper, ChaosMetricConfig};

#[derive(Parser)]
#[command(name = "vlamax", version, about = "Mean-field limit experiments for smoothed relativistic charges")]
struct Cli {
    /// Experiment config file; built-in defaults when absent.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding the config.
    #[arg(long, global = true, env = "VLAMAX_OUT_DIR")]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve N microscopic charges and save their trajectory.
    Simulate {
        #[arg(long)]
        n: usize,
        #[arg(long, env = "VLAMAX_SEED")]
        seed: Option<u64>,
    },
    /// Evolve the reference ensemble and tracers started at a sampled configuration.
    Meanfield {
        #[arg(long)]
        n: usize,
        #[arg(long, env = "VLAMAX_SEED")]
        seed: Option<u64>,
    },
    /// One paired run; prints the sweep row and checkpoints as JSON.
    Paired {
        #[arg(long)]
        n: usize,
        #[arg(long, env = "VLAMAX_SEED")]
        seed: Option<u64>,
    },
    /// All N values and seeds of the config; writes the sweep table.
    Sweep,
    /// Distances between two snapshot or trajectory files.
    Metrics {
        micro: PathBuf,
        meanfield: PathBuf,
        /// Exponent of the chaos scale `N^delta`; the config value when absent.
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Field breakdown of an evolved ensemble on the lattice, as CSV.
    Fields {
        #[arg(long)]
        n: usize,
        #[arg(long, env = "VLAMAX_SEED")]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = FieldRole::Micro)]
        role: FieldRole,
        /// Restrict to one lattice plane of constant z.
        #[arg(long)]
        plane: Option<usize>,
        /// Output file; `<out-dir>/fields_<role>_N<n>.csv` when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Invariant battery, one pass/fail line per check.
    Check {
        #[arg(long)]
        full: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldRole {
    Micro,
    Reference,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
        None => {
            let mut c = ExperimentConfig::default();
            c.apply_env(|k| std::env::var(k).ok())?;
            c
        }
    };
    if let Some(d) = &cli.out_dir {
        cfg.output.dir = d.clone();
    }
    Ok(cfg)
}

fn out_path(cfg: &ExperimentConfig, name: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(&cfg.output.dir).with_context(|| format!("creating {}", cfg.output.dir.display()))?;
    Ok(cfg.output.dir.join(name))
}

/// Frames of a trajectory file, or the single frame of a snapshot file.
fn load_frames(path: &Path) -> Result<Vec<Snapshot>> {
    let mut magic = [0u8; 8];
    let is_trajectory = File::open(path)
        .with_context(|| format!("opening {}", path.display()))?
        .read_exact(&mut magic)
        .is_ok()
        && &magic == TRAJECTORY_MAGIC;
    let frames = if is_trajectory { read_trajectory(path)? } else { vec![Snapshot::load(path)?] };
    if frames.is_empty() {
        bail!("{} holds no frames", path.display());
    }
    Ok(frames)
}

/// Frames as trajectories. A lone frame is placed at time zero, so the
/// chaos process reduces to the deviation at that instant.
fn frames_to_trajectories(frames: &[Snapshot]) -> Trajectories {
    let mut t = Trajectories::default();
    for f in frames {
        t.push(if frames.len() == 1 { 0.0 } else { f.t }, f.x.clone(), f.xi.clone());
    }
    t
}

fn simulate(cfg: &ExperimentConfig, n: usize, seed: u64) -> Result<()> {
    let ff = cfg.form_factor(n)?;
    let d = Dynamics::new(&ff, cfg.dynamics_config());
    let mut micro = Ensemble::normalized(cfg.f0.sample(n, seed)?, cfg.run.dt)?;
    d.run(&mut micro, Drive::SelfConsistent, cfg.steps())?;
    let path = out_path(cfg, &format!("micro_N{n}_s{seed}.traj"))?;
    write_trajectory(&path, &Snapshot::frames(&micro, Role::Micro, ff.radius(), seed))?;
    let last = out_path(cfg, &format!("micro_N{n}_s{seed}_final.json"))?;
    Snapshot::from_ensemble(&micro, micro.steps(), Role::Micro, ff.radius(), seed).save(&last)?;
    println!(
        "{}",
        json!({
            "trajectory": path, "final": last, "n": n, "seed": seed, "t": micro.time(),
            "momentum_support": micro.max_momentum_support(), "superluminal": micro.superluminal_samples(),
        })
    );
    Ok(())
}

fn meanfield(cfg: &ExperimentConfig, n: usize, seed: u64) -> Result<()> {
    let side = build_reference(cfg, n)?;
    let r_n = cfg.form_factor(n)?.radius();
    let mut flow = MeanFieldFlow::new(cfg.f0.sample(n, seed)?, cfg.run.dt)?;
    flow.advance(&side.dynamics, &side.reference, cfg.steps())?;
    let reference = out_path(cfg, &format!("reference_N{n}.traj"))?;
    write_trajectory(&reference, &Snapshot::frames(&side.reference.ensemble, Role::Reference, r_n, cfg.run.reference_seed))?;
    let tracers = out_path(cfg, &format!("tracers_N{n}_s{seed}.traj"))?;
    write_trajectory(&tracers, &Snapshot::frames(&flow.tracers, Role::Tracer, r_n, seed))?;
    println!(
        "{}",
        json!({
            "reference": reference, "tracers": tracers, "n": n, "seed": seed, "m_ref": side.reference.len(),
            "momentum_support": side.reference.ensemble.max_momentum_support(),
        })
    );
    Ok(())
}

fn paired(cfg: &ExperimentConfig, n: usize, seed: u64) -> Result<()> {
    let side = build_reference(cfg, n)?;
    let o = run_paired_with(cfg, &side, seed)?;
    let r_n = o.row.r_n;
    write_trajectory(&out_path(cfg, &format!("micro_N{n}_s{seed}.traj"))?, &Snapshot::frames(&o.micro, Role::Micro, r_n, seed))?;
    write_trajectory(&out_path(cfg, &format!("tracers_N{n}_s{seed}.traj"))?, &Snapshot::frames(&o.tracers, Role::Tracer, r_n, seed))?;
    println!("{}", serde_json::to_string_pretty(&json!({ "row": o.row, "checkpoints": o.checkpoints, "chaos": o.chaos }))?);
    Ok(())
}

fn metrics(cfg: &ExperimentConfig, micro: &Path, mf: &Path, delta: Option<f64>) -> Result<()> {
    let (mut a, mut b) = (load_frames(micro)?, load_frames(mf)?);
    // A single snapshot is compared against the frame of the other file at the same time.
    let at_time = |frames: &[Snapshot], t: f64| -> Result<Vec<Snapshot>> {
        match frames.iter().find(|f| (f.t - t).abs() <= 1e-9 * (1.0 + t.abs())) {
            Some(f) => Ok(vec![f.clone()]),
            None => bail!("no frame at t = {t}"),
        }
    };
    if a.len() == 1 && b.len() > 1 {
        b = at_time(&b, a[0].t)?;
    } else if b.len() == 1 && a.len() > 1 {
        a = at_time(&a, b[0].t)?;
    }
    let (la, lb) = (a.last().expect("nonempty"), b.last().expect("nonempty"));
    if la.n() != lb.n() {
        bail!("particle counts differ: {} and {}", la.n(), lb.n());
    }
    let (ma, mb) = (phase_measure(&la.states())?, phase_measure(&lb.states())?);
    let chaos_cfg = ChaosMetricConfig::new(la.n(), delta.unwrap_or(cfg.chaos.delta))?;
    let instantaneous = a.len() == 1;
    let window_end = if instantaneous { 0.0 } else { la.t };
    let j = chaos_process_j(&frames_to_trajectories(&a), &frames_to_trajectories(&b), &chaos_cfg, window_end)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "t": la.t, "n": la.n(),
            "W1": wasserstein_p(&ma, &mb, 1.0)?, "W2": wasserstein_p(&ma, &mb, 2.0)?, "Winf_upper": winf_upper(&ma, &mb)?,
            "J": { "t": la.t, "instantaneous": instantaneous, "sup_x": j.sup_x, "sup_xi": j.sup_xi, "raw": j.raw, "J_t": j.j, "lambda_n": chaos_cfg.lambda_n, "delta": chaos_cfg.delta },
        }))?
    );
    Ok(())
}

fn fields(cfg: &ExperimentConfig, n: usize, seed: u64, role: FieldRole, plane: Option<usize>, out: Option<PathBuf>) -> Result<()> {
    let lattice: LatticeSpec = lattice_for(cfg, n)?;
    let points = match plane {
        Some(k) if k >= lattice.per_axis() => bail!("plane {k} outside 0..{}", lattice.per_axis()),
        Some(k) => lattice.plane(k),
        None => lattice.points(),
    };
    let steps = cfg.steps();
    let (d, ens, name) = match role {
        FieldRole::Micro => {
            let ff = cfg.form_factor(n)?;
            let d = Dynamics::new(&ff, cfg.dynamics_config());
            let mut e = Ensemble::normalized(cfg.f0.sample(n, seed)?, cfg.run.dt)?;
            d.run(&mut e, Drive::SelfConsistent, steps)?;
            (d, e, "micro")
        }
        FieldRole::Reference => {
            let side = build_reference(cfg, n)?;
            (side.dynamics, side.reference.ensemble, "reference")
        }
    };
    let f = vlamax_harness::fields::lattice_fields(d.evaluator(), &ens.sources_upto(steps), cfg.run.t_end, &points)?;
    let path = match out {
        Some(p) => p,
        None => out_path(cfg, &format!("fields_{name}_N{n}.csv"))?,
    };
    write_field_slice(BufWriter::new(File::create(&path)?), cfg.run.t_end, &points, &f)?;
    println!(
        "{}",
        json!({ "file": path, "points": points.len(), "n_lat": lattice.n_lat, "spacing": lattice.spacing(), "bound": lattice.bound })
    );
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let cfg = load_config(&cli)?;
    let seed = |s: Option<u64>| s.unwrap_or(cfg.sweep.base_seed);
    match cli.command {
        Command::Simulate { n, seed: s } => simulate(&cfg, n, seed(s)),
        Command::Meanfield { n, seed: s } => meanfield(&cfg, n, seed(s)),
        Command::Paired { n, seed: s } => paired(&cfg, n, seed(s)),
        Command::Sweep => {
            let path = out_path(&cfg, "sweep.csv")?;
            let report = run_sweep(&cfg, Some(&path))?;
            let failed: usize = report.summaries.iter().map(|s| s.failed).sum();
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "csv": path, "config_hash": report.config_hash, "summaries": report.summaries,
                    "slopes": report.slopes, "failed_rows": failed,
                }))?
            );
            Ok(())
        }
        Command::Metrics { micro, meanfield, delta } => metrics(&cfg, &micro, &meanfield, delta),
        Command::Fields { n, seed: s, role, plane, out } => fields(&cfg, n, seed(s), role, plane, out),
        Command::Check { full, seed } => {
            let lines = run_checks(if full { CheckScale::Full } else { CheckScale::Quick }, seed);
            for l in &lines {
                println!("{l}");
            }
            let failed = lines.iter().filter(|l| !l.passed).count();
            if failed > 0 {
                bail!("{failed} of {} checks failed", lines.len());
            }
            Ok(())
        }
    }
}
