//! Experiment configuration: a TOML file with one section per concern.
//!
//! ```toml
//! [f0]
//! x_radius = 1.0
//! xi_radius = 0.5
//!
//! [form_factor]
//! gamma = 0.0833333333333333
//! strict = false
//!
//! [run]
//! t_end = 0.5
//! dt = 0.05
//! ```
//!
//! Missing keys take their defaults. `VLAMAX_SEED` overrides the base seed
//! and `VLAMAX_OUT_DIR` the output directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use vlamax_fields::field::{FieldConfig, FieldModel};
use vlamax_fields::form_factor::{FormFactor, RescaledFormFactor};
use vlamax_sim::{DynamicsConfig, F0Spec};

use crate::error::{HarnessError, Result};

/// Environment variable overriding [`SweepSection::base_seed`].
pub const ENV_SEED: &str = "VLAMAX_SEED";
/// Environment variable overriding [`OutputSection::dir`].
pub const ENV_OUT_DIR: &str = "VLAMAX_OUT_DIR";

/// Field model selection as written in the config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum ModelSpec {
    Frozen,
    Exact { order: usize },
    Hybrid { order: usize, near: f64 },
}

impl ModelSpec {
    pub fn field_config(self) -> FieldConfig {
        let model = match self {
            ModelSpec::Frozen => FieldModel::Frozen,
            ModelSpec::Exact { order } => FieldModel::Exact { order },
            ModelSpec::Hybrid { order, near } => FieldModel::Hybrid { order, near },
        };
        FieldConfig { model, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FormFactorSection {
    /// Exponent in `r_N = N^-gamma`.
    pub gamma: f64,
    /// Enforce the strict parameter gate.
    pub strict: bool,
}

impl Default for FormFactorSection {
    fn default() -> Self {
        Self { gamma: 1.0 / 12.0, strict: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChaosSection {
    /// Exponent `delta` of the chaos process.
    pub delta: f64,
    /// Orders `p` reported for the empirical measures.
    pub p_values: Vec<f64>,
    /// Exponent `alpha` of the concentration rate display.
    pub alpha: f64,
}

impl Default for ChaosSection {
    fn default() -> Self {
        Self { delta: 0.1, p_values: vec![1.0, 2.0], alpha: 1.0 / 12.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub t_end: f64,
    pub dt: f64,
    /// Time between checkpoints where distances are measured.
    pub checkpoint_interval: f64,
    /// Size `M` of the mean-field reference ensemble.
    pub reference_size: usize,
    /// Seed of the reference ensemble.
    pub reference_seed: u64,
    pub include_self: bool,
    pub model: ModelSpec,
    /// `C` in the instability threshold `C / r_N^2`.
    pub stability_constant: f64,
    /// Replace the microscopic force by the mean-field force.
    pub control: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            t_end: 0.5,
            dt: 0.05,
            checkpoint_interval: 0.25,
            reference_size: 1024,
            reference_seed: 7,
            include_self: true,
            model: ModelSpec::Frozen,
            stability_constant: 10.0,
            control: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub n_values: Vec<usize>,
    /// Number of seeds per `N`, starting at `base_seed`.
    pub seeds: usize,
    pub base_seed: u64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { n_values: vec![64, 128, 256, 512], seeds: 10, base_seed: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeSection {
    /// `N_lat`; defaults to `ceil(N^(1/3))`.
    pub n_lat: Option<usize>,
    /// Half width `r_bar`; defaults to `a + T + 1`.
    pub bound: Option<f64>,
    /// Skip the lattice field comparison.
    pub disabled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergySection {
    pub enabled: bool,
    /// Grid spacing of the field-energy quadrature.
    pub spacing: f64,
    /// Field model used for the energy grid.
    pub model: ModelSpec,
}

impl Default for EnergySection {
    fn default() -> Self {
        Self { enabled: true, spacing: 0.25, model: ModelSpec::Frozen }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("vlamax-out") }
    }
}

/// Everything that defines an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub f0: F0Spec,
    pub form_factor: FormFactorSection,
    pub chaos: ChaosSection,
    pub run: RunSection,
    pub sweep: SweepSection,
    pub lattice: LatticeSection,
    pub energy: EnergySection,
    pub output: OutputSection,
}

fn steps_of(span: f64, dt: f64, what: &str) -> Result<usize> {
    let k = span / dt;
    let r = k.round();
    if r < 1.0 || (k - r).abs() > 1e-9 * r.max(1.0) {
        return Err(HarnessError::Config(format!("{what} = {span} is not a positive multiple of dt = {dt}")));
    }
    Ok(r as usize)
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    /// Reads a config file and applies the environment overrides.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_toml(&std::fs::read_to_string(path)?)?;
        cfg.apply_env(|k| std::env::var(k).ok())?;
        Ok(cfg)
    }

    /// Applies `VLAMAX_SEED` and `VLAMAX_OUT_DIR` as returned by `lookup`.
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<()> {
        if let Some(s) = lookup(ENV_SEED) {
            self.sweep.base_seed =
                s.trim().parse().map_err(|_| HarnessError::Config(format!("{ENV_SEED} is not an integer: {s:?}")))?;
        }
        if let Some(d) = lookup(ENV_OUT_DIR) {
            self.output.dir = PathBuf::from(d);
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        self.f0.validate()?;
        let r = &self.run;
        if !(r.t_end > 0.0 && r.t_end.is_finite()) {
            return bad(format!("t_end must be positive, got {}", r.t_end));
        }
        if !(r.dt > 0.0 && r.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", r.dt));
        }
        steps_of(r.t_end, r.dt, "t_end")?;
        steps_of(r.checkpoint_interval, r.dt, "checkpoint_interval")?;
        if r.reference_size == 0 {
            return bad("reference_size must be positive".into());
        }
        if self.sweep.n_values.is_empty() || self.sweep.n_values.contains(&0) || self.sweep.seeds == 0 {
            return bad("sweep needs positive N values and at least one seed".into());
        }
        if self.chaos.p_values.iter().any(|p| !(*p >= 1.0 && p.is_finite())) {
            return bad(format!("orders p must be finite and >= 1, got {:?}", self.chaos.p_values));
        }
        if self.energy.enabled && !(self.energy.spacing > 0.0) {
            return bad("energy grid spacing must be positive".into());
        }
        if self.lattice.n_lat == Some(0) {
            return bad("n_lat must be positive".into());
        }
        let g = self.form_factor.gamma;
        let d = self.chaos.delta;
        if !(g > 0.0) {
            return bad(format!("gamma must be positive, got {g}"));
        }
        if self.form_factor.strict {
            if g >= 1.0 / 12.0 {
                return bad(format!("strict mode needs gamma < 1/12, got {g}"));
            }
            if !(g < d && d < 0.25) {
                return bad(format!("strict mode needs gamma < delta < 1/4, got gamma = {g}, delta = {d}"));
            }
            for p in &self.chaos.p_values {
                let cap = (1.0f64 / 6.0).min(1.0 / (2.0 * p));
                if self.chaos.alpha >= cap {
                    return bad(format!("strict mode needs alpha < min(1/6, 1/(2p)) = {cap} for p = {p}"));
                }
            }
        } else if !(g < d && d < 0.25) {
            log::warn!("gamma = {g}, delta = {d} lie outside gamma < delta < 1/4");
        }
        Ok(())
    }

    /// Number of time steps up to `t_end`.
    pub fn steps(&self) -> usize {
        (self.run.t_end / self.run.dt).round() as usize
    }

    /// Steps between checkpoints.
    pub fn checkpoint_stride(&self) -> usize {
        (self.run.checkpoint_interval / self.run.dt).round() as usize
    }

    /// Step indices at which distances are measured, always including 0 and the end.
    pub fn checkpoints(&self) -> Vec<usize> {
        let (steps, stride) = (self.steps(), self.checkpoint_stride());
        let mut v: Vec<usize> = (0..=steps).step_by(stride).collect();
        if v.last() != Some(&steps) {
            v.push(steps);
        }
        v
    }

    /// `chi^N` for `N` particles.
    pub fn form_factor(&self, n: usize) -> Result<RescaledFormFactor> {
        Ok(RescaledFormFactor::rescale(FormFactor::standard(), n, self.form_factor.gamma, self.form_factor.strict)?)
    }

    pub fn dynamics_config(&self) -> DynamicsConfig {
        DynamicsConfig {
            field: self.run.model.field_config(),
            include_self: self.run.include_self,
            stability_constant: self.run.stability_constant,
        }
    }

    /// Seeds of the sweep.
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.sweep.seeds as u64).map(|k| self.sweep.base_seed + k).collect()
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let text = cfg.to_toml().unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg);
        assert_eq!(cfg.checkpoints(), vec![0, 5, 10]);
    }

    #[test]
    fn partial_files_use_defaults() {
        let cfg = ExperimentConfig::from_toml("[run]\nt_end = 0.3\ndt = 0.1\ncheckpoint_interval = 0.2\n").unwrap();
        assert_eq!(cfg.steps(), 3);
        assert_eq!(cfg.checkpoints(), vec![0, 2, 3]);
        assert_eq!(cfg.f0, F0Spec::default());
        assert!(ExperimentConfig::from_toml("[run]\nbogus = 1\n").is_err());
        let model = ExperimentConfig::from_toml("[run.model]\nkind = \"exact\"\norder = 6\n").unwrap();
        assert_eq!(model.run.model, ModelSpec::Exact { order: 6 });
    }

    #[test]
    fn invalid_values_rejected() {
        for text in [
            "[run]\nt_end = -1.0\n",
            "[run]\ndt = 0.03\n",
            "[run]\ncheckpoint_interval = 0.07\n",
            "[sweep]\nn_values = []\n",
            "[form_factor]\nstrict = true\n",
            "[form_factor]\nstrict = true\ngamma = 0.05\n[chaos]\ndelta = 0.3\n",
        ] {
            assert!(ExperimentConfig::from_toml(text).is_err(), "{text}");
        }
        assert!(ExperimentConfig::from_toml("[form_factor]\nstrict = true\ngamma = 0.05\n").is_ok());
    }

    #[test]
    fn environment_overrides() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_env(|k| match k {
            ENV_SEED => Some("42".into()),
            ENV_OUT_DIR => Some("/tmp/elsewhere".into()),
            _ => None,
        })
        .unwrap();
        assert_eq!(cfg.sweep.base_seed, 42);
        assert_eq!(cfg.output.dir, PathBuf::from("/tmp/elsewhere"));
        assert!(cfg.apply_env(|_| Some("x".into())).is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.sweep.base_seed += 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
    }
}
