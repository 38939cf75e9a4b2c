//! Experiment orchestration: sampling, initial fields, paired microscopic
//! and mean-field runs, sweeps over `N`, lattice field comparison,
//! concentration and law-of-large-numbers probes, and the invariant battery
//! behind the `vlamax` command-line tool.

pub mod checks;
pub mod concentration;
pub mod config;
pub mod error;
pub mod fields;
pub mod lattice;
pub mod lln;
pub mod paired;
pub mod sweep;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use paired::{build_reference, run_paired, run_paired_with, MeanFieldSide, PairedOutcome, SweepRow};
pub use sweep::{run_sweep, SweepReport, SWEEP_SCHEMA};

/// Code listings of the guide in `book/`, compiled and run as doctests.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    pub mod overview {}
    #[doc = include_str!("../../../book/src/running.md")]
    pub mod running {}
    #[doc = include_str!("../../../book/src/configuration.md")]
    pub mod configuration {}
    #[doc = include_str!("../../../book/src/fields.md")]
    pub mod fields {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    pub mod dynamics {}
    #[doc = include_str!("../../../book/src/transport.md")]
    pub mod transport {}
    #[doc = include_str!("../../../book/src/formats.md")]
    pub mod formats {}
    #[doc = include_str!("../../../book/src/validation.md")]
    pub mod validation {}
}
