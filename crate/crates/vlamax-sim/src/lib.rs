//! Rigid-charge dynamics under smoothed retarded fields and the regularized
//! mean-field flow driven by a reference ensemble.
//!
//! Charges carry weight `1/N`, so the kinetic energy is `(1/N) sum gamma_i`
//! and every ensemble has unit total charge.

pub mod dynamics;
pub mod energy;
pub mod error;
pub mod f0;
pub mod meanfield;
pub mod snapshot;

pub use dynamics::{Drive, Dynamics, DynamicsConfig, Ensemble};
pub use error::{Result, SimError};
pub use f0::F0Spec;
pub use meanfield::{MeanFieldFlow, ReferenceEnsemble};
pub use snapshot::{Role, Snapshot};
