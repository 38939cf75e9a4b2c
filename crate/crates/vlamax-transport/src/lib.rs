//! Exact Wasserstein distances between equal-size empirical measures, the
//! matched-pairing bound, the capped chaos process and the concentration
//! rate formula for empirical measures in six dimensions.
//!
//! ```
//! use vlamax_transport::{wasserstein_p, EmpiricalMeasure};
//! let x = EmpiricalMeasure::from_points(&[[0.0], [1.0]]).unwrap();
//! let y = EmpiricalMeasure::from_points(&[[0.0], [10.0]]).unwrap();
//! assert_eq!(wasserstein_p(&x, &y, 1.0).unwrap(), 4.5);
//! ```

pub mod assignment;
pub mod chaos;
pub mod concentration;
pub mod distance;
pub mod error;
pub mod measure;
pub mod rate;
pub mod stats;

pub use assignment::{solve_assignment, Assignment};
pub use chaos::{chaos_process_j, chaos_series, lambda_n, ChaosMetricConfig, ChaosReport, Trajectories};
pub use concentration::{concentration_probe, two_sample_wp, ConcentrationSummary, ProbeOptions};
pub use distance::{greedy_upper_bound, wasserstein_p, winf_upper};
pub use error::{Result, TransportError};
pub use measure::EmpiricalMeasure;
pub use rate::fournier_rate;
