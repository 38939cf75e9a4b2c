//! Tolerances shared by the solvers and the test batteries.

/// Residual accepted by the retarded-time root solver.
pub const RETARDED_RESIDUAL: f64 = 1e-10;
/// Denominators below this are treated as degenerate.
pub const DEGENERATE: f64 = 1e-14;
/// Agreement required between closed-form kernels and their oracles.
pub const KERNEL_ORACLE: f64 = 1e-7;
/// Relative target of the adaptive smoothing quadrature.
pub const QUADRATURE_REL: f64 = 1e-6;
/// Agreement of a constant-velocity retarded time with its quadratic oracle.
pub const CLOSED_FORM_RETARDED: f64 = 1e-9;
/// Metric axioms of the transport distances.
pub const METRIC_AXIOM: f64 = 1e-12;
/// Relative agreement of the static smoothed-charge field with quadrature.
pub const STATIC_ORACLE_REL: f64 = 1e-3;
/// Relative energy drift allowed for the two-body conservation run.
pub const ENERGY_DRIFT_REL: f64 = 1e-3;
/// Zero-deviation control for the chaos process.
pub const ZERO_DEVIATION: f64 = 1e-8;
/// Half width of the accepted concentration slope window around -1/6.
pub const CONCENTRATION_SLOPE_HALF_WIDTH: f64 = 0.05;
