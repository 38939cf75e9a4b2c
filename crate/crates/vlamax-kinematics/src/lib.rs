//! Relativistic kinematics of a single rigid charge.
//!
//! Units are natural: the speed of light, the particle mass and the charge
//! are all one. A particle is described by its position `x` and its
//! relativistic momentum `xi`; the velocity is the derived quantity
//! `v(xi) = xi / sqrt(1 + |xi|^2)`, which is always strictly sub-luminal.

use nalgebra::{Matrix3, Vector3};

/// Three-vector of doubles.
pub type Vec3 = Vector3<f64>;
/// 3x3 matrix of doubles.
pub type Mat3 = Matrix3<f64>;

pub mod tol;

/// Phase-space coordinates of one particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    /// Position.
    pub x: Vec3,
    /// Relativistic momentum.
    pub xi: Vec3,
}

impl PhaseState {
    pub fn new(x: Vec3, xi: Vec3) -> Self {
        Self { x, xi }
    }

    /// Velocity of the particle, `|v| < 1`.
    pub fn velocity(&self) -> Vec3 {
        velocity(&self.xi)
    }

    /// Lorentz factor `sqrt(1 + |xi|^2)`.
    pub fn gamma(&self) -> f64 {
        gamma(&self.xi)
    }

    pub fn is_finite(&self) -> bool {
        is_finite(&self.x) && is_finite(&self.xi)
    }
}

/// Electric and magnetic field at one space-time point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldSample {
    pub e: Vec3,
    pub b: Vec3,
}

impl FieldSample {
    pub fn new(e: Vec3, b: Vec3) -> Self {
        Self { e, b }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_finite(&self) -> bool {
        is_finite(&self.e) && is_finite(&self.b)
    }
}

impl std::ops::Add for FieldSample {
    type Output = FieldSample;
    fn add(self, rhs: FieldSample) -> FieldSample {
        FieldSample::new(self.e + rhs.e, self.b + rhs.b)
    }
}

impl std::ops::AddAssign for FieldSample {
    fn add_assign(&mut self, rhs: FieldSample) {
        self.e += rhs.e;
        self.b += rhs.b;
    }
}

impl std::ops::Sub for FieldSample {
    type Output = FieldSample;
    fn sub(self, rhs: FieldSample) -> FieldSample {
        FieldSample::new(self.e - rhs.e, self.b - rhs.b)
    }
}

impl std::ops::Mul<FieldSample> for f64 {
    type Output = FieldSample;
    fn mul(self, rhs: FieldSample) -> FieldSample {
        FieldSample::new(self * rhs.e, self * rhs.b)
    }
}

/// True when every component is finite.
pub fn is_finite(v: &Vec3) -> bool {
    v.iter().all(|c| c.is_finite())
}

/// Lorentz factor `sqrt(1 + |xi|^2)`.
pub fn gamma(xi: &Vec3) -> f64 {
    (1.0 + xi.norm_squared()).sqrt()
}

/// Relativistic velocity `v(xi) = xi / sqrt(1 + |xi|^2)`.
///
/// ```
/// use vlamax_kinematics::{velocity, Vec3};
/// let v = velocity(&Vec3::new(1.0, 0.0, 0.0));
/// assert!((v.x - 0.5f64.sqrt()).abs() < 1e-15);
/// ```
pub fn velocity(xi: &Vec3) -> Vec3 {
    xi / gamma(xi)
}

/// Inverse of [`velocity`] for `|v| < 1`.
pub fn momentum_from_velocity(v: &Vec3) -> Vec3 {
    let s = 1.0 - v.norm_squared();
    assert!(s > 0.0, "velocity must be sub-luminal");
    v / s.sqrt()
}

/// Jacobian `dv^i/dxi^j = delta_ij / g - xi_i xi_j / g^3` with `g = sqrt(1+|xi|^2)`.
///
/// Its operator norm never exceeds one, well inside the bound of two used
/// for Lipschitz estimates.
pub fn velocity_jacobian(xi: &Vec3) -> Mat3 {
    let g2 = 1.0 + xi.norm_squared();
    let g = g2.sqrt();
    Mat3::identity() / g - xi * xi.transpose() / (g2 * g)
}

/// Acceleration `dv/dt` produced by the force `k = dxi/dt` at momentum `xi`.
///
/// Equal to `velocity_jacobian(xi) * k`, written as `(k - (v.k) v) / g`.
pub fn acceleration(xi: &Vec3, k: &Vec3) -> Vec3 {
    let g = gamma(xi);
    let v = xi / g;
    (k - v * v.dot(k)) / g
}

/// Lorentz force `E + v(xi) x B` on a unit charge.
pub fn lorentz_force(field: &FieldSample, xi: &Vec3) -> Vec3 {
    field.e + velocity(xi).cross(&field.b)
}
