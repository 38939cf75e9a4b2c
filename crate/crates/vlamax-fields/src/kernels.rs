//! Point kernels of the retarded field of a single charge.
//!
//! Arguments `(t, x)` are a time lag and a spatial offset from the source;
//! `xi` is the source momentum. All functions reject denominators below
//! [`tol::DEGENERATE`](vlamax_kinematics::tol::DEGENERATE).

use std::f64::consts::PI;

use vlamax_kinematics::{gamma, tol, velocity, Mat3, Vec3};

use crate::error::{FieldError, Result};

fn lag_denominator(t: f64, x: &Vec3, v: &Vec3) -> Result<f64> {
    let d = t - v.dot(x);
    if d.abs() < tol::DEGENERATE {
        return Err(FieldError::Degenerate { what: "t - v.x", value: d });
    }
    Ok(d)
}

fn unit(x: &Vec3) -> Result<(Vec3, f64)> {
    let r = x.norm();
    if r < tol::DEGENERATE {
        return Err(FieldError::Degenerate { what: "|x|", value: r });
    }
    Ok((x / r, r))
}

/// `alpha^0 = (x - t v) / (t - v.x)`, homogeneous of degree 0 in `(t, x)`.
pub fn alpha0(t: f64, x: &Vec3, xi: &Vec3) -> Result<Vec3> {
    let v = velocity(xi);
    let d = lag_denominator(t, x, &v)?;
    Ok((x - v * t) / d)
}

/// `alpha^-1 = (1 - v^2)(x - t v) / (t - v.x)^2`, homogeneous of degree -1.
pub fn alpha_minus1(t: f64, x: &Vec3, xi: &Vec3) -> Result<Vec3> {
    let v = velocity(xi);
    let d = lag_denominator(t, x, &v)?;
    Ok((x - v * t) * ((1.0 - v.norm_squared()) / (d * d)))
}

/// Momentum gradient of `alpha^0`.
///
/// Entry `(i, j)` is `d alpha0_j / d xi_i`, so the directional derivative
/// along a force `K` is `grad_alpha0(..).transpose() * K`.
pub fn grad_alpha0(t: f64, x: &Vec3, xi: &Vec3) -> Result<Mat3> {
    let v = velocity(xi);
    let g = gamma(xi);
    let d = lag_denominator(t, x, &v)?;
    let p = Mat3::identity() - v * v.transpose();
    let num = x - v * t;
    let perp = x - v * v.dot(x);
    let jac = (p * (-t / d) + num * perp.transpose() / (d * d)) / g;
    Ok(jac.transpose())
}

/// Relativistic Coulomb kernel `(1 - v^2)(n - v) / (4 pi (1 - v.n)^3 |x|^2)`.
pub fn kernel_k(x: &Vec3, xi: &Vec3) -> Result<Vec3> {
    velocity_field(x, &velocity(xi))
}

/// [`kernel_k`] parametrized by the velocity.
pub fn velocity_field(x: &Vec3, v: &Vec3) -> Result<Vec3> {
    let (n, r) = unit(x)?;
    let q = 1.0 - v.dot(&n);
    Ok((n - v) * ((1.0 - v.norm_squared()) / (4.0 * PI * q * q * q * r * r)))
}

/// Radiation field `n x ((n - v) x a) / (4 pi (1 - n.v)^3 |x|)` of a unit
/// charge with velocity `v` and acceleration `a` at the retarded time.
pub fn acceleration_field(x: &Vec3, v: &Vec3, a: &Vec3) -> Result<Vec3> {
    let (n, r) = unit(x)?;
    let q = 1.0 - v.dot(&n);
    Ok(n.cross(&(n - v).cross(a)) / (4.0 * PI * q * q * q * r))
}

/// Linear map `a -> acceleration_field(x, v, a)`.
pub fn acceleration_matrix(x: &Vec3, v: &Vec3) -> Result<Mat3> {
    let (n, r) = unit(x)?;
    let q = 1.0 - v.dot(&n);
    let u = n - v;
    // n x (u x a) = u (n.a) - a (n.u)
    let m = u * n.transpose() - Mat3::identity() * n.dot(&u);
    Ok(m / (4.0 * PI * q * q * q * r))
}

/// Magnetic partner `n x E` of a retarded field at offset `x`.
pub fn magnetic(x: &Vec3, e: &Vec3) -> Vec3 {
    let r = x.norm();
    if r == 0.0 {
        return Vec3::zeros();
    }
    (x / r).cross(e)
}

/// Static Coulomb field `x / (4 pi |x|^3)` of a unit point charge.
pub fn coulomb(x: &Vec3) -> Result<Vec3> {
    let (n, r) = unit(x)?;
    Ok(n / (4.0 * PI * r * r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rest_frame_examples() {
        let x = Vec3::new(0.3, -1.2, 0.7);
        let t = 2.5;
        let z = Vec3::zeros();
        assert!((alpha0(t, &x, &z).unwrap() - x / t).norm() < 1e-15);
        assert!((alpha_minus1(t, &x, &z).unwrap() - x / (t * t)).norm() < 1e-15);
        let k = kernel_k(&x, &z).unwrap();
        assert_eq!(k, coulomb(&x).unwrap());
    }

    #[test]
    fn on_cone_gradient_at_rest() {
        let x = Vec3::new(1.0, 2.0, -2.0);
        let n = x / 3.0;
        let g = grad_alpha0(3.0, &x, &Vec3::zeros()).unwrap();
        let expect = n * n.transpose() - Mat3::identity();
        assert!((g - expect).norm() < 1e-15);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        assert!(matches!(kernel_k(&Vec3::zeros(), &Vec3::x()), Err(FieldError::Degenerate { .. })));
        assert!(alpha0(0.0, &Vec3::zeros(), &Vec3::x()).is_err());
    }

    #[test]
    fn radiation_at_rest_is_minus_transverse_acceleration() {
        let x = Vec3::new(0.0, 0.0, 2.0);
        let a = Vec3::new(1.0, 0.0, 3.0);
        let e = acceleration_field(&x, &Vec3::zeros(), &a).unwrap();
        assert!((e - Vec3::new(-1.0, 0.0, 0.0) / (4.0 * PI * 2.0)).norm() < 1e-15);
        let m = acceleration_matrix(&x, &Vec3::new(0.2, -0.1, 0.3)).unwrap();
        let e2 = acceleration_field(&x, &Vec3::new(0.2, -0.1, 0.3), &a).unwrap();
        assert!((m * a - e2).norm() < 1e-14);
    }
}
