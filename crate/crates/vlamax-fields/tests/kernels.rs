use std::f64::consts::PI;

use proptest::prelude::*;
use vlamax_fields::kernels::{
    acceleration_field, alpha0, alpha_minus1, grad_alpha0, kernel_k, magnetic, velocity_field,
};
use vlamax_kinematics::{tol, velocity, Mat3, Vec3};

fn vec3(r: f64) -> impl Strategy<Value = Vec3> {
    (-r..r, -r..r, -r..r).prop_map(|(a, b, c)| Vec3::new(a, b, c))
}

fn rotation(axis: Vec3, angle: f64) -> Mat3 {
    let k = axis.normalize();
    let kx = k.cross_matrix();
    Mat3::identity() + kx * angle.sin() + kx * kx * (1.0 - angle.cos())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn grad_alpha0_matches_finite_difference(x in vec3(2.0), xi in vec3(0.6)) {
        prop_assume!(x.norm() > 0.3);
        let t = x.norm();
        let g = grad_alpha0(t, &x, &xi).unwrap();
        let h = 1e-5;
        for i in 0..3 {
            let mut e = Vec3::zeros();
            e[i] = h;
            let fd = (alpha0(t, &x, &(xi + e)).unwrap() - alpha0(t, &x, &(xi - e)).unwrap()) / (2.0 * h);
            for j in 0..3 {
                prop_assert!((fd[j] - g[(i, j)]).abs() < tol::KERNEL_ORACLE * g[(i, j)].abs().max(1.0));
            }
        }
    }

    #[test]
    fn alpha_minus1_is_homogeneous_of_degree_minus_one(x in vec3(2.0), xi in vec3(0.6), t in 0.1..3.0f64) {
        prop_assume!((t - velocity(&xi).dot(&x)).abs() > 1e-3);
        let a = alpha_minus1(t, &x, &xi).unwrap();
        let b = alpha_minus1(2.0 * t, &(x * 2.0), &xi).unwrap();
        prop_assert!((b * 2.0 - a).norm() <= 1e-12 * a.norm().max(1.0));
        let a0 = alpha0(t, &x, &xi).unwrap();
        let b0 = alpha0(2.0 * t, &(x * 2.0), &xi).unwrap();
        prop_assert!((a0 - b0).norm() <= 1e-12 * a0.norm().max(1.0));
    }

    #[test]
    fn kernels_match_symbolic_forms(x in vec3(2.0), xi in vec3(0.6)) {
        prop_assume!(x.norm() > 0.1);
        let t = x.norm();
        let v = velocity(&xi);
        let k = kernel_k(&x, &xi).unwrap();
        let am1 = alpha_minus1(t, &x, &xi).unwrap();
        let n = x / t;
        let expect = (n - v) * ((1.0 - v.norm_squared()) / (t * (1.0 - v.dot(&n)).powi(2)));
        prop_assert!((am1 - expect).norm() < 1e-12 * expect.norm());
        prop_assert!((k * (4.0 * PI * t * t * (1.0 - v.dot(&n))) - am1 * t).norm() < 1e-12 * am1.norm() * t);
    }

    #[test]
    fn grad_alpha0_scaled_bound(x in vec3(3.0), xi in vec3(1.0)) {
        prop_assume!(x.norm() > 1e-3);
        let vbar = velocity(&xi).norm();
        let g = grad_alpha0(x.norm(), &x, &xi).unwrap();
        prop_assert!(g.norm() <= 8.0 / (1.0 - vbar).powi(2));
    }

    #[test]
    fn k_bound_and_rotation_equivariance(x in vec3(3.0), xi in vec3(1.5), axis in vec3(1.0), angle in 0.0..6.28f64) {
        prop_assume!(x.norm() > 1e-3 && axis.norm() > 1e-3);
        let vbar = velocity(&xi).norm();
        let k = kernel_k(&x, &xi).unwrap();
        prop_assert!(k.norm() <= 1.0 / (2.0 * PI * (1.0 - vbar).powi(3) * x.norm_squared()));
        let r = rotation(axis, angle);
        let kr = kernel_k(&(r * x), &(r * xi)).unwrap();
        prop_assert!((kr - r * k).norm() < 1e-12 * k.norm());
    }
}

#[test]
fn k_at_rest_is_coulomb_to_machine_precision() {
    for x in [Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.3, -0.4, 1.2), Vec3::new(1e-3, 2e-3, -5e-4)] {
        let k = kernel_k(&x, &Vec3::zeros()).unwrap();
        let r = x.norm();
        let c = x / (4.0 * PI * r * r * r);
        assert!((k - c).norm() <= 4.0 * f64::EPSILON * c.norm());
    }
}

/// Trajectory used for the potential oracle.
fn path(s: f64) -> (Vec3, Vec3, Vec3) {
    let y = Vec3::new(0.3 * s.sin(), 0.2 * (1.3 * s).cos(), 0.1 * s * s);
    let v = Vec3::new(0.3 * s.cos(), -0.26 * (1.3 * s).sin(), 0.2 * s);
    let a = Vec3::new(-0.3 * s.sin(), -0.338 * (1.3 * s).cos(), 0.2);
    (y, v, a)
}

fn retarded(t: f64, x: &Vec3) -> f64 {
    let (mut lo, mut hi) = (t - 20.0, t);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (y, _, _) = path(mid);
        if (x - y).norm() > t - mid {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Scalar and vector potentials of a unit point charge.
fn potentials(t: f64, x: &Vec3) -> (f64, Vec3) {
    let s = retarded(t, x);
    let (y, v, _) = path(s);
    let w = x - y;
    let r = w.norm();
    let phi = 1.0 / (4.0 * PI * (r - v.dot(&w)));
    (phi, v * phi)
}

#[test]
fn point_fields_match_potential_derivatives() {
    let h = 2e-5;
    for (t, x) in [(2.0, Vec3::new(1.0, 0.5, -0.3)), (3.5, Vec3::new(-1.2, 0.4, 2.0)), (2.5, Vec3::new(0.1, -0.2, 0.6))] {
        let mut grad_phi = Vec3::zeros();
        let mut curl = Vec3::zeros();
        let mut jac = Mat3::zeros();
        for i in 0..3 {
            let mut e = Vec3::zeros();
            e[i] = h;
            let (pp, ap) = potentials(t, &(x + e));
            let (pm, am) = potentials(t, &(x - e));
            grad_phi[i] = (pp - pm) / (2.0 * h);
            jac.set_column(i, &((ap - am) / (2.0 * h)));
        }
        curl.x = jac[(2, 1)] - jac[(1, 2)];
        curl.y = jac[(0, 2)] - jac[(2, 0)];
        curl.z = jac[(1, 0)] - jac[(0, 1)];
        let (_, ap) = potentials(t + h, &x);
        let (_, am) = potentials(t - h, &x);
        let e_fd = -grad_phi - (ap - am) / (2.0 * h);

        let s = retarded(t, &x);
        let (y, v, a) = path(s);
        let w = x - y;
        let e = velocity_field(&w, &v).unwrap() + acceleration_field(&w, &v, &a).unwrap();
        let b = magnetic(&w, &e);
        assert!((e - e_fd).norm() < 1e-6 * e.norm(), "E {e} vs {e_fd}");
        assert!((b - curl).norm() < 1e-6 * e.norm(), "B {b} vs {curl}");
    }
}
