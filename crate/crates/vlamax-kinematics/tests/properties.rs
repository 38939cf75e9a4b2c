use proptest::prelude::*;
use vlamax_kinematics::{lorentz_force, velocity, velocity_jacobian, FieldSample, Vec3};

fn vec3(r: f64) -> impl Strategy<Value = Vec3> {
    (-r..r, -r..r, -r..r).prop_map(|(a, b, c)| Vec3::new(a, b, c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn velocity_is_subluminal(xi in vec3(1e6)) {
        prop_assert!(velocity(&xi).norm() < 1.0);
    }

    #[test]
    fn speed_is_monotone_in_momentum(dir in vec3(1.0), a in 0.0..50.0f64, b in 0.0..50.0f64) {
        prop_assume!(dir.norm() > 1e-3);
        let d = dir.normalize();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(velocity(&(d * lo)).norm() <= velocity(&(d * hi)).norm());
    }

    #[test]
    fn jacobian_matches_finite_difference(xi in vec3(5.0)) {
        let j = velocity_jacobian(&xi);
        let h = 1e-5;
        for c in 0..3 {
            let mut e = Vec3::zeros();
            e[c] = h;
            let fd = (velocity(&(xi + e)) - velocity(&(xi - e))) / (2.0 * h);
            for r in 0..3 {
                prop_assert!((fd[r] - j[(r, c)]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn jacobian_norm_bounded(xi in vec3(1e3)) {
        let s = velocity_jacobian(&xi).singular_values();
        prop_assert!(s.max() <= 2.0);
    }

    #[test]
    fn lorentz_is_linear(e1 in vec3(3.0), b1 in vec3(3.0), e2 in vec3(3.0), b2 in vec3(3.0),
                         xi in vec3(3.0), s in -2.0..2.0f64) {
        let f1 = FieldSample::new(e1, b1);
        let f2 = FieldSample::new(e2, b2);
        let lhs = lorentz_force(&(f1 + s * f2), &xi);
        let rhs = lorentz_force(&f1, &xi) + s * lorentz_force(&f2, &xi);
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }
}
