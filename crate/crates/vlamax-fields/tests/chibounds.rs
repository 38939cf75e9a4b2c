//! Envelope bounds for kernels smoothed by the rescaled form factor.

use std::f64::consts::PI;

use vlamax_fields::form_factor::{FormFactor, RescaledFormFactor, SmoothingOptions};
use vlamax_kinematics::Vec3;

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

fn direction(i: usize) -> Vec3 {
    let a = 0.7 * i as f64;
    Vec3::new(a.cos() * 0.6, a.sin() * 0.6, 0.8 - 0.1 * (i % 3) as f64).normalize()
}

/// Largest ratio of `|smoothed|` to `envelope(|x|)` over a log radial grid.
fn fit(r: f64, power: i32, grad: bool) -> f64 {
    let ff = RescaledFormFactor::with_radius(FormFactor::standard(), r).unwrap();
    let m = ff.mollifier();
    let opts = SmoothingOptions { rel_tol: 1e-7, abs_tol: 1e-12, max_order: 128, ..Default::default() };
    let h = |y: &Vec3| y / y.norm().powi(3);
    let mut worst: f64 = 0.0;
    for (i, s) in log_grid(1e-3, 50.0, 40).into_iter().enumerate() {
        let x = direction(i) * s;
        let value = if grad {
            m.smooth_kernel_grad(h, &x, &opts).unwrap().norm()
        } else {
            m.smooth_kernel(h, &x, &opts).unwrap().norm()
        };
        let envelope = (r.powi(-power)).min(s.powi(-power));
        worst = worst.max(value / envelope);
    }
    worst
}

#[test]
fn value_envelope_holds_with_one_constant() {
    let c = fit(0.5, 2, false);
    assert!(c.is_finite() && c > 0.0);
    let c2 = fit(0.2, 2, false);
    assert!(c2 <= 1.05 * c && c <= 1.05 * c2, "constants {c} and {c2}");
}

#[test]
fn gradient_envelope_holds_with_one_constant() {
    let c = fit(0.5, 3, true);
    assert!(c.is_finite() && c > 0.0);
    let c2 = fit(0.2, 3, true);
    assert!(c2 <= 1.05 * c && c <= 1.05 * c2, "constants {c} and {c2}");
}

#[test]
fn far_field_mean_value_bound() {
    let r = 0.3;
    let m = RescaledFormFactor::with_radius(FormFactor::standard(), r).unwrap().mollifier();
    let opts = SmoothingOptions::default();
    for s in [1.0, 2.0, 3.0] {
        for d in log_grid(2.0 * r, 20.0, 12) {
            let x = Vec3::new(d, 0.0, 0.0);
            let v = m.smooth_kernel(|y| Vec3::new(y.norm().powf(-s), 0.0, 0.0), &x, &opts).unwrap().x;
            assert!(v <= 2f64.powf(s) / d.powf(s));
        }
    }
}

#[test]
fn coulomb_kernel_far_from_center() {
    let r = 0.25;
    let m = RescaledFormFactor::with_radius(FormFactor::standard(), r).unwrap().mollifier();
    let x = Vec3::new(0.0, 4.0 * r, 0.0);
    let v = m.smooth_kernel(|y| y / y.norm().powi(3), &x, &SmoothingOptions::default()).unwrap();
    let exact = x / x.norm().powi(3);
    assert!((v - exact).norm() <= 4.0 / x.norm_squared());
    // Outside the support the smoothed Coulomb field equals the point field.
    assert!((v - exact).norm() < 1e-6 * exact.norm());
}

#[test]
fn inverse_square_at_center_is_bounded() {
    for r in [0.5, 0.2] {
        let m = RescaledFormFactor::with_radius(FormFactor::standard(), r).unwrap().mollifier();
        let v = m
            .smooth_kernel(|y| Vec3::new(1.0 / y.norm_squared(), 0.0, 0.0), &Vec3::zeros(), &SmoothingOptions::default())
            .unwrap()
            .x;
        let chi = FormFactor::standard();
        // |x|^-2 against chi^N at the origin is r^-2 int 4 pi chi(s) ds
        let exact: f64 = {
            let n = 4000;
            (0..n).map(|i| (i as f64 + 0.5) / n as f64).map(|s| 4.0 * PI * chi.profile(s) / n as f64).sum::<f64>()
        } / (r * r);
        assert!((v - exact).abs() < 1e-5 * exact);
    }
}

#[test]
fn convolution_commutes_with_translation() {
    let m = RescaledFormFactor::with_radius(FormFactor::standard(), 0.3).unwrap().mollifier();
    let a = Vec3::new(0.3, -0.2, 0.5);
    let x = Vec3::new(0.4, 0.1, 0.2);
    let h = |y: &Vec3| y / y.norm().powi(3);
    let opts = SmoothingOptions { rel_tol: 1e-9, max_order: 128, ..Default::default() };
    let shifted = m
        .smooth_kernel(|y| h(&(y - a)), &x, &SmoothingOptions { singular_point: a, ..opts })
        .unwrap();
    let plain = m.smooth_kernel(h, &(x - a), &opts).unwrap();
    assert!((shifted - plain).norm() < 1e-7 * plain.norm());
}
