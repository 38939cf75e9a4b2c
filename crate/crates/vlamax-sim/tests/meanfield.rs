use proptest::prelude::*;
use vlamax_fields::form_factor::{FormFactor, RescaledFormFactor};
use vlamax_kinematics::{PhaseState, Vec3};
use vlamax_sim::meanfield::{evolve_reference, track_flow};
use vlamax_sim::{Drive, Dynamics, Ensemble, F0Spec, MeanFieldFlow, ReferenceEnsemble};

fn setup(r: f64) -> (RescaledFormFactor, Dynamics) {
    let ff = RescaledFormFactor::with_radius(FormFactor::standard(), r).unwrap();
    let d = Dynamics::new(&ff, Default::default());
    (ff, d)
}

#[test]
fn center_force_vanishes_by_point_symmetry() {
    let (_, d) = setup(0.4);
    let r = ReferenceEnsemble::sample(F0Spec::default(), 64, 3, 0.05).unwrap();
    let f = r.force(&d, 0.0, &Vec3::zeros(), &Vec3::zeros()).unwrap();
    assert!(f.norm() < 1e-14, "{f}");
}

#[test]
fn initial_force_monte_carlo_error_shrinks_with_reference_size() {
    let (ff, d) = setup(0.4);
    let f0 = F0Spec::default();
    let exact_field = f0.smoothed_coulomb(&ff.double_mollifier());
    let points = [Vec3::new(0.5, 0.0, 0.0), Vec3::new(0.2, -0.4, 0.3), Vec3::new(0.0, 0.7, -0.2)];
    let rms = |m: usize| -> f64 {
        let mut acc = 0.0;
        let mut count = 0.0;
        for seed in 0..8 {
            let r = ReferenceEnsemble::sample(f0, m, 100 + seed, 0.05).unwrap();
            for x in &points {
                let f = r.force(&d, 0.0, x, &Vec3::zeros()).unwrap();
                acc += (f - exact_field.coulomb(x)).norm_squared();
                count += 1.0;
            }
        }
        (acc / count).sqrt()
    };
    let (coarse, fine) = (rms(64), rms(1024));
    let ratio = coarse / fine;
    eprintln!("rms force error {coarse:.3e} -> {fine:.3e}, ratio {ratio:.2}");
    // 1/sqrt(M) predicts a factor 4.
    assert!(ratio > 2.0 && ratio < 8.0, "ratio {ratio}");
}

#[test]
fn single_member_reference_is_a_single_charge() {
    let (_, d) = setup(0.5);
    let f0 = F0Spec::default();
    let r = evolve_reference(&d, f0, 1, 9, 0.05, 5).unwrap();
    let mut e = Ensemble::normalized(f0.sample_antithetic(1, 9).unwrap(), 0.05).unwrap();
    d.run(&mut e, Drive::SelfConsistent, 5).unwrap();
    assert_eq!(r.ensemble.states(), e.states());
}

#[test]
fn point_symmetry_is_preserved() {
    let (_, d) = setup(0.5);
    let r = evolve_reference(&d, F0Spec::default(), 16, 4, 0.05, 8).unwrap();
    let (sx, sxi) = r
        .ensemble
        .states()
        .iter()
        .fold((Vec3::zeros(), Vec3::zeros()), |(a, b), z| (a + z.x, b + z.xi));
    assert!(sx.norm() < 1e-13 && sxi.norm() < 1e-13, "{sx} {sxi}");
    for pair in r.ensemble.states().chunks(2) {
        assert!((pair[0].x + pair[1].x).norm() < 1e-13);
    }
}

#[test]
fn tracer_on_a_reference_characteristic_reproduces_it() {
    let (_, d) = setup(0.5);
    let r = evolve_reference(&d, F0Spec::default(), 16, 5, 0.05, 6).unwrap();
    let starts: Vec<_> = [0, 3, 10].iter().map(|&i| r.ensemble.state_at(i, 0)).collect();
    let flow = track_flow(&d, &r, starts, 6).unwrap();
    for (k, &i) in [0, 3, 10].iter().enumerate() {
        for n in 0..=6 {
            assert_eq!(flow.tracers.state_at(k, n), r.ensemble.state_at(i, n));
        }
    }
}

#[test]
fn flow_composes_over_intermediate_times() {
    let (_, d) = setup(0.5);
    let f0 = F0Spec::default();
    let r = evolve_reference(&d, f0, 16, 6, 0.05, 6).unwrap();
    let z = f0.sample(4, 77).unwrap();
    let direct = track_flow(&d, &r, z.clone(), 6).unwrap();
    let first = track_flow(&d, &r, z, 2).unwrap();
    let mut second = MeanFieldFlow::starting_at(first.tracers.states().to_vec(), 0.05, 2).unwrap();
    second.advance(&d, &r, 4).unwrap();
    assert_eq!(direct.tracers.states(), second.tracers.states());
}

#[test]
fn tracers_stay_within_the_position_bound() {
    let (_, d) = setup(0.5);
    let f0 = F0Spec::default();
    let t_steps = 10;
    let r = evolve_reference(&d, f0, 16, 8, 0.05, t_steps).unwrap();
    let flow = track_flow(&d, &r, f0.sample(8, 1).unwrap(), t_steps).unwrap();
    let bound = vlamax_sim::meanfield::position_bound(&f0, 0.5);
    assert!(flow.tracers.states().iter().all(|z| z.x.norm() < bound));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn reflected_tracers_move_reflected(
        x in prop::array::uniform3(-0.8f64..0.8),
        xi in prop::array::uniform3(-0.4f64..0.4),
    ) {
        let (_, d) = setup(0.5);
        let r = evolve_reference(&d, F0Spec::default(), 8, 12, 0.05, 3).unwrap();
        let z = PhaseState::new(Vec3::from(x), Vec3::from(xi));
        let zr = PhaseState::new(-z.x, -z.xi);
        let flow = track_flow(&d, &r, vec![z, zr], 3).unwrap();
        let s = flow.tracers.states();
        prop_assert!((s[0].x + s[1].x).norm() < 1e-12);
        prop_assert!((s[0].xi + s[1].xi).norm() < 1e-12);
    }
}
