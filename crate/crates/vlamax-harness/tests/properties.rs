//! Property tests for lattices and configs.

use proptest::prelude::*;
use vlamax_harness::lattice::LatticeSpec;
use vlamax_harness::ExperimentConfig;

proptest! {
    #[test]
    fn lattice_points_cover_the_cube(bound in 0.1f64..10.0, n_lat in 1usize..5) {
        let l = LatticeSpec::new(bound, n_lat).unwrap();
        let pts = l.points();
        prop_assert_eq!(pts.len(), l.per_axis().pow(3));
        let tol = 1e-12 * bound;
        prop_assert!(pts.iter().all(|p| p.iter().all(|c| c.abs() <= bound + tol)));
        let extreme = pts.iter().map(|p| p.amax()).fold(0.0, f64::max);
        prop_assert!((extreme - bound).abs() <= tol);
    }

    #[test]
    fn default_n_lat_is_the_cube_root_ceiling(n in 1usize..100_000) {
        let c = LatticeSpec::default_n_lat(n);
        prop_assert!(c.pow(3) >= n);
        prop_assert!((c - 1).pow(3) < n);
    }

    #[test]
    fn config_survives_a_toml_round_trip(
        t_end in 0.1f64..2.0,
        steps in 1usize..50,
        gamma in 0.0f64..0.08,
        seeds in 1usize..20,
    ) {
        let mut cfg = ExperimentConfig::default();
        cfg.run.t_end = t_end;
        cfg.run.dt = t_end / steps as f64;
        cfg.run.checkpoint_interval = t_end;
        cfg.form_factor.gamma = gamma;
        cfg.sweep.seeds = seeds;
        let text = toml::to_string(&cfg).unwrap();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        prop_assert_eq!(back.hash(), cfg.hash());
        prop_assert_eq!(back.steps(), steps);
    }
}
