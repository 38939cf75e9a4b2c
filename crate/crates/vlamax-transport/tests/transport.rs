use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vlamax_transport::assignment::matched_cost;
use vlamax_transport::distance::{cost_matrix, optimal_assignment};
use vlamax_transport::{wasserstein_p, winf_upper, EmpiricalMeasure};

fn random_measure(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> EmpiricalMeasure {
    EmpiricalMeasure::new(dim, (0..n * dim).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

/// Minimum over all permutations, summed the same way as the solver.
fn brute_force(n: usize, cost: &[f64]) -> f64 {
    fn rec(n: usize, cost: &[f64], row: usize, used: &mut Vec<bool>, picked: &mut Vec<f64>, best: &mut f64) {
        if row == n {
            *best = best.min(matched_cost(picked.iter().copied()));
            return;
        }
        for j in 0..n {
            if !used[j] {
                used[j] = true;
                picked.push(cost[row * n + j]);
                rec(n, cost, row + 1, used, picked, best);
                picked.pop();
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    rec(n, cost, 0, &mut vec![false; n], &mut Vec::new(), &mut best);
    best
}

#[test]
fn assignment_matches_permutation_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for instance in 0..200 {
        let n = 1 + instance % 7;
        let dim = [1, 2, 3, 6][instance % 4];
        let p = [1.0, 2.0, 3.0, 1.5][(instance / 4) % 4];
        let (a, b) = (random_measure(&mut rng, n, dim), random_measure(&mut rng, n, dim));
        let c = cost_matrix(&a, &b, p).unwrap();
        let solved = optimal_assignment(&a, &b, p).unwrap();
        assert_eq!(solved.cost, brute_force(n, &c), "instance {instance}");
    }
}

#[test]
fn dual_potentials_certify_optimality() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [5, 40, 200] {
        let (a, b) = (random_measure(&mut rng, n, 6), random_measure(&mut rng, n, 6));
        let c = cost_matrix(&a, &b, 1.0).unwrap();
        let s = optimal_assignment(&a, &b, 1.0).unwrap();
        for i in 0..n {
            for j in 0..n {
                assert!(s.u[i] + s.v[j] <= c[i * n + j] + 1e-10);
            }
        }
        assert!(s.dual_value() <= s.cost + 1e-9);
        assert!((s.dual_value() - s.cost).abs() < 1e-9 * s.cost.max(1.0));
    }
}

#[test]
fn lipschitz_test_functions_bound_w1_from_below() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let n = 60;
        let a = random_measure(&mut rng, n, 3);
        let b = EmpiricalMeasure::new(3, a.atoms().flat_map(|x| [x[0] * 0.5 + 0.3, x[1], x[2] - 0.2]).collect()).unwrap();
        let w1 = wasserstein_p(&a, &b, 1.0).unwrap();
        let centre: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let dir: Vec<f64> = {
            let d: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
            d.iter().map(|x| x / norm).collect()
        };
        let tests: [Box<dyn Fn(&[f64]) -> f64>; 2] = [
            Box::new(|x: &[f64]| x.iter().zip(&dir).map(|(a, b)| a * b).sum()),
            Box::new(|x: &[f64]| x.iter().zip(&centre).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()),
        ];
        for f in &tests {
            let mean = |m: &EmpiricalMeasure| m.atoms().map(|x| f(x)).sum::<f64>() / n as f64;
            let gap = (mean(&a) - mean(&b)).abs();
            assert!(gap <= w1 + 1e-12, "{gap} > {w1}");
        }
    }
}

#[test]
fn matched_pairing_bounds_every_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for k in 0..1000 {
        let n = 2 + k % 12;
        let (x, y) = (random_measure(&mut rng, n, 6), random_measure(&mut rng, n, 6));
        let bound = winf_upper(&x, &y).unwrap();
        for p in [1.0, 2.0, 3.0] {
            assert!(wasserstein_p(&x, &y, p).unwrap() <= bound * (1.0 + 1e-12));
        }
    }
}

#[test]
fn perturbing_one_atom_moves_the_pairing_bound_by_that_amount() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = random_measure(&mut rng, 10, 6);
    let mut flat: Vec<f64> = x.atoms().flatten().copied().collect();
    flat[6 * 4 + 2] += 0.125;
    let y = EmpiricalMeasure::new(6, flat).unwrap();
    assert_eq!(winf_upper(&x, &y).unwrap(), 0.125);
}

fn measure_strategy(n: usize) -> impl Strategy<Value = EmpiricalMeasure> {
    prop::collection::vec(-2.0f64..2.0, n * 3).prop_map(|v| EmpiricalMeasure::new(3, v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_axioms(
        (a, b, c) in (2usize..12).prop_flat_map(|n| (measure_strategy(n), measure_strategy(n), measure_strategy(n))),
        p in prop::sample::select(vec![1.0, 2.0, 3.0]),
    ) {
        let ab = wasserstein_p(&a, &b, p).unwrap();
        prop_assert_eq!(ab, wasserstein_p(&b, &a, p).unwrap());
        prop_assert_eq!(wasserstein_p(&a, &a, p).unwrap(), 0.0);
        prop_assert!(ab > 0.0 || a.same_atoms(&b));
        let bc = wasserstein_p(&b, &c, p).unwrap();
        let ac = wasserstein_p(&a, &c, p).unwrap();
        prop_assert!(ac <= ab + bc + 1e-12);
    }

    #[test]
    fn order_monotonicity(
        (a, b) in (2usize..16).prop_flat_map(|n| (measure_strategy(n), measure_strategy(n))),
        p in 1.0f64..4.0,
        extra in 0.0f64..3.0,
    ) {
        let lo = wasserstein_p(&a, &b, p).unwrap();
        let hi = wasserstein_p(&a, &b, p + extra).unwrap();
        prop_assert!(lo <= hi * (1.0 + 1e-12), "{} > {}", lo, hi);
    }

    #[test]
    fn relabelled_atoms_give_equal_distance(
        (a, b) in (2usize..10).prop_flat_map(|n| (measure_strategy(n), measure_strategy(n))),
        shift in 1usize..9,
    ) {
        let n = b.len();
        let rotated = EmpiricalMeasure::new(3, (0..n).flat_map(|i| b.atom((i + shift) % n).to_vec()).collect()).unwrap();
        prop_assert_eq!(wasserstein_p(&a, &b, 2.0).unwrap(), wasserstein_p(&a, &rotated, 2.0).unwrap());
    }

    #[test]
    fn zero_distance_iff_equal_multisets(
        a in measure_strategy(6),
        swap in 0usize..6,
    ) {
        let n = a.len();
        let permuted = EmpiricalMeasure::new(3, (0..n).flat_map(|i| a.atom(if i == swap { 0 } else if i == 0 { swap } else { i }).to_vec()).collect()).unwrap();
        prop_assert_eq!(wasserstein_p(&a, &permuted, 1.0).unwrap(), 0.0);
        prop_assert!(a.same_atoms(&permuted));
    }
}
