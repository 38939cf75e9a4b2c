//! Wasserstein distances and pairing bounds.

use rayon::prelude::*;

use crate::assignment::{solve_assignment, Assignment};
use crate::error::{Result, TransportError};
use crate::measure::{euclidean, EmpiricalMeasure};

fn check_order(p: f64) -> Result<()> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(TransportError::InvalidOrder(p))
    }
}

/// `|a - b|^p`, exact for `p = 2`.
fn ground_cost(a: &[f64], b: &[f64], p: f64) -> f64 {
    if p == 2.0 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
    } else if p == 1.0 {
        euclidean(a, b)
    } else {
        euclidean(a, b).powf(p)
    }
}

/// Dense cost matrix `|x_i - y_j|^p`, row major.
pub fn cost_matrix(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, p: f64) -> Result<Vec<f64>> {
    mu.check_pair(nu)?;
    check_order(p)?;
    let n = mu.len();
    let mut c = vec![0.0; n * n];
    c.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let a = mu.atom(i);
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = ground_cost(a, nu.atom(j), p);
        }
    });
    Ok(c)
}

/// Optimal coupling of `mu` and `nu` for the cost `|x - y|^p`.
pub fn optimal_assignment(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, p: f64) -> Result<Assignment> {
    let c = cost_matrix(mu, nu, p)?;
    solve_assignment(mu.len(), &c)
}

/// `W_p(mu, nu) = (min_sigma (1/n) sum |x_i - y_sigma(i)|^p)^(1/p)`, exactly.
pub fn wasserstein_p(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, p: f64) -> Result<f64> {
    let a = optimal_assignment(mu, nu, p)?;
    Ok(from_cost(a.cost, mu.len(), p))
}

pub(crate) fn from_cost(cost: f64, n: usize, p: f64) -> f64 {
    let mean = (cost / n as f64).max(0.0);
    if p == 1.0 {
        mean
    } else {
        mean.powf(1.0 / p)
    }
}

/// `max_i |x_i - y_i|`, the identity-pairing bound on `W_infinity` and so on every `W_p`.
pub fn winf_upper(x: &EmpiricalMeasure, y: &EmpiricalMeasure) -> Result<f64> {
    x.check_pair(y)?;
    Ok(x.atoms().zip(y.atoms()).map(|(a, b)| euclidean(a, b)).fold(0.0, f64::max))
}

/// `W_p` of the greedy nearest-neighbour pairing, an upper bound in `O(n^2)`.
pub fn greedy_upper_bound(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, p: f64) -> Result<f64> {
    mu.check_pair(nu)?;
    check_order(p)?;
    let n = mu.len();
    let mut free = vec![true; n];
    let mut cost = 0.0;
    for a in mu.atoms() {
        let (j, c) = (0..n)
            .filter(|&j| free[j])
            .map(|j| (j, ground_cost(a, nu.atom(j), p)))
            .fold((usize::MAX, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
        free[j] = false;
        cost += c;
    }
    Ok(from_cost(cost, n, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(points: &[[f64; 1]]) -> EmpiricalMeasure {
        EmpiricalMeasure::from_points(points).unwrap()
    }

    #[test]
    fn worked_examples() {
        let x = m(&[[0.0], [1.0]]);
        let y = m(&[[0.0], [10.0]]);
        assert_eq!(wasserstein_p(&x, &y, 1.0).unwrap(), 4.5);
        assert_eq!(wasserstein_p(&x, &x, 2.0).unwrap(), 0.0);
        for p in [1.0, 2.0, 3.5] {
            let d = wasserstein_p(&m(&[[2.0]]), &m(&[[-1.0]]), p).unwrap();
            assert!((d - 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn pairing_bound_examples() {
        let x = EmpiricalMeasure::from_points(&[[0.0, 0.0], [1.0, 1.0]]).unwrap();
        assert_eq!(winf_upper(&x, &x).unwrap(), 0.0);
        let y = EmpiricalMeasure::from_points(&[[0.0, 0.0], [1.0, 1.25]]).unwrap();
        assert_eq!(winf_upper(&x, &y).unwrap(), 0.25);
    }

    #[test]
    fn invalid_inputs() {
        let x = m(&[[0.0], [1.0]]);
        assert!(wasserstein_p(&x, &m(&[[0.0]]), 1.0).is_err());
        assert!(wasserstein_p(&x, &x, 0.5).is_err());
        assert!(wasserstein_p(&x, &x, f64::INFINITY).is_err());
        let z = EmpiricalMeasure::from_points(&[[0.0, 0.0], [1.0, 1.0]]).unwrap();
        assert!(winf_upper(&x, &z).is_err());
    }

    #[test]
    fn greedy_bounds_exact() {
        let x = m(&[[0.0], [1.0], [2.5]]);
        let y = m(&[[0.9], [2.0], [-0.5]]);
        assert!(greedy_upper_bound(&x, &y, 1.0).unwrap() >= wasserstein_p(&x, &y, 1.0).unwrap());
    }
}
