//! Exact linear assignment by shortest augmenting paths.
//!
//! Rows are inserted one at a time; each insertion runs a Dijkstra search
//! on reduced costs `c_ij - u_i - v_j` and augments along the shortest
//! path. The potentials stay dual feasible throughout, so on return they
//! certify optimality: `u_i + v_j <= c_ij` for all pairs with equality on
//! the assignment. Worst case `O(n^3)`.

use crate::error::{Result, TransportError};

const NONE: usize = usize::MAX;

/// An optimal assignment of rows to columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// Column assigned to each row.
    pub col_for_row: Vec<usize>,
    /// Total cost, the matched entries summed in ascending order so that the
    /// value does not depend on how rows and columns are labelled.
    pub cost: f64,
    /// Row potentials.
    pub u: Vec<f64>,
    /// Column potentials.
    pub v: Vec<f64>,
}

impl Assignment {
    /// The dual objective `sum u + sum v`, a lower bound on every assignment cost.
    pub fn dual_value(&self) -> f64 {
        self.u.iter().sum::<f64>() + self.v.iter().sum::<f64>()
    }
}

/// Minimum-cost perfect matching for the dense `n x n` matrix `cost` (row major).
pub fn solve_assignment(n: usize, cost: &[f64]) -> Result<Assignment> {
    if cost.len() != n * n {
        return Err(TransportError::InvalidParameter(format!("{} entries for a {n} x {n} matrix", cost.len())));
    }
    if let Some(k) = cost.iter().position(|c| !c.is_finite()) {
        return Err(TransportError::NonFinite { index: k / n.max(1) });
    }
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut col_for_row = vec![NONE; n];
    let mut row_for_col = vec![NONE; n];
    let mut path = vec![NONE; n];
    let mut dist = vec![f64::INFINITY; n];
    let mut remaining: Vec<usize> = Vec::with_capacity(n);
    let mut seen_rows = vec![false; n];
    let mut seen_cols = vec![false; n];

    for start in 0..n {
        dist.fill(f64::INFINITY);
        seen_rows.fill(false);
        seen_cols.fill(false);
        remaining.clear();
        remaining.extend((0..n).rev());
        let mut min_val = 0.0;
        let mut i = start;
        let sink = loop {
            seen_rows[i] = true;
            let row = &cost[i * n..(i + 1) * n];
            let ui = u[i];
            let mut best = NONE;
            let mut lowest = f64::INFINITY;
            for (slot, &j) in remaining.iter().enumerate() {
                let r = min_val + row[j] - ui - v[j];
                if r < dist[j] {
                    path[j] = i;
                    dist[j] = r;
                }
                if dist[j] < lowest || (dist[j] == lowest && row_for_col[j] == NONE) {
                    lowest = dist[j];
                    best = slot;
                }
            }
            if best == NONE || !lowest.is_finite() {
                return Err(TransportError::Infeasible);
            }
            min_val = lowest;
            let j = remaining.swap_remove(best);
            seen_cols[j] = true;
            if row_for_col[j] == NONE {
                break j;
            }
            i = row_for_col[j];
        };

        u[start] += min_val;
        for r in 0..n {
            if seen_rows[r] && r != start {
                u[r] += min_val - dist[col_for_row[r]];
            }
        }
        for c in 0..n {
            if seen_cols[c] {
                v[c] -= min_val - dist[c];
            }
        }

        let mut j = sink;
        loop {
            let r = path[j];
            row_for_col[j] = r;
            std::mem::swap(&mut col_for_row[r], &mut j);
            if r == start {
                break;
            }
        }
    }

    let cost_sum = matched_cost((0..n).map(|i| cost[i * n + col_for_row[i]]));
    Ok(Assignment { col_for_row, cost: cost_sum, u, v })
}

/// Sum of matched entries in ascending order.
pub fn matched_cost(entries: impl IntoIterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = entries.into_iter().collect();
    v.sort_by(f64::total_cmp);
    v.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_known_instance() {
        #[rustfmt::skip]
        let c = [
            4.0, 1.0, 3.0,
            2.0, 0.0, 5.0,
            3.0, 2.0, 2.0,
        ];
        let a = solve_assignment(3, &c).unwrap();
        assert_eq!(a.cost, 5.0);
        assert_eq!(a.col_for_row, vec![1, 0, 2]);
        assert!((a.dual_value() - a.cost).abs() < 1e-12);
    }

    #[test]
    fn empty_and_malformed() {
        let a = solve_assignment(0, &[]).unwrap();
        assert_eq!(a.cost, 0.0);
        assert!(solve_assignment(2, &[1.0]).is_err());
        assert!(solve_assignment(1, &[f64::NAN]).is_err());
    }

    #[test]
    fn potentials_are_dual_feasible() {
        let n = 9;
        let c: Vec<f64> = (0..n * n).map(|k| ((k * 7919) % 101) as f64 / 7.0).collect();
        let a = solve_assignment(n, &c).unwrap();
        for i in 0..n {
            for j in 0..n {
                assert!(a.u[i] + a.v[j] <= c[i * n + j] + 1e-9);
            }
            assert!((a.u[i] + a.v[a.col_for_row[i]] - c[i * n + a.col_for_row[i]]).abs() < 1e-9);
        }
    }
}
