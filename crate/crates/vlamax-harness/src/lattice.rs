//! Regular lattice on which fields are compared.
//!
//! The cube `[-r_bar, r_bar]^3` carries `3 N_lat + 1` points per axis, i.e.
//! spacing `2 r_bar / (3 N_lat)`. `N_lat` defaults to `ceil(N^(1/3))` so the
//! point count grows like `N`.

use serde::{Deserialize, Serialize};
use vlamax_kinematics::Vec3;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    /// Half width `r_bar`.
    pub bound: f64,
    pub n_lat: usize,
}

impl LatticeSpec {
    pub fn new(bound: f64, n_lat: usize) -> Result<Self> {
        if !(bound > 0.0 && bound.is_finite()) || n_lat == 0 {
            return Err(HarnessError::Config(format!("lattice needs bound > 0 and N_lat > 0, got {bound}, {n_lat}")));
        }
        Ok(Self { bound, n_lat })
    }

    /// Default `N_lat = ceil(N^(1/3))`.
    pub fn default_n_lat(n: usize) -> usize {
        let c = (n as f64).cbrt().round() as usize;
        if c * c * c >= n {
            c.max(1)
        } else {
            c + 1
        }
    }

    pub fn per_axis(&self) -> usize {
        3 * self.n_lat + 1
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.bound / (3 * self.n_lat) as f64
    }

    pub fn len(&self) -> usize {
        self.per_axis().pow(3)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -self.bound + i as f64 * self.spacing()
    }

    /// All points, `x` slowest.
    pub fn points(&self) -> Vec<Vec3> {
        let m = self.per_axis();
        let mut out = Vec::with_capacity(self.len());
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    out.push(Vec3::new(self.coordinate(i), self.coordinate(j), self.coordinate(k)));
                }
            }
        }
        out
    }

    /// Points of the plane `z = coordinate(k)`.
    pub fn plane(&self, k: usize) -> Vec<Vec3> {
        let m = self.per_axis();
        let z = self.coordinate(k.min(m - 1));
        (0..m).flat_map(|i| (0..m).map(move |j| (i, j))).map(|(i, j)| Vec3::new(self.coordinate(i), self.coordinate(j), z)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry() {
        let l = LatticeSpec::new(2.5, 2).unwrap();
        assert_eq!(l.per_axis(), 7);
        assert_eq!(l.len(), 343);
        let p = l.points();
        assert_eq!(p.len(), 343);
        assert_eq!(p[0], Vec3::new(-2.5, -2.5, -2.5));
        assert!((p[342] - Vec3::new(2.5, 2.5, 2.5)).norm() < 1e-12);
        assert_eq!(l.plane(3).len(), 49);
        assert!(l.plane(3).iter().all(|x| x.z.abs() < 1e-12));
        assert!(LatticeSpec::new(0.0, 2).is_err());
    }

    #[test]
    fn default_size() {
        assert_eq!(LatticeSpec::default_n_lat(1), 1);
        assert_eq!(LatticeSpec::default_n_lat(8), 2);
        assert_eq!(LatticeSpec::default_n_lat(9), 3);
        assert_eq!(LatticeSpec::default_n_lat(512), 8);
        assert_eq!(LatticeSpec::default_n_lat(513), 9);
    }
}
