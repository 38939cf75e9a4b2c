//! Equal-weight empirical measures.

use crate::error::{Result, TransportError};

/// `n` atoms in `R^d` with weights `1/n`, stored row major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    dim: usize,
    atoms: Vec<f64>,
}

impl EmpiricalMeasure {
    /// Wraps `atoms.len() / dim` points stored row major.
    pub fn new(dim: usize, atoms: Vec<f64>) -> Result<Self> {
        if dim == 0 || atoms.is_empty() {
            return Err(TransportError::Empty);
        }
        if atoms.len() % dim != 0 {
            return Err(TransportError::InvalidParameter(format!("{} values do not split into rows of {dim}", atoms.len())));
        }
        if let Some(k) = atoms.iter().position(|a| !a.is_finite()) {
            return Err(TransportError::NonFinite { index: k / dim });
        }
        Ok(Self { dim, atoms })
    }

    pub fn from_points<const D: usize>(points: &[[f64; D]]) -> Result<Self> {
        Self::new(D, points.iter().flatten().copied().collect())
    }

    pub fn len(&self) -> usize {
        self.atoms.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atom(&self, i: usize) -> &[f64] {
        &self.atoms[i * self.dim..(i + 1) * self.dim]
    }

    pub fn atoms(&self) -> impl Iterator<Item = &[f64]> {
        self.atoms.chunks_exact(self.dim)
    }

    /// Each atom repeated `k` times, the same measure on `k n` atoms.
    pub fn replicate(&self, k: usize) -> Self {
        let mut atoms = Vec::with_capacity(self.atoms.len() * k);
        for a in self.atoms() {
            for _ in 0..k {
                atoms.extend_from_slice(a);
            }
        }
        Self { dim: self.dim, atoms }
    }

    /// Whether both measures have the same multiset of atoms.
    pub fn same_atoms(&self, other: &Self) -> bool {
        if self.dim != other.dim || self.len() != other.len() {
            return false;
        }
        fn sorted(m: &EmpiricalMeasure) -> Vec<&[f64]> {
            let mut v: Vec<&[f64]> = m.atoms().collect();
            v.sort_by(|a, b| a.iter().zip(b.iter()).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
            v
        }
        sorted(self) == sorted(other)
    }

    pub(crate) fn check_pair(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(TransportError::DimensionMismatch { left: self.dim, right: other.dim });
        }
        if self.len() != other.len() {
            return Err(TransportError::SizeMismatch { left: self.len(), right: other.len() });
        }
        Ok(())
    }
}

/// Euclidean distance of two rows.
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks() {
        assert!(EmpiricalMeasure::new(3, vec![]).is_err());
        assert!(EmpiricalMeasure::new(2, vec![1.0, 2.0, 3.0]).is_err());
        assert_eq!(EmpiricalMeasure::new(1, vec![0.0, f64::NAN]), Err(TransportError::NonFinite { index: 1 }));
        let m = EmpiricalMeasure::from_points(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.atom(1), &[3.0, 4.0]);
        assert_eq!(m.replicate(3).len(), 6);
    }

    #[test]
    fn multiset_comparison_ignores_order() {
        let a = EmpiricalMeasure::from_points(&[[1.0], [2.0], [2.0]]).unwrap();
        let b = EmpiricalMeasure::from_points(&[[2.0], [1.0], [2.0]]).unwrap();
        let c = EmpiricalMeasure::from_points(&[[2.0], [1.0], [1.0]]).unwrap();
        assert!(a.same_atoms(&b));
        assert!(!a.same_atoms(&c));
    }
}
