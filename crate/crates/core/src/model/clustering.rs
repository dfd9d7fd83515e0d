use super::{WeightBounds, WeightedDataSet};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const COLUMN_TOL: f64 = 1e-9;
const VOID_REL: f64 = 1e-12;

/// Fractional assignment `ξ ∈ R^{k×n}`, stored row-major.
///
/// Columns are validated to sum to one at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering<T> {
    k: usize,
    n: usize,
    xi: Vec<T>,
}

impl<T: Scalar> Clustering<T> {
    pub fn new(k: usize, n: usize, xi: Vec<T>) -> Result<Self> {
        if k == 0 {
            return Err(Error::Parameter {
                name: "k",
                value: 0.0,
            });
        }
        if xi.len() != k * n {
            return Err(Error::DimensionMismatch {
                what: "assignment matrix",
                index: 0,
                expected: k * n,
                found: xi.len(),
            });
        }
        for (idx, &v) in xi.iter().enumerate() {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::NegativeAssignment {
                    cluster: idx / n,
                    point: idx % n,
                    value: v.as_f64(),
                });
            }
        }
        let c = Self { k, n, xi };
        for j in 0..n {
            let s = c.column_sum(j);
            if (s - T::one()).abs() > T::tol(COLUMN_TOL) {
                return Err(Error::ColumnSum {
                    point: j,
                    sum: s.as_f64(),
                });
            }
        }
        Ok(c)
    }

    /// Integral clustering from labels `labels[j] ∈ [k]`.
    pub fn from_labels(k: usize, labels: &[usize]) -> Result<Self> {
        let n = labels.len();
        let mut xi = vec![T::zero(); k * n];
        for (j, &l) in labels.iter().enumerate() {
            if l >= k {
                return Err(Error::ClusterIndex { index: l, k });
            }
            xi[l * n + j] = T::one();
        }
        Self::new(k, n, xi)
    }

    /// Builds from raw fractions: entries below `1e-9` are dropped and
    /// each column is rescaled to sum to one.
    pub fn from_truncated(k: usize, n: usize, mut xi: Vec<T>) -> Result<Self> {
        let cut = T::lit(COLUMN_TOL);
        for j in 0..n {
            let mut s = T::zero();
            for i in 0..k {
                let v = &mut xi[i * n + j];
                if *v < cut {
                    *v = T::zero();
                }
                s = s + *v;
            }
            if s > T::zero() {
                for i in 0..k {
                    xi[i * n + j] = xi[i * n + j] / s;
                }
            }
        }
        Self::new(k, n, xi)
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.xi[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.xi[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.xi
    }

    pub fn column_sum(&self, j: usize) -> T {
        (0..self.k).map(|i| self.get(i, j)).sum()
    }

    /// `ω(C_i)` for every cluster.
    pub fn cluster_weights(&self, x: &WeightedDataSet<T>) -> Vec<T> {
        (0..self.k)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x.weights())
                    .map(|(&a, &w)| a * w)
                    .sum()
            })
            .collect()
    }

    /// `supp(C_i)`: points with a positive fraction in cluster `i`.
    pub fn support(&self, i: usize) -> Vec<usize> {
        self.row(i)
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > T::zero())
            .map(|(j, _)| j)
            .collect()
    }

    pub fn is_void(&self, i: usize, x: &WeightedDataSet<T>) -> bool {
        self.cluster_weights(x)[i] <= T::lit(VOID_REL) * x.total_weight()
    }

    pub fn is_integral(&self, tol: T) -> bool {
        self.xi
            .iter()
            .all(|&v| v <= tol || (v - T::one()).abs() <= tol)
    }

    /// Cluster with the largest fraction of point `j`, lowest index on ties.
    pub fn dominant(&self, j: usize) -> usize {
        let mut best = 0;
        for i in 1..self.k {
            if self.get(i, j) > self.get(best, j) {
                best = i;
            }
        }
        best
    }

    /// Whether every cluster weight lies in its window, within `rel·ω(X)`.
    pub fn satisfies(&self, bounds: &WeightBounds<T>, x: &WeightedDataSet<T>, rel: T) -> bool {
        let tol = rel * x.total_weight().max(T::one());
        bounds.k() == self.k
            && self
                .cluster_weights(x)
                .iter()
                .enumerate()
                .all(|(i, &w)| bounds.admits(i, w, tol))
    }

    pub(crate) fn check_against(&self, x: &WeightedDataSet<T>) -> Result<()> {
        if self.n != x.len() {
            return Err(Error::DimensionMismatch {
                what: "clustering columns",
                index: 0,
                expected: x.len(),
                found: self.n,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_sum_enforced() {
        let e = Clustering::new(2, 2, vec![0.5, 1.0, 0.4, 0.0]).unwrap_err();
        assert!(matches!(e, Error::ColumnSum { point: 0, .. }));
        assert!(Clustering::new(2, 1, vec![0.5, 0.5 + 5e-10]).is_ok());
    }

    #[test]
    fn negative_rejected() {
        let e = Clustering::new(2, 1, vec![1.5, -0.5]).unwrap_err();
        assert!(matches!(
            e,
            Error::NegativeAssignment {
                cluster: 1,
                point: 0,
                ..
            }
        ));
    }

    #[test]
    fn void_and_support() {
        let x = WeightedDataSet::unweighted(&[vec![0.0], vec![1.0]]).unwrap();
        let c = Clustering::<f64>::from_labels(3, &[0, 2]).unwrap();
        assert!(c.is_void(1, &x));
        assert!(!c.is_void(2, &x));
        assert_eq!(c.support(2), vec![1]);
        assert!(c.is_integral(0.0));
    }

    #[test]
    fn truncation_renormalizes() {
        let c = Clustering::from_truncated(2, 1, vec![1.0 - 1e-12, 1e-12]).unwrap();
        assert_eq!(c.get(0, 0), 1.0);
        assert_eq!(c.get(1, 0), 0.0);
    }
}
