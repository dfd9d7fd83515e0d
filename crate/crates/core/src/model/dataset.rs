use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Points in `R^d` with strictly positive weights.
///
/// Duplicate points are allowed and stay distinct entities.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDataSet<T> {
    dim: usize,
    coords: Vec<T>,
    weights: Vec<T>,
    total: T,
}

impl<T: Scalar> WeightedDataSet<T> {
    pub fn new(points: &[Vec<T>], weights: Vec<T>) -> Result<Self> {
        let dim = points.first().map(Vec::len).ok_or(Error::EmptyDataSet)?;
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (j, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    what: "point",
                    index: j,
                    expected: dim,
                    found: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(dim, coords, weights)
    }

    /// Unit weights.
    pub fn unweighted(points: &[Vec<T>]) -> Result<Self> {
        Self::new(points, vec![T::one(); points.len()])
    }

    /// Row-major coordinates, `coords.len() == dim * weights.len()`.
    pub fn from_flat(dim: usize, coords: Vec<T>, weights: Vec<T>) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::EmptyDataSet);
        }
        if dim == 0 || coords.len() != n * dim {
            return Err(Error::DimensionMismatch {
                what: "coordinate buffer",
                index: 0,
                expected: n * dim.max(1),
                found: coords.len(),
            });
        }
        for (j, w) in weights.iter().enumerate() {
            if !(w.is_finite() && *w > T::zero()) {
                return Err(Error::BadWeight {
                    index: j,
                    value: w.as_f64(),
                });
            }
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite {
                index: pos / dim,
                coord: pos % dim,
            });
        }
        let total = weights.iter().copied().sum();
        Ok(Self {
            dim,
            coords,
            weights,
            total,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, j: usize) -> &[T] {
        &self.coords[j * self.dim..(j + 1) * self.dim]
    }

    #[inline]
    pub fn weight(&self, j: usize) -> T {
        self.weights[j]
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn points(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.coords.chunks(self.dim)
    }

    /// `ω(X)`.
    #[inline]
    pub fn total_weight(&self) -> T {
        self.total
    }

    /// Weighted mean of all points.
    pub fn centroid(&self) -> Vec<T> {
        let mut c = vec![T::zero(); self.dim];
        for (p, &w) in self.points().zip(&self.weights) {
            for (ci, &x) in c.iter_mut().zip(p) {
                *ci = *ci + w * x;
            }
        }
        c.iter_mut().for_each(|v| *v = *v / self.total);
        c
    }

    /// Coordinate-wise `(min, max)`.
    pub fn bounding_box(&self) -> (Vec<T>, Vec<T>) {
        let mut lo = vec![T::infinity(); self.dim];
        let mut hi = vec![T::neg_infinity(); self.dim];
        for p in self.points() {
            for a in 0..self.dim {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        (lo, hi)
    }

    /// Same points, new weights.
    pub fn with_weights(&self, weights: Vec<T>) -> Result<Self> {
        Self::from_flat(self.dim, self.coords.clone(), weights)
    }

    /// The sub-multiset with indices `idx`, keeping weights.
    pub fn subset(&self, idx: &[usize]) -> Result<Self> {
        let mut coords = Vec::with_capacity(idx.len() * self.dim);
        let mut weights = Vec::with_capacity(idx.len());
        for &j in idx {
            coords.extend_from_slice(self.point(j));
            weights.push(self.weights[j]);
        }
        Self::from_flat(self.dim, coords, weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonpositive_weight() {
        let e = WeightedDataSet::new(&[vec![0.0], vec![1.0]], vec![1.0, 0.0]).unwrap_err();
        assert_eq!(
            e,
            Error::BadWeight {
                index: 1,
                value: 0.0
            }
        );
    }

    #[test]
    fn rejects_ragged_points() {
        let e = WeightedDataSet::unweighted(&[vec![0.0, 1.0], vec![1.0]]).unwrap_err();
        assert!(matches!(e, Error::DimensionMismatch { index: 1, .. }));
    }

    #[test]
    fn rejects_empty() {
        assert_eq!(
            WeightedDataSet::<f64>::unweighted(&[]).unwrap_err(),
            Error::EmptyDataSet
        );
    }

    #[test]
    fn total_weight_is_cached_sum() {
        let x =
            WeightedDataSet::new(&[vec![0.0], vec![1.0], vec![2.0]], vec![0.5, 1.5, 2.0]).unwrap();
        let recomputed: f64 = x.weights().iter().sum();
        assert!((x.total_weight() - recomputed).abs() <= 1e-12 * recomputed);
        assert_eq!(x.centroid(), vec![(1.5 + 4.0) / 4.0]);
    }
}
