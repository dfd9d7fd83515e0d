//! Small dense symmetric matrices and the handful of vector helpers the crate needs.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Squared Euclidean distance.
#[inline]
pub fn dist2<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| {
        let d = x - y;
        acc + d * d
    })
}

/// A symmetric `d x d` matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> SymMatrix<T> {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![T::zero(); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = T::one();
        }
        Self { dim, data }
    }

    pub fn diagonal(diag: &[T]) -> Self {
        let dim = diag.len();
        let mut m = Self::identity(dim);
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * dim + i] = v;
        }
        m
    }

    /// Builds from rows, symmetrizing `(M + M^T) / 2`.
    ///
    /// Rejects matrices whose asymmetry exceeds `1e-12` relative to their largest entry.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    what: "matrix row",
                    index: r,
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        let scale = data
            .iter()
            .fold(T::zero(), |m, v| m.max(v.abs()))
            .max(T::one());
        let two = T::lit(2.0);
        let mut sym = data.clone();
        for i in 0..dim {
            for j in 0..dim {
                let a = data[i * dim + j];
                let b = data[j * dim + i];
                if !a.is_finite() {
                    return Err(Error::NotPositiveDefinite {
                        index: 0,
                        reason: format!("entry ({i}, {j}) is not finite"),
                    });
                }
                if (a - b).abs() > T::tol(1e-12) * scale {
                    return Err(Error::NotPositiveDefinite {
                        index: 0,
                        reason: format!("asymmetric entry ({i}, {j})"),
                    });
                }
                sym[i * dim + j] = (a + b) / two;
            }
        }
        Ok(Self { dim, data: sym })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.data
            .chunks(self.dim.max(1))
            .map(|r| r.to_vec())
            .collect()
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&v| v * factor).collect(),
        }
    }

    /// `v^T M v`.
    #[inline]
    pub fn quad_form(&self, v: &[T]) -> T {
        let d = self.dim;
        let mut acc = T::zero();
        for i in 0..d {
            let row = &self.data[i * d..(i + 1) * d];
            acc = acc + v[i] * dot(row, v);
        }
        acc
    }

    /// `(a - b)^T M (a - b)`, the squared ellipsoidal distance.
    #[inline]
    pub fn dist2(&self, a: &[T], b: &[T]) -> T {
        let d = self.dim;
        let mut acc = T::zero();
        for i in 0..d {
            let di = a[i] - b[i];
            let mut row = T::zero();
            for j in 0..d {
                row = row + self.data[i * d + j] * (a[j] - b[j]);
            }
            acc = acc + di * row;
        }
        acc
    }

    /// `M v`.
    pub fn apply(&self, v: &[T]) -> Vec<T> {
        let d = self.dim;
        (0..d)
            .map(|i| dot(&self.data[i * d..(i + 1) * d], v))
            .collect()
    }

    /// All eigenvalues in ascending order, by cyclic Jacobi rotations.
    pub fn eigenvalues(&self) -> Vec<T> {
        let n = self.dim;
        let mut a = self.data.clone();
        let two = T::lit(2.0);
        for _sweep in 0..100 {
            let mut off = T::zero();
            let mut diag = T::zero();
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        off = off + a[i * n + j] * a[i * n + j];
                    } else {
                        diag = diag + a[i * n + i] * a[i * n + i];
                    }
                }
            }
            if off <= T::epsilon() * T::epsilon() * diag.max(T::min_positive_value()) {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq == T::zero() {
                        continue;
                    }
                    let app = a[p * n + p];
                    let aqq = a[q * n + q];
                    let theta = (aqq - app) / (two * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut ev: Vec<T> = (0..n).map(|i| a[i * n + i]).collect();
        ev.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
        ev
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eigenvalues_of_diagonal() {
        let m = SymMatrix::diagonal(&[4.0, 1.0, 9.0]);
        assert_eq!(m.eigenvalues(), vec![1.0, 4.0, 9.0]);
    }

    #[test]
    fn eigenvalues_of_2x2() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3.
        let m = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let ev = m.eigenvalues();
        assert_relative_eq!(ev[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(ev[1], 3.0, epsilon = 1e-14);
    }

    #[test]
    fn eigenvalues_match_trace_and_determinant() {
        let m = SymMatrix::from_rows(&[
            vec![3.0, 0.5, -0.2],
            vec![0.5, 2.0, 0.3],
            vec![-0.2, 0.3, 1.5],
        ])
        .unwrap();
        let ev = m.eigenvalues();
        let trace = 3.0 + 2.0 + 1.5;
        assert_relative_eq!(ev.iter().sum::<f64>(), trace, epsilon = 1e-12);
        let det = 3.0 * (2.0 * 1.5 - 0.09) - 0.5 * (0.5 * 1.5 + 0.06) + (-0.2) * (0.15 + 0.4);
        assert_relative_eq!(ev.iter().product::<f64>(), det, epsilon = 1e-12);
    }

    #[test]
    fn asymmetric_rejected() {
        assert!(SymMatrix::from_rows(&[vec![1.0, 0.5], vec![0.4, 1.0]]).is_err());
    }

    #[test]
    fn quadratic_form_matches_dist() {
        let m = SymMatrix::diagonal(&[4.0, 1.0]);
        assert_eq!(m.quad_form(&[1.0, 0.0]), 4.0);
        assert_eq!(m.dist2(&[1.0, 2.0], &[0.0, 2.0]), 4.0);
    }
}
