use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::scalar::Scalar;

/// Per-cluster ellipsoidal norms `‖x‖²_{A_i} = xᵀ A_i x`.
///
/// The extreme eigenvalues over the whole family are computed once at
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct NormFamily<T> {
    matrices: Vec<SymMatrix<T>>,
    lambda_max: T,
    lambda_min: T,
    identity: bool,
}

impl<T: Scalar> NormFamily<T> {
    /// The Euclidean family `{E, …, E}`.
    pub fn identity(k: usize, dim: usize) -> Self {
        Self {
            matrices: vec![SymMatrix::identity(dim); k],
            lambda_max: T::one(),
            lambda_min: T::one(),
            identity: true,
        }
    }

    pub fn new(matrices: Vec<SymMatrix<T>>) -> Result<Self> {
        let dim = matrices
            .first()
            .map(SymMatrix::dim)
            .ok_or(Error::Parameter {
                name: "k",
                value: 0.0,
            })?;
        let mut lambda_max = T::neg_infinity();
        let mut lambda_min = T::infinity();
        let mut identity = true;
        for (i, m) in matrices.iter().enumerate() {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch {
                    what: "norm matrix",
                    index: i,
                    expected: dim,
                    found: m.dim(),
                });
            }
            let ev = m.eigenvalues();
            let lo = ev[0];
            let hi = ev[ev.len() - 1];
            if !(lo > T::zero()) {
                return Err(Error::NotPositiveDefinite {
                    index: i,
                    reason: format!("smallest eigenvalue {lo}"),
                });
            }
            lambda_max = lambda_max.max(hi);
            lambda_min = lambda_min.min(lo);
            identity &= *m == SymMatrix::identity(dim);
        }
        if identity {
            lambda_max = T::one();
            lambda_min = T::one();
        }
        Ok(Self {
            matrices,
            lambda_max,
            lambda_min,
            identity,
        })
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.matrices.len()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrices[0].dim()
    }

    #[inline]
    pub fn matrix(&self, i: usize) -> &SymMatrix<T> {
        &self.matrices[i]
    }

    pub fn matrices(&self) -> &[SymMatrix<T>] {
        &self.matrices
    }

    /// `λ⁺(A)`: the largest eigenvalue over all matrices.
    #[inline]
    pub fn lambda_max(&self) -> T {
        self.lambda_max
    }

    /// `λ⁻(A)`: the smallest eigenvalue over all matrices.
    #[inline]
    pub fn lambda_min(&self) -> T {
        self.lambda_min
    }

    /// `λ⁺/λ⁻`, the smallest admissible `δ` for the batching coreset.
    #[inline]
    pub fn condition(&self) -> T {
        self.lambda_max / self.lambda_min
    }

    #[inline]
    pub fn is_identity(&self) -> bool {
        self.identity
    }

    /// `‖a − b‖²_{A_i}`.
    #[inline]
    pub fn dist2(&self, i: usize, a: &[T], b: &[T]) -> T {
        if self.identity {
            crate::linalg::dist2(a, b)
        } else {
            self.matrices[i].dist2(a, b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_unit_extremes() {
        let a = NormFamily::<f64>::identity(3, 2);
        assert_eq!((a.lambda_min(), a.lambda_max()), (1.0, 1.0));
        let b = NormFamily::<f64>::new(vec![SymMatrix::identity(2); 2]).unwrap();
        assert!(b.is_identity());
    }

    #[test]
    fn extremes_over_family() {
        let a = NormFamily::new(vec![
            SymMatrix::diagonal(&[4.0, 1.0]),
            SymMatrix::diagonal(&[0.5, 2.0]),
        ])
        .unwrap();
        assert_eq!(a.lambda_max(), 4.0);
        assert_eq!(a.lambda_min(), 0.5);
        assert_eq!(a.condition(), 8.0);
    }

    #[test]
    fn indefinite_rejected() {
        let e = NormFamily::new(vec![
            SymMatrix::identity(2),
            SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap(),
        ])
        .unwrap_err();
        assert!(matches!(e, Error::NotPositiveDefinite { index: 1, .. }));
    }
}
