use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Cluster weight windows `κ_i⁻ ≤ ω(C_i) ≤ κ_i⁺`; upper bounds may be `+∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightBounds<T> {
    lower: Vec<T>,
    upper: Vec<T>,
}

impl<T: Scalar> WeightBounds<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::DimensionMismatch {
                what: "upper bounds",
                index: 0,
                expected: lower.len(),
                found: upper.len(),
            });
        }
        for (i, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            let ok = lo.is_finite() && lo >= T::zero() && !hi.is_nan() && lo <= hi;
            if !ok {
                return Err(Error::BadBounds {
                    cluster: i,
                    lower: lo.as_f64(),
                    upper: hi.as_f64(),
                });
            }
        }
        Ok(Self { lower, upper })
    }

    /// `K_∞`: no constraints.
    pub fn unconstrained(k: usize) -> Self {
        Self {
            lower: vec![T::zero(); k],
            upper: vec![T::infinity(); k],
        }
    }

    /// `κ_i± = (1 ± slack)·total/k`.
    pub fn balanced(k: usize, total: T, slack: T) -> Self {
        let share = total / T::of_usize(k);
        let lo = (share * (T::one() - slack)).max(T::zero());
        let hi = share * (T::one() + slack);
        Self {
            lower: vec![lo; k],
            upper: vec![hi; k],
        }
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    /// Errors unless `Σκ⁻ ≤ total ≤ Σκ⁺` (with a relative tolerance of 1e-12).
    pub fn check_feasible(&self, total: T) -> Result<()> {
        let lo: T = self.lower.iter().copied().sum();
        let hi: T = self.upper.iter().copied().sum();
        let tol = T::tol(1e-12) * total.max(T::one());
        if lo > total + tol || hi < total - tol {
            return Err(Error::InfeasibleBounds {
                sum_lower: lo.as_f64(),
                total: total.as_f64(),
                sum_upper: hi.as_f64(),
            });
        }
        Ok(())
    }

    /// True when no cluster can ever hit a bound, so the problem is nearest-site.
    pub fn is_trivial(&self, total: T) -> bool {
        self.lower.iter().all(|l| *l <= T::zero()) && self.upper.iter().all(|u| *u >= total)
    }

    /// Whether `w` lies in cluster `i`'s window, with absolute slack `tol`.
    pub fn admits(&self, i: usize, w: T, tol: T) -> bool {
        w >= self.lower[i] - tol && w <= self.upper[i] + tol
    }
}
