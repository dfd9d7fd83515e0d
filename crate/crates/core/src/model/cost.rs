use super::{Clustering, NormFamily, SiteSet, WeightedDataSet};
use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::scalar::Scalar;

fn check_dims<T: Scalar>(
    x: &WeightedDataSet<T>,
    c: &Clustering<T>,
    s: Option<&SiteSet<T>>,
    a: &NormFamily<T>,
) -> Result<()> {
    c.check_against(x)?;
    if a.k() != c.k() {
        return Err(Error::DimensionMismatch {
            what: "norm family size",
            index: 0,
            expected: c.k(),
            found: a.k(),
        });
    }
    if a.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            what: "norm matrix",
            index: 0,
            expected: x.dim(),
            found: a.dim(),
        });
    }
    if let Some(s) = s {
        if s.len() != c.k() {
            return Err(Error::DimensionMismatch {
                what: "site count",
                index: 0,
                expected: c.k(),
                found: s.len(),
            });
        }
        if s.dim() != x.dim() {
            return Err(Error::DimensionMismatch {
                what: "site",
                index: 0,
                expected: x.dim(),
                found: s.dim(),
            });
        }
    }
    Ok(())
}

/// `Σ_i Σ_j ξ_ij ω_j ‖x_j − s_i‖²_{A_i}`.
pub fn cost<T: Scalar>(
    x: &WeightedDataSet<T>,
    c: &Clustering<T>,
    s: &SiteSet<T>,
    a: &NormFamily<T>,
) -> Result<T> {
    check_dims(x, c, Some(s), a)?;
    let mut total = T::zero();
    for i in 0..c.k() {
        let si = s.site(i);
        for (j, &f) in c.row(i).iter().enumerate() {
            if f > T::zero() {
                total = total + f * x.weight(j) * a.dist2(i, x.point(j), si);
            }
        }
    }
    Ok(total)
}

/// Row-major `k×n` matrix of `‖x_j − s_i‖²_{A_i}`.
pub fn cost_matrix<T: Scalar>(
    x: &WeightedDataSet<T>,
    s: &SiteSet<T>,
    a: &NormFamily<T>,
) -> Result<Vec<T>> {
    let k = s.len();
    if a.k() != k {
        return Err(Error::DimensionMismatch {
            what: "norm family size",
            index: 0,
            expected: k,
            found: a.k(),
        });
    }
    if s.dim() != x.dim() || a.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            what: "site",
            index: 0,
            expected: x.dim(),
            found: s.dim(),
        });
    }
    let n = x.len();
    let mut out = Vec::with_capacity(k * n);
    for i in 0..k {
        let si = s.site(i);
        out.extend(x.points().map(|p| a.dist2(i, p, si)));
    }
    Ok(out)
}

/// `Σ_j ω_j ‖x_j − s‖²_A`.
pub fn site_distance_sum<T: Scalar>(x: &WeightedDataSet<T>, s: &[T], a: &SymMatrix<T>) -> T {
    x.points()
        .zip(x.weights())
        .map(|(p, &w)| w * a.dist2(p, s))
        .sum()
}

/// `(c_i, ω(C_i))`; a void cluster yields the zero vector and weight 0.
pub fn centroid_and_weight<T: Scalar>(
    x: &WeightedDataSet<T>,
    c: &Clustering<T>,
    i: usize,
) -> Result<(Vec<T>, T)> {
    if i >= c.k() {
        return Err(Error::ClusterIndex { index: i, k: c.k() });
    }
    c.check_against(x)?;
    let d = x.dim();
    let mut centre = vec![T::zero(); d];
    let mut w = T::zero();
    for (j, &f) in c.row(i).iter().enumerate() {
        if f > T::zero() {
            let m = f * x.weight(j);
            w = w + m;
            for (ca, &pa) in centre.iter_mut().zip(x.point(j)) {
                *ca = *ca + m * pa;
            }
        }
    }
    if w <= T::lit(1e-12) * x.total_weight() {
        return Ok((vec![T::zero(); d], T::zero()));
    }
    centre.iter_mut().for_each(|v| *v = *v / w);
    Ok((centre, w))
}

/// All cluster centroids, zero for void clusters.
pub fn centroids<T: Scalar>(x: &WeightedDataSet<T>, c: &Clustering<T>) -> Result<SiteSet<T>> {
    let mut flat = Vec::with_capacity(c.k() * x.dim());
    for i in 0..c.k() {
        flat.extend(centroid_and_weight(x, c, i)?.0);
    }
    SiteSet::from_flat(x.dim(), flat)
}

/// `V_A(X_0) = Σ ω_x ‖x − c_0‖²_A`.
pub fn variation<T: Scalar>(x0: &WeightedDataSet<T>, a: &SymMatrix<T>) -> Result<T> {
    if x0.is_empty() {
        return Err(Error::EmptyDataSet);
    }
    if a.dim() != x0.dim() {
        return Err(Error::DimensionMismatch {
            what: "norm matrix",
            index: 0,
            expected: x0.dim(),
            found: a.dim(),
        });
    }
    let c0 = x0.centroid();
    Ok(site_distance_sum(x0, &c0, a))
}

/// `V_E(X_0)`.
pub fn variation_euclidean<T: Scalar>(x0: &WeightedDataSet<T>) -> T {
    let c0 = x0.centroid();
    x0.points()
        .zip(x0.weights())
        .map(|(p, &w)| w * crate::linalg::dist2(p, &c0))
        .sum()
}

/// `cost_{A}(X, C)`: the cost with every site at its cluster centroid.
pub fn opt_site_cost<T: Scalar>(
    x: &WeightedDataSet<T>,
    c: &Clustering<T>,
    a: &NormFamily<T>,
) -> Result<T> {
    check_dims(x, c, None, a)?;
    let s = centroids(x, c)?;
    cost(x, c, &s, a)
}
