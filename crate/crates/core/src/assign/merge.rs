use crate::error::{Error, Result};
use crate::linalg::dist2;
use crate::model::{Clustering, WeightedDataSet};
use crate::scalar::Scalar;

const CONSERVE_REL: f64 = 1e-12;

/// A surjection `p : [n] → [ñ]` merging points into compressed points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergingFunction {
    map: Vec<usize>,
    target: usize,
}

impl MergingFunction {
    pub fn new(map: Vec<usize>, target: usize) -> Result<Self> {
        let mut hit = vec![false; target];
        for (j, &t) in map.iter().enumerate() {
            if t >= target {
                return Err(Error::BadMerge(format!(
                    "point {j} maps to {t}, but only {target} targets exist"
                )));
            }
            hit[t] = true;
        }
        if let Some(t) = hit.iter().position(|h| !h) {
            return Err(Error::BadMerge(format!("target {t} has an empty preimage")));
        }
        Ok(Self { map, target })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
            target: n,
        }
    }

    #[inline]
    pub fn apply(&self, j: usize) -> usize {
        self.map[j]
    }

    pub fn source_len(&self) -> usize {
        self.map.len()
    }

    pub fn target_len(&self) -> usize {
        self.target
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    /// `p⁻¹(ĵ)` for every target.
    pub fn preimages(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.target];
        for (j, &t) in self.map.iter().enumerate() {
            out[t].push(j);
        }
        out
    }

    /// Merged weights `ω̃_ĵ = Σ_{p(j)=ĵ} ω_j`.
    pub fn merged_weights<T: Scalar>(&self, weights: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.target];
        for (&t, &w) in self.map.iter().zip(weights) {
            out[t] = out[t] + w;
        }
        out
    }

    /// Errors unless `ω̃` matches the merged weights of `ω`.
    pub fn check_weights<T: Scalar>(&self, weights: &[T], merged: &[T]) -> Result<()> {
        if weights.len() != self.map.len() || merged.len() != self.target {
            return Err(Error::BadMerge(format!(
                "merging function is {} → {}, data sets have {} and {} points",
                self.map.len(),
                self.target,
                weights.len(),
                merged.len()
            )));
        }
        for (t, (&want, got)) in self.merged_weights(weights).iter().zip(merged).enumerate() {
            if (want - *got).abs() > T::tol(CONSERVE_REL) * want.abs().max(got.abs()) {
                return Err(Error::BadMerge(format!(
                    "weight of target {t} is {got}, preimage weight is {want}"
                )));
            }
        }
        Ok(())
    }
}

/// `p(C)`: `ξ̃_iĵ = Σ_{p(j)=ĵ} ξ_ij ω_j / ω̃_ĵ`.
pub fn push_forward<T: Scalar>(
    p: &MergingFunction,
    weights: &[T],
    merged: &[T],
    c: &Clustering<T>,
) -> Result<Clustering<T>> {
    p.check_weights(weights, merged)?;
    MergePlan::from_merging(p, weights, merged)?.push_forward(c)
}

/// `f(C̃)`: `ξ_ij = ξ̃_{i p(j)}`.
pub fn extend<T: Scalar>(p: &MergingFunction, c: &Clustering<T>) -> Result<Clustering<T>> {
    if c.n() != p.target_len() {
        return Err(Error::BadMerge(format!(
            "clustering has {} columns, merging function has {} targets",
            c.n(),
            p.target_len()
        )));
    }
    let n = p.source_len();
    let mut xi = Vec::with_capacity(c.k() * n);
    for i in 0..c.k() {
        let row = c.row(i);
        xi.extend(p.as_slice().iter().map(|&t| row[t]));
    }
    Clustering::new(c.k(), n, xi)
}

/// A weighted transport of mass from `n` source points to `m` target points:
/// `W ≥ 0` with row sums `ω_j` and column sums `ω̃_ĵ`.
///
/// A merging function is the special case of one entry per row. Splitting a
/// point between two batches needs two.
#[derive(Debug, Clone, PartialEq)]
pub struct MergePlan<T> {
    source_weights: Vec<T>,
    target_weights: Vec<T>,
    /// `(source, target, mass)`, sorted by source then target.
    entries: Vec<(usize, usize, T)>,
    row_start: Vec<usize>,
}

impl<T: Scalar> MergePlan<T> {
    pub fn new(
        source_weights: Vec<T>,
        target_weights: Vec<T>,
        mut entries: Vec<(usize, usize, T)>,
    ) -> Result<Self> {
        let (n, m) = (source_weights.len(), target_weights.len());
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut rows = vec![T::zero(); n];
        let mut cols = vec![T::zero(); m];
        for &(j, t, w) in &entries {
            if j >= n || t >= m {
                return Err(Error::BadMerge(format!("entry ({j}, {t}) out of range")));
            }
            if !(w > T::zero()) || !w.is_finite() {
                return Err(Error::BadMerge(format!("entry ({j}, {t}) has mass {w}")));
            }
            rows[j] = rows[j] + w;
            cols[t] = cols[t] + w;
        }
        let scale = source_weights.iter().copied().sum::<T>();
        let tol = T::tol(1e-10) * scale;
        for (j, (&r, &w)) in rows.iter().zip(&source_weights).enumerate() {
            if (r - w).abs() > tol {
                return Err(Error::BadMerge(format!(
                    "source {j} sends {r} but weighs {w}"
                )));
            }
        }
        for (t, (&c, &w)) in cols.iter().zip(&target_weights).enumerate() {
            if c == T::zero() || (c - w).abs() > tol {
                return Err(Error::BadMerge(format!(
                    "target {t} receives {c} but weighs {w}"
                )));
            }
        }
        let mut row_start = vec![0; n + 1];
        for &(j, _, _) in &entries {
            row_start[j + 1] += 1;
        }
        for j in 0..n {
            row_start[j + 1] += row_start[j];
        }
        Ok(Self {
            source_weights,
            target_weights,
            entries,
            row_start,
        })
    }

    pub fn identity(weights: &[T]) -> Self {
        let entries: Vec<_> = weights
            .iter()
            .enumerate()
            .map(|(j, &w)| (j, j, w))
            .collect();
        Self {
            source_weights: weights.to_vec(),
            target_weights: weights.to_vec(),
            row_start: (0..=weights.len()).collect(),
            entries,
        }
    }

    pub fn from_merging(p: &MergingFunction, weights: &[T], merged: &[T]) -> Result<Self> {
        p.check_weights(weights, merged)?;
        let entries = p
            .as_slice()
            .iter()
            .zip(weights)
            .enumerate()
            .map(|(j, (&t, &w))| (j, t, w))
            .collect();
        Self::new(weights.to_vec(), merged.to_vec(), entries)
    }

    pub fn source_len(&self) -> usize {
        self.source_weights.len()
    }

    pub fn target_len(&self) -> usize {
        self.target_weights.len()
    }

    pub fn source_weights(&self) -> &[T] {
        &self.source_weights
    }

    pub fn target_weights(&self) -> &[T] {
        &self.target_weights
    }

    pub fn entries(&self) -> &[(usize, usize, T)] {
        &self.entries
    }

    /// Entries leaving source `j`.
    pub fn row(&self, j: usize) -> &[(usize, usize, T)] {
        &self.entries[self.row_start[j]..self.row_start[j + 1]]
    }

    /// Whether every source feeds exactly one target.
    pub fn is_function(&self) -> bool {
        (0..self.source_len()).all(|j| self.row(j).len() == 1)
    }

    /// `(source, mass)` lists per target.
    pub fn preimages(&self) -> Vec<Vec<(usize, T)>> {
        let mut out = vec![Vec::new(); self.target_len()];
        for &(j, t, w) in &self.entries {
            out[t].push((j, w));
        }
        out
    }

    fn check_columns(&self, c: &Clustering<T>, n: usize) -> Result<()> {
        if c.n() != n {
            return Err(Error::BadMerge(format!(
                "clustering has {} columns, expected {n}",
                c.n()
            )));
        }
        Ok(())
    }

    /// Clustering on the targets, `ξ̃_iĵ = Σ_j W_jĵ ξ_ij / ω̃_ĵ`.
    pub fn push_forward(&self, c: &Clustering<T>) -> Result<Clustering<T>> {
        self.check_columns(c, self.source_len())?;
        let m = self.target_len();
        let mut xi = vec![T::zero(); c.k() * m];
        for &(j, t, w) in &self.entries {
            for i in 0..c.k() {
                xi[i * m + t] = xi[i * m + t] + w * c.get(i, j);
            }
        }
        for i in 0..c.k() {
            for t in 0..m {
                xi[i * m + t] = xi[i * m + t] / self.target_weights[t];
            }
        }
        Clustering::new(c.k(), m, xi)
    }

    /// Extension to the sources, `ξ_ij = Σ_ĵ W_jĵ ξ̃_iĵ / ω_j`.
    pub fn extend(&self, c: &Clustering<T>) -> Result<Clustering<T>> {
        self.check_columns(c, self.target_len())?;
        let n = self.source_len();
        let mut xi = vec![T::zero(); c.k() * n];
        for j in 0..n {
            let row = self.row(j);
            if let [(_, t, _)] = row {
                for i in 0..c.k() {
                    xi[i * n + j] = c.get(i, *t);
                }
                continue;
            }
            for &(_, t, w) in row {
                let share = w / self.source_weights[j];
                for i in 0..c.k() {
                    xi[i * n + j] = xi[i * n + j] + share * c.get(i, t);
                }
            }
        }
        Clustering::new(c.k(), n, xi)
    }

    /// `self` then `inner`: `W = W₁ · diag(1/ω̄) · W₂`.
    pub fn then(&self, inner: &MergePlan<T>) -> Result<MergePlan<T>> {
        if inner.source_len() != self.target_len() {
            return Err(Error::BadMerge(format!(
                "inner plan starts from {} points, outer ends at {}",
                inner.source_len(),
                self.target_len()
            )));
        }
        let mut entries = Vec::with_capacity(self.entries.len());
        for &(j, mid, w1) in &self.entries {
            let scale = w1 / inner.source_weights[mid];
            for &(_, t, w2) in inner.row(mid) {
                entries.push((j, t, scale * w2));
            }
        }
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut merged: Vec<(usize, usize, T)> = Vec::with_capacity(entries.len());
        for e in entries {
            match merged.last_mut() {
                Some(last) if last.0 == e.0 && last.1 == e.1 => last.2 = last.2 + e.2,
                _ => merged.push(e),
            }
        }
        MergePlan::new(
            self.source_weights.clone(),
            inner.target_weights.clone(),
            merged,
        )
    }

    /// `Σ W_jĵ ‖x_j − x̃_ĵ‖²₂`.
    pub fn movement(&self, x: &WeightedDataSet<T>, merged: &WeightedDataSet<T>) -> T {
        self.entries
            .iter()
            .map(|&(j, t, w)| w * dist2(x.point(j), merged.point(t)))
            .sum()
    }
}
