use crate::assign::MergePlan;
use crate::error::{Error, Result};
use crate::model::{NormFamily, WeightedDataSet};
use crate::scalar::Scalar;

/// Consecutive points of one line merged into their centroid.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch<T> {
    pub line: usize,
    /// `(point index, mass)`; a split point appears in two neighbouring batches.
    pub members: Vec<(usize, T)>,
    pub centroid: Vec<T>,
    pub weight: T,
    /// `V_E(B)`.
    pub variation: T,
}

impl<T: Scalar> Batch<T> {
    /// Fraction of point `j`'s weight held by this batch.
    pub fn fraction(&self, j: usize, weights: &[T]) -> T {
        self.members
            .iter()
            .filter(|(m, _)| *m == j)
            .map(|&(_, w)| w)
            .sum::<T>()
            / weights[j]
    }
}

struct Acc<T> {
    members: Vec<(usize, T)>,
    weight: T,
    mean: T,
    var: T,
}

impl<T: Scalar> Acc<T> {
    fn new() -> Self {
        Self {
            members: Vec::new(),
            weight: T::zero(),
            mean: T::zero(),
            var: T::zero(),
        }
    }

    /// Variation after adding mass `a` at parameter `t`.
    fn var_with(&self, t: T, a: T) -> T {
        if self.weight == T::zero() {
            return T::zero();
        }
        let d = t - self.mean;
        self.var + a * self.weight * d * d / (self.weight + a)
    }

    fn push(&mut self, j: usize, t: T, a: T) {
        let w = self.weight + a;
        let d = t - self.mean;
        self.var = self.var_with(t, a);
        self.mean = self.mean + a * d / w;
        self.weight = w;
        self.members.push((j, a));
    }
}

fn close<T: Scalar>(acc: Acc<T>, line: usize, x: &WeightedDataSet<T>, out: &mut Vec<Batch<T>>) {
    if acc.members.is_empty() {
        return;
    }
    let mut centroid = vec![T::zero(); x.dim()];
    for &(j, a) in &acc.members {
        for (c, &v) in centroid.iter_mut().zip(x.point(j)) {
            *c = *c + a * v;
        }
    }
    centroid.iter_mut().for_each(|c| *c = *c / acc.weight);
    out.push(Batch {
        line,
        members: acc.members,
        centroid,
        weight: acc.weight,
        variation: acc.var,
    });
}

/// Greedy left-to-right batching on every line.
///
/// Points are ordered by `(param, index)`. A batch closes once its
/// variation reaches `v_bar`; the point that would overshoot is split so the
/// closed batch hits `v_bar` exactly and its remainder opens the next batch.
/// With `v_bar = 0` only coincident points are merged.
pub fn batch_lines<T: Scalar>(
    x: &WeightedDataSet<T>,
    line: &[usize],
    param: &[T],
    v_bar: T,
) -> Result<Vec<Batch<T>>> {
    if line.len() != x.len() || param.len() != x.len() {
        return Err(Error::DimensionMismatch {
            what: "line assignment",
            index: 0,
            expected: x.len(),
            found: line.len().min(param.len()),
        });
    }
    if !(v_bar >= T::zero()) || !v_bar.is_finite() {
        return Err(Error::Parameter {
            name: "v_bar",
            value: v_bar.as_f64(),
        });
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| {
        line[a]
            .cmp(&line[b])
            .then(param[a].partial_cmp(&param[b]).expect("finite parameters"))
            .then(a.cmp(&b))
    });
    let reach = T::one() - T::tol(1e-12);
    let crumb = T::tol(1e-15);
    let mut out = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let l = line[order[start]];
        let mut end = start;
        while end < order.len() && line[order[end]] == l {
            end += 1;
        }
        let mut acc = Acc::new();
        for &j in &order[start..end] {
            let t = param[j];
            let mut rest = x.weight(j);
            if v_bar == T::zero() {
                if acc.weight > T::zero() && t != acc.mean {
                    close(std::mem::replace(&mut acc, Acc::new()), l, x, &mut out);
                }
                acc.push(j, t, rest);
                continue;
            }
            loop {
                let full = acc.var_with(t, rest);
                if full <= v_bar {
                    acc.push(j, t, rest);
                    if full >= v_bar * reach {
                        close(std::mem::replace(&mut acc, Acc::new()), l, x, &mut out);
                    }
                    break;
                }
                // solve var_with(t, a) = v_bar for the mass a
                let d = t - acc.mean;
                let room = v_bar - acc.var;
                let a = room * acc.weight / (acc.weight * d * d - room);
                if a >= rest * (T::one() - crumb) {
                    acc.push(j, t, rest);
                    close(std::mem::replace(&mut acc, Acc::new()), l, x, &mut out);
                    break;
                }
                acc.push(j, t, a);
                close(std::mem::replace(&mut acc, Acc::new()), l, x, &mut out);
                rest = rest - a;
            }
        }
        close(acc, l, x, &mut out);
        start = end;
    }
    Ok(out)
}

/// Output of [`merge_batches`].
#[derive(Debug, Clone)]
pub struct Merged<T> {
    /// `X_B`: one point per batch.
    pub points: WeightedDataSet<T>,
    /// Mass transport from the batched points to `X_B`.
    pub plan: MergePlan<T>,
    pub delta_plus: T,
    pub delta_minus: T,
    /// `Σ_B V_E(B)`.
    pub total_variation: T,
}

/// Replaces every batch by its centroid; `Δ± = λ±(A)·Σ V_E(B)`.
pub fn merge_batches<T: Scalar>(
    batches: &[Batch<T>],
    source_weights: &[T],
    norms: &NormFamily<T>,
) -> Result<Merged<T>> {
    let dim = batches
        .first()
        .map(|b| b.centroid.len())
        .ok_or(Error::EmptyDataSet)?;
    let mut coords = Vec::with_capacity(batches.len() * dim);
    let mut weights = Vec::with_capacity(batches.len());
    let mut entries = Vec::new();
    let mut total = T::zero();
    for (b, batch) in batches.iter().enumerate() {
        coords.extend_from_slice(&batch.centroid);
        weights.push(batch.weight);
        total = total + batch.variation;
        entries.extend(batch.members.iter().map(|&(j, a)| (j, b, a)));
    }
    let plan = MergePlan::new(source_weights.to_vec(), weights.clone(), entries)?;
    Ok(Merged {
        points: WeightedDataSet::from_flat(dim, coords, weights)?,
        plan,
        delta_plus: norms.lambda_max() * total,
        delta_minus: norms.lambda_min() * total,
        total_variation: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn on_axis(ts: &[f64], w: &[f64]) -> WeightedDataSet<f64> {
        WeightedDataSet::new(
            &ts.iter().map(|&t| vec![t, 0.0]).collect::<Vec<_>>(),
            w.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn coincident_points_form_one_batch() {
        let x = on_axis(&[2.0, 2.0, 2.0], &[1.0, 1.0, 1.0]);
        let b = batch_lines(&x, &[0, 0, 0], &[2.0, 2.0, 2.0], 0.1).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].variation, 0.0);
    }

    #[test]
    fn exact_threshold_closes_batch() {
        let x = on_axis(&[0.0, 1.0], &[1.0, 1.0]);
        let b = batch_lines(&x, &[0, 0], &[0.0, 1.0], 0.5).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].variation, 0.5);
        assert_eq!(b[0].centroid, vec![0.5, 0.0]);
    }

    #[test]
    fn overshoot_splits_point() {
        let x = on_axis(&[0.0, 1.0, 2.0], &[1.0, 1.0, 1.0]);
        let b = batch_lines(&x, &[0, 0, 0], &[0.0, 1.0, 2.0], 0.125).unwrap();
        // first batch: mass a of point 1 with a/(1+a) = 0.125 → a = 1/7
        assert!((b[0].members[1].1 - 1.0 / 7.0).abs() < 1e-15);
        assert!((b[0].variation - 0.125).abs() < 1e-15);
        let held: f64 = b.iter().map(|bb| bb.fraction(1, x.weights())).sum();
        assert!((held - 1.0).abs() < 1e-15);
        for bb in &b[..b.len() - 1] {
            assert!((bb.variation - 0.125).abs() < 1e-12);
        }
    }

    #[test]
    fn separate_lines_never_mix() {
        let x = on_axis(&[0.0, 0.0], &[1.0, 1.0]);
        let b = batch_lines(&x, &[3, 1], &[0.0, 0.0], 1.0).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b[0].line, 1);
    }

    #[test]
    fn zero_threshold_merges_only_coincident() {
        let x = on_axis(&[0.0, 0.0, 1.0], &[1.0, 2.0, 1.0]);
        let b = batch_lines(&x, &[0, 0, 0], &[0.0, 0.0, 1.0], 0.0).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b[0].weight, 3.0);
    }

    #[test]
    fn offsets_follow_eigenvalues() {
        let x = on_axis(&[0.0, 1.0, 2.0], &[1.0, 1.0, 1.0]);
        let b = batch_lines(&x, &[0, 0, 0], &[0.0, 1.0, 2.0], 0.125).unwrap();
        let a = NormFamily::new(vec![crate::SymMatrix::diagonal(&[3.0, 0.5])]).unwrap();
        let m = merge_batches(&b, x.weights(), &a).unwrap();
        assert_eq!(m.delta_plus, 6.0 * m.delta_minus);
        let e = merge_batches(&b, x.weights(), &NormFamily::identity(1, 2)).unwrap();
        assert_eq!(e.delta_plus, e.delta_minus);
        assert!((m.points.total_weight() - 3.0).abs() < 1e-12);
    }
}
