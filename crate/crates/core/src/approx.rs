//! Unconstrained Euclidean front end: a bicriteria heuristic and an exact
//! brute-force oracle for small instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::dist2;
use crate::model::{Clustering, SiteSet, WeightedDataSet};
use crate::scalar::Scalar;

const MAX_ITER: usize = 100;
const REL_IMPROVEMENT: f64 = 1e-6;
/// Upper limit on `kⁿ` for [`opt_bruteforce`].
pub const BRUTEFORCE_LIMIT: f64 = 1e7;

/// Output of [`ab_approximate`].
#[derive(Debug, Clone)]
pub struct ApproxResult<T> {
    /// Integral clustering with `βk` rows; some may be void.
    pub clustering: Clustering<T>,
    pub centers: SiteSet<T>,
    /// Unconstrained Euclidean cost of `clustering` at its centroids.
    pub alg: T,
    /// Seed of the winning run.
    pub seed: u64,
    /// Cost after each refinement step of the winning run.
    pub trace: Vec<T>,
}

/// Weighted `D²` seeding of `m` centers; returns point indices.
pub(crate) fn d2_seed<T: Scalar>(
    x: &WeightedDataSet<T>,
    m: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let n = x.len();
    let mut chosen = Vec::with_capacity(m);
    let total = x.total_weight().as_f64();
    let mut u = rng.random::<f64>() * total;
    let mut first = n - 1;
    for j in 0..n {
        u -= x.weight(j).as_f64();
        if u <= 0.0 {
            first = j;
            break;
        }
    }
    chosen.push(first);
    let mut best: Vec<f64> = x
        .points()
        .map(|p| dist2(p, x.point(first)).as_f64())
        .collect();
    while chosen.len() < m {
        let mass: f64 = best
            .iter()
            .zip(x.weights())
            .map(|(d, w)| d * w.as_f64())
            .sum();
        let pick = if mass > 0.0 {
            let mut u = rng.random::<f64>() * mass;
            let mut pick = None;
            for j in 0..n {
                let m = best[j] * x.weight(j).as_f64();
                if m > 0.0 {
                    u -= m;
                    pick = Some(j);
                    if u <= 0.0 {
                        break;
                    }
                }
            }
            pick.unwrap_or(0)
        } else {
            (0..n).find(|j| !chosen.contains(j)).unwrap_or(0)
        };
        chosen.push(pick);
        for (j, b) in best.iter_mut().enumerate() {
            *b = b.min(dist2(x.point(j), x.point(pick)).as_f64());
        }
    }
    chosen
}

fn nearest<T: Scalar>(p: &[T], centers: &[Vec<T>]) -> (usize, T) {
    let mut best = (0, dist2(p, &centers[0]));
    for (i, c) in centers.iter().enumerate().skip(1) {
        let d = dist2(p, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn centroid_cost<T: Scalar>(
    x: &WeightedDataSet<T>,
    labels: &[usize],
    m: usize,
) -> (Vec<Vec<T>>, Vec<T>, T) {
    let d = x.dim();
    let mut sums = vec![vec![T::zero(); d]; m];
    let mut mass = vec![T::zero(); m];
    for (j, &l) in labels.iter().enumerate() {
        let w = x.weight(j);
        mass[l] = mass[l] + w;
        for (s, &v) in sums[l].iter_mut().zip(x.point(j)) {
            *s = *s + w * v;
        }
    }
    for (s, &w) in sums.iter_mut().zip(&mass) {
        if w > T::zero() {
            s.iter_mut().for_each(|v| *v = *v / w);
        }
    }
    let cost = labels
        .iter()
        .enumerate()
        .map(|(j, &l)| x.weight(j) * dist2(x.point(j), &sums[l]))
        .sum();
    (sums, mass, cost)
}

struct Run<T> {
    labels: Vec<usize>,
    centers: Vec<Vec<T>>,
    cost: T,
    trace: Vec<T>,
}

fn lloyd<T: Scalar>(x: &WeightedDataSet<T>, m: usize, seed: u64) -> Run<T> {
    let n = x.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers: Vec<Vec<T>> = d2_seed(x, m, &mut rng)
        .into_iter()
        .map(|j| x.point(j).to_vec())
        .collect();
    let mut labels = vec![0usize; n];
    let mut trace = Vec::new();
    let mut prev = T::infinity();
    for _ in 0..MAX_ITER {
        let mut contrib = vec![T::zero(); n];
        for j in 0..n {
            let (l, d) = nearest(x.point(j), &centers);
            labels[j] = l;
            contrib[j] = x.weight(j) * d;
        }
        let (sums, mass, _) = centroid_cost(x, &labels, m);
        let empty: Vec<usize> = (0..m).filter(|&i| mass[i] == T::zero()).collect();
        if !empty.is_empty() {
            // move each empty center onto the currently most expensive point
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|a, b| {
                contrib[*b]
                    .partial_cmp(&contrib[*a])
                    .unwrap()
                    .then(a.cmp(b))
            });
            let mut repaired = centers.clone();
            for (i, &slot) in empty.iter().enumerate() {
                if i < n && contrib[order[i]] > T::zero() {
                    repaired[slot] = x.point(order[i]).to_vec();
                }
            }
            for (i, s) in sums.into_iter().enumerate() {
                if mass[i] > T::zero() {
                    repaired[i] = s;
                }
            }
            centers = repaired;
        } else {
            centers = sums;
        }
        for j in 0..n {
            labels[j] = nearest(x.point(j), &centers).0;
        }
        let (_, _, cost) = centroid_cost(x, &labels, m);
        trace.push(cost);
        let done = prev.is_finite()
            && (prev - cost) <= T::lit(REL_IMPROVEMENT) * prev.max(T::min_positive_value());
        prev = cost;
        if done || cost == T::zero() {
            break;
        }
    }
    let (centers, _, cost) = centroid_cost(x, &labels, m);
    Run {
        labels,
        centers,
        cost,
        trace,
    }
}

/// Bicriteria approximation with `βk` centers: weighted `D²` seeding plus
/// Lloyd refinement, best of `repeats` runs seeded `seed, seed+1, …`.
///
/// With `n ≤ βk` every point becomes its own cluster and `ALG = 0`.
pub fn ab_approximate<T: Scalar>(
    x: &WeightedDataSet<T>,
    k: usize,
    beta: usize,
    repeats: usize,
    seed: u64,
) -> Result<ApproxResult<T>> {
    for (name, v) in [("k", k), ("beta", beta), ("repeats", repeats)] {
        if v == 0 {
            return Err(Error::Parameter { name, value: 0.0 });
        }
    }
    let m = beta * k;
    let n = x.len();
    if n <= m {
        let labels: Vec<usize> = (0..n).collect();
        let mut centers: Vec<Vec<T>> = x.points().map(<[T]>::to_vec).collect();
        centers.resize(m, vec![T::zero(); x.dim()]);
        return Ok(ApproxResult {
            clustering: Clustering::from_labels(m, &labels)?,
            centers: SiteSet::new(&centers)?,
            alg: T::zero(),
            seed,
            trace: vec![T::zero()],
        });
    }
    let runs: Vec<Run<T>> = (0..repeats as u64)
        .into_par_iter()
        .map(|r| lloyd(x, m, seed.wrapping_add(r)))
        .collect();
    let mut best = 0;
    for (r, run) in runs.iter().enumerate() {
        if run.cost < runs[best].cost {
            best = r;
        }
    }
    let run = runs.into_iter().nth(best).expect("at least one run");
    Ok(ApproxResult {
        clustering: Clustering::from_labels(m, &run.labels)?,
        centers: SiteSet::new(&run.centers)?,
        alg: run.cost,
        seed: seed.wrapping_add(best as u64),
        trace: run.trace,
    })
}

struct Brute<'a, T> {
    x: &'a WeightedDataSet<T>,
    k: usize,
    mass: Vec<f64>,
    sum: Vec<Vec<f64>>,
    sq: Vec<f64>,
    labels: Vec<usize>,
    best: f64,
    best_labels: Vec<usize>,
}

impl<T: Scalar> Brute<'_, T> {
    fn cluster_cost(&self, i: usize) -> f64 {
        if self.mass[i] <= 0.0 {
            return 0.0;
        }
        let s2: f64 = self.sum[i].iter().map(|v| v * v).sum();
        (self.sq[i] - s2 / self.mass[i]).max(0.0)
    }

    fn total(&self) -> f64 {
        (0..self.k).map(|i| self.cluster_cost(i)).sum()
    }

    fn recurse(&mut self, j: usize, used: usize) {
        let partial = self.total();
        if partial > self.best * (1.0 + 1e-9) + 1e-300 {
            return;
        }
        let n = self.x.len();
        if j == n {
            if partial < self.best {
                self.best = partial;
                self.best_labels = self.labels.clone();
            }
            return;
        }
        // labels in restricted-growth order, so each partition is seen once
        let limit = (used + 1).min(self.k);
        let p: Vec<f64> = self.x.point(j).iter().map(|v| v.as_f64()).collect();
        let w = self.x.weight(j).as_f64();
        let p2: f64 = p.iter().map(|v| v * v).sum();
        for l in 0..limit {
            self.mass[l] += w;
            self.sq[l] += w * p2;
            for (s, v) in self.sum[l].iter_mut().zip(&p) {
                *s += w * v;
            }
            self.labels[j] = l;
            self.recurse(j + 1, used.max(l + 1));
            self.mass[l] -= w;
            self.sq[l] -= w * p2;
            for (s, v) in self.sum[l].iter_mut().zip(&p) {
                *s -= w * v;
            }
        }
    }
}

/// Exact unconstrained optimum `OPT(X)` by enumerating partitions.
///
/// Rejects instances with `kⁿ > 10⁷`.
pub fn opt_bruteforce<T: Scalar>(x: &WeightedDataSet<T>, k: usize) -> Result<T> {
    Ok(opt_bruteforce_labels(x, k)?.0)
}

/// [`opt_bruteforce`] together with an optimal labeling.
pub fn opt_bruteforce_labels<T: Scalar>(
    x: &WeightedDataSet<T>,
    k: usize,
) -> Result<(T, Vec<usize>)> {
    if k == 0 {
        return Err(Error::Parameter {
            name: "k",
            value: 0.0,
        });
    }
    let n = x.len();
    let size = (k as f64).powf(n as f64);
    if size > BRUTEFORCE_LIMIT {
        return Err(Error::TooLarge(format!(
            "{k}^{n} assignments exceed the enumeration limit"
        )));
    }
    let mut b = Brute {
        x,
        k,
        mass: vec![0.0; k],
        sum: vec![vec![0.0; x.dim()]; k],
        sq: vec![0.0; k],
        labels: vec![0; n],
        best: f64::INFINITY,
        best_labels: vec![0; n],
    };
    b.recurse(0, 0);
    let labels = b.best_labels;
    let (_, _, cost) = centroid_cost(x, &labels, k);
    Ok((cost, labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::variation_euclidean;

    fn line(v: &[f64]) -> WeightedDataSet<f64> {
        WeightedDataSet::unweighted(&v.iter().map(|&t| vec![t, 0.0]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(
            opt_bruteforce(&line(&[0.0, 1.0, 10.0, 11.0]), 2).unwrap(),
            1.0
        );
        assert_eq!(opt_bruteforce(&line(&[0.0, 3.0, 7.0]), 3).unwrap(), 0.0);
        let x = line(&[0.0, 1.0, 5.0]);
        let v = variation_euclidean(&x);
        assert!((opt_bruteforce(&x, 1).unwrap() - v).abs() < 1e-12);
    }

    #[test]
    fn brute_force_guard() {
        let x = line(&(0..30).map(|v| v as f64).collect::<Vec<_>>());
        assert!(matches!(opt_bruteforce(&x, 2), Err(Error::TooLarge(_))));
    }

    #[test]
    fn discrete_when_few_points() {
        let r = ab_approximate(&line(&[0.0, 1.0]), 2, 1, 3, 7).unwrap();
        assert_eq!(r.alg, 0.0);
        assert!(r.clustering.is_integral(0.0));
    }

    #[test]
    fn separated_pairs() {
        let x = line(&[0.0, 1.0, 10.0, 11.0]);
        let r = ab_approximate(&x, 2, 1, 5, 1).unwrap();
        assert_eq!(r.alg, 1.0);
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
    }
}
