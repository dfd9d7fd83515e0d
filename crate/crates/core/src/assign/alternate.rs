use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::solve::solve_costs;
use crate::approx::d2_seed;
use crate::error::Result;
use crate::model::{
    centroid_and_weight, cost_matrix, Clustering, NormFamily, SiteSet, WeightBounds,
    WeightedDataSet,
};
use crate::scalar::Scalar;

/// Settings for [`alternate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlternatingConfig {
    /// Random starts in addition to any supplied site sets.
    pub starts: usize,
    pub max_rounds: usize,
    /// Stop once a round improves the cost by less than this fraction.
    pub tol: f64,
    pub seed: u64,
}

impl Default for AlternatingConfig {
    fn default() -> Self {
        Self {
            starts: 5,
            max_rounds: 50,
            tol: 1e-9,
            seed: 0,
        }
    }
}

/// Best clustering found by [`alternate`] with its sites at the centroids.
#[derive(Debug, Clone)]
pub struct AlternatingResult<T> {
    pub clustering: Clustering<T>,
    pub sites: SiteSet<T>,
    pub cost: T,
    /// Index of the winning start (supplied site sets come first).
    pub start: usize,
}

fn one_start<T: Scalar>(
    x: &WeightedDataSet<T>,
    a: &NormFamily<T>,
    bounds: &WeightBounds<T>,
    weights: &[f64],
    mut sites: SiteSet<T>,
    cfg: &AlternatingConfig,
) -> Result<(Clustering<T>, SiteSet<T>, T)> {
    let k = bounds.k();
    let mut best: Option<(Clustering<T>, SiteSet<T>, T)> = None;
    for _ in 0..cfg.max_rounds.max(1) {
        let costs: Vec<f64> = cost_matrix(x, &sites, a)?
            .into_iter()
            .map(T::as_f64)
            .collect();
        let c = solve_costs(x, weights, &costs, bounds, &[])?.clustering;
        let mut flat = Vec::with_capacity(k * x.dim());
        for i in 0..k {
            let (centre, w) = centroid_and_weight(x, &c, i)?;
            if w > T::zero() {
                flat.extend(centre);
            } else {
                flat.extend_from_slice(sites.site(i));
            }
        }
        let next = SiteSet::from_flat(x.dim(), flat)?;
        let value = crate::model::cost(x, &c, &next, a)?;
        let improved = match &best {
            None => true,
            Some((_, _, prev)) => value < *prev * (T::one() - T::lit(cfg.tol)),
        };
        if !improved {
            break;
        }
        best = Some((c, next.clone(), value));
        sites = next;
    }
    Ok(best.expect("at least one round"))
}

/// Alternates exact assignment and centroid updates from several starts and
/// keeps the cheapest result (lowest start index on ties).
///
/// A heuristic: the constrained clustering problem is NP-hard, so the result
/// is a best-found upper bound on the optimum.
pub fn alternate<T: Scalar>(
    x: &WeightedDataSet<T>,
    a: &NormFamily<T>,
    bounds: &WeightBounds<T>,
    initial: &[SiteSet<T>],
    cfg: &AlternatingConfig,
) -> Result<AlternatingResult<T>> {
    bounds.check_feasible(x.total_weight())?;
    let k = bounds.k();
    let mut starts: Vec<SiteSet<T>> = initial.to_vec();
    for r in 0..cfg.starts as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(r));
        let idx = d2_seed(x, k, &mut rng);
        let pts: Vec<Vec<T>> = idx.iter().map(|&j| x.point(j).to_vec()).collect();
        starts.push(SiteSet::new(&pts)?);
    }
    if starts.is_empty() {
        starts.push(SiteSet::new(&vec![x.centroid(); k])?);
    }
    let weights: Vec<f64> = x.weights().iter().map(|w| w.as_f64()).collect();
    let results: Vec<Result<(Clustering<T>, SiteSet<T>, T)>> = starts
        .into_par_iter()
        .map(|s| one_start(x, a, bounds, &weights, s, cfg))
        .collect();
    let mut best: Option<AlternatingResult<T>> = None;
    for (idx, r) in results.into_iter().enumerate() {
        let (clustering, sites, cost) = r?;
        if best.as_ref().is_none_or(|b| cost < b.cost) {
            best = Some(AlternatingResult {
                clustering,
                sites,
                cost,
                start: idx,
            });
        }
    }
    Ok(best.expect("at least one start"))
}
