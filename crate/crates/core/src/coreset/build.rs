use serde::{Deserialize, Serialize};

use super::batch::{batch_lines, merge_batches};
use super::net::build_epsilon_net;
use super::project::project_to_pencils;
use crate::approx::{ab_approximate, opt_bruteforce, BRUTEFORCE_LIMIT};
use crate::assign::MergePlan;
use crate::error::{Error, Result};
use crate::model::{Clustering, NormFamily, WeightedDataSet};
use crate::scalar::Scalar;

/// A compressed weighted set with its transport from the original data and
/// the offsets and accuracy it is certified for.
#[derive(Debug, Clone, PartialEq)]
pub struct Coreset<T> {
    points: WeightedDataSet<T>,
    plan: MergePlan<T>,
    delta_plus: T,
    delta_minus: T,
    eps: T,
    delta: T,
    log: Vec<(String, f64)>,
}

impl<T: Scalar> Coreset<T> {
    /// Checks `0 ≤ Δ⁺ ≤ δΔ⁻`, `δ ≥ 1`, `ε ≥ 0` and that the plan delivers
    /// exactly the coreset weights.
    pub fn new(
        points: WeightedDataSet<T>,
        plan: MergePlan<T>,
        delta_plus: T,
        delta_minus: T,
        eps: T,
        delta: T,
        log: Vec<(String, f64)>,
    ) -> Result<Self> {
        let bad = |name, value: T| Error::Parameter {
            name,
            value: value.as_f64(),
        };
        if !(delta_plus >= T::zero()) || !delta_plus.is_finite() {
            return Err(bad("delta_plus", delta_plus));
        }
        if !(delta_minus >= T::zero()) || !delta_minus.is_finite() {
            return Err(bad("delta_minus", delta_minus));
        }
        if !(delta >= T::one()) || !delta.is_finite() {
            return Err(bad("delta", delta));
        }
        if !(eps >= T::zero()) || !eps.is_finite() {
            return Err(bad("eps", eps));
        }
        if delta_plus > delta * delta_minus * (T::one() + T::tol(1e-12)) {
            return Err(bad("delta_plus", delta_plus));
        }
        if plan.target_len() != points.len() {
            return Err(Error::BadMerge(format!(
                "plan ends at {} points, coreset has {}",
                plan.target_len(),
                points.len()
            )));
        }
        let scale = points.total_weight();
        for (t, (&a, &b)) in plan
            .target_weights()
            .iter()
            .zip(points.weights())
            .enumerate()
        {
            if (a - b).abs() > T::tol(1e-12) * scale {
                return Err(Error::BadMerge(format!(
                    "coreset point {t} weighs {b} but receives {a}"
                )));
            }
        }
        let source: T = plan.source_weights().iter().copied().sum();
        if (source - scale).abs() > T::tol(1e-12) * scale {
            return Err(Error::BadMerge(format!(
                "coreset weighs {scale}, data weighs {source}"
            )));
        }
        Ok(Self {
            points,
            plan,
            delta_plus,
            delta_minus,
            eps,
            delta,
            log,
        })
    }

    /// The data set as its own coreset: `ε = 0`, `δ = 1`, `Δ± = 0`.
    pub fn identity(x: &WeightedDataSet<T>) -> Self {
        Self {
            points: x.clone(),
            plan: MergePlan::identity(x.weights()),
            delta_plus: T::zero(),
            delta_minus: T::zero(),
            eps: T::zero(),
            delta: T::one(),
            log: Vec::new(),
        }
    }

    pub fn points(&self) -> &WeightedDataSet<T> {
        &self.points
    }

    pub fn plan(&self) -> &MergePlan<T> {
        &self.plan
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn delta_plus(&self) -> T {
        self.delta_plus
    }

    pub fn delta_minus(&self) -> T {
        self.delta_minus
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    /// Named construction quantities in the order they were recorded.
    pub fn log(&self) -> &[(String, f64)] {
        &self.log
    }

    pub fn log_value(&self, name: &str) -> Option<f64> {
        self.log.iter().find(|(k, _)| k == name).map(|&(_, v)| v)
    }

    /// `f(C̃)`: every data point inherits the assignment of the coreset mass it feeds.
    pub fn extend(&self, c: &Clustering<T>) -> Result<Clustering<T>> {
        self.plan.extend(c)
    }

    /// Number of data points the coreset was built from.
    pub fn source_len(&self) -> usize {
        self.plan.source_len()
    }
}

/// Knobs of [`build_coreset`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoresetConfig {
    /// The heuristic opens `βk` clusters.
    pub beta: usize,
    pub repeats: usize,
    pub seed: u64,
    /// Assumed approximation factor of the heuristic.
    pub alpha: f64,
    /// Accuracy of the projection stage; `ε/3` when unset.
    pub eps_projection: Option<f64>,
    /// Accuracy of the batching stage; `ε/3` when unset.
    pub eps_batching: Option<f64>,
}

impl Default for CoresetConfig {
    fn default() -> Self {
        Self {
            beta: 1,
            repeats: 5,
            seed: 0,
            alpha: 16.0,
            eps_projection: None,
            eps_batching: None,
        }
    }
}

/// Net, pencils, projection and batching.
///
/// With `ε₁, ε₂` the stage accuracies: `ε₀ = (ε₁/4)√(λ⁻/(αλ⁺))` and
/// `V̄ = ε₂²·ALG/(32αkλ⁺|𝓛|)`. The result has `δ = λ⁺/λ⁻` and carries the
/// requested `ε`; the log records every intermediate quantity.
pub fn build_coreset<T: Scalar>(
    x: &WeightedDataSet<T>,
    k: usize,
    eps: T,
    a: &NormFamily<T>,
    cfg: &CoresetConfig,
) -> Result<Coreset<T>> {
    if !(eps > T::zero() && eps <= T::lit(0.5)) {
        return Err(Error::Parameter {
            name: "eps",
            value: eps.as_f64(),
        });
    }
    if !(cfg.alpha >= 1.0) || !cfg.alpha.is_finite() {
        return Err(Error::Parameter {
            name: "alpha",
            value: cfg.alpha,
        });
    }
    if a.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            what: "norm family",
            index: 0,
            expected: x.dim(),
            found: a.dim(),
        });
    }
    let third = eps.as_f64() / 3.0;
    let eps1 = cfg.eps_projection.unwrap_or(third);
    let eps2 = cfg.eps_batching.unwrap_or(third);
    for (name, v) in [("eps_projection", eps1), ("eps_batching", eps2)] {
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::Parameter { name, value: v });
        }
    }
    let (lmax, lmin) = (a.lambda_max().as_f64(), a.lambda_min().as_f64());
    let approx = ab_approximate(x, k, cfg.beta, cfg.repeats, cfg.seed)?;
    let alg = approx.alg.as_f64();
    let eps0 = eps1 / 4.0 * (lmin / (cfg.alpha * lmax)).sqrt();
    let net = build_epsilon_net(T::lit(eps0), x.dim())?;
    let projection = project_to_pencils(x, &approx.clustering, &net)?;
    let lines = projection.line_count;
    let v_bar = eps2 * eps2 / (32.0 * cfg.alpha * k as f64 * lmax * lines as f64) * alg;
    let batches = batch_lines(
        &projection.points,
        &projection.line,
        &projection.param,
        T::lit(v_bar),
    )?;
    let merged = merge_batches(&batches, x.weights(), a)?;
    let size_bound = if alg > 0.0 { 2.0 * alg / v_bar } else { 0.0 } + (k * lines) as f64;
    let closed_form_bound =
        (64.0 * cfg.alpha * lmax * k as f64 / (eps2 * eps2) + k as f64) * lines as f64;
    let splits = batches.iter().map(|b| b.members.len()).sum::<usize>() - x.len();
    let log = vec![
        ("alg".to_string(), alg),
        ("approx_seed".to_string(), approx.seed as f64),
        (
            "approx_clusters".to_string(),
            projection.pencils.len() as f64,
        ),
        ("eps_projection".to_string(), eps1),
        ("eps_batching".to_string(), eps2),
        ("eps_composed".to_string(), eps1 + eps2 + eps1 * eps2),
        ("eps0".to_string(), eps0),
        ("net_size".to_string(), net.len() as f64),
        ("lines".to_string(), lines as f64),
        (
            "projection_movement".to_string(),
            projection.movement.as_f64(),
        ),
        ("v_bar".to_string(), v_bar),
        ("batches".to_string(), batches.len() as f64),
        ("splits".to_string(), splits as f64),
        (
            "total_variation".to_string(),
            merged.total_variation.as_f64(),
        ),
        ("size_bound".to_string(), size_bound),
        ("closed_form_bound".to_string(), closed_form_bound),
    ];
    Coreset::new(
        merged.points,
        merged.plan,
        merged.delta_plus,
        merged.delta_minus,
        eps,
        a.lambda_max() / a.lambda_min(),
        log,
    )
}

/// Coreset of a coreset: plans chain, offsets add, `ε = ε₁ + ε₂ + ε₁ε₂`,
/// `δ = max(δ₁, δ₂)`.
pub fn compose<T: Scalar>(outer: &Coreset<T>, inner: &Coreset<T>) -> Result<Coreset<T>> {
    if inner.source_len() != outer.len() {
        return Err(Error::BadMerge(format!(
            "inner coreset starts from {} points, outer has {}",
            inner.source_len(),
            outer.len()
        )));
    }
    let scale = outer.points.total_weight();
    for (a, b) in inner
        .plan
        .source_weights()
        .iter()
        .zip(outer.points.weights())
    {
        if (*a - *b).abs() > T::tol(1e-12) * scale {
            return Err(Error::BadMerge(
                "inner coreset was built on different weights".into(),
            ));
        }
    }
    let plan = outer.plan.then(&inner.plan)?;
    let mut log: Vec<(String, f64)> = Vec::new();
    log.extend(outer.log.iter().map(|(k, v)| (format!("outer.{k}"), *v)));
    log.extend(inner.log.iter().map(|(k, v)| (format!("inner.{k}"), *v)));
    Coreset::new(
        inner.points.clone(),
        plan,
        outer.delta_plus + inner.delta_plus,
        outer.delta_minus + inner.delta_minus,
        outer.eps + inner.eps + outer.eps * inner.eps,
        outer.delta.max(inner.delta),
        log,
    )
}

/// A lower bound on the unconstrained Euclidean optimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptLowerBound<T> {
    pub value: T,
    /// `true` when the value is `ALG/α` rather than an exact optimum.
    pub heuristic: bool,
}

/// Exact optimum when `kⁿ ≤ 10⁷`, otherwise `ALG/α`.
pub fn opt_lower_bound<T: Scalar>(
    x: &WeightedDataSet<T>,
    k: usize,
    alpha: f64,
    cfg: &CoresetConfig,
) -> Result<OptLowerBound<T>> {
    if (k as f64).powi(x.len() as i32) <= BRUTEFORCE_LIMIT {
        return Ok(OptLowerBound {
            value: opt_bruteforce(x, k)?,
            heuristic: false,
        });
    }
    let approx = ab_approximate(x, k, cfg.beta, cfg.repeats, cfg.seed)?;
    Ok(OptLowerBound {
        value: approx.alg / T::lit(alpha),
        heuristic: true,
    })
}

/// Result of [`movement_coreset_certify`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MovementCertificate<T> {
    pub holds: bool,
    /// `Σ W_jĵ ‖x_j − x̃_ĵ‖²₂`.
    pub movement: T,
    /// `ε²λ⁻/(16λ⁺)·OPT`.
    pub threshold: T,
    /// Inherited from the lower bound; a heuristic bound certifies nothing.
    pub heuristic: bool,
}

/// Whether moving `x` to `merged` along `plan` stays within the movement
/// budget that makes `merged` a linear `ε`-coreset.
pub fn movement_coreset_certify<T: Scalar>(
    x: &WeightedDataSet<T>,
    merged: &WeightedDataSet<T>,
    plan: &MergePlan<T>,
    eps: T,
    a: &NormFamily<T>,
    opt: OptLowerBound<T>,
) -> Result<MovementCertificate<T>> {
    if plan.source_len() != x.len() || plan.target_len() != merged.len() {
        return Err(Error::BadMerge(format!(
            "plan maps {} to {} points, sets have {} and {}",
            plan.source_len(),
            plan.target_len(),
            x.len(),
            merged.len()
        )));
    }
    let movement = plan.movement(x, merged);
    let threshold = eps * eps * a.lambda_min() / (T::lit(16.0) * a.lambda_max()) * opt.value;
    Ok(MovementCertificate {
        holds: movement <= threshold,
        movement,
        threshold,
        heuristic: opt.heuristic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blob(n: usize) -> WeightedDataSet<f64> {
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                let t = j as f64;
                vec![
                    (t * 0.7).sin() * 3.0 + (j % 2) as f64 * 20.0,
                    (t * 1.3).cos() * 2.0,
                ]
            })
            .collect();
        WeightedDataSet::unweighted(&pts).unwrap()
    }

    #[test]
    fn negative_offset_is_rejected() {
        let x = blob(4);
        let plan = MergePlan::identity(x.weights());
        let r = Coreset::new(x, plan, -1.0, 0.0, 0.1, 1.0, Vec::new());
        assert!(r.is_err());
    }

    #[test]
    fn offsets_must_respect_delta() {
        let x = blob(4);
        let plan = MergePlan::identity(x.weights());
        assert!(Coreset::new(x.clone(), plan.clone(), 2.0, 1.0, 0.1, 1.5, Vec::new()).is_err());
        assert!(Coreset::new(x, plan, 1.5, 1.0, 0.1, 1.5, Vec::new()).is_ok());
    }

    #[test]
    fn composition_formula() {
        let x = blob(6);
        let mut c = Coreset::identity(&x);
        c.eps = 0.1;
        let d = compose(&c, &c).unwrap();
        assert!((d.eps() - 0.21).abs() < 1e-15);
        assert_eq!(d.delta(), 1.0);
    }

    #[test]
    fn composing_with_identity_keeps_outer() {
        let x = blob(60);
        let outer = build_coreset(
            &x,
            2,
            0.5,
            &NormFamily::identity(2, 2),
            &CoresetConfig::default(),
        )
        .unwrap();
        let inner = Coreset::identity(outer.points());
        let c = compose(&outer, &inner).unwrap();
        assert_eq!(c.points(), outer.points());
        assert_eq!(c.plan(), outer.plan());
        assert_eq!(c.eps(), outer.eps());
        assert_eq!(c.delta_plus(), outer.delta_plus());
    }

    #[test]
    fn eps_out_of_range() {
        let x = blob(10);
        let a = NormFamily::identity(2, 2);
        assert!(build_coreset(&x, 2, 0.6, &a, &CoresetConfig::default()).is_err());
        assert!(build_coreset(&x, 2, 0.0, &a, &CoresetConfig::default()).is_err());
    }

    #[test]
    fn identity_movement_is_zero() {
        let x = blob(8);
        let plan = MergePlan::identity(x.weights());
        let opt = OptLowerBound {
            value: 1.0,
            heuristic: false,
        };
        let r = movement_coreset_certify(&x, &x, &plan, 1e-6, &NormFamily::identity(1, 2), opt)
            .unwrap();
        assert!(r.holds);
        assert_eq!(r.movement, 0.0);
    }

    #[test]
    fn far_merge_fails_certificate() {
        let x = WeightedDataSet::unweighted(&[vec![0.0], vec![10.0], vec![11.0]]).unwrap();
        let m = WeightedDataSet::new(&[vec![5.0], vec![11.0]], vec![2.0, 1.0]).unwrap();
        let p = crate::MergingFunction::new(vec![0, 0, 1], 2).unwrap();
        let plan = MergePlan::from_merging(&p, x.weights(), m.weights()).unwrap();
        let opt = opt_lower_bound(&x, 2, 16.0, &CoresetConfig::default()).unwrap();
        assert!(!opt.heuristic);
        let r =
            movement_coreset_certify(&x, &m, &plan, 0.5, &NormFamily::identity(1, 1), opt).unwrap();
        assert!(!r.holds);
        assert_eq!(r.movement, 50.0);
    }
}
