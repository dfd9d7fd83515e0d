use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::report::Report;
use crate::assign::{alternate, solve_assignment, solve_costs, AlternatingConfig};
use crate::coreset::Coreset;
use crate::error::{Error, Result};
use crate::model::{
    cost, opt_site_cost, Clustering, NormFamily, SiteSet, WeightBounds, WeightedDataSet,
};

const SLACK: f64 = 1e-7;

/// A full-data problem: points, cluster count, norms and weight bounds.
#[derive(Debug, Clone)]
pub struct Instance {
    pub x: WeightedDataSet<f64>,
    pub k: usize,
    pub norms: NormFamily<f64>,
    pub bounds: WeightBounds<f64>,
}

impl Instance {
    pub fn new(
        x: WeightedDataSet<f64>,
        norms: NormFamily<f64>,
        bounds: WeightBounds<f64>,
    ) -> Result<Self> {
        let k = bounds.k();
        if norms.k() != k || norms.dim() != x.dim() {
            return Err(Error::DimensionMismatch {
                what: "norm family",
                index: 0,
                expected: k,
                found: norms.k(),
            });
        }
        bounds.check_feasible(x.total_weight())?;
        Ok(Self {
            x,
            k,
            norms,
            bounds,
        })
    }

    /// Identity norms and no weight bounds.
    pub fn unconstrained(x: WeightedDataSet<f64>, k: usize) -> Self {
        let d = x.dim();
        Self {
            x,
            k,
            norms: NormFamily::identity(k, d),
            bounds: WeightBounds::unconstrained(k),
        }
    }

    fn check_coreset(&self, c: &Coreset<f64>) -> Result<()> {
        if c.source_len() != self.x.len() || c.points().dim() != self.x.dim() {
            return Err(Error::BadMerge(format!(
                "coreset built from {} points, instance has {}",
                c.source_len(),
                self.x.len()
            )));
        }
        Ok(())
    }
}

/// A failed inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub trial: usize,
    pub check: String,
    pub lhs: f64,
    pub rhs: f64,
}

fn holds(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + SLACK * lhs.abs().max(rhs.abs())
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs > 0.0 {
        lhs / rhs
    } else if lhs <= 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64 + 1);
    rng
}

/// `k` sites uniform in the data bounding box scaled by 1.5 about its centre.
pub(crate) fn sample_sites(
    x: &WeightedDataSet<f64>,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> SiteSet<f64> {
    let (lo, hi) = x.bounding_box();
    let sites: Vec<Vec<f64>> = (0..k)
        .map(|_| {
            lo.iter()
                .zip(&hi)
                .map(|(&l, &h)| {
                    let half = 0.75 * (h - l);
                    let mid = 0.5 * (l + h);
                    rng.random_range(mid - half..=mid + half)
                })
                .collect()
        })
        .collect();
    SiteSet::new(&sites).expect("finite sites")
}

/// A feasible clustering from a random vertex of the transportation polytope.
fn random_vertex(
    x: &WeightedDataSet<f64>,
    bounds: &WeightBounds<f64>,
    rng: &mut ChaCha8Rng,
) -> Result<Clustering<f64>> {
    let costs: Vec<f64> = (0..bounds.k() * x.len())
        .map(|_| rng.random_range(0.0..1.0))
        .collect();
    Ok(solve_costs(x, x.weights(), &costs, bounds, &[])?.clustering)
}

fn mix(a: &Clustering<f64>, b: &Clustering<f64>, t: f64) -> Result<Clustering<f64>> {
    let xi = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(&p, &q)| (1.0 - t) * p + t * q)
        .collect();
    Clustering::new(a.k(), a.n(), xi)
}

/// Random feasible coreset clusterings: two polytope vertices and a blend.
fn random_feasible(
    x: &WeightedDataSet<f64>,
    bounds: &WeightBounds<f64>,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Clustering<f64>>> {
    let a = random_vertex(x, bounds, rng)?;
    let b = random_vertex(x, bounds, rng)?;
    let t = rng.random_range(0.0..1.0);
    let c = mix(&a, &b, t)?;
    Ok(vec![a, b, c])
}

/// Output of [`check_coreset_properties`].
#[derive(Debug, Clone, Serialize)]
pub struct PropertyReport {
    pub seed: u64,
    pub trials: usize,
    pub clusterings_per_trial: usize,
    pub eps: f64,
    pub delta: f64,
    pub delta_plus: f64,
    pub delta_minus: f64,
    /// Largest `(1−ε)cost(X, f(C̃), S) / (cost(X̃, C̃, S) + Δ⁺)`.
    pub worst_ratio_a: f64,
    /// Largest `(cost(X̃, S) + Δ⁻) / ((1+ε)cost(X, S))`.
    pub worst_ratio_b: f64,
    pub violations: Vec<Violation>,
    pub seconds: f64,
}

impl Report for PropertyReport {
    fn title(&self) -> &'static str {
        "Coreset inequalities"
    }

    fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn rows(&self) -> Vec<(String, String)> {
        vec![
            ("seed".into(), self.seed.to_string()),
            ("site trials".into(), self.trials.to_string()),
            (
                "clusterings per trial".into(),
                self.clusterings_per_trial.to_string(),
            ),
            ("ε".into(), self.eps.to_string()),
            ("δ".into(), self.delta.to_string()),
            ("Δ⁺".into(), format!("{:e}", self.delta_plus)),
            ("Δ⁻".into(), format!("{:e}", self.delta_minus)),
            (
                "worst ratio (a)".into(),
                format!("{:.9}", self.worst_ratio_a),
            ),
            (
                "worst ratio (b)".into(),
                format!("{:.9}", self.worst_ratio_b),
            ),
            ("violations".into(), self.violations.len().to_string()),
            ("seconds".into(), format!("{:.3}", self.seconds)),
        ]
    }

    fn findings(&self) -> Vec<String> {
        self.violations
            .iter()
            .map(|v| format!("trial {} {}: {} > {}", v.trial, v.check, v.lhs, v.rhs))
            .collect()
    }
}

struct TrialOutcome {
    ratio_a: f64,
    ratio_b: f64,
    violations: Vec<Violation>,
}

/// Samples `trials` site sets and checks, per set, the lower inequality for
/// the LP-optimal coreset clustering and three random feasible ones, and the
/// upper inequality between the two constrained optima.
pub fn check_coreset_properties(
    inst: &Instance,
    coreset: &Coreset<f64>,
    trials: usize,
    seed: u64,
) -> Result<PropertyReport> {
    inst.check_coreset(coreset)?;
    let start = Instant::now();
    let (eps, dp, dm) = (coreset.eps(), coreset.delta_plus(), coreset.delta_minus());
    let xt = coreset.points();
    let outcomes: Vec<Result<TrialOutcome>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let s = sample_sites(&inst.x, inst.k, &mut rng);
            let full = solve_assignment(&inst.x, &s, &inst.norms, &inst.bounds)?;
            let small = solve_assignment(xt, &s, &inst.norms, &inst.bounds)?;
            let mut out = TrialOutcome {
                ratio_a: 0.0,
                ratio_b: 0.0,
                violations: Vec::new(),
            };
            let lhs_b = small.cost + dm;
            let rhs_b = (1.0 + eps) * full.cost;
            out.ratio_b = ratio(lhs_b, rhs_b);
            if !holds(lhs_b, rhs_b) {
                out.violations.push(Violation {
                    trial: t,
                    check: "(b)".into(),
                    lhs: lhs_b,
                    rhs: rhs_b,
                });
            }
            let mut candidates = vec![small.clustering];
            candidates.extend(random_feasible(xt, &inst.bounds, &mut rng)?);
            for (c_idx, ct) in candidates.iter().enumerate() {
                let f = coreset.extend(ct)?;
                let lhs = (1.0 - eps) * cost(&inst.x, &f, &s, &inst.norms)?;
                let rhs = cost(xt, ct, &s, &inst.norms)? + dp;
                out.ratio_a = out.ratio_a.max(ratio(lhs, rhs));
                if !holds(lhs, rhs) {
                    out.violations.push(Violation {
                        trial: t,
                        check: format!("(a) clustering {c_idx}"),
                        lhs,
                        rhs,
                    });
                }
            }
            Ok(out)
        })
        .collect();
    let mut report = PropertyReport {
        seed,
        trials,
        clusterings_per_trial: 4,
        eps,
        delta: coreset.delta(),
        delta_plus: dp,
        delta_minus: dm,
        worst_ratio_a: 0.0,
        worst_ratio_b: 0.0,
        violations: Vec::new(),
        seconds: 0.0,
    };
    for o in outcomes {
        let o = o?;
        report.worst_ratio_a = report.worst_ratio_a.max(o.ratio_a);
        report.worst_ratio_b = report.worst_ratio_b.max(o.ratio_b);
        report.violations.extend(o.violations);
    }
    report.seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Output of [`check_centroid_form`].
#[derive(Debug, Clone, Serialize)]
pub struct CentroidReport {
    pub seed: u64,
    pub samples: usize,
    pub eps: f64,
    /// Largest `(1−ε)cost(X, f(C̃)) / (cost(X̃, C̃) + Δ⁺)` over the samples.
    pub worst_ratio_a: f64,
    pub violations: Vec<Violation>,
    /// Best constrained cost found on the coreset.
    pub best_coreset: f64,
    /// Best constrained cost found on the data.
    pub best_full: f64,
    /// `best_coreset + Δ⁻ ≤ (1+ε)·best_full·(1+1e-6)`; a consistency check only,
    /// since both sides are heuristic.
    pub consistent: bool,
    pub seconds: f64,
}

impl Report for CentroidReport {
    fn title(&self) -> &'static str {
        "Centroid form"
    }

    fn passed(&self) -> bool {
        self.violations.is_empty() && self.consistent
    }

    fn rows(&self) -> Vec<(String, String)> {
        vec![
            ("seed".into(), self.seed.to_string()),
            ("sampled clusterings".into(), self.samples.to_string()),
            ("ε".into(), self.eps.to_string()),
            (
                "worst ratio (a′)".into(),
                format!("{:.9}", self.worst_ratio_a),
            ),
            (
                "best-found optimum, coreset".into(),
                format!("{:e}", self.best_coreset),
            ),
            (
                "best-found optimum, data".into(),
                format!("{:e}", self.best_full),
            ),
            (
                "(b′)".into(),
                if self.consistent {
                    "consistent"
                } else {
                    "inconsistent"
                }
                .into(),
            ),
            ("seconds".into(), format!("{:.3}", self.seconds)),
        ]
    }

    fn findings(&self) -> Vec<String> {
        self.violations
            .iter()
            .map(|v| format!("sample {} {}: {} > {}", v.trial, v.check, v.lhs, v.rhs))
            .collect()
    }
}

/// Checks the inequalities with centroid sites: the lower one on `samples`
/// random feasible coreset clusterings, the upper one between best-found
/// constrained optima (multistart alternation, each side seeded with the
/// other side's best sites). Limited to `k ≤ 3`, `n ≤ 60`.
pub fn check_centroid_form(
    inst: &Instance,
    coreset: &Coreset<f64>,
    samples: usize,
    seed: u64,
) -> Result<CentroidReport> {
    inst.check_coreset(coreset)?;
    if inst.k > 3 || inst.x.len() > 60 {
        return Err(Error::TooLarge(format!(
            "centroid-form check needs k ≤ 3 and n ≤ 60, got k = {} and n = {}",
            inst.k,
            inst.x.len()
        )));
    }
    let start = Instant::now();
    let (eps, dp, dm) = (coreset.eps(), coreset.delta_plus(), coreset.delta_minus());
    let xt = coreset.points();
    let mut rng = trial_rng(seed, 0);
    let mut report = CentroidReport {
        seed,
        samples,
        eps,
        worst_ratio_a: 0.0,
        violations: Vec::new(),
        best_coreset: 0.0,
        best_full: 0.0,
        consistent: false,
        seconds: 0.0,
    };
    for t in 0..samples {
        let ct = if t % 3 == 2 {
            let a = random_vertex(xt, &inst.bounds, &mut rng)?;
            let b = random_vertex(xt, &inst.bounds, &mut rng)?;
            mix(&a, &b, rng.random_range(0.0..1.0))?
        } else {
            random_vertex(xt, &inst.bounds, &mut rng)?
        };
        let f = coreset.extend(&ct)?;
        let lhs = (1.0 - eps) * opt_site_cost(&inst.x, &f, &inst.norms)?;
        let rhs = opt_site_cost(xt, &ct, &inst.norms)? + dp;
        report.worst_ratio_a = report.worst_ratio_a.max(ratio(lhs, rhs));
        if !holds(lhs, rhs) {
            report.violations.push(Violation {
                trial: t,
                check: "(a′)".into(),
                lhs,
                rhs,
            });
        }
    }
    let cfg = AlternatingConfig {
        starts: 8,
        seed,
        ..AlternatingConfig::default()
    };
    let full = alternate(&inst.x, &inst.norms, &inst.bounds, &[], &cfg)?;
    let small = alternate(xt, &inst.norms, &inst.bounds, &[full.sites.clone()], &cfg)?;
    let full = alternate(
        &inst.x,
        &inst.norms,
        &inst.bounds,
        &[full.sites, small.sites],
        &cfg,
    )?;
    report.best_coreset = small.cost;
    report.best_full = full.cost;
    report.consistent = small.cost + dm <= (1.0 + eps) * full.cost * (1.0 + 1e-6);
    report.seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Output of [`check_approx_preservation`].
#[derive(Debug, Clone, Serialize)]
pub struct ApproxPreservationReport {
    pub seed: u64,
    pub trials: usize,
    pub eps: f64,
    pub gamma: f64,
    pub delta: f64,
    /// Largest measured approximation ratio of the degraded coreset clusterings.
    pub max_gamma_hat: f64,
    /// Largest `cost(X, f(C̃), S) / ((1+ε)·max(γ̂, δ)·cost(X, S))`.
    pub worst_ratio: f64,
    pub violations: Vec<Violation>,
    pub seconds: f64,
}

impl Report for ApproxPreservationReport {
    fn title(&self) -> &'static str {
        "Approximation preservation"
    }

    fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn rows(&self) -> Vec<(String, String)> {
        vec![
            ("seed".into(), self.seed.to_string()),
            ("trials".into(), self.trials.to_string()),
            ("ε".into(), self.eps.to_string()),
            ("γ".into(), self.gamma.to_string()),
            ("δ".into(), self.delta.to_string()),
            ("largest γ̂".into(), format!("{:.6}", self.max_gamma_hat)),
            ("worst ratio".into(), format!("{:.9}", self.worst_ratio)),
            ("violations".into(), self.violations.len().to_string()),
            ("seconds".into(), format!("{:.3}", self.seconds)),
        ]
    }

    fn findings(&self) -> Vec<String> {
        self.violations
            .iter()
            .map(|v| format!("trial {}: {} > {}", v.trial, v.lhs, v.rhs))
            .collect()
    }
}

/// For random sites, degrades the optimal coreset clustering towards a random
/// vertex until its measured ratio `γ̂` reaches a random target in `[1, γ]`,
/// extends it and checks `cost(X, f(C̃), S) ≤ (1+ε)·max(γ̂, δ)·cost(X, S)`.
///
/// The coreset must have been built at accuracy at most `ε/3`, and `γ ≥ δ`.
pub fn check_approx_preservation(
    inst: &Instance,
    coreset: &Coreset<f64>,
    eps: f64,
    gamma: f64,
    trials: usize,
    seed: u64,
) -> Result<ApproxPreservationReport> {
    inst.check_coreset(coreset)?;
    if !(gamma >= coreset.delta()) {
        return Err(Error::Parameter {
            name: "gamma",
            value: gamma,
        });
    }
    if !(eps > 0.0 && eps <= 1.0 && coreset.eps() <= eps / 3.0 * (1.0 + 1e-12)) {
        return Err(Error::Parameter {
            name: "eps",
            value: eps,
        });
    }
    let start = Instant::now();
    let xt = coreset.points();
    let delta = coreset.delta();
    let outcomes: Vec<Result<(f64, f64, Option<Violation>)>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let s = sample_sites(&inst.x, inst.k, &mut rng);
            let full = solve_assignment(&inst.x, &s, &inst.norms, &inst.bounds)?;
            let best = solve_assignment(xt, &s, &inst.norms, &inst.bounds)?;
            let other = random_vertex(xt, &inst.bounds, &mut rng)?;
            let c_other = cost(xt, &other, &s, &inst.norms)?;
            let target = rng.random_range(1.0..=gamma);
            let lambda = if c_other > best.cost {
                ((target - 1.0) * best.cost / (c_other - best.cost)).min(1.0)
            } else {
                0.0
            };
            let ct = mix(&best.clustering, &other, lambda)?;
            let c_t = cost(xt, &ct, &s, &inst.norms)?;
            let gamma_hat = if best.cost > 0.0 {
                c_t / best.cost
            } else {
                1.0
            };
            let f = coreset.extend(&ct)?;
            let lhs = cost(&inst.x, &f, &s, &inst.norms)?;
            let rhs = (1.0 + eps) * gamma_hat.max(delta) * full.cost;
            let v = (!holds(lhs, rhs)).then(|| Violation {
                trial: t,
                check: "preservation".into(),
                lhs,
                rhs,
            });
            Ok((gamma_hat, ratio(lhs, rhs), v))
        })
        .collect();
    let mut report = ApproxPreservationReport {
        seed,
        trials,
        eps,
        gamma,
        delta,
        max_gamma_hat: 0.0,
        worst_ratio: 0.0,
        violations: Vec::new(),
        seconds: 0.0,
    };
    for o in outcomes {
        let (g, r, v) = o?;
        report.max_gamma_hat = report.max_gamma_hat.max(g);
        report.worst_ratio = report.worst_ratio.max(r);
        report.violations.extend(v);
    }
    report.seconds = start.elapsed().as_secs_f64();
    Ok(report)
}
