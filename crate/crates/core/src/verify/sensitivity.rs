use std::f64::consts::PI;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::harness::{sample_sites, Instance};
use super::report::Report;
use crate::assign::solve_assignment;
use crate::error::{Error, Result};
use crate::linalg::dist2;
use crate::model::{cost_matrix, NormFamily, SiteSet, WeightBounds, WeightedDataSet};

/// Per-point sensitivity lower bounds over a family of site sets.
#[derive(Debug, Clone, Serialize)]
pub struct SensitivityReport {
    pub seed: u64,
    /// Site sets evaluated, including those with zero optimal cost.
    pub site_sets: usize,
    /// Site sets skipped because the constrained optimum was zero.
    pub zero_cost: usize,
    /// `t̂(x_j)`: largest observed share of point `j` in the optimal cost.
    pub per_point: Vec<f64>,
    /// `T̂ = Σ t̂(x_j)`, a lower bound on the total sensitivity.
    pub total: f64,
    pub seconds: f64,
}

impl Report for SensitivityReport {
    fn title(&self) -> &'static str {
        "Sensitivity lower bounds"
    }

    fn passed(&self) -> bool {
        let n = self.per_point.len() as f64;
        self.per_point
            .iter()
            .all(|&t| (0.0..=1.0 + 1e-12).contains(&t))
            && self.total <= n * (1.0 + 1e-12)
    }

    fn rows(&self) -> Vec<(String, String)> {
        let max = self.per_point.iter().copied().fold(0.0, f64::max);
        vec![
            ("seed".into(), self.seed.to_string()),
            ("points".into(), self.per_point.len().to_string()),
            ("site sets".into(), self.site_sets.to_string()),
            ("zero-cost site sets".into(), self.zero_cost.to_string()),
            ("largest t̂".into(), format!("{max:.9}")),
            ("T̂ (lower bound)".into(), format!("{:.9}", self.total)),
            ("seconds".into(), format!("{:.3}", self.seconds)),
        ]
    }
}

/// Cost shares of every point in the constrained optimum for `s`; `None`
/// when that optimum is zero.
fn shares(inst: &Instance, s: &SiteSet<f64>) -> Result<Option<Vec<f64>>> {
    let sol = solve_assignment(&inst.x, s, &inst.norms, &inst.bounds)?;
    if !(sol.cost > 0.0) {
        return Ok(None);
    }
    let c = cost_matrix(&inst.x, s, &inst.norms)?;
    let n = inst.x.len();
    Ok(Some(
        (0..n)
            .map(|j| {
                let own: f64 = (0..inst.k)
                    .map(|i| sol.clustering.get(i, j) * c[i * n + j])
                    .sum();
                inst.x.weight(j) * own / sol.cost
            })
            .collect(),
    ))
}

/// Lower bounds `t̂(x_j)` from `site_trials` random site sets (half drawn
/// from the inflated bounding box, half from data points) and, per point,
/// far-site probes `{c, c + s·(x_j − c)/‖x_j − c‖, …}` with `c` the data
/// centroid and `s ∈ {1, 2R, 10R}`, `R` the data radius about `c`.
pub fn sensitivity_estimate(
    inst: &Instance,
    site_trials: usize,
    seed: u64,
) -> Result<SensitivityReport> {
    let start = Instant::now();
    let x = &inst.x;
    let (n, k, d) = (x.len(), inst.k, x.dim());
    let c = x.centroid();
    let radius = x.points().map(|p| dist2(p, &c)).fold(0.0, f64::max).sqrt();
    let mut sets: Vec<SiteSet<f64>> = Vec::new();
    let mut rng = {
        use rand::SeedableRng;
        rand_chacha::ChaCha8Rng::seed_from_u64(seed)
    };
    for t in 0..site_trials {
        if t % 2 == 0 {
            sets.push(sample_sites(x, k, &mut rng));
        } else {
            let pts: Vec<Vec<f64>> = (0..k)
                .map(|_| x.point(rng.random_range(0..n)).to_vec())
                .collect();
            sets.push(SiteSet::new(&pts)?);
        }
    }
    if k >= 2 {
        for j in 0..n {
            let rho = dist2(x.point(j), &c).sqrt();
            if rho == 0.0 {
                continue;
            }
            for scale in [1.0, 2.0 * radius, 10.0 * radius] {
                let far: Vec<f64> = (0..d)
                    .map(|a| c[a] + scale * (x.point(j)[a] - c[a]) / rho)
                    .collect();
                let mut pts = vec![c.clone(), far];
                if k > 2 {
                    pts.extend(sample_sites(x, k - 2, &mut rng).to_vecs());
                }
                sets.push(SiteSet::new(&pts)?);
            }
        }
    }
    let results: Vec<Result<Option<Vec<f64>>>> = sets.par_iter().map(|s| shares(inst, s)).collect();
    let mut per_point = vec![0.0f64; n];
    let mut zero_cost = 0;
    for r in results {
        match r? {
            Some(sh) => per_point
                .iter_mut()
                .zip(sh)
                .for_each(|(p, v)| *p = p.max(v)),
            None => zero_cost += 1,
        }
    }
    Ok(SensitivityReport {
        seed,
        site_sets: sets.len(),
        zero_cost,
        total: per_point.iter().sum(),
        per_point,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// The circle instance: `n` unit-weight points on the radius-`r` circle,
/// two clusters holding exactly `n−1` and `1` units, and for every `j₀` the
/// sites `{0, x_{j₀}/r}` under which `x_{j₀}` alone carries cost `(1−r)²`.
#[derive(Debug, Clone, Serialize)]
pub struct SensitivityExample {
    pub n: usize,
    pub r: f64,
    #[serde(skip)]
    pub instance: Instance,
    #[serde(skip)]
    pub probes: Vec<SiteSet<f64>>,
    /// `(n−1)r² + (1−r)²`.
    pub optimal_cost: f64,
    /// `(1−r)² / ((n−1)r² + (1−r)²)`.
    pub per_point_bound: f64,
    /// `n` times the per-point bound.
    pub total_bound: f64,
    /// LP optimum for each probe.
    pub lp_costs: Vec<f64>,
    pub max_relative_error: f64,
    /// Every LP optimum is integral with `x_{j₀}` alone in the second cluster.
    pub isolates_probe_point: bool,
    /// Share of `x_{j₀}` in the LP optimum for probe `j₀`.
    pub lp_shares: Vec<f64>,
}

impl SensitivityExample {
    /// Whether the LP reproduces the closed-form cost to `1e-9` relative on every probe.
    pub fn matches(&self) -> bool {
        self.max_relative_error <= 1e-9
    }
}

impl Report for SensitivityExample {
    fn title(&self) -> &'static str {
        "Circle instance"
    }

    fn passed(&self) -> bool {
        self.matches() && self.isolates_probe_point
    }

    fn rows(&self) -> Vec<(String, String)> {
        let lp_total: f64 = self.lp_shares.iter().sum();
        vec![
            ("n".into(), self.n.to_string()),
            ("r".into(), self.r.to_string()),
            (
                "closed-form optimum".into(),
                format!("{:.12}", self.optimal_cost),
            ),
            (
                "largest relative LP error".into(),
                format!("{:e}", self.max_relative_error),
            ),
            (
                "per-point bound".into(),
                format!("{:.9}", self.per_point_bound),
            ),
            ("total bound".into(), format!("{:.9}", self.total_bound)),
            ("total from LP shares".into(), format!("{lp_total:.9}")),
            (
                "probe point isolated".into(),
                self.isolates_probe_point.to_string(),
            ),
        ]
    }
}

/// Builds the circle instance and checks every probe against the LP.
pub fn sensitivity_example(n: usize, r: f64) -> Result<SensitivityExample> {
    if n < 2 {
        return Err(Error::Parameter {
            name: "n",
            value: n as f64,
        });
    }
    if !(r > 0.0 && r < 0.5) {
        return Err(Error::Parameter {
            name: "r",
            value: r,
        });
    }
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let phi = 2.0 * PI * j as f64 / n as f64;
            vec![r * phi.cos(), r * phi.sin()]
        })
        .collect();
    let x = WeightedDataSet::unweighted(&pts)?;
    let m = (n - 1) as f64;
    let bounds = WeightBounds::new(vec![m, 1.0], vec![m, 1.0])?;
    let instance = Instance::new(x, NormFamily::identity(2, 2), bounds)?;
    let probes: Vec<SiteSet<f64>> = pts
        .iter()
        .map(|p| SiteSet::new(&[vec![0.0, 0.0], vec![p[0] / r, p[1] / r]]))
        .collect::<Result<_>>()?;
    let optimal_cost = m * r * r + (1.0 - r) * (1.0 - r);
    let per_point_bound = (1.0 - r) * (1.0 - r) / optimal_cost;
    let solved: Vec<Result<(f64, bool, f64)>> = probes
        .par_iter()
        .enumerate()
        .map(|(j0, s)| {
            let sol = solve_assignment(&instance.x, s, &instance.norms, &instance.bounds)?;
            let alone = sol.clustering.is_integral(1e-12)
                && (0..n).all(|j| (sol.clustering.get(1, j) == 1.0) == (j == j0));
            let share = dist2(&pts[j0], s.site(1)) / sol.cost;
            Ok((sol.cost, alone, share))
        })
        .collect();
    let mut lp_costs = Vec::with_capacity(n);
    let mut lp_shares = Vec::with_capacity(n);
    let mut isolates = true;
    for s in solved {
        let (c, alone, share) = s?;
        lp_costs.push(c);
        lp_shares.push(share);
        isolates &= alone;
    }
    let max_relative_error = lp_costs
        .iter()
        .map(|c| (c - optimal_cost).abs() / optimal_cost)
        .fold(0.0, f64::max);
    Ok(SensitivityExample {
        n,
        r,
        instance,
        probes,
        optimal_cost,
        per_point_bound,
        total_bound: n as f64 * per_point_bound,
        lp_costs,
        max_relative_error,
        isolates_probe_point: isolates,
        lp_shares,
    })
}
