use serde::Serialize;

use crate::assign::AnisotropicDiagram;
use crate::error::{Error, Result};
use crate::linalg::{dot, SymMatrix};
use crate::model::{NormFamily, SiteSet};

const COEF_TOL: f64 = 1e-10;

/// A line `p + t·u` cut into maximal open intervals on which the set of
/// cells attaining the lower envelope is constant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dissection {
    /// Interior breakpoints, increasing.
    pub breakpoints: Vec<f64>,
    /// Minimising cells on each interval; one more entry than `breakpoints`.
    pub winners: Vec<Vec<usize>>,
}

impl Dissection {
    pub fn interval_count(&self) -> usize {
        self.winners.len()
    }

    /// Index of the interval containing parameter `t`; breakpoints belong to
    /// the interval on their right.
    pub fn interval_of(&self, t: f64) -> usize {
        self.breakpoints.partition_point(|&b| b <= t)
    }

    pub fn label_at(&self, t: f64) -> &[usize] {
        &self.winners[self.interval_of(t)]
    }
}

/// `g_i(p + t·u) = a t² + b t + c`.
fn restrict(d: &AnisotropicDiagram<f64>, i: usize, p: &[f64], u: &[f64]) -> [f64; 3] {
    let m = d.norms().matrix(i);
    let w: Vec<f64> = p
        .iter()
        .zip(d.sites().site(i))
        .map(|(a, b)| a - b)
        .collect();
    let mu = m.apply(u);
    [
        dot(u, &mu),
        2.0 * dot(&w, &mu),
        m.quad_form(&w) + d.sizes()[i],
    ]
}

fn eval(q: &[f64; 3], t: f64) -> f64 {
    (q[0] * t + q[1]) * t + q[2]
}

fn same(p: &[f64; 3], q: &[f64; 3]) -> bool {
    p.iter()
        .zip(q)
        .all(|(a, b)| (a - b).abs() <= COEF_TOL * (1.0 + a.abs().max(b.abs())))
}

/// Real roots of `a t² + b t + c`, coefficients treated as zero below `tol`.
fn roots(a: f64, b: f64, c: f64, tol: f64) -> Vec<f64> {
    if a.abs() <= tol {
        return if b.abs() > tol {
            vec![-c / b]
        } else {
            Vec::new()
        };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / a, c / q]
}

/// Dissects the line `p + t·u` by the cells of `d`.
///
/// Candidate breakpoints are the real roots of every pairwise difference
/// `g_i − g_ℓ` along the line; restrictions equal to within `1e-10` are
/// treated as identical and share their intervals.
pub fn dissect_line(d: &AnisotropicDiagram<f64>, p: &[f64], u: &[f64]) -> Result<Dissection> {
    let dim = d.sites().dim();
    if p.len() != dim || u.len() != dim {
        return Err(Error::DimensionMismatch {
            what: "line",
            index: 0,
            expected: dim,
            found: p.len().min(u.len()),
        });
    }
    if dot(u, u) == 0.0 {
        return Err(Error::Parameter {
            name: "direction",
            value: 0.0,
        });
    }
    let k = d.k();
    let q: Vec<[f64; 3]> = (0..k).map(|i| restrict(d, i, p, u)).collect();
    let mut cuts = Vec::new();
    for i in 0..k {
        for l in i + 1..k {
            if same(&q[i], &q[l]) {
                continue;
            }
            let diff = [q[i][0] - q[l][0], q[i][1] - q[l][1], q[i][2] - q[l][2]];
            let scale = 1.0 + q[i].iter().chain(&q[l]).fold(0.0f64, |m, v| m.max(v.abs()));
            cuts.extend(roots(diff[0], diff[1], diff[2], COEF_TOL * scale));
        }
    }
    cuts.retain(|t| t.is_finite());
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));

    let winners_at = |t: f64| -> Vec<usize> {
        let vals: Vec<f64> = q.iter().map(|qi| eval(qi, t)).collect();
        let mut best = 0;
        for i in 1..k {
            if vals[i] < vals[best] {
                best = i;
            }
        }
        (0..k).filter(|&i| same(&q[i], &q[best])).collect()
    };
    let mut probes = Vec::with_capacity(cuts.len() + 1);
    match (cuts.first(), cuts.last()) {
        (Some(&lo), Some(&hi)) => {
            probes.push(lo - 1.0 - lo.abs());
            probes.extend(cuts.windows(2).map(|w| 0.5 * (w[0] + w[1])));
            probes.push(hi + 1.0 + hi.abs());
        }
        _ => probes.push(0.0),
    }
    let mut breakpoints = Vec::new();
    let mut winners: Vec<Vec<usize>> = Vec::new();
    for (idx, &t) in probes.iter().enumerate() {
        let w = winners_at(t);
        if winners.last() == Some(&w) {
            continue;
        }
        if idx > 0 {
            breakpoints.push(cuts[idx - 1]);
        }
        winners.push(w);
    }
    Ok(Dissection {
        breakpoints,
        winners,
    })
}

/// A `k`-cell diagram in the plane whose restriction to the `x`-axis visits
/// the cells in the order `0, 1, …, k−1, …, 1, 0`.
///
/// Cell `i` has site `(0, i)`, matrix `diag(4^i, 1)` and size `−i − i²`, so
/// `g_i(t, 0) = 4^i t² − i`.
pub fn nested_parabola_diagram(k: usize) -> Result<AnisotropicDiagram<f64>> {
    if k == 0 {
        return Err(Error::Parameter {
            name: "k",
            value: 0.0,
        });
    }
    let sites: Vec<Vec<f64>> = (0..k).map(|i| vec![0.0, i as f64]).collect();
    let mats = (0..k)
        .map(|i| SymMatrix::diagonal(&[4f64.powi(i as i32), 1.0]))
        .collect();
    let sizes = (0..k).map(|i| -(i as f64) - (i * i) as f64).collect();
    AnisotropicDiagram::new(SiteSet::new(&sites)?, sizes, NormFamily::new(mats)?)
}
