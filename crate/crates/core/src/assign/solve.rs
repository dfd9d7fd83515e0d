use serde::{Deserialize, Serialize};

use super::simplex::{FlowSolution, SimplexError, Transport};
use crate::error::{Error, Result};
use crate::model::{cost_matrix, Clustering, NormFamily, SiteSet, WeightBounds, WeightedDataSet};
use crate::scalar::Scalar;

/// Dual prices proving optimality of an assignment.
///
/// The LP is stated in the flow variables `y_ij = ξ_ij ω_j`:
/// minimise `Σ c_ij y_ij` subject to `Σ_i y_ij = ω_j` and
/// `κ⁻_i ≤ Σ_j y_ij ≤ κ⁺_i`. Its dual maximises
/// `Σ ω_j u_j + Σ κ⁻_i μ⁻_i − Σ κ⁺_i μ⁺_i` with
/// `u_j + μ⁻_i − μ⁺_i ≤ c_ij`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    /// `u_j`, one per point; equals the lower envelope `h(x_j)` of the diagram.
    pub point_prices: Vec<f64>,
    /// `ν_i = μ⁻_i − μ⁺_i`.
    pub cluster_prices: Vec<f64>,
    pub lower_prices: Vec<f64>,
    pub upper_prices: Vec<f64>,
    pub primal: f64,
    pub dual: f64,
    /// `|primal − dual|`.
    pub gap: f64,
    /// `Σ y_ij·rc_ij + Σ μ⁻(ω(C_i) − κ⁻) + Σ μ⁺(κ⁺ − ω(C_i))`.
    pub slackness_residual: f64,
    /// Largest violation of a dual constraint.
    pub dual_infeasibility: f64,
    /// Smallest reduced cost enforced on unused point/cluster pairs.
    pub margin: f64,
    pub pivots: usize,
    /// Seed of the weight perturbation, when one was needed.
    pub perturbation_seed: Option<u64>,
    pub attempts: usize,
}

impl DualCertificate {
    /// `gap / (1 + |primal|)`.
    pub fn relative_gap(&self) -> f64 {
        self.gap / (1.0 + self.primal.abs())
    }

    pub fn relative_residual(&self) -> f64 {
        self.slackness_residual / (1.0 + self.primal.abs())
    }
}

/// An optimal clustering for fixed sites together with its certificate.
#[derive(Debug, Clone)]
pub struct Assignment<T> {
    pub clustering: Clustering<T>,
    pub cost: T,
    pub certificate: DualCertificate,
}

fn check_inputs<T: Scalar>(
    x: &WeightedDataSet<T>,
    s: &SiteSet<T>,
    a: &NormFamily<T>,
    bounds: &WeightBounds<T>,
) -> Result<()> {
    let k = s.len();
    for (what, found) in [("norm family size", a.k()), ("bounds", bounds.k())] {
        if found != k {
            return Err(Error::DimensionMismatch {
                what,
                index: 0,
                expected: k,
                found,
            });
        }
    }
    bounds.check_feasible(x.total_weight())
}

/// Exact weight-constrained assignment of `x` to the sites `s`.
///
/// Returns a vertex of the transportation polytope. Without effective bounds
/// every point goes to its nearest site, ties to the lowest index.
pub fn solve_assignment<T: Scalar>(
    x: &WeightedDataSet<T>,
    s: &SiteSet<T>,
    a: &NormFamily<T>,
    bounds: &WeightBounds<T>,
) -> Result<Assignment<T>> {
    check_inputs(x, s, a, bounds)?;
    let costs: Vec<f64> = cost_matrix(x, s, a)?.into_iter().map(T::as_f64).collect();
    let weights: Vec<f64> = x.weights().iter().map(|w| w.as_f64()).collect();
    solve_costs(x, &weights, &costs, bounds, &[])
}

/// Solves with precomputed `f64` costs and LP weights (which may differ
/// slightly from `x`'s own weights). `margins` lists reduced-cost margins to
/// try, largest first, before falling back to plain optimal prices.
pub(crate) fn solve_costs<T: Scalar>(
    x: &WeightedDataSet<T>,
    weights: &[f64],
    costs: &[f64],
    bounds: &WeightBounds<T>,
    margins: &[f64],
) -> Result<Assignment<T>> {
    let n = x.len();
    let k = bounds.k();
    let lower: Vec<f64> = bounds.lower().iter().map(|v| v.as_f64()).collect();
    let upper: Vec<f64> = bounds.upper().iter().map(|v| v.as_f64()).collect();
    let total: f64 = weights.iter().sum();

    let (flow, potentials, pivots, margin) = if bounds.is_trivial(x.total_weight()) {
        let (flow, pot) = nearest_site(n, k, weights, costs);
        (flow, pot, 0, 0.0)
    } else {
        let t = Transport {
            k,
            n,
            cost: costs,
            supply: weights,
            lower: &lower,
            upper: &upper,
        };
        let sol: FlowSolution = t.solve().map_err(|e| match e {
            SimplexError::Infeasible => Error::InfeasibleBounds {
                sum_lower: lower.iter().sum(),
                total,
                sum_upper: upper.iter().sum(),
            },
            SimplexError::IterationLimit(p) => {
                Error::Solver(format!("no optimum after {p} pivots"))
            }
            SimplexError::Unbounded => Error::Solver("unbounded ratio test".into()),
        })?;
        let scale = 1.0 + sol.cost_scale;
        let chosen = margins
            .iter()
            .find_map(|&m| t.potentials(&sol, m * scale).map(|p| (p, m * scale)));
        let (pot, margin) = match chosen {
            Some(found) => found,
            None => match t.potentials(&sol, 0.0) {
                Some(p) => (p, 0.0),
                None => (sol.basis_potential.clone(), 0.0),
            },
        };
        (sol.flow, pot, sol.pivots, margin)
    };

    let xi: Vec<T> = flow
        .iter()
        .enumerate()
        .map(|(idx, &y)| T::lit(y / weights[idx % n]))
        .collect();
    let clustering = Clustering::from_truncated(k, n, xi)?;
    let certificate = certify(
        &clustering,
        weights,
        costs,
        &lower,
        &upper,
        &potentials,
        pivots,
        margin,
    );
    Ok(Assignment {
        cost: T::lit(certificate.primal),
        clustering,
        certificate,
    })
}

fn nearest_site(n: usize, k: usize, weights: &[f64], costs: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut flow = vec![0.0; k * n];
    let mut pot = vec![0.0; n + k + 1];
    for j in 0..n {
        let mut best = 0;
        for i in 1..k {
            if costs[i * n + j] < costs[best * n + j] {
                best = i;
            }
        }
        flow[best * n + j] = weights[j];
        pot[j] = -costs[best * n + j];
    }
    (flow, pot)
}

#[allow(clippy::too_many_arguments)]
fn certify<T: Scalar>(
    c: &Clustering<T>,
    weights: &[f64],
    costs: &[f64],
    lower: &[f64],
    upper: &[f64],
    pot: &[f64],
    pivots: usize,
    margin: f64,
) -> DualCertificate {
    let (k, n) = (c.k(), c.n());
    let u: Vec<f64> = (0..n).map(|j| -pot[j]).collect();
    let nu: Vec<f64> = (0..k).map(|i| pot[n + i]).collect();
    let mu_lo: Vec<f64> = nu.iter().map(|v| v.max(0.0)).collect();
    let mu_hi: Vec<f64> = nu.iter().map(|v| (-v).max(0.0)).collect();

    let mut primal = 0.0;
    let mut residual = 0.0;
    let mut infeas = 0.0f64;
    let mut cluster_w = vec![0.0; k];
    for i in 0..k {
        for j in 0..n {
            let cij = costs[i * n + j];
            let rc = cij - u[j] - nu[i];
            infeas = infeas.max(-rc);
            let y = c.get(i, j).as_f64() * weights[j];
            if y > 0.0 {
                primal += y * cij;
                residual += y * rc.abs();
                cluster_w[i] += y;
            }
        }
    }
    let mut dual: f64 = u.iter().zip(weights).map(|(a, w)| a * w).sum();
    for i in 0..k {
        dual += lower[i] * mu_lo[i];
        residual += mu_lo[i] * (cluster_w[i] - lower[i]).abs();
        if mu_hi[i] > 0.0 {
            if upper[i].is_finite() {
                dual -= upper[i] * mu_hi[i];
                residual += mu_hi[i] * (upper[i] - cluster_w[i]).abs();
            } else {
                infeas = infeas.max(mu_hi[i]);
            }
        }
    }
    DualCertificate {
        point_prices: u,
        cluster_prices: nu,
        lower_prices: mu_lo,
        upper_prices: mu_hi,
        primal,
        dual,
        gap: (primal - dual).abs(),
        slackness_residual: residual,
        dual_infeasibility: infeas.max(0.0),
        margin,
        pivots,
        perturbation_seed: None,
        attempts: 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unconstrained_nearest_with_low_index_ties() {
        let x = WeightedDataSet::<f64>::unweighted(&[vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        let s = SiteSet::new(&[vec![0.5], vec![2.0], vec![0.5]]).unwrap();
        let r = solve_assignment(
            &x,
            &s,
            &NormFamily::identity(3, 1),
            &WeightBounds::unconstrained(3),
        )
        .unwrap();
        assert_eq!(r.clustering.row(0), &[1.0, 1.0, 0.0]);
        assert_eq!(r.clustering.row(1), &[0.0, 0.0, 1.0]);
        assert!((r.cost - 1.5).abs() < 1e-12);
        assert!(r.certificate.gap < 1e-12);
    }

    #[test]
    fn bounded_certificate_closes() {
        let x = WeightedDataSet::<f64>::unweighted(&[vec![0.0], vec![0.1], vec![0.2], vec![5.0]])
            .unwrap();
        let s = SiteSet::new(&[vec![0.0], vec![5.0]]).unwrap();
        let b = WeightBounds::new(vec![2.0, 2.0], vec![2.0, 2.0]).unwrap();
        let r = solve_assignment(&x, &s, &NormFamily::identity(2, 1), &b).unwrap();
        // 0.2 must move to the far site: 4.8² = 23.04, plus 0.01
        assert!((r.cost - 23.05).abs() < 1e-9);
        assert!(r.certificate.relative_gap() < 1e-12);
        assert!(r.certificate.relative_residual() < 1e-12);
        assert_eq!(r.certificate.dual_infeasibility, 0.0);
    }

    #[test]
    fn infeasible_bounds_reported() {
        let x = WeightedDataSet::unweighted(&[vec![0.0], vec![1.0]]).unwrap();
        let s = SiteSet::new(&[vec![0.0]]).unwrap();
        let b = WeightBounds::new(vec![3.0], vec![4.0]).unwrap();
        let e = solve_assignment(&x, &s, &NormFamily::identity(1, 1), &b).unwrap_err();
        assert!(matches!(e, Error::InfeasibleBounds { .. }));
    }
}
