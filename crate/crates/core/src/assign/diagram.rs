use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::solve::{solve_costs, Assignment, DualCertificate};
use crate::error::{Error, Result};
use crate::linalg::dist2;
use crate::model::{cost_matrix, Clustering, NormFamily, SiteSet, WeightBounds, WeightedDataSet};
use crate::scalar::Scalar;

const MEMBER_TOL: f64 = 1e-9;
const PERTURB_SEED: u64 = 0x5EED_D1A6;
const PERTURB_RETRIES: usize = 5;
const MARGINS: [f64; 4] = [1e-5, 1e-6, 1e-7, 1e-8];

/// Cells `P_i = {x : g_i(x) ≤ g_ℓ(x) ∀ℓ}` of `g_i(x) = ‖x − t_i‖²_{A_i} + σ_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnisotropicDiagram<T> {
    sites: SiteSet<T>,
    sizes: Vec<T>,
    norms: NormFamily<T>,
}

impl<T: Scalar> AnisotropicDiagram<T> {
    pub fn new(sites: SiteSet<T>, sizes: Vec<T>, norms: NormFamily<T>) -> Result<Self> {
        let k = sites.len();
        for (what, found) in [("sizes", sizes.len()), ("norm family size", norms.k())] {
            if found != k {
                return Err(Error::DimensionMismatch {
                    what,
                    index: 0,
                    expected: k,
                    found,
                });
            }
        }
        if let Some(i) = sizes.iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFinite { index: i, coord: 0 });
        }
        let sep = T::lit(1e-24);
        for i in 0..k {
            for l in i + 1..k {
                if dist2(sites.site(i), sites.site(l)) <= sep {
                    return Err(Error::CoincidentSites {
                        first: i,
                        second: l,
                    });
                }
            }
        }
        Ok(Self {
            sites,
            sizes,
            norms,
        })
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn sites(&self) -> &SiteSet<T> {
        &self.sites
    }

    pub fn sizes(&self) -> &[T] {
        &self.sizes
    }

    pub fn norms(&self) -> &NormFamily<T> {
        &self.norms
    }

    /// `g_i(x)`.
    #[inline]
    pub fn g(&self, i: usize, x: &[T]) -> T {
        self.norms.dist2(i, x, self.sites.site(i)) + self.sizes[i]
    }

    /// Lower envelope `h(x) = min_i g_i(x)`.
    pub fn envelope(&self, x: &[T]) -> T {
        (0..self.k())
            .map(|i| self.g(i, x))
            .fold(T::infinity(), T::min)
    }

    /// Indices of all cells containing `x`, within the membership tolerance.
    pub fn cells_containing(&self, x: &[T]) -> Vec<usize> {
        let g: Vec<T> = (0..self.k()).map(|i| self.g(i, x)).collect();
        let h = g.iter().copied().fold(T::infinity(), T::min);
        let tol = T::tol(MEMBER_TOL) * (T::one() + h.abs());
        (0..self.k()).filter(|&i| g[i] <= h + tol).collect()
    }
}

/// How well a diagram and a clustering fit together; ordered weakest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Compatibility {
    None,
    Compatible,
    Strong,
    Strict,
}

/// Detailed outcome of [`check_compatibility`].
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityReport {
    pub class: Compatibility,
    /// A cell pair responsible for the class falling short of strict, with
    /// the number of data points involved.
    pub witness: Option<(usize, usize, usize)>,
}

/// Classifies the pair `(P, C)` on the data `x`.
pub fn check_compatibility<T: Scalar>(
    p: &AnisotropicDiagram<T>,
    c: &Clustering<T>,
    x: &WeightedDataSet<T>,
) -> Compatibility {
    compatibility_report(p, c, x).class
}

pub fn compatibility_report<T: Scalar>(
    p: &AnisotropicDiagram<T>,
    c: &Clustering<T>,
    x: &WeightedDataSet<T>,
) -> CompatibilityReport {
    let k = p.k();
    if c.k() != k || c.n() != x.len() || p.sites().dim() != x.dim() {
        return CompatibilityReport {
            class: Compatibility::None,
            witness: None,
        };
    }
    let mut strong = true;
    let mut witness = None;
    let mut shared = vec![0usize; k * k];
    for j in 0..x.len() {
        let cells = p.cells_containing(x.point(j));
        for i in 0..k {
            let inside = cells.contains(&i);
            let supported = c.get(i, j) > T::zero();
            if supported && !inside {
                let home = cells[0];
                return CompatibilityReport {
                    class: Compatibility::None,
                    witness: Some((i, home, 1)),
                };
            }
            if inside && !supported && strong {
                strong = false;
                witness = Some((c.dominant(j), i, 1));
            }
        }
        for (a, &i) in cells.iter().enumerate() {
            for &l in &cells[a + 1..] {
                shared[i * k + l] += 1;
            }
        }
    }
    if !strong {
        return CompatibilityReport {
            class: Compatibility::Compatible,
            witness,
        };
    }
    for i in 0..k {
        for l in i + 1..k {
            let s = shared[i * k + l];
            if s > 1 {
                return CompatibilityReport {
                    class: Compatibility::Strong,
                    witness: Some((i, l, s)),
                };
            }
        }
    }
    CompatibilityReport {
        class: Compatibility::Strict,
        witness: None,
    }
}

/// An optimal clustering, its certificate, and a diagram inducing it.
#[derive(Debug, Clone)]
pub struct DiagramPair<T> {
    pub clustering: Clustering<T>,
    pub diagram: AnisotropicDiagram<T>,
    pub certificate: DualCertificate,
}

/// Solves the assignment and builds a strictly compatible diagram with
/// `T = S` and sizes `σ_i = −ν_i` from the cluster prices.
///
/// Prices are recentred so that unused point/cluster pairs keep a positive
/// reduced cost. If the pair is still not strict, the weights are multiplied
/// by independent factors in `[1, 1 + 1e-9]` and the solve repeated; the
/// clustering returned then belongs to the perturbed weights.
pub fn extract_diagram<T: Scalar>(
    x: &WeightedDataSet<T>,
    s: &SiteSet<T>,
    a: &NormFamily<T>,
    bounds: &WeightBounds<T>,
) -> Result<DiagramPair<T>> {
    if a.k() != s.len() || bounds.k() != s.len() {
        return Err(Error::DimensionMismatch {
            what: "norm family size",
            index: 0,
            expected: s.len(),
            found: a.k(),
        });
    }
    bounds.check_feasible(x.total_weight())?;
    let costs: Vec<f64> = cost_matrix(x, s, a)?.into_iter().map(T::as_f64).collect();
    let base: Vec<f64> = x.weights().iter().map(|w| w.as_f64()).collect();
    let mut last = (0, 0, 0);
    for attempt in 0..=PERTURB_RETRIES {
        let (weights, seed) = if attempt == 0 {
            (base.clone(), None)
        } else {
            let seed = PERTURB_SEED.wrapping_add(attempt as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = base
                .iter()
                .map(|w| w * (1.0 + 1e-9 * rng.random::<f64>()))
                .collect();
            (w, Some(seed))
        };
        let Assignment {
            clustering,
            mut certificate,
            ..
        } = solve_costs(x, &weights, &costs, bounds, &MARGINS)?;
        certificate.perturbation_seed = seed;
        certificate.attempts = attempt + 1;
        let sizes = certificate
            .cluster_prices
            .iter()
            .map(|v| T::lit(-v))
            .collect();
        let diagram = AnisotropicDiagram::new(s.clone(), sizes, a.clone())?;
        let report = compatibility_report(&diagram, &clustering, x);
        if report.class == Compatibility::Strict {
            return Ok(DiagramPair {
                clustering,
                diagram,
                certificate,
            });
        }
        if let Some(w) = report.witness {
            last = w;
        }
    }
    Err(Error::Degenerate {
        attempts: PERTURB_RETRIES + 1,
        first: last.0,
        second: last.1,
        shared: last.2,
    })
}
