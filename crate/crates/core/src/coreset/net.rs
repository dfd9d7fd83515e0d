use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Finite direction set `Q` covering the unit sphere to within `ε₀`.
///
/// Nodes are the lattice points on the boundary of `[−1, 1]^d` with spacing
/// at most `ε₀/(2√d)`; their normalisations cover `S^{d−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonNet<T> {
    eps0: T,
    dim: usize,
    resolution: usize,
    lattice: Vec<i64>,
    directions: Vec<T>,
    units: Vec<T>,
}

/// Builds the facet-grid net for `ε₀ ∈ (0, ½]` in dimension `d ≥ 1`.
pub fn build_epsilon_net<T: Scalar>(eps0: T, d: usize) -> Result<EpsilonNet<T>> {
    if !(eps0 > T::zero() && eps0 <= T::lit(0.5)) {
        return Err(Error::Parameter {
            name: "eps0",
            value: eps0.as_f64(),
        });
    }
    if d == 0 {
        return Err(Error::Parameter {
            name: "d",
            value: 0.0,
        });
    }
    let step = eps0.as_f64() / (2.0 * (d as f64).sqrt());
    let m = if d == 1 {
        1
    } else {
        (2.0 / step).ceil() as usize
    };
    let count = (m as f64 + 1.0).powi(d as i32) - (m as f64 - 1.0).max(0.0).powi(d as i32);
    if count > 5e7 {
        return Err(Error::TooLarge(format!(
            "an ε-net with ε₀ = {eps0} in dimension {d} needs {count:.0} directions"
        )));
    }
    let mut lattice = Vec::with_capacity(count as usize * d);
    let mut idx = vec![0usize; d];
    loop {
        if idx.iter().any(|&t| t == 0 || t == m) {
            lattice.extend(idx.iter().map(|&t| 2 * t as i64 - m as i64));
        }
        let mut a = 0;
        loop {
            if a == d {
                return Ok(finish(eps0, d, m, lattice));
            }
            idx[a] += 1;
            if idx[a] <= m {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

fn finish<T: Scalar>(eps0: T, d: usize, m: usize, lattice: Vec<i64>) -> EpsilonNet<T> {
    let scale = T::of_usize(m);
    let directions: Vec<T> = lattice.iter().map(|&v| T::lit(v as f64) / scale).collect();
    let mut units = directions.clone();
    for u in units.chunks_mut(d) {
        let norm = u.iter().map(|&v| v * v).sum::<T>().sqrt();
        u.iter_mut().for_each(|v| *v = *v / norm);
    }
    EpsilonNet {
        eps0,
        dim: d,
        resolution: m,
        lattice,
        directions,
        units,
    }
}

impl<T: Scalar> EpsilonNet<T> {
    pub fn eps0(&self) -> T {
        self.eps0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.directions.len() / self.dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Grid intervals per facet edge; node `q` equals `lattice(q)/resolution`.
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Integer numerators of node `q`, each in `[−m, m]`.
    pub fn lattice(&self, q: usize) -> &[i64] {
        &self.lattice[q * self.dim..(q + 1) * self.dim]
    }

    /// Node `q` on the cube boundary.
    #[inline]
    pub fn direction(&self, q: usize) -> &[T] {
        &self.directions[q * self.dim..(q + 1) * self.dim]
    }

    /// Node `q` normalised to the unit sphere.
    #[inline]
    pub fn unit(&self, q: usize) -> &[T] {
        &self.units[q * self.dim..(q + 1) * self.dim]
    }

    /// `min_q ‖p − q/‖q‖‖₂`.
    pub fn covering_distance(&self, p: &[T]) -> T {
        (0..self.len())
            .map(|q| crate::linalg::dist2(p, self.unit(q)))
            .fold(T::infinity(), T::min)
            .sqrt()
    }
}
