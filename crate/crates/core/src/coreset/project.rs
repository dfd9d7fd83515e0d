use rayon::prelude::*;

use super::net::EpsilonNet;
use crate::error::{Error, Result};
use crate::linalg::{dist2, dot};
use crate::model::{centroid_and_weight, Clustering, WeightedDataSet};
use crate::scalar::Scalar;

/// Lines `ĉ + ℝq`, one per net direction, through an approximate centroid.
#[derive(Debug, Clone, PartialEq)]
pub struct Pencil<T> {
    pub vertex: Vec<T>,
    /// Approximate cluster the vertex belongs to.
    pub cluster: usize,
    /// Global id of this pencil's first line; line `q` has id `first_line + q`.
    pub first_line: usize,
    /// Directions of the lines, indices into the net.
    pub lines: Vec<usize>,
}

/// Output of [`project_to_pencils`].
#[derive(Debug, Clone)]
pub struct Projection<T> {
    /// `X̄`, same weights and order as the input.
    pub points: WeightedDataSet<T>,
    /// Global line id of each projected point.
    pub line: Vec<usize>,
    /// Signed position `t` along the unit direction, measured from the vertex.
    pub param: Vec<T>,
    pub pencils: Vec<Pencil<T>>,
    /// `Σ ω_j ‖x_j − x̄_j‖²₂`.
    pub movement: T,
    /// `|𝓛|`.
    pub line_count: usize,
}

impl<T: Scalar> Projection<T> {
    /// Pencil and net direction of a global line id.
    pub fn line_parts(&self, line: usize, net_len: usize) -> (usize, usize) {
        (line / net_len, line % net_len)
    }
}

/// Projects each point orthogonally onto the nearest line of its own
/// cluster's pencil (lowest line index on ties). Void clusters get no pencil.
pub fn project_to_pencils<T: Scalar>(
    x: &WeightedDataSet<T>,
    approx: &Clustering<T>,
    net: &EpsilonNet<T>,
) -> Result<Projection<T>> {
    if net.dim() != x.dim() || approx.n() != x.len() {
        return Err(Error::DimensionMismatch {
            what: "net",
            index: 0,
            expected: x.dim(),
            found: net.dim(),
        });
    }
    let q_len = net.len();
    let mut pencil_of = vec![usize::MAX; approx.k()];
    let mut pencils = Vec::new();
    for i in 0..approx.k() {
        let (vertex, w) = centroid_and_weight(x, approx, i)?;
        if w > T::zero() {
            pencil_of[i] = pencils.len();
            pencils.push(Pencil {
                vertex,
                cluster: i,
                first_line: pencils.len() * q_len,
                lines: (0..q_len).collect(),
            });
        }
    }
    let d = x.dim();
    let placed: Vec<(usize, T, Vec<T>)> = (0..x.len())
        .into_par_iter()
        .map(|j| {
            let pencil = &pencils[pencil_of[approx.dominant(j)]];
            let u: Vec<T> = x
                .point(j)
                .iter()
                .zip(&pencil.vertex)
                .map(|(&a, &b)| a - b)
                .collect();
            let mut best = (0usize, dot(&u, net.unit(0)));
            for q in 1..q_len {
                let t = dot(&u, net.unit(q));
                if t.abs() > best.1.abs() {
                    best = (q, t);
                }
            }
            let (q, t) = best;
            let bar: Vec<T> = (0..d)
                .map(|a| pencil.vertex[a] + t * net.unit(q)[a])
                .collect();
            (pencil.first_line + q, t, bar)
        })
        .collect();
    let mut coords = Vec::with_capacity(x.len() * d);
    let mut line = Vec::with_capacity(x.len());
    let mut param = Vec::with_capacity(x.len());
    let mut movement = T::zero();
    for (j, (l, t, bar)) in placed.into_iter().enumerate() {
        movement = movement + x.weight(j) * dist2(x.point(j), &bar);
        coords.extend(bar);
        line.push(l);
        param.push(t);
    }
    let line_count = pencils.len() * q_len;
    Ok(Projection {
        points: WeightedDataSet::from_flat(d, coords, x.weights().to_vec())?,
        line,
        param,
        pencils,
        movement,
        line_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coreset::build_epsilon_net;

    #[test]
    fn point_on_a_line_does_not_move() {
        let net = build_epsilon_net(0.25, 2).unwrap();
        let u = net.unit(5).to_vec();
        let pts: Vec<Vec<f64>> = [-1.0, 1.0, 3.0, -3.0]
            .iter()
            .map(|&t| vec![t * u[0], t * u[1]])
            .collect();
        let x = WeightedDataSet::unweighted(&pts).unwrap();
        let c = Clustering::from_labels(1, &[0, 0, 0, 0]).unwrap();
        let p = project_to_pencils(&x, &c, &net).unwrap();
        assert!(p.movement < 1e-24);
        assert!(dist2(p.points.point(2), &pts[2]) < 1e-24);
    }

    #[test]
    fn projected_distance_is_r_sin_theta() {
        // vertex at the origin (symmetric pair), probe point at angle θ off the x-axis
        let theta: f64 = 0.03;
        let r = 2.0;
        let probe = vec![r * theta.cos(), r * theta.sin()];
        let x = WeightedDataSet::new(
            &[
                vec![-1e3, 0.0],
                vec![1e3, 0.0],
                probe.clone(),
                vec![-probe[0], -probe[1]],
            ],
            vec![1.0, 1.0, 1e-12, 1e-12],
        )
        .unwrap();
        let c = Clustering::from_labels(1, &[0, 0, 0, 0]).unwrap();
        let net = build_epsilon_net(0.1, 2).unwrap();
        let p = project_to_pencils(&x, &c, &net).unwrap();
        let moved = dist2(&probe, p.points.point(2)).sqrt();
        // the offset is r·sin of the angle between the probe and its line
        let q = p.line[2] % net.len();
        let u = net.unit(q);
        let angle = (u[1] / u[0]).atan().abs();
        assert!((moved - r * (theta - angle).abs().sin()).abs() < 1e-9);
        assert!(moved <= net.eps0() * r + 1e-12);
    }
}
