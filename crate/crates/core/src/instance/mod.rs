//! Point sets: random instances, the two-ring gadget, dissections and approximate copies.

mod copies;
mod dissection;
mod gadget;
pub mod io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::edges::{membership, pair_count};
use crate::error::{invalid, Result};

pub use copies::{find_copies, CopyMatch, CopySpec};
pub use dissection::{dissect, Dissection};
pub use gadget::{build_gadget, GadgetMeta, INNER_RADIUS, OUTER_RADIUS};

/// Absolute tolerance for geometric equality checks.
pub const GEOMETRY_TOL: f64 = 1e-9;

/// A finite set of labelled points in `dim`-dimensional Euclidean space.
///
/// Labels are the positions `0..len()`; coordinates are stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(dim: usize, points: &[Vec<f64>]) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return invalid(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    p.len()
                ));
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(dim, coords)
    }

    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return invalid("dimension must be positive");
        }
        if !coords.len().is_multiple_of(dim) {
            return invalid("coordinate count is not a multiple of the dimension");
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return invalid("coordinates must be finite");
        }
        Ok(PointSet { dim, coords })
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        euclid(self.point(i), self.point(j))
    }

    /// Distances of all pairs, indexed by [`crate::edges::pair_index`].
    pub fn edge_costs(&self) -> Vec<f64> {
        let n = self.len();
        let mut out = Vec::with_capacity(pair_count(n));
        for i in 0..n {
            for j in i + 1..n {
                out.push(self.distance(i, j));
            }
        }
        out
    }

    /// Similarity image `λX`.
    pub fn scaled(&self, factor: f64) -> PointSet {
        PointSet {
            dim: self.dim,
            coords: self.coords.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn translated(&self, offset: &[f64]) -> Result<PointSet> {
        if offset.len() != self.dim {
            return invalid("offset dimension mismatch");
        }
        let mut coords = self.coords.clone();
        for chunk in coords.chunks_exact_mut(self.dim) {
            for (c, o) in chunk.iter_mut().zip(offset) {
                *c += o;
            }
        }
        Ok(PointSet {
            dim: self.dim,
            coords,
        })
    }

    /// Planar rotation about the origin by `angle` radians.
    pub fn rotated(&self, angle: f64) -> Result<PointSet> {
        if self.dim != 2 {
            return invalid("rotation is defined for planar point sets only");
        }
        let (s, c) = angle.sin_cos();
        let mut coords = self.coords.clone();
        for p in coords.chunks_exact_mut(2) {
            let (x, y) = (p[0], p[1]);
            p[0] = c * x - s * y;
            p[1] = s * x + c * y;
        }
        Ok(PointSet { dim: 2, coords })
    }

    /// Appends `other`; its labels are shifted by `self.len()`.
    pub fn concat(&self, other: &PointSet) -> Result<PointSet> {
        if other.dim != self.dim {
            return invalid("dimension mismatch");
        }
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        Ok(PointSet {
            dim: self.dim,
            coords,
        })
    }

    /// Points with the given labels, relabelled `0..labels.len()` in that order.
    pub fn subset(&self, labels: &[usize]) -> PointSet {
        let mut coords = Vec::with_capacity(labels.len() * self.dim);
        for &l in labels {
            coords.extend_from_slice(self.point(l));
        }
        PointSet {
            dim: self.dim,
            coords,
        }
    }
}

pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `n` i.i.d. uniform points in `[0,1]^d`, reproducible from `seed`.
pub fn generate_uniform(n: usize, d: usize, seed: u64) -> Result<PointSet> {
    if n == 0 {
        return invalid("n must be at least 1");
    }
    if d < 2 {
        return invalid("dimension must be at least 2");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = (0..n * d).map(|_| rng.gen::<f64>()).collect();
    PointSet::from_flat(d, coords)
}

/// Number of entry/exit edge pairs `|δ(S) ∩ tour| / 2` of a Hamiltonian cycle.
pub fn tour_crossing_pairs(order: &[usize], subset: &[usize]) -> Result<usize> {
    let n = order.len();
    let mask = membership(n, subset);
    let inside = mask.iter().filter(|&&b| b).count();
    if inside == 0 || inside == n {
        return invalid("subset must be nonempty and proper");
    }
    let crossings = (0..n)
        .filter(|&i| mask[order[i]] != mask[order[(i + 1) % n]])
        .count();
    Ok(crossings / 2)
}
