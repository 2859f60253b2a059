use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::edges::{ordered, pair_count, pair_index};
use crate::error::{invalid, Result};

/// Edge weights `x_{ij}` over all unordered pairs of `0..n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractionalSolution {
    n: usize,
    weight: Vec<f64>,
}

impl FractionalSolution {
    pub fn zeros(n: usize) -> Self {
        FractionalSolution {
            n,
            weight: vec![0.0; pair_count(n)],
        }
    }

    pub fn from_weights(n: usize, weight: Vec<f64>) -> Result<Self> {
        if weight.len() != pair_count(n) {
            return invalid("weight vector length does not match n(n-1)/2");
        }
        Ok(FractionalSolution { n, weight })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut x = Self::zeros(n);
        for &(i, j, w) in edges {
            if i == j || i >= n || j >= n {
                return invalid(format!(
                    "edge ({i}, {j}) is not a pair of distinct vertices"
                ));
            }
            x.set(i, j, w);
        }
        Ok(x)
    }

    /// Incidence vector of the cycle visiting `order`.
    pub fn from_tour(order: &[usize]) -> Self {
        let n = order.len();
        let mut x = Self::zeros(n);
        for i in 0..n {
            let (a, b) = (order[i], order[(i + 1) % n]);
            if a != b {
                x.set(a, b, x.get(a, b) + 1.0);
            }
        }
        x
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &[f64] {
        &self.weight
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            self.weight[pair_index(self.n, i, j)]
        }
    }

    pub fn set(&mut self, i: usize, j: usize, w: f64) {
        let k = pair_index(self.n, i, j);
        self.weight[k] = w;
    }

    /// Edges with weight above `tol`, as `(i, j, w)` with `i < j`.
    pub fn support(&self, tol: f64) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        let mut k = 0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                let w = self.weight[k];
                if w > tol {
                    out.push((i, j, w));
                }
                k += 1;
            }
        }
        out
    }

    pub fn adjacency(&self, tol: f64) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (i, j, w) in self.support(tol) {
            adj[i].push((j, w));
            adj[j].push((i, w));
        }
        adj
    }

    pub fn degree(&self, v: usize) -> f64 {
        (0..self.n)
            .filter(|&u| u != v)
            .map(|u| self.get(u, v))
            .sum()
    }

    /// `Σ c_e x_e` for pair-indexed costs.
    pub fn value(&self, costs: &[f64]) -> f64 {
        self.weight.iter().zip(costs).map(|(w, c)| w * c).sum()
    }

    /// `x(δ(S))` for a membership mask.
    pub fn cut_value(&self, inside: &[bool]) -> f64 {
        let mut total = 0.0;
        let mut k = 0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                if inside[i] != inside[j] {
                    total += self.weight[k];
                }
                k += 1;
            }
        }
        total
    }

    /// `x(e(A, B))` for disjoint masks.
    pub fn between(&self, a: &[bool], b: &[bool]) -> f64 {
        let mut total = 0.0;
        let mut k = 0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                if (a[i] && b[j]) || (a[j] && b[i]) {
                    total += self.weight[k];
                }
                k += 1;
            }
        }
        total
    }

    /// True when every weight is within `tol` of a multiple of ½.
    pub fn is_half_integral(&self, tol: f64) -> bool {
        self.weight
            .iter()
            .all(|w| ((2.0 * w).round() - 2.0 * w).abs() <= tol)
    }

    /// True when every weight is within `tol` of 0 or 1.
    pub fn is_integral(&self, tol: f64) -> bool {
        self.weight
            .iter()
            .all(|w| w.abs() <= tol || (w - 1.0).abs() <= tol)
    }
}

/// Edges forced to weight 1 (`include`) or 0 (`exclude`).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeFixings {
    pub include: BTreeSet<(usize, usize)>,
    pub exclude: BTreeSet<(usize, usize)>,
}

impl EdgeFixings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn include(mut self, i: usize, j: usize) -> Self {
        self.include.insert(ordered(i, j));
        self
    }

    pub fn exclude(mut self, i: usize, j: usize) -> Self {
        self.exclude.insert(ordered(i, j));
        self
    }

    pub fn is_empty(&self) -> bool {
        self.include.is_empty() && self.exclude.is_empty()
    }

    /// Checks structural consistency; a failure means no tour respects the fixings.
    pub fn check(&self, n: usize) -> std::result::Result<(), String> {
        let mut degree = vec![0usize; n];
        let mut excluded = vec![0usize; n];
        for &(i, j) in self.include.iter().chain(&self.exclude) {
            if i >= j || j >= n {
                return Err(format!(
                    "fixed edge ({i}, {j}) is not a canonical pair on {n} vertices"
                ));
            }
        }
        for e in &self.include {
            if self.exclude.contains(e) {
                return Err(format!("edge {e:?} is both included and excluded"));
            }
            degree[e.0] += 1;
            degree[e.1] += 1;
        }
        for e in &self.exclude {
            excluded[e.0] += 1;
            excluded[e.1] += 1;
        }
        if let Some(v) = (0..n).find(|&v| degree[v] > 2) {
            return Err(format!("vertex {v} has {} included edges", degree[v]));
        }
        if n >= 3 {
            if let Some(v) = (0..n).find(|&v| excluded[v] > n - 3) {
                return Err(format!("vertex {v} has {} excluded edges", excluded[v]));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundStatus {
    Optimal,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub value: f64,
    pub solution: FractionalSolution,
    pub cuts_added: usize,
    pub iterations: usize,
    pub status: BoundStatus,
}

impl BoundResult {
    pub(crate) fn infeasible(n: usize) -> Self {
        BoundResult {
            value: f64::INFINITY,
            solution: FractionalSolution::zeros(n),
            cuts_added: 0,
            iterations: 0,
            status: BoundStatus::Infeasible,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == BoundStatus::Optimal
    }
}
