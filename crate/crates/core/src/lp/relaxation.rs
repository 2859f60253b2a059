//! Cutting-plane solver for the Held-Karp LP and its comb-augmented variant.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::mincut::{min_cut, support_components};
use super::simplex::{DualSimplex, LpModel, LpStatus, Row, Sense};
use super::solution::{BoundResult, BoundStatus, EdgeFixings, FractionalSolution};
use crate::combs::{separate_combs, Comb};
use crate::edges::{membership, pair_count, pair_index};
use crate::error::{Error, Result};
use crate::instance::PointSet;

/// Cut-violation threshold used when none is given.
pub const CUT_TOL: f64 = 1e-6;
/// Row-satisfaction tolerance for returned solutions.
const VERIFY_TOL: f64 = 1e-6;
const SUPPORT_TOL: f64 = 1e-9;

/// A valid inequality for the tour polytope kept in a [`CutPool`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cut {
    /// `x(δ(S)) ≥ 2`, stored as the sorted side containing vertex 0.
    Subtour(Vec<usize>),
    Comb(Comb),
}

impl Cut {
    /// Subtour cut for `set`, normalized to the side containing vertex 0.
    pub fn subtour(n: usize, set: &[usize]) -> Cut {
        let inside = membership(n, set);
        let side: Vec<usize> = if inside[0] {
            (0..n).filter(|&v| inside[v]).collect()
        } else {
            (0..n).filter(|&v| !inside[v]).collect()
        };
        Cut::Subtour(side)
    }

    pub fn row(&self, n: usize) -> Row {
        match self {
            Cut::Subtour(side) => {
                let inside = membership(n, side);
                let mut coeffs = Vec::new();
                for i in 0..n {
                    for j in i + 1..n {
                        if inside[i] != inside[j] {
                            coeffs.push((pair_index(n, i, j), 1.0));
                        }
                    }
                }
                Row {
                    coeffs,
                    sense: Sense::Ge,
                    rhs: 2.0,
                }
            }
            Cut::Comb(comb) => {
                let mut count = vec![0.0; pair_count(n)];
                let mut sets = vec![comb.handle()];
                sets.extend(comb.teeth().iter().map(Vec::as_slice));
                for set in sets {
                    let inside = membership(n, set);
                    for i in 0..n {
                        for j in i + 1..n {
                            if inside[i] != inside[j] {
                                count[pair_index(n, i, j)] += 1.0;
                            }
                        }
                    }
                }
                let coeffs = count
                    .into_iter()
                    .enumerate()
                    .filter(|(_, c)| *c != 0.0)
                    .collect();
                Row {
                    coeffs,
                    sense: Sense::Ge,
                    rhs: (3 * comb.teeth().len() + 1) as f64,
                }
            }
        }
    }
}

/// Cuts found so far on one instance; shared by branch-and-bound nodes.
#[derive(Clone, Debug, Default)]
pub struct CutPool {
    cuts: Vec<Cut>,
    keys: HashSet<Cut>,
}

impl CutPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    pub fn cuts(&self) -> &[Cut] {
        &self.cuts
    }

    /// Adds `cut` unless already present; reports whether it was new.
    pub fn insert(&mut self, cut: Cut) -> bool {
        if self.keys.contains(&cut) {
            return false;
        }
        self.keys.insert(cut.clone());
        self.cuts.push(cut);
        true
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Separation {
    /// Subtour elimination only: the Held-Karp LP.
    Subtour,
    /// Subtour elimination plus combs of size at most `max_size`.
    Combs { max_size: usize },
}

/// Degree equalities, pool rows and fixing bounds over the pair variables.
pub fn relaxation_model(costs: &[f64], n: usize, fixings: &EdgeFixings, pool: &CutPool) -> LpModel {
    let m = pair_count(n);
    let mut lower = vec![0.0; m];
    let mut upper = vec![1.0; m];
    for &(i, j) in &fixings.include {
        lower[pair_index(n, i, j)] = 1.0;
    }
    for &(i, j) in &fixings.exclude {
        upper[pair_index(n, i, j)] = 0.0;
    }
    let mut rows: Vec<Row> = (0..n)
        .map(|v| Row {
            coeffs: (0..n)
                .filter(|&u| u != v)
                .map(|u| (pair_index(n, u, v), 1.0))
                .collect(),
            sense: Sense::Eq,
            rhs: 2.0,
        })
        .collect();
    rows.extend(pool.cuts().iter().map(|c| c.row(n)));
    LpModel {
        objective: costs.to_vec(),
        lower,
        upper,
        rows,
    }
}

fn extract(spx: &DualSimplex, n: usize) -> FractionalSolution {
    let x = spx
        .primal()
        .into_iter()
        .map(|v| v.clamp(0.0, 1.0))
        .collect();
    FractionalSolution::from_weights(n, x).expect("primal has one entry per pair")
}

fn verify(model: &LpModel, pool: &CutPool, x: &FractionalSolution, n: usize) -> bool {
    let w = x.weights();
    let bounds_ok = w
        .iter()
        .zip(model.lower.iter().zip(&model.upper))
        .all(|(v, (l, u))| *v >= l - VERIFY_TOL && *v <= u + VERIFY_TOL);
    let degrees_ok = model.rows[..n].iter().all(|r| r.violation(w) <= VERIFY_TOL);
    let cuts_ok = pool
        .cuts()
        .iter()
        .all(|c| c.row(n).violation(w) <= VERIFY_TOL);
    bounds_ok && degrees_ok && cuts_ok
}

/// Cutting-plane loop over pair-indexed `costs` on `n` vertices.
///
/// Starts from the degree equalities, the `[0,1]` bounds (tightened by the
/// fixings) and every cut already in `pool`; alternates LP solves with
/// separation until no violated cut remains. New cuts are appended to `pool`.
pub fn solve_relaxation(
    costs: &[f64],
    n: usize,
    fixings: &EdgeFixings,
    pool: &mut CutPool,
    separation: Separation,
    tol: f64,
) -> Result<BoundResult> {
    if n < 3 {
        return Err(Error::InvalidArgument(
            "the relaxation needs at least 3 vertices".into(),
        ));
    }
    if costs.len() != pair_count(n) {
        return Err(Error::InvalidArgument(
            "cost vector length does not match n".into(),
        ));
    }
    if fixings.check(n).is_err() {
        return Ok(BoundResult::infeasible(n));
    }
    let model = relaxation_model(costs, n, fixings, pool);
    let mut spx = DualSimplex::new(&model)?;
    let mut cuts_added = 0;
    let mut rounds = 0;
    let mut rebuilt = false;
    loop {
        rounds += 1;
        if spx.solve()? == LpStatus::Infeasible {
            let mut r = BoundResult::infeasible(n);
            r.cuts_added = cuts_added;
            r.iterations = rounds;
            return Ok(r);
        }
        let x = extract(&spx, n);
        let mut found = Vec::new();
        let comps = support_components(&x, SUPPORT_TOL);
        if comps.len() > 1 {
            found.extend(comps.iter().map(|c| Cut::subtour(n, c)));
        } else {
            let (side, value) = min_cut(&x);
            if value < 2.0 - tol {
                found.push(Cut::subtour(n, &side));
            }
        }
        if found.is_empty() {
            if let Separation::Combs { max_size } = separation {
                if let Some(hit) = separate_combs(&x, max_size, tol)? {
                    found.push(Cut::Comb(hit.comb));
                }
            }
        }
        if found.is_empty() {
            if verify(&model, pool, &x, n) {
                return Ok(BoundResult {
                    value: x.value(costs),
                    solution: x,
                    cuts_added,
                    iterations: rounds,
                    status: BoundStatus::Optimal,
                });
            }
            if rebuilt {
                return Err(Error::Lp("solution drifted outside the model rows".into()));
            }
            rebuilt = true;
            spx = DualSimplex::new(&relaxation_model(costs, n, fixings, pool))?;
            continue;
        }
        let mut fresh = 0;
        for cut in found {
            if pool.insert(cut.clone()) {
                spx.add_row(&cut.row(n));
                cuts_added += 1;
                fresh += 1;
            }
        }
        if fresh == 0 {
            // A pooled cut is violated: numerical drift in the tableau.
            if rebuilt {
                return Err(Error::Lp(
                    "cutting-plane loop stalled on a pooled cut".into(),
                ));
            }
            rebuilt = true;
            spx = DualSimplex::new(&relaxation_model(costs, n, fixings, pool))?;
        }
    }
}

/// `HK(X | fixings)`: the Held-Karp bound under edge fixings.
pub fn held_karp(points: &PointSet, fixings: &EdgeFixings, tol: f64) -> Result<BoundResult> {
    let mut pool = CutPool::new();
    solve_relaxation(
        &points.edge_costs(),
        points.len(),
        fixings,
        &mut pool,
        Separation::Subtour,
        tol,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub max_degree_violation: f64,
    pub min_cut_value: f64,
    pub min_cut_set: Vec<usize>,
    pub bound_violation: f64,
    pub passes: bool,
}

/// Checks the Held-Karp constraints: degrees, subtour elimination, `[0,1]` bounds.
pub fn check_feasible(x: &FractionalSolution, tol: f64) -> FeasibilityReport {
    let n = x.n();
    let max_degree_violation = (0..n)
        .map(|v| (x.degree(v) - 2.0).abs())
        .fold(0.0, f64::max);
    let bound_violation = x
        .weights()
        .iter()
        .map(|&w| (-w).max(w - 1.0).max(0.0))
        .fold(0.0, f64::max);
    let (min_cut_set, min_cut_value) = if n >= 2 {
        min_cut(x)
    } else {
        (vec![], f64::INFINITY)
    };
    let passes =
        max_degree_violation <= tol && bound_violation <= tol && min_cut_value >= 2.0 - tol;
    FeasibilityReport {
        max_degree_violation,
        min_cut_value,
        min_cut_set,
        bound_violation,
        passes,
    }
}
