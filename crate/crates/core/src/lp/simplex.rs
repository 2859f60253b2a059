//! Dense bounded-variable simplex.
//!
//! Each row `a·x (≤|≥|=) b` gets a logical variable `s = a·x` whose bounds carry
//! the sense and right-hand side, so the all-logical basis is always available.
//! With every structural variable boxed, placing each nonbasic variable at the
//! bound matching the sign of its cost makes that basis dual feasible, and the
//! dual simplex method runs without a phase one. Added rows and bound changes
//! keep dual feasibility, so the same tableau is reused across cutting-plane
//! rounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FEAS_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const MAX_ITERATIONS: usize = 200_000;
/// Pivots without dual objective progress before switching to the smallest-index rule.
const STALL_LIMIT: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.sense {
            Sense::Le => (act - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - act).max(0.0),
            Sense::Eq => (act - self.rhs).abs(),
        }
    }
}

/// `min c·x` subject to `rows` and `lower ≤ x ≤ upper`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LpModel {
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Row>,
}

impl LpModel {
    pub fn var_count(&self) -> usize {
        self.objective.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::Lp("bound vectors do not match the objective".into()));
        }
        for j in 0..n {
            if !self.lower[j].is_finite() || !self.upper[j].is_finite() {
                return Err(Error::Lp(format!("variable {j} is not boxed")));
            }
            if !self.objective[j].is_finite() {
                return Err(Error::Lp(format!(
                    "objective coefficient {j} is not finite"
                )));
            }
        }
        for (r, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(Error::Lp(format!(
                    "row {r} has a non-finite right-hand side"
                )));
            }
            if row.coeffs.iter().any(|&(j, a)| j >= n || !a.is_finite()) {
                return Err(Error::Lp(format!("row {r} references an invalid column")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub x: Vec<f64>,
    pub iterations: usize,
}

fn row_bounds(row: &Row) -> (f64, f64) {
    match row.sense {
        Sense::Le => (f64::NEG_INFINITY, row.rhs),
        Sense::Ge => (row.rhs, f64::INFINITY),
        Sense::Eq => (row.rhs, row.rhs),
    }
}

pub(crate) struct DualSimplex {
    structurals: usize,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    tab: Vec<Vec<f64>>,
    basis: Vec<usize>,
    row_of: Vec<Option<usize>>,
    value: Vec<f64>,
    reduced: Vec<f64>,
    pub iterations: usize,
}

impl DualSimplex {
    pub fn new(model: &LpModel) -> Result<Self> {
        model.validate()?;
        let n = model.var_count();
        let mut spx = DualSimplex {
            structurals: n,
            cost: model.objective.clone(),
            lower: model.lower.clone(),
            upper: model.upper.clone(),
            tab: Vec::new(),
            basis: Vec::new(),
            row_of: vec![None; n],
            value: vec![0.0; n],
            reduced: model.objective.clone(),
            iterations: 0,
        };
        for j in 0..n {
            spx.value[j] = spx.resting_value(j);
        }
        for row in &model.rows {
            spx.add_row(row);
        }
        Ok(spx)
    }

    fn ncols(&self) -> usize {
        self.cost.len()
    }

    /// Bound a nonbasic variable sits at to stay dual feasible.
    fn resting_value(&self, j: usize) -> f64 {
        let (l, u) = (self.lower[j], self.upper[j]);
        if l == u {
            l
        } else if self.reduced[j] >= 0.0 {
            if l.is_finite() {
                l
            } else {
                u
            }
        } else if u.is_finite() {
            u
        } else {
            l
        }
    }

    pub fn add_row(&mut self, row: &Row) {
        let slack = self.ncols();
        for r in &mut self.tab {
            r.push(0.0);
        }
        let mut new_row = vec![0.0; slack + 1];
        for &(j, a) in &row.coeffs {
            new_row[j] -= a;
        }
        // Eliminate basic structural columns so the row is expressed in nonbasics.
        for (i, &b) in self.basis.iter().enumerate() {
            let coef = -new_row[b];
            if coef != 0.0 {
                for (x, t) in new_row.iter_mut().zip(&self.tab[i]) {
                    *x += coef * t;
                }
                new_row[b] = 0.0;
            }
        }
        new_row[slack] = 1.0;
        let (l, u) = row_bounds(row);
        let activity = row.activity(&self.value);
        self.cost.push(0.0);
        self.lower.push(l);
        self.upper.push(u);
        self.reduced.push(0.0);
        self.value.push(activity);
        self.row_of.push(Some(self.tab.len()));
        self.basis.push(slack);
        self.tab.push(new_row);
    }

    #[cfg(test)]
    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.lower[j] = lower;
        self.upper[j] = upper;
        if self.row_of[j].is_none() {
            let target = self.resting_value(j);
            self.shift_nonbasic(j, target - self.value[j]);
        }
    }

    #[cfg(test)]
    fn shift_nonbasic(&mut self, j: usize, delta: f64) {
        if delta == 0.0 {
            return;
        }
        for (i, &b) in self.basis.iter().enumerate() {
            let t = self.tab[i][j];
            if t != 0.0 {
                self.value[b] -= t * delta;
            }
        }
        self.value[j] += delta;
    }

    pub fn objective(&self) -> f64 {
        (0..self.structurals)
            .map(|j| self.cost[j] * self.value[j])
            .sum()
    }

    pub fn primal(&self) -> Vec<f64> {
        self.value[..self.structurals].to_vec()
    }

    fn infeasibility(&self, var: usize) -> f64 {
        let v = self.value[var];
        (self.lower[var] - v).max(v - self.upper[var]).max(0.0)
    }

    pub fn solve(&mut self) -> Result<LpStatus> {
        let mut stalled = 0usize;
        let mut last_obj = f64::NEG_INFINITY;
        loop {
            if self.iterations >= MAX_ITERATIONS {
                return Err(Error::Lp("iteration limit reached".into()));
            }
            let bland = stalled >= STALL_LIMIT;
            let mut leave: Option<(usize, f64)> = None;
            for (r, &b) in self.basis.iter().enumerate() {
                let inf = self.infeasibility(b);
                if inf <= FEAS_TOL {
                    continue;
                }
                let better = match leave {
                    None => true,
                    Some((lr, linf)) => {
                        if bland {
                            b < self.basis[lr]
                        } else {
                            inf > linf
                        }
                    }
                };
                if better {
                    leave = Some((r, inf));
                }
            }
            let Some((r, _)) = leave else {
                return Ok(LpStatus::Optimal);
            };
            let p = self.basis[r];
            let increase = self.value[p] < self.lower[p];
            let target = if increase {
                self.lower[p]
            } else {
                self.upper[p]
            };

            let mut enter: Option<(usize, f64, f64)> = None;
            for j in 0..self.ncols() {
                if self.row_of[j].is_some() || self.lower[j] == self.upper[j] {
                    continue;
                }
                let alpha = self.tab[r][j];
                if alpha.abs() <= PIVOT_TOL {
                    continue;
                }
                let at_lower = self.value[j] <= self.lower[j];
                let eligible = match (increase, at_lower) {
                    (true, true) => alpha < 0.0,
                    (true, false) => alpha > 0.0,
                    (false, true) => alpha > 0.0,
                    (false, false) => alpha < 0.0,
                };
                if !eligible {
                    continue;
                }
                let ratio = self.reduced[j].abs() / alpha.abs();
                let better = match enter {
                    None => true,
                    Some((_, br, ba)) => {
                        if ratio < br - DUAL_TOL {
                            true
                        } else if ratio <= br + DUAL_TOL {
                            !bland && alpha.abs() > ba
                        } else {
                            false
                        }
                    }
                };
                if better {
                    enter = Some((j, ratio, alpha.abs()));
                }
            }
            let Some((q, _, _)) = enter else {
                return Ok(LpStatus::Infeasible);
            };
            self.pivot(r, q, target);
            self.iterations += 1;
            let obj = self.objective();
            if obj > last_obj + 1e-12 {
                stalled = 0;
                last_obj = obj;
            } else {
                stalled += 1;
            }
        }
    }

    fn pivot(&mut self, r: usize, q: usize, target: f64) {
        let p = self.basis[r];
        let alpha = self.tab[r][q];
        let delta = (self.value[p] - target) / alpha;
        for (i, &b) in self.basis.iter().enumerate() {
            let t = self.tab[i][q];
            if t != 0.0 {
                self.value[b] -= t * delta;
            }
        }
        self.value[q] += delta;
        self.value[p] = target;

        let inv = 1.0 / alpha;
        for x in self.tab[r].iter_mut() {
            *x *= inv;
        }
        let pivot_row = std::mem::take(&mut self.tab[r]);
        for (i, row) in self.tab.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[q];
            if f != 0.0 {
                for (x, pr) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * pr;
                }
                row[q] = 0.0;
            }
        }
        let dq = self.reduced[q];
        if dq != 0.0 {
            for (d, pr) in self.reduced.iter_mut().zip(&pivot_row) {
                *d -= dq * pr;
            }
        }
        self.reduced[q] = 0.0;
        self.tab[r] = pivot_row;
        self.basis[r] = q;
        self.row_of[q] = Some(r);
        self.row_of[p] = None;
    }
}

/// Solves `model` from the all-logical basis.
pub fn solve_lp(model: &LpModel) -> Result<LpSolution> {
    let mut spx = DualSimplex::new(model)?;
    let status = spx.solve()?;
    let x = spx.primal();
    Ok(LpSolution {
        status,
        objective: if status == LpStatus::Optimal {
            spx.objective()
        } else {
            f64::INFINITY
        },
        x,
        iterations: spx.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(coeffs: &[(usize, f64)], sense: Sense, rhs: f64) -> Row {
        Row {
            coeffs: coeffs.to_vec(),
            sense,
            rhs,
        }
    }

    #[test]
    fn triangle_degree_system_has_unique_solution() {
        // pairs 01, 02, 12
        let model = LpModel {
            objective: vec![1.0, 2.0, 3.0],
            lower: vec![0.0; 3],
            upper: vec![1.0; 3],
            rows: vec![
                row(&[(0, 1.0), (1, 1.0)], Sense::Eq, 2.0),
                row(&[(0, 1.0), (2, 1.0)], Sense::Eq, 2.0),
                row(&[(1, 1.0), (2, 1.0)], Sense::Eq, 2.0),
            ],
        };
        let sol = solve_lp(&model).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        for v in &sol.x {
            assert!((v - 1.0).abs() < 1e-9);
        }
        assert!((sol.objective - 6.0).abs() < 1e-9);
    }

    #[test]
    fn small_textbook_lp() {
        // max 3a + 5b st a ≤ 4, 2b ≤ 12, 3a + 2b ≤ 18 → (2, 6), value 36
        let model = LpModel {
            objective: vec![-3.0, -5.0],
            lower: vec![0.0, 0.0],
            upper: vec![100.0, 100.0],
            rows: vec![
                row(&[(0, 1.0)], Sense::Le, 4.0),
                row(&[(1, 2.0)], Sense::Le, 12.0),
                row(&[(0, 3.0), (1, 2.0)], Sense::Le, 18.0),
            ],
        };
        let sol = solve_lp(&model).unwrap();
        assert!((sol.objective + 36.0).abs() < 1e-9);
        assert!((sol.x[0] - 2.0).abs() < 1e-9 && (sol.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_system_is_reported() {
        let model = LpModel {
            objective: vec![1.0, 1.0],
            lower: vec![0.0, 0.0],
            upper: vec![1.0, 1.0],
            rows: vec![row(&[(0, 1.0), (1, 1.0)], Sense::Ge, 3.0)],
        };
        assert_eq!(solve_lp(&model).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unboxed_variables_are_rejected() {
        let model = LpModel {
            objective: vec![1.0],
            lower: vec![0.0],
            upper: vec![f64::INFINITY],
            rows: vec![],
        };
        assert!(solve_lp(&model).is_err());
    }

    #[test]
    fn warm_start_after_added_row_and_bound_change() {
        let model = LpModel {
            objective: vec![1.0, 1.0, 1.0],
            lower: vec![0.0; 3],
            upper: vec![1.0; 3],
            rows: vec![row(&[(0, 1.0), (1, 1.0), (2, 1.0)], Sense::Ge, 1.5)],
        };
        let mut spx = DualSimplex::new(&model).unwrap();
        assert_eq!(spx.solve().unwrap(), LpStatus::Optimal);
        assert!((spx.objective() - 1.5).abs() < 1e-9);
        spx.add_row(&row(&[(0, 1.0)], Sense::Ge, 1.0));
        assert_eq!(spx.solve().unwrap(), LpStatus::Optimal);
        assert!((spx.objective() - 1.5).abs() < 1e-9);
        spx.set_bounds(1, 1.0, 1.0);
        assert_eq!(spx.solve().unwrap(), LpStatus::Optimal);
        assert!((spx.objective() - 2.0).abs() < 1e-9);
        let x = spx.primal();
        assert!((x[0] - 1.0).abs() < 1e-9 && (x[1] - 1.0).abs() < 1e-9);
    }
}
