//! Comb inequalities: representation, evaluation, enumeration, separation and
//! structural checks on half-integral solutions.

mod search;
mod structure;

use serde::{Deserialize, Serialize};

use crate::edges::membership;
use crate::error::{invalid, Error, Result};
use crate::instance::PointSet;
use crate::lp::{
    solve_relaxation, BoundResult, CutPool, EdgeFixings, FractionalSolution, Separation,
};

pub use search::{
    enumerate_combs, for_each_comb, separate_combs, CombHit, SupportGraph, MAX_SUPPORT_VERTICES,
};
pub use structure::{
    check_cycle_lemma, triangle_decompose, validate_violated_comb_structure, CombViolationReport,
    CycleWitness, TriangleDecomposition,
};

/// Violation threshold for comb inequalities.
pub const COMB_TOL: f64 = 1e-6;

#[derive(Deserialize)]
struct RawComb {
    handle: Vec<usize>,
    teeth: Vec<Vec<usize>>,
}

impl TryFrom<RawComb> for Comb {
    type Error = Error;

    fn try_from(raw: RawComb) -> Result<Self> {
        Comb::new(raw.handle, raw.teeth)
    }
}

/// A handle and an odd number (≥ 3) of pairwise disjoint teeth, each meeting
/// both the handle and its complement.
///
/// Stored canonically: every set sorted, teeth ordered by smallest vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawComb")]
pub struct Comb {
    handle: Vec<usize>,
    teeth: Vec<Vec<usize>>,
}

fn normalize(mut set: Vec<usize>) -> Vec<usize> {
    set.sort_unstable();
    set.dedup();
    set
}

impl Comb {
    pub fn new(handle: Vec<usize>, teeth: Vec<Vec<usize>>) -> Result<Comb> {
        let handle = normalize(handle);
        let mut teeth: Vec<Vec<usize>> = teeth.into_iter().map(normalize).collect();
        if handle.is_empty() {
            return invalid("comb handle is empty");
        }
        if teeth.len() < 3 || teeth.len().is_multiple_of(2) {
            return invalid(format!(
                "comb needs an odd number of teeth ≥ 3, got {}",
                teeth.len()
            ));
        }
        for tooth in &teeth {
            let inside = tooth
                .iter()
                .filter(|v| handle.binary_search(v).is_ok())
                .count();
            if inside == 0 {
                return invalid(format!("tooth {tooth:?} does not meet the handle"));
            }
            if inside == tooth.len() {
                return invalid(format!("tooth {tooth:?} lies inside the handle"));
            }
        }
        teeth.sort_unstable_by_key(|t| t[0]);
        let mut seen: Vec<usize> = teeth.iter().flatten().copied().collect();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return invalid("comb teeth overlap");
        }
        Ok(Comb { handle, teeth })
    }

    pub fn handle(&self) -> &[usize] {
        &self.handle
    }

    pub fn teeth(&self) -> &[Vec<usize>] {
        &self.teeth
    }

    pub fn tooth_count(&self) -> usize {
        self.teeth.len()
    }

    /// Right-hand side `3t + 1`.
    pub fn rhs(&self) -> f64 {
        (3 * self.teeth.len() + 1) as f64
    }

    /// `|H ∪ T_1 ∪ … ∪ T_t|`.
    pub fn size(&self) -> usize {
        let outside: usize = self
            .teeth
            .iter()
            .map(|t| {
                t.iter()
                    .filter(|v| self.handle.binary_search(v).is_err())
                    .count()
            })
            .sum();
        self.handle.len() + outside
    }

    /// `A_i = T_i ∩ H`.
    pub fn tooth_inside(&self, i: usize) -> Vec<usize> {
        self.teeth[i]
            .iter()
            .copied()
            .filter(|v| self.handle.binary_search(v).is_ok())
            .collect()
    }

    /// `B_i = T_i ∖ H`.
    pub fn tooth_outside(&self, i: usize) -> Vec<usize> {
        self.teeth[i]
            .iter()
            .copied()
            .filter(|v| self.handle.binary_search(v).is_err())
            .collect()
    }

    pub fn max_vertex(&self) -> usize {
        self.handle
            .iter()
            .chain(self.teeth.iter().flatten())
            .copied()
            .max()
            .unwrap_or(0)
    }

    pub(crate) fn check_vertices(&self, n: usize) -> Result<()> {
        if self.max_vertex() >= n {
            return invalid(format!("comb vertex {} outside 0..{n}", self.max_vertex()));
        }
        Ok(())
    }
}

/// `x(δ(H)) + Σ x(δ(T_i))`.
pub fn comb_lhs(x: &FractionalSolution, comb: &Comb) -> Result<f64> {
    let n = x.n();
    comb.check_vertices(n)?;
    let mut total = x.cut_value(&membership(n, comb.handle()));
    for tooth in comb.teeth() {
        total += x.cut_value(&membership(n, tooth));
    }
    Ok(total)
}

/// `Comb_c(X | fixings)`: Held-Karp plus every comb inequality of size at most `c`.
pub fn comb_lp(
    points: &PointSet,
    c: usize,
    fixings: &EdgeFixings,
    tol: f64,
) -> Result<BoundResult> {
    let mut pool = CutPool::new();
    solve_relaxation(
        &points.edge_costs(),
        points.len(),
        fixings,
        &mut pool,
        Separation::Combs { max_size: c },
        tol,
    )
}

#[cfg(test)]
pub(crate) mod fixtures {
    use crate::lp::FractionalSolution;

    /// Two weight-½ triangles `{0,2,4}`, `{1,3,5}` joined by the weight-1
    /// matching `0-1`, `2-3`, `4-5` (a1=0, a2=1, b1=2, b2=3, c1=4, c2=5).
    pub fn prism() -> FractionalSolution {
        FractionalSolution::from_edges(
            6,
            &[
                (0, 1, 1.0),
                (2, 3, 1.0),
                (4, 5, 1.0),
                (0, 2, 0.5),
                (2, 4, 0.5),
                (0, 4, 0.5),
                (1, 3, 0.5),
                (3, 5, 0.5),
                (1, 5, 0.5),
            ],
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::prism;
    use super::*;
    use crate::lp::{check_feasible, held_karp, CUT_TOL};

    fn prism_comb() -> Comb {
        Comb::new(vec![0, 2, 4], vec![vec![0, 1], vec![2, 3], vec![4, 5]]).unwrap()
    }

    #[test]
    fn prism_comb_is_violated() {
        let x = prism();
        assert!(check_feasible(&x, 1e-9).passes);
        let c = prism_comb();
        assert_eq!(comb_lhs(&x, &c).unwrap(), 9.0);
        assert_eq!(c.rhs(), 10.0);
        assert_eq!(c.size(), 6);
    }

    #[test]
    fn tooth_swallowed_by_handle_is_rejected() {
        let c = Comb::new(vec![0, 2, 4, 1], vec![vec![0, 1], vec![2, 3], vec![4, 5]]);
        assert!(c.is_err());
    }

    #[test]
    fn invalid_combs_rejected() {
        assert!(Comb::new(vec![0, 2], vec![vec![0, 1], vec![2, 3]]).is_err());
        assert!(Comb::new(vec![0, 2, 4], vec![vec![0, 1], vec![0, 3], vec![4, 5]]).is_err());
        assert!(Comb::new(vec![0, 2, 4], vec![vec![1, 3], vec![2, 3], vec![4, 5]]).is_err());
        assert!(Comb::new(vec![], vec![vec![1], vec![2], vec![3]]).is_err());
    }

    #[test]
    fn canonical_order_and_json() {
        let c = Comb::new(vec![4, 0, 2], vec![vec![5, 4], vec![1, 0], vec![3, 2]]).unwrap();
        assert_eq!(c, prism_comb());
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(json, r#"{"handle":[0,2,4],"teeth":[[0,1],[2,3],[4,5]]}"#);
        let back: Comb = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
        assert!(serde_json::from_str::<Comb>(r#"{"handle":[0],"teeth":[[0,1]]}"#).is_err());
    }

    #[test]
    fn comb_lp_dominates_held_karp() {
        for seed in 0..4 {
            let x = crate::instance::generate_uniform(9, 2, seed).unwrap();
            let hk = held_karp(&x, &EdgeFixings::new(), CUT_TOL).unwrap().value;
            let c6 = comb_lp(&x, 6, &EdgeFixings::new(), CUT_TOL).unwrap().value;
            let c9 = comb_lp(&x, 9, &EdgeFixings::new(), CUT_TOL).unwrap().value;
            assert!(c6 >= hk - 1e-6 && c9 >= c6 - 1e-6);
        }
    }
}
