//! Structural checks on half-integral solutions whose weight-½ edges split
//! into edge-disjoint triangles.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{comb_lhs, Comb};
use crate::edges::{membership, ordered};
use crate::error::{invalid, Error, Result};
use crate::lp::{check_feasible, FractionalSolution};

const HALF_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangleDecomposition {
    /// Sorted vertex triples, in lexicographic order.
    pub triangles: Vec<[usize; 3]>,
}

fn is_half(w: f64) -> bool {
    (w - 0.5).abs() <= HALF_TOL
}

/// Partitions the weight-½ edges of `x` into edge-disjoint weight-½ triangles.
pub fn triangle_decompose(x: &FractionalSolution) -> Result<TriangleDecomposition> {
    if !x.is_half_integral(2.0 * HALF_TOL) {
        return invalid("solution is not half-integral");
    }
    let half: BTreeSet<(usize, usize)> = x
        .support(HALF_TOL)
        .into_iter()
        .filter(|&(_, _, w)| is_half(w))
        .map(|(i, j, _)| (i, j))
        .collect();

    fn solve(
        remaining: &mut BTreeSet<(usize, usize)>,
        n: usize,
        out: &mut Vec<[usize; 3]>,
    ) -> bool {
        let Some(&(u, v)) = remaining.iter().next() else {
            return true;
        };
        for w in 0..n {
            if w == u || w == v {
                continue;
            }
            let (e1, e2) = (ordered(u, w), ordered(v, w));
            if !(remaining.contains(&e1) && remaining.contains(&e2)) {
                continue;
            }
            remaining.remove(&(u, v));
            remaining.remove(&e1);
            remaining.remove(&e2);
            let mut tri = [u, v, w];
            tri.sort_unstable();
            out.push(tri);
            if solve(remaining, n, out) {
                return true;
            }
            out.pop();
            remaining.insert((u, v));
            remaining.insert(e1);
            remaining.insert(e2);
        }
        false
    }

    let mut remaining = half;
    let mut triangles = Vec::new();
    if !solve(&mut remaining, x.n(), &mut triangles) {
        return Err(Error::NotDecomposable(format!(
            "{} weight-1/2 edges admit no triangle partition",
            x.support(HALF_TOL).iter().filter(|e| is_half(e.2)).count()
        )));
    }
    triangles.sort_unstable();
    Ok(TriangleDecomposition { triangles })
}

/// Quantities of the violated-comb structure lemma for one comb.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombViolationReport {
    pub comb: Comb,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub violated: bool,
    /// `x(δ(H))`.
    pub handle_cut: f64,
    /// `x(δ*(H))`: edges leaving `H` that do not join `A_i` to `B_i` for any `i`.
    pub handle_star_cut: f64,
    /// `x(δ(T_i))`.
    pub tooth_cuts: Vec<f64>,
    /// `x(e(A_i, B_i))`.
    pub tooth_inner: Vec<f64>,
    /// `x(e(A_i, H ∖ A_i))`.
    pub handle_links: Vec<f64>,
    /// `x(e(B_i, X ∖ (H ∪ T_i)))`.
    pub outer_links: Vec<f64>,
    /// Conditions that fail; only filled for violated combs.
    pub failures: Vec<String>,
}

impl CombViolationReport {
    /// True when the comb is not violated or all six conditions hold.
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

fn check_structure_preconditions(x: &FractionalSolution) -> Result<()> {
    if !x.is_half_integral(2.0 * HALF_TOL) {
        return invalid("solution is not half-integral");
    }
    if !check_feasible(x, HALF_TOL).passes {
        return invalid("solution violates the Held-Karp constraints");
    }
    match triangle_decompose(x) {
        Err(Error::NotDecomposable(m)) => {
            invalid(format!("solution is not triangle-decomposable: {m}"))
        }
        other => other.map(|_| ()),
    }
}

/// Evaluates the six quantities of the violated-comb lemma and, when the comb
/// is violated, records every condition that does not hold exactly.
pub fn validate_violated_comb_structure(
    x: &FractionalSolution,
    comb: &Comb,
) -> Result<CombViolationReport> {
    check_structure_preconditions(x)?;
    let n = x.n();
    let lhs = comb_lhs(x, comb)?;
    let rhs = comb.rhs();
    let t = comb.tooth_count();
    let h = membership(n, comb.handle());
    let handle_cut = x.cut_value(&h);
    let mut tooth_cuts = Vec::with_capacity(t);
    let mut tooth_inner = Vec::with_capacity(t);
    let mut handle_links = Vec::with_capacity(t);
    let mut outer_links = Vec::with_capacity(t);
    for i in 0..t {
        let tooth = membership(n, &comb.teeth()[i]);
        let a = membership(n, &comb.tooth_inside(i));
        let b = membership(n, &comb.tooth_outside(i));
        let handle_rest: Vec<bool> = (0..n).map(|v| h[v] && !a[v]).collect();
        let beyond: Vec<bool> = (0..n).map(|v| !h[v] && !tooth[v]).collect();
        tooth_cuts.push(x.cut_value(&tooth));
        tooth_inner.push(x.between(&a, &b));
        handle_links.push(x.between(&a, &handle_rest));
        outer_links.push(x.between(&b, &beyond));
    }
    let handle_star_cut = handle_cut - tooth_inner.iter().sum::<f64>();
    let slack = lhs - rhs;
    let violated = slack < -HALF_TOL;
    let mut failures = Vec::new();
    if violated {
        let eq = |a: f64, b: f64| (a - b).abs() <= HALF_TOL;
        if !eq(handle_cut, t as f64) {
            failures.push(format!("x(δ(H)) = {handle_cut}, expected {t}"));
        }
        if !eq(handle_star_cut, 0.0) {
            failures.push(format!("x(δ*(H)) = {handle_star_cut}, expected 0"));
        }
        for i in 0..t {
            for (name, value, want) in [
                ("x(δ(T))", tooth_cuts[i], 2.0),
                ("x(e(A,B))", tooth_inner[i], 1.0),
                ("x(e(A,H∖A))", handle_links[i], 1.0),
                ("x(e(B,X∖(H∪T)))", outer_links[i], 1.0),
            ] {
                if !eq(value, want) {
                    failures.push(format!("tooth {i}: {name} = {value}, expected {want}"));
                }
            }
        }
    }
    Ok(CombViolationReport {
        comb: comb.clone(),
        lhs,
        rhs,
        slack,
        violated,
        handle_cut,
        handle_star_cut,
        tooth_cuts,
        tooth_inner,
        handle_links,
        outer_links,
        failures,
    })
}

/// Two vertices of `S` joined by a support path whose interior lies in `T ∖ S`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleWitness {
    pub u: usize,
    pub v: usize,
    /// Full path from `u` to `v`.
    pub path: Vec<usize>,
}

/// Finds the path promised by the cycle lemma for `S ⊂ T`.
///
/// Requires `x(e(u, T ∖ S)) ≤ 1` for every `u ∈ S` and `x(δ(T)) = x(δ(S)) − 1`.
/// A missing witness under these hypotheses is reported as an invariant error.
pub fn check_cycle_lemma(x: &FractionalSolution, s: &[usize], t: &[usize]) -> Result<CycleWitness> {
    let n = x.n();
    if s.iter().chain(t).any(|&v| v >= n) {
        return invalid("vertex outside the solution");
    }
    let in_s = membership(n, s);
    let in_t = membership(n, t);
    if s.is_empty() || s.iter().any(|&v| !in_t[v]) {
        return invalid("S must be a nonempty subset of T");
    }
    let rest: Vec<bool> = (0..n).map(|v| in_t[v] && !in_s[v]).collect();
    if !rest.iter().any(|&r| r) {
        return invalid("T ∖ S is empty");
    }
    for &u in s {
        let single = membership(n, &[u]);
        if x.between(&single, &rest) > 1.0 + HALF_TOL {
            return invalid(format!("x(e({u}, T ∖ S)) exceeds 1"));
        }
    }
    let (cut_s, cut_t) = (x.cut_value(&in_s), x.cut_value(&in_t));
    if (cut_s - cut_t - 1.0).abs() > HALF_TOL {
        return invalid(format!(
            "x(δ(S)) = {cut_s} and x(δ(T)) = {cut_t} do not differ by 1"
        ));
    }
    let adj = x.adjacency(HALF_TOL);
    let mut sources: Vec<usize> = s.to_vec();
    sources.sort_unstable();
    sources.dedup();
    for &u in &sources {
        let mut parent = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        for &(w, _) in &adj[u] {
            if rest[w] && parent[w] == usize::MAX {
                parent[w] = u;
                queue.push_back(w);
            }
        }
        while let Some(w) = queue.pop_front() {
            if let Some(&(v, _)) = adj[w].iter().find(|&&(v, _)| in_s[v] && v != u) {
                let mut path = vec![v, w];
                let mut cur = w;
                while parent[cur] != u {
                    cur = parent[cur];
                    path.push(cur);
                }
                path.push(u);
                path.reverse();
                return Ok(CycleWitness { u, v, path });
            }
            for &(z, _) in &adj[w] {
                if rest[z] && parent[z] == usize::MAX {
                    parent[z] = w;
                    queue.push_back(z);
                }
            }
        }
    }
    Err(Error::Invariant(
        "no path through T ∖ S joins two vertices of S".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combs::fixtures::prism;

    #[test]
    fn prism_decomposes_into_two_triangles() {
        let d = triangle_decompose(&prism()).unwrap();
        assert_eq!(d.triangles, vec![[0, 2, 4], [1, 3, 5]]);
    }

    #[test]
    fn lone_half_edge_is_not_decomposable() {
        let x = FractionalSolution::from_edges(4, &[(0, 1, 0.5), (1, 2, 1.0)]).unwrap();
        assert!(matches!(
            triangle_decompose(&x),
            Err(Error::NotDecomposable(_))
        ));
        let y = FractionalSolution::from_edges(3, &[(0, 1, 0.3)]).unwrap();
        assert!(matches!(
            triangle_decompose(&y),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn prism_comb_structure() {
        let comb = Comb::new(vec![0, 2, 4], vec![vec![0, 1], vec![2, 3], vec![4, 5]]).unwrap();
        let r = validate_violated_comb_structure(&prism(), &comb).unwrap();
        assert!(r.violated && r.holds());
        assert_eq!(r.handle_cut, 3.0);
        assert_eq!(r.handle_star_cut, 0.0);
        assert_eq!(r.tooth_cuts, vec![2.0; 3]);
        assert_eq!(r.tooth_inner, vec![1.0; 3]);
        assert_eq!(r.handle_links, vec![1.0; 3]);
        assert_eq!(r.outer_links, vec![1.0; 3]);
    }

    #[test]
    fn comb_on_tour_is_not_violated() {
        let x = FractionalSolution::from_tour(&[0, 1, 3, 2, 4, 5, 6, 7]);
        let comb = Comb::new(vec![0, 2, 4], vec![vec![0, 1], vec![2, 3], vec![4, 5]]).unwrap();
        let r = validate_violated_comb_structure(&x, &comb).unwrap();
        assert!(!r.violated && r.failures.is_empty());
    }

    #[test]
    fn structure_rejects_infeasible_input() {
        let comb = Comb::new(vec![0, 2, 4], vec![vec![0, 1], vec![2, 3], vec![4, 5]]).unwrap();
        let x = FractionalSolution::zeros(6);
        assert!(validate_violated_comb_structure(&x, &comb).is_err());
    }

    #[test]
    fn cycle_lemma_witness_on_prism() {
        let w = check_cycle_lemma(&prism(), &[0, 2, 4], &[0, 2, 4, 1, 3]).unwrap();
        assert_eq!(w.path, vec![0, 1, 3, 2]);
        assert_eq!((w.u, w.v), (0, 2));
    }

    #[test]
    fn cycle_lemma_preconditions_gate() {
        // 5 is adjacent to T only through weight already counted: cut difference is not 1
        assert!(check_cycle_lemma(&prism(), &[0, 2, 4], &[0, 2, 4, 1]).is_err());
        assert!(check_cycle_lemma(&prism(), &[0, 2, 4], &[0, 2, 4]).is_err());
        assert!(check_cycle_lemma(&prism(), &[0, 9], &[0, 2]).is_err());
    }
}
