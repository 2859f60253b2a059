//! Enumeration and separation of combs whose handle and teeth induce connected
//! subgraphs of a support graph.

use std::cmp::Ordering;

use rayon::prelude::*;

use super::Comb;
use crate::error::{Error, Result};
use crate::lp::FractionalSolution;

/// Largest vertex count the bitmask search supports.
pub const MAX_SUPPORT_VERTICES: usize = 128;
const SUPPORT_TOL: f64 = 1e-9;
const TIE_TOL: f64 = 1e-9;

/// Undirected graph on at most 128 vertices stored as neighbour bitmasks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportGraph {
    n: usize,
    adj: Vec<u128>,
}

impl SupportGraph {
    pub fn new(n: usize) -> Result<Self> {
        if n > MAX_SUPPORT_VERTICES {
            return Err(Error::SizeLimit {
                n,
                limit: MAX_SUPPORT_VERTICES,
            });
        }
        Ok(SupportGraph { n, adj: vec![0; n] })
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut g = Self::new(n)?;
        for i in 0..n {
            for j in i + 1..n {
                g.add_edge(i, j);
            }
        }
        Ok(g)
    }

    /// Edges of `x` with weight above `tol`.
    pub fn from_solution(x: &FractionalSolution, tol: f64) -> Result<Self> {
        let mut g = Self::new(x.n())?;
        for (i, j, _) in x.support(tol) {
            g.add_edge(i, j);
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, i: usize, j: usize) {
        assert!(
            i != j && i < self.n && j < self.n,
            "edge ({i}, {j}) out of range"
        );
        self.adj[i] |= 1 << j;
        self.adj[j] |= 1 << i;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i] >> j & 1 == 1
    }

    /// True when `set` is nonempty and induces a connected subgraph.
    pub fn is_connected(&self, set: &[usize]) -> bool {
        let Some(&first) = set.first() else {
            return false;
        };
        let mask = to_mask(set);
        let mut seen: u128 = 1 << first;
        let mut frontier = seen;
        while frontier != 0 {
            let v = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let fresh = self.adj[v] & mask & !seen;
            seen |= fresh;
            frontier |= fresh;
        }
        seen == mask
    }
}

fn to_mask(set: &[usize]) -> u128 {
    set.iter().fold(0, |m, &v| m | 1 << v)
}

fn to_vec(mut mask: u128) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    while mask != 0 {
        out.push(mask.trailing_zeros() as usize);
        mask &= mask - 1;
    }
    out
}

fn above(v: usize) -> u128 {
    if v >= 127 {
        0
    } else {
        !0u128 << (v + 1)
    }
}

/// Every connected vertex subset of size `1..=max_size`, each exactly once.
pub(crate) fn connected_subsets(g: &SupportGraph, max_size: usize) -> Vec<u128> {
    fn extend(
        g: &SupportGraph,
        sub: u128,
        ext: u128,
        nbhd: u128,
        root: usize,
        max: usize,
        out: &mut Vec<u128>,
    ) {
        if sub.count_ones() as usize == max {
            return;
        }
        let mut ext = ext;
        while ext != 0 {
            let w = ext.trailing_zeros() as usize;
            ext &= ext - 1;
            let grown = sub | 1 << w;
            out.push(grown);
            let next = ext | (g.adj[w] & !nbhd & above(root));
            extend(g, grown, next, nbhd | g.adj[w], root, max, out);
        }
    }
    let mut out = Vec::new();
    if max_size == 0 {
        return out;
    }
    for v in 0..g.n {
        let sub = 1u128 << v;
        out.push(sub);
        extend(
            g,
            sub,
            g.adj[v] & above(v),
            sub | g.adj[v],
            v,
            max_size,
            &mut out,
        );
    }
    out
}

/// Candidate handles and teeth for combs of size at most `c`.
struct CombSpace {
    c: usize,
    handles: Vec<u128>,
    /// Sorted by vertex list.
    teeth: Vec<u128>,
}

impl CombSpace {
    fn new(g: &SupportGraph, c: usize) -> Option<Self> {
        if c < 6 {
            return None;
        }
        let sets = connected_subsets(g, c - 3);
        let mut handles: Vec<u128> = sets
            .iter()
            .copied()
            .filter(|s| s.count_ones() >= 3)
            .collect();
        handles.sort_by_cached_key(|&h| to_vec(h));
        let mut teeth: Vec<u128> = sets
            .into_iter()
            .filter(|s| (2..=c - 4).contains(&(s.count_ones() as usize)))
            .collect();
        teeth.sort_by_cached_key(|&t| to_vec(t));
        Some(CombSpace { c, handles, teeth })
    }

    /// Indices of the teeth admissible for handle `h`, in tooth order.
    fn teeth_for(&self, h: u128) -> Vec<usize> {
        let inside_cap = h.count_ones() - 2;
        let outside_cap = (self.c - h.count_ones() as usize - 2) as u32;
        (0..self.teeth.len())
            .filter(|&i| {
                let t = self.teeth[i];
                let a = (t & h).count_ones();
                let b = (t & !h).count_ones();
                a >= 1 && b >= 1 && a <= inside_cap && b <= outside_cap
            })
            .collect()
    }
}

fn build_comb(h: u128, teeth: &[u128]) -> Comb {
    Comb::new(to_vec(h), teeth.iter().map(|&t| to_vec(t)).collect())
        .expect("search yields valid combs")
}

/// Calls `visit` on every comb of size at most `c` whose handle and teeth are
/// connected in `g`; each comb is produced once, in canonical form.
pub fn for_each_comb(g: &SupportGraph, c: usize, mut visit: impl FnMut(Comb)) {
    fn dfs(
        h: u128,
        cands: &[u128],
        start: usize,
        used: u128,
        budget: usize,
        chosen: &mut Vec<u128>,
        visit: &mut dyn FnMut(Comb),
    ) {
        if chosen.len() >= 3 && chosen.len() % 2 == 1 {
            visit(build_comb(h, chosen));
        }
        for i in start..cands.len() {
            let t = cands[i];
            let b = (t & !h).count_ones() as usize;
            if t & used != 0 || b > budget {
                continue;
            }
            chosen.push(t);
            dfs(h, cands, i + 1, used | t, budget - b, chosen, visit);
            chosen.pop();
        }
    }
    let Some(space) = CombSpace::new(g, c) else {
        return;
    };
    for &h in &space.handles {
        let cands: Vec<u128> = space
            .teeth_for(h)
            .into_iter()
            .map(|i| space.teeth[i])
            .collect();
        let budget = c - h.count_ones() as usize;
        dfs(h, &cands, 0, 0, budget, &mut Vec::new(), &mut visit);
    }
}

/// All combs of size at most `c` with connected handle and teeth, sorted.
pub fn enumerate_combs(g: &SupportGraph, c: usize) -> Vec<Comb> {
    let mut out = Vec::new();
    for_each_comb(g, c, |comb| out.push(comb));
    out.sort();
    out
}

/// A comb returned by separation.
#[derive(Clone, Debug, PartialEq)]
pub struct CombHit {
    pub comb: Comb,
    pub lhs: f64,
    /// `lhs − (3t + 1)`.
    pub slack: f64,
}

struct Best {
    slack: f64,
    handle: u128,
    teeth: Vec<u128>,
    keys: Vec<Vec<usize>>,
}

impl Best {
    fn rank(&self, other: &Best) -> Ordering {
        if (self.slack - other.slack).abs() > TIE_TOL {
            return self.slack.total_cmp(&other.slack);
        }
        self.teeth
            .len()
            .cmp(&other.teeth.len())
            .then_with(|| to_vec(self.handle).cmp(&to_vec(other.handle)))
            .then_with(|| self.keys.cmp(&other.keys))
    }
}

struct HandleSearch<'a> {
    h: u128,
    cands: &'a [u128],
    terms: &'a [f64],
    outs: &'a [usize],
    rate: f64,
    tol: f64,
    best: Option<Best>,
}

impl HandleSearch<'_> {
    fn threshold(&self) -> f64 {
        match &self.best {
            Some(b) => b.slack + TIE_TOL,
            None => -self.tol,
        }
    }

    fn dfs(
        &mut self,
        start: usize,
        used: u128,
        budget: usize,
        partial: f64,
        chosen: &mut Vec<usize>,
    ) {
        if chosen.len() >= 3 && chosen.len() % 2 == 1 && partial < -self.tol {
            let teeth: Vec<u128> = chosen.iter().map(|&i| self.cands[i]).collect();
            let keys = teeth.iter().map(|&t| to_vec(t)).collect();
            let cand = Best {
                slack: partial,
                handle: self.h,
                teeth,
                keys,
            };
            if self
                .best
                .as_ref()
                .is_none_or(|b| cand.rank(b) == Ordering::Less)
            {
                self.best = Some(cand);
            }
        }
        let bound = partial + self.rate * budget as f64;
        if bound >= -self.tol || bound > self.threshold() {
            return;
        }
        for i in start..self.cands.len() {
            let t = self.cands[i];
            if t & used != 0 || self.outs[i] > budget {
                continue;
            }
            chosen.push(i);
            self.dfs(
                i + 1,
                used | t,
                budget - self.outs[i],
                partial + self.terms[i],
                chosen,
            );
            chosen.pop();
        }
    }
}

/// Most violated comb of size at most `c` among combs whose handle and teeth
/// are connected in the support of `x`, if its slack is below `-tol`.
///
/// Ties are broken by fewer teeth, then the lexicographically smaller handle.
pub fn separate_combs(x: &FractionalSolution, c: usize, tol: f64) -> Result<Option<CombHit>> {
    let g = SupportGraph::from_solution(x, SUPPORT_TOL)?;
    let Some(space) = CombSpace::new(&g, c) else {
        return Ok(None);
    };
    let adj = x.adjacency(SUPPORT_TOL);
    let cut = |mask: u128| -> f64 {
        to_vec(mask)
            .into_iter()
            .flat_map(|v| adj[v].iter())
            .filter(|(u, _)| mask >> u & 1 == 0)
            .map(|(_, w)| w)
            .sum()
    };
    let tooth_terms: Vec<f64> = space.teeth.par_iter().map(|&t| cut(t) - 3.0).collect();
    let best = space
        .handles
        .par_iter()
        .filter_map(|&h| {
            let handle_term = cut(h) - 1.0;
            let idx = space.teeth_for(h);
            let cands: Vec<u128> = idx.iter().map(|&i| space.teeth[i]).collect();
            let terms: Vec<f64> = idx.iter().map(|&i| tooth_terms[i]).collect();
            let outs: Vec<usize> = cands
                .iter()
                .map(|&t| (t & !h).count_ones() as usize)
                .collect();
            let rate = terms
                .iter()
                .zip(&outs)
                .map(|(t, &b)| t / b as f64)
                .fold(0.0, f64::min);
            let mut search = HandleSearch {
                h,
                cands: &cands,
                terms: &terms,
                outs: &outs,
                rate,
                tol,
                best: None,
            };
            search.dfs(
                0,
                0,
                c - h.count_ones() as usize,
                handle_term,
                &mut Vec::new(),
            );
            search.best
        })
        .min_by(|a, b| a.rank(b));
    Ok(best.map(|b| {
        let comb = build_comb(b.handle, &b.teeth);
        let lhs = b.slack + comb.rhs();
        CombHit {
            comb,
            lhs,
            slack: b.slack,
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combs::comb_lhs;
    use crate::combs::fixtures::prism;

    fn cycle(n: usize) -> SupportGraph {
        let mut g = SupportGraph::new(n).unwrap();
        for i in 0..n {
            g.add_edge(i, (i + 1) % n);
        }
        g
    }

    #[test]
    fn connected_subsets_of_a_path_and_clique() {
        let mut path = SupportGraph::new(5).unwrap();
        for i in 0..4 {
            path.add_edge(i, i + 1);
        }
        assert_eq!(connected_subsets(&path, 5).len(), 15);
        assert_eq!(
            connected_subsets(&SupportGraph::complete(6).unwrap(), 6).len(),
            63
        );
        assert_eq!(connected_subsets(&cycle(7), 3).len(), 21);
    }

    #[test]
    fn prism_comb_enumerated_and_separated() {
        let x = prism();
        let g = SupportGraph::from_solution(&x, 1e-9).unwrap();
        let all = enumerate_combs(&g, 6);
        let want = Comb::new(vec![0, 2, 4], vec![vec![0, 1], vec![2, 3], vec![4, 5]]).unwrap();
        assert!(all.contains(&want));
        let hit = separate_combs(&x, 6, 1e-6).unwrap().unwrap();
        assert!((hit.slack + 1.0).abs() < 1e-12);
        assert_eq!(hit.comb, want);
        assert_eq!(comb_lhs(&x, &hit.comb).unwrap(), hit.lhs);
    }

    #[test]
    fn too_small_bound_yields_nothing() {
        assert!(enumerate_combs(&SupportGraph::complete(8).unwrap(), 5).is_empty());
        assert_eq!(separate_combs(&prism(), 5, 1e-6).unwrap(), None);
    }

    #[test]
    fn tour_has_no_violated_comb() {
        let x = FractionalSolution::from_tour(&[0, 3, 6, 1, 4, 7, 2, 5, 8]);
        assert_eq!(separate_combs(&x, 9, 1e-6).unwrap(), None);
    }

    #[test]
    fn enumerated_combs_are_connected_and_bounded() {
        let g = cycle(8);
        for comb in enumerate_combs(&g, 8) {
            assert!(comb.size() <= 8);
            assert!(g.is_connected(comb.handle()));
            assert!(comb.teeth().iter().all(|t| g.is_connected(t)));
        }
    }
}
