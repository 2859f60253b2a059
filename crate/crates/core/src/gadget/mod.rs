//! The half-integral local solution on the two-ring gadget, its local length
//! accounting, and splicing into tours.

mod splice;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bnb::{branch_and_bound, BnBConfig, BoundKind};
use crate::combs::{separate_combs, triangle_decompose, Comb, COMB_TOL};
use crate::edges::ordered;
use crate::error::{invalid, Result};
use crate::instance::{GadgetMeta, PointSet};
use crate::lp::{check_feasible, EdgeFixings, FractionalSolution};

pub use splice::{splice, CopySplice, SpliceReport};

const WEIGHT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryMode {
    Single,
    Double,
}

impl EntryMode {
    /// Number of entry/exit pairs.
    pub fn entries(self) -> usize {
        match self {
            EntryMode::Single => 1,
            EntryMode::Double => 2,
        }
    }

    pub fn from_entries(count: usize) -> Result<Self> {
        match count {
            1 => Ok(EntryMode::Single),
            2 => Ok(EntryMode::Double),
            _ => invalid(format!("entry mode must be 1 or 2, got {count}")),
        }
    }
}

/// Largest number of outer-ring points that can separate an entry vertex from
/// every triangle vertex on a ring of `2k` points.
pub fn max_separation(k: usize) -> usize {
    k.saturating_sub(4) / 2
}

/// Separation enforced for comb bound `c`: `c − 1`, capped by [`max_separation`].
pub fn required_separation(k: usize, c: usize) -> usize {
    c.saturating_sub(1).min(max_separation(k))
}

/// Outer positions `p` whose ring edge `(p, p+1)` may be removed for an entry
/// at separation `sep`.
pub fn valid_entry_sites(k: usize, sep: usize) -> Vec<usize> {
    let upper = (k + 1).saturating_sub(sep + 3);
    let first: Vec<usize> = (sep + 2..=upper.min(k - 1)).collect();
    let second = first.iter().map(|p| p + k);
    first.iter().copied().chain(second).collect()
}

fn default_sites(k: usize, sep: usize, mode: EntryMode) -> Vec<usize> {
    let late = k - sep - 2;
    let early = sep + 2;
    match mode {
        EntryMode::Single => vec![late],
        EntryMode::Double if early + 1 < late => vec![early, late],
        EntryMode::Double => vec![late, late + k],
    }
}

fn ring_gap(a: usize, b: usize, ring: usize) -> usize {
    let d = a.abs_diff(b) % ring;
    d.min(ring - d)
}

/// Outer positions of the four triangle corners on the outer ring.
fn triangle_outer_positions(k: usize) -> [usize; 4] {
    [0, 1, k, k + 1]
}

/// The local half-integral solution on one gadget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GadgetSolution {
    pub k: usize,
    pub c: usize,
    pub entry_mode: EntryMode,
    /// Separation actually enforced between entries and weight-½ edges.
    pub separation: usize,
    /// True when `c − 1` exceeded what the ring admits.
    pub separation_clamped: bool,
    /// Outer positions `p` whose ring edge `(p, p+1)` is removed.
    pub entry_sites: Vec<usize>,
    /// Endpoint labels of each removed ring edge.
    pub entry_exit: Vec<(usize, usize)>,
    /// The four weight-½ triangles (sorted labels).
    pub triangles: Vec<[usize; 3]>,
    /// Weighted internal edges `(i, j, w)` with `i < j`, sorted.
    pub edges: Vec<(usize, usize, f64)>,
}

/// A gadget solution closed by one anchor vertex per removed ring edge.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedGadget {
    /// Solution on local vertices: gadget labels in [`GadgetMeta::labels`] order, then anchors.
    pub solution: FractionalSolution,
    pub labels: Vec<usize>,
    pub anchors: Vec<usize>,
}

/// Builds the four triangles and the weight-1 ring paths, with the ring edge
/// after each entry site removed.
///
/// `entry_sites` defaults to the layout of the reference drawings: a single
/// entry `k − s − 2` positions along the upper outer path, a double entry also
/// at `s + 2` (or on the lower path when the upper one is too short).
pub fn build_gadget_solution(
    meta: &GadgetMeta,
    c: usize,
    entry_mode: EntryMode,
    entry_sites: Option<&[usize]>,
) -> Result<GadgetSolution> {
    let k = meta.k;
    if k < 6 || meta.outer_ids.len() != 2 * k || meta.inner_ids.len() != k {
        return invalid(format!(
            "ring size k = {k} leaves no room for entries (need k ≥ 6)"
        ));
    }
    let separation = required_separation(k, c);
    let sites: Vec<usize> = match entry_sites {
        Some(s) => s.to_vec(),
        None => default_sites(k, separation, entry_mode),
    };
    if sites.len() != entry_mode.entries() {
        return invalid(format!(
            "{} entry sites given for {} entries",
            sites.len(),
            entry_mode.entries()
        ));
    }
    let valid = valid_entry_sites(k, separation);
    for &p in &sites {
        if !valid.contains(&p) {
            return invalid(format!(
                "entry site {p} is closer than {separation} points to a weight-1/2 edge"
            ));
        }
    }
    if sites.len() == 2 && ring_gap(sites[0], sites[1], 2 * k) < 2 {
        return invalid("entry sites must not share a vertex");
    }
    let outer = |p: usize| meta.outer_ids[p % (2 * k)];
    let inner = |p: usize| meta.inner_ids[p % k];
    let [g_plus, g_minus] = meta.gap_ids;
    let half = k.div_ceil(2);
    let triangles_raw = [
        [g_plus, outer(0), outer(1)],
        [g_plus, inner(0), inner(1)],
        [g_minus, outer(k), outer(k + 1)],
        [g_minus, inner(half - 1), inner(half)],
    ];
    let mut weights: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for t in &triangles_raw {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[0], t[2])] {
            weights.insert(ordered(a, b), 0.5);
        }
    }
    let removed: Vec<(usize, usize)> = sites
        .iter()
        .map(|&p| ordered(outer(p), outer(p + 1)))
        .collect();
    for p in 0..2 * k {
        let e = ordered(outer(p), outer(p + 1));
        if !weights.contains_key(&e) && !removed.contains(&e) {
            weights.insert(e, 1.0);
        }
    }
    for p in 0..k {
        let e = ordered(inner(p), inner(p + 1));
        weights.entry(e).or_insert(1.0);
    }
    let mut triangles: Vec<[usize; 3]> = triangles_raw
        .iter()
        .map(|t| {
            let mut t = *t;
            t.sort_unstable();
            t
        })
        .collect();
    triangles.sort_unstable();
    Ok(GadgetSolution {
        k,
        c,
        entry_mode,
        separation,
        separation_clamped: separation < c.saturating_sub(1),
        entry_exit: sites.iter().map(|&p| (outer(p), outer(p + 1))).collect(),
        entry_sites: sites,
        triangles,
        edges: weights.into_iter().map(|((a, b), w)| (a, b, w)).collect(),
    })
}

impl GadgetSolution {
    /// The internal edges as a solution on `n` vertices.
    pub fn to_solution(&self, n: usize) -> Result<FractionalSolution> {
        FractionalSolution::from_edges(n, &self.edges)
    }

    /// Weighted degree of `label` inside the gadget.
    pub fn internal_degree(&self, label: usize) -> f64 {
        self.edges
            .iter()
            .filter(|e| e.0 == label || e.1 == label)
            .map(|e| e.2)
            .sum()
    }

    /// Points strictly between an entry vertex and the nearest triangle
    /// corner along the outer ring.
    pub fn ring_separation(&self) -> usize {
        let ring = 2 * self.k;
        self.entry_sites
            .iter()
            .flat_map(|&p| [p, (p + 1) % ring])
            .flat_map(|v| triangle_outer_positions(self.k).map(|t| ring_gap(v, t, ring) - 1))
            .min()
            .unwrap_or(usize::MAX)
    }

    /// Local-index closure: each removed ring edge `(p, p+1)` is bridged by a
    /// new anchor joined to both endpoints with weight 1.
    pub fn closed(&self, meta: &GadgetMeta) -> Result<ClosedGadget> {
        let labels = meta.labels();
        let local: BTreeMap<usize, usize> =
            labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let m = labels.len();
        let anchors: Vec<usize> = (m..m + self.entry_exit.len()).collect();
        let mut edges: Vec<(usize, usize, f64)> = self
            .edges
            .iter()
            .map(|&(a, b, w)| (local[&a], local[&b], w))
            .collect();
        for (&(a, b), &anchor) in self.entry_exit.iter().zip(&anchors) {
            edges.push((local[&a], anchor, 1.0));
            edges.push((local[&b], anchor, 1.0));
        }
        let solution = FractionalSolution::from_edges(m + anchors.len(), &edges)?;
        Ok(ClosedGadget {
            solution,
            labels,
            anchors,
        })
    }

    /// Support graph in Graphviz DOT form (solid weight 1, dashed weight ½).
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph gadget {\n");
        for &(a, b, w) in &self.edges {
            let style = if w < 1.0 - WEIGHT_TOL {
                "dashed"
            } else {
                "solid"
            };
            let _ = writeln!(out, "  {a} -- {b} [weight={w}, style={style}];");
        }
        out.push_str("}\n");
        out
    }
}

/// Local length comparison for one gadget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub k: usize,
    pub c: usize,
    pub entry_mode: EntryMode,
    pub lp_length_local: f64,
    pub tour_length_local: f64,
    /// `tour_length_local − lp_length_local`.
    pub gap: f64,
    /// False when the tour length comes from an unfinished search.
    pub tour_exact: bool,
}

/// Local lengths of the half-integral solution and of the best tour
/// restriction with the same entry pattern.
///
/// The tour restriction is the shortest tour on the gadget points containing
/// every removed ring edge, minus those edges; it is searched by
/// branch-and-bound limited to `node_limit` bound evaluations.
pub fn local_lengths(
    points: &PointSet,
    meta: &GadgetMeta,
    sol: &GadgetSolution,
    node_limit: usize,
) -> Result<GapReport> {
    let lp_length_local: f64 = sol
        .edges
        .iter()
        .map(|&(a, b, w)| w * points.distance(a, b))
        .sum();
    let labels = meta.labels();
    let local: BTreeMap<usize, usize> = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let sub = points.subset(&labels);
    let mut config = BnBConfig::new(BoundKind::HeldKarp);
    config.node_limit = Some(node_limit);
    let mut fix = EdgeFixings::new();
    let mut bridged = 0.0;
    for &(a, b) in &sol.entry_exit {
        fix = fix.include(local[&a].min(local[&b]), local[&a].max(local[&b]));
        bridged += points.distance(a, b);
    }
    config.initial = fix;
    let result = branch_and_bound(&sub, &config)?;
    let tour = result
        .tour
        .ok_or_else(|| crate::Error::Invariant("no tour found on the gadget".into()))?;
    let tour_length_local = tour.length - bridged;
    Ok(GapReport {
        k: sol.k,
        c: sol.c,
        entry_mode: sol.entry_mode,
        lp_length_local,
        tour_length_local,
        gap: tour_length_local - lp_length_local,
        tour_exact: result.optimal,
    })
}

/// Structural checks of the gadget solution and its comb behaviour.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GadgetLemmaReport {
    pub k: usize,
    pub c: usize,
    /// The anchored closure passes the Held-Karp constraints.
    pub feasible: bool,
    pub triangle_count: usize,
    /// Paths left after deleting weight-½ edges from the anchored closure
    /// (isolated gap vertices not counted).
    pub paths_after_half_removal: usize,
    pub entry_separation: usize,
    pub required_separation: usize,
    /// Most violated comb of size at most `c` on the closure, if any.
    pub violated_comb: Option<Comb>,
    /// Smallest comb size (scanned up to `size_limit`) with a violated comb.
    pub min_violated_size: Option<usize>,
    pub size_limit: usize,
}

impl GadgetLemmaReport {
    pub fn holds(&self) -> bool {
        self.feasible
            && self.triangle_count == 4
            && self.paths_after_half_removal == 4
            && self.entry_separation >= self.required_separation
            && self.violated_comb.is_none()
    }
}

fn count_paths(x: &FractionalSolution) -> usize {
    let n = x.n();
    let adj: Vec<Vec<usize>> = x
        .adjacency(WEIGHT_TOL)
        .into_iter()
        .map(|a| {
            a.into_iter()
                .filter(|&(_, w)| w > 1.0 - WEIGHT_TOL)
                .map(|(u, _)| u)
                .collect()
        })
        .collect();
    let mut seen = vec![false; n];
    let mut paths = 0;
    for s in 0..n {
        if seen[s] || adj[s].is_empty() {
            continue;
        }
        let (mut vertices, mut degree_sum) = (0usize, 0usize);
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(v) = stack.pop() {
            vertices += 1;
            degree_sum += adj[v].len();
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        let max_degree_ok = adj.iter().all(|a| a.len() <= 2);
        if max_degree_ok && degree_sum / 2 == vertices - 1 {
            paths += 1;
        }
    }
    paths
}

/// Smallest `b ≤ limit` for which `x` violates some comb of size at most `b`.
pub fn min_violated_comb_size(x: &FractionalSolution, limit: usize) -> Result<Option<usize>> {
    for b in 6..=limit {
        if separate_combs(x, b, COMB_TOL)?.is_some() {
            return Ok(Some(b));
        }
    }
    Ok(None)
}

/// Feasibility, triangle count, path structure, entry separation and the
/// absence of violated combs of size at most `c` on the anchored closure;
/// also scans for the smallest violated comb up to `size_limit`.
pub fn verify_gadget_lemmas(
    meta: &GadgetMeta,
    sol: &GadgetSolution,
    c: usize,
    size_limit: usize,
) -> Result<GadgetLemmaReport> {
    let closed = sol.closed(meta)?;
    let x = &closed.solution;
    let feasible = check_feasible(x, WEIGHT_TOL).passes;
    let triangle_count = triangle_decompose(x)
        .map(|d| d.triangles.len())
        .unwrap_or(0);
    let violated_comb = separate_combs(x, c, COMB_TOL)?.map(|h| h.comb);
    let min_violated_size = min_violated_comb_size(x, size_limit)?;
    Ok(GadgetLemmaReport {
        k: sol.k,
        c,
        feasible,
        triangle_count,
        paths_after_half_removal: count_paths(x),
        entry_separation: sol.ring_separation(),
        required_separation: required_separation(sol.k, c),
        violated_comb,
        min_violated_size,
        size_limit,
    })
}
