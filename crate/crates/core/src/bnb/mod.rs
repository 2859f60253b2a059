//! Branch-and-bound over edge fixings with Held-Karp or comb-augmented bounds.

mod census;

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::instance::PointSet;
use crate::lp::{
    solve_relaxation, BoundResult, CutPool, EdgeFixings, FractionalSolution, Separation, CUT_TOL,
};
use crate::tsp::{constrained_heuristic_tour, heuristic_tour, Tour};

pub use census::{leaf_census, GrowthRow, GrowthTable};

/// Tolerance of the pruning test `b_v ≥ B − tol` and of bound monotonicity.
pub const PRUNE_TOL: f64 = 1e-6;
const INTEGRAL_TOL: f64 = 1e-6;
const TIE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    HeldKarp,
    Comb { c: usize },
}

impl BoundKind {
    fn separation(self) -> Separation {
        match self {
            BoundKind::HeldKarp => Separation::Subtour,
            BoundKind::Comb { c } => Separation::Combs { max_size: c },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BnBConfig {
    pub bound: BoundKind,
    /// Seed of the incumbent heuristic.
    pub seed: u64,
    /// Stop after this many bound evaluations; the result is then unproven.
    pub node_limit: Option<usize>,
    /// Fixings applied at the root.
    pub initial: EdgeFixings,
    /// Keep one [`NodeRecord`] per node in the result.
    pub record_nodes: bool,
}

impl BnBConfig {
    pub fn new(bound: BoundKind) -> Self {
        BnBConfig {
            bound,
            seed: 0,
            node_limit: None,
            initial: EdgeFixings::new(),
            record_nodes: false,
        }
    }
}

/// A search-tree node: include/exclude sets and the bound they induce.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BnBNode {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    pub fixings: EdgeFixings,
    /// `+∞` when the fixings admit no tour.
    pub bound: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeOutcome {
    /// Split on an edge into two children.
    Branched,
    /// Closed by `b_v ≥ B − tol` (including infeasible nodes).
    Pruned,
    /// LP optimum is a tour; closed after updating the incumbent.
    Integral,
    /// Left unexplored because the node limit was reached.
    Open,
}

/// One line of the per-node log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    pub bound: Option<f64>,
    pub outcome: NodeOutcome,
    pub branch_edge: Option<(usize, usize)>,
    pub included: usize,
    pub excluded: usize,
    /// Incumbent value when the node was closed.
    pub incumbent: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeStats {
    /// Nodes whose bound was evaluated.
    pub nodes_expanded: usize,
    /// Nodes never branched on.
    pub leaves: usize,
    pub max_depth: usize,
    /// `(node id, value)` each time the incumbent improved; id `None` for the heuristic.
    pub incumbent_history: Vec<(Option<usize>, f64)>,
    pub bound_evaluations: usize,
    pub cuts_in_pool: usize,
    /// Children whose bound fell below the parent's by more than the tolerance.
    pub monotonicity_violations: usize,
    pub completed: bool,
    /// Excluded from JSON so reports stay reproducible.
    #[serde(skip)]
    pub wall_time_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BnBResult {
    pub tour: Option<Tour>,
    /// True when the search finished and every leaf is certified.
    pub optimal: bool,
    pub stats: TreeStats,
    pub nodes: Vec<NodeRecord>,
}

impl BnBResult {
    /// Certificate check: every leaf bound is at least `B − tol` or the leaf
    /// holds an integral tour, and the returned tour has length `B`.
    pub fn certificate_holds(&self) -> bool {
        let Some(tour) = &self.tour else { return false };
        let b = tour.length;
        self.optimal
            && !self.nodes.is_empty()
            && self.nodes.iter().all(|r| match r.outcome {
                NodeOutcome::Branched => true,
                NodeOutcome::Pruned | NodeOutcome::Integral => {
                    r.bound.is_none_or(|v| v >= b - PRUNE_TOL)
                }
                NodeOutcome::Open => false,
            })
    }

    /// Writes one JSON object per node record.
    pub fn write_json_lines(&self, out: &mut impl Write) -> Result<()> {
        for record in &self.nodes {
            serde_json::to_writer(&mut *out, record)?;
            writeln!(out).map_err(|e| Error::Io {
                path: "<node log>".into(),
                source: e,
            })?;
        }
        Ok(())
    }
}

/// Bound of `points` under `fixings`: `+∞` when no tour satisfies them.
pub fn node_bound(
    points: &PointSet,
    fixings: &EdgeFixings,
    bound: BoundKind,
    pool: &mut CutPool,
) -> Result<f64> {
    let r = evaluate(&points.edge_costs(), points.len(), fixings, bound, pool)?;
    Ok(if r.is_optimal() {
        r.value
    } else {
        f64::INFINITY
    })
}

fn evaluate(
    costs: &[f64],
    n: usize,
    fixings: &EdgeFixings,
    bound: BoundKind,
    pool: &mut CutPool,
) -> Result<BoundResult> {
    solve_relaxation(costs, n, fixings, pool, bound.separation(), CUT_TOL)
}

/// Children of `fixings` on the most fractional edge of `x` (weight nearest ½,
/// ties by longer edge, then lexicographically smallest): `(include, exclude)`.
pub fn branch(
    points: &PointSet,
    fixings: &EdgeFixings,
    x: &FractionalSolution,
) -> Result<((usize, usize), EdgeFixings, EdgeFixings)> {
    let n = x.n();
    let mut best: Option<((usize, usize), f64, f64)> = None;
    for i in 0..n {
        for j in i + 1..n {
            let w = x.get(i, j);
            if w <= INTEGRAL_TOL || w >= 1.0 - INTEGRAL_TOL {
                continue;
            }
            let score = (w - 0.5).abs();
            let length = points.distance(i, j);
            let better = match best {
                None => true,
                Some((_, s, l)) => {
                    score < s - TIE_TOL || ((score - s).abs() <= TIE_TOL && length > l + TIE_TOL)
                }
            };
            if better {
                best = Some(((i, j), score, length));
            }
        }
    }
    let Some((edge, _, _)) = best else {
        return invalid("solution is integral; nothing to branch on");
    };
    let mut left = fixings.clone();
    left.include.insert(edge);
    let mut right = fixings.clone();
    right.exclude.insert(edge);
    Ok((edge, left, right))
}

fn integral_tour(points: &PointSet, x: &FractionalSolution) -> Option<Tour> {
    if !x.is_integral(INTEGRAL_TOL) {
        return None;
    }
    let n = x.n();
    let adj = x.adjacency(0.5);
    if adj.iter().any(|a| a.len() != 2) {
        return None;
    }
    let mut order = vec![0];
    let (mut prev, mut cur) = (0, adj[0][0].0);
    while cur != 0 && order.len() <= n {
        order.push(cur);
        let next = if adj[cur][0].0 == prev {
            adj[cur][1].0
        } else {
            adj[cur][0].0
        };
        prev = cur;
        cur = next;
    }
    (order.len() == n).then(|| Tour::new(points, order).expect("support cycle is a permutation"))
}

fn respects(tour: &Tour, fixings: &EdgeFixings) -> bool {
    let edges = tour.edges();
    fixings.include.iter().all(|e| edges.contains(e))
        && !fixings.exclude.iter().any(|e| edges.contains(e))
}

struct Queued {
    bound: f64,
    depth: usize,
    id: usize,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Queued {
    // BinaryHeap pops the maximum: smallest bound, then deepest, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.id.cmp(&self.id))
    }
}

struct Pending {
    node: BnBNode,
    solution: FractionalSolution,
}

/// Best-first branch-and-bound; returns the best tour found and tree statistics.
pub fn branch_and_bound(points: &PointSet, config: &BnBConfig) -> Result<BnBResult> {
    let start = Instant::now();
    let n = points.len();
    if n < 4 {
        return invalid("branch-and-bound needs at least 4 points");
    }
    if config
        .initial
        .include
        .iter()
        .chain(&config.initial.exclude)
        .any(|&(i, j)| i >= j || j >= n)
    {
        return invalid("initial fixings name an edge outside the instance");
    }
    let costs = points.edge_costs();
    let mut pool = CutPool::new();
    let mut stats = TreeStats {
        nodes_expanded: 0,
        leaves: 0,
        max_depth: 0,
        incumbent_history: Vec::new(),
        bound_evaluations: 0,
        cuts_in_pool: 0,
        monotonicity_violations: 0,
        completed: false,
        wall_time_ms: 0.0,
    };
    let mut incumbent: Option<Tour> = if config.initial.is_empty() {
        Some(heuristic_tour(points, config.seed)?)
    } else if config.initial.exclude.is_empty() {
        let include: Vec<(usize, usize)> = config.initial.include.iter().copied().collect();
        constrained_heuristic_tour(points, &include, config.seed).ok()
    } else {
        None
    };
    incumbent = incumbent.filter(|t| respects(t, &config.initial));
    if let Some(t) = &incumbent {
        stats.incumbent_history.push((None, t.length));
    }
    let mut records: Vec<NodeRecord> = Vec::new();
    let mut pending: Vec<Option<Pending>> = Vec::new();
    let mut heap = BinaryHeap::new();

    let create = |fixings: EdgeFixings,
                  parent: Option<(usize, f64)>,
                  depth: usize,
                  pool: &mut CutPool,
                  stats: &mut TreeStats,
                  records: &mut Vec<NodeRecord>,
                  pending: &mut Vec<Option<Pending>>,
                  heap: &mut BinaryHeap<Queued>|
     -> Result<()> {
        let r = evaluate(&costs, n, &fixings, config.bound, pool)?;
        stats.bound_evaluations += 1;
        stats.nodes_expanded += 1;
        stats.max_depth = stats.max_depth.max(depth);
        let bound = if r.is_optimal() {
            r.value
        } else {
            f64::INFINITY
        };
        if let Some((_, pb)) = parent {
            if bound < pb - PRUNE_TOL {
                stats.monotonicity_violations += 1;
            }
        }
        let id = records.len();
        records.push(NodeRecord {
            id,
            parent: parent.map(|p| p.0),
            depth,
            bound: bound.is_finite().then_some(bound),
            outcome: NodeOutcome::Open,
            branch_edge: None,
            included: fixings.include.len(),
            excluded: fixings.exclude.len(),
            incumbent: None,
        });
        let node = BnBNode {
            id,
            parent: parent.map(|p| p.0),
            depth,
            fixings,
            bound,
        };
        pending.push(Some(Pending {
            node,
            solution: r.solution,
        }));
        heap.push(Queued { bound, depth, id });
        Ok(())
    };

    create(
        config.initial.clone(),
        None,
        0,
        &mut pool,
        &mut stats,
        &mut records,
        &mut pending,
        &mut heap,
    )?;
    let mut hit_limit = false;
    while let Some(Queued { id, .. }) = heap.pop() {
        let Pending { node, solution } = pending[id].take().expect("queued node is pending");
        let best = incumbent.as_ref().map_or(f64::INFINITY, |t| t.length);
        if node.bound >= best - PRUNE_TOL {
            records[id].outcome = NodeOutcome::Pruned;
            records[id].incumbent = incumbent.as_ref().map(|t| t.length);
            continue;
        }
        if let Some(tour) = integral_tour(points, &solution) {
            if tour.length < best {
                stats.incumbent_history.push((Some(id), tour.length));
                incumbent = Some(tour);
            }
            records[id].outcome = NodeOutcome::Integral;
            records[id].incumbent = incumbent.as_ref().map(|t| t.length);
            continue;
        }
        if config
            .node_limit
            .is_some_and(|limit| stats.nodes_expanded + 2 > limit)
        {
            hit_limit = true;
            pending[id] = Some(Pending { node, solution });
            break;
        }
        let (edge, left, right) = branch(points, &node.fixings, &solution).map_err(|_| {
            Error::Invariant(format!("node {id}: integral LP solution is not a tour"))
        })?;
        records[id].outcome = NodeOutcome::Branched;
        records[id].branch_edge = Some(edge);
        for child in [left, right] {
            create(
                child,
                Some((id, node.bound)),
                node.depth + 1,
                &mut pool,
                &mut stats,
                &mut records,
                &mut pending,
                &mut heap,
            )?;
        }
    }
    stats.leaves = records
        .iter()
        .filter(|r| r.outcome != NodeOutcome::Branched)
        .count();
    stats.cuts_in_pool = pool.len();
    stats.completed = !hit_limit;
    stats.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    let optimal = !hit_limit && incumbent.is_some();
    Ok(BnBResult {
        tour: incumbent,
        optimal,
        stats,
        nodes: if config.record_nodes {
            records
        } else {
            Vec::new()
        },
    })
}
