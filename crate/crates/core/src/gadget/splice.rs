use serde::{Deserialize, Serialize};

use super::{build_gadget_solution, required_separation, ring_gap, valid_entry_sites, EntryMode};
use crate::edges::{membership, ordered};
use crate::error::{invalid, Result};
use crate::instance::{GadgetMeta, PointSet};
use crate::lp::{check_feasible, FeasibilityReport, FractionalSolution};
use crate::tsp::Tour;

const FEAS_TOL: f64 = 1e-9;

/// Outcome of splicing one gadget copy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CopySplice {
    pub copy: usize,
    /// Number of entry/exit pairs of the tour on this copy.
    pub entries: usize,
    /// False when the copy was left untouched (entered more than twice).
    pub spliced: bool,
    pub entry_sites: Vec<usize>,
    /// Length of the tour edges replaced by the local solution.
    pub removed_length: f64,
    /// Weighted length of the edges that replaced them.
    pub added_length: f64,
    /// `removed_length − added_length`.
    pub gain: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpliceReport {
    pub solution: FractionalSolution,
    pub value: f64,
    pub tour_length: f64,
    pub copies: Vec<CopySplice>,
    pub feasibility: FeasibilityReport,
}

/// Maximal runs of consecutive tour positions inside `mask`, as
/// `(outside before, first inside, last inside, outside after)`.
fn runs(order: &[usize], mask: &[bool]) -> Vec<(usize, usize, usize, usize)> {
    let n = order.len();
    let Some(shift) = (0..n).find(|&i| !mask[order[i]]) else {
        return Vec::new();
    };
    let at = |i: usize| order[(i + shift) % n];
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        if mask[at(i)] {
            let start = i;
            while i + 1 < n && mask[at(i + 1)] {
                i += 1;
            }
            out.push((at(start + n - 1), at(start), at(i), at(i + 1)));
        }
        i += 1;
    }
    out
}

fn nearest_outer(points: &PointSet, meta: &GadgetMeta, w: usize) -> usize {
    (0..meta.outer_ids.len())
        .min_by(|&a, &b| {
            points
                .distance(w, meta.outer_ids[a])
                .total_cmp(&points.distance(w, meta.outer_ids[b]))
        })
        .expect("outer ring is nonempty")
}

/// Replaces the tour inside every gadget copy by the local half-integral
/// solution matching the copy's entry pattern.
///
/// Each maximal tour run inside a copy is replaced by removing one outer ring
/// edge `(p, p+1)` and attaching the run's outside neighbours to `p` and
/// `p+1`. The site `p` is the valid site closest along the ring to the outer
/// point nearest the run's entry neighbour. Copies crossed more than twice are
/// skipped.
pub fn splice(
    points: &PointSet,
    tour: &Tour,
    copies: &[GadgetMeta],
    c: usize,
) -> Result<SpliceReport> {
    let n = points.len();
    if tour.order.len() != n {
        return invalid("tour does not match the point set");
    }
    let mut seen = vec![false; n];
    for meta in copies {
        for l in meta.labels() {
            if l >= n || std::mem::replace(&mut seen[l], true) {
                return invalid(format!(
                    "gadget copies overlap or exceed the instance at label {l}"
                ));
            }
        }
    }
    let mut y = FractionalSolution::from_tour(&tour.order);
    let mut report = Vec::with_capacity(copies.len());
    for (index, meta) in copies.iter().enumerate() {
        let labels = meta.labels();
        let mask = membership(n, &labels);
        let copy_runs = runs(&tour.order, &mask);
        let entries = copy_runs.len();
        if !(1..=2).contains(&entries) {
            report.push(CopySplice {
                copy: index,
                entries,
                spliced: false,
                entry_sites: Vec::new(),
                removed_length: 0.0,
                added_length: 0.0,
                gain: 0.0,
            });
            continue;
        }
        let k = meta.k;
        let ring = 2 * k;
        let mut free = valid_entry_sites(k, required_separation(k, c));
        let mut sites = Vec::with_capacity(entries);
        let mut attach = Vec::with_capacity(entries);
        for &(w_in, _, _, w_out) in &copy_runs {
            let target = nearest_outer(points, meta, w_in);
            let &p = free
                .iter()
                .min_by_key(|&&p| {
                    (
                        ring_gap(p, target, ring).min(ring_gap(p + 1, target, ring)),
                        p,
                    )
                })
                .ok_or_else(|| {
                    crate::Error::InvalidArgument(format!("copy {index}: no free entry site"))
                })?;
            free.retain(|&q| ring_gap(q, p, ring) >= 2);
            let (a, b) = (meta.outer_ids[p], meta.outer_ids[(p + 1) % ring]);
            let straight = points.distance(w_in, a) + points.distance(w_out, b);
            let crossed = points.distance(w_in, b) + points.distance(w_out, a);
            attach.push(if straight <= crossed {
                [(w_in, a), (w_out, b)]
            } else {
                [(w_in, b), (w_out, a)]
            });
            sites.push(p);
        }
        let sol = build_gadget_solution(meta, c, EntryMode::from_entries(entries)?, Some(&sites))?;
        let mut removed_length = 0.0;
        for &l in &labels {
            for v in 0..n {
                if v != l && (!mask[v] || v > l) {
                    let w = y.get(l, v);
                    if w > 0.0 {
                        removed_length += w * points.distance(l, v);
                        y.set(l, v, 0.0);
                    }
                }
            }
        }
        let mut added_length = 0.0;
        let extra: Vec<(usize, usize, f64)> = attach
            .iter()
            .flatten()
            .map(|&(u, v)| (ordered(u, v).0, ordered(u, v).1, 1.0))
            .collect();
        for &(a, b, w) in sol.edges.iter().chain(&extra) {
            y.set(a, b, y.get(a, b) + w);
            added_length += w * points.distance(a, b);
        }
        report.push(CopySplice {
            copy: index,
            entries,
            spliced: true,
            entry_sites: sites,
            removed_length,
            added_length,
            gain: removed_length - added_length,
        });
    }
    let costs = points.edge_costs();
    let value = y.value(&costs);
    let feasibility = check_feasible(&y, FEAS_TOL);
    Ok(SpliceReport {
        solution: y,
        value,
        tour_length: tour.length,
        copies: report,
        feasibility,
    })
}
