use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Tour;
use crate::error::{invalid, Result};
use crate::instance::PointSet;

const IMPROVE_TOL: f64 = 1e-10;

/// Nearest-neighbour order from `start` over `candidates` (ties to the smaller label).
pub(crate) fn nearest_neighbour(
    points: &PointSet,
    start: usize,
    candidates: &[usize],
) -> Vec<usize> {
    let mut left: Vec<usize> = candidates.iter().copied().filter(|&v| v != start).collect();
    left.sort_unstable();
    let mut order = vec![start];
    let mut cur = start;
    while !left.is_empty() {
        let mut pick = 0;
        let mut best = f64::INFINITY;
        for (i, &v) in left.iter().enumerate() {
            let dist = points.distance(cur, v);
            if dist < best {
                best = dist;
                pick = i;
            }
        }
        cur = left.remove(pick);
        order.push(cur);
    }
    order
}

/// 2-opt on a closed tour until no move shortens it by more than `1e-10`.
pub fn two_opt(points: &PointSet, order: &mut [usize]) {
    let n = order.len();
    if n < 4 {
        return;
    }
    let d = |a: usize, b: usize| points.distance(a, b);
    loop {
        let mut improved = false;
        for i in 0..n - 2 {
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (a, b, c, e) = (order[i], order[i + 1], order[j], order[(j + 1) % n]);
                if d(a, c) + d(b, e) < d(a, b) + d(c, e) - IMPROVE_TOL {
                    order[i + 1..=j].reverse();
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
}

/// 2-opt on an open path with both endpoints held fixed.
pub fn path_two_opt(points: &PointSet, path: &mut [usize]) {
    let n = path.len();
    if n < 4 {
        return;
    }
    let d = |a: usize, b: usize| points.distance(a, b);
    loop {
        let mut improved = false;
        for i in 0..n - 3 {
            for j in i + 2..n - 1 {
                let (a, b, c, e) = (path[i], path[i + 1], path[j], path[j + 1]);
                if d(a, c) + d(b, e) < d(a, b) + d(c, e) - IMPROVE_TOL {
                    path[i + 1..=j].reverse();
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
}

/// True when no single 2-opt move shortens the closed tour by more than `tol`.
pub fn is_two_opt_optimal(points: &PointSet, order: &[usize], tol: f64) -> bool {
    let n = order.len();
    let d = |a: usize, b: usize| points.distance(a, b);
    for i in 0..n.saturating_sub(2) {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (a, b, c, e) = (order[i], order[i + 1], order[j], order[(j + 1) % n]);
            if d(a, c) + d(b, e) < d(a, b) + d(c, e) - tol {
                return false;
            }
        }
    }
    true
}

/// Nearest-neighbour tour from a seeded start vertex, refined by 2-opt.
pub fn heuristic_tour(points: &PointSet, seed: u64) -> Result<Tour> {
    let n = points.len();
    if n < 3 {
        return invalid("a tour needs at least 3 points");
    }
    let start = ChaCha8Rng::seed_from_u64(seed).gen_range(0..n);
    let all: Vec<usize> = (0..n).collect();
    let mut order = nearest_neighbour(points, start, &all);
    two_opt(points, &mut order);
    Ok(Tour::measured(points, order))
}

/// Nearest-neighbour plus 2-opt tour that keeps every edge of `include`.
///
/// Forced edges must form vertex-disjoint paths (or one Hamiltonian cycle);
/// 2-opt never removes a forced edge.
pub fn constrained_heuristic_tour(
    points: &PointSet,
    include: &[(usize, usize)],
    seed: u64,
) -> Result<Tour> {
    let n = points.len();
    if n < 3 {
        return invalid("a tour needs at least 3 points");
    }
    let mut forced = vec![Vec::new(); n];
    for &(a, b) in include {
        if a >= n || b >= n || a == b {
            return invalid(format!("forced edge ({a}, {b}) out of range"));
        }
        if !forced[a].contains(&b) {
            forced[a].push(b);
            forced[b].push(a);
        }
    }
    if forced.iter().any(|f| f.len() > 2) {
        return invalid("a vertex has more than two forced edges");
    }
    // chains of forced edges, each listed from one end
    let mut unit_of = vec![usize::MAX; n];
    let mut units: Vec<Vec<usize>> = Vec::new();
    for v in 0..n {
        if unit_of[v] != usize::MAX || forced[v].len() == 2 {
            continue;
        }
        let mut chain = vec![v];
        unit_of[v] = units.len();
        let mut prev = usize::MAX;
        let mut cur = v;
        while let Some(&next) = forced[cur].iter().find(|&&u| u != prev) {
            chain.push(next);
            unit_of[next] = units.len();
            prev = cur;
            cur = next;
        }
        units.push(chain);
    }
    if unit_of.contains(&usize::MAX) {
        if include.len() == n && units.is_empty() {
            let mut order = vec![0];
            let (mut prev, mut cur) = (0, forced[0][0]);
            while cur != 0 {
                order.push(cur);
                let next = if forced[cur][0] == prev {
                    forced[cur][1]
                } else {
                    forced[cur][0]
                };
                prev = cur;
                cur = next;
            }
            if order.len() == n {
                return Ok(Tour::measured(points, order));
            }
        }
        return invalid("forced edges close a subtour");
    }
    let start = ChaCha8Rng::seed_from_u64(seed).gen_range(0..n);
    let mut order = Vec::with_capacity(n);
    let mut used = vec![false; units.len()];
    let first = unit_of[start];
    let mut chain = units[first].clone();
    if chain[0] != start && *chain.last().unwrap() == start {
        chain.reverse();
    }
    order.extend(chain);
    used[first] = true;
    for _ in 1..units.len() {
        let cur = *order.last().unwrap();
        let mut best = (f64::INFINITY, usize::MAX, false);
        for (u, chain) in units.iter().enumerate() {
            if used[u] {
                continue;
            }
            for (end, flip) in [(chain[0], false), (*chain.last().unwrap(), true)] {
                let dist = points.distance(cur, end);
                if dist < best.0 {
                    best = (dist, u, flip);
                }
            }
        }
        used[best.1] = true;
        let mut chain = units[best.1].clone();
        if best.2 {
            chain.reverse();
        }
        order.extend(chain);
    }
    let is_forced = |a: usize, b: usize| forced[a].contains(&b);
    let d = |a: usize, b: usize| points.distance(a, b);
    loop {
        let mut improved = false;
        for i in 0..n - 2 {
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (a, b, c, e) = (order[i], order[i + 1], order[j], order[(j + 1) % n]);
                if is_forced(a, b) || is_forced(c, e) {
                    continue;
                }
                if d(a, c) + d(b, e) < d(a, b) + d(c, e) - IMPROVE_TOL {
                    order[i + 1..=j].reverse();
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    Ok(Tour::measured(points, order))
}
