//! Global minimum cut of the support graph (Stoer–Wagner, dense).

use super::solution::FractionalSolution;

/// Connected components of the support graph (weights above `tol`), each sorted,
/// ordered by smallest member.
pub fn support_components(x: &FractionalSolution, tol: f64) -> Vec<Vec<usize>> {
    let n = x.n();
    let adj = x.adjacency(tol);
    let mut comp = vec![usize::MAX; n];
    let mut out = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut stack = vec![s];
        let mut members = vec![s];
        comp[s] = id;
        while let Some(v) = stack.pop() {
            for &(u, _) in &adj[v] {
                if comp[u] == usize::MAX {
                    comp[u] = id;
                    members.push(u);
                    stack.push(u);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// Global minimum cut `(S, x(δ(S)))` with `∅ ⊊ S ⊊ V`.
///
/// `S` is reported as the side containing vertex 0; among cuts of equal value
/// found by the phases, the lexicographically smallest such side is kept.
pub fn min_cut(x: &FractionalSolution) -> (Vec<usize>, f64) {
    let n = x.n();
    assert!(n >= 2, "min_cut needs at least two vertices");
    let mut w = vec![vec![0.0; n]; n];
    for (i, j, v) in x.support(0.0) {
        w[i][j] = v;
        w[j][i] = v;
    }
    // groups[v]: original vertices merged into super-vertex v
    let mut groups: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    let mut alive: Vec<usize> = (0..n).collect();
    let mut best: Option<(Vec<usize>, f64)> = None;

    while alive.len() > 1 {
        let m = alive.len();
        let mut added = vec![false; m];
        let mut key = vec![0.0; m];
        let mut prev = 0;
        let mut last = 0;
        for step in 0..m {
            // maximum adjacency order, ties to the lower position
            let mut sel = usize::MAX;
            for i in 0..m {
                if !added[i] && (sel == usize::MAX || key[i] > key[sel]) {
                    sel = i;
                }
            }
            added[sel] = true;
            if step == m - 1 {
                last = sel;
            } else {
                prev = sel;
            }
            for i in 0..m {
                if !added[i] {
                    key[i] += w[alive[sel]][alive[i]];
                }
            }
            if step == m - 1 {
                let cut_value = key[sel];
                let mut side: Vec<usize> = groups[alive[sel]].clone();
                side.sort_unstable();
                let side = normalize(n, side);
                let replace = match &best {
                    None => true,
                    Some((bs, bv)) => {
                        cut_value < bv - 1e-12 || (cut_value <= bv + 1e-12 && side < *bs)
                    }
                };
                if replace {
                    best = Some((side, cut_value));
                }
            }
        }
        let (s, t) = (alive[prev], alive[last]);
        let moved = std::mem::take(&mut groups[t]);
        groups[s].extend(moved);
        for &v in &alive {
            w[s][v] += w[t][v];
            w[v][s] = w[s][v];
        }
        w[s][s] = 0.0;
        alive.retain(|&v| v != t);
    }
    best.expect("at least one phase runs")
}

/// Side of the cut containing vertex 0.
fn normalize(n: usize, side: Vec<usize>) -> Vec<usize> {
    if side.first() == Some(&0) {
        side
    } else {
        let mut inside = vec![false; n];
        for &v in &side {
            inside[v] = true;
        }
        (0..n).filter(|&v| !inside[v]).collect()
    }
}
