//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use combgap::lp::check_feasible;
use combgap::{FractionalSolution, PointSet};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn euclid(points: &PointSet, i: usize, j: usize) -> f64 {
    points
        .point(i)
        .iter()
        .zip(points.point(j))
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

pub fn cycle_length(points: &PointSet, order: &[usize]) -> f64 {
    (0..order.len())
        .map(|i| euclid(points, order[i], order[(i + 1) % order.len()]))
        .sum()
}

/// Every Hamiltonian cycle through vertex 0, each undirected cycle once.
pub fn all_cycles(n: usize) -> Vec<Vec<usize>> {
    fn extend(order: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        let n = used.len();
        if order.len() == n {
            if order[1] < order[n - 1] {
                out.push(order.clone());
            }
            return;
        }
        for v in 1..n {
            if !used[v] {
                used[v] = true;
                order.push(v);
                extend(order, used, out);
                order.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut used = vec![false; n];
    used[0] = true;
    extend(&mut vec![0], &mut used, &mut out);
    out
}

/// Shortest cycle by trying every permutation.
pub fn permutation_tsp(points: &PointSet) -> (f64, Vec<usize>) {
    all_cycles(points.len())
        .into_iter()
        .map(|c| (cycle_length(points, &c), c))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("n ≥ 3")
}

enum Kind {
    Eq,
    Ge,
    Le,
}

/// Minimises `cost · x` over `x ≥ 0` subject to `rows` with exact rational
/// arithmetic: dense two-phase simplex with Bland's rule. `None` when infeasible.
fn rational_min(cost: &[BigRational], rows: &[(Vec<i64>, Kind, i64)]) -> Option<BigRational> {
    let m = cost.len();
    let slacks: Vec<usize> = (0..rows.len())
        .filter(|&i| !matches!(rows[i].1, Kind::Eq))
        .collect();
    let arts: Vec<usize> = (0..rows.len())
        .filter(|&i| !matches!(rows[i].1, Kind::Le))
        .collect();
    let cols = m + slacks.len() + arts.len();
    let rhs = cols;
    let zero = BigRational::zero();
    let mut tab: Vec<Vec<BigRational>> = vec![vec![zero.clone(); cols + 1]; rows.len()];
    let mut basis = vec![0usize; rows.len()];
    for (i, (coeffs, kind, b)) in rows.iter().enumerate() {
        for (j, &a) in coeffs.iter().enumerate() {
            if a != 0 {
                tab[i][j] = BigRational::from_integer(BigInt::from(a));
            }
        }
        tab[i][rhs] = BigRational::from_integer(BigInt::from(*b));
        if let Some(k) = slacks.iter().position(|&r| r == i) {
            let sign = if matches!(kind, Kind::Ge) { -1 } else { 1 };
            tab[i][m + k] = BigRational::from_integer(BigInt::from(sign));
            basis[i] = m + k;
        }
        if let Some(k) = arts.iter().position(|&r| r == i) {
            tab[i][m + slacks.len() + k] = BigRational::one();
            basis[i] = m + slacks.len() + k;
        }
    }
    let first_art = m + slacks.len();

    let pivot = |tab: &mut Vec<Vec<BigRational>>,
                 obj: &mut Vec<BigRational>,
                 basis: &mut [usize],
                 r: usize,
                 s: usize| {
        let p = tab[r][s].clone();
        for v in tab[r].iter_mut() {
            if !v.is_zero() {
                *v /= &p;
            }
        }
        let support: Vec<usize> = (0..=cols).filter(|&j| !tab[r][j].is_zero()).collect();
        let prow: Vec<BigRational> = support.iter().map(|&j| tab[r][j].clone()).collect();
        for i in 0..tab.len() {
            if i != r && !tab[i][s].is_zero() {
                let f = tab[i][s].clone();
                for (&j, a) in support.iter().zip(&prow) {
                    tab[i][j] -= &f * a;
                }
            }
        }
        if !obj[s].is_zero() {
            let f = obj[s].clone();
            for (&j, a) in support.iter().zip(&prow) {
                obj[j] -= &f * a;
            }
        }
        basis[r] = s;
    };

    let run = |tab: &mut Vec<Vec<BigRational>>,
               obj: &mut Vec<BigRational>,
               basis: &mut Vec<usize>,
               allowed: usize| loop {
        let Some(s) = (0..allowed).find(|&j| obj[j].is_negative()) else {
            return;
        };
        let mut best: Option<(usize, BigRational)> = None;
        for i in 0..tab.len() {
            if tab[i][s].is_positive() {
                let ratio = &tab[i][rhs] / &tab[i][s];
                let better = match &best {
                    None => true,
                    Some((r, q)) => ratio < *q || (ratio == *q && basis[i] < basis[*r]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
        }
        let (r, _) = best.expect("phase objectives are bounded");
        pivot(tab, obj, basis, r, s);
    };

    let mut obj = vec![zero.clone(); cols + 1];
    for j in first_art..cols {
        obj[j] = BigRational::one();
    }
    for i in 0..tab.len() {
        if basis[i] >= first_art {
            for j in 0..=cols {
                let v = tab[i][j].clone();
                obj[j] -= v;
            }
        }
    }
    run(&mut tab, &mut obj, &mut basis, cols);
    if !obj[rhs].is_zero() {
        return None;
    }
    let mut i = 0;
    while i < tab.len() {
        if basis[i] >= first_art {
            if let Some(s) = (0..first_art).find(|&j| !tab[i][j].is_zero()) {
                pivot(&mut tab, &mut obj, &mut basis, i, s);
            } else {
                tab.remove(i);
                basis.remove(i);
                continue;
            }
        }
        i += 1;
    }
    let mut obj = vec![zero.clone(); cols + 1];
    obj[..m].clone_from_slice(cost);
    for i in 0..tab.len() {
        let cb = if basis[i] < m {
            cost[basis[i]].clone()
        } else {
            zero.clone()
        };
        if !cb.is_zero() {
            for j in 0..=cols {
                let v = &cb * &tab[i][j];
                obj[j] -= v;
            }
        }
    }
    run(&mut tab, &mut obj, &mut basis, first_art);
    Some(-obj[rhs].clone())
}

/// Held-Karp optimum in exact arithmetic with every subtour row written out.
///
/// Each row `x(δ(S)) ≥ 2` is listed once for the side `S` avoiding vertex 0
/// (the two sides give the same row). Costs are the exact binary values of
/// the floating-point distances.
pub fn rational_held_karp(points: &PointSet) -> Option<f64> {
    let n = points.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let cost: Vec<BigRational> = pairs
        .iter()
        .map(|&(i, j)| BigRational::from_float(euclid(points, i, j)).expect("finite"))
        .collect();
    let mut rows = Vec::new();
    for v in 0..n {
        rows.push((
            pairs
                .iter()
                .map(|&(i, j)| i64::from(i == v || j == v))
                .collect(),
            Kind::Eq,
            2,
        ));
    }
    for mask in 1u32..(1 << n) - 1 {
        if mask & 1 == 0 {
            let inside = |v: usize| mask >> v & 1 == 1;
            rows.push((
                pairs
                    .iter()
                    .map(|&(i, j)| i64::from(inside(i) != inside(j)))
                    .collect(),
                Kind::Ge,
                2,
            ));
        }
    }
    for e in 0..pairs.len() {
        rows.push((
            (0..pairs.len()).map(|f| i64::from(f == e)).collect(),
            Kind::Le,
            1,
        ));
    }
    let value = rational_min(&cost, &rows)?;
    Some(ratio_to_f64(&value))
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().expect("representable")
}

/// Canonical comb: sorted handle, sorted teeth ordered by their smallest vertex.
pub type RawComb = (Vec<usize>, Vec<Vec<usize>>);

fn bits(mask: u32) -> Vec<usize> {
    (0..32).filter(|&v| mask >> v & 1 == 1).collect()
}

fn connected(mask: u32, adj: &[Vec<bool>]) -> bool {
    let start = mask.trailing_zeros() as usize;
    let mut seen = 1u32 << start;
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        for v in bits(mask) {
            if seen >> v & 1 == 0 && adj[u][v] {
                seen |= 1 << v;
                stack.push(v);
            }
        }
    }
    seen == mask
}

/// Every comb on `n` vertices with size at most `c`, found by trying all
/// handles and all families of disjoint teeth. With `adj`, handle and teeth
/// must induce connected subgraphs.
pub fn brute_force_combs(n: usize, c: usize, adj: Option<&[Vec<bool>]>) -> BTreeSet<RawComb> {
    let ok = |mask: u32| adj.is_none_or(|a| connected(mask, a));
    let mut out = BTreeSet::new();
    for h in 1u32..(1 << n) {
        let hs = h.count_ones() as usize;
        if hs < 3 || !ok(h) {
            continue;
        }
        let teeth: Vec<u32> = (1u32..(1 << n))
            .filter(|&t| {
                t & h != 0 && t & !h != 0 && hs + (t & !h).count_ones() as usize <= c && ok(t)
            })
            .collect();
        let mut chosen = Vec::new();
        fn pick(
            teeth: &[u32],
            from: usize,
            used: u32,
            size: usize,
            c: usize,
            h: u32,
            chosen: &mut Vec<u32>,
            out: &mut BTreeSet<RawComb>,
        ) {
            if chosen.len() >= 3 && chosen.len() % 2 == 1 {
                let mut ts: Vec<Vec<usize>> = chosen.iter().map(|&t| bits(t)).collect();
                ts.sort();
                out.insert((bits(h), ts));
            }
            for k in from..teeth.len() {
                let t = teeth[k];
                let extra = (t & !h).count_ones() as usize;
                if t & used == 0 && size + extra <= c {
                    chosen.push(t);
                    pick(teeth, k + 1, used | t, size + extra, c, h, chosen, out);
                    chosen.pop();
                }
            }
        }
        pick(&teeth, 0, 0, hs, c, h, &mut chosen, &mut out);
    }
    out
}

/// `x(δ(S))` for every vertex mask `S`.
pub fn cut_table(x: &FractionalSolution) -> Vec<f64> {
    let n = x.n();
    let support = x.support(1e-12);
    (0u32..1 << n)
        .map(|s| {
            support
                .iter()
                .filter(|&&(i, j, _)| (s >> i & 1) != (s >> j & 1))
                .map(|&(_, _, w)| w)
                .sum()
        })
        .collect()
}

pub fn mask(set: &[usize]) -> u32 {
    set.iter().fold(0, |m, &v| m | 1 << v)
}

/// Random half-integral solution whose weight-½ edges form edge-disjoint
/// triangles: an even number of triangles, weight-1 paths pairing the
/// vertices covered once and threading the uncovered ones. `None` when the
/// draw is rejected (edge clash or a violated subtour constraint).
pub fn random_half_integral(rng: &mut impl Rng, n: usize) -> Option<FractionalSolution> {
    let max_tri = 2 * n / 3;
    let m = 2 * rng.gen_range(1..=(max_tri / 2).max(1));
    let mut count = vec![0usize; n];
    let mut half: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut triangles = Vec::new();
    let mut attempts = 0;
    while triangles.len() < m {
        attempts += 1;
        if attempts > 200 {
            return None;
        }
        let open: Vec<usize> = (0..n).filter(|&v| count[v] < 2).collect();
        if open.len() < 3 {
            return None;
        }
        let mut t: Vec<usize> = open.choose_multiple(rng, 3).copied().collect();
        t.sort_unstable();
        let edges = [(t[0], t[1]), (t[0], t[2]), (t[1], t[2])];
        if edges.iter().any(|e| half.contains(e)) {
            continue;
        }
        half.extend(edges);
        for &v in &t {
            count[v] += 1;
        }
        triangles.push(t);
    }
    let mut ones: Vec<usize> = (0..n).filter(|&v| count[v] == 1).collect();
    let mut free: Vec<usize> = (0..n).filter(|&v| count[v] == 0).collect();
    ones.shuffle(rng);
    free.shuffle(rng);
    let mut paths: Vec<Vec<usize>> = ones.chunks(2).map(|p| p.to_vec()).collect();
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    if paths.is_empty() {
        if !free.is_empty() && free.len() < 3 {
            return None;
        }
        if !free.is_empty() {
            cycles.push(free.clone());
        }
    } else {
        for v in free {
            let p = rng.gen_range(0..paths.len());
            let at = rng.gen_range(1..paths[p].len());
            paths[p].insert(at, v);
        }
    }
    let mut full: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut add = |a: usize, b: usize| {
        let e = (a.min(b), a.max(b));
        !half.contains(&e) && full.insert(e)
    };
    for p in &paths {
        for w in p.windows(2) {
            if !add(w[0], w[1]) {
                return None;
            }
        }
    }
    for c in &cycles {
        for i in 0..c.len() {
            if !add(c[i], c[(i + 1) % c.len()]) {
                return None;
            }
        }
    }
    let mut edges: Vec<(usize, usize, f64)> = half.iter().map(|&(a, b)| (a, b, 0.5)).collect();
    edges.extend(full.iter().map(|&(a, b)| (a, b, 1.0)));
    let x = FractionalSolution::from_edges(n, &edges).ok()?;
    check_feasible(&x, 1e-9).passes.then_some(x)
}

/// Support adjacency matrix of `x`.
pub fn adjacency(x: &FractionalSolution) -> Vec<Vec<bool>> {
    let n = x.n();
    let mut adj = vec![vec![false; n]; n];
    for (i, j, _) in x.support(1e-12) {
        adj[i][j] = true;
        adj[j][i] = true;
    }
    adj
}
