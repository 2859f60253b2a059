mod common;

use std::collections::BTreeSet;

use combgap::combs::{enumerate_combs, separate_combs, SupportGraph, COMB_TOL};
use combgap::lp::{held_karp, CUT_TOL};
use combgap::tsp::{brute_force_tsp, canonical};
use combgap::{
    comb_lhs, comb_lp, exact_tsp_dp, generate_uniform, Comb, EdgeFixings, FractionalSolution,
    PointSet,
};
use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn raw(c: &Comb) -> RawComb {
    (c.handle().to_vec(), c.teeth().to_vec())
}

fn to_comb(r: &RawComb) -> Comb {
    Comb::new(r.0.clone(), r.1.clone()).unwrap()
}

#[test]
fn held_karp_matches_rational_lp() {
    for seed in 0..6 {
        let pts = generate_uniform(5 + seed as usize % 3, 2, 100 + seed).unwrap();
        let exact = rational_held_karp(&pts).unwrap();
        let hk = held_karp(&pts, &EdgeFixings::new(), CUT_TOL).unwrap().value;
        assert!(
            (hk - exact).abs() <= 1e-6 * exact,
            "seed {seed}: {hk} vs {exact}"
        );
    }
}

#[test]
fn unit_square_rational_value_is_four() {
    let pts = PointSet::new(
        2,
        &[
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ],
    )
    .unwrap();
    assert_eq!(rational_held_karp(&pts), Some(4.0));
}

#[test]
fn dp_and_library_brute_force_match_permutations() {
    for seed in 0..20 {
        let n = 5 + seed as usize % 5;
        let pts = generate_uniform(n, 2, seed).unwrap();
        let (len, order) = permutation_tsp(&pts);
        let dp = exact_tsp_dp(&pts).unwrap();
        assert_eq!(canonical(dp.order.clone()), canonical(order), "seed {seed}");
        assert!((dp.length - len).abs() <= 1e-12 * len);
        assert!((brute_force_tsp(&pts).unwrap().length - len).abs() <= 1e-12 * len);
    }
}

#[test]
fn enumeration_on_complete_graphs_matches_brute_force() {
    for n in 6..=8 {
        for c in [6, 7, n] {
            let lib: BTreeSet<RawComb> = enumerate_combs(&SupportGraph::complete(n).unwrap(), c)
                .iter()
                .map(raw)
                .collect();
            assert_eq!(lib, brute_force_combs(n, c, None), "n = {n}, c = {c}");
        }
    }
}

fn support_graph(adj: &[Vec<bool>]) -> SupportGraph {
    let mut g = SupportGraph::new(adj.len()).unwrap();
    for i in 0..adj.len() {
        for j in i + 1..adj.len() {
            if adj[i][j] {
                g.add_edge(i, j);
            }
        }
    }
    g
}

#[test]
fn enumeration_on_sparse_supports_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut checked = 0;
    for _ in 0..400 {
        let n = 6 + checked % 3;
        let Some(x) = random_half_integral(&mut rng, n) else {
            continue;
        };
        let adj = adjacency(&x);
        let lib: BTreeSet<RawComb> = enumerate_combs(&support_graph(&adj), n)
            .iter()
            .map(raw)
            .collect();
        assert_eq!(lib, brute_force_combs(n, n, Some(&adj)));
        checked += 1;
        if checked == 30 {
            break;
        }
    }
    assert_eq!(checked, 30);
}

#[test]
fn cycle_support_combs_match_brute_force() {
    for n in 6..=8 {
        let order: Vec<usize> = (0..n).collect();
        let adj = adjacency(&FractionalSolution::from_tour(&order));
        let lib: BTreeSet<RawComb> = enumerate_combs(&support_graph(&adj), 6)
            .iter()
            .map(raw)
            .collect();
        assert_eq!(lib, brute_force_combs(n, 6, Some(&adj)));
    }
}

#[test]
fn separation_finds_the_least_slack_comb() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut violated = 0;
    let mut checked = 0;
    while checked < 60 {
        let n = 6 + checked % 4;
        let Some(x) = random_half_integral(&mut rng, n) else {
            continue;
        };
        checked += 1;
        let adj = adjacency(&x);
        let best = brute_force_combs(n, n, Some(&adj))
            .iter()
            .map(|r| comb_lhs(&x, &to_comb(r)).unwrap() - (3 * r.1.len() + 1) as f64)
            .fold(f64::INFINITY, f64::min);
        match separate_combs(&x, n, COMB_TOL).unwrap() {
            Some(hit) => {
                violated += 1;
                assert!((hit.slack - best).abs() < 1e-9, "{} vs {best}", hit.slack);
            }
            None => assert!(best >= -COMB_TOL),
        }
    }
    assert!(violated > 0, "no violated instance drawn");
}

#[test]
fn bounds_sit_below_exact_tours() {
    for seed in 0..12 {
        let n = 6 + seed as usize % 7;
        let pts = generate_uniform(n, 2, 300 + seed).unwrap();
        let opt = exact_tsp_dp(&pts).unwrap().length;
        let hk = held_karp(&pts, &EdgeFixings::new(), CUT_TOL).unwrap().value;
        assert!(hk <= opt + 1e-9);
        if n <= 10 {
            let comb = comb_lp(&pts, n, &EdgeFixings::new(), CUT_TOL)
                .unwrap()
                .value;
            assert!(
                hk <= comb + 1e-9 && comb <= opt + 1e-9,
                "n = {n}: {hk} {comb} {opt}"
            );
        }
    }
}
