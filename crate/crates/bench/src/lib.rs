//! Shared inputs for the criterion benchmarks under `benches/`.

use combgap::gadget::{build_gadget_solution, EntryMode};
use combgap::instance::build_gadget;
use combgap::{generate_uniform, FractionalSolution, PointSet};

/// Uniform planar instance; panics only on `n = 0`.
pub fn uniform(n: usize, seed: u64) -> PointSet {
    generate_uniform(n, 2, seed).expect("n is positive")
}

/// Closed single-entry gadget solution of ring size `k` built for comb size `c`.
pub fn closed_gadget(k: usize, c: usize) -> FractionalSolution {
    let (_, meta) = build_gadget(k, 1.0).expect("k is at least 6");
    let sol = build_gadget_solution(&meta, c, EntryMode::Single, None).expect("valid gadget");
    sol.closed(&meta).expect("closable").solution
}
