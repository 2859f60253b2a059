//! Euclidean TSP laboratory: Held-Karp and comb-augmented LP relaxations,
//! the two-ring gadget and its half-integral solution, exact and heuristic
//! tours, branch-and-bound, and Monte-Carlo experiments.

pub mod bnb;
pub mod combs;
pub mod edges;
pub mod error;
pub mod experiments;
pub mod gadget;
pub mod instance;
pub mod lp;
pub mod tsp;

pub use bnb::{branch_and_bound, BnBConfig, BoundKind};
pub use combs::{comb_lhs, comb_lp, Comb};
pub use error::{Error, Result};
pub use experiments::{estimate_constants, gap_experiment, tree_growth_experiment, RunConfig};
pub use gadget::{
    build_gadget_solution, local_lengths, splice, EntryMode, GadgetSolution, GapReport,
};
pub use instance::{generate_uniform, PointSet};
pub use lp::{check_feasible, held_karp, BoundResult, EdgeFixings, FractionalSolution};
pub use tsp::{exact_tsp_dp, heuristic_tour, Tour};
