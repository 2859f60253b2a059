//! Linear programming kernel and the Held-Karp cutting-plane solver.

#[cfg(feature = "lp-dump")]
pub mod lp_format;
mod mincut;
mod relaxation;
mod simplex;
mod solution;

pub use mincut::{min_cut, support_components};
pub use relaxation::{
    check_feasible, held_karp, relaxation_model, solve_relaxation, Cut, CutPool, FeasibilityReport,
    Separation, CUT_TOL,
};
pub use simplex::{solve_lp, LpModel, LpSolution, LpStatus, Row, Sense, FEAS_TOL};
pub use solution::{BoundResult, BoundStatus, EdgeFixings, FractionalSolution};
