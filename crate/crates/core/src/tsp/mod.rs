//! Tours: exact dynamic programming, permutation brute force, nearest-neighbour
//! with 2-opt, and the dissection tour.

mod dissection_tour;
mod exact;
mod heuristic;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::instance::PointSet;

pub use dissection_tour::{
    check_restricted_tour, dissection_tour, DissectionTour, RESTRICTED_PROPERTIES,
};
pub use exact::{brute_force_tsp, exact_tsp_dp, BRUTE_FORCE_LIMIT, DP_LIMIT};
pub use heuristic::{
    constrained_heuristic_tour, heuristic_tour, is_two_opt_optimal, path_two_opt, two_opt,
};

/// A Hamiltonian cycle as a label sequence; the closing edge is implicit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tour {
    pub order: Vec<usize>,
    pub length: f64,
}

impl Tour {
    /// Validates `order` as a permutation of `points` and measures it.
    pub fn new(points: &PointSet, order: Vec<usize>) -> Result<Tour> {
        let n = points.len();
        if order.len() != n {
            return invalid(format!("tour visits {} of {n} points", order.len()));
        }
        let mut seen = vec![false; n];
        for &v in &order {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return invalid(format!("tour is not a permutation (label {v})"));
            }
        }
        Ok(Tour::measured(points, order))
    }

    /// Canonical rotation/direction, then length; `order` must be a permutation.
    pub(crate) fn measured(points: &PointSet, order: Vec<usize>) -> Tour {
        let order = canonical(order);
        let length = tour_length(points, &order);
        Tour { order, length }
    }

    /// Tour edges as `(min, max)` pairs.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.order.len();
        (0..n)
            .map(|i| crate::edges::ordered(self.order[i], self.order[(i + 1) % n]))
            .collect()
    }
}

/// Sum of consecutive distances including the closing edge.
pub fn tour_length(points: &PointSet, order: &[usize]) -> f64 {
    let n = order.len();
    if n < 2 {
        return 0.0;
    }
    (0..n)
        .map(|i| points.distance(order[i], order[(i + 1) % n]))
        .sum()
}

/// Rotates the cycle to start at its smallest label and orients it so the
/// second label is smaller than the last.
pub fn canonical(mut order: Vec<usize>) -> Vec<usize> {
    let n = order.len();
    if n < 3 {
        order.sort_unstable();
        return order;
    }
    let start = (0..n).min_by_key(|&i| order[i]).unwrap();
    order.rotate_left(start);
    if order[1] > order[n - 1] {
        order[1..].reverse();
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form() {
        assert_eq!(canonical(vec![3, 1, 0, 2, 4]), vec![0, 1, 3, 4, 2]);
        assert_eq!(canonical(vec![2, 0, 1]), vec![0, 1, 2]);
    }

    #[test]
    fn tour_validation_and_json() {
        let x = PointSet::new(
            2,
            &[
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![1.0, 1.0],
                vec![0.0, 1.0],
            ],
        )
        .unwrap();
        assert!(Tour::new(&x, vec![0, 1, 1, 3]).is_err());
        assert!(Tour::new(&x, vec![0, 1, 2]).is_err());
        let t = Tour::new(&x, vec![2, 1, 0, 3]).unwrap();
        assert_eq!(t.order, vec![0, 1, 2, 3]);
        assert_eq!(t.length, 4.0);
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(json, r#"{"order":[0,1,2,3],"length":4.0}"#);
    }
}
