use serde::{Deserialize, Serialize};

use super::heuristic::{nearest_neighbour, path_two_opt};
use super::Tour;
use crate::error::{invalid, Result};
use crate::instance::{Dissection, PointSet};

/// Number of structural properties checked by [`check_restricted_tour`].
pub const RESTRICTED_PROPERTIES: usize = 6;

/// A tour built box by box along the snake order of a dissection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DissectionTour {
    pub tour: Tour,
    pub dissection: Dissection,
    /// Outcome of each property of [`check_restricted_tour`].
    pub conformance: [bool; RESTRICTED_PROPERTIES],
}

impl DissectionTour {
    pub fn conforms(&self) -> bool {
        self.conformance.iter().all(|&c| c)
    }
}

fn slot(d: &Dissection, j: usize, k: usize) -> usize {
    d.interface[j][k].expect("interface slot present")
}

fn validate(points: &PointSet, d: &Dissection) -> Result<()> {
    let s = d.box_count();
    if d.box_of.len() != points.len() || s < 2 || d.interface.len() != s {
        return invalid("dissection does not match the point set");
    }
    for j in 0..s {
        let m = d.box_members(j);
        if m.len() < 4 {
            return invalid(format!("box {j} holds {} points", m.len()));
        }
        let want: &[usize] = match j {
            0 => &[2, 3],
            _ if j == s - 1 => &[0, 1],
            _ => &[0, 1, 2, 3],
        };
        for &k in want {
            match d.interface[j][k] {
                Some(v) if m.contains(&v) => {}
                _ => return invalid(format!("box {j} lacks interface point {}", k + 1)),
            }
        }
    }
    Ok(())
}

fn box_path(
    points: &PointSet,
    members: &[usize],
    start: usize,
    end: usize,
    skip: &[usize],
) -> Vec<usize> {
    let inner: Vec<usize> = members
        .iter()
        .copied()
        .filter(|v| *v != end && !skip.contains(v))
        .collect();
    let mut path = nearest_neighbour(points, start, &inner);
    path.push(end);
    path_two_opt(points, &mut path);
    path
}

/// Two passes over the snake order: forward through `x^1 → x^3` paths that
/// cover every non-interface point, backward over the direct `x^4 → x^2` edges.
pub fn dissection_tour(points: &PointSet, dissection: &Dissection) -> Result<DissectionTour> {
    validate(points, dissection)?;
    let d = dissection;
    let s = d.box_count();
    let mut order = Vec::with_capacity(points.len());
    for j in 0..s {
        let members = d.box_members(j);
        let path = if j == 0 {
            box_path(points, members, slot(d, 0, 3), slot(d, 0, 2), &[])
        } else if j == s - 1 {
            box_path(points, members, slot(d, j, 0), slot(d, j, 1), &[])
        } else {
            box_path(
                points,
                members,
                slot(d, j, 0),
                slot(d, j, 2),
                &[slot(d, j, 1), slot(d, j, 3)],
            )
        };
        order.extend(path);
    }
    for j in (1..s - 1).rev() {
        order.push(slot(d, j, 3));
        order.push(slot(d, j, 1));
    }
    let tour = Tour::new(points, order)?;
    let conformance = check_restricted_tour(d, &tour.order);
    Ok(DissectionTour {
        tour,
        dissection: d.clone(),
        conformance,
    })
}

/// Checks the six properties of restricted tours, with boxes at positions
/// `0..s` and interface points `x^1..x^4`:
/// 1. `x_0^4` joins `x_0^3` along a tour arc inside box 0;
/// 2. `x_j^3` is adjacent to `x_{j+1}^1` for `j < s−1`;
/// 3. `x_j^1` joins `x_j^3` inside box `j` for `0 < j < s−1`;
/// 4. `x_{s−1}^1` joins `x_{s−1}^2` inside the last box;
/// 5. `x_j^2` is adjacent to `x_{j−1}^4` for `j ≥ 1`;
/// 6. `x_j^2` joins `x_j^4` inside box `j` for `0 < j < s−1`.
pub fn check_restricted_tour(d: &Dissection, order: &[usize]) -> [bool; RESTRICTED_PROPERTIES] {
    let n = order.len();
    let s = d.box_count();
    let mut pos = vec![usize::MAX; d.box_of.len()];
    for (i, &v) in order.iter().enumerate() {
        if v < pos.len() {
            pos[v] = i;
        }
    }
    if n != d.box_of.len() || pos.contains(&usize::MAX) || s < 2 {
        return [false; RESTRICTED_PROPERTIES];
    }
    let get = |j: usize, k: usize| d.interface.get(j).and_then(|i| i[k]);
    let adjacent = |a: Option<usize>, b: Option<usize>| match (a, b) {
        (Some(a), Some(b)) => {
            let gap = pos[a].abs_diff(pos[b]);
            gap == 1 || gap == n - 1
        }
        _ => false,
    };
    let arc_inside = |a: Option<usize>, b: Option<usize>, j: usize| {
        let (Some(a), Some(b)) = (a, b) else {
            return false;
        };
        let cell = d.order[j];
        [1, n - 1].iter().any(|&step| {
            let mut i = pos[a];
            loop {
                if d.box_of[order[i]] != cell {
                    return false;
                }
                if order[i] == b {
                    return true;
                }
                i = (i + step) % n;
            }
        })
    };
    let middle = 1..s - 1;
    [
        arc_inside(get(0, 3), get(0, 2), 0),
        (0..s - 1).all(|j| adjacent(get(j, 2), get(j + 1, 0))),
        middle.clone().all(|j| arc_inside(get(j, 0), get(j, 2), j)),
        arc_inside(get(s - 1, 0), get(s - 1, 1), s - 1),
        (1..s).all(|j| adjacent(get(j, 1), get(j - 1, 3))),
        middle.clone().all(|j| arc_inside(get(j, 1), get(j, 3), j)),
    ]
}
