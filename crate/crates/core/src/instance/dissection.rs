use serde::{Deserialize, Serialize};

use super::PointSet;
use crate::error::{invalid, Error, Result};

/// Grid dissection of `[0,1]^d` into `s = m^d` equal boxes visited in snake order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dissection {
    pub k_box: f64,
    /// Boxes per axis.
    pub per_side: usize,
    pub dim: usize,
    /// Grid cell of each label (row-major cell index).
    pub box_of: Vec<usize>,
    /// `order[j]` is the cell visited at position `j`.
    pub order: Vec<usize>,
    /// Labels of each cell in increasing label order, indexed by cell.
    pub members: Vec<Vec<usize>>,
    /// Interface points per position in `order`: `[x^1, x^2, x^3, x^4]`.
    /// Unused slots at the two ends (`x^1, x^2` of the first box and
    /// `x^3, x^4` of the last) are `None`.
    pub interface: Vec<[Option<usize>; 4]>,
}

impl Dissection {
    pub fn box_count(&self) -> usize {
        self.order.len()
    }

    pub fn side_length(&self) -> f64 {
        1.0 / self.per_side as f64
    }

    /// Grid coordinates of a cell.
    pub fn cell_coords(&self, cell: usize) -> Vec<usize> {
        let mut rest = cell;
        (0..self.dim)
            .map(|_| {
                let c = rest % self.per_side;
                rest /= self.per_side;
                c
            })
            .collect()
    }

    /// Labels of the box at snake position `j`.
    pub fn box_members(&self, j: usize) -> &[usize] {
        &self.members[self.order[j]]
    }
}

/// Boustrophedon order of the `m^d` grid: consecutive cells differ by one step on one axis.
pub(crate) fn snake_order(per_side: usize, dim: usize) -> Vec<usize> {
    let total = per_side.pow(dim as u32);
    (0..total)
        .map(|t| {
            let mut digits = Vec::with_capacity(dim);
            let mut rest = t;
            for _ in 0..dim {
                digits.push(rest % per_side);
                rest /= per_side;
            }
            // digits[dim-1] is most significant; reflect lower axes by parity of the reflected higher coordinates.
            let mut coords = digits.clone();
            let mut parity = 0;
            for axis in (0..dim).rev() {
                if parity % 2 == 1 {
                    coords[axis] = per_side - 1 - digits[axis];
                }
                parity += coords[axis];
            }
            coords.iter().rev().fold(0, |acc, &c| acc * per_side + c)
        })
        .collect()
}

/// Dissects `[0,1]^d` into `s ≈ n / (K_box log n)` boxes, snake-ordered, and
/// picks the lowest-label interface points of each box.
pub fn dissect(points: &PointSet, k_box: f64) -> Result<Dissection> {
    let n = points.len();
    let dim = points.dim();
    if !(k_box > 0.0) {
        return invalid("K_box must be positive");
    }
    if n < 8 {
        return invalid("dissection needs at least 8 points");
    }
    if points.points().flatten().any(|c| !(0.0..=1.0).contains(c)) {
        return invalid("dissection expects points in the unit cube");
    }
    let target = n as f64 / (k_box * (n as f64).ln());
    let per_side = (target.powf(1.0 / dim as f64) + 1e-9).floor() as usize;
    if per_side.pow(dim as u32) < 2 {
        return invalid(format!("K_box = {k_box} leaves fewer than two boxes"));
    }
    let total = per_side.pow(dim as u32);
    let mut box_of = Vec::with_capacity(n);
    let mut members = vec![Vec::new(); total];
    for (label, p) in points.points().enumerate() {
        let cell = p.iter().rev().fold(0, |acc, &c| {
            let g = ((c * per_side as f64).floor() as usize).min(per_side - 1);
            acc * per_side + g
        });
        box_of.push(cell);
        members[cell].push(label);
    }
    let order = snake_order(per_side, dim);
    for (j, &cell) in order.iter().enumerate() {
        if members[cell].len() < 4 {
            return Err(Error::UnderfilledBox {
                index: j,
                count: members[cell].len(),
            });
        }
    }
    let last = order.len() - 1;
    let interface = order
        .iter()
        .enumerate()
        .map(|(j, &cell)| {
            let m = &members[cell];
            if j == 0 {
                [None, None, Some(m[0]), Some(m[1])]
            } else if j == last {
                [Some(m[0]), Some(m[1]), None, None]
            } else {
                [Some(m[0]), Some(m[1]), Some(m[2]), Some(m[3])]
            }
        })
        .collect();
    Ok(Dissection {
        k_box,
        per_side,
        dim,
        box_of,
        order,
        members,
        interface,
    })
}
