use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::PointSet;
use crate::error::{invalid, Result};

pub const OUTER_RADIUS: f64 = 4.0;
pub const INNER_RADIUS: f64 = 1.0;

/// Role map of a two-ring gadget inside some point set.
///
/// `outer_ids[j]` sits at angle `πj/k` on the radius-4 ring, `inner_ids[j]` at
/// angle `2πj/k` on the radius-1 ring, `gap_ids = [(2,0), (-2,0)]`, all before
/// scaling by `scale`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GadgetMeta {
    pub k: usize,
    pub outer_ids: Vec<usize>,
    pub inner_ids: Vec<usize>,
    pub gap_ids: [usize; 2],
    pub outer_radius: f64,
    pub inner_radius: f64,
    pub scale: f64,
}

impl GadgetMeta {
    pub fn point_count(&self) -> usize {
        3 * self.k + 2
    }

    /// Every label of the gadget: outer ring, inner ring, then the two gap points.
    pub fn labels(&self) -> Vec<usize> {
        let mut out = self.outer_ids.clone();
        out.extend_from_slice(&self.inner_ids);
        out.extend_from_slice(&self.gap_ids);
        out
    }

    /// Same roles with every label shifted by `offset`.
    pub fn shifted(&self, offset: usize) -> GadgetMeta {
        GadgetMeta {
            outer_ids: self.outer_ids.iter().map(|l| l + offset).collect(),
            inner_ids: self.inner_ids.iter().map(|l| l + offset).collect(),
            gap_ids: [self.gap_ids[0] + offset, self.gap_ids[1] + offset],
            ..self.clone()
        }
    }

    /// Same roles with labels sent through `map` (`map[old] = new`).
    pub fn relabeled(&self, map: &[usize]) -> GadgetMeta {
        GadgetMeta {
            outer_ids: self.outer_ids.iter().map(|&l| map[l]).collect(),
            inner_ids: self.inner_ids.iter().map(|&l| map[l]).collect(),
            gap_ids: [map[self.gap_ids[0]], map[self.gap_ids[1]]],
            ..self.clone()
        }
    }
}

/// The `3k + 2` point gadget: `2k` points on the radius-4 circle, `k` on the
/// radius-1 circle and the gap points `(±2, 0)`, all multiplied by `scale`.
pub fn build_gadget(k: usize, scale: f64) -> Result<(PointSet, GadgetMeta)> {
    if k < 4 {
        return invalid(format!("gadget ring size k = {k} is below 4"));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return invalid("scale must be positive");
    }
    let mut coords = Vec::with_capacity(2 * (3 * k + 2));
    for j in 0..2 * k {
        let a = PI * j as f64 / k as f64;
        coords.extend([
            OUTER_RADIUS * a.cos() * scale,
            OUTER_RADIUS * a.sin() * scale,
        ]);
    }
    for j in 0..k {
        let a = 2.0 * PI * j as f64 / k as f64;
        coords.extend([
            INNER_RADIUS * a.cos() * scale,
            INNER_RADIUS * a.sin() * scale,
        ]);
    }
    coords.extend([2.0 * scale, 0.0, -2.0 * scale, 0.0]);
    let meta = GadgetMeta {
        k,
        outer_ids: (0..2 * k).collect(),
        inner_ids: (2 * k..3 * k).collect(),
        gap_ids: [3 * k, 3 * k + 1],
        outer_radius: OUTER_RADIUS,
        inner_radius: INNER_RADIUS,
        scale,
    };
    Ok((PointSet::from_flat(2, coords)?, meta))
}
