//! Detection of `(ε, D)`-copies of a planar template.
//!
//! Candidates are seeded from the template's diameter pair: every ordered pair
//! of instance points at nearly the same distance fixes a rigid motion (with or
//! without reflection), the remaining template points are matched greedily to
//! their nearest instance points, and the motion is refit by least squares
//! before the residual and isolation tests.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{euclid, PointSet};
use crate::error::{invalid, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CopySpec {
    pub template: PointSet,
    pub eps: f64,
    pub isolation: f64,
}

/// One detected copy; `labels[i]` is the instance point matched to template point `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CopyMatch {
    pub labels: Vec<usize>,
    pub residual: f64,
    pub isolation: f64,
}

struct Grid {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
}

impl Grid {
    fn new(points: &PointSet, cell: f64) -> Self {
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in points.points().enumerate() {
            buckets.entry(Self::key(cell, p)).or_default().push(i);
        }
        Grid { cell, buckets }
    }

    fn key(cell: f64, p: &[f64]) -> (i64, i64) {
        ((p[0] / cell).floor() as i64, (p[1] / cell).floor() as i64)
    }

    /// Labels in cells overlapping the disc of radius `r` around `p`, in label order.
    fn near(&self, p: &[f64], r: f64) -> Vec<usize> {
        let span = (r / self.cell).ceil() as i64;
        let (cx, cy) = Self::key(self.cell, p);
        let mut out = Vec::new();
        for dx in -span..=span {
            for dy in -span..=span {
                if let Some(b) = self.buckets.get(&(cx + dx, cy + dy)) {
                    out.extend_from_slice(b);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

#[derive(Clone, Copy)]
struct Motion {
    cos: f64,
    sin: f64,
    reflect: bool,
    tx: f64,
    ty: f64,
}

impl Motion {
    fn apply(&self, p: &[f64]) -> [f64; 2] {
        let (x, y) = (p[0], if self.reflect { -p[1] } else { p[1] });
        [
            self.cos * x - self.sin * y + self.tx,
            self.sin * x + self.cos * y + self.ty,
        ]
    }
}

/// Least-squares rigid motion taking `src` onto `dst` with a fixed reflection flag.
fn procrustes(src: &[[f64; 2]], dst: &[[f64; 2]], reflect: bool) -> Motion {
    let m = src.len() as f64;
    let flip = |p: &[f64; 2]| [p[0], if reflect { -p[1] } else { p[1] }];
    let (mut sx, mut sy, mut dx, mut dy) = (0.0, 0.0, 0.0, 0.0);
    for (s, d) in src.iter().zip(dst) {
        let s = flip(s);
        sx += s[0];
        sy += s[1];
        dx += d[0];
        dy += d[1];
    }
    let (sx, sy, dx, dy) = (sx / m, sy / m, dx / m, dy / m);
    let (mut dot, mut cross) = (0.0, 0.0);
    for (s, d) in src.iter().zip(dst) {
        let s = flip(s);
        let (ax, ay) = (s[0] - sx, s[1] - sy);
        let (bx, by) = (d[0] - dx, d[1] - dy);
        dot += ax * bx + ay * by;
        cross += ax * by - ay * bx;
    }
    let angle = if dot == 0.0 && cross == 0.0 {
        0.0
    } else {
        cross.atan2(dot)
    };
    let (sin, cos) = angle.sin_cos();
    Motion {
        cos,
        sin,
        reflect,
        tx: dx - (cos * sx - sin * sy),
        ty: dy - (sin * sx + cos * sy),
    }
}

fn isolation_of(points: &PointSet, grid: &Grid, members: &[usize], radius: f64) -> f64 {
    let mut best = f64::INFINITY;
    for &t in members {
        for o in grid.near(points.point(t), radius) {
            if !members.contains(&o) {
                best = best.min(points.distance(t, o));
            }
        }
    }
    best
}

/// Greedy maximal collection of pairwise disjoint `(ε, D)`-copies of the template.
pub fn find_copies(points: &PointSet, spec: &CopySpec) -> Result<Vec<CopyMatch>> {
    let template = &spec.template;
    if template.is_empty() {
        return invalid("copy template is empty");
    }
    if template.dim() != points.dim() {
        return invalid("template and instance dimensions differ");
    }
    if points.dim() != 2 {
        return invalid("copy detection is implemented for planar point sets");
    }
    if !(spec.eps > 0.0 && spec.isolation > 0.0) {
        return invalid("eps and isolation distance must be positive");
    }
    let m = template.len();
    let tpl: Vec<[f64; 2]> = template.points().map(|p| [p[0], p[1]]).collect();

    let (mut a, mut b, mut diam) = (0, 0, 0.0);
    for i in 0..m {
        for j in i + 1..m {
            let d = template.distance(i, j);
            if d > diam + 1e-12 {
                (a, b, diam) = (i, j, d);
            }
        }
    }
    let cell = spec.isolation.max(diam + 2.0 * spec.eps).max(1e-9);
    let grid = Grid::new(points, cell);
    let mut used = vec![false; points.len()];
    let mut found = Vec::new();

    if m == 1 {
        for p in 0..points.len() {
            let iso = isolation_of(points, &grid, &[p], spec.isolation);
            if iso > spec.isolation {
                used[p] = true;
                found.push(CopyMatch {
                    labels: vec![p],
                    residual: 0.0,
                    isolation: iso,
                });
            }
        }
        return Ok(found);
    }

    let reach = diam + 2.0 * spec.eps;
    for p in 0..points.len() {
        if used[p] {
            continue;
        }
        for q in grid.near(points.point(p), reach) {
            if q == p || used[q] || (points.distance(p, q) - diam).abs() >= 2.0 * spec.eps {
                continue;
            }
            for reflect in [false, true] {
                let seed_src = [tpl[a], tpl[b]];
                let pp = points.point(p);
                let qp = points.point(q);
                let seed_dst = [[pp[0], pp[1]], [qp[0], qp[1]]];
                let motion = procrustes(&seed_src, &seed_dst, reflect);
                let Some(labels) =
                    greedy_match(points, &grid, &tpl, motion, (a, p), (b, q), &used, reach)
                else {
                    continue;
                };
                let dst: Vec<[f64; 2]> = labels
                    .iter()
                    .map(|&l| [points.point(l)[0], points.point(l)[1]])
                    .collect();
                let fit = procrustes(&tpl, &dst, reflect);
                let residual = tpl
                    .iter()
                    .zip(&dst)
                    .map(|(s, d)| euclid(&fit.apply(s), d))
                    .fold(0.0, f64::max);
                if residual >= spec.eps {
                    continue;
                }
                let iso = isolation_of(points, &grid, &labels, spec.isolation);
                if iso <= spec.isolation {
                    continue;
                }
                for &l in &labels {
                    used[l] = true;
                }
                found.push(CopyMatch {
                    labels,
                    residual,
                    isolation: iso,
                });
                break;
            }
            if used[p] {
                break;
            }
        }
    }
    Ok(found)
}

#[allow(clippy::too_many_arguments)]
fn greedy_match(
    points: &PointSet,
    grid: &Grid,
    tpl: &[[f64; 2]],
    motion: Motion,
    (a, p): (usize, usize),
    (b, q): (usize, usize),
    used: &[bool],
    reach: f64,
) -> Option<Vec<usize>> {
    let mut labels = vec![usize::MAX; tpl.len()];
    labels[a] = p;
    labels[b] = q;
    for (i, t) in tpl.iter().enumerate() {
        if i == a || i == b {
            continue;
        }
        let target = motion.apply(t);
        let mut best: Option<(f64, usize)> = None;
        for o in grid.near(&target, reach) {
            if used[o] || labels.contains(&o) {
                continue;
            }
            let d = euclid(points.point(o), &target);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, o));
            }
        }
        labels[i] = best?.1;
    }
    Some(labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> PointSet {
        PointSet::new(2, &[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.2, 0.7]]).unwrap()
    }

    #[test]
    fn exact_translated_copy_is_found() {
        let tpl = triangle();
        let copy = tpl.rotated(0.7).unwrap().translated(&[10.0, 10.0]).unwrap();
        let far = PointSet::new(2, &[vec![0.0, 0.0], vec![20.0, 0.0], vec![0.0, 20.0]]).unwrap();
        let x = far.concat(&copy).unwrap();
        let spec = CopySpec {
            template: tpl,
            eps: 0.05,
            isolation: 2.0,
        };
        let found = find_copies(&x, &spec).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].labels, vec![3, 4, 5]);
        assert!(found[0].residual < 1e-9);
    }

    #[test]
    fn mirrored_and_perturbed_copy_is_found() {
        let tpl = triangle();
        let eps = 0.1;
        let mut pts: Vec<Vec<f64>> = tpl
            .points()
            .map(|p| vec![p[0] + 30.0, -p[1] + 5.0])
            .collect();
        pts[0][0] += eps / 2.0;
        pts[2][1] -= eps / 2.0;
        pts.push(vec![30.0, 5.0 + 2.0 * 2.5]);
        let x = PointSet::new(2, &pts).unwrap();
        let spec = CopySpec {
            template: tpl,
            eps,
            isolation: 2.0,
        };
        let found = find_copies(&x, &spec).unwrap();
        assert_eq!(found.len(), 1);
        assert!(found[0].residual < eps);
    }

    #[test]
    fn crowded_copy_is_rejected() {
        let tpl = triangle();
        let x = tpl
            .concat(&PointSet::new(2, &[vec![1.5, 0.0]]).unwrap())
            .unwrap();
        let spec = CopySpec {
            template: tpl,
            eps: 0.05,
            isolation: 2.0,
        };
        assert!(find_copies(&x, &spec).unwrap().is_empty());
    }

    /// Components of size 3 of the `≤ D` graph whose side lengths are within `2ε` of the template's.
    fn isolated_triangles(x: &PointSet, tpl: &PointSet, eps: f64, d: f64) -> Vec<Vec<usize>> {
        let n = x.len();
        let mut comp: Vec<usize> = (0..n).collect();
        fn root(comp: &mut [usize], v: usize) -> usize {
            let mut r = v;
            while comp[r] != r {
                r = comp[r];
            }
            comp[v] = r;
            r
        }
        for i in 0..n {
            for j in i + 1..n {
                if x.distance(i, j) <= d {
                    let (a, b) = (root(&mut comp, i), root(&mut comp, j));
                    comp[a.max(b)] = a.min(b);
                }
            }
        }
        let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
        for v in 0..n {
            let r = root(&mut comp, v);
            groups.entry(r).or_default().push(v);
        }
        let sides = |p: &PointSet, l: &[usize]| {
            let mut s = [
                p.distance(l[0], l[1]),
                p.distance(l[0], l[2]),
                p.distance(l[1], l[2]),
            ];
            s.sort_by(f64::total_cmp);
            s
        };
        let want = sides(tpl, &[0, 1, 2]);
        let mut out: Vec<Vec<usize>> = groups
            .into_values()
            .filter(|g| g.len() == 3)
            .filter(|g| {
                sides(x, g)
                    .iter()
                    .zip(&want)
                    .all(|(a, b)| (a - b).abs() < 2.0 * eps)
            })
            .collect();
        out.sort();
        out
    }

    #[test]
    fn natural_copies_at_unit_density_match_brute_force() {
        let n = 5000;
        let x = crate::instance::generate_uniform(n, 2, 3)
            .unwrap()
            .scaled((n as f64).sqrt());
        let tpl = triangle();
        let spec = CopySpec {
            template: tpl.clone(),
            eps: 0.1,
            isolation: 2.0,
        };
        let mut found: Vec<Vec<usize>> = find_copies(&x, &spec)
            .unwrap()
            .into_iter()
            .map(|m| {
                let mut l = m.labels;
                l.sort_unstable();
                l
            })
            .collect();
        found.sort();
        let candidates = isolated_triangles(&x, &tpl, spec.eps, spec.isolation);
        assert!(
            found.iter().all(|f| candidates.contains(f)),
            "{found:?} vs {candidates:?}"
        );
        assert_eq!(found.len(), candidates.len());
    }

    #[test]
    fn dimension_mismatch() {
        let spec = CopySpec {
            template: triangle(),
            eps: 0.1,
            isolation: 1.0,
        };
        let x = crate::instance::generate_uniform(5, 3, 1).unwrap();
        assert!(find_copies(&x, &spec).is_err());
    }
}
