use super::Tour;
use crate::error::{invalid, Error, Result};
use crate::instance::PointSet;

/// Largest instance solved by [`exact_tsp_dp`].
pub const DP_LIMIT: usize = 20;
/// Largest instance solved by [`brute_force_tsp`].
pub const BRUTE_FORCE_LIMIT: usize = 11;

fn distance_matrix(points: &PointSet) -> Vec<Vec<f64>> {
    let n = points.len();
    (0..n)
        .map(|i| (0..n).map(|j| points.distance(i, j)).collect())
        .collect()
}

/// Optimal tour by dynamic programming over subsets of `1..n` and path endpoints.
pub fn exact_tsp_dp(points: &PointSet) -> Result<Tour> {
    let n = points.len();
    if n > DP_LIMIT {
        return Err(Error::SizeLimit { n, limit: DP_LIMIT });
    }
    if n < 3 {
        return invalid("a tour needs at least 3 points");
    }
    let d = distance_matrix(points);
    let m = n - 1;
    let full = (1usize << m) - 1;
    let mut cost = vec![f64::INFINITY; (full + 1) * m];
    let mut parent = vec![u8::MAX; (full + 1) * m];
    for j in 0..m {
        cost[(1 << j) * m + j] = d[0][j + 1];
    }
    for mask in 1..=full {
        for j in 0..m {
            let here = cost[mask * m + j];
            if mask >> j & 1 == 0 || !here.is_finite() {
                continue;
            }
            let mut free = full & !mask;
            while free != 0 {
                let k = free.trailing_zeros() as usize;
                free &= free - 1;
                let next = mask | 1 << k;
                let value = here + d[j + 1][k + 1];
                if value < cost[next * m + k] {
                    cost[next * m + k] = value;
                    parent[next * m + k] = j as u8;
                }
            }
        }
    }
    let mut end = 0;
    let mut best = f64::INFINITY;
    for j in 0..m {
        let value = cost[full * m + j] + d[j + 1][0];
        if value < best {
            best = value;
            end = j;
        }
    }
    let mut order = Vec::with_capacity(n);
    let (mut mask, mut j) = (full, end);
    loop {
        order.push(j + 1);
        let p = parent[mask * m + j];
        mask &= !(1 << j);
        if p == u8::MAX {
            break;
        }
        j = p as usize;
    }
    order.push(0);
    order.reverse();
    Ok(Tour::measured(points, order))
}

/// Optimal tour by enumerating all `(n−1)!/2` cycles through label 0.
pub fn brute_force_tsp(points: &PointSet) -> Result<Tour> {
    let n = points.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::SizeLimit {
            n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    if n < 3 {
        return invalid("a tour needs at least 3 points");
    }
    let d = distance_matrix(points);
    let mut rest: Vec<usize> = (1..n).collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    fn permute(
        k: usize,
        rest: &mut Vec<usize>,
        d: &[Vec<f64>],
        best: &mut Option<(f64, Vec<usize>)>,
    ) {
        let len = rest.len();
        if k == len {
            if rest[0] > rest[len - 1] {
                return;
            }
            let mut total = d[0][rest[0]] + d[rest[len - 1]][0];
            for w in rest.windows(2) {
                total += d[w[0]][w[1]];
            }
            if best.as_ref().is_none_or(|(b, _)| total < *b) {
                *best = Some((total, rest.clone()));
            }
            return;
        }
        for i in k..len {
            rest.swap(k, i);
            permute(k + 1, rest, d, best);
            rest.swap(k, i);
        }
    }
    permute(0, &mut rest, &d, &mut best);
    let (_, tail) = best.expect("at least one cycle");
    let mut order = vec![0];
    order.extend(tail);
    Ok(Tour::measured(points, order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::generate_uniform;

    #[test]
    fn triangle_is_perimeter() {
        let x = PointSet::new(2, &[vec![0.0, 0.0], vec![3.0, 0.0], vec![0.0, 4.0]]).unwrap();
        assert_eq!(exact_tsp_dp(&x).unwrap().length, 12.0);
    }

    #[test]
    fn unit_square() {
        let x = PointSet::new(
            2,
            &[
                vec![0.0, 0.0],
                vec![1.0, 1.0],
                vec![1.0, 0.0],
                vec![0.0, 1.0],
            ],
        )
        .unwrap();
        let t = exact_tsp_dp(&x).unwrap();
        assert_eq!(t.length, 4.0);
        assert_eq!(t.order, vec![0, 2, 1, 3]);
    }

    #[test]
    fn dp_matches_brute_force() {
        for seed in 0..20 {
            let x = generate_uniform(5 + seed as usize % 4, 2, seed).unwrap();
            let a = exact_tsp_dp(&x).unwrap();
            let b = brute_force_tsp(&x).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn limits() {
        let big = generate_uniform(21, 2, 0).unwrap();
        assert!(matches!(
            exact_tsp_dp(&big),
            Err(Error::SizeLimit { n: 21, limit: 20 })
        ));
        let tiny = generate_uniform(2, 2, 0).unwrap();
        assert!(exact_tsp_dp(&tiny).is_err());
    }
}
