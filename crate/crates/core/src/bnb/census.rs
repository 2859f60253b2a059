use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Minimum trial count per `n` accepted by [`leaf_census`].
pub const MIN_TRIALS: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub n: usize,
    pub trials: usize,
    pub median_leaves: f64,
    pub mean_leaves: f64,
    pub min_leaves: usize,
    pub max_leaves: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthTable {
    pub rows: Vec<GrowthRow>,
    /// Least-squares slope of `ln(median leaves)` against `n`.
    pub log_slope: f64,
}

impl GrowthTable {
    pub fn medians_nondecreasing(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].median_leaves >= w[0].median_leaves)
    }
}

fn median(sorted: &[usize]) -> f64 {
    let m = sorted.len();
    if m % 2 == 1 {
        sorted[m / 2] as f64
    } else {
        (sorted[m / 2 - 1] + sorted[m / 2]) as f64 / 2.0
    }
}

/// Median leaf counts per `n` from `(n, leaves)` observations.
pub fn leaf_census(observations: &[(usize, usize)]) -> Result<GrowthTable> {
    let mut by_n: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(n, leaves) in observations {
        by_n.entry(n).or_default().push(leaves);
    }
    if by_n.len() < 3 {
        return invalid(format!(
            "leaf census needs at least 3 values of n, got {}",
            by_n.len()
        ));
    }
    if let Some((n, v)) = by_n.iter().find(|(_, v)| v.len() < MIN_TRIALS) {
        return invalid(format!(
            "n = {n} has {} trials, at least {MIN_TRIALS} are required",
            v.len()
        ));
    }
    let rows: Vec<GrowthRow> = by_n
        .into_iter()
        .map(|(n, mut v)| {
            v.sort_unstable();
            GrowthRow {
                n,
                trials: v.len(),
                median_leaves: median(&v),
                mean_leaves: v.iter().sum::<usize>() as f64 / v.len() as f64,
                min_leaves: v[0],
                max_leaves: v[v.len() - 1],
            }
        })
        .collect();
    let xs: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.median_leaves.max(1.0).ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(GrowthTable {
        rows,
        log_slope: sxy / sxx,
    })
}
