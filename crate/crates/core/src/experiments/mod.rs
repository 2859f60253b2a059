//! Seeded Monte-Carlo experiments: scaled tour and bound constants, planted
//! gadget gaps, and branch-and-bound tree growth.
//!
//! Every trial draws its own seed from the master seed, trials run on the
//! rayon pool, and results are sorted before aggregation so reports are
//! byte-identical across reruns.

mod constants;
mod gap;
mod growth;

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::instance::CopySpec;
use crate::tsp::DP_LIMIT;

pub use constants::{estimate_constants, ConstantsReport, ConstantsRow, ConstantsSummary};
pub use gap::{gap_experiment, plant_instance, GapExperimentReport, GapTrial, PlantedInstance};
pub use growth::{
    collinear_instance, tree_growth_experiment, Family, GrowthObservation, GrowthReport,
    GrowthSeries, GROWTH_LIMIT,
};

/// Relative tolerance of the `HK ≤ Comb_c ≤ TSP` check.
pub const SANDWICH_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n_grid: Vec<usize>,
    pub d: usize,
    /// Comb size limit of the `Comb_c` bound.
    pub c: usize,
    pub trials: usize,
    pub seed: u64,
    /// Largest `n` solved exactly; larger instances use the heuristic tour.
    pub exact_limit: usize,
    /// Bound evaluations allowed per branch-and-bound run.
    pub node_limit: usize,
    /// Gadget ring size of planted copies.
    pub k: usize,
    /// Gadget copies planted per gap instance.
    pub planted: usize,
    /// Anchor points placed next to each planted copy.
    pub n_extra: usize,
    /// Per-point displacement bound of planted copies.
    pub eps: f64,
    /// Required distance between a copy and the rest of the instance.
    pub isolation: f64,
    /// Template counted on every constants instance after rescaling to unit density.
    pub copy_spec: Option<CopySpec>,
    /// Also grow trees under the `Comb_c` bound.
    pub comb_trees: bool,
    pub bootstrap_resamples: usize,
    /// Directory receiving JSON and CSV reports.
    pub out_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n_grid: (8..=14).collect(),
            d: 2,
            c: 6,
            trials: 20,
            seed: 1,
            exact_limit: 15,
            node_limit: 100_000,
            k: 8,
            planted: 1,
            n_extra: 8,
            eps: 0.01,
            isolation: 2.0,
            copy_spec: None,
            comb_trees: false,
            bootstrap_resamples: 1000,
            out_dir: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return invalid("trial count must be at least 1");
        }
        if self.n_grid.is_empty() {
            return invalid("n grid is empty");
        }
        if let Some(n) = self.n_grid.iter().find(|&&n| n < 3) {
            return invalid(format!("n = {n} is below 3"));
        }
        if self.d == 0 {
            return invalid("dimension must be at least 1");
        }
        if self.exact_limit > DP_LIMIT {
            return invalid(format!(
                "exact limit {} exceeds {DP_LIMIT}",
                self.exact_limit
            ));
        }
        if self.node_limit == 0 || self.bootstrap_resamples == 0 {
            return invalid("node limit and bootstrap resamples must be positive");
        }
        if !(self.eps >= 0.0
            && self.eps.is_finite()
            && self.isolation > 0.0
            && self.isolation.is_finite())
        {
            return invalid("eps must be nonnegative and isolation positive");
        }
        let mut seen = HashSet::new();
        for stream in Stream::ALL {
            for &n in &self.n_grid {
                for t in 0..self.trials {
                    if !seen.insert((stream, trial_seed(self.seed, stream, n, t))) {
                        return invalid(format!("trial seeds collide at n = {n}, trial {t}"));
                    }
                }
            }
        }
        Ok(())
    }

    pub(crate) fn seeds(&self, stream: Stream) -> Vec<(usize, usize, u64)> {
        let mut out = Vec::with_capacity(self.n_grid.len() * self.trials);
        for &n in &self.n_grid {
            for t in 0..self.trials {
                out.push((n, t, trial_seed(self.seed, stream, n, t)));
            }
        }
        out
    }
}

/// Independent seed families, one per experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub(crate) enum Stream {
    Constants = 1,
    Gap = 2,
    Growth = 3,
    Bootstrap = 4,
}

impl Stream {
    const ALL: [Stream; 3] = [Stream::Constants, Stream::Gap, Stream::Growth];
}

/// Seed of trial `trial` at size `n`: a ChaCha8 word keyed by the master seed,
/// the experiment and `n`, on stream `trial`.
pub(crate) fn trial_seed(master: u64, stream: Stream, n: usize, trial: usize) -> u64 {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master.to_le_bytes());
    key[8..16].copy_from_slice(&(stream as u64).to_le_bytes());
    key[16..24].copy_from_slice(&(n as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial as u64);
    rng.gen()
}

/// Sample mean with a percentile bootstrap 95% interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn excludes(&self, value: f64) -> bool {
        value < self.lo || value > self.hi
    }
}

pub fn bootstrap_mean(values: &[f64], resamples: usize, seed: u64) -> Result<Interval> {
    if values.is_empty() || resamples == 0 {
        return invalid("bootstrap needs at least one value and one resample");
    }
    let m = values.len();
    let mean = values.iter().sum::<f64>() / m as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..m).map(|_| values[rng.gen_range(0..m)]).sum::<f64>() / m as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let at = |q: f64| means[((q * resamples as f64).floor() as usize).min(resamples - 1)];
    Ok(Interval {
        mean,
        lo: at(0.025),
        hi: at(0.975),
    })
}

/// Coefficient of variation (sample standard deviation over mean).
pub fn coefficient_of_variation(values: &[f64]) -> f64 {
    let m = values.len();
    if m < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / m as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
    var.sqrt() / mean
}

pub(crate) const CSV_SCHEMA: &str = "1";

/// CSV with a two-line `#` preamble carrying the schema version and the config.
pub(crate) fn csv_with_preamble<R: Serialize>(
    kind: &str,
    config: &RunConfig,
    rows: &[R],
) -> Result<String> {
    let mut buf = format!(
        "# combgap {kind} schema {CSV_SCHEMA}\n# config {}\n",
        serde_json::to_string(config)?
    );
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Invariant(format!("csv buffer: {e}")))?;
    buf.push_str(&String::from_utf8(bytes).map_err(|e| Error::Invariant(e.to_string()))?);
    Ok(buf)
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|source| Error::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `<stem>.json` and `<stem>.csv` under the configured directory, if any.
pub(crate) fn persist(config: &RunConfig, stem: &str, json: &str, csv: &str) -> Result<()> {
    if let Some(dir) = &config.out_dir {
        write_file(&dir.join(format!("{stem}.json")), json)?;
        write_file(&dir.join(format!("{stem}.csv")), csv)?;
    }
    Ok(())
}

/// `a ≤ b` up to [`SANDWICH_TOL`] relative to `b`.
pub(crate) fn within(a: f64, b: f64) -> bool {
    a <= b + SANDWICH_TOL * b.abs().max(1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_deterministic_and_distinct() {
        let a = trial_seed(7, Stream::Constants, 10, 3);
        assert_eq!(a, trial_seed(7, Stream::Constants, 10, 3));
        assert_ne!(a, trial_seed(7, Stream::Constants, 10, 4));
        assert_ne!(a, trial_seed(7, Stream::Gap, 10, 3));
        assert_ne!(a, trial_seed(8, Stream::Constants, 10, 3));
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let bad = [
            RunConfig {
                trials: 0,
                ..RunConfig::default()
            },
            RunConfig {
                n_grid: vec![],
                ..RunConfig::default()
            },
            RunConfig {
                n_grid: vec![2],
                ..RunConfig::default()
            },
            RunConfig {
                exact_limit: DP_LIMIT + 1,
                ..RunConfig::default()
            },
            RunConfig {
                isolation: 0.0,
                ..RunConfig::default()
            },
        ];
        for cfg in bad {
            assert!(
                matches!(cfg.validate(), Err(Error::InvalidArgument(_))),
                "{cfg:?}"
            );
        }
    }

    #[test]
    fn bootstrap_of_constant_sample_is_degenerate() {
        let iv = bootstrap_mean(&[2.5; 7], 1000, 1).unwrap();
        assert_eq!((iv.mean, iv.lo, iv.hi), (2.5, 2.5, 2.5));
    }

    #[test]
    fn bootstrap_interval_brackets_mean() {
        let values: Vec<f64> = (0..50).map(|i| (i % 7) as f64).collect();
        let iv = bootstrap_mean(&values, 1000, 3).unwrap();
        assert!(iv.lo < iv.mean && iv.mean < iv.hi);
        assert_eq!(iv, bootstrap_mean(&values, 1000, 3).unwrap());
        let spread = (values.iter().map(|v| (v - iv.mean).powi(2)).sum::<f64>() / 49.0).sqrt()
            / 50f64.sqrt();
        assert!((iv.hi - iv.lo) > 2.0 * spread && (iv.hi - iv.lo) < 6.0 * spread);
    }

    #[test]
    fn cv_matches_definition() {
        let cv = coefficient_of_variation(&[1.0, 3.0]);
        assert!((cv - 2f64.sqrt() / 2.0).abs() < 1e-12);
    }
}
