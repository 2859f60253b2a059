use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    bootstrap_mean, coefficient_of_variation, csv_with_preamble, persist, within, Interval,
    RunConfig, Stream,
};
use crate::combs::comb_lp;
use crate::error::{Error, Result};
use crate::instance::{find_copies, generate_uniform};
use crate::lp::{held_karp, EdgeFixings, CUT_TOL};
use crate::tsp::{exact_tsp_dp, heuristic_tour};

/// One instance of the constants experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsRow {
    pub n: usize,
    pub d: usize,
    pub c: usize,
    pub trial: usize,
    pub seed: u64,
    pub tsp: f64,
    /// False when `tsp` is a heuristic tour length.
    pub tsp_exact: bool,
    pub hk: f64,
    pub comb: f64,
    /// `n^{(d−1)/d}`.
    pub scale: f64,
    pub tsp_scaled: f64,
    pub hk_scaled: f64,
    pub comb_scaled: f64,
    pub hk_ratio: f64,
    pub comb_ratio: f64,
    pub copies: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsSummary {
    pub n: usize,
    pub trials: usize,
    pub exact_trials: usize,
    pub hk_ratio: Interval,
    pub comb_ratio: Interval,
    pub tsp_scaled: Interval,
    pub hk_scaled: Interval,
    pub comb_scaled: Interval,
    pub tsp_scaled_cv: f64,
    /// Mean detected copies per point.
    pub copy_density: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub config: RunConfig,
    pub rows: Vec<ConstantsRow>,
    pub summary: Vec<ConstantsSummary>,
}

impl ConstantsReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_csv(&self) -> Result<String> {
        csv_with_preamble("constants", &self.config, &self.rows)
    }
}

pub(crate) fn scale_factor(n: usize, d: usize) -> f64 {
    (n as f64).powf((d as f64 - 1.0) / d as f64)
}

fn run_trial(cfg: &RunConfig, n: usize, trial: usize, seed: u64) -> Result<ConstantsRow> {
    let points = generate_uniform(n, cfg.d, seed)?;
    let (tour, tsp_exact) = if n <= cfg.exact_limit {
        (exact_tsp_dp(&points)?, true)
    } else {
        (heuristic_tour(&points, seed)?, false)
    };
    let free = EdgeFixings::new();
    let hk = held_karp(&points, &free, CUT_TOL)?;
    let comb = comb_lp(&points, cfg.c, &free, CUT_TOL)?;
    if !hk.is_optimal() || !comb.is_optimal() {
        return Err(Error::Invariant(format!(
            "n = {n}, seed {seed}: relaxation reported infeasible"
        )));
    }
    let (tsp, hk, comb) = (tour.length, hk.value, comb.value);
    if !(within(hk, comb) && within(comb, tsp)) {
        return Err(Error::Invariant(format!(
            "n = {n}, seed {seed}: sandwich HK {hk} ≤ Comb {comb} ≤ TSP {tsp} fails"
        )));
    }
    let copies = match &cfg.copy_spec {
        Some(spec) => {
            let unit = points.scaled((n as f64).powf(1.0 / cfg.d as f64));
            Some(find_copies(&unit, spec)?.len())
        }
        None => None,
    };
    let scale = scale_factor(n, cfg.d);
    Ok(ConstantsRow {
        n,
        d: cfg.d,
        c: cfg.c,
        trial,
        seed,
        tsp,
        tsp_exact,
        hk,
        comb,
        scale,
        tsp_scaled: tsp / scale,
        hk_scaled: hk / scale,
        comb_scaled: comb / scale,
        hk_ratio: hk / tsp,
        comb_ratio: comb / tsp,
        copies,
    })
}

/// Exact (or flagged heuristic) tour, HK and `Comb_c` values on uniform
/// instances over the `n` grid, with scaled values and bootstrap intervals.
///
/// Fails with [`Error::Invariant`] on any row breaking `HK ≤ Comb_c ≤ TSP`.
pub fn estimate_constants(cfg: &RunConfig) -> Result<ConstantsReport> {
    cfg.validate()?;
    let mut rows = cfg
        .seeds(Stream::Constants)
        .into_par_iter()
        .map(|(n, t, seed)| run_trial(cfg, n, t, seed))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| (r.n, r.trial));
    let mut summary = Vec::with_capacity(cfg.n_grid.len());
    for (i, chunk) in rows.chunk_by(|a, b| a.n == b.n).enumerate() {
        let n = chunk[0].n;
        let boot = |f: fn(&ConstantsRow) -> f64, j: usize| {
            let seed = super::trial_seed(cfg.seed, Stream::Bootstrap, n, 8 * i + j);
            bootstrap_mean(
                &chunk.iter().map(f).collect::<Vec<_>>(),
                cfg.bootstrap_resamples,
                seed,
            )
        };
        let tsp_scaled: Vec<f64> = chunk.iter().map(|r| r.tsp_scaled).collect();
        summary.push(ConstantsSummary {
            n,
            trials: chunk.len(),
            exact_trials: chunk.iter().filter(|r| r.tsp_exact).count(),
            hk_ratio: boot(|r| r.hk_ratio, 0)?,
            comb_ratio: boot(|r| r.comb_ratio, 1)?,
            tsp_scaled: boot(|r| r.tsp_scaled, 2)?,
            hk_scaled: boot(|r| r.hk_scaled, 3)?,
            comb_scaled: boot(|r| r.comb_scaled, 4)?,
            tsp_scaled_cv: coefficient_of_variation(&tsp_scaled),
            copy_density: chunk
                .iter()
                .map(|r| r.copies)
                .sum::<Option<usize>>()
                .map(|total| total as f64 / (chunk.len() * n) as f64),
        });
    }
    let report = ConstantsReport {
        config: cfg.clone(),
        rows,
        summary,
    };
    persist(cfg, "constants", &report.to_json()?, &report.to_csv()?)?;
    Ok(report)
}
