use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{csv_with_preamble, persist, RunConfig, Stream};
use crate::bnb::{branch_and_bound, leaf_census, BnBConfig, BoundKind, GrowthTable};
use crate::error::{invalid, Result};
use crate::instance::{generate_uniform, PointSet};

/// Largest `n` accepted by the tree growth experiment.
pub const GROWTH_LIMIT: usize = 18;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Uniform,
    /// Points on a segment; every relaxation is tight there.
    Collinear,
}

/// `n` points with uniform first coordinate and all other coordinates zero.
pub fn collinear_instance(n: usize, d: usize, seed: u64) -> Result<PointSet> {
    if n == 0 || d == 0 {
        return invalid("n and d must be positive");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = vec![0.0; n * d];
    for i in 0..n {
        coords[i * d] = rng.gen();
    }
    PointSet::from_flat(d, coords)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthObservation {
    pub family: Family,
    pub bound: BoundKind,
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub leaves: usize,
    pub nodes_expanded: usize,
    pub max_depth: usize,
    pub tour_length: f64,
    /// Search finished with a certified optimum.
    pub optimal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthSeries {
    pub family: Family,
    pub bound: BoundKind,
    pub table: GrowthTable,
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub config: RunConfig,
    pub series: Vec<GrowthSeries>,
    pub observations: Vec<GrowthObservation>,
}

impl GrowthReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_csv(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Flat {
            family: Family,
            bound: String,
            n: usize,
            trial: usize,
            seed: u64,
            leaves: usize,
            nodes_expanded: usize,
            max_depth: usize,
            tour_length: f64,
            optimal: bool,
        }
        let rows: Vec<Flat> = self
            .observations
            .iter()
            .map(|o| Flat {
                family: o.family,
                bound: bound_label(o.bound),
                n: o.n,
                trial: o.trial,
                seed: o.seed,
                leaves: o.leaves,
                nodes_expanded: o.nodes_expanded,
                max_depth: o.max_depth,
                tour_length: o.tour_length,
                optimal: o.optimal,
            })
            .collect();
        csv_with_preamble("growth", &self.config, &rows)
    }

    pub fn series(&self, family: Family, bound: BoundKind) -> Option<&GrowthSeries> {
        self.series
            .iter()
            .find(|s| s.family == family && s.bound == bound)
    }
}

fn bound_label(bound: BoundKind) -> String {
    match bound {
        BoundKind::HeldKarp => "held_karp".into(),
        BoundKind::Comb { c } => format!("comb{c}"),
    }
}

fn observe(
    cfg: &RunConfig,
    family: Family,
    bound: BoundKind,
    n: usize,
    trial: usize,
    seed: u64,
) -> Result<GrowthObservation> {
    let points = match family {
        Family::Uniform => generate_uniform(n, cfg.d, seed)?,
        Family::Collinear => collinear_instance(n, cfg.d, seed)?,
    };
    let mut bnb = BnBConfig::new(bound);
    bnb.seed = seed;
    bnb.node_limit = Some(cfg.node_limit);
    let result = branch_and_bound(&points, &bnb)?;
    Ok(GrowthObservation {
        family,
        bound,
        n,
        trial,
        seed,
        leaves: result.stats.leaves,
        nodes_expanded: result.stats.nodes_expanded,
        max_depth: result.stats.max_depth,
        tour_length: result.tour.map_or(f64::NAN, |t| t.length),
        optimal: result.optimal,
    })
}

/// Leaf census of branch-and-bound trees over the `n` grid, for uniform and
/// collinear instances, under the HK bound and optionally the `Comb_c` bound.
///
/// Uniform and collinear instances of the same `(n, trial)` share a seed.
pub fn tree_growth_experiment(cfg: &RunConfig) -> Result<GrowthReport> {
    cfg.validate()?;
    if let Some(n) = cfg.n_grid.iter().find(|&&n| n > GROWTH_LIMIT) {
        return invalid(format!(
            "n = {n} exceeds the tree growth limit {GROWTH_LIMIT}"
        ));
    }
    let mut bounds = vec![BoundKind::HeldKarp];
    if cfg.comb_trees {
        bounds.push(BoundKind::Comb { c: cfg.c });
    }
    let mut jobs = Vec::new();
    for &bound in &bounds {
        for family in [Family::Uniform, Family::Collinear] {
            for (n, t, seed) in cfg.seeds(Stream::Growth) {
                jobs.push((family, bound, n, t, seed));
            }
        }
    }
    let mut observations = jobs
        .into_par_iter()
        .map(|(family, bound, n, t, seed)| observe(cfg, family, bound, n, t, seed))
        .collect::<Result<Vec<_>>>()?;
    observations.sort_by_key(|o| (bound_label(o.bound), o.family, o.n, o.trial));
    let mut series = Vec::new();
    for &bound in &bounds {
        for family in [Family::Uniform, Family::Collinear] {
            let subset: Vec<&GrowthObservation> = observations
                .iter()
                .filter(|o| o.family == family && o.bound == bound)
                .collect();
            let table = leaf_census(&subset.iter().map(|o| (o.n, o.leaves)).collect::<Vec<_>>())?;
            series.push(GrowthSeries {
                family,
                bound,
                table,
                certified: subset.iter().all(|o| o.optimal),
            });
        }
    }
    let report = GrowthReport {
        config: cfg.clone(),
        series,
        observations,
    };
    persist(cfg, "growth", &report.to_json()?, &report.to_csv()?)?;
    Ok(report)
}
