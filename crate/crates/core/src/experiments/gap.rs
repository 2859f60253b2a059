use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{bootstrap_mean, csv_with_preamble, persist, Interval, RunConfig, Stream};
use crate::bnb::{branch_and_bound, BnBConfig, BoundKind};
use crate::combs::{separate_combs, COMB_TOL};
use crate::error::{invalid, Error, Result};
use crate::gadget::{required_separation, splice, valid_entry_sites};
use crate::instance::{build_gadget, find_copies, CopySpec, GadgetMeta, PointSet, OUTER_RADIUS};
use crate::tsp::{exact_tsp_dp, Tour};

/// Anchors sit between `OUTER_RADIUS + isolation + ANCHOR_MARGIN` and that plus `ANCHOR_DEPTH`.
const ANCHOR_MARGIN: f64 = 1.0;
const ANCHOR_DEPTH: f64 = 6.0;
/// Half-width of the anchor sector in radians.
const ANCHOR_SPREAD: f64 = 0.35;

/// An instance with gadget copies planted at known labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedInstance {
    pub points: PointSet,
    pub copies: Vec<GadgetMeta>,
    /// Unperturbed gadget used as the copy template.
    pub template: PointSet,
}

impl PlantedInstance {
    /// Distance from each copy to the nearest point outside it.
    pub fn isolation(&self) -> Vec<f64> {
        let n = self.points.len();
        self.copies
            .iter()
            .map(|meta| {
                let labels = meta.labels();
                let inside = crate::edges::membership(n, &labels);
                labels
                    .iter()
                    .flat_map(|&a| (0..n).filter(|&b| !inside[b]).map(move |b| (a, b)))
                    .map(|(a, b)| self.points.distance(a, b))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }
}

fn disc_offset(rng: &mut ChaCha8Rng, radius: f64) -> (f64, f64) {
    if radius == 0.0 {
        return (0.0, 0.0);
    }
    loop {
        let (x, y): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if x * x + y * y < 1.0 {
            return (x * radius, y * radius);
        }
    }
}

/// Planar instance with `cfg.planted` gadget copies of ring size `cfg.k`.
///
/// Each copy is perturbed by less than `eps / 2` per point and gets
/// `n_extra` anchors in a sector facing its outermost valid entry site, at
/// distance more than `isolation` from the rings. Copy and anchors are then
/// rotated by a random angle and shifted along the x-axis away from the
/// other copies. With no planted copy the anchors alone form the instance.
pub fn plant_instance(cfg: &RunConfig, seed: u64) -> Result<PlantedInstance> {
    let (template, base) = build_gadget(cfg.k, 1.0)?;
    let sites: Vec<usize> = valid_entry_sites(cfg.k, required_separation(cfg.k, cfg.c));
    let Some(&site) = sites.iter().filter(|&&p| p < cfg.k).max() else {
        return invalid(format!("k = {} leaves no entry site", cfg.k));
    };
    if cfg.planted == 0 && cfg.n_extra < 3 {
        return invalid("an instance without planted copies needs at least 3 anchors");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let facing = PI * (site as f64 + 0.5) / cfg.k as f64;
    let r0 = OUTER_RADIUS + cfg.isolation + ANCHOR_MARGIN;
    let spacing = 2.0 * (r0 + ANCHOR_DEPTH) + cfg.isolation + 1.0;
    let mut points: Option<PointSet> = None;
    let mut copies = Vec::with_capacity(cfg.planted);
    for j in 0..cfg.planted.max(1) {
        let mut coords = Vec::new();
        if cfg.planted > 0 {
            for p in template.points() {
                let (dx, dy) = disc_offset(&mut rng, cfg.eps / 2.0);
                coords.extend([p[0] + dx, p[1] + dy]);
            }
        }
        for _ in 0..cfg.n_extra {
            let angle = facing + rng.gen_range(-ANCHOR_SPREAD..ANCHOR_SPREAD);
            let radius = r0 + rng.gen_range(0.0..ANCHOR_DEPTH);
            coords.extend([radius * angle.cos(), radius * angle.sin()]);
        }
        let cluster = PointSet::from_flat(2, coords)?
            .rotated(rng.gen_range(0.0..2.0 * PI))?
            .translated(&[j as f64 * spacing, 0.0])?;
        let offset = points.as_ref().map_or(0, PointSet::len);
        if cfg.planted > 0 {
            copies.push(base.shifted(offset));
        }
        points = Some(match points {
            None => cluster,
            Some(acc) => acc.concat(&cluster)?,
        });
    }
    Ok(PlantedInstance {
        points: points.expect("at least one cluster"),
        copies,
        template,
    })
}

/// One trial of the planted gap experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapTrial {
    pub trial: usize,
    pub seed: u64,
    pub n: usize,
    pub planted: usize,
    /// Smallest copy isolation distance; `None` without planted copies.
    pub isolation: Option<f64>,
    /// Set when the trial was discarded.
    pub discarded: Option<String>,
    /// Copies recovered by template matching.
    pub copies_found: usize,
    pub tour_length: f64,
    pub tour_exact: bool,
    pub spliced_value: f64,
    pub feasible: bool,
    /// No comb of size at most `c` is violated by the spliced solution.
    pub comb_clean: bool,
    /// Entry/exit pairs of the tour on each copy.
    pub entries: Vec<usize>,
    /// `(tour_length − spliced_value) / planted`.
    pub gap_per_copy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapExperimentReport {
    pub config: RunConfig,
    pub trials: Vec<GapTrial>,
    pub kept: usize,
    pub discarded: usize,
    /// Bootstrap interval of the per-copy gap over kept trials.
    pub gap_per_copy: Option<Interval>,
    pub all_feasible: bool,
    pub all_comb_clean: bool,
    /// Every kept trial has spliced value strictly below the tour length.
    pub all_improved: bool,
    pub all_exact: bool,
}

impl GapExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_csv(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Flat<'a> {
            trial: usize,
            seed: u64,
            n: usize,
            planted: usize,
            isolation: Option<f64>,
            discarded: Option<&'a str>,
            copies_found: usize,
            tour_length: f64,
            tour_exact: bool,
            spliced_value: f64,
            feasible: bool,
            comb_clean: bool,
            gap_per_copy: f64,
        }
        let rows: Vec<Flat> = self
            .trials
            .iter()
            .map(|t| Flat {
                trial: t.trial,
                seed: t.seed,
                n: t.n,
                planted: t.planted,
                isolation: t.isolation,
                discarded: t.discarded.as_deref(),
                copies_found: t.copies_found,
                tour_length: t.tour_length,
                tour_exact: t.tour_exact,
                spliced_value: t.spliced_value,
                feasible: t.feasible,
                comb_clean: t.comb_clean,
                gap_per_copy: t.gap_per_copy,
            })
            .collect();
        csv_with_preamble("gap", &self.config, &rows)
    }
}

fn shortest_tour(points: &PointSet, cfg: &RunConfig, seed: u64) -> Result<(Tour, bool)> {
    if points.len() <= cfg.exact_limit {
        return Ok((exact_tsp_dp(points)?, true));
    }
    let mut bnb = BnBConfig::new(BoundKind::HeldKarp);
    bnb.seed = seed;
    bnb.node_limit = Some(cfg.node_limit);
    let result = branch_and_bound(points, &bnb)?;
    let tour = result
        .tour
        .ok_or_else(|| Error::Invariant("branch-and-bound returned no tour".into()))?;
    Ok((tour, result.optimal))
}

fn run_trial(cfg: &RunConfig, trial: usize, seed: u64) -> Result<GapTrial> {
    evaluate_planted(cfg, &plant_instance(cfg, seed)?, trial, seed)
}

fn evaluate_planted(
    cfg: &RunConfig,
    inst: &PlantedInstance,
    trial: usize,
    seed: u64,
) -> Result<GapTrial> {
    let n = inst.points.len();
    let isolation = inst.isolation().into_iter().reduce(f64::min);
    let mut out = GapTrial {
        trial,
        seed,
        n,
        planted: cfg.planted,
        isolation,
        discarded: None,
        copies_found: 0,
        tour_length: 0.0,
        tour_exact: false,
        spliced_value: 0.0,
        feasible: false,
        comb_clean: false,
        entries: Vec::new(),
        gap_per_copy: 0.0,
    };
    if let Some(iso) = isolation.filter(|&v| v <= cfg.isolation) {
        out.discarded = Some(format!(
            "copy isolation {iso:.4} is not above {}",
            cfg.isolation
        ));
        return Ok(out);
    }
    if cfg.planted > 0 {
        let spec = CopySpec {
            template: inst.template.clone(),
            eps: cfg.eps.max(1e-9),
            isolation: cfg.isolation,
        };
        out.copies_found = find_copies(&inst.points, &spec)?.len();
    }
    let (tour, exact) = shortest_tour(&inst.points, cfg, seed)?;
    let report = splice(&inst.points, &tour, &inst.copies, cfg.c)?;
    out.tour_length = tour.length;
    out.tour_exact = exact;
    out.spliced_value = report.value;
    out.feasible = report.feasibility.passes;
    out.comb_clean = separate_combs(&report.solution, cfg.c, COMB_TOL)?.is_none();
    out.entries = report.copies.iter().map(|c| c.entries).collect();
    if cfg.planted > 0 {
        out.gap_per_copy = (tour.length - report.value) / cfg.planted as f64;
    }
    Ok(out)
}

/// Planted-copy instances: shortest tour, spliced half-integral solution,
/// its feasibility and comb-cleanliness at size `c`, and the gap per copy.
///
/// Uses `cfg.trials` trials; the `n` grid is ignored since the instance size
/// is fixed by `k`, `planted` and `n_extra`.
pub fn gap_experiment(cfg: &RunConfig) -> Result<GapExperimentReport> {
    cfg.validate()?;
    if cfg.planted > 0 && cfg.d != 2 {
        return invalid("planted gadgets are planar; use d = 2");
    }
    let size = cfg.planted * (3 * cfg.k + 2) + cfg.planted.max(1) * cfg.n_extra;
    let mut trials = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, t, super::trial_seed(cfg.seed, Stream::Gap, size, t)))
        .collect::<Result<Vec<_>>>()?;
    trials.sort_by_key(|t| t.trial);
    let kept: Vec<&GapTrial> = trials.iter().filter(|t| t.discarded.is_none()).collect();
    let gaps: Vec<f64> = kept.iter().map(|t| t.gap_per_copy).collect();
    let gap_per_copy = if gaps.is_empty() {
        None
    } else {
        let seed = super::trial_seed(cfg.seed, Stream::Bootstrap, size, 0);
        Some(bootstrap_mean(&gaps, cfg.bootstrap_resamples, seed)?)
    };
    let report = GapExperimentReport {
        kept: kept.len(),
        discarded: trials.len() - kept.len(),
        gap_per_copy,
        all_feasible: kept.iter().all(|t| t.feasible),
        all_comb_clean: kept.iter().all(|t| t.comb_clean),
        all_improved: kept.iter().all(|t| t.spliced_value < t.tour_length),
        all_exact: kept.iter().all(|t| t.tour_exact),
        config: cfg.clone(),
        trials,
    };
    persist(cfg, "gap", &report.to_json()?, &report.to_csv()?)?;
    Ok(report)
}
