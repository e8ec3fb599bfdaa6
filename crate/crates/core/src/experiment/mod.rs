//! The chi sweep: one GA run per predictor split, trade-off region selection
//! and the comparison of low-chi against high-chi fronts.

mod config;
mod hypervolume;
mod report;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frac_tf::{ApproxConfig, FracPI, HighOrderPlant, PredictorSplit};
use crate::metrics::{self, Objectives};
use crate::moga::{evolve_with, FrontPoint, GenerationStats, ParetoFront};
use crate::sim_engine::{fit_controller, simulate, wire_loop, PredictorBlocks, SimConfig, Trajectory};

pub use config::{Candidate, PlantConfig, RunInfo, SweepSpec};
pub use hypervolume::{compare_pools, compare_pools_at, hypervolume, shared_reference, PoolComparison, PoolSummary};
pub use report::{
    front_path, read_front_csv, read_manifest, regenerate_report, trajectory_path, write_front_csv, write_manifest,
    write_sweep, Report,
};

/// Axis-aligned box in objective space, bounds inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub j1: [f64; 2],
    pub j2: [f64; 2],
}

impl Region {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.j1[0] && p[0] <= self.j1[1] && p[1] >= self.j2[0] && p[1] <= self.j2[1]
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `J1` and `J2` both at or below their medians over all front points.
pub fn auto_region<'a>(points: impl Iterator<Item = &'a FrontPoint>) -> Option<Region> {
    let (j1, j2): (Vec<f64>, Vec<f64>) = points.map(|p| (p.j1, p.j2)).unzip();
    if j1.is_empty() {
        return None;
    }
    Some(Region { j1: [0.0, median(j1)], j2: [0.0, median(j2)] })
}

/// Simulates controller candidates against the fixed blocks of one chi.
#[derive(Debug, Clone)]
pub struct CandidateEvaluator {
    blocks: PredictorBlocks,
    approx: ApproxConfig,
    sim: SimConfig,
}

impl CandidateEvaluator {
    pub fn new(plant: &HighOrderPlant, chi: f64, approx: &ApproxConfig, sim: &SimConfig) -> Result<Self> {
        sim.validate()?;
        let split = PredictorSplit::new(chi, plant)?;
        let blocks = PredictorBlocks::fit(plant, &split, approx)?;
        Ok(CandidateEvaluator { blocks, approx: *approx, sim: *sim })
    }

    /// Closed-loop response for genes `[k_p, k_i, lambda]`.
    pub fn trajectory(&self, genes: &[f64]) -> Result<Trajectory> {
        let [k_p, k_i, lambda] = genes else {
            return Err(Error::invalid(format!("expected 3 genes, got {}", genes.len())));
        };
        let ctrl = FracPI::new(*k_p, *k_i, *lambda)?;
        let gc = fit_controller(&ctrl, &self.approx)?;
        let mut lm = wire_loop(&gc, &self.blocks, self.sim.topology)?;
        simulate(&mut lm, &self.sim)
    }

    /// Objectives, with any fit or simulation failure mapped to the penalty.
    pub fn objectives(&self, genes: &[f64]) -> Objectives {
        match self.trajectory(genes) {
            Ok(t) => metrics::objectives(&t),
            Err(_) => Objectives::penalty(),
        }
    }
}

/// Outcome for one chi.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiOutcome {
    pub chi: f64,
    pub front: ParetoFront,
    /// Set when the front is empty, with the reason.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub outcomes: Vec<ChiOutcome>,
    /// The configured region, or the automatic one when none was given.
    pub region: Option<Region>,
    pub region_is_auto: bool,
}

impl SweepResult {
    /// Assembles a result and resolves the region.
    pub fn new(outcomes: Vec<ChiOutcome>, configured: Option<Region>) -> Self {
        let (region, region_is_auto) = match configured {
            Some(r) => (Some(r), false),
            None => (auto_region(outcomes.iter().flat_map(|o| &o.front.points)), true),
        };
        SweepResult { outcomes, region, region_is_auto }
    }

    /// Front points of `chi`'s entry that fall inside the region (all of them
    /// when there is no region).
    pub fn region_points(&self, outcome: &ChiOutcome) -> Vec<FrontPoint> {
        outcome.front.points.iter().filter(|p| self.region.is_none_or(|r| r.contains(p.pair()))).cloned().collect()
    }
}

/// Runs the GA once per chi (in parallel, identical seeds) and collects the
/// fronts. `log` receives every progress line tagged with its chi.
pub fn run_sweep(spec: &SweepSpec, log: &(dyn Fn(f64, &GenerationStats) + Sync)) -> Result<SweepResult> {
    spec.validate()?;
    let plant = spec.plant.to_plant()?;
    let outcomes =
        spec.chi_values.par_iter().map(|&chi| run_one(&plant, chi, spec, log)).collect::<Result<Vec<_>>>()?;
    Ok(SweepResult::new(outcomes, spec.region))
}

/// A single tuning run. Block-fit failures yield an empty, annotated front.
pub fn run_one(
    plant: &HighOrderPlant,
    chi: f64,
    spec: &SweepSpec,
    log: &(dyn Fn(f64, &GenerationStats) + Sync),
) -> Result<ChiOutcome> {
    let ev = match CandidateEvaluator::new(plant, chi, &spec.approx, &spec.sim) {
        Ok(ev) => ev,
        Err(e @ Error::InvalidParameter(_)) => return Err(e),
        Err(e) => {
            return Ok(ChiOutcome { chi, front: ParetoFront::default(), note: Some(format!("block fit failed: {e}")) })
        }
    };
    let front = evolve_with(|g| ev.objectives(g), &spec.ga, |s, _| log(chi, s))?;
    let note = front.is_empty().then(|| "every candidate diverged or failed".to_string());
    Ok(ChiOutcome { chi, front, note })
}

/// Pools region points with `chi <= split_at` against `chi > split_at`.
pub fn compare_regions(result: &SweepResult, split_at: f64) -> Result<PoolComparison> {
    let mut low = Vec::new();
    let mut high = Vec::new();
    for o in &result.outcomes {
        let pts = result.region_points(o).iter().map(FrontPoint::pair).collect::<Vec<_>>();
        if o.chi <= split_at {
            low.extend(pts);
        } else {
            high.extend(pts);
        }
    }
    compare_pools(&low, &high)
}
