//! Elitist non-dominated sorting GA over a box of real genes.

mod operators;
mod sorting;

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::Objectives;

pub use operators::{polynomial_mutation, sbx};
pub use sorting::{crowding_distance, dominates, non_dominated_sort};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GAConfig {
    pub pop_size: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    /// Per-gene mutation probability.
    pub mutation_prob: f64,
    /// Cap on the share of the next population taken from the first front.
    pub pareto_fraction: f64,
    /// `[low, high]` per gene.
    pub bounds: Vec<[f64; 2]>,
    pub rng_seed: u64,
    pub eta_crossover: f64,
    pub eta_mutation: f64,
}

impl Default for GAConfig {
    fn default() -> Self {
        GAConfig {
            pop_size: 30,
            generations: 20,
            crossover_prob: 0.8,
            mutation_prob: 0.05,
            pareto_fraction: 0.35,
            bounds: vec![[0.01, 50.0], [1e-4, 5.0], [0.05, 1.95]],
            rng_seed: 1,
            eta_crossover: 15.0,
            eta_mutation: 20.0,
        }
    }
}

impl GAConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pop_size < 4 || !self.pop_size.is_multiple_of(2) {
            return Err(Error::invalid(format!("pop_size must be even and at least 4, got {}", self.pop_size)));
        }
        for (name, p) in [("crossover_prob", self.crossover_prob), ("mutation_prob", self.mutation_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        if !(self.pareto_fraction > 0.0 && self.pareto_fraction <= 1.0) {
            return Err(Error::invalid(format!("pareto_fraction must lie in (0, 1], got {}", self.pareto_fraction)));
        }
        if self.bounds.is_empty() {
            return Err(Error::invalid("at least one gene bound is required"));
        }
        if let Some(b) = self.bounds.iter().find(|[lo, hi]| !(lo.is_finite() && hi.is_finite() && lo <= hi)) {
            return Err(Error::invalid(format!("gene bounds must be finite with low <= high, got {b:?}")));
        }
        if !(self.eta_crossover >= 0.0 && self.eta_mutation >= 0.0) {
            return Err(Error::invalid("distribution indices must be nonnegative"));
        }
        Ok(())
    }

    /// Most first-front members kept when truncating a merged population.
    pub fn elite_cap(&self) -> usize {
        ((self.pareto_fraction * self.pop_size as f64).ceil() as usize).max(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genes: Vec<f64>,
    pub objectives: Objectives,
    pub rank: usize,
    pub crowding: f64,
}

impl Individual {
    fn better_than(&self, other: &Individual) -> bool {
        self.rank < other.rank || (self.rank == other.rank && self.crowding > other.crowding)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontPoint {
    pub genes: Vec<f64>,
    pub j1: f64,
    pub j2: f64,
}

impl FrontPoint {
    pub fn pair(&self) -> [f64; 2] {
        [self.j1, self.j2]
    }
}

/// Mutually non-dominated points, ordered by increasing `j1`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ParetoFront {
    pub points: Vec<FrontPoint>,
}

impl ParetoFront {
    /// Keeps the non-dominated subset of `points`, dropping exact duplicates.
    pub fn from_points(points: Vec<FrontPoint>) -> Self {
        let pairs: Vec<[f64; 2]> = points.iter().map(FrontPoint::pair).collect();
        let mut keep: Vec<FrontPoint> = match non_dominated_sort(&pairs).into_iter().next() {
            Some(first) => first.into_iter().map(|i| points[i].clone()).collect(),
            None => Vec::new(),
        };
        keep.sort_by(|a, b| {
            a.j1.total_cmp(&b.j1)
                .then(a.j2.total_cmp(&b.j2))
                .then_with(|| a.genes.partial_cmp(&b.genes).unwrap_or(std::cmp::Ordering::Equal))
        });
        keep.dedup();
        ParetoFront { points: keep }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn pairs(&self) -> Vec<[f64; 2]> {
        self.points.iter().map(FrontPoint::pair).collect()
    }
}

/// One line of the per-generation progress log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationStats {
    pub generation: usize,
    pub front_size: usize,
    pub min_j1: f64,
    pub min_j2: f64,
}

impl fmt::Display for GenerationStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "gen {:>3}  front {:>3}  min J1 {:.6e}  min J2 {:.6e}",
            self.generation, self.front_size, self.min_j1, self.min_j2
        )
    }
}

/// Runs the GA and returns the first front of the final population,
/// penalized points excluded.
pub fn evolve<F>(eval: F, cfg: &GAConfig) -> Result<ParetoFront>
where
    F: Fn(&[f64]) -> Objectives + Sync,
{
    evolve_with(eval, cfg, |_, _| {})
}

/// As [`evolve`], calling `observe` after the initial population and after
/// every generation with the progress line and the archive of every
/// non-dominated point evaluated so far.
pub fn evolve_with<F, O>(eval: F, cfg: &GAConfig, mut observe: O) -> Result<ParetoFront>
where
    F: Fn(&[f64]) -> Objectives + Sync,
    O: FnMut(&GenerationStats, &ParetoFront),
{
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let genomes: Vec<Vec<f64>> = (0..cfg.pop_size)
        .map(|_| cfg.bounds.iter().map(|&[lo, hi]| if hi > lo { rng.gen_range(lo..=hi) } else { lo }).collect())
        .collect();
    let mut pop = evaluate(&eval, genomes);
    assign_rank_and_crowding(&mut pop);
    let mut archive = ParetoFront::default();
    update_archive(&mut archive, &pop);
    observe(&stats(0, &pop), &archive);

    for generation in 1..=cfg.generations {
        let mut children = Vec::with_capacity(cfg.pop_size);
        while children.len() < cfg.pop_size {
            let a = tournament(&mut rng, &pop);
            let b = tournament(&mut rng, &pop);
            let (mut c1, mut c2) = if rng.gen::<f64>() < cfg.crossover_prob {
                sbx(&mut rng, &pop[a].genes, &pop[b].genes, &cfg.bounds, cfg.eta_crossover)
            } else {
                (pop[a].genes.clone(), pop[b].genes.clone())
            };
            polynomial_mutation(&mut rng, &mut c1, &cfg.bounds, cfg.mutation_prob, cfg.eta_mutation);
            polynomial_mutation(&mut rng, &mut c2, &cfg.bounds, cfg.mutation_prob, cfg.eta_mutation);
            children.push(c1);
            children.push(c2);
        }
        let offspring = evaluate(&eval, children);
        update_archive(&mut archive, &offspring);
        let mut merged = pop;
        merged.extend(offspring);
        pop = truncate(merged, cfg.pop_size, cfg.elite_cap());
        assign_rank_and_crowding(&mut pop);
        observe(&stats(generation, &pop), &archive);
    }

    let first: Vec<FrontPoint> = pop.iter().filter(|i| i.rank == 0 && !i.objectives.penalized).map(to_point).collect();
    Ok(ParetoFront::from_points(first))
}

fn to_point(i: &Individual) -> FrontPoint {
    FrontPoint { genes: i.genes.clone(), j1: i.objectives.j1_itae, j2: i.objectives.j2_energy }
}

fn evaluate<F>(eval: &F, genomes: Vec<Vec<f64>>) -> Vec<Individual>
where
    F: Fn(&[f64]) -> Objectives + Sync,
{
    genomes
        .into_par_iter()
        .map(|genes| {
            let o = eval(&genes);
            let objectives = if o.j1_itae.is_finite() && o.j2_energy.is_finite() { o } else { Objectives::penalty() };
            Individual { genes, objectives, rank: 0, crowding: 0.0 }
        })
        .collect()
}

fn assign_rank_and_crowding(pop: &mut [Individual]) {
    let pairs: Vec<[f64; 2]> = pop.iter().map(|i| i.objectives.pair()).collect();
    for (rank, front) in non_dominated_sort(&pairs).into_iter().enumerate() {
        let sub: Vec<[f64; 2]> = front.iter().map(|&i| pairs[i]).collect();
        for (&i, d) in front.iter().zip(crowding_distance(&sub)) {
            pop[i].rank = rank;
            pop[i].crowding = d;
        }
    }
}

/// Binary tournament on (rank, crowding); ties go to the first pick.
fn tournament<R: Rng>(rng: &mut R, pop: &[Individual]) -> usize {
    let a = rng.gen_range(0..pop.len());
    let mut b = rng.gen_range(0..pop.len() - 1);
    if b >= a {
        b += 1;
    }
    if pop[b].better_than(&pop[a]) {
        b
    } else {
        a
    }
}

/// Indices of `front` (points `pairs`) ordered by decreasing crowding, ties
/// by index.
fn by_crowding(front: &[usize], pairs: &[[f64; 2]]) -> Vec<usize> {
    let sub: Vec<[f64; 2]> = front.iter().map(|&i| pairs[i]).collect();
    let d = crowding_distance(&sub);
    let mut order: Vec<usize> = (0..front.len()).collect();
    order.sort_by(|&a, &b| d[b].total_cmp(&d[a]).then(front[a].cmp(&front[b])));
    order.into_iter().map(|k| front[k]).collect()
}

/// Picks `size` survivors from a merged population: at most `elite_cap` from
/// the first front (the least crowded ones), then later fronts in rank order.
/// First-front members only fill further slots when later fronts run out.
fn truncate(merged: Vec<Individual>, size: usize, elite_cap: usize) -> Vec<Individual> {
    let pairs: Vec<[f64; 2]> = merged.iter().map(|i| i.objectives.pair()).collect();
    let fronts = non_dominated_sort(&pairs);
    let first = by_crowding(&fronts[0], &pairs);
    let elites = first.len().min(elite_cap);
    let mut chosen: Vec<usize> = first[..elites].to_vec();
    for front in &fronts[1..] {
        if chosen.len() >= size {
            break;
        }
        let room = size - chosen.len();
        if front.len() <= room {
            chosen.extend_from_slice(front);
        } else {
            chosen.extend_from_slice(&by_crowding(front, &pairs)[..room]);
        }
    }
    let spare = size.saturating_sub(chosen.len());
    chosen.extend(first[elites..].iter().take(spare));
    chosen.sort_unstable();
    let mut merged: Vec<Option<Individual>> = merged.into_iter().map(Some).collect();
    chosen.into_iter().map(|i| merged[i].take().expect("survivor picked twice")).collect()
}

fn update_archive(archive: &mut ParetoFront, batch: &[Individual]) {
    let mut points = std::mem::take(&mut archive.points);
    points.extend(batch.iter().filter(|i| !i.objectives.penalized).map(to_point));
    *archive = ParetoFront::from_points(points);
}

fn stats(generation: usize, pop: &[Individual]) -> GenerationStats {
    let live = pop.iter().filter(|i| !i.objectives.penalized);
    let (min_j1, min_j2) = live
        .fold((f64::INFINITY, f64::INFINITY), |(a, b), i| (a.min(i.objectives.j1_itae), b.min(i.objectives.j2_energy)));
    GenerationStats {
        generation,
        front_size: pop.iter().filter(|i| i.rank == 0 && !i.objectives.penalized).count(),
        min_j1,
        min_j2,
    }
}
