use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moga::{dominates, non_dominated_sort};

/// Area dominated by `front` and bounded by `reference`. Every point must be
/// strictly better than the reference in both objectives.
pub fn hypervolume(front: &[[f64; 2]], reference: [f64; 2]) -> Result<f64> {
    if let Some(p) = front.iter().find(|p| !(p[0] < reference[0] && p[1] < reference[1])) {
        return Err(Error::invalid(format!(
            "point ({}, {}) does not dominate the reference ({}, {})",
            p[0], p[1], reference[0], reference[1]
        )));
    }
    let mut pts = front.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut area = 0.0;
    let mut floor = reference[1];
    for p in pts {
        if p[1] < floor {
            area += (reference[0] - p[0]) * (floor - p[1]);
            floor = p[1];
        }
    }
    Ok(area)
}

/// Per-pool figures of a two-pool comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolSummary {
    pub points: usize,
    pub front_points: usize,
    pub hypervolume: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolComparison {
    pub reference: [f64; 2],
    pub low: PoolSummary,
    pub high: PoolSummary,
    /// Pairs `(a, b)` of pool fronts where the low-side `a` dominates `b`.
    pub low_dominates: usize,
    pub high_dominates: usize,
}

impl PoolComparison {
    pub fn low_is_better(&self) -> bool {
        self.low.hypervolume >= self.high.hypervolume
    }

    pub fn net_dominance(&self) -> i64 {
        self.low_dominates as i64 - self.high_dominates as i64
    }
}

/// Reference point `1.1 x` the componentwise maximum of all points. A zero
/// maximum is replaced by one so the reference stays strictly above it.
pub fn shared_reference<'a>(points: impl Iterator<Item = &'a [f64; 2]>) -> [f64; 2] {
    let mut hi = [0.0f64; 2];
    for p in points {
        hi[0] = hi[0].max(p[0]);
        hi[1] = hi[1].max(p[1]);
    }
    hi.map(|v| if v > 0.0 { 1.1 * v } else { 1.0 })
}

fn first_front(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    non_dominated_sort(points)
        .into_iter()
        .next()
        .map(|f| f.into_iter().map(|i| points[i]).collect())
        .unwrap_or_default()
}

/// Compares two point pools by the hypervolume of their non-dominated
/// subsets against a shared reference.
pub fn compare_pools(low: &[[f64; 2]], high: &[[f64; 2]]) -> Result<PoolComparison> {
    if low.is_empty() || high.is_empty() {
        return Err(Error::InsufficientData(format!(
            "need points on both sides, got {} and {}",
            low.len(),
            high.len()
        )));
    }
    let reference = shared_reference(low.iter().chain(high));
    compare_pools_at(low, high, reference)
}

pub fn compare_pools_at(low: &[[f64; 2]], high: &[[f64; 2]], reference: [f64; 2]) -> Result<PoolComparison> {
    let (fl, fh) = (first_front(low), first_front(high));
    let count = |a: &[[f64; 2]], b: &[[f64; 2]]| a.iter().map(|p| b.iter().filter(|q| dominates(p, q)).count()).sum();
    Ok(PoolComparison {
        reference,
        low: PoolSummary { points: low.len(), front_points: fl.len(), hypervolume: hypervolume(&fl, reference)? },
        high: PoolSummary { points: high.len(), front_points: fh.len(), hypervolume: hypervolume(&fh, reference)? },
        low_dominates: count(&fl, &fh),
        high_dominates: count(&fh, &fl),
    })
}
