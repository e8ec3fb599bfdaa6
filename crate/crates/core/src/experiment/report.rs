//! On-disk layout of a sweep and the report derived from it.
//!
//! ```text
//! DIR/manifest.toml                 settings, seeds and tool version
//! DIR/fronts/front_chi_<chi>.csv    one front per chi
//! DIR/trajectories/traj_chi_<chi>.csv
//! DIR/summary.csv, DIR/comparison.json
//! DIR/plot/region_points.csv, DIR/plot/*.py
//! ```
//!
//! Everything except the fronts, trajectories and manifest is a pure function
//! of those files, so `regenerate_report` reproduces it byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::hypervolume::{compare_pools_at, hypervolume, shared_reference, PoolComparison};
use super::{CandidateEvaluator, ChiOutcome, Region, SweepResult, SweepSpec};
use crate::error::{Error, Result};
use crate::metrics::display_j1;
use crate::moga::{FrontPoint, ParetoFront};

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Numerical(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

pub fn front_path(dir: &Path, chi: f64) -> PathBuf {
    dir.join("fronts").join(format!("front_chi_{chi}.csv"))
}

pub fn trajectory_path(dir: &Path, chi: f64) -> PathBuf {
    dir.join("trajectories").join(format!("traj_chi_{chi}.csv"))
}

const FRONT_HEADER: [&str; 7] = ["chi", "k_p", "k_i", "lambda", "J1", "J2", "J1_display"];

pub fn write_front_csv(path: &Path, chi: f64, front: &ParetoFront) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(FRONT_HEADER).map_err(|e| io_err(path, e))?;
    for p in &front.points {
        let row = [chi, p.genes[0], p.genes[1], p.genes[2], p.j1, p.j2, display_j1(p.j1)];
        w.write_record(row.iter().map(f64::to_string)).map_err(|e| io_err(path, e))?;
    }
    let bytes = w.into_inner().map_err(|e| io_err(path, e))?;
    write_file(path, &bytes)
}

pub fn read_front_csv(path: &Path) -> Result<ParetoFront> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let header = r.headers().map_err(|e| io_err(path, e))?.clone();
    if header.iter().ne(FRONT_HEADER) {
        return Err(io_err(path, "unexpected front header"));
    }
    let mut points = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| io_err(path, e))?;
        let v: Vec<f64> = rec.iter().map(|s| s.parse::<f64>().map_err(|e| io_err(path, e))).collect::<Result<_>>()?;
        points.push(FrontPoint { genes: vec![v[1], v[2], v[3]], j1: v[4], j2: v[5] });
    }
    Ok(ParetoFront { points })
}

pub fn write_manifest(dir: &Path, spec: &SweepSpec) -> Result<()> {
    write_file(&dir.join("manifest.toml"), spec.to_toml()?.as_bytes())
}

pub fn read_manifest(dir: &Path) -> Result<SweepSpec> {
    SweepSpec::load(&dir.join("manifest.toml"))
}

/// Per-chi line of the summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSummary {
    pub chi: f64,
    pub front_points: usize,
    pub region_points: usize,
    pub hypervolume: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub split_at: f64,
    pub region: Option<Region>,
    pub region_is_auto: bool,
    pub reference: [f64; 2],
    pub per_chi: Vec<ChiSummary>,
    pub comparison: Option<PoolComparison>,
    /// Why no comparison could be made.
    pub comparison_error: Option<String>,
}

impl Report {
    pub fn build(result: &SweepResult, split_at: f64) -> Result<Report> {
        let region_pts: Vec<(f64, Vec<[f64; 2]>)> = result
            .outcomes
            .iter()
            .map(|o| (o.chi, result.region_points(o).iter().map(FrontPoint::pair).collect()))
            .collect();
        let reference = shared_reference(region_pts.iter().flat_map(|(_, p)| p.iter()));
        let mut per_chi = Vec::new();
        let (mut low, mut high) = (Vec::new(), Vec::new());
        for (o, (chi, pts)) in result.outcomes.iter().zip(&region_pts) {
            let pool = if *chi <= split_at { &mut low } else { &mut high };
            pool.extend(pts.iter().copied());
            per_chi.push(ChiSummary {
                chi: *chi,
                front_points: o.front.len(),
                region_points: pts.len(),
                hypervolume: hypervolume(pts, reference)?,
            });
        }
        let (comparison, comparison_error) = if low.is_empty() || high.is_empty() {
            let msg =
                format!("insufficient data: {} region points with chi <= {split_at}, {} above", low.len(), high.len());
            (None, Some(msg))
        } else {
            (Some(compare_pools_at(&low, &high, reference)?), None)
        };
        Ok(Report {
            split_at,
            region: result.region,
            region_is_auto: result.region_is_auto,
            reference,
            per_chi,
            comparison,
            comparison_error,
        })
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from("scope,chi,front_points,region_points,hypervolume\n");
        for c in &self.per_chi {
            s += &format!("chi,{},{},{},{}\n", c.chi, c.front_points, c.region_points, c.hypervolume);
        }
        if let Some(cmp) = &self.comparison {
            for (scope, p) in [("pool_low", &cmp.low), ("pool_high", &cmp.high)] {
                s += &format!("{scope},{},{},{},{}\n", self.split_at, p.front_points, p.points, p.hypervolume);
            }
        }
        s
    }

    /// Short human-readable verdict.
    pub fn verdict(&self) -> String {
        match &self.comparison {
            Some(c) => format!(
                "hypervolume chi <= {s}: {:.6e}, chi > {s}: {:.6e} -> {} (dominance {}:{})",
                c.low.hypervolume,
                c.high.hypervolume,
                if c.low_is_better() { "low chi at least as good" } else { "high chi better" },
                c.low_dominates,
                c.high_dominates,
                s = self.split_at
            ),
            None => self.comparison_error.clone().unwrap_or_default(),
        }
    }
}

/// Writes manifest, fronts and the knee-point trajectories of a finished
/// sweep, then the report.
pub fn write_sweep(dir: &Path, spec: &SweepSpec, result: &SweepResult) -> Result<Report> {
    write_manifest(dir, spec)?;
    for o in &result.outcomes {
        write_front_csv(&front_path(dir, o.chi), o.chi, &o.front)?;
    }
    let report = regenerate_report(dir)?;
    let plant = spec.plant.to_plant()?;
    let knees: Vec<(f64, Vec<f64>)> = result
        .outcomes
        .iter()
        .filter_map(|o| knee(&result.region_points(o), report.reference).map(|g| (o.chi, g)))
        .collect();
    knees
        .par_iter()
        .map(|(chi, genes)| {
            let ev = CandidateEvaluator::new(&plant, *chi, &spec.approx, &spec.sim)?;
            let traj = ev.trajectory(genes)?;
            let mut buf = Vec::new();
            traj.write_csv(&mut buf)?;
            write_file(&trajectory_path(dir, *chi), &buf)
        })
        .collect::<Result<Vec<()>>>()?;
    Ok(report)
}

/// Region point closest to the origin after scaling by the reference.
fn knee(points: &[FrontPoint], reference: [f64; 2]) -> Option<Vec<f64>> {
    points
        .iter()
        .map(|p| (p.j1 / reference[0] + p.j2 / reference[1], p))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, p)| p.genes.clone())
}

/// Rebuilds the summary, comparison and plot files from the manifest and
/// front CSVs in `dir`.
pub fn regenerate_report(dir: &Path) -> Result<Report> {
    let spec = read_manifest(dir)?;
    let mut outcomes = Vec::new();
    for &chi in &spec.chi_values {
        let front = read_front_csv(&front_path(dir, chi))?;
        let note = front.is_empty().then(|| "empty front".to_string());
        outcomes.push(ChiOutcome { chi, front, note });
    }
    let result = SweepResult::new(outcomes, spec.region);
    let report = Report::build(&result, spec.split_at)?;

    write_file(&dir.join("summary.csv"), report.summary_csv().as_bytes())?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Numerical(e.to_string()))?;
    write_file(&dir.join("comparison.json"), (json + "\n").as_bytes())?;

    let mut pts = String::from("chi,k_p,k_i,lambda,J1,J2,J1_display,side\n");
    for o in &result.outcomes {
        let side = if o.chi <= spec.split_at { "low" } else { "high" };
        for p in result.region_points(o) {
            pts += &format!(
                "{},{},{},{},{},{},{},{side}\n",
                o.chi,
                p.genes[0],
                p.genes[1],
                p.genes[2],
                p.j1,
                p.j2,
                display_j1(p.j1)
            );
        }
    }
    write_file(&dir.join("plot").join("region_points.csv"), pts.as_bytes())?;
    write_file(&dir.join("plot").join("plot_fronts.py"), PLOT_FRONTS.as_bytes())?;
    write_file(&dir.join("plot").join("plot_trajectories.py"), PLOT_TRAJECTORIES.as_bytes())?;
    Ok(report)
}

const PLOT_FRONTS: &str = r#"#!/usr/bin/env python3
"""Scatter of every chi front and of the trade-off region points.

Usage: python3 plot_fronts.py   (run from this directory; writes fronts.png)
"""
import csv
import glob
import json
import os

import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
root = os.path.dirname(here)


def rows(path):
    with open(path) as f:
        return list(csv.DictReader(f))


fig, (ax_all, ax_region) = plt.subplots(1, 2, figsize=(12, 5))
for path in sorted(glob.glob(os.path.join(root, "fronts", "front_chi_*.csv")),
                   key=lambda p: float(p.rsplit("_", 1)[1][:-4])):
    data = rows(path)
    if not data:
        continue
    chi = data[0]["chi"]
    ax_all.scatter([float(r["J1_display"]) for r in data], [float(r["J2"]) for r in data],
                   s=14, label=f"chi={chi}")

region = rows(os.path.join(here, "region_points.csv"))
for side, marker in (("low", "o"), ("high", "^")):
    pts = [r for r in region if r["side"] == side]
    ax_region.scatter([float(r["J1_display"]) for r in pts], [float(r["J2"]) for r in pts],
                      marker=marker, s=18, label=f"{side} chi")

with open(os.path.join(root, "comparison.json")) as f:
    report = json.load(f)
if report.get("region"):
    j1, j2 = report["region"]["j1"], report["region"]["j2"]
    ax_all.add_patch(plt.Rectangle((j1[0] / 100.0, j2[0]), (j1[1] - j1[0]) / 100.0, j2[1] - j2[0],
                                   fill=False, linestyle=":", color="k"))

for ax, title in ((ax_all, "Pareto fronts"), (ax_region, "Trade-off region")):
    ax.set_xlabel("J1 / 100 (ITAE)")
    ax.set_ylabel("J2 (control energy)")
    ax.set_title(title)
    ax.legend(fontsize=8)
fig.tight_layout()
fig.savefig(os.path.join(here, "fronts.png"), dpi=150)
"#;

const PLOT_TRAJECTORIES: &str = r#"#!/usr/bin/env python3
"""Output and control signal of the knee point of every chi.

Usage: python3 plot_trajectories.py   (writes trajectories.png)
"""
import csv
import glob
import os

import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
root = os.path.dirname(here)

fig, (ax_y, ax_u) = plt.subplots(2, 1, figsize=(10, 7), sharex=True)
for path in sorted(glob.glob(os.path.join(root, "trajectories", "traj_chi_*.csv")),
                   key=lambda p: float(p.rsplit("_", 1)[1][:-4])):
    chi = path.rsplit("_", 1)[1][:-4]
    with open(path) as f:
        data = list(csv.DictReader(f))
    step = max(1, len(data) // 5000)
    data = data[::step]
    t = [float(r["t"]) for r in data]
    ax_y.plot(t, [float(r["y"]) for r in data], label=f"chi={chi}")
    ax_u.plot(t, [float(r["u"]) for r in data], label=f"chi={chi}")
ax_y.set_ylabel("y")
ax_u.set_ylabel("u")
ax_u.set_xlabel("t [s]")
ax_y.legend(fontsize=8)
fig.tight_layout()
fig.savefig(os.path.join(here, "trajectories.png"), dpi=150)
"#;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn front_csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let front = ParetoFront {
            points: vec![
                FrontPoint { genes: vec![0.1 + 0.2, 1e-4, 1.3], j1: 12345.678901234, j2: 0.1 },
                FrontPoint { genes: vec![49.99, 4.5, 0.05], j1: 2e5, j2: 1.0 / 3.0 },
            ],
        };
        let p = front_path(dir.path(), 0.4);
        write_front_csv(&p, 0.4, &front).unwrap();
        assert!(p.ends_with("fronts/front_chi_0.4.csv"));
        assert_eq!(read_front_csv(&p).unwrap(), front);
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("chi,k_p,k_i,lambda,J1,J2,J1_display\n"));
    }

    #[test]
    fn knee_balances_both_objectives() {
        let pts = [
            FrontPoint { genes: vec![1.0], j1: 0.0, j2: 10.0 },
            FrontPoint { genes: vec![2.0], j1: 3.0, j2: 3.0 },
            FrontPoint { genes: vec![3.0], j1: 10.0, j2: 0.0 },
        ];
        assert_eq!(knee(&pts, [11.0, 11.0]), Some(vec![2.0]));
        assert_eq!(knee(&[], [1.0, 1.0]), None);
    }
}
