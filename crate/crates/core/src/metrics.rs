//! Tracking and effort objectives computed from a sampled trajectory.

use serde::{Deserialize, Serialize};

use crate::sim_engine::Trajectory;

/// Objective value assigned to both components of a diverged run.
pub const PENALTY: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objectives {
    /// Time-weighted absolute error integral.
    pub j1_itae: f64,
    /// Integral of the squared control signal.
    pub j2_energy: f64,
    pub penalized: bool,
}

impl Objectives {
    pub fn penalty() -> Self {
        Objectives { j1_itae: PENALTY, j2_energy: PENALTY, penalized: true }
    }

    pub fn pair(&self) -> [f64; 2] {
        [self.j1_itae, self.j2_energy]
    }
}

/// Trapezoid rule over possibly non-uniform samples.
fn trapezoid(t: &[f64], f: impl Fn(usize) -> f64) -> f64 {
    (1..t.len()).map(|i| 0.5 * (t[i] - t[i - 1]) * (f(i - 1) + f(i))).sum()
}

/// `int t |r - y| dt` over the whole run, with `t` measured from the start of
/// the simulation. `None` for a diverged trajectory.
pub fn itae(traj: &Trajectory) -> Option<f64> {
    if traj.diverged {
        return None;
    }
    Some(trapezoid(&traj.t, |i| traj.t[i] * (traj.r[i] - traj.y[i]).abs()))
}

/// `int u^2 dt` over the whole run. `None` for a diverged trajectory.
pub fn control_energy(traj: &Trajectory) -> Option<f64> {
    if traj.diverged {
        return None;
    }
    Some(trapezoid(&traj.t, |i| traj.u[i] * traj.u[i]))
}

/// Both objectives, or the penalty pair if the run diverged or produced a
/// non-finite value.
pub fn objectives(traj: &Trajectory) -> Objectives {
    match (itae(traj), control_energy(traj)) {
        (Some(j1), Some(j2)) if j1.is_finite() && j2.is_finite() => {
            Objectives { j1_itae: j1, j2_energy: j2, penalized: false }
        }
        _ => Objectives::penalty(),
    }
}

/// ITAE as shown in reports (divided by 100).
pub fn display_j1(j1: f64) -> f64 {
    j1 / 100.0
}
