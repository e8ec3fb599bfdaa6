use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::network::LoopModel;
use crate::error::{Error, Result};

/// How the predictor loop is wired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    /// Controller in the outer loop with the inner model/lag prediction path.
    #[default]
    Fig1Predictor,
    /// Equivalent controller `Gc / (1 + Gc Gp1 (1 - Gp2))` around the plant.
    Fig3Equivalent,
}

/// Integration step, horizon and the setpoint/disturbance schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub dt: f64,
    pub horizon: f64,
    pub setpoint_time: f64,
    pub setpoint_amp: f64,
    pub disturbance_time: f64,
    pub disturbance_amp: f64,
    pub topology: Topology,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 0.01,
            horizon: 1000.0,
            setpoint_time: 5.0,
            setpoint_amp: 1.0,
            disturbance_time: 500.0,
            disturbance_amp: 5.0,
            topology: Topology::Fig1Predictor,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        let ordered = self.horizon >= self.disturbance_time
            && self.disturbance_time > self.setpoint_time
            && self.setpoint_time >= 0.0;
        if !ordered || !self.horizon.is_finite() {
            return Err(Error::invalid(format!(
                "need horizon >= disturbance_time > setpoint_time >= 0, got {} / {} / {}",
                self.horizon, self.disturbance_time, self.setpoint_time
            )));
        }
        if !(self.setpoint_amp.is_finite() && self.disturbance_amp.is_finite()) {
            return Err(Error::invalid("amplitudes must be finite"));
        }
        Ok(())
    }

    /// Number of samples, `floor(horizon / dt) + 1`.
    pub fn samples(&self) -> usize {
        (self.horizon / self.dt + 1e-9).floor() as usize + 1
    }

    /// Largest tolerated `|y|` or `|u|` before a run counts as diverged.
    pub fn divergence_bound(&self) -> f64 {
        1e6 * self.setpoint_amp.abs().max(1.0)
    }

    /// `[r(t), d(t)]`. A step counts as applied once `t` is within a tiny
    /// fraction of `dt` of its switching time, so grid-aligned steps are not
    /// delayed by rounding in `k * dt`.
    #[inline]
    pub fn exogenous(&self, t: f64) -> [f64; 2] {
        let tol = 1e-9 * self.dt;
        let r = if t + tol >= self.setpoint_time { self.setpoint_amp } else { 0.0 };
        let d = if t + tol >= self.disturbance_time { self.disturbance_amp } else { 0.0 };
        [r, d]
    }
}

/// Uniformly sampled closed-loop signals.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub r: Vec<f64>,
    pub d: Vec<f64>,
    pub u: Vec<f64>,
    pub y: Vec<f64>,
    pub e: Vec<f64>,
    /// Set when `|y|` or `|u|` left the divergence bound; the series then end
    /// at the first offending sample.
    pub diverged: bool,
}

impl Trajectory {
    fn with_capacity(n: usize) -> Self {
        Trajectory {
            t: Vec::with_capacity(n),
            r: Vec::with_capacity(n),
            d: Vec::with_capacity(n),
            u: Vec::with_capacity(n),
            y: Vec::with_capacity(n),
            e: Vec::with_capacity(n),
            diverged: false,
        }
    }

    fn push(&mut self, t: f64, w: [f64; 2], y: f64, u: f64) {
        self.t.push(t);
        self.r.push(w[0]);
        self.d.push(w[1]);
        self.u.push(u);
        self.y.push(y);
        self.e.push(w[0] - y);
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Mean of `y` over samples with `from <= t < to`.
    pub fn mean_y(&self, from: f64, to: f64) -> Option<f64> {
        let (sum, n) = self
            .t
            .iter()
            .zip(&self.y)
            .filter(|(&t, _)| t >= from && t < to)
            .fold((0.0, 0usize), |(s, n), (_, &y)| (s + y, n + 1));
        (n > 0).then(|| sum / n as f64)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Numerical(format!("writing trajectory: {e}"));
        w.write_record(["t", "r", "d", "u", "y", "e"]).map_err(io)?;
        for i in 0..self.len() {
            let row = [self.t[i], self.r[i], self.d[i], self.u[i], self.y[i], self.e[i]];
            w.write_record(row.iter().map(|v| format!("{v:e}"))).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Numerical(format!("writing trajectory: {e}")))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f =
            std::fs::File::create(path).map_err(|e| Error::Numerical(format!("creating {}: {e}", path.display())))?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

/// Integrates `model` from zero initial state with classical fixed-step RK4.
pub fn simulate(model: &mut LoopModel, sim: &SimConfig) -> Result<Trajectory> {
    sim.validate()?;
    model.reset();
    let n = model.order();
    let steps = sim.samples();
    let dt = sim.dt;
    let bound = sim.divergence_bound();
    let mut traj = Trajectory::with_capacity(steps);
    let mut scratch = model.scratch();
    let mut x = std::mem::take(model.state_mut());
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);

    for step in 0..steps {
        let t = step as f64 * dt;
        let w0 = sim.exogenous(t);
        let (y, u) = model.outputs(&x, w0, &mut scratch);
        let out_of_bounds = !(y.abs() <= bound && u.abs() <= bound);
        traj.push(t, w0, y, u);
        if out_of_bounds {
            traj.diverged = true;
            break;
        }
        if step + 1 == steps {
            break;
        }
        let wh = sim.exogenous(t + 0.5 * dt);
        let w1 = sim.exogenous((step + 1) as f64 * dt);
        model.derivative(&x, w0, &mut scratch, &mut k1);
        axpy(&x, 0.5 * dt, &k1, &mut tmp);
        model.derivative(&tmp, wh, &mut scratch, &mut k2);
        axpy(&x, 0.5 * dt, &k2, &mut tmp);
        model.derivative(&tmp, wh, &mut scratch, &mut k3);
        axpy(&x, dt, &k3, &mut tmp);
        model.derivative(&tmp, w1, &mut scratch, &mut k4);
        for i in 0..n {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    *model.state_mut() = x;
    Ok(traj)
}

#[inline]
fn axpy(x: &[f64], h: f64, k: &[f64], out: &mut [f64]) {
    for ((o, &a), &b) in out.iter_mut().zip(x).zip(k) {
        *o = a + h * b;
    }
}

/// Exact unit-step response of `gain / (time_constant s + 1)^order` for
/// integer `order`.
pub fn analytic_step_oracle(gain: f64, time_constant: f64, order: f64, t: f64) -> Result<f64> {
    if !(order >= 1.0 && order.fract() == 0.0 && order.is_finite()) {
        return Err(Error::invalid(format!("oracle needs a positive integer order, got {order}")));
    }
    if !(time_constant > 0.0) || !(t >= 0.0) {
        return Err(Error::invalid("oracle needs time_constant > 0 and t >= 0"));
    }
    if t.is_infinite() {
        return Ok(gain);
    }
    let x = t / time_constant;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..order as usize {
        term *= x / k as f64;
        sum += term;
    }
    Ok(gain * (1.0 - (-x).exp() * sum))
}
