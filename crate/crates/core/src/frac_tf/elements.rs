use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `(k_p + k_i / s)^lambda`, the whole PI term raised to a fractional power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FracPI {
    pub k_p: f64,
    pub k_i: f64,
    pub lambda: f64,
}

impl FracPI {
    pub fn new(k_p: f64, k_i: f64, lambda: f64) -> Result<Self> {
        if !(k_p > 0.0 && k_p.is_finite()) {
            return Err(Error::invalid(format!("k_p must be positive, got {k_p}")));
        }
        if !(k_i > 0.0 && k_i.is_finite()) {
            return Err(Error::invalid(format!("k_i must be positive, got {k_i}")));
        }
        if !(lambda > 0.0 && lambda < 2.0) {
            return Err(Error::invalid(format!("lambda must lie in (0, 2), got {lambda}")));
        }
        Ok(FracPI { k_p, k_i, lambda })
    }

    pub fn freq_response(&self, omega: f64) -> Complex64 {
        pi_power_response(self.k_p, self.k_i, self.lambda, omega)
    }
}

/// `K / (T s + 1)^n` with real `n >= 3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HighOrderPlant {
    pub gain: f64,
    pub time_constant: f64,
    pub order: f64,
}

impl HighOrderPlant {
    pub fn new(gain: f64, time_constant: f64, order: f64) -> Result<Self> {
        if !(gain.is_finite() && gain != 0.0) {
            return Err(Error::invalid(format!("plant gain must be finite and nonzero, got {gain}")));
        }
        if !(time_constant > 0.0 && time_constant.is_finite()) {
            return Err(Error::invalid(format!("time constant must be positive, got {time_constant}")));
        }
        if !(order >= 3.0 && order.is_finite()) {
            return Err(Error::invalid(format!("plant order must be at least 3, got {order}")));
        }
        Ok(HighOrderPlant { gain, time_constant, order })
    }

    pub fn freq_response(&self, omega: f64) -> Complex64 {
        lag_response(self.gain, self.time_constant, self.order, omega)
    }
}

/// Division of the plant order into a predicted part of order `chi` and a
/// remaining lag of order `n - chi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictorSplit {
    pub chi: f64,
}

impl PredictorSplit {
    pub fn new(chi: f64, plant: &HighOrderPlant) -> Result<Self> {
        if !(chi > 0.0 && chi < 2.0) {
            return Err(Error::invalid(format!("chi must lie in (0, 2), got {chi}")));
        }
        if chi >= plant.order {
            return Err(Error::invalid(format!("chi ({chi}) must be below the plant order ({})", plant.order)));
        }
        Ok(PredictorSplit { chi })
    }

    /// `K / (Ts+1)^chi`, the part of the plant the predictor feeds back.
    pub fn model_element(&self, plant: &HighOrderPlant) -> FracElement {
        FracElement::PlantLag { gain: plant.gain, time_constant: plant.time_constant, order: self.chi }
    }

    /// `1 / (Ts+1)^(n - chi)`, the unit-gain remainder.
    pub fn lag_element(&self, plant: &HighOrderPlant) -> FracElement {
        FracElement::PlantLag { gain: 1.0, time_constant: plant.time_constant, order: plant.order - self.chi }
    }
}

/// Frequency band and resolution of all rational approximations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ApproxConfig {
    pub omega_low: f64,
    pub omega_high: f64,
    pub n_sections: usize,
    pub fit_grid_points: usize,
    /// Largest tolerated relative magnitude error of a least-squares fit over
    /// the central 80% of the band (log scale).
    pub fit_error_ceiling: f64,
}

impl Default for ApproxConfig {
    fn default() -> Self {
        ApproxConfig { omega_low: 1e-4, omega_high: 1e2, n_sections: 5, fit_grid_points: 200, fit_error_ceiling: 0.05 }
    }
}

impl ApproxConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_low > 0.0 && self.omega_low < self.omega_high && self.omega_high.is_finite()) {
            return Err(Error::invalid(format!(
                "approximation band must satisfy 0 < low < high, got [{}, {}]",
                self.omega_low, self.omega_high
            )));
        }
        if self.n_sections == 0 {
            return Err(Error::invalid("n_sections must be at least 1"));
        }
        if self.fit_grid_points < 2 * self.pairs() {
            return Err(Error::invalid(format!("fit_grid_points must be at least {}", 2 * self.pairs())));
        }
        if !(self.fit_error_ceiling > 0.0) {
            return Err(Error::invalid("fit_error_ceiling must be positive"));
        }
        Ok(())
    }

    /// Number of zero/pole pairs, `2 * n_sections + 1`.
    pub fn pairs(&self) -> usize {
        2 * self.n_sections + 1
    }

    /// Log-spaced frequencies spanning the band, endpoints included.
    pub fn grid(&self) -> Vec<f64> {
        log_grid(self.omega_low, self.omega_high, self.fit_grid_points)
    }

    /// Sub-band that drops 10% of the log-width at each end.
    pub fn central_band(&self) -> (f64, f64) {
        let lo = self.omega_low.log10();
        let hi = self.omega_high.log10();
        let w = hi - lo;
        (10f64.powf(lo + 0.1 * w), 10f64.powf(hi - 0.1 * w))
    }
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect()
}

/// An element whose exact (irrational) frequency response is known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FracElement {
    /// `gain * (time_constant * s + 1)^(-order)`
    PlantLag { gain: f64, time_constant: f64, order: f64 },
    /// `(k_p + k_i / s)^lambda`
    FracPi { k_p: f64, k_i: f64, lambda: f64 },
}

impl From<FracPI> for FracElement {
    fn from(c: FracPI) -> Self {
        FracElement::FracPi { k_p: c.k_p, k_i: c.k_i, lambda: c.lambda }
    }
}

impl From<HighOrderPlant> for FracElement {
    fn from(p: HighOrderPlant) -> Self {
        FracElement::PlantLag { gain: p.gain, time_constant: p.time_constant, order: p.order }
    }
}

/// Exact response at `s = j omega` using principal-branch complex powers.
pub fn exact_frac_response(element: &FracElement, omega: f64) -> Result<Complex64> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::invalid(format!("omega must be positive, got {omega}")));
    }
    Ok(match *element {
        FracElement::PlantLag { gain, time_constant, order } => lag_response(gain, time_constant, order, omega),
        FracElement::FracPi { k_p, k_i, lambda } => pi_power_response(k_p, k_i, lambda, omega),
    })
}

pub(crate) fn lag_response(gain: f64, time_constant: f64, order: f64, omega: f64) -> Complex64 {
    Complex64::new(1.0, time_constant * omega).powf(-order) * gain
}

pub(crate) fn pi_power_response(k_p: f64, k_i: f64, lambda: f64, omega: f64) -> Complex64 {
    Complex64::new(k_p, -k_i / omega).powf(lambda)
}
