//! Band-limited Oustaloup approximation of `s^alpha`.

use num_complex::Complex64;

use super::block::{Factor, FracBlock};
use super::elements::{log_grid, ApproxConfig};
use crate::error::{Error, Result};

/// Approximates `s^order` over `[omega_low, omega_high]` with `2N + 1`
/// geometrically spaced zero/pole pairs. The gain makes the magnitude exact
/// at the geometric centre of the band.
pub fn oustaloup_approx(order: f64, cfg: &ApproxConfig) -> Result<FracBlock> {
    if !(order.abs() < 2.0) {
        return Err(Error::invalid(format!("Oustaloup order must lie in (-2, 2), got {order}")));
    }
    cfg.validate()?;
    if order == 0.0 {
        return Ok(FracBlock::constant(1.0));
    }
    let (wb, wh) = (cfg.omega_low, cfg.omega_high);
    let n = cfg.n_sections as f64;
    let m = cfg.pairs() as f64;
    let ratio = wh / wb;
    let mut zeros = Vec::with_capacity(cfg.pairs());
    let mut poles = Vec::with_capacity(cfg.pairs());
    for k in -(cfg.n_sections as i64)..=(cfg.n_sections as i64) {
        let k = k as f64;
        zeros.push(-wb * ratio.powf((k + n + 0.5 * (1.0 - order)) / m));
        poles.push(-wb * ratio.powf((k + n + 0.5 * (1.0 + order)) / m));
    }
    let centre = (wb * wh).sqrt();
    let s = Complex64::new(0.0, centre);
    let unscaled = zeros.iter().zip(&poles).fold(Complex64::new(1.0, 0.0), |acc, (&z, &p)| acc * (s - z) / (s - p));
    let gain = centre.powf(order) / unscaled.norm();
    let factor = Factor::ZeroPole { gain, zeros, poles };

    let exact = |w: f64| Complex64::new(0.0, w).powf(order);
    let err = log_grid(wb, wh, cfg.fit_grid_points)
        .into_iter()
        .map(|w| (factor.eval(Complex64::new(0.0, w)).norm() / exact(w).norm() - 1.0).abs())
        .fold(0.0, f64::max);
    FracBlock::new(vec![factor], err)
}

/// Worst-case magnitude and phase deviation of an approximation from an
/// exact response over a frequency window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandError {
    pub max_rel_magnitude: f64,
    pub max_phase_deg: f64,
}

pub fn band_error(
    approx: impl Fn(f64) -> Complex64,
    exact: impl Fn(f64) -> Complex64,
    lo: f64,
    hi: f64,
    points: usize,
) -> BandError {
    let mut out = BandError { max_rel_magnitude: 0.0, max_phase_deg: 0.0 };
    for w in log_grid(lo, hi, points) {
        let (h, e) = (approx(w), exact(w));
        out.max_rel_magnitude = out.max_rel_magnitude.max((h.norm() / e.norm() - 1.0).abs());
        out.max_phase_deg = out.max_phase_deg.max((h / e).arg().to_degrees().abs());
    }
    out
}
