//! Weighted least-squares rational fitting of frequency responses by
//! pole relocation (vector fitting) with stability projection.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::block::{Factor, FracBlock, Mode, PoleResidue};
use super::elements::{lag_response, log_grid, ApproxConfig, FracElement};
use super::poly;
use crate::error::{Error, Result};

const RELOCATIONS: usize = 12;

/// What to fit.
#[derive(Clone, Copy)]
pub enum FitTarget<'a> {
    /// A fractional element with a known exact response. Integer lag powers
    /// are realized exactly and only the fractional remainder is fitted. A
    /// controller with integral action gets an exact integrator factor.
    Element(FracElement),
    /// Any response on the band, fitted directly.
    Custom(&'a (dyn Fn(f64) -> Complex64 + Sync)),
}

/// Fits a stable proper rational model to `target` over the configured band.
pub fn fit_frac_response(target: FitTarget<'_>, cfg: &ApproxConfig) -> Result<FracBlock> {
    cfg.validate()?;
    match target {
        FitTarget::Custom(f) => {
            let model = fit_factor(f, cfg)?;
            finish(vec![model], f, cfg)
        }
        FitTarget::Element(FracElement::PlantLag { gain, time_constant, order }) => {
            if !(time_constant > 0.0) || !order.is_finite() || !gain.is_finite() {
                return Err(Error::invalid("lag target needs a positive time constant"));
            }
            let exact = move |w: f64| lag_response(gain, time_constant, order, w);
            if order < 0.0 {
                let model = pin_dc(fit_factor(&exact, cfg)?, gain);
                return finish(vec![model], &exact, cfg);
            }
            let whole = order.round();
            if (order - whole).abs() < 1e-9 {
                return FracBlock::exact(Factor::Lag { gain, time_constant, power: whole as u32 });
            }
            let power = order.floor() as u32;
            let frac = order - order.floor();
            let mut factors = Vec::new();
            let frac_gain = if power > 0 {
                factors.push(Factor::Lag { gain, time_constant, power });
                1.0
            } else {
                gain
            };
            let part = move |w: f64| lag_response(frac_gain, time_constant, frac, w);
            factors.push(pin_dc(fit_factor(&part, cfg)?, frac_gain));
            finish(factors, &exact, cfg)
        }
        FitTarget::Element(FracElement::FracPi { k_p, k_i, lambda }) => {
            if !(k_p >= 0.0 && k_i >= 0.0 && lambda.abs() < 2.0) || (k_p == 0.0 && k_i == 0.0) {
                return Err(Error::invalid("frac-PI target needs k_p, k_i >= 0 (not both zero) and |lambda| < 2"));
            }
            if lambda == 0.0 {
                return Ok(FracBlock::constant(1.0));
            }
            if k_i == 0.0 {
                return Ok(FracBlock::constant(k_p.powf(lambda)));
            }
            let exact = move |w: f64| Complex64::new(k_p, -k_i / w).powf(lambda);
            if lambda < 0.0 {
                let factors = vec![fit_factor(&exact, cfg)?];
                return finish(factors, &exact, cfg);
            }
            // An exact integrator keeps the DC gain infinite, so the loop has
            // no static error. `(s + w_b) / s` is close to 1 inside the band
            // and the fitted factor absorbs the rest.
            let wb = cfg.omega_low;
            let integrator = Factor::ZeroPole { gain: 1.0, zeros: vec![-wb], poles: vec![0.0] };
            let rest = move |w: f64| {
                let s = Complex64::new(0.0, w);
                exact(w) * s / (s + wb)
            };
            let factors = vec![integrator, fit_factor(&rest, cfg)?];
            finish(factors, &exact, cfg)
        }
    }
}

/// Records the grid error of the assembled block against the exact target.
fn finish(factors: Vec<Factor>, exact: &(dyn Fn(f64) -> Complex64 + Sync), cfg: &ApproxConfig) -> Result<FracBlock> {
    let probe = FracBlock::new(factors, 0.0)?;
    let (worst, _) = magnitude_errors(|w| probe.freq_response(w), exact, cfg);
    FracBlock::new(probe.factors().to_vec(), worst)
}

/// Largest relative magnitude error over the full grid and over the central
/// 80% of the band.
fn magnitude_errors(
    model: impl Fn(f64) -> Complex64,
    exact: &(dyn Fn(f64) -> Complex64 + Sync),
    cfg: &ApproxConfig,
) -> (f64, f64) {
    let (lo, hi) = cfg.central_band();
    let mut worst = 0.0f64;
    let mut worst_central = 0.0f64;
    for w in cfg.grid() {
        let e = (model(w).norm() / exact(w).norm() - 1.0).abs();
        let e = if e.is_finite() { e } else { f64::INFINITY };
        worst = worst.max(e);
        if w >= lo * (1.0 - 1e-12) && w <= hi * (1.0 + 1e-12) {
            worst_central = worst_central.max(e);
        }
    }
    (worst, worst_central)
}

/// Fits one modal factor, enforces the error ceiling on it and checks the
/// expanded denominator for stability.
fn fit_factor(f: &(dyn Fn(f64) -> Complex64 + Sync), cfg: &ApproxConfig) -> Result<Factor> {
    let omegas = log_grid(cfg.omega_low, cfg.omega_high, cfg.fit_grid_points);
    let data: Vec<Complex64> = omegas.iter().map(|&w| f(w)).collect();
    if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite() || z.norm() == 0.0) {
        return Err(Error::Numerical("target response is not finite and nonzero on the band".into()));
    }
    let model = vector_fit(&omegas, &data, cfg.pairs(), cfg.omega_low)?;
    let (_, central) = magnitude_errors(|w| model.eval(Complex64::new(0.0, w)), f, cfg);
    if !(central <= cfg.fit_error_ceiling) {
        return Err(Error::FitCeilingExceeded { error: central, ceiling: cfg.fit_error_ceiling });
    }
    let tf = model.to_tf()?;
    if let Some(bad) = tf.poles().into_iter().find(|p| p.re >= 0.0) {
        return Err(Error::UnstableFit { re: bad.re });
    }
    Ok(Factor::PoleResidue(model))
}

/// Rescales a fitted factor so its DC gain is exactly `dc`. Lags have a
/// finite DC gain that sets the loop's final value, so it is matched exactly
/// rather than to fit accuracy.
fn pin_dc(f: Factor, dc: f64) -> Factor {
    let Factor::PoleResidue(mut pr) = f else { return f };
    let k = dc / pr.eval(Complex64::new(0.0, 0.0)).re;
    if !k.is_finite() {
        return Factor::PoleResidue(pr);
    }
    for m in &mut pr.modes {
        match m {
            Mode::Real { residue, .. } => *residue *= k,
            Mode::Pair { residue, .. } => *residue *= k,
        }
    }
    pr.direct *= k;
    Factor::PoleResidue(pr)
}

#[derive(Debug, Clone, Copy)]
enum Pole {
    Real(f64),
    Pair(Complex64),
}

impl Pole {
    fn width(&self) -> usize {
        match self {
            Pole::Real(_) => 1,
            Pole::Pair(_) => 2,
        }
    }
}

/// Basis row at `s`: `1/(s-p)` for real poles and the pair
/// `1/(s-p) + 1/(s-p*)`, `j/(s-p) - j/(s-p*)` for complex ones.
fn basis(poles: &[Pole], s: Complex64, out: &mut Vec<Complex64>) {
    out.clear();
    for p in poles {
        match *p {
            Pole::Real(a) => out.push(1.0 / (s - a)),
            Pole::Pair(a) => {
                let (u, v) = (1.0 / (s - a), 1.0 / (s - a.conj()));
                out.push(u + v);
                out.push(Complex64::i() * (u - v));
            }
        }
    }
}

/// Column-scaled least squares through the SVD.
fn lstsq(a: DMatrix<f64>, b: DVector<f64>) -> Result<DVector<f64>> {
    let mut a = a;
    let scales: Vec<f64> = a
        .column_iter()
        .map(|c| {
            let n = c.norm();
            if n > 0.0 {
                1.0 / n
            } else {
                1.0
            }
        })
        .collect();
    for (j, &k) in scales.iter().enumerate() {
        a.column_mut(j).scale_mut(k);
    }
    let svd = nalgebra::linalg::SVD::try_new(a, true, true, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("least-squares SVD did not converge".into()))?;
    let smax = svd.singular_values.max();
    let x = svd.solve(&b, smax * 1e-14).map_err(|e| Error::Numerical(format!("least squares failed: {e}")))?;
    Ok(DVector::from_fn(x.len(), |i, _| x[i] * scales[i]))
}

fn push_rows(a: &mut DMatrix<f64>, row: usize, vals: &[Complex64]) {
    for (j, v) in vals.iter().enumerate() {
        a[(row, j)] = v.re;
        a[(row + 1, j)] = v.im;
    }
}

/// Relocates `n_poles` starting poles by repeated linearized fits, then
/// identifies residues with the final poles. After every relocation unstable
/// poles are reflected into the left half-plane and poles faster than the
/// top of the band are pulled back to it, so the model rolls off at the band
/// edge instead of hiding improper growth in very fast modes.
pub(crate) fn vector_fit(omegas: &[f64], data: &[Complex64], n_poles: usize, omega_floor: f64) -> Result<PoleResidue> {
    let ns = omegas.len();
    let (lo, hi) = (omegas[0], omegas[ns - 1]);
    let mut poles: Vec<Pole> = log_grid(lo, hi, n_poles).into_iter().map(|w| Pole::Real(-w)).collect();
    let weights: Vec<f64> = data.iter().map(|z| 1.0 / z.norm()).collect();
    let mut phi = Vec::with_capacity(n_poles);

    for relocation in 0..RELOCATIONS {
        let cols = 2 * n_poles + 1;
        let mut a = DMatrix::zeros(2 * ns, cols);
        let mut b = DVector::zeros(2 * ns);
        let mut row_vals = vec![Complex64::new(0.0, 0.0); cols];
        for i in 0..ns {
            let s = Complex64::new(0.0, omegas[i]);
            let (w, f) = (weights[i], data[i]);
            basis(&poles, s, &mut phi);
            for k in 0..n_poles {
                row_vals[k] = phi[k] * w;
                row_vals[n_poles + 1 + k] = -f * phi[k] * w;
            }
            row_vals[n_poles] = Complex64::new(w, 0.0);
            push_rows(&mut a, 2 * i, &row_vals);
            b[2 * i] = (f * w).re;
            b[2 * i + 1] = (f * w).im;
        }
        let x = lstsq(a, b)?;
        let sigma: Vec<f64> = (0..n_poles).map(|k| x[n_poles + 1 + k]).collect();

        // zeros of sigma(s) = 1 + sum of sigma terms are eig(A - b c^T)
        let mut m = DMatrix::zeros(n_poles, n_poles);
        let mut bv = DVector::zeros(n_poles);
        let mut i = 0;
        for p in &poles {
            match *p {
                Pole::Real(r) => {
                    m[(i, i)] = r;
                    bv[i] = 1.0;
                }
                Pole::Pair(z) => {
                    m[(i, i)] = z.re;
                    m[(i, i + 1)] = z.im;
                    m[(i + 1, i)] = -z.im;
                    m[(i + 1, i + 1)] = z.re;
                    bv[i] = 2.0;
                }
            }
            i += p.width();
        }
        for r in 0..n_poles {
            for c in 0..n_poles {
                m[(r, c)] -= bv[r] * sigma[c];
            }
        }
        poly::balance(&mut m);
        let eig = poly::eigenvalues(m).filter(|e| e.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        let Some(eig) = eig else {
            if relocation == 0 {
                return Err(Error::Numerical("pole relocation eigenproblem did not converge".into()));
            }
            // keep the last good poles; the error ceiling still judges the fit
            break;
        };
        let next = classify(eig.iter().copied(), omega_floor, hi);
        let moved = poles_distance(&poles, &next);
        poles = next;
        if moved < 1e-12 {
            break;
        }
    }

    // residues with the poles held fixed
    let cols = n_poles + 1;
    let mut a = DMatrix::zeros(2 * ns, cols);
    let mut b = DVector::zeros(2 * ns);
    let mut row_vals = vec![Complex64::new(0.0, 0.0); cols];
    for i in 0..ns {
        let s = Complex64::new(0.0, omegas[i]);
        let (w, f) = (weights[i], data[i]);
        basis(&poles, s, &mut phi);
        for k in 0..n_poles {
            row_vals[k] = phi[k] * w;
        }
        row_vals[n_poles] = Complex64::new(w, 0.0);
        push_rows(&mut a, 2 * i, &row_vals);
        b[2 * i] = (f * w).re;
        b[2 * i + 1] = (f * w).im;
    }
    let x = lstsq(a, b)?;
    let mut modes = Vec::with_capacity(poles.len());
    let mut k = 0;
    for p in &poles {
        match *p {
            Pole::Real(r) => modes.push(Mode::Real { pole: r, residue: x[k] }),
            Pole::Pair(z) => modes.push(Mode::Pair { pole: z, residue: Complex64::new(x[k], x[k + 1]) }),
        }
        k += p.width();
    }
    Ok(PoleResidue { modes, direct: x[n_poles] })
}

/// Sorts eigenvalues into real poles and conjugate pairs, reflecting any
/// pole with nonnegative real part across the imaginary axis and pulling
/// poles above the band back onto its upper edge.
fn classify(eigs: impl Iterator<Item = Complex64>, omega_floor: f64, omega_ceiling: f64) -> Vec<Pole> {
    let mut out = Vec::new();
    for z in eigs {
        let z = if z.norm() > omega_ceiling { z * (omega_ceiling / z.norm()) } else { z };
        let mag = z.norm().max(f64::MIN_POSITIVE);
        let re = if z.re < 0.0 {
            z.re
        } else if z.re > 0.0 {
            -z.re
        } else {
            -1e-3 * omega_floor
        };
        if z.im.abs() <= 1e-10 * mag {
            out.push(Pole::Real(re));
        } else if z.im > 0.0 {
            out.push(Pole::Pair(Complex64::new(re, z.im)));
        }
    }
    out.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap_or(std::cmp::Ordering::Equal));
    out
}

fn key(p: &Pole) -> (f64, f64) {
    match *p {
        Pole::Real(r) => (-r, 0.0),
        Pole::Pair(z) => (z.norm(), z.im),
    }
}

fn poles_distance(a: &[Pole], b: &[Pole]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| match (*x, *y) {
            (Pole::Real(p), Pole::Real(q)) => (p - q).abs() / p.abs().max(q.abs()),
            (Pole::Pair(p), Pole::Pair(q)) => (p - q).norm() / p.norm().max(q.norm()),
            _ => f64::INFINITY,
        })
        .fold(0.0, f64::max)
}
