//! Factored rational approximations and their well-conditioned realizations.
//!
//! An approximation is kept as a product of factors, each realized in a form
//! that does not pass through high-degree monomial coefficients: repeated
//! lags as a bidiagonal cascade, Oustaloup zero/pole pairs as a triangular
//! cascade and fitted models in modal (pole/residue) form. The expanded
//! [`RationalTF`] is derived from the factors for inspection and composition.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::poly;
use super::rational::RationalTF;
use crate::error::Result;
use crate::sim_engine::StateSpaceModel;

/// One modal term of a partial-fraction expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Real {
        pole: f64,
        residue: f64,
    },
    /// A conjugate pair, stored by its upper-half-plane member.
    Pair {
        pole: Complex64,
        residue: Complex64,
    },
}

impl Mode {
    fn eval(&self, s: Complex64) -> Complex64 {
        match *self {
            Mode::Real { pole, residue } => residue / (s - pole),
            Mode::Pair { pole, residue } => residue / (s - pole) + residue.conj() / (s - pole.conj()),
        }
    }

    fn order(&self) -> usize {
        match self {
            Mode::Real { .. } => 1,
            Mode::Pair { .. } => 2,
        }
    }
}

/// `direct + sum of modal terms`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleResidue {
    pub modes: Vec<Mode>,
    pub direct: f64,
}

impl PoleResidue {
    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.modes.iter().map(|m| m.eval(s)).sum::<Complex64>() + self.direct
    }

    pub fn order(&self) -> usize {
        self.modes.iter().map(Mode::order).sum()
    }

    /// Every pole, conjugates included.
    pub fn poles(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.order());
        for m in &self.modes {
            match *m {
                Mode::Real { pole, .. } => out.push(Complex64::new(pole, 0.0)),
                Mode::Pair { pole, .. } => {
                    out.push(pole);
                    out.push(pole.conj());
                }
            }
        }
        out
    }

    pub fn to_tf(&self) -> Result<RationalTF> {
        let mut poles = Vec::new();
        let mut residues = Vec::new();
        for m in &self.modes {
            match *m {
                Mode::Real { pole, residue } => {
                    poles.push(Complex64::new(pole, 0.0));
                    residues.push(Complex64::new(residue, 0.0));
                }
                Mode::Pair { pole, residue } => {
                    poles.push(pole);
                    residues.push(residue);
                    poles.push(pole.conj());
                    residues.push(residue.conj());
                }
            }
        }
        let den = poly::from_roots(&poles);
        let n = poles.len();
        let mut num = vec![Complex64::new(0.0, 0.0); n + 1];
        for (i, &c) in den.iter().enumerate() {
            num[i] += c * self.direct;
        }
        for k in 0..n {
            let others: Vec<Complex64> = poles.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, &p)| p).collect();
            let term = poly::from_roots_complex(&others);
            for (i, &c) in term.iter().enumerate() {
                num[i + 1] += c * residues[k];
            }
        }
        RationalTF::new(num.into_iter().map(|c| c.re).collect(), den)
    }

    /// Block-diagonal modal realization. Conjugate pairs use the real 2x2
    /// block `[[re, im], [-im, re]]` with input `[2, 0]` and output
    /// `[Re r, Im r]`.
    pub fn realize(&self) -> Result<StateSpaceModel> {
        let n = self.order();
        let mut a = DMatrix::zeros(n, n);
        let mut b = DMatrix::zeros(n, 1);
        let mut c = DMatrix::zeros(1, n);
        let mut i = 0;
        for m in &self.modes {
            match *m {
                Mode::Real { pole, residue } => {
                    a[(i, i)] = pole;
                    b[(i, 0)] = 1.0;
                    c[(0, i)] = residue;
                    i += 1;
                }
                Mode::Pair { pole, residue } => {
                    a[(i, i)] = pole.re;
                    a[(i, i + 1)] = pole.im;
                    a[(i + 1, i)] = -pole.im;
                    a[(i + 1, i + 1)] = pole.re;
                    b[(i, 0)] = 2.0;
                    c[(0, i)] = residue.re;
                    c[(0, i + 1)] = residue.im;
                    i += 2;
                }
            }
        }
        StateSpaceModel::new(a, b, c, DMatrix::from_element(1, 1, self.direct))
    }
}

/// One multiplicative factor of an approximation.
#[derive(Debug, Clone, PartialEq)]
pub enum Factor {
    /// `gain / (time_constant s + 1)^power`
    Lag {
        gain: f64,
        time_constant: f64,
        power: u32,
    },
    /// `gain * prod (s - zeros[k]) / (s - poles[k])`, real zeros and poles in
    /// equal number. Empty lists make a static gain.
    ZeroPole {
        gain: f64,
        zeros: Vec<f64>,
        poles: Vec<f64>,
    },
    PoleResidue(PoleResidue),
}

impl Factor {
    pub fn gain(k: f64) -> Self {
        Factor::ZeroPole { gain: k, zeros: Vec::new(), poles: Vec::new() }
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        match self {
            Factor::Lag { gain, time_constant, power } => (s * *time_constant + 1.0).powi(-(*power as i32)) * *gain,
            Factor::ZeroPole { gain, zeros, poles } => {
                zeros.iter().zip(poles).fold(Complex64::new(*gain, 0.0), |acc, (&z, &p)| acc * (s - z) / (s - p))
            }
            Factor::PoleResidue(pr) => pr.eval(s),
        }
    }

    pub fn order(&self) -> usize {
        match self {
            Factor::Lag { power, .. } => *power as usize,
            Factor::ZeroPole { poles, .. } => poles.len(),
            Factor::PoleResidue(pr) => pr.order(),
        }
    }

    pub fn to_tf(&self) -> Result<RationalTF> {
        match self {
            Factor::Lag { gain, time_constant, power } => {
                let lag = [*time_constant, 1.0];
                let den = (0..*power).fold(vec![1.0], |acc, _| poly::mul(&acc, &lag));
                RationalTF::new(vec![*gain], den)
            }
            Factor::ZeroPole { gain, zeros, poles } => {
                let z: Vec<Complex64> = zeros.iter().map(|&z| Complex64::new(z, 0.0)).collect();
                let p: Vec<Complex64> = poles.iter().map(|&p| Complex64::new(p, 0.0)).collect();
                RationalTF::new(poly::scale(&poly::from_roots(&z), *gain), poly::from_roots(&p))
            }
            Factor::PoleResidue(pr) => pr.to_tf(),
        }
    }

    pub fn realize(&self) -> Result<StateSpaceModel> {
        match self {
            Factor::Lag { gain, time_constant, power } => {
                let n = *power as usize;
                if n == 0 {
                    return Ok(StateSpaceModel::gain(*gain));
                }
                let r = 1.0 / time_constant;
                let mut a = DMatrix::zeros(n, n);
                for i in 0..n {
                    a[(i, i)] = -r;
                    if i > 0 {
                        a[(i, i - 1)] = r;
                    }
                }
                let mut b = DMatrix::zeros(n, 1);
                b[(0, 0)] = r;
                let mut c = DMatrix::zeros(1, n);
                c[(0, n - 1)] = *gain;
                StateSpaceModel::new(a, b, c, DMatrix::zeros(1, 1))
            }
            Factor::ZeroPole { gain, zeros, poles } => {
                // section k: (s - z)/(s - p) = 1 + (p - z)/(s - p)
                let n = poles.len();
                if n == 0 {
                    return Ok(StateSpaceModel::gain(*gain));
                }
                let mut a = DMatrix::zeros(n, n);
                for i in 0..n {
                    a[(i, i)] = poles[i];
                    for j in 0..i {
                        a[(i, j)] = poles[j] - zeros[j];
                    }
                }
                let b = DMatrix::from_element(n, 1, 1.0);
                let c = DMatrix::from_fn(1, n, |_, j| gain * (poles[j] - zeros[j]));
                StateSpaceModel::new(a, b, c, DMatrix::from_element(1, 1, *gain))
            }
            Factor::PoleResidue(pr) => pr.realize(),
        }
    }
}

/// A rational approximation held as a product of factors, with its expanded
/// transfer function and the fit error recorded when it was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct FracBlock {
    factors: Vec<Factor>,
    tf: RationalTF,
    max_rel_error: f64,
}

impl FracBlock {
    pub fn new(factors: Vec<Factor>, max_rel_error: f64) -> Result<Self> {
        let factors = if factors.is_empty() { vec![Factor::gain(1.0)] } else { factors };
        let mut tf = factors[0].to_tf()?;
        for f in &factors[1..] {
            tf = tf.series(&f.to_tf()?)?;
        }
        Ok(FracBlock { factors, tf, max_rel_error })
    }

    /// An exactly known rational block.
    pub fn exact(factor: Factor) -> Result<Self> {
        FracBlock::new(vec![factor], 0.0)
    }

    pub fn constant(k: f64) -> Self {
        FracBlock { factors: vec![Factor::gain(k)], tf: RationalTF::constant(k), max_rel_error: 0.0 }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn tf(&self) -> &RationalTF {
        &self.tf
    }

    /// Largest relative magnitude error against the exact target over the fit
    /// grid (zero for exact blocks).
    pub fn max_rel_error(&self) -> f64 {
        self.max_rel_error
    }

    pub fn order(&self) -> usize {
        self.factors.iter().map(Factor::order).sum()
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.factors.iter().map(|f| f.eval(s)).product()
    }

    pub fn freq_response(&self, omega: f64) -> Complex64 {
        self.eval(Complex64::new(0.0, omega))
    }

    /// All poles of all factors.
    pub fn poles(&self) -> Vec<Complex64> {
        let mut out = Vec::new();
        for f in &self.factors {
            match f {
                Factor::Lag { time_constant, power, .. } => {
                    out.extend((0..*power).map(|_| Complex64::new(-1.0 / time_constant, 0.0)))
                }
                Factor::ZeroPole { poles, .. } => out.extend(poles.iter().map(|&p| Complex64::new(p, 0.0))),
                Factor::PoleResidue(pr) => out.extend(pr.poles()),
            }
        }
        out
    }

    /// Series chain of per-factor realizations, in factor order.
    pub fn realize(&self) -> Result<Vec<StateSpaceModel>> {
        self.factors.iter().map(Factor::realize).collect()
    }

    /// The chain collapsed into a single realization.
    pub fn to_statespace(&self) -> Result<StateSpaceModel> {
        let chain = self.realize()?;
        let mut it = chain.into_iter();
        let first = it.next().unwrap_or_else(|| StateSpaceModel::gain(1.0));
        it.try_fold(first, |acc, next| acc.series(&next))
    }

    /// Product of two blocks, errors combined to first order.
    pub fn series(&self, other: &FracBlock) -> Result<FracBlock> {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        let err = (1.0 + self.max_rel_error) * (1.0 + other.max_rel_error) - 1.0;
        FracBlock::new(factors, err)
    }
}
