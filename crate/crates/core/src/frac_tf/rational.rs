use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly;
use crate::error::{Error, Result};
use crate::sim_engine::StateSpaceModel;

/// Proper rational transfer function `num(s) / den(s)`, coefficients in
/// descending powers of `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalTF {
    num: Vec<f64>,
    den: Vec<f64>,
}

/// Block-diagram combination of two transfer functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Composition {
    /// `a * b`
    Series,
    /// `a + b`
    Parallel,
    /// `a / (1 + a * b)`
    Feedback,
}

impl RationalTF {
    pub fn new(num: Vec<f64>, den: Vec<f64>) -> Result<Self> {
        if den.is_empty() || poly::is_zero(&den) {
            return Err(Error::invalid("denominator must be a nonzero polynomial"));
        }
        if den[0] == 0.0 {
            return Err(Error::invalid("denominator leading coefficient must be nonzero"));
        }
        if num.iter().chain(&den).any(|c| !c.is_finite()) {
            return Err(Error::invalid("coefficients must be finite"));
        }
        let num = if num.is_empty() { vec![0.0] } else { poly::trim(&num) };
        let nd = num.len() - 1;
        let dd = den.len() - 1;
        if nd > dd && !poly::is_zero(&num) {
            return Err(Error::Improper { num: nd, den: dd });
        }
        Ok(RationalTF { num, den })
    }

    pub fn constant(k: f64) -> Self {
        RationalTF { num: vec![k], den: vec![1.0] }
    }

    pub fn num(&self) -> &[f64] {
        &self.num
    }

    pub fn den(&self) -> &[f64] {
        &self.den
    }

    /// Denominator degree.
    pub fn order(&self) -> usize {
        self.den.len() - 1
    }

    pub fn is_strictly_proper(&self) -> bool {
        poly::is_zero(&self.num) || self.num.len() < self.den.len()
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        poly::eval(&self.num, s) / poly::eval(&self.den, s)
    }

    pub fn freq_response(&self, omega: f64) -> Complex64 {
        self.eval(Complex64::new(0.0, omega))
    }

    /// Value at `s = 0`, if the denominator has a nonzero constant term.
    pub fn dc_gain(&self) -> Option<f64> {
        let d0 = *self.den.last().unwrap();
        (d0 != 0.0).then(|| self.num.last().unwrap() / d0)
    }

    pub fn poles(&self) -> Vec<Complex64> {
        poly::roots(&self.den)
    }

    pub fn zeros(&self) -> Vec<Complex64> {
        if poly::is_zero(&self.num) {
            return Vec::new();
        }
        poly::roots(&self.num)
    }

    /// All poles strictly in the open left half-plane.
    pub fn is_stable(&self) -> bool {
        self.poles().iter().all(|p| p.re < 0.0)
    }

    pub fn series(&self, other: &RationalTF) -> Result<RationalTF> {
        compose(Composition::Series, self, other)
    }

    pub fn parallel(&self, other: &RationalTF) -> Result<RationalTF> {
        compose(Composition::Parallel, self, other)
    }

    /// `self / (1 + self * other)`.
    pub fn feedback(&self, other: &RationalTF) -> Result<RationalTF> {
        compose(Composition::Feedback, self, other)
    }

    pub fn scaled(&self, k: f64) -> RationalTF {
        RationalTF { num: poly::scale(&self.num, k), den: self.den.clone() }
    }

    /// Controllable canonical realization.
    pub fn to_statespace(&self) -> Result<StateSpaceModel> {
        to_statespace(self)
    }
}

/// Combines two transfer functions without cancelling common factors.
pub fn compose(op: Composition, a: &RationalTF, b: &RationalTF) -> Result<RationalTF> {
    let (num, den) = match op {
        Composition::Series => (poly::mul(&a.num, &b.num), poly::mul(&a.den, &b.den)),
        Composition::Parallel => {
            (poly::add(&poly::mul(&a.num, &b.den), &poly::mul(&b.num, &a.den)), poly::mul(&a.den, &b.den))
        }
        Composition::Feedback => {
            let dd = poly::mul(&a.den, &b.den);
            let nn = poly::mul(&a.num, &b.num);
            let ret = poly::add(&dd, &nn);
            if poly::is_zero(&ret) {
                return Err(Error::SingularFeedback);
            }
            (poly::mul(&a.num, &b.den), ret)
        }
    };
    let den = poly::trim(&den);
    let num = poly::trim(&num);
    if !poly::is_zero(&num) && num.len() > den.len() {
        return Err(Error::Improper { num: num.len() - 1, den: den.len() - 1 });
    }
    RationalTF::new(num, den)
}

/// Controllable canonical form. The state is `w, w', ..., w^(n-1)` for
/// `W = U / den`; `D` carries the biproper part.
pub fn to_statespace(tf: &RationalTF) -> Result<StateSpaceModel> {
    let den = &tf.den;
    let n = den.len() - 1;
    let lead = den[0];
    let a_coef: Vec<f64> = den.iter().map(|c| c / lead).collect();
    let mut num = vec![0.0; n + 1];
    let offset = n + 1 - tf.num.len();
    for (i, &c) in tf.num.iter().enumerate() {
        num[offset + i] = c / lead;
    }
    let d = num[0];
    // remainder = num - d * den, degree < n
    let rem: Vec<f64> = (1..=n).map(|i| num[i] - d * a_coef[i]).collect();

    let mut a = DMatrix::zeros(n, n);
    for i in 0..n.saturating_sub(1) {
        a[(i, i + 1)] = 1.0;
    }
    for j in 0..n {
        // a_coef[n - j] multiplies w^(j)
        a[(n - 1, j)] = -a_coef[n - j];
    }
    let mut b = DMatrix::zeros(n, 1);
    if n > 0 {
        b[(n - 1, 0)] = 1.0;
    }
    let mut c = DMatrix::zeros(1, n);
    for j in 0..n {
        c[(0, j)] = rem[n - 1 - j];
    }
    StateSpaceModel::new(a, b, c, DMatrix::from_element(1, 1, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lag() -> RationalTF {
        RationalTF::new(vec![1.0], vec![20.0, 1.0]).unwrap()
    }

    #[test]
    fn construction_enforces_properness() {
        assert!(matches!(
            RationalTF::new(vec![1.0, 0.0, 0.0], vec![1.0, 1.0]),
            Err(Error::Improper { num: 2, den: 1 })
        ));
        assert!(RationalTF::new(vec![1.0], vec![0.0, 1.0]).is_err());
        assert!(RationalTF::new(vec![1.0], vec![]).is_err());
        // leading zeros in the numerator are harmless
        assert!(RationalTF::new(vec![0.0, 0.0, 2.0], vec![1.0, 1.0]).is_ok());
    }

    #[test]
    fn unity_feedback_of_unity_has_half_dc_gain() {
        let one = RationalTF::constant(1.0);
        let cl = compose(Composition::Feedback, &one, &one).unwrap();
        assert_eq!(cl.dc_gain(), Some(0.5));
    }

    #[test]
    fn fourfold_series_gives_binomial_denominator() {
        let g = lag();
        let g4 = g.series(&g).unwrap().series(&g).unwrap().series(&g).unwrap();
        assert_eq!(g4.den(), &[160000.0, 32000.0, 2400.0, 80.0, 1.0]);
        assert_eq!(g4.num(), &[1.0]);
    }

    #[test]
    fn singular_return_difference_is_rejected() {
        let one = RationalTF::constant(1.0);
        let minus = RationalTF::constant(-1.0);
        assert_eq!(one.feedback(&minus), Err(Error::SingularFeedback));
    }

    #[test]
    fn parallel_adds_responses() {
        let a = lag();
        let b = RationalTF::new(vec![2.0, 1.0], vec![1.0, 3.0]).unwrap();
        let p = a.parallel(&b).unwrap();
        let s = Complex64::new(0.0, 0.7);
        assert!((p.eval(s) - (a.eval(s) + b.eval(s))).norm() < 1e-14);
    }

    #[test]
    fn first_order_lag_realization() {
        let ss = lag().to_statespace().unwrap();
        assert_eq!(ss.order(), 1);
        assert!((ss.a()[(0, 0)] + 0.05).abs() < 1e-15);
        assert!((ss.dc_gain().unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(ss.d()[(0, 0)], 0.0);
    }

    #[test]
    fn constant_realization_has_no_states() {
        let ss = RationalTF::constant(1.0).to_statespace().unwrap();
        assert_eq!(ss.order(), 0);
        assert_eq!(ss.d()[(0, 0)], 1.0);
    }

    #[test]
    fn fourth_order_lag_realization_dc_gain() {
        let g = lag();
        let g4 = g.series(&g).unwrap().series(&g).unwrap().series(&g).unwrap();
        let ss = g4.to_statespace().unwrap();
        assert_eq!(ss.order(), 4);
        assert!((ss.dc_gain().unwrap() - g4.dc_gain().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn biproper_realization_matches_response() {
        let tf = RationalTF::new(vec![3.0, 2.0, 1.0], vec![2.0, 5.0, 4.0]).unwrap();
        let ss = tf.to_statespace().unwrap();
        assert!((ss.d()[(0, 0)] - 1.5).abs() < 1e-15);
        for w in [0.01, 0.3, 7.0] {
            assert!((ss.freq_response(w) - tf.freq_response(w)).norm() < 1e-13);
        }
    }
}
