use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Continuous-time realization `x' = A x + B u`, `y = C x + D u` with its
/// integration state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    d: DMatrix<f64>,
    state: DVector<f64>,
}

impl StateSpaceModel {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>, d: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::invalid(format!("A must be square, got {}x{}", n, a.ncols())));
        }
        if b.nrows() != n || c.ncols() != n {
            return Err(Error::invalid("B rows and C columns must match the state dimension"));
        }
        if d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(Error::invalid("D must be outputs x inputs"));
        }
        Ok(StateSpaceModel { a, b, c, d, state: DVector::zeros(n) })
    }

    /// Static gain with no states.
    pub fn gain(k: f64) -> Self {
        StateSpaceModel {
            a: DMatrix::zeros(0, 0),
            b: DMatrix::zeros(0, 1),
            c: DMatrix::zeros(1, 0),
            d: DMatrix::from_element(1, 1, k),
            state: DVector::zeros(0),
        }
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    pub fn is_siso(&self) -> bool {
        self.inputs() == 1 && self.outputs() == 1
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }

    pub fn state(&self) -> &DVector<f64> {
        &self.state
    }

    pub fn set_state(&mut self, x: DVector<f64>) -> Result<()> {
        if x.len() != self.order() {
            return Err(Error::invalid("state length does not match model order"));
        }
        self.state = x;
        Ok(())
    }

    pub fn reset(&mut self) {
        self.state.fill(0.0);
    }

    /// SISO transfer value `C (sI - A)^-1 B + D` at a complex point.
    pub fn transfer(&self, s: Complex64) -> Complex64 {
        let n = self.order();
        let d = Complex64::new(self.d[(0, 0)], 0.0);
        if n == 0 {
            return d;
        }
        let m = DMatrix::<Complex64>::from_fn(n, n, |i, j| {
            let diag = if i == j { s } else { Complex64::new(0.0, 0.0) };
            diag - self.a[(i, j)]
        });
        let rhs = DVector::<Complex64>::from_fn(n, |i, _| Complex64::new(self.b[(i, 0)], 0.0));
        let lu = m.clone().full_piv_lu();
        let Some(mut x) = lu.solve(&rhs) else { return Complex64::new(f64::INFINITY, 0.0) };
        // one refinement step recovers the digits lost on ill-conditioned
        // companion matrices deep in the roll-off
        if let Some(dx) = lu.solve(&(&rhs - &m * &x)) {
            x += dx;
        }
        (0..n).map(|i| x[i] * self.c[(0, i)]).sum::<Complex64>() + d
    }

    pub fn freq_response(&self, omega: f64) -> Complex64 {
        self.transfer(Complex64::new(0.0, omega))
    }

    /// `C (-A)^-1 B + D`, or `None` when `A` is singular.
    pub fn dc_gain(&self) -> Option<f64> {
        if self.order() == 0 {
            return Some(self.d[(0, 0)]);
        }
        let neg_a = -self.a.clone();
        let x = neg_a.lu().solve(&self.b.column(0).into_owned())?;
        Some((&self.c.row(0) * x)[(0, 0)] + self.d[(0, 0)])
    }

    /// Cascade `self` then `next`: the output of `self` drives `next`.
    pub fn series(&self, next: &StateSpaceModel) -> Result<StateSpaceModel> {
        if self.outputs() != next.inputs() {
            return Err(Error::invalid("series dimension mismatch"));
        }
        let (n1, n2) = (self.order(), next.order());
        let n = n1 + n2;
        let mut a = DMatrix::zeros(n, n);
        a.view_mut((0, 0), (n1, n1)).copy_from(&self.a);
        a.view_mut((n1, n1), (n2, n2)).copy_from(&next.a);
        a.view_mut((n1, 0), (n2, n1)).copy_from(&(&next.b * &self.c));
        let mut b = DMatrix::zeros(n, self.inputs());
        b.view_mut((0, 0), (n1, self.inputs())).copy_from(&self.b);
        b.view_mut((n1, 0), (n2, self.inputs())).copy_from(&(&next.b * &self.d));
        let mut c = DMatrix::zeros(next.outputs(), n);
        c.view_mut((0, 0), (next.outputs(), n1)).copy_from(&(&next.d * &self.c));
        c.view_mut((0, n1), (next.outputs(), n2)).copy_from(&next.c);
        let d = &next.d * &self.d;
        StateSpaceModel::new(a, b, c, d)
    }
}
