//! Interconnection of SISO stages into one linear system with exogenous
//! inputs `w = [r, d]`.
//!
//! Every stage `i` has its own realization `(A_i, b_i, c_i, d_i)`. Stage
//! inputs are linear in stage outputs and exogenous signals, `v = F z + E w`,
//! so the outputs satisfy `z = C x + D v`. The algebraic part is solved once
//! at build time, which leaves `v = R (C x) + S w` for the integrator.

use nalgebra::{DMatrix, DVector};

use super::statespace::StateSpaceModel;
use crate::error::{Error, Result};

/// Exogenous or internal signal a block input draws on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Setpoint,
    Disturbance,
    /// Output of the block with this index.
    Block(usize),
}

/// Row-compressed sparse matrix.
#[derive(Debug, Clone, Default)]
struct Csr {
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl Csr {
    fn block_diagonal<'a>(blocks: impl Iterator<Item = &'a DMatrix<f64>>) -> Csr {
        let mut m = Csr { row_ptr: vec![0], ..Csr::default() };
        let mut offset = 0;
        for a in blocks {
            for r in 0..a.nrows() {
                for c in 0..a.ncols() {
                    let v = a[(r, c)];
                    if v != 0.0 {
                        m.cols.push((offset + c) as u32);
                        m.vals.push(v);
                    }
                }
                m.row_ptr.push(m.vals.len());
            }
            offset += a.ncols();
        }
        m
    }

    #[inline]
    fn row_dot(&self, row: usize, x: &[f64]) -> f64 {
        let (lo, hi) = (self.row_ptr[row], self.row_ptr[row + 1]);
        self.cols[lo..hi].iter().zip(&self.vals[lo..hi]).map(|(&c, &v)| v * x[c as usize]).sum()
    }
}

/// A named chain of stages; its input is the weighted sum of `inputs`.
#[derive(Debug, Clone)]
pub struct Chain {
    pub name: String,
    pub stages: Vec<StateSpaceModel>,
    pub inputs: Vec<(f64, Source)>,
}

impl Chain {
    pub fn new(name: impl Into<String>, stages: Vec<StateSpaceModel>) -> Self {
        Chain { name: name.into(), stages, inputs: Vec::new() }
    }

    pub fn fed_by(mut self, inputs: &[(f64, Source)]) -> Self {
        self.inputs = inputs.to_vec();
        self
    }

    pub fn order(&self) -> usize {
        self.stages.iter().map(StateSpaceModel::order).sum()
    }
}

/// Linear map from `(C x, w)` to a scalar: `row . (C x) + w_gain . w`.
#[derive(Debug, Clone)]
struct OutputMap {
    row: Vec<f64>,
    w_gain: [f64; 2],
}

impl OutputMap {
    #[inline]
    fn eval(&self, cx: &[f64], w: [f64; 2]) -> f64 {
        self.row.iter().zip(cx).map(|(a, b)| a * b).sum::<f64>() + self.w_gain[0] * w[0] + self.w_gain[1] * w[1]
    }
}

/// A closed (or open) loop ready for fixed-step integration. Owns its
/// integration state.
#[derive(Debug, Clone)]
pub struct LoopModel {
    names: Vec<String>,
    orders: Vec<usize>,
    a: Csr,
    b: Vec<f64>,
    c: Vec<f64>,
    owner: Vec<u32>,
    n_stages: usize,
    r: DMatrix<f64>,
    s: DMatrix<f64>,
    y: OutputMap,
    u: OutputMap,
    state: Vec<f64>,
}

impl LoopModel {
    /// Wires `chains` together. `y` and `u` name the chains whose outputs are
    /// reported as plant output and control signal.
    pub fn new(chains: Vec<Chain>, y: usize, u: usize) -> Result<Self> {
        let nb = chains.len();
        if y >= nb || u >= nb {
            return Err(Error::invalid("output chain index out of range"));
        }
        let mut first = Vec::with_capacity(nb);
        let mut last = Vec::with_capacity(nb);
        let mut stages: Vec<&StateSpaceModel> = Vec::new();
        for ch in &chains {
            if ch.stages.is_empty() {
                return Err(Error::invalid(format!("chain '{}' has no stages", ch.name)));
            }
            if let Some(bad) = ch.stages.iter().find(|s| !s.is_siso()) {
                return Err(Error::invalid(format!(
                    "chain '{}' has a {}x{} stage; only SISO stages are supported",
                    ch.name,
                    bad.outputs(),
                    bad.inputs()
                )));
            }
            first.push(stages.len());
            stages.extend(ch.stages.iter());
            last.push(stages.len() - 1);
        }
        let m = stages.len();
        let mut f = DMatrix::<f64>::zeros(m, m);
        let mut e = DMatrix::<f64>::zeros(m, 2);
        for (k, ch) in chains.iter().enumerate() {
            for &(g, src) in &ch.inputs {
                match src {
                    Source::Setpoint => e[(first[k], 0)] += g,
                    Source::Disturbance => e[(first[k], 1)] += g,
                    Source::Block(j) => {
                        if j >= nb {
                            return Err(Error::invalid(format!("chain '{}' reads unknown block {j}", ch.name)));
                        }
                        f[(first[k], last[j])] += g;
                    }
                }
            }
            for i in first[k] + 1..=last[k] {
                f[(i, i - 1)] = 1.0;
            }
        }
        let dvec = DVector::from_iterator(m, stages.iter().map(|s| s.d()[(0, 0)]));
        // (I - D F) z = C x + D E w
        let mut lhs = DMatrix::<f64>::identity(m, m);
        for i in 0..m {
            for j in 0..m {
                lhs[(i, j)] -= dvec[i] * f[(i, j)];
            }
        }
        let lu = lhs.lu();
        let minv = lu.try_inverse().ok_or(Error::SingularAlgebraicLoop)?;
        if minv.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularAlgebraicLoop);
        }
        let de = DMatrix::from_fn(m, 2, |i, j| dvec[i] * e[(i, j)]);
        let q = &minv * &de;
        let r = &f * &minv;
        let s = &f * &q + &e;
        let out = |stage: usize| OutputMap {
            row: minv.row(stage).iter().copied().collect(),
            w_gain: [q[(stage, 0)], q[(stage, 1)]],
        };

        let a = Csr::block_diagonal(stages.iter().map(|s| s.a()));
        let mut b = Vec::new();
        let mut c = Vec::new();
        let mut owner = Vec::new();
        for (i, s) in stages.iter().enumerate() {
            b.extend(s.b().column(0).iter());
            c.extend(s.c().row(0).iter());
            owner.extend(std::iter::repeat_n(i as u32, s.order()));
        }
        let n = b.len();
        Ok(LoopModel {
            names: chains.iter().map(|c| c.name.clone()).collect(),
            orders: chains.iter().map(Chain::order).collect(),
            a,
            b,
            c,
            owner,
            n_stages: m,
            r,
            s,
            y: out(last[y]),
            u: out(last[u]),
            state: vec![0.0; n],
        })
    }

    /// Total number of states.
    pub fn order(&self) -> usize {
        self.state.len()
    }

    /// `(name, order)` of every block, in wiring order.
    pub fn block_orders(&self) -> Vec<(&str, usize)> {
        self.names.iter().map(String::as_str).zip(self.orders.iter().copied()).collect()
    }

    pub fn state(&self) -> &[f64] {
        &self.state
    }

    pub fn reset(&mut self) {
        self.state.iter_mut().for_each(|x| *x = 0.0);
    }

    /// Stage outputs without feedthrough, `C x`.
    #[inline]
    fn cx(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (k, (&ci, &xi)) in self.c.iter().zip(x).enumerate() {
            out[self.owner[k] as usize] += ci * xi;
        }
    }

    /// `dx = A x + B v` at state `x` and exogenous input `w`.
    pub(crate) fn derivative(&self, x: &[f64], w: [f64; 2], scratch: &mut Scratch, dx: &mut [f64]) {
        let m = self.n_stages;
        self.cx(x, &mut scratch.cx);
        for i in 0..m {
            let mut acc = self.s[(i, 0)] * w[0] + self.s[(i, 1)] * w[1];
            for j in 0..m {
                acc += self.r[(i, j)] * scratch.cx[j];
            }
            scratch.v[i] = acc;
        }
        for (k, d) in dx.iter_mut().enumerate() {
            *d = self.a.row_dot(k, x) + self.b[k] * scratch.v[self.owner[k] as usize];
        }
    }

    /// Plant output and control signal at state `x`.
    pub(crate) fn outputs(&self, x: &[f64], w: [f64; 2], scratch: &mut Scratch) -> (f64, f64) {
        self.cx(x, &mut scratch.cx);
        (self.y.eval(&scratch.cx, w), self.u.eval(&scratch.cx, w))
    }

    /// Equilibrium `(y, u)` under constant inputs `w = [r, d]`: the limit
    /// the trajectory tends to when the loop is stable. `None` when the
    /// closed-loop matrix is singular.
    pub fn steady_state(&self, w: [f64; 2]) -> Option<(f64, f64)> {
        let n = self.order();
        let mut scratch = self.scratch();
        let mut x = vec![0.0; n];
        let mut col = vec![0.0; n];
        // the dynamics are affine in x, so unit probes give A exactly
        let mut rhs = vec![0.0; n];
        self.derivative(&x, w, &mut scratch, &mut rhs);
        let mut a = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            x[j] = 1.0;
            self.derivative(&x, [0.0, 0.0], &mut scratch, &mut col);
            a.set_column(j, &DVector::from_column_slice(&col));
            x[j] = 0.0;
        }
        let xs = a.full_piv_lu().solve(&-DVector::from_vec(rhs))?;
        let (y, u) = self.outputs(xs.as_slice(), w, &mut scratch);
        (y.is_finite() && u.is_finite()).then_some((y, u))
    }

    pub(crate) fn scratch(&self) -> Scratch {
        Scratch { cx: vec![0.0; self.n_stages], v: vec![0.0; self.n_stages] }
    }

    pub(crate) fn state_mut(&mut self) -> &mut Vec<f64> {
        &mut self.state
    }
}

pub(crate) struct Scratch {
    cx: Vec<f64>,
    v: Vec<f64>,
}
