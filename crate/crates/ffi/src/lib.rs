//! C ABI over `frac_smith`.
//!
//! Every fallible function returns an [`FsStatus`]; on failure a message is
//! available from [`fs_last_error`] on the same thread. Handles are opaque and
//! must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use frac_smith::experiment::hypervolume;
use frac_smith::frac_tf::{oustaloup_approx, ApproxConfig, FracPI, HighOrderPlant, PredictorSplit};
use frac_smith::metrics;
use frac_smith::sim_engine::{build_loop, simulate, LoopModel, SimConfig, Topology, Trajectory};
use frac_smith::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    FitFailed = 3,
    Numerical = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsTopology {
    Fig1Predictor = 0,
    Fig3Equivalent = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsSignal {
    Time = 0,
    Setpoint = 1,
    Disturbance = 2,
    Control = 3,
    Output = 4,
    Error = 5,
}

/// Plant, controller, predictor split and approximation band of one loop.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FsLoopParams {
    pub gain: f64,
    pub time_constant: f64,
    pub order: f64,
    pub k_p: f64,
    pub k_i: f64,
    pub lambda: f64,
    pub chi: f64,
    pub omega_low: f64,
    pub omega_high: f64,
    pub n_sections: usize,
    pub topology: FsTopology,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FsSimParams {
    pub dt: f64,
    pub horizon: f64,
    pub setpoint_time: f64,
    pub setpoint_amp: f64,
    pub disturbance_time: f64,
    pub disturbance_amp: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FsObjectives {
    pub j1: f64,
    pub j2: f64,
    pub penalized: bool,
}

/// Opaque closed-loop model.
pub struct FsLoop {
    model: LoopModel,
    topology: Topology,
}

/// Opaque simulation result.
pub struct FsTrajectory(Trajectory);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> FsStatus {
    match e {
        Error::InvalidParameter(_) | Error::Improper { .. } | Error::InsufficientData(_) => FsStatus::InvalidArgument,
        Error::FitCeilingExceeded { .. } | Error::UnstableFit { .. } => FsStatus::FitFailed,
        _ => FsStatus::Numerical,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (FsStatus, String)>) -> FsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            FsStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            FsStatus::Panic
        }
    }
}

fn lib(e: Error) -> (FsStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (FsStatus, String) {
    (FsStatus::NullPointer, format!("{what} is null"))
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next library call on this thread.
#[no_mangle]
pub extern "C" fn fs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Oustaloup approximation of `s^order`. Writes `2 sections + 2`
/// coefficients (descending powers) to each of `num` and `den`, each of
/// capacity `cap`, and the count to `len`.
///
/// # Safety
/// `num` and `den` must point to `cap` writable doubles; `len` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fs_oustaloup(
    order: f64,
    omega_low: f64,
    omega_high: f64,
    n_sections: usize,
    num: *mut f64,
    den: *mut f64,
    cap: usize,
    len: *mut usize,
) -> FsStatus {
    guard(|| {
        if num.is_null() || den.is_null() || len.is_null() {
            return Err(null("output buffer"));
        }
        let cfg = ApproxConfig {
            omega_low,
            omega_high,
            n_sections,
            fit_grid_points: ApproxConfig::default().fit_grid_points.max(4 * (2 * n_sections + 1)),
            ..ApproxConfig::default()
        };
        let block = oustaloup_approx(order, &cfg).map_err(lib)?;
        let n = block.tf().den().len();
        *len = n;
        if cap < n {
            return Err((FsStatus::BufferTooSmall, format!("need {n} coefficients, capacity {cap}")));
        }
        // numerator padded to the denominator length
        let nb = block.tf().num();
        let pad = n - nb.len();
        for i in 0..n {
            *num.add(i) = if i < pad { 0.0 } else { nb[i - pad] };
            *den.add(i) = block.tf().den()[i];
        }
        Ok(())
    })
}

/// Fits all blocks and wires a loop. On success `*out` owns a new handle.
///
/// # Safety
/// `params` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fs_loop_new(params: *const FsLoopParams, out: *mut *mut FsLoop) -> FsStatus {
    guard(|| {
        if params.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        *out = ptr::null_mut();
        let p = *params;
        let plant = HighOrderPlant::new(p.gain, p.time_constant, p.order).map_err(lib)?;
        let ctrl = FracPI::new(p.k_p, p.k_i, p.lambda).map_err(lib)?;
        let split = PredictorSplit::new(p.chi, &plant).map_err(lib)?;
        let cfg = ApproxConfig {
            omega_low: p.omega_low,
            omega_high: p.omega_high,
            n_sections: p.n_sections,
            ..ApproxConfig::default()
        };
        let topology = match p.topology {
            FsTopology::Fig1Predictor => Topology::Fig1Predictor,
            FsTopology::Fig3Equivalent => Topology::Fig3Equivalent,
        };
        let model = build_loop(&plant, &ctrl, &split, &cfg, topology).map_err(lib)?;
        *out = Box::into_raw(Box::new(FsLoop { model, topology }));
        Ok(())
    })
}

/// Number of states of the loop, 0 for a null handle.
///
/// # Safety
/// `lp` must be null or a live handle from [`fs_loop_new`].
#[no_mangle]
pub unsafe extern "C" fn fs_loop_order(lp: *const FsLoop) -> usize {
    lp.as_ref().map_or(0, |l| l.model.order())
}

/// Simulates from zero initial state. On success `*out` owns a new
/// trajectory handle.
///
/// # Safety
/// `lp` must be a live loop handle; `sim` and `out` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fs_loop_simulate(
    lp: *mut FsLoop,
    sim: *const FsSimParams,
    out: *mut *mut FsTrajectory,
) -> FsStatus {
    guard(|| {
        let (Some(l), Some(s)) = (lp.as_mut(), sim.as_ref()) else { return Err(null("loop or sim")) };
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let cfg = SimConfig {
            dt: s.dt,
            horizon: s.horizon,
            setpoint_time: s.setpoint_time,
            setpoint_amp: s.setpoint_amp,
            disturbance_time: s.disturbance_time,
            disturbance_amp: s.disturbance_amp,
            topology: l.topology,
        };
        let traj = simulate(&mut l.model, &cfg).map_err(lib)?;
        *out = Box::into_raw(Box::new(FsTrajectory(traj)));
        Ok(())
    })
}

/// # Safety
/// `lp` must be null or a handle from [`fs_loop_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fs_loop_free(lp: *mut FsLoop) {
    if !lp.is_null() {
        drop(Box::from_raw(lp));
    }
}

/// Number of samples, 0 for a null handle.
///
/// # Safety
/// `tr` must be null or a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn fs_trajectory_len(tr: *const FsTrajectory) -> usize {
    tr.as_ref().map_or(0, |t| t.0.len())
}

/// # Safety
/// `tr` must be null or a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn fs_trajectory_diverged(tr: *const FsTrajectory) -> bool {
    tr.as_ref().is_some_and(|t| t.0.diverged)
}

/// Copies one signal into `buf` (capacity `cap`).
///
/// # Safety
/// `tr` must be a live trajectory handle and `buf` hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn fs_trajectory_copy(
    tr: *const FsTrajectory,
    signal: FsSignal,
    buf: *mut f64,
    cap: usize,
) -> FsStatus {
    guard(|| {
        let Some(t) = tr.as_ref() else { return Err(null("trajectory")) };
        if buf.is_null() {
            return Err(null("buffer"));
        }
        let t = &t.0;
        let src = match signal {
            FsSignal::Time => &t.t,
            FsSignal::Setpoint => &t.r,
            FsSignal::Disturbance => &t.d,
            FsSignal::Control => &t.u,
            FsSignal::Output => &t.y,
            FsSignal::Error => &t.e,
        };
        if cap < src.len() {
            return Err((FsStatus::BufferTooSmall, format!("need {} samples, capacity {cap}", src.len())));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
        Ok(())
    })
}

/// ITAE and control energy (penalty pair for a diverged run).
///
/// # Safety
/// `tr` must be a live trajectory handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn fs_trajectory_objectives(tr: *const FsTrajectory, out: *mut FsObjectives) -> FsStatus {
    guard(|| {
        let (Some(t), Some(o)) = (tr.as_ref(), out.as_mut()) else { return Err(null("argument")) };
        let m = metrics::objectives(&t.0);
        *o = FsObjectives { j1: m.j1_itae, j2: m.j2_energy, penalized: m.penalized };
        Ok(())
    })
}

/// # Safety
/// `tr` must be null or a trajectory handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fs_trajectory_free(tr: *mut FsTrajectory) {
    if !tr.is_null() {
        drop(Box::from_raw(tr));
    }
}

/// Two-objective hypervolume of `n` points `(j1[k], j2[k])`.
///
/// # Safety
/// `j1` and `j2` must hold `n` doubles (may be null when `n == 0`); `out`
/// must be valid.
#[no_mangle]
pub unsafe extern "C" fn fs_hypervolume(
    j1: *const f64,
    j2: *const f64,
    n: usize,
    ref_j1: f64,
    ref_j2: f64,
    out: *mut f64,
) -> FsStatus {
    guard(|| {
        if out.is_null() || (n > 0 && (j1.is_null() || j2.is_null())) {
            return Err(null("argument"));
        }
        let pts: Vec<[f64; 2]> = (0..n).map(|k| [*j1.add(k), *j2.add(k)]).collect();
        *out = hypervolume(&pts, [ref_j1, ref_j2]).map_err(lib)?;
        Ok(())
    })
}
