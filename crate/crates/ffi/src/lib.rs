//! C ABI over the `nikoopman` pipeline.
//!
//! Objects cross the boundary as opaque handles (`NkTrajectory`, `NkModel`)
//! that the caller releases with the matching `*_free`. Every fallible call
//! returns an `NkStatus`; on failure the message is available from
//! `nk_last_error` on the same thread until the next failing call.
//! Matrices are exchanged row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use nikoopman::analysis::{closed_loop_verdict, Stability};
use nikoopman::dynamics::{simulate, InputKind, InputSignal, MsdParams, TrajectoryData};
use nikoopman::identify::{identify_ni, identify_unconstrained, AdmmSettings, NiConfig};
use nikoopman::lifting::{dictionary_for, LiftingDictionary};
use nikoopman::matcore::{spectral_radius_with, Mat};
use nikoopman::model_io::ModelFile;
use nikoopman::nicore::{log_grid, ni_frequency_check, to_continuous, PpfController};
use nikoopman::{tol, Error};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NkStatus {
    NkOk = 0,
    NkNullPointer = 1,
    NkInvalidArgument = 2,
    NkDimensionMismatch = 3,
    NkSimulationDiverged = 4,
    /// The model was produced but the solver stopped at its iteration cap.
    NkSolverNotConverged = 5,
    NkNumerical = 6,
    NkIo = 7,
    NkParse = 8,
    NkBufferTooSmall = 9,
    NkPanic = 10,
}

/// Selects a matrix of a model for `nk_model_matrix`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NkMatrix {
    NkMatrixA = 0,
    NkMatrixB = 1,
    NkMatrixC = 2,
    NkMatrixD = 3,
    /// Lyapunov certificate; only NI models carry one.
    NkMatrixP = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NkMode {
    NkModeNi = 0,
    NkModeUnconstrained = 1,
}

/// Mass-spring-damper coefficients.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NkMsdParams {
    pub m: f64,
    pub k1: f64,
    pub k3: f64,
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
}

/// Piecewise-constant random input, uniform on `[-amplitude, amplitude]`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NkSimulateOptions {
    pub x0: [f64; 2],
    pub amplitude: f64,
    pub hold: usize,
    pub seed: u64,
    pub dt: f64,
    pub steps: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NkIdentifyOptions {
    pub mode: NkMode,
    /// Zero selects the identity dictionary.
    pub n_rbf: usize,
    pub center_seed: u64,
    pub alpha: f64,
    pub strict_b: bool,
    pub normalize: bool,
    pub max_iters: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NkClosedLoop {
    pub dc_gain_lambda_max: f64,
    pub spectral_radius: f64,
    /// 1 stable, -1 unstable, 0 inconclusive.
    pub verdict: i32,
}

pub struct NkTrajectory(TrajectoryData);

pub struct NkModel(ModelFile);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let mut bytes = msg.into().into_bytes();
    bytes.retain(|b| *b != 0);
    let s = CString::new(bytes).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(s));
}

fn status_of(e: &Error) -> NkStatus {
    match e {
        Error::NonFinite { .. } => NkStatus::NkSimulationDiverged,
        Error::SolverNotConverged { .. } => NkStatus::NkSolverNotConverged,
        Error::DimensionMismatch(_) | Error::NonSquare { .. } | Error::LengthMismatch { .. } => {
            NkStatus::NkDimensionMismatch
        }
        Error::InvalidParameter(_) | Error::DegenerateData(_) | Error::RankDeficient { .. } => {
            NkStatus::NkInvalidArgument
        }
        Error::Io(_) => NkStatus::NkIo,
        Error::Parse(_) | Error::Json(_) | Error::Csv(_) => NkStatus::NkParse,
        _ => NkStatus::NkNumerical,
    }
}

struct Fail(NkStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(NkStatus::NkInvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<NkStatus, Fail>) -> NkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            NkStatus::NkPanic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref()
        .ok_or_else(|| Fail(NkStatus::NkNullPointer, format!("{what} is null")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut()
        .ok_or_else(|| Fail(NkStatus::NkNullPointer, format!("{what} is null")))
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Fail> {
    if p.is_null() {
        return Err(Fail(NkStatus::NkNullPointer, "path is null".into()));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid("path is not valid UTF-8"))?;
    Ok(PathBuf::from(s))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Copies `m` row-major into `buf`; `len` is the capacity in doubles.
unsafe fn copy_mat(m: &Mat, buf: *mut f64, len: usize) -> Result<NkStatus, Fail> {
    let data = m.as_slice();
    if buf.is_null() {
        return Err(Fail(NkStatus::NkNullPointer, "buffer is null".into()));
    }
    if len < data.len() {
        return Err(Fail(
            NkStatus::NkBufferTooSmall,
            format!("buffer holds {len} values, {} needed", data.len()),
        ));
    }
    ptr::copy_nonoverlapping(data.as_ptr(), buf, data.len());
    Ok(NkStatus::NkOk)
}

/// Message of the last failing call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Default plant coefficients: unit mass and springs, pure nonlinear damping.
#[no_mangle]
pub extern "C" fn nk_msd_params_default() -> NkMsdParams {
    let p = MsdParams::default();
    NkMsdParams {
        m: p.m,
        k1: p.k1,
        k3: p.k3,
        b0: p.b0,
        b1: p.b1,
        b2: p.b2,
    }
}

#[no_mangle]
pub extern "C" fn nk_simulate_options_default() -> NkSimulateOptions {
    NkSimulateOptions {
        x0: [0.0, 0.0],
        amplitude: nikoopman::dynamics::DEFAULT_AMPLITUDE,
        hold: nikoopman::dynamics::DEFAULT_HOLD,
        seed: 0,
        dt: nikoopman::dynamics::DEFAULT_SAMPLE_TIME,
        steps: nikoopman::dynamics::DEFAULT_STEPS,
    }
}

#[no_mangle]
pub extern "C" fn nk_identify_options_default() -> NkIdentifyOptions {
    NkIdentifyOptions {
        mode: NkMode::NkModeNi,
        n_rbf: 6,
        center_seed: 0,
        alpha: nikoopman::identify::DEFAULT_ALPHA,
        strict_b: false,
        normalize: false,
        max_iters: tol::ADMM_MAX_ITERS,
    }
}

/// Simulates the plant under a random-step input.
///
/// # Safety
/// Pointers must be null or valid for the pointed-to type.
#[no_mangle]
pub unsafe extern "C" fn nk_simulate_msd(
    params: *const NkMsdParams,
    opts: *const NkSimulateOptions,
    out: *mut *mut NkTrajectory,
) -> NkStatus {
    guard(|| {
        let p = deref(params, "params")?;
        let o = deref(opts, "opts")?;
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let params = MsdParams {
            m: p.m,
            k1: p.k1,
            k3: p.k3,
            b0: p.b0,
            b1: p.b1,
            b2: p.b2,
        };
        params.validate()?;
        if !(o.dt > 0.0 && o.dt.is_finite()) || o.steps == 0 || o.hold == 0 || !(o.amplitude >= 0.0) {
            return Err(invalid("need dt > 0, steps > 0, hold > 0 and amplitude >= 0"));
        }
        let signal = InputSignal {
            kind: InputKind::RandomSteps,
            amplitude: o.amplitude,
            hold: o.hold,
            seed: o.seed,
        };
        let traj = simulate(&params, &o.x0, &signal, o.dt, o.steps)?;
        *out = boxed(NkTrajectory(traj));
        Ok(NkStatus::NkOk)
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nk_trajectory_load(path: *const c_char, out: *mut *mut NkTrajectory) -> NkStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let traj = TrajectoryData::load(&path_arg(path)?)?;
        *out = boxed(NkTrajectory(traj));
        Ok(NkStatus::NkOk)
    })
}

/// # Safety
/// `traj` must come from this library; `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn nk_trajectory_save(traj: *const NkTrajectory, path: *const c_char) -> NkStatus {
    guard(|| {
        let t = deref(traj, "traj")?;
        t.0.save(&path_arg(path)?)?;
        Ok(NkStatus::NkOk)
    })
}

/// Number of samples, or 0 for a null handle.
///
/// # Safety
/// `traj` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn nk_trajectory_steps(traj: *const NkTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.steps())
}

/// # Safety
/// `traj` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn nk_trajectory_state_dim(traj: *const NkTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.state_dim())
}

/// Copies the `steps x n` state table.
///
/// # Safety
/// `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn nk_trajectory_states(traj: *const NkTrajectory, buf: *mut f64, len: usize) -> NkStatus {
    guard(|| copy_mat(&deref(traj, "traj")?.0.states, buf, len))
}

/// Copies the `steps x m` input table.
///
/// # Safety
/// `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn nk_trajectory_inputs(traj: *const NkTrajectory, buf: *mut f64, len: usize) -> NkStatus {
    guard(|| copy_mat(&deref(traj, "traj")?.0.inputs, buf, len))
}

/// # Safety
/// `traj` must be null or come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn nk_trajectory_free(traj: *mut NkTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Fits a lifted model to `traj`. On `NK_SOLVER_NOT_CONVERGED` the model is
/// still returned through `out` and must be freed.
///
/// # Safety
/// Pointers must be null or valid for the pointed-to type.
#[no_mangle]
pub unsafe extern "C" fn nk_identify(
    traj: *const NkTrajectory,
    opts: *const NkIdentifyOptions,
    out: *mut *mut NkModel,
) -> NkStatus {
    guard(|| {
        let t = &deref(traj, "traj")?.0;
        let o = deref(opts, "opts")?;
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        if !(o.alpha > 0.0 && o.alpha.is_finite()) || o.max_iters == 0 {
            return Err(invalid("need alpha > 0 and max_iters > 0"));
        }
        let dict = if o.n_rbf == 0 {
            LiftingDictionary::identity(t.state_dim())
        } else {
            dictionary_for(t, o.n_rbf, o.center_seed, o.normalize)?
        };
        match o.mode {
            NkMode::NkModeUnconstrained => {
                let (model, _) = identify_unconstrained(t, &dict)?;
                *out = boxed(NkModel(ModelFile::unconstrained(model)));
                Ok(NkStatus::NkOk)
            }
            NkMode::NkModeNi => {
                let cfg = NiConfig {
                    alpha: o.alpha,
                    w: None,
                    strict_b: o.strict_b,
                    admm: AdmmSettings {
                        max_iters: o.max_iters,
                        ..AdmmSettings::default()
                    },
                };
                let id = identify_ni(t, &dict, &cfg)?;
                let d = &id.program.diagnostics;
                let status = if d.converged {
                    NkStatus::NkOk
                } else {
                    set_error(
                        Error::SolverNotConverged {
                            iterations: d.iterations,
                            primal_res: d.primal_res,
                            dual_res: d.dual_res,
                        }
                        .to_string(),
                    );
                    NkStatus::NkSolverNotConverged
                };
                *out = boxed(NkModel(ModelFile::ni(&id, o.alpha, o.strict_b)));
                Ok(status)
            }
        }
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nk_model_load(path: *const c_char, out: *mut *mut NkModel) -> NkStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let f = ModelFile::load(&path_arg(path)?)?;
        *out = boxed(NkModel(f));
        Ok(NkStatus::NkOk)
    })
}

/// # Safety
/// `model` must come from this library; `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn nk_model_save(model: *const NkModel, path: *const c_char) -> NkStatus {
    guard(|| {
        deref(model, "model")?.0.save(&path_arg(path)?)?;
        Ok(NkStatus::NkOk)
    })
}

/// Serializes the model as JSON into a string released with `nk_string_free`.
///
/// # Safety
/// `model` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nk_model_to_json(model: *const NkModel, out: *mut *mut c_char) -> NkStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let text = m.0.to_json()?;
        *out = CString::new(text)
            .map_err(|_| Fail(NkStatus::NkNumerical, "JSON contains NUL".into()))?
            .into_raw();
        Ok(NkStatus::NkOk)
    })
}

/// # Safety
/// `s` must be null or come from `nk_model_to_json`.
#[no_mangle]
pub unsafe extern "C" fn nk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Writes the shape of the selected matrix. `P` is `0 x 0` when absent.
///
/// # Safety
/// `model` must come from this library; `rows` and `cols` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nk_model_shape(
    model: *const NkModel,
    which: NkMatrix,
    rows: *mut usize,
    cols: *mut usize,
) -> NkStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let r = out_ptr(rows, "rows")?;
        let c = out_ptr(cols, "cols")?;
        let (nr, nc) = select(&m.0, which).map_or((0, 0), Mat::shape);
        *r = nr;
        *c = nc;
        Ok(NkStatus::NkOk)
    })
}

fn select(f: &ModelFile, which: NkMatrix) -> Option<&Mat> {
    match which {
        NkMatrix::NkMatrixA => Some(&f.model.a),
        NkMatrix::NkMatrixB => Some(&f.model.b),
        NkMatrix::NkMatrixC => Some(&f.model.c),
        NkMatrix::NkMatrixD => Some(&f.model.d),
        NkMatrix::NkMatrixP => f.solver.as_ref().map(|s| &s.p),
    }
}

/// Copies the selected matrix row-major.
///
/// # Safety
/// `model` must come from this library; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn nk_model_matrix(model: *const NkModel, which: NkMatrix, buf: *mut f64, len: usize) -> NkStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let mat = select(&m.0, which).ok_or_else(|| invalid("model has no certificate"))?;
        copy_mat(mat, buf, len)
    })
}

/// Spectral radius of `A_d` (tight power-iteration estimate).
///
/// # Safety
/// `model` must come from this library; `rho` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nk_model_spectral_radius(model: *const NkModel, rho: *mut f64) -> NkStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let rho = out_ptr(rho, "rho")?;
        *rho = spectral_radius_with(&m.0.model.a, tol::GELFAND_VERDICT_REL, tol::GELFAND_VERDICT_MAX_DOUBLINGS).value;
        Ok(NkStatus::NkOk)
    })
}

/// Frequency-domain NI check of the continuous image of the model on a
/// logarithmic grid. `passes` is set when the minimum eigenvalue is at least
/// `-tol::NI_FREQUENCY`.
///
/// # Safety
/// `model` must come from this library; output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn nk_model_ni_check(
    model: *const NkModel,
    omega_min: f64,
    omega_max: f64,
    points: usize,
    min_eig: *mut f64,
    passes: *mut bool,
) -> NkStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let min_eig = out_ptr(min_eig, "min_eig")?;
        let passes = out_ptr(passes, "passes")?;
        if !(omega_min > 0.0 && omega_max > omega_min && omega_max.is_finite()) || points < 2 {
            return Err(invalid("need 0 < omega_min < omega_max and points >= 2"));
        }
        let c = to_continuous(&m.0.model)?;
        let chk = ni_frequency_check(&c, &log_grid(omega_min, omega_max, points))?;
        *min_eig = chk.min_eig_over_grid;
        *passes = chk.passes(tol::NI_FREQUENCY);
        Ok(NkStatus::NkOk)
    })
}

/// Positive feedback with `k / (s^2 + 2 zeta omega s + omega^2)`, sampled at
/// the model's `T`.
///
/// # Safety
/// `model` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nk_model_ppf_closed_loop(
    model: *const NkModel,
    k: f64,
    zeta: f64,
    omega: f64,
    out: *mut NkClosedLoop,
) -> NkStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let out = out_ptr(out, "out")?;
        let c = to_continuous(&m.0.model)?;
        let v = closed_loop_verdict(&c, &PpfController { k, zeta, omega }, m.0.model.dt, tol::STABILITY_MARGIN)?;
        *out = NkClosedLoop {
            dc_gain_lambda_max: v.dc_gain_lambda_max,
            spectral_radius: v.spectral_radius,
            verdict: match v.verdict {
                Stability::Stable => 1,
                Stability::Unstable => -1,
                Stability::Inconclusive => 0,
            },
        };
        Ok(NkStatus::NkOk)
    })
}

/// # Safety
/// `model` must be null or come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn nk_model_free(model: *mut NkModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
