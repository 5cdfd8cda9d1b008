//! C ABI for `netlump`.
//!
//! Every fallible function returns an [`NlStatus`]. On failure a message is
//! available from [`nl_last_error_message`] on the same thread. Matrices are
//! dense row-major `m × m` arrays; grid functions are row-major
//! `m × (n_cells + 1)` arrays (edge by edge). Objects behind opaque handles
//! are released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use netlump::coupling::{check_diffusion_positivity, check_markov_conditions, kolmogorov_check, perron_vector};
use netlump::coupling::{DiffusionCoupling, TransportCoupling};
use netlump::diffusion::{solve_diffusion, DiffusionProblem, Trajectory};
use netlump::grid::{AggregatedState, GridFunction};
use netlump::linalg::SquareMatrix;
use netlump::lumping::{aggregated_solution_diffusion, estimate_order};
use netlump::transport::{transport_exact, TransportProblem};
use netlump::NetlumpError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Arguments violate a documented precondition.
    Invalid = 2,
    /// The computation failed (singular system, no convergence, ...).
    Numerical = 3,
    /// A Rust panic was caught at the boundary.
    Panic = 4,
}

/// Diffusion boundary coupling `(K00, K01, K10, K11)`.
pub struct NlCoupling(DiffusionCoupling);

/// Recorded times and states of a diffusion solve.
pub struct NlTrajectory(Trajectory);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Fail {
    Null(&'static str),
    Lib(NetlumpError),
}

impl From<NetlumpError> for Fail {
    fn from(e: NetlumpError) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> NlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NlStatus::Ok,
        Ok(Err(Fail::Null(name))) => {
            set_error(format!("null pointer: {name}"));
            NlStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            if e.is_validation() {
                NlStatus::Invalid
            } else {
                NlStatus::Numerical
            }
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            NlStatus::Panic
        }
    }
}

unsafe fn slice<'a>(p: *const f64, len: usize, name: &'static str) -> Result<&'a [f64], Fail> {
    if p.is_null() {
        return Err(Fail::Null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, name: &'static str) -> Result<&'a mut [f64], Fail> {
    if p.is_null() {
        return Err(Fail::Null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn matrix(p: *const f64, m: usize, name: &'static str) -> Result<SquareMatrix, Fail> {
    if m == 0 {
        return Err(NetlumpError::invalid(name, "dimension must be positive").into());
    }
    Ok(SquareMatrix::from_row_slice(m, slice(p, m * m, name)?)?)
}

unsafe fn grid(p: *const f64, m: usize, n_cells: usize, name: &'static str) -> Result<GridFunction, Fail> {
    let values = slice(p, m * (n_cells + 1), name)?.to_vec();
    Ok(GridFunction::new(m, n_cells, values)?)
}

/// Message for the last failed call on this thread, or null if none.
/// The pointer stays valid until the next failing call on the thread.
#[no_mangle]
pub extern "C" fn nl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// Each `k**` points to `m * m` doubles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn nl_coupling_new(
    m: usize,
    k00: *const f64,
    k01: *const f64,
    k10: *const f64,
    k11: *const f64,
    out: *mut *mut NlCoupling,
) -> NlStatus {
    guard(|| {
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let c = DiffusionCoupling::new(
            matrix(k00, m, "k00")?,
            matrix(k01, m, "k01")?,
            matrix(k10, m, "k10")?,
            matrix(k11, m, "k11")?,
        )?;
        *out = Box::into_raw(Box::new(NlCoupling(c)));
        Ok(())
    })
}

/// # Safety
/// `c` is null or was returned by `nl_coupling_new` and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nl_coupling_free(c: *mut NlCoupling) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// # Safety
/// `c` is a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn nl_coupling_dim(c: *const NlCoupling) -> usize {
    c.as_ref().map_or(0, |c| c.0.dim())
}

/// Writes the aggregated matrix `K10 − K00 + K11 − K01` (`m × m`).
///
/// # Safety
/// `c` is a live handle; `out` holds `m * m` doubles.
#[no_mangle]
pub unsafe extern "C" fn nl_coupling_lumped_matrix(c: *const NlCoupling, out: *mut f64) -> NlStatus {
    guard(|| {
        let c = c.as_ref().ok_or(Fail::Null("coupling"))?;
        let m = c.0.dim();
        let out = slice_mut(out, m * m, "out")?;
        for (k, v) in c.0.aggregated_matrix().to_rows().into_iter().flatten().enumerate() {
            out[k] = v;
        }
        Ok(())
    })
}

/// Structural verdicts: sign pattern for positivity, the Markov row-sum
/// conditions, and the Kolmogorov property of the transpose-form lumped matrix.
///
/// # Safety
/// `c` is a live handle; the outputs are writable.
#[no_mangle]
pub unsafe extern "C" fn nl_coupling_check(
    c: *const NlCoupling,
    positive: *mut bool,
    markov: *mut bool,
    kolmogorov: *mut bool,
) -> NlStatus {
    guard(|| {
        let c = c.as_ref().ok_or(Fail::Null("coupling"))?;
        if positive.is_null() || markov.is_null() || kolmogorov.is_null() {
            return Err(Fail::Null("verdict outputs"));
        }
        *positive = check_diffusion_positivity(&c.0).positive;
        *markov = check_markov_conditions(&c.0);
        *kolmogorov = kolmogorov_check(&c.0.transpose_lumped_matrix());
        Ok(())
    })
}

/// Solves the diffusion system. `u0` holds `m * (n_cells + 1)` samples.
/// `dt <= 0` picks the default step; `n_times == 0` records 21 uniform times.
///
/// # Safety
/// Pointers are valid for the stated lengths; `times` may be null when
/// `n_times == 0`.
#[no_mangle]
pub unsafe extern "C" fn nl_diffusion_solve(
    c: *const NlCoupling,
    eps: f64,
    u0: *const f64,
    n_cells: usize,
    t_final: f64,
    dt: f64,
    times: *const f64,
    n_times: usize,
    out: *mut *mut NlTrajectory,
) -> NlStatus {
    guard(|| {
        let c = c.as_ref().ok_or(Fail::Null("coupling"))?;
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let u0 = grid(u0, c.0.dim(), n_cells, "u0")?;
        let mut p = DiffusionProblem::new(c.0.clone(), eps, u0, t_final);
        if dt > 0.0 {
            p = p.with_dt(dt);
        }
        if n_times > 0 {
            p = p.with_output_times(slice(times, n_times, "times")?.to_vec());
        }
        *out = Box::into_raw(Box::new(NlTrajectory(solve_diffusion(&p)?)));
        Ok(())
    })
}

/// # Safety
/// `t` is null or a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn nl_trajectory_free(t: *mut NlTrajectory) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of recorded states (0 for null).
///
/// # Safety
/// `t` is null or a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn nl_trajectory_len(t: *const NlTrajectory) -> usize {
    t.as_ref().map_or(0, |t| t.0.len())
}

/// Copies record `k`: its time to `time` and its `len` samples to `out`.
/// `len` must equal `m * (n_cells + 1)`.
///
/// # Safety
/// `t` is live; `time` is writable; `out` holds `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn nl_trajectory_get(
    t: *const NlTrajectory,
    k: usize,
    time: *mut f64,
    out: *mut f64,
    len: usize,
) -> NlStatus {
    guard(|| {
        let t = t.as_ref().ok_or(Fail::Null("trajectory"))?;
        if time.is_null() {
            return Err(Fail::Null("time"));
        }
        if k >= t.0.len() {
            return Err(NetlumpError::invalid("k", format!("record {k} out of range ({} records)", t.0.len())).into());
        }
        let state = t.0.states[k].values();
        if len != state.len() {
            return Err(NetlumpError::mismatch("output length", state.len(), len).into());
        }
        slice_mut(out, len, "out")?.copy_from_slice(state);
        *time = t.0.times[k];
        Ok(())
    })
}

/// Exact transport solution at time `t` for `u_t = −u_x/ε`,
/// `u(0) = (I + εB)u(1)`, initial data linearly interpolated from `u0`.
///
/// # Safety
/// `b` holds `m * m` doubles; `u0` and `out` hold `m * (n_cells + 1)`.
#[no_mangle]
pub unsafe extern "C" fn nl_transport_exact(
    m: usize,
    b: *const f64,
    eps: f64,
    u0: *const f64,
    n_cells: usize,
    t: f64,
    out: *mut f64,
) -> NlStatus {
    guard(|| {
        let coupling = TransportCoupling::new(matrix(b, m, "b")?);
        let u0 = grid(u0, m, n_cells, "u0")?;
        let len = u0.values().len();
        let p = TransportProblem::new(coupling, eps, u0, t.max(0.0));
        let u = transport_exact(&p, t)?;
        slice_mut(out, len, "out")?.copy_from_slice(u.values());
        Ok(())
    })
}

/// Lumped limit `v̄(t) = e^{tK} v0` for the diffusion coupling.
///
/// # Safety
/// `c` is live; `v0` and `out` hold `m` doubles.
#[no_mangle]
pub unsafe extern "C" fn nl_aggregated_solution(c: *const NlCoupling, v0: *const f64, t: f64, out: *mut f64) -> NlStatus {
    guard(|| {
        let c = c.as_ref().ok_or(Fail::Null("coupling"))?;
        let m = c.0.dim();
        let v0 = AggregatedState::new(slice(v0, m, "v0")?.to_vec())?;
        let v = aggregated_solution_diffusion(&c.0, &v0, t)?;
        slice_mut(out, m, "out")?.copy_from_slice(v.as_slice());
        Ok(())
    })
}

/// Perron vector (sum 1) of a nonnegative, column-stochastic, irreducible matrix.
///
/// # Safety
/// `t` holds `m * m` doubles; `out` holds `m`.
#[no_mangle]
pub unsafe extern "C" fn nl_perron_vector(m: usize, t: *const f64, out: *mut f64) -> NlStatus {
    guard(|| {
        let n = perron_vector(&matrix(t, m, "t")?)?;
        slice_mut(out, m, "out")?.copy_from_slice(n.as_slice());
        Ok(())
    })
}

/// Least-squares order of `error ~ ε^p` over strictly decreasing `eps`.
/// With fewer than three points or a non-positive error, `order` is NaN and
/// `pass` false (status OK).
///
/// # Safety
/// `eps` and `errors` hold `n` doubles; `order` and `pass` are writable.
#[no_mangle]
pub unsafe extern "C" fn nl_estimate_order(
    eps: *const f64,
    errors: *const f64,
    n: usize,
    band_lo: f64,
    band_hi: f64,
    order: *mut f64,
    pass: *mut bool,
) -> NlStatus {
    guard(|| {
        if order.is_null() || pass.is_null() {
            return Err(Fail::Null("order/pass"));
        }
        let e = slice(eps, n, "eps")?;
        let err = slice(errors, n, "errors")?;
        let r = estimate_order(e, err, err, (band_lo, band_hi))?;
        *order = r.fitted_order.unwrap_or(f64::NAN);
        *pass = r.pass;
        Ok(())
    })
}
