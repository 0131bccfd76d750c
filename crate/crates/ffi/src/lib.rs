//! C ABI over `qudit_transfer`.
//!
//! Objects are opaque handles created by `qt_*_new`/`qt_run_protocol` and
//! released with the matching `qt_*_free`. Every entry point returns a
//! [`QtStatus`]; on anything other than `QT_STATUS_OK` a description is
//! available from [`qt_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use num_complex::Complex64;
use qudit_transfer::analysis::powerlaw_fit_points;
use qudit_transfer::protocol::{run_with_dynamics, ProtocolConfig, ProtocolResult, Strategy};
use qudit_transfer::spin::solve_swap_coefficients;
use qudit_transfer::{
    ChainSpec, Error, LogicalPayload, Outcome, OutcomeSource, PropagatorMode, SectorDynamics,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SizeLimit = 3,
    NumericalFailure = 4,
    ZeroProbability = 5,
    BufferTooSmall = 6,
    Internal = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QtMode {
    Spectral = 0,
    Exact = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QtStrategy {
    Optimized = 0,
    Regular = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QtOutcome {
    Failure = 0,
    Success = 1,
}

/// One evolve-and-measure round.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QtRecord {
    /// 1-based iteration number.
    pub index: usize,
    /// Evolution time `Jt` of this round.
    pub jt: f64,
    /// Receiver success probability before the measurement.
    pub p: f64,
    pub outcome: QtOutcome,
    /// The outcome was scripted rather than sampled.
    pub forced: bool,
    /// The optimum sat on the edge of its search window.
    pub at_boundary: bool,
}

/// A chain together with its cached sector eigenbasis.
pub struct QtChain {
    dynamics: SectorDynamics,
}

/// Outcome of one protocol run.
pub struct QtProtocolResult {
    inner: ProtocolResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message);
}

struct Failure(QtStatus, String);

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let status = match err {
            Error::InvalidParameter { .. } | Error::DimensionMismatch { .. } => QtStatus::InvalidArgument,
            Error::SizeGuard { .. } => QtStatus::SizeLimit,
            Error::ZeroProbabilityBranch { .. } => QtStatus::ZeroProbability,
            Error::DecompositionResidual { .. } | Error::Fit(_) => QtStatus::NumericalFailure,
            _ => QtStatus::Internal,
        };
        Failure(status, err.to_string())
    }
}

fn fail<T>(status: QtStatus, message: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, message.into()))
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> QtStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => QtStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {message}"));
            QtStatus::Panic
        }
    }
}

unsafe fn reference<'a, T>(ptr: *const T, name: &str) -> Result<&'a T, Failure> {
    ptr.as_ref()
        .map_or_else(|| fail(QtStatus::NullPointer, format!("`{name}` is null")), Ok)
}

unsafe fn output<'a, T>(ptr: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    ptr.as_mut()
        .map_or_else(|| fail(QtStatus::NullPointer, format!("`{name}` is null")), Ok)
}

unsafe fn input_slice<'a, T>(ptr: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return fail(QtStatus::NullPointer, format!("`{name}` is null"));
    }
    Ok(slice::from_raw_parts(ptr, len))
}

unsafe fn output_slice<'a, T>(
    ptr: *mut T,
    len: usize,
    needed: usize,
    name: &str,
) -> Result<&'a mut [T], Failure> {
    if len < needed {
        return fail(
            QtStatus::BufferTooSmall,
            format!("`{name}` holds {len} elements, need {needed}"),
        );
    }
    if ptr.is_null() {
        return fail(QtStatus::NullPointer, format!("`{name}` is null"));
    }
    Ok(slice::from_raw_parts_mut(ptr, len))
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread. Never null.
#[no_mangle]
pub extern "C" fn qt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Builds a chain of `n_sites` `d`-level sites and diagonalises its
/// one-excitation sector.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn qt_chain_new(
    n_sites: usize,
    d: usize,
    j: f64,
    b_field: f64,
    mode: QtMode,
    out: *mut *mut QtChain,
) -> QtStatus {
    guard(|| {
        let out = output(out, "out")?;
        *out = ptr::null_mut();
        let spec = ChainSpec::new(n_sites, d, j, b_field)?;
        let mode = match mode {
            QtMode::Spectral => PropagatorMode::Spectral,
            QtMode::Exact => PropagatorMode::Exact,
        };
        let dynamics = SectorDynamics::new(&spec, mode)?;
        *out = Box::into_raw(Box::new(QtChain { dynamics }));
        Ok(())
    })
}

/// # Safety
/// `chain` must come from [`qt_chain_new`] and not have been freed. Null is
/// accepted and ignored.
#[no_mangle]
pub unsafe extern "C" fn qt_chain_free(chain: *mut QtChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// `|F_{N1}(Jt)|²`, the sender-to-receiver transfer probability.
///
/// # Safety
/// `chain` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qt_chain_receiver_probability(
    chain: *const QtChain,
    jt: f64,
    out: *mut f64,
) -> QtStatus {
    guard(|| {
        let chain = reference(chain, "chain")?;
        let out = output(out, "out")?;
        if !(jt.is_finite() && jt >= 0.0) {
            return fail(
                QtStatus::InvalidArgument,
                format!("jt must be finite and >= 0, got {jt}"),
            );
        }
        *out = chain.dynamics.propagator(jt).end_to_end_probability();
        Ok(())
    })
}

/// Writes the `N × N` propagator `F(Jt)` in row-major order, real and
/// imaginary parts split across `re` and `im`. Both buffers need `len >= N²`.
///
/// # Safety
/// `chain` must be a live handle; `re` and `im` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qt_chain_propagator(
    chain: *const QtChain,
    jt: f64,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> QtStatus {
    guard(|| {
        let chain = reference(chain, "chain")?;
        let n = chain.dynamics.n_sites();
        let re = output_slice(re, len, n * n, "re")?;
        let im = output_slice(im, len, n * n, "im")?;
        if !(jt.is_finite() && jt >= 0.0) {
            return fail(
                QtStatus::InvalidArgument,
                format!("jt must be finite and >= 0, got {jt}"),
            );
        }
        let f = chain.dynamics.propagator(jt).f_matrix;
        for r in 0..n {
            for c in 0..n {
                re[r * n + c] = f[(r, c)].re;
                im[r * n + c] = f[(r, c)].im;
            }
        }
        Ok(())
    })
}

/// Coefficients `b_0 … b_{d-1}` of the swap as a polynomial in `S·S`.
///
/// # Safety
/// `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qt_swap_coefficients(
    d: usize,
    out: *mut f64,
    len: usize,
    residual: *mut f64,
) -> QtStatus {
    guard(|| {
        let out = output_slice(out, len, d, "out")?;
        let solved = solve_swap_coefficients(d)?;
        out[..d].copy_from_slice(&solved.b);
        if let Some(residual) = residual.as_mut() {
            *residual = solved.residual;
        }
        Ok(())
    })
}

/// Runs the iterative protocol on `chain`.
///
/// The payload holds the `d - 1` amplitudes of levels `1 … d-1` and is
/// normalised here. `script` may be null or a string over `S`/`F` forcing
/// the first outcomes; remaining outcomes are sampled with `seed`.
///
/// # Safety
/// `chain` must be a live handle, `payload_re`/`payload_im` must hold
/// `payload_len` doubles, `script` must be null or NUL-terminated, and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qt_run_protocol(
    chain: *const QtChain,
    payload_re: *const f64,
    payload_im: *const f64,
    payload_len: usize,
    strategy: QtStrategy,
    max_iter: usize,
    seed: u64,
    script: *const c_char,
    out: *mut *mut QtProtocolResult,
) -> QtStatus {
    guard(|| {
        let out = output(out, "out")?;
        *out = ptr::null_mut();
        let chain = reference(chain, "chain")?;
        let re = input_slice(payload_re, payload_len, "payload_re")?;
        let im = input_slice(payload_im, payload_len, "payload_im")?;
        let d = chain.dynamics.spec().d;
        let coeffs = re.iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)).collect();
        let payload = LogicalPayload::normalized(d, coeffs)?;
        let mut source = if script.is_null() {
            OutcomeSource::seeded(seed)
        } else {
            let text = CStr::from_ptr(script)
                .to_str()
                .or_else(|_| fail(QtStatus::InvalidArgument, "script is not valid UTF-8"))?;
            OutcomeSource::scripted(text, seed)?
        };
        let strategy = match strategy {
            QtStrategy::Optimized => Strategy::Optimized,
            QtStrategy::Regular => Strategy::Regular,
        };
        let config = ProtocolConfig::new(chain.dynamics.mode(), strategy, max_iter);
        let inner = run_with_dynamics(&chain.dynamics, &payload, &config, &mut source)?;
        *out = Box::into_raw(Box::new(QtProtocolResult { inner }));
        Ok(())
    })
}

/// # Safety
/// `result` must come from [`qt_run_protocol`] and not have been freed.
/// Null is accepted and ignored.
#[no_mangle]
pub unsafe extern "C" fn qt_result_free(result: *mut QtProtocolResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Number of recorded iterations.
///
/// # Safety
/// `result` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qt_result_len(result: *const QtProtocolResult, out: *mut usize) -> QtStatus {
    guard(|| {
        *output(out, "out")? = reference(result, "result")?.inner.records.len();
        Ok(())
    })
}

/// # Safety
/// `result` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qt_result_record(
    result: *const QtProtocolResult,
    index: usize,
    out: *mut QtRecord,
) -> QtStatus {
    guard(|| {
        let result = reference(result, "result")?;
        let out = output(out, "out")?;
        let Some(r) = result.inner.records.get(index) else {
            return fail(
                QtStatus::InvalidArgument,
                format!(
                    "record {index} out of range ({} recorded)",
                    result.inner.records.len()
                ),
            );
        };
        *out = QtRecord {
            index: r.index,
            jt: r.t,
            p: r.p,
            outcome: match r.outcome {
                Outcome::Success => QtOutcome::Success,
                Outcome::Failure => QtOutcome::Failure,
            },
            forced: r.forced,
            at_boundary: r.at_boundary,
        };
        Ok(())
    })
}

/// Cumulative failure probability after the last recorded iteration.
///
/// # Safety
/// `result` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qt_result_p_fail(result: *const QtProtocolResult, out: *mut f64) -> QtStatus {
    guard(|| {
        *output(out, "out")? = reference(result, "result")?.inner.final_p_fail();
        Ok(())
    })
}

/// Total evolution time `Σ Jt_k`.
///
/// # Safety
/// `result` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qt_result_total_time(result: *const QtProtocolResult, out: *mut f64) -> QtStatus {
    guard(|| {
        *output(out, "out")? = reference(result, "result")?.inner.total_time;
        Ok(())
    })
}

/// Phase-corrected receiver amplitudes of levels `1 … d-1` after a success.
/// Fails with `QT_STATUS_INVALID_ARGUMENT` if the run never succeeded.
///
/// # Safety
/// `result` must be a live handle; `re` and `im` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qt_result_recovered(
    result: *const QtProtocolResult,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> QtStatus {
    guard(|| {
        let result = reference(result, "result")?;
        let Some(recovered) = &result.inner.recovered else {
            return fail(
                QtStatus::InvalidArgument,
                "run ended without a successful measurement",
            );
        };
        let n = recovered.coeffs.len();
        let re = output_slice(re, len, n, "re")?;
        let im = output_slice(im, len, n, "im")?;
        for (k, c) in recovered.coeffs.iter().enumerate() {
            re[k] = c.re;
            im[k] = c.im;
        }
        Ok(())
    })
}

/// Least-squares fit of `y = A x^(-α)` in log-log space.
///
/// # Safety
/// `xs` and `ys` must hold `len` doubles; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn qt_powerlaw_fit(
    xs: *const f64,
    ys: *const f64,
    len: usize,
    amplitude: *mut f64,
    exponent: *mut f64,
    r_squared: *mut f64,
) -> QtStatus {
    guard(|| {
        let xs = input_slice(xs, len, "xs")?;
        let ys = input_slice(ys, len, "ys")?;
        let amplitude = output(amplitude, "amplitude")?;
        let exponent = output(exponent, "exponent")?;
        let r_squared = output(r_squared, "r_squared")?;
        let fit = powerlaw_fit_points(xs, ys)?;
        *amplitude = fit.amplitude;
        *exponent = fit.exponent;
        *r_squared = fit.r_squared;
        Ok(())
    })
}
