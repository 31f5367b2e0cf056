//! C interface to `hfmode`.
//!
//! Objects are opaque handles created by `hf_*_new`/`hf_top_k` and released
//! with the matching `*_free`. Every fallible call returns an [`HfStatus`];
//! on failure [`hf_last_error_message`] describes the problem. Panics never
//! cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use hfmode::eigen::{top_k, SpectrumSlice};
use hfmode::envelope::predict;
use hfmode::grid::{Grid, Potential};
use hfmode::modes::{count_localized, demodulate, Demodulation};
use hfmode::operator::{assemble, DiscreteOperator, Scheme};
use hfmode::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SolverFailure = 3,
    OutOfRange = 4,
    Panic = 5,
}

pub const HF_SCHEME_CENTRAL_DIFFERENCE: u32 = 0;
pub const HF_SCHEME_NUMEROV: u32 = 1;

/// Assembled operator together with the potential it came from.
pub struct HfOperator {
    op: DiscreteOperator,
    potential: Potential,
}

/// Top eigenpairs of an operator.
pub struct HfSpectrum {
    slice: SpectrumSlice,
    ctx: Demodulation,
}

/// Demodulated view of one mode.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HfModeSummary {
    pub rank: usize,
    pub lambda: f64,
    pub delta_lambda: f64,
    pub tail_mass: f64,
    pub residual: f64,
    pub node_count: usize,
    pub localized: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HfStatus {
    match e {
        _ if e.is_solver_failure() => HfStatus::SolverFailure,
        Error::RankOutOfRange { .. } | Error::InvalidCount { .. } | Error::TooLarge { .. } => HfStatus::OutOfRange,
        _ => HfStatus::InvalidArgument,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (HfStatus, String)>) -> HfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HfStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            HfStatus::Panic
        }
    }
}

fn fail(e: Error) -> (HfStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (HfStatus, String) {
    (HfStatus::NullPointer, format!("{name} is null"))
}

fn scheme(code: u32) -> Result<Scheme, (HfStatus, String)> {
    match code {
        HF_SCHEME_CENTRAL_DIFFERENCE => Ok(Scheme::CentralDifference),
        HF_SCHEME_NUMEROV => Ok(Scheme::Numerov),
        other => Err((HfStatus::InvalidArgument, format!("unknown scheme {other}"))),
    }
}

fn build(
    x_min: f64,
    length: f64,
    h: f64,
    scheme_code: u32,
    potential: impl FnOnce(&Grid) -> hfmode::Result<Potential>,
    out: *mut *mut HfOperator,
) -> HfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let scheme = scheme(scheme_code)?;
        let grid = Grid::new(x_min, length, h).map_err(fail)?;
        let potential = potential(&grid).map_err(fail)?;
        let op = assemble(scheme, &potential, &grid).map_err(fail)?;
        // SAFETY: checked non-null above; the caller provides writable storage.
        unsafe { *out = Box::into_raw(Box::new(HfOperator { op, potential })) };
        Ok(())
    })
}

/// Operator for `V(x) = amplitude * sech(width * x)` on the periodic grid
/// `x_min + n h`, `n < length / h`.
///
/// # Safety
/// `out` must be null or point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn hf_operator_new_sech(
    x_min: f64,
    length: f64,
    h: f64,
    amplitude: f64,
    width: f64,
    scheme: u32,
    out: *mut *mut HfOperator,
) -> HfStatus {
    build(x_min, length, h, scheme, |_| Potential::sech(amplitude, width), out)
}

/// Operator for a potential given by its samples on the grid.
///
/// # Safety
/// `values` must point to `len` readable doubles; `out` must be null or
/// point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn hf_operator_new_tabulated(
    x_min: f64,
    length: f64,
    h: f64,
    values: *const f64,
    len: usize,
    scheme: u32,
    out: *mut *mut HfOperator,
) -> HfStatus {
    if values.is_null() {
        return guard(|| Err(null("values")));
    }
    // SAFETY: the caller guarantees `len` readable doubles at `values`.
    let samples = unsafe { slice::from_raw_parts(values, len) }.to_vec();
    build(x_min, length, h, scheme, |g| Potential::tabulated(*g, samples), out)
}

/// Number of grid points, or 0 for a null handle.
///
/// # Safety
/// `op` must be null or a live handle from `hf_operator_new_*`.
#[no_mangle]
pub unsafe extern "C" fn hf_operator_len(op: *const HfOperator) -> usize {
    // SAFETY: null or live, per the contract.
    unsafe { op.as_ref() }.map_or(0, |o| o.op.len())
}

/// # Safety
/// `op` must be null or a live handle not used again afterwards.
#[no_mangle]
pub unsafe extern "C" fn hf_operator_free(op: *mut HfOperator) {
    if !op.is_null() {
        // SAFETY: created by Box::into_raw in `build`.
        drop(unsafe { Box::from_raw(op) });
    }
}

/// The `k` largest certified eigenpairs, descending.
///
/// # Safety
/// `op` must be a live handle; `out` must point to writable storage for one
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn hf_top_k(op: *const HfOperator, k: usize, out: *mut *mut HfSpectrum) -> HfStatus {
    guard(|| {
        // SAFETY: null or live, per the contract.
        let op = unsafe { op.as_ref() }.ok_or_else(|| null("op"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let slice = top_k(&op.op, k).map_err(fail)?;
        let ctx = Demodulation::for_operator(&op.op);
        // SAFETY: checked non-null above.
        unsafe { *out = Box::into_raw(Box::new(HfSpectrum { slice, ctx })) };
        Ok(())
    })
}

/// Number of eigenpairs held, or 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle from `hf_top_k`.
#[no_mangle]
pub unsafe extern "C" fn hf_spectrum_len(s: *const HfSpectrum) -> usize {
    // SAFETY: null or live, per the contract.
    unsafe { s.as_ref() }.map_or(0, |s| s.slice.len())
}

/// Eigenvalue at 1-based `rank`.
///
/// # Safety
/// `s` must be a live handle; `out` must point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn hf_spectrum_lambda(s: *const HfSpectrum, rank: usize, out: *mut f64) -> HfStatus {
    guard(|| {
        // SAFETY: null or live, per the contract.
        let s = unsafe { s.as_ref() }.ok_or_else(|| null("spectrum"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let pair = s.slice.rank(rank).map_err(fail)?;
        // SAFETY: checked non-null above.
        unsafe { *out = pair.lambda };
        Ok(())
    })
}

/// Copies the eigenvector at `rank` into `buf`, which must hold exactly as
/// many doubles as the grid has points.
///
/// # Safety
/// `s` must be a live handle; `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hf_spectrum_vector(s: *const HfSpectrum, rank: usize, buf: *mut f64, len: usize) -> HfStatus {
    guard(|| {
        // SAFETY: null or live, per the contract.
        let s = unsafe { s.as_ref() }.ok_or_else(|| null("spectrum"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let pair = s.slice.rank(rank).map_err(fail)?;
        if len != pair.vector.len() {
            return Err(fail(Error::LengthMismatch {
                expected: pair.vector.len(),
                got: len,
            }));
        }
        // SAFETY: `buf` holds `len` doubles, checked equal to the vector length.
        unsafe { ptr::copy_nonoverlapping(pair.vector.as_ptr(), buf, len) };
        Ok(())
    })
}

/// Demodulated summary of the mode at `rank`.
///
/// # Safety
/// `s` must be a live handle; `out` must point to a writable summary.
#[no_mangle]
pub unsafe extern "C" fn hf_spectrum_mode(s: *const HfSpectrum, rank: usize, out: *mut HfModeSummary) -> HfStatus {
    guard(|| {
        // SAFETY: null or live, per the contract.
        let s = unsafe { s.as_ref() }.ok_or_else(|| null("spectrum"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let pair = s.slice.rank(rank).map_err(fail)?;
        let m = demodulate(pair, &s.ctx).map_err(fail)?;
        let summary = HfModeSummary {
            rank: m.rank,
            lambda: m.lambda,
            delta_lambda: m.delta_lambda,
            tail_mass: m.tail_mass,
            residual: m.residual,
            node_count: m.node_count(),
            localized: m.localized,
        };
        // SAFETY: checked non-null above.
        unsafe { *out = summary };
        Ok(())
    })
}

/// Consecutive localized modes from the top of the spectrum.
///
/// # Safety
/// `s` must be a live handle; `out` must point to a writable `size_t`.
#[no_mangle]
pub unsafe extern "C" fn hf_count_localized(s: *const HfSpectrum, out: *mut usize) -> HfStatus {
    guard(|| {
        // SAFETY: null or live, per the contract.
        let s = unsafe { s.as_ref() }.ok_or_else(|| null("spectrum"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let n = count_localized(&s.slice, &s.ctx).map_err(fail)?;
        // SAFETY: checked non-null above.
        unsafe { *out = n };
        Ok(())
    })
}

/// Bound states of the envelope problem for the operator's potential, on a
/// grid `refine` times finer. Writes the count to `count` and the first
/// `min(count, cap)` values of `Δλ`, descending, to `delta_lambda` (which may
/// be null when `cap` is 0).
///
/// # Safety
/// `op` must be a live handle; `delta_lambda` must point to `cap` writable
/// doubles; `count` must point to a writable `size_t`.
#[no_mangle]
pub unsafe extern "C" fn hf_predict(
    op: *const HfOperator,
    refine: usize,
    delta_lambda: *mut f64,
    cap: usize,
    count: *mut usize,
) -> HfStatus {
    guard(|| {
        // SAFETY: null or live, per the contract.
        let op = unsafe { op.as_ref() }.ok_or_else(|| null("op"))?;
        if count.is_null() {
            return Err(null("count"));
        }
        if cap > 0 && delta_lambda.is_null() {
            return Err(null("delta_lambda"));
        }
        let pred = predict(&op.potential, op.op.grid(), refine).map_err(fail)?;
        let values = pred.delta_lambdas();
        let n = values.len().min(cap);
        // SAFETY: `delta_lambda` holds `cap >= n` doubles; `count` is non-null.
        unsafe {
            if n > 0 {
                ptr::copy_nonoverlapping(values.as_ptr(), delta_lambda, n);
            }
            *count = values.len();
        }
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a live handle not used again afterwards.
#[no_mangle]
pub unsafe extern "C" fn hf_spectrum_free(s: *mut HfSpectrum) {
    if !s.is_null() {
        // SAFETY: created by Box::into_raw in `hf_top_k`.
        drop(unsafe { Box::from_raw(s) });
    }
}

/// Message for the most recent failure on this thread, or null if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
