//! C ABI for the wbench library.
//!
//! Every fallible function returns a [`WbStatus`]. On failure the message of
//! the most recent error on the calling thread is available through
//! [`wb_last_error_message`]. Objects cross the boundary as opaque handles
//! that the caller releases with the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use wbench::analysis::{detect_outliers_in, fit_sinusoid, propagated_readout_error};
use wbench::hamiltonian::{fermionic_triangle, hubbard_ring, w_state, PauliHamiltonian, PauliTerm};
use wbench::io::{run_to_directory, JobConfig};
use wbench::mitigation::{estimate_bitflip_p, mitigate_histogram_with, CalibrationMatrix, CalibrationRecord};
use wbench::noise::{true_confusion_matrix, ReadoutNoise};
use wbench::statevector::{sample_shots, ShotHistogram, StateVector};
use wbench::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Config = 4,
    Backend = 5,
    Fit = 6,
    Mitigation = 7,
    Io = 8,
    Contract = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

impl From<&Error> for WbStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Parse { .. } | Error::Incompatible { .. } => WbStatus::Parse,
            Error::Config(_) => WbStatus::Config,
            Error::Backend { .. } => WbStatus::Backend,
            Error::Fit(_) => WbStatus::Fit,
            Error::Mitigation { .. } => WbStatus::Mitigation,
            Error::Io { .. } => WbStatus::Io,
            _ => WbStatus::Contract,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn fail(status: WbStatus, message: impl Into<String>) -> WbStatus {
    set_last_error(message.into());
    status
}

/// Runs `body`, turning library errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), WbStatus>) -> WbStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => WbStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(WbStatus::Panic, "internal panic"),
    }
}

fn lib_err(e: Error) -> WbStatus {
    let status = WbStatus::from(&e);
    fail(status, e.to_string())
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, WbStatus> {
    if p.is_null() {
        return Err(fail(WbStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(WbStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, WbStatus> {
    p.as_ref().ok_or_else(|| fail(WbStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, WbStatus> {
    p.as_mut().ok_or_else(|| fail(WbStatus::NullPointer, format!("{what} is null")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], WbStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(WbStatus::NullPointer, format!("{what} is null")));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn slice_out<'a, T>(p: *mut T, len: usize, need: usize, what: &str) -> Result<&'a mut [T], WbStatus> {
    if len < need {
        return Err(fail(WbStatus::BufferTooSmall, format!("{what} holds {len}, {need} needed")));
    }
    if p.is_null() {
        return Err(fail(WbStatus::NullPointer, format!("{what} is null")));
    }
    Ok(&mut slice::from_raw_parts_mut(p, len)[..need])
}

fn into_handle<T>(value: T, out: &mut *mut T) {
    *out = Box::into_raw(Box::new(value));
}

/// Opaque simulated state.
pub struct WbState(StateVector);

/// Opaque Pauli-sum Hamiltonian.
pub struct WbHamiltonian(PauliHamiltonian);

/// Opaque readout calibration matrix.
pub struct WbCalibration(CalibrationMatrix);

/// Sinusoid fit `offset + amplitude sin(2 pi t / period + phase)` with standard errors.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct WbFit {
    pub offset: f64,
    pub amplitude: f64,
    pub period: f64,
    pub phase: f64,
    pub slope: f64,
    pub offset_err: f64,
    pub amplitude_err: f64,
    pub period_err: f64,
    pub phase_err: f64,
    pub slope_err: f64,
    pub residual_rms: f64,
    pub converged: bool,
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL, or 0
/// when there is no error.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn wb_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let slot = slot.borrow();
        let Some(msg) = slot.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// The three-qubit W state.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wb_state_w(out: *mut *mut WbState) -> WbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        into_handle(WbState(w_state()), out);
        Ok(())
    })
}

/// # Safety
/// `state` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wb_state_free(state: *mut WbState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// # Safety
/// `state` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn wb_state_n_qubits(state: *const WbState) -> usize {
    state.as_ref().map_or(0, |s| s.0.n_qubits())
}

/// Outcome probabilities over the 1-based `measured` qubits, written to
/// `probs` (length `2^n_measured`). Bit strings are indexed with the first
/// measured qubit as the most significant bit.
///
/// # Safety
/// Pointers must be valid for the given lengths.
#[no_mangle]
pub unsafe extern "C" fn wb_state_probabilities(
    state: *const WbState,
    measured: *const usize,
    n_measured: usize,
    probs: *mut f64,
    probs_len: usize,
) -> WbStatus {
    guard(|| {
        let s = ref_arg(state, "state")?;
        let measured = slice_arg(measured, n_measured, "measured")?;
        let p = s.0.probabilities(measured).map_err(lib_err)?;
        slice_out(probs, probs_len, p.len(), "probs")?.copy_from_slice(&p);
        Ok(())
    })
}

/// Exact expectation of a Pauli letter string such as `"YZY"`.
///
/// # Safety
/// `pauli` must be a NUL-terminated string, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wb_state_expectation(state: *const WbState, pauli: *const c_char, out: *mut f64) -> WbStatus {
    guard(|| {
        let s = ref_arg(state, "state")?;
        let term = PauliTerm::parse(1.0, str_arg(pauli, "pauli")?).map_err(lib_err)?;
        *out_arg(out, "out")? = s.0.expectation(&term.chars()).map_err(lib_err)?;
        Ok(())
    })
}

/// Samples `shots` measurements of all qubits into `counts` (length `2^n`).
///
/// # Safety
/// `counts` must be valid for `counts_len` elements.
#[no_mangle]
pub unsafe extern "C" fn wb_state_sample(
    state: *const WbState,
    shots: u64,
    seed: u64,
    counts: *mut u64,
    counts_len: usize,
) -> WbStatus {
    guard(|| {
        let s = ref_arg(state, "state")?;
        let all: Vec<usize> = (1..=s.0.n_qubits()).collect();
        let h = sample_shots(&s.0, &all, shots, seed).map_err(lib_err)?;
        slice_out(counts, counts_len, h.counts().len(), "counts")?.copy_from_slice(h.counts());
        Ok(())
    })
}

/// The six-term three-site triangle Hamiltonian.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wb_hamiltonian_triangle(out: *mut *mut WbHamiltonian) -> WbStatus {
    guard(|| {
        into_handle(WbHamiltonian(fermionic_triangle()), out_arg(out, "out")?);
        Ok(())
    })
}

/// Ring Hamiltonian on `n_sites >= 3` sites.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wb_hamiltonian_ring(n_sites: usize, out: *mut *mut WbHamiltonian) -> WbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        into_handle(WbHamiltonian(hubbard_ring(n_sites).map_err(lib_err)?), out);
        Ok(())
    })
}

/// # Safety
/// `h` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wb_hamiltonian_free(h: *mut WbHamiltonian) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// # Safety
/// `h` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn wb_hamiltonian_n_terms(h: *const WbHamiltonian) -> usize {
    h.as_ref().map_or(0, |h| h.0.terms().len())
}

/// Exact energy `<state|H|state>`.
///
/// # Safety
/// Handles must be live, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wb_hamiltonian_expectation(
    h: *const WbHamiltonian,
    state: *const WbState,
    out: *mut f64,
) -> WbStatus {
    guard(|| {
        let h = ref_arg(h, "hamiltonian")?;
        let s = ref_arg(state, "state")?;
        *out_arg(out, "out")? = h.0.expectation(&s.0).map_err(lib_err)?;
        Ok(())
    })
}

/// Analytic calibration matrix of independent flips with probability `p`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wb_calibration_bitflip(p: f64, n_qubits: usize, out: *mut *mut WbCalibration) -> WbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        if !(0.0..=1.0).contains(&p) {
            return Err(fail(WbStatus::Contract, format!("flip probability {p} outside [0, 1]")));
        }
        let m = true_confusion_matrix(&ReadoutNoise::uniform(p, n_qubits), n_qubits).map_err(lib_err)?;
        into_handle(WbCalibration(m), out);
        Ok(())
    })
}

/// Calibration matrix from `4^n` row-major entries; entry `(i, j)` is the
/// probability of reading `i` after preparing `j`.
///
/// # Safety
/// `entries` must be valid for `len` elements, `out` for writes.
#[no_mangle]
pub unsafe extern "C" fn wb_calibration_from_entries(
    n_qubits: usize,
    entries: *const f64,
    len: usize,
    out: *mut *mut WbCalibration,
) -> WbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let record = CalibrationRecord {
            n_qubits,
            entries: slice_arg(entries, len, "entries")?.to_vec(),
        };
        into_handle(WbCalibration(CalibrationMatrix::from_record(&record).map_err(lib_err)?), out);
        Ok(())
    })
}

/// # Safety
/// `cal` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wb_calibration_free(cal: *mut WbCalibration) {
    if !cal.is_null() {
        drop(Box::from_raw(cal));
    }
}

/// Bit-flip probability `(1 - mean diagonal) / n`.
///
/// # Safety
/// `cal` must be live, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wb_calibration_estimate_p(cal: *const WbCalibration, out: *mut f64) -> WbStatus {
    guard(|| {
        let c = ref_arg(cal, "calibration")?;
        *out_arg(out, "out")? = estimate_bitflip_p(&c.0);
        Ok(())
    })
}

/// # Safety
/// `cal` must be live, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wb_calibration_condition_number(cal: *const WbCalibration, out: *mut f64) -> WbStatus {
    guard(|| {
        let c = ref_arg(cal, "calibration")?;
        *out_arg(out, "out")? = c.0.condition_number();
        Ok(())
    })
}

/// Solves the calibration system for full-register `counts` (length `2^n`),
/// writing the unclipped quasi-probabilities to `quasi`. Fails when the
/// condition number exceeds `max_condition`.
///
/// # Safety
/// Buffers must be valid for their lengths.
#[no_mangle]
pub unsafe extern "C" fn wb_calibration_mitigate(
    cal: *const WbCalibration,
    counts: *const u64,
    counts_len: usize,
    max_condition: f64,
    quasi: *mut f64,
    quasi_len: usize,
) -> WbStatus {
    guard(|| {
        let c = ref_arg(cal, "calibration")?;
        let counts = slice_arg(counts, counts_len, "counts")?;
        if counts.len() != c.0.dim() {
            return Err(fail(
                WbStatus::Contract,
                format!("{} counts for a {}-state calibration", counts.len(), c.0.dim()),
            ));
        }
        let mut hist = ShotHistogram::empty((1..=c.0.n_qubits()).collect());
        for (outcome, &k) in counts.iter().enumerate() {
            hist.record(outcome, k);
        }
        let q = mitigate_histogram_with(&c.0, &hist, max_condition).map_err(lib_err)?;
        slice_out(quasi, quasi_len, q.values().len(), "quasi")?.copy_from_slice(q.values());
        Ok(())
    })
}

/// `n_qubits * p * sqrt(n_terms)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wb_propagated_readout_error(p: f64, n_qubits: usize, n_terms: usize, out: *mut f64) -> WbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = propagated_readout_error(p, n_qubits, n_terms).map_err(lib_err)?;
        Ok(())
    })
}

/// Fits a sinusoid (plus a linear drift when `with_slope`) to `values`
/// sampled at `times` in minutes.
///
/// # Safety
/// Arrays must hold `len` elements, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wb_fit_sinusoid(
    times: *const f64,
    values: *const f64,
    len: usize,
    with_slope: bool,
    out: *mut WbFit,
) -> WbStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let t = slice_arg(times, len, "times")?;
        let v = slice_arg(values, len, "values")?;
        let f = fit_sinusoid(t, v, with_slope).map_err(lib_err)?;
        *out = WbFit {
            offset: f.offset,
            amplitude: f.amplitude,
            period: f.period,
            phase: f.phase,
            slope: f.slope.unwrap_or(0.0),
            offset_err: f.errors.offset,
            amplitude_err: f.errors.amplitude,
            period_err: f.errors.period,
            phase_err: f.errors.phase,
            slope_err: f.errors.slope.unwrap_or(0.0),
            residual_rms: f.residual_rms,
            converged: f.converged,
        };
        Ok(())
    })
}

/// Flags packet means whose robust z-score exceeds `k`. `flags` receives
/// 1 for flagged and 0 otherwise; `n_flagged` the number of flags set.
///
/// # Safety
/// `means` and `flags` must hold `len` elements, `n_flagged` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wb_detect_outliers(
    means: *const f64,
    len: usize,
    k: f64,
    flags: *mut u8,
    n_flagged: *mut usize,
) -> WbStatus {
    guard(|| {
        let n_flagged = out_arg(n_flagged, "n_flagged")?;
        let means = slice_arg(means, len, "means")?;
        let report = detect_outliers_in(means, k).map_err(lib_err)?;
        let flags = slice_out(flags, len, len, "flags")?;
        flags.fill(0);
        for &i in &report.flagged {
            flags[i] = 1;
        }
        *n_flagged = report.flagged.len();
        Ok(())
    })
}

/// Runs the job described by the TOML file at `config_path`, writing series
/// files into `out_dir` (or the configured directory when null).
///
/// # Safety
/// Strings must be NUL-terminated; `out_dir` may be null.
#[no_mangle]
pub unsafe extern "C" fn wb_run_job(config_path: *const c_char, out_dir: *const c_char) -> WbStatus {
    guard(|| {
        let config = JobConfig::load(Path::new(str_arg(config_path, "config_path")?)).map_err(lib_err)?;
        let out = if out_dir.is_null() {
            None
        } else {
            Some(Path::new(str_arg(out_dir, "out_dir")?))
        };
        run_to_directory(&config, out).map_err(lib_err)?;
        Ok(())
    })
}
