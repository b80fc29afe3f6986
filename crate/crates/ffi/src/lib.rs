//! C ABI over the wavekac library.
//!
//! Every fallible call returns a `WkStatus`; on failure the message is kept
//! per thread and read with `wk_last_error_message`. Objects are opaque
//! handles released with their `*_free` function. Strings returned to the
//! caller are released with `wk_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use wavekac::reconstruct::truth::GroundTruthSummary;
use wavekac::run::{self, RunConfig};
use wavekac::spectral_forward::SpectralData;
use wavekac::Error;

/// Status codes; the first four match the CLI exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WkStatus {
    Ok = 0,
    VerifyFailed = 1,
    InputError = 2,
    Flagged = 3,
    NumericalError = 4,
    NullPointer = 5,
    Panic = 6,
}

/// Spectral data (λ, κ).
pub struct WkSpectralData {
    inner: SpectralData,
    truth: Option<GroundTruthSummary>,
}

/// Result of a reconstruction run.
pub struct WkReconstruction {
    inner: run::ReconstructOutput,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> WkStatus {
    match e {
        Error::Numerical(_) | Error::Resolution(_) => WkStatus::NumericalError,
        _ => WkStatus::InputError,
    }
}

fn guard(f: impl FnOnce() -> Result<WkStatus, (WkStatus, String)>) -> WkStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            WkStatus::Panic
        }
    }
}

fn lib(e: Error) -> (WkStatus, String) {
    (status_of(&e), run::error_json(&e))
}

fn null(what: &str) -> (WkStatus, String) {
    (WkStatus::NullPointer, format!("null pointer: {what}"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (WkStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (WkStatus::InputError, format!("{what} is not valid UTF-8")))
}

unsafe fn config_arg(p: *const c_char) -> Result<RunConfig, (WkStatus, String)> {
    if p.is_null() {
        return Ok(RunConfig::default());
    }
    RunConfig::from_json(str_arg(p, "config")?).map_err(lib)
}

fn out_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn wk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn wk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Solve the forward problem described by a JSON run configuration.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wk_forward(config_json: *const c_char, out: *mut *mut WkSpectralData) -> WkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = config_arg(config_json)?;
        let f = run::forward(&cfg).map_err(lib)?;
        *out = Box::into_raw(Box::new(WkSpectralData { inner: f.spectral, truth: Some(f.truth) }));
        Ok(WkStatus::Ok)
    })
}

/// Parse spectral data from JSON (the spectral_data.json format).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wk_spectral_from_json(json: *const c_char, out: *mut *mut WkSpectralData) -> WkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = str_arg(json, "json")?;
        let sd: SpectralData =
            serde_json::from_str(text).map_err(|e| (WkStatus::InputError, format!("spectral data: {e}")))?;
        sd.validate().map_err(lib)?;
        *out = Box::into_raw(Box::new(WkSpectralData { inner: sd, truth: None }));
        Ok(WkStatus::Ok)
    })
}

/// # Safety
/// `sd` must be a live handle or NULL; the returned string is freed with
/// `wk_string_free`.
#[no_mangle]
pub unsafe extern "C" fn wk_spectral_to_json(sd: *const WkSpectralData) -> *mut c_char {
    match sd.as_ref().and_then(|h| run::to_json(&h.inner).ok()) {
        Some(s) => out_string(s),
        None => ptr::null_mut(),
    }
}

/// Truncation K, or 0 for NULL.
///
/// # Safety
/// `sd` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn wk_spectral_k(sd: *const WkSpectralData) -> usize {
    sd.as_ref().map_or(0, |h| h.inner.k)
}

/// Number of harmonic functions M, or 0 for NULL.
///
/// # Safety
/// `sd` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn wk_spectral_m(sd: *const WkSpectralData) -> usize {
    sd.as_ref().map_or(0, |h| h.inner.m)
}

/// Copy the eigenvalues into `buf` (capacity `len`, at least K).
///
/// # Safety
/// `sd` must be a live handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn wk_spectral_lambda(sd: *const WkSpectralData, buf: *mut f64, len: usize) -> WkStatus {
    guard(|| {
        let h = sd.as_ref().ok_or_else(|| null("sd"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        if len < h.inner.k {
            return Err((WkStatus::InputError, format!("buffer holds {len} < K={}", h.inner.k)));
        }
        ptr::copy_nonoverlapping(h.inner.lambda.as_ptr(), buf, h.inner.k);
        Ok(WkStatus::Ok)
    })
}

/// # Safety
/// `sd` must come from this library or be NULL; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn wk_spectral_free(sd: *mut WkSpectralData) {
    if !sd.is_null() {
        drop(Box::from_raw(sd));
    }
}

/// Blind reconstruction. `config_json` may be NULL for defaults. Returns
/// `Flagged` (with a valid handle) when the run produced diagnostics.
///
/// # Safety
/// `sd` must be a live handle; `config_json` NULL or NUL-terminated; `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn wk_reconstruct(
    sd: *const WkSpectralData,
    config_json: *const c_char,
    out: *mut *mut WkReconstruction,
) -> WkStatus {
    guard(|| {
        let h = sd.as_ref().ok_or_else(|| null("sd"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = config_arg(config_json)?;
        let r = run::reconstruct(&h.inner, &cfg, None, false).map_err(lib)?;
        let status = if r.report.flagged() { WkStatus::Flagged } else { WkStatus::Ok };
        *out = Box::into_raw(Box::new(WkReconstruction { inner: r }));
        Ok(status)
    })
}

/// Test mode: like `wk_reconstruct`, then compare against the ground truth
/// kept by `wk_forward` (report.distortion).
///
/// # Safety
/// As `wk_reconstruct`; `sd` must come from `wk_forward`.
#[no_mangle]
pub unsafe extern "C" fn wk_reconstruct_with_truth(
    sd: *const WkSpectralData,
    config_json: *const c_char,
    out: *mut *mut WkReconstruction,
) -> WkStatus {
    guard(|| {
        let h = sd.as_ref().ok_or_else(|| null("sd"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let Some(truth) = h.truth.as_ref() else {
            return Err((WkStatus::InputError, "spectral data carries no ground truth".into()));
        };
        let cfg = config_arg(config_json)?;
        let r = run::reconstruct(&h.inner, &cfg, Some(truth), false).map_err(lib)?;
        let status = if r.report.flagged() { WkStatus::Flagged } else { WkStatus::Ok };
        *out = Box::into_raw(Box::new(WkReconstruction { inner: r }));
        Ok(status)
    })
}

/// Number of atoms in the distance matrix (0 if none).
///
/// # Safety
/// `r` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn wk_reconstruction_atom_count(r: *const WkReconstruction) -> usize {
    r.as_ref().and_then(|h| h.inner.report.distances.as_ref()).map_or(0, |d| d.len())
}

/// d*(i, j); +∞ when the trajectories never meet.
///
/// # Safety
/// `r` must be a live handle; `value` writable.
#[no_mangle]
pub unsafe extern "C" fn wk_reconstruction_distance(
    r: *const WkReconstruction,
    i: usize,
    j: usize,
    value: *mut f64,
) -> WkStatus {
    guard(|| {
        let h = r.as_ref().ok_or_else(|| null("r"))?;
        if value.is_null() {
            return Err(null("value"));
        }
        let dm = h.inner.report.distances.as_ref().ok_or((WkStatus::InputError, "no distance matrix".into()))?;
        if i >= dm.len() || j >= dm.len() {
            return Err((WkStatus::InputError, format!("index out of range ({i}, {j}) for {} atoms", dm.len())));
        }
        *value = dm.values[i][j];
        Ok(WkStatus::Ok)
    })
}

/// Diameter-normalized distortion from `wk_reconstruct_with_truth`.
///
/// # Safety
/// `r` must be a live handle; `value` writable.
#[no_mangle]
pub unsafe extern "C" fn wk_reconstruction_distortion(r: *const WkReconstruction, value: *mut f64) -> WkStatus {
    guard(|| {
        let h = r.as_ref().ok_or_else(|| null("r"))?;
        if value.is_null() {
            return Err(null("value"));
        }
        let d = h.inner.report.distortion.as_ref().ok_or((WkStatus::InputError, "no ground-truth comparison".into()))?;
        *value = d.max_diameter_normalized;
        Ok(WkStatus::Ok)
    })
}

/// Whether the collapse (symmetry) diagnostic fired: 1, 0, or -1 for NULL.
///
/// # Safety
/// `r` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn wk_reconstruction_collapsed(r: *const WkReconstruction) -> i32 {
    r.as_ref().map_or(-1, |h| h.inner.report.collapse.fired as i32)
}

/// Full report as JSON (report.json format).
///
/// # Safety
/// `r` must be a live handle or NULL; free the result with `wk_string_free`.
#[no_mangle]
pub unsafe extern "C" fn wk_reconstruction_report_json(r: *const WkReconstruction) -> *mut c_char {
    match r.as_ref().and_then(|h| run::to_json(&h.inner.report).ok()) {
        Some(s) => out_string(s),
        None => ptr::null_mut(),
    }
}

/// Distance matrix as CSV, or NULL when there is none.
///
/// # Safety
/// `r` must be a live handle or NULL; free the result with `wk_string_free`.
#[no_mangle]
pub unsafe extern "C" fn wk_reconstruction_distances_csv(r: *const WkReconstruction) -> *mut c_char {
    match r.as_ref().and_then(|h| h.inner.csv.clone()) {
        Some(s) => out_string(s),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `r` must come from this library or be NULL; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn wk_reconstruction_free(r: *mut WkReconstruction) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Run the acceptance suites (`only` NULL for all). Writes the
/// verify_report.json text to `report_json`; returns `VerifyFailed` if any
/// criterion failed.
///
/// # Safety
/// String arguments NULL or NUL-terminated; `report_json` writable.
#[no_mangle]
pub unsafe extern "C" fn wk_verify(
    config_json: *const c_char,
    only: *const c_char,
    report_json: *mut *mut c_char,
) -> WkStatus {
    guard(|| {
        if report_json.is_null() {
            return Err(null("report_json"));
        }
        let cfg = config_arg(config_json)?;
        let only = if only.is_null() { None } else { Some(str_arg(only, "only")?) };
        let rep = run::verify(&cfg, only).map_err(lib)?;
        *report_json = out_string(run::to_json(&rep).map_err(lib)?);
        Ok(if rep.all_passed { WkStatus::Ok } else { WkStatus::VerifyFailed })
    })
}

/// Two-spectra probe for the string in the configuration. Writes the
/// report JSON to `report_json`.
///
/// # Safety
/// `config_json` NUL-terminated; `report_json` writable.
#[no_mangle]
pub unsafe extern "C" fn wk_probe_krein(config_json: *const c_char, report_json: *mut *mut c_char) -> WkStatus {
    guard(|| {
        if report_json.is_null() {
            return Err(null("report_json"));
        }
        let cfg = config_arg(config_json)?;
        let p = run::probe_krein(&cfg).map_err(lib)?;
        *report_json = out_string(run::to_json(&p).map_err(lib)?);
        Ok(WkStatus::Ok)
    })
}
