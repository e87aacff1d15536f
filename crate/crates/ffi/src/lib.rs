//! C ABI for hsdiff.
//!
//! Objects cross the boundary as opaque handles created by `hsd_*_new` or
//! `hsd_*_run` style functions and released with the matching `*_free`.
//! Every fallible function returns one of the `HSD_*` codes; on failure a
//! description is available from [`hsd_last_error`] on the same thread.
//!
//! Variable-length outputs use the two-call pattern: pass a buffer and its
//! capacity, receive the required length in `*needed`, and get
//! `HSD_ERR_BUFFER_TOO_SMALL` if the capacity was insufficient.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hsdiff::gaussian_flow::riccati_solve;
use hsdiff::harness::{parse_override, run_ensemble, run_trajectory, EnsembleOptions, EnsembleSummary, RunConfig};
use hsdiff::nsa::mode_eigenvalue;
use hsdiff::record::TrajectoryRecord;
use hsdiff::regimes::{build_report, RegimeInputs};
use hsdiff::Error;
use num_complex::Complex64;

pub const HSD_OK: i32 = 0;
pub const HSD_ERR_NULL_POINTER: i32 = 1;
pub const HSD_ERR_INVALID_ARGUMENT: i32 = 2;
pub const HSD_ERR_CONFIG: i32 = 3;
pub const HSD_ERR_NUMERICAL: i32 = 4;
pub const HSD_ERR_IO: i32 = 5;
pub const HSD_ERR_BUFFER_TOO_SMALL: i32 = 6;
pub const HSD_ERR_NOT_FOUND: i32 = 7;
pub const HSD_ERR_PANIC: i32 = 8;

/// Run configuration.
pub struct HsdConfig {
    inner: RunConfig,
}

/// One integrated trajectory.
pub struct HsdTrajectory {
    inner: TrajectoryRecord,
}

/// Aggregated ensemble result.
pub struct HsdSummary {
    inner: EnsembleSummary,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|e| {
        let mut e = e.borrow_mut();
        e.clear();
        e.extend(msg.bytes().filter(|&b| b != 0));
    });
}

fn code_for(err: &Error) -> i32 {
    match err.root() {
        Error::ConfigInvalid(_) | Error::InvalidParams(_) | Error::InvalidGrid(_) | Error::Format(_) => HSD_ERR_CONFIG,
        Error::LengthMismatch { .. } | Error::BadWeights(_) => HSD_ERR_INVALID_ARGUMENT,
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => HSD_ERR_IO,
        _ => HSD_ERR_NUMERICAL,
    }
}

struct Fail(i32, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(code_for(&e), e.to_string())
    }
}

/// Runs `f`, converting errors and panics into codes.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            HSD_OK
        }
        Ok(Err(Fail(code, msg))) => {
            set_error(&msg);
            code
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal panic: {msg}"));
            HSD_ERR_PANIC
        }
    }
}

unsafe fn require<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref()
        .ok_or_else(|| Fail(HSD_ERR_NULL_POINTER, format!("{what} is null")))
}

unsafe fn require_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut()
        .ok_or_else(|| Fail(HSD_ERR_NULL_POINTER, format!("{what} is null")))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(HSD_ERR_NULL_POINTER, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(HSD_ERR_INVALID_ARGUMENT, format!("{what} is not UTF-8")))
}

/// Copies `bytes` plus a terminating NUL into `buf`.
unsafe fn write_str(bytes: &[u8], buf: *mut c_char, cap: usize, needed: *mut usize) -> Result<(), Fail> {
    let n = bytes.len() + 1;
    if let Some(needed) = needed.as_mut() {
        *needed = n;
    }
    if buf.is_null() || cap < n {
        return Err(Fail(
            HSD_ERR_BUFFER_TOO_SMALL,
            format!("buffer holds {cap} bytes, {n} needed"),
        ));
    }
    ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), bytes.len());
    *buf.add(bytes.len()) = 0;
    Ok(())
}

/// Length of the last error message on this thread, including the NUL.
/// Copies it into `buf` when `cap` is large enough; returns the length
/// either way. An empty message means the last call succeeded.
///
/// # Safety
/// `buf` must be null or valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn hsd_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let n = e.len() + 1;
        if !buf.is_null() && cap >= n {
            ptr::copy_nonoverlapping(e.as_ptr(), buf.cast::<u8>(), e.len());
            *buf.add(e.len()) = 0;
        }
        n
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hsd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// New configuration with default values.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hsd_config_new(out: *mut *mut HsdConfig) -> i32 {
    guard(|| {
        let out = require_mut(out, "out")?;
        *out = Box::into_raw(Box::new(HsdConfig {
            inner: RunConfig::default(),
        }));
        Ok(())
    })
}

/// Parses a flat `key = value` configuration document.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hsd_config_parse(text: *const c_char, out: *mut *mut HsdConfig) -> i32 {
    guard(|| {
        let text = c_str(text, "text")?;
        let out = require_mut(out, "out")?;
        let inner = RunConfig::from_flat_str(text, &[])?;
        inner.validate()?;
        *out = Box::into_raw(Box::new(HsdConfig { inner }));
        Ok(())
    })
}

/// Sets one dotted key, e.g. `("params.lambda", "2.0")`. The value is
/// parsed with the config-file syntax; the config is left unchanged on
/// error.
///
/// # Safety
/// `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn hsd_config_set(cfg: *mut HsdConfig, key: *const c_char, value: *const c_char) -> i32 {
    guard(|| {
        let cfg = require_mut(cfg, "cfg")?;
        let key = c_str(key, "key")?;
        let value = c_str(value, "value")?;
        let o = parse_override(&format!("{key}={value}"))?;
        let next = cfg.inner.with_overrides(&[o])?;
        next.validate()?;
        cfg.inner = next;
        Ok(())
    })
}

/// Serialized configuration text.
///
/// # Safety
/// `cfg` must be a live handle; `buf` null or valid for `cap` bytes;
/// `needed` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hsd_config_to_string(
    cfg: *const HsdConfig,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> i32 {
    guard(|| {
        let cfg = require(cfg, "cfg")?;
        write_str(cfg.inner.to_flat_string()?.as_bytes(), buf, cap, needed)
    })
}

/// Hex SHA-256 of the serialized configuration (65 bytes with the NUL).
///
/// # Safety
/// As for [`hsd_config_to_string`].
#[no_mangle]
pub unsafe extern "C" fn hsd_config_hash(
    cfg: *const HsdConfig,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> i32 {
    guard(|| {
        let cfg = require(cfg, "cfg")?;
        write_str(cfg.inner.hash()?.as_bytes(), buf, cap, needed)
    })
}

/// # Safety
/// `cfg` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hsd_config_free(cfg: *mut HsdConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Integrates trajectory `index` of the configured run.
///
/// # Safety
/// `cfg` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hsd_trajectory_run(
    cfg: *const HsdConfig,
    index: usize,
    out: *mut *mut HsdTrajectory,
) -> i32 {
    guard(|| {
        let cfg = require(cfg, "cfg")?;
        let out = require_mut(out, "out")?;
        let inner = run_trajectory(&cfg.inner, index)?;
        *out = Box::into_raw(Box::new(HsdTrajectory { inner }));
        Ok(())
    })
}

/// Number of recorded rows.
///
/// # Safety
/// `traj` must be a live handle; `len` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hsd_trajectory_len(traj: *const HsdTrajectory, len: *mut usize) -> i32 {
    guard(|| {
        let traj = require(traj, "traj")?;
        *require_mut(len, "len")? = traj.inner.len();
        Ok(())
    })
}

/// Copies the named column (`t`, `norm2`, `q_mean`, `p_mean`, `var_q`,
/// `var_p`, `gaussian_distance`, ...) into `values`, which must hold
/// [`hsd_trajectory_len`] doubles.
///
/// # Safety
/// `traj` must be a live handle; `name` NUL-terminated; `values` valid for
/// `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn hsd_trajectory_column(
    traj: *const HsdTrajectory,
    name: *const c_char,
    values: *mut f64,
    cap: usize,
) -> i32 {
    guard(|| {
        let traj = require(traj, "traj")?;
        let name = c_str(name, "name")?;
        let (_, col) = traj
            .inner
            .columns()
            .into_iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Fail(HSD_ERR_NOT_FOUND, format!("no column named {name}")))?;
        if values.is_null() {
            return Err(Fail(HSD_ERR_NULL_POINTER, "values is null".into()));
        }
        if cap < col.len() {
            return Err(Fail(
                HSD_ERR_BUFFER_TOO_SMALL,
                format!("buffer holds {cap} values, {} needed", col.len()),
            ));
        }
        ptr::copy_nonoverlapping(col.as_ptr(), values, col.len());
        Ok(())
    })
}

/// # Safety
/// `traj` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hsd_trajectory_free(traj: *mut HsdTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Runs the configured ensemble in memory with `workers` threads (0 for
/// all cores). Per-trajectory failures are reported inside the summary.
///
/// # Safety
/// `cfg` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hsd_ensemble_run(cfg: *const HsdConfig, workers: usize, out: *mut *mut HsdSummary) -> i32 {
    guard(|| {
        let cfg = require(cfg, "cfg")?;
        let out = require_mut(out, "out")?;
        let options = EnsembleOptions {
            workers: (workers > 0).then_some(workers),
            output_dir: None,
        };
        let run = run_ensemble(&cfg.inner, &options)?;
        *out = Box::into_raw(Box::new(HsdSummary { inner: run.summary }));
        Ok(())
    })
}

/// Number of trajectories that completed.
///
/// # Safety
/// `summary` must be a live handle; `n` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hsd_summary_succeeded(summary: *const HsdSummary, n: *mut usize) -> i32 {
    guard(|| {
        let s = require(summary, "summary")?;
        *require_mut(n, "n")? = s.inner.n_succeeded;
        Ok(())
    })
}

/// Summary as JSON.
///
/// # Safety
/// As for [`hsd_config_to_string`].
#[no_mangle]
pub unsafe extern "C" fn hsd_summary_json(
    summary: *const HsdSummary,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> i32 {
    guard(|| {
        let s = require(summary, "summary")?;
        write_str(&s.inner.to_json_bytes()?, buf, cap, needed)
    })
}

/// # Safety
/// `summary` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hsd_summary_free(summary: *mut HsdSummary) {
    if !summary.is_null() {
        drop(Box::from_raw(summary));
    }
}

/// Width parameter α after time `t` of the width flow from `α0`, using the
/// configuration's physical parameters.
///
/// # Safety
/// `cfg` must be a live handle; `re` and `im` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hsd_width_flow(
    cfg: *const HsdConfig,
    alpha0_re: f64,
    alpha0_im: f64,
    t: f64,
    re: *mut f64,
    im: *mut f64,
) -> i32 {
    guard(|| {
        let cfg = require(cfg, "cfg")?;
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Fail(HSD_ERR_INVALID_ARGUMENT, format!("t must be >= 0, got {t}")));
        }
        let path = riccati_solve(Complex64::new(alpha0_re, alpha0_im), &[0.0, t], &cfg.inner.params)?;
        let a = path.last().copied().unwrap_or(Complex64::new(alpha0_re, alpha0_im));
        *require_mut(re, "re")? = a.re;
        *require_mut(im, "im")? = a.im;
        Ok(())
    })
}

/// Complex eigenvalue of oscillator mode `n` for the configuration's
/// physical parameters.
///
/// # Safety
/// `cfg` must be a live handle; `re` and `im` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hsd_mode_eigenvalue(cfg: *const HsdConfig, n: usize, re: *mut f64, im: *mut f64) -> i32 {
    guard(|| {
        let cfg = require(cfg, "cfg")?;
        let l = mode_eigenvalue(n, &cfg.inner.params);
        *require_mut(re, "re")? = l.re;
        *require_mut(im, "im")? = l.im;
        Ok(())
    })
}

/// Characteristic scales for a body of `mass` kg as JSON.
///
/// # Safety
/// `buf` null or valid for `cap` bytes; `needed` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hsd_regimes_json(mass: f64, buf: *mut c_char, cap: usize, needed: *mut usize) -> i32 {
    guard(|| {
        let report = build_report(RegimeInputs::new(mass))?;
        let json = serde_json::to_vec(&report).map_err(Error::from)?;
        write_str(&json, buf, cap, needed)
    })
}
