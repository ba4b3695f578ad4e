//! C ABI over the core library: opaque result handles, integer status codes,
//! and a per-thread error message.
//!
//! Conventions: every fallible call returns a [`PatmatStatus`]; on any status
//! other than `OK` the output arguments are untouched and
//! [`patmat_last_error_message`] describes the failure (valid on the calling
//! thread until its next failing call). Handles returned through out-pointers
//! are owned by the caller and released with [`patmat_estimate_free`].
//! Strings returned by accessors are owned by their handle and die with it.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::str::FromStr;

use patmat::{
    limit_joint_moment, mc_volume, p_limit, simulate_moment, Error, InputDistribution,
    LimitConfig, Monomial, Pattern, ReferenceLaw, Word,
};

/// Status code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatmatStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument failed validation: bad name, malformed word, odd lengths.
    InvalidArgument = 2,
    /// The operation is not defined for this pattern.
    Unsupported = 3,
    /// The library failed internally; the error message has details.
    Internal = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let stored = CString::new(message)
        .unwrap_or_else(|_| CString::new("error message contained a NUL byte").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(stored));
}

fn fail(status: PatmatStatus, message: impl Into<String>) -> PatmatStatus {
    set_last_error(message.into());
    status
}

fn fail_with(error: Error) -> PatmatStatus {
    let status = match error {
        Error::Unsupported { .. } => PatmatStatus::Unsupported,
        _ => PatmatStatus::InvalidArgument,
    };
    fail(status, error.to_string())
}

/// Run `body` with panics converted to `Internal` status.
fn guarded(body: impl FnOnce() -> PatmatStatus) -> PatmatStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(PatmatStatus::Internal, "internal panic"),
    }
}

/// Read a required C string argument.
///
/// # Safety
/// `ptr` must be null or point to a NUL-terminated string.
unsafe fn text_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, PatmatStatus> {
    if ptr.is_null() {
        return Err(fail(PatmatStatus::NullPointer, format!("{name} is null")));
    }
    unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| fail(PatmatStatus::InvalidArgument, format!("{name} is not UTF-8")))
}

fn pattern_arg(text: &str) -> Result<Pattern, PatmatStatus> {
    Pattern::from_str(text).map_err(fail_with)
}

/// Read a color array into a monomial.
///
/// # Safety
/// `colors` must be null or point to `len` readable u32 values.
unsafe fn monomial_arg(colors: *const u32, len: usize) -> Result<Monomial, PatmatStatus> {
    if colors.is_null() {
        return Err(fail(PatmatStatus::NullPointer, "colors is null"));
    }
    let slice = unsafe { std::slice::from_raw_parts(colors, len) };
    Monomial::new(slice.to_vec()).map_err(fail_with)
}

/// Read an optional n-grid into a limit configuration (null or empty = default).
///
/// # Safety
/// `n_grid` must be null or point to `len` readable u32 values.
unsafe fn config_arg(n_grid: *const u32, len: usize) -> LimitConfig {
    if n_grid.is_null() || len == 0 {
        LimitConfig::default()
    } else {
        LimitConfig {
            n_grid: unsafe { std::slice::from_raw_parts(n_grid, len) }.to_vec(),
            ..LimitConfig::default()
        }
    }
}

/// One computed limit: a value with its error bar and provenance.
pub struct PatmatEstimate {
    value: f64,
    std_error: f64,
    flagged: bool,
    method: CString,
    exact: Option<CString>,
}

impl PatmatEstimate {
    fn new(
        value: f64,
        std_error: f64,
        flagged: bool,
        method: &str,
        exact: Option<String>,
    ) -> Box<PatmatEstimate> {
        Box::new(PatmatEstimate {
            value,
            std_error,
            flagged,
            method: CString::new(method).expect("method names have no NUL"),
            exact: exact.map(|e| CString::new(e).expect("rationals have no NUL")),
        })
    }
}

/// Write a freshly allocated estimate through the out-pointer.
///
/// # Safety
/// `out` must be null or a valid destination for a pointer.
unsafe fn deliver(out: *mut *mut PatmatEstimate, estimate: Box<PatmatEstimate>) -> PatmatStatus {
    if out.is_null() {
        return fail(PatmatStatus::NullPointer, "out is null");
    }
    unsafe { *out = Box::into_raw(estimate) };
    PatmatStatus::Ok
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn patmat_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the calling thread's most recent failure, or null if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn patmat_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |message| message.as_ptr())
    })
}

/// Limiting fraction p(w) of `word` (lowercase letters, first occurrences in
/// alphabetical order) under `pattern`. Pass a null/empty `n_grid` for the
/// default extrapolation grid.
///
/// # Safety
/// `pattern` and `word` must be NUL-terminated strings; `n_grid` must be null
/// or point to `n_grid_len` values; `out` must be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn patmat_p_limit(
    pattern: *const c_char,
    word: *const c_char,
    n_grid: *const u32,
    n_grid_len: usize,
    out: *mut *mut PatmatEstimate,
) -> PatmatStatus {
    guarded(|| {
        let pattern = match unsafe { text_arg(pattern, "pattern") }.and_then(pattern_arg) {
            Ok(p) => p,
            Err(status) => return status,
        };
        let word = match unsafe { text_arg(word, "word") } {
            Ok(text) => match Word::parse(text) {
                Ok(w) => w,
                Err(e) => return fail_with(e),
            },
            Err(status) => return status,
        };
        let config = unsafe { config_arg(n_grid, n_grid_len) };
        match p_limit(pattern, &word, &config) {
            Ok(estimate) => unsafe {
                deliver(
                    out,
                    PatmatEstimate::new(
                        estimate.value,
                        estimate.std_error,
                        estimate.flagged,
                        estimate.method.name(),
                        estimate.exact.map(|r| r.to_string()),
                    ),
                )
            },
            Err(e) => fail_with(e),
        }
    })
}

/// Monte Carlo volume estimate of p(w); Toeplitz and Hankel only.
///
/// # Safety
/// As for [`patmat_p_limit`].
#[no_mangle]
pub unsafe extern "C" fn patmat_mc_volume(
    pattern: *const c_char,
    word: *const c_char,
    samples: u64,
    seed: u64,
    out: *mut *mut PatmatEstimate,
) -> PatmatStatus {
    guarded(|| {
        let pattern = match unsafe { text_arg(pattern, "pattern") }.and_then(pattern_arg) {
            Ok(p) => p,
            Err(status) => return status,
        };
        let word = match unsafe { text_arg(word, "word") } {
            Ok(text) => match Word::parse(text) {
                Ok(w) => w,
                Err(e) => return fail_with(e),
            },
            Err(status) => return status,
        };
        match mc_volume(pattern, &word, samples, seed) {
            Ok(estimate) => unsafe {
                deliver(
                    out,
                    PatmatEstimate::new(
                        estimate.value,
                        estimate.std_error,
                        estimate.flagged,
                        estimate.method.name(),
                        estimate.exact.map(|r| r.to_string()),
                    ),
                )
            },
            Err(e) => fail_with(e),
        }
    })
}

/// Limiting joint moment of the monomial `colors[0..colors_len]` under
/// `pattern`. Pass a null/empty `n_grid` for the default grid.
///
/// # Safety
/// `pattern` must be a NUL-terminated string; `colors` must point to
/// `colors_len` values; `n_grid` as in [`patmat_p_limit`]; `out` must be a
/// valid destination.
#[no_mangle]
pub unsafe extern "C" fn patmat_moment(
    pattern: *const c_char,
    colors: *const u32,
    colors_len: usize,
    n_grid: *const u32,
    n_grid_len: usize,
    out: *mut *mut PatmatEstimate,
) -> PatmatStatus {
    guarded(|| {
        let pattern = match unsafe { text_arg(pattern, "pattern") }.and_then(pattern_arg) {
            Ok(p) => p,
            Err(status) => return status,
        };
        let monomial = match unsafe { monomial_arg(colors, colors_len) } {
            Ok(q) => q,
            Err(status) => return status,
        };
        let config = unsafe { config_arg(n_grid, n_grid_len) };
        match limit_joint_moment(pattern, &monomial, &config) {
            Ok(moment) => unsafe {
                deliver(
                    out,
                    PatmatEstimate::new(
                        moment.value,
                        moment.std_error,
                        moment.flagged,
                        "colored_word_sum",
                        moment.exact.map(|r| r.to_string()),
                    ),
                )
            },
            Err(e) => fail_with(e),
        }
    })
}

/// Moment of the monomial under a reference law: "free", "classical" or
/// "half_independent".
///
/// # Safety
/// As for [`patmat_moment`], with `law` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn patmat_reference_moment(
    law: *const c_char,
    colors: *const u32,
    colors_len: usize,
    out: *mut *mut PatmatEstimate,
) -> PatmatStatus {
    guarded(|| {
        let law = match unsafe { text_arg(law, "law") } {
            Ok(text) => match ReferenceLaw::ALL.iter().find(|l| l.name() == text) {
                Some(l) => *l,
                None => {
                    return fail(
                        PatmatStatus::InvalidArgument,
                        format!("unknown reference law '{text}'; use free, classical or half_independent"),
                    )
                }
            },
            Err(status) => return status,
        };
        let monomial = match unsafe { monomial_arg(colors, colors_len) } {
            Ok(q) => q,
            Err(status) => return status,
        };
        let moment = law.moment(&monomial);
        unsafe {
            deliver(
                out,
                PatmatEstimate::new(
                    moment.value,
                    moment.std_error,
                    moment.flagged,
                    law.name(),
                    moment.exact.map(|r| r.to_string()),
                ),
            )
        }
    })
}

/// Monte Carlo estimate of the joint moment by direct matrix simulation.
/// `distribution` is "rademacher" or "gaussian". Writes the replicate mean
/// and its standard error.
///
/// # Safety
/// String and array arguments as above; `out_mean` and `out_std_error` must
/// be valid destinations.
#[no_mangle]
pub unsafe extern "C" fn patmat_simulate_moment(
    pattern: *const c_char,
    colors: *const u32,
    colors_len: usize,
    n: u32,
    reps: u64,
    distribution: *const c_char,
    seed: u64,
    out_mean: *mut f64,
    out_std_error: *mut f64,
) -> PatmatStatus {
    guarded(|| {
        let pattern = match unsafe { text_arg(pattern, "pattern") }.and_then(pattern_arg) {
            Ok(p) => p,
            Err(status) => return status,
        };
        let monomial = match unsafe { monomial_arg(colors, colors_len) } {
            Ok(q) => q,
            Err(status) => return status,
        };
        let distribution = match unsafe { text_arg(distribution, "distribution") } {
            Ok("rademacher") => InputDistribution::Rademacher,
            Ok("gaussian") => InputDistribution::StandardGaussian,
            Ok(other) => {
                return fail(
                    PatmatStatus::InvalidArgument,
                    format!("unknown distribution '{other}'; use rademacher or gaussian"),
                )
            }
            Err(status) => return status,
        };
        if out_mean.is_null() || out_std_error.is_null() {
            return fail(PatmatStatus::NullPointer, "output pointer is null");
        }
        match simulate_moment(pattern, &monomial, n, reps, distribution, seed) {
            Ok(stats) => {
                unsafe {
                    *out_mean = stats.mean;
                    *out_std_error = stats.std_error;
                }
                PatmatStatus::Ok
            }
            Err(e) => fail_with(e),
        }
    })
}

/// Point estimate held by the handle.
///
/// # Safety
/// `estimate` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn patmat_estimate_value(estimate: *const PatmatEstimate) -> f64 {
    unsafe { &*estimate }.value
}

/// Standard error of the estimate (0 for exact values).
///
/// # Safety
/// `estimate` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn patmat_estimate_std_error(estimate: *const PatmatEstimate) -> f64 {
    unsafe { &*estimate }.std_error
}

/// True when the producing computation flagged quality problems.
///
/// # Safety
/// `estimate` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn patmat_estimate_flagged(estimate: *const PatmatEstimate) -> bool {
    unsafe { &*estimate }.flagged
}

/// Name of the method that produced the estimate; owned by the handle.
///
/// # Safety
/// `estimate` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn patmat_estimate_method(estimate: *const PatmatEstimate) -> *const c_char {
    unsafe { &*estimate }.method.as_ptr()
}

/// Exact rational value as text ("2", "2/3"), or null when the estimate is
/// numeric only; owned by the handle.
///
/// # Safety
/// `estimate` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn patmat_estimate_exact(estimate: *const PatmatEstimate) -> *const c_char {
    unsafe { &*estimate }
        .exact
        .as_ref()
        .map_or(std::ptr::null(), |exact| exact.as_ptr())
}

/// Release a handle. Null is ignored.
///
/// # Safety
/// `estimate` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn patmat_estimate_free(estimate: *mut PatmatEstimate) {
    if !estimate.is_null() {
        drop(unsafe { Box::from_raw(estimate) });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    fn c(text: &str) -> CString {
        CString::new(text).unwrap()
    }

    fn last_error() -> String {
        let ptr = patmat_last_error_message();
        assert!(!ptr.is_null(), "expected an error message");
        unsafe { CStr::from_ptr(ptr) }.to_str().unwrap().to_owned()
    }

    #[test]
    fn version_is_the_package_version() {
        let version = unsafe { CStr::from_ptr(patmat_version()) };
        assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn p_limit_returns_exact_closed_forms() {
        let mut handle: *mut PatmatEstimate = ptr::null_mut();
        let status = unsafe {
            patmat_p_limit(
                c("wigner").as_ptr(),
                c("abba").as_ptr(),
                ptr::null(),
                0,
                &mut handle,
            )
        };
        assert_eq!(status, PatmatStatus::Ok);
        unsafe {
            assert_eq!(patmat_estimate_value(handle), 1.0);
            assert_eq!(patmat_estimate_std_error(handle), 0.0);
            assert!(!patmat_estimate_flagged(handle));
            assert_eq!(CStr::from_ptr(patmat_estimate_exact(handle)).to_str().unwrap(), "1");
            assert_eq!(
                CStr::from_ptr(patmat_estimate_method(handle)).to_str().unwrap(),
                "closed_form"
            );
            patmat_estimate_free(handle);
        }
    }

    #[test]
    fn moment_and_reference_agree_through_the_abi() {
        let colors = [1u32, 1, 1, 1];
        let mut ensemble: *mut PatmatEstimate = ptr::null_mut();
        let mut reference: *mut PatmatEstimate = ptr::null_mut();
        unsafe {
            assert_eq!(
                patmat_moment(
                    c("symmetric_circulant").as_ptr(),
                    colors.as_ptr(),
                    colors.len(),
                    ptr::null(),
                    0,
                    &mut ensemble,
                ),
                PatmatStatus::Ok
            );
            assert_eq!(
                patmat_reference_moment(
                    c("classical").as_ptr(),
                    colors.as_ptr(),
                    colors.len(),
                    &mut reference,
                ),
                PatmatStatus::Ok
            );
            assert_eq!(patmat_estimate_value(ensemble), 3.0);
            assert_eq!(patmat_estimate_value(reference), 3.0);
            assert_eq!(
                CStr::from_ptr(patmat_estimate_exact(ensemble)).to_str().unwrap(),
                CStr::from_ptr(patmat_estimate_exact(reference)).to_str().unwrap(),
            );
            patmat_estimate_free(ensemble);
            patmat_estimate_free(reference);
        }
    }

    #[test]
    fn simulation_writes_its_outputs() {
        let colors = [1u32, 2, 2, 1];
        let mut mean = f64::NAN;
        let mut std_error = f64::NAN;
        let status = unsafe {
            patmat_simulate_moment(
                c("toeplitz").as_ptr(),
                colors.as_ptr(),
                colors.len(),
                40,
                20,
                c("rademacher").as_ptr(),
                1,
                &mut mean,
                &mut std_error,
            )
        };
        assert_eq!(status, PatmatStatus::Ok);
        assert!(mean.is_finite() && std_error.is_finite());
        assert!(std_error > 0.0);
    }

    #[test]
    fn failures_set_statuses_and_messages() {
        let mut handle: *mut PatmatEstimate = ptr::null_mut();

        let status = unsafe {
            patmat_p_limit(ptr::null(), c("abba").as_ptr(), ptr::null(), 0, &mut handle)
        };
        assert_eq!(status, PatmatStatus::NullPointer);
        assert!(last_error().contains("pattern"));

        let status = unsafe {
            patmat_p_limit(
                c("hilbert").as_ptr(),
                c("abba").as_ptr(),
                ptr::null(),
                0,
                &mut handle,
            )
        };
        assert_eq!(status, PatmatStatus::InvalidArgument);
        assert!(last_error().contains("hilbert"));

        let status = unsafe {
            patmat_mc_volume(
                c("wigner").as_ptr(),
                c("abab").as_ptr(),
                1000,
                1,
                &mut handle,
            )
        };
        assert_eq!(status, PatmatStatus::Unsupported);

        let colors = [1u32, 2];
        let status = unsafe {
            patmat_reference_moment(c("very-free").as_ptr(), colors.as_ptr(), 2, &mut handle)
        };
        assert_eq!(status, PatmatStatus::InvalidArgument);
        assert!(last_error().contains("very-free"));

        assert!(handle.is_null(), "failures must not produce handles");
        unsafe { patmat_estimate_free(ptr::null_mut()) };
    }

    #[test]
    fn generated_header_covers_the_surface() {
        let header = std::fs::read_to_string(
            std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/patmat.h"),
        )
        .expect("build script should generate include/patmat.h");
        for symbol in [
            "patmat_version",
            "patmat_last_error_message",
            "patmat_p_limit",
            "patmat_mc_volume",
            "patmat_moment",
            "patmat_reference_moment",
            "patmat_simulate_moment",
            "patmat_estimate_value",
            "patmat_estimate_exact",
            "patmat_estimate_free",
            "PatmatStatus",
            "PatmatEstimate",
        ] {
            assert!(header.contains(symbol), "header is missing {symbol}");
        }
    }
}
