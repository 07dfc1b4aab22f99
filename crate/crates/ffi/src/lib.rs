//! C ABI for `singbern`.
//!
//! Every fallible entry point returns an [`SbStatus`]; results are written
//! through out-pointers. After a failure, [`sb_last_error_message`] describes
//! it. Handles are opaque and must be released with the matching `*_free`.
//!
//! Calls taking `const` handles may run concurrently; `*_free` must not
//! race with other calls on the same handle.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use singbern::bernstein::basis;
use singbern::blend::{modified_eval, solve_psi, ModifiedOperator, PsiPoly};
use singbern::combinations::{build_scheme, CombinationScheme, LadderRule};
use singbern::lab::{self, corpus, ExperimentConfig};
use singbern::numkit::log_binomial;
use singbern::weights::{weighted_modulus, ModulusQuery, SingularWeight, StepWeight};
use singbern::{CorpusFunction, Error, RealFunction};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SingularSystem = 3,
    Domain = 4,
    NTooSmall = 5,
    Numerical = 6,
    Config = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SbLadder {
    Doubling = 0,
    Arithmetic = 1,
}

impl From<SbLadder> for LadderRule {
    fn from(l: SbLadder) -> Self {
        match l {
            SbLadder::Doubling => LadderRule::Doubling,
            SbLadder::Arithmetic => LadderRule::Arithmetic,
        }
    }
}

/// `f(x, user_data)`, sampled on `[0, 1]`.
pub type SbFunction = Option<unsafe extern "C" fn(x: f64, user_data: *mut c_void) -> f64>;

/// Solved cutoff polynomial.
pub struct SbPsi(PsiPoly);

/// Combination degrees and coefficients.
pub struct SbScheme(CombinationScheme);

/// Modified operator built from samples of a callback.
pub struct SbModified(ModifiedOperator);

/// Builtin corpus function.
pub struct SbCorpusFunction(CorpusFunction);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> SbStatus {
    match e {
        Error::SingularSystem { .. } | Error::MalformedSystem(_) => SbStatus::SingularSystem,
        Error::Domain(_)
        | Error::OutOfDomain { .. }
        | Error::SampleAtSingularity { .. }
        | Error::NodeAtSingularity { .. } => SbStatus::Domain,
        Error::NTooSmall { .. } => SbStatus::NTooSmall,
        Error::UnderdeterminedFit | Error::FitFailure(_) => SbStatus::Numerical,
        Error::Config(_) | Error::Io(_) | Error::Json(_) => SbStatus::Config,
        _ => SbStatus::InvalidArgument,
    }
}

/// Runs `body`, converting errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), (SbStatus, String)>>(body: F) -> SbStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error("");
            SbStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("panic inside singbern");
            SbStatus::Panic
        }
    }
}

fn lift(e: Error) -> (SbStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (SbStatus, String) {
    (SbStatus::NullPointer, format!("null pointer: {what}"))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), (SbStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn handle<'a, T>(h: *const T, what: &str) -> Result<&'a T, (SbStatus, String)> {
    h.as_ref().ok_or_else(|| null(what))
}

unsafe fn copy_out<T: Copy>(src: &[T], buf: *mut T, len: usize, written: *mut usize) -> Result<(), (SbStatus, String)> {
    if !written.is_null() {
        written.write(src.len());
    }
    if len < src.len() {
        return Err((
            SbStatus::BufferTooSmall,
            format!("buffer holds {len}, need {}", src.len()),
        ));
    }
    if buf.is_null() {
        return Err(null("buf"));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next `sb_` call on the same thread.
#[no_mangle]
pub extern "C" fn sb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// `p_{n,k}(x)`; zero outside `0..=n`.
#[no_mangle]
pub extern "C" fn sb_basis(n: usize, k: i64, x: f64) -> f64 {
    basis(n, k, x)
}

/// `ln C(n, k)`; `-inf` outside `0..=n`.
#[no_mangle]
pub extern "C" fn sb_log_binomial(n: u64, k: i64) -> f64 {
    log_binomial(n, k)
}

/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn sb_psi_new(r: usize, out: *mut *mut SbPsi) -> SbStatus {
    guard(|| {
        let psi = solve_psi(r).map_err(lift)?;
        write(out, Box::into_raw(Box::new(SbPsi(psi))), "out")
    })
}

/// `ψ(x)`; NaN for a null handle.
///
/// # Safety
/// `h` must be null or a live handle from [`sb_psi_new`].
#[no_mangle]
pub unsafe extern "C" fn sb_psi_eval(h: *const SbPsi, x: f64) -> f64 {
    h.as_ref().map_or(f64::NAN, |p| p.0.eval(x))
}

/// Copies the `2r+1` coefficients of `x^{2r+1}..x^{4r+1}` into `buf`.
/// `written` (optional) receives the required length.
///
/// # Safety
/// `h` must be a live handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sb_psi_coeffs(h: *const SbPsi, buf: *mut f64, len: usize, written: *mut usize) -> SbStatus {
    guard(|| copy_out(handle(h, "psi")?.0.coeffs(), buf, len, written))
}

/// # Safety
/// `h` must be null or a handle from [`sb_psi_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sb_psi_free(h: *mut SbPsi) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn sb_scheme_new(n: usize, r: usize, ladder: SbLadder, out: *mut *mut SbScheme) -> SbStatus {
    guard(|| {
        let scheme = build_scheme(n, r, ladder.into()).map_err(lift)?;
        write(out, Box::into_raw(Box::new(SbScheme(scheme))), "out")
    })
}

/// Number of terms; 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sb_scheme_len(h: *const SbScheme) -> usize {
    h.as_ref().map_or(0, |s| s.0.terms())
}

/// # Safety
/// `h` must be a live handle; `buf` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn sb_scheme_degrees(h: *const SbScheme, buf: *mut usize, len: usize, written: *mut usize) -> SbStatus {
    guard(|| copy_out(handle(h, "scheme")?.0.ladder(), buf, len, written))
}

/// # Safety
/// `h` must be a live handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sb_scheme_coeffs(h: *const SbScheme, buf: *mut f64, len: usize, written: *mut usize) -> SbStatus {
    guard(|| copy_out(handle(h, "scheme")?.0.coeffs(), buf, len, written))
}

/// # Safety
/// `h` must be null or a handle from [`sb_scheme_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sb_scheme_free(h: *mut SbScheme) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

struct Callback {
    f: unsafe extern "C" fn(f64, *mut c_void) -> f64,
    user_data: *mut c_void,
}

impl RealFunction for Callback {
    fn value(&self, x: f64) -> f64 {
        unsafe { (self.f)(x, self.user_data) }
    }
}

/// Builds `B̄_{n,r−1}` for `f`. The callback is only invoked during this call.
///
/// # Safety
/// `f` must be safe to call with `user_data`; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn sb_modified_new(
    f: SbFunction,
    user_data: *mut c_void,
    n: usize,
    r: usize,
    xi: f64,
    ladder: SbLadder,
    out: *mut *mut SbModified,
) -> SbStatus {
    guard(|| {
        let f = f.ok_or_else(|| null("f"))?;
        let cb = Callback { f, user_data };
        let op = modified_eval(&cb, n, r, xi, ladder.into()).map_err(lift)?;
        write(out, Box::into_raw(Box::new(SbModified(op))), "out")
    })
}

/// # Safety
/// `h` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn sb_modified_eval(h: *const SbModified, x: f64, out: *mut f64) -> SbStatus {
    guard(|| {
        let v = handle(h, "modified")?.0.eval(x);
        write(out, v, "out")
    })
}

/// `B̄^{(order)}_{n,r−1}(f, x)`.
///
/// # Safety
/// `h` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn sb_modified_deriv(h: *const SbModified, order: usize, x: f64, out: *mut f64) -> SbStatus {
    guard(|| {
        let d = handle(h, "modified")?.0.derivative(order).map_err(lift)?;
        write(out, d.eval(x), "out")
    })
}

/// # Safety
/// `h` must be null or a handle from [`sb_modified_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sb_modified_free(h: *mut SbModified) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, (SbStatus, String)> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| (SbStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Looks up a builtin such as `"abspow(1.5)"` or `"sin"`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn sb_corpus_new(name: *const c_char, xi: f64, out: *mut *mut SbCorpusFunction) -> SbStatus {
    guard(|| {
        let f = corpus::lookup(str_arg(name, "name")?, xi).map_err(lift)?;
        write(out, Box::into_raw(Box::new(SbCorpusFunction(f))), "out")
    })
}

/// `f(x)`; NaN for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sb_corpus_eval(h: *const SbCorpusFunction, x: f64) -> f64 {
    h.as_ref().map_or(f64::NAN, |f| f.0.value(x))
}

/// # Safety
/// `h` must be null or a handle from [`sb_corpus_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sb_corpus_free(h: *mut SbCorpusFunction) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Weighted modulus `ω_φ^r(f, t)_w̄` with `w̄ = |x − xi|^alpha` and
/// `φ = x^beta0 (1 − x)^beta1`.
///
/// # Safety
/// `h` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn sb_weighted_modulus(
    h: *const SbCorpusFunction,
    xi: f64,
    alpha: f64,
    beta0: f64,
    beta1: f64,
    r: usize,
    t: f64,
    x_grid_size: usize,
    h_grid_size: usize,
    out: *mut f64,
) -> SbStatus {
    guard(|| {
        let f = &handle(h, "function")?.0;
        let sw = SingularWeight::new(xi, alpha).map_err(lift)?;
        let w = StepWeight::new(beta0, beta1).map_err(lift)?;
        let q = ModulusQuery { r, t, x_grid_size, h_grid_size };
        let v = weighted_modulus(f, &sw, &w, &q).map_err(lift)?;
        write(out, v, "out")
    })
}

/// Runs an experiment from a JSON config and returns the report rendered in
/// the config's format. Release the string with [`sb_string_free`].
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn sb_run_config(config_json: *const c_char, out: *mut *mut c_char) -> SbStatus {
    guard(|| {
        let cfg = ExperimentConfig::from_json(str_arg(config_json, "config_json")?).map_err(lift)?;
        let text = lab::run(&cfg).map_err(lift)?.render(cfg.format);
        let c = CString::new(text).map_err(|_| (SbStatus::Numerical, "report contains NUL".to_string()))?;
        write(out, c.into_raw(), "out")
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
