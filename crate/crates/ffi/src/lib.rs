//! C ABI for `dirichlet-tails`.
//!
//! Specifications and tail asymptotics are opaque handles created by
//! `dt_*_new` functions and released with the matching `dt_*_free`. Every
//! fallible function returns a [`DtStatus`] and writes results through out
//! pointers; on failure the message is kept per thread and can be read with
//! [`dt_last_error_message`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dirichlet_tails::aggtail::{tail_asymptotic, var_es_asymptotic, AggregateSpec, RawSpec, TailAsymptotic};
use dirichlet_tails::error::Error;
use dirichlet_tails::montecarlo::{conditional_mc_tail, quadrature_tail, McConfig};
use dirichlet_tails::radial::{Family, RadialModel};

/// Status codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DtStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Validation = 3,
    WrongRegime = 4,
    UnsupportedClass = 5,
    Unsupported = 6,
    Numeric = 7,
    InvalidUtf8 = 8,
    Panic = 9,
}

/// Radial families for [`dt_spec_new`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DtFamily {
    /// `param1` = shape, `param2` = rate.
    Gamma = 0,
    /// `F̄(x) = exp(-param2 x^param1)`.
    WeibullTail = 1,
    /// `param1` = a, `param2` = b.
    Beta = 2,
    /// `F̄(x) = exp(param1 - param1/(1-x))` on `[0, 1)`; `param2` is ignored.
    UnitGumbel = 3,
}

/// A validated aggregate specification.
pub struct DtSpec {
    inner: AggregateSpec,
}

/// The tail asymptotic of a specification.
pub struct DtAsymptotic {
    inner: TailAsymptotic,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> DtStatus {
    match e {
        Error::Domain { .. } => DtStatus::Domain,
        Error::Validation(_) => DtStatus::Validation,
        Error::WrongRegime(_) => DtStatus::WrongRegime,
        Error::UnsupportedClass(_) => DtStatus::UnsupportedClass,
        Error::Unsupported(_) => DtStatus::Unsupported,
        Error::Numeric(_) => DtStatus::Numeric,
    }
}

enum Fail {
    Lib(Error),
    Null(&'static str),
    Utf8,
}

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        Fail::Lib(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> DtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DtStatus::Ok,
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Null(name))) => {
            set_error(format!("null pointer: {name}"));
            DtStatus::NullPointer
        }
        Ok(Err(Fail::Utf8)) => {
            set_error("string is not valid UTF-8".into());
            DtStatus::InvalidUtf8
        }
        Err(_) => {
            set_error("internal panic".into());
            DtStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(name))
}

unsafe fn write<T>(p: *mut T, name: &'static str, v: T) -> Result<(), Fail> {
    if p.is_null() {
        return Err(Fail::Null(name));
    }
    p.write(v);
    Ok(())
}

/// Builds a specification from `d` Dirichlet parameters and weights.
///
/// # Safety
/// `alpha` and `lambda` must point to `d` readable doubles; `out` must be
/// writable. On success `*out` owns a handle for [`dt_spec_free`].
#[no_mangle]
pub unsafe extern "C" fn dt_spec_new(
    alpha: *const f64,
    lambda: *const f64,
    d: usize,
    p: f64,
    family: DtFamily,
    param1: f64,
    param2: f64,
    out: *mut *mut DtSpec,
) -> DtStatus {
    guard(|| {
        if alpha.is_null() {
            return Err(Fail::Null("alpha"));
        }
        if lambda.is_null() {
            return Err(Fail::Null("lambda"));
        }
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let fam = match family {
            DtFamily::Gamma => Family::Gamma { shape: param1, rate: param2 },
            DtFamily::WeibullTail => Family::WeibullTail { index: param1, scale: param2 },
            DtFamily::Beta => Family::Beta { a: param1, b: param2 },
            DtFamily::UnitGumbel => Family::UnitGumbel { kappa: param1 },
        };
        let raw = RawSpec {
            alpha: std::slice::from_raw_parts(alpha, d).to_vec(),
            lambda: std::slice::from_raw_parts(lambda, d).to_vec(),
            p,
            radial: RadialModel::new(fam)?,
            multiplicity_tol: 0.0,
        };
        let spec = AggregateSpec::try_from(raw)?;
        write(out, "out", Box::into_raw(Box::new(DtSpec { inner: spec })))
    })
}

/// Builds a specification from its JSON form
/// `{"alpha": [...], "lambda": [...], "p": x, "radial": {...}}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dt_spec_from_json(json: *const c_char, out: *mut *mut DtSpec) -> DtStatus {
    guard(|| {
        if json.is_null() {
            return Err(Fail::Null("json"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|_| Fail::Utf8)?;
        let spec: AggregateSpec = serde_json::from_str(text).map_err(|e| {
            Error::Validation(format!("spec line {} column {}: {e}", e.line(), e.column()))
        })?;
        write(out, "out", Box::into_raw(Box::new(DtSpec { inner: spec })))
    })
}

/// Releases a specification; null is ignored.
///
/// # Safety
/// `spec` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dt_spec_free(spec: *mut DtSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Number of components.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dt_spec_dimension(spec: *const DtSpec, out: *mut usize) -> DtStatus {
    guard(|| write(out, "out", deref(spec, "spec")?.inner.d()))
}

/// The tail asymptotic of the regime that applies to `spec`.
///
/// # Safety
/// Pointers must be valid. On success `*out` owns a handle for
/// [`dt_asymptotic_free`].
#[no_mangle]
pub unsafe extern "C" fn dt_asymptotic_new(spec: *const DtSpec, out: *mut *mut DtAsymptotic) -> DtStatus {
    guard(|| {
        let asym = tail_asymptotic(&deref(spec, "spec")?.inner)?;
        write(out, "out", Box::into_raw(Box::new(DtAsymptotic { inner: asym })))
    })
}

/// Releases an asymptotic; null is ignored.
///
/// # Safety
/// `asym` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dt_asymptotic_free(asym: *mut DtAsymptotic) {
    if !asym.is_null() {
        drop(Box::from_raw(asym));
    }
}

/// `ln K` and `ρ`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dt_asymptotic_params(
    asym: *const DtAsymptotic,
    ln_k: *mut f64,
    rho: *mut f64,
) -> DtStatus {
    guard(|| {
        let a = &deref(asym, "asym")?.inner;
        write(ln_k, "ln_k", a.ln_k)?;
        write(rho, "rho", a.rho)
    })
}

/// Predicted `ln P(S_p > t)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dt_asymptotic_log_tail(asym: *const DtAsymptotic, t: f64, out: *mut f64) -> DtStatus {
    guard(|| {
        let v = deref(asym, "asym")?.inner.evaluate(t)?.ln();
        write(out, "out", v)
    })
}

/// Threshold at which the radial base variable has `ln F̄ = ln_depth`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dt_asymptotic_threshold_at_depth(
    asym: *const DtAsymptotic,
    ln_depth: f64,
    out: *mut f64,
) -> DtStatus {
    guard(|| {
        let v = deref(asym, "asym")?.inner.threshold_at_depth(ln_depth)?;
        write(out, "out", v)
    })
}

/// Threshold where the predicted log tail equals `ln_prob`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dt_asymptotic_invert(asym: *const DtAsymptotic, ln_prob: f64, out: *mut f64) -> DtStatus {
    guard(|| {
        let v = deref(asym, "asym")?.inner.invert(ln_prob)?;
        write(out, "out", v)
    })
}

/// Asymptotic VaR and mean excess at level `b`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dt_var_es(
    spec: *const DtSpec,
    b: f64,
    var: *mut f64,
    es_minus_var: *mut f64,
) -> DtStatus {
    guard(|| {
        let r = var_es_asymptotic(&deref(spec, "spec")?.inner, b)?;
        write(var, "var", r.var)?;
        write(es_minus_var, "es_minus_var", r.es_minus_var)
    })
}

/// Conditional Monte Carlo estimate of `ln P(S_p > t)` and the log of its
/// standard error.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dt_conditional_mc(
    spec: *const DtSpec,
    t: f64,
    n: u64,
    seed: u64,
    workers: usize,
    log_p: *mut f64,
    log_stderr: *mut f64,
) -> DtStatus {
    guard(|| {
        let cfg = McConfig::new(n, seed).with_workers(workers.max(1));
        let e = conditional_mc_tail(&deref(spec, "spec")?.inner, t, &cfg)?;
        write(log_p, "log_p", e.log_p_hat)?;
        write(log_stderr, "log_stderr", e.log_stderr)
    })
}

/// Quadrature value of `ln P(S_p > t)` for up to three components.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dt_quadrature_log_tail(spec: *const DtSpec, t: f64, out: *mut f64) -> DtStatus {
    guard(|| {
        let e = quadrature_tail(&deref(spec, "spec")?.inner, t)?;
        write(out, "out", e.log_p_hat)
    })
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`) and returns the full message length.
/// With a null `buf` only the length is returned.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn dt_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn dt_status_name(status: DtStatus) -> *const c_char {
    let s: &'static CStr = match status {
        DtStatus::Ok => c"ok",
        DtStatus::NullPointer => c"null pointer",
        DtStatus::Domain => c"domain error",
        DtStatus::Validation => c"validation error",
        DtStatus::WrongRegime => c"wrong regime",
        DtStatus::UnsupportedClass => c"unsupported max-domain class",
        DtStatus::Unsupported => c"unsupported",
        DtStatus::Numeric => c"numeric failure",
        DtStatus::InvalidUtf8 => c"invalid UTF-8",
        DtStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}
