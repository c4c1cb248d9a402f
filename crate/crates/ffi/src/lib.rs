//! C interface to tensorlab.
//!
//! Every function returns a [`TlStatus`]; on failure a message is available
//! from [`tl_last_error`] on the same thread. Handles are opaque and must be
//! released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tensorlab::intset::IntSet;
use tensorlab::limits::{self, Caps, LimitError, LimitOptions};
use tensorlab::pattern::{PatternError, SearchOptions};
use tensorlab::setlang;
use tensorlab::sumset::{self, SumsetCertificate, SumsetError, SumsetSpec};
use tensorlab::ultrafilter::{check_model, ModelConfig};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TlStatus {
    Ok = 0,
    /// The search finished or ran out of budget without a result.
    NotFound = 1,
    InvalidArgument = 2,
    NullPointer = 3,
    Panic = 4,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TlDensityKind {
    Schnirelmann = 0,
    Asymptotic = 1,
    Banach = 2,
    BanachNested = 3,
}

/// A finite set of integers inside `[0, bound)`.
pub struct TlIntSet(IntSet);

/// A verified sumset certificate.
pub struct TlCertificate(SumsetCertificate);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn fail(status: TlStatus, msg: impl Into<String>) -> TlStatus {
    set_error(msg);
    status
}

/// Runs `body`, turning panics into `TlStatus::Panic`.
fn guard(body: impl FnOnce() -> TlStatus) -> TlStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(s) => {
            if s == TlStatus::Ok {
                set_error("");
            }
            s
        }
        Err(_) => fail(TlStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, TlStatus> {
    if p.is_null() {
        return Err(fail(TlStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(TlStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(TlStatus::NullPointer, concat!(stringify!($p), " is null"));
        })+
    };
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn tl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn tl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a set expression such as `"mod 4: 0,2 | 1..9"` with bound `bound`.
///
/// # Safety
/// `expr` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tl_intset_parse(expr: *const c_char, bound: usize, out: *mut *mut TlIntSet) -> TlStatus {
    guard(|| {
        non_null!(out);
        let text = match str_arg(expr, "expr") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match setlang::parse_set(text, bound) {
            Ok(e) => {
                *out = Box::into_raw(Box::new(TlIntSet(setlang::eval_set(&e))));
                TlStatus::Ok
            }
            Err(e) => fail(TlStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Builds a set from `len` values, each below `bound`.
///
/// # Safety
/// `values` must point to `len` readable values (or be null with `len == 0`).
#[no_mangle]
pub unsafe extern "C" fn tl_intset_from_values(
    values: *const usize,
    len: usize,
    bound: usize,
    out: *mut *mut TlIntSet,
) -> TlStatus {
    guard(|| {
        non_null!(out);
        if values.is_null() && len > 0 {
            return fail(TlStatus::NullPointer, "values is null");
        }
        let slice = if len == 0 { &[][..] } else { std::slice::from_raw_parts(values, len) };
        match IntSet::from_values(bound, slice.iter().copied()) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(TlIntSet(s)));
                TlStatus::Ok
            }
            Err(e) => fail(TlStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// # Safety
/// `set` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tl_intset_free(set: *mut TlIntSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Number of members; 0 for a null handle.
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tl_intset_len(set: *const TlIntSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tl_intset_contains(set: *const TlIntSet, value: usize) -> bool {
    set.as_ref().is_some_and(|s| s.0.contains(value))
}

/// Lower and upper density estimates of the set.
///
/// # Safety
/// `set` must be a live handle; `lower` and `upper` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tl_density(
    set: *const TlIntSet,
    kind: TlDensityKind,
    lower: *mut f64,
    upper: *mut f64,
) -> TlStatus {
    guard(|| {
        non_null!(set, lower, upper);
        let a = &(*set).0;
        let r = match kind {
            TlDensityKind::Schnirelmann => limits::schnirelmann(a),
            TlDensityKind::Asymptotic => limits::asymptotic_density_bounds(a),
            TlDensityKind::Banach => limits::banach_density(a),
            TlDensityKind::BanachNested => limits::banach_nested_tensor_formula(a),
        };
        *lower = r.lower;
        *upper = r.upper;
        TlStatus::Ok
    })
}

/// Searches for `B_1, …, B_k` of length `len` with every sum of `n_s`
/// distinct members of each `B_s` in `set`. `mults` holds `n_1..n_k`.
/// A `node_budget` of 0 uses the default.
///
/// # Safety
/// `set` must be a live handle, `mults` must hold `k` values, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tl_find_sumset(
    set: *const TlIntSet,
    mults: *const usize,
    k: usize,
    len: usize,
    node_budget: u64,
    out: *mut *mut TlCertificate,
) -> TlStatus {
    guard(|| {
        non_null!(set, mults, out);
        let spec = match SumsetSpec::new(std::slice::from_raw_parts(mults, k).to_vec()) {
            Ok(s) => s,
            Err(e) => return fail(TlStatus::InvalidArgument, e.to_string()),
        };
        let mut opts = SearchOptions::default();
        if node_budget > 0 {
            opts.node_budget = node_budget;
        }
        match sumset::find_general(&(*set).0, &spec, len, &opts) {
            Ok(Some(c)) => {
                *out = Box::into_raw(Box::new(TlCertificate(c)));
                TlStatus::Ok
            }
            Ok(None) => fail(TlStatus::NotFound, "no certificate of that length"),
            Err(SumsetError::Pattern(e @ PatternError::BudgetExceeded { .. })) => fail(TlStatus::NotFound, e.to_string()),
            Err(e) => fail(TlStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// # Safety
/// `cert` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tl_certificate_free(cert: *mut TlCertificate) {
    if !cert.is_null() {
        drop(Box::from_raw(cert));
    }
}

/// Number of sets `k` in the certificate; 0 for a null handle.
///
/// # Safety
/// `cert` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tl_certificate_sets(cert: *const TlCertificate) -> usize {
    cert.as_ref().map_or(0, |c| c.0.sets.len())
}

/// Copies the members of set `index` into `buf` (capacity `cap`) and stores
/// the set's length in `written`. Fails if `cap` is too small.
///
/// # Safety
/// `cert` must be a live handle, `buf` must hold `cap` values, `written` writable.
#[no_mangle]
pub unsafe extern "C" fn tl_certificate_members(
    cert: *const TlCertificate,
    index: usize,
    buf: *mut usize,
    cap: usize,
    written: *mut usize,
) -> TlStatus {
    guard(|| {
        non_null!(cert, written);
        let sets = &(*cert).0.sets;
        let Some(s) = sets.get(index) else {
            return fail(TlStatus::InvalidArgument, format!("set index {index} out of range"));
        };
        *written = s.len();
        if s.is_empty() {
            return TlStatus::Ok;
        }
        non_null!(buf);
        if cap < s.len() {
            return fail(TlStatus::InvalidArgument, format!("buffer holds {cap}, need {}", s.len()));
        }
        ptr::copy_nonoverlapping(s.as_ptr(), buf, s.len());
        TlStatus::Ok
    })
}

/// The certificate as JSON; release with [`tl_string_free`].
///
/// # Safety
/// `cert` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tl_certificate_json(cert: *const TlCertificate, out: *mut *mut c_char) -> TlStatus {
    guard(|| {
        non_null!(cert, out);
        let text = serde_json::to_string(&(*cert).0).expect("certificate serializes");
        *out = CString::new(text).expect("JSON has no NUL").into_raw();
        TlStatus::Ok
    })
}

/// Re-checks `cert` against `set` and stores the verdict in `passed`.
///
/// # Safety
/// Both handles must be live; `passed` writable.
#[no_mangle]
pub unsafe extern "C" fn tl_certificate_verify(
    set: *const TlIntSet,
    cert: *const TlCertificate,
    passed: *mut bool,
) -> TlStatus {
    guard(|| {
        non_null!(set, cert, passed);
        match sumset::verify_certificate(&(*set).0, &(*cert).0) {
            Ok(v) => {
                *passed = v.passed;
                TlStatus::Ok
            }
            Err(e) => fail(TlStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn tl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Runs every ultrafilter clause on `I × J` (and `× K` when `k > 0`).
///
/// # Safety
/// `passed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tl_check_model(i: usize, j: usize, k: usize, passed: *mut bool) -> TlStatus {
    guard(|| {
        non_null!(passed);
        match check_model(i, j, (k > 0).then_some(k), &ModelConfig::default()) {
            Ok(r) => {
                *passed = r.passed;
                TlStatus::Ok
            }
            Err(e) => fail(TlStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Estimates the integral of `f` over the real line from iterated Riemann sums.
///
/// # Safety
/// `f` must be safe to call with `user`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tl_integrate(
    f: Option<extern "C" fn(x: f64, user: *mut c_void) -> f64>,
    user: *mut c_void,
    tol: f64,
    n_cap: usize,
    m_cap: usize,
    out: *mut f64,
) -> TlStatus {
    guard(|| {
        non_null!(out);
        let Some(f) = f else {
            return fail(TlStatus::NullPointer, "f is null");
        };
        let opts = LimitOptions {
            samples: Some(6),
            extrapolate: true,
            ..LimitOptions::new(tol, Caps { n: n_cap, m: m_cap })
        };
        match limits::riemann_double(|x| f(x, user), &opts) {
            Ok(l) => {
                *out = l.value;
                TlStatus::Ok
            }
            Err(e @ (LimitError::NoInnerLimit { .. } | LimitError::NoOuterLimit { .. } | LimitError::CapTooSmall { .. })) => {
                fail(TlStatus::NotFound, e.to_string())
            }
            Err(e) => fail(TlStatus::InvalidArgument, e.to_string()),
        }
    })
}
