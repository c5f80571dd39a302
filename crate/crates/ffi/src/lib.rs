//! C ABI over `szasz-core`.
//!
//! Every entry point returns an [`SzStatus`] and writes results through out
//! pointers. On failure, [`sz_last_error_message`] describes the most recent
//! error raised on the calling thread. Panics never cross the boundary; they
//! are reported as [`SzStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use szasz_core::moments::{closed_moment, numeric_moment, MomentOrder};
use szasz_core::{
    catalog, evaluate, BivariateFunction, Error, OperatorKind, OperatorParams, Point2,
    QuadratureSpec, TruncationPolicy,
};

/// Default tail mass left outside each summation window.
pub const SZ_DEFAULT_TAIL_TOL: f64 = 1e-12;
/// Default Gauss-Legendre order for cell averages.
pub const SZ_DEFAULT_QUAD_ORDER: u32 = 8;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SzStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidParams = 3,
    InvalidInput = 4,
    ParseError = 5,
    DomainError = 6,
    TruncationFailure = 7,
    UnknownFunction = 8,
    UnsupportedOrder = 9,
    MissingMetadata = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SzOperator {
    Bivariate = 0,
    Gbs = 1,
    Kantorovich = 2,
    Mfs = 3,
    MfsGbs = 4,
}

fn operator_kind(op: i32) -> Result<OperatorKind, Failure> {
    Ok(match op {
        x if x == SzOperator::Bivariate as i32 => OperatorKind::BivariateSzaszType,
        x if x == SzOperator::Gbs as i32 => OperatorKind::GbsSzaszType,
        x if x == SzOperator::Kantorovich as i32 => OperatorKind::KantorovichSzasz,
        x if x == SzOperator::Mfs as i32 => OperatorKind::MfsClassical,
        x if x == SzOperator::MfsGbs as i32 => OperatorKind::MfsGbs,
        _ => {
            return Err(Failure(
                SzStatus::InvalidInput,
                format!("unknown operator code {op}"),
            ))
        }
    })
}

/// Opaque handle to a bivariate function.
pub struct SzFunction {
    inner: BivariateFunction,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    let c = CString::new(msg).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn status_of(e: &Error) -> SzStatus {
    match e {
        Error::InvalidParams(_) => SzStatus::InvalidParams,
        Error::InvalidInput(_) => SzStatus::InvalidInput,
        Error::TruncationFailure { .. } => SzStatus::TruncationFailure,
        Error::Domain(_) => SzStatus::DomainError,
        Error::Parse(_) => SzStatus::ParseError,
        Error::UnknownFunction(_) => SzStatus::UnknownFunction,
        Error::UnsupportedOrder { .. } => SzStatus::UnsupportedOrder,
        Error::MissingMetadata(_) => SzStatus::MissingMetadata,
    }
}

struct Failure(SzStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

impl From<szasz_core::DomainError> for Failure {
    fn from(e: szasz_core::DomainError) -> Self {
        Error::from(e).into()
    }
}

fn guard<F>(body: F) -> SzStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            clear_last_error();
            SzStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| (*s).to_owned())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            SzStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(SzStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(SzStatus::InvalidUtf8, format!("{what} is not UTF-8: {e}")))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn handle<'a>(f: *const SzFunction) -> Result<&'a SzFunction, Failure> {
    f.as_ref().ok_or_else(|| null("function handle"))
}

fn boxed(inner: BivariateFunction) -> *mut SzFunction {
    Box::into_raw(Box::new(SzFunction { inner }))
}

/// Parse an expression in `x` and `y` into a new handle.
///
/// # Safety
/// `source` must be a NUL-terminated string; `out` must be writable. The
/// handle must be released with [`sz_function_free`].
#[no_mangle]
pub unsafe extern "C" fn sz_function_parse(
    source: *const c_char,
    out: *mut *mut SzFunction,
) -> SzStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let src = read_str(source, "source")?;
        let f = BivariateFunction::parse(src)?;
        write_out(out, boxed(f))
    })
}

/// Look up a catalog function by name into a new handle.
///
/// # Safety
/// As for [`sz_function_parse`].
#[no_mangle]
pub unsafe extern "C" fn sz_function_catalog(
    name: *const c_char,
    out: *mut *mut SzFunction,
) -> SzStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let name = read_str(name, "name")?;
        write_out(out, boxed(catalog(name)?))
    })
}

/// Release a handle. Null is ignored.
///
/// # Safety
/// `f` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sz_function_free(f: *mut SzFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Evaluate the function itself at `(x, y)`.
///
/// # Safety
/// `f` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sz_function_eval(
    f: *const SzFunction,
    x: f64,
    y: f64,
    out: *mut f64,
) -> SzStatus {
    guard(|| {
        let f = handle(f)?;
        let v = f.inner.eval(x, y)?;
        write_out(out, v)
    })
}

/// Evaluate an operator at `(x, y)`; `op` is an `SzOperator` value.
///
/// `a` is ignored by the classical operators and the quadrature order by all
/// but the Kantorovich variant.
///
/// # Safety
/// `f` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sz_operator_eval(
    op: i32,
    f: *const SzFunction,
    m: u32,
    n: u32,
    a: f64,
    x: f64,
    y: f64,
    tail_tol: f64,
    quad_order: u32,
    out: *mut f64,
) -> SzStatus {
    guard(|| {
        let kind = operator_kind(op)?;
        let f = handle(f)?;
        let params = OperatorParams::new(m, n, a)?;
        let point = Point2::new(x, y)?;
        let policy = TruncationPolicy::default().with_tail_tol(tail_tol)?;
        let quad = QuadratureSpec::new(quad_order as usize)?;
        let v = evaluate(kind, &f.inner, &params, point, &policy, quad)?;
        write_out(out, v)
    })
}

/// Closed-form moment `E[t^i s^j]`, or `E[(t-x)^i (s-y)^j]` when `centered` is nonzero.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sz_moment_closed(
    m: u32,
    n: u32,
    a: f64,
    x: f64,
    y: f64,
    i: u32,
    j: u32,
    centered: i32,
    out: *mut f64,
) -> SzStatus {
    guard(|| {
        let params = OperatorParams::new(m, n, a)?;
        let order = MomentOrder {
            i,
            j,
            centered: centered != 0,
        };
        let v = closed_moment(&params, Point2::new(x, y)?, order)?;
        write_out(out, v)
    })
}

/// The same moment by truncated summation.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sz_moment_numeric(
    m: u32,
    n: u32,
    a: f64,
    x: f64,
    y: f64,
    i: u32,
    j: u32,
    centered: i32,
    tail_tol: f64,
    out: *mut f64,
) -> SzStatus {
    guard(|| {
        let params = OperatorParams::new(m, n, a)?;
        let policy = TruncationPolicy::default().with_tail_tol(tail_tol)?;
        let order = MomentOrder {
            i,
            j,
            centered: centered != 0,
        };
        let v = numeric_moment(&params, Point2::new(x, y)?, order, &policy)?;
        write_out(out, v)
    })
}

/// Message of the last failed call on this thread, or null after a success.
///
/// The pointer stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn sz_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sz_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
