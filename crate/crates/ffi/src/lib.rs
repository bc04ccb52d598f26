//! C ABI over `ramanujan-parseval`.
//!
//! Every fallible function returns an [`RpStatus`] and writes its result
//! through an out-pointer. On failure the message is kept per thread and can
//! be read with [`rp_last_error`]. Tables, Mertens prefix sums and coefficient
//! families are opaque handles released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ramanujan_parseval::arith::{format, FunctionTable, MertensValues, SieveConfig};
use ramanujan_parseval::closed_forms::{zeta_real, Route};
use ramanujan_parseval::correlation::{
    correlate_direct, error_bound, optimal_u, predict, PredictionOptions,
};
use ramanujan_parseval::ramanujan::{
    ramanujan_partial_sum, ramanujan_sum, truncated_expansion, CoefficientFamily,
};
use ramanujan_parseval::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RpStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    LimitExceeded = 3,
    Overflow = 4,
    TableTooShort = 5,
    OutOfRange = 6,
    DecayViolation = 7,
    CapExceeded = 8,
    DegenerateFit = 9,
    Format = 10,
    Io = 11,
    Panic = 12,
    Internal = 13,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RpRoute {
    SeriesPhi = 0,
    SeriesShift = 1,
    ClosedSigma = 2,
    EulerPhi = 3,
}

/// Predicted coefficient of `N` in `sum_{n <= N} f(n) g(n + h)`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RpPrediction {
    pub value: f64,
    pub tail_estimate: f64,
    pub route: RpRoute,
}

/// A sieved arithmetic function on `1..=limit`.
pub struct RpTable(FunctionTable);

/// Mertens prefix sums `M(0..=limit)`.
pub struct RpMertens(MertensValues);

/// Ramanujan coefficients of `sigma_s(n)/n^s` or `phi_s(n)/n^s`.
pub struct RpFamily(CoefficientFamily);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(RpStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::LimitExceeded { .. } => RpStatus::LimitExceeded,
            Error::Overflow { .. } => RpStatus::Overflow,
            Error::Domain(_) | Error::InconsistentDerivative { .. } => RpStatus::Domain,
            Error::TableTooShort { .. } => RpStatus::TableTooShort,
            Error::DecayViolation { .. } => RpStatus::DecayViolation,
            Error::CapExceeded { .. } => RpStatus::CapExceeded,
            Error::DegenerateFit(_) | Error::ExactMatch => RpStatus::DegenerateFit,
            Error::Format(_) | Error::Json(_) => RpStatus::Format,
            Error::Io(_) => RpStatus::Io,
            Error::OracleRounding { .. } => RpStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard<F>(f: F) -> RpStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RpStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside ramanujan-parseval".into());
            RpStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(RpStatus::NullPointer, format!("{what} is null"))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn path<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(RpStatus::Domain, "path is not valid UTF-8".into()))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rp_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn rp_clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out_value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rp_ramanujan_sum(r: u64, n: u64, out_value: *mut i64) -> RpStatus {
    guard(|| {
        let o = out(out_value, "out_value")?;
        if r == 0 {
            return Err(Failure(RpStatus::Domain, "r must be at least 1".into()));
        }
        *o = ramanujan_sum(r, n);
        Ok(())
    })
}

/// # Safety
/// `out_value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rp_zeta(z: f64, out_value: *mut f64) -> RpStatus {
    guard(|| {
        *out(out_value, "out_value")? = zeta_real(z)?;
        Ok(())
    })
}

/// # Safety
/// `out_value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rp_optimal_u(n: f64, delta: f64, out_value: *mut f64) -> RpStatus {
    guard(|| {
        *out(out_value, "out_value")? = optimal_u(n, delta)?;
        Ok(())
    })
}

/// # Safety
/// `out_value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rp_error_bound(
    n: f64,
    delta: f64,
    c: f64,
    out_value: *mut f64,
) -> RpStatus {
    guard(|| {
        *out(out_value, "out_value")? = error_bound(n, delta, c)?;
        Ok(())
    })
}

unsafe fn make_table<F>(out_table: *mut *mut RpTable, build: F) -> RpStatus
where
    F: FnOnce(&SieveConfig) -> ramanujan_parseval::Result<FunctionTable>,
{
    guard(|| {
        let o = out(out_table, "out_table")?;
        *o = ptr::null_mut();
        *o = boxed(RpTable(build(&SieveConfig::default())?));
        Ok(())
    })
}

/// `mu(1..=limit)`.
///
/// # Safety
/// `out_table` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rp_table_mobius(limit: usize, out_table: *mut *mut RpTable) -> RpStatus {
    make_table(out_table, |c| c.mobius(limit))
}

/// # Safety
/// `out_table` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rp_table_euler_phi(
    limit: usize,
    out_table: *mut *mut RpTable,
) -> RpStatus {
    make_table(out_table, |c| c.euler_phi(limit))
}

/// # Safety
/// `out_table` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rp_table_divisor_k(
    k: u32,
    limit: usize,
    out_table: *mut *mut RpTable,
) -> RpStatus {
    make_table(out_table, |c| c.divisor_k(k, limit))
}

/// `sigma_s(n) / n^s`.
///
/// # Safety
/// `out_table` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rp_table_sigma_ratio(
    s: f64,
    limit: usize,
    out_table: *mut *mut RpTable,
) -> RpStatus {
    make_table(out_table, |c| c.sigma_ratio(s, limit))
}

/// `phi_s(n) / n^s`.
///
/// # Safety
/// `out_table` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rp_table_phi_ratio(
    s: f64,
    limit: usize,
    out_table: *mut *mut RpTable,
) -> RpStatus {
    make_table(out_table, |c| c.phi_ratio(s, limit))
}

/// Reads a table in the binary table format.
///
/// # Safety
/// `file` must be a NUL-terminated string and `out_table` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rp_table_read(
    file: *const c_char,
    out_table: *mut *mut RpTable,
) -> RpStatus {
    guard(|| {
        let o = out(out_table, "out_table")?;
        *o = ptr::null_mut();
        let f = File::open(path(file)?).map_err(Error::from)?;
        *o = boxed(RpTable(format::read_binary(BufReader::new(f))?));
        Ok(())
    })
}

/// Writes a table in the binary table format.
///
/// # Safety
/// `table` must come from this library and `file` be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rp_table_write(table: *const RpTable, file: *const c_char) -> RpStatus {
    guard(|| {
        let t = handle(table, "table")?;
        let mut w = BufWriter::new(File::create(path(file)?).map_err(Error::from)?);
        format::write_binary(&t.0, &mut w)?;
        w.flush().map_err(Error::from)?;
        Ok(())
    })
}

/// # Safety
/// `table` must come from this library; `out_limit` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rp_table_limit(table: *const RpTable, out_limit: *mut usize) -> RpStatus {
    guard(|| {
        *out(out_limit, "out_limit")? = handle(table, "table")?.0.limit();
        Ok(())
    })
}

/// Value at `n`, `1 <= n <= limit`.
///
/// # Safety
/// `table` must come from this library; `out_value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rp_table_get(
    table: *const RpTable,
    n: usize,
    out_value: *mut f64,
) -> RpStatus {
    guard(|| {
        let t = &handle(table, "table")?.0;
        let o = out(out_value, "out_value")?;
        if n == 0 || n > t.limit() {
            return Err(Failure(
                RpStatus::OutOfRange,
                format!("index {n} outside 1..={}", t.limit()),
            ));
        }
        *o = t.get(n);
        Ok(())
    })
}

/// # Safety
/// `table` must come from this library and not be used afterwards. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn rp_table_free(table: *mut RpTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Compensated `sum_{n <= N} f(n) g(n + h)`.
///
/// # Safety
/// `f` and `g` must come from this library; `out_value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rp_correlate(
    f: *const RpTable,
    g: *const RpTable,
    h: usize,
    n: usize,
    out_value: *mut f64,
) -> RpStatus {
    guard(|| {
        let (f, g) = (handle(f, "f")?, handle(g, "g")?);
        *out(out_value, "out_value")? = correlate_direct(&f.0, &g.0, h, n)?;
        Ok(())
    })
}

/// # Safety
/// `out_mertens` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rp_mertens_new(
    limit: usize,
    out_mertens: *mut *mut RpMertens,
) -> RpStatus {
    guard(|| {
        let o = out(out_mertens, "out_mertens")?;
        *o = ptr::null_mut();
        *o = boxed(RpMertens(SieveConfig::default().mertens(limit)?));
        Ok(())
    })
}

/// `M(n)` for `0 <= n <= limit`.
///
/// # Safety
/// `mertens` must come from this library; `out_value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rp_mertens_get(
    mertens: *const RpMertens,
    n: usize,
    out_value: *mut i64,
) -> RpStatus {
    guard(|| {
        let m = &handle(mertens, "mertens")?.0;
        let o = out(out_value, "out_value")?;
        *o = m.get(n).ok_or_else(|| {
            Failure(
                RpStatus::OutOfRange,
                format!("index {n} outside 0..={}", m.limit()),
            )
        })?;
        Ok(())
    })
}

/// `sum_{r <= x} c_r(h) = sum_{d | h} d M(x / d)`.
///
/// # Safety
/// `mertens` must come from this library; `out_value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rp_ramanujan_partial_sum(
    mertens: *const RpMertens,
    h: u64,
    x: f64,
    out_value: *mut i64,
) -> RpStatus {
    guard(|| {
        let m = handle(mertens, "mertens")?;
        *out(out_value, "out_value")? = ramanujan_partial_sum(h, x, &m.0)?;
        Ok(())
    })
}

/// # Safety
/// `mertens` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rp_mertens_free(mertens: *mut RpMertens) {
    if !mertens.is_null() {
        drop(Box::from_raw(mertens));
    }
}

/// Coefficients of `sigma_s(n) / n^s`.
///
/// # Safety
/// `out_family` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rp_family_sigma(s: f64, out_family: *mut *mut RpFamily) -> RpStatus {
    guard(|| {
        let o = out(out_family, "out_family")?;
        *o = ptr::null_mut();
        *o = boxed(RpFamily(CoefficientFamily::sigma(s)?));
        Ok(())
    })
}

/// Coefficients of `phi_s(n) / n^s`.
///
/// # Safety
/// `out_family` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rp_family_phi(s: f64, out_family: *mut *mut RpFamily) -> RpStatus {
    guard(|| {
        let o = out(out_family, "out_family")?;
        *o = ptr::null_mut();
        *o = boxed(RpFamily(CoefficientFamily::phi(s)?));
        Ok(())
    })
}

/// Coefficient at `r >= 1`.
///
/// # Safety
/// `family` must come from this library; `out_value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rp_family_coefficient(
    family: *const RpFamily,
    r: u64,
    out_value: *mut f64,
) -> RpStatus {
    guard(|| {
        let fam = &handle(family, "family")?.0;
        let o = out(out_value, "out_value")?;
        if r == 0 {
            return Err(Failure(
                RpStatus::OutOfRange,
                "coefficients start at r = 1".into(),
            ));
        }
        *o = fam.eval(r);
        Ok(())
    })
}

/// Declared decay exponent and constant of `|f^(r)| <= C r^-(1 + delta)`.
///
/// # Safety
/// `family` must come from this library; both out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rp_family_decay(
    family: *const RpFamily,
    out_delta: *mut f64,
    out_constant: *mut f64,
) -> RpStatus {
    guard(|| {
        let fam = &handle(family, "family")?.0;
        *out(out_delta, "out_delta")? = fam.delta();
        *out(out_constant, "out_constant")? = fam.tail_constant();
        Ok(())
    })
}

/// `sum_{r <= R} f^(r) c_r(n)` and a bound on what was dropped.
///
/// # Safety
/// `family` must come from this library; both out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rp_expansion(
    family: *const RpFamily,
    n: u64,
    r_max: usize,
    out_value: *mut f64,
    out_tail_bound: *mut f64,
) -> RpStatus {
    guard(|| {
        let fam = &handle(family, "family")?.0;
        let (v, t) = (
            out(out_value, "out_value")?,
            out(out_tail_bound, "out_tail_bound")?,
        );
        let e = truncated_expansion(fam, n, r_max)?;
        *v = e.value;
        *t = e.tail_bound;
        Ok(())
    })
}

/// Main term of the correlation of two families at shift `h`: a closed form
/// for two sigma or two phi families with `h >= 1`, the series over
/// `r <= r_max` otherwise.
///
/// # Safety
/// `f` and `g` must come from this library; `out_prediction` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rp_main_term(
    f: *const RpFamily,
    g: *const RpFamily,
    h: u64,
    r_max: usize,
    prime_limit: u64,
    out_prediction: *mut RpPrediction,
) -> RpStatus {
    guard(|| {
        let (f, g) = (handle(f, "f")?, handle(g, "g")?);
        let o = out(out_prediction, "out_prediction")?;
        let opts = PredictionOptions {
            r_max,
            prime_limit,
            series_only: false,
        };
        let p = predict(&f.0, &g.0, h, &opts)?;
        *o = RpPrediction {
            value: p.value,
            tail_estimate: p.tail_estimate,
            route: match p.route {
                Route::SeriesThm1 => RpRoute::SeriesPhi,
                Route::SeriesThm2 => RpRoute::SeriesShift,
                Route::ClosedCor1 => RpRoute::ClosedSigma,
                Route::EulerCor2 => RpRoute::EulerPhi,
            },
        };
        Ok(())
    })
}

/// # Safety
/// `family` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rp_family_free(family: *mut RpFamily) {
    if !family.is_null() {
        drop(Box::from_raw(family));
    }
}
