//! C ABI for the trilattice library.
//!
//! Every fallible function returns a `TlStatus` and writes results through
//! out-pointers. On failure a message is available from `tl_last_error` on
//! the calling thread. Handles are opaque and must be released with their
//! matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use trilattice::certifier::{paper_lipschitz, threshold_y, THRESHOLD_ZETA_TOL};
use trilattice::energy::{self, quotient_q, ExponentPair, LJParams};
use trilattice::lattice::{self, DomainPoint};
use trilattice::report::{self, CliError, CommandName, Mode, Payload, ReportEnvelope, RunConfig};
use trilattice::zeta::{self, TruncationSpec};
use trilattice::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TlStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    /// The quotient is undetermined this close to the triangular lattice.
    NearTriangular = 3,
    ToleranceUnreachable = 4,
    Internal = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TlMode {
    Paper = 0,
    Adaptive = 1,
}

/// Certification settings. Create with `tl_certifier_new`.
pub struct TlCertifier {
    config: RunConfig,
    workers: Option<usize>,
}

/// Finished certification report. Produced by `tl_certifier_run`.
pub struct TlReport {
    envelope: ReportEnvelope,
    json: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> TlStatus {
    match err {
        Error::NearTriangular { .. } => TlStatus::NearTriangular,
        Error::ToleranceUnreachable { .. } => TlStatus::ToleranceUnreachable,
        Error::Internal(_) => TlStatus::Internal,
        _ => TlStatus::InvalidArgument,
    }
}

enum Failure {
    Lib(Error),
    Cli(CliError),
    Null(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<CliError> for Failure {
    fn from(e: CliError) -> Self {
        Failure::Cli(e)
    }
}

/// Runs `f`, converting errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TlStatus::Ok,
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Cli(e))) => {
            set_error(e.to_string());
            match e {
                CliError::Computation(inner) => status_of(&inner),
                CliError::Config(_) => TlStatus::InvalidArgument,
                CliError::Io(_) => TlStatus::Internal,
            }
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer passed for {what}"));
            TlStatus::NullPointer
        }
        Err(_) => {
            set_error("internal panic");
            TlStatus::Panic
        }
    }
}

/// # Safety
/// `p` must be null or valid for writes.
unsafe fn write<T>(p: *mut T, v: T, what: &'static str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    p.write(v);
    Ok(())
}

/// Message of the last failure on this thread, or an empty string. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// `Q_L(m, n) = (m + x n)^2 / y + y n^2`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tl_quadratic_form(x: f64, y: f64, m: i64, n: i64, out: *mut f64) -> TlStatus {
    guard(|| {
        let p = DomainPoint::new(x, y)?;
        write(out, lattice::quadratic_form(&p, m, n), "out")
    })
}

/// Epstein zeta value of the unit-covolume lattice `(x, y)` with radius at most `tol`.
///
/// # Safety
/// `mid` and `rad` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tl_epstein_certified(
    x: f64,
    y: f64,
    s: f64,
    tol: f64,
    mid: *mut f64,
    rad: *mut f64,
) -> TlStatus {
    guard(|| {
        let v = zeta::epstein_certified(&DomainPoint::new(x, y)?, s, tol)?;
        write(mid, v.mid, "mid")?;
        write(rad, v.rad, "rad")
    })
}

/// Riemann zeta value `zeta(s)`, `s > 1`, with radius at most `tol`.
///
/// # Safety
/// `mid` and `rad` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tl_riemann_certified(s: f64, tol: f64, mid: *mut f64, rad: *mut f64) -> TlStatus {
    guard(|| {
        let v = zeta::riemann_certified(s, tol)?;
        write(mid, v.mid, "mid")?;
        write(rad, v.rad, "rad")
    })
}

/// Threshold height above which the quotient exceeds `alpha / beta`:
/// `y_bar` rounded up to `k` decimals, and the unrounded upper bound `y_exact`.
///
/// # Safety
/// `y_bar` and `y_exact` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tl_threshold(alpha: f64, beta: f64, k: u32, y_bar: *mut f64, y_exact: *mut f64) -> TlStatus {
    guard(|| {
        let t = threshold_y(&ExponentPair::new(alpha, beta)?, k, THRESHOLD_ZETA_TOL)?;
        write(y_bar, t.y_bar, "y_bar")?;
        write(y_exact, t.y_exact, "y_exact")
    })
}

/// Literal global Lipschitz formula at height `y_bar` and truncation `n`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tl_global_lipschitz(alpha: f64, beta: f64, y_bar: f64, n: u32, out: *mut f64) -> TlStatus {
    guard(|| {
        let m = paper_lipschitz(&ExponentPair::new(alpha, beta)?, y_bar, TruncationSpec::new(n)?)?;
        write(out, m, "out")
    })
}

/// Enclosure of `(zeta_L(alpha) - zeta_A2(alpha)) / (zeta_L(beta) - zeta_A2(beta))`.
///
/// # Safety
/// `mid` and `rad` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tl_quotient(
    x: f64,
    y: f64,
    alpha: f64,
    beta: f64,
    tol: f64,
    mid: *mut f64,
    rad: *mut f64,
) -> TlStatus {
    guard(|| {
        let q = quotient_q(&DomainPoint::new(x, y)?, &ExponentPair::new(alpha, beta)?, tol)?;
        write(mid, q.mid, "mid")?;
        write(rad, q.rad, "rad")
    })
}

fn params(alpha: f64, beta: f64, a: f64, b: f64) -> Result<LJParams, Error> {
    LJParams::new(ExponentPair::new(alpha, beta)?, a, b)
}

/// Energy `a V^{-alpha/2} zeta_L(alpha) - b V^{-beta/2} zeta_L(beta)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tl_lj_energy(
    x: f64,
    y: f64,
    volume: f64,
    alpha: f64,
    beta: f64,
    a: f64,
    b: f64,
    tol: f64,
    out: *mut f64,
) -> TlStatus {
    guard(|| {
        let e = energy::lj_energy(&DomainPoint::new(x, y)?, volume, &params(alpha, beta, a, b)?, tol)?;
        write(out, e.value, "out")
    })
}

/// Covolume minimising the energy of the shape `(x, y)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tl_optimal_volume(
    x: f64,
    y: f64,
    alpha: f64,
    beta: f64,
    a: f64,
    b: f64,
    tol: f64,
    out: *mut f64,
) -> TlStatus {
    guard(|| {
        let v = energy::optimal_volume(&DomainPoint::new(x, y)?, &params(alpha, beta, a, b)?, tol)?;
        write(out, v, "out")
    })
}

/// Energy of the shape `(x, y)` at its optimal covolume.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tl_min_dilated_energy(
    x: f64,
    y: f64,
    alpha: f64,
    beta: f64,
    a: f64,
    b: f64,
    tol: f64,
    out: *mut f64,
) -> TlStatus {
    guard(|| {
        let v = energy::min_dilated_energy(&DomainPoint::new(x, y)?, &params(alpha, beta, a, b)?, tol)?;
        write(out, v, "out")
    })
}

/// New certifier for `(alpha, beta)` in adaptive mode with default settings.
///
/// # Safety
/// `out` must be valid for writes. The handle written there must be released
/// with `tl_certifier_free`.
#[no_mangle]
pub unsafe extern "C" fn tl_certifier_new(alpha: f64, beta: f64, out: *mut *mut TlCertifier) -> TlStatus {
    guard(|| {
        ExponentPair::new(alpha, beta)?;
        let mut config = RunConfig::new(CommandName::Certify);
        config.alpha = Some(alpha);
        config.beta = Some(beta);
        config.mode = Some(Mode::Adaptive);
        let handle = Box::into_raw(Box::new(TlCertifier { config, workers: None }));
        if out.is_null() {
            drop(Box::from_raw(handle));
            return Err(Failure::Null("out"));
        }
        out.write(handle);
        Ok(())
    })
}

/// # Safety
/// `c` must be null or a live handle from `tl_certifier_new`.
unsafe fn with_certifier(c: *mut TlCertifier, f: impl FnOnce(&mut TlCertifier)) -> TlStatus {
    guard(|| {
        let c = c.as_mut().ok_or(Failure::Null("certifier"))?;
        f(c);
        Ok(())
    })
}

/// # Safety
/// `c` must be a live handle from `tl_certifier_new`.
#[no_mangle]
pub unsafe extern "C" fn tl_certifier_set_mode(c: *mut TlCertifier, mode: TlMode) -> TlStatus {
    with_certifier(c, |c| {
        c.config.mode = Some(match mode {
            TlMode::Paper => Mode::Paper,
            TlMode::Adaptive => Mode::Adaptive,
        })
    })
}

/// Grid spacing; must be a decimal fraction dividing 1/2.
///
/// # Safety
/// `c` must be a live handle from `tl_certifier_new`.
#[no_mangle]
pub unsafe extern "C" fn tl_certifier_set_delta(c: *mut TlCertifier, delta: f64) -> TlStatus {
    with_certifier(c, |c| c.config.delta = Some(delta))
}

/// Fixed truncation order for paper mode.
///
/// # Safety
/// `c` must be a live handle from `tl_certifier_new`.
#[no_mangle]
pub unsafe extern "C" fn tl_certifier_set_truncation(c: *mut TlCertifier, n: u32) -> TlStatus {
    with_certifier(c, |c| c.config.n = Some(n))
}

/// Global Lipschitz constant for paper mode.
///
/// # Safety
/// `c` must be a live handle from `tl_certifier_new`.
#[no_mangle]
pub unsafe extern "C" fn tl_certifier_set_lipschitz(c: *mut TlCertifier, m: f64) -> TlStatus {
    with_certifier(c, |c| c.config.m = Some(m))
}

/// Zeta tolerance for adaptive mode.
///
/// # Safety
/// `c` must be a live handle from `tl_certifier_new`.
#[no_mangle]
pub unsafe extern "C" fn tl_certifier_set_tolerance(c: *mut TlCertifier, tol: f64) -> TlStatus {
    with_certifier(c, |c| c.config.tol = Some(tol))
}

/// Radius of the sampled ball around the triangular lattice.
///
/// # Safety
/// `c` must be a live handle from `tl_certifier_new`.
#[no_mangle]
pub unsafe extern "C" fn tl_certifier_set_epsilon(c: *mut TlCertifier, epsilon: f64) -> TlStatus {
    with_certifier(c, |c| c.config.epsilon = Some(epsilon))
}

/// # Safety
/// `c` must be a live handle from `tl_certifier_new`.
#[no_mangle]
pub unsafe extern "C" fn tl_certifier_set_max_depth(c: *mut TlCertifier, depth: u32) -> TlStatus {
    with_certifier(c, |c| c.config.max_depth = Some(depth))
}

/// Replaces `alpha / beta` as the bound the quotient must exceed.
///
/// # Safety
/// `c` must be a live handle from `tl_certifier_new`.
#[no_mangle]
pub unsafe extern "C" fn tl_certifier_set_margin(c: *mut TlCertifier, margin: f64) -> TlStatus {
    with_certifier(c, |c| c.config.margin = Some(margin))
}

/// Worker threads; 0 restores the default (environment, then machine parallelism).
///
/// # Safety
/// `c` must be a live handle from `tl_certifier_new`.
#[no_mangle]
pub unsafe extern "C" fn tl_certifier_set_workers(c: *mut TlCertifier, workers: u32) -> TlStatus {
    with_certifier(c, |c| c.workers = (workers > 0).then_some(workers as usize))
}

/// Runs the certification. A false verdict is not an error: inspect it with
/// `tl_report_verdict`.
///
/// # Safety
/// `c` must be a live handle from `tl_certifier_new` and `out` valid for
/// writes. The report must be released with `tl_report_free`.
#[no_mangle]
pub unsafe extern "C" fn tl_certifier_run(c: *const TlCertifier, out: *mut *mut TlReport) -> TlStatus {
    guard(|| {
        let c = c.as_ref().ok_or(Failure::Null("certifier"))?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let workers = report::resolve_workers(c.workers)?;
        report::validate(&c.config)?;
        let output = report::run(&c.config, workers)?;
        let json = serde_json::to_string_pretty(&output.envelope)
            .map_err(|e| Failure::Lib(Error::Internal(e.to_string())))?;
        let json = CString::new(json).map_err(|e| Failure::Lib(Error::Internal(e.to_string())))?;
        out.write(Box::into_raw(Box::new(TlReport { envelope: output.envelope, json })));
        Ok(())
    })
}

/// # Safety
/// `c` must be null or a handle from `tl_certifier_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tl_certifier_free(c: *mut TlCertifier) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

fn certification(r: &TlReport) -> Result<&trilattice::certifier::CertificationReport, Failure> {
    match &r.envelope.result {
        Payload::Certification(c) => Ok(c),
        _ => Err(Failure::Lib(Error::Internal("report holds no certification".into()))),
    }
}

/// # Safety
/// `r` must be a live report and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tl_report_verdict(r: *const TlReport, out: *mut bool) -> TlStatus {
    guard(|| {
        let r = r.as_ref().ok_or(Failure::Null("report"))?;
        write(out, certification(r)?.verdict, "out")
    })
}

/// Smallest quotient enclosure recorded by the run, at `(x, y)`.
///
/// # Safety
/// `r` must be a live report; the out-pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tl_report_min_q(
    r: *const TlReport,
    mid: *mut f64,
    rad: *mut f64,
    x: *mut f64,
    y: *mut f64,
) -> TlStatus {
    guard(|| {
        let r = r.as_ref().ok_or(Failure::Null("report"))?;
        let c = certification(r)?;
        let (q, at) = c
            .min_q
            .zip(c.argmin)
            .ok_or_else(|| Failure::Lib(Error::Internal("no quotient was evaluated".into())))?;
        write(mid, q.mid, "mid")?;
        write(rad, q.rad, "rad")?;
        write(x, at[0], "x")?;
        write(y, at[1], "y")
    })
}

/// JSON report, owned by `r` and valid until `tl_report_free`.
///
/// # Safety
/// `r` must be null or a live report.
#[no_mangle]
pub unsafe extern "C" fn tl_report_json(r: *const TlReport) -> *const c_char {
    match r.as_ref() {
        Some(r) => r.json.as_ptr(),
        None => {
            set_error("null pointer passed for report");
            ptr::null()
        }
    }
}

/// # Safety
/// `r` must be null or a report from `tl_certifier_run` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tl_report_free(r: *mut TlReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}
