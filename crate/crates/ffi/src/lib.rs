//! C ABI over `bscrit`.
//!
//! Every entry point returns a status code. Handles are opaque and owned by the
//! caller, who releases them with the matching `*_free`. Strings handed out by
//! the library are released with [`bscrit_string_free`]. The message of the
//! most recent failure on the calling thread is available from
//! [`bscrit_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bscrit::derivation::{derive_necessity, Conclusion, DerivationTrace};
use bscrit::exponents::{m0, m0_tilde, parse_exponent, ExponentPoint, ExponentTriple, Rational};
use bscrit::harness::{run_blowup_experiment, run_lemma_suite, BlowupVerdict, ExperimentConfig, ScalingReport};

pub const BSCRIT_OK: i32 = 0;
/// The call ran but a check failed, or a derivation was inconclusive.
pub const BSCRIT_CHECK_FAILED: i32 = 1;
pub const BSCRIT_CONTRADICTION: i32 = 2;
/// Invalid configuration, domain error or failed numerical certificate.
pub const BSCRIT_CONFIG: i32 = 3;
pub const BSCRIT_NULL_POINTER: i32 = 4;
pub const BSCRIT_PANIC: i32 = 5;
pub const BSCRIT_UTF8: i32 = 6;

pub const BSCRIT_VERDICT_NONE: i32 = -1;
pub const BSCRIT_VERDICT_UNBOUNDED_WITNESS: i32 = 0;
pub const BSCRIT_VERDICT_CONSISTENT: i32 = 1;

pub const BSCRIT_CONCLUSION_FORCES_EQUALITY: i32 = 0;
pub const BSCRIT_CONCLUSION_CONTRADICTION: i32 = 1;
pub const BSCRIT_CONCLUSION_INCONCLUSIVE: i32 = 2;

/// Experiment configuration.
pub struct BscritConfig(ExperimentConfig);

/// Result of a blow-up run or a lemma suite.
pub struct BscritReport(ScalingReport);

/// Necessity derivation trace.
pub struct BscritTrace(DerivationTrace);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Fail(i32);

impl From<bscrit::Error> for Fail {
    fn from(e: bscrit::Error) -> Self {
        set_error(e.to_string());
        Fail(BSCRIT_CONFIG)
    }
}

fn null(what: &str) -> Fail {
    set_error(format!("{what} is null"));
    Fail(BSCRIT_NULL_POINTER)
}

fn guard(f: impl FnOnce() -> Result<i32, Fail>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(code)) => code,
        Ok(Err(Fail(code))) => code,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            BSCRIT_PANIC
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| {
        set_error(format!("{what}: {e}"));
        Fail(BSCRIT_UTF8)
    })
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

fn need<T>(out: *mut T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        Err(null(what))
    } else {
        Ok(())
    }
}

unsafe fn write<T>(out: *mut T, v: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

unsafe fn triple(p1: *const c_char, p2: *const c_char, p: *const c_char) -> Result<ExponentTriple, Fail> {
    Ok(ExponentTriple::new(
        parse_exponent(text(p1, "p1")?)?,
        parse_exponent(text(p2, "p2")?)?,
        parse_exponent(text(p, "p")?)?,
    )?)
}

/// Message of the last failure on this thread, or null. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn bscrit_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bscrit_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Critical order `m_0` (or `m~_0` when `tilde` is nonzero) at `(1/p1, 1/p2)`, as `num/den`.
///
/// # Safety
/// String arguments must be null-terminated; output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn bscrit_critical_order(
    p1: *const c_char,
    p2: *const c_char,
    n: u32,
    tilde: i32,
    out_num: *mut i64,
    out_den: *mut i64,
) -> i32 {
    guard(|| {
        need(out_num, "out_num")?;
        need(out_den, "out_den")?;
        let pt = ExponentPoint::new(parse_exponent(text(p1, "p1")?)?, parse_exponent(text(p2, "p2")?)?)?;
        let v = if tilde != 0 { m0_tilde(pt, n) } else { m0(pt, n) };
        write(out_num, v.numer(), "out_num")?;
        write(out_den, v.denom(), "out_den")?;
        Ok(BSCRIT_OK)
    })
}

/// Parses a `key = value` configuration.
///
/// # Safety
/// `text` must be null-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bscrit_config_parse(src: *const c_char, out: *mut *mut BscritConfig) -> i32 {
    guard(|| {
        need(out, "out")?;
        let cfg = ExperimentConfig::parse(text(src, "text")?)?;
        write(out, Box::into_raw(Box::new(BscritConfig(cfg))), "out")?;
        Ok(BSCRIT_OK)
    })
}

/// Default configuration at a triple; exponents like `"4/3"` or `"inf"`, `rho` like `"1/2"`.
///
/// # Safety
/// String arguments must be null-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bscrit_config_for_triple(
    p1: *const c_char,
    p2: *const c_char,
    p: *const c_char,
    rho: *const c_char,
    out: *mut *mut BscritConfig,
) -> i32 {
    guard(|| {
        need(out, "out")?;
        let rho: Rational = text(rho, "rho")?.parse()?;
        let cfg = ExperimentConfig::for_triple(triple(p1, p2, p)?, rho);
        cfg.validate()?;
        write(out, Box::into_raw(Box::new(BscritConfig(cfg))), "out")?;
        Ok(BSCRIT_OK)
    })
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bscrit_config_set_j_range(cfg: *mut BscritConfig, j_min: u32, j_max: u32) -> i32 {
    guard(|| {
        let cfg = cfg.as_mut().ok_or_else(|| null("cfg"))?;
        let mut next = cfg.0.clone();
        next.j_min = j_min;
        next.j_max = j_max;
        next.validate()?;
        cfg.0 = next;
        Ok(BSCRIT_OK)
    })
}

/// The configuration in `key = value` form.
///
/// # Safety
/// `cfg` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bscrit_config_to_text(cfg: *const BscritConfig, out: *mut *mut c_char) -> i32 {
    guard(|| {
        let s = handle(cfg, "cfg")?.0.to_text();
        write(out, owned_string(s), "out")?;
        Ok(BSCRIT_OK)
    })
}

/// # Safety
/// `cfg` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bscrit_config_free(cfg: *mut BscritConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

unsafe fn run(
    cfg: *const BscritConfig,
    out: *mut *mut BscritReport,
    f: fn(&ExperimentConfig) -> bscrit::Result<ScalingReport>,
) -> i32 {
    guard(|| {
        need(out, "out")?;
        let cfg = handle(cfg, "cfg")?;
        let report = f(&cfg.0)?;
        let code = if report.passed() {
            BSCRIT_OK
        } else {
            BSCRIT_CHECK_FAILED
        };
        out.write(Box::into_raw(Box::new(BscritReport(report))));
        Ok(code)
    })
}

/// Runs the blow-up experiment. On `BSCRIT_OK` or `BSCRIT_CHECK_FAILED` a report is written to `out`.
///
/// # Safety
/// `cfg` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bscrit_run_blowup(cfg: *const BscritConfig, out: *mut *mut BscritReport) -> i32 {
    run(cfg, out, run_blowup_experiment)
}

/// Runs the full check suite. On `BSCRIT_OK` or `BSCRIT_CHECK_FAILED` a report is written to `out`.
///
/// # Safety
/// `cfg` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bscrit_run_lemma_suite(cfg: *const BscritConfig, out: *mut *mut BscritReport) -> i32 {
    run(cfg, out, run_lemma_suite)
}

/// One of the `BSCRIT_VERDICT_*` values.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bscrit_report_verdict(report: *const BscritReport, out: *mut i32) -> i32 {
    guard(|| {
        let v = match handle(report, "report")?.0.verdict {
            None => BSCRIT_VERDICT_NONE,
            Some(BlowupVerdict::UnboundedWitness) => BSCRIT_VERDICT_UNBOUNDED_WITNESS,
            Some(BlowupVerdict::Consistent) => BSCRIT_VERDICT_CONSISTENT,
        };
        write(out, v, "out")?;
        Ok(BSCRIT_OK)
    })
}

/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bscrit_report_check_count(report: *const BscritReport, out: *mut usize) -> i32 {
    guard(|| {
        write(out, handle(report, "report")?.0.checks.len(), "out")?;
        Ok(BSCRIT_OK)
    })
}

/// Fitted and predicted values of check `index`; `out_pass` receives 1 or 0.
///
/// # Safety
/// `report` must be a live handle; output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn bscrit_report_check(
    report: *const BscritReport,
    index: usize,
    out_fitted: *mut f64,
    out_predicted: *mut f64,
    out_pass: *mut i32,
) -> i32 {
    guard(|| {
        let r = handle(report, "report")?;
        let c = r.0.checks.get(index).ok_or_else(|| {
            set_error(format!("check index {index} out of range ({} checks)", r.0.checks.len()));
            Fail(BSCRIT_CONFIG)
        })?;
        write(out_fitted, c.fitted, "out_fitted")?;
        write(out_predicted, c.predicted, "out_predicted")?;
        write(out_pass, i32::from(c.pass), "out_pass")?;
        Ok(BSCRIT_OK)
    })
}

/// The report as JSON.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bscrit_report_json(report: *const BscritReport, out: *mut *mut c_char) -> i32 {
    guard(|| {
        let s = handle(report, "report")?.0.to_json()?;
        write(out, owned_string(s), "out")?;
        Ok(BSCRIT_OK)
    })
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bscrit_report_free(report: *mut BscritReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Derives the necessity constraint. Returns `BSCRIT_OK` for a forced equality,
/// `BSCRIT_CONTRADICTION` or `BSCRIT_CHECK_FAILED` (inconclusive) otherwise; the trace
/// is written to `out` in all three cases.
///
/// # Safety
/// String arguments must be null-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bscrit_derive(
    p1: *const c_char,
    p2: *const c_char,
    p: *const c_char,
    rho: *const c_char,
    n: u32,
    out: *mut *mut BscritTrace,
) -> i32 {
    guard(|| {
        need(out, "out")?;
        let rho: Rational = text(rho, "rho")?.parse()?;
        let t = triple(p1, p2, p)?;
        let trace = derive_necessity(t, rho, n)?;
        let code = match trace.conclusion {
            Conclusion::ForcesEquality => BSCRIT_OK,
            Conclusion::Contradiction => BSCRIT_CONTRADICTION,
            Conclusion::Inconclusive => BSCRIT_CHECK_FAILED,
        };
        out.write(Box::into_raw(Box::new(BscritTrace(trace))));
        Ok(code)
    })
}

/// One of the `BSCRIT_CONCLUSION_*` values.
///
/// # Safety
/// `trace` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bscrit_trace_conclusion(trace: *const BscritTrace, out: *mut i32) -> i32 {
    guard(|| {
        let c = match handle(trace, "trace")?.0.conclusion {
            Conclusion::ForcesEquality => BSCRIT_CONCLUSION_FORCES_EQUALITY,
            Conclusion::Contradiction => BSCRIT_CONCLUSION_CONTRADICTION,
            Conclusion::Inconclusive => BSCRIT_CONCLUSION_INCONCLUSIVE,
        };
        write(out, c, "out")?;
        Ok(BSCRIT_OK)
    })
}

/// # Safety
/// `trace` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bscrit_trace_step_count(trace: *const BscritTrace, out: *mut usize) -> i32 {
    guard(|| {
        write(out, handle(trace, "trace")?.0.steps.len(), "out")?;
        Ok(BSCRIT_OK)
    })
}

/// Re-applies every step; `BSCRIT_OK` when the trace replays exactly.
///
/// # Safety
/// `trace` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bscrit_trace_replay(trace: *const BscritTrace) -> i32 {
    guard(|| {
        handle(trace, "trace")?.0.replay()?;
        Ok(BSCRIT_OK)
    })
}

/// The trace, one step per line.
///
/// # Safety
/// `trace` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bscrit_trace_text(trace: *const BscritTrace, out: *mut *mut c_char) -> i32 {
    guard(|| {
        let s = handle(trace, "trace")?.0.to_text();
        write(out, owned_string(s), "out")?;
        Ok(BSCRIT_OK)
    })
}

/// # Safety
/// `trace` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bscrit_trace_free(trace: *mut BscritTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}
