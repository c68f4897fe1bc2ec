//! C ABI over the `delayed-oco` harness.
//!
//! Every fallible function returns a [`DocoStatus`]. On failure the message is
//! kept per thread and can be read with [`doco_last_error`]. Handles are
//! opaque and must be released with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use delayed_oco::delay_sim::ScheduleSpec;
use delayed_oco::estimators::{multipoint_estimate, MultipointFeedback};
use delayed_oco::geometry::{BallDomain, ConvexSet, DecisionVector};
use delayed_oco::harness::{run_experiment, DeltaRule, ExperimentConfig, RegretLedger};
use delayed_oco::learners::Algorithm;
use delayed_oco::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DocoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Parameter = 3,
    Schedule = 4,
    Protocol = 5,
    Feedback = 6,
    Numerical = 7,
    Domain = 8,
    StateCorruption = 9,
    Io = 10,
    Parse = 11,
    OutOfRange = 12,
    Panic = 13,
}

/// One ledger row.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DocoRow {
    pub t: usize,
    pub loss: f64,
    pub cum_loss: f64,
    pub cum_regret: f64,
}

/// Opaque experiment configuration.
pub struct DocoConfig {
    inner: ExperimentConfig,
}

/// Opaque regret ledger produced by [`doco_run`].
pub struct DocoLedger {
    inner: RegretLedger,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> DocoStatus {
    match err {
        Error::InvalidInput(_) => DocoStatus::InvalidInput,
        Error::Parameter(_) => DocoStatus::Parameter,
        Error::Schedule(_) => DocoStatus::Schedule,
        Error::Protocol(_) => DocoStatus::Protocol,
        Error::Feedback(_) => DocoStatus::Feedback,
        Error::Numerical(_) => DocoStatus::Numerical,
        Error::Domain(_) => DocoStatus::Domain,
        Error::StateCorruption(_) => DocoStatus::StateCorruption,
        Error::Io { .. } => DocoStatus::Io,
        Error::Parse { .. } => DocoStatus::Parse,
    }
}

struct Failure(DocoStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(DocoStatus::NullPointer, format!("{what} is NULL"))
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> DocoStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => DocoStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {message}"));
            DocoStatus::Panic
        }
    }
}

unsafe fn text<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        Failure(
            DocoStatus::InvalidInput,
            format!("{what} is not valid UTF-8"),
        )
    })
}

unsafe fn config_mut<'a>(cfg: *mut DocoConfig) -> Result<&'a mut ExperimentConfig, Failure> {
    cfg.as_mut()
        .map(|c| &mut c.inner)
        .ok_or_else(|| null("config"))
}

unsafe fn ledger_ref<'a>(ledger: *const DocoLedger) -> Result<&'a RegretLedger, Failure> {
    ledger
        .as_ref()
        .map(|l| &l.inner)
        .ok_or_else(|| null("ledger"))
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn doco_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn doco_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a configuration with default settings for `algorithm`
/// (`ogd_sc`, `dogd`, `dogd_sc`, `bdogd_sc`, `twopoint` or `dbgd`).
///
/// # Safety
/// `algorithm` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn doco_config_new(
    algorithm: *const c_char,
    out: *mut *mut DocoConfig,
) -> DocoStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let algorithm: Algorithm = text(algorithm, "algorithm")?.parse()?;
        let cfg = Box::new(DocoConfig {
            inner: ExperimentConfig::new(algorithm),
        });
        *out = Box::into_raw(cfg);
        Ok(())
    })
}

/// # Safety
/// `cfg` must be NULL or a handle from [`doco_config_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn doco_config_free(cfg: *mut DocoConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// # Safety
/// `cfg` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn doco_config_set_horizon(
    cfg: *mut DocoConfig,
    horizon: usize,
) -> DocoStatus {
    guard(|| {
        config_mut(cfg)?.horizon = horizon;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn doco_config_set_dim(cfg: *mut DocoConfig, dim: usize) -> DocoStatus {
    guard(|| {
        config_mut(cfg)?.dim = dim;
        Ok(())
    })
}

/// Sets the decision radius `R` and the inner radius `r` together.
///
/// # Safety
/// `cfg` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn doco_config_set_radii(
    cfg: *mut DocoConfig,
    radius: f64,
    inner_radius: f64,
) -> DocoStatus {
    guard(|| {
        let c = config_mut(cfg)?;
        c.radius = radius;
        c.inner_radius = inner_radius;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn doco_config_set_seed(cfg: *mut DocoConfig, seed: u64) -> DocoStatus {
    guard(|| {
        config_mut(cfg)?.seed = seed;
        Ok(())
    })
}

/// Accepts the same syntax as the CLI: `periodic:2,3,2,1`, `constant:d`,
/// `unit` or a schedule file path.
///
/// # Safety
/// `cfg` must be a live configuration handle; `spec` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn doco_config_set_schedule(
    cfg: *mut DocoConfig,
    spec: *const c_char,
) -> DocoStatus {
    guard(|| {
        let c = config_mut(cfg)?;
        c.schedule = text(spec, "schedule")?.parse::<ScheduleSpec>()?;
        Ok(())
    })
}

/// `ln_t_over_t[:c]`, `inv_t_plus_d` or `fixed:<delta>`.
///
/// # Safety
/// `cfg` must be a live configuration handle; `rule` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn doco_config_set_delta_rule(
    cfg: *mut DocoConfig,
    rule: *const c_char,
) -> DocoStatus {
    guard(|| {
        let c = config_mut(cfg)?;
        c.delta_rule = Some(text(rule, "delta rule")?.parse::<DeltaRule>()?);
        Ok(())
    })
}

/// Validates the configuration without running it.
///
/// # Safety
/// `cfg` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn doco_config_validate(cfg: *const DocoConfig) -> DocoStatus {
    guard(|| {
        let c = cfg.as_ref().ok_or_else(|| null("config"))?;
        c.inner.plan()?;
        Ok(())
    })
}

/// Runs the experiment and stores a new ledger in `out`.
///
/// # Safety
/// `cfg` must be a live configuration handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn doco_run(cfg: *const DocoConfig, out: *mut *mut DocoLedger) -> DocoStatus {
    guard(|| {
        let c = cfg.as_ref().ok_or_else(|| null("config"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let ledger = run_experiment(&c.inner)?;
        *out = Box::into_raw(Box::new(DocoLedger { inner: ledger }));
        Ok(())
    })
}

/// # Safety
/// `ledger` must be NULL or a handle from [`doco_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn doco_ledger_free(ledger: *mut DocoLedger) {
    if !ledger.is_null() {
        drop(Box::from_raw(ledger));
    }
}

/// Number of recorded rounds; 0 for NULL.
///
/// # Safety
/// `ledger` must be NULL or a live ledger handle.
#[no_mangle]
pub unsafe extern "C" fn doco_ledger_len(ledger: *const DocoLedger) -> usize {
    ledger.as_ref().map_or(0, |l| l.inner.len())
}

/// Copies row `index` (0-based) into `out`.
///
/// # Safety
/// `ledger` must be a live ledger handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn doco_ledger_row(
    ledger: *const DocoLedger,
    index: usize,
    out: *mut DocoRow,
) -> DocoStatus {
    guard(|| {
        let l = ledger_ref(ledger)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let row = l.rows().get(index).ok_or_else(|| {
            Failure(
                DocoStatus::OutOfRange,
                format!("row {index} out of range for {} rounds", l.len()),
            )
        })?;
        *out = DocoRow {
            t: row.t,
            loss: row.loss,
            cum_loss: row.cum_loss,
            cum_regret: row.cum_regret,
        };
        Ok(())
    })
}

/// Final cumulative loss, final regret and comparator total.
///
/// # Safety
/// `ledger` must be a live ledger handle; each output pointer may be NULL.
#[no_mangle]
pub unsafe extern "C" fn doco_ledger_totals(
    ledger: *const DocoLedger,
    cum_loss: *mut f64,
    regret: *mut f64,
    comparator_total: *mut f64,
) -> DocoStatus {
    guard(|| {
        let l = ledger_ref(ledger)?;
        if let Some(p) = cum_loss.as_mut() {
            *p = l.final_cumulative_loss();
        }
        if let Some(p) = regret.as_mut() {
            *p = l.final_regret();
        }
        if let Some(p) = comparator_total.as_mut() {
            *p = l.comparator_total();
        }
        Ok(())
    })
}

/// # Safety
/// `ledger` must be a live ledger handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn doco_ledger_write_csv(
    ledger: *const DocoLedger,
    path: *const c_char,
) -> DocoStatus {
    guard(|| {
        let l = ledger_ref(ledger)?;
        l.write_csv(Path::new(text(path, "path")?))?;
        Ok(())
    })
}

unsafe fn slice<'a>(ptr: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn slice_mut<'a>(ptr: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, len))
}

/// Euclidean projection of `y[0..n]` onto the ball of `radius`, into `out[0..n]`.
///
/// # Safety
/// `y` must hold `n` readable doubles and `out` `n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn doco_project_ball(
    radius: f64,
    y: *const f64,
    n: usize,
    out: *mut f64,
) -> DocoStatus {
    guard(|| {
        let ball = BallDomain::new(radius)?;
        let p = ball.project(&DecisionVector::new(slice(y, n, "y")?.to_vec())?)?;
        slice_mut(out, n, "out")?.copy_from_slice(p.as_slice());
        Ok(())
    })
}

/// (n+1)-point gradient estimate from `values = [f(x), f(x + delta e_1), ...,
/// f(x + delta e_n)]` (`n + 1` entries); writes `n` doubles to `out`.
///
/// # Safety
/// `values` must hold `n + 1` readable doubles and `out` `n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn doco_multipoint_estimate(
    values: *const f64,
    n: usize,
    delta: f64,
    out: *mut f64,
) -> DocoStatus {
    guard(|| {
        let fb = MultipointFeedback::from_values(slice(values, n + 1, "values")?, delta)?;
        let g = multipoint_estimate(&fb)?;
        slice_mut(out, n, "out")?.copy_from_slice(g.as_slice());
        Ok(())
    })
}
