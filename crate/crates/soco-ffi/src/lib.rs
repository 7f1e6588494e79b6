//! C ABI over the experiment runner. Callers hand in the same JSON config
//! the CLI accepts and get back an opaque report handle.
//!
//! Thread safety: `soco_last_error_message` is per-thread; a report handle
//! must be freed exactly once and not used afterwards.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use soco::harness::{run_experiment, ExperimentConfig};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SocoStatus {
    SocoOk = 0,
    /// A required pointer argument was null.
    SocoNullArgument = 1,
    /// The config string was not valid UTF-8.
    SocoInvalidUtf8 = 2,
    /// The config failed to parse or validate.
    SocoBadConfig = 3,
    /// The experiment itself failed.
    SocoRuntimeError = 4,
    /// A panic was caught at the boundary.
    SocoInternalError = 5,
}

/// Opaque experiment result. Read it with `soco_report_json`, release it
/// with `soco_report_free`.
pub struct SocoReport {
    json: CString,
    ratio: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Message for the most recent failure on this thread. Valid until the next
/// failing call on the same thread; never null.
#[no_mangle]
pub extern "C" fn soco_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Runs the experiment described by `config_json` (NUL-terminated UTF-8,
/// same schema as the CLI config file plus a `"cmd"` field) and stores a
/// new report in `*out` on success.
#[no_mangle]
pub unsafe extern "C" fn soco_run_experiment(
    config_json: *const c_char,
    out: *mut *mut SocoReport,
) -> SocoStatus {
    if config_json.is_null() || out.is_null() {
        set_error("null argument");
        return SocoStatus::SocoNullArgument;
    }
    let text = match CStr::from_ptr(config_json).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("config is not valid UTF-8");
            return SocoStatus::SocoInvalidUtf8;
        }
    };
    let result = catch_unwind(AssertUnwindSafe(|| {
        let cfg: ExperimentConfig = match serde_json::from_str(text) {
            Ok(c) => c,
            Err(e) => {
                set_error(&format!("config: {e}"));
                return Err(SocoStatus::SocoBadConfig);
            }
        };
        let report = match run_experiment(&cfg) {
            Ok(r) => r,
            Err(e) => {
                set_error(&e.to_string());
                return Err(SocoStatus::SocoRuntimeError);
            }
        };
        let ratio = report.ratio.unwrap_or(f64::NAN);
        let json = serde_json::to_string_pretty(&report)
            .expect("report serializes");
        Ok(SocoReport {
            json: CString::new(json).expect("report JSON has no NUL bytes"),
            ratio,
        })
    }));
    match result {
        Ok(Ok(report)) => {
            *out = Box::into_raw(Box::new(report));
            SocoStatus::SocoOk
        }
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic");
            SocoStatus::SocoInternalError
        }
    }
}

/// Pretty-printed JSON body of the report. Owned by the handle; valid until
/// `soco_report_free`. Null only if `report` is null.
#[no_mangle]
pub unsafe extern "C" fn soco_report_json(report: *const SocoReport) -> *const c_char {
    if report.is_null() {
        set_error("null report");
        return std::ptr::null();
    }
    (*report).json.as_ptr()
}

/// Competitive ratio of the run, or NaN when the report has none (for
/// example a pure regret experiment).
#[no_mangle]
pub unsafe extern "C" fn soco_report_ratio(report: *const SocoReport) -> f64 {
    if report.is_null() {
        set_error("null report");
        return f64::NAN;
    }
    (*report).ratio
}

/// Releases a report. Passing null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn soco_report_free(report: *mut SocoReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(cfg: &str) -> (SocoStatus, *mut SocoReport) {
        let c = CString::new(cfg).unwrap();
        let mut out: *mut SocoReport = std::ptr::null_mut();
        let status = unsafe { soco_run_experiment(c.as_ptr(), &mut out) };
        (status, out)
    }

    #[test]
    fn round_trip() {
        let (status, report) = run(
            r#"{"cmd":"run","algo":"robd","instance":"ramp","m":0.25}"#,
        );
        assert_eq!(status, SocoStatus::SocoOk);
        let json = unsafe { CStr::from_ptr(soco_report_json(report)) };
        let v: serde_json::Value = serde_json::from_str(json.to_str().unwrap()).unwrap();
        let ratio = v["ratio"].as_f64().unwrap();
        assert!(ratio >= 1.0);
        assert_eq!(unsafe { soco_report_ratio(report) }, ratio);
        unsafe { soco_report_free(report) };
    }

    #[test]
    fn bad_config_reports_error() {
        let (status, report) = run(r#"{"cmd":"run","algo":"nope"}"#);
        assert_eq!(status, SocoStatus::SocoRuntimeError);
        assert!(report.is_null());
        let msg = unsafe { CStr::from_ptr(soco_last_error_message()) };
        assert!(!msg.to_str().unwrap().is_empty());
    }

    #[test]
    fn malformed_json_is_bad_config() {
        let (status, _) = run("{not json");
        assert_eq!(status, SocoStatus::SocoBadConfig);
    }

    #[test]
    fn null_arguments_are_rejected() {
        let mut out: *mut SocoReport = std::ptr::null_mut();
        let status = unsafe { soco_run_experiment(std::ptr::null(), &mut out) };
        assert_eq!(status, SocoStatus::SocoNullArgument);
        assert!(unsafe { soco_report_json(std::ptr::null()) }.is_null());
        unsafe { soco_report_free(std::ptr::null_mut()) };
    }
}
