//! C ABI for the recirc toolkit.
//!
//! Scenarios and runs live behind opaque handles. Structured data crosses the
//! boundary as UTF-8 JSON strings. Every fallible function returns a
//! [`RecircStatus`]; on failure, [`recirc_last_error`] describes what went
//! wrong on the calling thread.
//!
//! Ownership:
//! - handles from `recirc_scenario_*` constructors are released with
//!   [`recirc_scenario_free`], run handles with [`recirc_run_free`];
//! - strings written to `out_json`/`out_path` parameters are released with
//!   [`recirc_string_free`];
//! - the pointers returned by [`recirc_version`] and [`recirc_last_error`]
//!   are owned by the library.
//!
//! Panics never unwind into the caller; they surface as
//! [`RecircStatus::Panic`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::ptr;

use recirc::milp::{solve_milp, LinearProgram, SolverOptions};
use recirc::pipeline::{self, compare_runs, Mode, RunOutput};
use recirc::report::{metrics_snapshot, persist_run};
use recirc::scenario::{load_scenario, parse_scenario, validate_scenario, ScenarioError, ScenarioSpec};
use recirc::{Classify, ErrorKind};

/// Result of every fallible call. Values 1 to 8 match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecircStatus {
    Ok = 0,
    Other = 1,
    /// A null pointer, non-UTF-8 string or unknown name was passed.
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    Validation = 5,
    Stage = 6,
    Mismatch = 7,
    MissingMetric = 8,
    Panic = 9,
}

impl From<ErrorKind> for RecircStatus {
    fn from(k: ErrorKind) -> Self {
        match k {
            ErrorKind::Other => RecircStatus::Other,
            ErrorKind::Usage => RecircStatus::InvalidArgument,
            ErrorKind::Io => RecircStatus::Io,
            ErrorKind::Parse => RecircStatus::Parse,
            ErrorKind::Validation => RecircStatus::Validation,
            ErrorKind::Stage => RecircStatus::Stage,
            ErrorKind::Mismatch => RecircStatus::Mismatch,
            ErrorKind::MissingMetric => RecircStatus::MissingMetric,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecircMode {
    Baseline = 0,
    Framework = 1,
}

impl From<RecircMode> for Mode {
    fn from(m: RecircMode) -> Self {
        match m {
            RecircMode::Baseline => Mode::Baseline,
            RecircMode::Framework => Mode::Framework,
        }
    }
}

/// A parsed, validated scenario.
pub struct RecircScenario {
    spec: ScenarioSpec,
    path: Option<PathBuf>,
}

/// The output of one pipeline run, with the scenario it ran.
pub struct RecircRun {
    spec: ScenarioSpec,
    path: Option<PathBuf>,
    output: RunOutput,
}

struct Failure {
    status: RecircStatus,
    message: String,
}

impl Failure {
    fn new(status: RecircStatus, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    fn of<E: Classify + std::fmt::Display>(e: E) -> Self {
        Self::new(e.kind().into(), e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RecircStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RecircStatus::Ok,
        Ok(Err(fail)) => {
            set_last_error(&fail.message);
            fail.status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("internal panic: {msg}"));
            RecircStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(RecircStatus::InvalidArgument, format!("`{name}` is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(RecircStatus::InvalidArgument, format!("`{name}` is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure::new(RecircStatus::InvalidArgument, format!("`{name}` is null")))
}

fn out_arg<T>(p: *mut T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure::new(RecircStatus::InvalidArgument, format!("`{name}` is null")))
    } else {
        Ok(())
    }
}

unsafe fn write_string(out: *mut *mut c_char, s: String) {
    let c = CString::new(s.replace('\0', " ")).expect("nul bytes removed");
    *out = c.into_raw();
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("value serializes")
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn recirc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the most recent failure on this thread, or null if none.
/// Valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn recirc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned through an `out_json` or `out_path` parameter.
/// Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn recirc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

fn new_scenario(spec: ScenarioSpec, path: Option<PathBuf>, out: *mut *mut RecircScenario) {
    let handle = Box::new(RecircScenario { spec, path });
    unsafe { *out = Box::into_raw(handle) };
}

/// Parses and validates a scenario document.
#[no_mangle]
pub unsafe extern "C" fn recirc_scenario_from_json(json: *const c_char, out: *mut *mut RecircScenario) -> RecircStatus {
    guard(|| {
        out_arg(out, "out")?;
        let text = str_arg(json, "json")?;
        let spec = parse_scenario(text, "<json>").map_err(Failure::of)?;
        new_scenario(spec, None, out);
        Ok(())
    })
}

/// Reads, parses and validates a scenario file.
#[no_mangle]
pub unsafe extern "C" fn recirc_scenario_load(path: *const c_char, out: *mut *mut RecircScenario) -> RecircStatus {
    guard(|| {
        out_arg(out, "out")?;
        let path = PathBuf::from(str_arg(path, "path")?);
        let spec = load_scenario(&path).map_err(Failure::of)?;
        new_scenario(spec, Some(path), out);
        Ok(())
    })
}

/// One of the bundled fixtures: `battery_baseline`, `battery_framework`,
/// `waste_baseline`, `waste_framework` or `alloc_small`.
#[no_mangle]
pub unsafe extern "C" fn recirc_scenario_fixture(name: *const c_char, out: *mut *mut RecircScenario) -> RecircStatus {
    guard(|| {
        out_arg(out, "out")?;
        let name = str_arg(name, "name")?;
        if recirc::fixtures::scenario_text(name).is_none() {
            return Err(Failure::new(RecircStatus::InvalidArgument, format!("no fixture named `{name}`")));
        }
        let spec = recirc::fixtures::scenario(name).map_err(Failure::of)?;
        new_scenario(spec, None, out);
        Ok(())
    })
}

/// Writes the canonical JSON of a scenario.
#[no_mangle]
pub unsafe extern "C" fn recirc_scenario_to_json(s: *const RecircScenario, out_json: *mut *mut c_char) -> RecircStatus {
    guard(|| {
        out_arg(out_json, "out_json")?;
        let s = ref_arg(s, "scenario")?;
        write_string(out_json, s.spec.to_json_pretty());
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn recirc_scenario_free(s: *mut RecircScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Checks a scenario document without keeping it. Writes a JSON array of
/// `{"path", "message"}` findings, empty when the scenario is valid. A
/// malformed document fails with [`RecircStatus::Parse`].
#[no_mangle]
pub unsafe extern "C" fn recirc_validate_json(json: *const c_char, out_json: *mut *mut c_char) -> RecircStatus {
    guard(|| {
        out_arg(out_json, "out_json")?;
        let text = str_arg(json, "json")?;
        let diags = match parse_scenario(text, "<json>") {
            Ok(spec) => validate_scenario(&spec),
            Err(ScenarioError::Validation(d)) => d,
            Err(e) => return Err(Failure::of(e)),
        };
        write_string(out_json, to_json(&diags));
        Ok(())
    })
}

/// Runs the pipeline. When `use_seed` is false the scenario's own seed is
/// used and `seed` is ignored.
#[no_mangle]
pub unsafe extern "C" fn recirc_run(
    s: *const RecircScenario,
    mode: RecircMode,
    use_seed: bool,
    seed: u64,
    out: *mut *mut RecircRun,
) -> RecircStatus {
    guard(|| {
        out_arg(out, "out")?;
        let s = ref_arg(s, "scenario")?;
        let output = pipeline::run(&s.spec, mode.into(), use_seed.then_some(seed)).map_err(Failure::of)?;
        let handle = Box::new(RecircRun {
            spec: s.spec.clone(),
            path: s.path.clone(),
            output,
        });
        *out = Box::into_raw(handle);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn recirc_run_free(r: *mut RecircRun) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Writes the run result as JSON.
#[no_mangle]
pub unsafe extern "C" fn recirc_run_result_json(r: *const RecircRun, out_json: *mut *mut c_char) -> RecircStatus {
    guard(|| {
        out_arg(out_json, "out_json")?;
        let r = ref_arg(r, "run")?;
        write_string(out_json, to_json(&r.output.result));
        Ok(())
    })
}

/// Reads one flat metric, e.g. `co2_kg`, `average_recovery` or
/// `recovery.cobalt`. Fails with [`RecircStatus::MissingMetric`] when the run
/// does not carry it.
#[no_mangle]
pub unsafe extern "C" fn recirc_run_metric(r: *const RecircRun, key: *const c_char, out_value: *mut f64) -> RecircStatus {
    guard(|| {
        out_arg(out_value, "out_value")?;
        let r = ref_arg(r, "run")?;
        let key = str_arg(key, "key")?;
        let metrics = metrics_snapshot(&r.output.result);
        let v = metrics
            .get(key)
            .ok_or_else(|| Failure::new(RecircStatus::MissingMetric, format!("run has no metric `{key}`")))?;
        *out_value = *v;
        Ok(())
    })
}

/// Writes the run's artifacts under `out_dir` and returns the manifest path.
#[no_mangle]
pub unsafe extern "C" fn recirc_run_persist(
    r: *const RecircRun,
    out_dir: *const c_char,
    out_path: *mut *mut c_char,
) -> RecircStatus {
    guard(|| {
        out_arg(out_path, "out_path")?;
        let r = ref_arg(r, "run")?;
        let dir = Path::new(str_arg(out_dir, "out_dir")?);
        let (_, manifest) = persist_run(dir, r.path.as_deref(), &r.spec, &r.output).map_err(Failure::of)?;
        write_string(out_path, manifest.display().to_string());
        Ok(())
    })
}

/// Compares a baseline run with a framework run and writes the improvement
/// report as JSON.
#[no_mangle]
pub unsafe extern "C" fn recirc_compare(
    baseline: *const RecircRun,
    framework: *const RecircRun,
    out_json: *mut *mut c_char,
) -> RecircStatus {
    guard(|| {
        out_arg(out_json, "out_json")?;
        let b = ref_arg(baseline, "baseline")?;
        let f = ref_arg(framework, "framework")?;
        let report = compare_runs(&b.output.result, &f.output.result).map_err(Failure::of)?;
        write_string(out_json, to_json(&report));
        Ok(())
    })
}

/// Solves a linear program given as JSON (the `lp.json` run artifact format)
/// with default solver options and writes the solution as JSON.
#[no_mangle]
pub unsafe extern "C" fn recirc_solve_milp(lp_json: *const c_char, out_json: *mut *mut c_char) -> RecircStatus {
    guard(|| {
        out_arg(out_json, "out_json")?;
        let text = str_arg(lp_json, "lp_json")?;
        let lp: LinearProgram =
            serde_json::from_str(text).map_err(|e| Failure::new(RecircStatus::Parse, format!("lp_json: {e}")))?;
        let sol = solve_milp(&lp, &SolverOptions::default()).map_err(Failure::of)?;
        write_string(out_json, to_json(&sol));
        Ok(())
    })
}
