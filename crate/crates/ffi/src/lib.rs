//! C ABI for the k3sd verification engine.
//!
//! Objects cross the boundary as opaque handles created and destroyed by
//! this library. Every fallible call returns a [`K3sdStatus`]; on anything
//! other than `K3SD_STATUS_OK` a description is available from [`k3sd_last_error`]
//! on the same thread until the next failing call.
//!
//! Strings returned by the library are NUL-terminated UTF-8 and must be
//! released with [`k3sd_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use k3sd::cli::{self, Command};
use k3sd::fourier_mukai::{self, Direction, NumClass};
use k3sd::kodaira::FiberType;
use k3sd::lattice::SurfaceModel;
use k3sd::mukai::MukaiVector;
use k3sd::report::{Report, Verdict};
use k3sd::scenario::{self, Scenario};
use k3sd::verlinde;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum K3sdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Scenario text could not be parsed or violates a bound.
    Parse = 3,
    /// The command cannot run on the given input.
    Input = 4,
    /// The computation itself failed.
    Compute = 5,
    /// A panic was caught at the boundary.
    Internal = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum K3sdCommand {
    AnalyzeNl = 0,
    Fm = 1,
    SdCheck = 2,
    Kodaira = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum K3sdVerdict {
    Pass = 0,
    Warn = 1,
    Fail = 2,
    Info = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum K3sdDirection {
    S = 0,
    T = 1,
}

/// Counts for one strange-duality instance.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct K3sdSdCounts {
    pub l_sigma: i64,
    pub l_fiber: i64,
    pub l_square: i64,
    pub chi_l: i64,
    pub d_v: i64,
    pub d_w: i64,
    /// `C(χ(L), d_v) = C(χ(L), d_w)`.
    pub h0_equal: bool,
}

/// A parsed scenario.
pub struct K3sdScenario {
    inner: Scenario,
}

/// The rendered outcome of one command.
pub struct K3sdReport {
    inner: Report,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn guard(f: impl FnOnce() -> Result<(), (K3sdStatus, String)>) -> K3sdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => K3sdStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside k3sd");
            K3sdStatus::Internal
        }
    }
}

fn null() -> (K3sdStatus, String) {
    (K3sdStatus::NullPointer, "null pointer argument".into())
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, (K3sdStatus, String)> {
    if s.is_null() {
        return Err(null());
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| (K3sdStatus::InvalidUtf8, e.to_string()))
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message of the last failing call on this thread; empty if none. The
/// pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn k3sd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses scenario TOML text into `*out`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn k3sd_scenario_parse(text: *const c_char, out: *mut *mut K3sdScenario) -> K3sdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let text = read_str(text)?;
        let inner = scenario::parse_scenario(text).map_err(|e| (K3sdStatus::Parse, e.to_string()))?;
        *out = Box::into_raw(Box::new(K3sdScenario { inner }));
        Ok(())
    })
}

/// # Safety
/// `scenario` must come from [`k3sd_scenario_parse`] or be null.
#[no_mangle]
pub unsafe extern "C" fn k3sd_scenario_free(scenario: *mut K3sdScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

unsafe fn finish(
    scenario: *const K3sdScenario,
    command: Command,
    out: *mut *mut K3sdReport,
) -> Result<(), (K3sdStatus, String)> {
    if out.is_null() {
        return Err(null());
    }
    let sc = scenario.as_ref().map(|s| &s.inner);
    let inner = cli::run_and_report(sc, &command).map_err(|e| (K3sdStatus::Input, e.0))?;
    *out = Box::into_raw(Box::new(K3sdReport { inner }));
    Ok(())
}

fn bound_arg(bound: i64) -> Option<i64> {
    (bound >= 0).then_some(bound)
}

/// Runs a command on a scenario. A negative `bound` selects the default;
/// `kodaira` uses the scenario's fibers. Failing checks still produce a
/// report; inspect it with [`k3sd_report_overall`].
///
/// # Safety
/// `scenario` must be a live handle or null; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn k3sd_run(
    scenario: *const K3sdScenario,
    command: K3sdCommand,
    bound: i64,
    out: *mut *mut K3sdReport,
) -> K3sdStatus {
    guard(|| {
        let bound = bound_arg(bound);
        let command = match command {
            K3sdCommand::AnalyzeNl => Command::AnalyzeNl { bound },
            K3sdCommand::Fm => Command::Fm,
            K3sdCommand::SdCheck => Command::SdCheck,
            K3sdCommand::Kodaira => Command::Kodaira { fiber: None, bound },
        };
        finish(scenario, command, out)
    })
}

/// Kodaira checks for a single fiber type such as `"I5"` or `"IIstar"`;
/// `attach` is the 1-based component meeting the section.
///
/// # Safety
/// `fiber_type` must be a NUL-terminated string and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn k3sd_run_kodaira(
    fiber_type: *const c_char,
    attach: u32,
    bound: i64,
    out: *mut *mut K3sdReport,
) -> K3sdStatus {
    guard(|| {
        let ty: FiberType = read_str(fiber_type)?
            .parse()
            .map_err(|e: k3sd::kodaira::KodairaError| (K3sdStatus::Input, e.to_string()))?;
        if attach == 0 {
            return Err((K3sdStatus::Input, "attach is 1-based".into()));
        }
        let command = Command::Kodaira {
            fiber: Some((ty, attach as usize - 1)),
            bound: bound_arg(bound),
        };
        finish(ptr::null(), command, out)
    })
}

/// # Safety
/// `report` must come from a run call or be null.
#[no_mangle]
pub unsafe extern "C" fn k3sd_report_free(report: *mut K3sdReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Overall verdict; `Fail` for a null handle.
///
/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn k3sd_report_overall(report: *const K3sdReport) -> K3sdVerdict {
    match report.as_ref().map(|r| r.inner.overall()) {
        Some(Verdict::Pass) => K3sdVerdict::Pass,
        Some(Verdict::Warn) => K3sdVerdict::Warn,
        Some(Verdict::Info) => K3sdVerdict::Info,
        Some(Verdict::Fail) | None => K3sdVerdict::Fail,
    }
}

/// Renders the report, tab-separated when `machine` is set. Null on a null
/// handle.
///
/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn k3sd_report_render(report: *const K3sdReport, machine: bool) -> *mut c_char {
    match report.as_ref() {
        Some(r) if machine => to_c_string(r.inner.render_machine()),
        Some(r) => to_c_string(r.inner.render_human()),
        None => {
            set_error("null pointer argument");
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn k3sd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Writes the 4×4 matrix of `S` or `T` on `(r, k, m, χ)` in row-major order.
///
/// # Safety
/// `out` must point to 16 writable `int64_t`.
#[no_mangle]
pub unsafe extern "C" fn k3sd_fm_matrix(direction: K3sdDirection, out: *mut i64) -> K3sdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let tm = fourier_mukai::transform_matrices().map_err(|e| (K3sdStatus::Compute, e.to_string()))?;
        let m = match direction {
            K3sdDirection::S => &tm.m,
            K3sdDirection::T => &tm.m_t,
        };
        let out = std::slice::from_raw_parts_mut(out, 16);
        for (slot, x) in out.iter_mut().zip(m.iter().flatten()) {
            *slot = *x;
        }
        Ok(())
    })
}

/// Applies `S` or `T` to the class `(r, k, m, χ)`.
///
/// # Safety
/// `v` must point to 4 readable and `out` to 4 writable `int64_t`.
#[no_mangle]
pub unsafe extern "C" fn k3sd_apply_transform(v: *const i64, direction: K3sdDirection, out: *mut i64) -> K3sdStatus {
    guard(|| {
        if v.is_null() || out.is_null() {
            return Err(null());
        }
        let input: [i64; 4] = std::slice::from_raw_parts(v, 4).try_into().unwrap();
        let dir = match direction {
            K3sdDirection::S => Direction::S,
            K3sdDirection::T => Direction::T,
        };
        let image = fourier_mukai::apply_transform(NumClass::from_array(input), dir)
            .map_err(|e| (K3sdStatus::Compute, e.to_string()))?;
        std::slice::from_raw_parts_mut(out, 4).copy_from_slice(&image.to_array());
        Ok(())
    })
}

/// Strange-duality counts for `v = r + H + a[pt]`, `w = s + H + b[pt]` on
/// the rank-2 model of degree `2·ell`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn k3sd_sd_counts(
    ell: i64,
    r: i64,
    a: i64,
    s: i64,
    b: i64,
    out: *mut K3sdSdCounts,
) -> K3sdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let input = |e: &dyn std::fmt::Display| (K3sdStatus::Input, e.to_string());
        if let Some(x) = [ell, r, a, s, b].into_iter().find(|x| x.abs() > scenario::MAX_ABS) {
            return Err(input(&format!("{x} exceeds {} in absolute value", scenario::MAX_ABS)));
        }
        let model = SurfaceModel::rank_two(ell).map_err(|e| input(&e))?;
        let v = MukaiVector::on_polarization(&model, r, a).map_err(|e| input(&e))?;
        let w = MukaiVector::on_polarization(&model, s, b).map_err(|e| input(&e))?;
        let sd = verlinde::sd_counts(&model, &v, &w).map_err(|e| input(&e))?;
        let l = sd.l.fiberwise.coeffs();
        *out = K3sdSdCounts {
            l_sigma: l[0],
            l_fiber: l[1],
            l_square: sd.l_square,
            chi_l: sd.chi_l,
            d_v: sd.d_v,
            d_w: sd.d_w,
            h0_equal: sd.h0_v == sd.h0_w,
        };
        Ok(())
    })
}

/// `C(n, k)` in base 10; null when `k > n` or `n` exceeds the supported size.
#[no_mangle]
pub extern "C" fn k3sd_binomial(n: u64, k: u64) -> *mut c_char {
    if k > n {
        set_error(format!("C({n}, {k}) is undefined"));
        return ptr::null_mut();
    }
    if n > verlinde::MAX_CHI as u64 {
        set_error(format!("n = {n} exceeds {}", verlinde::MAX_CHI));
        return ptr::null_mut();
    }
    to_c_string(verlinde::binomial(n, k).to_string())
}
