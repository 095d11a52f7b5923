//! C interface to the caustics library.
//!
//! Objects cross the boundary as opaque handles created by `*_new` or
//! `*_from_json` functions and released with the matching `*_free`. Every
//! fallible call returns a [`CausticsStatus`]; on failure the message is kept
//! per thread and can be copied out with [`caustics_last_error`].
//! Panics never unwind into C: they are caught and reported as
//! [`CausticsStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use caustics::billiard::{billiard_map, PhasePoint};
use caustics::curve::{ConvexCurve, CurveSpec};
use caustics::experiment::{run_suite, ExperimentConfig};
use caustics::geodesic::connect;
use caustics::metric::{ChartSpec, MetricChart};
use caustics::net::{ivory_check, NetQuad};
use caustics::string::{poritsky_parameter, string_diffeo, ConjugacyMethod, PoritskyParam};
use caustics::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CausticsStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Bad input: malformed spec, parameter out of range, point outside the
    /// chart, non-convex curve.
    Configuration = 3,
    /// A numerical stage failed (integration, root finding, convergence).
    Numerical = 4,
    /// An internal panic was caught.
    Panic = 5,
}

/// A metric chart.
pub struct CausticsChart {
    inner: MetricChart,
}

/// A convex curve with its chart.
pub struct CausticsCurve {
    inner: ConvexCurve,
}

/// A parameter of a closed curve in which string diffeomorphisms are shifts.
pub struct CausticsPoritsky {
    inner: PoritskyParam,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Fail {
    Null,
    Utf8,
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Runs `f`, records any failure and maps it to a status.
fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> CausticsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CausticsStatus::Ok,
        Ok(Err(Fail::Null)) => {
            set_error("null pointer argument".into());
            CausticsStatus::NullPointer
        }
        Ok(Err(Fail::Utf8)) => {
            set_error("string argument is not valid UTF-8".into());
            CausticsStatus::InvalidUtf8
        }
        Ok(Err(Fail::Lib(e))) => {
            let status = if e.is_configuration() {
                CausticsStatus::Configuration
            } else {
                CausticsStatus::Numerical
            };
            set_error(e.to_string());
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            CausticsStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(s: *const c_char) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(Fail::Null);
    }
    CStr::from_ptr(s).to_str().map_err(|_| Fail::Utf8)
}

unsafe fn obj<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null)
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null);
    }
    out.write(v);
    Ok(())
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL, or
/// 0 when there is no error.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn caustics_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match &*e.borrow() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn caustics_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a chart from its JSON description.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn caustics_chart_from_json(
    json: *const c_char,
    out: *mut *mut CausticsChart,
) -> CausticsStatus {
    guard(|| {
        let spec = ChartSpec::from_json(str_arg(json)?)?;
        let chart = spec.build()?;
        write(out, Box::into_raw(Box::new(CausticsChart { inner: chart })))
    })
}

/// # Safety
/// `chart` must be null or a handle from [`caustics_chart_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn caustics_chart_free(chart: *mut CausticsChart) {
    if !chart.is_null() {
        drop(Box::from_raw(chart));
    }
}

/// Metric components `g11, g12, g22` at `(u, v)`, written to `out[0..3]`.
///
/// # Safety
/// `chart` must be a live handle; `out` must hold three doubles.
#[no_mangle]
pub unsafe extern "C" fn caustics_chart_metric(
    chart: *const CausticsChart,
    u: f64,
    v: f64,
    out: *mut f64,
) -> CausticsStatus {
    guard(|| {
        let g = obj(chart)?.inner.eval_metric([u, v])?;
        if out.is_null() {
            return Err(Fail::Null);
        }
        let o = std::slice::from_raw_parts_mut(out, 3);
        o.copy_from_slice(&[g.g11, g.g12, g.g22]);
        Ok(())
    })
}

/// Length of the shortest geodesic between two points.
///
/// # Safety
/// `chart` must be a live handle; `length` must be writable.
#[no_mangle]
pub unsafe extern "C" fn caustics_geodesic_distance(
    chart: *const CausticsChart,
    u0: f64,
    v0: f64,
    u1: f64,
    v1: f64,
    length: *mut f64,
) -> CausticsStatus {
    guard(|| {
        let c = connect(&obj(chart)?.inner, [u0, v0], [u1, v1])?;
        write(length, c.length)
    })
}

/// `|L+ − L−|` for the diagonals of the quad `[u1, u2] × [v1, v2]`.
///
/// # Safety
/// `chart` must be a live handle; `defect` must be writable.
#[no_mangle]
pub unsafe extern "C" fn caustics_ivory_defect(
    chart: *const CausticsChart,
    u1: f64,
    u2: f64,
    v1: f64,
    v2: f64,
    defect: *mut f64,
) -> CausticsStatus {
    guard(|| {
        let q = NetQuad::new(u1, u2, v1, v2)?;
        let r = ivory_check(&obj(chart)?.inner, q)?;
        write(defect, r.defect)
    })
}

/// Builds a curve from its JSON description. A spec without its own chart is
/// placed in `chart`, or in the Euclidean plane when `chart` is null.
///
/// # Safety
/// `json` must be a NUL-terminated string, `chart` null or a live handle,
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn caustics_curve_from_json(
    json: *const c_char,
    chart: *const CausticsChart,
    out: *mut *mut CausticsCurve,
) -> CausticsStatus {
    guard(|| {
        let spec = CurveSpec::from_json(str_arg(json)?)?;
        let curve = match (spec.chart.is_some(), chart.as_ref()) {
            (false, Some(c)) => spec.build_in(c.inner.clone())?,
            _ => spec.build()?,
        };
        write(out, Box::into_raw(Box::new(CausticsCurve { inner: curve })))
    })
}

/// # Safety
/// `curve` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn caustics_curve_free(curve: *mut CausticsCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Metric length of the curve.
///
/// # Safety
/// `curve` must be a live handle; `length` must be writable.
#[no_mangle]
pub unsafe extern "C" fn caustics_curve_length(
    curve: *const CausticsCurve,
    length: *mut f64,
) -> CausticsStatus {
    guard(|| write(length, obj(curve)?.inner.length()))
}

/// One step of the billiard map inside `table`, phase coordinates
/// `(s, p)` = (arc length, cosine of the angle with the tangent).
///
/// # Safety
/// `table` must be a live handle; `s_out`, `p_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn caustics_billiard_map(
    table: *const CausticsCurve,
    s: f64,
    p: f64,
    s_out: *mut f64,
    p_out: *mut f64,
) -> CausticsStatus {
    guard(|| {
        let next = billiard_map(&obj(table)?.inner, PhasePoint::new(s, p))?;
        write(s_out, next.s)?;
        write(p_out, next.p)
    })
}

/// Parameter `b` of the point reached from parameter `a` by the string
/// diffeomorphism of excess `p`.
///
/// # Safety
/// `caustic` must be a live handle; `b` must be writable.
#[no_mangle]
pub unsafe extern "C" fn caustics_string_diffeo(
    caustic: *const CausticsCurve,
    p: f64,
    a: f64,
    b: *mut f64,
) -> CausticsStatus {
    guard(|| write(b, string_diffeo(&obj(caustic)?.inner, p, a)?))
}

/// Shift parameter of a closed caustic from `n` iterates of the string
/// diffeomorphism of excess `p_ref`.
///
/// # Safety
/// `caustic` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn caustics_poritsky_new(
    caustic: *const CausticsCurve,
    p_ref: f64,
    n: usize,
    out: *mut *mut CausticsPoritsky,
) -> CausticsStatus {
    guard(|| {
        let par = poritsky_parameter(&obj(caustic)?.inner, p_ref, n, 0.0)?;
        write(
            out,
            Box::into_raw(Box::new(CausticsPoritsky { inner: par })),
        )
    })
}

/// # Safety
/// `param` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn caustics_poritsky_free(param: *mut CausticsPoritsky) {
    if !param.is_null() {
        drop(Box::from_raw(param));
    }
}

/// `t(τ)` in `[0, 1)`; `smooth` selects the trigonometric evaluation over the
/// interpolated orbit rank.
///
/// # Safety
/// `param` must be a live handle; `t` must be writable.
#[no_mangle]
pub unsafe extern "C" fn caustics_poritsky_eval(
    param: *const CausticsPoritsky,
    tau: f64,
    smooth: bool,
    t: *mut f64,
) -> CausticsStatus {
    guard(|| {
        let m = if smooth {
            ConjugacyMethod::Spectral
        } else {
            ConjugacyMethod::Rank
        };
        write(t, obj(param)?.inner.eval(tau, m))
    })
}

/// Rotation number of the reference string diffeomorphism.
///
/// # Safety
/// `param` must be a live handle; `rho` must be writable.
#[no_mangle]
pub unsafe extern "C" fn caustics_poritsky_rotation(
    param: *const CausticsPoritsky,
    rho: *mut f64,
) -> CausticsStatus {
    guard(|| write(rho, obj(param)?.inner.rho))
}

/// Runs the check suite of a JSON experiment config. On success `report`
/// receives the JSON report (release with [`caustics_string_free`]) and
/// `exit_code` the suite verdict: 0 all passed, 1 a check failed, 2 a check
/// was rejected on its input.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `report` and `exit_code`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn caustics_suite_run(
    config_json: *const c_char,
    report: *mut *mut c_char,
    exit_code: *mut c_int,
) -> CausticsStatus {
    guard(|| {
        if report.is_null() || exit_code.is_null() {
            return Err(Fail::Null);
        }
        let cfg = ExperimentConfig::from_json(str_arg(config_json)?)?;
        let r = run_suite(&cfg)?;
        let text = CString::new(r.to_json()).map_err(|e| Error::Io(e.to_string()))?;
        write(exit_code, r.exit_code() as c_int)?;
        write(report, text.into_raw())
    })
}

/// Releases a string returned by the library.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn caustics_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
