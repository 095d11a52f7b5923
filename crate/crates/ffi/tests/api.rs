use std::ffi::{c_char, c_int, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use caustics_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let mut buf = [0 as c_char; 512];
    unsafe {
        caustics_last_error(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn chart(json: &str) -> *mut CausticsChart {
    let mut c = ptr::null_mut();
    let st = unsafe { caustics_chart_from_json(cstr(json).as_ptr(), &mut c) };
    assert_eq!(st, CausticsStatus::Ok, "{}", last_error());
    c
}

#[test]
fn metric_and_distance() {
    let c = chart(r#"{"builder": "euclidean_polar"}"#);
    let mut g = [0.0; 3];
    let mut d = 0.0;
    unsafe {
        assert_eq!(
            caustics_chart_metric(c, 2.0, 0.3, g.as_mut_ptr()),
            CausticsStatus::Ok
        );
        assert_eq!(g, [1.0, 0.0, 4.0]);
        // chord of the unit circle subtending π/3
        let st = caustics_geodesic_distance(c, 1.0, 0.0, 1.0, std::f64::consts::FRAC_PI_3, &mut d);
        assert_eq!(st, CausticsStatus::Ok, "{}", last_error());
        caustics_chart_free(c);
    }
    assert!((d - 1.0).abs() < 1e-9, "{d}");
}

#[test]
fn errors_are_classified() {
    let mut c = ptr::null_mut();
    unsafe {
        let st = caustics_chart_from_json(cstr("{not json").as_ptr(), &mut c);
        assert_eq!(st, CausticsStatus::Configuration);
        assert!(last_error().contains("configuration"));
        assert_eq!(
            caustics_chart_from_json(ptr::null(), &mut c),
            CausticsStatus::NullPointer
        );
        let bad = [0xffu8, 0];
        assert_eq!(
            caustics_chart_from_json(bad.as_ptr().cast(), &mut c),
            CausticsStatus::InvalidUtf8
        );
        let e = chart(r#"{"builder": "confocal_elliptic", "a": 2, "b": 1}"#);
        let mut g = [0.0; 3];
        assert_eq!(
            caustics_chart_metric(e, 0.5, 0.5, g.as_mut_ptr()),
            CausticsStatus::Configuration
        );
        let mut d = 0.0;
        assert_eq!(
            caustics_ivory_defect(e, 0.8, 0.2, -1.8, -1.2, &mut d),
            CausticsStatus::Configuration
        );
        caustics_chart_free(e);
        caustics_chart_free(ptr::null_mut());
    }
}

#[test]
fn last_error_truncates() {
    let mut c = ptr::null_mut();
    unsafe {
        caustics_chart_from_json(ptr::null(), &mut c);
        let full = caustics_last_error(ptr::null_mut(), 0);
        let mut small = [1 as c_char; 5];
        assert_eq!(caustics_last_error(small.as_mut_ptr(), 5), full);
        assert_eq!(CStr::from_ptr(small.as_ptr()).to_bytes(), b"null");
    }
}

#[test]
fn circle_billiard_and_string() {
    let mut t = ptr::null_mut();
    let (mut s, mut p, mut b) = (0.0, 0.0, 0.0);
    let alpha = 0.4f64;
    unsafe {
        let spec = cstr(r#"{"shape": {"kind": "circle", "radius": 1.0}}"#);
        assert_eq!(
            caustics_curve_from_json(spec.as_ptr(), ptr::null(), &mut t),
            CausticsStatus::Ok
        );
        assert_eq!(
            caustics_billiard_map(t, 0.0, 0.5, &mut s, &mut p),
            CausticsStatus::Ok
        );
        // excess of the string around the unit circle over an arc 2α is 2 tan α − 2α
        let excess = 2.0 * alpha.tan() - 2.0 * alpha;
        assert_eq!(
            caustics_string_diffeo(t, excess, 0.1, &mut b),
            CausticsStatus::Ok
        );
        assert_eq!(
            caustics_billiard_map(t, 0.0, 1.5, &mut s, &mut p),
            CausticsStatus::Configuration
        );
        caustics_curve_free(t);
    }
    assert!((s - 2.0 * std::f64::consts::FRAC_PI_3).abs() < 1e-9 && (p - 0.5).abs() < 1e-9);
    assert!(
        (b - (0.1 + alpha / std::f64::consts::PI)).abs() < 1e-10,
        "{b}"
    );
}

#[test]
fn poritsky_on_circle_is_arclength() {
    let mut t = ptr::null_mut();
    let mut par = ptr::null_mut();
    let (mut v, mut rho) = (0.0, 0.0);
    unsafe {
        let spec = cstr(r#"{"shape": {"kind": "circle", "radius": 1.0}}"#);
        caustics_curve_from_json(spec.as_ptr(), ptr::null(), &mut t);
        let st = caustics_poritsky_new(t, 0.05, 5000, &mut par);
        assert_eq!(st, CausticsStatus::Ok, "{}", last_error());
        assert_eq!(
            caustics_poritsky_eval(par, 0.3, true, &mut v),
            CausticsStatus::Ok
        );
        assert_eq!(
            caustics_poritsky_rotation(par, &mut rho),
            CausticsStatus::Ok
        );
        caustics_poritsky_free(par);
        caustics_curve_free(t);
    }
    assert!((v - 0.3).abs() < 1e-6, "{v}");
    assert!(rho > 0.0 && rho < 0.5);
}

#[test]
fn suite_reports_precondition_failure() {
    let cfg = r#"{"name": "straight", "chart": {"builder": "euclidean_cartesian"},
        "suite": {"leaves": [{"shape": {"kind": "segment", "from": [0, 0], "to": [1, 0]}}],
                  "quads": {"count": 2, "u": [0, 1], "v": [0, 1], "side": [0.2, 0.4]}}}"#;
    let mut report: *mut c_char = ptr::null_mut();
    let mut code: c_int = -1;
    let text = unsafe {
        let st = caustics_suite_run(cstr(cfg).as_ptr(), &mut report, &mut code);
        assert_eq!(st, CausticsStatus::Ok, "{}", last_error());
        let s = CStr::from_ptr(report).to_string_lossy().into_owned();
        caustics_string_free(report);
        s
    };
    assert_eq!(code, 2);
    assert!(text.contains("geodesically convex"));
}

#[test]
fn header_compiles_and_links() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let profile_dir = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    let lib = profile_dir.join("libcaustics_ffi.a");
    assert!(
        lib.exists(),
        "static library not found at {}",
        lib.display()
    );
    let exe = std::env::temp_dir().join(format!("caustics_smoke_{}", std::process::id()));
    let status = Command::new("cc")
        .arg(root.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(root.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("a C compiler");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    let _ = std::fs::remove_file(&exe);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok 0.1.0"));
}
