use std::ffi::{c_void, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use singbern_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(sb_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn psi_handle() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { sb_psi_new(1, &mut h) }, SbStatus::Ok);
    let mut buf = [0.0; 3];
    let mut written = 0;
    assert_eq!(unsafe { sb_psi_coeffs(h, buf.as_mut_ptr(), 3, &mut written) }, SbStatus::Ok);
    assert_eq!(written, 3);
    for (a, e) in buf.iter().zip([10.0, -15.0, 6.0]) {
        assert!((a - e).abs() < 1e-12);
    }
    assert!((unsafe { sb_psi_eval(h, 0.5) } - 0.5).abs() < 1e-15);
    let mut small = [0.0; 2];
    assert_eq!(
        unsafe { sb_psi_coeffs(h, small.as_mut_ptr(), 2, &mut written) },
        SbStatus::BufferTooSmall
    );
    assert_eq!(written, 3);
    unsafe { sb_psi_free(h) };

    assert_eq!(unsafe { sb_psi_new(6, &mut h) }, SbStatus::InvalidArgument);
    assert!(last_error().contains("unsupported order"));
    assert_eq!(unsafe { sb_psi_new(1, ptr::null_mut()) }, SbStatus::NullPointer);
    assert!(unsafe { sb_psi_eval(ptr::null(), 0.5) }.is_nan());
    unsafe { sb_psi_free(ptr::null_mut()) };
}

#[test]
fn scheme_handle() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { sb_scheme_new(8, 2, SbLadder::Doubling, &mut h) }, SbStatus::Ok);
    assert_eq!(unsafe { sb_scheme_len(h) }, 2);
    let mut degrees = [0usize; 2];
    let mut coeffs = [0.0; 2];
    assert_eq!(
        unsafe { sb_scheme_degrees(h, degrees.as_mut_ptr(), 2, ptr::null_mut()) },
        SbStatus::Ok
    );
    assert_eq!(unsafe { sb_scheme_coeffs(h, coeffs.as_mut_ptr(), 2, ptr::null_mut()) }, SbStatus::Ok);
    assert_eq!(degrees, [8, 16]);
    assert!((coeffs[0] + 1.0).abs() < 1e-12 && (coeffs[1] - 2.0).abs() < 1e-12);
    unsafe { sb_scheme_free(h) };
    assert_eq!(
        unsafe { sb_scheme_new(1, 2, SbLadder::Arithmetic, &mut h) },
        SbStatus::InvalidArgument
    );
    assert_eq!(unsafe { sb_scheme_len(ptr::null()) }, 0);
}

unsafe extern "C" fn abs_with_offset(x: f64, data: *mut c_void) -> f64 {
    let xi = *(data as *const f64);
    (x - xi).abs()
}

unsafe extern "C" fn square(x: f64, _: *mut c_void) -> f64 {
    x * x
}

#[test]
fn modified_operator_from_callback() {
    let mut xi = 0.5f64;
    let mut h = ptr::null_mut();
    let status = unsafe {
        sb_modified_new(
            Some(square),
            ptr::null_mut(),
            128,
            3,
            0.3,
            SbLadder::Doubling,
            &mut h,
        )
    };
    assert_eq!(status, SbStatus::Ok);
    let mut v = 0.0;
    for x in [0.1, 0.3, 0.31, 0.9] {
        assert_eq!(unsafe { sb_modified_eval(h, x, &mut v) }, SbStatus::Ok);
        assert!((v - x * x).abs() < 1e-9, "{x}: {v}");
        assert_eq!(unsafe { sb_modified_deriv(h, 2, x, &mut v) }, SbStatus::Ok);
        assert!((v - 2.0).abs() < 1e-6, "{x}: {v}");
    }
    assert_eq!(unsafe { sb_modified_deriv(h, 500, 0.5, &mut v) }, SbStatus::InvalidArgument);
    unsafe { sb_modified_free(h) };

    let data = &mut xi as *mut f64 as *mut c_void;
    let status = unsafe { sb_modified_new(Some(abs_with_offset), data, 64, 2, 0.5, SbLadder::Doubling, &mut h) };
    assert_eq!(status, SbStatus::Ok);
    unsafe { sb_modified_free(h) };
    let status = unsafe { sb_modified_new(Some(abs_with_offset), data, 4, 2, 0.5, SbLadder::Doubling, &mut h) };
    assert_eq!(status, SbStatus::NTooSmall);
    assert!(!last_error().is_empty());
    let status = unsafe { sb_modified_new(None, data, 64, 2, 0.5, SbLadder::Doubling, &mut h) };
    assert_eq!(status, SbStatus::NullPointer);
    assert_eq!(unsafe { sb_modified_eval(ptr::null(), 0.5, &mut v) }, SbStatus::NullPointer);
}

#[test]
fn corpus_and_modulus() {
    let name = CString::new("poly3").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { sb_corpus_new(name.as_ptr(), 0.5, &mut h) }, SbStatus::Ok);
    assert_eq!(unsafe { sb_corpus_eval(h, 0.5) }, 0.125);
    let mut omega = 0.0;
    let status = unsafe { sb_weighted_modulus(h, 0.5, 1.0, 0.5, 0.5, 4, 0.1, 257, 64, &mut omega) };
    assert_eq!(status, SbStatus::Ok);
    assert!(omega.abs() < 1e-12);
    let status = unsafe { sb_weighted_modulus(h, 0.5, 1.0, 0.5, 0.5, 2, 0.1, 10, 64, &mut omega) };
    assert_eq!(status, SbStatus::InvalidArgument);
    unsafe { sb_corpus_free(h) };

    let bad = CString::new("cosh").unwrap();
    assert_eq!(unsafe { sb_corpus_new(bad.as_ptr(), 0.5, &mut h) }, SbStatus::Config);
    assert_eq!(unsafe { sb_corpus_new(ptr::null(), 0.5, &mut h) }, SbStatus::NullPointer);
}

#[test]
fn basis_and_binomial() {
    assert!((sb_basis(10, 3, 0.3) - 0.266_827_932).abs() < 1e-9);
    assert_eq!(sb_basis(10, 11, 0.3), 0.0);
    assert!((sb_log_binomial(10, 3) - 120f64.ln()).abs() < 1e-13);
    assert_eq!(sb_log_binomial(10, -1), f64::NEG_INFINITY);
    let v = unsafe { CStr::from_ptr(sb_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn run_config_round_trip() {
    let cfg = CString::new(r#"{"experiment": "psi", "r": 1}"#).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { sb_run_config(cfg.as_ptr(), &mut out) }, SbStatus::Ok);
    let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
    unsafe { sb_string_free(out) };
    assert!(text.starts_with("key,measured,reference,ratio\n"));
    assert_eq!(text.lines().count(), 4);

    let bad = CString::new(r#"{"experiment": "psi", "typo": 1}"#).unwrap();
    assert_eq!(unsafe { sb_run_config(bad.as_ptr(), &mut out) }, SbStatus::Config);
    assert!(last_error().contains("typo"));
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/singbern.h")).unwrap();
    for needle in [
        "#ifndef SINGBERN_H",
        "SB_STATUS_OK = 0",
        "SB_STATUS_PANIC",
        "SB_LADDER_DOUBLING",
        "typedef struct SbPsi SbPsi;",
        "typedef struct SbScheme SbScheme;",
        "typedef struct SbModified SbModified;",
        "typedef struct SbCorpusFunction SbCorpusFunction;",
        "typedef double (*SbFunction)(double x, void *user_data);",
        "enum SbStatus sb_psi_new(size_t r, struct SbPsi **out);",
        "sb_modified_new(",
        "sb_run_config(",
        "void sb_string_free(char *s);",
        "const char *sb_last_error_message(void);",
    ] {
        assert!(header.contains(needle), "missing `{needle}`");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = Command::new("cc").arg("--version").output() else {
        return;
    };
    if !cc.status.success() {
        return;
    }
    let dir = tempdir();
    let src = dir.join("probe.c");
    std::fs::write(
        &src,
        "#include \"singbern.h\"\nint main(void) { SbPsi *p = 0; return sb_psi_new(1, &p) == SB_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn tempdir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("singbern-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
