use std::ffi::{c_void, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use tensorlab_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(tl_last_error()) }.to_string_lossy().into_owned()
}

fn parse(expr: &str, bound: usize) -> *mut TlIntSet {
    let c = CString::new(expr).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { tl_intset_parse(c.as_ptr(), bound, &mut out) }, TlStatus::Ok, "{}", last_error());
    out
}

#[test]
fn set_round_trip() {
    let s = parse("mod 4: 0, 2 | 1..3", 16);
    unsafe {
        // evens below 16 plus {1, 3}
        assert_eq!(tl_intset_len(s), 10);
        assert!(tl_intset_contains(s, 3));
        assert!(!tl_intset_contains(s, 5));
        assert!(!tl_intset_contains(s, 16));
        tl_intset_free(s);
    }
}

#[test]
fn parse_errors_set_message() {
    let c = CString::new("mod 4: 7").unwrap();
    let mut out = ptr::null_mut();
    let st = unsafe { tl_intset_parse(c.as_ptr(), 16, &mut out) };
    assert_eq!(st, TlStatus::InvalidArgument);
    assert!(out.is_null());
    assert!(!last_error().is_empty());

    let st = unsafe { tl_intset_parse(ptr::null(), 16, &mut out) };
    assert_eq!(st, TlStatus::NullPointer);
    assert!(last_error().contains("expr"));
}

#[test]
fn null_handles_are_tolerated() {
    unsafe {
        assert_eq!(tl_intset_len(ptr::null()), 0);
        assert!(!tl_intset_contains(ptr::null(), 0));
        tl_intset_free(ptr::null_mut());
        tl_certificate_free(ptr::null_mut());
        tl_string_free(ptr::null_mut());
        let (mut lo, mut hi) = (0.0, 0.0);
        assert_eq!(tl_density(ptr::null(), TlDensityKind::Banach, &mut lo, &mut hi), TlStatus::NullPointer);
    }
}

#[test]
fn from_values_rejects_out_of_range() {
    let vals = [1usize, 5, 9];
    let mut out = ptr::null_mut();
    unsafe {
        assert_eq!(tl_intset_from_values(vals.as_ptr(), 3, 8, &mut out), TlStatus::InvalidArgument);
        assert_eq!(tl_intset_from_values(vals.as_ptr(), 3, 10, &mut out), TlStatus::Ok);
        assert_eq!(tl_intset_len(out), 3);
        tl_intset_free(out);
        assert_eq!(tl_intset_from_values(ptr::null(), 0, 10, &mut out), TlStatus::Ok);
        assert_eq!(tl_intset_len(out), 0);
        tl_intset_free(out);
    }
}

#[test]
fn density_of_residue_class() {
    let s = parse("mod 4: 0, 2", 1024);
    let (mut lo, mut hi) = (f64::NAN, f64::NAN);
    unsafe {
        assert_eq!(tl_density(s, TlDensityKind::Asymptotic, &mut lo, &mut hi), TlStatus::Ok);
        assert!((lo - 0.5).abs() < 0.01 && (hi - 0.5).abs() < 0.01, "{lo} {hi}");
        // positions 1..n: odd n carries one fewer even, so the inf is at n = 1
        assert_eq!(tl_density(s, TlDensityKind::Schnirelmann, &mut lo, &mut hi), TlStatus::Ok);
        assert_eq!(lo, 0.0);
        tl_intset_free(s);
    }
}

#[test]
fn sumset_search_and_verify() {
    let s = parse("mod 4: 0, 2", 16);
    let mults = [2usize];
    let mut cert = ptr::null_mut();
    unsafe {
        assert_eq!(tl_find_sumset(s, mults.as_ptr(), 1, 3, 0, &mut cert), TlStatus::Ok, "{}", last_error());
        assert_eq!(tl_certificate_sets(cert), 1);

        let mut buf = [0usize; 3];
        let mut n = 0;
        assert_eq!(tl_certificate_members(cert, 0, buf.as_mut_ptr(), 2, &mut n), TlStatus::InvalidArgument);
        assert_eq!(n, 3);
        assert_eq!(tl_certificate_members(cert, 0, buf.as_mut_ptr(), 3, &mut n), TlStatus::Ok);
        for a in 0..3 {
            for b in a + 1..3 {
                assert_eq!((buf[a] + buf[b]) % 2, 0, "{buf:?}");
            }
        }
        assert_eq!(tl_certificate_members(cert, 1, buf.as_mut_ptr(), 3, &mut n), TlStatus::InvalidArgument);

        let mut passed = false;
        assert_eq!(tl_certificate_verify(s, cert, &mut passed), TlStatus::Ok);
        assert!(passed);

        let mut json = ptr::null_mut();
        assert_eq!(tl_certificate_json(cert, &mut json), TlStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        tl_string_free(json);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let sets: Vec<Vec<usize>> = serde_json::from_value(v["sets"].clone()).unwrap();
        assert_eq!(sets[0], buf.to_vec());

        // a certificate for one set fails against a set missing its sums
        let other = parse(&format!("~{}", buf[0] + buf[1]), 16);
        assert_eq!(tl_certificate_verify(other, cert, &mut passed), TlStatus::Ok);
        assert!(!passed);

        tl_intset_free(other);
        tl_certificate_free(cert);
        tl_intset_free(s);
    }
}

#[test]
fn sumset_not_found() {
    let s = parse("1", 16);
    let mults = [1usize, 1];
    let mut cert = ptr::null_mut();
    unsafe {
        assert_eq!(tl_find_sumset(s, mults.as_ptr(), 2, 2, 0, &mut cert), TlStatus::NotFound);
        assert!(cert.is_null());
        let bad = [0usize];
        assert_eq!(tl_find_sumset(s, bad.as_ptr(), 1, 2, 0, &mut cert), TlStatus::InvalidArgument);
        tl_intset_free(s);
    }
}

#[test]
fn model_check() {
    let mut passed = false;
    unsafe {
        assert_eq!(tl_check_model(2, 2, 0, &mut passed), TlStatus::Ok);
        assert!(passed);
        passed = false;
        assert_eq!(tl_check_model(2, 1, 2, &mut passed), TlStatus::Ok);
        assert!(passed);
        assert_eq!(tl_check_model(0, 2, 0, &mut passed), TlStatus::InvalidArgument);
    }
}

extern "C" fn gauss(x: f64, user: *mut c_void) -> f64 {
    let scale = unsafe { *(user as *const f64) };
    scale * (-x * x).exp()
}

#[test]
fn integrate_through_callback() {
    let mut scale = 2.0f64;
    let mut out = 0.0;
    let st = unsafe { tl_integrate(Some(gauss), (&mut scale as *mut f64).cast(), 1e-6, 16, 256, &mut out) };
    assert_eq!(st, TlStatus::Ok, "{}", last_error());
    assert!((out - 2.0 * std::f64::consts::PI.sqrt()).abs() < 2e-3, "{out}");
    let st = unsafe { tl_integrate(None, ptr::null_mut(), 1e-6, 16, 256, &mut out) };
    assert_eq!(st, TlStatus::NullPointer);
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(tl_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn error_is_cleared_after_success() {
    let mut out = ptr::null_mut();
    unsafe { tl_intset_parse(ptr::null(), 4, &mut out) };
    assert!(!last_error().is_empty());
    let s = parse("all", 4);
    assert!(last_error().is_empty());
    unsafe { tl_intset_free(s) };
}

#[test]
fn header_compiles_as_c() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = dir.join("include/tensorlab.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "tl_last_error", "tl_version", "tl_intset_parse", "tl_intset_from_values", "tl_intset_free",
        "tl_intset_len", "tl_intset_contains", "tl_density", "tl_find_sumset", "tl_certificate_free",
        "tl_certificate_sets", "tl_certificate_members", "tl_certificate_json", "tl_certificate_verify",
        "tl_string_free", "tl_check_model", "tl_integrate", "TL_STATUS_NOT_FOUND",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
    let probe = std::env::temp_dir().join(format!("tensorlab_header_{}.c", std::process::id()));
    std::fs::write(&probe, "#include \"tensorlab.h\"\nint main(void) { return tl_version() == 0; }\n").unwrap();
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(dir.join("include"))
        .arg(&probe)
        .output()
        .expect("a C compiler on PATH");
    let _ = std::fs::remove_file(&probe);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
