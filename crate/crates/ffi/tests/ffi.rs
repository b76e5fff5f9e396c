use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use kronlab_ffi::*;

const SIGMA: &str = r#"{"atoms":[{"pos":"1","w":"1/2"},{"pos":"1.4142135623730951","w":"1/2"}],"density":[],"tier":"numeric"}"#;

fn cstrings(items: &[&str]) -> (Vec<CString>, Vec<*const c_char>) {
    let owned: Vec<CString> = items.iter().map(|s| CString::new(*s).unwrap()).collect();
    let ptrs = owned.iter().map(|s| s.as_ptr()).collect();
    (owned, ptrs)
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(kl_last_error()) }.to_str().unwrap().to_string()
}

fn measure(json: &str) -> *mut KlMeasure {
    let json = CString::new(json).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { kl_measure_from_json(json.as_ptr(), &mut m) }, KlStatus::Ok);
    m
}

#[test]
fn measures_round_trip_and_transform() {
    let m = measure(SIGMA);
    let mut out: *mut c_char = ptr::null_mut();
    assert_eq!(unsafe { kl_measure_to_json(m, &mut out) }, KlStatus::Ok);
    assert_eq!(unsafe { CStr::from_ptr(out) }.to_str().unwrap(), SIGMA);
    unsafe { kl_string_free(out) };
    let (mut re, mut im) = (0.0, 0.0);
    assert_eq!(unsafe { kl_measure_bochner(m, 0.0, &mut re, &mut im) }, KlStatus::Ok);
    assert_eq!((re, im), (1.0, 0.0));
    unsafe { kl_measure_free(m) };
}

#[test]
fn solves_and_reports_misses() {
    let (_keep, pts) = cstrings(&["1", "sqrt(2)", "sqrt(3)"]);
    let phases = [0.3, 0.6, 0.9];
    let mut w = KlWitness::default();
    let status = unsafe { kl_solve_kronecker(pts.as_ptr(), phases.as_ptr(), 3, 0.05, 1.0, KlMethod::Lattice, &mut w) };
    assert_eq!(status, KlStatus::Ok, "{}", last_error());
    assert!(w.t >= 1.0 && w.max_residual < 0.05);
    let status = unsafe { kl_solve_kronecker(pts.as_ptr(), phases.as_ptr(), 3, -1.0, 1.0, KlMethod::Grid, &mut w) };
    assert_eq!(status, KlStatus::InvalidArgument);
    let bad = [1.5, 0.0, 0.0];
    let status = unsafe { kl_solve_kronecker(pts.as_ptr(), bad.as_ptr(), 3, 0.05, 1.0, KlMethod::Grid, &mut w) };
    assert_eq!(status, KlStatus::InvalidArgument);
    assert!(last_error().contains("1.5"), "{}", last_error());
}

#[test]
fn rigidity_witness_through_a_handle() {
    let m = measure(SIGMA);
    let mut w = KlWitness::default();
    assert_eq!(unsafe { kl_rigidity_witness(m, 0.1, 1.0, KlMethod::Lattice, &mut w) }, KlStatus::Ok);
    assert!(w.max_residual <= 0.0766 + 1e-6);
    unsafe { kl_measure_free(m) };
}

#[test]
fn relations_and_independence() {
    let (_keep, xs) = cstrings(&["1", "sqrt(2)", "1+sqrt(2)"]);
    let mut ks = [0i64; 3];
    assert_eq!(unsafe { kl_find_integer_relation(xs.as_ptr(), 3, 10, 128, ks.as_mut_ptr()) }, KlStatus::Ok);
    assert!(ks == [1, 1, -1] || ks == [-1, -1, 1], "{ks:?}");
    let (_keep, ys) = cstrings(&["1", "sqrt(2)", "sqrt(3)", "sqrt(6)"]);
    let mut ks = [0i64; 4];
    assert_eq!(unsafe { kl_find_integer_relation(ys.as_ptr(), 4, 10_000, 128, ks.as_mut_ptr()) }, KlStatus::NotFound);
    let (_keep, taus) = cstrings(&["tau", "tau^2", "tau^-1"]);
    let mut v = KlIndependence::Dependent;
    assert_eq!(unsafe { kl_check_independence(taus.as_ptr(), 3, KlTier::Symbolic, 100, &mut v) }, KlStatus::Ok);
    assert_eq!(v, KlIndependence::IndependentExact);
    let (_keep, bad) = cstrings(&["tau +"]);
    assert_eq!(unsafe { kl_check_independence(bad.as_ptr(), 1, KlTier::Symbolic, 100, &mut v) }, KlStatus::Parse);
}

#[test]
fn simulation_fills_the_buffer_deterministically() {
    let m = measure(SIGMA);
    let mut a = vec![0.0; 5 * 4];
    let mut b = vec![0.0; 5 * 4];
    assert_eq!(unsafe { kl_simulate(m, 0.0, 0.5, 5, 4, 3, a.as_mut_ptr(), a.len()) }, KlStatus::Ok);
    assert_eq!(unsafe { kl_simulate(m, 0.0, 0.5, 5, 4, 3, b.as_mut_ptr(), b.len()) }, KlStatus::Ok);
    assert_eq!(a, b);
    assert!(a.iter().any(|&x| x != 0.0));
    let mut short = vec![0.0; 3];
    assert_eq!(unsafe { kl_simulate(m, 0.0, 0.5, 5, 4, 3, short.as_mut_ptr(), 3) }, KlStatus::BufferTooSmall);
    unsafe { kl_measure_free(m) };
}

#[test]
fn version_is_the_crate_version() {
    assert_eq!(unsafe { CStr::from_ptr(kl_version()) }.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/kronlab.h");
    assert!(header.exists());
    for (cc, lang) in [("cc", "c"), ("c++", "c++")] {
        let status = Command::new(cc).args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang]).arg(&header).status();
        match status {
            Ok(s) => assert!(s.success(), "{cc} rejected the header"),
            Err(e) => eprintln!("{cc} unavailable: {e}"),
        }
    }
}
