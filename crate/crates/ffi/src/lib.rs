//! C interface to kronlab.
//!
//! Every function returns a [`KlStatus`]. On failure the message is kept per
//! thread and can be read with [`kl_last_error`]. Strings returned through
//! out-parameters are owned by the caller and released with
//! [`kl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kronlab::gaussflow::{simulate, Grid, ProcessSpec};
use kronlab::kronecker::{rigidity_witness, solve_kronecker_approx, Approximation, SolveOptions, UnimodularTarget};
use kronlab::numkit::expr::eval_expr;
use kronlab::numkit::{find_integer_relation, Real, RelationSearch, Tier};
use kronlab::qindep::{check_q_independence, Bounds, IndependenceStatus};
use kronlab::specmeasure::{bochner, Measure};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    /// The search ran within its budget without success.
    NotFound = 4,
    BufferTooSmall = 5,
    Internal = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KlTier {
    Symbolic = 0,
    Numeric = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KlMethod {
    Lattice = 0,
    Grid = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KlIndependence {
    IndependentExact = 0,
    Dependent = 1,
    NoneFoundWithinBounds = 2,
}

/// A witness time and its largest chord residual.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct KlWitness {
    pub t: f64,
    pub max_residual: f64,
}

/// Opaque spectral measure.
pub struct KlMeasure(Measure);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(KlStatus, String);

impl Failure {
    fn new(status: KlStatus, msg: impl ToString) -> Self {
        Failure(status, msg.to_string())
    }
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<KlStatus, Failure>) -> KlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => {
            set_error("");
            status
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            KlStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(KlStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::new(KlStatus::Parse, format!("{what} is not UTF-8")))
}

unsafe fn texts<'a>(p: *const *const c_char, n: usize, what: &str) -> Result<Vec<&'a str>, Failure> {
    if p.is_null() {
        return Err(Failure::new(KlStatus::NullPointer, format!("{what} is null")));
    }
    (0..n).map(|i| text(*p.add(i), what)).collect()
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure::new(KlStatus::NullPointer, format!("{what} is null")))
}

fn parse_err(e: impl ToString) -> Failure {
    Failure::new(KlStatus::Parse, e)
}

fn arg_err(e: impl ToString) -> Failure {
    Failure::new(KlStatus::InvalidArgument, e)
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next kronlab call on the same thread.
#[no_mangle]
pub extern "C" fn kl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn kl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn kl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a measure from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kl_measure_from_json(json: *const c_char, out_measure: *mut *mut KlMeasure) -> KlStatus {
    guard(|| {
        let slot = out(out_measure, "out_measure")?;
        *slot = ptr::null_mut();
        let m = Measure::from_json_str(text(json, "json")?).map_err(parse_err)?;
        *slot = Box::into_raw(Box::new(KlMeasure(m)));
        Ok(KlStatus::Ok)
    })
}

/// # Safety
/// `m` must be null or a measure from [`kl_measure_from_json`], freed once.
#[no_mangle]
pub unsafe extern "C" fn kl_measure_free(m: *mut KlMeasure) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Canonical JSON of the measure; free with [`kl_string_free`].
///
/// # Safety
/// `m` must be a live measure and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kl_measure_to_json(m: *const KlMeasure, out_json: *mut *mut c_char) -> KlStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| Failure::new(KlStatus::NullPointer, "measure is null"))?;
        let slot = out(out_json, "out_json")?;
        *slot = CString::new(m.0.to_json_string()).map_err(|e| Failure::new(KlStatus::Internal, e))?.into_raw();
        Ok(KlStatus::Ok)
    })
}

/// `integral exp(2 pi i t x) d sigma(x)`.
///
/// # Safety
/// `m` must be a live measure; `re` and `im` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn kl_measure_bochner(m: *const KlMeasure, t: f64, re: *mut f64, im: *mut f64) -> KlStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| Failure::new(KlStatus::NullPointer, "measure is null"))?;
        let (re, im) = (out(re, "re")?, out(im, "im")?);
        let z = bochner(&m.0, t).map_err(arg_err)?;
        (*re, *im) = (z.re, z.im);
        Ok(KlStatus::Ok)
    })
}

fn options(method: KlMethod) -> SolveOptions {
    match method {
        KlMethod::Lattice => SolveOptions::default(),
        KlMethod::Grid => SolveOptions::grid(),
    }
}

fn report(a: Approximation, w: &mut KlWitness) -> KlStatus {
    let found = a.is_found();
    let best = a.witness();
    *w = KlWitness { t: best.t, max_residual: best.max_residual };
    if found {
        KlStatus::Ok
    } else {
        KlStatus::NotFound
    }
}

/// Finds `t >= t_min` with `|exp(2 pi i t x_j) - exp(2 pi i phase_j)| < eps`
/// for all `j`. Points are numeric expressions such as `"sqrt(2)"`. On
/// `KL_STATUS_NOT_FOUND` the witness holds the best time examined.
///
/// # Safety
/// `points` and `phases` must hold `n` entries; `witness` must be valid.
#[no_mangle]
pub unsafe extern "C" fn kl_solve_kronecker(
    points: *const *const c_char,
    phases: *const f64,
    n: usize,
    eps: f64,
    t_min: f64,
    method: KlMethod,
    witness: *mut KlWitness,
) -> KlStatus {
    let status = guard(|| {
        let w = out(witness, "witness")?;
        let exprs = texts(points, n, "points")?;
        if phases.is_null() {
            return Err(Failure::new(KlStatus::NullPointer, "phases is null"));
        }
        let phases = std::slice::from_raw_parts(phases, n).to_vec();
        let xs = exprs.iter().map(|e| eval_expr(e, 128)).collect::<Result<Vec<_>, _>>().map_err(parse_err)?;
        let target = UnimodularTarget::new(xs, phases).map_err(arg_err)?;
        let a = solve_kronecker_approx(&target, eps, t_min, &options(method)).map_err(arg_err)?;
        Ok(report(a, w))
    });
    keep_not_found_message(status)
}

fn keep_not_found_message(status: KlStatus) -> KlStatus {
    if status == KlStatus::NotFound {
        set_error("no witness within the search budget");
    }
    status
}

/// A Dirichlet witness: every `exp(2 pi i t x)` within `eps` of 1 over the
/// atoms of `m`.
///
/// # Safety
/// `m` must be a live measure and `witness` valid.
#[no_mangle]
pub unsafe extern "C" fn kl_rigidity_witness(
    m: *const KlMeasure,
    eps: f64,
    t_min: f64,
    method: KlMethod,
    witness: *mut KlWitness,
) -> KlStatus {
    let status = guard(|| {
        let m = m.as_ref().ok_or_else(|| Failure::new(KlStatus::NullPointer, "measure is null"))?;
        let w = out(witness, "witness")?;
        let a = rigidity_witness(&m.0, eps, t_min, &options(method)).map_err(arg_err)?;
        Ok(report(a, w))
    });
    keep_not_found_message(status)
}

/// Integer relation search with `|k_i| <= max_coeff`. On success writes `n`
/// coefficients; returns `KL_STATUS_NOT_FOUND` when none exists within the
/// bounds.
///
/// # Safety
/// `values` must hold `n` strings and `coefficients` room for `n` entries.
#[no_mangle]
pub unsafe extern "C" fn kl_find_integer_relation(
    values: *const *const c_char,
    n: usize,
    max_coeff: u64,
    precision_bits: usize,
    coefficients: *mut i64,
) -> KlStatus {
    let status = guard(|| {
        let exprs = texts(values, n, "values")?;
        if coefficients.is_null() {
            return Err(Failure::new(KlStatus::NullPointer, "coefficients is null"));
        }
        let xs = exprs.iter().map(|e| eval_expr(e, precision_bits)).collect::<Result<Vec<_>, _>>().map_err(parse_err)?;
        match find_integer_relation(&xs, max_coeff, precision_bits).map_err(arg_err)? {
            RelationSearch::Found(rel) => {
                let ks = kronlab::numkit::relation::coefficients_i64(&rel)
                    .ok_or_else(|| Failure::new(KlStatus::BufferTooSmall, "coefficient exceeds 64 bits"))?;
                std::slice::from_raw_parts_mut(coefficients, n).copy_from_slice(&ks);
                Ok(KlStatus::Ok)
            }
            RelationSearch::NoneFound { .. } => Ok(KlStatus::NotFound),
        }
    });
    if status == KlStatus::NotFound {
        set_error("no relation within the bounds");
    }
    status
}

/// Rational independence of `n` values in the given tier. Symbolic values
/// use canonical text such as `"0+1*tau^2"` or `"tau^2"`.
///
/// # Safety
/// `values` must hold `n` strings and `verdict` be valid.
#[no_mangle]
pub unsafe extern "C" fn kl_check_independence(
    values: *const *const c_char,
    n: usize,
    tier: KlTier,
    max_coeff: u64,
    verdict: *mut KlIndependence,
) -> KlStatus {
    guard(|| {
        let slot = out(verdict, "verdict")?;
        let tier = match tier {
            KlTier::Symbolic => Tier::Symbolic,
            KlTier::Numeric => Tier::Numeric,
        };
        let xs = texts(values, n, "values")?
            .iter()
            .map(|t| Real::parse(t, tier, 128))
            .collect::<Result<Vec<_>, _>>()
            .map_err(parse_err)?;
        let v = check_q_independence(&xs, Bounds { max_coeff, precision_bits: 128 }).map_err(arg_err)?;
        *slot = match v.status {
            IndependenceStatus::IndependentExact => KlIndependence::IndependentExact,
            IndependenceStatus::Dependent => KlIndependence::Dependent,
            IndependenceStatus::NoneFoundWithinBounds => KlIndependence::NoneFoundWithinBounds,
        };
        Ok(KlStatus::Ok)
    })
}

/// Simulates `paths` paths of the real stationary Gaussian process with
/// spectral measure `m` on `t0 + k * step`, `k < count`. Values are written
/// row-major, path by path, into `values`, which must hold `len` doubles.
///
/// # Safety
/// `m` must be a live measure and `values` point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn kl_simulate(
    m: *const KlMeasure,
    t0: f64,
    step: f64,
    count: usize,
    paths: usize,
    seed: u64,
    values: *mut f64,
    len: usize,
) -> KlStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| Failure::new(KlStatus::NullPointer, "measure is null"))?;
        if values.is_null() {
            return Err(Failure::new(KlStatus::NullPointer, "values is null"));
        }
        let needed = count.checked_mul(paths).ok_or_else(|| arg_err("count * paths overflows"))?;
        if len < needed {
            return Err(Failure::new(KlStatus::BufferTooSmall, format!("need {needed} doubles, got {len}")));
        }
        let sample = simulate(&ProcessSpec::new(m.0.clone(), Grid { t0, step, count }, paths, seed)).map_err(arg_err)?;
        let dst = std::slice::from_raw_parts_mut(values, needed);
        for (row, path) in dst.chunks_mut(count).zip(&sample.values) {
            row.copy_from_slice(path);
        }
        Ok(KlStatus::Ok)
    })
}
