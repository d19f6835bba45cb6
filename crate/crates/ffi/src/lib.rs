//! C interface to `ballrecon`.
//!
//! Measures and premeasures live behind opaque handles. Every function
//! returns a [`BrStatus`]; on failure a message is kept per thread and can be
//! read with [`br_last_error`]. Points are passed as flat `double` arrays of
//! `n * dim` coordinates.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ballrecon::besicovitch::{greedy_subfamilies, BallFamily};
use ballrecon::covering::{caratheodory_sweep, CoverStrategy};
use ballrecon::measure::{PolylineChain, SignedMeasure};
use ballrecon::metric::{Ball, MetricSpace, Point};
use ballrecon::packing::{packing_sweep, PackingStrategy};
use ballrecon::premeasure::Premeasure;
use ballrecon::region::OpenSet;
use ballrecon::solver::set_cover::CoverLimits;
use ballrecon::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DomainError = 3,
    /// A bound could not be met, e.g. too many Besicovitch subfamilies.
    Infeasible = 4,
    /// A Rust panic was caught at the boundary.
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrPremeasureKind {
    /// `q(B) = mu(B)`.
    Exact = 0,
    /// `q(B_r) = (1/r) int_0^r mu(B_s) ds`.
    Averaged = 1,
}

/// Signed measure on Euclidean space: atoms plus polyline chains.
pub struct BrMeasure(SignedMeasure);

pub struct BrPremeasure(Premeasure);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(BrStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Domain(_) => BrStatus::DomainError,
            Error::SubfamilyBoundExceeded { .. } => BrStatus::Infeasible,
            _ => BrStatus::InvalidArgument,
        };
        Fail(status, e.to_string())
    }
}

fn null(name: &str) -> Fail {
    Fail(BrStatus::NullPointer, format!("`{name}` is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(BrStatus::InvalidArgument, msg.into())
}

fn guard(body: impl FnOnce() -> Result<(), Fail>) -> BrStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => BrStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            BrStatus::Panic
        }
    }
}

/// # Safety
/// `p` is null or points to `len` readable values.
unsafe fn slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// # Safety
/// `p` is null or points to `len` writable values.
unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, name: &str) -> Result<&'a mut [T], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(name))
}

fn dim_of(space: &MetricSpace) -> usize {
    space.dim().expect("handles only hold Euclidean measures")
}

fn points(flat: &[f64], dim: usize) -> Vec<Point> {
    flat.chunks(dim).map(Point::euclidean).collect()
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn br_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(s) => s,
        Err(_) => panic!("version has no interior nul"),
    };
    VERSION.as_ptr()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn br_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Create the zero measure on `R^dim`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn br_measure_new(dim: usize, out: *mut *mut BrMeasure) -> BrStatus {
    guard(|| {
        let out = unsafe { self::out(out, "out")? };
        if dim == 0 {
            return Err(invalid("dim must be positive"));
        }
        *out = Box::into_raw(Box::new(BrMeasure(SignedMeasure::zero(MetricSpace::euclidean(dim)))));
        Ok(())
    })
}

/// # Safety
/// `m` is null or came from `br_measure_new` and was not freed.
#[no_mangle]
pub unsafe extern "C" fn br_measure_free(m: *mut BrMeasure) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Add an atom of the given (nonzero) weight at `coords[0..dim]`.
///
/// # Safety
/// `m` is a live handle and `coords` holds `dim` values.
#[no_mangle]
pub unsafe extern "C" fn br_measure_add_atom(m: *mut BrMeasure, coords: *const f64, dim: usize, weight: f64) -> BrStatus {
    guard(|| {
        let m = unsafe { m.as_mut().ok_or_else(|| null("m"))? };
        if dim != dim_of(&m.0.space) {
            return Err(invalid(format!("dim {dim} differs from measure dimension {}", dim_of(&m.0.space))));
        }
        let c = unsafe { slice(coords, dim, "coords")? };
        m.0.push_atom(Point::euclidean(c), weight)?;
        Ok(())
    })
}

/// Add length measure times `density` along the polyline through
/// `n_vertices` vertices stored flat in `vertices`.
///
/// # Safety
/// `m` is a live handle and `vertices` holds `n_vertices * dim` values.
#[no_mangle]
pub unsafe extern "C" fn br_measure_add_chain(
    m: *mut BrMeasure,
    vertices: *const f64,
    n_vertices: usize,
    density: f64,
) -> BrStatus {
    guard(|| {
        let m = unsafe { m.as_mut().ok_or_else(|| null("m"))? };
        let dim = dim_of(&m.0.space);
        let v = unsafe { slice(vertices, n_vertices * dim, "vertices")? };
        let chain = PolylineChain::new(v.chunks(dim).map(<[f64]>::to_vec).collect(), density)?;
        m.0.push_chain(chain)?;
        Ok(())
    })
}

/// Mass of the closed ball of `radius` about `center`.
///
/// # Safety
/// `m` is a live handle, `center` holds the measure's `dim` values and `out`
/// is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn br_measure_ball_mass(
    m: *const BrMeasure,
    center: *const f64,
    radius: f64,
    out: *mut f64,
) -> BrStatus {
    guard(|| {
        let m = unsafe { m.as_ref().ok_or_else(|| null("m"))? };
        let c = unsafe { slice(center, dim_of(&m.0.space), "center")? };
        let out = unsafe { self::out(out, "out")? };
        *out = m.0.ball_mass(&Ball::new(Point::euclidean(c), radius)?)?;
        Ok(())
    })
}

/// Premeasure of the given kind over a copy of `m`.
///
/// # Safety
/// `m` is a live handle and `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn br_premeasure_new(
    m: *const BrMeasure,
    kind: BrPremeasureKind,
    out: *mut *mut BrPremeasure,
) -> BrStatus {
    guard(|| {
        let m = unsafe { m.as_ref().ok_or_else(|| null("m"))? };
        let out = unsafe { self::out(out, "out")? };
        let q = match kind {
            BrPremeasureKind::Exact => Premeasure::exact(m.0.clone()),
            BrPremeasureKind::Averaged => Premeasure::averaged(m.0.clone()),
        };
        *out = Box::into_raw(Box::new(BrPremeasure(q)));
        Ok(())
    })
}

/// # Safety
/// `q` is null or came from `br_premeasure_new` and was not freed.
#[no_mangle]
pub unsafe extern "C" fn br_premeasure_free(q: *mut BrPremeasure) {
    if !q.is_null() {
        drop(Box::from_raw(q));
    }
}

/// # Safety
/// `q` is a live handle, `center` holds `dim` values and `out` is valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn br_premeasure_evaluate(
    q: *const BrPremeasure,
    center: *const f64,
    radius: f64,
    out: *mut f64,
) -> BrStatus {
    guard(|| {
        let q = unsafe { q.as_ref().ok_or_else(|| null("q"))? };
        let c = unsafe { slice(center, dim_of(&q.0.measure.space), "center")? };
        let out = unsafe { self::out(out, "out")? };
        *out = q.0.evaluate(&Ball::new(Point::euclidean(c), radius)?)?;
        Ok(())
    })
}

/// Covering sweep over the finite target set `targets` (`n_targets` points).
/// Writes the cover value at each of the `n_deltas` scales to `values`,
/// the value at the smallest scale to `limit`, and whether every step was
/// solved exactly to `all_exact`.
///
/// # Safety
/// All arrays hold the stated number of values and outputs are writable.
#[no_mangle]
pub unsafe extern "C" fn br_cover_sweep(
    q: *const BrPremeasure,
    targets: *const f64,
    n_targets: usize,
    deltas: *const f64,
    n_deltas: usize,
    values: *mut f64,
    limit: *mut f64,
    all_exact: *mut bool,
) -> BrStatus {
    guard(|| {
        let q = unsafe { q.as_ref().ok_or_else(|| null("q"))? };
        let dim = dim_of(&q.0.measure.space);
        let t = unsafe { slice(targets, n_targets * dim, "targets")? };
        let d = unsafe { slice(deltas, n_deltas, "deltas")? };
        let values = unsafe { slice_mut(values, n_deltas, "values")? };
        let limit = unsafe { out(limit, "limit")? };
        let all_exact = unsafe { out(all_exact, "all_exact")? };
        let sweep = caratheodory_sweep(&points(t, dim), &q.0, d, CoverStrategy::default(), CoverLimits::default())?;
        for (v, s) in values.iter_mut().zip(&sweep.steps) {
            *v = s.result.value;
        }
        *limit = sweep.limit;
        *all_exact = sweep.steps.iter().all(|s| s.result.status.is_exact());
        Ok(())
    })
}

/// Packing sweep over the open box `(lo, hi)`. Outputs as for
/// [`br_cover_sweep`].
///
/// # Safety
/// `lo` and `hi` hold `dim` values, `deltas` and `values` hold `n_deltas`,
/// and outputs are writable.
#[no_mangle]
pub unsafe extern "C" fn br_packing_sweep(
    q: *const BrPremeasure,
    lo: *const f64,
    hi: *const f64,
    deltas: *const f64,
    n_deltas: usize,
    values: *mut f64,
    limit: *mut f64,
    all_exact: *mut bool,
) -> BrStatus {
    guard(|| {
        let q = unsafe { q.as_ref().ok_or_else(|| null("q"))? };
        let dim = dim_of(&q.0.measure.space);
        let lo = unsafe { slice(lo, dim, "lo")? };
        let hi = unsafe { slice(hi, dim, "hi")? };
        let d = unsafe { slice(deltas, n_deltas, "deltas")? };
        let values = unsafe { slice_mut(values, n_deltas, "values")? };
        let limit = unsafe { out(limit, "limit")? };
        let all_exact = unsafe { out(all_exact, "all_exact")? };
        let u = OpenSet::boxed(lo, hi)?;
        let sweep = packing_sweep(&u, &q.0, d, &PackingStrategy::default())?;
        for (v, s) in values.iter_mut().zip(&sweep.steps) {
            *v = s.result.value;
        }
        *limit = sweep.limit;
        *all_exact = sweep.all_exact;
        Ok(())
    })
}

/// Split `n` balls in `R^dim` into disjoint subfamilies covering every
/// centre. Writes the subfamily count; returns `INFEASIBLE` when more than
/// `2 * zeta + 1` would be needed.
///
/// # Safety
/// `centers` holds `n * dim` values, `radii` holds `n`, `count` is writable.
#[no_mangle]
pub unsafe extern "C" fn br_besicovitch_subfamilies(
    centers: *const f64,
    radii: *const f64,
    n: usize,
    dim: usize,
    zeta: usize,
    count: *mut usize,
) -> BrStatus {
    guard(|| {
        if dim == 0 {
            return Err(invalid("dim must be positive"));
        }
        let c = unsafe { slice(centers, n * dim, "centers")? };
        let r = unsafe { slice(radii, n, "radii")? };
        let count = unsafe { out(count, "count")? };
        let balls = c
            .chunks(dim)
            .zip(r)
            .map(|(c, &r)| Ball::new(Point::euclidean(c), r))
            .collect::<Result<Vec<_>, _>>()?;
        let fam = BallFamily::from_balls(balls);
        *count = greedy_subfamilies(&MetricSpace::euclidean(dim), &fam, zeta)?.count();
        Ok(())
    })
}
