//! C ABI over `fullgroup-lab`.
//!
//! Handles are opaque pointers owned by the caller and released with the
//! matching `*_free`. Every entry point returns an [`FglStatus`]; on failure
//! the message is kept per thread and read back with
//! [`fgl_last_error_message`]. Exact rationals cross the boundary as
//! NUL-terminated `"p/q"` strings written into caller buffers.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fullgroup_lab::entropy_builder::{build_levels, free_product_table, point_from_box, verify_levels, BuilderParams, LevelCheck, LevelData, GENERATOR_LEVEL};
use fullgroup_lab::fullgroup::inner_amenability_ratio;
use fullgroup_lab::gamma::{prob_event, FiniteDistribution};
use fullgroup_lab::rational::{fmt_q, q, Q};
use fullgroup_lab::subshift::Point;
use fullgroup_lab::toeplitz_delta::{build_labeling, pack_phi, ZParameter};
use fullgroup_lab::{LabError, LatticePoint};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FglStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Infeasible = 3,
    CertificateFailure = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Built box levels for one `λ`.
pub struct FglLevels {
    levels: Vec<LevelData>,
    theta: fullgroup_lab::rational::Bracket,
    canonical: Point,
}

/// The packed Toeplitz point for one parameter `z`.
pub struct FglToeplitz {
    point: Point,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &LabError) -> FglStatus {
    match e {
        LabError::Infeasible { .. } => FglStatus::Infeasible,
        LabError::Certificate(_) | LabError::Inconclusive(_) => FglStatus::CertificateFailure,
        _ => FglStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (FglStatus, String)>) -> FglStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FglStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("panic inside fullgroup-lab");
            FglStatus::Panic
        }
    }
}

fn lab<T>(r: Result<T, LabError>) -> Result<T, (FglStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null() -> (FglStatus, String) {
    (FglStatus::NullPointer, "null pointer argument".into())
}

fn invalid(msg: impl Into<String>) -> (FglStatus, String) {
    (FglStatus::InvalidArgument, msg.into())
}

/// Copies `s` plus a NUL into `buf`; `needed` always receives the full size.
unsafe fn write_str(s: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> Result<(), (FglStatus, String)> {
    let n = s.len() + 1;
    if !needed.is_null() {
        *needed = n;
    }
    if buf.is_null() {
        return Err(null());
    }
    if len < n {
        return Err((FglStatus::BufferTooSmall, format!("need {n} bytes, got {len}")));
    }
    ptr::copy_nonoverlapping(s.as_ptr() as *const c_char, buf, s.len());
    *buf.add(s.len()) = 0;
    Ok(())
}

fn rational(num: i64, den: i64) -> Result<Q, (FglStatus, String)> {
    if den == 0 {
        return Err(invalid("zero denominator"));
    }
    Ok(q(num, den))
}

/// Version string of the library, static storage.
#[no_mangle]
pub extern "C" fn fgl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Last error on this thread; `needed` receives the required buffer size.
///
/// # Safety
/// `buf` must be writable for `len` bytes; `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn fgl_last_error_message(buf: *mut c_char, len: usize, needed: *mut usize) -> FglStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    match write_str(&msg, buf, len, needed) {
        Ok(()) => FglStatus::Ok,
        Err((s, _)) => s,
    }
}

/// Builds `levels` levels of the default schedule for `λ = num/den`.
///
/// # Safety
/// `out` must be a valid pointer; on success it receives a handle to be
/// released with [`fgl_levels_free`].
#[no_mangle]
pub unsafe extern "C" fn fgl_levels_build(num: i64, den: i64, levels: u32, budget: u64, seed: u64, out: *mut *mut FglLevels) -> FglStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let params = lab(BuilderParams::with_default_schedule(rational(num, den)?, levels as usize, budget, seed))?;
        let built = lab(build_levels(&params))?;
        let canonical = lab(point_from_box(&built, None))?;
        *out = Box::into_raw(Box::new(FglLevels {
            levels: built,
            theta: params.theta,
            canonical,
        }));
        Ok(())
    })
}

/// # Safety
/// `h` must come from [`fgl_levels_build`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fgl_levels_free(h: *mut FglLevels) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// # Safety
/// `h` must be a live handle; `count` writable.
#[no_mangle]
pub unsafe extern "C" fn fgl_levels_count(h: *const FglLevels, count: *mut u32) -> FglStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(null)?;
        *count.as_mut().ok_or_else(null)? = h.levels.len() as u32;
        Ok(())
    })
}

fn level(h: &FglLevels, k: u32) -> Result<&LevelData, (FglStatus, String)> {
    h.levels
        .get((k as usize).wrapping_sub(1))
        .ok_or_else(|| invalid(format!("level {k} not built")))
}

/// Dimensions and free-cell count of level `k` (1-based).
///
/// # Safety
/// `h` must be a live handle; the out pointers writable.
#[no_mangle]
pub unsafe extern "C" fn fgl_levels_level(h: *const FglLevels, k: u32, a: *mut i64, b: *mut i64, free_cells: *mut u64) -> FglStatus {
    guard(|| {
        let l = level(h.as_ref().ok_or_else(null)?, k)?;
        if a.is_null() || b.is_null() || free_cells.is_null() {
            return Err(null());
        }
        *a = l.dims.0;
        *b = l.dims.1;
        *free_cells = l.d_count();
        Ok(())
    })
}

/// Re-checks every level; `passed` is 1 when all conditions hold.
///
/// # Safety
/// `h` must be a live handle; `passed` writable.
#[no_mangle]
pub unsafe extern "C" fn fgl_levels_verify(h: *const FglLevels, passed: *mut u8) -> FglStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(null)?;
        let ok = verify_levels(&h.levels, &h.theta).iter().all(LevelCheck::passes);
        *passed.as_mut().ok_or_else(null)? = ok as u8;
        Ok(())
    })
}

/// Symbol at `(x, y)` of the canonical point, or of a seeded point when
/// `use_seed` is nonzero.
///
/// # Safety
/// `h` must be a live handle; `sym` writable.
#[no_mangle]
pub unsafe extern "C" fn fgl_levels_eval(h: *const FglLevels, use_seed: u8, seed: u64, x: i64, y: i64, sym: *mut u32) -> FglStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(null)?;
        let out = sym.as_mut().ok_or_else(null)?;
        let t = LatticePoint::new(x, y);
        *out = if use_seed != 0 {
            lab(point_from_box(&h.levels, Some(seed)))?.eval(t)
        } else {
            h.canonical.eval(t)
        };
        Ok(())
    })
}

/// Witness table for all reduced words up to `max_len`. `rows` gets the
/// number of witnessed words, `missing` the rest; `exact` is 1 when every
/// displacement is `(0, 6rm)` and every generator is an involution.
///
/// # Safety
/// `h` must be a live handle; the out pointers writable.
#[no_mangle]
pub unsafe extern "C" fn fgl_free_product(h: *const FglLevels, max_len: u32, rows: *mut u64, missing: *mut u64, exact: *mut u8) -> FglStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(null)?;
        if rows.is_null() || missing.is_null() || exact.is_null() {
            return Err(null());
        }
        let (_, cert, disp) = lab(free_product_table(&h.levels, GENERATOR_LEVEL, max_len as usize))?;
        *rows = cert.rows.len() as u64;
        *missing = cert.missing.len() as u64;
        *exact = (disp && cert.involutive.iter().all(|&b| b)) as u8;
        Ok(())
    })
}

/// Named step laws for [`fgl_prob_event`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FglLaw {
    /// uniform on {-1, 1}
    Uniform2 = 0,
    /// uniform on {±1/2, ±1}
    Uniform4 = 1,
    /// uniform on {±1/3, ±1}
    Uniform4b = 2,
}

/// Exact `P(W ≤ −U < V)` where `U, V, W` are independent sums of `j, k, l`
/// steps, written as `"p/q"`.
///
/// # Safety
/// `buf` must be writable for `len` bytes; `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn fgl_prob_event(law: FglLaw, j: u32, k: u32, l: u32, buf: *mut c_char, len: usize, needed: *mut usize) -> FglStatus {
    guard(|| {
        let nu = match law {
            FglLaw::Uniform2 => FiniteDistribution::uniform2(),
            FglLaw::Uniform4 => FiniteDistribution::uniform4(),
            FglLaw::Uniform4b => FiniteDistribution::uniform4b(),
        };
        let p = prob_event(&nu, j as usize, k as usize, l as usize);
        write_str(&fmt_q(&p), buf, len, needed)
    })
}

/// `|W′|/|W|` for 3-cycles on `n′ ≤ n` points, as `"p/q"`.
///
/// # Safety
/// `buf` must be writable for `len` bytes; `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn fgl_inner_amenability_ratio(n: u64, n_prime: u64, buf: *mut c_char, len: usize, needed: *mut usize) -> FglStatus {
    guard(|| {
        let (r, _) = lab(inner_amenability_ratio(n, n_prime))?;
        write_str(&fmt_q(&r), buf, len, needed)
    })
}

/// Packed point of the Toeplitz labeling for `z` given as `prefix:rule`.
///
/// # Safety
/// `z` must be a NUL-terminated string; `out` writable. Release with
/// [`fgl_toeplitz_free`].
#[no_mangle]
pub unsafe extern "C" fn fgl_toeplitz_new(z: *const c_char, out: *mut *mut FglToeplitz) -> FglStatus {
    guard(|| {
        if z.is_null() || out.is_null() {
            return Err(null());
        }
        let s = CStr::from_ptr(z).to_str().map_err(|_| invalid("z is not UTF-8"))?;
        let z: ZParameter = lab(s.parse())?;
        *out = Box::into_raw(Box::new(FglToeplitz {
            point: pack_phi(&build_labeling(&z)),
        }));
        Ok(())
    })
}

/// # Safety
/// `h` must come from [`fgl_toeplitz_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fgl_toeplitz_free(h: *mut FglToeplitz) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Packed symbol (0..36) at `(x, y)`.
///
/// # Safety
/// `h` must be a live handle; `sym` writable.
#[no_mangle]
pub unsafe extern "C" fn fgl_toeplitz_eval(h: *const FglToeplitz, x: i64, y: i64, sym: *mut u32) -> FglStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(null)?;
        *sym.as_mut().ok_or_else(null)? = h.point.eval(LatticePoint::new(x, y));
        Ok(())
    })
}
