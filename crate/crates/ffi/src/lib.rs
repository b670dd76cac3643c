//! C ABI over `qdiff`.
//!
//! Every fallible call returns a [`QdiffStatus`] and writes results through
//! out-pointers. On failure the message is kept per thread and can be read
//! with [`qdiff_last_error`]. Handles are opaque and must be released with
//! their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qdiff::kinetic::{diffusion_constant_of, DiffusionMode, JumpProcess, McOptions};
use qdiff::partitions::{ursell, UrsellMode};
use qdiff::perm::{classify, tower_matrix, Permutation};
use qdiff::profile::RadialProfile;
use qdiff::self_energy::theta;
use qdiff::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QdiffStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    BufferTooSmall = 3,
    InvalidPermutation = 10,
    AuxiliarySumNonzero = 11,
    BudgetExceeded = 12,
    NotEven = 13,
    InvalidPartition = 14,
    BadSplit = 15,
    DivergentBound = 16,
    QuadratureFailure = 17,
    OutOfTable = 18,
    HypothesisViolated = 19,
    DegenerateFrequencies = 20,
    KappaTooLarge = 21,
    InsufficientSamples = 22,
    GridTooCoarse = 23,
    CflViolation = 24,
    ConfigInvalid = 25,
    Panic = 99,
}

impl From<&Error> for QdiffStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidPermutation(_) => QdiffStatus::InvalidPermutation,
            Error::AuxiliarySumNonzero { .. } => QdiffStatus::AuxiliarySumNonzero,
            Error::BudgetExceeded { .. } => QdiffStatus::BudgetExceeded,
            Error::NotEven { .. } => QdiffStatus::NotEven,
            Error::InvalidPartition(_) => QdiffStatus::InvalidPartition,
            Error::BadSplit(_) => QdiffStatus::BadSplit,
            Error::DivergentBound { .. } => QdiffStatus::DivergentBound,
            Error::QuadratureFailure { .. } => QdiffStatus::QuadratureFailure,
            Error::OutOfTable { .. } => QdiffStatus::OutOfTable,
            Error::HypothesisViolated(_) => QdiffStatus::HypothesisViolated,
            Error::DegenerateFrequencies { .. } => QdiffStatus::DegenerateFrequencies,
            Error::KappaTooLarge { .. } => QdiffStatus::KappaTooLarge,
            Error::InsufficientSamples { .. } => QdiffStatus::InsufficientSamples,
            Error::GridTooCoarse(_) => QdiffStatus::GridTooCoarse,
            Error::CflViolation(_) => QdiffStatus::CflViolation,
            Error::ConfigInvalid(_) => QdiffStatus::ConfigInvalid,
        }
    }
}

/// A parsed permutation of {1..k}.
pub struct QdiffPermutation {
    inner: Permutation,
}

/// The momentum jump process on one energy shell, Gaussian potential.
pub struct QdiffJumpProcess {
    inner: JumpProcess,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(QdiffStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(QdiffStatus::from(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> QdiffStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QdiffStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside qdiff".into());
            QdiffStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(QdiffStatus::NullPointer, format!("{what} is null"))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn input<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null("string"));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Fail(QdiffStatus::InvalidUtf8, e.to_string()))
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn qdiff_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn qdiff_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qdiff_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses "1 2 7 6", "1,2,7,6" or "(1,2,7,6)".
///
/// # Safety
/// `s` must be a NUL-terminated string and `result` writable.
#[no_mangle]
pub unsafe extern "C" fn qdiff_perm_parse(s: *const c_char, result: *mut *mut QdiffPermutation) -> QdiffStatus {
    guard(|| {
        let slot = out(result, "out")?;
        let inner: Permutation = text(s)?.parse()?;
        *slot = Box::into_raw(Box::new(QdiffPermutation { inner }));
        Ok(())
    })
}

/// # Safety
/// `perm` must come from `qdiff_perm_parse` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qdiff_perm_free(perm: *mut QdiffPermutation) {
    if !perm.is_null() {
        drop(Box::from_raw(perm));
    }
}

/// # Safety
/// `perm` must be a live handle, `k` writable.
#[no_mangle]
pub unsafe extern "C" fn qdiff_perm_order(perm: *const QdiffPermutation, k: *mut usize) -> QdiffStatus {
    guard(|| {
        *out(k, "k")? = input(perm, "perm")?.inner.k();
        Ok(())
    })
}

/// deg σ = k − |I_ℓ|
///
/// # Safety
/// `perm` must be a live handle, `degree` writable.
#[no_mangle]
pub unsafe extern "C" fn qdiff_perm_degree(perm: *const QdiffPermutation, degree: *mut usize) -> QdiffStatus {
    guard(|| {
        let slot = out(degree, "degree")?;
        *slot = classify(&input(perm, "perm")?.inner).degree;
        Ok(())
    })
}

/// Full index classification as JSON; free with `qdiff_string_free`.
///
/// # Safety
/// `perm` must be a live handle, `json` writable.
#[no_mangle]
pub unsafe extern "C" fn qdiff_perm_classify_json(perm: *const QdiffPermutation, json: *mut *mut c_char) -> QdiffStatus {
    guard(|| {
        let slot = out(json, "json")?;
        let c = classify(&input(perm, "perm")?.inner);
        let s = serde_json::to_string(&c).map_err(|e| Fail(QdiffStatus::Panic, e.to_string()))?;
        *slot = CString::new(s).expect("json has no NUL").into_raw();
        Ok(())
    })
}

/// Writes the (k+1)×(k+1) tower matrix row-major into `buf`. `len` must be
/// at least (k+1)²; the needed size is written to `needed` either way.
///
/// # Safety
/// `buf` must hold `len` elements; `needed` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn qdiff_perm_tower_matrix(
    perm: *const QdiffPermutation,
    buf: *mut i64,
    len: usize,
    needed: *mut usize,
) -> QdiffStatus {
    guard(|| {
        let m = tower_matrix(&input(perm, "perm")?.inner).matrix;
        let n = m.n();
        if let Some(slot) = needed.as_mut() {
            *slot = n * n;
        }
        if len < n * n {
            return Err(Fail(QdiffStatus::BufferTooSmall, format!("need {} entries, got {len}", n * n)));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        let dst = std::slice::from_raw_parts_mut(buf, n * n);
        for (i, row) in m.rows().iter().enumerate() {
            dst[i * n..(i + 1) * n].copy_from_slice(row);
        }
        Ok(())
    })
}

/// Ursell coefficient c(n); `lattice` selects the lattice gas, otherwise
/// the continuum Poisson field.
///
/// # Safety
/// `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qdiff_ursell(n: usize, lattice: bool, value: *mut i64) -> QdiffStatus {
    guard(|| {
        let slot = out(value, "value")?;
        *slot = ursell(n, if lattice { UrsellMode::Lattice } else { UrsellMode::Continuum })?;
        Ok(())
    })
}

/// Θ_ε(α) for the Gaussian potential in dimension `d`.
///
/// # Safety
/// `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qdiff_theta(alpha: f64, epsilon: f64, d: usize, re: *mut f64, im: *mut f64) -> QdiffStatus {
    guard(|| {
        let (re, im) = (out(re, "re")?, out(im, "im")?);
        let v = theta(alpha, epsilon, &RadialProfile::default_potential(), d)?;
        *re = v.value.re;
        *im = v.value.im;
        Ok(())
    })
}

/// # Safety
/// `result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qdiff_jump_new(e: f64, d: usize, result: *mut *mut QdiffJumpProcess) -> QdiffStatus {
    guard(|| {
        let slot = out(result, "out")?;
        let inner = JumpProcess::new(e, &RadialProfile::default_potential(), d)?;
        *slot = Box::into_raw(Box::new(QdiffJumpProcess { inner }));
        Ok(())
    })
}

/// # Safety
/// `p` must come from `qdiff_jump_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qdiff_jump_free(p: *mut QdiffJumpProcess) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Total rate σ₀ and the first angular moment σ₁.
///
/// # Safety
/// `p` must be a live handle; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn qdiff_jump_rates(p: *const QdiffJumpProcess, sigma0: *mut f64, sigma1: *mut f64) -> QdiffStatus {
    guard(|| {
        let p = &input(p, "process")?.inner;
        *out(sigma0, "sigma0")? = p.sigma0;
        *out(sigma1, "sigma1")? = p.sigma1;
        Ok(())
    })
}

/// # Safety
/// `p` must be a live handle, `value` writable.
#[no_mangle]
pub unsafe extern "C" fn qdiff_jump_diffusion_closed_form(p: *const QdiffJumpProcess, value: *mut f64) -> QdiffStatus {
    guard(|| {
        *out(value, "value")? = input(p, "process")?.inner.closed_form_diffusion();
        Ok(())
    })
}

/// Green–Kubo Monte Carlo estimate over `ntraj` trajectories.
///
/// # Safety
/// `p` must be a live handle; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn qdiff_jump_diffusion_monte_carlo(
    p: *const QdiffJumpProcess,
    ntraj: usize,
    seed: u64,
    value: *mut f64,
    std_error: *mut f64,
) -> QdiffStatus {
    guard(|| {
        let p = &input(p, "process")?.inner;
        let (value, std_error) = (out(value, "value")?, out(std_error, "std_error")?);
        let est = diffusion_constant_of(p, DiffusionMode::MonteCarlo, &McOptions::new(ntraj, seed))?;
        *value = est.value;
        *std_error = est.std_error;
        Ok(())
    })
}
