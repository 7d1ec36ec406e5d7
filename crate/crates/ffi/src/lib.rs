//! C ABI for weyl-lab.
//!
//! Every fallible call returns a [`WlStatus`]; on failure a description is
//! kept per thread and can be copied out with [`wl_last_error_message`].
//! Handles are opaque and must be released with their `_destroy` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use weyl_lab::duhamel::{trace_difference_direct, trace_difference_duhamel};
use weyl_lab::galerkin::{assemble, diagonalize, SpectralData};
use weyl_lab::lattice::{count_free, weyl_main_term};
use weyl_lab::mollify::MollifiedIndicator;
use weyl_lab::potentials::{kato_norm, sample, PotentialData, PotentialKind, PotentialSpec};
use weyl_lab::weyl::bootstrap_torus;
use weyl_lab::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnsupportedDimension = 3,
    Precondition = 4,
    Numerical = 5,
    Resource = 6,
    BufferTooSmall = 7,
    Internal = 8,
}

/// Discretized potential.
pub struct WlPotential {
    data: PotentialData,
}

/// Sorted frequencies and eigenvectors of a truncated operator.
pub struct WlSpectrum {
    data: SpectralData,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> WlStatus {
    match err {
        Error::UnsupportedDimension(_) => WlStatus::UnsupportedDimension,
        Error::InvalidArgument(_) | Error::NonIntegrable { .. } | Error::Config(_) | Error::Json(_) => WlStatus::InvalidArgument,
        Error::Precondition(_)
        | Error::MismatchedTruncation(_)
        | Error::InsufficientCutoff { .. }
        | Error::Aliasing { .. }
        | Error::SingularNode
        | Error::InsufficientData(_) => WlStatus::Precondition,
        Error::NotHermitian(_) | Error::Quadrature { .. } => WlStatus::Numerical,
        Error::Resource { .. } => WlStatus::Resource,
        Error::Cache(_) | Error::Io(_) => WlStatus::Internal,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (WlStatus, String)>) -> WlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            WlStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            WlStatus::Internal
        }
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (WlStatus, String)>;
}

impl<T> IntoFfi<T> for weyl_lab::Result<T> {
    fn ffi(self) -> Result<T, (WlStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), (WlStatus, String)> {
    if p.is_null() {
        Err((WlStatus::NullPointer, format!("`{name}` is null")))
    } else {
        Ok(())
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn wl_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// `N^0(λ)`: number of free frequencies `sqrt(4π²|k|² + 1) <= λ`.
///
/// # Safety
/// `out` must point to writable memory for one `u64`.
#[no_mangle]
pub unsafe extern "C" fn wl_count_free(n: usize, lambda: f64, out: *mut u64) -> WlStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = count_free(n, lambda).ffi()?;
        Ok(())
    })
}

/// `(2π)^{-n} ω_n λ^n`.
#[no_mangle]
pub extern "C" fn wl_weyl_main_term(n: usize, lambda: f64) -> f64 {
    weyl_main_term(n, lambda)
}

/// Samples a potential described by JSON (for example
/// `{"kind":"constant","value":1.0}`) on `grid^n` points and computes its
/// Fourier coefficients up to `fourier_cutoff` (0 skips them).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn wl_potential_from_json(
    json: *const c_char,
    n: usize,
    grid: usize,
    fourier_cutoff: usize,
    out: *mut *mut WlPotential,
) -> WlStatus {
    guard(|| {
        non_null(json, "json")?;
        non_null(out, "out")?;
        let text = CStr::from_ptr(json).to_str().map_err(|e| (WlStatus::InvalidArgument, e.to_string()))?;
        let kind: PotentialKind = serde_json::from_str(text).map_err(|e| (WlStatus::InvalidArgument, e.to_string()))?;
        let mut data = sample(&PotentialSpec::new(n, kind), grid).ffi()?;
        if fourier_cutoff > 0 {
            data = data.with_fourier(fourier_cutoff).ffi()?;
        }
        *out = Box::into_raw(Box::new(WlPotential { data }));
        Ok(())
    })
}

/// # Safety
/// `p` must be null or a handle from [`wl_potential_from_json`], not yet destroyed.
#[no_mangle]
pub unsafe extern "C" fn wl_potential_destroy(p: *mut WlPotential) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Kato functional of the potential at radius `delta`.
///
/// # Safety
/// `p` must be a live potential handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wl_kato_norm(p: *const WlPotential, delta: f64, out: *mut f64) -> WlStatus {
    guard(|| {
        non_null(p, "potential")?;
        non_null(out, "out")?;
        *out = kato_norm(&(*p).data, delta).ffi()?;
        Ok(())
    })
}

/// Free spectrum on the ball `|k| <= cutoff`.
///
/// # Safety
/// `out` must be a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn wl_spectrum_free(n: usize, cutoff: u64, out: *mut *mut WlSpectrum) -> WlStatus {
    guard(|| {
        non_null(out, "out")?;
        let data = SpectralData::free(n, cutoff).ffi()?;
        *out = Box::into_raw(Box::new(WlSpectrum { data }));
        Ok(())
    })
}

/// Diagonalizes the Galerkin truncation of `−Δ + 1 + V` at radius `cutoff`.
/// The potential needs Fourier data up to `2·cutoff`.
///
/// # Safety
/// `p` must be a live potential handle and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn wl_spectrum_galerkin(p: *const WlPotential, cutoff: u64, out: *mut *mut WlSpectrum) -> WlStatus {
    guard(|| {
        non_null(p, "potential")?;
        non_null(out, "out")?;
        let v = &(*p).data;
        let data = diagonalize(&assemble(v.n(), cutoff, v).ffi()?).ffi()?;
        *out = Box::into_raw(Box::new(WlSpectrum { data }));
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a live spectrum handle.
#[no_mangle]
pub unsafe extern "C" fn wl_spectrum_destroy(s: *mut WlSpectrum) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of eigenvalues, or 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live spectrum handle.
#[no_mangle]
pub unsafe extern "C" fn wl_spectrum_dim(s: *const WlSpectrum) -> usize {
    if s.is_null() {
        0
    } else {
        (*s).data.dim()
    }
}

/// Copies the ascending frequencies into `buf`, which must hold `dim` values.
///
/// # Safety
/// `s` must be a live spectrum handle and `buf` point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn wl_spectrum_frequencies(s: *const WlSpectrum, buf: *mut f64, len: usize) -> WlStatus {
    guard(|| {
        non_null(s, "spectrum")?;
        non_null(buf, "buf")?;
        let f = &(*s).data.frequencies;
        if len < f.len() {
            return Err((WlStatus::BufferTooSmall, format!("buffer holds {len}, need {}", f.len())));
        }
        ptr::copy_nonoverlapping(f.as_ptr(), buf, f.len());
        Ok(())
    })
}

/// `#{k : τ_k <= λ}` and whether `λ` lies in the reliable band.
///
/// # Safety
/// `s` must be a live spectrum handle; `count` and `reliable` writable.
#[no_mangle]
pub unsafe extern "C" fn wl_spectrum_count(s: *const WlSpectrum, lambda: f64, count: *mut u64, reliable: *mut bool) -> WlStatus {
    guard(|| {
        non_null(s, "spectrum")?;
        non_null(count, "count")?;
        let c = weyl_lab::galerkin::counting_function(&(*s).data, lambda);
        *count = c.value;
        if !reliable.is_null() {
            *reliable = c.reliable;
        }
        Ok(())
    })
}

/// Mollified indicator `1̃_λ(τ)` with window width `width`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wl_mollified_indicator(lambda: f64, width: f64, tau: f64, out: *mut f64) -> WlStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = MollifiedIndicator::new(lambda, width).ffi()?.value(tau).ffi()?;
        Ok(())
    })
}

/// Both sides of the divided-difference trace identity for `1̃_λ`:
/// `lhs` from the two spectra directly, `rhs` from the double sum.
///
/// # Safety
/// All handles must be live; `lhs` and `rhs` writable.
#[no_mangle]
pub unsafe extern "C" fn wl_duhamel_sides(
    perturbed: *const WlSpectrum,
    free: *const WlSpectrum,
    p: *const WlPotential,
    lambda: f64,
    width: f64,
    lhs: *mut f64,
    rhs: *mut f64,
) -> WlStatus {
    guard(|| {
        non_null(perturbed, "perturbed")?;
        non_null(free, "free")?;
        non_null(p, "potential")?;
        non_null(lhs, "lhs")?;
        non_null(rhs, "rhs")?;
        let mi = MollifiedIndicator::new(lambda, width).ffi()?;
        *lhs = trace_difference_direct(&(*perturbed).data, &(*free).data, &mi).ffi()?;
        *rhs = trace_difference_duhamel(&(*perturbed).data, &(*free).data, &(*p).data, &mi).ffi()?;
        Ok(())
    })
}

/// Iterates the torus exponent recurrence from `b0`; writes up to `len`
/// iterates into `buf` and the total number of iterates into `written`.
///
/// # Safety
/// `buf` must point to `len` writable doubles; `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wl_bootstrap_torus(n: usize, b0: f64, buf: *mut f64, len: usize, written: *mut usize) -> WlStatus {
    guard(|| {
        non_null(written, "written")?;
        let s = bootstrap_torus(n, b0).ffi()?;
        *written = s.iterates.len();
        if s.iterates.len() > len {
            return Err((WlStatus::BufferTooSmall, format!("buffer holds {len}, need {}", s.iterates.len())));
        }
        non_null(buf, "buf")?;
        ptr::copy_nonoverlapping(s.iterates.as_ptr(), buf, s.iterates.len());
        Ok(())
    })
}
