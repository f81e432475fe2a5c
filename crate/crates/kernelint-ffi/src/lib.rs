//! C ABI over `kernelint`: opaque kernel and report handles, status codes and a
//! thread-local error message.
//!
//! Every function returns a [`KiStatus`]; outputs go through pointer arguments.
//! Handles are created by `ki_*_new*` functions and released with the matching
//! `ki_*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kernelint::catalog::{make_kernel, KernelSpec};
use kernelint::riemann::{kernel_riemann_sum, PartitionScheme, RiemannSystem, TagRule};
use kernelint::selfint::{self, SelfIntegralReport, Verdict};
use kernelint::{Error, Interval, KernelHandle};

/// Result of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KiStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    OutsideDomain = 3,
    Factorization = 4,
    NotConverged = 5,
    Parse = 6,
    Io = 7,
    Panic = 8,
}

/// Self-integral verdict; values match the CLI exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KiVerdict {
    Converged = 0,
    TagDependent = 2,
    Unbounded = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KiScheme {
    Uniform = 0,
    Dyadic = 1,
    Random = 2,
    AdversarialGeometric = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KiTag {
    Left = 0,
    Right = 1,
    Midpoint = 2,
    Random = 3,
    NearRight = 4,
}

/// Opaque kernel handle.
pub struct KiKernel {
    inner: KernelHandle,
}

/// Opaque self-integral report.
pub struct KiReport {
    inner: SelfIntegralReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_of(e: &Error) -> KiStatus {
    match e {
        Error::OutsideDomain { .. } => KiStatus::OutsideDomain,
        Error::Factorization { .. } => KiStatus::Factorization,
        Error::NotConverged(_) => KiStatus::NotConverged,
        Error::Json(_) | Error::Csv(_) | Error::Config(_) => KiStatus::Parse,
        Error::Io(_) => KiStatus::Io,
        _ => KiStatus::InvalidArgument,
    }
}

fn fail(e: Error) -> KiStatus {
    let status = status_of(&e);
    set_last_error(e.to_string());
    status
}

/// Runs `body`, turning panics into [`KiStatus::Panic`] and clearing the error
/// message on success.
fn guard(body: impl FnOnce() -> Result<(), KiStatus>) -> KiStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            KiStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(format!("panic: {msg}"));
            KiStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), KiStatus> {
    if p.is_null() {
        set_last_error(format!("{name} is null"));
        Err(KiStatus::NullArgument)
    } else {
        Ok(())
    }
}

fn lib<T>(r: kernelint::Result<T>) -> Result<T, KiStatus> {
    r.map_err(fail)
}

unsafe fn put_kernel(out: *mut *mut KiKernel, k: KernelHandle) {
    *out = Box::into_raw(Box::new(KiKernel { inner: k }));
}

fn scheme_of(s: KiScheme, seed: u64) -> PartitionScheme {
    match s {
        KiScheme::Uniform => PartitionScheme::Uniform,
        KiScheme::Dyadic => PartitionScheme::Dyadic,
        KiScheme::Random => PartitionScheme::Random { seed },
        KiScheme::AdversarialGeometric => PartitionScheme::AdversarialGeometric,
    }
}

fn tag_of(t: KiTag, seed: u64) -> TagRule {
    match t {
        KiTag::Left => TagRule::Left,
        KiTag::Right => TagRule::Right,
        KiTag::Midpoint => TagRule::Midpoint,
        KiTag::Random => TagRule::Random { seed },
        KiTag::NearRight => TagRule::near_right(),
    }
}

/// Message for the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ki_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ki_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a kernel from a JSON spec such as `{"name":"fbm","hurst":0.75}`.
///
/// # Safety
/// `spec` must be a valid NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ki_kernel_new_from_json(spec: *const c_char, out: *mut *mut KiKernel) -> KiStatus {
    guard(|| {
        non_null(spec, "spec")?;
        non_null(out, "out")?;
        let text = CStr::from_ptr(spec).to_str().map_err(|e| {
            set_last_error(e.to_string());
            KiStatus::Parse
        })?;
        let parsed: KernelSpec = serde_json::from_str(text).map_err(|e| {
            set_last_error(e.to_string());
            KiStatus::Parse
        })?;
        put_kernel(out, lib(make_kernel(&parsed))?);
        Ok(())
    })
}

/// `K(x, A) = |A ∩ [0, x]|` on `[0, 1]`.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ki_kernel_new_brownian_wn(out: *mut *mut KiKernel) -> KiStatus {
    guard(|| {
        non_null(out, "out")?;
        put_kernel(out, kernelint::kernels::brownian_wn());
        Ok(())
    })
}

/// Fractional Brownian motion kernel, `1/2 < hurst < 1`.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ki_kernel_new_fbm(hurst: f64, out: *mut *mut KiKernel) -> KiStatus {
    guard(|| {
        non_null(out, "out")?;
        put_kernel(out, lib(kernelint::kernels::fbm(hurst))?);
        Ok(())
    })
}

/// Kernel with unbounded Riemann sums on `[-1, 1]`.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ki_kernel_new_singular(out: *mut *mut KiKernel) -> KiStatus {
    guard(|| {
        non_null(out, "out")?;
        put_kernel(out, kernelint::kernels::singular());
        Ok(())
    })
}

/// # Safety
/// `kernel` must be null or a handle from a `ki_kernel_new*` call not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ki_kernel_free(kernel: *mut KiKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

/// Closed domain of the kernel.
///
/// # Safety
/// `kernel` must be a live handle; `lo` and `hi` writable pointers.
#[no_mangle]
pub unsafe extern "C" fn ki_kernel_domain(kernel: *const KiKernel, lo: *mut f64, hi: *mut f64) -> KiStatus {
    guard(|| {
        non_null(kernel, "kernel")?;
        non_null(lo, "lo")?;
        non_null(hi, "hi")?;
        let d = (*kernel).inner.domain();
        *lo = d.lo;
        *hi = d.hi;
        Ok(())
    })
}

/// `K(x, [a, b])` for a closed interval inside the domain.
///
/// # Safety
/// `kernel` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ki_kernel_eval(kernel: *const KiKernel, x: f64, a: f64, b: f64, out: *mut f64) -> KiStatus {
    guard(|| {
        non_null(kernel, "kernel")?;
        non_null(out, "out")?;
        let set = lib(Interval::closed(a, b))?;
        *out = lib((*kernel).inner.try_eval(x, &set))?;
        Ok(())
    })
}

/// Kernel Riemann sum at level `n` of one system over the kernel domain.
/// `seed` is used by the random scheme and random tags.
///
/// # Safety
/// `kernel` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ki_riemann_sum(
    kernel: *const KiKernel,
    scheme: KiScheme,
    tag: KiTag,
    seed: u64,
    n: usize,
    out: *mut f64,
) -> KiStatus {
    guard(|| {
        non_null(kernel, "kernel")?;
        non_null(out, "out")?;
        let k = &(*kernel).inner;
        let sys = RiemannSystem::new(k.domain(), scheme_of(scheme, seed), tag_of(tag, seed.wrapping_add(1)));
        *out = kernel_riemann_sum(k, &lib(sys.build_level(n))?);
        Ok(())
    })
}

/// Self-integral verdict over the default twelve-system ensemble on the
/// kernel domain, levels doubling up to `n_max`.
///
/// # Safety
/// `kernel` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ki_estimate_self_integral(
    kernel: *const KiKernel,
    n_max: usize,
    tol: f64,
    seed: u64,
    out: *mut *mut KiReport,
) -> KiStatus {
    guard(|| {
        non_null(kernel, "kernel")?;
        non_null(out, "out")?;
        let k = &(*kernel).inner;
        let d = k.domain();
        let report = lib(selfint::estimate_self_integral(k, &d, &selfint::default_ensemble(d, seed), n_max, tol))?;
        *out = Box::into_raw(Box::new(KiReport { inner: report }));
        Ok(())
    })
}

/// # Safety
/// `report` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ki_report_verdict(report: *const KiReport, out: *mut KiVerdict) -> KiStatus {
    guard(|| {
        non_null(report, "report")?;
        non_null(out, "out")?;
        *out = match (*report).inner.verdict {
            Verdict::Converged { .. } => KiVerdict::Converged,
            Verdict::TagDependent { .. } => KiVerdict::TagDependent,
            Verdict::Unbounded { .. } => KiVerdict::Unbounded,
        };
        Ok(())
    })
}

/// Converged value; [`KiStatus::NotConverged`] for other verdicts.
///
/// # Safety
/// `report` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ki_report_value(report: *const KiReport, out: *mut f64) -> KiStatus {
    guard(|| {
        non_null(report, "report")?;
        non_null(out, "out")?;
        let r = &(*report).inner;
        *out =
            r.verdict.value().ok_or_else(|| fail(Error::NotConverged(format!("{} has no unique value", r.kernel))))?;
        Ok(())
    })
}

/// Report as a JSON string; release it with [`ki_string_free`].
///
/// # Safety
/// `report` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ki_report_to_json(report: *const KiReport, out: *mut *mut c_char) -> KiStatus {
    guard(|| {
        non_null(report, "report")?;
        non_null(out, "out")?;
        let text = serde_json::to_string(&(*report).inner).map_err(|e| fail(Error::Json(e)))?;
        *out = CString::new(text)
            .map_err(|e| {
                set_last_error(e.to_string());
                KiStatus::Parse
            })?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a handle from [`ki_estimate_self_integral`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ki_report_free(report: *mut KiReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ki_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
