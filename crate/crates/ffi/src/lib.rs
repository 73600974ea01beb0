//! C ABI over `dyadic-walsh`.
//!
//! Every fallible function returns a [`DwStatus`] and writes its result through
//! an out-pointer. On failure the message is available from
//! [`dw_last_error_message`] on the same thread. Step functions are opaque
//! handles released with [`dw_step_function_free`]; strings returned by the
//! library are released with [`dw_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use dyadic_walsh::norms::{hp_norm, lp_norm, weak_lp_norm};
use dyadic_walsh::transform::{dirichlet_formula, fwht, lebesgue_constant, partial_sum, walsh};
use dyadic_walsh::{Error, Mode, StepFunction};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    OutOfRange = 4,
    LevelMismatch = 5,
    Overflow = 6,
    NotExact = 7,
    Selection = 8,
    Parse = 9,
    Io = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

/// Opaque step function on `2^level` cells.
pub struct DwStepFunction {
    inner: StepFunction,
}

/// Binary functionals of an index.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DwIndexExpansion {
    /// `|n|`, position of the highest set bit.
    pub order: u32,
    /// `⟨n⟩`, position of the lowest set bit.
    pub low: u32,
    /// `d(n) = |n| - ⟨n⟩`.
    pub gap: u32,
    /// `V(n)`.
    pub variation: u32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> DwStatus {
    match e {
        Error::Domain(_) => DwStatus::Domain,
        Error::OutOfRange(_) => DwStatus::OutOfRange,
        Error::LevelMismatch { .. } => DwStatus::LevelMismatch,
        Error::Overflow(_) => DwStatus::Overflow,
        Error::NotExact(_) => DwStatus::NotExact,
        Error::Selection { .. } => DwStatus::Selection,
        Error::Parse(_) => DwStatus::Parse,
        Error::Io(_) => DwStatus::Io,
    }
}

enum Fail {
    Lib(Error),
    Status(DwStatus, &'static str),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

type FfiResult = Result<(), Fail>;

fn guard(f: impl FnOnce() -> FfiResult) -> DwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            DwStatus::Ok
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            DwStatus::Panic
        }
    }
}

fn null() -> Fail {
    Fail::Status(DwStatus::NullPointer, "null pointer argument")
}

unsafe fn handle<'a>(h: *const DwStepFunction) -> Result<&'a StepFunction, Fail> {
    h.as_ref().map(|h| &h.inner).ok_or_else(null)
}

unsafe fn emit(out: *mut *mut DwStepFunction, f: StepFunction) -> FfiResult {
    if out.is_null() {
        return Err(null());
    }
    *out = Box::into_raw(Box::new(DwStepFunction { inner: f }));
    Ok(())
}

unsafe fn emit_string(out: *mut *mut c_char, s: String) -> FfiResult {
    if out.is_null() {
        return Err(null());
    }
    let c = CString::new(s).map_err(|_| Fail::Status(DwStatus::InvalidArgument, "string contains NUL"))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn write<T>(out: *mut T, v: T) -> FfiResult {
    if out.is_null() {
        return Err(null());
    }
    *out = v;
    Ok(())
}

/// Message of the last failed call on this thread, or an empty string.
/// The pointer stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn dw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Release a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn dw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Release a step function. Null is ignored.
///
/// # Safety
/// `f` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn dw_step_function_free(f: *mut DwStepFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Float step function from `len = 2^level` values.
///
/// # Safety
/// `values` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dw_step_function_from_values(
    level: u32,
    values: *const f64,
    len: usize,
    out: *mut *mut DwStepFunction,
) -> DwStatus {
    guard(|| {
        if values.is_null() {
            return Err(null());
        }
        let v = std::slice::from_raw_parts(values, len).to_vec();
        emit(out, StepFunction::float(level, v)?)
    })
}

/// Parse a step function from its JSON file form.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dw_step_function_from_json(json: *const c_char, out: *mut *mut DwStepFunction) -> DwStatus {
    guard(|| {
        if json.is_null() {
            return Err(null());
        }
        let s = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| Fail::Status(DwStatus::Parse, "input is not UTF-8"))?;
        emit(out, StepFunction::from_json(s)?)
    })
}

/// JSON file form of a step function; free with [`dw_string_free`].
///
/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dw_step_function_to_json(f: *const DwStepFunction, out: *mut *mut c_char) -> DwStatus {
    guard(|| emit_string(out, handle(f)?.to_json()?))
}

/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dw_step_function_level(f: *const DwStepFunction, out: *mut u32) -> DwStatus {
    guard(|| write(out, handle(f)?.level()))
}

/// Number of cells, `2^level`.
///
/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dw_step_function_len(f: *const DwStepFunction, out: *mut usize) -> DwStatus {
    guard(|| write(out, handle(f)?.len()))
}

/// 1 when the values are held exactly, 0 for floats.
///
/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dw_step_function_is_exact(f: *const DwStepFunction, out: *mut i32) -> DwStatus {
    guard(|| write(out, (handle(f)?.mode() == Mode::Exact) as i32))
}

/// Copy the values as doubles into `buf`, which must hold `len` cells.
///
/// # Safety
/// `f` must be a live handle; `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn dw_step_function_values_f64(f: *const DwStepFunction, buf: *mut f64, len: usize) -> DwStatus {
    guard(|| {
        let f = handle(f)?;
        copy_out(&f.values_f64(), buf, len)
    })
}

unsafe fn copy_out(v: &[f64], buf: *mut f64, len: usize) -> FfiResult {
    if buf.is_null() {
        return Err(null());
    }
    if len < v.len() {
        return Err(Fail::Status(DwStatus::BufferTooSmall, "output buffer is shorter than 2^level"));
    }
    std::slice::from_raw_parts_mut(buf, v.len()).copy_from_slice(v);
    Ok(())
}

/// Dirichlet kernel `D_n` at `level`, exact.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dw_dirichlet(n: u64, level: u32, out: *mut *mut DwStepFunction) -> DwStatus {
    guard(|| emit(out, dirichlet_formula(n, level)?))
}

/// Walsh function `w_n` at `level`, exact.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dw_walsh(n: u64, level: u32, out: *mut *mut DwStepFunction) -> DwStatus {
    guard(|| emit(out, walsh(n, level)?))
}

/// Partial sum `S_n f`, `0 ≤ n ≤ 2^level`.
///
/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dw_partial_sum(f: *const DwStepFunction, n: u64, out: *mut *mut DwStepFunction) -> DwStatus {
    guard(|| emit(out, partial_sum(handle(f)?, n)?))
}

/// Walsh–Fourier coefficients `f̂(0..2^level)` as doubles.
///
/// # Safety
/// `f` must be a live handle; `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn dw_fwht_f64(f: *const DwStepFunction, buf: *mut f64, len: usize) -> DwStatus {
    guard(|| copy_out(&fwht(handle(f)?)?.to_f64_vec(), buf, len))
}

/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dw_lp_norm(f: *const DwStepFunction, p: f64, out: *mut f64) -> DwStatus {
    guard(|| write(out, lp_norm(handle(f)?, p)?.to_f64()))
}

/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dw_weak_lp_norm(f: *const DwStepFunction, p: f64, out: *mut f64) -> DwStatus {
    guard(|| write(out, weak_lp_norm(handle(f)?, p)?.to_f64()))
}

/// `‖f‖_{H_p}` through the maximal function.
///
/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dw_hp_norm(f: *const DwStepFunction, p: f64, out: *mut f64) -> DwStatus {
    guard(|| write(out, hp_norm(handle(f)?, p)?.to_f64()))
}

/// Lebesgue constant `L_S(n)`. `value` receives the double; if `exact` is not
/// null it receives the exact value as `"a/2^b"`, to be freed with
/// [`dw_string_free`].
///
/// # Safety
/// `value` must be writable; `exact` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn dw_lebesgue_constant(n: u64, value: *mut f64, exact: *mut *mut c_char) -> DwStatus {
    guard(|| {
        if value.is_null() {
            return Err(null());
        }
        let l = lebesgue_constant(n)?;
        if !exact.is_null() {
            emit_string(exact, l.to_string())?;
        }
        *value = l.to_f64();
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dw_index_expand(n: u64, out: *mut DwIndexExpansion) -> DwStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let e = dyadic_walsh::expand(n)?;
        write(
            out,
            DwIndexExpansion {
                order: e.order,
                low: e.low,
                gap: e.gap,
                variation: e.variation,
            },
        )
    })
}
