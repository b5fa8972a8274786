//! C ABI over the lattice checker and the batch driver.
//!
//! Every function returns a [`CoverlawStatus`]. On failure a message is kept
//! per thread and can be read with [`coverlaw_last_error`]. Panics never
//! cross the boundary; they are reported as `COVERLAW_STATUS_INTERNAL`.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use coverlaw::lattice::{LatticeSpec, OrthoLattice, Property};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverlawStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    MalformedInput = 3,
    InvalidLattice = 4,
    OutOfRange = 5,
    BufferTooSmall = 6,
    Internal = 7,
}

/// Opaque handle to a validated ortholattice.
pub struct CoverlawLattice {
    inner: OrthoLattice,
}

#[derive(Debug, thiserror::Error)]
enum FfiError {
    #[error("null pointer passed for `{0}`")]
    NullPointer(&'static str),
    #[error("`{0}` is not valid UTF-8")]
    InvalidUtf8(&'static str),
    #[error("{0}")]
    Malformed(String),
    #[error("{0}")]
    InvalidLattice(String),
    #[error("element {element} out of range for a lattice of {len}")]
    OutOfRange { element: usize, len: usize },
    #[error("witness needs {needed} slots, buffer has {capacity}")]
    BufferTooSmall { needed: usize, capacity: usize },
}

impl FfiError {
    fn status(&self) -> CoverlawStatus {
        match self {
            FfiError::NullPointer(_) => CoverlawStatus::NullPointer,
            FfiError::InvalidUtf8(_) => CoverlawStatus::InvalidUtf8,
            FfiError::Malformed(_) => CoverlawStatus::MalformedInput,
            FfiError::InvalidLattice(_) => CoverlawStatus::InvalidLattice,
            FfiError::OutOfRange { .. } => CoverlawStatus::OutOfRange,
            FfiError::BufferTooSmall { .. } => CoverlawStatus::BufferTooSmall,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn guard(f: impl FnOnce() -> Result<(), FfiError>) -> CoverlawStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CoverlawStatus::Ok
        }
        Ok(Err(e)) => {
            let status = e.status();
            set_last_error(e.to_string());
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_owned());
            set_last_error(format!("internal error: {msg}"));
            CoverlawStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &'static str) -> Result<&'a str, FfiError> {
    if p.is_null() {
        return Err(FfiError::NullPointer(name));
    }
    CStr::from_ptr(p).to_str().map_err(|_| FfiError::InvalidUtf8(name))
}

unsafe fn lattice_arg<'a>(l: *const CoverlawLattice) -> Result<&'a OrthoLattice, FfiError> {
    l.as_ref().map(|l| &l.inner).ok_or(FfiError::NullPointer("lattice"))
}

unsafe fn write_out<T>(out: *mut T, value: T, name: &'static str) -> Result<(), FfiError> {
    if out.is_null() {
        return Err(FfiError::NullPointer(name));
    }
    out.write(value);
    Ok(())
}

fn element(l: &OrthoLattice, a: usize) -> Result<usize, FfiError> {
    if a < l.len() {
        Ok(a)
    } else {
        Err(FfiError::OutOfRange { element: a, len: l.len() })
    }
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn coverlaw_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn coverlaw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a lattice from its JSON description. On success `*out` owns a
/// handle that must be released with [`coverlaw_lattice_free`].
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coverlaw_lattice_from_json(
    json: *const c_char,
    out: *mut *mut CoverlawLattice,
) -> CoverlawStatus {
    guard(|| {
        if out.is_null() {
            return Err(FfiError::NullPointer("out"));
        }
        let text = str_arg(json, "json")?;
        let spec: LatticeSpec = coverlaw::cli::parse_json(text).map_err(FfiError::Malformed)?;
        let inner = OrthoLattice::build(&spec).map_err(|e| {
            let detail = e.counterexample().map(|c| format!(" (elements {c:?})")).unwrap_or_default();
            FfiError::InvalidLattice(format!("{e}{detail}"))
        })?;
        out.write(Box::into_raw(Box::new(CoverlawLattice { inner })));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `lattice` must come from [`coverlaw_lattice_from_json`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn coverlaw_lattice_free(lattice: *mut CoverlawLattice) {
    if !lattice.is_null() {
        drop(Box::from_raw(lattice));
    }
}

/// # Safety
/// `lattice` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coverlaw_lattice_size(lattice: *const CoverlawLattice, out: *mut usize) -> CoverlawStatus {
    guard(|| write_out(out, lattice_arg(lattice)?.len(), "out"))
}

/// # Safety
/// `lattice` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coverlaw_lattice_meet(
    lattice: *const CoverlawLattice,
    a: usize,
    b: usize,
    out: *mut usize,
) -> CoverlawStatus {
    guard(|| {
        let l = lattice_arg(lattice)?;
        write_out(out, l.meet(element(l, a)?, element(l, b)?), "out")
    })
}

/// # Safety
/// `lattice` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coverlaw_lattice_join(
    lattice: *const CoverlawLattice,
    a: usize,
    b: usize,
    out: *mut usize,
) -> CoverlawStatus {
    guard(|| {
        let l = lattice_arg(lattice)?;
        write_out(out, l.join(element(l, a)?, element(l, b)?), "out")
    })
}

/// # Safety
/// `lattice` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coverlaw_lattice_ortho(
    lattice: *const CoverlawLattice,
    a: usize,
    out: *mut usize,
) -> CoverlawStatus {
    guard(|| {
        let l = lattice_arg(lattice)?;
        write_out(out, l.orthocomplement(element(l, a)?), "out")
    })
}

/// # Safety
/// `lattice` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coverlaw_lattice_commutes(
    lattice: *const CoverlawLattice,
    a: usize,
    b: usize,
    out: *mut bool,
) -> CoverlawStatus {
    guard(|| {
        let l = lattice_arg(lattice)?;
        write_out(out, l.commutes(element(l, a)?, element(l, b)?), "out")
    })
}

/// Checks a named property (`orthomodular`, `covering_law`, ...). `*pass`
/// receives the verdict. On failure the witness elements are copied into
/// `witness` (capacity `witness_cap`) and `*witness_len` receives their
/// count; it is 0 when the property holds. `witness` may be null when
/// `witness_cap` is 0.
///
/// # Safety
/// `lattice` must be a live handle, `property` a nul-terminated string,
/// `pass` and `witness_len` writable, `witness` valid for `witness_cap` writes.
#[no_mangle]
pub unsafe extern "C" fn coverlaw_lattice_check(
    lattice: *const CoverlawLattice,
    property: *const c_char,
    pass: *mut bool,
    witness: *mut usize,
    witness_cap: usize,
    witness_len: *mut usize,
) -> CoverlawStatus {
    guard(|| {
        let l = lattice_arg(lattice)?;
        let name = str_arg(property, "property")?;
        let property =
            Property::from_name(name).ok_or_else(|| FfiError::Malformed(format!("unknown property `{name}`")))?;
        if pass.is_null() {
            return Err(FfiError::NullPointer("pass"));
        }
        if witness_len.is_null() {
            return Err(FfiError::NullPointer("witness_len"));
        }
        let report = property.check(l);
        let found = report.counterexample.unwrap_or_default();
        pass.write(report.pass);
        witness_len.write(found.len());
        if found.len() > witness_cap {
            return Err(FfiError::BufferTooSmall { needed: found.len(), capacity: witness_cap });
        }
        if !found.is_empty() {
            if witness.is_null() {
                return Err(FfiError::NullPointer("witness"));
            }
            ptr::copy_nonoverlapping(found.as_ptr(), witness, found.len());
        }
        Ok(())
    })
}

/// Runs the batch driver with `argv` (without the program name). `*exit_code`
/// receives the driver's exit status and `*report` an owned string with the
/// JSON-lines report (empty when `--output` names a file). Release it with
/// [`coverlaw_string_free`]. Diagnostics that the command line tool would
/// print on stderr are available from [`coverlaw_last_error`] when the exit
/// status is non-zero.
///
/// # Safety
/// `argv` must hold `argc` nul-terminated strings; `exit_code` and `report` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coverlaw_run(
    argc: c_int,
    argv: *const *const c_char,
    exit_code: *mut c_int,
    report: *mut *mut c_char,
) -> CoverlawStatus {
    let mut diagnostics = String::new();
    let status = guard(|| {
        if exit_code.is_null() {
            return Err(FfiError::NullPointer("exit_code"));
        }
        if report.is_null() {
            return Err(FfiError::NullPointer("report"));
        }
        let argc = usize::try_from(argc).map_err(|_| FfiError::Malformed("negative argc".into()))?;
        if argc > 0 && argv.is_null() {
            return Err(FfiError::NullPointer("argv"));
        }
        let mut args = vec!["coverlaw".to_owned()];
        for i in 0..argc {
            args.push(str_arg(*argv.add(i), "argv")?.to_owned());
        }
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = coverlaw::cli::run(args, &mut out, &mut err);
        let text = CString::new(out).map_err(|_| FfiError::Malformed("report contains a nul byte".into()))?;
        exit_code.write(code);
        report.write(text.into_raw());
        if code != 0 {
            diagnostics = String::from_utf8_lossy(&err).into_owned();
        }
        Ok(())
    });
    if status == CoverlawStatus::Ok && !diagnostics.is_empty() {
        set_last_error(diagnostics);
    }
    status
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn coverlaw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
