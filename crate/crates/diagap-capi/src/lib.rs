//! C ABI for the diagap library: opaque handles, integer status codes, and a
//! per-thread last-error message. The generated header lands in
//! `include/diagap.h`.
//!
//! Ownership rules: every `*_new`/`*_parse`/`*_build` constructor transfers
//! ownership to the caller, who must release it with the matching `*_free`;
//! strings returned through out-pointers must be released with
//! `diagap_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use diagap::counting::{count_general, CountValue, DiagonalForm};
use diagap::exceptional::is_exceptional_kummer;
use diagap::gapcraft::{
    build_witness, check_witness, ratio_from_string, ratio_to_string, GapWitness, SelectionPolicy,
};
use diagap::Error;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagapStatus {
    /// Success.
    DiagapOk = 0,
    /// Input outside the operation's domain.
    DiagapDomain = 1,
    /// A certificate failed verification.
    DiagapCertificate = 2,
    /// A work or memory budget was exceeded.
    DiagapBudget = 3,
    /// I/O or serialization failure.
    DiagapIo = 4,
    /// A required pointer argument was null or not valid UTF-8.
    DiagapBadPointer = 5,
    /// An internal invariant failed (panic caught at the boundary).
    DiagapInternal = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap());
}

fn status_of(err: &Error) -> DiagapStatus {
    match err {
        Error::Domain(_) => DiagapStatus::DiagapDomain,
        Error::Certificate(_) => DiagapStatus::DiagapCertificate,
        Error::Budget(_) => DiagapStatus::DiagapBudget,
        Error::Io(_) | Error::Serde(_) => DiagapStatus::DiagapIo,
    }
}

fn fail(err: &Error) -> DiagapStatus {
    set_error(&err.to_string());
    status_of(err)
}

/// Run a fallible body with panics converted to `DiagapInternal`.
fn guarded(body: impl FnOnce() -> DiagapStatus) -> DiagapStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic at the C boundary");
            DiagapStatus::DiagapInternal
        }
    }
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Option<&'a str> {
    if ptr.is_null() {
        return None;
    }
    unsafe { CStr::from_ptr(ptr) }.to_str().ok()
}

fn give_string(s: String, out: *mut *mut c_char) -> DiagapStatus {
    match CString::new(s) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            DiagapStatus::DiagapOk
        }
        Err(_) => {
            set_error("string contains interior NUL");
            DiagapStatus::DiagapInternal
        }
    }
}

/// Opaque diagonal form handle.
pub struct DiagapForm(DiagonalForm);

/// Opaque gap witness handle.
pub struct DiagapWitness(GapWitness);

/// The message for the most recent error on this thread. The pointer stays
/// valid until the next failing call on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn diagap_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Release a string returned through an out-pointer.
#[no_mangle]
pub extern "C" fn diagap_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Parse a form spec `<degree>:<c1>,<c2>,...` into a new handle.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn diagap_form_parse(
    spec: *const c_char,
    out: *mut *mut DiagapForm,
) -> DiagapStatus {
    guarded(|| {
        if out.is_null() {
            set_error("out pointer is null");
            return DiagapStatus::DiagapBadPointer;
        }
        let Some(spec) = (unsafe { read_str(spec) }) else {
            set_error("form spec is null or not UTF-8");
            return DiagapStatus::DiagapBadPointer;
        };
        match DiagonalForm::parse(spec) {
            Ok(form) => {
                unsafe { *out = Box::into_raw(Box::new(DiagapForm(form))) };
                DiagapStatus::DiagapOk
            }
            Err(e) => fail(&e),
        }
    })
}

/// Release a form handle.
///
/// # Safety
/// `form` must be a pointer from `diagap_form_parse` (or null).
#[no_mangle]
pub unsafe extern "C" fn diagap_form_free(form: *mut DiagapForm) {
    if !form.is_null() {
        drop(unsafe { Box::from_raw(form) });
    }
}

/// Exact count r_F(residue, p) at a prime p, as a decimal string (counts can
/// exceed 64 bits for quartic forms at large primes).
///
/// # Safety
/// `form` must be a live form handle, `out_count` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn diagap_count_prime(
    form: *const DiagapForm,
    prime: u64,
    residue: u64,
    out_count: *mut *mut c_char,
) -> DiagapStatus {
    guarded(|| {
        let (Some(form), false) = (unsafe { form.as_ref() }, out_count.is_null()) else {
            set_error("null handle or out pointer");
            return DiagapStatus::DiagapBadPointer;
        };
        if !diagap::arith::is_prime(prime) {
            set_error("modulus is not prime");
            return DiagapStatus::DiagapDomain;
        }
        let m = num_bigint::BigUint::from(residue % prime);
        match count_general(&form.0, &m, prime) {
            Ok(result) => match result.value {
                CountValue::Exact(n) => give_string(n.to_string(), out_count),
                CountValue::Interval { lo, hi } => give_string(format!("{lo}..{hi}"), out_count),
            },
            Err(e) => fail(&e),
        }
    })
}

/// Classify a quartic form; writes 1 for exceptional, 0 otherwise.
///
/// # Safety
/// `form` must be a live form handle, `out_exceptional` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn diagap_classify(
    form: *const DiagapForm,
    out_exceptional: *mut i32,
) -> DiagapStatus {
    guarded(|| {
        let (Some(form), false) = (unsafe { form.as_ref() }, out_exceptional.is_null()) else {
            set_error("null handle or out pointer");
            return DiagapStatus::DiagapBadPointer;
        };
        match is_exceptional_kummer(&form.0) {
            Ok((exceptional, _)) => {
                unsafe { *out_exceptional = exceptional as i32 };
                DiagapStatus::DiagapOk
            }
            Err(e) => fail(&e),
        }
    })
}

/// Build a gap witness. `target_epsilon` and `beta` are `num/den` strings;
/// `target_epsilon` may be null for the default 1/(2K).
///
/// # Safety
/// `form` must be a live form handle; string arguments NUL-terminated; `out`
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn diagap_witness_build(
    form: *const DiagapForm,
    gap_length: u32,
    target_epsilon: *const c_char,
    beta: *const c_char,
    scan_limit: u64,
    max_primes: usize,
    out: *mut *mut DiagapWitness,
) -> DiagapStatus {
    guarded(|| {
        let (Some(form), false) = (unsafe { form.as_ref() }, out.is_null()) else {
            set_error("null handle or out pointer");
            return DiagapStatus::DiagapBadPointer;
        };
        let target = if target_epsilon.is_null() {
            None
        } else {
            let Some(text) = (unsafe { read_str(target_epsilon) }) else {
                set_error("target epsilon is not UTF-8");
                return DiagapStatus::DiagapBadPointer;
            };
            match ratio_from_string(text) {
                Ok(r) => Some(r),
                Err(e) => return fail(&e),
            }
        };
        let Some(beta) = (unsafe { read_str(beta) }) else {
            set_error("beta is null or not UTF-8");
            return DiagapStatus::DiagapBadPointer;
        };
        let mut policy = SelectionPolicy::new(1, 2, scan_limit, max_primes);
        policy.beta = match ratio_from_string(beta) {
            Ok(b) => b,
            Err(e) => return fail(&e),
        };
        match build_witness(&form.0, gap_length, target, &policy) {
            Ok(w) => {
                unsafe { *out = Box::into_raw(Box::new(DiagapWitness(w))) };
                DiagapStatus::DiagapOk
            }
            Err(e) => fail(&e),
        }
    })
}

/// Parse a witness JSON document into a new handle.
///
/// # Safety
/// `json` must be NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn diagap_witness_from_json(
    json: *const c_char,
    out: *mut *mut DiagapWitness,
) -> DiagapStatus {
    guarded(|| {
        let (Some(json), false) = (unsafe { read_str(json) }, out.is_null()) else {
            set_error("null json or out pointer");
            return DiagapStatus::DiagapBadPointer;
        };
        match GapWitness::from_json(json) {
            Ok(w) => {
                unsafe { *out = Box::into_raw(Box::new(DiagapWitness(w))) };
                DiagapStatus::DiagapOk
            }
            Err(e) => fail(&e),
        }
    })
}

/// Serialize a witness back to JSON.
///
/// # Safety
/// `witness` must be a live handle, `out_json` valid.
#[no_mangle]
pub unsafe extern "C" fn diagap_witness_to_json(
    witness: *const DiagapWitness,
    out_json: *mut *mut c_char,
) -> DiagapStatus {
    guarded(|| {
        let (Some(w), false) = (unsafe { witness.as_ref() }, out_json.is_null()) else {
            set_error("null handle or out pointer");
            return DiagapStatus::DiagapBadPointer;
        };
        match w.0.to_json() {
            Ok(json) => give_string(json, out_json),
            Err(e) => fail(&e),
        }
    })
}

/// Re-verify a witness from scratch against a form; on success writes the
/// verified epsilon as a `num/den` string.
///
/// # Safety
/// `form` and `witness` must be live handles, `out_epsilon` valid.
#[no_mangle]
pub unsafe extern "C" fn diagap_witness_check(
    form: *const DiagapForm,
    witness: *const DiagapWitness,
    out_epsilon: *mut *mut c_char,
) -> DiagapStatus {
    guarded(|| {
        let (Some(form), Some(w), false) = (
            unsafe { form.as_ref() },
            unsafe { witness.as_ref() },
            out_epsilon.is_null(),
        ) else {
            set_error("null handle or out pointer");
            return DiagapStatus::DiagapBadPointer;
        };
        match check_witness(&form.0, &w.0) {
            Ok(eps) => give_string(ratio_to_string(&eps), out_epsilon),
            Err(e) => fail(&e),
        }
    })
}

/// Release a witness handle.
///
/// # Safety
/// `witness` must be a pointer from a witness constructor (or null).
#[no_mangle]
pub unsafe extern "C" fn diagap_witness_free(witness: *mut DiagapWitness) {
    if !witness.is_null() {
        drop(unsafe { Box::from_raw(witness) });
    }
}
