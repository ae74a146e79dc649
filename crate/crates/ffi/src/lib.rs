//! C ABI for the toolkit: opaque handles, integer status codes, and
//! plain-text exchange using the same line formats as the CLI.
//!
//! Conventions:
//!
//! * Every function returns a [`CrsgStatus`]; out-parameters carry results.
//! * Objects are opaque pointers created and destroyed by this library;
//!   pass each pointer to exactly one matching `*_free`.
//! * Strings returned through out-parameters are NUL-terminated, owned by
//!   the library, and must be released with [`crsg_string_free`].
//! * On any non-OK status, [`crsg_last_error`] returns a thread-local
//!   human-readable message for the most recent failure.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use considerate::oracle::{
    find_improving_singleton_move, find_weak_considerate_clique_move, Budget,
};
use considerate::solver::{solve_ce, SolverConfig};
use considerate::textio::{instance_to_string, parse_instance, parse_state, state_to_string};
use considerate::{Error, GameInstance, SocialGraph, State};

// ============================================================================
// Status codes and error reporting
// ============================================================================

/// Result of every API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrsgStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    Utf8 = 2,
    /// Input text failed to parse or violated a model invariant.
    Parse = 3,
    /// A precondition of the operation did not hold.
    Contract = 4,
    /// An exhaustive search exceeded its budget; the answer is unknown.
    Budget = 5,
    /// A bug inside the library (including a caught panic).
    Internal = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = Some(CString::new(sanitized).expect("NUL bytes were stripped"));
    });
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn status_of(err: &Error) -> CrsgStatus {
    match err {
        Error::Parse { .. } | Error::Validation(_) | Error::Io(_) => CrsgStatus::Parse,
        Error::Contract(_) => CrsgStatus::Contract,
        Error::Budget(_) | Error::CliqueCap { .. } => CrsgStatus::Budget,
        Error::Internal(_) => CrsgStatus::Internal,
    }
}

fn fail(err: &Error) -> CrsgStatus {
    set_error(&err.to_string());
    status_of(err)
}

/// Message for the most recent failure on this thread, or NULL if the last
/// call succeeded. The pointer is valid until the next failing call on the
/// same thread; do not free it.
#[no_mangle]
pub extern "C" fn crsg_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow().as_ref().map_or(ptr::null(), |msg| msg.as_ptr())
    })
}

// ============================================================================
// Opaque handles
// ============================================================================

/// An instance together with its social graph (opaque).
pub struct CrsgInstance {
    instance: GameInstance,
    graph: SocialGraph,
}

/// An assignment of players to resources (opaque).
pub struct CrsgState {
    state: State,
}

// ============================================================================
// Helpers
// ============================================================================

/// Runs `body`, converting panics into `Internal` so they never unwind
/// across the ABI boundary.
fn guarded(body: impl FnOnce() -> CrsgStatus) -> CrsgStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("caught panic at the ABI boundary");
            CrsgStatus::Internal
        }
    }
}

/// # Safety
/// `raw` must be NULL or a pointer to a NUL-terminated string.
unsafe fn read_str<'a>(raw: *const c_char) -> Result<&'a str, CrsgStatus> {
    if raw.is_null() {
        set_error("string argument is NULL");
        return Err(CrsgStatus::NullArgument);
    }
    CStr::from_ptr(raw).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        CrsgStatus::Utf8
    })
}

fn give_string(out: *mut *mut c_char, text: &str) -> CrsgStatus {
    let c = match CString::new(text.replace('\0', " ")) {
        Ok(c) => c,
        Err(_) => {
            set_error("output contained an interior NUL byte");
            return CrsgStatus::Internal;
        }
    };
    unsafe { *out = c.into_raw() };
    clear_error();
    CrsgStatus::Ok
}

// ============================================================================
// Instances
// ============================================================================

/// Parses an instance (with optional edge lines) from text into `out`.
///
/// # Safety
/// `text` must point to a NUL-terminated string; `out` must point to
/// writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn crsg_instance_parse(
    text: *const c_char,
    out: *mut *mut CrsgInstance,
) -> CrsgStatus {
    guarded(|| {
        if out.is_null() {
            set_error("out pointer is NULL");
            return CrsgStatus::NullArgument;
        }
        let text = match read_str(text) {
            Ok(t) => t,
            Err(status) => return status,
        };
        match parse_instance(text) {
            Ok((instance, graph)) => {
                let handle = Box::new(CrsgInstance { instance, graph });
                *out = Box::into_raw(handle);
                clear_error();
                CrsgStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Releases an instance handle. NULL is ignored.
///
/// # Safety
/// `handle` must be NULL or a pointer returned by [`crsg_instance_parse`]
/// that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn crsg_instance_free(handle: *mut CrsgInstance) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Number of players, or 0 when `handle` is NULL.
///
/// # Safety
/// `handle` must be NULL or a live instance handle.
#[no_mangle]
pub unsafe extern "C" fn crsg_instance_players(handle: *const CrsgInstance) -> usize {
    handle.as_ref().map_or(0, |h| h.instance.players())
}

/// Number of resources, or 0 when `handle` is NULL.
///
/// # Safety
/// `handle` must be NULL or a live instance handle.
#[no_mangle]
pub unsafe extern "C" fn crsg_instance_resources(handle: *const CrsgInstance) -> usize {
    handle.as_ref().map_or(0, |h| h.instance.resources())
}

/// Serializes the instance (players, resources, delay tables, edges) back
/// to its text form.
///
/// # Safety
/// `handle` must be a live instance handle; `out` must point to writable
/// storage for one pointer. Free the result with [`crsg_string_free`].
#[no_mangle]
pub unsafe extern "C" fn crsg_instance_format(
    handle: *const CrsgInstance,
    out: *mut *mut c_char,
) -> CrsgStatus {
    guarded(|| {
        let Some(h) = handle.as_ref() else {
            set_error("instance handle is NULL");
            return CrsgStatus::NullArgument;
        };
        if out.is_null() {
            set_error("out pointer is NULL");
            return CrsgStatus::NullArgument;
        }
        give_string(out, &instance_to_string(&h.instance, &h.graph))
    })
}

// ============================================================================
// States
// ============================================================================

/// Parses a `state ...` line against an instance into `out`.
///
/// # Safety
/// `handle` must be a live instance handle; `text` must point to a
/// NUL-terminated string; `out` must point to writable storage for one
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn crsg_state_parse(
    handle: *const CrsgInstance,
    text: *const c_char,
    out: *mut *mut CrsgState,
) -> CrsgStatus {
    guarded(|| {
        let Some(h) = handle.as_ref() else {
            set_error("instance handle is NULL");
            return CrsgStatus::NullArgument;
        };
        if out.is_null() {
            set_error("out pointer is NULL");
            return CrsgStatus::NullArgument;
        }
        let text = match read_str(text) {
            Ok(t) => t,
            Err(status) => return status,
        };
        match parse_state(&h.instance, text) {
            Ok(state) => {
                *out = Box::into_raw(Box::new(CrsgState { state }));
                clear_error();
                CrsgStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Releases a state handle. NULL is ignored.
///
/// # Safety
/// `handle` must be NULL or a pointer returned by this library that has not
/// been freed yet.
#[no_mangle]
pub unsafe extern "C" fn crsg_state_free(handle: *mut CrsgState) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Serializes a state to its single-line text form.
///
/// # Safety
/// `handle` must be a live state handle; `out` must point to writable
/// storage for one pointer. Free the result with [`crsg_string_free`].
#[no_mangle]
pub unsafe extern "C" fn crsg_state_format(
    handle: *const CrsgState,
    out: *mut *mut c_char,
) -> CrsgStatus {
    guarded(|| {
        let Some(h) = handle.as_ref() else {
            set_error("state handle is NULL");
            return CrsgStatus::NullArgument;
        };
        if out.is_null() {
            set_error("out pointer is NULL");
            return CrsgStatus::NullArgument;
        }
        give_string(out, &state_to_string(&h.state))
    })
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a string pointer returned by this library that has
/// not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn crsg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ============================================================================
// Solving and verification
// ============================================================================

/// Runs the constructive solver and writes the resulting state handle to
/// `out`. The result is a Nash equilibrium admitting no weak considerate
/// improving clique move.
///
/// # Safety
/// `handle` must be a live instance handle; `out` must point to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn crsg_solve(
    handle: *const CrsgInstance,
    out: *mut *mut CrsgState,
) -> CrsgStatus {
    guarded(|| {
        let Some(h) = handle.as_ref() else {
            set_error("instance handle is NULL");
            return CrsgStatus::NullArgument;
        };
        if out.is_null() {
            set_error("out pointer is NULL");
            return CrsgStatus::NullArgument;
        }
        let config = match SolverConfig::for_instance(&h.instance) {
            Ok(c) => c,
            Err(e) => return fail(&e),
        };
        match solve_ce(&h.instance, &h.graph, &config) {
            Ok(trace) => {
                let state = trace.final_state().clone();
                *out = Box::into_raw(Box::new(CrsgState { state }));
                clear_error();
                CrsgStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Writes 1 to `out` when no single player can strictly improve, else 0.
///
/// # Safety
/// `instance` and `state` must be live handles; `out` must point to
/// writable storage for one `int32_t`.
#[no_mangle]
pub unsafe extern "C" fn crsg_is_nash(
    instance: *const CrsgInstance,
    state: *const CrsgState,
    out: *mut i32,
) -> CrsgStatus {
    guarded(|| {
        let (Some(h), Some(s)) = (instance.as_ref(), state.as_ref()) else {
            set_error("instance or state handle is NULL");
            return CrsgStatus::NullArgument;
        };
        if out.is_null() {
            set_error("out pointer is NULL");
            return CrsgStatus::NullArgument;
        }
        match find_improving_singleton_move(&h.instance, &h.graph, &s.state) {
            Ok(found) => {
                *out = i32::from(found.is_none());
                clear_error();
                CrsgStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Writes 1 to `out` when no clique of the social graph has a weak
/// considerate improving move, else 0. Returns `Budget` (leaving `out`
/// untouched) if the exhaustive search exceeds the given caps; pass 0 for
/// either cap to use its default.
///
/// # Safety
/// `instance` and `state` must be live handles; `out` must point to
/// writable storage for one `int32_t`.
#[no_mangle]
pub unsafe extern "C" fn crsg_is_clique_stable(
    instance: *const CrsgInstance,
    state: *const CrsgState,
    max_cliques: usize,
    max_deviations: usize,
    out: *mut i32,
) -> CrsgStatus {
    guarded(|| {
        let (Some(h), Some(s)) = (instance.as_ref(), state.as_ref()) else {
            set_error("instance or state handle is NULL");
            return CrsgStatus::NullArgument;
        };
        if out.is_null() {
            set_error("out pointer is NULL");
            return CrsgStatus::NullArgument;
        }
        let defaults = Budget::default();
        let budget = Budget {
            max_cliques: if max_cliques == 0 { defaults.max_cliques } else { max_cliques },
            max_deviations: if max_deviations == 0 {
                defaults.max_deviations
            } else {
                max_deviations
            },
        };
        match find_weak_considerate_clique_move(&h.instance, &h.graph, &s.state, &budget) {
            Ok(found) => {
                *out = i32::from(found.is_none());
                clear_error();
                CrsgStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

// ============================================================================
// Tests (Rust-side exercise of the extern surface)
// ============================================================================

#[cfg(test)]
mod tests {
    use super::*;

    const TINY_LINEAR: &str = "players 3\nresources 2\ndelay 0 1 2 3\ndelay 1 1 2 3\n";

    fn c_string(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    unsafe fn parse_instance_handle(text: &str) -> *mut CrsgInstance {
        let c = c_string(text);
        let mut out: *mut CrsgInstance = ptr::null_mut();
        assert_eq!(crsg_instance_parse(c.as_ptr(), &mut out), CrsgStatus::Ok);
        assert!(!out.is_null());
        out
    }

    #[test]
    fn parse_solve_format_round_trip() {
        unsafe {
            let inst = parse_instance_handle(TINY_LINEAR);
            assert_eq!(crsg_instance_players(inst), 3);
            assert_eq!(crsg_instance_resources(inst), 2);

            let mut solved: *mut CrsgState = ptr::null_mut();
            assert_eq!(crsg_solve(inst, &mut solved), CrsgStatus::Ok);

            let mut text: *mut c_char = ptr::null_mut();
            assert_eq!(crsg_state_format(solved, &mut text), CrsgStatus::Ok);
            let s = CStr::from_ptr(text).to_str().unwrap().to_owned();
            assert_eq!(s, "state 0 1 0\n");
            crsg_string_free(text);

            let mut nash: i32 = -1;
            assert_eq!(crsg_is_nash(inst, solved, &mut nash), CrsgStatus::Ok);
            assert_eq!(nash, 1);
            let mut stable: i32 = -1;
            assert_eq!(crsg_is_clique_stable(inst, solved, 0, 0, &mut stable), CrsgStatus::Ok);
            assert_eq!(stable, 1);

            crsg_state_free(solved);
            crsg_instance_free(inst);
        }
    }

    #[test]
    fn state_parse_checks_bounds() {
        unsafe {
            let inst = parse_instance_handle(TINY_LINEAR);
            let bad = c_string("state 0 1 7\n");
            let mut out: *mut CrsgState = ptr::null_mut();
            assert_eq!(crsg_state_parse(inst, bad.as_ptr(), &mut out), CrsgStatus::Parse);
            let msg = CStr::from_ptr(crsg_last_error()).to_str().unwrap();
            assert!(!msg.is_empty(), "a failing call must leave a message");
            crsg_instance_free(inst);
        }
    }

    #[test]
    fn unstable_state_reports_zero() {
        unsafe {
            let inst = parse_instance_handle(TINY_LINEAR);
            let all_piled = c_string("state 0 0 0\n");
            let mut state: *mut CrsgState = ptr::null_mut();
            assert_eq!(crsg_state_parse(inst, all_piled.as_ptr(), &mut state), CrsgStatus::Ok);
            let mut nash: i32 = -1;
            assert_eq!(crsg_is_nash(inst, state, &mut nash), CrsgStatus::Ok);
            assert_eq!(nash, 0);
            crsg_state_free(state);
            crsg_instance_free(inst);
        }
    }

    #[test]
    fn null_arguments_are_reported_not_crashed() {
        unsafe {
            let mut out: *mut CrsgInstance = ptr::null_mut();
            assert_eq!(crsg_instance_parse(ptr::null(), &mut out), CrsgStatus::NullArgument);
            assert_eq!(
                crsg_instance_parse(c_string("x").as_ptr(), ptr::null_mut()),
                CrsgStatus::NullArgument
            );
            assert_eq!(crsg_instance_players(ptr::null()), 0);
            crsg_instance_free(ptr::null_mut());
            crsg_state_free(ptr::null_mut());
            crsg_string_free(ptr::null_mut());
        }
    }

    #[test]
    fn malformed_text_sets_parse_status_and_message() {
        unsafe {
            let c = c_string("players 3\nresources 1\ndelay 0 5 5 6\n");
            let mut out: *mut CrsgInstance = ptr::null_mut();
            assert_eq!(crsg_instance_parse(c.as_ptr(), &mut out), CrsgStatus::Parse);
            assert!(out.is_null());
            let msg = CStr::from_ptr(crsg_last_error()).to_str().unwrap();
            assert!(msg.contains("increas"), "message should name the violation: {msg}");
        }
    }

    #[test]
    fn instance_format_round_trips() {
        unsafe {
            let text = "players 2\nresources 2\ndelay 0 1 4\ndelay 1 2 3\nedge 0 1\n";
            let inst = parse_instance_handle(text);
            let mut raw: *mut c_char = ptr::null_mut();
            assert_eq!(crsg_instance_format(inst, &mut raw), CrsgStatus::Ok);
            assert_eq!(CStr::from_ptr(raw).to_str().unwrap(), text);
            crsg_string_free(raw);
            crsg_instance_free(inst);
        }
    }
}
