//! C ABI for the teleportation simulator.
//!
//! The surface follows the usual handle pattern: [`telsim_session_new`]
//! validates a channel and POVM scaling once and returns an opaque
//! [`TelsimSession`]; queries and Monte Carlo runs borrow the handle, and
//! [`telsim_session_free`] releases it. Every fallible call returns a
//! [`TelsimStatus`] code and writes its result through an out-pointer, so the
//! header is usable from C without helper glue. A bundled header is kept in
//! `include/telsim.h` and regenerated on every build.
//!
//! All functions are panic-safe: a panic inside the library is caught and
//! reported as [`TelsimStatus::InternalError`] rather than unwinding across
//! the boundary.

use std::os::raw::c_char;
use std::panic::{catch_unwind, UnwindSafe};

use telsim::bellcheck::{chsh_value, AnalyzerSetting};
use telsim::povm::{build_povm, min_x, ChannelParams};
use telsim::protocol::{run_teleportation, InputSpec, InputState, XChoice};
use telsim::SimError;

/// Status code returned by every fallible library call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TelsimStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    /// The channel coefficients are not four strictly positive numbers with
    /// unit sum of squares.
    InvalidChannel = 2,
    /// The POVM scaling is not a finite positive number (or `auto`).
    InvalidScaling = 3,
    /// The POVM scaling lies below the channel's admissible minimum, so an
    /// element would have a negative eigenvalue.
    PositivityViolation = 4,
    /// A run was requested with zero trials.
    InvalidTrials = 5,
    /// A scalar argument was not a finite number.
    InvalidArgument = 6,
    /// An unexpected internal failure (including a caught panic).
    InternalError = 7,
}

fn status_of(err: &SimError) -> TelsimStatus {
    match err {
        SimError::DegenerateChannel(_) | SimError::ChannelNotNormalized(_) => {
            TelsimStatus::InvalidChannel
        }
        SimError::InvalidScaling(_) => TelsimStatus::InvalidScaling,
        SimError::PositivityViolation { .. } => TelsimStatus::PositivityViolation,
        SimError::InvalidTrialCount(_) => TelsimStatus::InvalidTrials,
        _ => TelsimStatus::InternalError,
    }
}

/// Opaque simulator session: a validated channel plus a resolved POVM
/// scaling. Create with [`telsim_session_new`], release with
/// [`telsim_session_free`].
pub struct TelsimSession {
    channel: ChannelParams,
    x: f64,
}

/// Plain-old-data summary of a Monte Carlo run, mirroring the JSON document
/// of the CLI. `mean_conclusive_fidelity` is NaN when no trial was
/// conclusive.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct TelsimRunStats {
    pub trials: u64,
    pub conclusive_trials: u64,
    pub conclusive_rate: f64,
    pub mean_conclusive_fidelity: f64,
    pub exact_success_probability: f64,
    pub x_used: f64,
    pub min_x: f64,
    pub seed: u64,
}

/// Runs `body` with panics converted to [`TelsimStatus::InternalError`].
fn guarded(body: impl FnOnce() -> TelsimStatus + UnwindSafe) -> TelsimStatus {
    catch_unwind(body).unwrap_or(TelsimStatus::InternalError)
}

/// Creates a simulator session.
///
/// `alpha..delta` are the channel coefficients (strictly positive, unit sum
/// of squares). `x` is the POVM scaling: pass a finite positive number, or
/// any value ≤ 0 to resolve it automatically to the channel's minimum. On
/// success `*out_session` owns the new handle.
///
/// # Safety
///
/// `out_session` must be a valid pointer to writable memory for one
/// `*mut TelsimSession`. The returned handle must be released exactly once
/// with [`telsim_session_free`].
#[no_mangle]
pub unsafe extern "C" fn telsim_session_new(
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
    x: f64,
    out_session: *mut *mut TelsimSession,
) -> TelsimStatus {
    if out_session.is_null() {
        return TelsimStatus::NullPointer;
    }
    guarded(move || {
        let channel = match ChannelParams::new(alpha, beta, gamma, delta) {
            Ok(c) => c,
            Err(e) => return status_of(&e),
        };
        let resolved = if x <= 0.0 {
            if x.is_nan() {
                return TelsimStatus::InvalidScaling;
            }
            min_x(&channel)
        } else {
            x
        };
        // Building the POVM once validates the scaling (finite, above the
        // channel minimum) before the handle exists.
        if let Err(e) = build_povm(&channel, resolved) {
            return status_of(&e);
        }
        let session = Box::new(TelsimSession {
            channel,
            x: resolved,
        });
        unsafe { out_session.write(Box::into_raw(session)) };
        TelsimStatus::Ok
    })
}

/// Releases a session created by [`telsim_session_new`]. NULL is ignored.
///
/// # Safety
///
/// `session` must be NULL or a handle returned by [`telsim_session_new`]
/// that has not been freed already.
#[no_mangle]
pub unsafe extern "C" fn telsim_session_free(session: *mut TelsimSession) {
    if !session.is_null() {
        drop(unsafe { Box::from_raw(session) });
    }
}

/// Returns the channel's minimum admissible POVM scaling, or NaN when
/// `session` is NULL.
///
/// # Safety
///
/// `session` must be NULL or a live handle from [`telsim_session_new`].
#[no_mangle]
pub unsafe extern "C" fn telsim_session_min_x(session: *const TelsimSession) -> f64 {
    match unsafe { session.as_ref() } {
        Some(s) => min_x(&s.channel),
        None => f64::NAN,
    }
}

/// Returns the session's resolved POVM scaling, or NaN when `session` is
/// NULL.
///
/// # Safety
///
/// `session` must be NULL or a live handle from [`telsim_session_new`].
#[no_mangle]
pub unsafe extern "C" fn telsim_session_x(session: *const TelsimSession) -> f64 {
    match unsafe { session.as_ref() } {
        Some(s) => s.x,
        None => f64::NAN,
    }
}

/// Writes the deterministic (input-independent) success probability of the
/// session's channel at its scaling to `*out_probability`.
///
/// # Safety
///
/// `session` must be NULL or a live handle from [`telsim_session_new`];
/// `out_probability` must be a valid pointer to writable memory for one
/// `double`.
#[no_mangle]
pub unsafe extern "C" fn telsim_session_exact_success_probability(
    session: *const TelsimSession,
    out_probability: *mut f64,
) -> TelsimStatus {
    let Some(s) = (unsafe { session.as_ref() }) else {
        return TelsimStatus::NullPointer;
    };
    if out_probability.is_null() {
        return TelsimStatus::NullPointer;
    }
    guarded(move || {
        let probe = InputState::new([num_complex::Complex64::new(0.5, 0.0); 4])
            .expect("uniform probe input is normalized");
        match telsim::protocol::exact_success_probability(&probe, &s.channel, s.x) {
            Ok(p) => {
                unsafe { out_probability.write(p) };
                TelsimStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Runs `trials` seeded Monte Carlo teleportation trials with a fresh
/// Haar-random input per trial and writes the summary to `*out_stats`.
/// Identical `(session, trials, seed)` give identical results.
///
/// # Safety
///
/// `session` must be NULL or a live handle from [`telsim_session_new`];
/// `out_stats` must be a valid pointer to writable memory for one
/// `TelsimRunStats`.
#[no_mangle]
pub unsafe extern "C" fn telsim_session_run(
    session: *const TelsimSession,
    trials: u64,
    seed: u64,
    out_stats: *mut TelsimRunStats,
) -> TelsimStatus {
    let Some(s) = (unsafe { session.as_ref() }) else {
        return TelsimStatus::NullPointer;
    };
    if out_stats.is_null() {
        return TelsimStatus::NullPointer;
    }
    guarded(move || {
        let run = run_teleportation(
            &InputSpec::Random,
            &s.channel,
            XChoice::Fixed(s.x),
            trials,
            seed,
        );
        match run {
            Ok(stats) => {
                let pod = TelsimRunStats {
                    trials: stats.trials,
                    conclusive_trials: stats.conclusive_trials,
                    conclusive_rate: stats.conclusive_rate,
                    mean_conclusive_fidelity: stats.mean_conclusive_fidelity.unwrap_or(f64::NAN),
                    exact_success_probability: stats.exact_success_probability,
                    x_used: stats.x_used,
                    min_x: stats.min_x,
                    seed: stats.seed,
                };
                unsafe { out_stats.write(pod) };
                TelsimStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Writes the CHSH quantity of the singlet at four analyzer angles
/// (radians) to `*out_s`. The value never exceeds 2√2.
///
/// # Safety
///
/// `out_s` must be a valid pointer to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn telsim_chsh(
    a1: f64,
    a2: f64,
    b1: f64,
    b2: f64,
    out_s: *mut f64,
) -> TelsimStatus {
    if out_s.is_null() {
        return TelsimStatus::NullPointer;
    }
    if ![a1, a2, b1, b2].iter().all(|a| a.is_finite()) {
        return TelsimStatus::InvalidArgument;
    }
    guarded(move || {
        match chsh_value(
            AnalyzerSetting::new(a1),
            AnalyzerSetting::new(a2),
            AnalyzerSetting::new(b1),
            AnalyzerSetting::new(b2),
        ) {
            Ok(s) => {
                unsafe { out_s.write(s) };
                TelsimStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Returns a static, NUL-terminated description of a status code.
#[no_mangle]
pub extern "C" fn telsim_status_message(status: TelsimStatus) -> *const c_char {
    let text: &'static [u8] = match status {
        TelsimStatus::Ok => b"ok\0",
        TelsimStatus::NullPointer => b"a required pointer argument was NULL\0",
        TelsimStatus::InvalidChannel => {
            b"channel coefficients must be strictly positive with unit sum of squares\0"
        }
        TelsimStatus::InvalidScaling => b"POVM scaling must be a finite positive number or auto\0",
        TelsimStatus::PositivityViolation => {
            b"POVM scaling lies below the channel's admissible minimum\0"
        }
        TelsimStatus::InvalidTrials => b"a run needs at least one trial\0",
        TelsimStatus::InvalidArgument => b"a scalar argument was not finite\0",
        TelsimStatus::InternalError => b"internal error\0",
    };
    text.as_ptr().cast()
}

/// Returns the static, NUL-terminated library version string.
#[no_mangle]
pub extern "C" fn telsim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
