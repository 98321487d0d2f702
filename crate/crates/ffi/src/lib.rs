//! C ABI over `rendezvous-core`.
//!
//! Conventions:
//!
//! - Every fallible function returns an [`RdvStatus`] and writes its result
//!   through an out-pointer. On failure the out-pointer is left untouched and
//!   [`rdv_last_error_message`] describes the error.
//! - Handles ([`RdvTrialConfig`], [`RdvExperiment`]) are opaque, created by a
//!   `*_new` / `*_from_*` function and released with the matching `*_free`.
//! - Strings returned by the library are NUL-terminated, owned by the caller
//!   and released with [`rdv_string_free`].
//! - Panics never cross the boundary; they surface as `RDV_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use rendezvous_core::analysis::{self, Scenario};
use rendezvous_core::channel::{ChannelParams, LogBase};
use rendezvous_core::engine::{self, Placement, TrialConfig};
use rendezvous_core::harness::{self, ExperimentSpec};
use rendezvous_core::policies::{Arm, PolicyKind, PolicySpec, DEFAULT_A, DEFAULT_EPSILON};
use rendezvous_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RdvStatus {
    Ok = 0,
    NullPointer = 1,
    /// Bad parameter, config key or string encoding.
    InvalidArgument = 2,
    /// A formula was evaluated outside its domain, including zero drift.
    Domain = 3,
    Io = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RdvPolicy {
    Greedy = 0,
    RExp3 = 1,
    RThompson = 2,
    ROptimal = 3,
}

/// Arm numbering: up (+y), down (-y), right (+x), left (-x).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RdvArm {
    Up = 1,
    Down = 2,
    Right = 3,
    Left = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RdvLogBase {
    Natural = 0,
    Base10 = 1,
}

/// Channel parameters, plain data. Fill with [`rdv_channel_default`] and
/// adjust fields as needed.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdvChannel {
    pub p_i: f64,
    pub d_0: f64,
    pub n_p: f64,
    pub sigma: f64,
    pub x_c: f64,
    pub delta: f64,
    /// An [`RdvLogBase`] value.
    pub log_base: u32,
}

/// Outcome of one trial.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RdvTrialSummary {
    pub met: bool,
    pub turns: u64,
    /// Sum over turns of the number of independently moving groups.
    pub group_steps: u64,
    pub traversed_distance: f64,
    pub num_groups: u64,
}

/// Opaque trial configuration.
pub struct RdvTrialConfig {
    inner: TrialConfig,
    kind: PolicyKind,
    a: f64,
    epsilon: f64,
}

/// Opaque experiment, as read from a key = value config.
pub struct RdvExperiment {
    inner: ExperimentSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', "\\0")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> RdvStatus {
    match e {
        Error::Domain(_) | Error::NoDrift => RdvStatus::Domain,
        Error::Io { .. } => RdvStatus::Io,
        Error::InvalidParameter { .. } | Error::Contract(_) | Error::Config { .. } => RdvStatus::InvalidArgument,
    }
}

fn fail(status: RdvStatus, msg: &str) -> RdvStatus {
    set_last_error(msg);
    status
}

/// Runs `f`, mapping errors and panics to a status.
fn guard<F>(f: F) -> RdvStatus
where
    F: FnOnce() -> Result<(), RdvStatus>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            RdvStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(RdvStatus::Panic, &format!("panic: {msg}"))
        }
    }
}

fn core_err(e: Error) -> RdvStatus {
    fail(status_of(&e), &e.to_string())
}

fn non_null<'a, T>(p: *const T, name: &str) -> Result<&'a T, RdvStatus> {
    // SAFETY: the caller promises `p` is null or points to a live `T`.
    unsafe { p.as_ref() }.ok_or_else(|| fail(RdvStatus::NullPointer, &format!("`{name}` is null")))
}

fn non_null_mut<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, RdvStatus> {
    // SAFETY: as above, and no other reference to `*p` is live.
    unsafe { p.as_mut() }.ok_or_else(|| fail(RdvStatus::NullPointer, &format!("`{name}` is null")))
}

fn c_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, RdvStatus> {
    if p.is_null() {
        return Err(fail(RdvStatus::NullPointer, &format!("`{name}` is null")));
    }
    // SAFETY: non-null and NUL-terminated per the API contract.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| fail(RdvStatus::InvalidArgument, &format!("`{name}` is not UTF-8")))
}

fn channel_from(c: &RdvChannel) -> Result<ChannelParams, RdvStatus> {
    let params = ChannelParams {
        p_i: c.p_i,
        d_0: c.d_0,
        n_p: c.n_p,
        sigma: c.sigma,
        x_c: c.x_c,
        delta: c.delta,
        log_base: match c.log_base {
            x if x == RdvLogBase::Natural as u32 => LogBase::Natural,
            x if x == RdvLogBase::Base10 as u32 => LogBase::Base10,
            other => return Err(fail(RdvStatus::InvalidArgument, &format!("unknown log base {other}"))),
        },
    };
    params.validate().map_err(core_err)?;
    Ok(params)
}

fn scenario(channel: *const RdvChannel, x: f64, y: f64) -> Result<Scenario, RdvStatus> {
    let c = channel_from(non_null(channel, "channel")?)?;
    Scenario::new(x, y, c).map_err(core_err)
}

// Enums arrive as plain integers: a C caller can pass any value.
fn policy_kind(p: u32) -> Result<PolicyKind, RdvStatus> {
    PolicyKind::ALL
        .get(p as usize)
        .copied()
        .ok_or_else(|| fail(RdvStatus::InvalidArgument, &format!("unknown policy {p}")))
}

fn to_arm(a: u32) -> Result<Arm, RdvStatus> {
    Arm::from_index(a as usize).ok_or_else(|| fail(RdvStatus::InvalidArgument, &format!("unknown arm {a}")))
}

fn write_out<T>(out: *mut T, v: T) -> Result<(), RdvStatus> {
    let slot = non_null_mut(out, "out")?;
    *slot = v;
    Ok(())
}

/// Message for the most recent failure on this thread; empty after a
/// success. Valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn rdv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed yet.
#[no_mangle]
pub unsafe extern "C" fn rdv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn rdv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default channel: sigma 4 dB, n_p 4, X_c 75 m, step 0.1 m, natural log.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rdv_channel_default(out: *mut RdvChannel) -> RdvStatus {
    guard(|| {
        let c = ChannelParams::default();
        write_out(
            out,
            RdvChannel {
                p_i: c.p_i,
                d_0: c.d_0,
                n_p: c.n_p,
                sigma: c.sigma,
                x_c: c.x_c,
                delta: c.delta,
                log_base: RdvLogBase::Natural as u32,
            },
        )
    })
}

/// Standard Gaussian tail probability.
#[no_mangle]
pub extern "C" fn rdv_q_function(x: f64) -> f64 {
    analysis::q_function(x)
}

/// Probability that the `n_avg`-turn averaged reward of `arm` (an
/// [`RdvArm`] value) is positive for a player whose opponent sits at
/// `(x, y)`.
///
/// # Safety
/// `channel` must be null or point to an `RdvChannel`; `out` must be null or
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rdv_prob_positive(
    channel: *const RdvChannel,
    x: f64,
    y: f64,
    arm: u32,
    n_avg: u64,
    out: *mut f64,
) -> RdvStatus {
    guard(|| {
        let s = scenario(channel, x, y)?;
        let p = analysis::prob_positive(to_arm(arm)?, &s, n_avg).map_err(core_err)?;
        write_out(out, p)
    })
}

/// Greedy expected meeting turns for opponent offset `(x, y)`.
///
/// # Safety
/// As [`rdv_prob_positive`].
#[no_mangle]
pub unsafe extern "C" fn rdv_greedy_meeting_bound(
    channel: *const RdvChannel,
    x: f64,
    y: f64,
    out: *mut f64,
) -> RdvStatus {
    guard(|| {
        let s = scenario(channel, x, y)?;
        write_out(out, analysis::greedy_meeting_bound(&s))
    })
}

/// R-Optimal meeting-turn bound with confidence multiplier `z`.
///
/// # Safety
/// As [`rdv_prob_positive`].
#[no_mangle]
pub unsafe extern "C" fn rdv_roptimal_meeting_bound(
    channel: *const RdvChannel,
    x: f64,
    y: f64,
    z: f64,
    out: *mut f64,
) -> RdvStatus {
    guard(|| {
        let s = scenario(channel, x, y)?;
        let b = analysis::roptimal_meeting_bound(&s, z).map_err(core_err)?;
        write_out(out, b)
    })
}

/// New configuration for `num_players` players placed uniformly in a square
/// of side `area_side`, all running `policy` (an [`RdvPolicy`] value). The
/// meeting radius defaults to two steps and the seed to 0.
///
/// # Safety
/// `channel` must be null or point to an `RdvChannel`; `out` must be null or
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rdv_trial_config_new(
    channel: *const RdvChannel,
    policy: u32,
    num_players: usize,
    area_side: f64,
    max_turns: u64,
    out: *mut *mut RdvTrialConfig,
) -> RdvStatus {
    guard(|| {
        let c = channel_from(non_null(channel, "channel")?)?;
        let kind = policy_kind(policy)?;
        let inner = TrialConfig {
            num_players,
            area_side,
            placement: Placement::Uniform,
            ..TrialConfig::two_player(c, PolicySpec::new(kind, DEFAULT_A, DEFAULT_EPSILON), 0.0, 0.0, max_turns)
        };
        inner.validate().map_err(core_err)?;
        let handle = Box::new(RdvTrialConfig { inner, kind, a: DEFAULT_A, epsilon: DEFAULT_EPSILON });
        write_out(out, Box::into_raw(handle))
    })
}

/// Releases a configuration. Null is ignored.
///
/// # Safety
/// `cfg` must come from [`rdv_trial_config_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn rdv_trial_config_free(cfg: *mut RdvTrialConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Applies `edit` to a copy and keeps it only if it validates.
fn edit_config(cfg: *mut RdvTrialConfig, edit: impl FnOnce(&mut RdvTrialConfig)) -> Result<(), RdvStatus> {
    let cfg = non_null_mut(cfg, "cfg")?;
    let mut next = RdvTrialConfig { inner: cfg.inner.clone(), ..*cfg };
    edit(&mut next);
    next.inner.policies = vec![PolicySpec::new(next.kind, next.a, next.epsilon)];
    next.inner.validate().map_err(core_err)?;
    *cfg = next;
    Ok(())
}

/// # Safety
/// `cfg` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rdv_trial_config_set_seed(cfg: *mut RdvTrialConfig, seed: u64) -> RdvStatus {
    guard(|| edit_config(cfg, |c| c.inner.seed = seed))
}

/// # Safety
/// `cfg` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rdv_trial_config_set_meet_radius(cfg: *mut RdvTrialConfig, radius: f64) -> RdvStatus {
    guard(|| edit_config(cfg, |c| c.inner.meet_radius = radius))
}

/// # Safety
/// `cfg` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rdv_trial_config_set_avg_window(cfg: *mut RdvTrialConfig, window: usize) -> RdvStatus {
    guard(|| edit_config(cfg, |c| c.inner.avg_window = window))
}

/// Learning rates: `a` for R-Exp3 and `epsilon` for R-Thompson.
///
/// # Safety
/// `cfg` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rdv_trial_config_set_rates(cfg: *mut RdvTrialConfig, a: f64, epsilon: f64) -> RdvStatus {
    guard(|| {
        edit_config(cfg, |c| {
            c.a = a;
            c.epsilon = epsilon;
        })
    })
}

/// Fixes player 0 at the origin and player 1 at `(x, y)`. Two players only.
///
/// # Safety
/// `cfg` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rdv_trial_config_set_relative_start(cfg: *mut RdvTrialConfig, x: f64, y: f64) -> RdvStatus {
    guard(|| edit_config(cfg, |c| c.inner.placement = Placement::Relative { x, y }))
}

/// Runs one trial. Two-player configurations use the pairwise loop, larger
/// ones the group-merging loop.
///
/// # Safety
/// `cfg` must be null or a live handle; `out` must be null or valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn rdv_run_trial(cfg: *const RdvTrialConfig, out: *mut RdvTrialSummary) -> RdvStatus {
    guard(|| {
        let cfg = &non_null(cfg, "cfg")?.inner;
        let r = if cfg.num_players == 2 { engine::run_two_player(cfg) } else { engine::run_multiplayer(cfg) }
            .map_err(core_err)?;
        let mut leaders = r.final_leaders.clone();
        leaders.sort_unstable();
        leaders.dedup();
        write_out(
            out,
            RdvTrialSummary {
                met: r.met,
                turns: r.turns,
                group_steps: r.group_steps,
                traversed_distance: r.traversed_distance,
                num_groups: leaders.len() as u64,
            },
        )
    })
}

/// Parses a key = value experiment description.
///
/// # Safety
/// `text` must be null or a NUL-terminated string; `out` must be null or
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rdv_experiment_from_config_str(
    text: *const c_char,
    out: *mut *mut RdvExperiment,
) -> RdvStatus {
    guard(|| {
        let text = c_str(text, "text")?;
        let inner = ExperimentSpec::from_config_str(text).map_err(core_err)?;
        write_out(out, Box::into_raw(Box::new(RdvExperiment { inner })))
    })
}

/// Overrides one key, exactly like a config line `key = value`.
///
/// # Safety
/// `exp` must be null or a live handle; `key` and `value` must be null or
/// NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn rdv_experiment_set(
    exp: *mut RdvExperiment,
    key: *const c_char,
    value: *const c_char,
) -> RdvStatus {
    guard(|| {
        let exp = non_null_mut(exp, "exp")?;
        let key = c_str(key, "key")?;
        let value = c_str(value, "value")?;
        exp.inner.set(key, value).map_err(core_err)
    })
}

/// Runs the experiment and returns its CSV table. Release the string with
/// [`rdv_string_free`].
///
/// # Safety
/// `exp` must be null or a live handle; `out` must be null or valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn rdv_experiment_run_csv(exp: *const RdvExperiment, out: *mut *mut c_char) -> RdvStatus {
    guard(|| {
        let exp = non_null(exp, "exp")?;
        if out.is_null() {
            return Err(fail(RdvStatus::NullPointer, "`out` is null"));
        }
        let outcome = harness::run_experiment(&exp.inner).map_err(core_err)?;
        let csv = CString::new(outcome.table.to_csv())
            .map_err(|_| fail(RdvStatus::InvalidArgument, "CSV contains a NUL byte"))?;
        write_out(out, csv.into_raw())
    })
}

/// Releases an experiment. Null is ignored.
///
/// # Safety
/// `exp` must come from [`rdv_experiment_from_config_str`] and not have been
/// freed.
#[no_mangle]
pub unsafe extern "C" fn rdv_experiment_free(exp: *mut RdvExperiment) {
    if !exp.is_null() {
        drop(Box::from_raw(exp));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn last_error() -> String {
        unsafe { CStr::from_ptr(rdv_last_error_message()) }.to_string_lossy().into_owned()
    }

    #[test]
    fn panics_become_status() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, RdvStatus::Panic);
        assert!(last_error().contains("boom"));
    }

    #[test]
    fn errors_map_to_status() {
        assert_eq!(status_of(&Error::NoDrift), RdvStatus::Domain);
        assert_eq!(status_of(&Error::Config { key: "k".into(), reason: "r".into() }), RdvStatus::InvalidArgument);
    }

    #[test]
    fn success_clears_message() {
        let _ = fail(RdvStatus::Domain, "old");
        assert_eq!(guard(|| Ok(())), RdvStatus::Ok);
        assert_eq!(last_error(), "");
    }
}
