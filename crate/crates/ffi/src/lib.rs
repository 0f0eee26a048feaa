//! C ABI over the `ucbmq` library.
//!
//! Objects are handed out as opaque pointers and released with the matching
//! `*_free` function. Every fallible function returns one of the `UCBMQ_*`
//! status codes; on failure a message is available from
//! [`ucbmq_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use ucbmq::agents::{BonusMode, UcbmqState};
use ucbmq::environments::{build_chain, build_gridworld, build_random_mdp, GridWorldSpec};
use ucbmq::harness::{parse_config, run_agent, run_experiment, write_records, RegretRecord};
use ucbmq::mdp::{backward_induction, TabularMdp};
use ucbmq::Error;

pub const UCBMQ_OK: i32 = 0;
pub const UCBMQ_ERR_NULL_POINTER: i32 = 1;
pub const UCBMQ_ERR_INVALID_ARGUMENT: i32 = 2;
pub const UCBMQ_ERR_CONFIG: i32 = 3;
pub const UCBMQ_ERR_IO: i32 = 4;
pub const UCBMQ_ERR_TOO_LARGE: i32 = 5;
pub const UCBMQ_ERR_SHAPE: i32 = 6;
pub const UCBMQ_ERR_PANIC: i32 = 7;

/// Opaque tabular MDP.
pub struct UcbmqMdp(TabularMdp);

/// Opaque UCBMQ learner.
pub struct UcbmqAgent(UcbmqState);

/// Opaque result of a multi-run experiment.
pub struct UcbmqExperiment {
    records: Vec<RegretRecord>,
    agent: &'static str,
    env: &'static str,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = message);
}

fn code_of(err: &Error) -> i32 {
    match err {
        Error::InvalidMdp(_) | Error::InvalidArgument(_) => UCBMQ_ERR_INVALID_ARGUMENT,
        Error::InstanceTooLarge { .. } => UCBMQ_ERR_TOO_LARGE,
        Error::ShapeMismatch(_) => UCBMQ_ERR_SHAPE,
        Error::Config { .. } => UCBMQ_ERR_CONFIG,
        Error::Io { .. } => UCBMQ_ERR_IO,
    }
}

enum Failure {
    Null,
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => UCBMQ_OK,
        Ok(Err(Failure::Null)) => {
            set_error("null pointer argument".into());
            UCBMQ_ERR_NULL_POINTER
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            code_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            UCBMQ_ERR_PANIC
        }
    }
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null)
}

unsafe fn deref_mut<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null)
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    let slot = deref_mut(out)?;
    *slot = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn c_str<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null);
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Lib(Error::InvalidArgument("string is not valid UTF-8".into())))
}

/// Message of the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ucbmq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a grid world. Cells are 1-based `(row, col)`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn ucbmq_gridworld_new(
    rows: usize,
    cols: usize,
    noise: f64,
    horizon: usize,
    start_row: usize,
    start_col: usize,
    reward_row: usize,
    reward_col: usize,
    out: *mut *mut UcbmqMdp,
) -> i32 {
    guard(|| {
        let spec = GridWorldSpec {
            rows,
            cols,
            noise,
            horizon,
            start: (start_row, start_col),
            reward_cell: (reward_row, reward_col),
        };
        emit(out, UcbmqMdp(build_gridworld(&spec)?))
    })
}

/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn ucbmq_chain_new(length: usize, horizon: usize, out: *mut *mut UcbmqMdp) -> i32 {
    guard(|| emit(out, UcbmqMdp(build_chain(length, horizon)?)))
}

/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn ucbmq_random_mdp_new(
    states: usize,
    actions: usize,
    horizon: usize,
    seed: u64,
    out: *mut *mut UcbmqMdp,
) -> i32 {
    guard(|| emit(out, UcbmqMdp(build_random_mdp(states, actions, horizon, seed)?)))
}

/// # Safety
/// `mdp` must be null or a handle from one of the MDP constructors, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ucbmq_mdp_free(mdp: *mut UcbmqMdp) {
    if !mdp.is_null() {
        drop(Box::from_raw(mdp));
    }
}

/// # Safety
/// `mdp` must be a live handle; the output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ucbmq_mdp_dims(
    mdp: *const UcbmqMdp,
    states: *mut usize,
    actions: *mut usize,
    horizon: *mut usize,
) -> i32 {
    guard(|| {
        let mdp = &deref(mdp)?.0;
        *deref_mut(states)? = mdp.num_states();
        *deref_mut(actions)? = mdp.num_actions();
        *deref_mut(horizon)? = mdp.horizon();
        Ok(())
    })
}

/// Optimal value of the initial state.
///
/// # Safety
/// `mdp` must be a live handle and `value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ucbmq_mdp_optimal_value(mdp: *const UcbmqMdp, value: *mut f64) -> i32 {
    guard(|| {
        let mdp = &deref(mdp)?.0;
        *deref_mut(value)? = backward_induction(mdp).v[[0, mdp.initial_state()]];
        Ok(())
    })
}

/// Creates a UCBMQ learner. `theoretical_bonus` selects the Bernstein bonus
/// when nonzero, the simplified bonus otherwise.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn ucbmq_agent_new(
    states: usize,
    actions: usize,
    horizon: usize,
    episodes: u64,
    delta: f64,
    theoretical_bonus: i32,
    out: *mut *mut UcbmqAgent,
) -> i32 {
    guard(|| {
        let mode = if theoretical_bonus != 0 {
            BonusMode::Theoretical
        } else {
            BonusMode::Simplified
        };
        emit(out, UcbmqAgent(UcbmqState::new(states, actions, horizon, episodes, delta, mode)?))
    })
}

/// # Safety
/// `agent` must be null or a handle from [`ucbmq_agent_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ucbmq_agent_free(agent: *mut UcbmqAgent) {
    if !agent.is_null() {
        drop(Box::from_raw(agent));
    }
}

/// Plays `episodes` episodes on `mdp`, writing the per-episode regret into
/// `regrets[0..episodes]` (may be null when `episodes` is 0).
///
/// # Safety
/// Handles must be live; `regrets` must point to `episodes` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ucbmq_agent_train(
    agent: *mut UcbmqAgent,
    mdp: *const UcbmqMdp,
    episodes: usize,
    seed: u64,
    regrets: *mut f64,
) -> i32 {
    guard(|| {
        let agent = &mut deref_mut(agent)?.0;
        let mdp = &deref(mdp)?.0;
        if (agent.num_states(), agent.num_actions(), agent.horizon()) != (mdp.num_states(), mdp.num_actions(), mdp.horizon()) {
            return Err(Error::ShapeMismatch("agent and MDP dimensions differ".into()).into());
        }
        if episodes > 0 && regrets.is_null() {
            return Err(Failure::Null);
        }
        let records = run_agent(mdp, agent, episodes, 0, seed, |_, _| Ok(()))?;
        if episodes > 0 {
            let out = std::slice::from_raw_parts_mut(regrets, episodes);
            for (slot, r) in out.iter_mut().zip(&records) {
                *slot = r.regret;
            }
        }
        Ok(())
    })
}

/// Optimistic value `Vbar[h][s]` (0-based step and state).
///
/// # Safety
/// `agent` must be a live handle and `value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ucbmq_agent_vbar(agent: *const UcbmqAgent, step: usize, state: usize, value: *mut f64) -> i32 {
    guard(|| {
        let agent = &deref(agent)?.0;
        if step > agent.horizon() || state >= agent.num_states() {
            return Err(Error::InvalidArgument(format!("(h={step}, s={state}) is out of range")).into());
        }
        *deref_mut(value)? = agent.vbar()[[step, state]];
        Ok(())
    })
}

/// Parses a `key = value` configuration and runs it.
///
/// # Safety
/// `config` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ucbmq_experiment_run(config: *const c_char, out: *mut *mut UcbmqExperiment) -> i32 {
    guard(|| {
        let config = parse_config(c_str(config)?)?;
        let records = run_experiment(&config)?;
        emit(
            out,
            UcbmqExperiment {
                records,
                agent: config.agent.as_str(),
                env: config.env.name(),
            },
        )
    })
}

/// # Safety
/// `experiment` must be a live handle and `len` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ucbmq_experiment_len(experiment: *const UcbmqExperiment, len: *mut usize) -> i32 {
    guard(|| {
        *deref_mut(len)? = deref(experiment)?.records.len();
        Ok(())
    })
}

/// Reads record `index`; records are ordered by run, then episode (1-based).
///
/// # Safety
/// `experiment` must be a live handle and every output pointer valid.
#[no_mangle]
pub unsafe extern "C" fn ucbmq_experiment_record(
    experiment: *const UcbmqExperiment,
    index: usize,
    run: *mut usize,
    episode: *mut usize,
    regret: *mut f64,
    cum_regret: *mut f64,
) -> i32 {
    guard(|| {
        let records = &deref(experiment)?.records;
        let r = records.get(index).ok_or_else(|| {
            Error::InvalidArgument(format!("record {index} out of range ({} records)", records.len()))
        })?;
        *deref_mut(run)? = r.run;
        *deref_mut(episode)? = r.episode;
        *deref_mut(regret)? = r.regret;
        *deref_mut(cum_regret)? = r.cum_regret;
        Ok(())
    })
}

/// # Safety
/// `experiment` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ucbmq_experiment_write_csv(experiment: *const UcbmqExperiment, path: *const c_char) -> i32 {
    guard(|| {
        let exp = deref(experiment)?;
        write_records(&exp.records, exp.agent, exp.env, Path::new(c_str(path)?))?;
        Ok(())
    })
}

/// # Safety
/// `experiment` must be null or a handle from [`ucbmq_experiment_run`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ucbmq_experiment_free(experiment: *mut UcbmqExperiment) {
    if !experiment.is_null() {
        drop(Box::from_raw(experiment));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn null_out_pointer_is_reported() {
        let code = unsafe { ucbmq_chain_new(3, 4, ptr::null_mut()) };
        assert_eq!(code, UCBMQ_ERR_NULL_POINTER);
        let msg = unsafe { CStr::from_ptr(ucbmq_last_error_message()) };
        assert_eq!(msg.to_str().unwrap(), "null pointer argument");
    }

    #[test]
    fn error_codes_follow_the_variant() {
        assert_eq!(code_of(&Error::Config { line: 1, message: String::new() }), UCBMQ_ERR_CONFIG);
        assert_eq!(code_of(&Error::InstanceTooLarge { count: 2, limit: 1 }), UCBMQ_ERR_TOO_LARGE);
        assert_eq!(code_of(&Error::ShapeMismatch(String::new())), UCBMQ_ERR_SHAPE);
    }

    #[test]
    fn freeing_null_is_a_no_op() {
        unsafe {
            ucbmq_mdp_free(ptr::null_mut());
            ucbmq_agent_free(ptr::null_mut());
            ucbmq_experiment_free(ptr::null_mut());
        }
    }
}
