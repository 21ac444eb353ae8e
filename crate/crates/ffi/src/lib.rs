//! C bindings: opaque simulation and policy handles behind status-coded
//! calls. The generated header lives at `include/saruav.h`.
//!
//! Handles are not thread-safe; callers must serialize access per handle.
//! Every function tolerates null pointers by returning
//! [`SaruavStatus::NullPointer`] instead of crashing.

use std::ffi::{c_char, CStr};
use std::path::Path;
use std::ptr;

use rand_chacha::ChaCha12Rng;
use saruav::agent::{Agent, AgentError};
use saruav::reward::RewardConfig;
use saruav::world::{Action, Scenario, Simulation, Terminal, World, WorldConfig, WorldError};
use saruav::CategoryWeightTable;

/// Result code of every fallible call.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaruavStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A value argument was out of range or unparseable.
    InvalidArgument = 2,
    /// The underlying file could not be read or written.
    Io = 3,
    /// The episode already ended; reset or regenerate first.
    EpisodeFinished = 4,
    /// The checkpoint bytes do not describe a policy.
    BadCheckpoint = 5,
    /// A buffer length does not match the state dimension.
    DimensionMismatch = 6,
}

/// Why an episode ended; mirrors the simulator's terminal causes.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaruavTerminal {
    None = -1,
    Collision = 0,
    OutOfBounds = 1,
    SpeedFailure = 2,
    DriftFailure = 3,
    Success = 4,
    BatteryDepleted = 5,
    Timeout = 6,
}

impl From<Option<Terminal>> for SaruavTerminal {
    fn from(t: Option<Terminal>) -> Self {
        match t {
            None => SaruavTerminal::None,
            Some(Terminal::Collision) => SaruavTerminal::Collision,
            Some(Terminal::OutOfBounds) => SaruavTerminal::OutOfBounds,
            Some(Terminal::SpeedFailure) => SaruavTerminal::SpeedFailure,
            Some(Terminal::DriftFailure) => SaruavTerminal::DriftFailure,
            Some(Terminal::Success) => SaruavTerminal::Success,
            Some(Terminal::BatteryDepleted) => SaruavTerminal::BatteryDepleted,
            Some(Terminal::Timeout) => SaruavTerminal::Timeout,
        }
    }
}

/// One step's outcome.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SaruavStepInfo {
    /// Scalarized reward for the step.
    pub reward: f64,
    /// Cause of termination, or `None` while the episode is running.
    pub terminal: SaruavTerminal,
    /// Steps taken so far in the episode.
    pub steps: usize,
    /// UAV position, metres.
    pub x: f64,
    pub y: f64,
    /// Remaining battery, percent of capacity.
    pub battery: f64,
}

/// Opaque episode simulator. Create with `saruav_sim_new`, destroy with
/// `saruav_sim_free`.
pub struct SaruavSim {
    sim: Simulation,
}

/// Opaque frozen policy loaded from a training checkpoint.
pub struct SaruavPolicy {
    agent: Agent,
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn saruav_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

fn world_status(e: &WorldError) -> SaruavStatus {
    match e {
        WorldError::Io(_) => SaruavStatus::Io,
        WorldError::EpisodeFinished => SaruavStatus::EpisodeFinished,
        _ => SaruavStatus::InvalidArgument,
    }
}

/// Build a simulator over a freshly generated layout. `scenario` is one of
/// `"e1"`, `"e2"`, `"e3"`; other world settings keep their defaults.
///
/// # Safety
/// `scenario` must be a NUL-terminated string and `out` a valid pointer;
/// the returned handle must be released with `saruav_sim_free`.
#[no_mangle]
pub unsafe extern "C" fn saruav_sim_new(
    arena_side: f64,
    n_obstacles: usize,
    scenario: *const c_char,
    seed: u64,
    out: *mut *mut SaruavSim,
) -> SaruavStatus {
    if scenario.is_null() || out.is_null() {
        return SaruavStatus::NullPointer;
    }
    *out = ptr::null_mut();
    let Ok(scenario) = CStr::from_ptr(scenario).to_str() else {
        return SaruavStatus::InvalidArgument;
    };
    let Ok(scenario) = scenario.parse::<Scenario>() else {
        return SaruavStatus::InvalidArgument;
    };
    let config = WorldConfig {
        arena_side,
        n_obstacles,
        scenario,
        seed,
        ..WorldConfig::default()
    };
    let world = match World::generate(&config) {
        Ok(w) => w,
        Err(e) => return world_status(&e),
    };
    let reward = RewardConfig::new(config.dt, config.battery_capacity);
    let sim = Simulation::new(world, CategoryWeightTable::default(), reward);
    *out = Box::into_raw(Box::new(SaruavSim { sim }));
    SaruavStatus::Ok
}

/// Release a simulator handle. Null is a no-op.
///
/// # Safety
/// `sim` must have come from `saruav_sim_new` and not been freed already.
#[no_mangle]
pub unsafe extern "C" fn saruav_sim_free(sim: *mut SaruavSim) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Rewind the episode to the start of the current layout.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn saruav_sim_reset(sim: *mut SaruavSim) -> SaruavStatus {
    let Some(handle) = sim.as_mut() else {
        return SaruavStatus::NullPointer;
    };
    handle.sim.reset();
    SaruavStatus::Ok
}

/// Generate a fresh layout from `seed` and reset onto it.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn saruav_sim_regenerate(sim: *mut SaruavSim, seed: u64) -> SaruavStatus {
    let Some(handle) = sim.as_mut() else {
        return SaruavStatus::NullPointer;
    };
    match handle.sim.regenerate(seed) {
        Ok(()) => SaruavStatus::Ok,
        Err(e) => world_status(&e),
    }
}

/// Length of the observation vector, or 0 for a null handle.
///
/// # Safety
/// `sim` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn saruav_sim_state_dim(sim: *const SaruavSim) -> usize {
    match sim.as_ref() {
        Some(handle) => handle.sim.world().config.state_dim(),
        None => 0,
    }
}

/// Copy the current normalized observation into `out[0..len]`. `len` must
/// equal `saruav_sim_state_dim`.
///
/// # Safety
/// `sim` must be a live handle; `out` must point at `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn saruav_sim_state(
    sim: *const SaruavSim,
    out: *mut f64,
    len: usize,
) -> SaruavStatus {
    let Some(handle) = sim.as_ref() else {
        return SaruavStatus::NullPointer;
    };
    if out.is_null() {
        return SaruavStatus::NullPointer;
    }
    let state = handle.sim.state();
    if len != state.len() {
        return SaruavStatus::DimensionMismatch;
    }
    ptr::copy_nonoverlapping(state.as_ptr(), out, len);
    SaruavStatus::Ok
}

/// Advance one step. `speed` and `turn` are command fractions in [-1, 1]
/// (values outside are clamped). Fails with `EpisodeFinished` once a
/// terminal was reached.
///
/// # Safety
/// `sim` must be a live handle and `info` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn saruav_sim_step(
    sim: *mut SaruavSim,
    speed: f64,
    turn: f64,
    info: *mut SaruavStepInfo,
) -> SaruavStatus {
    let Some(handle) = sim.as_mut() else {
        return SaruavStatus::NullPointer;
    };
    if info.is_null() {
        return SaruavStatus::NullPointer;
    }
    if !(speed.is_finite() && turn.is_finite()) {
        return SaruavStatus::InvalidArgument;
    }
    let out = match handle.sim.step(Action::new(speed, turn)) {
        Ok(out) => out,
        Err(e) => return world_status(&e),
    };
    *info = SaruavStepInfo {
        reward: out.reward,
        terminal: out.terminal.into(),
        steps: handle.sim.steps(),
        x: out.uav.pos.x,
        y: out.uav.pos.y,
        battery: out.uav.battery,
    };
    SaruavStatus::Ok
}

/// Load a frozen policy from a training checkpoint.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer; the
/// returned handle must be released with `saruav_policy_free`.
#[no_mangle]
pub unsafe extern "C" fn saruav_policy_load(
    path: *const c_char,
    out: *mut *mut SaruavPolicy,
) -> SaruavStatus {
    if path.is_null() || out.is_null() {
        return SaruavStatus::NullPointer;
    }
    *out = ptr::null_mut();
    let Ok(path) = CStr::from_ptr(path).to_str() else {
        return SaruavStatus::InvalidArgument;
    };
    let agent = match Agent::load(Path::new(path)) {
        Ok(agent) => agent,
        Err(AgentError::Io(_)) => return SaruavStatus::Io,
        Err(_) => return SaruavStatus::BadCheckpoint,
    };
    *out = Box::into_raw(Box::new(SaruavPolicy { agent }));
    SaruavStatus::Ok
}

/// Release a policy handle. Null is a no-op.
///
/// # Safety
/// `policy` must have come from `saruav_policy_load` and not been freed
/// already.
#[no_mangle]
pub unsafe extern "C" fn saruav_policy_free(policy: *mut SaruavPolicy) {
    if !policy.is_null() {
        drop(Box::from_raw(policy));
    }
}

/// State dimension the policy was trained on, or 0 for a null handle.
///
/// # Safety
/// `policy` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn saruav_policy_state_dim(policy: *const SaruavPolicy) -> usize {
    match policy.as_ref() {
        Some(handle) => handle.agent.state_dim(),
        None => 0,
    }
}

/// Deterministic greedy action for `state[0..len]`; writes the speed and
/// turn command fractions.
///
/// # Safety
/// `policy` must be a live handle; `state` must point at `len` doubles and
/// `speed`/`turn` at writable doubles.
#[no_mangle]
pub unsafe extern "C" fn saruav_policy_action(
    policy: *const SaruavPolicy,
    state: *const f64,
    len: usize,
    speed: *mut f64,
    turn: *mut f64,
) -> SaruavStatus {
    let Some(handle) = policy.as_ref() else {
        return SaruavStatus::NullPointer;
    };
    if state.is_null() || speed.is_null() || turn.is_null() {
        return SaruavStatus::NullPointer;
    }
    if len != handle.agent.state_dim() {
        return SaruavStatus::DimensionMismatch;
    }
    let state = std::slice::from_raw_parts(state, len);
    // The greedy path draws no noise; the RNG only satisfies the signature.
    let mut rng = <ChaCha12Rng as rand_chacha::rand_core::SeedableRng>::seed_from_u64(0);
    let action = handle.agent.select_action(state, false, &mut rng);
    *speed = action.speed;
    *turn = action.turn;
    SaruavStatus::Ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    fn new_sim(scenario: &str, seed: u64) -> *mut SaruavSim {
        let scenario = CString::new(scenario).unwrap();
        let mut sim = ptr::null_mut();
        let status =
            unsafe { saruav_sim_new(60.0, 3, scenario.as_ptr(), seed, &mut sim) };
        assert_eq!(status, SaruavStatus::Ok);
        assert!(!sim.is_null());
        sim
    }

    #[test]
    fn version_is_a_nul_terminated_string() {
        let v = unsafe { CStr::from_ptr(saruav_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn sim_lifecycle_runs_an_episode() {
        let sim = new_sim("e2", 11);
        unsafe {
            let dim = saruav_sim_state_dim(sim);
            assert_eq!(dim, 25);
            let mut state = vec![0.0; dim];
            assert_eq!(
                saruav_sim_state(sim, state.as_mut_ptr(), dim),
                SaruavStatus::Ok
            );
            assert!(state.iter().all(|v| v.is_finite()));

            let mut info = SaruavStepInfo {
                reward: 0.0,
                terminal: SaruavTerminal::None,
                steps: 0,
                x: 0.0,
                y: 0.0,
                battery: 0.0,
            };
            let mut steps = 0;
            loop {
                let status = saruav_sim_step(sim, 0.9, 0.3, &mut info);
                assert_eq!(status, SaruavStatus::Ok);
                steps += 1;
                assert_eq!(info.steps, steps);
                assert!(info.battery <= 100.0);
                if info.terminal != SaruavTerminal::None {
                    break;
                }
                assert!(steps <= 300, "episode must terminate");
            }
            // Stepping past the end reports, reset rewinds.
            assert_eq!(
                saruav_sim_step(sim, 0.0, 0.0, &mut info),
                SaruavStatus::EpisodeFinished
            );
            assert_eq!(saruav_sim_reset(sim), SaruavStatus::Ok);
            assert_eq!(saruav_sim_step(sim, 0.1, 0.0, &mut info), SaruavStatus::Ok);
            assert_eq!(info.steps, 1);
            assert_eq!(saruav_sim_regenerate(sim, 99), SaruavStatus::Ok);
            let mut fresh = vec![0.0; 25];
            assert_eq!(
                saruav_sim_state(sim, fresh.as_mut_ptr(), 25),
                SaruavStatus::Ok
            );
            saruav_sim_free(sim);
        }
    }

    #[test]
    fn null_and_bad_arguments_are_reported() {
        unsafe {
            let mut out = ptr::null_mut();
            assert_eq!(
                saruav_sim_new(60.0, 3, ptr::null(), 1, &mut out),
                SaruavStatus::NullPointer
            );
            let scenario = CString::new("e9").unwrap();
            assert_eq!(
                saruav_sim_new(60.0, 3, scenario.as_ptr(), 1, &mut out),
                SaruavStatus::InvalidArgument
            );
            let scenario = CString::new("e2").unwrap();
            assert_eq!(
                saruav_sim_new(-5.0, 3, scenario.as_ptr(), 1, &mut out),
                SaruavStatus::InvalidArgument
            );
            assert_eq!(
                saruav_sim_new(60.0, 3, scenario.as_ptr(), 1, ptr::null_mut()),
                SaruavStatus::NullPointer
            );

            assert_eq!(saruav_sim_reset(ptr::null_mut()), SaruavStatus::NullPointer);
            assert_eq!(saruav_sim_state_dim(ptr::null()), 0);
            saruav_sim_free(ptr::null_mut());
            saruav_policy_free(ptr::null_mut());

            let sim = new_sim("e2", 3);
            let mut buf = vec![0.0; 10];
            assert_eq!(
                saruav_sim_state(sim, buf.as_mut_ptr(), 10),
                SaruavStatus::DimensionMismatch
            );
            let mut info = SaruavStepInfo {
                reward: 0.0,
                terminal: SaruavTerminal::None,
                steps: 0,
                x: 0.0,
                y: 0.0,
                battery: 0.0,
            };
            assert_eq!(
                saruav_sim_step(sim, f64::NAN, 0.0, &mut info),
                SaruavStatus::InvalidArgument
            );
            assert_eq!(
                saruav_sim_step(sim, 0.0, 0.0, ptr::null_mut()),
                SaruavStatus::NullPointer
            );
            saruav_sim_free(sim);
        }
    }

    #[test]
    fn policy_round_trips_through_a_checkpoint() {
        use saruav::agent::{AgentConfig, AlgoMode};

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("policy.bin");
        let mut config = AgentConfig::new(AlgoMode::Proposed);
        config.hidden = vec![8, 8];
        let agent = Agent::new(25, config, 7).unwrap();
        agent.save(&path).unwrap();

        let c_path = CString::new(path.to_str().unwrap()).unwrap();
        unsafe {
            let mut policy = ptr::null_mut();
            assert_eq!(
                saruav_policy_load(c_path.as_ptr(), &mut policy),
                SaruavStatus::Ok
            );
            assert_eq!(saruav_policy_state_dim(policy), 25);

            let state = vec![0.25; 25];
            let (mut speed, mut turn) = (9.0, 9.0);
            assert_eq!(
                saruav_policy_action(policy, state.as_ptr(), 25, &mut speed, &mut turn),
                SaruavStatus::Ok
            );
            assert!((-1.0..=1.0).contains(&speed));
            assert!((-1.0..=1.0).contains(&turn));
            // Same input, same action: the exported path is greedy.
            let (mut speed2, mut turn2) = (0.0, 0.0);
            assert_eq!(
                saruav_policy_action(policy, state.as_ptr(), 25, &mut speed2, &mut turn2),
                SaruavStatus::Ok
            );
            assert_eq!((speed, turn), (speed2, turn2));

            assert_eq!(
                saruav_policy_action(policy, state.as_ptr(), 7, &mut speed, &mut turn),
                SaruavStatus::DimensionMismatch
            );
            saruav_policy_free(policy);
        }
    }

    #[test]
    fn policy_load_rejects_garbage_and_missing_files() {
        let dir = tempfile::tempdir().unwrap();
        let garbage = dir.path().join("garbage.bin");
        std::fs::write(&garbage, b"not a checkpoint").unwrap();
        let c_garbage = CString::new(garbage.to_str().unwrap()).unwrap();
        let c_missing = CString::new(dir.path().join("nope.bin").to_str().unwrap()).unwrap();
        unsafe {
            let mut policy = ptr::null_mut();
            assert_eq!(
                saruav_policy_load(c_garbage.as_ptr(), &mut policy),
                SaruavStatus::BadCheckpoint
            );
            assert!(policy.is_null());
            let status = saruav_policy_load(c_missing.as_ptr(), &mut policy);
            assert_eq!(status, SaruavStatus::Io);
            assert_eq!(
                saruav_policy_load(ptr::null(), &mut policy),
                SaruavStatus::NullPointer
            );
        }
    }

    /// Drive the simulator with a loaded policy end to end, C-style.
    #[test]
    fn policy_drives_the_simulator() {
        use saruav::agent::{AgentConfig, AlgoMode};

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("policy.bin");
        let mut config = AgentConfig::new(AlgoMode::DdpgBaseline);
        config.hidden = vec![8, 8];
        Agent::new(25, config, 3).unwrap().save(&path).unwrap();
        let c_path = CString::new(path.to_str().unwrap()).unwrap();

        unsafe {
            let mut policy = ptr::null_mut();
            assert_eq!(
                saruav_policy_load(c_path.as_ptr(), &mut policy),
                SaruavStatus::Ok
            );
            let sim = new_sim("e1", 21);
            let dim = saruav_sim_state_dim(sim);
            let mut state = vec![0.0; dim];
            let mut info = SaruavStepInfo {
                reward: 0.0,
                terminal: SaruavTerminal::None,
                steps: 0,
                x: 0.0,
                y: 0.0,
                battery: 0.0,
            };
            for _ in 0..300 {
                assert_eq!(
                    saruav_sim_state(sim, state.as_mut_ptr(), dim),
                    SaruavStatus::Ok
                );
                let (mut speed, mut turn) = (0.0, 0.0);
                assert_eq!(
                    saruav_policy_action(policy, state.as_ptr(), dim, &mut speed, &mut turn),
                    SaruavStatus::Ok
                );
                assert_eq!(
                    saruav_sim_step(sim, speed, turn, &mut info),
                    SaruavStatus::Ok
                );
                if info.terminal != SaruavTerminal::None {
                    break;
                }
            }
            assert_ne!(info.terminal, SaruavTerminal::None, "episode must end");
            saruav_sim_free(sim);
            saruav_policy_free(policy);
        }
    }
}
