//! C ABI over `pinch_ee`.
//!
//! Every fallible function returns a [`PeeStatus`]; on anything other than
//! `PEE_STATUS_OK` a description is available from [`pee_last_error`] on the
//! same thread. Scenarios are opaque handles created by `pee_scenario_new*`
//! and released with [`pee_scenario_free`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use pinch_ee::benchmarks::exhaustive_search;
use pinch_ee::experiment::{generate_scenario, run_scheme, scenario_from_users, Scenario};
use pinch_ee::power_alloc::solve_power_allocation;
use pinch_ee::{EEOutcome, Error, ScenarioConfig, SchemeId};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidConfig = 2,
    InvalidArgument = 3,
    /// No feasible activation could be found to start the search from.
    Infeasible = 4,
    SearchSpaceTooLarge = 5,
    Internal = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeeScheme {
    Proposed = 0,
    Conventional = 1,
    MinPower = 2,
    Nearest = 3,
    Exhaustive = 4,
}

impl From<PeeScheme> for SchemeId {
    fn from(s: PeeScheme) -> Self {
        match s {
            PeeScheme::Proposed => SchemeId::Proposed,
            PeeScheme::Conventional => SchemeId::Conventional,
            PeeScheme::MinPower => SchemeId::MinPower,
            PeeScheme::Nearest => SchemeId::Nearest,
            PeeScheme::Exhaustive => SchemeId::Exhaustive,
        }
    }
}

/// Scenario parameters in SI units (watts, hertz, metres, bits/s).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeeParams {
    pub region_width: f64,
    pub region_length: f64,
    pub waveguide_height: f64,
    pub num_positions: usize,
    pub num_users: usize,
    pub bandwidth_hz: f64,
    pub carrier_hz: f64,
    pub noise_psd_dbm_per_hz: f64,
    pub refractive_index: f64,
    pub attenuation_db_per_m: f64,
    pub static_power_w: f64,
    pub activation_power_w: f64,
    pub transmit_budget_w: f64,
    pub amplifier_efficiency: f64,
    pub min_rate_bps: f64,
    pub dinkelbach_tolerance: f64,
    pub seed: u64,
}

impl From<&ScenarioConfig> for PeeParams {
    fn from(c: &ScenarioConfig) -> Self {
        Self {
            region_width: c.region_width,
            region_length: c.region_length,
            waveguide_height: c.waveguide_height,
            num_positions: c.num_positions,
            num_users: c.num_users,
            bandwidth_hz: c.bandwidth_hz,
            carrier_hz: c.carrier_hz,
            noise_psd_dbm_per_hz: c.noise_psd_dbm_per_hz,
            refractive_index: c.refractive_index,
            attenuation_db_per_m: c.attenuation_db_per_m,
            static_power_w: c.static_power_w,
            activation_power_w: c.activation_power_w,
            transmit_budget_w: c.transmit_budget_w,
            amplifier_efficiency: c.amplifier_efficiency,
            min_rate_bps: c.min_rate_bps,
            dinkelbach_tolerance: c.dinkelbach_tolerance,
            seed: c.seed,
        }
    }
}

impl From<&PeeParams> for ScenarioConfig {
    fn from(p: &PeeParams) -> Self {
        Self {
            region_width: p.region_width,
            region_length: p.region_length,
            waveguide_height: p.waveguide_height,
            num_positions: p.num_positions,
            num_users: p.num_users,
            bandwidth_hz: p.bandwidth_hz,
            carrier_hz: p.carrier_hz,
            noise_psd_dbm_per_hz: p.noise_psd_dbm_per_hz,
            refractive_index: p.refractive_index,
            attenuation_db_per_m: p.attenuation_db_per_m,
            static_power_w: p.static_power_w,
            activation_power_w: p.activation_power_w,
            transmit_budget_w: p.transmit_budget_w,
            amplifier_efficiency: p.amplifier_efficiency,
            min_rate_bps: p.min_rate_bps,
            dinkelbach_tolerance: p.dinkelbach_tolerance,
            seed: p.seed,
        }
    }
}

/// Scalar summary of one solution. `ee` and `sum_rate` are NaN when
/// `feasible` is false.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeeOutcome {
    pub ee: f64,
    pub sum_rate: f64,
    pub total_power: f64,
    pub n_active: usize,
    pub feasible: bool,
    pub outer_iterations: usize,
    pub dinkelbach_iterations: usize,
}

impl From<&EEOutcome> for PeeOutcome {
    fn from(o: &EEOutcome) -> Self {
        Self {
            ee: if o.feasible { o.ee } else { f64::NAN },
            sum_rate: if o.feasible { o.sum_rate } else { f64::NAN },
            total_power: o.total_power,
            n_active: o.n_active,
            feasible: o.feasible,
            outer_iterations: o.outer_iterations,
            dinkelbach_iterations: o.dinkelbach_iterations,
        }
    }
}

/// Opaque scenario handle: configuration, user drop and channel.
pub struct PeeScenario {
    config: ScenarioConfig,
    seed: u64,
    scenario: Scenario,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> PeeStatus {
    match err {
        Error::InitializationInfeasible => PeeStatus::Infeasible,
        Error::SearchSpaceTooLarge { .. } => PeeStatus::SearchSpaceTooLarge,
        Error::EmptyActivation | Error::PositionOutOfRange { .. } => PeeStatus::InvalidArgument,
        e if e.is_config_error() => PeeStatus::InvalidConfig,
        _ => PeeStatus::Internal,
    }
}

struct Failure(PeeStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(PeeStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, records any failure or panic, and returns its status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PeeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            PeeStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            PeeStatus::Panic
        }
    }
}

/// Default scenario parameters.
#[no_mangle]
pub extern "C" fn pee_params_default() -> PeeParams {
    PeeParams::from(&ScenarioConfig::default())
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next `pee_*` call on the same thread.
#[no_mangle]
pub extern "C" fn pee_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Static name of a status code.
#[no_mangle]
pub extern "C" fn pee_status_name(status: PeeStatus) -> *const c_char {
    let s: &'static CStr = match status {
        PeeStatus::Ok => c"ok",
        PeeStatus::NullPointer => c"null pointer",
        PeeStatus::InvalidConfig => c"invalid configuration",
        PeeStatus::InvalidArgument => c"invalid argument",
        PeeStatus::Infeasible => c"infeasible",
        PeeStatus::SearchSpaceTooLarge => c"search space too large",
        PeeStatus::Internal => c"internal error",
        PeeStatus::Panic => c"panic",
    };
    s.as_ptr()
}

fn validated(params: *const PeeParams) -> Result<ScenarioConfig, Failure> {
    // SAFETY: caller passes null or a pointer to a valid PeeParams
    let params = unsafe { params.as_ref() }.ok_or_else(|| null("params"))?;
    let config = ScenarioConfig::from(params);
    config.validate()?;
    Ok(config)
}

fn publish(out: *mut *mut PeeScenario, handle: PeeScenario) {
    // SAFETY: `out` was checked non-null by the caller
    unsafe { *out = Box::into_raw(Box::new(handle)) };
}

/// Draws users uniformly in the region from `seed` and builds the channel.
///
/// # Safety
/// `params` must point to a valid `PeeParams`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pee_scenario_new(
    params: *const PeeParams,
    seed: u64,
    out: *mut *mut PeeScenario,
) -> PeeStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let config = validated(params)?;
        let scenario = generate_scenario(&config, seed)?;
        publish(out, PeeScenario { config, seed, scenario });
        Ok(())
    })
}

/// Builds a scenario from explicit user coordinates (`num_users` entries in
/// each of `xs`, `ys`). `seed` drives the random starting matching.
///
/// # Safety
/// `params` must be valid, `xs` and `ys` must hold `params->num_users`
/// doubles each, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pee_scenario_from_users(
    params: *const PeeParams,
    xs: *const f64,
    ys: *const f64,
    seed: u64,
    out: *mut *mut PeeScenario,
) -> PeeStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if xs.is_null() || ys.is_null() {
            return Err(null("user coordinates"));
        }
        let config = validated(params)?;
        // SAFETY: caller guarantees num_users entries in each array
        let (xs, ys) = unsafe {
            (
                std::slice::from_raw_parts(xs, config.num_users),
                std::slice::from_raw_parts(ys, config.num_users),
            )
        };
        let users: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
        let scenario = scenario_from_users(&config, &users)?;
        publish(out, PeeScenario { config, seed, scenario });
        Ok(())
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `scenario` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pee_scenario_free(scenario: *mut PeeScenario) {
    if !scenario.is_null() {
        // SAFETY: handle came from Box::into_raw in this crate
        drop(unsafe { Box::from_raw(scenario) });
    }
}

/// Writes the `num_users` user positions as (x, y) pairs into `xy`.
///
/// # Safety
/// `scenario` must be a live handle and `xy` must hold `2 * num_users` doubles.
#[no_mangle]
pub unsafe extern "C" fn pee_scenario_users(scenario: *const PeeScenario, xy: *mut f64) -> PeeStatus {
    guard(|| {
        // SAFETY: caller passes a live handle or null
        let sc = unsafe { scenario.as_ref() }.ok_or_else(|| null("scenario"))?;
        if xy.is_null() {
            return Err(null("xy"));
        }
        let users = &sc.scenario.layout.user_positions;
        // SAFETY: caller guarantees room for 2 * num_users doubles
        let buf = unsafe { std::slice::from_raw_parts_mut(xy, 2 * users.len()) };
        for (chunk, u) in buf.chunks_exact_mut(2).zip(users) {
            chunk.copy_from_slice(&u[..2]);
        }
        Ok(())
    })
}

/// Number of users, or 0 for a null handle.
///
/// # Safety
/// `scenario` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pee_scenario_num_users(scenario: *const PeeScenario) -> usize {
    // SAFETY: null or live handle
    unsafe { scenario.as_ref() }.map_or(0, |s| s.config.num_users)
}

/// Number of candidate positions, or 0 for a null handle.
///
/// # Safety
/// `scenario` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pee_scenario_num_positions(scenario: *const PeeScenario) -> usize {
    // SAFETY: null or live handle
    unsafe { scenario.as_ref() }.map_or(0, |s| s.config.num_positions)
}

fn write_active(active: &[usize], buf: *mut usize, cap: usize) {
    if !buf.is_null() {
        let n = active.len().min(cap);
        // SAFETY: caller guarantees `cap` writable entries
        unsafe { std::ptr::copy_nonoverlapping(active.as_ptr(), buf, n) };
    }
}

/// Runs one scheme on the scenario. When `active_out` is non-null the
/// chosen positions (ascending) are written to it, at most `active_cap` of
/// them; `out->n_active` gives the full count. Exhaustive search refuses
/// scenarios with more than `exhaustive_cap` positions.
///
/// # Safety
/// `scenario` must be live, `out` writable, and `active_out` null or
/// writable for `active_cap` entries.
#[no_mangle]
pub unsafe extern "C" fn pee_run_scheme(
    scenario: *const PeeScenario,
    scheme: PeeScheme,
    exhaustive_cap: usize,
    out: *mut PeeOutcome,
    active_out: *mut usize,
    active_cap: usize,
) -> PeeStatus {
    guard(|| {
        // SAFETY: null or live handle
        let sc = unsafe { scenario.as_ref() }.ok_or_else(|| null("scenario"))?;
        // SAFETY: null or writable
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        let (outcome, active) = if scheme == PeeScheme::Exhaustive {
            let res = exhaustive_search(&sc.scenario.channel, &sc.config, None, exhaustive_cap)?;
            (res.solution.outcome, res.active)
        } else {
            let res = run_scheme(scheme.into(), &sc.config, sc.seed, &sc.scenario, exhaustive_cap)?;
            (res.outcome, res.active)
        };
        write_active(&active, active_out, active_cap);
        *out = PeeOutcome::from(&outcome);
        Ok(())
    })
}

/// Optimal power split for a fixed activation set. `alpha_out` and
/// `rates_out`, when non-null, receive `num_users` values indexed by user
/// (not by decoding order); both are NaN when the set is infeasible.
///
/// # Safety
/// `scenario` must be live, `active` must hold `num_active` indices, `out`
/// must be writable, and the optional buffers must hold `num_users` doubles.
#[no_mangle]
pub unsafe extern "C" fn pee_solve_power_allocation(
    scenario: *const PeeScenario,
    active: *const usize,
    num_active: usize,
    out: *mut PeeOutcome,
    alpha_out: *mut f64,
    rates_out: *mut f64,
) -> PeeStatus {
    guard(|| {
        // SAFETY: null or live handle
        let sc = unsafe { scenario.as_ref() }.ok_or_else(|| null("scenario"))?;
        // SAFETY: null or writable
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        if active.is_null() && num_active > 0 {
            return Err(null("active"));
        }
        let active = if num_active == 0 {
            &[][..]
        } else {
            // SAFETY: caller guarantees num_active entries
            unsafe { std::slice::from_raw_parts(active, num_active) }
        };
        let sol = solve_power_allocation(active, &sc.scenario.channel, &sc.config)?;
        let k = sc.config.num_users;
        let mut alpha = vec![f64::NAN; k];
        let mut rates = vec![f64::NAN; k];
        if let Some(alloc) = &sol.allocation {
            for (rank, &user) in sol.sic_order.iter().enumerate() {
                alpha[user] = alloc.alpha[rank];
                rates[user] = sol.outcome.rates[rank];
            }
        }
        for (buf, values) in [(alpha_out, &alpha), (rates_out, &rates)] {
            if !buf.is_null() {
                // SAFETY: caller guarantees num_users writable doubles
                unsafe { std::ptr::copy_nonoverlapping(values.as_ptr(), buf, k) };
            }
        }
        *out = PeeOutcome::from(&sol.outcome);
        Ok(())
    })
}
