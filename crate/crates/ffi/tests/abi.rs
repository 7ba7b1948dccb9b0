use std::ffi::CStr;
use std::ptr;

use pinch_ee_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(pee_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn scenario(params: &PeeParams, seed: u64) -> *mut PeeScenario {
    let mut handle = ptr::null_mut();
    assert_eq!(unsafe { pee_scenario_new(params, seed, &mut handle) }, PeeStatus::Ok);
    assert!(!handle.is_null());
    handle
}

fn blank() -> PeeOutcome {
    PeeOutcome {
        ee: 0.0,
        sum_rate: 0.0,
        total_power: 0.0,
        n_active: 0,
        feasible: false,
        outer_iterations: 0,
        dinkelbach_iterations: 0,
    }
}

#[test]
fn proposed_matches_library() {
    let params = PeeParams {
        num_positions: 12,
        ..pee_params_default()
    };
    let handle = scenario(&params, 11);
    let mut out = blank();
    let mut active = [usize::MAX; 12];
    let status = unsafe { pee_run_scheme(handle, PeeScheme::Proposed, 14, &mut out, active.as_mut_ptr(), 12) };
    assert_eq!(status, PeeStatus::Ok, "{}", last_error());
    assert!(out.feasible && out.ee > 0.0);
    assert!(last_error().is_empty());

    let config = pinch_ee::ScenarioConfig::from(&params);
    let scn = pinch_ee::experiment::generate_scenario(&config, 11).unwrap();
    let lib = pinch_ee::experiment::run_scheme(pinch_ee::SchemeId::Proposed, &config, 11, &scn, 14).unwrap();
    assert_eq!(out.ee, lib.outcome.ee);
    assert_eq!(&active[..out.n_active], &lib.active[..]);

    // the same activation through the fixed-set solver
    let k = params.num_users;
    let (mut alpha, mut rates) = (vec![0.0; k], vec![0.0; k]);
    let mut fixed = blank();
    let status = unsafe {
        pee_solve_power_allocation(
            handle,
            active.as_ptr(),
            out.n_active,
            &mut fixed,
            alpha.as_mut_ptr(),
            rates.as_mut_ptr(),
        )
    };
    assert_eq!(status, PeeStatus::Ok);
    assert_eq!(fixed.ee, out.ee);
    assert!(alpha.iter().sum::<f64>() <= 1.0 + 1e-9);
    assert!((rates.iter().sum::<f64>() - fixed.sum_rate).abs() <= 1e-6 * fixed.sum_rate);
    unsafe { pee_scenario_free(handle) };
}

#[test]
fn explicit_users_and_all_schemes() {
    let params = PeeParams {
        num_users: 2,
        num_positions: 8,
        ..pee_params_default()
    };
    let (xs, ys) = ([3.0, 15.0], [1.0, -2.5]);
    let mut handle = ptr::null_mut();
    let status = unsafe { pee_scenario_from_users(&params, xs.as_ptr(), ys.as_ptr(), 1, &mut handle) };
    assert_eq!(status, PeeStatus::Ok);
    let mut xy = [0.0; 4];
    assert_eq!(unsafe { pee_scenario_users(handle, xy.as_mut_ptr()) }, PeeStatus::Ok);
    assert_eq!(xy, [3.0, 1.0, 15.0, -2.5]);
    assert_eq!(unsafe { pee_scenario_num_users(handle) }, 2);
    assert_eq!(unsafe { pee_scenario_num_positions(handle) }, 8);

    let mut ee = Vec::new();
    for scheme in [
        PeeScheme::Proposed,
        PeeScheme::Conventional,
        PeeScheme::MinPower,
        PeeScheme::Nearest,
        PeeScheme::Exhaustive,
    ] {
        let mut out = blank();
        let status = unsafe { pee_run_scheme(handle, scheme, 14, &mut out, ptr::null_mut(), 0) };
        assert_eq!(status, PeeStatus::Ok, "{scheme:?}: {}", last_error());
        ee.push(out.ee);
    }
    // exhaustive dominates every pinching scheme
    for &e in &[ee[0], ee[2], ee[3]] {
        assert!(ee[4] >= e);
    }
    unsafe { pee_scenario_free(handle) };
}

#[test]
fn error_codes_and_messages() {
    let mut handle = ptr::null_mut();
    assert_eq!(
        unsafe { pee_scenario_new(ptr::null(), 1, &mut handle) },
        PeeStatus::NullPointer
    );
    assert!(last_error().contains("params"));

    let bad = PeeParams {
        num_users: 0,
        ..pee_params_default()
    };
    assert_eq!(
        unsafe { pee_scenario_new(&bad, 1, &mut handle) },
        PeeStatus::InvalidConfig
    );
    assert!(handle.is_null());
    assert!(!last_error().is_empty());

    let params = PeeParams {
        num_users: 1,
        ..pee_params_default()
    };
    let (xs, ys) = ([50.0], [0.0]);
    let status = unsafe { pee_scenario_from_users(&params, xs.as_ptr(), ys.as_ptr(), 1, &mut handle) };
    assert_eq!(status, PeeStatus::InvalidConfig);

    let handle = scenario(&params, 2);
    let mut out = blank();
    let status = unsafe { pee_run_scheme(handle, PeeScheme::Exhaustive, 14, &mut out, ptr::null_mut(), 0) };
    assert_eq!(status, PeeStatus::SearchSpaceTooLarge);

    let bad_index = [40usize];
    let status = unsafe {
        pee_solve_power_allocation(
            handle,
            bad_index.as_ptr(),
            1,
            &mut out,
            ptr::null_mut(),
            ptr::null_mut(),
        )
    };
    assert_eq!(status, PeeStatus::InvalidArgument);
    let status =
        unsafe { pee_solve_power_allocation(handle, ptr::null(), 0, &mut out, ptr::null_mut(), ptr::null_mut()) };
    assert_eq!(status, PeeStatus::InvalidArgument);
    assert_eq!(
        unsafe { pee_run_scheme(handle, PeeScheme::Proposed, 14, ptr::null_mut(), ptr::null_mut(), 0) },
        PeeStatus::NullPointer
    );
    unsafe { pee_scenario_free(handle) };
    unsafe { pee_scenario_free(ptr::null_mut()) };

    let name = unsafe { CStr::from_ptr(pee_status_name(PeeStatus::Infeasible)) };
    assert_eq!(name.to_str().unwrap(), "infeasible");
}

#[test]
fn infeasible_set_reports_nan() {
    let params = PeeParams {
        num_users: 3,
        num_positions: 4,
        min_rate_bps: 60e6,
        transmit_budget_w: 1e-4,
        ..pee_params_default()
    };
    let handle = scenario(&params, 3);
    let mut out = blank();
    let mut alpha = [0.0; 3];
    let status = unsafe {
        pee_solve_power_allocation(
            handle,
            [0usize].as_ptr(),
            1,
            &mut out,
            alpha.as_mut_ptr(),
            ptr::null_mut(),
        )
    };
    assert_eq!(status, PeeStatus::Ok);
    assert!(!out.feasible);
    assert!(out.ee.is_nan() && alpha.iter().all(|a| a.is_nan()));
    unsafe { pee_scenario_free(handle) };
}
