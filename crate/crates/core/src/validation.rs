//! Reference oracles and the end-to-end validation suites.
//!
//! The [`oracle`] functions re-derive rates, power and the QoS recursion
//! straight from the model definitions, without going through `link` or
//! `power_alloc`, so they can check those modules. Each suite returns a
//! [`CriterionReport`]; the `validate` CLI subcommand and the acceptance test
//! target both run them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::benchmarks::{exhaustive_search, nearest_pa_scheme, SchemeId, DEFAULT_EXHAUSTIVE_CAP};
use crate::config::{dbm_to_watts, ScenarioConfig};
use crate::error::Result;
use crate::experiment::{
    generate_scenario, matching_rng, results_to_csv, run_sweep, summarize, SweepSpec, SweepVariable,
};
use crate::geometry::effective_gains;
use crate::link::{PowerAllocation, Radiators};
use crate::matching::MatchingSearch;
use crate::power_alloc::{build_qos, qos_recursion, solve_for_gains, FractionalObjective, InnerRule, InnerSolution};

pub mod oracle {
    //! Direct transcriptions of the model, written for clarity over speed.

    use crate::config::ScenarioConfig;

    /// `α_k = γ Σ_{j>k} α_j + C_k` with the tail sum re-added for every `k`.
    pub fn literal_recursion(alpha_k: f64, gamma: f64, c: &[f64]) -> Vec<f64> {
        let k = c.len();
        let mut alpha = vec![0.0; k];
        alpha[k - 1] = alpha_k;
        for i in (0..k - 1).rev() {
            let mut tail = 0.0;
            for a in &alpha[i + 1..] {
                tail += a;
            }
            alpha[i] = gamma * tail + c[i];
        }
        alpha
    }

    /// Per-user rates from the SINR definition, `gains` ascending.
    pub fn rates(alpha: &[f64], gains: &[f64], n_radiators: usize, config: &ScenarioConfig) -> Vec<f64> {
        let sigma2 = 10f64.powf(config.noise_psd_dbm_per_hz / 10.0) * 1e-3 * config.bandwidth_hz;
        let p = config.transmit_budget_w / n_radiators as f64;
        (0..alpha.len())
            .map(|k| {
                let mut interference = 0.0;
                for a in &alpha[k + 1..] {
                    interference += a;
                }
                let sinr = p * gains[k] * alpha[k] / (p * gains[k] * interference + sigma2);
                config.bandwidth_hz * (1.0 + sinr).log2()
            })
            .collect()
    }

    pub fn power(alpha: &[f64], circuit_w: f64, config: &ScenarioConfig) -> f64 {
        circuit_w + config.transmit_budget_w / config.amplifier_efficiency * alpha.iter().sum::<f64>()
    }

    /// `C_k` from the SINR target: the coefficient that just meets the
    /// floor with no interference above it.
    pub fn qos_offsets(gains: &[f64], n_radiators: usize, config: &ScenarioConfig) -> (f64, Vec<f64>) {
        let sigma2 = 10f64.powf(config.noise_psd_dbm_per_hz / 10.0) * 1e-3 * config.bandwidth_hz;
        let gamma = 2f64.powf(config.min_rate_bps / config.bandwidth_hz) - 1.0;
        let c = gains
            .iter()
            .map(|g| gamma * sigma2 * n_radiators as f64 / (config.transmit_budget_w * g))
            .collect();
        (gamma, c)
    }

    /// Best EE over an evenly spaced grid of `α_K` (`steps` intervals)
    /// across the feasible interval; `None` when the interval is empty.
    pub fn grid_search_ee(
        gains: &[f64],
        n_radiators: usize,
        circuit_w: f64,
        config: &ScenarioConfig,
        steps: usize,
    ) -> Option<(f64, f64)> {
        let k = gains.len();
        let (gamma, c) = qos_offsets(gains, n_radiators, config);
        // feasible interval from the recursion itself: Σα is affine in α_K
        let s0: f64 = literal_recursion(0.0, gamma, &c).iter().sum();
        let s1: f64 = literal_recursion(1.0, gamma, &c).iter().sum();
        let lo = c[k - 1];
        let hi = ((1.0 - s0) / (s1 - s0)).min(1.0);
        if !(lo <= hi) || s0 >= 1.0 {
            return None;
        }
        let sigma2 = 10f64.powf(config.noise_psd_dbm_per_hz / 10.0) * 1e-3 * config.bandwidth_hz;
        let p = config.transmit_budget_w / n_radiators as f64;
        let mut alpha = vec![0.0; k];
        let mut best = (f64::NEG_INFINITY, lo);
        for i in 0..=steps {
            let a = if i == steps {
                hi
            } else {
                lo + (hi - lo) * i as f64 / steps as f64
            };
            // O(K) backward pass with running tail sums
            alpha[k - 1] = a;
            let mut tail = a;
            for j in (0..k - 1).rev() {
                alpha[j] = gamma * tail + c[j];
                tail += alpha[j];
            }
            let mut rate = 0.0;
            let mut above = 0.0;
            for j in (0..k).rev() {
                let sinr = p * gains[j] * alpha[j] / (p * gains[j] * above + sigma2);
                rate += config.bandwidth_hz * (1.0 + sinr).log2();
                above += alpha[j];
            }
            let ee = rate / (circuit_w + config.transmit_budget_w / config.amplifier_efficiency * tail);
            if ee > best.0 {
                best = (ee, a);
            }
        }
        Some(best)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] criterion {} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail
        )
    }
}

/// Collects QoS and budget checks over every feasible solution produced by
/// the suites.
#[derive(Debug, Default, Clone)]
pub struct FeasibilityAudit {
    pub checked: usize,
    pub violations: Vec<String>,
}

impl FeasibilityAudit {
    pub fn check(&mut self, context: &str, alloc: Option<&PowerAllocation>, rates: &[f64], feasible: bool, r_min: f64) {
        if !feasible {
            return;
        }
        self.checked += 1;
        let Some(alloc) = alloc else {
            self.violations.push(format!("{context}: feasible without allocation"));
            return;
        };
        let k = rates.len();
        for (i, &r) in rates.iter().enumerate() {
            if r < r_min - 1e-6 * r_min {
                self.violations
                    .push(format!("{context}: user {i} rate {r} below {r_min}"));
            }
            if i + 1 < k && (r - r_min).abs() > 1e-6 * r_min {
                self.violations
                    .push(format!("{context}: user {i} rate {r} not at floor {r_min}"));
            }
        }
        if alloc.total() > 1.0 + 1e-9 || alloc.alpha.iter().any(|&a| a < 0.0) {
            self.violations
                .push(format!("{context}: allocation {:?} breaks the budget", alloc.alpha));
        }
    }

    fn check_solution(&mut self, context: &str, sol: &InnerSolution, r_min: f64) {
        self.check(
            context,
            sol.allocation.as_ref(),
            &sol.outcome.rates,
            sol.outcome.feasible,
            r_min,
        );
    }
}

/// Allowance for means that are equal in exact arithmetic but summed in a
/// different rounding order (the EE plateau above the transmit-power knee).
const ROUNDOFF: f64 = 1e-12;

fn non_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] >= w[0] - ROUNDOFF * w[0].abs())
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Random small scenario: K in 1..=5, L in 4..=10, P_t in [-10, 30] dBm.
fn random_small_config(rng: &mut ChaCha8Rng) -> ScenarioConfig {
    ScenarioConfig {
        num_users: rng.gen_range(1..=5),
        num_positions: rng.gen_range(4..=10),
        transmit_budget_w: dbm_to_watts(rng.gen_range(-10.0..=30.0)),
        ..ScenarioConfig::default()
    }
}

/// Dinkelbach EE against a grid over `α_K` with step 1e-5 of the feasible
/// interval, on random activation subsets.
pub fn inner_oracle_equivalence(scenarios: usize, seed: u64, audit: &mut FeasibilityAudit) -> Result<CriterionReport> {
    const STEPS: usize = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut done, mut worst, mut skipped) = (0, 0.0f64, 0);
    let mut failures = Vec::new();
    while done < scenarios && skipped < 50 * scenarios.max(1) {
        let config = random_small_config(&mut rng);
        let scn = generate_scenario(&config, rng.gen())?;
        let mut active: Vec<usize> = (0..config.num_positions).filter(|_| rng.gen_bool(0.4)).collect();
        if active.is_empty() {
            active.push(rng.gen_range(0..config.num_positions));
        }
        let gains = effective_gains(&active, &scn.channel)?;
        let radiators = Radiators::pinching(active.len());
        let sol = solve_for_gains(&gains, radiators, &config, InnerRule::Optimal)?;
        let mut sorted = gains.clone();
        sorted.sort_by(f64::total_cmp);
        let grid = oracle::grid_search_ee(&sorted, active.len(), radiators.circuit_power(&config), &config, STEPS);
        match (sol.outcome.feasible, grid) {
            (false, None) => skipped += 1,
            (true, Some((grid_ee, _))) => {
                audit.check_solution("inner oracle", &sol, config.min_rate_bps);
                let gap = relative_gap(sol.outcome.ee, grid_ee);
                worst = worst.max(gap);
                if gap > 1e-4 {
                    failures.push(format!("K={} |A|={} gap {gap:.3e}", config.num_users, active.len()));
                }
                done += 1;
            }
            (f, g) => failures.push(format!("feasibility mismatch: solver {f}, grid {}", g.is_some())),
        }
    }
    if done < scenarios {
        failures.push(format!("only {done} feasible scenarios found"));
    }
    Ok(CriterionReport {
        id: 1,
        name: "inner-solver oracle equivalence",
        passed: failures.is_empty(),
        detail: format!(
            "{done} scenarios, worst relative gap {worst:.3e} (tol 1e-4){}",
            summary_of(&failures)
        ),
    })
}

fn summary_of(failures: &[String]) -> String {
    match failures.len() {
        0 => String::new(),
        n => format!("; {n} failures, first: {}", failures[0]),
    }
}

/// exhaustive ≥ proposed ≥ start, exhaustive ≥ nearest ≥ 0, and mean
/// proposed-vs-exhaustive gap below 5 %.
pub fn exhaustive_dominance(scenarios: usize, seed: u64, audit: &mut FeasibilityAudit) -> Result<CriterionReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let (mut gap_sum, mut gap_count, mut worst) = (0.0, 0usize, 0.0f64);
    let slack = |x: f64| x.abs() * 1e-12;
    for i in 0..scenarios {
        let config = random_small_config(&mut rng);
        let trial_seed: u64 = rng.gen();
        let scn = generate_scenario(&config, trial_seed)?;
        let best = exhaustive_search(&scn.channel, &config, None, DEFAULT_EXHAUSTIVE_CAP)?;
        let best_u = best.solution.utility();
        audit.check_solution("exhaustive", &best.solution, config.min_rate_bps);

        let (_, nearest) = nearest_pa_scheme(&scn.channel, &scn.layout, &config)?;
        audit.check_solution("nearest", &nearest, config.min_rate_bps);
        if nearest.outcome.feasible && !(nearest.outcome.ee >= 0.0) {
            failures.push(format!("scenario {i}: nearest EE {} negative", nearest.outcome.ee));
        }
        if nearest.utility() > best_u + slack(best_u) {
            failures.push(format!("scenario {i}: nearest beats exhaustive"));
        }

        let mut search = MatchingSearch::new(&scn.channel, &config, InnerRule::Optimal);
        let run = match search.run(&mut matching_rng(trial_seed), |_| {}) {
            Ok(run) => run,
            Err(crate::Error::InitializationInfeasible) => {
                if best_u.is_finite() {
                    failures.push(format!("scenario {i}: matching found no feasible start"));
                }
                continue;
            }
            Err(e) => return Err(e),
        };
        let u = run.state.utility;
        audit.check(
            "proposed",
            run.state.alpha_star.as_ref(),
            &run.state.outcome.rates,
            run.state.outcome.feasible,
            config.min_rate_bps,
        );
        if u > best_u + slack(best_u) {
            failures.push(format!("scenario {i}: proposed {u} beats exhaustive {best_u}"));
        }
        if u < run.initial_utility {
            failures.push(format!("scenario {i}: proposed below its start"));
        }
        if best_u.is_finite() {
            let gap = (best_u - u) / best_u;
            gap_sum += gap;
            gap_count += 1;
            worst = worst.max(gap);
        }
    }
    let mean_gap = if gap_count > 0 { gap_sum / gap_count as f64 } else { 0.0 };
    if mean_gap >= 0.05 {
        failures.push(format!("mean gap {mean_gap:.4} >= 0.05"));
    }
    Ok(CriterionReport {
        id: 2,
        name: "exhaustive dominance",
        passed: failures.is_empty(),
        detail: format!(
            "{scenarios} scenarios, mean proposed gap {:.3}% (worst {:.3}%){}",
            100.0 * mean_gap,
            100.0 * worst,
            summary_of(&failures)
        ),
    })
}

pub fn feasibility_report(audit: &FeasibilityAudit) -> CriterionReport {
    CriterionReport {
        id: 3,
        name: "QoS and budget feasibility",
        passed: audit.violations.is_empty() && audit.checked > 0,
        detail: format!(
            "{} feasible solutions audited, {} violations{}",
            audit.checked,
            audit.violations.len(),
            audit
                .violations
                .first()
                .map(|v| format!(", first: {v}"))
                .unwrap_or_default()
        ),
    }
}

/// Strictly increasing matching utility and non-decreasing Dinkelbach
/// ratios over seeded full-size runs.
pub fn monotone_ascent(runs: usize, seed: u64, audit: &mut FeasibilityAudit) -> Result<CriterionReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = Vec::new();
    let (mut inner, mut max_iter) = (0usize, 0usize);
    for i in 0..runs {
        let config = ScenarioConfig {
            num_users: rng.gen_range(1..=5),
            num_positions: rng.gen_range(4..=40),
            transmit_budget_w: dbm_to_watts(rng.gen_range(-10.0..=30.0)),
            activation_power_w: dbm_to_watts(rng.gen_range(1.0..=13.0)),
            ..ScenarioConfig::default()
        };
        let trial_seed: u64 = rng.gen();
        let scn = generate_scenario(&config, trial_seed)?;
        let mut trace = Vec::new();
        let mut search = MatchingSearch::new(&scn.channel, &config, InnerRule::Optimal);
        match search.run(&mut matching_rng(trial_seed), |s| trace.push(s.utility)) {
            Ok(run) => audit.check(
                "ascent",
                run.state.alpha_star.as_ref(),
                &run.state.outcome.rates,
                run.state.outcome.feasible,
                config.min_rate_bps,
            ),
            Err(crate::Error::InitializationInfeasible) => {}
            Err(e) => return Err(e),
        }
        if trace.windows(2).any(|w| !(w[1] > w[0])) {
            violations.push(format!("run {i}: matching utility not strictly increasing"));
        }
        for (_, sol) in search.evaluator().solutions() {
            inner += 1;
            max_iter = max_iter.max(sol.trace.iterations);
            if sol.outcome.feasible && !sol.trace.converged {
                violations.push(format!("run {i}: Dinkelbach did not converge"));
            }
            if sol.trace.beta_sequence.windows(2).any(|w| w[1] < w[0]) {
                violations.push(format!("run {i}: Dinkelbach ratio decreased"));
            }
        }
    }
    Ok(CriterionReport {
        id: 4,
        name: "monotone ascent",
        passed: violations.is_empty(),
        detail: format!(
            "{runs} runs, {inner} inner solves, max {max_iter} Dinkelbach iterations, {} violations{}",
            violations.len(),
            summary_of(&violations)
        ),
    })
}

fn mean_of(summary: &[crate::experiment::PointSummary], value: f64, scheme: SchemeId) -> (f64, f64) {
    summary
        .iter()
        .find(|c| c.value == value && c.scheme == scheme)
        .map(|c| (c.mean_ee, c.mean_n_active))
        .unwrap_or((f64::NAN, f64::NAN))
}

/// EE versus transmit budget with the default parameters.
pub fn transmit_budget_trend(trials: usize, seed: u64) -> Result<CriterionReport> {
    let values: Vec<f64> = (0..=8).map(|i| -10.0 + 5.0 * i as f64).collect();
    let mut spec = SweepSpec::new(
        SweepVariable::PtDbm,
        values.clone(),
        ScenarioConfig {
            seed,
            ..ScenarioConfig::default()
        },
    );
    spec.schemes = vec![SchemeId::Proposed, SchemeId::Conventional, SchemeId::MinPower];
    spec.num_trials = trials;
    let summary = summarize(&run_sweep(&spec)?, SweepVariable::PtDbm);
    let prop: Vec<f64> = values
        .iter()
        .map(|&v| mean_of(&summary, v, SchemeId::Proposed).0)
        .collect();

    let mut failures = Vec::new();
    if !non_decreasing(&prop) {
        failures.push("proposed mean EE decreases with P_t".to_string());
    }
    let range =
        prop.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - prop.iter().cloned().fold(f64::INFINITY, f64::min);
    let late = prop[8] - prop[4];
    if !(late < 0.1 * range) {
        failures.push(format!("10->30 dBm rise {late:.4e} not below 10% of range {range:.4e}"));
    }
    let at10 = |s| mean_of(&summary, 10.0, s).0;
    let (p, c, m) = (
        at10(SchemeId::Proposed),
        at10(SchemeId::Conventional),
        at10(SchemeId::MinPower),
    );
    if !(p >= c && c >= m) {
        failures.push(format!(
            "ordering at 10 dBm violated: proposed {p:.4e}, conventional {c:.4e}, min power {m:.4e}"
        ));
    }
    Ok(CriterionReport {
        id: 5,
        name: "EE vs transmit budget trend",
        passed: failures.is_empty(),
        detail: format!(
            "proposed means (Mbit/J) {:?}; at 10 dBm prop/conv/min = {:.1}/{:.1}/{:.1}; 10->30 rise {:.2}% of range{}",
            prop.iter().map(|v| (v / 1e4).round() / 1e2).collect::<Vec<_>>(),
            p / 1e6,
            c / 1e6,
            m / 1e6,
            100.0 * late / range,
            summary_of(&failures)
        ),
    })
}

/// EE and activation count versus activation power at P_t = 20 dBm.
pub fn activation_power_trend(trials: usize, seed: u64) -> Result<CriterionReport> {
    let values: Vec<f64> = (1..=13).map(f64::from).collect();
    let mut spec = SweepSpec::new(
        SweepVariable::PactDbm,
        values.clone(),
        ScenarioConfig {
            seed,
            transmit_budget_w: dbm_to_watts(20.0),
            ..ScenarioConfig::default()
        },
    );
    spec.schemes = vec![SchemeId::Proposed, SchemeId::Conventional];
    spec.num_trials = trials;
    let summary = summarize(&run_sweep(&spec)?, SweepVariable::PactDbm);
    let prop: Vec<(f64, f64)> = values
        .iter()
        .map(|&v| mean_of(&summary, v, SchemeId::Proposed))
        .collect();
    let conv: Vec<f64> = values
        .iter()
        .map(|&v| mean_of(&summary, v, SchemeId::Conventional).0)
        .collect();

    let mut failures = Vec::new();
    let rev = |f: fn(&(f64, f64)) -> f64| prop.iter().rev().map(f).collect::<Vec<_>>();
    if !non_decreasing(&rev(|p| p.0)) {
        failures.push("proposed mean EE increases with P_act".to_string());
    }
    if !non_decreasing(&rev(|p| p.1)) {
        failures.push("mean n_active increases with P_act".to_string());
    }
    let last_n = prop.last().map(|p| p.1).unwrap_or(f64::NAN);
    if !(last_n <= 1.5) {
        failures.push(format!("terminal mean n_active {last_n:.3} > 1.5"));
    }
    let diff: Vec<f64> = prop.iter().zip(&conv).map(|(p, c)| p.0 - c).collect();
    let crossover = diff.windows(2).position(|w| w[0] > 0.0 && w[1] <= 0.0);
    if crossover.is_none() {
        failures.push("no proposed/conventional crossover in range".to_string());
    }
    Ok(CriterionReport {
        id: 6,
        name: "EE vs activation power trend",
        passed: failures.is_empty(),
        detail: format!(
            "proposed EE (Mbit/J) {:?}; n_active {:?}; conventional {:.1}; crossover after {}{}",
            prop.iter().map(|p| (p.0 / 1e4).round() / 1e2).collect::<Vec<_>>(),
            prop.iter().map(|p| (p.1 * 100.0).round() / 100.0).collect::<Vec<_>>(),
            conv[0] / 1e6,
            crossover.map_or("none".into(), |i| format!("{} dBm", values[i])),
            summary_of(&failures)
        ),
    })
}

/// Closed-form aggregates and the reduced EE numerator/denominator against
/// the literal model, over random parameter draws.
pub fn algebraic_identities(draws: usize, seed: u64) -> CriterionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for i in 0..draws {
        let k = rng.gen_range(1..=8);
        let n = rng.gen_range(1..=6);
        let mut config = ScenarioConfig {
            num_users: k,
            transmit_budget_w: dbm_to_watts(rng.gen_range(-10.0..=30.0)),
            amplifier_efficiency: rng.gen_range(0.2..=1.0),
            activation_power_w: dbm_to_watts(rng.gen_range(1.0..=13.0)),
            ..ScenarioConfig::default()
        };
        config.min_rate_bps = rng.gen_range(0.0..=3.0) * config.bandwidth_hz;
        let mut gains: Vec<f64> = (0..k).map(|_| 10f64.powf(rng.gen_range(-11.0..-6.0))).collect();
        gains.sort_by(f64::total_cmp);

        let qos = match build_qos(&gains, n, &config) {
            Ok(q) => q,
            Err(e) => {
                failures.push(format!("draw {i}: {e}"));
                continue;
            }
        };
        let (gamma, c) = oracle::qos_offsets(&gains, n, &config);
        let b_lit: f64 = oracle::literal_recursion(0.0, gamma, &c).iter().sum();
        let a_lit = oracle::literal_recursion(1.0, gamma, &c).iter().sum::<f64>() - b_lit;
        let alpha_k = qos.alpha_k_min + rng.gen_range(0.0..=1.0) * qos.alpha_k_max.max(qos.alpha_k_min + 0.1);
        let alpha = oracle::literal_recursion(alpha_k, gamma, &c);
        let radiators = Radiators::pinching(n);
        let obj = FractionalObjective::new(&qos, &gains, radiators, &config);
        let rates: f64 = oracle::rates(&alpha, &gains, n, &config).iter().sum();
        let circuit = config.static_power_w + n as f64 * config.activation_power_w;
        let power = oracle::power(&alpha, circuit, &config);
        let recursion_sum = qos_recursion(alpha_k, &qos).total();

        let checks = [
            ("A_sum", qos.a_sum, a_lit),
            ("B_sum", qos.b_sum, b_lit),
            ("recursion", recursion_sum, alpha.iter().sum()),
            ("numerator", obj.numerator(alpha_k), rates),
            ("denominator", obj.denominator(alpha_k), power),
        ];
        for (what, got, expect) in checks {
            // B_sum is exactly zero without QoS pressure or with one user
            let gap = if got == 0.0 && expect.abs() < 1e-300 {
                0.0
            } else {
                relative_gap(got, expect)
            };
            // differences of O(1) sums leave absolute error near 1e-16 in A_sum
            let gap = if what == "A_sum" {
                gap.min((got - expect).abs() / (1.0 + b_lit))
            } else {
                gap
            };
            worst = worst.max(gap);
            if gap > 1e-6 {
                failures.push(format!("draw {i}: {what} {got} vs {expect}"));
            }
        }
    }
    CriterionReport {
        id: 7,
        name: "algebraic identities",
        passed: failures.is_empty(),
        detail: format!(
            "{draws} draws, worst relative gap {worst:.3e} (tol 1e-6){}",
            summary_of(&failures)
        ),
    }
}

/// Two identical sweeps must serialize to the same bytes.
pub fn sweep_determinism(trials: usize, seed: u64) -> Result<CriterionReport> {
    let mut spec = SweepSpec::new(
        SweepVariable::PtDbm,
        vec![0.0, 10.0, 20.0],
        ScenarioConfig {
            seed,
            num_positions: 12,
            ..ScenarioConfig::default()
        },
    );
    spec.schemes = SchemeId::ALL.to_vec();
    spec.num_trials = trials;
    let a = results_to_csv(&run_sweep(&spec)?);
    let b = results_to_csv(&run_sweep(&spec)?);
    Ok(CriterionReport {
        id: 8,
        name: "sweep determinism",
        passed: a == b,
        detail: format!("{} bytes, identical = {}", a.len(), a == b),
    })
}

#[derive(Debug, Clone)]
pub struct ValidationOptions {
    pub inner_scenarios: usize,
    pub exhaustive_scenarios: usize,
    pub ascent_runs: usize,
    pub trend_trials: usize,
    pub identity_draws: usize,
    pub seed: u64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            inner_scenarios: 500,
            exhaustive_scenarios: 200,
            ascent_runs: 1000,
            trend_trials: 100,
            identity_draws: 10_000,
            seed: 2024,
        }
    }
}

/// Runs every suite in order, calling `report` as each one finishes.
pub fn run_all(opts: &ValidationOptions, mut report: impl FnMut(&CriterionReport)) -> Result<Vec<CriterionReport>> {
    let mut audit = FeasibilityAudit::default();
    let mut out = Vec::new();
    let mut push = |r: CriterionReport| {
        report(&r);
        out.push(r);
    };
    push(inner_oracle_equivalence(opts.inner_scenarios, opts.seed, &mut audit)?);
    push(exhaustive_dominance(
        opts.exhaustive_scenarios,
        opts.seed + 1,
        &mut audit,
    )?);
    push(monotone_ascent(opts.ascent_runs, opts.seed + 2, &mut audit)?);
    push(feasibility_report(&audit));
    push(transmit_budget_trend(opts.trend_trials, opts.seed + 3)?);
    push(activation_power_trend(opts.trend_trials, opts.seed + 4)?);
    push(algebraic_identities(opts.identity_draws, opts.seed + 5));
    push(sweep_determinism(opts.trend_trials.min(10), opts.seed + 6)?);
    Ok(out)
}
