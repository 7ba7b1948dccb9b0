//! Energy-efficient NOMA power allocation for a fixed activation set.
//!
//! With a common SINR target `γ`, every user except the strongest is held
//! exactly at its QoS floor, so the whole allocation is an affine function
//! of the strongest user's coefficient `α_K`:
//!
//! ```text
//! α_k = γ · Σ_{j>k} α_j + C_k,     C_k = γ σ² N / (P_t |g_k|²)
//! Σ_k α_k = A_sum · α_K + B_sum,   A_sum = (1+γ)^(K-1),
//!                                  B_sum = Σ_{i<K} C_i (1+γ)^(i-1)
//! ```
//!
//! The EE ratio then becomes `f(α_K) / (D0 + D1 α_K)` with a concave log
//! numerator, which Dinkelbach's method maximizes using a closed-form
//! stationary point clamped to `[α_K^min, α_K^max]` at every step.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::geometry::{effective_gains, sic_order_from_gains, ChannelMatrix};
use crate::link::{self, EEOutcome, PowerAllocation, Radiators};

/// Hard cap on Dinkelbach iterations.
pub const MAX_DINKELBACH_ITERATIONS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct QosStructure {
    pub gamma: f64,
    /// `C_k` in SIC order.
    pub c: Vec<f64>,
    pub a_sum: f64,
    pub b_sum: f64,
    pub alpha_k_min: f64,
    pub alpha_k_max: f64,
}

impl QosStructure {
    pub fn num_users(&self) -> usize {
        self.c.len()
    }

    pub fn is_feasible(&self) -> bool {
        self.b_sum < 1.0 && self.alpha_k_min <= self.alpha_k_max
    }
}

pub fn build_qos(sorted_gains: &[f64], n_radiators: usize, config: &ScenarioConfig) -> Result<QosStructure> {
    if let Some(user) = sorted_gains.iter().position(|&g| !(g > 0.0)) {
        return Err(Error::ZeroGain { user });
    }
    let gamma = link::sinr_target(config);
    let noise_per_budget = config.noise_power_w() * n_radiators as f64 / config.transmit_budget_w;
    let c: Vec<f64> = sorted_gains.iter().map(|g| gamma * noise_per_budget / g).collect();
    let k = c.len();
    let growth = 1.0 + gamma;
    let a_sum = growth.powi(k as i32 - 1);
    let b_sum = c[..k - 1]
        .iter()
        .enumerate()
        .map(|(i, ci)| ci * growth.powi(i as i32))
        .sum::<f64>();
    Ok(QosStructure {
        gamma,
        alpha_k_min: c[k - 1],
        alpha_k_max: 1f64.min((1.0 - b_sum) / a_sum),
        c,
        a_sum,
        b_sum,
    })
}

/// Rebuilds the full allocation from `α_K`, back to front.
pub fn qos_recursion(alpha_k: f64, qos: &QosStructure) -> PowerAllocation {
    let k = qos.num_users();
    let mut alpha = vec![0.0; k];
    alpha[k - 1] = alpha_k;
    let mut tail = alpha_k;
    for i in (0..k - 1).rev() {
        alpha[i] = qos.gamma * tail + qos.c[i];
        tail += alpha[i];
    }
    PowerAllocation::new(alpha)
}

/// The EE ratio restricted to the `α_K` line: `f(α_K) / g(α_K)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalObjective {
    /// `(K-1) R_min`: rate contributed by the users held at their floor.
    pub rate_floor: f64,
    pub bandwidth: f64,
    /// `P_t |g_K|² / (N σ²)`.
    pub snr_slope: f64,
    pub denom_offset: f64,
    pub denom_slope: f64,
}

impl FractionalObjective {
    pub fn new(qos: &QosStructure, sorted_gains: &[f64], radiators: Radiators, config: &ScenarioConfig) -> Self {
        let k = qos.num_users();
        let tx_scale = config.transmit_budget_w / config.amplifier_efficiency;
        Self {
            rate_floor: (k - 1) as f64 * config.min_rate_bps,
            bandwidth: config.bandwidth_hz,
            snr_slope: config.transmit_budget_w * sorted_gains[k - 1]
                / (radiators.count as f64 * config.noise_power_w()),
            denom_offset: tx_scale * qos.b_sum + radiators.circuit_power(config),
            denom_slope: tx_scale * qos.a_sum,
        }
    }

    pub fn numerator(&self, alpha_k: f64) -> f64 {
        self.rate_floor + self.bandwidth * (self.snr_slope * alpha_k).ln_1p() / LN_2
    }

    pub fn denominator(&self, alpha_k: f64) -> f64 {
        self.denom_offset + self.denom_slope * alpha_k
    }

    pub fn ratio(&self, alpha_k: f64) -> f64 {
        self.numerator(alpha_k) / self.denominator(alpha_k)
    }

    /// `f(α) - β g(α)`, the parametric subproblem.
    pub fn parametric(&self, alpha_k: f64, beta: f64) -> f64 {
        self.numerator(alpha_k) - beta * self.denominator(alpha_k)
    }
}

/// Unconstrained maximizer of `f(α_K) - β g(α_K)`:
/// `B / (ln2 · β · (P_t/η)(1+γ)^(K-1)) - N σ² / (P_t |g_K|²)`.
pub fn stationary_alpha_k(
    beta: f64,
    qos: &QosStructure,
    sorted_gains: &[f64],
    n_radiators: usize,
    config: &ScenarioConfig,
) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::NonPositiveBeta(beta));
    }
    let strongest = sorted_gains[qos.num_users() - 1];
    let tx_scale = config.transmit_budget_w / config.amplifier_efficiency;
    Ok(config.bandwidth_hz / (LN_2 * beta * tx_scale * qos.a_sum)
        - n_radiators as f64 * config.noise_power_w() / (config.transmit_budget_w * strongest))
}

pub fn clamp_alpha_k(stationary: f64, qos: &QosStructure) -> Result<f64> {
    if !qos.is_feasible() {
        return Err(Error::Infeasible {
            alpha_min: qos.alpha_k_min,
            alpha_max: qos.alpha_k_max,
        });
    }
    Ok(stationary.max(qos.alpha_k_min).min(qos.alpha_k_max))
}

/// Seed ratio: the EE of the equal split `α_k = 1/K`, which need not meet
/// the QoS floors.
pub fn dinkelbach_init(sorted_gains: &[f64], radiators: Radiators, config: &ScenarioConfig) -> f64 {
    let split = PowerAllocation::equal_split(sorted_gains.len());
    let rates: f64 = link::achievable_rates(&split, sorted_gains, config, radiators.count)
        .iter()
        .sum();
    rates / link::total_power_for(&split, radiators, config)
}

pub fn beta_update(
    alpha_k_star: f64,
    qos: &QosStructure,
    sorted_gains: &[f64],
    radiators: Radiators,
    config: &ScenarioConfig,
) -> f64 {
    FractionalObjective::new(qos, sorted_gains, radiators, config).ratio(alpha_k_star)
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct DinkelbachTrace {
    /// Equal-split ratio used to start the iteration.
    pub seed_beta: f64,
    /// Ratio achieved by each iterate, all at QoS-feasible points.
    pub beta_sequence: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// How the inner layer picks `α_K` once the QoS structure is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum InnerRule {
    /// Dinkelbach EE maximization.
    #[default]
    Optimal,
    /// Every user exactly at its minimum rate.
    MinPower,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolution {
    /// User indices in SIC order (weakest first).
    pub sic_order: Vec<usize>,
    pub allocation: Option<PowerAllocation>,
    pub outcome: EEOutcome,
    pub trace: DinkelbachTrace,
}

impl InnerSolution {
    pub fn utility(&self) -> f64 {
        self.outcome.utility()
    }
}

/// Optimal power allocation over the users for a given activation set.
/// An activation set that cannot meet the QoS floors comes back with
/// `feasible = false` rather than an error.
pub fn solve_power_allocation(
    active: &[usize],
    channel: &ChannelMatrix,
    config: &ScenarioConfig,
) -> Result<InnerSolution> {
    solve_with_rule(active, channel, config, InnerRule::Optimal)
}

pub fn solve_with_rule(
    active: &[usize],
    channel: &ChannelMatrix,
    config: &ScenarioConfig,
    rule: InnerRule,
) -> Result<InnerSolution> {
    let mut active = active.to_vec();
    active.sort_unstable();
    active.dedup();
    let gains = effective_gains(&active, channel)?;
    solve_for_gains(&gains, Radiators::pinching(active.len()), config, rule)
}

/// Inner solve from raw (unsorted) per-user gains.
pub fn solve_for_gains(
    gains: &[f64],
    radiators: Radiators,
    config: &ScenarioConfig,
    rule: InnerRule,
) -> Result<InnerSolution> {
    let sic_order = sic_order_from_gains(gains);
    let sorted: Vec<f64> = sic_order.iter().map(|&k| gains[k]).collect();

    let qos = match build_qos(&sorted, radiators.count, config) {
        Ok(qos) if qos.is_feasible() => qos,
        Ok(_) | Err(Error::ZeroGain { .. }) => {
            return Ok(InnerSolution {
                sic_order,
                allocation: None,
                outcome: EEOutcome::infeasible(radiators, config),
                trace: DinkelbachTrace::default(),
            })
        }
        Err(e) => return Err(e),
    };

    let (alpha_k, trace) = match rule {
        InnerRule::Optimal => dinkelbach(&qos, &sorted, radiators, config)?,
        InnerRule::MinPower => (qos.alpha_k_min, DinkelbachTrace::default()),
    };
    let allocation = qos_recursion(alpha_k, &qos);
    let mut outcome = EEOutcome::evaluate(&allocation, &sorted, radiators, config);
    outcome.dinkelbach_iterations = trace.iterations;
    Ok(InnerSolution {
        sic_order,
        allocation: Some(allocation),
        outcome,
        trace,
    })
}

fn dinkelbach(
    qos: &QosStructure,
    sorted_gains: &[f64],
    radiators: Radiators,
    config: &ScenarioConfig,
) -> Result<(f64, DinkelbachTrace)> {
    let objective = FractionalObjective::new(qos, sorted_gains, radiators, config);
    let tol = config.dinkelbach_tolerance;
    let seed_beta = dinkelbach_init(sorted_gains, radiators, config);
    let mut trace = DinkelbachTrace {
        seed_beta,
        ..Default::default()
    };

    let mut beta = seed_beta;
    let mut alpha_star = qos.alpha_k_min;
    let mut last_step = f64::INFINITY;
    for iteration in 1..=MAX_DINKELBACH_ITERATIONS {
        trace.iterations = iteration;
        let alpha = clamp_alpha_k(
            stationary_alpha_k(beta, qos, sorted_gains, radiators.count, config)?,
            qos,
        )?;
        let next = objective.ratio(alpha);
        if let Some(&prev) = trace.beta_sequence.last() {
            // rounding at the fixed point; the previous iterate is the optimum
            if next < prev && prev - next <= tol * prev {
                trace.converged = true;
                return Ok((alpha_star, trace));
            }
        }
        trace.beta_sequence.push(next);
        alpha_star = alpha;
        last_step = (next - beta).abs();
        if last_step <= tol * beta.abs().max(next.abs()) {
            trace.converged = true;
            return Ok((alpha_star, trace));
        }
        beta = next;
    }
    Err(Error::DinkelbachDiverged {
        iterations: MAX_DINKELBACH_ITERATIONS,
        last_step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> ScenarioConfig {
        ScenarioConfig::default()
    }

    #[test]
    fn single_user_structure() {
        let c = cfg();
        let g = 2e-8;
        let qos = build_qos(&[g], 3, &c).unwrap();
        assert_eq!(qos.a_sum, 1.0);
        assert_eq!(qos.b_sum, 0.0);
        let expect = qos.gamma * c.noise_power_w() * 3.0 / (c.transmit_budget_w * g);
        assert!((qos.alpha_k_min - expect).abs() <= 1e-15 * expect);
        assert_eq!(qos_recursion(0.7, &qos).alpha, vec![0.7]);
    }

    #[test]
    fn three_users_unit_target() {
        let c = cfg();
        assert_eq!(link::sinr_target(&c), 1.0);
        let qos = build_qos(&[1e-9, 2e-9, 3e-9], 1, &c).unwrap();
        assert_eq!(qos.a_sum, 4.0);
    }

    #[test]
    fn two_user_recursion_by_hand() {
        let qos = QosStructure {
            gamma: 1.0,
            c: vec![0.1, 0.05],
            a_sum: 2.0,
            b_sum: 0.1,
            alpha_k_min: 0.05,
            alpha_k_max: 0.45,
        };
        let alloc = qos_recursion(0.2, &qos);
        assert!((alloc.alpha[0] - 0.3).abs() < 1e-15);
        assert!((alloc.total() - 0.5).abs() < 1e-15);
        assert!((alloc.total() - (qos.a_sum * 0.2 + qos.b_sum)).abs() < 1e-15);

        let c = cfg();
        let qos = build_qos(&[1e-9, 5e-9], 1, &c).unwrap();
        assert_eq!(qos.a_sum, 2.0);
        assert_eq!(qos.b_sum, qos.c[0]);
    }

    #[test]
    fn no_qos_pressure() {
        let mut c = cfg();
        c.min_rate_bps = 0.0;
        let qos = build_qos(&[1e-9, 2e-9, 4e-9], 2, &c).unwrap();
        let alloc = qos_recursion(0.4, &qos);
        assert_eq!(&alloc.alpha[..2], &[0.0, 0.0]);
        assert_eq!(qos.alpha_k_min, 0.0);
    }

    #[test]
    fn zero_gain_is_rejected() {
        assert!(matches!(
            build_qos(&[0.0, 1e-9], 1, &cfg()),
            Err(Error::ZeroGain { user: 0 })
        ));
    }

    #[test]
    fn stationary_point_limits() {
        let c = cfg();
        let gains = [3e-8];
        let qos = build_qos(&gains, 1, &c).unwrap();
        let floor = -c.noise_power_w() / (c.transmit_budget_w * gains[0]);
        let huge = stationary_alpha_k(1e300, &qos, &gains, 1, &c).unwrap();
        assert!((huge - floor).abs() <= 1e-12 * floor.abs());
        assert_eq!(clamp_alpha_k(huge, &qos).unwrap(), qos.alpha_k_min);

        let beta = 1e9;
        let single = c.bandwidth_hz / (LN_2 * beta * c.transmit_budget_w / c.amplifier_efficiency) + floor;
        let got = stationary_alpha_k(beta, &qos, &gains, 1, &c).unwrap();
        assert!((got - single).abs() <= 1e-12 * single.abs());

        assert!(matches!(
            stationary_alpha_k(0.0, &qos, &gains, 1, &c),
            Err(Error::NonPositiveBeta(_))
        ));
    }

    #[test]
    fn stationary_point_zeroes_parametric_derivative() {
        let c = cfg();
        let gains = [4e-9, 9e-9, 3e-8];
        let radiators = Radiators::pinching(2);
        let qos = build_qos(&gains, 2, &c).unwrap();
        let obj = FractionalObjective::new(&qos, &gains, radiators, &c);
        for beta in [2e8, 6e8, 1.5e9] {
            let a = stationary_alpha_k(beta, &qos, &gains, 2, &c).unwrap();
            let h = 1e-5 * a.abs().max(1e-3);
            let deriv = (obj.parametric(a + h, beta) - obj.parametric(a - h, beta)) / (2.0 * h);
            // scale by the magnitude of the two opposing slope terms
            let scale = beta * obj.denom_slope;
            assert!(deriv.abs() / scale < 1e-9, "beta {beta}: derivative {deriv}");
        }
    }

    #[test]
    fn clamp_cases() {
        let qos = QosStructure {
            gamma: 1.0,
            c: vec![0.1, 0.05],
            a_sum: 2.0,
            b_sum: 0.1,
            alpha_k_min: 0.05,
            alpha_k_max: 0.45,
        };
        assert_eq!(clamp_alpha_k(0.2, &qos).unwrap(), 0.2);
        assert_eq!(clamp_alpha_k(0.01, &qos).unwrap(), 0.05);
        assert_eq!(clamp_alpha_k(0.9, &qos).unwrap(), 0.45);
        let bad = QosStructure {
            alpha_k_min: 0.5,
            ..qos
        };
        assert!(matches!(clamp_alpha_k(0.2, &bad), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn init_single_user_and_static_power() {
        let mut c = cfg();
        let g = 2e-8;
        let r = Radiators::pinching(2);
        let expect = c.bandwidth_hz * (1.0 + c.transmit_budget_w * g / (2.0 * c.noise_power_w())).log2()
            / (c.static_power_w + c.transmit_budget_w / c.amplifier_efficiency + 2.0 * c.activation_power_w);
        let got = dinkelbach_init(&[g], r, &c);
        assert!((got - expect).abs() <= 1e-12 * expect);

        let gains = [1e-9, 4e-9, 2e-8];
        let before = dinkelbach_init(&gains, r, &c);
        c.static_power_w *= 2.0;
        assert!(dinkelbach_init(&gains, r, &c) < before);
    }

    #[test]
    fn objective_matches_link_model() {
        let c = cfg();
        let gains = [2e-9, 7e-9, 1.1e-8, 3e-8];
        let r = Radiators::pinching(3);
        let qos = build_qos(&gains, 3, &c).unwrap();
        assert!(qos.is_feasible());
        let obj = FractionalObjective::new(&qos, &gains, r, &c);
        for t in [0.0, 0.3, 1.0] {
            let a = qos.alpha_k_min + t * (qos.alpha_k_max - qos.alpha_k_min);
            let alloc = qos_recursion(a, &qos);
            let rates = link::achievable_rates(&alloc, &gains, &c, 3);
            let sum: f64 = rates.iter().sum();
            assert!((obj.numerator(a) - sum).abs() <= 1e-6 * sum);
            for rate in &rates[..3] {
                assert!((rate - c.min_rate_bps).abs() <= 1e-6 * c.min_rate_bps);
            }
            let p = link::total_power_for(&alloc, r, &c);
            assert!((obj.denominator(a) - p).abs() <= 1e-12 * p);
        }
    }

    #[test]
    fn single_user_beta_update() {
        let mut c = cfg();
        c.min_rate_bps = 0.0;
        let g = 2e-8;
        let r = Radiators::pinching(1);
        let qos = build_qos(&[g], 1, &c).unwrap();
        let a = 0.3;
        let f = c.bandwidth_hz * (1.0 + c.transmit_budget_w * g * a / c.noise_power_w()).log2();
        let den = c.transmit_budget_w * a / c.amplifier_efficiency + c.static_power_w + c.activation_power_w;
        let got = beta_update(a, &qos, &[g], r, &c);
        assert!((got - f / den).abs() <= 1e-12 * got);
    }

    #[test]
    fn infeasible_set_is_reported_not_raised() {
        let mut c = cfg();
        c.transmit_budget_w = 1e-9;
        let sol = solve_for_gains(&[1e-10, 2e-10], Radiators::pinching(1), &c, InnerRule::Optimal).unwrap();
        assert!(!sol.outcome.feasible);
        assert_eq!(sol.utility(), f64::NEG_INFINITY);
        assert!(sol.allocation.is_none());
    }

    #[test]
    fn optimum_dominates_interval_endpoints() {
        let c = cfg();
        let gains = [3e-9, 8e-9, 2.5e-8];
        let r = Radiators::pinching(2);
        let sol = solve_for_gains(&gains, r, &c, InnerRule::Optimal).unwrap();
        let qos = build_qos(&gains, 2, &c).unwrap();
        let obj = FractionalObjective::new(&qos, &gains, r, &c);
        assert!(sol.outcome.ee >= obj.ratio(qos.alpha_k_min) * (1.0 - 1e-12));
        assert!(sol.outcome.ee >= obj.ratio(qos.alpha_k_max) * (1.0 - 1e-12));
        let min = solve_for_gains(&gains, r, &c, InnerRule::MinPower).unwrap();
        assert!(sol.outcome.ee >= min.outcome.ee);
        assert_eq!(min.trace.iterations, 0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn affine_identity_and_qos(
            mut gains in prop::collection::vec(1e-10..1e-7f64, 1..6),
            n in 1usize..5, t in 0.0..=1.0f64, pt_dbm in -10.0..30.0f64,
        ) {
            gains.sort_by(f64::total_cmp);
            let mut c = cfg();
            c.transmit_budget_w = crate::config::dbm_to_watts(pt_dbm);
            let qos = build_qos(&gains, n, &c).unwrap();
            prop_assume!(qos.is_feasible());
            let a = qos.alpha_k_min + t * (qos.alpha_k_max - qos.alpha_k_min);
            let alloc = qos_recursion(a, &qos);
            let affine = qos.a_sum * a + qos.b_sum;
            prop_assert!((alloc.total() - affine).abs() <= 1e-12 * affine.max(f64::MIN_POSITIVE));
            prop_assert!(alloc.is_valid());
        }

        #[test]
        fn solver_is_monotone_and_feasible(
            mut gains in prop::collection::vec(1e-10..1e-7f64, 1..6),
            n in 1usize..5, pt_dbm in -10.0..30.0f64,
        ) {
            gains.sort_by(f64::total_cmp);
            let mut c = cfg();
            c.transmit_budget_w = crate::config::dbm_to_watts(pt_dbm);
            let sol = solve_for_gains(&gains, Radiators::pinching(n), &c, InnerRule::Optimal).unwrap();
            prop_assume!(sol.outcome.feasible);
            let t = &sol.trace;
            prop_assert!(t.converged);
            prop_assert!(t.iterations <= 100);
            for w in t.beta_sequence.windows(2) {
                prop_assert!(w[1] >= w[0]);
            }
            let alloc = sol.allocation.unwrap();
            prop_assert!(alloc.total() <= 1.0 + 1e-9);
            let k = gains.len();
            for r in &sol.outcome.rates[..k - 1] {
                prop_assert!((r - c.min_rate_bps).abs() <= 1e-6 * c.min_rate_bps);
            }
            prop_assert!(sol.outcome.rates[k - 1] >= c.min_rate_bps * (1.0 - 1e-6));
        }
    }
}
