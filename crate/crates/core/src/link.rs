//! NOMA downlink rates under SIC and the system power consumption model.
//!
//! Everything here works on quantities already arranged in SIC order:
//! index 0 is the weakest user (decoded first), the last index is the
//! strongest user, which sees no residual interference.

use serde::Serialize;

use crate::config::ScenarioConfig;

/// Per-user power coefficients in SIC order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerAllocation {
    pub alpha: Vec<f64>,
}

impl PowerAllocation {
    pub fn new(alpha: Vec<f64>) -> Self {
        Self { alpha }
    }

    pub fn equal_split(num_users: usize) -> Self {
        Self::new(vec![1.0 / num_users as f64; num_users])
    }

    pub fn total(&self) -> f64 {
        self.alpha.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// Non-negative coefficients whose sum respects the unit budget.
    pub fn is_valid(&self) -> bool {
        self.alpha.iter().all(|&a| a >= 0.0) && self.total() <= 1.0 + 1e-9
    }
}

/// Radiator count seen by the rate expression and the number of activated
/// pinching antennas billed in the power model. These coincide for a
/// pinching-antenna system; a conventional antenna radiates from one
/// element without any activation cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Radiators {
    pub count: usize,
    pub activated: usize,
}

impl Radiators {
    pub fn pinching(n: usize) -> Self {
        Self { count: n, activated: n }
    }

    pub fn conventional() -> Self {
        Self { count: 1, activated: 0 }
    }

    /// Fixed power draw independent of the allocation.
    pub fn circuit_power(&self, config: &ScenarioConfig) -> f64 {
        config.static_power_w + self.activated as f64 * config.activation_power_w
    }
}

/// Achieved rates, consumed power and energy efficiency of one solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EEOutcome {
    /// Per-user rates in SIC order, bits/s.
    pub rates: Vec<f64>,
    pub sum_rate: f64,
    /// Watts.
    pub total_power: f64,
    /// Bits per joule; negative infinity when infeasible.
    pub ee: f64,
    /// Number of activated pinching antennas.
    pub n_active: usize,
    pub feasible: bool,
    pub dinkelbach_iterations: usize,
    pub outer_iterations: usize,
}

impl EEOutcome {
    pub fn evaluate(
        alloc: &PowerAllocation,
        sorted_gains: &[f64],
        radiators: Radiators,
        config: &ScenarioConfig,
    ) -> Self {
        let rates = achievable_rates(alloc, sorted_gains, config, radiators.count);
        let sum_rate = rates.iter().sum::<f64>();
        let total_power = total_power_for(alloc, radiators, config);
        Self {
            rates,
            sum_rate,
            total_power,
            ee: sum_rate / total_power,
            n_active: radiators.activated,
            feasible: true,
            dinkelbach_iterations: 0,
            outer_iterations: 0,
        }
    }

    pub fn infeasible(radiators: Radiators, config: &ScenarioConfig) -> Self {
        Self {
            rates: Vec::new(),
            sum_rate: 0.0,
            total_power: radiators.circuit_power(config),
            ee: f64::NEG_INFINITY,
            n_active: radiators.activated,
            feasible: false,
            dinkelbach_iterations: 0,
            outer_iterations: 0,
        }
    }

    /// EE when feasible, negative infinity otherwise.
    pub fn utility(&self) -> f64 {
        if self.feasible {
            self.ee
        } else {
            f64::NEG_INFINITY
        }
    }
}

/// `R_k = B log2(1 + (P_t/N)|g_k|² α_k / ((P_t/N)|g_k|² Σ_{j>k} α_j + σ²))`.
pub fn achievable_rate(
    k: usize,
    alloc: &PowerAllocation,
    sorted_gains: &[f64],
    config: &ScenarioConfig,
    n_radiators: usize,
) -> f64 {
    let per_radiator = config.transmit_budget_w / n_radiators as f64;
    let rx = per_radiator * sorted_gains[k];
    let interference: f64 = alloc.alpha[k + 1..].iter().sum();
    let sinr = rx * alloc.alpha[k] / (rx * interference + config.noise_power_w());
    config.bandwidth_hz * sinr.log2_1p()
}

pub fn achievable_rates(
    alloc: &PowerAllocation,
    sorted_gains: &[f64],
    config: &ScenarioConfig,
    n_radiators: usize,
) -> Vec<f64> {
    (0..alloc.len())
        .map(|k| achievable_rate(k, alloc, sorted_gains, config, n_radiators))
        .collect()
}

/// SINR every user must reach to attain the common minimum rate.
pub fn sinr_target(config: &ScenarioConfig) -> f64 {
    (config.min_rate_bps / config.bandwidth_hz).exp2() - 1.0
}

/// Total consumption with `n_active` activated pinching antennas.
pub fn total_power(alloc: &PowerAllocation, n_active: usize, config: &ScenarioConfig) -> f64 {
    total_power_for(alloc, Radiators::pinching(n_active), config)
}

pub fn total_power_for(alloc: &PowerAllocation, radiators: Radiators, config: &ScenarioConfig) -> f64 {
    radiators.circuit_power(config) + config.transmit_budget_w / config.amplifier_efficiency * alloc.total()
}

trait Log2OnePlus {
    fn log2_1p(self) -> f64;
}

impl Log2OnePlus for f64 {
    fn log2_1p(self) -> f64 {
        self.ln_1p() / std::f64::consts::LN_2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> ScenarioConfig {
        ScenarioConfig::default()
    }

    #[test]
    fn zero_coefficient_gives_zero_rate() {
        let alloc = PowerAllocation::new(vec![0.0, 0.6]);
        assert_eq!(achievable_rate(0, &alloc, &[1e-8, 2e-8], &cfg(), 1), 0.0);
    }

    #[test]
    fn single_user_interference_free() {
        let c = cfg();
        let g = 3e-8;
        let alloc = PowerAllocation::new(vec![1.0]);
        let expect = c.bandwidth_hz * (1.0 + c.transmit_budget_w * g / (2.0 * c.noise_power_w())).log2();
        let got = achievable_rate(0, &alloc, &[g], &c, 2);
        assert!((got - expect).abs() <= 1e-12 * expect);
    }

    #[test]
    fn two_user_equal_split() {
        // R_1 = B log2(1 + x/(x + 1)) with x = (P_t/N)|g_1|² 0.5 / σ²,
        // evaluated along a separate arithmetic path.
        let c = cfg();
        let (g1, g2) = (1e-9, 5e-8);
        let alloc = PowerAllocation::new(vec![0.5, 0.5]);
        let x = c.transmit_budget_w * g1 * 0.5 / c.noise_power_w();
        let expect = c.bandwidth_hz * ((2.0 * x + 1.0) / (x + 1.0)).ln() / 2f64.ln();
        let got = achievable_rate(0, &alloc, &[g1, g2], &c, 1);
        assert!((got - expect).abs() <= 1e-12 * expect);
        // noise-free limit would be log2(2) = 1 bit/s/Hz; finite noise stays below it
        assert!(got < c.bandwidth_hz);
    }

    #[test]
    fn sinr_targets() {
        let mut c = cfg();
        c.min_rate_bps = c.bandwidth_hz;
        assert_eq!(sinr_target(&c), 1.0);
        c.min_rate_bps = 0.0;
        assert_eq!(sinr_target(&c), 0.0);
        c.min_rate_bps = 2.0 * c.bandwidth_hz;
        assert_eq!(sinr_target(&c), 3.0);
    }

    #[test]
    fn power_model() {
        let mut c = cfg();
        let idle = PowerAllocation::new(vec![0.0, 0.0]);
        assert_eq!(total_power(&idle, 1, &c), c.static_power_w + c.activation_power_w);

        c.transmit_budget_w = 0.1;
        let full = PowerAllocation::new(vec![0.25, 0.75]);
        assert!((total_power(&full, 2, &c) - 0.203_990_524_629_937_76).abs() < 1e-15);

        let base = total_power(&full, 2, &c) - c.static_power_w - 2.0 * c.activation_power_w;
        c.amplifier_efficiency = 0.5;
        let halved = total_power(&full, 2, &c) - c.static_power_w - 2.0 * c.activation_power_w;
        assert!((halved - 2.0 * base).abs() < 1e-15);

        let conv = total_power_for(&full, Radiators::conventional(), &c);
        assert!((conv - c.static_power_w - 0.2).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn rate_increases_with_own_coefficient(
            a in 0.0..0.5f64, da in 1e-6..0.5f64, rest in 0.0..0.5f64, g in 1e-10..1e-6f64,
        ) {
            let c = cfg();
            let lo = PowerAllocation::new(vec![a, rest]);
            let hi = PowerAllocation::new(vec![a + da, rest]);
            let gains = [g, g];
            prop_assert!(achievable_rate(0, &hi, &gains, &c, 1) > achievable_rate(0, &lo, &gains, &c, 1));
        }

        #[test]
        fn rates_invariant_under_joint_scaling(
            alpha in prop::collection::vec(0.0..0.3f64, 1..5), scale in 0.01..100.0f64,
        ) {
            let c = cfg();
            let gains: Vec<f64> = (0..alpha.len()).map(|i| 1e-9 * (i + 1) as f64).collect();
            let alloc = PowerAllocation::new(alpha);
            let mut scaled = c.clone();
            scaled.transmit_budget_w *= scale;
            scaled.noise_psd_dbm_per_hz += 10.0 * scale.log10();
            for k in 0..alloc.len() {
                let r0 = achievable_rate(k, &alloc, &gains, &c, 2);
                let r1 = achievable_rate(k, &alloc, &gains, &scaled, 2);
                prop_assert!((r0 - r1).abs() <= 1e-9 * r0.max(1.0));
            }
            // power is affine in Σα
            let p0 = total_power(&PowerAllocation::new(vec![0.0; alloc.len()]), 3, &c);
            let p = total_power(&alloc, 3, &c);
            prop_assert!((p - p0 - c.transmit_budget_w / c.amplifier_efficiency * alloc.total()).abs() < 1e-15);
        }
    }
}
