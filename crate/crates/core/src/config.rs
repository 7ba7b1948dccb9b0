//! Scenario parameters and the flat key-value config file.
//!
//! All values are held in SI units (meters, watts, Hz, bits/s). Keys that
//! carry a `_dBm` suffix in the file are converted once, on load.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) / 1000.0
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts * 1000.0).log10()
}

/// Physical, power and algorithmic parameters of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Extent of the service region along y, meters (D1).
    pub region_width: f64,
    /// Extent along x, meters; also the waveguide length (D2).
    pub region_length: f64,
    /// Waveguide height above the user plane, meters.
    pub waveguide_height: f64,
    /// Number of candidate pinching positions (L = N_m).
    pub num_positions: usize,
    pub num_users: usize,
    pub bandwidth_hz: f64,
    pub carrier_hz: f64,
    pub noise_psd_dbm_per_hz: f64,
    pub refractive_index: f64,
    /// In-waveguide attenuation, dB per meter.
    pub attenuation_db_per_m: f64,
    pub static_power_w: f64,
    /// Power drawn by each activated pinching antenna.
    pub activation_power_w: f64,
    /// Maximum transmit power budget P_t.
    pub transmit_budget_w: f64,
    /// Power amplifier efficiency, in (0, 1].
    pub amplifier_efficiency: f64,
    /// Minimum rate required by every user, bits/s.
    pub min_rate_bps: f64,
    pub dinkelbach_tolerance: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let bandwidth_hz = 10e6;
        Self {
            region_width: 10.0,
            region_length: 20.0,
            waveguide_height: 3.0,
            num_positions: 40,
            num_users: 4,
            bandwidth_hz,
            carrier_hz: 28e9,
            noise_psd_dbm_per_hz: -174.0,
            refractive_index: 1.4,
            attenuation_db_per_m: 0.02,
            static_power_w: 0.1,
            activation_power_w: dbm_to_watts(3.0),
            transmit_budget_w: dbm_to_watts(20.0),
            amplifier_efficiency: 1.0,
            min_rate_bps: bandwidth_hz,
            dinkelbach_tolerance: 1e-6,
            seed: 1,
        }
    }
}

impl ScenarioConfig {
    /// Free-space wavelength c / f_c.
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    /// Guided wavelength inside the dielectric waveguide.
    pub fn guided_wavelength(&self) -> f64 {
        self.wavelength() / self.refractive_index
    }

    /// Noise power sigma^2 = N0 * B in watts.
    pub fn noise_power_w(&self) -> f64 {
        dbm_to_watts(self.noise_psd_dbm_per_hz) * self.bandwidth_hz
    }

    pub fn transmit_budget_dbm(&self) -> f64 {
        watts_to_dbm(self.transmit_budget_w)
    }

    pub fn activation_power_dbm(&self) -> f64 {
        watts_to_dbm(self.activation_power_w)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("D1", self.region_width),
            ("D2", self.region_length),
            ("d", self.waveguide_height),
            ("B", self.bandwidth_hz),
            ("fc", self.carrier_hz),
            ("n_eff", self.refractive_index),
            ("P_static", self.static_power_w),
            ("P_act", self.activation_power_w),
            ("P_t", self.transmit_budget_w),
            ("eps", self.dinkelbach_tolerance),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be finite and strictly positive, got {value}"
                )));
            }
        }
        if !(self.attenuation_db_per_m.is_finite() && self.attenuation_db_per_m >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "kappa must be non-negative, got {}",
                self.attenuation_db_per_m
            )));
        }
        if !(self.amplifier_efficiency > 0.0 && self.amplifier_efficiency <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "eta must lie in (0, 1], got {}",
                self.amplifier_efficiency
            )));
        }
        if !(self.min_rate_bps.is_finite() && self.min_rate_bps >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "R_min must be non-negative, got {}",
                self.min_rate_bps
            )));
        }
        if self.num_positions == 0 {
            return Err(Error::InvalidConfig("L must be at least 1".into()));
        }
        if self.num_users == 0 {
            return Err(Error::InvalidConfig("K must be at least 1".into()));
        }
        let noise = self.noise_power_w();
        if !(noise.is_finite() && noise > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "noise power must be strictly positive, got {noise}"
            )));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        ConfigFile::parse(text, Path::new("<inline>"))?.scenario()
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        ConfigFile::load(path)?.scenario()
    }
}

/// The on-disk document: a flat table of scenario keys, optionally followed
/// by the sweep keys consumed by the `sweep` subcommand.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct ConfigFile {
    pub D1: Option<f64>,
    pub D2: Option<f64>,
    pub d: Option<f64>,
    pub L: Option<usize>,
    pub K: Option<usize>,
    pub B: Option<f64>,
    pub fc: Option<f64>,
    pub N0_dBm_per_Hz: Option<f64>,
    pub n_eff: Option<f64>,
    pub kappa: Option<f64>,
    pub P_static: Option<f64>,
    pub P_act: Option<f64>,
    pub P_act_dBm: Option<f64>,
    pub P_t: Option<f64>,
    pub P_t_dBm: Option<f64>,
    pub eta: Option<f64>,
    pub R_min: Option<f64>,
    /// Minimum rate expressed as spectral efficiency; R_min = value * B.
    pub R_min_bps_per_Hz: Option<f64>,
    pub eps: Option<f64>,
    pub seed: Option<u64>,

    pub sweep_variable: Option<String>,
    pub sweep_values: Option<Vec<f64>>,
    pub schemes: Option<Vec<String>>,
    pub trials: Option<usize>,
    pub exhaustive_cap: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Resolves the scenario keys over the defaults and validates the result.
    pub fn scenario(&self) -> Result<ScenarioConfig> {
        let mut cfg = ScenarioConfig::default();
        macro_rules! set {
            ($($key:ident => $field:ident),* $(,)?) => {
                $(if let Some(v) = self.$key { cfg.$field = v; })*
            };
        }
        set!(
            D1 => region_width,
            D2 => region_length,
            d => waveguide_height,
            L => num_positions,
            K => num_users,
            B => bandwidth_hz,
            fc => carrier_hz,
            N0_dBm_per_Hz => noise_psd_dbm_per_hz,
            n_eff => refractive_index,
            kappa => attenuation_db_per_m,
            P_static => static_power_w,
            eta => amplifier_efficiency,
            eps => dinkelbach_tolerance,
            seed => seed,
        );
        cfg.activation_power_w = pick_power("P_act", self.P_act, self.P_act_dBm)?.unwrap_or(cfg.activation_power_w);
        cfg.transmit_budget_w = pick_power("P_t", self.P_t, self.P_t_dBm)?.unwrap_or(cfg.transmit_budget_w);
        cfg.min_rate_bps = match (self.R_min, self.R_min_bps_per_Hz) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidConfig(
                    "give either R_min or R_min_bps_per_Hz, not both".into(),
                ))
            }
            (Some(r), None) => r,
            (None, Some(se)) => se * cfg.bandwidth_hz,
            (None, None) => cfg.bandwidth_hz,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn pick_power(name: &str, watts: Option<f64>, dbm: Option<f64>) -> Result<Option<f64>> {
    match (watts, dbm) {
        (Some(_), Some(_)) => Err(Error::InvalidConfig(format!(
            "give either {name} (watts) or {name}_dBm, not both"
        ))),
        (Some(w), None) => Ok(Some(w)),
        (None, Some(dbm)) => Ok(Some(dbm_to_watts(dbm))),
        (None, None) => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = ScenarioConfig::default();
        cfg.validate().unwrap();
        assert!((cfg.activation_power_w - 0.001_995_262_314_968_88).abs() < 1e-15);
        // -174 dBm/Hz over 10 MHz = -104 dBm
        assert!((watts_to_dbm(cfg.noise_power_w()) + 104.0).abs() < 1e-9);
        assert!((cfg.guided_wavelength() * 1.4 - cfg.wavelength()).abs() < 1e-15);
    }

    #[test]
    fn dbm_keys_convert_on_load() {
        let cfg = ScenarioConfig::from_toml_str("P_t_dBm = 30\nP_act_dBm = 13\nK = 2\nL = 8\n").unwrap();
        assert!((cfg.transmit_budget_w - 1.0).abs() < 1e-12);
        assert!((cfg.activation_power_w - 0.019_952_623_149_688_8).abs() < 1e-12);
        assert_eq!(cfg.num_users, 2);
        assert_eq!(cfg.num_positions, 8);
    }

    #[test]
    fn min_rate_follows_bandwidth_by_default() {
        let cfg = ScenarioConfig::from_toml_str("B = 5e6").unwrap();
        assert_eq!(cfg.min_rate_bps, 5e6);
        let cfg = ScenarioConfig::from_toml_str("B = 5e6\nR_min_bps_per_Hz = 2").unwrap();
        assert_eq!(cfg.min_rate_bps, 1e7);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ScenarioConfig::from_toml_str("K = 0").is_err());
        assert!(ScenarioConfig::from_toml_str("L = 0").is_err());
        assert!(ScenarioConfig::from_toml_str("eta = 1.5").is_err());
        assert!(ScenarioConfig::from_toml_str("d = -1").is_err());
        assert!(ScenarioConfig::from_toml_str("P_t = 1\nP_t_dBm = 30").is_err());
        assert!(ScenarioConfig::from_toml_str("unknown_key = 3").is_err());
    }
}
