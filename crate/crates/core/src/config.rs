//! Flat key/value scenario files.
//!
//! A file names an optional base preset and then overrides individual
//! fields, one key per scenario parameter:
//!
//! ```toml
//! preset = "gateway"
//! distance_m = 65000e3
//! rician_k = 10.0
//! bandwidth_hz = 5e6
//! brightness_mean_k = 200.0
//! interference = "model2"
//! int_power_dbw = -115.0
//! p_alpha = 0.5
//! ```
//!
//! Unknown keys are rejected. Antenna fields are spelled out
//! (`tx_antenna_diameter_m`, `rx_aperture_efficiency`, ...) so the file stays
//! a single flat table.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interference::{InterferenceModel, InterferenceSpec};
use crate::link_budget::ScenarioConfig;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub preset: Option<String>,
    pub name: Option<String>,
    pub distance_m: Option<f64>,
    pub frequency_hz: Option<f64>,
    pub tx_power_w: Option<f64>,
    pub tx_antenna_diameter_m: Option<f64>,
    pub tx_aperture_efficiency: Option<f64>,
    pub rx_antenna_diameter_m: Option<f64>,
    pub rx_aperture_efficiency: Option<f64>,
    pub tx_loss_db: Option<f64>,
    pub rx_loss_db: Option<f64>,
    pub rx_radiation_efficiency: Option<f64>,
    pub transmission_line_efficiency: Option<f64>,
    pub t_transmission_line_k: Option<f64>,
    pub t_receiver_k: Option<f64>,
    pub t_cmb_k: Option<f64>,
    pub bandwidth_hz: Option<f64>,
    pub rician_k: Option<f64>,
    pub brightness_mean_k: Option<f64>,
    pub brightness_swing_k: Option<f64>,
    pub brightness_phase_lag_deg: Option<f64>,
    /// `none`, `model1` or `model2`.
    pub interference: Option<String>,
    pub int_power_dbw: Option<f64>,
    pub p_alpha: Option<f64>,
    pub seed: Option<u64>,
}

impl ConfigFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Malformed {
            what: "config file",
            path: path.to_path_buf(),
            detail: e.message().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// The preset named in the file (or `fallback`) with every present key
    /// applied on top, validated.
    pub fn scenario(&self, fallback: &str) -> Result<ScenarioConfig> {
        let mut cfg = ScenarioConfig::preset(self.preset.as_deref().unwrap_or(fallback))?;
        self.apply(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&self, cfg: &mut ScenarioConfig) {
        fn set(slot: &mut f64, v: Option<f64>) {
            if let Some(v) = v {
                *slot = v;
            }
        }
        if let Some(name) = &self.name {
            cfg.name = name.clone();
        }
        set(&mut cfg.distance_m, self.distance_m);
        set(&mut cfg.frequency_hz, self.frequency_hz);
        set(&mut cfg.tx_power_w, self.tx_power_w);
        set(&mut cfg.tx_antenna.diameter_m, self.tx_antenna_diameter_m);
        set(&mut cfg.tx_antenna.aperture_efficiency, self.tx_aperture_efficiency);
        set(&mut cfg.rx_antenna.diameter_m, self.rx_antenna_diameter_m);
        set(&mut cfg.rx_antenna.aperture_efficiency, self.rx_aperture_efficiency);
        set(&mut cfg.tx_loss_db, self.tx_loss_db);
        set(&mut cfg.rx_loss_db, self.rx_loss_db);
        set(&mut cfg.rx_radiation_efficiency, self.rx_radiation_efficiency);
        set(&mut cfg.transmission_line_efficiency, self.transmission_line_efficiency);
        set(&mut cfg.t_transmission_line_k, self.t_transmission_line_k);
        set(&mut cfg.t_receiver_k, self.t_receiver_k);
        set(&mut cfg.t_cmb_k, self.t_cmb_k);
        set(&mut cfg.bandwidth_hz, self.bandwidth_hz);
        set(&mut cfg.rician_k, self.rician_k);
        set(&mut cfg.brightness.t_mean_k, self.brightness_mean_k);
        set(&mut cfg.brightness.t_swing_k, self.brightness_swing_k);
        set(&mut cfg.brightness.phase_lag_deg, self.brightness_phase_lag_deg);
    }

    /// Interference settings from the file, if `interference` names a model.
    /// Missing power or gate probability is an error in that case.
    pub fn interference_spec(&self) -> Result<Option<InterferenceSpec>> {
        let Some(model) = parse_interference(self.interference.as_deref().unwrap_or("none"))? else {
            return Ok(None);
        };
        let power = self
            .int_power_dbw
            .ok_or_else(|| Error::invalid("config sets `interference` but not `int_power_dbw`"))?;
        let p_alpha = self
            .p_alpha
            .ok_or_else(|| Error::invalid("config sets `interference` but not `p_alpha`"))?;
        InterferenceSpec::new(model, power, p_alpha).map(Some)
    }
}

/// `none` → no interference, otherwise one of the model spellings.
pub fn parse_interference(s: &str) -> Result<Option<InterferenceModel>> {
    if s.eq_ignore_ascii_case("none") {
        Ok(None)
    } else {
        s.parse().map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ConfigFile> {
        ConfigFile::parse(text, Path::new("test.toml"))
    }

    #[test]
    fn empty_file_is_the_preset() {
        let cfg = parse("").unwrap();
        assert_eq!(cfg.scenario("gateway").unwrap(), ScenarioConfig::gateway());
        assert_eq!(cfg.interference_spec().unwrap(), None);
    }

    #[test]
    fn keys_override_the_named_preset() {
        let cfg = parse(
            "preset = \"llo\"\nrician_k = 10.0\nrx_antenna_diameter_m = 0.2\nbrightness_swing_k = 0.0\n",
        )
        .unwrap();
        let s = cfg.scenario("gateway").unwrap();
        assert_eq!(s.name, "llo");
        assert_eq!(s.rician_k, 10.0);
        assert_eq!(s.rx_antenna.diameter_m, 0.2);
        assert_eq!(s.rx_antenna.aperture_efficiency, 0.56);
        assert_eq!(s.brightness.t_swing_k, 0.0);
        assert_eq!(s.distance_m, 100.0e3);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(matches!(parse("distance_km = 3.0"), Err(Error::Malformed { .. })));
        assert!(matches!(parse("distance_m = \"far\""), Err(Error::Malformed { .. })));
        let bad = parse("bandwidth_hz = -1.0").unwrap();
        assert!(matches!(bad.scenario("gateway"), Err(Error::InvalidParameter(_))));
        let unknown = parse("preset = \"mars\"").unwrap();
        assert!(matches!(unknown.scenario("gateway"), Err(Error::UnknownScenario { .. })));
    }

    #[test]
    fn interference_block() {
        let cfg = parse("interference = \"model2\"\nint_power_dbw = -115.0\np_alpha = 0.5\n").unwrap();
        let spec = cfg.interference_spec().unwrap().unwrap();
        assert_eq!(spec.model, InterferenceModel::Model2);
        assert_eq!(spec.power_dbw, -115.0);
        assert_eq!(spec.p_alpha, 0.5);

        let partial = parse("interference = \"model1\"\np_alpha = 0.5\n").unwrap();
        assert!(partial.interference_spec().is_err());
        let wrong = parse("interference = \"model3\"").unwrap();
        assert!(wrong.interference_spec().is_err());
    }
}
