//! Deterministic link budget for a lunar proximity link.
//!
//! Received power follows the usual Friis form with the free-space path loss
//! in the denominator. Noise is the operational system temperature (cosmic
//! background, lunar brightness, transmission line and receiver terms)
//! times Boltzmann's constant and the receiver bandwidth. All arithmetic is
//! done on linear quantities; decibels appear only at the edges.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Cosmic microwave background temperature, K.
pub const T_CMB: f64 = 2.725;
/// Receiver bandwidth used when none is configured, Hz.
pub const DEFAULT_BANDWIDTH_HZ: f64 = 10.0e6;
/// Rician K-factor used by both presets (linear, about 7 dB).
pub const DEFAULT_RICIAN_K: f64 = 5.0;

/// Names accepted by [`ScenarioConfig::preset`].
pub const PRESETS: [&str; 2] = ["gateway", "llo"];

pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn check_positive(what: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} must be positive, got {value}")))
    }
}

fn check_non_negative(what: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} must be non-negative, got {value}")))
    }
}

fn check_fraction(what: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} must lie in (0, 1], got {value}")))
    }
}

/// Parabolic reflector described by its diameter and aperture efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaSpec {
    pub diameter_m: f64,
    pub aperture_efficiency: f64,
}

impl AntennaSpec {
    pub fn new(diameter_m: f64, aperture_efficiency: f64) -> Result<Self> {
        let spec = Self {
            diameter_m,
            aperture_efficiency,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("antenna diameter", self.diameter_m)?;
        check_fraction("aperture efficiency", self.aperture_efficiency)
    }
}

/// Lunar phase angle in degrees, always normalized into `[0, 360)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhaseAngle(f64);

impl PhaseAngle {
    pub fn new(degrees: f64) -> Self {
        let mut psi = degrees.rem_euclid(360.0);
        // rem_euclid of a tiny negative number rounds up to exactly 360
        if psi >= 360.0 {
            psi = 0.0;
        }
        PhaseAngle(psi)
    }

    pub fn degrees(self) -> f64 {
        self.0
    }

    pub fn radians(self) -> f64 {
        self.0.to_radians()
    }
}

impl From<f64> for PhaseAngle {
    fn from(degrees: f64) -> Self {
        PhaseAngle::new(degrees)
    }
}

impl fmt::Display for PhaseAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}°", self.0)
    }
}

/// Lunar brightness temperature as a phase-lagged cosine of the phase angle.
///
/// `T_A(ψ) = t_mean + t_swing·cos(ψ − phase_lag)`, clamped at 0 K. The
/// default coefficients are placeholders for a measured Ka-band fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrightnessModel {
    pub t_mean_k: f64,
    pub t_swing_k: f64,
    pub phase_lag_deg: f64,
}

impl Default for BrightnessModel {
    fn default() -> Self {
        Self {
            t_mean_k: 230.0,
            t_swing_k: 60.0,
            phase_lag_deg: 0.0,
        }
    }
}

impl BrightnessModel {
    pub fn constant(t_k: f64) -> Self {
        Self {
            t_mean_k: t_k,
            t_swing_k: 0.0,
            phase_lag_deg: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_non_negative("brightness mean temperature", self.t_mean_k)?;
        check_non_negative("brightness temperature swing", self.t_swing_k)?;
        if !(self.phase_lag_deg.is_finite() && (0.0..360.0).contains(&self.phase_lag_deg)) {
            return Err(Error::invalid(format!(
                "brightness phase lag must lie in [0, 360), got {}",
                self.phase_lag_deg
            )));
        }
        Ok(())
    }
}

/// Every parameter of one proximity link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub distance_m: f64,
    pub frequency_hz: f64,
    pub tx_power_w: f64,
    pub tx_antenna: AntennaSpec,
    pub rx_antenna: AntennaSpec,
    pub tx_loss_db: f64,
    pub rx_loss_db: f64,
    pub rx_radiation_efficiency: f64,
    pub transmission_line_efficiency: f64,
    pub t_transmission_line_k: f64,
    pub t_receiver_k: f64,
    pub t_cmb_k: f64,
    pub bandwidth_hz: f64,
    pub rician_k: f64,
    pub brightness: BrightnessModel,
}

impl ScenarioConfig {
    /// Lunar surface user to the Gateway in NRHO (70 000 km).
    pub fn gateway() -> Self {
        Self {
            name: "gateway".into(),
            distance_m: 70_000.0e3,
            frequency_hz: 26.25e9,
            tx_power_w: 10.0,
            tx_antenna: AntennaSpec {
                diameter_m: 0.254,
                aperture_efficiency: 0.43,
            },
            rx_antenna: AntennaSpec {
                diameter_m: 1.5,
                aperture_efficiency: 0.54,
            },
            tx_loss_db: 1.0,
            rx_loss_db: 3.0,
            rx_radiation_efficiency: 0.95,
            transmission_line_efficiency: 0.9,
            t_transmission_line_k: 30.0,
            t_receiver_k: 100.0,
            t_cmb_k: T_CMB,
            bandwidth_hz: DEFAULT_BANDWIDTH_HZ,
            rician_k: DEFAULT_RICIAN_K,
            brightness: BrightnessModel::default(),
        }
    }

    /// Lunar surface user to a satellite in low lunar orbit (100 km).
    pub fn llo() -> Self {
        Self {
            name: "llo".into(),
            distance_m: 100.0e3,
            tx_power_w: 1.0,
            rx_antenna: AntennaSpec {
                diameter_m: 0.1,
                aperture_efficiency: 0.56,
            },
            rx_radiation_efficiency: 0.90,
            ..Self::gateway()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "gateway" => Ok(Self::gateway()),
            "llo" => Ok(Self::llo()),
            _ => Err(Error::UnknownScenario {
                name: name.to_string(),
                available: PRESETS.iter().map(|s| s.to_string()).collect(),
            }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("distance", self.distance_m)?;
        check_positive("frequency", self.frequency_hz)?;
        check_positive("transmit power", self.tx_power_w)?;
        self.tx_antenna.validate()?;
        self.rx_antenna.validate()?;
        check_non_negative("transmitter loss", self.tx_loss_db)?;
        check_non_negative("receiver loss", self.rx_loss_db)?;
        check_fraction("radiation efficiency", self.rx_radiation_efficiency)?;
        check_fraction(
            "transmission line efficiency",
            self.transmission_line_efficiency,
        )?;
        check_non_negative("transmission line temperature", self.t_transmission_line_k)?;
        check_non_negative("receiver temperature", self.t_receiver_k)?;
        check_non_negative("CMB temperature", self.t_cmb_k)?;
        check_positive("bandwidth", self.bandwidth_hz)?;
        check_non_negative("Rician K-factor", self.rician_k)?;
        self.brightness.validate()
    }
}

/// Linear gain of a circular aperture, `η·(πD/λ)²`.
pub fn aperture_gain(antenna: &AntennaSpec, frequency_hz: f64) -> Result<f64> {
    antenna.validate()?;
    check_positive("frequency", frequency_hz)?;
    let wavelength = SPEED_OF_LIGHT / frequency_hz;
    let ratio = std::f64::consts::PI * antenna.diameter_m / wavelength;
    Ok(antenna.aperture_efficiency * ratio * ratio)
}

pub fn aperture_gain_dbi(antenna: &AntennaSpec, frequency_hz: f64) -> Result<f64> {
    aperture_gain(antenna, frequency_hz).map(to_db)
}

/// Free-space path loss `(4πfd/c)²` as a linear factor.
pub fn fspl(distance_m: f64, frequency_hz: f64) -> Result<f64> {
    check_positive("distance", distance_m)?;
    check_positive("frequency", frequency_hz)?;
    let r = 4.0 * std::f64::consts::PI * frequency_hz * distance_m / SPEED_OF_LIGHT;
    Ok(r * r)
}

/// Received carrier power in watts, `P_t·G_t·G_r / (L_t·L_r·φ)`.
pub fn received_power(cfg: &ScenarioConfig) -> Result<f64> {
    cfg.validate()?;
    let g_t = aperture_gain(&cfg.tx_antenna, cfg.frequency_hz)?;
    let g_r = aperture_gain(&cfg.rx_antenna, cfg.frequency_hz)?;
    let phi = fspl(cfg.distance_m, cfg.frequency_hz)?;
    let losses = from_db(cfg.tx_loss_db) * from_db(cfg.rx_loss_db);
    Ok(cfg.tx_power_w * g_t * g_r / (losses * phi))
}

pub fn brightness_temperature(model: &BrightnessModel, psi: PhaseAngle) -> f64 {
    let t = model.t_mean_k + model.t_swing_k * (psi.radians() - model.phase_lag_deg.to_radians()).cos();
    t.max(0.0)
}

/// Operational noise temperature
/// `T_CMB + T_A(ψ) + T_TL/η_rad + T_R/(η_rad·η_TL)`.
pub fn operational_temperature(cfg: &ScenarioConfig, psi: PhaseAngle) -> Result<f64> {
    cfg.validate()?;
    Ok(operational_temperature_unchecked(cfg, psi))
}

fn operational_temperature_unchecked(cfg: &ScenarioConfig, psi: PhaseAngle) -> f64 {
    let eta_rad = cfg.rx_radiation_efficiency;
    let eta_tl = cfg.transmission_line_efficiency;
    cfg.t_cmb_k
        + brightness_temperature(&cfg.brightness, psi)
        + cfg.t_transmission_line_k / eta_rad
        + cfg.t_receiver_k / (eta_rad * eta_tl)
}

/// One-sided noise power spectral density `k·T_op(ψ)` in W/Hz.
pub fn noise_psd(cfg: &ScenarioConfig, psi: PhaseAngle) -> Result<f64> {
    Ok(BOLTZMANN * operational_temperature(cfg, psi)?)
}

/// In-band noise power `k·T_op(ψ)·B` in watts. This is the quantity that
/// sits in every SNR/SINR denominator.
pub fn noise_power(cfg: &ScenarioConfig, psi: PhaseAngle) -> Result<f64> {
    Ok(noise_psd(cfg, psi)? * cfg.bandwidth_hz)
}

/// Mean SNR in dB with the fading power at its unit mean.
pub fn mean_snr_db(cfg: &ScenarioConfig, psi: PhaseAngle) -> Result<f64> {
    Ok(to_db(received_power(cfg)? / noise_power(cfg, psi)?))
}

/// Tabulates the mean SNR over `ψ = 0, step, 2·step, … < 360`.
pub fn snr_vs_phase_sweep(cfg: &ScenarioConfig, step_deg: f64) -> Result<Vec<(f64, f64)>> {
    if !(step_deg.is_finite() && step_deg > 0.0 && step_deg <= 360.0) {
        return Err(Error::invalid(format!(
            "sweep step must lie in (0, 360], got {step_deg}"
        )));
    }
    let p_r = received_power(cfg)?;
    let mut rows = Vec::new();
    let mut i = 0u32;
    loop {
        let psi = f64::from(i) * step_deg;
        if psi >= 360.0 {
            break;
        }
        let noise = BOLTZMANN * operational_temperature_unchecked(cfg, PhaseAngle::new(psi)) * cfg.bandwidth_hz;
        rows.push((psi, to_db(p_r / noise)));
        i += 1;
    }
    Ok(rows)
}

/// Every intermediate term of the budget at one phase angle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkBudget {
    pub scenario: String,
    pub psi_deg: f64,
    pub tx_power_dbw: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
    pub tx_loss_db: f64,
    pub rx_loss_db: f64,
    pub fspl_db: f64,
    pub rx_power_dbw: f64,
    pub brightness_k: f64,
    pub t_op_k: f64,
    pub noise_psd_dbw_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_power_dbw: f64,
    pub mean_snr_db: f64,
}

impl LinkBudget {
    pub fn compute(cfg: &ScenarioConfig, psi: PhaseAngle) -> Result<Self> {
        cfg.validate()?;
        let p_r = received_power(cfg)?;
        let n0 = noise_psd(cfg, psi)?;
        let noise = n0 * cfg.bandwidth_hz;
        Ok(Self {
            scenario: cfg.name.clone(),
            psi_deg: psi.degrees(),
            tx_power_dbw: to_db(cfg.tx_power_w),
            tx_gain_dbi: aperture_gain_dbi(&cfg.tx_antenna, cfg.frequency_hz)?,
            rx_gain_dbi: aperture_gain_dbi(&cfg.rx_antenna, cfg.frequency_hz)?,
            tx_loss_db: cfg.tx_loss_db,
            rx_loss_db: cfg.rx_loss_db,
            fspl_db: to_db(fspl(cfg.distance_m, cfg.frequency_hz)?),
            rx_power_dbw: to_db(p_r),
            brightness_k: brightness_temperature(&cfg.brightness, psi),
            t_op_k: operational_temperature(cfg, psi)?,
            noise_psd_dbw_hz: to_db(n0),
            bandwidth_hz: cfg.bandwidth_hz,
            noise_power_dbw: to_db(noise),
            mean_snr_db: to_db(p_r / noise),
        })
    }
}

impl fmt::Display for LinkBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Link budget: {} (psi = {} deg)", self.scenario, self.psi_deg)?;
        let rows: [(&str, f64, &str); 14] = [
            ("Tx power", self.tx_power_dbw, "dBW"),
            ("Tx antenna gain", self.tx_gain_dbi, "dBi"),
            ("Rx antenna gain", self.rx_gain_dbi, "dBi"),
            ("Tx losses", self.tx_loss_db, "dB"),
            ("Rx losses", self.rx_loss_db, "dB"),
            ("Free-space path loss", self.fspl_db, "dB"),
            ("Received power", self.rx_power_dbw, "dBW"),
            ("Brightness temperature", self.brightness_k, "K"),
            ("Operational temperature", self.t_op_k, "K"),
            ("Noise PSD", self.noise_psd_dbw_hz, "dBW/Hz"),
            ("Bandwidth", self.bandwidth_hz / 1e6, "MHz"),
            ("Noise power", self.noise_power_dbw, "dBW"),
            ("Mean SNR", self.mean_snr_db, "dB"),
            ("Phase angle", self.psi_deg, "deg"),
        ];
        for (label, value, unit) in rows {
            writeln!(f, "  {label:<26}{value:>12.2} {unit}")?;
        }
        Ok(())
    }
}
