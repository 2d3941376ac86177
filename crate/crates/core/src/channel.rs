//! Monte Carlo sampling of the faded, noisy and interfered link.
//!
//! The recorded observable is the instantaneous SNR/SINR in dB,
//! `γ = P_r·|h|² / (N(ψ) + I_eff)`, with `N(ψ) = k·T_op(ψ)·B`. The transmit
//! symbol cancels out of the ratio and is not simulated.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::dataset::{Label, SampleWindow, WindowMeta};
use crate::error::{Error, Result};
use crate::interference::{draw_effective_power, InterferenceSpec};
use crate::link_budget::{noise_power, received_power, to_db, PhaseAngle, ScenarioConfig};
use crate::rng::{Lane, RngStream};

/// Draw from `CN(0, 1)`: independent real and imaginary parts of variance 1/2.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// One channel coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingSample {
    pub h: Complex64,
}

impl FadingSample {
    pub fn new(h: Complex64) -> Self {
        Self { h }
    }

    /// `|h|²`
    pub fn power(&self) -> f64 {
        self.h.norm_sqr()
    }
}

/// Rician law with unit mean power and a zero-phase line-of-sight term.
#[derive(Debug, Clone, Copy)]
pub struct RicianFading {
    los: f64,
    scatter: f64,
}

impl RicianFading {
    pub fn new(k_factor: f64) -> Result<Self> {
        if k_factor.is_nan() || k_factor < 0.0 {
            return Err(Error::invalid(format!(
                "Rician K-factor must be non-negative, got {k_factor}"
            )));
        }
        let (los, scatter) = if k_factor.is_infinite() {
            (1.0, 0.0)
        } else {
            ((k_factor / (k_factor + 1.0)).sqrt(), (1.0 / (k_factor + 1.0)).sqrt())
        };
        Ok(Self { los, scatter })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> FadingSample {
        let w = complex_normal(rng);
        FadingSample::new(Complex64::new(self.los, 0.0) + w * self.scatter)
    }
}

/// `h = √(K/(K+1)) + √(1/(K+1))·w`, `w ~ CN(0, 1)`.
pub fn sample_rician<R: Rng + ?Sized>(k_factor: f64, rng: &mut R) -> Result<FadingSample> {
    Ok(RicianFading::new(k_factor)?.sample(rng))
}

/// Received power and noise power of a link at a fixed phase angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkState {
    pub received_power_w: f64,
    pub noise_power_w: f64,
}

impl LinkState {
    pub fn new(cfg: &ScenarioConfig, psi: PhaseAngle) -> Result<Self> {
        Ok(Self {
            received_power_w: received_power(cfg)?,
            noise_power_w: noise_power(cfg, psi)?,
        })
    }

    pub fn sinr_linear(&self, fading_power: f64, interference_w: f64) -> f64 {
        self.received_power_w * fading_power / (self.noise_power_w + interference_w)
    }

    pub fn sinr_db(&self, fading_power: f64, interference_w: f64) -> f64 {
        to_db(self.sinr_linear(fading_power, interference_w))
    }
}

pub fn instantaneous_snr_db(cfg: &ScenarioConfig, psi: PhaseAngle, h: &FadingSample) -> Result<f64> {
    instantaneous_sinr_db(cfg, psi, h, 0.0)
}

pub fn instantaneous_sinr_db(
    cfg: &ScenarioConfig,
    psi: PhaseAngle,
    h: &FadingSample,
    interference_w: f64,
) -> Result<f64> {
    if interference_w.is_nan() || interference_w < 0.0 {
        return Err(Error::invalid(format!(
            "effective interference power must be non-negative, got {interference_w}"
        )));
    }
    Ok(LinkState::new(cfg, psi)?.sinr_db(h.power(), interference_w))
}

/// Everything drawn for one time sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleTrace {
    pub fading_power: f64,
    pub alpha: u8,
    pub interference_w: f64,
    pub sinr_db: f64,
}

/// Simulates `length` consecutive samples. Fading draws come from the
/// stream's fading lane and gate/`z` draws from its interference lane, so
/// the clean and interfered versions of a stream share the same `h`.
pub fn simulate_trace(
    cfg: &ScenarioConfig,
    psi: PhaseAngle,
    spec: Option<&InterferenceSpec>,
    length: usize,
    stream: RngStream,
) -> Result<Vec<SampleTrace>> {
    if length == 0 {
        return Err(Error::invalid("window length must be at least 1"));
    }
    if let Some(spec) = spec {
        spec.validate()?;
    }
    let link = LinkState::new(cfg, psi)?;
    let fading = RicianFading::new(cfg.rician_k)?;
    let mut fading_rng = stream.rng(Lane::Fading);
    let mut interference_rng = stream.rng(Lane::Interference);

    let trace = (0..length)
        .map(|_| {
            let fading_power = fading.sample(&mut fading_rng).power();
            let (alpha, interference_w) = match spec {
                Some(spec) => draw_effective_power(spec, &mut interference_rng),
                None => (0, 0.0),
            };
            SampleTrace {
                fading_power,
                alpha,
                interference_w,
                sinr_db: link.sinr_db(fading_power, interference_w),
            }
        })
        .collect();
    Ok(trace)
}

/// One labeled window of instantaneous SINR values in dB.
pub fn simulate_window(
    cfg: &ScenarioConfig,
    psi: PhaseAngle,
    spec: Option<&InterferenceSpec>,
    length: usize,
    stream: RngStream,
) -> Result<SampleWindow> {
    let values = simulate_trace(cfg, psi, spec, length, stream)?
        .into_iter()
        .map(|s| s.sinr_db)
        .collect();
    let label = if spec.is_some() {
        Label::Interfered
    } else {
        Label::Clean
    };
    Ok(SampleWindow {
        values,
        label,
        meta: WindowMeta {
            window_id: stream.stream_id,
            scenario: cfg.name.clone(),
            model: spec.map(|s| s.model),
            p_alpha: spec.map(|s| s.p_alpha),
            power_dbw: spec.map(|s| s.power_dbw),
            psi_deg: psi.degrees(),
            seed: stream.seed,
            stream_id: stream.stream_id,
        },
    })
}
