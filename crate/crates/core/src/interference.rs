//! Gated interference processes.
//!
//! Model 1 adds a constant power `I` whenever the Bernoulli gate `α` is on.
//! Model 2 scales the gated power by `|z|²` with `z ~ CN(0, 1)`, giving a
//! noise-like interferer with the same mean but an exponential spread.
//! Per sample the gate is drawn first, then (model 2 only) `z`, and `z` is
//! drawn even when the gate is off so the stream advances uniformly.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::complex_normal;
use crate::error::{Error, Result};
use crate::link_budget::from_db;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterferenceModel {
    Model1,
    Model2,
}

impl InterferenceModel {
    pub fn id(self) -> u8 {
        match self {
            InterferenceModel::Model1 => 1,
            InterferenceModel::Model2 => 2,
        }
    }
}

impl fmt::Display for InterferenceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "model{}", self.id())
    }
}

impl FromStr for InterferenceModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "1" | "model1" => Ok(InterferenceModel::Model1),
            "2" | "model2" => Ok(InterferenceModel::Model2),
            other => Err(Error::invalid(format!(
                "unknown interference model `{other}` (expected 1|2|model1|model2)"
            ))),
        }
    }
}

/// Interference model, received power `I` in dBW and gate probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferenceSpec {
    pub model: InterferenceModel,
    pub power_dbw: f64,
    pub p_alpha: f64,
}

impl InterferenceSpec {
    pub fn new(model: InterferenceModel, power_dbw: f64, p_alpha: f64) -> Result<Self> {
        let spec = Self {
            model,
            power_dbw,
            p_alpha,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_alpha) {
            return Err(Error::invalid(format!(
                "gate probability must lie in [0, 1], got {}",
                self.p_alpha
            )));
        }
        let watts = self.power_watts();
        if !(watts.is_finite() && watts > 0.0) {
            return Err(Error::invalid(format!(
                "interference power {} dBW does not convert to a positive finite power",
                self.power_dbw
            )));
        }
        Ok(())
    }

    pub fn power_watts(&self) -> f64 {
        from_db(self.power_dbw)
    }
}

/// Bernoulli(p_α) gate draw.
pub fn gate<R: Rng + ?Sized>(spec: &InterferenceSpec, rng: &mut R) -> u8 {
    // random::<f64>() lies in [0, 1), so p = 1 always gates and p = 0 never does.
    u8::from(rng.random::<f64>() < spec.p_alpha)
}

/// `I·α²`
pub fn effective_power_model1(spec: &InterferenceSpec, alpha: u8) -> f64 {
    let a = f64::from(alpha);
    spec.power_watts() * a * a
}

/// `I·|α z|²` with a fresh `z ~ CN(0, 1)`.
pub fn effective_power_model2<R: Rng + ?Sized>(spec: &InterferenceSpec, alpha: u8, rng: &mut R) -> f64 {
    let z = complex_normal(rng);
    let a = f64::from(alpha);
    spec.power_watts() * a * a * z.norm_sqr()
}

/// Draws one sample of effective interference power: the gate, then `z`
/// for model 2. Returns `(α, watts)`.
pub fn draw_effective_power<R: Rng + ?Sized>(spec: &InterferenceSpec, rng: &mut R) -> (u8, f64) {
    let alpha = gate(spec, rng);
    let watts = match spec.model {
        InterferenceModel::Model1 => effective_power_model1(spec, alpha),
        InterferenceModel::Model2 => effective_power_model2(spec, alpha, rng),
    };
    (alpha, watts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Lane, RngStream};

    fn spec(model: InterferenceModel, p: f64) -> InterferenceSpec {
        InterferenceSpec::new(model, -110.0, p).unwrap()
    }

    #[test]
    fn degenerate_gates() {
        let mut rng = RngStream::new(1, 0).rng(Lane::Interference);
        let off = spec(InterferenceModel::Model1, 0.0);
        let on = spec(InterferenceModel::Model1, 1.0);
        for _ in 0..10_000 {
            assert_eq!(gate(&off, &mut rng), 0);
            assert_eq!(gate(&on, &mut rng), 1);
        }
    }

    #[test]
    fn gate_rate_matches_probability() {
        let mut rng = RngStream::new(2, 0).rng(Lane::Interference);
        let s = spec(InterferenceModel::Model1, 0.75);
        let n = 100_000;
        let on: u32 = (0..n).map(|_| u32::from(gate(&s, &mut rng))).sum();
        let rate = f64::from(on) / f64::from(n);
        assert!((rate - 0.75).abs() < 0.005, "{rate}");
    }

    #[test]
    fn model1_power_values() {
        let s = spec(InterferenceModel::Model1, 0.5);
        assert_eq!(effective_power_model1(&s, 0), 0.0);
        assert!((effective_power_model1(&s, 1) - 1e-11).abs() < 1e-24);
    }

    #[test]
    fn model2_zero_when_gated_off() {
        let s = spec(InterferenceModel::Model2, 0.5);
        let mut rng = RngStream::new(3, 0).rng(Lane::Interference);
        for _ in 0..1000 {
            assert_eq!(effective_power_model2(&s, 0, &mut rng), 0.0);
        }
    }

    #[test]
    fn model1_takes_two_values_model2_is_continuous() {
        let mut rng = RngStream::new(4, 0).rng(Lane::Interference);
        let s1 = spec(InterferenceModel::Model1, 0.5);
        let s2 = spec(InterferenceModel::Model2, 0.5);
        for _ in 0..10_000 {
            let (a, w) = draw_effective_power(&s1, &mut rng);
            assert!(w == 0.0 || w == s1.power_watts());
            assert_eq!(a == 1, w > 0.0);
            let (a, w) = draw_effective_power(&s2, &mut rng);
            assert_eq!(a == 1, w > 0.0);
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(InterferenceSpec::new(InterferenceModel::Model1, -100.0, 1.5).is_err());
        assert!(InterferenceSpec::new(InterferenceModel::Model1, -100.0, -0.1).is_err());
        assert!(InterferenceSpec::new(InterferenceModel::Model1, f64::NAN, 0.5).is_err());
        assert!(InterferenceSpec::new(InterferenceModel::Model2, -1e6, 0.5).is_err());
    }

    #[test]
    fn model_parsing() {
        assert_eq!("1".parse::<InterferenceModel>().unwrap(), InterferenceModel::Model1);
        assert_eq!("model2".parse::<InterferenceModel>().unwrap(), InterferenceModel::Model2);
        assert!("3".parse::<InterferenceModel>().is_err());
    }
}
