//! Cislunar proximity-link simulation and interference detection.
//!
//! The crate covers the whole pipeline: a deterministic link budget with a
//! lunar-phase dependent noise temperature, Monte Carlo Rician fading with
//! two gated interference models, labeled SINR window datasets, two
//! from-scratch detectors (an entropy decision tree and a 1D CNN), and an
//! evaluation harness that writes confusion matrices and plots.

pub mod channel;
pub mod cnn;
pub mod config;
pub mod dataset;
pub mod dtree;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod interference;
pub mod link_budget;
pub mod rng;
mod svg;

pub use channel::{sample_rician, simulate_trace, simulate_window, FadingSample, LinkState, RicianFading};
pub use dataset::{Dataset, GenerationGrid, Label, SampleWindow, Standardizer, WindowMeta};
pub use error::{Error, Result};
pub use eval::{Classifier, ConfusionMatrix, Metrics};

pub use interference::{InterferenceModel, InterferenceSpec};
pub use link_budget::{AntennaSpec, BrightnessModel, LinkBudget, PhaseAngle, ScenarioConfig};
pub use rng::RngStream;
