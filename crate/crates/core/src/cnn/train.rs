use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{Lane, RngStream};

use super::adam::{adam_step, AdamConfig, AdamState};
use super::network::{Architecture, CnnParams};

/// Training hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            batch_size: 32,
            learning_rate: 1e-3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    /// Mean training loss over the epoch's batches, weighted by batch size.
    pub loss: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub config: Option<TrainConfig>,
    pub epochs: Vec<EpochLog>,
}

/// Mini-batch Adam training on already standardized rows.
///
/// Initialization uses stream `(seed, 0)` and the shuffle of epoch `e` uses
/// stream `(seed, e)`, so the result is a pure function of the inputs.
pub fn train(
    arch: Architecture,
    rows: &[&[f64]],
    labels: &[usize],
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochLog),
) -> Result<(CnnParams, TrainingLog)> {
    if rows.is_empty() {
        return Err(Error::Empty("no training windows"));
    }
    if rows.len() != labels.len() {
        return Err(Error::Shape {
            context: "training labels",
            expected: rows.len(),
            actual: labels.len(),
        });
    }
    if config.batch_size == 0 {
        return Err(Error::invalid("batch size must be at least 1"));
    }
    if !(config.learning_rate > 0.0 && config.learning_rate.is_finite()) {
        return Err(Error::invalid(format!(
            "learning rate must be positive, got {}",
            config.learning_rate
        )));
    }
    let mut params = CnnParams::init_uniform(arch, config.seed)?;
    let mut grads = CnnParams::zeros(arch);
    let mut adam = AdamState::new(
        &params,
        AdamConfig {
            learning_rate: config.learning_rate,
            ..AdamConfig::default()
        },
    );
    let mut log = TrainingLog {
        config: Some(*config),
        epochs: Vec::with_capacity(config.epochs),
    };
    let mut order: Vec<usize> = (0..rows.len()).collect();
    for epoch in 1..=config.epochs {
        order.sort_unstable();
        order.shuffle(&mut RngStream::new(config.seed, epoch as u64).rng(Lane::Shuffle));
        let mut loss_sum = 0.0;
        let mut correct = 0;
        for chunk in order.chunks(config.batch_size) {
            let xs: Vec<&[f64]> = chunk.iter().map(|&i| rows[i]).collect();
            let ys: Vec<usize> = chunk.iter().map(|&i| labels[i]).collect();
            let stats = params.backward(&xs, &ys, &mut grads)?;
            adam_step(&mut params, &grads, &mut adam)?;
            loss_sum += stats.loss_sum;
            correct += stats.correct;
        }
        params.check_finite()?;
        let entry = EpochLog {
            epoch,
            loss: loss_sum / rows.len() as f64,
            accuracy: correct as f64 / rows.len() as f64,
        };
        on_epoch(&entry);
        log.epochs.push(entry);
    }
    Ok((params, log))
}
