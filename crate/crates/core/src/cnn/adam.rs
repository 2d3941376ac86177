use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::network::{CnnParams, Gradients};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First and second moment estimates for every parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub step: u64,
    pub first_moment: CnnParams,
    pub second_moment: CnnParams,
}

impl AdamState {
    pub fn new(params: &CnnParams, config: AdamConfig) -> Self {
        Self {
            config,
            step: 0,
            first_moment: CnnParams::zeros(params.arch),
            second_moment: CnnParams::zeros(params.arch),
        }
    }
}

/// One bias-corrected Adam update, in place.
pub fn adam_step(params: &mut CnnParams, grads: &Gradients, state: &mut AdamState) -> Result<()> {
    if grads.arch != params.arch || state.first_moment.arch != params.arch {
        return Err(Error::invalid("Adam state, gradients and parameters disagree on shape"));
    }
    state.step += 1;
    let AdamConfig {
        learning_rate,
        beta1,
        beta2,
        epsilon,
    } = state.config;
    let t = state.step as i32;
    let correction1 = 1.0 - beta1.powi(t);
    let correction2 = 1.0 - beta2.powi(t);

    let blocks = params
        .blocks_mut()
        .into_iter()
        .zip(grads.blocks())
        .zip(state.first_moment.blocks_mut())
        .zip(state.second_moment.blocks_mut());
    for (((p, g), m), v) in blocks {
        let iter = p
            .data_mut()
            .iter_mut()
            .zip(g.data())
            .zip(m.data_mut().iter_mut())
            .zip(v.data_mut().iter_mut());
        for (((p, &g), m), v) in iter {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / correction1;
            let v_hat = *v / correction2;
            *p -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnn::network::Architecture;

    fn arch() -> Architecture {
        Architecture {
            input_len: 8,
            filters: 2,
            kernel: 3,
            hidden: 3,
            classes: 2,
        }
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut params = CnnParams::init_uniform(arch(), 1).unwrap();
        let before = params.clone();
        let mut grads = CnnParams::zeros(arch());
        for (i, t) in grads.blocks_mut().into_iter().enumerate() {
            let g = if i % 2 == 0 { 0.37 } else { -2.5 };
            t.fill(g);
        }
        let mut state = AdamState::new(&params, AdamConfig::default());
        adam_step(&mut params, &grads, &mut state).unwrap();
        for ((after, before), g) in params.blocks().iter().zip(before.blocks()).zip(grads.blocks()) {
            for ((a, b), g) in after.data().iter().zip(before.data()).zip(g.data()) {
                let delta = a - b;
                // |ĝ|/(√v̂ + ε) = |g|/(|g| + ε)
                let expected = 1e-3 * g.abs() / (g.abs() + 1e-8);
                assert!((delta.abs() - expected).abs() < 1e-12);
                assert_eq!(delta.signum(), -g.signum());
            }
        }
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut params = CnnParams::init_uniform(arch(), 2).unwrap();
        let before = params.clone();
        let grads = CnnParams::zeros(arch());
        let mut state = AdamState::new(&params, AdamConfig::default());
        for _ in 0..3 {
            adam_step(&mut params, &grads, &mut state).unwrap();
        }
        assert_eq!(params, before);
        assert_eq!(state.step, 3);
    }

    #[test]
    fn deterministic() {
        let start = CnnParams::init_uniform(arch(), 3).unwrap();
        let grads = CnnParams::init_uniform(arch(), 4).unwrap();
        let run = || {
            let mut p = start.clone();
            let mut s = AdamState::new(&p, AdamConfig::default());
            adam_step(&mut p, &grads, &mut s).unwrap();
            adam_step(&mut p, &grads, &mut s).unwrap();
            (p, s)
        };
        assert_eq!(run(), run());
    }
}
