//! Single-sample layer primitives.
//!
//! Weight orientation: a dense layer with `n_in` inputs and `n_out` outputs
//! stores `W` as an `[n_in, n_out]` row-major tensor and computes
//! `y = Wᵀx + b`. Convolution kernels are `[filters, width]` and the conv
//! output is `[L − width + 1, filters]`, time-major.

use crate::error::{Error, Result};

use super::tensor::Tensor;

/// Valid cross-correlation, stride 1:
/// `out[t, f] = b[f] + Σᵢ x[t + i]·k[f, i]`.
pub fn conv1d_forward(input: &[f64], kernels: &Tensor, biases: &Tensor) -> Result<Tensor> {
    let [filters, width] = kernels.shape() else {
        return Err(Error::invalid("conv kernels must be a [filters, width] tensor"));
    };
    let (filters, width) = (*filters, *width);
    if biases.len() != filters {
        return Err(Error::Shape {
            context: "conv biases",
            expected: filters,
            actual: biases.len(),
        });
    }
    if input.len() < width {
        return Err(Error::Shape {
            context: "conv input length",
            expected: width,
            actual: input.len(),
        });
    }
    let steps = input.len() - width + 1;
    let k = kernels.data();
    let b = biases.data();
    let mut out = Vec::with_capacity(steps * filters);
    for t in 0..steps {
        let patch = &input[t..t + width];
        for f in 0..filters {
            let kf = &k[f * width..(f + 1) * width];
            let mut acc = b[f];
            for (x, w) in patch.iter().zip(kf) {
                acc += x * w;
            }
            out.push(acc);
        }
    }
    Tensor::new(vec![steps, filters], out)
}

/// `y = Wᵀx + b` with `W` of shape `[x.len(), b.len()]`.
pub fn dense_forward(x: &[f64], weights: &Tensor, bias: &Tensor) -> Result<Vec<f64>> {
    let [n_in, n_out] = weights.shape() else {
        return Err(Error::invalid("dense weights must be a [n_in, n_out] tensor"));
    };
    if *n_in != x.len() {
        return Err(Error::Shape {
            context: "dense input",
            expected: *n_in,
            actual: x.len(),
        });
    }
    if *n_out != bias.len() {
        return Err(Error::Shape {
            context: "dense bias",
            expected: *n_out,
            actual: bias.len(),
        });
    }
    let mut y = bias.data().to_vec();
    for (xi, row) in x.iter().zip(weights.data().chunks_exact(*n_out)) {
        for (yo, w) in y.iter_mut().zip(row) {
            *yo += xi * w;
        }
    }
    Ok(y)
}

pub fn relu(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect()
}

/// Gradient through ReLU; the subgradient at exactly 0 is 0.
pub fn relu_backward(pre_activation: &[f64], upstream: &[f64]) -> Vec<f64> {
    pre_activation
        .iter()
        .zip(upstream)
        .map(|(&z, &g)| if z > 0.0 { g } else { 0.0 })
        .collect()
}

/// Stable softmax and cross-entropy against class `label`.
/// Returns `(probabilities, loss)`; the logit gradient is `p − one_hot`.
pub fn softmax_cce(logits: &[f64], label: usize) -> Result<(Vec<f64>, f64)> {
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("logits"));
    }
    if label >= logits.len() {
        return Err(Error::Shape {
            context: "class label",
            expected: logits.len(),
            actual: label,
        });
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    let probs: Vec<f64> = exps.iter().map(|e| e / sum).collect();
    // log p_true = (z_true − max) − ln Σ exp(z − max)
    let loss = sum.ln() - (logits[label] - max);
    Ok((probs, loss))
}
