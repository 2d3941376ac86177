//! Batched forward and backward passes.
//!
//! The batch loops are arranged so that every output value is accumulated in
//! a fixed order that depends only on its own sample, which makes results
//! identical for any batch size and bit-reproducible run to run.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{Lane, RngStream};

use super::layers::softmax_cce;
use super::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub input_len: usize,
    pub filters: usize,
    pub kernel: usize,
    pub hidden: usize,
    pub classes: usize,
}

impl Architecture {
    /// 64 filters of width 5, a 128-unit hidden layer and 2 classes.
    pub fn detector(input_len: usize) -> Self {
        Self {
            input_len,
            filters: 64,
            kernel: 5,
            hidden: 128,
            classes: 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.filters == 0 || self.kernel == 0 || self.hidden == 0 {
            return Err(Error::invalid("layer sizes must be positive"));
        }
        if self.classes < 2 {
            return Err(Error::invalid("need at least two output classes"));
        }
        if self.input_len < self.kernel {
            return Err(Error::Shape {
                context: "input length vs kernel width",
                expected: self.kernel,
                actual: self.input_len,
            });
        }
        Ok(())
    }

    pub fn conv_len(&self) -> usize {
        self.input_len - self.kernel + 1
    }

    /// Length of the flattened conv output.
    pub fn flat_len(&self) -> usize {
        self.conv_len() * self.filters
    }

    pub fn block_shapes(&self) -> [Vec<usize>; 6] {
        [
            vec![self.filters, self.kernel],
            vec![self.filters],
            vec![self.flat_len(), self.hidden],
            vec![self.hidden],
            vec![self.hidden, self.classes],
            vec![self.classes],
        ]
    }

    pub fn param_count(&self) -> usize {
        self.block_shapes().iter().map(|s| s.iter().product::<usize>()).sum()
    }
}

/// All trainable tensors, in the declared block order: conv kernels, conv
/// biases, dense1 weights, dense1 biases, dense2 weights, dense2 biases.
#[derive(Debug, Clone, PartialEq)]
pub struct CnnParams {
    pub arch: Architecture,
    pub conv_kernels: Tensor,
    pub conv_bias: Tensor,
    pub dense1_w: Tensor,
    pub dense1_b: Tensor,
    pub dense2_w: Tensor,
    pub dense2_b: Tensor,
}

/// Gradients share the parameter layout.
pub type Gradients = CnnParams;

fn uniform_block<R: Rng>(shape: Vec<usize>, limit: f64, rng: &mut R) -> Tensor {
    let n: usize = shape.iter().product();
    let data = (0..n).map(|_| rng.random_range(-limit..limit)).collect();
    Tensor::new(shape, data).expect("finite uniform draws")
}

impl CnnParams {
    pub fn zeros(arch: Architecture) -> Self {
        let [k, kb, w1, b1, w2, b2] = arch.block_shapes();
        Self {
            arch,
            conv_kernels: Tensor::zeros(k),
            conv_bias: Tensor::zeros(kb),
            dense1_w: Tensor::zeros(w1),
            dense1_b: Tensor::zeros(b1),
            dense2_w: Tensor::zeros(w2),
            dense2_b: Tensor::zeros(b2),
        }
    }

    /// Weights drawn from `U(−a, a)` with `a = √(6 / (fan_in + fan_out))`
    /// per layer (conv: fan_in = width, fan_out = width·filters); biases 0.
    pub fn init_uniform(arch: Architecture, seed: u64) -> Result<Self> {
        arch.validate()?;
        let mut rng = RngStream::new(seed, 0).rng(Lane::Init);
        let limit = |fan_in: usize, fan_out: usize| (6.0 / (fan_in + fan_out) as f64).sqrt();
        let [k, kb, w1, b1, w2, b2] = arch.block_shapes();
        let conv_kernels = uniform_block(k, limit(arch.kernel, arch.kernel * arch.filters), &mut rng);
        let dense1_w = uniform_block(w1, limit(arch.flat_len(), arch.hidden), &mut rng);
        let dense2_w = uniform_block(w2, limit(arch.hidden, arch.classes), &mut rng);
        Ok(Self {
            arch,
            conv_kernels,
            conv_bias: Tensor::zeros(kb),
            dense1_w,
            dense1_b: Tensor::zeros(b1),
            dense2_w,
            dense2_b: Tensor::zeros(b2),
        })
    }

    pub fn blocks(&self) -> [&Tensor; 6] {
        [
            &self.conv_kernels,
            &self.conv_bias,
            &self.dense1_w,
            &self.dense1_b,
            &self.dense2_w,
            &self.dense2_b,
        ]
    }

    pub fn blocks_mut(&mut self) -> [&mut Tensor; 6] {
        [
            &mut self.conv_kernels,
            &mut self.conv_bias,
            &mut self.dense1_w,
            &mut self.dense1_b,
            &mut self.dense2_w,
            &mut self.dense2_b,
        ]
    }

    /// Rebuilds parameters from flat blocks in declared order.
    pub fn from_blocks(arch: Architecture, blocks: Vec<Vec<f64>>) -> Result<Self> {
        arch.validate()?;
        if blocks.len() != 6 {
            return Err(Error::Shape {
                context: "parameter block count",
                expected: 6,
                actual: blocks.len(),
            });
        }
        let mut tensors = arch
            .block_shapes()
            .into_iter()
            .zip(blocks)
            .map(|(shape, data)| Tensor::new(shape, data))
            .collect::<Result<Vec<_>>>()?
            .into_iter();
        let mut next = || tensors.next().expect("six blocks");
        Ok(Self {
            arch,
            conv_kernels: next(),
            conv_bias: next(),
            dense1_w: next(),
            dense1_b: next(),
            dense2_w: next(),
            dense2_b: next(),
        })
    }

    pub fn check_finite(&self) -> Result<()> {
        self.blocks().iter().try_for_each(|t| t.check_finite("network parameters"))
    }

    fn check_inputs(&self, xs: &[&[f64]]) -> Result<()> {
        if xs.is_empty() {
            return Err(Error::Empty("empty batch"));
        }
        for x in xs {
            if x.len() != self.arch.input_len {
                return Err(Error::Shape {
                    context: "network input length",
                    expected: self.arch.input_len,
                    actual: x.len(),
                });
            }
        }
        Ok(())
    }

    fn forward(&self, xs: &[&[f64]]) -> Result<Activations> {
        self.check_inputs(xs)?;
        let a = self.arch;
        let (m, h, c) = (a.flat_len(), a.hidden, a.classes);
        let batch = xs.len();

        let mut a0 = vec![0.0; batch * m];
        let k = self.conv_kernels.data();
        let kb = self.conv_bias.data();
        for (x, out) in xs.iter().zip(a0.chunks_exact_mut(m)) {
            for t in 0..a.conv_len() {
                let patch = &x[t..t + a.kernel];
                for f in 0..a.filters {
                    let mut acc = kb[f];
                    for (xi, w) in patch.iter().zip(&k[f * a.kernel..(f + 1) * a.kernel]) {
                        acc += xi * w;
                    }
                    out[t * a.filters + f] = if acc > 0.0 { acc } else { 0.0 };
                }
            }
        }

        let mut z1 = Vec::with_capacity(batch * h);
        for _ in 0..batch {
            z1.extend_from_slice(self.dense1_b.data());
        }
        kernels::dense1_forward(self.dense1_w.data(), &a0, &mut z1, batch, h);
        let a1: Vec<f64> = z1.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect();

        let mut logits = Vec::with_capacity(batch * c);
        for b in 0..batch {
            let mut y = self.dense2_b.data().to_vec();
            for (v, row) in a1[b * h..(b + 1) * h].iter().zip(self.dense2_w.data().chunks_exact(c)) {
                for (yo, w) in y.iter_mut().zip(row) {
                    *yo += v * w;
                }
            }
            logits.extend(y);
        }
        if logits.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("logits"));
        }
        Ok(Activations { a0, z1, a1, logits })
    }

    /// Class probabilities for each input.
    pub fn predict_proba(&self, xs: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
        let act = self.forward(xs)?;
        act.logits
            .chunks_exact(self.arch.classes)
            .map(|z| softmax_cce(z, 0).map(|(p, _)| p))
            .collect()
    }

    /// Mean cross-entropy of the batch.
    pub fn loss(&self, xs: &[&[f64]], labels: &[usize]) -> Result<f64> {
        check_labels(xs, labels, self.arch.classes)?;
        let act = self.forward(xs)?;
        let mut total = 0.0;
        for (z, &y) in act.logits.chunks_exact(self.arch.classes).zip(labels) {
            total += softmax_cce(z, y)?.1;
        }
        Ok(total / xs.len() as f64)
    }

    /// Gradients of the mean batch loss, written into `grads`.
    pub fn backward(&self, xs: &[&[f64]], labels: &[usize], grads: &mut Gradients) -> Result<BatchStats> {
        check_labels(xs, labels, self.arch.classes)?;
        if grads.arch != self.arch {
            return Err(Error::invalid("gradient buffer built for a different architecture"));
        }
        let act = self.forward(xs)?;
        let a = self.arch;
        let (m, h, c) = (a.flat_len(), a.hidden, a.classes);
        let batch = xs.len();
        let scale = 1.0 / batch as f64;

        let mut stats = BatchStats::default();
        let mut d2 = Vec::with_capacity(batch * c);
        for (z, &y) in act.logits.chunks_exact(c).zip(labels) {
            let (p, loss) = softmax_cce(z, y)?;
            stats.loss_sum += loss;
            if argmax(&p) == y {
                stats.correct += 1;
            }
            d2.extend(p.iter().enumerate().map(|(k, &pk)| (pk - if k == y { 1.0 } else { 0.0 }) * scale));
        }
        stats.count = batch;

        grads.blocks_mut().into_iter().for_each(|t| t.fill(0.0));

        // Dense 2.
        let w2 = self.dense2_w.data();
        let mut dz1 = vec![0.0; batch * h];
        for b in 0..batch {
            let d = &d2[b * c..(b + 1) * c];
            for (k, g) in grads.dense2_b.data_mut().iter_mut().enumerate() {
                *g += d[k];
            }
            let a1 = &act.a1[b * h..(b + 1) * h];
            let z1 = &act.z1[b * h..(b + 1) * h];
            let gw2 = grads.dense2_w.data_mut();
            for j in 0..h {
                for k in 0..c {
                    gw2[j * c + k] += a1[j] * d[k];
                }
                if z1[j] > 0.0 {
                    let mut s = 0.0;
                    for k in 0..c {
                        s += w2[j * c + k] * d[k];
                    }
                    dz1[b * h + j] = s;
                }
            }
        }

        // Dense 1.
        for b in 0..batch {
            for (g, d) in grads.dense1_b.data_mut().iter_mut().zip(&dz1[b * h..(b + 1) * h]) {
                *g += d;
            }
        }
        let mut da0 = vec![0.0; batch * m];
        kernels::dense1_backward(
            self.dense1_w.data(),
            grads.dense1_w.data_mut(),
            &act.a0,
            &dz1,
            &mut da0,
            batch,
            h,
        );

        // Conv. da0 is already zero wherever the ReLU was inactive.
        let gk = grads.conv_kernels.data_mut();
        let gkb = grads.conv_bias.data_mut();
        for (x, da) in xs.iter().zip(da0.chunks_exact(m)) {
            for t in 0..a.conv_len() {
                for f in 0..a.filters {
                    let d = da[t * a.filters + f];
                    if d != 0.0 {
                        gkb[f] += d;
                        for j in 0..a.kernel {
                            gk[f * a.kernel + j] += d * x[t + j];
                        }
                    }
                }
            }
        }
        Ok(stats)
    }
}

struct Activations {
    /// Post-ReLU conv output, `[batch, flat_len]`.
    a0: Vec<f64>,
    z1: Vec<f64>,
    a1: Vec<f64>,
    logits: Vec<f64>,
}

/// Loss and accuracy tallies of one batch.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BatchStats {
    pub loss_sum: f64,
    pub correct: usize,
    pub count: usize,
}

fn check_labels(xs: &[&[f64]], labels: &[usize], classes: usize) -> Result<()> {
    if xs.len() != labels.len() {
        return Err(Error::Shape {
            context: "batch labels",
            expected: xs.len(),
            actual: labels.len(),
        });
    }
    if let Some(&bad) = labels.iter().find(|&&y| y >= classes) {
        return Err(Error::Shape {
            context: "class label",
            expected: classes,
            actual: bad,
        });
    }
    Ok(())
}

/// First index of the maximum, so exact ties go to class 0.
pub(crate) fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate().skip(1) {
        if v > p[best] {
            best = i;
        }
    }
    best
}

/// The two dense-1 loops carry almost all of the arithmetic. They are
/// compiled twice, once with AVX2 enabled, and picked at runtime. Neither
/// variant uses FMA, so both produce bit-identical results.
mod kernels {
    use super::{axpy, dot};

    #[inline(always)]
    fn forward_body(w1: &[f64], a0: &[f64], z1: &mut [f64], batch: usize, h: usize) {
        let m = a0.len() / batch;
        for (i, row) in w1.chunks_exact(h).enumerate() {
            for b in 0..batch {
                let v = a0[b * m + i];
                if v != 0.0 {
                    axpy(&mut z1[b * h..(b + 1) * h], v, row);
                }
            }
        }
    }

    #[inline(always)]
    fn backward_body(w1: &[f64], gw1: &mut [f64], a0: &[f64], dz1: &[f64], da0: &mut [f64], batch: usize, h: usize) {
        let m = a0.len() / batch;
        for (i, (row, grow)) in w1.chunks_exact(h).zip(gw1.chunks_exact_mut(h)).enumerate() {
            for b in 0..batch {
                let v = a0[b * m + i];
                if v > 0.0 {
                    let d = &dz1[b * h..(b + 1) * h];
                    axpy(grow, v, d);
                    da0[b * m + i] = dot(row, d);
                }
            }
        }
    }

    #[cfg(target_arch = "x86_64")]
    #[target_feature(enable = "avx2")]
    unsafe fn forward_avx2(w1: &[f64], a0: &[f64], z1: &mut [f64], batch: usize, h: usize) {
        forward_body(w1, a0, z1, batch, h)
    }

    #[cfg(target_arch = "x86_64")]
    #[target_feature(enable = "avx2")]
    unsafe fn backward_avx2(w1: &[f64], gw1: &mut [f64], a0: &[f64], dz1: &[f64], da0: &mut [f64], batch: usize, h: usize) {
        backward_body(w1, gw1, a0, dz1, da0, batch, h)
    }

    pub(super) fn dense1_forward(w1: &[f64], a0: &[f64], z1: &mut [f64], batch: usize, h: usize) {
        #[cfg(target_arch = "x86_64")]
        if is_x86_feature_detected!("avx2") {
            // SAFETY: the CPU supports AVX2.
            return unsafe { forward_avx2(w1, a0, z1, batch, h) };
        }
        forward_body(w1, a0, z1, batch, h)
    }

    pub(super) fn dense1_backward(w1: &[f64], gw1: &mut [f64], a0: &[f64], dz1: &[f64], da0: &mut [f64], batch: usize, h: usize) {
        #[cfg(target_arch = "x86_64")]
        if is_x86_feature_detected!("avx2") {
            // SAFETY: the CPU supports AVX2.
            return unsafe { backward_avx2(w1, gw1, a0, dz1, da0, batch, h) };
        }
        backward_body(w1, gw1, a0, dz1, da0, batch, h)
    }
}

#[inline(always)]
fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Dot product with four interleaved partial sums.
#[inline(always)]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}
