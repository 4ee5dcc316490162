//! Dense layers, the 1-D convolutional sequence encoder, and the policy and
//! value networks, with hand-derived backward passes.
//!
//! Parameter blocks are exposed as ordered slices so the optimizer and the
//! finite-difference checker can walk every trainable scalar without
//! knowing the network layout.

use rand::Rng;

use crate::data::EncodedBatch;
use crate::error::{Error, Result};
use crate::num::Real;

/// Affine layer: `y = W x + b`, weights stored row-major `[out][in]`.
#[derive(Clone, Debug)]
pub struct Linear<T> {
    pub weights: Vec<T>,
    pub biases: Vec<T>,
    pub in_dim: usize,
    pub out_dim: usize,
}

impl<T: Real> Linear<T> {
    pub fn random<R: Rng>(in_dim: usize, out_dim: usize, scale: T, rng: &mut R) -> Self {
        let weights = (0..in_dim * out_dim).map(|_| uniform(scale, rng)).collect();
        Linear {
            weights,
            biases: vec![T::zero(); out_dim],
            in_dim,
            out_dim,
        }
    }

    pub fn zeroed(in_dim: usize, out_dim: usize) -> Self {
        Linear {
            weights: vec![T::zero(); in_dim * out_dim],
            biases: vec![T::zero(); out_dim],
            in_dim,
            out_dim,
        }
    }

    pub fn forward(&self, x: &[T]) -> Vec<T> {
        debug_assert_eq!(x.len(), self.in_dim);
        let mut y = self.biases.clone();
        for (o, out) in y.iter_mut().enumerate() {
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            let mut acc = T::zero();
            for (w, v) in row.iter().zip(x) {
                acc += *w * *v;
            }
            *out += acc;
        }
        y
    }

    /// Accumulates weight/bias gradients for upstream gradient `dy` at input
    /// `x`, and writes the input gradient into `dx` when provided.
    pub fn backward(
        &self,
        x: &[T],
        dy: &[T],
        grads: &mut Linear<T>,
        mut dx: Option<&mut [T]>,
    ) {
        if let Some(dx) = dx.as_deref_mut() {
            for v in dx.iter_mut() {
                *v = T::zero();
            }
        }
        for (o, &g) in dy.iter().enumerate() {
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            let grow = &mut grads.weights[o * self.in_dim..(o + 1) * self.in_dim];
            grads.biases[o] += g;
            for i in 0..self.in_dim {
                grow[i] += g * x[i];
            }
            if let Some(dx) = dx.as_deref_mut() {
                for (i, w) in row.iter().enumerate() {
                    dx[i] += g * *w;
                }
            }
        }
    }
}

fn uniform<T: Real, R: Rng>(scale: T, rng: &mut R) -> T {
    (T::of(2.0) * T::of(rng.gen::<f64>()) - T::one()) * scale
}

/// Numerically stable softmax.
pub fn softmax<T: Real>(logits: &[T]) -> Vec<T> {
    let max = logits
        .iter()
        .cloned()
        .fold(T::neg_infinity(), |a, b| if b > a { b } else { a });
    let mut out: Vec<T> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: T = out.iter().cloned().sum();
    for v in &mut out {
        *v /= sum;
    }
    out
}

/// Pulls `d loss / d logits` back through the softmax given
/// `d loss / d probs`: `dz_j = p_j * (g_j - sum_t g_t p_t)`.
pub fn softmax_backward<T: Real>(probs: &[T], dprobs: &[T]) -> Vec<T> {
    let mut dot = T::zero();
    for (g, p) in dprobs.iter().zip(probs) {
        dot += *g * *p;
    }
    probs
        .iter()
        .zip(dprobs)
        .map(|(&p, &g)| p * (g - dot))
        .collect()
}

/// One-layer 1-D convolution with tanh and global average pooling.
/// Weights are stored `[c_out][c_in][width]`, inputs position-major with
/// `c_in` interleaved channels.
#[derive(Clone, Debug)]
pub struct Conv1d<T> {
    pub weights: Vec<T>,
    pub biases: Vec<T>,
    pub c_in: usize,
    pub c_out: usize,
    pub width: usize,
}

impl<T: Real> Conv1d<T> {
    pub fn random<R: Rng>(
        c_in: usize,
        c_out: usize,
        width: usize,
        scale: T,
        rng: &mut R,
    ) -> Self {
        let weights = (0..c_out * c_in * width)
            .map(|_| uniform(scale, rng))
            .collect();
        Conv1d {
            weights,
            biases: vec![T::zero(); c_out],
            c_in,
            c_out,
            width,
        }
    }

    pub fn zeroed(c_in: usize, c_out: usize, width: usize) -> Self {
        Conv1d {
            weights: vec![T::zero(); c_out * c_in * width],
            biases: vec![T::zero(); c_out],
            c_in,
            c_out,
            width,
        }
    }

    fn out_positions(&self, x_len: usize) -> usize {
        let positions = x_len / self.c_in;
        debug_assert_eq!(positions * self.c_in, x_len);
        debug_assert!(positions >= self.width);
        positions - self.width + 1
    }

    /// Returns (post-tanh activations, pooled latent).
    pub fn forward_seq(&self, x: &[T]) -> (Vec<T>, Vec<T>) {
        let out_pos = self.out_positions(x.len());
        let mut acts = vec![T::zero(); out_pos * self.c_out];
        let mut pooled = vec![T::zero(); self.c_out];
        let inv = T::one() / T::from_count(out_pos as u64);
        for pos in 0..out_pos {
            for co in 0..self.c_out {
                let mut z = self.biases[co];
                let wbase = co * self.c_in * self.width;
                for ci in 0..self.c_in {
                    let row = &self.weights[wbase + ci * self.width..wbase + (ci + 1) * self.width];
                    for (d, w) in row.iter().enumerate() {
                        z += *w * x[(pos + d) * self.c_in + ci];
                    }
                }
                let a = z.tanh();
                acts[pos * self.c_out + co] = a;
                pooled[co] += a * inv;
            }
        }
        (acts, pooled)
    }

    /// Accumulates parameter gradients for one sequence given the gradient
    /// at the pooled latent.
    pub fn backward_seq(&self, x: &[T], acts: &[T], dpooled: &[T], grads: &mut Conv1d<T>) {
        let out_pos = self.out_positions(x.len());
        let inv = T::one() / T::from_count(out_pos as u64);
        for pos in 0..out_pos {
            for co in 0..self.c_out {
                let a = acts[pos * self.c_out + co];
                let dz = dpooled[co] * inv * (T::one() - a * a);
                grads.biases[co] += dz;
                let wbase = co * self.c_in * self.width;
                for ci in 0..self.c_in {
                    let grow =
                        &mut grads.weights[wbase + ci * self.width..wbase + (ci + 1) * self.width];
                    for (d, gw) in grow.iter_mut().enumerate() {
                        *gw += dz * x[(pos + d) * self.c_in + ci];
                    }
                }
            }
        }
    }
}

/// Sequence encoder: either the raw encoded row (identity) or a
/// convolutional latent. Per-sequence latents are mean-pooled into the
/// single state vector consumed by both heads.
#[derive(Clone, Debug)]
pub enum Encoder<T> {
    Identity,
    Conv(Conv1d<T>),
}

impl<T: Real> Encoder<T> {
    /// Dimension of the pooled state for encoded rows of `cols` values.
    pub fn state_dim(&self, cols: usize) -> usize {
        match self {
            Encoder::Identity => cols,
            Encoder::Conv(conv) => conv.c_out,
        }
    }
}

/// Policy head: encoder, then two affine layers with tanh between, then
/// softmax over the `l` SNP actions.
#[derive(Clone, Debug)]
pub struct PolicyNetwork<T> {
    pub encoder: Encoder<T>,
    pub hidden: Linear<T>,
    pub output: Linear<T>,
}

/// Cached activations of one policy forward pass.
#[derive(Clone, Debug)]
pub struct PolicyTrace<T> {
    /// Per-sequence conv activations (empty for the identity encoder).
    conv_acts: Vec<Vec<T>>,
    pub state: Vec<T>,
    hidden_act: Vec<T>,
    pub probs: Vec<T>,
}

impl<T: Real> PolicyNetwork<T> {
    pub fn zeroed_like(&self) -> Self {
        PolicyNetwork {
            encoder: match &self.encoder {
                Encoder::Identity => Encoder::Identity,
                Encoder::Conv(c) => Encoder::Conv(Conv1d::zeroed(c.c_in, c.c_out, c.width)),
            },
            hidden: Linear::zeroed(self.hidden.in_dim, self.hidden.out_dim),
            output: Linear::zeroed(self.output.in_dim, self.output.out_dim),
        }
    }

    pub fn zero(&mut self) {
        for block in self.blocks_mut() {
            for v in block {
                *v = T::zero();
            }
        }
    }

    pub fn blocks(&self) -> Vec<&[T]> {
        let mut blocks: Vec<&[T]> = Vec::with_capacity(6);
        if let Encoder::Conv(c) = &self.encoder {
            blocks.push(&c.weights);
            blocks.push(&c.biases);
        }
        blocks.push(&self.hidden.weights);
        blocks.push(&self.hidden.biases);
        blocks.push(&self.output.weights);
        blocks.push(&self.output.biases);
        blocks
    }

    pub fn blocks_mut(&mut self) -> Vec<&mut [T]> {
        let mut blocks: Vec<&mut [T]> = Vec::with_capacity(6);
        if let Encoder::Conv(c) = &mut self.encoder {
            blocks.push(&mut c.weights);
            blocks.push(&mut c.biases);
        }
        blocks.push(&mut self.hidden.weights);
        blocks.push(&mut self.hidden.biases);
        blocks.push(&mut self.output.weights);
        blocks.push(&mut self.output.biases);
        blocks
    }

    /// Encodes the batch into the pooled state, runs the two-layer head and
    /// softmax. The output is a probability simplex over the SNP actions.
    pub fn forward(&self, batch: &EncodedBatch<T>) -> Result<PolicyTrace<T>> {
        let state_dim = self.encoder.state_dim(batch.cols);
        let inv_rows = T::one() / T::from_count(batch.rows as u64);
        let mut state = vec![T::zero(); state_dim];
        let mut conv_acts = Vec::new();
        match &self.encoder {
            Encoder::Identity => {
                for r in 0..batch.rows {
                    for (s, v) in state.iter_mut().zip(batch.row(r)) {
                        *s += *v * inv_rows;
                    }
                }
            }
            Encoder::Conv(conv) => {
                conv_acts.reserve(batch.rows);
                for r in 0..batch.rows {
                    let (acts, pooled) = conv.forward_seq(batch.row(r));
                    for (s, v) in state.iter_mut().zip(&pooled) {
                        *s += *v * inv_rows;
                    }
                    conv_acts.push(acts);
                }
            }
        }
        let hidden_act: Vec<T> = self.hidden.forward(&state).iter().map(|z| z.tanh()).collect();
        let logits = self.output.forward(&hidden_act);
        if logits.iter().any(|v| !v.is_finite()) {
            return Err(self.numeric_failure());
        }
        let probs = softmax(&logits);
        Ok(PolicyTrace {
            conv_acts,
            state,
            hidden_act,
            probs,
        })
    }

    /// Backward pass from `d loss / d logits`, accumulating into `grads`.
    pub fn backward(
        &self,
        batch: &EncodedBatch<T>,
        trace: &PolicyTrace<T>,
        dlogits: &[T],
        grads: &mut PolicyNetwork<T>,
    ) {
        let mut dhidden_act = vec![T::zero(); self.hidden.out_dim];
        self.output.backward(
            &trace.hidden_act,
            dlogits,
            &mut grads.output,
            Some(&mut dhidden_act),
        );
        let dhidden_pre: Vec<T> = dhidden_act
            .iter()
            .zip(&trace.hidden_act)
            .map(|(&d, &a)| d * (T::one() - a * a))
            .collect();
        let mut dstate = vec![T::zero(); self.hidden.in_dim];
        self.hidden.backward(
            &trace.state,
            &dhidden_pre,
            &mut grads.hidden,
            Some(&mut dstate),
        );
        if let (Encoder::Conv(conv), Encoder::Conv(gconv)) = (&self.encoder, &mut grads.encoder) {
            let inv_rows = T::one() / T::from_count(batch.rows as u64);
            let dpooled: Vec<T> = dstate.iter().map(|&d| d * inv_rows).collect();
            for r in 0..batch.rows {
                conv.backward_seq(batch.row(r), &trace.conv_acts[r], &dpooled, gconv);
            }
        }
    }

    fn numeric_failure(&self) -> Error {
        let snapshot: Vec<String> = self
            .blocks()
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let max = b
                    .iter()
                    .fold(T::zero(), |m, v| if v.abs() > m { v.abs() } else { m });
                format!("block {i}: {} params, max |w| = {max}", b.len())
            })
            .collect();
        Error::Numeric {
            detail: format!(
                "non-finite activation in policy forward; parameter snapshot: [{}]",
                snapshot.join("; ")
            ),
        }
    }
}

/// Baseline head: two affine layers with tanh, scalar output. Consumes the
/// same pooled state as the policy, as a detached input.
#[derive(Clone, Debug)]
pub struct ValueNetwork<T> {
    pub hidden: Linear<T>,
    pub output: Linear<T>,
}

#[derive(Clone, Debug)]
pub struct ValueTrace<T> {
    hidden_act: Vec<T>,
    pub estimate: T,
}

impl<T: Real> ValueNetwork<T> {
    pub fn new<R: Rng>(state_dim: usize, hidden_dim: usize, scale: T, rng: &mut R) -> Self {
        ValueNetwork {
            hidden: Linear::random(state_dim, hidden_dim, scale, rng),
            output: Linear::random(hidden_dim, 1, scale, rng),
        }
    }

    pub fn zeroed(state_dim: usize, hidden_dim: usize) -> Self {
        ValueNetwork {
            hidden: Linear::zeroed(state_dim, hidden_dim),
            output: Linear::zeroed(hidden_dim, 1),
        }
    }

    pub fn zeroed_like(&self) -> Self {
        Self::zeroed(self.hidden.in_dim, self.hidden.out_dim)
    }

    pub fn zero(&mut self) {
        for block in self.blocks_mut() {
            for v in block {
                *v = T::zero();
            }
        }
    }

    pub fn blocks(&self) -> Vec<&[T]> {
        vec![
            &self.hidden.weights,
            &self.hidden.biases,
            &self.output.weights,
            &self.output.biases,
        ]
    }

    pub fn blocks_mut(&mut self) -> Vec<&mut [T]> {
        vec![
            &mut self.hidden.weights,
            &mut self.hidden.biases,
            &mut self.output.weights,
            &mut self.output.biases,
        ]
    }

    pub fn forward(&self, state: &[T]) -> Result<ValueTrace<T>> {
        let hidden_act: Vec<T> = self.hidden.forward(state).iter().map(|z| z.tanh()).collect();
        let estimate = self.output.forward(&hidden_act)[0];
        if !estimate.is_finite() {
            return Err(Error::Numeric {
                detail: "non-finite baseline estimate in value forward".into(),
            });
        }
        Ok(ValueTrace {
            hidden_act,
            estimate,
        })
    }

    /// Backward from `d loss / d estimate`.
    pub fn backward(
        &self,
        state: &[T],
        trace: &ValueTrace<T>,
        destimate: T,
        grads: &mut ValueNetwork<T>,
    ) {
        let mut dhidden_act = vec![T::zero(); self.hidden.out_dim];
        self.output.backward(
            &trace.hidden_act,
            &[destimate],
            &mut grads.output,
            Some(&mut dhidden_act),
        );
        let dhidden_pre: Vec<T> = dhidden_act
            .iter()
            .zip(&trace.hidden_act)
            .map(|(&d, &a)| d * (T::one() - a * a))
            .collect();
        self.hidden
            .backward(state, &dhidden_pre, &mut grads.hidden, None);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{encode_genotypes, sample_minibatch, Encoding};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn linear_forward_matches_hand_computation() {
        let layer = Linear::<f64> {
            weights: vec![1.0, 2.0, -1.0, 0.5],
            biases: vec![0.25, -0.25],
            in_dim: 2,
            out_dim: 2,
        };
        let y = layer.forward(&[3.0, -1.0]);
        assert_eq!(y, vec![3.0 - 2.0 + 0.25, -3.0 - 0.5 - 0.25]);
    }

    #[test]
    fn softmax_of_constant_logits_is_uniform() {
        let p = softmax(&[0.0f64; 7]);
        for &v in &p {
            assert_eq!(v, p[0]);
            assert!((v - 1.0 / 7.0).abs() < 1e-15);
        }
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn softmax_is_shift_invariant_and_stable() {
        let a = softmax(&[1.0f64, 2.0, 3.0]);
        let b = softmax(&[1001.0f64, 1002.0, 1003.0]);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(b.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn zeroed_policy_outputs_exact_uniform() {
        let data = crate::data::simulate_smoke(12, 40, 9);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let batch = sample_minibatch(&data, 8, &mut rng).unwrap();
        let encoded = encode_genotypes::<f64>(&data, &batch, Encoding::RawCodes);
        let net = PolicyNetwork {
            encoder: Encoder::Identity,
            hidden: Linear::zeroed(12, 5),
            output: Linear::zeroed(5, 12),
        };
        let trace = net.forward(&encoded).unwrap();
        assert!(trace.probs.iter().all(|&p| p == trace.probs[0]));
        assert!((trace.probs[0] - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn conv_pooling_shapes_and_identity_state() {
        let data = crate::data::simulate_smoke(10, 30, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let batch = sample_minibatch(&data, 6, &mut rng).unwrap();
        let encoded = encode_genotypes::<f64>(&data, &batch, Encoding::OneHot);
        let conv = Conv1d::random(3, 4, 5, 0.1, &mut rng);
        let (acts, pooled) = conv.forward_seq(encoded.row(0));
        assert_eq!(pooled.len(), 4);
        assert_eq!(acts.len(), (10 - 5 + 1) * 4);

        // identity state is the column mean of the encoded batch
        let net = PolicyNetwork {
            encoder: Encoder::Identity,
            hidden: Linear::random(30, 4, 0.1, &mut rng),
            output: Linear::random(4, 10, 0.1, &mut rng),
        };
        let trace = net.forward(&encoded).unwrap();
        let mut first = 0.0;
        for r in 0..encoded.rows {
            first += encoded.row(r)[0];
        }
        assert!((trace.state[0] - first / encoded.rows as f64).abs() < 1e-12);
    }

    #[test]
    fn non_finite_weights_surface_as_numeric_failure() {
        let data = crate::data::simulate_smoke(4, 10, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let batch = sample_minibatch(&data, 4, &mut rng).unwrap();
        let encoded = encode_genotypes::<f64>(&data, &batch, Encoding::RawCodes);
        let mut net = PolicyNetwork {
            encoder: Encoder::Identity,
            hidden: Linear::random(4, 3, 0.1, &mut rng),
            output: Linear::random(3, 4, 0.1, &mut rng),
        };
        net.output.weights[0] = f64::NAN;
        let err = net.forward(&encoded).unwrap_err();
        assert!(matches!(err, Error::Numeric { .. }));
        assert!(err.to_string().contains("parameter snapshot"));
    }
}
