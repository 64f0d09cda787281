//! Forward passes and the three loss terms.

use ndarray::{Array1, ArrayView1};
use rand::Rng;

use super::{Hyperparams, ModelParams, TrainSample};

/// Inverted-dropout masks for one encoder application: entries are `0` or
/// `1/(1-p)`, so the eval-mode pass equals the expectation over masks.
#[derive(Debug, Clone)]
pub struct EncodeMasks {
    pub input: Array1<f64>,
    pub output: Array1<f64>,
}

impl EncodeMasks {
    pub fn draw(rng: &mut impl Rng, p: f64, n: usize, m: usize) -> Self {
        EncodeMasks {
            input: draw_mask(rng, p, n),
            output: draw_mask(rng, p, m),
        }
    }
}

fn draw_mask(rng: &mut impl Rng, p: f64, len: usize) -> Array1<f64> {
    let keep = 1.0 / (1.0 - p);
    Array1::from_shape_fn(len, |_| if rng.gen::<f64>() < p { 0.0 } else { keep })
}

/// Per-sample masks: the word path is shared by all three losses, the
/// residual path only feeds the orthogonality loss.
#[derive(Debug, Clone)]
pub struct SampleMasks {
    pub word: EncodeMasks,
    pub residual: EncodeMasks,
}

impl SampleMasks {
    pub fn draw(rng: &mut impl Rng, p: f64, n: usize, m: usize) -> Self {
        SampleMasks {
            word: EncodeMasks::draw(rng, p, n, m),
            residual: EncodeMasks::draw(rng, p, n, m),
        }
    }
}

/// `tanh(enc_w . drop(w) + enc_b)`, with dropout on input and output when
/// masks are given; `None` is the evaluation mode.
pub fn encode(params: &ModelParams, input: ArrayView1<f64>, masks: Option<&EncodeMasks>) -> Array1<f64> {
    let pre = match masks {
        Some(m) => params.enc_w.dot(&(&input * &m.input)),
        None => params.enc_w.dot(&input),
    };
    let mut hidden = (pre + &params.enc_b).mapv(f64::tanh);
    if let Some(m) = masks {
        hidden *= &m.output;
    }
    hidden
}

/// Reconstruction decoder: `tanh(rec_w . e + rec_b)`. No dropout on decoder
/// outputs.
pub fn decode_reconstruction(params: &ModelParams, encoded: &Array1<f64>) -> Array1<f64> {
    (params.rec_w.dot(encoded) + &params.rec_b).mapv(f64::tanh)
}

/// Definition decoder: `tanh(def_w . e + def_b)`.
pub fn decode_definition(params: &ModelParams, encoded: &Array1<f64>) -> Array1<f64> {
    (params.def_w.dot(encoded) + &params.def_b).mapv(f64::tanh)
}

fn squared_distance(a: &Array1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Reconstruction loss `||w - D_rec(E(w))||^2`.
pub fn loss_reconstruction(params: &ModelParams, sample: &TrainSample, masks: Option<&SampleMasks>) -> f64 {
    let encoded = encode(params, sample.word_vec.view(), masks.map(|m| &m.word));
    squared_distance(&decode_reconstruction(params, &encoded), sample.word_vec.view())
}

/// Dictionary-agreement loss `||s - D_def(E(w))||^2`.
pub fn loss_definition(params: &ModelParams, sample: &TrainSample, masks: Option<&SampleMasks>) -> f64 {
    let encoded = encode(params, sample.word_vec.view(), masks.map(|m| &m.word));
    squared_distance(&decode_definition(params, &encoded), sample.def_vec.view())
}

/// Bias-orthogonality loss `(E(phi)^T E(w))^2`.
pub fn loss_orthogonality(params: &ModelParams, sample: &TrainSample, masks: Option<&SampleMasks>) -> f64 {
    let encoded = encode(params, sample.word_vec.view(), masks.map(|m| &m.word));
    let residual = encode(params, sample.residual.view(), masks.map(|m| &m.residual));
    let inner = encoded.dot(&residual);
    inner * inner
}

/// `alpha * J_rec + beta * J_def + gamma * J_orth`, sharing the forward
/// passes across the three terms.
pub fn total_loss(
    params: &ModelParams,
    sample: &TrainSample,
    hyper: &Hyperparams,
    masks: Option<&SampleMasks>,
) -> f64 {
    let encoded = encode(params, sample.word_vec.view(), masks.map(|m| &m.word));
    let j_rec = squared_distance(&decode_reconstruction(params, &encoded), sample.word_vec.view());
    let j_def = squared_distance(&decode_definition(params, &encoded), sample.def_vec.view());
    let residual = encode(params, sample.residual.view(), masks.map(|m| &m.residual));
    let inner = encoded.dot(&residual);
    hyper.alpha * j_rec + hyper.beta * j_def + hyper.gamma * inner * inner
}
