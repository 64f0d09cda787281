//! Bias-corrected Adam.

use ndarray::{Array, Dimension};

use super::grad::Gradients;
use super::ModelParams;

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPSILON: f64 = 1e-8;

/// First/second moment accumulators, shaped like the parameters.
#[derive(Debug, Clone)]
pub struct AdamState {
    first: Gradients,
    second: Gradients,
    step: u64,
}

impl AdamState {
    pub fn new(n: usize, m: usize) -> Self {
        AdamState {
            first: Gradients::zeros(n, m),
            second: Gradients::zeros(n, m),
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

fn update_tensor<D: Dimension>(
    param: &mut Array<f64, D>,
    grad: &Array<f64, D>,
    first: &mut Array<f64, D>,
    second: &mut Array<f64, D>,
    corr1: f64,
    corr2: f64,
    lr: f64,
) {
    ndarray::Zip::from(param)
        .and(grad)
        .and(first)
        .and(second)
        .for_each(|p, &g, m1, m2| {
            *m1 = ADAM_BETA1 * *m1 + (1.0 - ADAM_BETA1) * g;
            *m2 = ADAM_BETA2 * *m2 + (1.0 - ADAM_BETA2) * g * g;
            let m_hat = *m1 / corr1;
            let v_hat = *m2 / corr2;
            *p -= lr * m_hat / (v_hat.sqrt() + ADAM_EPSILON);
        });
}

/// Standard bias-corrected Adam update, in place.
pub fn adam_step(state: &mut AdamState, params: &mut ModelParams, grads: &Gradients, lr: f64) {
    state.step += 1;
    let corr1 = 1.0 - ADAM_BETA1.powi(state.step as i32);
    let corr2 = 1.0 - ADAM_BETA2.powi(state.step as i32);
    update_tensor(&mut params.enc_w, &grads.enc_w, &mut state.first.enc_w, &mut state.second.enc_w, corr1, corr2, lr);
    update_tensor(&mut params.enc_b, &grads.enc_b, &mut state.first.enc_b, &mut state.second.enc_b, corr1, corr2, lr);
    update_tensor(&mut params.rec_w, &grads.rec_w, &mut state.first.rec_w, &mut state.second.rec_w, corr1, corr2, lr);
    update_tensor(&mut params.rec_b, &grads.rec_b, &mut state.first.rec_b, &mut state.second.rec_b, corr1, corr2, lr);
    update_tensor(&mut params.def_w, &grads.def_w, &mut state.first.def_w, &mut state.second.def_w, corr1, corr2, lr);
    update_tensor(&mut params.def_b, &grads.def_b, &mut state.first.def_b, &mut state.second.def_b, corr1, corr2, lr);
}
