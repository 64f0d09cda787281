//! Analytic gradients of the mean total loss over a mini-batch.

use ndarray::{Array1, Array2};
use rand::Rng;

use super::forward::SampleMasks;
use super::{Hyperparams, ModelParams, TrainSample};

/// Parameter-shaped gradient bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub enc_w: Array2<f64>,
    pub enc_b: Array1<f64>,
    pub rec_w: Array2<f64>,
    pub rec_b: Array1<f64>,
    pub def_w: Array2<f64>,
    pub def_b: Array1<f64>,
}

impl Gradients {
    pub fn zeros(n: usize, m: usize) -> Self {
        Gradients {
            enc_w: Array2::zeros((m, n)),
            enc_b: Array1::zeros(m),
            rec_w: Array2::zeros((n, m)),
            rec_b: Array1::zeros(n),
            def_w: Array2::zeros((n, m)),
            def_b: Array1::zeros(n),
        }
    }

    fn scale(&mut self, factor: f64) {
        self.enc_w *= factor;
        self.enc_b *= factor;
        self.rec_w *= factor;
        self.rec_b *= factor;
        self.def_w *= factor;
        self.def_b *= factor;
    }
}

/// `grad_matrix[i, j] += coeff * rows[i] * cols[j]`
fn add_scaled_outer(grad: &mut Array2<f64>, coeff: f64, rows: &Array1<f64>, cols: &Array1<f64>) {
    for (mut grad_row, &r) in grad.rows_mut().into_iter().zip(rows.iter()) {
        grad_row.scaled_add(coeff * r, cols);
    }
}

/// Exact gradient of the mean total loss over `batch`. Dropout masks are
/// drawn once per sample from `rng` and shared between the loss value and
/// its gradient; with `dropout_p == 0` no masks are drawn and the result is
/// the gradient of the evaluation-mode loss.
///
/// Returns the gradient bundle and the mean loss it differentiates.
pub fn gradients(
    params: &ModelParams,
    batch: &[TrainSample],
    hyper: &Hyperparams,
    rng: &mut impl Rng,
) -> (Gradients, f64) {
    assert!(!batch.is_empty(), "gradient of an empty batch");
    let n = params.input_dim();
    let m = params.encoded_dim();
    let mut grads = Gradients::zeros(n, m);
    let mut loss_sum = 0.0;

    for sample in batch {
        let masks = if hyper.dropout_p > 0.0 {
            Some(SampleMasks::draw(rng, hyper.dropout_p, n, m))
        } else {
            None
        };
        loss_sum += accumulate_sample(params, sample, hyper, masks.as_ref(), &mut grads);
    }

    let inv = 1.0 / batch.len() as f64;
    grads.scale(inv);
    (grads, loss_sum * inv)
}

/// Forward + backward for one sample; adds the (unscaled) gradient of its
/// total loss into `grads` and returns the loss value.
fn accumulate_sample(
    params: &ModelParams,
    sample: &TrainSample,
    hyper: &Hyperparams,
    masks: Option<&SampleMasks>,
    grads: &mut Gradients,
) -> f64 {
    // Forward, keeping intermediates. Word path:
    //   x = mask_in . w ; h = tanh(enc_w x + enc_b) ; e = mask_out . h
    let x = match masks {
        Some(mk) => &sample.word_vec * &mk.word.input,
        None => sample.word_vec.clone(),
    };
    let h = (params.enc_w.dot(&x) + &params.enc_b).mapv(f64::tanh);
    let e = match masks {
        Some(mk) => &h * &mk.word.output,
        None => h.clone(),
    };

    let rec = (params.rec_w.dot(&e) + &params.rec_b).mapv(f64::tanh);
    let rec_err = &rec - &sample.word_vec;
    let j_rec: f64 = rec_err.iter().map(|v| v * v).sum();

    let def = (params.def_w.dot(&e) + &params.def_b).mapv(f64::tanh);
    let def_err = &def - &sample.def_vec;
    let j_def: f64 = def_err.iter().map(|v| v * v).sum();

    // Residual path.
    let xp = match masks {
        Some(mk) => &sample.residual * &mk.residual.input,
        None => sample.residual.clone(),
    };
    let hp = (params.enc_w.dot(&xp) + &params.enc_b).mapv(f64::tanh);
    let ep = match masks {
        Some(mk) => &hp * &mk.residual.output,
        None => hp.clone(),
    };
    let inner = e.dot(&ep);
    let loss = hyper.alpha * j_rec + hyper.beta * j_def + hyper.gamma * inner * inner;

    // Backward. Decoder deltas: d(j)/d(z) = 2 err (1 - out^2).
    let delta_rec = ndarray::Zip::from(&rec_err).and(&rec).map_collect(|&err, &o| 2.0 * err * (1.0 - o * o));
    let delta_def = ndarray::Zip::from(&def_err).and(&def).map_collect(|&err, &o| 2.0 * err * (1.0 - o * o));

    add_scaled_outer(&mut grads.rec_w, hyper.alpha, &delta_rec, &e);
    grads.rec_b.scaled_add(hyper.alpha, &delta_rec);
    add_scaled_outer(&mut grads.def_w, hyper.beta, &delta_def, &e);
    grads.def_b.scaled_add(hyper.beta, &delta_def);

    // Into the encoder output e: decoder pullbacks plus the inner-product
    // term d(gamma q^2)/d(e) = 2 gamma q ep.
    let mut g_e = params.rec_w.t().dot(&delta_rec) * hyper.alpha;
    g_e.scaled_add(hyper.beta, &params.def_w.t().dot(&delta_def));
    g_e.scaled_add(2.0 * hyper.gamma * inner, &ep);
    let g_ep = 2.0 * hyper.gamma * inner; // times e, applied below

    // Word path through output mask and tanh.
    let delta_enc = match masks {
        Some(mk) => ndarray::Zip::from(&g_e)
            .and(&mk.word.output)
            .and(&h)
            .map_collect(|&g, &mo, &hv| g * mo * (1.0 - hv * hv)),
        None => ndarray::Zip::from(&g_e).and(&h).map_collect(|&g, &hv| g * (1.0 - hv * hv)),
    };
    add_scaled_outer(&mut grads.enc_w, 1.0, &delta_enc, &x);
    grads.enc_b += &delta_enc;

    // Residual path.
    let delta_enc_p = match masks {
        Some(mk) => ndarray::Zip::from(&e)
            .and(&mk.residual.output)
            .and(&hp)
            .map_collect(|&ev, &mo, &hv| g_ep * ev * mo * (1.0 - hv * hv)),
        None => ndarray::Zip::from(&e).and(&hp).map_collect(|&ev, &hv| g_ep * ev * (1.0 - hv * hv)),
    };
    add_scaled_outer(&mut grads.enc_w, 1.0, &delta_enc_p, &xp);
    grads.enc_b += &delta_enc_p;

    loss
}
