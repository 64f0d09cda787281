//! The debiasing model: a single-layer encoder and two single-layer
//! decoders, all with `tanh` outputs.
//!
//! The encoder maps an `n`-dimensional pre-trained vector to an
//! `m (<= n)`-dimensional debiased vector. One decoder reconstructs the
//! original vector (semantic preservation), the other predicts the
//! definition vector (dictionary agreement). A third, parameter-free
//! constraint pushes the encoding of the definition residual
//! `phi(w, s(w))` to be orthogonal to the encoding of the word itself.
//!
//! Training minimises `alpha * J_rec + beta * J_def + gamma * J_orth` with
//! Adam over shuffled mini-batches, with inverted dropout on the encoder
//! input and output.

mod adam;
mod checkpoint;
mod forward;
mod grad;
mod train;

pub use adam::{adam_step, AdamState};
pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use forward::{
    decode_definition, decode_reconstruction, encode, loss_definition, loss_orthogonality,
    loss_reconstruction, total_loss, EncodeMasks, SampleMasks,
};
pub use grad::{gradients, Gradients};
pub use train::{
    debias_vocabulary, hyper_search, pretrain_autoencoder, train, EpochStats, HyperSearchResult,
    TrainResult,
};

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::vector_rejection;

/// Encoder and decoder weights. `enc_w` is `m x n`; both decoder matrices
/// are `n x m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub enc_w: Array2<f64>,
    pub enc_b: Array1<f64>,
    pub rec_w: Array2<f64>,
    pub rec_b: Array1<f64>,
    pub def_w: Array2<f64>,
    pub def_b: Array1<f64>,
}

impl ModelParams {
    /// Input (pre-trained embedding) dimensionality `n`.
    pub fn input_dim(&self) -> usize {
        self.enc_w.ncols()
    }

    /// Encoded (debiased) dimensionality `m`.
    pub fn encoded_dim(&self) -> usize {
        self.enc_w.nrows()
    }

    pub fn all_finite(&self) -> bool {
        self.enc_w.iter().all(|v| v.is_finite())
            && self.enc_b.iter().all(|v| v.is_finite())
            && self.rec_w.iter().all(|v| v.is_finite())
            && self.rec_b.iter().all(|v| v.is_finite())
            && self.def_w.iter().all(|v| v.is_finite())
            && self.def_b.iter().all(|v| v.is_finite())
    }
}

/// Loss coefficients and optimisation settings.
///
/// `alpha + beta + gamma` must equal 1. Defaults follow the reference
/// setting: coefficients `(0.99998, 1e-5, 1e-5)`, Adam at learning rate
/// 2e-4, dropout 0.05, mini-batches of 4, and autoencoder pre-training on
/// 5000 words with batches of 512.
#[derive(Debug, Clone)]
pub struct Hyperparams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub learning_rate: f64,
    pub dropout_p: f64,
    pub batch_size: usize,
    pub pretrain_batch_size: usize,
    pub pretrain_words: usize,
    pub epochs: usize,
    pub patience: usize,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            alpha: 0.99998,
            beta: 0.00001,
            gamma: 0.00001,
            learning_rate: 0.0002,
            dropout_p: 0.05,
            batch_size: 4,
            pretrain_batch_size: 512,
            pretrain_words: 5000,
            epochs: 8,
            patience: 2,
            seed: 42,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        if self.alpha < 0.0 || self.beta < 0.0 || self.gamma < 0.0 {
            return Err(Error::InvalidArgument(
                "loss coefficients must be non-negative".into(),
            ));
        }
        let sum = self.alpha + self.beta + self.gamma;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "loss coefficients must sum to 1, got {sum}"
            )));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument("learning rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout_p) {
            return Err(Error::InvalidArgument("dropout must lie in [0, 1)".into()));
        }
        if self.batch_size == 0 || self.pretrain_batch_size == 0 {
            return Err(Error::InvalidArgument("batch size must be positive".into()));
        }
        Ok(())
    }
}

/// One training word: its pre-trained vector, definition vector, and the
/// precomputed rejection of the former from the latter.
#[derive(Debug, Clone)]
pub struct TrainSample {
    pub word: String,
    pub word_vec: Array1<f64>,
    pub def_vec: Array1<f64>,
    pub residual: Array1<f64>,
}

impl TrainSample {
    /// Computes the residual `phi(w, s)` from the clean (non-dropped)
    /// vectors once, at construction.
    pub fn new(word: impl Into<String>, word_vec: Vec<f64>, def_vec: Vec<f64>) -> Result<Self> {
        let residual = vector_rejection(&word_vec, &def_vec)?;
        Ok(TrainSample {
            word: word.into(),
            word_vec: Array1::from(word_vec),
            def_vec: Array1::from(def_vec),
            residual: Array1::from(residual),
        })
    }

    pub fn dim(&self) -> usize {
        self.word_vec.len()
    }
}

/// Total parameter count: `m*n + m` for the encoder plus `2*(n*m + n)` for
/// the decoders. At `n = m = 300` this is 270,900.
pub fn count_parameters(n: usize, m: usize) -> usize {
    m * n + m + 2 * (n * m + n)
}

/// Glorot-uniform weights (`bound = sqrt(6 / (fan_in + fan_out))`), zero
/// biases, deterministic under `seed`.
pub fn init_params(n: usize, m: usize, seed: u64) -> Result<ModelParams> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument("dimensions must be positive".into()));
    }
    if m > n {
        return Err(Error::InvalidArgument(format!(
            "encoded dimension {m} must not exceed input dimension {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bound = (6.0 / (n + m) as f64).sqrt();
    let mut matrix = |rows: usize, cols: usize| {
        Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-bound..bound))
    };
    let enc_w = matrix(m, n);
    let rec_w = matrix(n, m);
    let def_w = matrix(n, m);
    Ok(ModelParams {
        enc_w,
        enc_b: Array1::zeros(m),
        rec_w,
        rec_b: Array1::zeros(n),
        def_w,
        def_b: Array1::zeros(n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_count_examples() {
        assert_eq!(count_parameters(300, 300), 270_900);
        assert_eq!(count_parameters(1, 1), 6);
        // 8*10 + 8 + 2*(10*8 + 10) = 268
        assert_eq!(count_parameters(10, 8), 268);
    }

    #[test]
    fn init_is_deterministic() {
        let a = init_params(4, 3, 7).unwrap();
        let b = init_params(4, 3, 7).unwrap();
        assert_eq!(a, b);
        let c = init_params(4, 3, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn init_biases_are_zero() {
        let p = init_params(5, 4, 1).unwrap();
        assert!(p.enc_b.iter().all(|&v| v == 0.0));
        assert!(p.rec_b.iter().all(|&v| v == 0.0));
        assert!(p.def_b.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn init_weights_within_glorot_bound() {
        let (n, m) = (6, 4);
        let bound = (6.0 / (n + m) as f64).sqrt();
        let p = init_params(n, m, 3).unwrap();
        for w in p.enc_w.iter().chain(p.rec_w.iter()).chain(p.def_w.iter()) {
            assert!(w.abs() <= bound);
        }
    }

    #[test]
    fn init_rejects_wide_encoder() {
        assert!(init_params(3, 4, 0).is_err());
    }

    #[test]
    fn sample_residual_is_orthogonal() {
        let s = TrainSample::new("w", vec![3.0, 4.0], vec![1.0, 1.0]).unwrap();
        let dot: f64 = s.residual.iter().zip(s.def_vec.iter()).map(|(a, b)| a * b).sum();
        assert!(dot.abs() < 1e-12);
    }

    #[test]
    fn sample_rejects_zero_definition() {
        assert!(TrainSample::new("w", vec![1.0, 0.0], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn paper_coefficients_validate() {
        let hyper = Hyperparams::default();
        assert!(hyper.validate().is_ok());
        let bad = Hyperparams { alpha: 0.5, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
