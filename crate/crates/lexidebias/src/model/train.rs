//! Training loops: autoencoder pre-training, joint fine-tuning with early
//! stopping, Monte-Carlo hyperparameter search, and vocabulary-wide
//! encoding.

use ndarray::ArrayView1;
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::adam::{adam_step, AdamState};
use super::forward::{encode, total_loss};
use super::grad::gradients;
use super::{init_params, Hyperparams, ModelParams, TrainSample};
use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainResult {
    /// Snapshot with the lowest dev loss among trained epochs.
    pub params: ModelParams,
    pub history: Vec<EpochStats>,
    /// Mean dev loss of the initial parameters, before any update.
    pub initial_dev_loss: f64,
    /// 1-based epoch of the returned snapshot; 0 when no epochs ran.
    pub best_epoch: usize,
    pub best_dev_loss: f64,
}

fn mean_dev_loss(params: &ModelParams, dev: &[TrainSample], hyper: &Hyperparams) -> f64 {
    dev.iter().map(|s| total_loss(params, s, hyper, None)).sum::<f64>() / dev.len() as f64
}

/// Epoch loop over shuffled mini-batches with Adam updates; keeps the
/// snapshot with the lowest mean dev loss (dropout off) and stops after
/// `patience` consecutive non-improving epochs.
pub fn train(
    samples: &[TrainSample],
    dev: &[TrainSample],
    hyper: &Hyperparams,
    init: ModelParams,
) -> Result<TrainResult> {
    hyper.validate()?;
    if samples.is_empty() || dev.is_empty() {
        return Err(Error::Data("training needs non-empty train and dev sets".into()));
    }
    let n = init.input_dim();
    let m = init.encoded_dim();
    if samples.iter().chain(dev).any(|s| s.dim() != n) {
        return Err(Error::InvalidArgument("sample dimension does not match model".into()));
    }

    let initial_dev_loss = mean_dev_loss(&init, dev, hyper);
    let mut result = TrainResult {
        params: init.clone(),
        history: Vec::with_capacity(hyper.epochs),
        initial_dev_loss,
        best_epoch: 0,
        best_dev_loss: initial_dev_loss,
    };
    if hyper.epochs == 0 {
        return Ok(result);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut current = init;
    let mut adam = AdamState::new(n, m);
    let mut order: Vec<TrainSample> = samples.to_vec();
    let mut best: Option<(usize, f64, ModelParams)> = None;
    let mut stale_epochs = 0usize;

    for epoch in 1..=hyper.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut seen = 0usize;
        for batch in order.chunks(hyper.batch_size) {
            let (grads, batch_loss) = gradients(&current, batch, hyper, &mut rng);
            if !batch_loss.is_finite() {
                return Err(Error::Numeric(format!(
                    "non-finite training loss at epoch {epoch} after {seen} samples"
                )));
            }
            adam_step(&mut adam, &mut current, &grads, hyper.learning_rate);
            loss_sum += batch_loss * batch.len() as f64;
            seen += batch.len();
        }
        let train_loss = loss_sum / seen as f64;
        let dev_loss = mean_dev_loss(&current, dev, hyper);
        if !dev_loss.is_finite() {
            return Err(Error::Numeric(format!("non-finite dev loss at epoch {epoch}")));
        }
        result.history.push(EpochStats { epoch, train_loss, dev_loss });

        let improved = best.as_ref().map_or(true, |(_, best_dev, _)| dev_loss < *best_dev);
        if improved {
            best = Some((epoch, dev_loss, current.clone()));
            stale_epochs = 0;
        } else {
            stale_epochs += 1;
            if stale_epochs >= hyper.patience {
                break;
            }
        }
    }

    let (best_epoch, best_dev_loss, params) = best.expect("at least one epoch ran");
    result.params = params;
    result.best_epoch = best_epoch;
    result.best_dev_loss = best_dev_loss;
    Ok(result)
}

/// Pre-trains the encoder and reconstruction decoder on the reconstruction
/// loss alone, over `pretrain_words` randomly sampled vocabulary words with
/// 10% held out. Returns the snapshot with the lowest held-out
/// reconstruction loss; the definition decoder stays at its initialisation.
pub fn pretrain_autoencoder(
    emb: &EmbeddingSet,
    hyper: &Hyperparams,
    rng: &mut impl Rng,
) -> Result<TrainResult> {
    hyper.validate()?;
    // Zero vectors cannot form samples (the residual construction divides
    // by ||s||); they are excluded from the candidate pool.
    let candidates: Vec<usize> = (0..emb.len())
        .filter(|&i| emb.row(i).iter().any(|&v| v != 0.0))
        .collect();
    if candidates.len() < hyper.pretrain_words {
        return Err(Error::Data(format!(
            "vocabulary holds {} usable words, pre-training needs {}",
            candidates.len(),
            hyper.pretrain_words
        )));
    }
    if hyper.pretrain_words < 2 {
        return Err(Error::InvalidArgument("pre-training needs at least 2 words".into()));
    }

    let chosen = rand::seq::index::sample(rng, candidates.len(), hyper.pretrain_words);
    let samples: Vec<TrainSample> = chosen
        .iter()
        .map(|ci| {
            let i = candidates[ci];
            let w = emb.row(i).to_vec();
            TrainSample::new(emb.words()[i].clone(), w.clone(), w)
        })
        .collect::<Result<_>>()?;

    let dev_size = (samples.len() / 10).max(1);
    let (train_part, dev_part) = samples.split_at(samples.len() - dev_size);

    let jc_hyper = Hyperparams {
        alpha: 1.0,
        beta: 0.0,
        gamma: 0.0,
        batch_size: hyper.pretrain_batch_size,
        ..hyper.clone()
    };
    let n = emb.dim();
    let init = init_params(n, n, hyper.seed)?;
    let init_clone = init.clone();
    let mut result = train(train_part, dev_part, &jc_hyper, init)?;

    // Selection includes the untrained model: if no epoch beat it, return it.
    if result.best_dev_loss > result.initial_dev_loss {
        result.params = init_clone;
        result.best_epoch = 0;
        result.best_dev_loss = result.initial_dev_loss;
    }
    Ok(result)
}

#[derive(Debug, Clone)]
pub struct HyperSearchResult {
    pub hyper: Hyperparams,
    pub dev_loss: f64,
    pub trial: usize,
}

fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..=hi.ln())).exp()
}

/// Monte-Carlo search over the loss coefficients: per trial, the definition
/// and orthogonality coefficients are drawn log-uniformly in `[1e-5, 1]`
/// against a unit reconstruction coefficient, then the triple is normalised
/// to sum to 1. Each trial trains a short budget (at most 3 epochs) from the
/// same initialisation; the argmin dev loss wins, ties to the earlier trial.
pub fn hyper_search(
    samples: &[TrainSample],
    dev: &[TrainSample],
    base: &Hyperparams,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<HyperSearchResult> {
    if trials == 0 {
        return Err(Error::InvalidArgument("hyperparameter search needs at least 1 trial".into()));
    }
    if samples.is_empty() || dev.is_empty() {
        return Err(Error::Data("hyperparameter search needs non-empty train and dev sets".into()));
    }
    let n = samples[0].dim();
    let mut best: Option<HyperSearchResult> = None;
    for trial in 0..trials {
        let def_raw = log_uniform(rng, 1e-5, 1.0);
        let orth_raw = log_uniform(rng, 1e-5, 1.0);
        let total = 1.0 + def_raw + orth_raw;
        let candidate = Hyperparams {
            alpha: 1.0 / total,
            beta: def_raw / total,
            gamma: orth_raw / total,
            epochs: base.epochs.min(3),
            ..base.clone()
        };
        let init = init_params(n, n, base.seed)?;
        let outcome = train(samples, dev, &candidate, init)?;
        let dev_loss = outcome.best_dev_loss;
        if best.as_ref().map_or(true, |b| dev_loss < b.dev_loss) {
            best = Some(HyperSearchResult {
                hyper: Hyperparams {
                    alpha: candidate.alpha,
                    beta: candidate.beta,
                    gamma: candidate.gamma,
                    ..base.clone()
                },
                dev_loss,
                trial,
            });
        }
    }
    Ok(best.expect("at least one trial ran"))
}

/// Encodes every vocabulary word in evaluation mode. Words are processed in
/// parallel; output order equals input vocabulary order.
pub fn debias_vocabulary(params: &ModelParams, emb: &EmbeddingSet) -> Result<EmbeddingSet> {
    if params.input_dim() != emb.dim() {
        return Err(Error::InvalidArgument(format!(
            "model expects {}-dimensional input, embeddings have {}",
            params.input_dim(),
            emb.dim()
        )));
    }
    let rows: Vec<(String, Vec<f64>)> = (0..emb.len())
        .into_par_iter()
        .map(|i| {
            let encoded = encode(params, ArrayView1::from(emb.row(i)), None);
            (emb.words()[i].clone(), encoded.to_vec())
        })
        .collect();
    EmbeddingSet::from_rows(params.encoded_dim(), rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::grad::tests::random_batch;

    fn toy_embeddings(count: usize, dim: usize, seed: u64) -> EmbeddingSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<(String, Vec<f64>)> = (0..count)
            .map(|i| {
                (format!("w{i}"), (0..dim).map(|_| rng.gen_range(-0.5..0.5)).collect())
            })
            .collect();
        EmbeddingSet::from_rows(dim, rows).unwrap()
    }

    #[test]
    fn zero_epochs_returns_init_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let samples = random_batch(&mut rng, 4, 8);
        let dev = random_batch(&mut rng, 4, 4);
        let hyper = Hyperparams { epochs: 0, ..Default::default() };
        let init = init_params(4, 3, 1).unwrap();
        let result = train(&samples, &dev, &hyper, init.clone()).unwrap();
        assert_eq!(result.params, init);
        assert!(result.history.is_empty());
        assert_eq!(result.best_epoch, 0);
    }

    #[test]
    fn best_snapshot_has_minimal_recorded_dev_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let samples = random_batch(&mut rng, 5, 24);
        let dev = random_batch(&mut rng, 5, 8);
        let hyper = Hyperparams {
            epochs: 6,
            patience: 6,
            learning_rate: 0.01,
            batch_size: 4,
            ..Default::default()
        };
        let init = init_params(5, 4, 3).unwrap();
        let result = train(&samples, &dev, &hyper, init).unwrap();
        let min_dev = result.history.iter().map(|e| e.dev_loss).fold(f64::INFINITY, f64::min);
        assert!((result.best_dev_loss - min_dev).abs() < 1e-15);
        for stat in &result.history {
            assert!(result.best_dev_loss <= stat.dev_loss + 1e-15);
        }
    }

    #[test]
    fn training_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let samples = random_batch(&mut rng, 4, 16);
        let dev = random_batch(&mut rng, 4, 4);
        let hyper = Hyperparams { epochs: 3, learning_rate: 0.01, ..Default::default() };
        let init = init_params(4, 4, 5).unwrap();
        let a = train(&samples, &dev, &hyper, init.clone()).unwrap();
        let b = train(&samples, &dev, &hyper, init).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.history.len(), b.history.len());
        for (x, y) in a.history.iter().zip(&b.history) {
            assert_eq!(x.train_loss, y.train_loss);
            assert_eq!(x.dev_loss, y.dev_loss);
        }
    }

    #[test]
    fn nan_parameters_abort_with_numeric_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let samples = random_batch(&mut rng, 3, 8);
        let dev = random_batch(&mut rng, 3, 3);
        let mut init = init_params(3, 3, 7).unwrap();
        init.enc_w[[0, 0]] = f64::NAN;
        let hyper = Hyperparams { epochs: 2, ..Default::default() };
        match train(&samples, &dev, &hyper, init) {
            Err(Error::Numeric(_)) => {}
            other => panic!("expected numeric error, got {other:?}"),
        }
    }

    #[test]
    fn pretrain_improves_reconstruction_on_synthetic_set() {
        let emb = toy_embeddings(100, 8, 11);
        let hyper = Hyperparams {
            pretrain_words: 100,
            pretrain_batch_size: 16,
            epochs: 20,
            patience: 20,
            learning_rate: 0.01,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let result = pretrain_autoencoder(&emb, &hyper, &mut rng).unwrap();
        assert!(result.best_dev_loss <= result.initial_dev_loss);
        assert!(
            result.best_dev_loss <= 0.5 * result.initial_dev_loss,
            "dev reconstruction loss {} did not halve from {}",
            result.best_dev_loss,
            result.initial_dev_loss
        );
    }

    #[test]
    fn pretrain_leaves_definition_decoder_untouched() {
        let emb = toy_embeddings(60, 6, 13);
        let hyper = Hyperparams {
            pretrain_words: 50,
            pretrain_batch_size: 8,
            epochs: 3,
            learning_rate: 0.01,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let result = pretrain_autoencoder(&emb, &hyper, &mut rng).unwrap();
        let fresh = init_params(6, 6, hyper.seed).unwrap();
        assert_eq!(result.params.def_w, fresh.def_w);
        assert_eq!(result.params.def_b, fresh.def_b);
        assert_ne!(result.params.enc_w, fresh.enc_w);
    }

    #[test]
    fn pretrain_needs_enough_vocabulary() {
        let emb = toy_embeddings(10, 4, 15);
        let hyper = Hyperparams { pretrain_words: 50, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        assert!(pretrain_autoencoder(&emb, &hyper, &mut rng).is_err());
    }

    #[test]
    fn hyper_search_returns_minimum_and_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let samples = random_batch(&mut rng, 4, 12);
        let dev = random_batch(&mut rng, 4, 4);
        let base = Hyperparams { epochs: 2, learning_rate: 0.01, ..Default::default() };

        let mut search_rng = ChaCha8Rng::seed_from_u64(21);
        let single = hyper_search(&samples, &dev, &base, 1, &mut search_rng).unwrap();
        assert_eq!(single.trial, 0);

        let mut rng_a = ChaCha8Rng::seed_from_u64(22);
        let mut rng_b = ChaCha8Rng::seed_from_u64(22);
        let a = hyper_search(&samples, &dev, &base, 5, &mut rng_a).unwrap();
        let b = hyper_search(&samples, &dev, &base, 5, &mut rng_b).unwrap();
        assert_eq!(a.hyper.alpha, b.hyper.alpha);
        assert_eq!(a.hyper.beta, b.hyper.beta);
        assert_eq!(a.hyper.gamma, b.hyper.gamma);
        assert_eq!(a.trial, b.trial);

        // Re-running the winning trial's coefficients reproduces its loss.
        let winner = Hyperparams { epochs: base.epochs.min(3), ..a.hyper.clone() };
        let init = init_params(4, 4, base.seed).unwrap();
        let replay = train(&samples, &dev, &winner, init).unwrap();
        assert!((replay.best_dev_loss - a.dev_loss).abs() < 1e-12);

        let sum = a.hyper.alpha + a.hyper.beta + a.hyper.gamma;
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn debias_covers_whole_vocabulary_in_order() {
        let emb = toy_embeddings(40, 5, 30);
        let params = init_params(5, 5, 31).unwrap();
        let out = debias_vocabulary(&params, &emb).unwrap();
        assert_eq!(out.words(), emb.words());
        assert_eq!(out.dim(), 5);
        for (_, v) in out.iter() {
            assert!(v.iter().all(|x| x.abs() < 1.0));
        }
    }

    #[test]
    fn debias_output_matches_eval_encode() {
        let emb = toy_embeddings(10, 4, 32);
        let params = init_params(4, 3, 33).unwrap();
        let out = debias_vocabulary(&params, &emb).unwrap();
        for (word, vector) in emb.iter() {
            let expected = encode(&params, ArrayView1::from(vector), None);
            let got = out.get(word).unwrap();
            assert_eq!(got, expected.as_slice().unwrap());
        }
    }
}
