//! Dictionary-guided debiasing of pre-trained word embeddings.
//!
//! Pre-trained word embeddings pick up unfair associations (gender, race,
//! age, ...) from their training corpora. Dictionary glosses, by contrast,
//! describe word meaning in a terse and largely neutral register. This crate
//! fine-tunes an embedding table so that every word vector
//!
//! 1. still reconstructs its original embedding (semantic preservation),
//! 2. agrees with a sentence embedding of its dictionary definition
//!    (dictionary agreement), and
//! 3. is orthogonal, after encoding, to the residual of the word vector that
//!    the definition does not explain (bias orthogonality).
//!
//! The model is a single-layer encoder plus two single-layer decoders, all
//! with `tanh` outputs, trained jointly with Adam on the weighted sum of the
//! three objectives. Definition sentences are embedded with
//! smoothed-inverse-frequency weighted averaging followed by removal of the
//! corpus-level first principal component ([`sif`]).
//!
//! The crate also ships the standard audit instruments: WEAT statistics with
//! permutation tests and effect sizes ([`bias::weat`]), graph label
//! propagation bias scores ([`bias::wat`]), gender-analogy classification
//! ([`bias::sembias`]), and semantic-preservation benchmarks
//! ([`semantic`]).
//!
//! Entry points:
//!
//! * [`embedding::load_embeddings`] / [`embedding::save_embeddings`] — text
//!   format I/O for embedding tables.
//! * [`gloss::load_dictionary`] and [`gloss::build_training_set`] — gloss
//!   ingestion and the train/dev split over the vocabulary intersection.
//! * [`sif::build_definition_vectors`] — definition sentence embeddings.
//! * [`model::train`] / [`model::debias_vocabulary`] — fine-tuning and
//!   vocabulary-wide encoding.

pub mod bias;
pub mod embedding;
pub mod error;
pub mod geometry;
pub mod gloss;
pub mod model;
pub mod semantic;
pub mod sif;
pub mod stats;

pub use embedding::{load_embeddings, save_embeddings, EmbeddingFormat, EmbeddingSet};
pub use error::{Error, Result};
