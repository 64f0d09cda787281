//! Dictionary gloss ingestion, unigram statistics, and the train/dev split
//! over the intersection of dictionary headwords and embedding vocabulary.
//!
//! Input is a gloss TSV with rows `headword<TAB>sense_rank<TAB>gloss text`.
//! Sense rank 1 is the dominant (most frequent) sense; gloss text is
//! lower-cased and whitespace-tokenized on load.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};

/// Which glosses of a headword form its definition sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlossMode {
    /// Concatenate all glosses in sense-rank order.
    All,
    /// Only the rank-1 (dominant sense) gloss.
    Dominant,
}

/// Headword -> glosses in dominance order; every gloss is a non-empty token
/// list.
#[derive(Debug, Clone, Default)]
pub struct GlossDictionary {
    entries: IndexMap<String, Vec<Vec<String>>>,
}

impl GlossDictionary {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }

    pub fn glosses(&self, word: &str) -> Option<&[Vec<String>]> {
        self.entries.get(word).map(|g| g.as_slice())
    }

    /// Headwords in file order (first occurrence).
    pub fn headwords(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|s| s.as_str())
    }
}

/// Token counts over a gloss corpus; probabilities are `count / total`.
#[derive(Debug, Clone)]
pub struct FrequencyTable {
    counts: HashMap<String, u64>,
    total: u64,
}

impl FrequencyTable {
    pub fn count(&self, token: &str) -> u64 {
        self.counts.get(token).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// `None` for tokens outside the corpus.
    pub fn probability(&self, token: &str) -> Option<f64> {
        self.counts.get(token).map(|&c| c as f64 / self.total as f64)
    }
}

/// Disjoint train/dev word lists, reproducible under `seed`.
#[derive(Debug, Clone)]
pub struct TrainSplit {
    pub train_words: Vec<String>,
    pub dev_words: Vec<String>,
    pub seed: u64,
}

/// Parses a gloss TSV. Glosses group per headword in sense-rank order;
/// rows with empty gloss text are skipped with a warning.
pub fn load_dictionary(path: impl AsRef<Path>) -> Result<GlossDictionary> {
    let path_str = path.as_ref().display().to_string();
    let file = File::open(path.as_ref()).map_err(|e| Error::io(&path_str, e))?;
    let reader = BufReader::new(file);

    let mut ranked: IndexMap<String, Vec<(u32, Vec<String>)>> = IndexMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(&path_str, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.splitn(3, '\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                &path_str,
                i + 1,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        }
        let headword = fields[0].trim();
        if headword.is_empty() {
            return Err(Error::parse(&path_str, i + 1, "empty headword"));
        }
        let rank: u32 = fields[1]
            .trim()
            .parse()
            .map_err(|_| Error::parse(&path_str, i + 1, format!("non-integer sense rank {:?}", fields[1])))?;
        if rank == 0 {
            return Err(Error::parse(&path_str, i + 1, "sense rank must be positive"));
        }
        let tokens: Vec<String> = fields[2].split_whitespace().map(|t| t.to_lowercase()).collect();
        if tokens.is_empty() {
            log::warn!("{path_str}:{}: empty gloss for {headword:?}, skipping row", i + 1);
            continue;
        }
        ranked.entry(headword.to_string()).or_default().push((rank, tokens));
    }

    let mut entries = IndexMap::with_capacity(ranked.len());
    for (headword, mut glosses) in ranked {
        glosses.sort_by_key(|(rank, _)| *rank);
        entries.insert(headword, glosses.into_iter().map(|(_, g)| g).collect());
    }
    Ok(GlossDictionary { entries })
}

/// The definition token sequence for `word` under `mode`.
pub fn select_gloss_tokens(dict: &GlossDictionary, word: &str, mode: GlossMode) -> Result<Vec<String>> {
    let glosses = dict
        .glosses(word)
        .ok_or_else(|| Error::NotFound(word.to_string()))?;
    Ok(match mode {
        GlossMode::All => glosses.iter().flatten().cloned().collect(),
        GlossMode::Dominant => glosses[0].clone(),
    })
}

/// Unigram counts over every gloss token of every entry.
pub fn unigram_probabilities(dict: &GlossDictionary) -> Result<FrequencyTable> {
    if dict.is_empty() {
        return Err(Error::Data("empty dictionary has no unigram statistics".into()));
    }
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut total = 0u64;
    for glosses in dict.entries.values() {
        for gloss in glosses {
            for token in gloss {
                *counts.entry(token.clone()).or_insert(0) += 1;
                total += 1;
            }
        }
    }
    Ok(FrequencyTable { counts, total })
}

/// Selects the usable headwords (present in the embedding vocabulary, with a
/// selected gloss that keeps at least one in-vocabulary token) and splits
/// them into train/dev by sampling `dev_size` words uniformly without
/// replacement.
pub fn build_training_set(
    emb: &EmbeddingSet,
    dict: &GlossDictionary,
    mode: GlossMode,
    dev_size: usize,
    seed: u64,
) -> Result<TrainSplit> {
    let mut usable: Vec<&str> = Vec::new();
    for headword in dict.headwords() {
        if !emb.contains(headword) {
            continue;
        }
        let tokens = select_gloss_tokens(dict, headword, mode)?;
        if tokens.iter().any(|t| emb.contains(t)) {
            usable.push(headword);
        }
    }
    if dev_size >= usable.len() {
        return Err(Error::InvalidArgument(format!(
            "dev size {dev_size} must be smaller than the {} usable headwords",
            usable.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..usable.len()).collect();
    indices.shuffle(&mut rng);
    let mut is_dev = vec![false; usable.len()];
    for &i in &indices[..dev_size] {
        is_dev[i] = true;
    }

    let mut train_words = Vec::with_capacity(usable.len() - dev_size);
    let mut dev_words = Vec::with_capacity(dev_size);
    for (i, word) in usable.iter().enumerate() {
        if is_dev[i] {
            dev_words.push(word.to_string());
        } else {
            train_words.push(word.to_string());
        }
    }
    Ok(TrainSplit { train_words, dev_words, seed })
}
