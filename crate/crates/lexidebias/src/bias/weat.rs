//! Word embedding association test: differential cosine association between
//! two target sets and two attribute sets, with a one-sided permutation
//! p-value and a normalised effect size.

use std::collections::HashSet;
use std::path::Path;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};
use crate::geometry::cosine;

pub const DEFAULT_MAX_EXHAUSTIVE: u64 = 100_000;
pub const DEFAULT_MC_SAMPLES: u64 = 100_000;

/// Two equal-size target word sets and two attribute word sets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeatSpec {
    pub name: String,
    pub targets_x: Vec<String>,
    pub targets_y: Vec<String>,
    pub attributes_a: Vec<String>,
    pub attributes_b: Vec<String>,
}

impl WeatSpec {
    pub fn validate(&self) -> Result<()> {
        if self.targets_x.is_empty() || self.attributes_a.is_empty() || self.attributes_b.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "WEAT spec {:?} has an empty word set",
                self.name
            )));
        }
        if self.targets_x.len() != self.targets_y.len() {
            return Err(Error::InvalidArgument(format!(
                "WEAT spec {:?}: target sets must be the same size ({} vs {})",
                self.name,
                self.targets_x.len(),
                self.targets_y.len()
            )));
        }
        for (label, set) in [
            ("targets_x", &self.targets_x),
            ("targets_y", &self.targets_y),
            ("attributes_a", &self.attributes_a),
            ("attributes_b", &self.attributes_b),
        ] {
            let unique: HashSet<&String> = set.iter().collect();
            if unique.len() != set.len() {
                return Err(Error::InvalidArgument(format!(
                    "WEAT spec {:?}: duplicate words in {label}",
                    self.name
                )));
            }
        }
        Ok(())
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path_str = path.as_ref().display().to_string();
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(&path_str, e))?;
        let spec: WeatSpec = serde_json::from_str(&text)
            .map_err(|e| Error::Data(format!("{path_str}: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PvalueMethod {
    Exhaustive,
    MonteCarlo,
}

#[derive(Debug, Clone)]
pub struct WeatResult {
    pub statistic: f64,
    pub p_value: f64,
    pub effect_size: f64,
    pub method: PvalueMethod,
    pub permutations_used: u64,
}

fn require_all<'a>(
    emb: &'a EmbeddingSet,
    words: &[String],
    context: &str,
) -> Result<Vec<&'a [f64]>> {
    let missing: Vec<String> = words.iter().filter(|w| !emb.contains(w)).cloned().collect();
    if !missing.is_empty() {
        return Err(Error::MissingWords { context: context.to_string(), words: missing });
    }
    Ok(words.iter().map(|w| emb.get(w).expect("checked")).collect())
}

fn association(target: &[f64], attrs_a: &[&[f64]], attrs_b: &[&[f64]]) -> Result<f64> {
    let mut mean_a = 0.0;
    for a in attrs_a {
        mean_a += cosine(target, a)?;
    }
    mean_a /= attrs_a.len() as f64;
    let mut mean_b = 0.0;
    for b in attrs_b {
        mean_b += cosine(target, b)?;
    }
    mean_b /= attrs_b.len() as f64;
    Ok(mean_a - mean_b)
}

/// `k(t, A, B)`: mean cosine of `t` with the `A` attributes minus the mean
/// cosine with the `B` attributes.
pub fn weat_association(
    target: &[f64],
    attributes_a: &[String],
    attributes_b: &[String],
    emb: &EmbeddingSet,
) -> Result<f64> {
    let a = require_all(emb, attributes_a, "WEAT attributes")?;
    let b = require_all(emb, attributes_b, "WEAT attributes")?;
    association(target, &a, &b)
}

/// Per-pool-member association scores; X occupies the first half.
fn pool_associations(spec: &WeatSpec, emb: &EmbeddingSet) -> Result<Vec<f64>> {
    spec.validate()?;
    let x = require_all(emb, &spec.targets_x, "WEAT targets")?;
    let y = require_all(emb, &spec.targets_y, "WEAT targets")?;
    let a = require_all(emb, &spec.attributes_a, "WEAT attributes")?;
    let b = require_all(emb, &spec.attributes_b, "WEAT attributes")?;
    x.iter().chain(y.iter()).map(|t| association(t, &a, &b)).collect()
}

fn partition_statistic(scores: &[f64], x_half: &[usize]) -> f64 {
    let in_x: HashSet<usize> = x_half.iter().copied().collect();
    let mut sum_x = 0.0;
    let mut sum_y = 0.0;
    for (i, &k) in scores.iter().enumerate() {
        if in_x.contains(&i) {
            sum_x += k;
        } else {
            sum_y += k;
        }
    }
    sum_x - sum_y
}

/// `s(X, Y, A, B)`: summed association over X minus summed association
/// over Y.
pub fn weat_statistic(spec: &WeatSpec, emb: &EmbeddingSet) -> Result<f64> {
    let scores = pool_associations(spec, emb)?;
    let half = spec.targets_x.len();
    Ok(scores[..half].iter().sum::<f64>() - scores[half..].iter().sum::<f64>())
}

fn binomial(n: u64, k: u64) -> Option<u64> {
    let k = k.min(n - k);
    let mut result: u64 = 1;
    for i in 0..k {
        result = result.checked_mul(n - i)?;
        result /= i + 1;
    }
    Some(result)
}

/// One-sided permutation p-value over all equal-size repartitions of
/// `X ∪ Y`: the fraction with a strictly greater statistic. Exhaustive when
/// `C(2N, N) <= max_exhaustive`, otherwise Monte-Carlo with `mc_samples`
/// draws from `seed`.
pub fn weat_pvalue(
    spec: &WeatSpec,
    emb: &EmbeddingSet,
    max_exhaustive: u64,
    mc_samples: u64,
    seed: u64,
) -> Result<(f64, PvalueMethod, u64)> {
    let scores = pool_associations(spec, emb)?;
    let half = spec.targets_x.len();
    let pool = scores.len();
    let original: Vec<usize> = (0..half).collect();
    let observed = partition_statistic(&scores, &original);

    let n_partitions = binomial(pool as u64, half as u64);
    if let Some(total) = n_partitions.filter(|&t| t <= max_exhaustive) {
        let mut greater = 0u64;
        for combo in (0..pool).combinations(half) {
            if partition_statistic(&scores, &combo) > observed {
                greater += 1;
            }
        }
        Ok((greater as f64 / total as f64, PvalueMethod::Exhaustive, total))
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut indices: Vec<usize> = (0..pool).collect();
        let mut greater = 0u64;
        for _ in 0..mc_samples {
            indices.shuffle(&mut rng);
            if partition_statistic(&scores, &indices[..half]) > observed {
                greater += 1;
            }
        }
        Ok((greater as f64 / mc_samples as f64, PvalueMethod::MonteCarlo, mc_samples))
    }
}

/// Normalised effect size: difference of the mean target associations over
/// the population standard deviation of all target associations. The
/// population divisor keeps the measure within `[-2, 2]`.
pub fn weat_effect_size(spec: &WeatSpec, emb: &EmbeddingSet) -> Result<f64> {
    let scores = pool_associations(spec, emb)?;
    let half = spec.targets_x.len();
    let mean_x = scores[..half].iter().sum::<f64>() / half as f64;
    let mean_y = scores[half..].iter().sum::<f64>() / (scores.len() - half) as f64;
    let mean_all = scores.iter().sum::<f64>() / scores.len() as f64;
    let variance = scores.iter().map(|k| (k - mean_all).powi(2)).sum::<f64>() / scores.len() as f64;
    if variance == 0.0 {
        return Err(Error::Data(format!(
            "WEAT spec {:?}: zero variance of association scores",
            spec.name
        )));
    }
    Ok((mean_x - mean_y) / variance.sqrt())
}

/// Statistic, p-value, and effect size in one pass.
pub fn evaluate_weat(
    spec: &WeatSpec,
    emb: &EmbeddingSet,
    max_exhaustive: u64,
    mc_samples: u64,
    seed: u64,
) -> Result<WeatResult> {
    let statistic = weat_statistic(spec, emb)?;
    let (p_value, method, permutations_used) = weat_pvalue(spec, emb, max_exhaustive, mc_samples, seed)?;
    let effect_size = weat_effect_size(spec, emb)?;
    Ok(WeatResult { statistic, p_value, effect_size, method, permutations_used })
}
