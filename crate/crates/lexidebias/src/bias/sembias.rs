//! Gender-analogy classification: which of four word pairs best aligns with
//! the he-she direction.
//!
//! Each instance holds one gender-definitional pair, one stereotypical pair
//! and two gender-unrelated pairs; a debiased embedding should keep picking
//! the definitional pair while the stereotype rate falls.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};
use crate::geometry::cosine;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairLabel {
    Definition,
    Stereotype,
    None,
}

impl PairLabel {
    fn parse(text: &str) -> Option<Self> {
        match text.trim().to_ascii_lowercase().as_str() {
            "definition" => Some(PairLabel::Definition),
            "stereotype" => Some(PairLabel::Stereotype),
            "none" => Some(PairLabel::None),
            _ => None,
        }
    }
}

/// Four labelled word pairs; `subset` marks membership in the held-out
/// sub-split used to probe generalisation.
#[derive(Debug, Clone)]
pub struct SemBiasInstance {
    pub pairs: [(String, String); 4],
    pub labels: [PairLabel; 4],
    pub subset: bool,
}

impl SemBiasInstance {
    pub fn validate(&self) -> Result<()> {
        let defs = self.labels.iter().filter(|&&l| l == PairLabel::Definition).count();
        let stereos = self.labels.iter().filter(|&&l| l == PairLabel::Stereotype).count();
        if defs != 1 || stereos != 1 {
            return Err(Error::InvalidArgument(
                "instance needs exactly one definition and one stereotype pair".into(),
            ));
        }
        Ok(())
    }
}

/// TSV rows: 8 word columns (four pairs), 4 label columns, and a subset
/// flag (`1`/`0` or `true`/`false`).
pub fn load_sembias(path: impl AsRef<Path>) -> Result<Vec<SemBiasInstance>> {
    let path_str = path.as_ref().display().to_string();
    let file = File::open(path.as_ref()).map_err(|e| Error::io(&path_str, e))?;
    let mut instances = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(&path_str, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 13 {
            return Err(Error::parse(
                &path_str,
                i + 1,
                format!("expected 13 tab-separated fields, found {}", fields.len()),
            ));
        }
        let pair = |k: usize| (fields[2 * k].trim().to_string(), fields[2 * k + 1].trim().to_string());
        let mut labels = [PairLabel::None; 4];
        for (k, label) in labels.iter_mut().enumerate() {
            *label = PairLabel::parse(fields[8 + k])
                .ok_or_else(|| Error::parse(&path_str, i + 1, format!("unknown label {:?}", fields[8 + k])))?;
        }
        let subset = match fields[12].trim().to_ascii_lowercase().as_str() {
            "1" | "true" => true,
            "0" | "false" => false,
            other => return Err(Error::parse(&path_str, i + 1, format!("bad subset flag {other:?}"))),
        };
        let instance = SemBiasInstance {
            pairs: [pair(0), pair(1), pair(2), pair(3)],
            labels,
            subset,
        };
        instance
            .validate()
            .map_err(|e| Error::parse(&path_str, i + 1, e.to_string()))?;
        instances.push(instance);
    }
    if instances.is_empty() {
        return Err(Error::Data(format!("{path_str}: no instances")));
    }
    Ok(instances)
}

/// Index of the pair whose difference vector has the highest cosine with
/// `he - she`; ties go to the lowest index.
pub fn sembias_classify(instance: &SemBiasInstance, emb: &EmbeddingSet) -> Result<usize> {
    let he = emb.require("he")?;
    let she = emb.require("she")?;
    let direction: Vec<f64> = he.iter().zip(she).map(|(h, s)| h - s).collect();

    let mut best: Option<(usize, f64)> = None;
    for (k, (a, b)) in instance.pairs.iter().enumerate() {
        let av = emb.require(a)?;
        let bv = emb.require(b)?;
        let diff: Vec<f64> = av.iter().zip(bv).map(|(x, y)| x - y).collect();
        let score = cosine(&direction, &diff)?;
        if best.map_or(true, |(_, s)| score > s) {
            best = Some((k, score));
        }
    }
    Ok(best.expect("four pairs scored").0)
}

/// Selection rates per category; they sum to 1.
#[derive(Debug, Clone, Copy)]
pub struct SemBiasRates {
    pub definition: f64,
    pub stereotype: f64,
    pub none: f64,
}

pub fn sembias_accuracy(
    dataset: &[SemBiasInstance],
    emb: &EmbeddingSet,
    subset_only: bool,
) -> Result<SemBiasRates> {
    let mut counts = [0usize; 3];
    let mut total = 0usize;
    for instance in dataset {
        if subset_only && !instance.subset {
            continue;
        }
        instance.validate()?;
        let predicted = sembias_classify(instance, emb)?;
        let slot = match instance.labels[predicted] {
            PairLabel::Definition => 0,
            PairLabel::Stereotype => 1,
            PairLabel::None => 2,
        };
        counts[slot] += 1;
        total += 1;
    }
    if total == 0 {
        return Err(Error::Data("no instances selected".into()));
    }
    Ok(SemBiasRates {
        definition: counts[0] as f64 / total as f64,
        stereotype: counts[1] as f64 / total as f64,
        none: counts[2] as f64 / total as f64,
    })
}
