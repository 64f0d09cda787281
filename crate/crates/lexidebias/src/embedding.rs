//! Dense word embedding tables in the two common text formats.
//!
//! `word2vec_text` starts with a `"<vocab_size> <dim>"` header line;
//! `glove_text` has no header and the dimensionality is inferred from the
//! first row. Rows are `<word> <v1> ... <vn>`, whitespace-delimited UTF-8.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingFormat {
    Word2vecText,
    GloveText,
}

/// An immutable vocabulary-indexed table of dense vectors.
///
/// Words keep their load order; every word appears exactly once and every
/// vector has exactly `dim` finite components.
#[derive(Debug, Clone)]
pub struct EmbeddingSet {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    // row-major, stride = dim
    data: Vec<f64>,
}

impl EmbeddingSet {
    /// Builds a set from `(word, vector)` rows. Duplicate words or
    /// wrong-length/non-finite vectors are rejected.
    pub fn from_rows(dim: usize, rows: Vec<(String, Vec<f64>)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("embedding dim must be positive".into()));
        }
        let mut words = Vec::with_capacity(rows.len());
        let mut index = HashMap::with_capacity(rows.len());
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (word, vector) in rows {
            if vector.len() != dim {
                return Err(Error::InvalidArgument(format!(
                    "vector for {word:?} has {} components, expected {dim}",
                    vector.len()
                )));
            }
            if vector.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "vector for {word:?} has non-finite components"
                )));
            }
            if index.contains_key(&word) {
                return Err(Error::InvalidArgument(format!("duplicate word {word:?}")));
            }
            index.insert(word.clone(), words.len());
            words.push(word);
            data.extend_from_slice(&vector);
        }
        Ok(EmbeddingSet { dim, words, index, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    /// Vector lookup; `None` signals absence so the caller decides between
    /// skip and fail.
    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index.get(word).map(|&i| self.row(i))
    }

    /// Lookup that fails with the missing token's name.
    pub fn require(&self, word: &str) -> Result<&[f64]> {
        self.get(word).ok_or_else(|| Error::NotFound(word.to_string()))
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.words.iter().enumerate().map(|(i, w)| (w.as_str(), self.row(i)))
    }
}

fn parse_row(path: &str, lineno: usize, line: &str, dim: usize) -> Result<(String, Vec<f64>)> {
    let mut fields = line.split_whitespace();
    let word = fields
        .next()
        .ok_or_else(|| Error::parse(path, lineno, "empty row"))?;
    let mut vector = Vec::with_capacity(dim);
    for field in fields {
        let v: f64 = field
            .parse()
            .map_err(|_| Error::parse(path, lineno, format!("non-numeric field {field:?}")))?;
        if !v.is_finite() {
            return Err(Error::parse(path, lineno, format!("non-finite value {field:?}")));
        }
        vector.push(v);
    }
    if vector.len() != dim {
        return Err(Error::parse(
            path,
            lineno,
            format!("expected {dim} vector components, found {}", vector.len()),
        ));
    }
    Ok((word.to_string(), vector))
}

/// Loads an embedding table. Duplicate words keep the first occurrence and
/// log a warning; any other malformed row is a hard parse error with its
/// line number.
pub fn load_embeddings(path: impl AsRef<Path>, format: EmbeddingFormat) -> Result<EmbeddingSet> {
    let path_str = path.as_ref().display().to_string();
    let file = File::open(path.as_ref()).map_err(|e| Error::io(&path_str, e))?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate();

    let mut header_vocab: Option<usize> = None;
    let mut dim: Option<usize> = None;
    let mut first_row: Option<(usize, String)> = None;

    match format {
        EmbeddingFormat::Word2vecText => {
            let (i, line) = lines
                .next()
                .ok_or_else(|| Error::Data(format!("{path_str}: empty embedding file")))?;
            let line = line.map_err(|e| Error::io(&path_str, e))?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(Error::parse(&path_str, i + 1, "expected header \"<vocab_size> <dim>\""));
            }
            let vocab: usize = fields[0]
                .parse()
                .map_err(|_| Error::parse(&path_str, i + 1, "non-integer vocabulary size"))?;
            let d: usize = fields[1]
                .parse()
                .map_err(|_| Error::parse(&path_str, i + 1, "non-integer dimension"))?;
            if d == 0 {
                return Err(Error::parse(&path_str, i + 1, "dimension must be positive"));
            }
            header_vocab = Some(vocab);
            dim = Some(d);
        }
        EmbeddingFormat::GloveText => {
            // Dimension is inferred from the first non-empty row.
            for (i, line) in lines.by_ref() {
                let line = line.map_err(|e| Error::io(&path_str, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let n_fields = line.split_whitespace().count();
                if n_fields < 2 {
                    return Err(Error::parse(&path_str, i + 1, "row needs a word and at least one value"));
                }
                dim = Some(n_fields - 1);
                first_row = Some((i, line));
                break;
            }
        }
    }

    let dim = dim.ok_or_else(|| Error::Data(format!("{path_str}: empty embedding file")))?;
    let mut words: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut data: Vec<f64> = Vec::new();

    let mut push = |lineno: usize, line: &str| -> Result<()> {
        if line.trim().is_empty() {
            return Ok(());
        }
        let (word, vector) = parse_row(&path_str, lineno + 1, line, dim)?;
        if index.contains_key(&word) {
            log::warn!("{path_str}:{}: duplicate word {word:?}, keeping first", lineno + 1);
            return Ok(());
        }
        index.insert(word.clone(), words.len());
        words.push(word);
        data.extend_from_slice(&vector);
        Ok(())
    };

    if let Some((i, line)) = first_row {
        push(i, &line)?;
    }
    for (i, line) in lines {
        let line = line.map_err(|e| Error::io(&path_str, e))?;
        push(i, &line)?;
    }

    if words.is_empty() {
        return Err(Error::Data(format!("{path_str}: no embedding rows")));
    }
    if let Some(declared) = header_vocab {
        if declared != words.len() {
            log::warn!(
                "{path_str}: header declares {declared} words, file holds {} after deduplication",
                words.len()
            );
        }
    }
    Ok(EmbeddingSet { dim, words, index, data })
}

/// Writes an embedding table with 6-decimal precision. A round trip through
/// [`load_embeddings`] reproduces words and vectors at that precision.
pub fn save_embeddings(
    set: &EmbeddingSet,
    path: impl AsRef<Path>,
    format: EmbeddingFormat,
) -> Result<()> {
    if set.is_empty() {
        return Err(Error::Data("refusing to save an empty embedding set".into()));
    }
    let path_str = path.as_ref().display().to_string();
    let file = File::create(path.as_ref()).map_err(|e| Error::io(&path_str, e))?;
    let mut out = BufWriter::new(file);
    let io_err = |e: std::io::Error| Error::io(&path_str, e);

    if format == EmbeddingFormat::Word2vecText {
        writeln!(out, "{} {}", set.len(), set.dim()).map_err(io_err)?;
    }
    for (word, vector) in set.iter() {
        out.write_all(word.as_bytes()).map_err(io_err)?;
        for v in vector {
            write!(out, " {v:.6}").map_err(io_err)?;
        }
        out.write_all(b"\n").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}
