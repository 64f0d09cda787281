//! Definition sentence embeddings: smoothed-inverse-frequency weighted
//! averaging plus removal of the corpus-level first principal component.
//!
//! A gloss is embedded as the frequency-weighted mean of its in-vocabulary
//! token vectors; the dominant singular direction of the stacked (not
//! centered) gloss matrix is then removed from every vector. The result has
//! the same dimensionality as the word embeddings.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use indexmap::IndexMap;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};
use crate::geometry::dot;
use crate::gloss::{select_gloss_tokens, FrequencyTable, GlossDictionary, GlossMode};

/// How a token's frequency turns into its averaging weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    /// `a / (a + p)` — the smoothed inverse frequency weight.
    Sif,
    /// `1 / p` — the literal inverse unigram probability.
    InverseProb,
}

#[derive(Debug, Clone)]
pub struct SifConfig {
    pub smoothing: f64,
    pub weight_mode: WeightMode,
    pub pc_iterations: usize,
    pub pc_tolerance: f64,
}

impl Default for SifConfig {
    fn default() -> Self {
        SifConfig {
            smoothing: 1e-3,
            weight_mode: WeightMode::Sif,
            pc_iterations: 100,
            pc_tolerance: 1e-8,
        }
    }
}

impl SifConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.smoothing > 0.0) {
            return Err(Error::InvalidArgument("SIF smoothing must be positive".into()));
        }
        if !(self.pc_tolerance > 0.0) {
            return Err(Error::InvalidArgument("PC tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Definition vectors per word, plus the removed principal component.
#[derive(Debug, Clone)]
pub struct DefinitionVectors {
    vectors: IndexMap<String, Vec<f64>>,
    principal: Vec<f64>,
}

impl DefinitionVectors {
    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(|v| v.as_slice())
    }

    pub fn principal_component(&self) -> &[f64] {
        &self.principal
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.vectors.iter().map(|(w, v)| (w.as_str(), v.as_slice()))
    }

    /// Cache format: one `#PC u1 ... un` header row, then
    /// `word<TAB>v1 ... vn` rows.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path_str = path.as_ref().display().to_string();
        let file = File::create(path.as_ref()).map_err(|e| Error::io(&path_str, e))?;
        let mut out = BufWriter::new(file);
        let io_err = |e: std::io::Error| Error::io(&path_str, e);

        out.write_all(b"#PC").map_err(io_err)?;
        for v in &self.principal {
            write!(out, " {v}").map_err(io_err)?;
        }
        out.write_all(b"\n").map_err(io_err)?;
        for (word, vector) in &self.vectors {
            out.write_all(word.as_bytes()).map_err(io_err)?;
            out.write_all(b"\t").map_err(io_err)?;
            let mut first = true;
            for v in vector {
                if !first {
                    out.write_all(b" ").map_err(io_err)?;
                }
                write!(out, "{v}").map_err(io_err)?;
                first = false;
            }
            out.write_all(b"\n").map_err(io_err)?;
        }
        out.flush().map_err(io_err)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path_str = path.as_ref().display().to_string();
        let file = File::open(path.as_ref()).map_err(|e| Error::io(&path_str, e))?;
        let reader = BufReader::new(file);
        let parse_values = |path: &str, lineno: usize, text: &str| -> Result<Vec<f64>> {
            text.split_whitespace()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| Error::parse(path, lineno, format!("non-numeric field {f:?}")))
                })
                .collect()
        };

        let mut principal: Option<Vec<f64>> = None;
        let mut vectors = IndexMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(&path_str, e))?;
            if line.trim().is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("#PC") {
                principal = Some(parse_values(&path_str, i + 1, rest)?);
                continue;
            }
            let (word, rest) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(&path_str, i + 1, "expected word<TAB>values"))?;
            vectors.insert(word.to_string(), parse_values(&path_str, i + 1, rest)?);
        }
        let principal =
            principal.ok_or_else(|| Error::Data(format!("{path_str}: missing #PC row")))?;
        Ok(DefinitionVectors { vectors, principal })
    }
}

/// Averaging weight of `token` under the configured mode.
pub fn sif_weight(freq: &FrequencyTable, token: &str, cfg: &SifConfig) -> Result<f64> {
    let p = freq
        .probability(token)
        .filter(|&p| p > 0.0)
        .ok_or_else(|| Error::Data(format!("token {token:?} has zero unigram probability")))?;
    Ok(match cfg.weight_mode {
        WeightMode::Sif => cfg.smoothing / (cfg.smoothing + p),
        WeightMode::InverseProb => 1.0 / p,
    })
}

/// Weighted mean of the in-vocabulary token vectors:
/// `(1/|kept|) * sum_t weight(t) * emb(t)`.
pub fn embed_sentence(
    tokens: &[String],
    emb: &EmbeddingSet,
    freq: &FrequencyTable,
    cfg: &SifConfig,
) -> Result<Vec<f64>> {
    let mut acc = vec![0.0; emb.dim()];
    let mut kept = 0usize;
    for token in tokens {
        let Some(vector) = emb.get(token) else { continue };
        let weight = sif_weight(freq, token, cfg)?;
        for (a, v) in acc.iter_mut().zip(vector) {
            *a += weight * v;
        }
        kept += 1;
    }
    if kept == 0 {
        return Err(Error::Data("no in-vocabulary tokens in sentence".into()));
    }
    for a in &mut acc {
        *a /= kept as f64;
    }
    Ok(acc)
}

/// Dominant right singular direction of the stacked (non-centered) vectors,
/// by power iteration on the Gram operator `v -> X^T (X v)`.
///
/// The sign is fixed so the first nonzero component is positive.
pub fn principal_component(vectors: &[Vec<f64>], cfg: &SifConfig) -> Result<Vec<f64>> {
    if vectors.len() < 2 {
        return Err(Error::Data("principal component needs at least 2 vectors".into()));
    }
    let dim = vectors[0].len();
    if vectors.iter().any(|v| v.len() != dim) {
        return Err(Error::InvalidArgument("vectors differ in length".into()));
    }
    if vectors.iter().all(|v| v.iter().all(|&x| x == 0.0)) {
        return Err(Error::Data("principal component of all-zero vectors".into()));
    }

    // Deterministic start direction; reseeded retries cover the measure-zero
    // case of starting orthogonal to the dominant direction.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5_1f);
    let mut direction: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    normalize(&mut direction)
        .ok_or_else(|| Error::Numeric("degenerate start direction".into()))?;

    for _ in 0..cfg.pc_iterations {
        let mut next = apply_gram(vectors, &direction);
        if normalize(&mut next).is_none() {
            // Start vector lay in the null space; re-draw.
            direction = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            normalize(&mut direction)
                .ok_or_else(|| Error::Numeric("degenerate start direction".into()))?;
            continue;
        }
        let drift = 1.0 - dot(&next, &direction).abs();
        direction = next;
        if drift < cfg.pc_tolerance {
            break;
        }
    }

    if let Some(&first) = direction.iter().find(|c| c.abs() > 1e-12) {
        if first < 0.0 {
            for c in &mut direction {
                *c = -*c;
            }
        }
    }
    Ok(direction)
}

fn apply_gram(vectors: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for row in vectors {
        let coeff = dot(row, v);
        for (o, r) in out.iter_mut().zip(row) {
            *o += coeff * r;
        }
    }
    out
}

fn normalize(v: &mut [f64]) -> Option<f64> {
    let n = dot(v, v).sqrt();
    if n < 1e-300 {
        return None;
    }
    for x in v.iter_mut() {
        *x /= n;
    }
    Some(n)
}

/// Embeds every word's selected gloss, extracts the corpus-level principal
/// component, and removes it from each vector in place.
pub fn build_definition_vectors(
    words: &[String],
    dict: &GlossDictionary,
    emb: &EmbeddingSet,
    freq: &FrequencyTable,
    mode: GlossMode,
    cfg: &SifConfig,
) -> Result<DefinitionVectors> {
    cfg.validate()?;
    let mut raw: Vec<Vec<f64>> = Vec::with_capacity(words.len());
    for word in words {
        let tokens = select_gloss_tokens(dict, word, mode)?;
        raw.push(embed_sentence(&tokens, emb, freq, cfg)?);
    }
    let principal = principal_component(&raw, cfg)?;

    let mut vectors = IndexMap::with_capacity(words.len());
    for (word, mut vector) in words.iter().zip(raw) {
        let coeff = dot(&vector, &principal);
        for (v, u) in vector.iter_mut().zip(&principal) {
            *v -= coeff * u;
        }
        vectors.insert(word.clone(), vector);
    }
    Ok(DefinitionVectors { vectors, principal })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::norm;
    use rand::Rng as _;

    fn table(counts: &[(&str, u64)]) -> FrequencyTable {
        // Build through the public path: a one-entry-per-token dictionary.
        use std::io::Write as _;
        let mut rows = String::new();
        for (tok, count) in counts {
            for _ in 0..*count {
                rows.push_str(&format!("head\t1\t{tok}\n"));
            }
        }
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(rows.as_bytes()).unwrap();
        let dict = crate::gloss::load_dictionary(f.path()).unwrap();
        crate::gloss::unigram_probabilities(&dict).unwrap()
    }

    #[test]
    fn sif_weight_at_p_equals_a_is_half() {
        // p = 1/1000 with a = 1e-3.
        let freq = table(&[("x", 1), ("y", 999)]);
        let cfg = SifConfig::default();
        assert!((sif_weight(&freq, "x", &cfg).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn inverse_prob_weight() {
        let freq = table(&[("x", 1), ("y", 1)]);
        let cfg = SifConfig { weight_mode: WeightMode::InverseProb, ..Default::default() };
        assert!((sif_weight(&freq, "x", &cfg).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sif_weight_decreases_in_probability() {
        // Sweep oracle over a probability grid.
        let cfg = SifConfig::default();
        let mut last = f64::INFINITY;
        for count in [1u64, 2, 5, 20, 100, 400] {
            let freq = table(&[("x", count), ("y", 1000 - count)]);
            let w = sif_weight(&freq, "x", &cfg).unwrap();
            assert!(w < last);
            last = w;
        }
    }

    #[test]
    fn unseen_token_weight_is_an_error() {
        let freq = table(&[("x", 1)]);
        assert!(sif_weight(&freq, "zzz", &SifConfig::default()).is_err());
    }

    fn toy_emb(rows: Vec<(&str, Vec<f64>)>) -> EmbeddingSet {
        EmbeddingSet::from_rows(
            rows[0].1.len(),
            rows.into_iter().map(|(w, v)| (w.to_string(), v)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_token_sentence() {
        // weight 0.5 at p = a, vector (2,0) -> (1,0)
        let emb = toy_emb(vec![("x", vec![2.0, 0.0])]);
        let freq = table(&[("x", 1), ("y", 999)]);
        let cfg = SifConfig::default();
        let s = embed_sentence(&["x".into()], &emb, &freq, &cfg).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-12);
        assert!(s[1].abs() < 1e-12);
    }

    #[test]
    fn equal_weight_tokens_average() {
        let emb = toy_emb(vec![("x", vec![2.0, 0.0]), ("y", vec![0.0, 4.0])]);
        let freq = table(&[("x", 1), ("y", 1)]);
        let cfg = SifConfig::default();
        let w = sif_weight(&freq, "x", &cfg).unwrap();
        let s = embed_sentence(&["x".into(), "y".into()], &emb, &freq, &cfg).unwrap();
        assert!((s[0] - w * 2.0 / 2.0).abs() < 1e-12);
        assert!((s[1] - w * 4.0 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn matches_direct_summation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let names = ["a", "b", "c", "d", "e"];
        let rows: Vec<(&str, Vec<f64>)> = names
            .iter()
            .map(|&n| (n, (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect()))
            .collect();
        let emb = toy_emb(rows.clone());
        let freq = table(&[("a", 3), ("b", 1), ("c", 7), ("d", 2), ("e", 4)]);
        let cfg = SifConfig::default();
        let sentence: Vec<String> = ["c", "a", "e", "a", "d"].iter().map(|s| s.to_string()).collect();
        let got = embed_sentence(&sentence, &emb, &freq, &cfg).unwrap();

        // Independent summation.
        let mut expected = vec![0.0; 6];
        for t in &sentence {
            let w = cfg.smoothing / (cfg.smoothing + freq.probability(t).unwrap());
            let v = rows.iter().find(|(n, _)| n == t).unwrap().1.clone();
            for (e, x) in expected.iter_mut().zip(v) {
                *e += w * x;
            }
        }
        for e in &mut expected {
            *e /= sentence.len() as f64;
        }
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn all_oov_sentence_is_an_error() {
        let emb = toy_emb(vec![("x", vec![1.0, 0.0])]);
        let freq = table(&[("x", 1)]);
        assert!(embed_sentence(&["zzz".into()], &emb, &freq, &SifConfig::default()).is_err());
    }

    #[test]
    fn principal_component_of_collinear_data() {
        let cfg = SifConfig::default();
        let u = principal_component(
            &[vec![2.0, 0.0], vec![3.0, 0.0], vec![-1.0, 0.0]],
            &cfg,
        )
        .unwrap();
        assert!((u[0] - 1.0).abs() < 1e-9);
        assert!(u[1].abs() < 1e-9);

        let u = principal_component(&[vec![1.0, 1.0], vec![2.0, 2.0]], &cfg).unwrap();
        let inv_sqrt2 = 1.0 / 2f64.sqrt();
        assert!((u[0] - inv_sqrt2).abs() < 1e-9);
        assert!((u[1] - inv_sqrt2).abs() < 1e-9);
    }

    #[test]
    fn principal_component_rejects_all_zero() {
        let cfg = SifConfig::default();
        assert!(principal_component(&[vec![0.0, 0.0], vec![0.0, 0.0]], &cfg).is_err());
    }

    /// Brute-force symmetric eigensolver (Jacobi rotations) used as an
    /// independent oracle for the power iteration.
    fn jacobi_top_eigenvector(mut a: Vec<Vec<f64>>) -> Vec<f64> {
        let n = a.len();
        let mut v: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        for _ in 0..200 {
            // largest off-diagonal element
            let (mut p, mut q, mut max) = (0, 1, 0.0f64);
            for i in 0..n {
                for j in (i + 1)..n {
                    if a[i][j].abs() > max {
                        max = a[i][j].abs();
                        p = i;
                        q = j;
                    }
                }
            }
            if max < 1e-14 {
                break;
            }
            let theta = 0.5 * (2.0 * a[p][q]).atan2(a[p][p] - a[q][q]);
            let (c, s) = (theta.cos(), theta.sin());
            for k in 0..n {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = c * akp + s * akq;
                a[k][q] = -s * akp + c * akq;
            }
            for k in 0..n {
                let apk = a[p][k];
                let aqk = a[q][k];
                a[p][k] = c * apk + s * aqk;
                a[q][k] = -s * apk + c * aqk;
            }
            for k in 0..n {
                let vkp = v[k][p];
                let vkq = v[k][q];
                v[k][p] = c * vkp + s * vkq;
                v[k][q] = -s * vkp + c * vkq;
            }
        }
        let top = (0..n).max_by(|&i, &j| a[i][i].partial_cmp(&a[j][j]).unwrap()).unwrap();
        (0..n).map(|i| v[i][top]).collect()
    }

    #[test]
    fn power_iteration_matches_dense_eigensolver() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let cfg = SifConfig::default();
        for _ in 0..5 {
            let vectors: Vec<Vec<f64>> = (0..20)
                .map(|_| (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            let u = principal_component(&vectors, &cfg).unwrap();

            // Gram matrix X^T X for the oracle.
            let mut gram = vec![vec![0.0; 8]; 8];
            for row in &vectors {
                for i in 0..8 {
                    for j in 0..8 {
                        gram[i][j] += row[i] * row[j];
                    }
                }
            }
            let mut oracle = jacobi_top_eigenvector(gram);
            let n = norm(&oracle);
            for x in &mut oracle {
                *x /= n;
            }
            let cos = dot(&u, &oracle).abs();
            assert!(cos >= 1.0 - 1e-6, "cosine to oracle eigenvector: {cos}");
        }
    }

    fn build_fixture() -> (Vec<String>, GlossDictionary, EmbeddingSet, FrequencyTable) {
        use std::io::Write as _;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut rows = String::new();
        let vocab_tokens = ["sun", "moon", "star", "stone", "tree"];
        rows.push_str("alpha\t1\tsun moon star\n");
        rows.push_str("beta\t1\tsun moon star\n");
        rows.push_str("gamma\t1\tstone tree\n");
        rows.push_str("delta\t1\ttree sun stone\n");
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(rows.as_bytes()).unwrap();
        let dict = crate::gloss::load_dictionary(f.path()).unwrap();
        let freq = crate::gloss::unigram_probabilities(&dict).unwrap();

        let mut emb_rows: Vec<(String, Vec<f64>)> = vocab_tokens
            .iter()
            .map(|&t| (t.to_string(), (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect()))
            .collect();
        for w in ["alpha", "beta", "gamma", "delta"] {
            emb_rows.push((w.to_string(), (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect()));
        }
        let emb = EmbeddingSet::from_rows(4, emb_rows).unwrap();
        let words: Vec<String> = ["alpha", "beta", "gamma", "delta"].iter().map(|s| s.to_string()).collect();
        (words, dict, emb, freq)
    }

    #[test]
    fn identical_glosses_give_identical_vectors() {
        let (words, dict, emb, freq) = build_fixture();
        let cfg = SifConfig::default();
        let defs = build_definition_vectors(&words, &dict, &emb, &freq, GlossMode::All, &cfg).unwrap();
        let a = defs.get("alpha").unwrap();
        let b = defs.get("beta").unwrap();
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn removal_leaves_vectors_orthogonal_to_component() {
        let (words, dict, emb, freq) = build_fixture();
        let cfg = SifConfig::default();
        let defs = build_definition_vectors(&words, &dict, &emb, &freq, GlossMode::All, &cfg).unwrap();
        let u = defs.principal_component();
        assert!((norm(u) - 1.0).abs() < 1e-9);
        for (_, s) in defs.iter() {
            assert!(dot(s, u).abs() <= 1e-6 * norm(s).max(1e-30));
        }
    }

    #[test]
    fn removal_is_idempotent() {
        let (words, dict, emb, freq) = build_fixture();
        let cfg = SifConfig::default();
        let defs = build_definition_vectors(&words, &dict, &emb, &freq, GlossMode::All, &cfg).unwrap();
        let u = defs.principal_component();
        for (_, s) in defs.iter() {
            let coeff = dot(s, u);
            let again: Vec<f64> = s.iter().zip(u).map(|(v, c)| v - coeff * c).collect();
            for (a, b) in s.iter().zip(&again) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn definition_vectors_match_embedding_dimension() {
        let (words, dict, emb, freq) = build_fixture();
        let cfg = SifConfig::default();
        let defs = build_definition_vectors(&words, &dict, &emb, &freq, GlossMode::All, &cfg).unwrap();
        for (_, s) in defs.iter() {
            assert_eq!(s.len(), emb.dim());
        }
    }

    #[test]
    fn cache_round_trip() {
        let (words, dict, emb, freq) = build_fixture();
        let cfg = SifConfig::default();
        let defs = build_definition_vectors(&words, &dict, &emb, &freq, GlossMode::All, &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("defs.tsv");
        defs.save(&path).unwrap();
        let loaded = DefinitionVectors::load(&path).unwrap();
        assert_eq!(loaded.len(), defs.len());
        for (w, s) in defs.iter() {
            let l = loaded.get(w).unwrap();
            for (a, b) in s.iter().zip(l) {
                assert_eq!(a, b); // full-precision decimal round trip
            }
        }
        for (a, b) in defs.principal_component().iter().zip(loaded.principal_component()) {
            assert_eq!(a, b);
        }
    }
}
