//! Semantic-preservation benchmarks: similarity correlation, CosAdd
//! analogies, and the direction-similarity table behind the occupation-word
//! analysis.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};
use crate::geometry::cosine;
use crate::stats::spearman;

#[derive(Debug, Clone)]
pub struct SimilarityPair {
    pub word1: String,
    pub word2: String,
    pub human_score: f64,
}

/// TSV rows: `word1<TAB>word2<TAB>score`.
pub fn load_similarity_pairs(path: impl AsRef<Path>) -> Result<Vec<SimilarityPair>> {
    let path_str = path.as_ref().display().to_string();
    let file = File::open(path.as_ref()).map_err(|e| Error::io(&path_str, e))?;
    let mut pairs = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(&path_str, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(&path_str, i + 1, "expected word1<TAB>word2<TAB>score"));
        }
        let human_score: f64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| Error::parse(&path_str, i + 1, format!("non-numeric score {:?}", fields[2])))?;
        if !human_score.is_finite() {
            return Err(Error::parse(&path_str, i + 1, "non-finite score"));
        }
        pairs.push(SimilarityPair {
            word1: fields[0].trim().to_string(),
            word2: fields[1].trim().to_string(),
            human_score,
        });
    }
    if pairs.is_empty() {
        return Err(Error::Data(format!("{path_str}: no similarity pairs")));
    }
    Ok(pairs)
}

/// Spearman correlation between embedding cosines and human ratings over
/// the covered pairs, plus the covered fraction.
pub fn similarity_benchmark(emb: &EmbeddingSet, pairs: &[SimilarityPair]) -> Result<(f64, f64)> {
    let mut cosines = Vec::new();
    let mut human = Vec::new();
    for pair in pairs {
        let (Some(a), Some(b)) = (emb.get(&pair.word1), emb.get(&pair.word2)) else {
            continue;
        };
        cosines.push(cosine(a, b)?);
        human.push(pair.human_score);
    }
    if cosines.len() < 3 {
        return Err(Error::Data(format!(
            "only {} of {} similarity pairs covered, need at least 3",
            cosines.len(),
            pairs.len()
        )));
    }
    let r = spearman(&cosines, &human)?;
    Ok((r, cosines.len() as f64 / pairs.len() as f64))
}

#[derive(Debug, Clone)]
pub struct AnalogyQuestion {
    pub a: String,
    pub b: String,
    pub c: String,
    pub d: String,
    pub section: String,
}

/// Google analogy format: lines of four words; section headers start with
/// `": "`.
pub fn load_analogies(path: impl AsRef<Path>) -> Result<Vec<AnalogyQuestion>> {
    let path_str = path.as_ref().display().to_string();
    let file = File::open(path.as_ref()).map_err(|e| Error::io(&path_str, e))?;
    let mut questions = Vec::new();
    let mut section = String::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(&path_str, e))?;
        if line.trim().is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix(": ") {
            section = name.trim().to_string();
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        if words.len() != 4 {
            return Err(Error::parse(&path_str, i + 1, format!("expected 4 words, found {}", words.len())));
        }
        let unique: std::collections::HashSet<&str> = words.iter().copied().collect();
        if unique.len() != 4 {
            return Err(Error::parse(&path_str, i + 1, "analogy words must be distinct"));
        }
        questions.push(AnalogyQuestion {
            a: words[0].to_string(),
            b: words[1].to_string(),
            c: words[2].to_string(),
            d: words[3].to_string(),
            section: section.clone(),
        });
    }
    if questions.is_empty() {
        return Err(Error::Data(format!("{path_str}: no analogy questions")));
    }
    Ok(questions)
}

/// `argmax_d cosine(b - a + c, d)` over the vocabulary. Inputs are excluded
/// from the candidates when `exclude_inputs` is set; exact score ties go to
/// the lexicographically smallest word.
pub fn cosadd(
    emb: &EmbeddingSet,
    a: &str,
    b: &str,
    c: &str,
    exclude_inputs: bool,
) -> Result<String> {
    let av = emb.require(a)?;
    let bv = emb.require(b)?;
    let cv = emb.require(c)?;
    let query: Vec<f64> = bv
        .iter()
        .zip(av)
        .zip(cv)
        .map(|((bi, ai), ci)| bi - ai + ci)
        .collect();
    if query.iter().all(|&x| x == 0.0) {
        return Err(Error::Data(format!("degenerate analogy query ({a}, {b}, {c})")));
    }

    let mut best: Option<(f64, &str)> = None;
    for (word, vector) in emb.iter() {
        if exclude_inputs && (word == a || word == b || word == c) {
            continue;
        }
        if vector.iter().all(|&x| x == 0.0) {
            continue; // cosine undefined; a zero vector can never win
        }
        let score = cosine(&query, vector)?;
        let better = match best {
            None => true,
            Some((s, w)) => score > s || (score == s && word < w),
        };
        if better {
            best = Some((score, word));
        }
    }
    best.map(|(_, w)| w.to_string())
        .ok_or_else(|| Error::Data("no candidate words for analogy".into()))
}

/// Fraction of covered questions (all four words in the vocabulary) whose
/// CosAdd prediction equals `d`, plus the covered fraction.
pub fn analogy_accuracy(emb: &EmbeddingSet, questions: &[AnalogyQuestion]) -> Result<(f64, f64)> {
    let mut covered = 0usize;
    let mut correct = 0usize;
    for q in questions {
        if !(emb.contains(&q.a) && emb.contains(&q.b) && emb.contains(&q.c) && emb.contains(&q.d)) {
            continue;
        }
        covered += 1;
        if cosadd(emb, &q.a, &q.b, &q.c, true)? == q.d {
            correct += 1;
        }
    }
    if covered == 0 {
        return Err(Error::Data("no analogy question is fully covered".into()));
    }
    Ok((correct as f64 / covered as f64, covered as f64 / questions.len() as f64))
}

/// One row per covered word: its cosine against each `pos - neg` direction.
#[derive(Debug, Clone)]
pub struct DirectionTable {
    pub directions: Vec<(String, String)>,
    pub rows: Vec<(String, Vec<f64>)>,
}

impl DirectionTable {
    /// CSV with header `word,<pos>-<neg>,...`.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        write!(out, "word")?;
        for (pos, neg) in &self.directions {
            write!(out, ",{pos}-{neg}")?;
        }
        writeln!(out)?;
        for (word, values) in &self.rows {
            write!(out, "{word}")?;
            for v in values {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Cosine of every listed word against each direction `emb(pos) - emb(neg)`.
/// Missing direction endpoints are an error; missing table words are
/// skipped with a warning.
pub fn direction_similarity_table(
    emb: &EmbeddingSet,
    words: &[String],
    directions: &[(String, String)],
) -> Result<DirectionTable> {
    if directions.is_empty() {
        return Err(Error::InvalidArgument("need at least one direction".into()));
    }
    let mut axes = Vec::with_capacity(directions.len());
    for (pos, neg) in directions {
        let pv = emb.require(pos)?;
        let nv = emb.require(neg)?;
        let axis: Vec<f64> = pv.iter().zip(nv).map(|(p, n)| p - n).collect();
        if axis.iter().all(|&x| x == 0.0) {
            return Err(Error::Data(format!("direction {pos}-{neg} is the zero vector")));
        }
        axes.push(axis);
    }
    let mut rows = Vec::new();
    for word in words {
        let Some(vector) = emb.get(word) else {
            log::warn!("direction table: {word:?} missing from embeddings, skipped");
            continue;
        };
        let values: Vec<f64> = axes
            .iter()
            .map(|axis| cosine(vector, axis))
            .collect::<Result<_>>()?;
        rows.push((word.clone(), values));
    }
    Ok(DirectionTable { directions: directions.to_vec(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn emb_from(rows: Vec<(&str, Vec<f64>)>) -> EmbeddingSet {
        EmbeddingSet::from_rows(
            rows[0].1.len(),
            rows.into_iter().map(|(w, v)| (w.to_string(), v)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn benchmark_with_rank_equal_scores_is_one() {
        let emb = emb_from(vec![
            ("a", vec![1.0, 0.0]),
            ("b", vec![1.0, 0.1]),
            ("c", vec![1.0, 0.5]),
            ("d", vec![0.0, 1.0]),
        ]);
        // Human scores ranked like the cosines of (a,b) > (a,c) > (a,d).
        let pairs = vec![
            SimilarityPair { word1: "a".into(), word2: "b".into(), human_score: 9.0 },
            SimilarityPair { word1: "a".into(), word2: "c".into(), human_score: 7.0 },
            SimilarityPair { word1: "a".into(), word2: "d".into(), human_score: 1.0 },
        ];
        let (r, coverage) = similarity_benchmark(&emb, &pairs).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        assert_eq!(coverage, 1.0);
    }

    #[test]
    fn oov_pairs_lower_coverage() {
        let emb = emb_from(vec![
            ("a", vec![1.0, 0.0]),
            ("b", vec![1.0, 0.1]),
            ("c", vec![1.0, 0.5]),
            ("d", vec![0.0, 1.0]),
        ]);
        let pairs = vec![
            SimilarityPair { word1: "a".into(), word2: "b".into(), human_score: 9.0 },
            SimilarityPair { word1: "a".into(), word2: "c".into(), human_score: 7.0 },
            SimilarityPair { word1: "a".into(), word2: "d".into(), human_score: 1.0 },
            SimilarityPair { word1: "a".into(), word2: "zzz".into(), human_score: 5.0 },
        ];
        let (_, coverage) = similarity_benchmark(&emb, &pairs).unwrap();
        assert_eq!(coverage, 0.75);
    }

    #[test]
    fn too_few_covered_pairs_is_an_error() {
        let emb = emb_from(vec![("a", vec![1.0, 0.0]), ("b", vec![0.0, 1.0])]);
        let pairs = vec![
            SimilarityPair { word1: "a".into(), word2: "b".into(), human_score: 1.0 },
            SimilarityPair { word1: "a".into(), word2: "x".into(), human_score: 2.0 },
        ];
        assert!(similarity_benchmark(&emb, &pairs).is_err());
    }

    fn analogy_toy() -> EmbeddingSet {
        emb_from(vec![
            ("man", vec![1.0, 0.0]),
            ("woman", vec![0.0, 1.0]),
            ("king", vec![1.0, 1.0]),
            ("queen", vec![0.0, 2.0]),
            ("prince", vec![1.0, 2.0]),
        ])
    }

    #[test]
    fn cosadd_toy_example() {
        // woman - man + king = (0, 2), closest to queen among {queen, prince}.
        let emb = analogy_toy();
        assert_eq!(cosadd(&emb, "man", "woman", "king", true).unwrap(), "queen");
    }

    #[test]
    fn cosadd_degenerate_query_returns_nearest_neighbor() {
        // b == a: the query reduces to c, so the prediction is the nearest
        // neighbor of c with c itself excluded.
        let emb = emb_from(vec![
            ("a", vec![1.0, 0.0]),
            ("c", vec![0.0, 1.0]),
            ("near_c", vec![0.1, 2.0]),
            ("far", vec![1.0, -1.0]),
        ]);
        assert_eq!(cosadd(&emb, "a", "a", "c", true).unwrap(), "near_c");
    }

    #[test]
    fn cosadd_matches_exhaustive_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let words: Vec<String> = (0..60).map(|i| format!("w{i:02}")).collect();
        let rows: Vec<(String, Vec<f64>)> = words
            .iter()
            .map(|w| (w.clone(), (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect()))
            .collect();
        let emb = EmbeddingSet::from_rows(6, rows.clone()).unwrap();
        for _ in 0..50 {
            let pick = |rng: &mut ChaCha8Rng| words[rng.gen_range(0..words.len())].clone();
            let (a, b, c) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
            let got = cosadd(&emb, &a, &b, &c, true).unwrap();

            // Brute force over the stored rows.
            let find = |w: &str| rows.iter().find(|(n, _)| n == w).unwrap().1.clone();
            let (av, bv, cv) = (find(&a), find(&b), find(&c));
            let query: Vec<f64> = (0..6).map(|i| bv[i] - av[i] + cv[i]).collect();
            let mut best: Option<(f64, &str)> = None;
            for (w, v) in &rows {
                if w == &a || w == &b || w == &c {
                    continue;
                }
                let score = cosine(&query, v).unwrap();
                let better = best.map_or(true, |(s, bw)| score > s || (score == s && w.as_str() < bw));
                if better {
                    best = Some((score, w));
                }
            }
            assert_eq!(got, best.unwrap().1);
        }
    }

    #[test]
    fn cosadd_scale_invariance() {
        let emb = analogy_toy();
        let scaled = emb_from(vec![
            ("man", vec![3.0, 0.0]),
            ("woman", vec![0.0, 3.0]),
            ("king", vec![3.0, 3.0]),
            ("queen", vec![0.0, 6.0]),
            ("prince", vec![3.0, 6.0]),
        ]);
        assert_eq!(
            cosadd(&emb, "man", "woman", "king", true).unwrap(),
            cosadd(&scaled, "man", "woman", "king", true).unwrap()
        );
    }

    #[test]
    fn analogy_accuracy_on_compositional_toy() {
        let emb = analogy_toy();
        let questions = vec![
            AnalogyQuestion {
                a: "man".into(),
                b: "woman".into(),
                c: "king".into(),
                d: "queen".into(),
                section: "gender".into(),
            },
            AnalogyQuestion {
                a: "woman".into(),
                b: "man".into(),
                c: "queen".into(),
                d: "king".into(),
                section: "gender".into(),
            },
        ];
        let (accuracy, coverage) = analogy_accuracy(&emb, &questions).unwrap();
        assert_eq!(accuracy, 1.0);
        assert_eq!(coverage, 1.0);
    }

    #[test]
    fn uncovered_questions_count_against_coverage_only() {
        let emb = analogy_toy();
        let questions = vec![
            AnalogyQuestion {
                a: "man".into(),
                b: "woman".into(),
                c: "king".into(),
                d: "queen".into(),
                section: "s".into(),
            },
            AnalogyQuestion {
                a: "man".into(),
                b: "woman".into(),
                c: "king".into(),
                d: "empress".into(),
                section: "s".into(),
            },
        ];
        let (accuracy, coverage) = analogy_accuracy(&emb, &questions).unwrap();
        assert_eq!(accuracy, 1.0);
        assert_eq!(coverage, 0.5);
    }

    #[test]
    fn analogy_file_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("analogies.txt");
        std::fs::write(&path, ": capital-common\nathens greece oslo norway\n: gram1\nman woman king queen\n").unwrap();
        let questions = load_analogies(&path).unwrap();
        assert_eq!(questions.len(), 2);
        assert_eq!(questions[0].section, "capital-common");
        assert_eq!(questions[1].section, "gram1");
        assert_eq!(questions[1].d, "queen");

        std::fs::write(&path, "man woman king\n").unwrap();
        assert!(load_analogies(&path).is_err());
        std::fs::write(&path, "man woman king king\n").unwrap();
        assert!(load_analogies(&path).is_err());
    }

    #[test]
    fn direction_table_hand_cases() {
        let emb = emb_from(vec![
            ("he", vec![1.0, 0.0, 0.0]),
            ("she", vec![0.0, 1.0, 0.0]),
            ("orthogonal", vec![0.0, 0.0, 1.0]),
            ("doctor", vec![0.5, 0.1, 0.2]),
        ]);
        let words = vec!["orthogonal".to_string(), "he".to_string(), "ghost".to_string()];
        let directions = vec![("he".to_string(), "she".to_string())];
        let table = direction_similarity_table(&emb, &words, &directions).unwrap();
        // ghost is skipped
        assert_eq!(table.rows.len(), 2);
        assert!(table.rows[0].1[0].abs() < 1e-12);
        // the positive endpoint itself projects positively
        assert!(table.rows[1].1[0] > 0.0);

        // rows match a per-word cosine oracle
        for (word, values) in &table.rows {
            let axis = [1.0, -1.0, 0.0];
            let expected = cosine(emb.get(word).unwrap(), &axis).unwrap();
            assert!((values[0] - expected).abs() < 1e-12);
        }

        let mut csv = Vec::new();
        table.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("word,he-she\n"));

        let missing = vec![("he".to_string(), "nobody".to_string())];
        assert!(direction_similarity_table(&emb, &words, &missing).is_err());
    }

    #[test]
    fn similarity_file_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pairs.tsv");
        std::fs::write(&path, "cat\tdog\t7.5\nsun\tmoon\t5.0\n").unwrap();
        let pairs = load_similarity_pairs(&path).unwrap();
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0].human_score, 7.5);

        std::fs::write(&path, "cat\tdog\n").unwrap();
        assert!(load_similarity_pairs(&path).is_err());
        std::fs::write(&path, "cat\tdog\tx\n").unwrap();
        assert!(load_similarity_pairs(&path).is_err());
    }
}
