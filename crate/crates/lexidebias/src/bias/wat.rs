//! Word association test: masculine/feminine label propagation over a word
//! association graph, log-ratio bias scores, and their Pearson correlation
//! with an embedding-derived score.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};
use crate::geometry::cosine;
use crate::stats::pearson;

/// Undirected weighted word graph with masculine/feminine seed pairs.
#[derive(Debug, Clone)]
pub struct AssociationGraph {
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    adjacency: Vec<Vec<(usize, f64)>>,
    seeds: Vec<(String, String)>,
}

impl AssociationGraph {
    pub fn new(
        nodes: Vec<String>,
        edges: &[(String, String, f64)],
        seeds: Vec<(String, String)>,
    ) -> Result<Self> {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            if index.insert(node.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate node {node:?}")));
            }
        }
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (u, v, weight) in edges {
            let ui = *index
                .get(u)
                .ok_or_else(|| Error::InvalidArgument(format!("edge endpoint {u:?} is not a node")))?;
            let vi = *index
                .get(v)
                .ok_or_else(|| Error::InvalidArgument(format!("edge endpoint {v:?} is not a node")))?;
            if ui == vi {
                return Err(Error::InvalidArgument(format!("self-loop on {u:?}")));
            }
            if !(*weight > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "edge {u:?}-{v:?} has non-positive weight {weight}"
                )));
            }
            adjacency[ui].push((vi, *weight));
            adjacency[vi].push((ui, *weight));
        }
        for (masculine, feminine) in &seeds {
            for word in [masculine, feminine] {
                if !index.contains_key(word) {
                    return Err(Error::InvalidArgument(format!(
                        "seed word {word:?} is not a graph node"
                    )));
                }
            }
        }
        Ok(AssociationGraph { nodes, index, adjacency, seeds })
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn seeds(&self) -> &[(String, String)] {
        &self.seeds
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Loads an edge TSV (`u<TAB>v<TAB>weight`) plus a seeds file
/// (`masculine<TAB>feminine` per line). Nodes are collected from the edges
/// and seeds.
pub fn load_graph(edges_path: impl AsRef<Path>, seeds_path: impl AsRef<Path>) -> Result<AssociationGraph> {
    let path_str = edges_path.as_ref().display().to_string();
    let file = File::open(edges_path.as_ref()).map_err(|e| Error::io(&path_str, e))?;
    let mut nodes: Vec<String> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let intern = |word: &str, nodes: &mut Vec<String>, seen: &mut HashMap<String, usize>| {
        if !seen.contains_key(word) {
            seen.insert(word.to_string(), nodes.len());
            nodes.push(word.to_string());
        }
    };

    let mut edges: Vec<(String, String, f64)> = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(&path_str, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(&path_str, i + 1, "expected u<TAB>v<TAB>weight"));
        }
        let weight: f64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| Error::parse(&path_str, i + 1, format!("non-numeric weight {:?}", fields[2])))?;
        intern(fields[0], &mut nodes, &mut seen);
        intern(fields[1], &mut nodes, &mut seen);
        edges.push((fields[0].to_string(), fields[1].to_string(), weight));
    }

    let seeds_str = seeds_path.as_ref().display().to_string();
    let file = File::open(seeds_path.as_ref()).map_err(|e| Error::io(&seeds_str, e))?;
    let mut seeds: Vec<(String, String)> = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(&seeds_str, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(Error::parse(&seeds_str, i + 1, "expected masculine<TAB>feminine"));
        }
        intern(fields[0], &mut nodes, &mut seen);
        intern(fields[1], &mut nodes, &mut seen);
        seeds.push((fields[0].to_string(), fields[1].to_string()));
    }

    AssociationGraph::new(nodes, &edges, seeds)
}

#[derive(Debug, Clone)]
pub struct WatConfig {
    /// Propagation mixing weight.
    pub lambda: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Smoothing added to both orientations inside the log-ratio score.
    pub epsilon: f64,
}

impl Default for WatConfig {
    fn default() -> Self {
        WatConfig { lambda: 0.85, tolerance: 1e-10, max_iterations: 1000, epsilon: 1e-8 }
    }
}

/// Per-node masculine/feminine orientation after propagation.
#[derive(Debug, Clone)]
pub struct GenderInfo {
    words: Vec<String>,
    index: HashMap<String, usize>,
    values: Vec<[f64; 2]>,
}

impl GenderInfo {
    pub fn get(&self, word: &str) -> Option<(f64, f64)> {
        self.index.get(word).map(|&i| (self.values[i][0], self.values[i][1]))
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }
}

/// Label propagation with the symmetric normalised operator
/// `S = D^{-1/2} W D^{-1/2}`: iterate `F <- lambda S F + (1 - lambda) Y`
/// from `F = Y` until the max-abs change drops below the tolerance.
///
/// Seed rows of `Y` are `(1, 0)` for masculine and `(0, 1)` for feminine
/// words, all others `(0, 0)`. Isolated nodes keep `(1 - lambda) Y`.
pub fn wat_propagate(graph: &AssociationGraph, cfg: &WatConfig) -> Result<GenderInfo> {
    if !(cfg.lambda > 0.0 && cfg.lambda < 1.0) {
        return Err(Error::InvalidArgument("lambda must lie in (0, 1)".into()));
    }
    if graph.is_empty() {
        return Err(Error::Data("empty association graph".into()));
    }
    let n = graph.len();

    let mut degree = vec![0.0f64; n];
    for (i, neighbors) in graph.adjacency.iter().enumerate() {
        degree[i] = neighbors.iter().map(|(_, w)| w).sum();
    }
    let inv_sqrt: Vec<f64> = degree.iter().map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 }).collect();

    let mut seed_rows = vec![[0.0f64; 2]; n];
    for (masculine, feminine) in &graph.seeds {
        seed_rows[graph.index[masculine]][0] = 1.0;
        seed_rows[graph.index[feminine]][1] = 1.0;
    }

    let mut current = seed_rows.clone();
    let mut converged = false;
    let mut residual = f64::INFINITY;
    for _ in 0..cfg.max_iterations {
        let mut next = vec![[0.0f64; 2]; n];
        for (i, neighbors) in graph.adjacency.iter().enumerate() {
            let mut acc = [0.0f64; 2];
            for &(j, w) in neighbors {
                let norm_w = w * inv_sqrt[i] * inv_sqrt[j];
                acc[0] += norm_w * current[j][0];
                acc[1] += norm_w * current[j][1];
            }
            next[i][0] = cfg.lambda * acc[0] + (1.0 - cfg.lambda) * seed_rows[i][0];
            next[i][1] = cfg.lambda * acc[1] + (1.0 - cfg.lambda) * seed_rows[i][1];
        }
        residual = current
            .iter()
            .zip(&next)
            .map(|(a, b)| (a[0] - b[0]).abs().max((a[1] - b[1]).abs()))
            .fold(0.0, f64::max);
        current = next;
        if residual < cfg.tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numeric(format!(
            "label propagation did not converge in {} iterations (residual {residual:.3e})",
            cfg.max_iterations
        )));
    }

    Ok(GenderInfo {
        words: graph.nodes.clone(),
        index: graph.index.clone(),
        values: current,
    })
}

/// Smoothed log-ratio bias: `log((b_m + eps) / (b_f + eps))`.
pub fn wat_bias_score(info: &GenderInfo, word: &str, epsilon: f64) -> Result<f64> {
    let (masculine, feminine) = info
        .get(word)
        .ok_or_else(|| Error::NotFound(word.to_string()))?;
    Ok(((masculine + epsilon) / (feminine + epsilon)).ln())
}

/// Mean difference of cosine similarities against the masculine and
/// feminine word of every seed pair. Pairs with out-of-vocabulary words are
/// skipped with a warning.
pub fn wat_embedding_score(
    word: &str,
    pairs: &[(String, String)],
    emb: &EmbeddingSet,
) -> Result<f64> {
    let target = emb.require(word)?;
    let mut sum = 0.0;
    let mut used = 0usize;
    for (masculine, feminine) in pairs {
        let (Some(mv), Some(fv)) = (emb.get(masculine), emb.get(feminine)) else {
            log::warn!("seed pair ({masculine}, {feminine}) not fully covered by embeddings, skipping");
            continue;
        };
        sum += cosine(target, mv)? - cosine(target, fv)?;
        used += 1;
    }
    if used == 0 {
        return Err(Error::Data("no seed pair is covered by the embeddings".into()));
    }
    Ok(sum / used as f64)
}

/// Pearson correlation between propagation bias scores and embedding bias
/// scores over the words present in both the graph and the embeddings.
pub fn wat_correlation(
    graph: &AssociationGraph,
    emb: &EmbeddingSet,
    pairs: &[(String, String)],
    cfg: &WatConfig,
) -> Result<f64> {
    let info = wat_propagate(graph, cfg)?;
    let mut propagation_scores = Vec::new();
    let mut embedding_scores = Vec::new();
    for word in graph.nodes() {
        if !emb.contains(word) {
            log::warn!("graph word {word:?} missing from embeddings, skipped in correlation");
            continue;
        }
        propagation_scores.push(wat_bias_score(&info, word, cfg.epsilon)?);
        embedding_scores.push(wat_embedding_score(word, pairs, emb)?);
    }
    if propagation_scores.len() < 3 {
        return Err(Error::Data(format!(
            "only {} words shared between graph and embeddings, need at least 3",
            propagation_scores.len()
        )));
    }
    pearson(&propagation_scores, &embedding_scores)
}
