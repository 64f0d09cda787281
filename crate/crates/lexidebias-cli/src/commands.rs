//! Subcommand implementations.

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;

use lexidebias::bias::{
    evaluate_weat, load_graph, load_sembias, sembias_accuracy, wat_correlation, WatConfig,
    WeatResult, WeatSpec,
};
use lexidebias::embedding::{load_embeddings, save_embeddings, EmbeddingFormat, EmbeddingSet};
use lexidebias::gloss::{build_training_set, load_dictionary, unigram_probabilities, GlossMode};
use lexidebias::model::{
    debias_vocabulary, hyper_search, init_params, load_checkpoint, pretrain_autoencoder,
    save_checkpoint, train, ModelParams, TrainResult, TrainSample,
};
use lexidebias::semantic::{
    analogy_accuracy, direction_similarity_table, load_analogies, load_similarity_pairs,
    similarity_benchmark,
};
use lexidebias::sif::{build_definition_vectors, DefinitionVectors, SifConfig};

use crate::config::{
    optional_input_path, require_input_path, require_output_path, resolve_format,
    resolve_gloss_mode, resolve_hyper, resolve_sif, ConfigFile,
};
use crate::{CliError, EvalKind, HyperFlags, SifFlags};

type CliResult = Result<(), CliError>;

fn write_loss_csv(path: &Path, result: &TrainResult) -> Result<(), CliError> {
    let mut text = String::from("epoch,train_loss,dev_loss\n");
    text.push_str(&format!("0,,{}\n", result.initial_dev_loss));
    for stat in &result.history {
        text.push_str(&format!("{},{},{}\n", stat.epoch, stat.train_loss, stat.dev_loss));
    }
    std::fs::write(path, text)
        .map_err(|e| CliError::Core(lexidebias::Error::Io { path: path.display().to_string(), source: e }))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}

pub fn pretrain(
    cfg: &ConfigFile,
    embeddings: Option<PathBuf>,
    format: Option<String>,
    out: Option<PathBuf>,
    loss_csv: Option<PathBuf>,
    hyper_flags: HyperFlags,
) -> CliResult {
    let emb_path = require_input_path(embeddings.as_ref(), cfg, "embeddings")?;
    let format = resolve_format(format.as_deref(), cfg)?;
    let out = require_output_path(out.as_ref(), cfg, "out")?;
    let loss_csv = loss_csv
        .or_else(|| cfg.get_path("loss_csv"))
        .unwrap_or_else(|| with_suffix(&out, ".losses.csv"));
    let hyper = resolve_hyper(&hyper_flags, cfg)?;

    let emb = load_embeddings(&emb_path, format)?;
    let mut rng = rand_seed(hyper.seed);
    let result = pretrain_autoencoder(&emb, &hyper, &mut rng)?;
    save_checkpoint(&result.params, &out)?;
    write_loss_csv(&loss_csv, &result)?;
    log::info!(
        "pre-training done: best epoch {} (dev reconstruction loss {})",
        result.best_epoch,
        result.best_dev_loss
    );
    println!("checkpoint written to {}", out.display());
    Ok(())
}

fn rand_seed(seed: u64) -> rand_chacha::ChaCha8Rng {
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

pub struct DebiasArgs {
    pub embeddings: Option<PathBuf>,
    pub format: Option<String>,
    pub dictionary: Option<PathBuf>,
    pub gloss_mode: Option<String>,
    pub out: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub out_checkpoint: Option<PathBuf>,
    pub loss_csv: Option<PathBuf>,
    pub defs_cache: Option<PathBuf>,
    pub dev_size: Option<usize>,
    pub hyper: HyperFlags,
    pub sif: SifFlags,
}

/// Builds the training corpus: split, definition vectors, train samples.
fn build_samples(
    emb: &EmbeddingSet,
    dictionary: &Path,
    mode: GlossMode,
    sif: &SifConfig,
    dev_size: usize,
    seed: u64,
    defs_cache: Option<&Path>,
) -> Result<(Vec<TrainSample>, Vec<TrainSample>), CliError> {
    let dict = load_dictionary(dictionary)?;
    let freq = unigram_probabilities(&dict)?;
    let split = build_training_set(emb, &dict, mode, dev_size, seed)?;

    let mut all_words: Vec<String> = Vec::with_capacity(split.train_words.len() + split.dev_words.len());
    all_words.extend(split.train_words.iter().cloned());
    all_words.extend(split.dev_words.iter().cloned());

    let defs = match defs_cache {
        Some(path) if path.is_file() => {
            log::info!("reusing definition vectors from {}", path.display());
            DefinitionVectors::load(path)?
        }
        other => {
            let defs = build_definition_vectors(&all_words, &dict, emb, &freq, mode, sif)?;
            if let Some(path) = other {
                defs.save(path)?;
            }
            defs
        }
    };

    let build = |words: &[String]| -> Result<Vec<TrainSample>, CliError> {
        let mut samples = Vec::with_capacity(words.len());
        for word in words {
            let w = emb
                .get(word)
                .ok_or_else(|| lexidebias::Error::NotFound(word.clone()))?;
            let s = defs
                .get(word)
                .ok_or_else(|| lexidebias::Error::NotFound(word.clone()))?;
            if s.iter().all(|&v| v.abs() < 1e-12) {
                log::warn!("definition vector of {word:?} is numerically zero, skipping word");
                continue;
            }
            samples.push(TrainSample::new(word.clone(), w.to_vec(), s.to_vec())?);
        }
        Ok(samples)
    };

    Ok((build(&split.train_words)?, build(&split.dev_words)?))
}

pub fn debias(cfg: &ConfigFile, args: DebiasArgs) -> CliResult {
    let emb_path = require_input_path(args.embeddings.as_ref(), cfg, "embeddings")?;
    let dict_path = require_input_path(args.dictionary.as_ref(), cfg, "dictionary")?;
    let format = resolve_format(args.format.as_deref(), cfg)?;
    let mode = resolve_gloss_mode(args.gloss_mode.as_deref(), cfg)?;
    let out = require_output_path(args.out.as_ref(), cfg, "out")?;
    let out_checkpoint = args
        .out_checkpoint
        .or_else(|| cfg.get_path("out_checkpoint"))
        .unwrap_or_else(|| with_suffix(&out, ".ckpt"));
    let loss_csv = args
        .loss_csv
        .or_else(|| cfg.get_path("loss_csv"))
        .unwrap_or_else(|| with_suffix(&out, ".losses.csv"));
    let checkpoint = optional_input_path(args.checkpoint.as_ref(), cfg, "checkpoint")?;
    let defs_cache = args.defs_cache.or_else(|| cfg.get_path("defs_cache"));
    let dev_size = args
        .dev_size
        .or(cfg.get_parsed("dev_size")?)
        .unwrap_or(1000);
    let hyper = resolve_hyper(&args.hyper, cfg)?;
    let sif = resolve_sif(&args.sif, cfg)?;

    let emb = load_embeddings(&emb_path, format)?;
    let (train_samples, dev_samples) =
        build_samples(&emb, &dict_path, mode, &sif, dev_size, hyper.seed, defs_cache.as_deref())?;
    log::info!(
        "training on {} words, {} held out",
        train_samples.len(),
        dev_samples.len()
    );

    let init: ModelParams = match checkpoint {
        Some(path) => {
            let params = load_checkpoint(&path)?;
            if params.input_dim() != emb.dim() {
                return Err(CliError::usage(format!(
                    "checkpoint expects {}-dimensional embeddings, file has {}",
                    params.input_dim(),
                    emb.dim()
                )));
            }
            params
        }
        None => init_params(emb.dim(), emb.dim(), hyper.seed)?,
    };

    let result = train(&train_samples, &dev_samples, &hyper, init)?;
    log::info!(
        "training done: best epoch {} (dev loss {} from initial {})",
        result.best_epoch,
        result.best_dev_loss,
        result.initial_dev_loss
    );

    let debiased = debias_vocabulary(&result.params, &emb)?;
    save_embeddings(&debiased, &out, EmbeddingFormat::Word2vecText)?;
    save_checkpoint(&result.params, &out_checkpoint)?;
    write_loss_csv(&loss_csv, &result)?;
    println!("debiased embeddings written to {}", out.display());
    Ok(())
}

pub struct EvalArgs {
    pub which: EvalKind,
    pub embeddings: Option<PathBuf>,
    pub format: Option<String>,
    pub compare: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub weat_spec: Vec<PathBuf>,
    pub graph: Option<PathBuf>,
    pub seeds_file: Option<PathBuf>,
    pub sembias: Option<PathBuf>,
    pub pairs: Option<PathBuf>,
    pub analogies: Option<PathBuf>,
    pub words: Option<PathBuf>,
    pub directions: Vec<String>,
    pub seed: Option<u64>,
}

/// One report row: a test name plus up to three statistics.
struct ReportRow {
    test: String,
    statistic: f64,
    p_value: Option<f64>,
    effect_size: Option<f64>,
}

impl ReportRow {
    fn plain(test: impl Into<String>, statistic: f64) -> Self {
        ReportRow { test: test.into(), statistic, p_value: None, effect_size: None }
    }

    fn from_weat(name: &str, result: &WeatResult) -> Self {
        ReportRow {
            test: name.to_string(),
            statistic: result.statistic,
            p_value: Some(result.p_value),
            effect_size: Some(result.effect_size),
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_report(out: Option<&Path>, header: &str, lines: &[String]) -> CliResult {
    let mut text = String::from(header);
    text.push('\n');
    for line in lines {
        text.push_str(line);
        text.push('\n');
    }
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| {
            CliError::Core(lexidebias::Error::Io { path: path.display().to_string(), source: e })
        }),
        None => {
            print!("{text}");
            std::io::stdout().flush().ok();
            Ok(())
        }
    }
}

/// Rows for one embedding set under the selected evaluation.
fn eval_rows(
    which: EvalKind,
    emb: &EmbeddingSet,
    args: &EvalArgs,
    cfg: &ConfigFile,
    seed: u64,
) -> Result<Vec<ReportRow>, CliError> {
    use lexidebias::bias::weat::{DEFAULT_MAX_EXHAUSTIVE, DEFAULT_MC_SAMPLES};
    match which {
        EvalKind::Weat => {
            let mut spec_paths = args.weat_spec.clone();
            if spec_paths.is_empty() {
                if let Some(path) = cfg.get_path("weat_spec") {
                    spec_paths.push(path);
                }
            }
            if spec_paths.is_empty() {
                return Err(CliError::usage("weat evaluation needs --weat-spec"));
            }
            let mut rows = Vec::new();
            for path in &spec_paths {
                let spec = WeatSpec::from_json_file(path)?;
                let result = evaluate_weat(&spec, emb, DEFAULT_MAX_EXHAUSTIVE, DEFAULT_MC_SAMPLES, seed)?;
                rows.push(ReportRow::from_weat(&spec.name, &result));
            }
            Ok(rows)
        }
        EvalKind::Wat => {
            let graph_path = require_input_path(args.graph.as_ref(), cfg, "graph")?;
            let seeds_path = require_input_path(args.seeds_file.as_ref(), cfg, "seeds_file")?;
            let graph = load_graph(&graph_path, &seeds_path)?;
            let r = wat_correlation(&graph, emb, graph.seeds(), &WatConfig::default())?;
            Ok(vec![ReportRow::plain("wat", r)])
        }
        EvalKind::Sembias => {
            let path = require_input_path(args.sembias.as_ref(), cfg, "sembias")?;
            let dataset = load_sembias(&path)?;
            let rates = sembias_accuracy(&dataset, emb, false)?;
            let mut rows = vec![
                ReportRow::plain("sembias_definition", rates.definition),
                ReportRow::plain("sembias_stereotype", rates.stereotype),
                ReportRow::plain("sembias_none", rates.none),
            ];
            if dataset.iter().any(|i| i.subset) {
                let sub = sembias_accuracy(&dataset, emb, true)?;
                rows.push(ReportRow::plain("sembias_sub_definition", sub.definition));
                rows.push(ReportRow::plain("sembias_sub_stereotype", sub.stereotype));
                rows.push(ReportRow::plain("sembias_sub_none", sub.none));
            }
            Ok(rows)
        }
        EvalKind::Similarity => {
            let path = require_input_path(args.pairs.as_ref(), cfg, "pairs")?;
            let pairs = load_similarity_pairs(&path)?;
            let (r, coverage) = similarity_benchmark(emb, &pairs)?;
            Ok(vec![
                ReportRow::plain("similarity", r),
                ReportRow::plain("similarity_coverage", coverage),
            ])
        }
        EvalKind::Analogy => {
            let path = require_input_path(args.analogies.as_ref(), cfg, "analogies")?;
            let questions = load_analogies(&path)?;
            let (accuracy, coverage) = analogy_accuracy(emb, &questions)?;
            Ok(vec![
                ReportRow::plain("analogy", accuracy),
                ReportRow::plain("analogy_coverage", coverage),
            ])
        }
        EvalKind::Directions => unreachable!("handled separately"),
    }
}

fn parse_directions(args: &EvalArgs, cfg: &ConfigFile) -> Result<Vec<(String, String)>, CliError> {
    let mut raw: Vec<String> = args.directions.clone();
    if raw.is_empty() {
        if let Some(text) = cfg.get("directions") {
            raw = text.split(',').map(|s| s.trim().to_string()).collect();
        }
    }
    if raw.is_empty() {
        return Err(CliError::usage("directions evaluation needs --direction pos:neg"));
    }
    raw.iter()
        .map(|d| {
            d.split_once(':')
                .map(|(p, n)| (p.trim().to_string(), n.trim().to_string()))
                .ok_or_else(|| CliError::usage(format!("direction {d:?} is not pos:neg")))
        })
        .collect()
}

fn load_word_list(path: &Path) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Core(lexidebias::Error::Io { path: path.display().to_string(), source: e })
    })?;
    let words: Vec<String> = text
        .split([',', '\n'])
        .map(|w| w.trim().to_string())
        .filter(|w| !w.is_empty())
        .collect();
    if words.is_empty() {
        return Err(CliError::Core(lexidebias::Error::Data(format!(
            "{}: empty word list",
            path.display()
        ))));
    }
    Ok(words)
}

fn eval_directions(cfg: &ConfigFile, args: &EvalArgs, emb: &EmbeddingSet, compare: Option<&EmbeddingSet>) -> CliResult {
    let words_path = require_input_path(args.words.as_ref(), cfg, "words")?;
    let words = load_word_list(&words_path)?;
    let directions = parse_directions(args, cfg)?;
    let out = args.out.clone().or_else(|| cfg.get_path("out"));

    let table = direction_similarity_table(emb, &words, &directions)?;
    match compare {
        None => {
            let mut buffer = Vec::new();
            table.write_csv(&mut buffer).map_err(|e| {
                CliError::Core(lexidebias::Error::Io { path: "<report>".into(), source: e })
            })?;
            let text = String::from_utf8(buffer).expect("csv is utf-8");
            match out {
                Some(path) => std::fs::write(&path, text).map_err(|e| {
                    CliError::Core(lexidebias::Error::Io { path: path.display().to_string(), source: e })
                })?,
                None => print!("{text}"),
            }
            Ok(())
        }
        Some(other) => {
            let deb = direction_similarity_table(other, &words, &directions)?;
            let mut header = String::from("word");
            for (pos, neg) in &directions {
                header.push_str(&format!(",org_{pos}-{neg},deb_{pos}-{neg}"));
            }
            let deb_rows: std::collections::HashMap<&str, &Vec<f64>> =
                deb.rows.iter().map(|(w, v)| (w.as_str(), v)).collect();
            let mut lines = Vec::new();
            for (word, values) in &table.rows {
                let Some(deb_values) = deb_rows.get(word.as_str()) else {
                    log::warn!("{word:?} missing from compare embeddings, skipped");
                    continue;
                };
                let mut line = word.clone();
                for (a, b) in values.iter().zip(deb_values.iter()) {
                    line.push_str(&format!(",{a},{b}"));
                }
                lines.push(line);
            }
            write_report(out.as_deref(), &header, &lines)
        }
    }
}

pub fn eval(cfg: &ConfigFile, args: EvalArgs) -> CliResult {
    let emb_path = require_input_path(args.embeddings.as_ref(), cfg, "embeddings")?;
    let format = resolve_format(args.format.as_deref(), cfg)?;
    let emb = load_embeddings(&emb_path, format)?;
    let seed = args.seed.or(cfg.get_parsed("seed")?).unwrap_or(42);

    let compare = match args.compare.clone().or_else(|| cfg.get_path("compare")) {
        Some(path) => {
            if !path.is_file() {
                return Err(CliError::usage(format!("compare path {} does not exist", path.display())));
            }
            Some(load_embeddings(&path, format)?)
        }
        None => None,
    };

    if args.which == EvalKind::Directions {
        return eval_directions(cfg, &args, &emb, compare.as_ref());
    }

    let rows = eval_rows(args.which, &emb, &args, cfg, seed)?;
    let out = args.out.clone().or_else(|| cfg.get_path("out"));
    match compare {
        None => {
            let lines: Vec<String> = rows
                .iter()
                .map(|r| format!("{},{},{},{}", r.test, r.statistic, opt(r.p_value), opt(r.effect_size)))
                .collect();
            write_report(out.as_deref(), "test,statistic,p_value,effect_size", &lines)
        }
        Some(deb) => {
            let deb_rows = eval_rows(args.which, &deb, &args, cfg, seed)?;
            let lines: Vec<String> = rows
                .iter()
                .zip(&deb_rows)
                .map(|(a, b)| {
                    format!(
                        "{},{},{},{},{},{},{}",
                        a.test,
                        a.statistic,
                        opt(a.p_value),
                        opt(a.effect_size),
                        b.statistic,
                        opt(b.p_value),
                        opt(b.effect_size)
                    )
                })
                .collect();
            write_report(
                out.as_deref(),
                "test,org_statistic,org_p_value,org_effect_size,deb_statistic,deb_p_value,deb_effect_size",
                &lines,
            )
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub fn hypersearch(
    cfg: &ConfigFile,
    embeddings: Option<PathBuf>,
    format: Option<String>,
    dictionary: Option<PathBuf>,
    gloss_mode: Option<String>,
    out: Option<PathBuf>,
    trials: Option<usize>,
    dev_size: Option<usize>,
    hyper_flags: HyperFlags,
    sif_flags: SifFlags,
) -> CliResult {
    let emb_path = require_input_path(embeddings.as_ref(), cfg, "embeddings")?;
    let dict_path = require_input_path(dictionary.as_ref(), cfg, "dictionary")?;
    let format = resolve_format(format.as_deref(), cfg)?;
    let mode = resolve_gloss_mode(gloss_mode.as_deref(), cfg)?;
    let out = require_output_path(out.as_ref(), cfg, "out")?;
    let trials = trials.or(cfg.get_parsed("trials")?).unwrap_or(20);
    let dev_size = dev_size.or(cfg.get_parsed("dev_size")?).unwrap_or(1000);
    let hyper = resolve_hyper(&hyper_flags, cfg)?;
    let sif = resolve_sif(&sif_flags, cfg)?;

    let emb = load_embeddings(&emb_path, format)?;
    let (train_samples, dev_samples) =
        build_samples(&emb, &dict_path, mode, &sif, dev_size, hyper.seed, None)?;

    let mut rng = rand_seed(hyper.seed);
    let chosen = hyper_search(&train_samples, &dev_samples, &hyper, trials, &mut rng)?;
    let text = format!(
        "# chosen by hypersearch: trial {} of {trials}, dev loss {}\nalpha = {}\nbeta = {}\ngamma = {}\n",
        chosen.trial, chosen.dev_loss, chosen.hyper.alpha, chosen.hyper.beta, chosen.hyper.gamma
    );
    std::fs::write(&out, text)
        .map_err(|e| CliError::Core(lexidebias::Error::Io { path: out.display().to_string(), source: e }))?;
    println!("chosen coefficients written to {}", out.display());
    Ok(())
}
