//! `lexidebias` — dictionary-guided debiasing of word embedding files and
//! bias/semantics audits.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 data error,
//! 4 numeric failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(lexidebias::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(lexidebias::Error::InvalidArgument(_)) => 2,
            CliError::Core(lexidebias::Error::Numeric(_)) => 4,
            CliError::Core(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Core(err) => write!(f, "{err}"),
        }
    }
}

impl From<lexidebias::Error> for CliError {
    fn from(err: lexidebias::Error) -> Self {
        CliError::Core(err)
    }
}

#[derive(Parser, Debug)]
#[command(name = "lexidebias", version, about = "Debias word embeddings against dictionary definitions")]
struct Cli {
    /// Flat key = value configuration file; flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
pub struct HyperFlags {
    /// Reconstruction loss coefficient.
    #[arg(long)]
    alpha: Option<f64>,
    /// Dictionary-agreement loss coefficient.
    #[arg(long)]
    beta: Option<f64>,
    /// Bias-orthogonality loss coefficient.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Dropout probability on encoder input and output.
    #[arg(long)]
    dropout: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    pretrain_batch_size: Option<usize>,
    #[arg(long)]
    pretrain_words: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug, Default)]
pub struct SifFlags {
    /// SIF smoothing constant a.
    #[arg(long)]
    sif_a: Option<f64>,
    /// Token weighting: sif or inverse-prob.
    #[arg(long)]
    weight_mode: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalKind {
    Weat,
    Wat,
    Sembias,
    Similarity,
    Analogy,
    Directions,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Pre-train the autoencoder (encoder + reconstruction decoder) on
    /// randomly sampled vocabulary words.
    Pretrain {
        #[arg(long)]
        embeddings: Option<PathBuf>,
        /// Input embedding format: word2vec-text or glove-text.
        #[arg(long)]
        format: Option<String>,
        /// Checkpoint output path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Loss history CSV (default: <out>.losses.csv).
        #[arg(long)]
        loss_csv: Option<PathBuf>,
        #[command(flatten)]
        hyper: HyperFlags,
    },
    /// Full debiasing pipeline: gloss corpus, SIF definition vectors,
    /// train/dev split, joint training, vocabulary-wide encoding.
    Debias {
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        dictionary: Option<PathBuf>,
        /// Which glosses define a word: all or dominant.
        #[arg(long)]
        gloss_mode: Option<String>,
        /// Debiased embeddings output (word2vec text format).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Start from this checkpoint instead of fresh initialisation.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Trained model output (default: <out>.ckpt).
        #[arg(long)]
        out_checkpoint: Option<PathBuf>,
        /// Loss history CSV (default: <out>.losses.csv).
        #[arg(long)]
        loss_csv: Option<PathBuf>,
        /// Write (or reuse) the definition-vector cache at this path.
        #[arg(long)]
        defs_cache: Option<PathBuf>,
        /// Held-out development words.
        #[arg(long)]
        dev_size: Option<usize>,
        #[command(flatten)]
        hyper: HyperFlags,
        #[command(flatten)]
        sif: SifFlags,
    },
    /// Run one evaluation over an embedding file; `--compare` adds paired
    /// original/debiased columns.
    Eval {
        #[arg(long, value_enum)]
        which: EvalKind,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        format: Option<String>,
        /// Second embedding file for paired original/debiased reporting.
        #[arg(long)]
        compare: Option<PathBuf>,
        /// Report output path (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// WEAT spec JSON (repeatable).
        #[arg(long)]
        weat_spec: Vec<PathBuf>,
        /// Association graph edge TSV.
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Masculine/feminine seed pair TSV.
        #[arg(long)]
        seeds_file: Option<PathBuf>,
        /// SemBias instance TSV.
        #[arg(long)]
        sembias: Option<PathBuf>,
        /// Similarity pair TSV.
        #[arg(long)]
        pairs: Option<PathBuf>,
        /// Analogy questions file (Google format).
        #[arg(long)]
        analogies: Option<PathBuf>,
        /// Word list file for the direction table (one word per line).
        #[arg(long)]
        words: Option<PathBuf>,
        /// Direction as pos:neg (repeatable), e.g. he:she.
        #[arg(long = "direction")]
        directions: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Monte-Carlo search over the loss coefficients; writes a config
    /// fragment re-loadable by `debias --config`.
    Hypersearch {
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        dictionary: Option<PathBuf>,
        #[arg(long)]
        gloss_mode: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        dev_size: Option<usize>,
        #[command(flatten)]
        hyper: HyperFlags,
        #[command(flatten)]
        sif: SifFlags,
    },
}

fn main() -> ExitCode {
    env_logger::init();
    configure_thread_pool();
    let cli = Cli::parse();

    let file_config = match &cli.config {
        Some(path) => match config::ConfigFile::load(path) {
            Ok(cfg) => cfg,
            Err(err) => {
                eprintln!("error: {err}");
                return ExitCode::from(err.exit_code());
            }
        },
        None => config::ConfigFile::default(),
    };

    let outcome = match cli.command {
        Command::Pretrain { embeddings, format, out, loss_csv, hyper } => {
            commands::pretrain(&file_config, embeddings, format, out, loss_csv, hyper)
        }
        Command::Debias {
            embeddings,
            format,
            dictionary,
            gloss_mode,
            out,
            checkpoint,
            out_checkpoint,
            loss_csv,
            defs_cache,
            dev_size,
            hyper,
            sif,
        } => commands::debias(
            &file_config,
            commands::DebiasArgs {
                embeddings,
                format,
                dictionary,
                gloss_mode,
                out,
                checkpoint,
                out_checkpoint,
                loss_csv,
                defs_cache,
                dev_size,
                hyper,
                sif,
            },
        ),
        Command::Eval {
            which,
            embeddings,
            format,
            compare,
            out,
            weat_spec,
            graph,
            seeds_file,
            sembias,
            pairs,
            analogies,
            words,
            directions,
            seed,
        } => commands::eval(
            &file_config,
            commands::EvalArgs {
                which,
                embeddings,
                format,
                compare,
                out,
                weat_spec,
                graph,
                seeds_file,
                sembias,
                pairs,
                analogies,
                words,
                directions,
                seed,
            },
        ),
        Command::Hypersearch {
            embeddings,
            format,
            dictionary,
            gloss_mode,
            out,
            trials,
            dev_size,
            hyper,
            sif,
        } => commands::hypersearch(
            &file_config,
            embeddings,
            format,
            dictionary,
            gloss_mode,
            out,
            trials,
            dev_size,
            hyper,
            sif,
        ),
    };

    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

/// LEXIDEBIAS_THREADS caps internal parallelism (vocabulary-wide encoding).
fn configure_thread_pool() {
    if let Ok(value) = std::env::var("LEXIDEBIAS_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
            }
        } else {
            log::warn!("ignoring non-numeric LEXIDEBIAS_THREADS={value:?}");
        }
    }
}
