//! The `onconer` command line: one subcommand per pipeline stage.
//!
//! Every command writes into `--out` (default `$ONCONER_OUT`, else
//! `onconer-out`) and records its resolved arguments there as
//! `<command>.config.json`. A `--config FILE` of `key=value` lines supplies
//! defaults; flags on the command line win.

mod commands;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, CommandFactory, Parser, Subcommand};
use serde::Serialize;

pub use commands::run;

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Output directory; created if missing.
    #[arg(long, env = "ONCONER_OUT", default_value = "onconer-out", global = true)]
    pub out: PathBuf,
    /// File of `key=value` lines used as defaults for this command's flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub docs: usize,
    /// Fraction of documents held out in test.jsonl.
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,
    /// JSON phrase inventory replacing the built-in one.
    #[arg(long)]
    pub inventory: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StatsArgs {
    #[arg(long)]
    pub corpus: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VocabMode {
    /// The built-in base vocabulary, unchanged.
    Base,
    /// The most frequent out-of-vocabulary corpus words.
    Freq,
    /// A curated word list.
    Curated,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BuildVocabArgs {
    #[arg(long, value_enum, default_value_t = VocabMode::Freq)]
    pub mode: VocabMode,
    /// Base vocabulary; the built-in one when omitted.
    #[arg(long)]
    pub base_vocab: Option<PathBuf>,
    /// Corpus to mine (freq mode).
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long, default_value_t = 997)]
    pub k: usize,
    /// Word list (curated mode); the built-in list when omitted.
    #[arg(long)]
    pub wordlist: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub min_count: usize,
    #[arg(long, default_value_t = 2)]
    pub min_len: usize,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub require_alpha: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CoverageArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// `NAME=PATH`, repeatable; `PATH` may be `builtin`.
    #[arg(long = "vocab", required = true)]
    pub vocabs: Vec<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TokenizeArgs {
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long, conflicts_with = "corpus", required_unless_present = "corpus")]
    pub text: Option<String>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 2)]
    pub layers: usize,
    #[arg(long, default_value_t = 64)]
    pub d_model: usize,
    #[arg(long, default_value_t = 4)]
    pub heads: usize,
    #[arg(long, default_value_t = 256)]
    pub d_ff: usize,
    #[arg(long, default_value_t = 128)]
    pub max_positions: usize,
    #[arg(long, default_value_t = 0.1)]
    pub dropout: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PretrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Continue from this checkpoint instead of a fresh initialization.
    #[arg(long)]
    pub init: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    #[arg(long, default_value_t = 8)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 128)]
    pub max_len: usize,
    #[arg(long, default_value_t = 0.15)]
    pub mask_frac: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ResizeArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Vocabulary the checkpoint was trained with; built-in when omitted.
    #[arg(long)]
    pub old_vocab: Option<PathBuf>,
    #[arg(long)]
    pub new_vocab: PathBuf,
    /// subword-mean | keep-slot-row | random
    #[arg(long, default_value = "subword-mean")]
    pub policy: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FinetuneArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Starting checkpoint; a fresh model when omitted.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 128)]
    pub max_len: usize,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    #[arg(long, default_value_t = 5e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PredictArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value_t = 128)]
    pub max_len: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long)]
    pub pred: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AggregateArgs {
    /// `NAME=REPORT.json[,REPORT.json...]`, repeatable; one table column each.
    #[arg(long = "column", required = true)]
    pub columns: Vec<String>,
    #[arg(long, default_value_t = 0.95)]
    pub confidence: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TsneArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Annotated corpus whose entity tokens are projected.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value_t = 30.0)]
    pub perplexity: f64,
    #[arg(long, default_value_t = 1000)]
    pub iterations: usize,
    #[arg(long, default_value_t = 200.0)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct KappaArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GradcheckArgs {
    #[arg(long, default_value_t = 2)]
    pub layers: usize,
    #[arg(long, default_value_t = 8)]
    pub d_model: usize,
    #[arg(long, default_value_t = 2)]
    pub heads: usize,
    #[arg(long, default_value_t = 16)]
    pub d_ff: usize,
    #[arg(long, default_value_t = 23)]
    pub vocab_size: usize,
    #[arg(long, default_value_t = 1e-5)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic annotated corpus with a train/test split.
    Synth(SynthArgs),
    /// Corpus and annotation statistics.
    Stats(StatsArgs),
    /// Write a base, frequency-expanded or curated vocabulary.
    BuildVocab(BuildVocabArgs),
    /// Coverage of unique annotated tokens per vocabulary.
    Coverage(CoverageArgs),
    /// Show WordPiece output for a text or corpus.
    Tokenize(TokenizeArgs),
    /// Masked-language-model pre-training.
    Pretrain(PretrainArgs),
    /// Re-target a checkpoint to an expanded vocabulary.
    Resize(ResizeArgs),
    /// NER fine-tuning.
    Finetune(FinetuneArgs),
    /// Predict entity spans for a corpus.
    Predict(PredictArgs),
    /// Exact and lenient entity-level scores.
    Evaluate(EvaluateArgs),
    /// Error taxonomy of predictions against gold.
    Errors(EvaluateArgs),
    /// Mean and CI over runs, in a side-by-side table.
    Aggregate(AggregateArgs),
    /// Two-dimensional projection of entity-token embeddings.
    Tsne(TsneArgs),
    /// Cohen's kappa between two annotations of the same documents.
    Kappa(KappaArgs),
    /// Finite-difference check of the training gradients.
    Gradcheck(GradcheckArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Synth(_) => "synth",
            Command::Stats(_) => "stats",
            Command::BuildVocab(_) => "build-vocab",
            Command::Coverage(_) => "coverage",
            Command::Tokenize(_) => "tokenize",
            Command::Pretrain(_) => "pretrain",
            Command::Resize(_) => "resize",
            Command::Finetune(_) => "finetune",
            Command::Predict(_) => "predict",
            Command::Evaluate(_) => "evaluate",
            Command::Errors(_) => "errors",
            Command::Aggregate(_) => "aggregate",
            Command::Tsne(_) => "tsne",
            Command::Kappa(_) => "kappa",
            Command::Gradcheck(_) => "gradcheck",
        }
    }
}

/// Top-level wrapper so `--out`/`--config` parse alongside any subcommand.
#[derive(Debug, Parser)]
#[command(name = "onconer", version, about = "Sub-word tokenization, vocabulary expansion and entity recognition on clinical text")]
#[command(args_override_self = true)]
pub struct Invocation {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

fn parse_config_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("{}:{}: expected key=value", path.display(), i + 1);
        };
        out.push((k.trim().replace('_', "-"), v.trim().to_string()));
    }
    Ok(out)
}

/// Finds `--config` in raw arguments.
fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(rest));
        }
    }
    None
}

/// Splices config-file entries in right after the subcommand name, so that
/// later command-line flags override them.
fn splice_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let entries = parse_config_file(&path)?;
    let root = Invocation::command();
    let Some(pos) = args
        .iter()
        .skip(1)
        .position(|a| root.find_subcommand(a.as_os_str()).is_some())
        .map(|p| p + 1)
    else {
        return Ok(args);
    };
    let sub = root
        .find_subcommand(args[pos].as_os_str())
        .expect("position found above")
        .clone();
    let mut injected = Vec::new();
    for (key, value) in entries {
        if key == "config" {
            continue;
        }
        let arg = sub
            .get_arguments()
            .chain(root.get_arguments())
            .find(|a| a.get_long() == Some(key.as_str()))
            .with_context(|| format!("{}: unknown key {key:?}", path.display()))?;
        injected.push(OsString::from(format!("--{key}")));
        if arg.get_action().takes_values() {
            injected.push(OsString::from(value));
        } else if value != "true" {
            bail!("{}: flag {key:?} only accepts true", path.display());
        }
    }
    let mut out = args[..=pos].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}

/// Writes the resolved arguments of a command next to its outputs.
pub(crate) fn echo_config<T: Serialize>(common: &Common, command: &str, args: &T) -> Result<()> {
    #[derive(Serialize)]
    struct Echo<'a, T> {
        command: &'a str,
        out: &'a Path,
        config: Option<&'a Path>,
        args: &'a T,
    }
    let echo = Echo {
        command,
        out: &common.out,
        config: common.config.as_deref(),
        args,
    };
    let path = common.out.join(format!("{command}.config.json"));
    fs::write(&path, serde_json::to_string_pretty(&echo)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// The error chain joined by `: `, skipping causes whose text the previous
/// message already embeds.
fn one_line(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if !out.contains(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
    }
    out.replace('\n', " ")
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit status.
pub fn main_with_args(args: Vec<OsString>) -> i32 {
    let args = match splice_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return 1;
        }
    };
    let inv = match Invocation::try_parse_from(args) {
        Ok(inv) => inv,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&inv.common, &inv.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", one_line(&e));
            1
        }
    }
}
