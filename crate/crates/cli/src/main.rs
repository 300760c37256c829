//! Pipeline front end: vocabulary and co-occurrence extraction, embedding
//! training, alpha-embedding export, and similarity/analogy evaluation.
//! Every subcommand writes its artifacts plus a run manifest into --out-dir.

mod commands;
mod config;
mod manifest;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use alpha_embeddings::corpus::Weighting;
use alpha_embeddings::geometry::{Alpha, ReferenceKind, ShiftMode};
use alpha_embeddings::measures::SimilarityMethod;
use clap::{Args, Parser, Subcommand};

pub enum CliError {
    Usage(String),
    Data(alpha_embeddings::Error),
}

impl From<alpha_embeddings::Error> for CliError {
    fn from(e: alpha_embeddings::Error) -> Self {
        CliError::Data(e)
    }
}

/// Flag-level validation failure; maps to exit code 1.
pub fn usage(e: impl fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

/// Which coefficient evaluation embeds words: the policy default, the exact
/// form, or the rescaled one that survives very negative alpha.
#[derive(Clone, Copy, Debug)]
pub enum CoefficientForm {
    Auto,
    Exact,
    Stable,
}

impl CoefficientForm {
    pub fn as_option(self) -> Option<bool> {
        match self {
            CoefficientForm::Auto => None,
            CoefficientForm::Exact => Some(false),
            CoefficientForm::Stable => Some(true),
        }
    }
}

impl FromStr for CoefficientForm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(CoefficientForm::Auto),
            "exact" => Ok(CoefficientForm::Exact),
            "stable" => Ok(CoefficientForm::Stable),
            other => Err(format!("expected auto|exact|stable, got '{other}'")),
        }
    }
}

/// Metric choice for analogy ranking.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankMetric {
    Fisher,
    Identity,
}

impl FromStr for RankMetric {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fisher" | "F" => Ok(RankMetric::Fisher),
            "identity" | "I" => Ok(RankMetric::Identity),
            other => Err(format!("expected fisher|identity, got '{other}'")),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "alphaemb",
    version,
    about = "train and evaluate alpha-deformed word embeddings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// build a vocabulary from raw text (one document per line)
    Vocab(VocabArgs),
    /// count windowed co-occurrences against a fixed vocabulary
    Cooccur(CooccurArgs),
    /// fit embedding matrices to a co-occurrence file
    Train(TrainArgs),
    /// compute alpha-embeddings (or their limit direction) for every word
    Embed(EmbedArgs),
    /// score word pairs with a similarity method
    Sim(SimArgs),
    /// complete "a : b :: c : ?" and rank candidate words
    Analogy(AnalogyArgs),
    /// correlate a method with human similarity judgements
    EvalSim(EvalSimArgs),
    /// top-1 accuracy on an analogy dataset
    EvalAnalogy(EvalAnalogyArgs),
    /// evaluate methods across a grid of alphas
    Sweep(SweepArgs),
    /// project embedding rows to 2D by principal components
    Pca(PcaArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// output directory, created if missing; receives the run manifest
    #[arg(long)]
    out_dir: PathBuf,
    /// TOML file of `key = value` defaults for the long flags; flags win
    #[arg(long)]
    config: Option<PathBuf>,
    /// worker threads; 1 (the default) is the determinism contract
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct ModelArgs {
    /// stem of the model text files (<stem>.u.txt, .v.txt, .bias.txt)
    #[arg(long)]
    model: Option<PathBuf>,
    /// combined binary model file
    #[arg(long)]
    model_binary: Option<PathBuf>,
    /// GloVe-format text vectors, center vectors only; V copies U
    #[arg(long)]
    glove: Option<PathBuf>,
}

#[derive(Args)]
struct AlphaArgs {
    /// deformation parameter: a number, inf, or -inf
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<Alpha>,
    /// co-occurrence file, needed by 'ud' references and p_data-cn
    #[arg(long)]
    cooccur: Option<PathBuf>,
}

#[derive(Args)]
struct GeometryArgs {
    #[command(flatten)]
    alpha: AlphaArgs,
    /// reference measure: 0|uniform, u|model-unigram, ud|data-unigram
    #[arg(long)]
    reference: Option<ReferenceKind>,
    /// conditional parameter: U or U+V
    #[arg(long)]
    shift: Option<ShiftMode>,
    /// coefficient evaluation: auto, exact, or stable
    #[arg(long)]
    coefficients: Option<CoefficientForm>,
}

#[derive(Args)]
struct StopWordArgs {
    /// file with one stop word per line, replacing the built-in list
    #[arg(long)]
    stop_words: Option<PathBuf>,
    /// disable stop-word removal entirely
    #[arg(long)]
    keep_stop_words: bool,
}

#[derive(Args)]
struct VocabArgs {
    /// raw corpus text
    #[arg(long)]
    input: Option<PathBuf>,
    /// drop words seen fewer times than this into the unknown token
    #[arg(long)]
    min_count: Option<u64>,
    #[command(flatten)]
    stop: StopWordArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CooccurArgs {
    /// raw corpus text
    #[arg(long)]
    input: Option<PathBuf>,
    /// vocabulary file from `vocab`
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// context window size in tokens
    #[arg(long)]
    window: Option<usize>,
    /// pair weighting: harmonic (1/distance) or uniform
    #[arg(long)]
    weighting: Option<Weighting>,
    /// count (center, context) pairs in one direction only
    #[arg(long)]
    asymmetric: bool,
    #[command(flatten)]
    stop: StopWordArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct TrainArgs {
    /// co-occurrence file from `cooccur`
    #[arg(long)]
    cooccur: Option<PathBuf>,
    /// vocabulary file from `vocab`
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// embedding dimension
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    /// weighting cutoff x_max
    #[arg(long)]
    x_max: Option<f64>,
    /// weighting exponent
    #[arg(long)]
    exponent: Option<f64>,
    /// seed for initialization and entry shuffling
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    init_scale: Option<f64>,
    /// also write the combined binary model file
    #[arg(long)]
    binary: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct EmbedArgs {
    #[command(flatten)]
    source: ModelArgs,
    #[command(flatten)]
    geometry: GeometryArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SimArgs {
    /// a word pair to score; omit when using --pairs
    #[arg(value_names = ["WORD_A", "WORD_B"], num_args = 0..=2)]
    words: Vec<String>,
    /// file of word pairs, one "a b" per line
    #[arg(long)]
    pairs: Option<PathBuf>,
    /// similarity method name, e.g. E-0-NF-PF, LE-U-0-F, U, p_data-cn
    #[arg(long)]
    method: Option<SimilarityMethod>,
    #[command(flatten)]
    source: ModelArgs,
    #[command(flatten)]
    alpha: AlphaArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct AnalogyArgs {
    /// the three known words of "a : b :: c : ?"
    #[arg(value_names = ["A", "B", "C"], num_args = 3)]
    words: Vec<String>,
    /// how many candidates to report
    #[arg(long)]
    top: Option<usize>,
    /// rank in the fisher metric or the identity metric
    #[arg(long)]
    metric: Option<RankMetric>,
    /// keep the three query words in the candidate pool
    #[arg(long)]
    include_queries: bool,
    #[command(flatten)]
    source: ModelArgs,
    #[command(flatten)]
    geometry: GeometryArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct EvalSimArgs {
    /// similarity dataset: "word1 word2 score" lines; repeatable
    #[arg(long = "dataset")]
    datasets: Vec<PathBuf>,
    /// method name; repeatable
    #[arg(long = "method")]
    methods: Vec<SimilarityMethod>,
    #[command(flatten)]
    source: ModelArgs,
    #[command(flatten)]
    alpha: AlphaArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct EvalAnalogyArgs {
    /// analogy dataset with ": section" headers and 4-word lines
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// rank in the fisher metric or the identity metric
    #[arg(long)]
    metric: Option<RankMetric>,
    #[command(flatten)]
    source: ModelArgs,
    #[command(flatten)]
    geometry: GeometryArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// similarity dataset; repeatable
    #[arg(long = "dataset")]
    datasets: Vec<PathBuf>,
    /// method name; repeatable
    #[arg(long = "method")]
    methods: Vec<SimilarityMethod>,
    #[arg(long, allow_hyphen_values = true)]
    alpha_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha_max: Option<f64>,
    #[arg(long)]
    alpha_step: Option<f64>,
    /// co-occurrence file, needed by 'ud' references and p_data-cn
    #[arg(long)]
    cooccur: Option<PathBuf>,
    #[command(flatten)]
    source: ModelArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct PcaArgs {
    /// embedding or model vector text file ("n d" header, one word per line)
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// comma-separated words to project; default is every row
    #[arg(long)]
    words: Option<String>,
    /// file with one word per line to project
    #[arg(long)]
    words_file: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Vocab(args) => commands::vocab(args),
        Command::Cooccur(args) => commands::cooccur(args),
        Command::Train(args) => commands::train(args),
        Command::Embed(args) => commands::embed(args),
        Command::Sim(args) => commands::sim(args),
        Command::Analogy(args) => commands::analogy(args),
        Command::EvalSim(args) => commands::eval_sim(args),
        Command::EvalAnalogy(args) => commands::eval_analogy(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Pca(args) => commands::pca(args),
    };
    match result {
        Ok(()) => 0,
        Err(CliError::Usage(message)) => {
            eprintln!("usage error: {message}");
            1
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}
