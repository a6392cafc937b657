mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sasgrade::features::FeatureGroup;

use crate::config::{Overrides, RunConfig, Scalar};

/// Short-answer scoring: train per-prompt models, evaluate them, score new
/// responses and explain the scores.
#[derive(Debug, Parser)]
#[command(name = "sasgrade", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long, env = "SASGRADE_CONFIG")]
    config: PathBuf,
    /// Restrict to these prompt ids (repeatable).
    #[arg(long = "prompt")]
    prompts: Vec<String>,
    /// Overrides `train.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    disable: DisableFlags,
}

#[derive(Debug, Args)]
struct DisableFlags {
    /// Drop Word2Vec and Doc2Vec features.
    #[arg(long)]
    disable_embeddings: bool,
    /// Drop POS n-gram features.
    #[arg(long)]
    disable_pos_ngrams: bool,
    /// Drop weighted keyword features.
    #[arg(long)]
    disable_weighted_keywords: bool,
    /// Drop prompt overlap features.
    #[arg(long)]
    disable_prompt_overlap: bool,
    /// Drop passage overlap features.
    #[arg(long)]
    disable_lexical_overlap: bool,
    /// Drop logical operator counts.
    #[arg(long)]
    disable_logical_operators: bool,
    /// Drop tense and aspect features.
    #[arg(long)]
    disable_temporal: bool,
    /// Drop sentence and word length statistics.
    #[arg(long)]
    disable_length_stats: bool,
    /// Drop word difficulty and diversity features.
    #[arg(long)]
    disable_word_freq_difficulty: bool,
}

impl DisableFlags {
    fn groups(&self) -> Vec<FeatureGroup> {
        use FeatureGroup::*;
        [
            (self.disable_embeddings, Embeddings),
            (self.disable_pos_ngrams, PosNgrams),
            (self.disable_weighted_keywords, WeightedKeywords),
            (self.disable_prompt_overlap, PromptOverlap),
            (self.disable_lexical_overlap, LexicalOverlap),
            (self.disable_logical_operators, LogicalOperators),
            (self.disable_temporal, Temporal),
            (self.disable_length_stats, LengthStats),
            (self.disable_word_freq_difficulty, WordFreqDifficulty),
        ]
        .into_iter()
        .filter_map(|(off, g)| off.then_some(g))
        .collect()
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train one model per prompt and write them under `<out>/models`.
    Train(Common),
    /// Grade responses with trained models.
    Score {
        #[command(flatten)]
        common: Common,
        /// Model file (repeatable); each response goes to the model of its prompt.
        #[arg(long = "model", required = true)]
        models: Vec<PathBuf>,
        /// Responses as TSV: `Id EssaySet EssayText`, or the training layout.
        #[arg(long)]
        input: PathBuf,
    },
    /// Train, test on the held-out split and report QWK per prompt.
    Evaluate(Common),
    /// Retrain without each feature group in turn and rank the QWK falls.
    Ablate {
        #[command(flatten)]
        common: Common,
        /// Groups to ablate (default: every enabled group).
        #[arg(long = "group")]
        groups: Vec<FeatureGroup>,
    },
    /// Explain the grades of responses.
    Feedback {
        #[command(flatten)]
        common: Common,
        #[arg(long = "model", required = true)]
        models: Vec<PathBuf>,
        #[arg(long)]
        input: PathBuf,
        /// Only this response id.
        #[arg(long)]
        id: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Groups listed in the text report.
        #[arg(long, default_value_t = 5)]
        top: usize,
    },
}

fn load_config(c: &Common) -> sasgrade::Result<RunConfig> {
    let overrides = Overrides {
        seed: c.seed,
        out: c.out.clone(),
        disabled: c.disable.groups(),
    };
    RunConfig::load(&c.config, &overrides)
}

macro_rules! with_scalar {
    ($cfg:expr, $f:ident($($arg:expr),*)) => {
        match $cfg.scalar {
            Scalar::F64 => commands::$f::<f64>($($arg),*),
            Scalar::F32 => commands::$f::<f32>($($arg),*),
        }
    };
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Train(c) => {
            let cfg = load_config(c)?;
            with_scalar!(cfg, train(&cfg, &c.prompts))
        }
        Command::Evaluate(c) => {
            let cfg = load_config(c)?;
            with_scalar!(cfg, evaluate(&cfg, &c.prompts))
        }
        Command::Ablate { common, groups } => {
            let cfg = load_config(common)?;
            with_scalar!(cfg, ablate(&cfg, &common.prompts, groups))
        }
        Command::Score { common, models, input } => {
            let cfg = load_config(common)?;
            with_scalar!(cfg, score(&cfg, models, input, common.out.as_deref()))
        }
        Command::Feedback { common, models, input, id, format, top } => {
            let cfg = load_config(common)?;
            let json = matches!(format, Format::Json);
            with_scalar!(cfg, feedback(&cfg, models, input, id.as_deref(), json, *top))
        }
    }
}

/// 2 configuration, 3 I/O, 4 model version or schema, 5 degenerate QWK,
/// 6 malformed data, 1 anything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    use sasgrade::Error as E;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e.root() {
                E::Config(_) => 2,
                E::Io { .. } => 3,
                E::ModelVersion { .. } | E::SchemaMismatch(_) => 4,
                E::DegenerateRatings => 5,
                E::Parse { .. } | E::InvalidInput(_) | E::ModelFormat(_) => 6,
                E::Prompt { .. } => 1,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 3;
        }
    }
    1
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
