use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tmclean::cli::{self, CliError, RunConfig};

#[derive(Parser)]
#[command(
    name = "tmclean",
    version,
    about = "Classify and clean bilingual translation memories"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand; each one overrides the matching
/// config-file field.
#[derive(Args, Debug, Default)]
struct CommonOpts {
    /// JSON configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// Task: binary or fine-grained
    #[arg(long)]
    task: Option<String>,
    /// Comma-separated feature names (default: the nine-feature schema)
    #[arg(long, value_delimiter = ',')]
    features: Option<Vec<String>>,
    /// N-best list size requested from the MT provider
    #[arg(long)]
    n_best: Option<usize>,
    /// Number of trees in the forest
    #[arg(long)]
    trees: Option<usize>,
    /// Glossary TSV path (selects glossary MT mode)
    #[arg(long)]
    glossary: Option<PathBuf>,
    /// Glossary source language
    #[arg(long)]
    glossary_src: Option<String>,
    /// Glossary target language
    #[arg(long)]
    glossary_tgt: Option<String>,
    /// Remote MT endpoint base URL (selects remote MT mode)
    #[arg(long)]
    mt_endpoint: Option<String>,
    /// JSONL translation cache path
    #[arg(long)]
    mt_cache: Option<PathBuf>,
    /// Directory of *.profile language-identification profiles
    #[arg(long)]
    profile_dir: Option<PathBuf>,
    /// Fail on the first malformed record (default)
    #[arg(long, conflicts_with = "lenient")]
    strict: bool,
    /// Skip malformed records with a warning
    #[arg(long)]
    lenient: bool,
    /// Worker thread count
    #[arg(long)]
    parallelism: Option<usize>,
}

impl CommonOpts {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(task) = &self.task {
            config.task = Some(task.clone());
        }
        if let Some(features) = &self.features {
            config.schema = Some(features.clone());
        }
        if let Some(n) = self.n_best {
            config.n_best = n;
        }
        if let Some(trees) = self.trees {
            config.n_trees = trees;
        }
        if let Some(glossary) = &self.glossary {
            config.mt.mode = Some("glossary".into());
            config.mt.glossary_path = Some(glossary.clone());
        }
        if let Some(src) = &self.glossary_src {
            config.mt.source_lang = Some(src.clone());
        }
        if let Some(tgt) = &self.glossary_tgt {
            config.mt.target_lang = Some(tgt.clone());
        }
        if let Some(endpoint) = &self.mt_endpoint {
            config.mt.mode = Some("remote".into());
            config.mt.endpoint = Some(endpoint.clone());
        }
        if let Some(cache) = &self.mt_cache {
            config.mt.cache_path = Some(cache.clone());
        }
        if let Some(dir) = &self.profile_dir {
            config.langid.mode = Some("profiles".into());
            config.langid.profile_dir = Some(dir.clone());
        }
        if self.strict {
            config.strict = true;
        }
        if self.lenient {
            config.strict = false;
        }
        if let Some(workers) = self.parallelism {
            config.parallelism = Some(workers);
        }
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Class and language-pair counts for a labeled TSV
    Stats {
        input: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Dump the feature matrix for a dataset as TSV
    Extract {
        input: PathBuf,
        /// Output TSV path
        #[arg(long)]
        out: PathBuf,
        /// Treat the input as labeled (six-column) TSV
        #[arg(long)]
        labeled: bool,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Train a random-forest model on a labeled TSV
    Train {
        input: PathBuf,
        /// Model output path
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Predict classes and probabilities for a dataset
    Predict {
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Output TSV path
        #[arg(long)]
        out: PathBuf,
        /// Treat the input as labeled (six-column) TSV
        #[arg(long)]
        labeled: bool,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Score a model against a labeled TSV
    Evaluate {
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Optional JSON report path
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Repeated stratified train/test evaluation
    Cv {
        input: PathBuf,
        /// Optional JSON report path
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Greedy forward feature selection
    SelectFeatures {
        input: PathBuf,
        /// Comma-separated candidate features (default: all)
        #[arg(long, value_delimiter = ',')]
        candidates: Option<Vec<String>>,
        /// Optional JSON report path
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Split a translation memory into kept and rejected files
    Clean {
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Output path for kept units
        #[arg(long)]
        kept: PathBuf,
        /// Output path for rejected units
        #[arg(long)]
        rejected: PathBuf,
        /// Optional JSON summary path
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Invalid-probability cutoff
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        /// Source language (required for TMX input)
        #[arg(long)]
        source_lang: Option<String>,
        /// Target language (required for TMX input)
        #[arg(long)]
        target_lang: Option<String>,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn run() -> Result<(), CliError> {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => return Err(CliError::Usage(e.to_string())),
        Err(e) => {
            // --help / --version
            print!("{e}");
            return Ok(());
        }
    };
    match cli.command {
        Command::Stats { input, common } => {
            let config = common.resolve()?;
            print!("{}", cli::cmd_stats(&input, &config)?);
        }
        Command::Extract { input, out, labeled, common } => {
            let config = common.resolve()?;
            cli::cmd_extract(&input, &out, labeled, &config)?;
        }
        Command::Train { input, model, common } => {
            let config = common.resolve()?;
            print!("{}", cli::cmd_train(&input, &model, &config)?);
        }
        Command::Predict { input, model, out, labeled, common } => {
            let config = common.resolve()?;
            cli::cmd_predict(&input, &model, &out, labeled, &config)?;
        }
        Command::Evaluate { input, model, out, common } => {
            let config = common.resolve()?;
            print!("{}", cli::cmd_evaluate(&input, &model, out.as_deref(), &config)?);
        }
        Command::Cv { input, out, common } => {
            let config = common.resolve()?;
            print!("{}", cli::cmd_cv(&input, out.as_deref(), &config)?);
        }
        Command::SelectFeatures { input, candidates, out, common } => {
            let config = common.resolve()?;
            print!(
                "{}",
                cli::cmd_select_features(&input, candidates.as_deref(), out.as_deref(), &config)?
            );
        }
        Command::Clean {
            input,
            model,
            kept,
            rejected,
            summary,
            threshold,
            source_lang,
            target_lang,
            common,
        } => {
            let config = common.resolve()?;
            print!(
                "{}",
                cli::cmd_clean(
                    &input,
                    &model,
                    &kept,
                    &rejected,
                    summary.as_deref(),
                    threshold,
                    source_lang.as_deref(),
                    target_lang.as_deref(),
                    &config,
                )?
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
