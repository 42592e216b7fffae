mod commands;
mod config;
mod error;
mod serve;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use parlascope::dataset::Task;
use parlascope::report::Direction;

use crate::config::RunConfig;

/// Parliamentary debate analytics: ingestion, topic models, datasets,
/// classifiers and polarity reports.
#[derive(Debug, Parser)]
#[command(name = "parlascope", version)]
struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse TEI session files (and optional CoNLL-U) into a speech store.
    Ingest(IngestArgs),
    /// Sessions and words per parliament and year.
    Stats(StatsArgs),
    /// Clean speeches and build the vocabulary and document-term matrix.
    Preprocess(PreprocessArgs),
    /// Train one LDA model.
    Lda(LdaArgs),
    /// Train LDA models over a range of topic counts.
    Sweep(SweepArgs),
    /// Export the topic explorer payload for a model.
    Vis(VisArgs),
    /// Build a balanced labeled dataset and its train/test split.
    Dataset(DatasetArgs),
    /// Train the naive Bayes baseline.
    Train(TrainArgs),
    /// Evaluate a classifier on a labeled test set.
    Eval(EvalArgs),
    /// Score sampled speeches with a classifier or external scorer.
    Score(ScoreArgs),
    /// Polarity tables, histograms and validation lists from scores.
    Report(ReportArgs),
    /// Serve topic explorer payloads over HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct IngestArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// Output speech store (JSONL).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long)]
    speeches: PathBuf,
    /// Output CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PreprocessArgs {
    #[arg(long)]
    speeches: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    language: Option<String>,
    #[arg(long)]
    config_dir: Option<PathBuf>,
    #[arg(long)]
    min_count: Option<u64>,
    #[arg(long)]
    min_token_len: Option<usize>,
    #[arg(long)]
    include_propn: Option<bool>,
    #[arg(long)]
    pos_filter: Option<bool>,
    /// Keep only speeches by MPs in their regular role.
    #[arg(long)]
    regular_only: Option<bool>,
    #[arg(long)]
    parliament: Option<String>,
}

#[derive(Debug, Args, Clone)]
struct PriorArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct LdaArgs {
    /// Directory written by `preprocess`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    k: Option<usize>,
    #[command(flatten)]
    priors: PriorArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    k_min: Option<usize>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    holdout_fraction: Option<f64>,
    #[command(flatten)]
    priors: PriorArgs,
}

#[derive(Debug, Args)]
struct VisArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    vocabulary: PathBuf,
    /// Output VisData JSON.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    top_n: Option<usize>,
}

#[derive(Debug, Args)]
struct DatasetArgs {
    #[arg(long)]
    task: Task,
    /// Speech store, for metadata tasks.
    #[arg(long)]
    speeches: Option<PathBuf>,
    /// Source manifest, for sentiment and emotion.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    n_per_class: Option<usize>,
    #[arg(long)]
    train_fraction: Option<f64>,
    #[arg(long)]
    wing_map: Option<PathBuf>,
    #[arg(long)]
    parliament: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    task: Task,
    /// Output model JSON.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    language: Option<String>,
    #[arg(long)]
    config_dir: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
struct ScorerArgs {
    /// Baseline model written by `train`.
    #[arg(long, conflicts_with = "scorer")]
    model: Option<PathBuf>,
    /// External scorer configuration (JSON).
    #[arg(long)]
    scorer: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    test: PathBuf,
    #[arg(long)]
    task: Task,
    #[command(flatten)]
    scorer: ScorerArgs,
    /// Output metrics JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    speeches: PathBuf,
    #[command(flatten)]
    scorer: ScorerArgs,
    /// Output scores (JSONL).
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    year: Option<i32>,
    #[arg(long)]
    sample_size: Option<usize>,
    #[arg(long)]
    min_chars: Option<usize>,
    #[arg(long)]
    parliament: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long)]
    speeches: PathBuf,
    #[arg(long)]
    scores: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    top_k: Option<usize>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    neg_threshold: Option<f64>,
    #[arg(long)]
    pos_threshold: Option<f64>,
    /// Which validation lists to export.
    #[arg(long, value_delimiter = ',', default_value = "negative,positive")]
    directions: Vec<Direction>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    /// Directory of VisData JSON files; the file stem is the model id.
    #[arg(long)]
    models: PathBuf,
    /// Static explorer assets.
    #[arg(long)]
    assets: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(error::EXIT_USAGE as u8) } else { ExitCode::SUCCESS };
        }
    };
    let name = commands::name(&cli.command);
    let result = RunConfig::load(cli.config.as_deref()).and_then(|cfg| commands::run(cli.command, &cfg));
    match result {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            let code = error::exit_code(&err);
            let line = serde_json::json!({
                "command": name,
                "status": "error",
                "exit_code": code,
                "error": format!("{err:#}"),
            });
            eprintln!("error: {err:#}");
            eprintln!("{line}");
            ExitCode::from(code as u8)
        }
    }
}
