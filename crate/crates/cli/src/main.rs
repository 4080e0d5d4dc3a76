//! `vicpred`: ingest, label, featurize, train, evaluate, score and serve.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 runtime error.

mod commands;
mod matrix;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "vicpred", version, about = "Vulnerability-inducing change prediction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate and normalize change and issue exports.
    Ingest(IngestArgs),
    /// Label changes as ViC, VfC or LNC through blame lineage.
    Label(LabelArgs),
    /// Write the causal feature matrix.
    Featurize(FeaturizeArgs),
    /// Train a classifier on a feature matrix.
    Train(TrainArgs),
    /// Run an evaluation protocol.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Score one change against a trained model.
    Score(ScoreArgs),
    /// Run the review-bot HTTP service.
    Serve(ServeArgs),
    /// Generate a synthetic labeled corpus.
    Synth(SynthArgs),
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Stratified N-fold cross-validation.
    Nfold(NfoldArgs),
    /// Period-by-period retraining on labels known so far.
    Online(OnlineArgs),
    /// N-fold runs over feature subsets.
    Ablation(AblationArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    #[arg(long)]
    pub changes: PathBuf,
    #[arg(long)]
    pub issues: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct LabelArgs {
    #[arg(long)]
    pub changes: PathBuf,
    #[arg(long)]
    pub issues: PathBuf,
    /// History fixture (JSON) or a git working tree.
    #[arg(long)]
    pub history: PathBuf,
    /// Delay before a ViC label is known, e.g. `14d`, `0` or `never`.
    #[arg(long, default_value = "0")]
    pub label_delay: String,
    /// Also count issues without a CVE id.
    #[arg(long)]
    pub include_non_cve: bool,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct HistoryOpts {
    /// History period: `month` or a number of days such as `30d`.
    #[arg(long, default_value = "month")]
    pub period: String,
    #[arg(long)]
    pub decay_half_life_days: Option<f64>,
    /// Domain rank table (TOML).
    #[arg(long)]
    pub ranks: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct FeaturizeArgs {
    #[arg(long)]
    pub changes: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[command(flatten)]
    pub history: HistoryOpts,
    /// Output CSV file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ModelOpts {
    #[arg(long, default_value = "random-forest")]
    pub classifier: String,
    /// Feature subset, e.g. `all` or `VH+CC+RP`.
    #[arg(long, default_value = "all")]
    pub features: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    /// Multiplier on the weight of ViC rows.
    #[arg(long, default_value_t = 1.0)]
    pub positive_weight: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    /// Feature matrix written by `featurize`.
    #[arg(long)]
    pub matrix: PathBuf,
    #[command(flatten)]
    pub model: ModelOpts,
    /// Output model file.
    #[arg(long)]
    pub out: PathBuf,
    /// With --changes and --labels, also write the history checkpoint.
    #[arg(long, requires_all = ["changes", "labels"])]
    pub state_out: Option<PathBuf>,
    #[arg(long)]
    pub changes: Option<PathBuf>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[command(flatten)]
    pub history: HistoryOpts,
}

#[derive(Debug, Args, Serialize)]
pub struct CorpusOpts {
    #[arg(long)]
    pub changes: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct NfoldArgs {
    #[command(flatten)]
    pub corpus: CorpusOpts,
    #[command(flatten)]
    pub model: ModelOpts,
    #[command(flatten)]
    pub history: HistoryOpts,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct OnlineArgs {
    #[command(flatten)]
    pub corpus: CorpusOpts,
    #[command(flatten)]
    pub model: ModelOpts,
    #[command(flatten)]
    pub history: HistoryOpts,
    /// `cumulative` or `previous`.
    #[arg(long, default_value = "cumulative")]
    pub window: String,
    /// Overrides when ViC labels become known, e.g. `30d`.
    #[arg(long)]
    pub label_delay: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct AblationArgs {
    #[command(flatten)]
    pub corpus: CorpusOpts,
    #[command(flatten)]
    pub model: ModelOpts,
    #[command(flatten)]
    pub history: HistoryOpts,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// `families` or `universal`.
    #[arg(long, default_value = "families")]
    pub preset: String,
    /// Semicolon-separated subsets; replaces the preset.
    #[arg(long)]
    pub subsets: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ScoreArgs {
    /// Model file; repeat for a majority-vote ensemble.
    #[arg(long, required = true)]
    pub model: Vec<PathBuf>,
    /// History checkpoint.
    #[arg(long)]
    pub state: PathBuf,
    /// One change record (JSON).
    #[arg(long)]
    pub change: PathBuf,
    #[arg(long, default_value = "sent_for_review")]
    pub trigger: String,
    #[arg(long)]
    pub testing_threshold: Option<f64>,
    #[arg(long, default_value_t = 5)]
    pub top_k: usize,
    #[arg(long)]
    pub ranks: Option<PathBuf>,
    /// Output verdict file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ServeArgs {
    #[arg(long, required = true)]
    pub model: Vec<PathBuf>,
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Comma-separated reviewer accounts.
    #[arg(long, default_value = "")]
    pub reviewers: String,
    #[arg(long)]
    pub pool_state: Option<PathBuf>,
    #[arg(long, default_value = "feedback.jsonl")]
    pub feedback_log: PathBuf,
    #[arg(long)]
    pub testing_threshold: Option<f64>,
    #[arg(long)]
    pub ranks: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 72)]
    pub months: u32,
    #[arg(long, default_value_t = 8038)]
    pub changes: usize,
    #[arg(long, default_value_t = 585)]
    pub vics: usize,
    #[arg(long, default_value_t = 0.0)]
    pub double_month_rate: f64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            return ExitCode::from(if ok { 0 } else { 1 });
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
