//! `framelex`: batch driver for lexicon induction, projection, frame
//! assignment and coverage statistics.
//!
//! ```text
//! framelex <command> [--config run.toml] [--section.key=value ...]
//! ```
//!
//! Exit status is 0 on success, 1 on a validation or data error and 2 on a
//! usage error.

mod commands;
mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{Config, ValidationError};

#[derive(Parser)]
#[command(name = "framelex", version, about = "Frame lexicons and agenda-setting statistics for news corpora")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct StageArgs {
    /// TOML run configuration with one table per stage.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Overrides of configuration keys, e.g. `--granger.lags=1,2`.
    #[arg(
        value_name = "--SECTION.KEY=VALUE",
        trailing_var_arg = true,
        allow_hyphen_values = true
    )]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Induce base lexicons from the annotated corpus by PMI.
    Induce(StageArgs),
    /// Translate and expand base lexicons into the target corpus.
    Project(StageArgs),
    /// Assign frames to every document of the corpus.
    Assign(StageArgs),
    /// Entity coverage per period.
    Coverage(StageArgs),
    /// Pearson correlation of coverage with the indicator.
    Correlate(StageArgs),
    /// Lag regressions of coverage on the indicator and back.
    Granger(StageArgs),
    /// nPMI between entity focus and each frame.
    Npmi(StageArgs),
    /// Words gaining salience after market downturns, per frame.
    Agendalex(StageArgs),
    /// Cross-validated primary-frame accuracy.
    EvalPrimary(StageArgs),
    /// Cross-validated per-frame precision, recall and F1.
    EvalFrames(StageArgs),
    /// Build word-intrusion sets from final lexicons.
    IntruderGen(StageArgs),
    /// Score annotator responses to word-intrusion sets.
    IntruderScore(StageArgs),
}

impl Command {
    fn split(self) -> (&'static str, StageArgs) {
        match self {
            Command::Induce(a) => ("induce", a),
            Command::Project(a) => ("project", a),
            Command::Assign(a) => ("assign", a),
            Command::Coverage(a) => ("coverage", a),
            Command::Correlate(a) => ("correlate", a),
            Command::Granger(a) => ("granger", a),
            Command::Npmi(a) => ("npmi", a),
            Command::Agendalex(a) => ("agendalex", a),
            Command::EvalPrimary(a) => ("eval-primary", a),
            Command::EvalFrames(a) => ("eval-frames", a),
            Command::IntruderGen(a) => ("intruder-gen", a),
            Command::IntruderScore(a) => ("intruder-score", a),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (name, args) = cli.command.split();
    debug_assert!(commands::COMMANDS.contains(&name));
    let result = Config::load(args.config.as_deref(), &args.overrides)
        .map_err(anyhow::Error::from)
        .and_then(|cfg| commands::dispatch(name, &cfg));
    match result {
        Ok(manifest) => {
            println!("{}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            match e.downcast_ref::<ValidationError>() {
                Some(v) => eprintln!("error: {v}"),
                None => eprintln!("error: {e:#}"),
            }
            ExitCode::from(1)
        }
    }
}
