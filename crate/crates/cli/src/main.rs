use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use topictaxo::pipeline::{emit_reports, run_with_jobs, PipelineConfig, RunManifest, Stage, StageStatus};
use topictaxo::Error;

const EXIT_INPUT: u8 = 2;
const EXIT_STAGE: u8 = 3;

/// Corpus-to-taxonomy pipeline.
///
/// Each stage subcommand runs the pipeline up to that stage, reusing
/// outputs already present in the output directory when their inputs are
/// unchanged. Set TOPICTAXO_LOG (error, warn, info, debug) for logging.
#[derive(Parser, Debug)]
#[command(name = "topictaxo", version)]
struct Cli {
    /// Configuration file ([section] key = value).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads for grid cells and sentence scans.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Default)]
struct Inputs {
    /// JSON-lines corpus (id, title, abstract); overrides [corpus] path.
    corpus: Option<PathBuf>,
    /// Reference taxonomy JSON; overrides [run] reference.
    #[arg(long)]
    reference: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Read, preprocess and index the corpus.
    Ingest(Inputs),
    /// Grid search, then train the selected model.
    Train(Inputs),
    /// Two-stage coherence grid search.
    Grid(Inputs),
    /// Rank concepts per topic.
    Terms(Inputs),
    /// Inter-topic distance map.
    Map(Inputs),
    /// Concept graph extraction, reduction and layout.
    Kg(Inputs),
    /// Compare the concept taxonomy with a reference.
    Compare(Inputs),
    /// Rebuild report.html from the artifacts in the output directory.
    Report,
    /// Full pipeline.
    Run(Inputs),
    /// Print the effective configuration.
    Config,
}

fn load_config(cli: &Cli) -> Result<PipelineConfig, Error> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out_dir {
        cfg.out_dir = o.clone();
    }
    let inputs = match &cli.command {
        Command::Ingest(i)
        | Command::Train(i)
        | Command::Grid(i)
        | Command::Terms(i)
        | Command::Map(i)
        | Command::Kg(i)
        | Command::Compare(i)
        | Command::Run(i) => Some(i),
        Command::Report | Command::Config => None,
    };
    if let Some(i) = inputs {
        if let Some(c) = &i.corpus {
            cfg.corpus.path = c.clone();
        }
        if let Some(r) = &i.reference {
            cfg.reference = Some(r.clone());
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn summarize(manifest: &RunManifest) {
    for s in &manifest.stages {
        let status = match s.status {
            StageStatus::Completed => "done",
            StageStatus::Reused => "reused",
            StageStatus::Skipped => "skipped",
            StageStatus::Failed => "FAILED",
        };
        println!("{:<8} {:<7} {:>8.2}s {}", s.stage.name(), status, s.seconds, s.outputs.keys().cloned().collect::<Vec<_>>().join(" "));
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::StageFailed { .. } => EXIT_STAGE,
        _ => EXIT_INPUT,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TOPICTAXO_LOG", "warn")).init();
    let cli = Cli::parse();
    let cfg = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    };
    let last = match &cli.command {
        Command::Config => {
            print!("{}", cfg.to_ini_string());
            return ExitCode::SUCCESS;
        }
        Command::Report => {
            return match emit_reports(&cfg.out_dir) {
                Ok(outcome) => {
                    for s in &outcome.sections {
                        println!("{:<32} {}", s.title, if s.available { "ok" } else { "unavailable" });
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_STAGE)
                }
            };
        }
        Command::Ingest(_) => Stage::Corpus,
        Command::Grid(_) => Stage::Grid,
        Command::Train(_) => Stage::Model,
        Command::Terms(_) => Stage::Terms,
        Command::Map(_) => Stage::Map,
        Command::Kg(_) => Stage::Kg,
        Command::Compare(_) => {
            if cfg.reference.is_none() {
                eprintln!("error: compare needs a reference taxonomy (--reference or [run] reference)");
                return ExitCode::from(EXIT_INPUT);
            }
            Stage::Compare
        }
        Command::Run(_) => Stage::Report,
    };
    match run_with_jobs(&cfg, last, cli.jobs) {
        Ok(manifest) => {
            summarize(&manifest);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
