//! Command line driver: config-file orchestration of the preprocess,
//! features, and validate stages, synthetic field generation, and report
//! re-rendering. Exit codes: 0 success, 1 config error, 2 data error,
//! 3 internal error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use sweetspot_core::config::{load_config, ConfigError, PipelineConfig};
use sweetspot_core::pipeline::{
    run_features, run_preprocess, run_report, run_synth, run_validate, PipelineError,
};
use sweetspot_core::synthfield::SynthConfig;

#[derive(Parser)]
#[command(
    name = "sweetspot",
    version,
    about = "Data-driven production sweet spot prediction from well logs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Ingest LAS logs and production data; write standardized log blocks
    /// and the cumulative production frame.
    Preprocess(RunArgs),
    /// Fit fPCA per (property, formation) block and interpolate the leading
    /// scores to the horizontal wells.
    Features(RunArgs),
    /// Benchmark the model zoo and run nested leave-one-well-out validation
    /// with a kriging baseline; write report, CSV, and scatter plots.
    Validate(ValidateArgs),
    /// Generate a synthetic field with known ground truth.
    Synth(SynthArgs),
    /// Re-render report artifacts from an existing report.json and print a
    /// summary.
    Report(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Pipeline config TOML.
    #[arg(long)]
    config: PathBuf,
    /// Override the evaluation seed (wins over SWEETSPOT_SEED and config).
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Validate a single phase instead of the configured list.
    #[arg(long, value_parser = ["oil", "gas"])]
    phase: Option<String>,
    /// Validate at this horizon (months); must be one of study.horizons.
    #[arg(long)]
    horizon: Option<u32>,
}

#[derive(Args)]
struct SynthArgs {
    /// Directory the field is written into.
    #[arg(long)]
    out: PathBuf,
    /// Generator seed (wins over SWEETSPOT_SEED; default 42).
    #[arg(long)]
    seed: Option<u64>,
    /// Censor production histories: 10 short-history wells and 2 without
    /// gas, mirroring the study-sized dataset.
    #[arg(long)]
    censored: bool,
    /// Full generator config TOML; overrides --censored.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not errors; anything else is bad usage,
            // which is a config error by the exit code contract.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

/// Seed precedence: command line flag, then SWEETSPOT_SEED, then the config.
fn env_seed() -> Result<Option<u64>, PipelineError> {
    match std::env::var("SWEETSPOT_SEED") {
        Ok(v) => v.trim().parse::<u64>().map(Some).map_err(|_| {
            PipelineError::Config(ConfigError::Invalid(format!(
                "SWEETSPOT_SEED {v:?} is not an unsigned integer"
            )))
        }),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(PipelineError::Config(ConfigError::Invalid(format!(
            "SWEETSPOT_SEED: {e}"
        )))),
    }
}

fn load_run_config(args: &RunArgs) -> Result<PipelineConfig, PipelineError> {
    let mut cfg = load_config(&args.config)?;
    if let Some(seed) = args.seed.or(env_seed()?) {
        cfg.evaluation.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output.dir = out.clone();
    }
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<(), PipelineError> {
    match cli.cmd {
        Cmd::Preprocess(args) => {
            let cfg = load_run_config(&args)?;
            let audit = run_preprocess(&cfg)?;
            for (well, curves) in &audit.unmapped_curves {
                eprintln!("warning: {well}: unmapped curves {}", curves.join(", "));
            }
            for (key, block) in &audit.blocks {
                for r in &block.rejections {
                    eprintln!("warning: {key}: {r}");
                }
                if block.wells == 0 {
                    eprintln!("warning: {key}: no wells passed extraction");
                }
            }
            println!(
                "preprocessed {} LAS files: {} vertical wells, {} horizontal wells, {} blocks, production frame of {} wells -> {}",
                audit.las_files,
                audit.vertical_wells,
                audit.horizontal_wells,
                audit.blocks.values().filter(|b| b.wells > 0).count(),
                audit.production_wells,
                cfg.output.dir.display()
            );
            Ok(())
        }
        Cmd::Features(args) => {
            let cfg = load_run_config(&args)?;
            let audit = run_features(&cfg)?;
            for s in &audit.skipped_blocks {
                eprintln!(
                    "warning: {}/{}: fPCA skipped: {}",
                    s.property, s.formation, s.reason
                );
            }
            for a in &audit.interpolation {
                if !a.missing.is_empty() {
                    eprintln!(
                        "warning: {}@{}: {} wells left missing",
                        a.feature,
                        a.formation,
                        a.missing.len()
                    );
                }
            }
            println!(
                "fit {} fPCA models, appended {} feature columns -> {}",
                audit.models_fit,
                audit.feature_columns.len(),
                cfg.output.dir.display()
            );
            Ok(())
        }
        Cmd::Validate(args) => {
            let mut cfg = load_run_config(&args.run)?;
            if let Some(phase) = &args.phase {
                cfg.evaluation.phases = vec![phase.clone()];
            }
            if let Some(h) = args.horizon {
                if !cfg.study.horizons.contains(&h) {
                    return Err(PipelineError::Config(ConfigError::Invalid(format!(
                        "--horizon {h} is not one of study.horizons {:?}",
                        cfg.study.horizons
                    ))));
                }
                cfg.evaluation.horizon = Some(h);
            }
            let report = run_validate(&cfg)?;
            print!("{}", sweetspot_core::report::summary_text(&report));
            println!("\nwrote report.json, predictions.csv, and scatter plots -> {}", cfg.output.dir.display());
            Ok(())
        }
        Cmd::Synth(args) => {
            let seed = args.seed.or(env_seed()?).unwrap_or(42);
            let cfg = match &args.config {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| {
                        PipelineError::Config(ConfigError::Io {
                            path: path.display().to_string(),
                            source: e,
                        })
                    })?;
                    let mut cfg: SynthConfig = toml::from_str(&text)
                        .map_err(|e| PipelineError::Config(ConfigError::Invalid(e.to_string())))?;
                    if args.seed.is_some() || std::env::var_os("SWEETSPOT_SEED").is_some() {
                        cfg.seed = seed;
                    }
                    cfg
                }
                None if args.censored => SynthConfig::study_scale_censored(seed),
                None => SynthConfig::study_scale(seed),
            };
            run_synth(&cfg, &args.out)?;
            println!(
                "wrote synthetic field ({} vertical, {} horizontal wells, seed {}) -> {}",
                cfg.n_vertical,
                cfg.n_horizontal,
                cfg.seed,
                args.out.display()
            );
            Ok(())
        }
        Cmd::Report(args) => {
            let cfg = load_run_config(&args)?;
            let summary = run_report(&cfg)?;
            print!("{summary}");
            Ok(())
        }
    }
}
