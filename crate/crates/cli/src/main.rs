//! `effparam`: sample a model, embed it with diffusion maps, and report verdicts.

// `!(x > 0.0)` deliberately rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use effparam::figures::FigureId;
use effparam::Error;

use config::{ExperimentConfig, Stage};
use run::Run;

/// Environment variable naming the default output root.
const OUT_ENV: &str = "EFFPARAM_OUT";
const DEFAULT_OUT: &str = "effparam-out";

#[derive(Parser)]
#[command(name = "effparam", version, about = "Effective-parameter discovery with diffusion maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; falls back to the config's `out`, then $EFFPARAM_OUT.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the model and write dataset.csv.
    Generate(Common),
    /// Generate, then write the diffusion-map embedding.
    Embed(Common),
    /// Generate, embed and evaluate the analysis steps.
    Analyze(Common),
    /// Trace the catalyst-pellet effectiveness curve.
    Pellet(Common),
    /// Reproduce one figure's plot data.
    Figure {
        /// One of fig1, fig2-4, fig5, fig6, mmh, fig7, fig8, svals, rect, henon, activesub.
        id: String,
        #[command(flatten)]
        common: Common,
    },
}

enum Failure {
    Invalid(Error),
    Stage(Error),
}

fn resolve(common: &Common, required: bool) -> Result<(ExperimentConfig, PathBuf), Error> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None if required => return Err(Error::Config("--config is required for this command".into())),
        None => ExperimentConfig::bare(0),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    let out = common
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    cfg.out = Some(out.clone());
    Ok((cfg, out))
}

fn execute(command: Command) -> Result<(), Failure> {
    let (name, common, stage, figure) = match command {
        Command::Generate(c) => ("generate", c, Some(Stage::Generate), None),
        Command::Embed(c) => ("embed", c, Some(Stage::Embed), None),
        Command::Analyze(c) => ("analyze", c, Some(Stage::Analyze), None),
        Command::Pellet(c) => ("pellet", c, None, None),
        Command::Figure { id, common } => ("figure", common, None, Some(id)),
    };
    let (cfg, out) = resolve(&common, stage.is_some()).map_err(Failure::Invalid)?;
    let figure = figure.map(|id| id.parse::<FigureId>()).transpose().map_err(Failure::Invalid)?;
    if let Some(s) = stage {
        cfg.validate_for(s).map_err(Failure::Invalid)?;
    }

    let mut run = Run::start(name, &cfg, &out).map_err(Failure::Stage)?;
    let result = match (stage, figure) {
        (Some(s), _) => run::experiment(&mut run, &cfg, s),
        (None, Some(id)) => run::figure(&mut run, id, cfg.seed),
        (None, None) => run::pellet(&mut run, &cfg.pellet.clone().unwrap_or_default()),
    };
    run.finish(result.is_ok()).map_err(Failure::Stage)?;
    result.map_err(Failure::Stage)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("effparam: invalid configuration: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Stage(e)) => {
            eprintln!("effparam: {e}");
            ExitCode::from(1)
        }
    }
}
