//! `orbiglue` command-line front end.
//!
//! Exit codes: 0 success (or unobstructed), 1 obstructed or refused, 2 error.

mod config;
mod hitchin;
mod obstruction;
mod output;
mod study;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use crate::config::*;
use crate::output::Output;

#[derive(Parser)]
#[command(name = "orbiglue", version, about = "Obstructions, topology checks and gluing studies for Einstein orbifold desingularizations")]
struct Cli {
    /// TOML config file; unknown keys are rejected.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed for randomized inputs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan orientations of a curvature jet for a vanishing obstruction (exit 0 unobstructed, 1 obstructed).
    Obstruction,
    /// Hitchin-Thorpe bookkeeping for a desingularization tree.
    HitchinThorpe,
    /// Run a numerical study.
    Study {
        #[command(subcommand)]
        study: Study,
    },
}

#[derive(Subcommand)]
enum Study {
    Annulus,
    ResidualScaling,
    Pinching,
    SinWarp,
    /// Certified fixed-point solve (exit 1 with a refusal record when inadmissible).
    Picard,
}

fn required<T: serde::de::DeserializeOwned>(cli: &Cli, what: &str) -> Result<T> {
    let path = cli.config.as_deref().with_context(|| format!("--config <path> with {what} is required"))?;
    parse(path)
}

fn run(cli: &Cli) -> Result<i32> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let path = cli.config.as_deref();
    let seed = cli.seed;
    match &cli.command {
        Command::Obstruction => {
            let cfg: ObstructionConfig = required(cli, "a [jet] table")?;
            let mut out = Output::new(&cli.out, "obstruction", &cfg, seed)?;
            let code = obstruction::run(&cfg, &mut out, seed)?;
            out.finish()?;
            Ok(code)
        }
        Command::HitchinThorpe => {
            let spec: orbiglue::topology_checker::TreeSpec = required(cli, "a tree description")?;
            let mut out = Output::new(&cli.out, "hitchin-thorpe", &spec, seed)?;
            let code = hitchin::run(&spec, &mut out)?;
            out.finish()?;
            Ok(code)
        }
        Command::Study { study } => {
            macro_rules! go {
                ($ty:ty, $name:expr, |$c:ident, $o:ident| $body:expr) => {{
                    let $c: $ty = load(path)?;
                    let mut $o = Output::new(&cli.out, $name, &$c, seed)?;
                    let code = $body?;
                    $o.finish()?;
                    Ok(code)
                }};
            }
            match study {
                Study::Annulus => go!(AnnulusStudy, "study annulus", |c, o| study::annulus(&c, &mut o)),
                Study::ResidualScaling => {
                    go!(ResidualScalingStudy, "study residual-scaling", |c, o| study::residual_scaling(&c, &mut o))
                }
                Study::Pinching => go!(PinchingStudyConfig, "study pinching", |c, o| study::pinching(&c, &mut o)),
                Study::SinWarp => go!(SinWarpStudy, "study sin-warp", |c, o| study::sin_warp(&c, &mut o)),
                Study::Picard => go!(PicardStudy, "study picard", |c, o| study::picard(&c, &mut o, seed)),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.to_string().contains("under-resolved") {
                eprintln!("hint: increase the number of shells or samples in the config");
            }
            ExitCode::from(2)
        }
    }
}
