//! Batch driver behind the `twolevel` binary.
//!
//! Every subcommand reads an optional flat config file (see [`config`]),
//! writes CSV/JSON files into `--out` and returns the process exit code:
//! 0 on success, 1 when a run or verification fails, 2 on bad input.

pub mod config;
pub mod output;

mod gate_cmd;
mod stage_cmd;
mod verify_cmd;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use config::RunConfig;
use output::Outputs;

#[derive(Debug, Parser)]
#[command(name = "twolevel", version, about = "Control experiments for open and closed two-level quantum systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Seed for every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Optimizer or pulse family, depending on the command.
    #[arg(long, global = true)]
    pub method: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Maximal gate fidelity over a (φ_W, T) grid.
    GateLandscape,
    /// Optimize one phase gate.
    GateOpt,
    /// Incoherent first stage with piecewise constant control.
    Stage1,
    /// First stage with the constant control and its duration.
    Stage1Unmodified,
    /// Coherent second stage by grid search over harmonic pulses.
    Stage2,
    /// Both stages chained.
    TwoStage,
    /// Oracle battery.
    Verify,
}

impl Command {
    /// Config key that `--method` sets.
    fn method_key(self) -> Option<&'static str> {
        match self {
            Command::GateLandscape => Some("landscape.method"),
            Command::GateOpt => Some("gate.method"),
            Command::Stage1 | Command::TwoStage => Some("stage1.method"),
            Command::Stage2 => Some("stage2.family"),
            Command::Stage1Unmodified | Command::Verify => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Command::GateLandscape => "gate-landscape",
            Command::GateOpt => "gate-opt",
            Command::Stage1 => "stage1",
            Command::Stage1Unmodified => "stage1-unmodified",
            Command::Stage2 => "stage2",
            Command::TwoStage => "two-stage",
            Command::Verify => "verify",
        }
    }
}

/// What a command produced.
pub struct Outcome {
    pub outputs: Outputs,
    /// Human-readable summary lines for stdout.
    pub log: Vec<String>,
    /// Set when the run completed but did not succeed.
    pub failure: Option<String>,
}

impl Outcome {
    fn ok(outputs: Outputs, log: Vec<String>) -> Self {
        Outcome { outputs, log, failure: None }
    }
}

fn input_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Config(_)
            | Error::InvalidParameter(_)
            | Error::InvalidControl(_)
            | Error::InvalidDensityMatrix(_)
            | Error::OutsideBlochBall { .. }
            | Error::IntervalMismatch { .. }
            | Error::DurationMismatch { .. }
            | Error::DegenerateSpectrum
    )
}

/// Loads the config and applies command-line overrides.
pub fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.set("seed", seed.to_string());
    }
    if let Some(m) = &cli.method {
        match cli.command.method_key() {
            Some(key) => cfg.set(key, m.clone()),
            None => return Err(Error::Config(format!("{} takes no --method", cli.command.name()))),
        }
    }
    Ok(cfg)
}

pub(crate) fn seed(cfg: &RunConfig) -> Result<u64> {
    Ok(cfg.count("seed", 0)? as u64)
}

/// Runs one command without touching the filesystem.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<Outcome> {
    let exp = cfg.word("experiment", command.name())?;
    if exp != command.name() {
        return Err(Error::Config(format!("config is for `{exp}`, not `{}`", command.name())));
    }
    let outcome = match command {
        Command::GateLandscape => gate_cmd::landscape(cfg)?,
        Command::GateOpt => gate_cmd::gate_opt(cfg)?,
        Command::Stage1 => stage_cmd::stage1(cfg)?,
        Command::Stage1Unmodified => stage_cmd::stage1_unmodified(cfg)?,
        Command::Stage2 => stage_cmd::stage2(cfg)?,
        Command::TwoStage => stage_cmd::two_stage(cfg)?,
        Command::Verify => verify_cmd::verify(cfg)?,
    };
    Ok(outcome)
}

/// Parses, runs and writes; returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = load_config(cli).and_then(|cfg| {
        let go = || {
            let out = execute(cli.command, &cfg)?;
            cfg.finish()?;
            Ok(out)
        };
        match cli.threads {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?
                .install(go),
            None => go(),
        }
    });
    match result {
        Ok(outcome) => {
            if let Err(e) = outcome.outputs.write_to(&cli.out) {
                eprintln!("error: {e}");
                return 1;
            }
            for line in &outcome.log {
                println!("{line}");
            }
            for name in outcome.outputs.names() {
                println!("wrote {}", cli.out.join(name).display());
            }
            match outcome.failure {
                Some(msg) => {
                    eprintln!("failed: {msg}");
                    1
                }
                None => 0,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if input_error(&e) {
                2
            } else {
                1
            }
        }
    }
}

/// Entry point for the binary and for tests.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            code
        }
    }
}
