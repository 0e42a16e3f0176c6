//! Batch front end: reads a JSON run configuration, runs one analysis and
//! writes a JSON report.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use thermoform::beta::BetaValue;

use crate::config::{parse, BetaConfig, DimensionConfig, GibbsConfig, PressureConfig};
pub use crate::error::CliError;
pub use crate::report::RunReport;

#[derive(Debug, Parser)]
#[command(name = "thermoform", version, about = "Pressure, Gibbs states, β-expansions and dimension checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, clap::Args)]
pub struct CommonArgs {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker thread cap.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Omit wall time so reports are byte-reproducible.
    #[arg(long, global = true)]
    pub stable: bool,
    /// Write the sampled point cloud as CSV.
    #[arg(long, global = true)]
    pub emit_cloud: Option<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(short = 'o', long = "output", global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BetaAction {
    Analyze,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    Pressure,
    Gibbs,
    Beta {
        #[arg(value_enum)]
        action: Option<BetaAction>,
        /// β as `golden`, `pi`, `p/q` or a decimal.
        #[arg(long)]
        beta: Option<String>,
        /// Digits of 1 to compute.
        #[arg(long)]
        depth: Option<usize>,
    },
    Dimension,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Pressure => "pressure",
            Command::Gibbs => "gibbs",
            Command::Beta { .. } => "beta",
            Command::Dimension => "dimension",
        }
    }
}

fn read_config(path: Option<&Path>) -> Result<Option<String>, CliError> {
    path.map(|p| std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display()))))
        .transpose()
}

fn required(text: Option<String>, command: &str) -> Result<String, CliError> {
    text.ok_or_else(|| CliError::Config(format!("{command} needs --config")))
}

/// Run one command and assemble its report.
pub fn run(cli: &Cli) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let common = &cli.common;
    let text = read_config(common.config.as_deref())?;
    let base = common.config.as_deref().and_then(Path::parent).map(Path::to_path_buf).unwrap_or_default();
    let name = cli.command.name();

    let (seed, config, output) = match &cli.command {
        Command::Pressure => {
            let mut cfg: PressureConfig = parse(&required(text, name)?)?;
            if let Some(s) = common.seed {
                cfg.seed = s;
            }
            let out = commands::cmd_pressure(&mut cfg, &base)?;
            (cfg.seed, report::value(&cfg), out)
        }
        Command::Gibbs => {
            let mut cfg: GibbsConfig = parse(&required(text, name)?)?;
            if let Some(s) = common.seed {
                cfg.seed = s;
            }
            let out = commands::cmd_gibbs(&mut cfg, &base)?;
            (cfg.seed, report::value(&cfg), out)
        }
        Command::Beta { beta, depth, .. } => {
            let mut cfg: BetaConfig = match text {
                Some(t) => parse(&t)?,
                None if beta.is_some() => BetaConfig::default(),
                None => return Err(CliError::Config("beta needs --config or --beta".into())),
            };
            if let Some(b) = beta {
                cfg.beta = b.parse::<BetaValue>().map_err(|e| CliError::Config(format!("bad --beta: {e}")))?;
            }
            if let Some(d) = depth {
                cfg.depth = *d;
            }
            if let Some(s) = common.seed {
                cfg.seed = s;
            }
            let out = commands::cmd_beta(&cfg)?;
            (cfg.seed, report::value(&cfg), out)
        }
        Command::Dimension => {
            let mut cfg: DimensionConfig = parse(&required(text, name)?)?;
            if let Some(s) = common.seed {
                cfg.seed = s;
            }
            let out = commands::cmd_dimension(&mut cfg, &base, common.emit_cloud.as_deref())?;
            (cfg.seed, report::value(&cfg), out)
        }
    };

    Ok(RunReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: name.to_string(),
        seed,
        config,
        results: output.results,
        diagnostics: output.diagnostics,
        wall_time_seconds: (!common.stable).then(|| start.elapsed().as_secs_f64()),
    })
}

/// Parse, run and write the report; returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    if let Some(n) = cli.common.threads {
        if n == 0 {
            eprintln!("error: config error: --threads must be at least 1");
            return 3;
        }
        // Fails only if a pool already exists, which leaves the earlier cap.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = run(&cli).and_then(|report| {
        let text = report.to_json()?;
        match &cli.common.output {
            Some(p) => std::fs::write(p, text)?,
            None => print!("{text}"),
        }
        Ok(())
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
