//! `tachyon-lab`: config-driven runs of the lattice scenarios.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage or config error,
//! 3 physics guard (domain margin, overflow, wraparound), 4 failed `--check`.

mod config;
mod record;
mod scenarios;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tachyon_core::LabError;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Guard(String),
    Check(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Guard(_) => 3,
            CliError::Check(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Guard(m) => write!(f, "physics guard: {m}"),
            CliError::Check(m) => write!(f, "check failed: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        if e.is_physics_guard() {
            CliError::Guard(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

#[derive(Parser)]
#[command(name = "tachyon-lab", version, about = "Scenario runner for a linearized tachyonic field on a lattice")]
struct Cli {
    /// Assert each scenario's acceptance checks; exit 4 if any fails
    #[arg(long, global = true)]
    check: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its CSV series and JSON summary
    Run {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(scenarios::names()))]
        scenario: String,
        #[arg(long)]
        config: PathBuf,
        /// Output directory (default: config output.dir, then ./out)
        #[arg(long, env = "TACHYON_LAB_OUT")]
        out: Option<PathBuf>,
    },
    /// List the available scenarios
    List,
    /// Parse and validate a config without running it
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn run(scenario: &str, config: &PathBuf, out: Option<PathBuf>, check: bool) -> Result<(), CliError> {
    let loaded = config::load(config)?;
    let cfg = &loaded.config;
    let s = scenarios::find(scenario).expect("clap restricts scenario names");
    let record = (s.run)(cfg)?;
    let dir = out.unwrap_or_else(|| PathBuf::from(cfg.output_dir().unwrap_or("out")));
    for path in record.write(&dir, &loaded.hash, cfg.wants("csv"), cfg.wants("json"))? {
        println!("wrote {}", path.display());
    }
    for c in &record.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let failed = record.failed_checks();
    if check && !failed.is_empty() {
        let names: Vec<_> = failed.iter().map(|c| c.name.as_str()).collect();
        return Err(CliError::Check(format!("{}: {}", scenario, names.join(", "))));
    }
    Ok(())
}

fn validate(config: &PathBuf) -> Result<(), CliError> {
    let loaded = config::load(config)?;
    let cfg = &loaded.config;
    let lat = cfg.lattice()?;
    if cfg.packet.is_some() {
        let (_, margin) = scenarios::checked_packet(cfg, &lat)?;
        println!("domain_margin {margin:.6}");
    }
    if cfg.truncation.is_some() {
        cfg.truncation()?;
    }
    if cfg.observation.as_ref().is_some_and(|o| o.smearing.is_some()) {
        cfg.smearing()?;
    }
    println!("config ok ({})", loaded.hash);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, config, out } => run(&scenario, &config, out, cli.check),
        Command::List => {
            for s in scenarios::SCENARIOS {
                println!("{:<14} {}", s.name, s.summary);
            }
            Ok(())
        }
        Command::Validate { config } => validate(&config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tachyon-lab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
