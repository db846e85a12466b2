//! Experiment runner behind the `vrd` binary.
//!
//! Each subcommand produces a flat list of [`ResultRecord`]s which are written
//! as a JSON array or as CSV with the fixed header [`CSV_COLUMNS`].

use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub mod experiments;

pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_COLUMNS: [&str; 14] = [
    "schema_version",
    "experiment",
    "mode",
    "xi",
    "noise_p",
    "metric",
    "estimate",
    "stderr",
    "exact",
    "cost",
    "shots",
    "seed",
    "reference",
    "note",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Coherence,
    Entangle,
    Teleport,
    Qfi,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Experiment::Coherence => "coherence",
            Experiment::Entangle => "entangle",
            Experiment::Teleport => "teleport",
            Experiment::Qfi => "qfi",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "vrd", version, about = "Virtual resource distillation experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Two-level to four-level coherence distillation
    Coherence(RunArgs),
    /// Werner-state entanglement distillation over a ξ grid
    Entangle(RunArgs),
    /// Teleportation fidelity with and without distillation
    Teleport(RunArgs),
    /// Quantum Fisher information and Cramér–Rao coefficients
    Qfi(RunArgs),
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunArgs {
    /// Comma-separated Werner parameters (default depends on the experiment)
    #[arg(long, value_delimiter = ',')]
    pub xi: Option<Vec<f64>>,
    #[arg(long, default_value_t = 100_000)]
    pub shots: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Depolarizing strength applied to the input state
    #[arg(long)]
    pub noise_p: Option<f64>,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub xi: Vec<f64>,
    pub shots: u64,
    pub seed: u64,
    pub noise_p: Option<f64>,
    pub mode: Mode,
    pub format: Format,
    pub out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] vrd_core::VrdError),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization: {0}")]
    Serialize(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

pub fn default_xi(experiment: Experiment) -> Vec<f64> {
    match experiment {
        Experiment::Coherence => Vec::new(),
        Experiment::Entangle => vec![0.0, 0.1, 0.2, 1.0 / 3.0, 0.4, 0.6, 0.8, 1.0],
        Experiment::Teleport => vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0],
        Experiment::Qfi => (1..=10).map(|k| k as f64 / 10.0).collect(),
    }
}

impl ExperimentConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let (experiment, args) = match cli.command {
            Command::Coherence(a) => (Experiment::Coherence, a),
            Command::Entangle(a) => (Experiment::Entangle, a),
            Command::Teleport(a) => (Experiment::Teleport, a),
            Command::Qfi(a) => (Experiment::Qfi, a),
        };
        if experiment == Experiment::Coherence && args.xi.is_some() {
            return Err(CliError::Config("coherence takes no --xi".into()));
        }
        let cfg = Self {
            experiment,
            xi: args.xi.unwrap_or_else(|| default_xi(experiment)),
            shots: args.shots,
            seed: args.seed,
            noise_p: args.noise_p,
            mode: args.mode,
            format: args.format,
            out: args.out,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.shots == 0 {
            return Err(CliError::Config("--shots must be positive".into()));
        }
        if let Some(x) = self.xi.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(CliError::Config(format!("xi = {x} is outside [0, 1]")));
        }
        if self.experiment != Experiment::Coherence && self.xi.is_empty() {
            return Err(CliError::Config("--xi list is empty".into()));
        }
        if self.experiment == Experiment::Qfi && self.xi.contains(&0.0) {
            return Err(CliError::Config("qfi needs xi > 0".into()));
        }
        if let Some(p) = self.noise_p {
            if !(0.0..=1.0).contains(&p) {
                return Err(CliError::Config(format!("--noise-p {p} is outside [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub experiment: Experiment,
    pub mode: Mode,
    pub xi: Option<f64>,
    pub noise_p: f64,
    pub metric: String,
    pub estimate: f64,
    pub stderr: f64,
    pub exact: Option<f64>,
    pub cost: f64,
    pub shots: u64,
    pub seed: u64,
    /// Published measured value, for comparison only.
    pub reference: Option<f64>,
    pub note: String,
}

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>, CliError> {
    match cfg.experiment {
        Experiment::Coherence => experiments::run_coherence(cfg),
        Experiment::Entangle => experiments::run_entangle(cfg),
        Experiment::Teleport => experiments::run_teleport(cfg),
        Experiment::Qfi => experiments::run_qfi(cfg),
    }
}

pub fn write_records<W: Write>(records: &[ResultRecord], format: Format, mut w: W) -> Result<(), CliError> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, records).map_err(|e| CliError::Serialize(e.to_string()))?;
            writeln!(w)?;
        }
        Format::Csv => {
            let mut c = csv::Writer::from_writer(w);
            for r in records {
                c.serialize(r).map_err(|e| CliError::Serialize(e.to_string()))?;
            }
            if records.is_empty() {
                c.write_record(CSV_COLUMNS).map_err(|e| CliError::Serialize(e.to_string()))?;
            }
            c.flush()?;
        }
    }
    Ok(())
}

/// Parses, runs and writes; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = ExperimentConfig::from_cli(cli).and_then(|cfg| {
        let records = run(&cfg)?;
        match &cfg.out {
            Some(path) => write_records(&records, cfg.format, std::fs::File::create(path)?),
            None => write_records(&records, cfg.format, std::io::stdout().lock()),
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("vrd: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(args: &[&str]) -> Result<ExperimentConfig, CliError> {
        let mut full = vec!["vrd"];
        full.extend_from_slice(args);
        ExperimentConfig::from_cli(Cli::try_parse_from(full).unwrap())
    }

    #[test]
    fn defaults() {
        let c = cfg(&["entangle"]).unwrap();
        assert_eq!(c.xi.len(), 8);
        assert_eq!(c.shots, 100_000);
        assert_eq!(c.seed, 42);
        assert_eq!(c.mode, Mode::Exact);
        assert_eq!(cfg(&["teleport"]).unwrap().xi, default_xi(Experiment::Teleport));
    }

    #[test]
    fn config_errors_exit_two() {
        for bad in [
            vec!["entangle", "--xi", "1.5"],
            vec!["entangle", "--shots", "0"],
            vec!["teleport", "--noise-p=-0.1"],
            vec!["qfi", "--xi", "0"],
            vec!["coherence", "--xi", "0.5"],
        ] {
            let e = cfg(&bad).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{bad:?}");
        }
        assert_eq!(main_with_args(["vrd", "entangle", "--mode", "fuzzy"]), 2);
    }

    #[test]
    fn csv_header_is_fixed() {
        let mut buf = Vec::new();
        write_records(&[], Format::Csv, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim(), CSV_COLUMNS.join(","));
        let c = cfg(&["qfi", "--xi", "1"]).unwrap();
        let mut buf = Vec::new();
        write_records(&run(&c).unwrap(), Format::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_COLUMNS.join(","));
    }
}
