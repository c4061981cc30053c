//! `chshlab`: runs the experiments and writes CSV or JSON tables.
//!
//! Exit codes: 0 success, 1 runtime error, 2 failed verification, 64 usage error.

mod emit;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use chshlab::ensembles::cache;
use chshlab::experiments::{self, ExperimentConfig, Report};
use chshlab::{Core, GroupKind, LogBase};
use clap::{Parser, Subcommand, ValueEnum};

const EXIT_RUNTIME: u8 = 1;
const EXIT_VERIFICATION: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
enum Command {
    /// B₀ expectation and stabilizer entropies along W(θ)|00⟩
    Fig1,
    /// Range of 2√2 − M_NL/2 − |⟨B₀⟩| over local unitaries
    Fig2,
    /// The |ρ(r)⟩ family against its closed forms
    Fig3,
    /// Violation probability conditioned on S₁, M_NL and M_LOC
    Fig4,
    /// Fine M_LOC binning and the (|b|, M_LOC) density
    Fig6,
    /// Haar density in the Hurwitz (θ₂, θ₃) plane
    Geometry,
    /// Twirled means and variances against the printed table
    Table1,
    /// Twirled violation probabilities against the printed table
    Table2,
    /// Haar closed forms: P_viol, variance, Chebyshev bound
    Exact,
    /// No-violation theorems
    Verify,
    /// Clifford and stabilizer enumeration counts, cache round trip
    Enumerate,
}

#[derive(Debug, Parser)]
#[command(
    name = "chshlab",
    version,
    about = "CHSH violations, stabilizer entropy and isospectral twirling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    #[arg(long, global = true, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    bins: u64,
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    workers: u64,
    /// Output file; stdout when absent
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Grid size for grid-based subcommands
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(2..))]
    grid: Option<u64>,
    /// Core unitary, e.g. cx, cxh, w:pi/4, wtilde:-pi/3; repeatable
    #[arg(long, global = true)]
    core: Vec<Core>,
    /// Restrict table2 to one group: u, ua, ub, c, ca, cb
    #[arg(long, global = true)]
    group: Option<GroupKind>,
    #[arg(long = "log-base", global = true, default_value = "e")]
    log_base: LogBase,
}

/// Full configuration of a run; identical configs give identical bytes.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    pub out_path: Option<PathBuf>,
    pub format: Format,
}

impl Cli {
    fn run_config(&self) -> RunConfig {
        RunConfig {
            experiment: ExperimentConfig {
                seed: self.seed,
                samples: self.samples as usize,
                bins: self.bins as usize,
                workers: self.workers as usize,
                grid: self.grid.map(|g| g as usize),
                cores: (!self.core.is_empty()).then(|| self.core.clone()),
                group: self.group,
                log_base: self.log_base,
            },
            out_path: self.out.clone(),
            format: self.format,
        }
    }
}

fn execute(cmd: Command, cfg: &ExperimentConfig) -> chshlab::Result<Report> {
    let mut report = match cmd {
        Command::Fig1 => experiments::fig1(cfg),
        Command::Fig2 => experiments::fig2(cfg),
        Command::Fig3 => experiments::fig3(cfg),
        Command::Fig4 => experiments::fig4(cfg)?,
        Command::Fig6 => experiments::fig6(cfg)?,
        Command::Geometry => experiments::geometry(cfg)?,
        Command::Table1 => experiments::table1(cfg)?,
        Command::Table2 => experiments::table2(cfg)?,
        Command::Exact => experiments::exact(cfg)?,
        Command::Verify => experiments::verify(cfg)?,
        Command::Enumerate => experiments::enumerate(Some(&cache::cache_dir()))?,
    };
    // Table comparisons against printed values are data, not process failures.
    if matches!(cmd, Command::Table1 | Command::Table2) {
        report.verified = true;
    }
    Ok(report)
}

fn preamble(cfg: &ExperimentConfig, name: &str) -> Vec<(String, String)> {
    vec![
        ("subcommand".into(), name.into()),
        ("version".into(), env!("CARGO_PKG_VERSION").into()),
        ("seed".into(), cfg.seed.to_string()),
        ("samples".into(), cfg.samples.to_string()),
        ("bins".into(), cfg.bins.to_string()),
        ("workers".into(), cfg.workers.to_string()),
    ]
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let run = cli.run_config();
    let report = match execute(cli.command, &run.experiment) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    };
    let pre = preamble(&run.experiment, &report.name);
    let text = match run.format {
        Format::Csv => emit::to_csv(&report, &pre),
        Format::Json => emit::to_json(&report, &pre),
    };
    let written = match &run.out_path {
        Some(path) => {
            fs::write(path, text.as_bytes()).map_err(|e| format!("{}: {e}", path.display()))
        }
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(EXIT_RUNTIME);
    }
    if !report.verified {
        eprintln!("verification failed: {}", report.name);
        return ExitCode::from(EXIT_VERIFICATION);
    }
    ExitCode::SUCCESS
}
