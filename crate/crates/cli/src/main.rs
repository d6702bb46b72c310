use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qfk_cli::config::{parse_pairs, ExperimentConfig, Preset};
use qfk_cli::{exit, parse_ladder, CliError, RunReport};

#[derive(Parser)]
#[command(name = "qfk", version, about = "Lattice checks for perturbed quantum stochastic flows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset's check suite and write CSV and JSON reports.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Error-vs-h tables and fitted orders over a halving ladder.
    Convergence {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        ladder: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the available presets.
    ListPresets,
}

fn load(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut pairs: BTreeMap<String, String> = parse_pairs(&text)?;
    if let Some(s) = seed {
        pairs.insert("seed".into(), s.to_string());
    }
    ExperimentConfig::from_pairs(pairs)
}

fn output_dir(flag: Option<PathBuf>, cfg: &ExperimentConfig) -> PathBuf {
    flag.or_else(|| cfg.out_dir.clone())
        .or_else(|| std::env::var_os("QFK_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("qfk-out"))
}

fn finish(report: &RunReport, dir: &Path, stem: &str) -> Result<i32, CliError> {
    for c in &report.checks {
        println!("{}", c.summary());
    }
    let (csv, json) = report.write(dir, stem)?;
    println!("wrote {} and {}", csv.display(), json.display());
    for c in report.failures() {
        eprintln!("{}", c.summary());
    }
    Ok(if report.all_pass { exit::PASS } else { exit::CHECK_FAILURE })
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::ListPresets => {
            for p in Preset::ALL {
                println!("{:<24} {}", p.name(), p.description());
            }
            Ok(exit::PASS)
        }
        Command::Run { config, seed, out } => {
            let cfg = load(&config, seed)?;
            let report = qfk_cli::run(&cfg)?;
            finish(&report, &output_dir(out, &cfg), &format!("{}-run", cfg.preset))
        }
        Command::Convergence { config, ladder, seed, out } => {
            let cfg = load(&config, seed)?;
            let ladder = parse_ladder(&ladder)?;
            let report = qfk_cli::convergence(&cfg, &ladder)?;
            for s in &report.convergence {
                println!("{}: h = {:?}, errors = {:?}, orders = {:?}", s.name, s.h, s.errors, s.orders);
            }
            finish(&report, &output_dir(out, &cfg), &format!("{}-convergence", cfg.preset))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qfk: {e}");
            exit::CONFIG_ERROR
        }
    };
    ExitCode::from(code as u8)
}
