//! `hymem`: simulate hybrid systems with memory and check Lyapunov
//! conditions from JSON scenarios.

use std::env;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hymem_core::scenario::{
    execute, output_dir, preset, read_report, write_plot_data, ScenarioConfig, ScenarioReport,
    EXIT_CONFIG, REPORT_JSON,
};
use hymem_core::Result;

#[derive(Parser)]
#[command(name = "hymem", version, about = "Hybrid systems with memory: simulation and ISS checks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate a scenario and write trajectory.csv, input.csv, events.json, domain.json.
    Simulate {
        /// Config file, or `preset:<name>`.
        config: PathBuf,
        /// Output directory; overrides the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate, run every configured check and write report.json.
    Verify {
        /// Config file, or `preset:<name>`.
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write per-sample traces to traces.csv.
        #[arg(long)]
        csv: bool,
    },
    /// Summarise a report (a report.json file or the directory holding one).
    Report {
        path: PathBuf,
        /// Write plot_data.csv and plot.py next to the report.
        #[arg(long)]
        plot: bool,
        /// Violations listed per failing check.
        #[arg(long, default_value_t = 5)]
        max_violations: usize,
    },
    /// Run the networked control loop preset with its wired certificate.
    Example1 {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a switched delay preset with its wired certificate.
    Example2 {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        case: u8,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the shipped presets.
    Presets,
}

fn seed_override(cfg: ScenarioConfig) -> Result<ScenarioConfig> {
    match env::var("HYMEM_SEED") {
        Ok(s) => s
            .trim()
            .parse::<u64>()
            .map(|seed| cfg.with_seed(seed))
            .map_err(|e| hymem_core::Error::Config(format!("HYMEM_SEED={s}: {e}"))),
        Err(_) => Ok(cfg),
    }
}

/// A config file, or `preset:<name>` for a shipped preset.
fn load(path: &Path) -> Result<(ScenarioConfig, PathBuf)> {
    if let Some(name) = path.to_str().and_then(|s| s.strip_prefix("preset:")) {
        return Ok((preset(name)?, PathBuf::from(".")));
    }
    let text = fs::read_to_string(path)
        .map_err(|e| hymem_core::Error::Config(format!("{}: {e}", path.display())))?;
    let cfg = ScenarioConfig::from_json(&text)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((cfg, base))
}

fn run(cfg: ScenarioConfig, base: &Path, out: Option<PathBuf>, checks: bool) -> Result<ScenarioReport> {
    let cfg = seed_override(cfg)?;
    let dir = out.unwrap_or_else(|| output_dir(&cfg, base));
    let rep = execute(&cfg, base, checks, &dir)?;
    if checks {
        print!("{}", rep.summary(3));
        println!("report: {}", dir.join(REPORT_JSON).display());
    } else {
        println!(
            "{}: termination {:?} at (t={}, j={}); wrote {}",
            rep.name,
            rep.termination,
            rep.end_t,
            rep.end_j,
            dir.display()
        );
    }
    Ok(rep)
}

fn report(path: &Path, plot: bool, max_violations: usize) -> Result<i32> {
    let file = if path.is_dir() { path.join(REPORT_JSON) } else { path.to_path_buf() };
    let rep = read_report(&file)?;
    print!("{}", rep.summary(max_violations));
    if plot {
        let dir = file.parent().unwrap_or(Path::new("."));
        let (csv, py) = write_plot_data(dir, &rep)?;
        println!("plot data: {}\nplot script: {}", csv.display(), py.display());
    }
    Ok(0)
}

fn dispatch(cmd: Cmd) -> Result<i32> {
    let cwd = PathBuf::from(".");
    match cmd {
        Cmd::Simulate { config, out } => {
            let (cfg, base) = load(&config)?;
            Ok(run(cfg, &base, out, false)?.exit_code)
        }
        Cmd::Verify { config, out, csv } => {
            let (mut cfg, base) = load(&config)?;
            cfg.trace_csv |= csv;
            Ok(run(cfg, &base, out, true)?.exit_code)
        }
        Cmd::Report { path, plot, max_violations } => report(&path, plot, max_violations),
        Cmd::Example1 { out } => Ok(run(preset("example1")?, &cwd, out, true)?.exit_code),
        Cmd::Example2 { case, out } => {
            Ok(run(preset(&format!("example2-case{case}"))?, &cwd, out, true)?.exit_code)
        }
        Cmd::Presets => {
            for name in hymem_core::scenario::preset_names() {
                println!("{name}");
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match dispatch(cli.cmd) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    };
    ExitCode::from(code as u8)
}
