use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use orbitindex::criterion::analyze;
use orbitindex::linearization::preset_descriptions;
use orbitindex::problem::ProblemSpec;
use orbitindex::report::{render_text, to_json};
use orbitindex::sweep::{run_sweep, to_csv, SweepSpec};
use orbitindex::verification::{run_all, VerifyOptions};

const THREADS_ENV: &str = "ORBITINDEX_THREADS";

#[derive(Parser)]
#[command(name = "orbitindex", version, about = "Index-theoretic stability analysis of periodic orbits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze one orbit; writes report.json and report.txt.
    Analyze {
        spec: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Spatial grid size of the discretized operator.
        #[arg(long)]
        nx: Option<usize>,
        /// Time steps of the fundamental solution.
        #[arg(long)]
        nt: Option<usize>,
        /// Shift making the operator positive definite.
        #[arg(long)]
        s0: Option<f64>,
    },
    /// Run a one- or two-parameter sweep and write a CSV chart.
    Sweep {
        spec: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run the acceptance checks.
    Verify {
        #[arg(long)]
        quick: bool,
    },
    /// Built-in coefficient families.
    Presets {
        #[command(subcommand)]
        action: PresetsAction,
    },
}

#[derive(Subcommand)]
enum PresetsAction {
    List,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            anyhow::anyhow!("file not found: {}", path.display())
        } else {
            anyhow::anyhow!("{}: {e}", path.display())
        }
    })
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn threads_from_env() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(0),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) => Ok(n),
            Err(_) => bail!("{THREADS_ENV} must be a non-negative integer, got `{v}`"),
        },
    }
}

fn cmd_analyze(path: &Path, out: &Path, nx: Option<usize>, nt: Option<usize>, s0: Option<f64>) -> Result<ExitCode> {
    let mut spec = ProblemSpec::from_file(path)?;
    if let Some(nx) = nx {
        spec.grids.nx = nx;
    }
    if let Some(nt) = nt {
        spec.grids.nt = nt;
    }
    if s0.is_some() {
        spec.s0 = s0;
    }
    let report = analyze(&spec)?;
    write_file(out, "report.json", &to_json(&report)?)?;
    let text = render_text(&report);
    write_file(out, "report.txt", &text)?;
    print!("{text}");
    Ok(if report.certified { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn cmd_sweep(path: &Path, out: &Path) -> Result<ExitCode> {
    let spec = SweepSpec::from_json_str(&read_text(path)?)?;
    let threads = threads_from_env()?;
    let rows = run_sweep(&spec, threads)?;
    write_file(out, &spec.csv, &to_csv(&spec, &rows))?;
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    let uncertified = rows.iter().filter(|r| matches!(&r.outcome, Ok(rep) if !rep.certified)).count();
    println!(
        "{} points written to {} ({uncertified} uncertified, {failed} failed)",
        rows.len(),
        out.join(&spec.csv).display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(quick: bool) -> ExitCode {
    let start = Instant::now();
    let results = run_all(VerifyOptions { quick });
    for r in &results {
        println!(
            "[{}] check {}: {} ({:.2}s) {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.id,
            r.name,
            r.seconds,
            r.detail
        );
    }
    let passed = results.iter().filter(|r| r.passed).count();
    println!("{passed}/{} checks passed in {:.2}s", results.len(), start.elapsed().as_secs_f64());
    if passed == results.len() { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Analyze { spec, out, nx, nt, s0 } => cmd_analyze(&spec, &out, nx, nt, s0),
        Command::Sweep { spec, out } => cmd_sweep(&spec, &out),
        Command::Verify { quick } => Ok(cmd_verify(quick)),
        Command::Presets { action: PresetsAction::List } => {
            for (name, doc) in preset_descriptions() {
                println!("{name:<20} {doc}");
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
