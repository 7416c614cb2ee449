//! `liefrenet`: batch runs over curve configs.
//!
//! Exit status is 0 when every task succeeded, 1 when a task raised an error
//! (the diagnostics go to stderr as JSON) and 2 when the config could not be
//! read or the outputs could not be written.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use liefrenet::analysis::{self, emit, AnalysisConfig, ConfigError, SourceConfig};
use liefrenet::curve::FAMILIES;

#[derive(Parser)]
#[command(
    name = "liefrenet",
    version,
    about = "Frenet invariants and Bertrand mates of curves in 3-dimensional Lie groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the tasks of one config and write report.json / series.csv.
    Analyze {
        config: PathBuf,
        /// Output directory (overrides `output.directory`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Classification tolerance (overrides `tolerances.classify_tol`).
        #[arg(long)]
        tol: Option<f64>,
        /// Number of samples (overrides `n_samples`).
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Run the builtin verification fleet, writing one directory per member.
    VerifyFleet { dir: PathBuf },
    /// List the builtin curve families.
    Families,
}

const EXIT_TASK: u8 = 1;
const EXIT_INPUT: u8 = 2;

fn config_error_json(e: &ConfigError) -> Value {
    match e {
        ConfigError::Parse {
            line,
            column,
            field,
            message,
        } => {
            json!({"error": e.kind(), "line": line, "column": column, "field": field, "message": message})
        }
        ConfigError::Validation(message) => json!({"error": e.kind(), "message": message}),
    }
}

fn io_error_json(path: &Path, e: &std::io::Error) -> Value {
    json!({"error": "IoError", "path": path.display().to_string(), "message": e.to_string()})
}

fn fail(v: Value, code: u8) -> ExitCode {
    eprintln!("{v}");
    ExitCode::from(code)
}

fn load(
    path: &Path,
    out: Option<PathBuf>,
    tol: Option<f64>,
    samples: Option<usize>,
) -> Result<AnalysisConfig, Value> {
    let text = fs::read_to_string(path).map_err(|e| io_error_json(path, &e))?;
    let mut config = analysis::parse_config(&text).map_err(|e| config_error_json(&e))?;
    if let Some(dir) = out {
        config.output.directory = dir;
    }
    if let Some(t) = tol {
        config.tolerances.classify_tol = t;
    }
    if let Some(n) = samples {
        config.n_samples = n;
    }
    if let SourceConfig::Csv(p) = &mut config.source {
        if p.is_relative() {
            if let Some(base) = path.parent() {
                *p = base.join(&*p);
            }
        }
    }
    config.validate().map_err(|e| config_error_json(&e))?;
    Ok(config)
}

fn analyze(
    path: &Path,
    out: Option<PathBuf>,
    tol: Option<f64>,
    samples: Option<usize>,
) -> ExitCode {
    let config = match load(path, out, tol, samples) {
        Ok(c) => c,
        Err(v) => return fail(v, EXIT_INPUT),
    };
    let doc = analysis::run(&config);
    let dir = config.output.directory.clone();
    match emit(&doc, &dir) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        Err(e) => return fail(io_error_json(&dir, &e), EXIT_INPUT),
    }
    if doc.is_ok() {
        ExitCode::SUCCESS
    } else {
        let diagnostics: Vec<Value> = doc
            .diagnostics
            .iter()
            .map(|d| json!({"error": d.kind, "task": d.task.name(), "message": d.message}))
            .collect();
        fail(json!({"diagnostics": diagnostics}), EXIT_TASK)
    }
}

fn verify_fleet(dir: &Path) -> ExitCode {
    let (report, _) = match analysis::verify_fleet(dir) {
        Ok(r) => r,
        Err(e) => return fail(io_error_json(dir, &e), EXIT_INPUT),
    };
    for m in &report.members {
        let status = if m.passed { "ok" } else { "FAILED" };
        println!("{:<18} {:<8} {status}", m.name, m.group.name());
        for f in &m.failures {
            println!("    {f}");
        }
    }
    for x in &report.exploratory {
        println!(
            "{:<18} {:<8} max|tau_g gap| {:.3e}  max|distance gap| {:.3e}  max|product deviation| {:.3e}",
            x.name,
            x.group.name(),
            x.max_abs_tau_g_gap,
            x.max_abs_distance_gap,
            x.max_abs_product_deviation
        );
    }
    println!("wrote {}", dir.join(analysis::fleet::FLEET_FILE).display());
    if report.passed {
        ExitCode::SUCCESS
    } else {
        fail(
            json!({"error": "FleetFailure", "failed": report.members.iter().filter(|m| !m.passed).map(|m| m.name.clone()).collect::<Vec<_>>()}),
            EXIT_TASK,
        )
    }
}

fn families() -> ExitCode {
    for f in FAMILIES {
        let groups: Vec<&str> = f.groups.iter().map(|g| g.name()).collect();
        println!("{}", f.name);
        println!("    params:  {}", f.params.join(", "));
        println!("    groups:  {}", groups.join(", "));
        println!(
            "    domain:  [{}, {}]",
            f.default_domain[0], f.default_domain[1]
        );
        println!("    {}", f.summary);
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Analyze {
            config,
            out,
            tol,
            samples,
        } => analyze(&config, out, tol, samples),
        Command::VerifyFleet { dir } => verify_fleet(&dir),
        Command::Families => families(),
    }
}
