//! The `superior` command line.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Result;
use clap::{Parser, Subcommand};
use serde::Deserialize;
use superiorization::eval::{
    better_targeted, curve_from_indices, fejer_monitor, monotone_subsequence, IterateTrace,
};
use superiorization::linalg::Vector;

use crate::config::{RunConfig, UsageError};
use crate::experiment::{run_experiment, to_json_bytes, write_atomic, ExperimentSpec};
use crate::problem::{generate, ProblemInstance, ProblemSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "superior",
    version,
    about = "Superiorized feasibility-seeking runs and experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a problem (family, witness, x0) from a problem spec.
    Gen {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the generator seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run one configuration and write its trace CSV.
    Run {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the full trace (points included) as JSON.
        #[arg(long)]
        trace_json: Option<PathBuf>,
        /// Also write the proximity-target curve CSV.
        #[arg(long)]
        curve: Option<PathBuf>,
    },
    /// Run two configurations and compare their proximity-target curves.
    Compare {
        #[arg(long)]
        problem: PathBuf,
        /// Configuration R.
        #[arg(long = "config-r")]
        config_r: PathBuf,
        /// Configuration S.
        #[arg(long = "config-s")]
        config_s: PathBuf,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// Run a full experiment spec into its output directory.
    Experiment {
        #[arg(long)]
        spec: PathBuf,
        /// Override the spec's output_dir.
        #[arg(long = "out-dir")]
        out_dir: Option<PathBuf>,
    },
    /// Distance monotonicity of a JSON trace toward a reference point.
    Fejer {
        #[arg(long)]
        trace: PathBuf,
        /// JSON array, or a problem file with a witness.
        #[arg(long)]
        witness: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_input(path: &Path) -> Result<String, UsageError> {
    fs::read_to_string(path).map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))
}

fn parse_input<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> Result<T, UsageError> {
    serde_json::from_str(&read_input(path)?)
        .map_err(|e| UsageError(format!("malformed {what} {}: {e}", path.display())))
}

fn load_config(path: &Path) -> Result<RunConfig, UsageError> {
    RunConfig::from_json(&read_input(path)?)
        .map_err(|e| UsageError(format!("{}: {e}", path.display())))
}

fn run_config(problem: &ProblemInstance, config: &RunConfig) -> Result<IterateTrace> {
    let stop = config.require_stop()?;
    let built = config.build(&problem.family)?;
    Ok(built.execute(&problem.x0, &stop)?)
}

fn csv_bytes(trace: &IterateTrace) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    trace.write_csv(&mut buf)?;
    Ok(buf)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum WitnessFile {
    Point(Vector),
    Problem(ProblemInstance),
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { spec, out, seed } => {
            let mut spec: ProblemSpec = parse_input(&spec, "problem spec")?;
            if let Some(s) = seed {
                spec = spec.with_seed(s);
            }
            let instance = generate(&spec).map_err(|e| UsageError(format!("{e:#}")))?;
            write_atomic(&out, &to_json_bytes(&instance))
        }
        Command::Run {
            problem,
            config,
            out,
            trace_json,
            curve,
        } => {
            let problem: ProblemInstance = parse_input(&problem, "problem")?;
            let config = load_config(&config)?;
            let trace = run_config(&problem, &config)?;
            write_atomic(&out, &csv_bytes(&trace)?)?;
            if let Some(path) = trace_json {
                write_atomic(&path, &to_json_bytes(&trace))?;
            }
            if let Some(path) = curve {
                let c = curve_from_indices(&trace, &monotone_subsequence(&trace))?;
                let mut buf = Vec::new();
                c.write_csv(&mut buf)?;
                write_atomic(&path, &buf)?;
            }
            Ok(())
        }
        Command::Compare {
            problem,
            config_r,
            config_s,
            out_dir,
            samples,
        } => {
            let problem: ProblemInstance = parse_input(&problem, "problem")?;
            let r = load_config(&config_r)?;
            let s = load_config(&config_s)?;
            if r.require_stop()? != s.require_stop()? {
                return Err(UsageError(
                    "invalid config field `stop`: both configurations must use the same stop rule"
                        .into(),
                )
                .into());
            }
            let tr = run_config(&problem, &r)?;
            let ts = run_config(&problem, &s)?;
            let cr = curve_from_indices(&tr, &monotone_subsequence(&tr))?;
            let cs = curve_from_indices(&ts, &monotone_subsequence(&ts))?;
            let comparison = better_targeted(&cr, &cs, samples);
            for (name, c) in [("curve-r.csv", &cr), ("curve-s.csv", &cs)] {
                let mut buf = Vec::new();
                c.write_csv(&mut buf)?;
                write_atomic(&out_dir.join(name), &buf)?;
            }
            write_atomic(&out_dir.join("trace-r.csv"), &csv_bytes(&tr)?)?;
            write_atomic(&out_dir.join("trace-s.csv"), &csv_bytes(&ts)?)?;
            let json = to_json_bytes(&comparison);
            write_atomic(&out_dir.join("comparison.json"), &json)?;
            print!("{}", String::from_utf8_lossy(&json));
            Ok(())
        }
        Command::Experiment { spec, out_dir } => {
            let mut spec = ExperimentSpec::from_json(&read_input(&spec)?)
                .map_err(|e| UsageError(format!("{}: {e}", spec.display())))?;
            if let Some(dir) = out_dir {
                spec.output_dir = dir;
            }
            let report = run_experiment(&spec)?;
            for e in &report.summary.eps {
                for a in &e.arms {
                    println!(
                        "eps={:e} arm={} reached={}/{} strictly_lower={} fraction={}",
                        e.eps,
                        a.name,
                        a.reached,
                        report.summary.replicates,
                        a.strictly_lower,
                        a.fraction
                    );
                }
            }
            Ok(())
        }
        Command::Fejer {
            trace,
            witness,
            tolerance,
            out,
        } => {
            if !(tolerance >= 0.0 && tolerance.is_finite()) {
                return Err(UsageError(format!(
                    "--tolerance must be nonnegative, got {tolerance}"
                ))
                .into());
            }
            let trace: IterateTrace = parse_input(&trace, "trace")?;
            let reference = match parse_input::<WitnessFile>(&witness, "witness")? {
                WitnessFile::Point(p) => p,
                WitnessFile::Problem(p) => p
                    .witness
                    .ok_or_else(|| UsageError(format!("{} has no witness", witness.display())))?,
            };
            let report = fejer_monitor(&trace, &reference, tolerance)
                .map_err(|e| UsageError(format!("witness does not fit the trace: {e}")))?;
            let json = to_json_bytes(&report);
            match out {
                Some(path) => write_atomic(&path, &json),
                None => {
                    print!("{}", String::from_utf8_lossy(&json));
                    Ok(())
                }
            }
        }
    }
}

/// Parse `argv` (program name first), run, and return the exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("usage error: {e}");
            EXIT_USAGE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_RUNTIME
        }
    }
}
