//! Command-line front end: `degrade`, `sr`, `eval`, `bench` and `bank`.
//!
//! Exit codes: 0 success, 1 usage, 2 I/O or format, 3 numerical failure.

mod commands;
mod config;

pub use commands::{
    bench_exit_code, bench_inputs, cmd_degrade, cmd_eval, cmd_sr, crop_to_multiple,
    default_trace_path, format_report, quantized, reconstruct, run_bench, write_bench_csv,
    BenchRow, BenchScores, Reconstruction, BENCH_HEADER,
};
pub use config::{lambda_for_sigma, RunConfig};

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::bank::{builtin_bank, builtin_banks, save_bank, LORENTZIAN_BANK};
use crate::error::Error;
use crate::ipiano::OptimizerConfig;
use crate::operators::Boundary;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] Error),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Lib(Error::Io(e))
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Lib(Error::Contract(_)) => 1,
            CliError::Lib(Error::Io(_) | Error::Format(_)) => 2,
            CliError::Lib(Error::Divergence { .. } | Error::Stall { .. }) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "foesr", version, about = "MAP super-resolution with Fields-of-Experts priors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Blur, decimate and optionally add noise to a high-resolution image.
    Degrade {
        input: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct a high-resolution image from a low-resolution one.
    Sr {
        input: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(long)]
        out: PathBuf,
        /// Trace CSV path [default: <out>.trace.csv]
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Print PSNR and 100xSSIM of a reconstruction against ground truth.
    Eval {
        reconstruction: PathBuf,
        ground_truth: PathBuf,
        /// Border to exclude [default: the scale]
        #[arg(long)]
        shave: Option<usize>,
        #[arg(long, default_value_t = 3)]
        scale: usize,
    },
    /// Degrade, reconstruct and evaluate every image of a directory.
    Bench {
        dir: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(long)]
        shave: Option<usize>,
        /// CSV output path [default: stdout]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a built-in filter bank to a file.
    Bank {
        /// Built-in bank name; omit to list them.
        name: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long, default_value_t = 3)]
    scale: usize,
    /// Noise standard deviation in 8-bit intensity units.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long)]
    blur_size: Option<usize>,
    #[arg(long)]
    blur_sigma: Option<f64>,
    #[arg(long, default_value = "symmetric")]
    boundary: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Data weight [default: chosen from --sigma]
    #[arg(long)]
    lambda: Option<f64>,
    /// Built-in bank name or bank file path.
    #[arg(long, default_value = LORENTZIAN_BANK)]
    filters: String,
    #[arg(long, default_value_t = 200)]
    iters: usize,
    #[arg(long, default_value_t = 0.8)]
    beta: f64,
}

fn build_config(
    model: &ModelArgs,
    solve: Option<&SolveArgs>,
    shave: Option<usize>,
) -> Result<RunConfig, CliError> {
    if model.scale == 0 {
        return Err(CliError::Usage("--scale must be at least 1".into()));
    }
    let boundary: Boundary = model
        .boundary
        .parse()
        .map_err(|e: Error| CliError::Usage(e.to_string()))?;
    let mut cfg = RunConfig {
        scale: model.scale,
        noise_sigma: model.sigma,
        blur_size: model.blur_size,
        blur_sigma: model.blur_sigma,
        boundary,
        shave,
        seed: model.seed,
        ..RunConfig::default()
    };
    if let Some(solve) = solve {
        cfg.lambda = solve.lambda;
        cfg.filters = solve.filters.clone();
        cfg.iters = solve.iters;
        cfg.optimizer = OptimizerConfig {
            beta: solve.beta,
            ..OptimizerConfig::default()
        };
        cfg.optimizer()
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(cfg)
}

fn execute(command: Command) -> Result<(String, i32), CliError> {
    match command {
        Command::Degrade { input, model, out } => {
            let cfg = build_config(&model, None, None)?;
            Ok((cmd_degrade(&input, &out, &cfg)?, 0))
        }
        Command::Sr {
            input,
            model,
            solve,
            out,
            trace,
        } => {
            let cfg = build_config(&model, Some(&solve), None)?;
            Ok((cmd_sr(&input, &out, trace.as_deref(), &cfg)?, 0))
        }
        Command::Eval {
            reconstruction,
            ground_truth,
            shave,
            scale,
        } => Ok((
            cmd_eval(&reconstruction, &ground_truth, shave.unwrap_or(scale))?,
            0,
        )),
        Command::Bench {
            dir,
            model,
            solve,
            shave,
            out,
        } => {
            let cfg = build_config(&model, Some(&solve), shave)?;
            let rows = run_bench(&dir, &cfg)?;
            let code = bench_exit_code(&rows);
            match out {
                Some(path) => {
                    write_bench_csv(&rows, std::fs::File::create(&path)?)?;
                    Ok((format!("wrote {} ({} images)", path.display(), rows.len()), code))
                }
                None => {
                    let mut buf = Vec::new();
                    write_bench_csv(&rows, &mut buf)?;
                    let text = String::from_utf8(buf).expect("csv is utf-8");
                    Ok((text.trim_end().to_string(), code))
                }
            }
        }
        Command::Bank { name, out } => match (name, out) {
            (Some(name), Some(out)) => {
                let bank = builtin_bank(&name)
                    .ok_or_else(|| CliError::Usage(format!("unknown built-in bank `{name}`")))?;
                save_bank(&bank, &out)?;
                Ok((format!("wrote {}", out.display()), 0))
            }
            (Some(name), None) => {
                let bank = builtin_bank(&name)
                    .ok_or_else(|| CliError::Usage(format!("unknown built-in bank `{name}`")))?;
                Ok((crate::bank::serialize_bank(&bank).trim_end().to_string(), 0))
            }
            (None, _) => Ok((
                builtin_banks()
                    .iter()
                    .map(|(n, _)| *n)
                    .collect::<Vec<_>>()
                    .join("\n"),
                0,
            )),
        },
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Results go to `stdout`, diagnostics to `stderr`.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if code == 0 {
                write!(stdout, "{e}")
            } else {
                write!(stderr, "{e}")
            };
            return code;
        }
    };
    match execute(cli.command) {
        Ok((text, code)) => {
            if !text.is_empty() {
                let _ = writeln!(stdout, "{text}");
            }
            code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout(), &mut std::io::stderr())
}
