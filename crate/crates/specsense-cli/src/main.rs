//! Command-line front end for spectrum-sensing experiments.
//!
//! Thin shell over the library harness: every subcommand parses a JSON
//! config, runs the corresponding harness operation and writes CSV. Exit
//! codes are stable: 0 success, 1 configuration/parse error, 2 computation
//! error.

mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{load_config, LoadedConfig};
use specsense::{DetectorSpec, SampleStream};

#[derive(Parser)]
#[command(
    name = "specsense",
    version,
    about = "Spectrum-sensing detection experiments: threshold calibration, SNR sweeps, ROC curves and segment similarity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a detection-rate sweep over the configured SNR grid and write
    /// `snr_db,threshold,pd,pf` CSV.
    Sweep(CommonArgs),
    /// Compute a ROC curve at one SNR and write `pf,pd` CSV.
    Roc(SnrArgs),
    /// Score the similarity of every stream segment against the first one;
    /// writes one similarity per line.
    Similarity(CommonArgs),
    /// Calibrate and print the detection threshold at one SNR.
    Calibrate(SnrArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output path; overrides the config's "output" field.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = auto).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct SnrArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// SNR in dB.
    #[arg(long, allow_hyphen_values = true)]
    snr: f64,
}

enum CliError {
    /// Configuration or parse problem; exit code 1.
    Config(String),
    /// Computation or output problem; exit code 2.
    Runtime(String),
}

impl CliError {
    fn code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(1),
            CliError::Runtime(_) => ExitCode::from(2),
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Runtime(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            e.print().ok();
            // Help and version are not errors; everything else is a usage /
            // configuration problem.
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Roc(args) => cmd_roc(&args),
        Command::Similarity(args) => cmd_similarity(&args),
        Command::Calibrate(args) => cmd_calibrate(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

fn resolve_output(args: &CommonArgs, loaded: &LoadedConfig) -> Result<PathBuf, CliError> {
    args.out
        .clone()
        .or_else(|| loaded.output.clone())
        .ok_or_else(|| {
            CliError::Config("no output path: set \"output\" in the config or pass --out".into())
        })
}

fn write_output(path: &PathBuf, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn cmd_sweep(args: &CommonArgs) -> Result<(), CliError> {
    let loaded = load_config(&args.config).map_err(CliError::Config)?;
    let out = resolve_output(args, &loaded)?;
    let report = specsense::run_sweep(&loaded.experiment, args.threads)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    write_output(&out, &report.to_csv())
}

fn cmd_roc(args: &SnrArgs) -> Result<(), CliError> {
    let loaded = load_config(&args.common.config).map_err(CliError::Config)?;
    if !args.snr.is_finite() {
        return Err(CliError::Config("--snr must be finite".into()));
    }
    let out = resolve_output(&args.common, &loaded)?;
    let curve = specsense::roc_curve(&loaded.experiment, args.snr, args.common.threads)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    write_output(&out, &curve.to_csv())
}

fn cmd_similarity(args: &CommonArgs) -> Result<(), CliError> {
    let loaded = load_config(&args.config).map_err(CliError::Config)?;
    let out = resolve_output(args, &loaded)?;
    let segment_len = loaded.segment_len.ok_or_else(|| {
        CliError::Config("similarity needs \"segment_len\" in the config".into())
    })?;
    if !matches!(
        loaded.experiment.detector,
        DetectorSpec::Pca | DetectorSpec::Kpca { .. }
    ) {
        return Err(CliError::Config(
            "similarity supports only the pca and kpca detectors".into(),
        ));
    }
    // The stream is part of the configuration; length problems (a file
    // shorter than two segments, say) are configuration errors.
    let stream: SampleStream = loaded
        .experiment
        .clean_signal()
        .map_err(|e| CliError::Config(e.to_string()))?;
    if stream.len() < 2 * segment_len {
        return Err(CliError::Config(format!(
            "stream of {} samples is shorter than two segments of {segment_len}",
            stream.len()
        )));
    }
    let sims = specsense::segment_similarity(
        &stream,
        segment_len,
        &loaded.experiment.detector,
        loaded.experiment.frame_dim,
        loaded.experiment.stride,
        args.threads,
    )
    .map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut text = String::new();
    for s in sims {
        text.push_str(&format!("{s}\n"));
    }
    write_output(&out, &text)
}

fn cmd_calibrate(args: &SnrArgs) -> Result<(), CliError> {
    let loaded = load_config(&args.common.config).map_err(CliError::Config)?;
    if !args.snr.is_finite() {
        return Err(CliError::Config("--snr must be finite".into()));
    }
    let threshold =
        specsense::calibrate_threshold(&loaded.experiment, args.snr, args.common.threads)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    println!("{threshold}");
    if let Some(out) = &args.common.out {
        write_output(out, &format!("{threshold}\n"))?;
    }
    Ok(())
}
