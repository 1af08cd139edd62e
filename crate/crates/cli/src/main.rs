use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pulseband_cli::commands::{self, cache_dir_for};
use pulseband_cli::{CliError, RunConfig};

#[derive(Parser)]
#[command(
    name = "pulseband",
    version,
    about = "Optimize band-pass cutoff frequencies for PPG beat detection against an ECG reference"
)]
struct Cli {
    /// Run configuration (TOML); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the configured random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for parallel evaluation (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,

    /// Disable the on-disk evaluation cache under `<out-dir>/cache`.
    #[arg(long, global = true)]
    no_cache: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset (PPG + ECG reference + manifest).
    Synth {
        #[arg(long, default_value_t = 6)]
        participants: usize,
        /// Comma-separated task names.
        #[arg(long, default_value = "rest,stress")]
        tasks: String,
        #[arg(long, default_value_t = 120.0)]
        duration_s: f64,
        #[arg(long, default_value_t = 64.0)]
        ppg_fs: f64,
        #[arg(long, default_value_t = 250.0)]
        ecg_fs: f64,
        /// "ecg" writes an ECG channel (beats detected at ingestion);
        /// "beats" writes the exact generator beat times.
        #[arg(long, default_value = "ecg")]
        reference: String,
        /// Additive white-noise level; omit for clean signals.
        #[arg(long)]
        noise_snr_db: Option<f64>,
    },
    /// Validate a manifest and print a per-recording summary.
    Ingest {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Band-pass filter one signal file (zero-phase).
    Filter {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "generic")]
        format: String,
        /// Sampling rate (generic format only).
        #[arg(long)]
        fs: Option<f64>,
        #[arg(long, default_value = "chebyshev2")]
        family: String,
        #[arg(long)]
        low: f64,
        #[arg(long)]
        high: f64,
        #[arg(long, default_value_t = 4)]
        order: usize,
        #[arg(long, default_value_t = 40.0)]
        atten_db: f64,
        #[arg(long, default_value_t = 1.0)]
        ripple_db: f64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Detect beats in a signal file and write a beats CSV.
    Detect {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "generic")]
        format: String,
        #[arg(long)]
        fs: Option<f64>,
        /// "ppg" or "ecg".
        #[arg(long)]
        role: String,
        /// Skip the configured band-pass prefilter.
        #[arg(long)]
        no_prefilter: bool,
        #[arg(long)]
        output: PathBuf,
    },
    /// Align two beats files and report lag, Se, PPV, and F1.
    Match {
        #[arg(long)]
        ppg_beats: PathBuf,
        #[arg(long)]
        ecg_beats: PathBuf,
    },
    /// Evaluate the full cutoff grid and write per-pair objectives.
    Sweep {
        #[arg(long)]
        manifest: PathBuf,
        /// Restrict to one (participant, task) slice.
        #[arg(long)]
        participant: Option<String>,
        #[arg(long)]
        task: Option<String>,
    },
    /// Run NSGA-II cutoff optimization and write the chosen filters.
    Optimize {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Recompute the condition-comparison statistics from a distributions CSV.
    Stats {
        #[arg(long)]
        distributions: PathBuf,
    },
    /// Full pipeline: optimize, evaluate every scope, and write all reports.
    Report {
        #[arg(long)]
        manifest: PathBuf,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    }
    let config = load_config(&cli)?;
    let cache_dir = cache_dir_for(&cli.out_dir, cli.no_cache);
    match cli.command {
        Command::Synth {
            participants,
            tasks,
            duration_s,
            ppg_fs,
            ecg_fs,
            reference,
            noise_snr_db,
        } => {
            let tasks: Vec<String> = tasks
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(str::to_string)
                .collect();
            commands::synth(
                &config,
                &cli.out_dir,
                participants,
                &tasks,
                duration_s,
                ppg_fs,
                ecg_fs,
                &reference,
                noise_snr_db,
            )
        }
        Command::Ingest { manifest } => commands::ingest(&config, &manifest),
        Command::Filter {
            input,
            format,
            fs,
            family,
            low,
            high,
            order,
            atten_db,
            ripple_db,
            output,
        } => commands::filter(
            &input, &format, fs, &family, low, high, order, atten_db, ripple_db, &output,
        ),
        Command::Detect {
            input,
            format,
            fs,
            role,
            no_prefilter,
            output,
        } => commands::detect(&config, &input, &format, fs, &role, !no_prefilter, &output),
        Command::Match {
            ppg_beats,
            ecg_beats,
        } => commands::match_cmd(&config, &ppg_beats, &ecg_beats),
        Command::Sweep {
            manifest,
            participant,
            task,
        } => commands::sweep(
            &config,
            &manifest,
            &cli.out_dir,
            cache_dir.as_deref(),
            participant.as_deref(),
            task.as_deref(),
        ),
        Command::Optimize { manifest } => {
            commands::optimize(&config, &manifest, &cli.out_dir, cache_dir.as_deref())
                .map(|_| ())
        }
        Command::Stats { distributions } => {
            commands::stats_cmd(&config, &distributions, &cli.out_dir)
        }
        Command::Report { manifest } => {
            commands::report_cmd(&config, &manifest, &cli.out_dir, cache_dir.as_deref())
                .map(|_| ())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
