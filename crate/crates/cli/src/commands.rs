//! Subcommand implementations. The binary in `main.rs` only parses arguments
//! and dispatches here.

use std::path::{Path, PathBuf};

use pulseband_core::beat::{detect_ecg_beats, detect_ppg_beats};
use pulseband_core::filter::{apply_zero_phase, design_bandpass, FilterSpec};
use pulseband_core::metrics::{best_lag, match_with_lag, se_ppv_f1};
use pulseband_core::optimize::grid_combinations;
use pulseband_core::optimize::{GridEvaluator, OptimizationScope};
use pulseband_core::rng::SplitMix64;
use pulseband_core::synth::{gen_beat_times, gen_ecg, gen_ppg, SynthConfig};
use pulseband_core::{BeatSource, ChannelRole, Signal};

use crate::config::RunConfig;
use crate::errors::{CliError, Result};
use crate::manifest::DatasetManifest;
use crate::pipeline::{run_pipeline, RunReport};
use crate::{cache, io, report};

pub fn synth(
    config: &RunConfig,
    out_dir: &Path,
    participants: usize,
    tasks: &[String],
    duration_s: f64,
    ppg_fs: f64,
    ecg_fs: f64,
    reference: &str,
    noise_snr_db: Option<f64>,
) -> Result<()> {
    if participants == 0 || tasks.is_empty() {
        return Err(CliError::InvalidArguments(
            "need at least one participant and one task".into(),
        ));
    }
    if !matches!(reference, "ecg" | "beats") {
        return Err(CliError::InvalidArguments(format!(
            "unknown reference {reference:?} (expected ecg or beats)"
        )));
    }
    std::fs::create_dir_all(out_dir)?;
    let mut manifest = String::from("# generated synthetic dataset\n");
    let mut rng = SplitMix64::new(config.seed);
    for p in 0..participants {
        // per-participant heart rate spread over the plausible band
        let hr = 55.0 + 35.0 * rng.next_f64();
        for (t, task) in tasks.iter().enumerate() {
            let seed = config
                .seed
                .wrapping_add((p as u64 * 131 + t as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let synth_cfg = SynthConfig {
                duration_s,
                mean_hr_bpm: hr,
                hrv_sd_ms: 25.0,
                noise_snr_db,
                seed,
                ..Default::default()
            };
            let beats = gen_beat_times(&synth_cfg)?;
            let (ppg, _gt) = gen_ppg(&beats, ppg_fs, &synth_cfg)?;
            let pid = format!("p{:02}", p + 1);
            let ppg_name = format!("{pid}_{task}_ppg.csv");
            io::write_generic_csv(&out_dir.join(&ppg_name), &ppg)?;
            manifest.push_str(&format!(
                "\n[[recording]]\nparticipant = \"{pid}\"\ntask = \"{task}\"\nppg = \"{ppg_name}\"\nppg_fs = {ppg_fs}\n"
            ));
            if reference == "ecg" {
                let ecg = gen_ecg(&beats, ecg_fs, &synth_cfg)?;
                let ecg_name = format!("{pid}_{task}_ecg.csv");
                io::write_generic_csv(&out_dir.join(&ecg_name), &ecg)?;
                manifest.push_str(&format!("ecg = \"{ecg_name}\"\necg_fs = {ecg_fs}\n"));
            } else {
                let beats_name = format!("{pid}_{task}_beats.csv");
                let series = pulseband_core::BeatSeries::new(beats, BeatSource::Ecg)
                    .map_err(CliError::from)?;
                io::write_beats_csv(&out_dir.join(&beats_name), &series)?;
                manifest.push_str(&format!("ecg_beats = \"{beats_name}\"\n"));
            }
        }
    }
    let manifest_path = out_dir.join("manifest.toml");
    io::atomic_write(&manifest_path, manifest.as_bytes())?;
    println!(
        "wrote {} recording(s) and {}",
        participants * tasks.len(),
        manifest_path.display()
    );
    Ok(())
}

pub fn ingest(config: &RunConfig, manifest_path: &Path) -> Result<()> {
    let manifest = DatasetManifest::load(manifest_path)?;
    let dataset = manifest.load_dataset(config)?;
    println!("participant,task,ppg_fs,ppg_duration_s,ecg_beats,acc");
    for rec in &dataset.recordings {
        println!(
            "{},{},{},{:.1},{},{}",
            rec.participant,
            rec.task,
            rec.ppg.fs(),
            rec.ppg.duration_ms() / 1000.0,
            rec.ecg_beats.len(),
            rec.acc.is_some()
        );
    }
    println!("ok: {} recording(s)", dataset.recordings.len());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn filter(
    input: &Path,
    format: &str,
    fs: Option<f64>,
    family: &str,
    low: f64,
    high: f64,
    order: usize,
    atten_db: f64,
    ripple_db: f64,
    output: &Path,
) -> Result<()> {
    let signal = read_signal(input, format, fs, ChannelRole::Ppg)?;
    let spec = match family {
        "chebyshev2" => FilterSpec::chebyshev2(order, low, high, atten_db),
        "elliptic" => FilterSpec::elliptic(order, low, high, ripple_db, atten_db),
        "butterworth" => FilterSpec::butterworth(order, low, high),
        other => {
            return Err(CliError::InvalidArguments(format!(
                "unknown family {other:?} (expected chebyshev2, elliptic, butterworth)"
            )))
        }
    };
    let cascade = design_bandpass(&spec, signal.fs())?;
    let filtered = apply_zero_phase(&cascade, &signal)?;
    io::write_generic_csv(output, &filtered)?;
    println!(
        "filtered {} samples with {} ({low}-{high} Hz) -> {}",
        signal.len(),
        spec.family.as_str(),
        output.display()
    );
    Ok(())
}

pub fn detect(
    config: &RunConfig,
    input: &Path,
    format: &str,
    fs: Option<f64>,
    role: &str,
    prefilter: bool,
    output: &Path,
) -> Result<()> {
    match role {
        "ecg" => {
            let signal = read_signal(input, format, fs, ChannelRole::Ecg)?;
            let signal = if prefilter {
                let spec = FilterSpec::elliptic(
                    config.filter.ecg_order,
                    config.filter.ecg_low_hz,
                    config.filter.ecg_high_hz,
                    config.filter.ecg_passband_ripple_db,
                    config.filter.ecg_stopband_atten_db,
                );
                apply_zero_phase(&design_bandpass(&spec, signal.fs())?, &signal)?
            } else {
                signal
            };
            let beats = detect_ecg_beats(&signal, &config.ecg_detector())?;
            io::write_beats_csv(output, &beats)?;
            println!("{} beats -> {}", beats.len(), output.display());
        }
        "ppg" => {
            let signal = read_signal(input, format, fs, ChannelRole::Ppg)?;
            let signal = if prefilter {
                let spec = FilterSpec::chebyshev2(
                    config.filter.ppg_order,
                    config.filter.base_low_hz,
                    config.filter.base_high_hz,
                    config.filter.ppg_stopband_atten_db,
                );
                apply_zero_phase(&design_bandpass(&spec, signal.fs())?, &signal)?
            } else {
                signal
            };
            let beats = detect_ppg_beats(&signal, &config.ppg_detector())?;
            io::write_beats_csv(output, &beats)?;
            println!("{} beats -> {}", beats.len(), output.display());
        }
        other => {
            return Err(CliError::InvalidArguments(format!(
                "unknown role {other:?} (expected ppg or ecg)"
            )))
        }
    }
    Ok(())
}

pub fn match_cmd(config: &RunConfig, ppg_beats: &Path, ecg_beats: &Path) -> Result<()> {
    let ppg = io::read_beats_csv(ppg_beats, BeatSource::Ppg)?;
    let ecg = io::read_beats_csv(ecg_beats, BeatSource::Ecg)?;
    let matching = config.matching_config();
    let lag = best_lag(&ppg, &ecg, &matching)?;
    let result = match_with_lag(&ppg, &ecg, lag, matching.tolerance_ms);
    let (se, ppv, f1) = se_ppv_f1(&result)?;
    println!(
        "lag_ms={lag} n_correct={} n_ecg={} n_ppg={} se={se:.4} ppv={ppv:.4} f1={f1:.4}",
        result.n_correct, result.n_ecg, result.n_ppg
    );
    Ok(())
}

pub fn sweep(
    config: &RunConfig,
    manifest_path: &Path,
    out_dir: &Path,
    cache_dir: Option<&Path>,
    participant: Option<&str>,
    task: Option<&str>,
) -> Result<()> {
    let manifest = DatasetManifest::load(manifest_path)?;
    let dataset = manifest.load_dataset(config)?;
    let scope = match (participant, task) {
        (Some(p), Some(t)) => OptimizationScope::PerPersonTask {
            participant: p.to_string(),
            task: t.to_string(),
        },
        (None, None) => OptimizationScope::Global,
        _ => {
            return Err(CliError::InvalidArguments(
                "sweep slice selection needs both --participant and --task".into(),
            ))
        }
    };
    let eval_cfg = config.eval_config();
    let evaluator = GridEvaluator::new(&dataset, &eval_cfg);
    let hashes: Vec<String> = dataset
        .recordings
        .iter()
        .map(|r| cache::recording_hash(r, &eval_cfg))
        .collect();
    if let Some(dir) = cache_dir {
        let mut seeded = Vec::new();
        for (idx, hash) in hashes.iter().enumerate() {
            for (key, summary) in cache::load(dir, hash) {
                seeded.push(((idx, key), summary));
            }
        }
        evaluator.seed_cache(seeded);
    }

    let bounds = config.cutoff_bounds();
    let grid = grid_combinations(bounds.f_low, bounds.f_high, config.bounds.grid_step_hz)?;
    let objectives = evaluator.evaluate_grid(&grid, &scope);

    std::fs::create_dir_all(out_dir)?;
    let mut out = String::from("f_low_hz,f_high_hz,mean_f1,mae_ibi_ms,mae_rmssd_ms\n");
    for (pair, obj) in grid.iter().zip(&objectives) {
        out.push_str(&format!(
            "{:.1},{:.1},{:.6},{:.6},{:.6}\n",
            pair.f_low,
            pair.f_high,
            obj.mean_f1(),
            obj.mae_ibi_ms,
            obj.mae_rmssd_ms
        ));
    }
    io::atomic_write(&out_dir.join("sweep_grid.csv"), out.as_bytes())?;

    // line plot: mean F1 vs f_low for a few high-cut series
    let mut series = Vec::new();
    for high in [1.5, 2.5, 4.0, 5.0] {
        let pts: Vec<(f64, f64)> = grid
            .iter()
            .zip(&objectives)
            .filter(|(p, _)| (p.f_high - high).abs() < 1e-9)
            .map(|(p, o)| (p.f_low, o.mean_f1()))
            .collect();
        if !pts.is_empty() {
            series.push((high, pts));
        }
    }
    io::atomic_write(
        &out_dir.join("sweep_f1_vs_flow.svg"),
        report::sweep_line_svg(&series).as_bytes(),
    )?;

    if let Some(dir) = cache_dir {
        persist_cache(&evaluator, &hashes, dir)?;
    }
    println!(
        "swept {} cutoff pairs -> {}",
        grid.len(),
        out_dir.join("sweep_grid.csv").display()
    );
    Ok(())
}

fn persist_cache(
    evaluator: &GridEvaluator<'_>,
    hashes: &[String],
    dir: &Path,
) -> Result<()> {
    let mut per_rec: Vec<std::collections::HashMap<(u16, u16), pulseband_core::optimize::RecordingSummary>> =
        vec![std::collections::HashMap::new(); hashes.len()];
    for ((idx, key), summary) in evaluator.cache_snapshot() {
        per_rec[idx].insert(key, summary);
    }
    for (idx, entries) in per_rec.iter().enumerate() {
        if !entries.is_empty() {
            cache::store(dir, &hashes[idx], entries)?;
        }
    }
    Ok(())
}

pub fn optimize(
    config: &RunConfig,
    manifest_path: &Path,
    out_dir: &Path,
    cache_dir: Option<&Path>,
) -> Result<RunReport> {
    let manifest = DatasetManifest::load(manifest_path)?;
    let dataset = manifest.load_dataset(config)?;
    let report = run_pipeline(&dataset, config, cache_dir)?;
    report::write_optimize_outputs(&report, out_dir)?;
    if let Some((pair, _)) = &report.chosen_global {
        println!("global filter: {:.1}-{:.1} Hz", pair.f_low, pair.f_high);
    }
    println!(
        "chose {} per-person-task filter(s) -> {}",
        report.chosen_pt.len(),
        out_dir.join("chosen_filters.csv").display()
    );
    Ok(report)
}

pub fn stats_cmd(config: &RunConfig, distributions: &Path, out_dir: &Path) -> Result<()> {
    let rows = report::read_distributions_csv(distributions)?;
    let (anova, pairwise) = crate::pipeline::stats_from_distributions(&rows, config);
    report::write_stats_outputs(&anova, &pairwise, out_dir)?;
    println!(
        "{} ANOVA row(s), {} pairwise row(s) -> {}",
        anova.len(),
        pairwise.len(),
        out_dir.display()
    );
    Ok(())
}

pub fn report_cmd(
    config: &RunConfig,
    manifest_path: &Path,
    out_dir: &Path,
    cache_dir: Option<&Path>,
) -> Result<RunReport> {
    let manifest = DatasetManifest::load(manifest_path)?;
    let dataset = manifest.load_dataset(config)?;
    let report = run_pipeline(&dataset, config, cache_dir)?;
    report::write_all(&report, config, out_dir)?;
    println!("report written to {}", out_dir.display());
    Ok(report)
}

fn read_signal(path: &Path, format: &str, fs: Option<f64>, role: ChannelRole) -> Result<Signal> {
    match format {
        "e4" => {
            let mut signals = io::read_e4_csv(path, role)?;
            if signals.len() != 1 {
                return Err(CliError::Validation {
                    path: path.to_path_buf(),
                    message: "expected a single-column file".into(),
                });
            }
            Ok(signals.remove(0))
        }
        "generic" => {
            let fs = fs.ok_or_else(|| {
                CliError::InvalidArguments("generic format needs --fs".into())
            })?;
            io::read_generic_csv(path, fs, role)
        }
        other => Err(CliError::InvalidArguments(format!(
            "unknown format {other:?} (expected generic or e4)"
        ))),
    }
}

/// Output directory layout used by all subcommands.
pub fn cache_dir_for(out_dir: &Path, disable: bool) -> Option<PathBuf> {
    if disable {
        None
    } else {
        Some(out_dir.join("cache"))
    }
}
