//! Shared fixtures for the benchmark targets.

use pulseband_core::beat::BeatSource;
use pulseband_core::optimize::Recording;
use pulseband_core::synth::{gen_beat_times, gen_ppg, SynthConfig};
use pulseband_core::{BeatSeries, Signal};

/// One clean 120 s synthetic recording at the given heart rate.
pub fn synthetic_recording(hr: f64, seed: u64) -> Recording {
    let cfg = SynthConfig {
        mean_hr_bpm: hr,
        hrv_sd_ms: 25.0,
        duration_s: 120.0,
        noise_snr_db: None,
        seed,
        ..Default::default()
    };
    let beats = gen_beat_times(&cfg).expect("valid config");
    let (ppg, _) = gen_ppg(&beats, 64.0, &cfg).expect("valid config");
    Recording {
        participant: format!("bench-hr{hr:.0}"),
        task: "bench".into(),
        ppg,
        ppg_offset_ms: 0,
        ecg_beats: BeatSeries::new(beats, BeatSource::Ecg).expect("increasing"),
        acc: None,
    }
}

/// Clean synthetic PPG signal of the given duration.
pub fn synthetic_ppg(duration_s: f64, seed: u64) -> Signal {
    let cfg = SynthConfig {
        duration_s,
        seed,
        ..Default::default()
    };
    let beats = gen_beat_times(&cfg).expect("valid config");
    gen_ppg(&beats, 64.0, &cfg).expect("valid config").0
}
