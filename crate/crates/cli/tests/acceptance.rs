//! Acceptance suite: one test per criterion. The harness prints one
//! pass/fail line per criterion; each test also enforces its runtime budget.
//!
//! Expected values tagged as derived come from independent oracles computed
//! inside this file (closed-form filter magnitudes, brute-force matching,
//! trigonometric quadrature for distribution tails) or from synthetic ground
//! truth; they are never copied from the implementation under test.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use pulseband_core::beat::BeatSource;
use pulseband_core::filter::{
    apply_zero_phase, design_bandpass, frequency_response, FilterSpec,
};
use pulseband_core::metrics::{mae, match_beats, pearson_r, rmssd, se_ppv_f1, MatchResult};
use pulseband_core::optimize::{
    evaluate_recording, grid_combinations, non_dominated_sort, nsga2, select_scalarized,
    CutoffBounds, CutoffPair, Dataset, EvalConfig, GridEvaluator, Nsga2Config, ObjectiveTriple,
    OptimizationScope, Recording,
};
use pulseband_core::rng::SplitMix64;
use pulseband_core::stats::{cohens_d_paired, paired_t, rm_anova, PairedSamples};
use pulseband_core::synth::{gen_beat_times, gen_ppg, SynthConfig};
use pulseband_core::{BeatSeries, ChannelRole, Signal};

// ---------------------------------------------------------------------------
// Independent oracles
// ---------------------------------------------------------------------------

/// Closed-form magnitude of the Chebyshev-II band-pass design: prototype
/// |H(jw)| in terms of the Chebyshev polynomial, composed with the band-pass
/// and bilinear frequency mappings. No pole/zero arithmetic is involved, so
/// this is independent of the design path under test.
fn cheb2_bandpass_magnitude_reference(
    order: usize,
    atten_db: f64,
    f_low: f64,
    f_high: f64,
    fs: f64,
    f: f64,
) -> f64 {
    let a_stop = 10f64.powf(atten_db / 20.0);
    let eps = 1.0 / (a_stop * a_stop - 1.0).sqrt();
    let w1 = 2.0 * fs * (PI * f_low / fs).tan();
    let w2 = 2.0 * fs * (PI * f_high / fs).tan();
    let w0sq = w1 * w2;
    let bw = w2 - w1;
    let wa = 2.0 * fs * (PI * f / fs).tan();
    let omega = if wa == 0.0 {
        f64::INFINITY
    } else {
        (wa * wa - w0sq) / (bw * wa)
    };
    let x = 1.0 / omega.abs(); // prototype argument T_n(1/|omega|)
    let tn = if x.is_infinite() {
        return 1.0; // exact band center
    } else if x <= 1.0 {
        (order as f64 * x.acos()).cos()
    } else {
        (order as f64 * x.acosh()).cosh()
    };
    let t2 = eps * eps * tn * tn;
    (t2 / (1.0 + t2)).sqrt()
}

/// Exhaustive maximum-cardinality matching (exponential recursion; fine for
/// up to 20 beats per side).
fn brute_force_max_matching(ppg: &[i64], ecg: &[i64], tol: i64) -> usize {
    fn rec(p: usize, used: &mut [bool], ppg: &[i64], ecg: &[i64], tol: i64) -> usize {
        if p == ppg.len() {
            return 0;
        }
        let mut best = rec(p + 1, used, ppg, ecg, tol);
        for j in 0..ecg.len() {
            if !used[j] && (ecg[j] - ppg[p]).abs() <= tol {
                used[j] = true;
                best = best.max(1 + rec(p + 1, used, ppg, ecg, tol));
                used[j] = false;
            }
        }
        best
    }
    let mut used = vec![false; ecg.len()];
    rec(0, &mut used, ppg, ecg, tol)
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
    }
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let left = simpson(f, a, m);
        let right = simpson(f, m, b);
        if depth == 0 || (left + right - whole).abs() < 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            rec(f, a, m, left, tol / 2.0, depth - 1)
                + rec(f, m, b, right, tol / 2.0, depth - 1)
        }
    }
    rec(f, a, b, simpson(f, a, b), tol, depth)
}

/// Survival function of the F distribution by trigonometric quadrature:
/// with x = tan^2(theta) * d2/d1 the tail integral becomes
/// `int sin^(d1-1) cos^(d2-1) dtheta` over [theta_f, pi/2], normalized by the
/// same integral over [0, pi/2]. Smooth for df >= 1; no gamma functions, no
/// continued fractions — fully independent of the implementation under test.
fn f_sf_quadrature(f: f64, d1: f64, d2: f64) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    let integrand = move |theta: f64| -> f64 {
        theta.sin().powf(d1 - 1.0) * theta.cos().powf(d2 - 1.0)
    };
    let theta_f = (d1 * f / d2).sqrt().atan();
    let tail = adaptive_simpson(&integrand, theta_f, PI / 2.0, 1e-12, 40);
    let norm = adaptive_simpson(&integrand, 0.0, PI / 2.0, 1e-12, 40);
    tail / norm
}

/// Two-sided Student-t p-value via the t^2 ~ F(1, df) identity.
fn t_two_sided_quadrature(t: f64, df: f64) -> f64 {
    f_sf_quadrature(t * t, 1.0, df)
}

// ---------------------------------------------------------------------------
// Synthetic dataset constructions
// ---------------------------------------------------------------------------

/// Band-limited unit-RMS noise scaled to `amp`.
fn band_noise(n: usize, fs: f64, lo: f64, hi: f64, amp: f64, seed: u64) -> Vec<f64> {
    let mut rng = SplitMix64::new(seed);
    let white: Vec<f64> = (0..n).map(|_| rng.next_gaussian()).collect();
    let sig = Signal::new(white, fs, 0, ChannelRole::Ppg).unwrap();
    let cascade = design_bandpass(&FilterSpec::butterworth(4, lo, hi), fs).unwrap();
    let filtered = apply_zero_phase(&cascade, &sig).unwrap();
    let rms = (filtered.samples().iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    filtered.samples().iter().map(|v| v * amp / rms).collect()
}

fn make_recording(
    participant: &str,
    task: &str,
    hr: f64,
    hrv_sd_ms: f64,
    diastolic_frac: f64,
    duration_s: f64,
    seed: u64,
    noise: Option<(f64, f64, f64)>,
) -> Recording {
    let cfg = SynthConfig {
        mean_hr_bpm: hr,
        hrv_sd_ms,
        duration_s,
        diastolic_frac,
        noise_snr_db: None,
        seed,
        ..Default::default()
    };
    let beats = gen_beat_times(&cfg).unwrap();
    let (ppg, _) = gen_ppg(&beats, 64.0, &cfg).unwrap();
    let samples: Vec<f64> = match noise {
        Some((lo, hi, amp)) => {
            let nz = band_noise(ppg.len(), 64.0, lo, hi, amp, seed.wrapping_add(7777));
            ppg.samples().iter().zip(nz).map(|(a, b)| a + b).collect()
        }
        None => ppg.samples().to_vec(),
    };
    Recording {
        participant: participant.into(),
        task: task.into(),
        ppg: Signal::new(samples, 64.0, 0, ChannelRole::Ppg).unwrap(),
        ppg_offset_ms: 0,
        ecg_beats: BeatSeries::new(beats, BeatSource::Ecg).unwrap(),
        acc: None,
    }
}

/// Clean 60 s recording in the 60-90 bpm band. Beats start 1 s into the
/// recording with a ~2 s tail margin so edge truncation cannot shadow the
/// recovery measurement.
fn clean_recording(hr: f64, seed: u64) -> Recording {
    let gen_cfg = SynthConfig {
        mean_hr_bpm: hr,
        hrv_sd_ms: 12.0,
        duration_s: 57.0,
        diastolic_frac: 0.15,
        noise_snr_db: None,
        seed,
        ..Default::default()
    };
    let beats: Vec<i64> = gen_beat_times(&gen_cfg)
        .unwrap()
        .iter()
        .map(|b| b + 1000)
        .collect();
    let sig_cfg = SynthConfig {
        duration_s: 60.0,
        ..gen_cfg
    };
    let (ppg, _) = gen_ppg(&beats, 64.0, &sig_cfg).unwrap();
    Recording {
        participant: format!("hr{hr:.0}"),
        task: "clean".into(),
        ppg,
        ppg_offset_ms: 0,
        ecg_beats: BeatSeries::new(beats, BeatSource::Ecg).unwrap(),
        acc: None,
    }
}

/// Six participants x two tasks with per-participant heart rates (0.8-1.5 Hz
/// fundamentals) and in-band interference placed so the fixed (0.5, 4.0)
/// filter degrades some slices, yet stays feasible everywhere: high-band
/// noise confuses the detector unless the high cut comes down; noise below
/// the fundamental inflates RMSSD unless the low cut comes up.
fn benefit_dataset() -> Dataset {
    let r = |p: &str, t: &str, hr: f64, seed: u64, noise: Option<(f64, f64, f64)>| {
        make_recording(p, t, hr, 25.0, 0.3, 120.0, seed, noise)
    };
    Dataset {
        recordings: vec![
            r("p1", "rest", 55.0, 101, None),
            r("p1", "stress", 57.0, 102, None),
            r("p2", "rest", 75.0, 201, None),
            r("p2", "stress", 75.0, 202, Some((2.2, 4.5, 0.40))),
            r("p3", "rest", 88.0, 301, Some((0.5, 0.95, 0.7))),
            r("p3", "stress", 86.0, 302, Some((0.5, 0.9, 0.8))),
            r("p4", "rest", 90.0, 401, Some((2.8, 4.8, 0.5))),
            r("p4", "stress", 89.0, 402, None),
            r("p5", "rest", 65.0, 501, None),
            r("p5", "stress", 64.0, 502, Some((0.5, 0.9, 0.5))),
            r("p6", "rest", 84.0, 601, Some((2.4, 4.4, 0.35))),
            r("p6", "stress", 83.0, 602, Some((0.55, 0.95, 0.6))),
        ],
    }
}

/// Scalarized score of each front member (the selection formula, recomputed
/// here for the dominance-invariant check).
fn scalarized_scores(front: &[(CutoffPair, ObjectiveTriple)]) -> Vec<f64> {
    let norm = |vals: Vec<f64>| -> Vec<f64> {
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            vals.iter().map(|v| (v - lo) / (hi - lo)).collect()
        } else {
            vec![0.0; vals.len()]
        }
    };
    let f1 = norm(front.iter().map(|(_, o)| o.mean_f1()).collect());
    let ibi = norm(front.iter().map(|(_, o)| o.mae_ibi_ms).collect());
    let rmssd = norm(front.iter().map(|(_, o)| o.mae_rmssd_ms).collect());
    (0..front.len()).map(|i| -f1[i] + ibi[i] + rmssd[i]).collect()
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_grid_cardinality() {
    // warm up allocator paths, then time the call itself
    let _ = grid_combinations((0.4, 1.7), (1.2, 5.0), 0.1).unwrap();
    let start = Instant::now();
    let grid = grid_combinations((0.4, 1.7), (1.2, 5.0), 0.1).unwrap();
    let elapsed = start.elapsed();
    assert_eq!(grid.len(), 525, "default grid must have exactly 525 pairs");
    assert!(
        elapsed < Duration::from_millis(1),
        "grid construction took {elapsed:?}"
    );
}

#[test]
fn criterion_2_filter_correctness() {
    let start = Instant::now();
    let fs = 64.0;
    let grid = grid_combinations((0.4, 1.7), (1.2, 5.0), 0.1).unwrap();
    assert_eq!(grid.len(), 525);
    let probes: Vec<f64> = (0..256)
        .map(|i| 0.01 + (31.9 - 0.01) * i as f64 / 255.0)
        .collect();
    for pair in &grid {
        let spec = FilterSpec::chebyshev2(4, pair.f_low, pair.f_high, 40.0);
        let cascade = design_bandpass(&spec, fs).unwrap();
        // stability
        assert!(
            cascade.max_pole_radius() < 1.0 - 1e-9,
            "({}, {}): pole radius {}",
            pair.f_low,
            pair.f_high,
            cascade.max_pole_radius()
        );
        // stopband edges at or below the design attenuation (1e-9 relative
        // slack covers double rounding exactly at the equiripple boundary)
        for edge in [pair.f_low, pair.f_high] {
            let mag = frequency_response(&cascade, &[edge], fs).unwrap()[0].norm();
            assert!(
                mag <= 0.01 * (1.0 + 1e-9),
                "({}, {}): |H({edge})| = {mag}",
                pair.f_low,
                pair.f_high
            );
        }
        // geometric mid-band gain
        let mid = (pair.f_low * pair.f_high).sqrt();
        let mag = frequency_response(&cascade, &[mid], fs).unwrap()[0].norm();
        assert!(
            mag >= 0.9,
            "({}, {}): mid-band |H({mid})| = {mag}",
            pair.f_low,
            pair.f_high
        );
        // agreement with the independent closed-form reference
        let response = frequency_response(&cascade, &probes, fs).unwrap();
        for (f, h) in probes.iter().zip(response) {
            let want =
                cheb2_bandpass_magnitude_reference(4, 40.0, pair.f_low, pair.f_high, fs, *f);
            assert!(
                (h.norm() - want).abs() < 1e-6,
                "({}, {}): |H({f})| = {} vs reference {want}",
                pair.f_low,
                pair.f_high,
                h.norm()
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
}

#[test]
fn criterion_3_matching_oracle() {
    let start = Instant::now();
    let mut rng = SplitMix64::new(7331);
    for case in 0..200 {
        let tol = 50 + (rng.next_u64() % 251) as i64;
        let gen = |rng: &mut SplitMix64| -> Vec<i64> {
            let n = 1 + rng.next_index(20);
            let mut t = 0i64;
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                t += 100 + (rng.next_u64() % 1200) as i64;
                out.push(t);
            }
            out
        };
        let ppg = gen(&mut rng);
        let ecg = gen(&mut rng);
        let greedy = match_beats(
            &BeatSeries::new(ppg.clone(), BeatSource::Ppg).unwrap(),
            &BeatSeries::new(ecg.clone(), BeatSource::Ecg).unwrap(),
            tol,
        )
        .n_correct;
        let oracle = brute_force_max_matching(&ppg, &ecg, tol);
        assert_eq!(greedy, oracle, "case {case}: ppg {ppg:?} ecg {ecg:?} tol {tol}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
}

#[test]
fn criterion_4_metric_formulas() {
    let start = Instant::now();
    let mut rng = SplitMix64::new(4242);

    // Se/PPV/F1 against the displayed formulas
    for _ in 0..100 {
        let n_ecg = 1 + rng.next_index(200);
        let n_ppg = 1 + rng.next_index(200);
        let n_correct = rng.next_index(n_ecg.min(n_ppg) + 1);
        let m = MatchResult {
            lag_ms: 0,
            pairs: vec![],
            n_correct,
            n_ecg,
            n_ppg,
        };
        let (se, ppv, f1) = se_ppv_f1(&m).unwrap();
        let se_o = n_correct as f64 / n_ecg as f64 * 100.0;
        let ppv_o = n_correct as f64 / n_ppg as f64 * 100.0;
        let f1_o = if se_o + ppv_o > 0.0 {
            2.0 * ppv_o * se_o / (ppv_o + se_o)
        } else {
            0.0
        };
        assert!((se - se_o).abs() < 1e-12);
        assert!((ppv - ppv_o).abs() < 1e-12);
        assert!((f1 - f1_o).abs() < 1e-12);
    }

    // RMSSD against the direct two-line oracle
    for _ in 0..100 {
        let n = 2 + rng.next_index(200);
        let ibis: Vec<f64> = (0..n).map(|_| 300.0 + 1500.0 * rng.next_f64()).collect();
        let ssd: f64 = ibis.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
        let oracle = (ssd / (n - 1) as f64).sqrt();
        assert!((rmssd(&ibis).unwrap() - oracle).abs() < 1e-9);
    }

    // MAE
    for _ in 0..100 {
        let n = 1 + rng.next_index(500);
        let v: Vec<f64> = (0..n).map(|_| rng.next_f64() * 200.0 - 100.0).collect();
        let oracle = v.iter().map(|x| x.abs()).sum::<f64>() / n as f64;
        assert!((mae(&v).unwrap() - oracle).abs() < 1e-12);
    }

    // Pearson r against the textbook formula
    for _ in 0..100 {
        let n = 3 + rng.next_index(100);
        let x: Vec<f64> = (0..n).map(|_| rng.next_gaussian()).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|v| 0.5 * v + rng.next_gaussian())
            .collect();
        let mx = x.iter().sum::<f64>() / n as f64;
        let my = y.iter().sum::<f64>() / n as f64;
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
        let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
        if sxx == 0.0 || syy == 0.0 {
            continue;
        }
        let oracle = sxy / (sxx * syy).sqrt();
        assert!((pearson_r(&x, &y).unwrap() - oracle).abs() < 1e-12);
    }

    // paired t: statistic against the direct formula, p against quadrature
    for _ in 0..100 {
        let n = 5 + rng.next_index(26);
        let a: Vec<f64> = (0..n).map(|_| 800.0 + 30.0 * rng.next_gaussian()).collect();
        let b: Vec<f64> = a.iter().map(|v| v + 5.0 + 10.0 * rng.next_gaussian()).collect();
        let s = PairedSamples::new(a.clone(), b.clone()).unwrap();
        let (t, p) = paired_t(&s).unwrap();
        let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        let mean = d.iter().sum::<f64>() / n as f64;
        let sd = (d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        let t_oracle = mean / (sd / (n as f64).sqrt());
        assert!((t - t_oracle).abs() < 1e-12, "t {t} vs {t_oracle}");
        let p_oracle = t_two_sided_quadrature(t_oracle, (n - 1) as f64);
        assert!((p - p_oracle).abs() < 1e-6, "p {p} vs quadrature {p_oracle}");

        // Cohen's d (paired) against the direct formula
        let d_stat = cohens_d_paired(&s).unwrap();
        assert!((d_stat - mean / sd).abs() < 1e-12);
    }

    // RM-ANOVA: independent sum-of-squares decomposition + quadrature tail
    for _ in 0..100 {
        let n = 4 + rng.next_index(7);
        let k = 2 + rng.next_index(3);
        let data: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let subject = 700.0 + 120.0 * (i as f64 / n as f64) + 30.0 * rng.next_gaussian();
                (0..k)
                    .map(|j| subject + 4.0 * j as f64 + 20.0 * rng.next_gaussian())
                    .collect()
            })
            .collect();
        let table = rm_anova(&data).unwrap();
        // oracle: direct decomposition written independently
        let nf = n as f64;
        let kf = k as f64;
        let grand: f64 = data.iter().flatten().sum::<f64>() / (nf * kf);
        let mut ss_total = 0.0;
        for row in &data {
            for v in row {
                ss_total += (v - grand).powi(2);
            }
        }
        let mut ss_subj = 0.0;
        for row in &data {
            let m = row.iter().sum::<f64>() / kf;
            ss_subj += kf * (m - grand).powi(2);
        }
        let mut ss_treat = 0.0;
        for j in 0..k {
            let m = data.iter().map(|r| r[j]).sum::<f64>() / nf;
            ss_treat += nf * (m - grand).powi(2);
        }
        let ss_err = ss_total - ss_subj - ss_treat;
        let f_oracle = (ss_treat / (kf - 1.0)) / (ss_err / ((kf - 1.0) * (nf - 1.0)));
        assert!(
            (table.f_stat - f_oracle).abs() < 1e-9 * (1.0 + f_oracle.abs()),
            "F {} vs {f_oracle}",
            table.f_stat
        );
        let p_oracle = f_sf_quadrature(f_oracle, kf - 1.0, (kf - 1.0) * (nf - 1.0));
        assert!(
            (table.p_value - p_oracle).abs() < 1e-6,
            "p {} vs quadrature {p_oracle}",
            table.p_value
        );
        // k = 2: F equals the squared paired-t statistic
        if k == 2 {
            let s = PairedSamples::new(
                data.iter().map(|r| r[0]).collect(),
                data.iter().map(|r| r[1]).collect(),
            )
            .unwrap();
            let (t, _) = paired_t(&s).unwrap();
            assert!(
                (table.f_stat - t * t).abs() < 1e-9 * (1.0 + t * t),
                "F {} vs t^2 {}",
                table.f_stat,
                t * t
            );
        }
    }

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
}

#[test]
fn criterion_5_end_to_end_clean_recovery() {
    let start = Instant::now();
    let recordings: Vec<Recording> = [60.0, 68.0, 75.0, 83.0, 90.0]
        .into_iter()
        .enumerate()
        .map(|(i, hr)| clean_recording(hr, 41 + i as u64 * 100))
        .collect();
    let cfg = EvalConfig::default();
    let base = CutoffPair::new(0.5, 4.0);
    for rec in &recordings {
        let eval = evaluate_recording(&base, rec, &cfg);
        let agg = eval.aggregate.expect("clean recording must have valid windows");
        assert!(agg.mean_f1 >= 99.0, "{}: F1 {}", rec.participant, agg.mean_f1);
        assert!(
            agg.mae_ibi_ms <= 5.0,
            "{}: MAE IBI {}",
            rec.participant,
            agg.mae_ibi_ms
        );
        assert!(
            agg.mae_rmssd_ms <= 10.0,
            "{}: MAE RMSSD {}",
            rec.participant,
            agg.mae_rmssd_ms
        );
    }
    let dataset = Dataset { recordings };
    let evaluator = GridEvaluator::new(&dataset, &cfg);
    let pooled = evaluator.objective(&base, &OptimizationScope::Global);
    assert!(pooled.mean_f1() >= 99.0, "pooled F1 {}", pooled.mean_f1());
    assert!(pooled.mae_ibi_ms <= 5.0, "pooled MAE IBI {}", pooled.mae_ibi_ms);
    assert!(
        pooled.mae_rmssd_ms <= 10.0,
        "pooled MAE RMSSD {}",
        pooled.mae_rmssd_ms
    );
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
}

#[test]
fn criterion_6_optimization_benefit() {
    let start = Instant::now();
    let dataset = benefit_dataset();
    let cfg = EvalConfig::default();
    let evaluator = GridEvaluator::new(&dataset, &cfg);
    let bounds = CutoffBounds::default();
    let base = CutoffPair::new(0.5, 4.0);

    // base must be degraded but feasible on every recording
    let base_obj = evaluator.objective(&base, &OptimizationScope::Global);
    for rec in &dataset.recordings {
        let eval = evaluate_recording(&base, rec, &cfg);
        assert!(
            eval.aggregate.is_some(),
            "base must stay feasible on {}/{}",
            rec.participant,
            rec.task
        );
    }

    // global NSGA-II pick
    let nsga_cfg = Nsga2Config {
        seed: 42,
        ..Default::default()
    };
    let global_front = nsga2(
        |p| evaluator.objective(p, &OptimizationScope::Global),
        &bounds,
        &nsga_cfg,
    )
    .unwrap();
    let (global_pair, _) = select_scalarized(&global_front).unwrap();

    // per-slice picks with the global lattice point injected
    let slices = dataset.slices();
    let mut pt_objectives: Vec<ObjectiveTriple> = Vec::new();
    for (i, (participant, task)) in slices.iter().enumerate() {
        let scope = OptimizationScope::PerPersonTask {
            participant: participant.clone(),
            task: task.clone(),
        };
        let indices = dataset.indices_for(&scope);
        let slice_cfg = Nsga2Config {
            seed: 42u64.wrapping_add((i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            ..Default::default()
        };
        let mut candidates = nsga2(
            |p| evaluator.objective_over(&indices, p),
            &bounds,
            &slice_cfg,
        )
        .unwrap();
        let global_on_slice = evaluator.objective_over(&indices, &global_pair);
        if !candidates
            .iter()
            .any(|(p, _)| p.lattice_key() == global_pair.lattice_key())
        {
            candidates.push((global_pair, global_on_slice));
        }
        let (chosen_pair, chosen_obj) = select_scalarized(&candidates).unwrap();
        pt_objectives.push(chosen_obj);

        // optimizer-dominance invariant: the per-slice scalarized score can
        // never exceed the global filter's score on the same slice
        let scores = scalarized_scores(&candidates);
        let chosen_score = candidates
            .iter()
            .zip(&scores)
            .find(|((p, _), _)| p.lattice_key() == chosen_pair.lattice_key())
            .map(|(_, s)| *s)
            .unwrap();
        let global_score = candidates
            .iter()
            .zip(&scores)
            .find(|((p, _), _)| p.lattice_key() == global_pair.lattice_key())
            .map(|(_, s)| *s)
            .unwrap();
        assert!(
            chosen_score <= global_score + 1e-12,
            "{participant}/{task}: per-slice score {chosen_score} exceeds global {global_score}"
        );
    }

    // pooled per-person-task means vs the fixed baseline
    let n = pt_objectives.len() as f64;
    let pt_f1 = pt_objectives.iter().map(|o| o.mean_f1()).sum::<f64>() / n;
    let pt_rmssd = pt_objectives.iter().map(|o| o.mae_rmssd_ms).sum::<f64>() / n;
    assert!(
        pt_f1 > base_obj.mean_f1(),
        "per-person-task mean F1 {pt_f1} must strictly exceed base {}",
        base_obj.mean_f1()
    );
    assert!(
        pt_rmssd < base_obj.mae_rmssd_ms,
        "per-person-task MAE RMSSD {pt_rmssd} must be strictly below base {}",
        base_obj.mae_rmssd_ms
    );

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(300), "took {elapsed:?}");
}

#[test]
fn criterion_7_nsga2_soundness() {
    let start = Instant::now();

    // non-dominated sort against the O(n^2) definition on 500 random triples
    let mut rng = SplitMix64::new(880);
    let points: Vec<ObjectiveTriple> = (0..500)
        .map(|_| ObjectiveTriple {
            neg_f1: -(100.0 * rng.next_f64()),
            mae_ibi_ms: 50.0 * rng.next_f64(),
            mae_rmssd_ms: 100.0 * rng.next_f64(),
        })
        .collect();
    let fronts = non_dominated_sort(&points);
    let mut rank = vec![usize::MAX; points.len()];
    for (r, front) in fronts.iter().enumerate() {
        for &i in front {
            rank[i] = r;
        }
    }
    for i in 0..points.len() {
        let dominators: Vec<usize> = (0..points.len())
            .filter(|&j| points[j].dominates(&points[i]))
            .collect();
        let expect = dominators.iter().map(|&j| rank[j] + 1).max().unwrap_or(0);
        assert_eq!(rank[i], expect, "point {i}");
    }
    assert_eq!(fronts.iter().map(Vec::len).sum::<usize>(), points.len());

    // memoized synthetic problem: front 0 must not be dominated by any of
    // the 525 exhaustively evaluated grid points
    let dataset = Dataset {
        recordings: vec![
            make_recording("p1", "rest", 66.0, 25.0, 0.3, 120.0, 11, None),
            make_recording("p2", "rest", 86.0, 25.0, 0.3, 120.0, 13, Some((0.5, 0.9, 0.7))),
        ],
    };
    let cfg = EvalConfig::default();
    let evaluator = GridEvaluator::new(&dataset, &cfg);
    let grid = grid_combinations((0.4, 1.7), (1.2, 5.0), 0.1).unwrap();
    let grid_objs = evaluator.evaluate_grid(&grid, &OptimizationScope::Global);

    let nsga_cfg = Nsga2Config {
        seed: 99,
        ..Default::default()
    };
    let front = nsga2(
        |p| evaluator.objective(p, &OptimizationScope::Global),
        &CutoffBounds::default(),
        &nsga_cfg,
    )
    .unwrap();
    assert!(!front.is_empty());
    for (pair, obj) in &front {
        for (gp, go) in grid.iter().zip(&grid_objs) {
            assert!(
                !go.dominates(obj),
                "front point ({}, {}) dominated by grid point ({}, {})",
                pair.f_low,
                pair.f_high,
                gp.f_low,
                gp.f_high
            );
        }
    }

    // same-seed determinism, byte for byte
    let front2 = nsga2(
        |p| evaluator.objective(p, &OptimizationScope::Global),
        &CutoffBounds::default(),
        &nsga_cfg,
    )
    .unwrap();
    let render = |f: &[(CutoffPair, ObjectiveTriple)]| -> Vec<u8> {
        let mut out = Vec::new();
        for (p, o) in f {
            out.extend_from_slice(&p.f_low.to_bits().to_le_bytes());
            out.extend_from_slice(&p.f_high.to_bits().to_le_bytes());
            out.extend_from_slice(&o.neg_f1.to_bits().to_le_bytes());
            out.extend_from_slice(&o.mae_ibi_ms.to_bits().to_le_bytes());
            out.extend_from_slice(&o.mae_rmssd_ms.to_bits().to_le_bytes());
        }
        out
    };
    assert_eq!(render(&front), render(&front2), "same seed must reproduce bytes");

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(120), "took {elapsed:?}");
}

#[test]
fn criterion_8_pipeline_determinism() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let data_dir = dir.path().join("data");

    // synthesize a dataset on disk through the CLI surface
    let config: pulseband_cli::RunConfig = toml::from_str(
        r#"
        seed = 2024
        scopes = ["global", "per_person_task"]

        [nsga2]
        population = 16
        generations = 8
        "#,
    )
    .unwrap();
    let tasks = vec!["rest".to_string(), "stress".to_string()];
    pulseband_cli::commands::synth(
        &config, &data_dir, 3, &tasks, 90.0, 64.0, 250.0, "ecg", None,
    )
    .unwrap();
    let manifest_path = data_dir.join("manifest.toml");

    let run = |out: &std::path::Path| {
        pulseband_cli::commands::report_cmd(
            &config,
            &manifest_path,
            out,
            Some(&out.join("cache")),
        )
        .unwrap();
    };
    let out_a = dir.path().join("out_a");
    let out_b = dir.path().join("out_b");
    run(&out_a);
    run(&out_b);

    // every produced file must match byte for byte
    let mut files: Vec<std::path::PathBuf> = Vec::new();
    fn collect(dir: &std::path::Path, base: &std::path::Path, out: &mut Vec<std::path::PathBuf>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                collect(&path, base, out);
            } else {
                out.push(path.strip_prefix(base).unwrap().to_path_buf());
            }
        }
    }
    collect(&out_a, &out_a, &mut files);
    files.sort();
    assert!(files.len() >= 8, "expected a full report, got {files:?}");
    for rel in &files {
        let a = std::fs::read(out_a.join(rel)).unwrap();
        let b = std::fs::read(out_b.join(rel)).unwrap();
        assert_eq!(a, b, "file {} differs between runs", rel.display());
    }

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(300), "took {elapsed:?}");
}

/// Optional: requires user-supplied WESAD recordings converted to CSV and a
/// manifest; point WESAD_MANIFEST at it and run with --ignored.
#[test]
#[ignore = "requires user-downloaded WESAD data (set WESAD_MANIFEST)"]
fn criterion_9_wesad_ordering() {
    let manifest_path = std::env::var("WESAD_MANIFEST")
        .expect("set WESAD_MANIFEST to the converted dataset manifest");
    let config = pulseband_cli::RunConfig::default();
    let report = pulseband_cli::commands::report_cmd(
        &config,
        std::path::Path::new(&manifest_path),
        std::path::Path::new("out/wesad"),
        None,
    )
    .unwrap();

    let mut tasks: Vec<String> = report.rows.iter().map(|r| r.task.clone()).collect();
    tasks.sort();
    tasks.dedup();
    for task in &tasks {
        let mean_f1 = |scope: &str| -> f64 {
            let rows: Vec<f64> = report
                .rows
                .iter()
                .filter(|r| r.scope == scope && &r.task == task)
                .map(|r| r.mean_f1)
                .collect();
            rows.iter().sum::<f64>() / rows.len() as f64
        };
        let (base, global, pt) = (mean_f1("base"), mean_f1("global"), mean_f1("per_person_task"));
        println!("{task}: F1 base {base:.2} global {global:.2} per-person-task {pt:.2}");
        assert!(pt >= global - 1e-9, "{task}: F_pt {pt} < F_global {global}");
        assert!(global >= base - 1e-9, "{task}: F_global {global} < F_base {base}");
    }
}
