//! Full-run orchestration: optimize cutoffs per scope, evaluate the chosen
//! filters everywhere, build distribution tables and the statistical
//! comparison of conditions, and collect everything for the report writers.
//!
//! Determinism contract: identical dataset + config + seed produce identical
//! in-memory reports (and therefore byte-identical report files). All maps
//! are ordered, all parallel reductions collect in input order, and the
//! disk cache stores exact float bits.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use pulseband_core::metrics::{motion_auc, pearson_r, SegmentMetrics};
use pulseband_core::optimize::{
    evaluate_recording, nsga2, select_scalarized, CutoffPair, Dataset, GridEvaluator,
    ObjectiveTriple, OptimizationScope, Recording,
};
use pulseband_core::signal::tile_windows;
use pulseband_core::stats::{
    bonferroni, cohens_d, paired_t, rm_anova, PairedSamples,
};

use crate::cache;
use crate::config::RunConfig;
use crate::errors::Result;

pub const SCOPE_BASE: &str = "base";
pub const SCOPE_GLOBAL: &str = "global";
pub const SCOPE_PT: &str = "per_person_task";
pub const COND_ECG: &str = "ecg";

#[derive(Debug, Clone)]
pub struct ScopeRow {
    pub scope: String,
    pub participant: String,
    pub task: String,
    pub pair: CutoffPair,
    pub lag_ms: i64,
    pub mean_f1: f64,
    pub mae_ibi_ms: f64,
    pub mae_rmssd_ms: f64,
    pub n_valid: usize,
    pub n_windows: usize,
}

#[derive(Debug, Clone)]
pub struct DistRow {
    pub task: String,
    pub condition: String,
    pub participant: String,
    pub mean_ibi_ms: f64,
    pub rmssd_ms: f64,
}

#[derive(Debug, Clone)]
pub struct AnovaRow {
    pub task: String,
    pub metric: String,
    pub conditions: Vec<String>,
    pub n_subjects: usize,
    pub f_stat: f64,
    pub df_treatment: usize,
    pub df_error: usize,
    pub p_value: f64,
}

#[derive(Debug, Clone)]
pub struct PairwiseRow {
    pub task: String,
    pub metric: String,
    pub cond_a: String,
    pub cond_b: String,
    pub n_subjects: usize,
    pub t_stat: f64,
    pub p_raw: f64,
    pub p_bonferroni: f64,
    pub cohens_d: f64,
}

#[derive(Debug, Clone)]
pub struct MotionRow {
    pub task: String,
    pub n_windows: usize,
    pub r_f1: f64,
    pub r_abs_err_ibi: f64,
    pub r_abs_err_rmssd: f64,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub base_pair: CutoffPair,
    pub chosen_global: Option<(CutoffPair, ObjectiveTriple)>,
    pub global_front: Vec<(CutoffPair, ObjectiveTriple)>,
    pub chosen_pt: BTreeMap<(String, String), (CutoffPair, ObjectiveTriple)>,
    pub rows: Vec<ScopeRow>,
    /// scope -> (participant, task, window metrics)
    pub windows: BTreeMap<String, Vec<(String, String, SegmentMetrics)>>,
    pub distributions: Vec<DistRow>,
    pub anova: Vec<AnovaRow>,
    pub pairwise: Vec<PairwiseRow>,
    pub motion: Vec<MotionRow>,
}

impl RunReport {
    pub fn scopes(&self) -> Vec<String> {
        let mut scopes = vec![SCOPE_BASE.to_string()];
        if self.chosen_global.is_some() {
            scopes.push(SCOPE_GLOBAL.to_string());
        }
        if !self.chosen_pt.is_empty() {
            scopes.push(SCOPE_PT.to_string());
        }
        scopes
    }
}

/// Deterministic per-slice NSGA-II seed derived from the run seed.
fn slice_seed(run_seed: u64, slice_index: usize) -> u64 {
    run_seed.wrapping_add((slice_index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

pub fn run_pipeline(
    dataset: &Dataset,
    config: &RunConfig,
    cache_dir: Option<&Path>,
) -> Result<RunReport> {
    let eval_cfg = config.eval_config();
    let evaluator = GridEvaluator::new(dataset, &eval_cfg);

    // Seed the evaluator from the disk cache.
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

    let base_pair = CutoffPair::new(config.filter.base_low_hz, config.filter.base_high_hz);
    let bounds = config.cutoff_bounds();

    // Global optimization.
    let (chosen_global, global_front) = if config.run_global() {
        let front = nsga2(
            |p| evaluator.objective(p, &OptimizationScope::Global),
            &bounds,
            &config.nsga2_config(config.seed),
        )?;
        let chosen = select_scalarized(&front)?;
        (Some(chosen), front)
    } else {
        (None, Vec::new())
    };

    // Per-person-task optimization, with the global lattice point injected
    // into each slice's candidate set so the per-slice pick can never score
    // worse than the pooled choice on its own slice.
    let mut chosen_pt: BTreeMap<(String, String), (CutoffPair, ObjectiveTriple)> =
        BTreeMap::new();
    if config.run_per_person_task() {
        for (i, (participant, task)) in dataset.slices().iter().enumerate() {
            let scope = OptimizationScope::PerPersonTask {
                participant: participant.clone(),
                task: task.clone(),
            };
            let indices = dataset.indices_for(&scope);
            let mut candidates = nsga2(
                |p| evaluator.objective_over(&indices, p),
                &bounds,
                &config.nsga2_config(slice_seed(config.seed, i)),
            )?;
            if let Some((gp, _)) = &chosen_global {
                let on_slice = evaluator.objective_over(&indices, gp);
                if !candidates.iter().any(|(p, _)| p.lattice_key() == gp.lattice_key()) {
                    candidates.push((*gp, on_slice));
                }
            }
            let chosen = select_scalarized(&candidates)?;
            chosen_pt.insert((participant.clone(), task.clone()), chosen);
        }
    }

    // Evaluate the chosen filter of every scope on every recording, with
    // per-window motion AUC when accelerometry is present.
    let motion_cfg = config.motion_config();
    let motion_by_rec: Vec<Option<Vec<Option<f64>>>> = dataset
        .recordings
        .iter()
        .map(|rec| {
            rec.acc.as_ref().map(|axes| {
                let duration = rec.ppg_offset_ms as f64 + rec.ppg.duration_ms();
                tile_windows(duration, config.window_ms)
                    .iter()
                    .map(|w| {
                        motion_auc([&axes[0], &axes[1], &axes[2]], w, &motion_cfg).ok()
                    })
                    .collect()
            })
        })
        .collect();

    let mut rows: Vec<ScopeRow> = Vec::new();
    let mut windows: BTreeMap<String, Vec<(String, String, SegmentMetrics)>> = BTreeMap::new();
    let pair_for = |scope: &str, rec: &Recording| -> Option<CutoffPair> {
        match scope {
            SCOPE_BASE => Some(base_pair),
            SCOPE_GLOBAL => chosen_global.as_ref().map(|(p, _)| *p),
            SCOPE_PT => chosen_pt
                .get(&(rec.participant.clone(), rec.task.clone()))
                .map(|(p, _)| *p),
            _ => None,
        }
    };

    let mut scope_names = vec![SCOPE_BASE];
    if config.run_global() {
        scope_names.push(SCOPE_GLOBAL);
    }
    if config.run_per_person_task() {
        scope_names.push(SCOPE_PT);
    }

    for scope in &scope_names {
        let mut dump: Vec<(String, String, SegmentMetrics)> = Vec::new();
        for (idx, rec) in dataset.recordings.iter().enumerate() {
            let Some(pair) = pair_for(scope, rec) else {
                continue;
            };
            let eval = evaluate_recording(&pair, rec, &eval_cfg);
            let agg = eval.aggregate;
            rows.push(ScopeRow {
                scope: scope.to_string(),
                participant: rec.participant.clone(),
                task: rec.task.clone(),
                pair,
                lag_ms: eval.lag_ms,
                mean_f1: agg.map_or(0.0, |a| a.mean_f1),
                mae_ibi_ms: agg.map_or(f64::NAN, |a| a.mae_ibi_ms),
                mae_rmssd_ms: agg.map_or(f64::NAN, |a| a.mae_rmssd_ms),
                n_valid: agg.map_or(0, |a| a.n_valid),
                n_windows: eval.windows.len(),
            });
            for (w_idx, mut m) in eval.windows.into_iter().enumerate() {
                if let Some(Some(per_window)) = motion_by_rec.get(idx) {
                    m.motion_auc = per_window.get(w_idx).copied().flatten();
                }
                dump.push((rec.participant.clone(), rec.task.clone(), m));
            }
        }
        windows.insert(scope.to_string(), dump);
    }

    // Persist the (possibly grown) evaluation cache.
    if let Some(dir) = cache_dir {
        let mut per_rec: Vec<HashMap<(u16, u16), pulseband_core::optimize::RecordingSummary>> =
            vec![HashMap::new(); dataset.recordings.len()];
        for ((idx, key), summary) in evaluator.cache_snapshot() {
            per_rec[idx].insert(key, summary);
        }
        for (idx, entries) in per_rec.iter().enumerate() {
            if !entries.is_empty() {
                cache::store(dir, &hashes[idx], entries)?;
            }
        }
    }

    let distributions = build_distributions(&windows);
    let (anova, pairwise) = build_stats(&distributions, config);
    let motion = build_motion_correlations(&windows);

    Ok(RunReport {
        base_pair,
        chosen_global,
        global_front,
        chosen_pt,
        rows,
        windows,
        distributions,
        anova,
        pairwise,
        motion,
    })
}

/// Per (task, condition, participant) pooled mean IBI and RMSSD over valid
/// windows. PPG conditions come from each scope's windows; the ECG reference
/// condition comes from the base scope's window references.
fn build_distributions(
    windows: &BTreeMap<String, Vec<(String, String, SegmentMetrics)>>,
) -> Vec<DistRow> {
    // (task, condition, participant) -> (sum_ibi, sum_rmssd, n)
    let mut acc: BTreeMap<(String, String, String), (f64, f64, usize)> = BTreeMap::new();
    for (scope, dump) in windows {
        for (participant, task, m) in dump {
            if !m.valid {
                continue;
            }
            let mut add = |condition: &str, ibi: f64, rmssd: f64| {
                let entry = acc
                    .entry((task.clone(), condition.to_string(), participant.clone()))
                    .or_insert((0.0, 0.0, 0));
                entry.0 += ibi;
                entry.1 += rmssd;
                entry.2 += 1;
            };
            add(scope, m.mean_ibi_ms, m.rmssd_ms);
            if scope == SCOPE_BASE {
                add(COND_ECG, m.ref_mean_ibi_ms, m.ref_rmssd_ms);
            }
        }
    }
    acc.into_iter()
        .map(|((task, condition, participant), (ibi, rmssd, n))| DistRow {
            task,
            condition,
            participant,
            mean_ibi_ms: ibi / n as f64,
            rmssd_ms: rmssd / n as f64,
        })
        .collect()
}

/// Recompute the statistics tables from externally supplied distribution
/// rows (the `stats` subcommand).
pub fn stats_from_distributions(
    distributions: &[DistRow],
    config: &RunConfig,
) -> (Vec<AnovaRow>, Vec<PairwiseRow>) {
    build_stats(distributions, config)
}

/// Repeated-measures ANOVA plus Bonferroni-corrected pairwise t-tests and
/// effect sizes, per task and per metric, across the conditions present.
fn build_stats(
    distributions: &[DistRow],
    config: &RunConfig,
) -> (Vec<AnovaRow>, Vec<PairwiseRow>) {
    let mut tasks: Vec<String> = distributions.iter().map(|d| d.task.clone()).collect();
    tasks.sort();
    tasks.dedup();

    // fixed condition display order
    let condition_order = [COND_ECG, SCOPE_BASE, SCOPE_GLOBAL, SCOPE_PT];

    let mut anova_rows = Vec::new();
    let mut pairwise_rows = Vec::new();
    for task in &tasks {
        let in_task: Vec<&DistRow> = distributions.iter().filter(|d| &d.task == task).collect();
        let mut conditions: Vec<String> = condition_order
            .iter()
            .filter(|c| in_task.iter().any(|d| d.condition == **c))
            .map(|c| c.to_string())
            .collect();
        conditions.dedup();
        if conditions.len() < 2 {
            continue;
        }
        // participants present in every condition
        let mut participants: Vec<String> = in_task
            .iter()
            .map(|d| d.participant.clone())
            .collect();
        participants.sort();
        participants.dedup();
        participants.retain(|p| {
            conditions.iter().all(|c| {
                in_task
                    .iter()
                    .any(|d| &d.participant == p && &d.condition == c)
            })
        });
        if participants.len() < 2 {
            continue;
        }
        let value = |p: &str, c: &str, metric: &str| -> f64 {
            let row = in_task
                .iter()
                .find(|d| d.participant == p && d.condition == c)
                .expect("participants filtered to complete cases");
            match metric {
                "mean_ibi" => row.mean_ibi_ms,
                _ => row.rmssd_ms,
            }
        };
        for metric in ["mean_ibi", "rmssd"] {
            let matrix: Vec<Vec<f64>> = participants
                .iter()
                .map(|p| {
                    conditions
                        .iter()
                        .map(|c| value(p, c, metric))
                        .collect()
                })
                .collect();
            if let Ok(table) = rm_anova(&matrix) {
                anova_rows.push(AnovaRow {
                    task: task.clone(),
                    metric: metric.to_string(),
                    conditions: conditions.clone(),
                    n_subjects: participants.len(),
                    f_stat: table.f_stat,
                    df_treatment: table.df_treatment,
                    df_error: table.df_error,
                    p_value: table.p_value,
                });
            }
            // pairwise comparisons with Bonferroni over the number of pairs
            let mut pairs: Vec<(String, String)> = Vec::new();
            for i in 0..conditions.len() {
                for j in (i + 1)..conditions.len() {
                    pairs.push((conditions[i].clone(), conditions[j].clone()));
                }
            }
            let m = pairs.len();
            let mut raw: Vec<(String, String, f64, f64, f64)> = Vec::new();
            for (a, b) in &pairs {
                let va: Vec<f64> = participants.iter().map(|p| value(p, a, metric)).collect();
                let vb: Vec<f64> = participants.iter().map(|p| value(p, b, metric)).collect();
                let Ok(samples) = PairedSamples::new(va, vb) else {
                    continue;
                };
                let (t, p) = match paired_t(&samples) {
                    Ok(tp) => tp,
                    Err(_) => (f64::NAN, f64::NAN),
                };
                let d = cohens_d(&samples, config.cohens_d_variant()).unwrap_or(f64::NAN);
                raw.push((a.clone(), b.clone(), t, p, d));
            }
            let corrected = bonferroni(
                &raw.iter()
                    .map(|r| if r.3.is_nan() { 1.0 } else { r.3 })
                    .collect::<Vec<f64>>(),
                m,
            )
            .unwrap_or_default();
            for ((a, b, t, p, d), pc) in raw.into_iter().zip(corrected) {
                pairwise_rows.push(PairwiseRow {
                    task: task.clone(),
                    metric: metric.to_string(),
                    cond_a: a,
                    cond_b: b,
                    n_subjects: participants.len(),
                    t_stat: t,
                    p_raw: p,
                    p_bonferroni: if p.is_nan() { f64::NAN } else { pc },
                    cohens_d: d,
                });
            }
        }
    }
    (anova_rows, pairwise_rows)
}

/// Pearson correlations between per-window motion AUC and the accuracy
/// metrics, per task, pooled over the base scope's valid windows.
fn build_motion_correlations(
    windows: &BTreeMap<String, Vec<(String, String, SegmentMetrics)>>,
) -> Vec<MotionRow> {
    let Some(dump) = windows.get(SCOPE_BASE) else {
        return Vec::new();
    };
    let mut tasks: Vec<String> = dump.iter().map(|(_, t, _)| t.clone()).collect();
    tasks.sort();
    tasks.dedup();
    let mut out = Vec::new();
    for task in tasks {
        let rows: Vec<&SegmentMetrics> = dump
            .iter()
            .filter(|(_, t, m)| *t == task && m.valid && m.motion_auc.is_some())
            .map(|(_, _, m)| m)
            .collect();
        if rows.len() < 3 {
            continue;
        }
        let auc: Vec<f64> = rows.iter().map(|m| m.motion_auc.unwrap()).collect();
        let corr = |values: Vec<f64>| pearson_r(&auc, &values).unwrap_or(f64::NAN);
        out.push(MotionRow {
            task,
            n_windows: rows.len(),
            r_f1: corr(rows.iter().map(|m| m.f1).collect()),
            r_abs_err_ibi: corr(rows.iter().map(|m| m.abs_err_ibi_ms).collect()),
            r_abs_err_rmssd: corr(rows.iter().map(|m| m.abs_err_rmssd_ms).collect()),
        });
    }
    out
}
