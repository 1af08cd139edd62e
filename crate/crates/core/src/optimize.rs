//! Cutoff-frequency optimization: grid sweeps and NSGA-II multi-objective
//! search over (f_low, f_high) with min-max scalarized selection.
//!
//! Objective evaluations run the full per-recording chain (design the
//! Chebyshev-II filter, zero-phase filter the PPG, detect beats, align
//! against the ECG reference, window metrics, aggregate) and are memoized on
//! the 0.1 Hz lattice, which matches the sweep grid granularity and
//! keeps exhaustive-oracle comparison possible.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;

use crate::beat::{detect_ppg_beats, BeatSeries, PpgDetectorConfig};
use crate::error::{Error, Result};
use crate::filter::{apply_zero_phase, design_bandpass, FilterSpec};
use crate::metrics::{
    aggregate_windows, best_lag, window_metrics, MatchingConfig, SegmentMetrics, WindowConfig,
};
use crate::rng::SplitMix64;
use crate::signal::{tile_windows, Signal};

/// Candidate band-pass cutoffs in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffPair {
    pub f_low: f64,
    pub f_high: f64,
}

impl CutoffPair {
    pub fn new(f_low: f64, f_high: f64) -> Self {
        Self { f_low, f_high }
    }

    /// Integer decihertz key: the memoization lattice.
    pub fn lattice_key(&self) -> (u16, u16) {
        (
            (self.f_low * 10.0).round() as u16,
            (self.f_high * 10.0).round() as u16,
        )
    }

    /// The pair snapped onto the 0.1 Hz lattice.
    pub fn snapped(&self) -> Self {
        let (lo, hi) = self.lattice_key();
        Self {
            f_low: lo as f64 / 10.0,
            f_high: hi as f64 / 10.0,
        }
    }
}

/// (negated mean F1, MAE IBI, MAE RMSSD): all three minimized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveTriple {
    pub neg_f1: f64,
    pub mae_ibi_ms: f64,
    pub mae_rmssd_ms: f64,
}

impl ObjectiveTriple {
    /// Penalty for infeasible evaluations (no valid windows anywhere in
    /// scope); dominated by every feasible triple.
    pub const PENALTY: Self = Self {
        neg_f1: 0.0,
        mae_ibi_ms: 1e6,
        mae_rmssd_ms: 1e6,
    };

    pub fn mean_f1(&self) -> f64 {
        -self.neg_f1
    }

    /// True iff `self` is no worse in all objectives and strictly better in
    /// at least one.
    pub fn dominates(&self, other: &Self) -> bool {
        let le = self.neg_f1 <= other.neg_f1
            && self.mae_ibi_ms <= other.mae_ibi_ms
            && self.mae_rmssd_ms <= other.mae_rmssd_ms;
        let lt = self.neg_f1 < other.neg_f1
            || self.mae_ibi_ms < other.mae_ibi_ms
            || self.mae_rmssd_ms < other.mae_rmssd_ms;
        le && lt
    }
}

/// Which slice of the dataset an optimization runs over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OptimizationScope {
    /// Fixed non-optimized filter evaluated over everything.
    Base,
    /// One filter pooled over all recordings.
    Global,
    /// One filter per (participant, task) slice.
    PerPersonTask { participant: String, task: String },
}

impl OptimizationScope {
    pub fn selects(&self, rec: &Recording) -> bool {
        match self {
            OptimizationScope::Base | OptimizationScope::Global => true,
            OptimizationScope::PerPersonTask { participant, task } => {
                rec.participant == *participant && rec.task == *task
            }
        }
    }
}

/// One aligned PPG/ECG recording. The ECG-derived beat series is detected
/// once at ingestion and cached here; `ppg_offset_ms` places the PPG start in
/// the common (ECG-aligned) time frame.
#[derive(Debug, Clone)]
pub struct Recording {
    pub participant: String,
    pub task: String,
    pub ppg: Signal,
    pub ppg_offset_ms: i64,
    pub ecg_beats: BeatSeries,
    pub acc: Option<[Signal; 3]>,
}

#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub recordings: Vec<Recording>,
}

impl Dataset {
    pub fn indices_for(&self, scope: &OptimizationScope) -> Vec<usize> {
        self.recordings
            .iter()
            .enumerate()
            .filter(|(_, r)| scope.selects(r))
            .map(|(i, _)| i)
            .collect()
    }

    /// Sorted unique (participant, task) slices.
    pub fn slices(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = self
            .recordings
            .iter()
            .map(|r| (r.participant.clone(), r.task.clone()))
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

/// Everything an objective evaluation needs besides the cutoffs.
#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub ppg_filter_order: usize,
    pub ppg_stopband_atten_db: f64,
    pub detector: PpgDetectorConfig,
    pub matching: MatchingConfig,
    pub window: WindowConfig,
    pub window_ms: i64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            ppg_filter_order: 4,
            ppg_stopband_atten_db: 40.0,
            detector: PpgDetectorConfig::default(),
            matching: MatchingConfig::default(),
            window: WindowConfig::default(),
            window_ms: 60_000,
        }
    }
}

/// Per-recording evaluation result for one cutoff pair.
#[derive(Debug, Clone)]
pub struct RecordingEval {
    pub lag_ms: i64,
    pub windows: Vec<SegmentMetrics>,
    /// None when no window was valid.
    pub aggregate: Option<crate::metrics::WindowAggregate>,
}

/// Compact cacheable per-recording aggregate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordingSummary {
    pub mean_f1: f64,
    pub mae_ibi_ms: f64,
    pub mae_rmssd_ms: f64,
    pub n_valid: usize,
}

impl RecordingSummary {
    pub const FAILED: Self = Self {
        mean_f1: 0.0,
        mae_ibi_ms: 1e6,
        mae_rmssd_ms: 1e6,
        n_valid: 0,
    };

    pub fn from_eval(eval: &RecordingEval) -> Self {
        match &eval.aggregate {
            Some(a) => Self {
                mean_f1: a.mean_f1,
                mae_ibi_ms: a.mae_ibi_ms,
                mae_rmssd_ms: a.mae_rmssd_ms,
                n_valid: a.n_valid,
            },
            None => Self::FAILED,
        }
    }
}

/// Run the full chain for one recording and one cutoff pair. Detection
/// failures are not errors at this level: they produce all-invalid windows
/// (and a `FAILED` summary), which the optimizer penalizes.
pub fn evaluate_recording(pair: &CutoffPair, rec: &Recording, cfg: &EvalConfig) -> RecordingEval {
    let duration_ms = rec.ppg_offset_ms as f64 + rec.ppg.duration_ms();
    let windows = tile_windows(duration_ms, cfg.window_ms);
    let empty = |windows: &[crate::signal::Window]| RecordingEval {
        lag_ms: 0,
        windows: window_metrics(
            &BeatSeries::empty(crate::beat::BeatSource::Ppg),
            &rec.ecg_beats,
            0,
            windows,
            &cfg.window,
        ),
        aggregate: None,
    };

    let spec = FilterSpec::chebyshev2(
        cfg.ppg_filter_order,
        pair.f_low,
        pair.f_high,
        cfg.ppg_stopband_atten_db,
    );
    let cascade = match design_bandpass(&spec, rec.ppg.fs()) {
        Ok(c) => c,
        Err(_) => return empty(&windows),
    };
    let filtered = match apply_zero_phase(&cascade, &rec.ppg) {
        Ok(f) => f,
        Err(_) => return empty(&windows),
    };
    let beats = match detect_ppg_beats(&filtered, &cfg.detector) {
        Ok(b) if !b.is_empty() => b.shifted(rec.ppg_offset_ms),
        _ => return empty(&windows),
    };
    let lag = match best_lag(&beats, &rec.ecg_beats, &cfg.matching) {
        Ok(l) => l,
        Err(_) => return empty(&windows),
    };
    let metrics = window_metrics(&beats, &rec.ecg_beats, lag, &windows, &cfg.window);
    let aggregate = aggregate_windows(&metrics);
    RecordingEval {
        lag_ms: lag,
        windows: metrics,
        aggregate,
    }
}

/// Memoizing evaluator over a dataset. Evaluations are snapped to the 0.1 Hz
/// lattice; per-recording summaries are cached so every scope (global,
/// per-person-task) reuses them. Thread-safe; grid evaluations run in
/// parallel with results in deterministic order.
pub struct GridEvaluator<'a> {
    dataset: &'a Dataset,
    cfg: &'a EvalConfig,
    cache: Mutex<HashMap<(usize, (u16, u16)), RecordingSummary>>,
}

impl<'a> GridEvaluator<'a> {
    pub fn new(dataset: &'a Dataset, cfg: &'a EvalConfig) -> Self {
        Self {
            dataset,
            cfg,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn dataset(&self) -> &Dataset {
        self.dataset
    }

    pub fn config(&self) -> &EvalConfig {
        self.cfg
    }

    /// Preload cached summaries (e.g. from a previous run persisted on disk).
    pub fn seed_cache(&self, entries: impl IntoIterator<Item = ((usize, (u16, u16)), RecordingSummary)>) {
        let mut cache = self.cache.lock().unwrap();
        cache.extend(entries);
    }

    /// Snapshot of the memo, sorted for deterministic persistence.
    pub fn cache_snapshot(&self) -> Vec<((usize, (u16, u16)), RecordingSummary)> {
        let cache = self.cache.lock().unwrap();
        let mut out: Vec<_> = cache.iter().map(|(k, v)| (*k, *v)).collect();
        out.sort_by_key(|(k, _)| *k);
        out
    }

    fn summary(&self, rec_idx: usize, pair: &CutoffPair) -> RecordingSummary {
        let key = (rec_idx, pair.lattice_key());
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return *hit;
        }
        let snapped = pair.snapped();
        let eval = evaluate_recording(&snapped, &self.dataset.recordings[rec_idx], self.cfg);
        let summary = RecordingSummary::from_eval(&eval);
        self.cache.lock().unwrap().insert(key, summary);
        summary
    }

    /// Pooled objective over the recordings of `scope`: the unweighted mean
    /// of per-recording aggregates. A recording with no valid windows
    /// contributes the failed aggregate (F1 = 0, MAE = 1e6) so partial
    /// failures are penalized; an empty scope or all-failed scope yields the
    /// penalty triple.
    pub fn objective(&self, pair: &CutoffPair, scope: &OptimizationScope) -> ObjectiveTriple {
        self.objective_over(&self.dataset.indices_for(scope), pair)
    }

    pub fn objective_over(&self, indices: &[usize], pair: &CutoffPair) -> ObjectiveTriple {
        if indices.is_empty() {
            return ObjectiveTriple::PENALTY;
        }
        let mut f1 = 0.0;
        let mut ibi = 0.0;
        let mut rmssd = 0.0;
        let mut any_valid = false;
        for &i in indices {
            let s = self.summary(i, pair);
            f1 += s.mean_f1;
            ibi += s.mae_ibi_ms;
            rmssd += s.mae_rmssd_ms;
            any_valid |= s.n_valid > 0;
        }
        if !any_valid {
            return ObjectiveTriple::PENALTY;
        }
        let n = indices.len() as f64;
        ObjectiveTriple {
            neg_f1: -(f1 / n),
            mae_ibi_ms: ibi / n,
            mae_rmssd_ms: rmssd / n,
        }
    }

    /// Evaluate many pairs (grid sweep) in parallel; output order matches
    /// input order regardless of scheduling.
    pub fn evaluate_grid(
        &self,
        pairs: &[CutoffPair],
        scope: &OptimizationScope,
    ) -> Vec<ObjectiveTriple> {
        let indices = self.dataset.indices_for(scope);
        pairs
            .par_iter()
            .map(|p| self.objective_over(&indices, p))
            .collect()
    }
}

/// One-shot evaluation of a cutoff pair over a scope. Grid sweeps and
/// optimizer runs should go through [`GridEvaluator`] instead, which memoizes
/// per-recording summaries across calls.
pub fn evaluate_cutoffs(
    pair: &CutoffPair,
    scope: &OptimizationScope,
    dataset: &Dataset,
    cfg: &EvalConfig,
) -> ObjectiveTriple {
    GridEvaluator::new(dataset, cfg).objective(pair, scope)
}

/// Variable bounds for the cutoff search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffBounds {
    pub f_low: (f64, f64),
    pub f_high: (f64, f64),
}

impl Default for CutoffBounds {
    fn default() -> Self {
        Self {
            f_low: (0.4, 1.7),
            f_high: (1.2, 5.0),
        }
    }
}

impl CutoffBounds {
    pub fn validate(&self) -> Result<()> {
        if !(self.f_low.0 < self.f_low.1) || !(self.f_high.0 < self.f_high.1) {
            return Err(Error::InvalidInput(format!(
                "cutoff bounds must be non-degenerate: {self:?}"
            )));
        }
        if !(self.f_low.0 > 0.0) {
            return Err(Error::InvalidInput(
                "lower cutoff bound must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Cartesian product of the two cutoff ranges on the integer decihertz
/// lattice, excluding pairs with `f_low >= f_high`. The default
/// ranges produce exactly 525 pairs.
pub fn grid_combinations(
    low: (f64, f64),
    high: (f64, f64),
    step_hz: f64,
) -> Result<Vec<CutoffPair>> {
    if !(step_hz > 0.0) {
        return Err(Error::InvalidInput(format!(
            "grid step must be positive, got {step_hz}"
        )));
    }
    let to_d = |hz: f64| (hz * 10.0).round() as i64;
    let step_d = to_d(step_hz).max(1);
    let mut out = Vec::new();
    let mut lo = to_d(low.0);
    while lo <= to_d(low.1) {
        let mut hi = to_d(high.0);
        while hi <= to_d(high.1) {
            if lo < hi {
                out.push(CutoffPair::new(lo as f64 / 10.0, hi as f64 / 10.0));
            }
            hi += step_d;
        }
        lo += step_d;
    }
    Ok(out)
}

/// Deb's fast non-dominated sort: front 0 holds points dominated by none;
/// fronts partition the input.
pub fn non_dominated_sort(points: &[ObjectiveTriple]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if points[i].dominates(&points[j]) {
                dominated_by[i].push(j);
                domination_count[j] += 1;
            } else if points[j].dominates(&points[i]) {
                dominated_by[j].push(i);
                domination_count[i] += 1;
            }
        }
    }
    let mut fronts: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| domination_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                domination_count[j] -= 1;
                if domination_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::take(&mut current));
        current = next;
    }
    fronts
}

/// Crowding distance within one front (boundary points get +inf).
pub fn crowding_distance(points: &[ObjectiveTriple], front: &[usize]) -> Vec<f64> {
    let m = front.len();
    let mut dist = vec![0.0f64; m];
    if m <= 2 {
        return vec![f64::INFINITY; m];
    }
    let objective = |p: &ObjectiveTriple, k: usize| match k {
        0 => p.neg_f1,
        1 => p.mae_ibi_ms,
        _ => p.mae_rmssd_ms,
    };
    for k in 0..3 {
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| {
            objective(&points[front[a]], k)
                .partial_cmp(&objective(&points[front[b]], k))
                .unwrap()
        });
        let lo = objective(&points[front[order[0]]], k);
        let hi = objective(&points[front[order[m - 1]]], k);
        dist[order[0]] = f64::INFINITY;
        dist[order[m - 1]] = f64::INFINITY;
        if hi > lo {
            for w in 1..m - 1 {
                let prev = objective(&points[front[order[w - 1]]], k);
                let next = objective(&points[front[order[w + 1]]], k);
                dist[order[w]] += (next - prev) / (hi - lo);
            }
        }
    }
    dist
}

/// NSGA-II hyperparameters. The seed is mandatory: identical seeds produce
/// identical results.
#[derive(Debug, Clone)]
pub struct Nsga2Config {
    pub population: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    pub sbx_eta: f64,
    /// Mutation probability per variable.
    pub mutation_prob: f64,
    pub mutation_eta: f64,
    pub seed: u64,
}

impl Default for Nsga2Config {
    fn default() -> Self {
        Self {
            population: 40,
            generations: 25,
            crossover_prob: 0.9,
            sbx_eta: 15.0,
            mutation_prob: 0.5,
            mutation_eta: 20.0,
            seed: 0,
        }
    }
}

#[derive(Clone)]
struct Individual {
    genes: [f64; 2],
    obj: ObjectiveTriple,
    rank: usize,
    crowding: f64,
}

fn repair(genes: &mut [f64; 2], bounds: &CutoffBounds) {
    let clamp = |v: f64, (lo, hi): (f64, f64)| v.clamp(lo, hi);
    genes[0] = clamp(genes[0], bounds.f_low);
    genes[1] = clamp(genes[1], bounds.f_high);
    if genes[0] >= genes[1] {
        genes.swap(0, 1);
        genes[0] = clamp(genes[0], bounds.f_low);
        genes[1] = clamp(genes[1], bounds.f_high);
    }
    if genes[0] >= genes[1] {
        // one lattice step below, clamped into range
        genes[0] = clamp(genes[1] - 0.1, bounds.f_low);
    }
    if genes[0] >= genes[1] {
        genes[1] = clamp(genes[0] + 0.1, bounds.f_high);
    }
}

fn sbx_crossover(
    a: &[f64; 2],
    b: &[f64; 2],
    eta: f64,
    rng: &mut SplitMix64,
) -> ([f64; 2], [f64; 2]) {
    let mut c1 = *a;
    let mut c2 = *b;
    for i in 0..2 {
        if (a[i] - b[i]).abs() < 1e-12 {
            continue;
        }
        let u = rng.next_f64();
        let beta = if u <= 0.5 {
            (2.0 * u).powf(1.0 / (eta + 1.0))
        } else {
            (1.0 / (2.0 * (1.0 - u))).powf(1.0 / (eta + 1.0))
        };
        c1[i] = 0.5 * ((1.0 + beta) * a[i] + (1.0 - beta) * b[i]);
        c2[i] = 0.5 * ((1.0 - beta) * a[i] + (1.0 + beta) * b[i]);
    }
    (c1, c2)
}

fn polynomial_mutation(
    genes: &mut [f64; 2],
    bounds: &CutoffBounds,
    prob: f64,
    eta: f64,
    rng: &mut SplitMix64,
) {
    let spans = [
        bounds.f_low.1 - bounds.f_low.0,
        bounds.f_high.1 - bounds.f_high.0,
    ];
    for i in 0..2 {
        if rng.next_f64() >= prob {
            continue;
        }
        let u = rng.next_f64();
        let delta = if u < 0.5 {
            (2.0 * u).powf(1.0 / (eta + 1.0)) - 1.0
        } else {
            1.0 - (2.0 * (1.0 - u)).powf(1.0 / (eta + 1.0))
        };
        genes[i] += delta * spans[i];
    }
}

/// Standard NSGA-II over `(f_low, f_high)`: uniform random initialization
/// (repaired to `f_low < f_high`), binary tournament on (rank, crowding),
/// simulated binary crossover, polynomial mutation, elitist environmental
/// selection. Returns the final front 0 with genes snapped to the 0.1 Hz
/// lattice, deduplicated, sorted by lattice key.
pub fn nsga2<F>(
    mut eval: F,
    bounds: &CutoffBounds,
    cfg: &Nsga2Config,
) -> Result<Vec<(CutoffPair, ObjectiveTriple)>>
where
    F: FnMut(&CutoffPair) -> ObjectiveTriple,
{
    bounds.validate()?;
    if cfg.population < 4 || cfg.population % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "population must be even and >= 4, got {}",
            cfg.population
        )));
    }
    let mut rng = SplitMix64::new(cfg.seed);
    let evaluate = |genes: &[f64; 2], eval: &mut F| -> ObjectiveTriple {
        eval(&CutoffPair::new(genes[0], genes[1]))
    };

    let mut population: Vec<Individual> = (0..cfg.population)
        .map(|_| {
            let mut genes = [
                rng.next_range(bounds.f_low.0, bounds.f_low.1),
                rng.next_range(bounds.f_high.0, bounds.f_high.1),
            ];
            repair(&mut genes, bounds);
            Individual {
                genes,
                obj: ObjectiveTriple::PENALTY,
                rank: 0,
                crowding: 0.0,
            }
        })
        .collect();
    for ind in &mut population {
        ind.obj = evaluate(&ind.genes, &mut eval);
    }
    assign_rank_crowding(&mut population);

    for _ in 0..cfg.generations {
        let mut offspring: Vec<Individual> = Vec::with_capacity(cfg.population);
        while offspring.len() < cfg.population {
            let pa = tournament(&population, &mut rng);
            let pb = tournament(&population, &mut rng);
            let (mut g1, mut g2) = if rng.next_f64() < cfg.crossover_prob {
                sbx_crossover(&population[pa].genes, &population[pb].genes, cfg.sbx_eta, &mut rng)
            } else {
                (population[pa].genes, population[pb].genes)
            };
            for g in [&mut g1, &mut g2] {
                polynomial_mutation(g, bounds, cfg.mutation_prob, cfg.mutation_eta, &mut rng);
                repair(g, bounds);
            }
            for genes in [g1, g2] {
                if offspring.len() < cfg.population {
                    let obj = evaluate(&genes, &mut eval);
                    offspring.push(Individual {
                        genes,
                        obj,
                        rank: 0,
                        crowding: 0.0,
                    });
                }
            }
        }
        population.extend(offspring);
        population = environmental_selection(population, cfg.population);
    }

    let mut front: Vec<(CutoffPair, ObjectiveTriple)> = population
        .iter()
        .filter(|ind| ind.rank == 0)
        .map(|ind| {
            (
                CutoffPair::new(ind.genes[0], ind.genes[1]).snapped(),
                ind.obj,
            )
        })
        .collect();
    front.sort_by_key(|(p, _)| p.lattice_key());
    front.dedup_by_key(|(p, _)| p.lattice_key());
    Ok(front)
}

fn tournament(population: &[Individual], rng: &mut SplitMix64) -> usize {
    let a = rng.next_index(population.len());
    let b = rng.next_index(population.len());
    let better = |x: &Individual, y: &Individual| -> bool {
        x.rank < y.rank || (x.rank == y.rank && x.crowding > y.crowding)
    };
    if better(&population[b], &population[a]) {
        b
    } else {
        a
    }
}

fn assign_rank_crowding(population: &mut [Individual]) {
    let objs: Vec<ObjectiveTriple> = population.iter().map(|i| i.obj).collect();
    let fronts = non_dominated_sort(&objs);
    for (rank, front) in fronts.iter().enumerate() {
        let dist = crowding_distance(&objs, front);
        for (&idx, &d) in front.iter().zip(dist.iter()) {
            population[idx].rank = rank;
            population[idx].crowding = d;
        }
    }
}

fn environmental_selection(mut combined: Vec<Individual>, target: usize) -> Vec<Individual> {
    let objs: Vec<ObjectiveTriple> = combined.iter().map(|i| i.obj).collect();
    let fronts = non_dominated_sort(&objs);
    let mut selected: Vec<Individual> = Vec::with_capacity(target);
    for (rank, front) in fronts.iter().enumerate() {
        let dist = crowding_distance(&objs, front);
        if selected.len() + front.len() <= target {
            for (&idx, &d) in front.iter().zip(dist.iter()) {
                let mut ind = combined[idx].clone();
                ind.rank = rank;
                ind.crowding = d;
                selected.push(ind);
            }
        } else {
            let mut order: Vec<usize> = (0..front.len()).collect();
            // highest crowding first; stable tie-break on front position
            order.sort_by(|&a, &b| dist[b].partial_cmp(&dist[a]).unwrap().then(a.cmp(&b)));
            for &w in order.iter().take(target - selected.len()) {
                let mut ind = combined[front[w]].clone();
                ind.rank = rank;
                ind.crowding = dist[w];
                selected.push(ind);
            }
            break;
        }
    }
    combined.clear();
    selected
}

/// Min-max scalarized pick from a front: each objective is normalized over
/// the front (a constant objective normalizes to 0 for all members) and the
/// combined score `-F1_norm + MAE_IBI_norm + MAE_RMSSD_norm` is minimized.
/// Ties break by lower MAE RMSSD, then lower MAE IBI, then lower f_low.
pub fn select_scalarized(
    front: &[(CutoffPair, ObjectiveTriple)],
) -> Result<(CutoffPair, ObjectiveTriple)> {
    if front.is_empty() {
        return Err(Error::EmptyInput("scalarized selection over empty front"));
    }
    let f1: Vec<f64> = front.iter().map(|(_, o)| o.mean_f1()).collect();
    let ibi: Vec<f64> = front.iter().map(|(_, o)| o.mae_ibi_ms).collect();
    let rmssd: Vec<f64> = front.iter().map(|(_, o)| o.mae_rmssd_ms).collect();
    let norm = |v: &[f64]| -> Vec<f64> {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            v.iter().map(|x| (x - lo) / (hi - lo)).collect()
        } else {
            vec![0.0; v.len()]
        }
    };
    let (f1n, ibin, rmssdn) = (norm(&f1), norm(&ibi), norm(&rmssd));
    let mut best = 0usize;
    let mut best_key = (f64::INFINITY, f64::INFINITY, f64::INFINITY, f64::INFINITY);
    for i in 0..front.len() {
        let score = -f1n[i] + ibin[i] + rmssdn[i];
        let key = (score, rmssd[i], ibi[i], front[i].0.f_low);
        if key < best_key {
            best_key = key;
            best = i;
        }
    }
    Ok(front[best])
}
