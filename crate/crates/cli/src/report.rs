//! Report persistence: CSV tables with a fixed column order, one structured
//! text summary, and minimal static SVG plots. Output is byte-deterministic
//! for a given report.

use std::path::Path;

use pulseband_core::metrics::SegmentMetrics;

use crate::config::RunConfig;
use crate::errors::{CliError, Result};
use crate::io::atomic_write;
use crate::pipeline::{AnovaRow, DistRow, PairwiseRow, RunReport, SCOPE_BASE};

/// Fixed-precision float cell; NaN renders as an empty cell.
fn cell(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:.6}")
    }
}

fn cell_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:.6}"))
}

pub fn write_all(report: &RunReport, config: &RunConfig, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    write_summary_rows(report, &out_dir.join("report_summary.csv"))?;
    write_chosen(report, &out_dir.join("chosen_filters.csv"))?;
    for scope in report.scopes() {
        write_windows(
            &report.windows[&scope],
            &out_dir.join(format!("windows_{scope}.csv")),
        )?;
    }
    write_distributions(report, &out_dir.join("distributions.csv"))?;
    write_anova(report, &out_dir.join("stats_anova.csv"))?;
    write_pairwise(report, &out_dir.join("stats_pairwise.csv"))?;
    if !report.motion.is_empty() {
        write_motion(report, &out_dir.join("motion_correlations.csv"))?;
    }
    if !report.global_front.is_empty() {
        write_front(report, &out_dir.join("front_global.csv"))?;
    }
    write_summary_text(report, config, &out_dir.join("summary.txt"))?;
    write_dist_plot(report, "mean_ibi", &out_dir.join("plots").join("mean_ibi_dist.svg"))?;
    write_dist_plot(report, "rmssd", &out_dir.join("plots").join("rmssd_dist.svg"))?;
    Ok(())
}

/// Optimization-only outputs (the `optimize` subcommand).
pub fn write_optimize_outputs(report: &RunReport, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    write_chosen(report, &out_dir.join("chosen_filters.csv"))?;
    if !report.global_front.is_empty() {
        write_front(report, &out_dir.join("front_global.csv"))?;
    }
    Ok(())
}

/// Statistics-only outputs (the `stats` subcommand).
pub fn write_stats_outputs(
    anova: &[AnovaRow],
    pairwise: &[PairwiseRow],
    out_dir: &Path,
) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let fake = RunReport {
        base_pair: pulseband_core::optimize::CutoffPair::new(0.0, 1.0),
        chosen_global: None,
        global_front: Vec::new(),
        chosen_pt: std::collections::BTreeMap::new(),
        rows: Vec::new(),
        windows: std::collections::BTreeMap::new(),
        distributions: Vec::new(),
        anova: anova.to_vec(),
        pairwise: pairwise.to_vec(),
        motion: Vec::new(),
    };
    write_anova(&fake, &out_dir.join("stats_anova.csv"))?;
    write_pairwise(&fake, &out_dir.join("stats_pairwise.csv"))
}

/// Parse a distributions CSV as produced by the report writer.
pub fn read_distributions_csv(path: &Path) -> Result<Vec<DistRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Validation {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut lines = text.lines();
    match lines.next() {
        Some("task,condition,participant,mean_ibi_ms,rmssd_ms") => {}
        other => {
            return Err(CliError::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: format!("unexpected header {other:?}"),
            })
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(CliError::Parse {
                path: path.to_path_buf(),
                line: i + 2,
                message: format!("expected 5 columns, found {}", fields.len()),
            });
        }
        let num = |s: &str| -> f64 {
            if s.is_empty() {
                f64::NAN
            } else {
                s.parse().unwrap_or(f64::NAN)
            }
        };
        rows.push(DistRow {
            task: fields[0].to_string(),
            condition: fields[1].to_string(),
            participant: fields[2].to_string(),
            mean_ibi_ms: num(fields[3]),
            rmssd_ms: num(fields[4]),
        });
    }
    Ok(rows)
}

fn write_summary_rows(report: &RunReport, path: &Path) -> Result<()> {
    let mut out = String::from(
        "scope,participant,task,f_low_hz,f_high_hz,lag_ms,mean_f1,mae_ibi_ms,mae_rmssd_ms,n_valid_windows,n_windows\n",
    );
    for r in &report.rows {
        out.push_str(&format!(
            "{},{},{},{:.1},{:.1},{},{},{},{},{},{}\n",
            r.scope,
            r.participant,
            r.task,
            r.pair.f_low,
            r.pair.f_high,
            r.lag_ms,
            cell(r.mean_f1),
            cell(r.mae_ibi_ms),
            cell(r.mae_rmssd_ms),
            r.n_valid,
            r.n_windows
        ));
    }
    atomic_write(path, out.as_bytes())
}

fn write_chosen(report: &RunReport, path: &Path) -> Result<()> {
    let mut out = String::from(
        "scope,participant,task,f_low_hz,f_high_hz,mean_f1,mae_ibi_ms,mae_rmssd_ms\n",
    );
    out.push_str(&format!(
        "base,,,{:.1},{:.1},,,\n",
        report.base_pair.f_low, report.base_pair.f_high
    ));
    if let Some((pair, obj)) = &report.chosen_global {
        out.push_str(&format!(
            "global,,,{:.1},{:.1},{},{},{}\n",
            pair.f_low,
            pair.f_high,
            cell(obj.mean_f1()),
            cell(obj.mae_ibi_ms),
            cell(obj.mae_rmssd_ms)
        ));
    }
    for ((participant, task), (pair, obj)) in &report.chosen_pt {
        out.push_str(&format!(
            "per_person_task,{},{},{:.1},{:.1},{},{},{}\n",
            participant,
            task,
            pair.f_low,
            pair.f_high,
            cell(obj.mean_f1()),
            cell(obj.mae_ibi_ms),
            cell(obj.mae_rmssd_ms)
        ));
    }
    atomic_write(path, out.as_bytes())
}

fn write_windows(dump: &[(String, String, SegmentMetrics)], path: &Path) -> Result<()> {
    let mut out = String::from(
        "participant,task,window_start_ms,window_length_ms,n_ecg,n_ppg,n_correct,se,ppv,f1,\
         mean_ibi_ms,rmssd_ms,ref_mean_ibi_ms,ref_rmssd_ms,abs_err_ibi_ms,abs_err_rmssd_ms,\
         motion_auc,valid\n",
    );
    for (participant, task, m) in dump {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            participant,
            task,
            m.window.start_ms,
            m.window.length_ms,
            m.n_ecg,
            m.n_ppg,
            m.n_correct,
            cell(m.se),
            cell(m.ppv),
            cell(m.f1),
            cell(m.mean_ibi_ms),
            cell(m.rmssd_ms),
            cell(m.ref_mean_ibi_ms),
            cell(m.ref_rmssd_ms),
            cell(m.abs_err_ibi_ms),
            cell(m.abs_err_rmssd_ms),
            cell_opt(m.motion_auc),
            m.valid
        ));
    }
    atomic_write(path, out.as_bytes())
}

fn write_distributions(report: &RunReport, path: &Path) -> Result<()> {
    let mut out = String::from("task,condition,participant,mean_ibi_ms,rmssd_ms\n");
    for d in &report.distributions {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            d.task,
            d.condition,
            d.participant,
            cell(d.mean_ibi_ms),
            cell(d.rmssd_ms)
        ));
    }
    atomic_write(path, out.as_bytes())
}

fn write_anova(report: &RunReport, path: &Path) -> Result<()> {
    let mut out =
        String::from("task,metric,conditions,n_subjects,f_stat,df_treatment,df_error,p_value\n");
    for a in &report.anova {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            a.task,
            a.metric,
            a.conditions.join("|"),
            a.n_subjects,
            cell(a.f_stat),
            a.df_treatment,
            a.df_error,
            cell(a.p_value)
        ));
    }
    atomic_write(path, out.as_bytes())
}

fn write_pairwise(report: &RunReport, path: &Path) -> Result<()> {
    let mut out = String::from(
        "task,metric,condition_a,condition_b,n_subjects,t_stat,p_raw,p_bonferroni,cohens_d\n",
    );
    for p in &report.pairwise {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            p.task,
            p.metric,
            p.cond_a,
            p.cond_b,
            p.n_subjects,
            cell(p.t_stat),
            cell(p.p_raw),
            cell(p.p_bonferroni),
            cell(p.cohens_d)
        ));
    }
    atomic_write(path, out.as_bytes())
}

fn write_motion(report: &RunReport, path: &Path) -> Result<()> {
    let mut out = String::from("task,n_windows,r_f1,r_abs_err_ibi,r_abs_err_rmssd\n");
    for m in &report.motion {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            m.task,
            m.n_windows,
            cell(m.r_f1),
            cell(m.r_abs_err_ibi),
            cell(m.r_abs_err_rmssd)
        ));
    }
    atomic_write(path, out.as_bytes())
}

fn write_front(report: &RunReport, path: &Path) -> Result<()> {
    let mut out = String::from("f_low_hz,f_high_hz,mean_f1,mae_ibi_ms,mae_rmssd_ms\n");
    for (pair, obj) in &report.global_front {
        out.push_str(&format!(
            "{:.1},{:.1},{},{},{}\n",
            pair.f_low,
            pair.f_high,
            cell(obj.mean_f1()),
            cell(obj.mae_ibi_ms),
            cell(obj.mae_rmssd_ms)
        ));
    }
    atomic_write(path, out.as_bytes())
}

fn write_summary_text(report: &RunReport, config: &RunConfig, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("band-pass cutoff optimization report\n");
    out.push_str("====================================\n\n");
    out.push_str(&format!("seed: {}\n", config.seed));
    out.push_str(&format!("window: {} ms\n", config.window_ms));
    out.push_str(&format!(
        "base filter: {:.1}-{:.1} Hz (Chebyshev-II order {}, {} dB)\n",
        report.base_pair.f_low,
        report.base_pair.f_high,
        config.filter.ppg_order,
        config.filter.ppg_stopband_atten_db
    ));
    if let Some((pair, obj)) = &report.chosen_global {
        out.push_str(&format!(
            "global filter: {:.1}-{:.1} Hz (mean F1 {:.2}, MAE IBI {:.2} ms, MAE RMSSD {:.2} ms)\n",
            pair.f_low,
            pair.f_high,
            obj.mean_f1(),
            obj.mae_ibi_ms,
            obj.mae_rmssd_ms
        ));
    }
    out.push('\n');

    for scope in report.scopes() {
        let rows: Vec<_> = report.rows.iter().filter(|r| r.scope == scope).collect();
        if rows.is_empty() {
            continue;
        }
        let n = rows.len() as f64;
        let mean =
            |get: &dyn Fn(&&crate::pipeline::ScopeRow) -> f64| -> f64 {
                rows.iter().map(get).sum::<f64>() / n
            };
        out.push_str(&format!(
            "{scope}: mean F1 {:.2}, MAE IBI {:.2} ms, MAE RMSSD {:.2} ms over {} recording(s)\n",
            mean(&|r| r.mean_f1),
            mean(&|r| if r.mae_ibi_ms.is_nan() { 0.0 } else { r.mae_ibi_ms }),
            mean(&|r| if r.mae_rmssd_ms.is_nan() { 0.0 } else { r.mae_rmssd_ms }),
            rows.len()
        ));
    }
    out.push('\n');

    if !report.chosen_pt.is_empty() {
        out.push_str("per-person-task filters:\n");
        for ((participant, task), (pair, _)) in &report.chosen_pt {
            out.push_str(&format!(
                "  {participant}/{task}: {:.1}-{:.1} Hz\n",
                pair.f_low, pair.f_high
            ));
        }
        out.push('\n');
    }

    if !report.anova.is_empty() {
        out.push_str(&format!(
            "repeated-measures ANOVA across conditions (alpha = {}):\n",
            config.stats.alpha
        ));
        for a in &report.anova {
            let flag = if a.p_value < config.stats.alpha {
                " *"
            } else {
                ""
            };
            out.push_str(&format!(
                "  {} / {}: F({}, {}) = {:.4}, p = {:.4}{}\n",
                a.task, a.metric, a.df_treatment, a.df_error, a.f_stat, a.p_value, flag
            ));
        }
        out.push('\n');
        out.push_str("pairwise comparisons (Bonferroni-corrected):\n");
        for p in &report.pairwise {
            let flag = if p.p_bonferroni < config.stats.alpha {
                " *"
            } else {
                ""
            };
            out.push_str(&format!(
                "  {} / {}: {} vs {}: t = {:.4}, p = {:.4}, d = {:.4}{}\n",
                p.task, p.metric, p.cond_a, p.cond_b, p.t_stat, p.p_bonferroni, p.cohens_d, flag
            ));
        }
    }
    atomic_write(path, out.as_bytes())
}

/// Minimal static box plot of the per-participant distributions, one group
/// per (task, condition).
fn write_dist_plot(report: &RunReport, metric: &str, path: &Path) -> Result<()> {
    let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
    let mut tasks: Vec<String> = report.distributions.iter().map(|d| d.task.clone()).collect();
    tasks.sort();
    tasks.dedup();
    let conditions = ["ecg", SCOPE_BASE, "global", "per_person_task"];
    for task in &tasks {
        for cond in conditions {
            let values: Vec<f64> = report
                .distributions
                .iter()
                .filter(|d| &d.task == task && d.condition == cond)
                .map(|d| match metric {
                    "mean_ibi" => d.mean_ibi_ms,
                    _ => d.rmssd_ms,
                })
                .filter(|v| v.is_finite())
                .collect();
            if !values.is_empty() {
                groups.push((format!("{task}/{cond}"), values));
            }
        }
    }
    if groups.is_empty() {
        return Ok(());
    }
    atomic_write(path, box_plot_svg(metric, &groups).as_bytes())
}

fn quartiles(sorted: &[f64]) -> (f64, f64, f64) {
    let q = |frac: f64| -> f64 {
        let pos = frac * (sorted.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let t = pos - lo as f64;
        sorted[lo] * (1.0 - t) + sorted[hi] * t
    };
    (q(0.25), q(0.5), q(0.75))
}

fn box_plot_svg(title: &str, groups: &[(String, Vec<f64>)]) -> String {
    let width = 120 + groups.len() * 70;
    let height = 360;
    let (plot_x0, plot_y0, plot_y1) = (70.0, 30.0, 280.0);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (_, values) in groups {
        for &v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !(hi > lo) {
        hi = lo + 1.0;
    }
    let pad = 0.06 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let y = |v: f64| plot_y1 - (v - lo) / (hi - lo) * (plot_y1 - plot_y0);

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         font-family=\"sans-serif\" font-size=\"11\">\n"
    );
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"18\" font-size=\"13\">{title} per participant</text>\n",
        plot_x0
    ));
    // y axis with 5 ticks
    svg.push_str(&format!(
        "<line x1=\"{plot_x0}\" y1=\"{plot_y0}\" x2=\"{plot_x0}\" y2=\"{plot_y1}\" stroke=\"black\"/>\n"
    ));
    for i in 0..=4 {
        let v = lo + (hi - lo) * i as f64 / 4.0;
        let yy = y(v);
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{yy:.1}\" x2=\"{plot_x0}\" y2=\"{yy:.1}\" stroke=\"black\"/>\n",
            plot_x0 - 4.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\">{v:.1}</text>\n",
            plot_x0 - 8.0,
            yy + 4.0
        ));
    }
    for (g, (label, values)) in groups.iter().enumerate() {
        let cx = plot_x0 + 45.0 + g as f64 * 70.0;
        let mut sorted = values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (q1, med, q3) = quartiles(&sorted);
        let (w_lo, w_hi) = (sorted[0], sorted[sorted.len() - 1]);
        let half = 18.0;
        svg.push_str(&format!(
            "<line x1=\"{cx}\" y1=\"{:.1}\" x2=\"{cx}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
            y(w_lo),
            y(w_hi)
        ));
        svg.push_str(&format!(
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"#9ecae1\" stroke=\"black\"/>\n",
            cx - half,
            y(q3),
            2.0 * half,
            (y(q1) - y(q3)).max(0.5)
        ));
        svg.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\" stroke-width=\"2\"/>\n",
            cx - half,
            y(med),
            cx + half,
            y(med)
        ));
        svg.push_str(&format!(
            "<text x=\"{cx:.1}\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(35 {cx:.1} {})\">{label}</text>\n",
            plot_y1 + 16.0,
            plot_y1 + 16.0
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// F1-vs-low-cut line plot (one polyline per high-cut series) for sweep
/// output.
pub fn sweep_line_svg(series: &[(f64, Vec<(f64, f64)>)]) -> String {
    let (width, height) = (560, 360);
    let (x0, y0, x1, y1) = (60.0, 30.0, 520.0, 300.0);
    let mut f1_lo = f64::INFINITY;
    let mut f1_hi = f64::NEG_INFINITY;
    let mut lo_min = f64::INFINITY;
    let mut lo_max = f64::NEG_INFINITY;
    for (_, pts) in series {
        for &(x, v) in pts {
            f1_lo = f1_lo.min(v);
            f1_hi = f1_hi.max(v);
            lo_min = lo_min.min(x);
            lo_max = lo_max.max(x);
        }
    }
    if !(f1_hi > f1_lo) {
        f1_hi = f1_lo + 1.0;
    }
    if !(lo_max > lo_min) {
        lo_max = lo_min + 1.0;
    }
    let sx = |v: f64| x0 + (v - lo_min) / (lo_max - lo_min) * (x1 - x0);
    let sy = |v: f64| y1 - (v - f1_lo) / (f1_hi - f1_lo) * (y1 - y0);
    let palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"];
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         font-family=\"sans-serif\" font-size=\"11\">\n\
         <text x=\"60\" y=\"18\" font-size=\"13\">mean F1 vs low-cut frequency</text>\n\
         <line x1=\"{x0}\" y1=\"{y1}\" x2=\"{x1}\" y2=\"{y1}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
    );
    for i in 0..=4 {
        let v = f1_lo + (f1_hi - f1_lo) * i as f64 / 4.0;
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\">{v:.1}</text>\n",
            x0 - 6.0,
            sy(v) + 4.0
        ));
        let v = lo_min + (lo_max - lo_min) * i as f64 / 4.0;
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{}\" text-anchor=\"middle\">{v:.1}</text>\n",
            sx(v),
            y1 + 16.0
        ));
    }
    for (s, (high, pts)) in series.iter().enumerate() {
        let color = palette[s % palette.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, v)| format!("{:.1},{:.1}", sx(x), sy(v)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" points=\"{}\"/>\n",
            path.join(" ")
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" fill=\"{color}\">f_high = {high:.1} Hz</text>\n",
            x1 - 110.0,
            y0 + 14.0 * (s as f64 + 1.0)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
