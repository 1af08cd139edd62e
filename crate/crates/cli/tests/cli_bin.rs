//! Smoke tests of the actual binary: subcommand wiring and exit codes.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pulseband"))
}

fn run_ok(args: &[&str], cwd: &Path) -> String {
    let out = bin().args(args).current_dir(cwd).output().unwrap();
    assert!(
        out.status.success(),
        "command {args:?} failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn full_command_flow() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    std::fs::write(
        root.join("fast.toml"),
        "seed = 5\nscopes = [\"global\", \"per_person_task\"]\n\n[nsga2]\npopulation = 8\ngenerations = 4\n",
    )
    .unwrap();

    // synth with exact beat references
    run_ok(
        &[
            "--out-dir", "data", "--seed", "5",
            "synth", "--participants", "2", "--tasks", "rest",
            "--duration-s", "70", "--reference", "beats",
        ],
        root,
    );
    assert!(root.join("data/manifest.toml").exists());
    assert!(root.join("data/p01_rest_ppg.csv").exists());
    assert!(root.join("data/p01_rest_beats.csv").exists());

    // ingest prints a summary row per recording
    let out = run_ok(&["ingest", "--manifest", "data/manifest.toml"], root);
    assert!(out.contains("ok: 2 recording(s)"), "{out}");

    // detect beats in the synthetic PPG
    run_ok(
        &[
            "detect", "--input", "data/p01_rest_ppg.csv", "--fs", "64",
            "--role", "ppg", "--output", "detected.csv",
        ],
        root,
    );
    let detected = std::fs::read_to_string(root.join("detected.csv")).unwrap();
    assert!(detected.lines().count() > 50, "expected a beat per second");

    // match detected beats against the reference
    let out = run_ok(
        &[
            "match", "--ppg-beats", "detected.csv",
            "--ecg-beats", "data/p01_rest_beats.csv",
        ],
        root,
    );
    assert!(out.contains("f1="), "{out}");

    // filter a signal file
    run_ok(
        &[
            "filter", "--input", "data/p01_rest_ppg.csv", "--fs", "64",
            "--low", "0.5", "--high", "4.0", "--output", "filtered.csv",
        ],
        root,
    );
    assert!(root.join("filtered.csv").exists());

    // sweep one slice (grid over the whole lattice, cached)
    run_ok(
        &[
            "--out-dir", "sweep_out", "--config", "fast.toml", "--jobs", "2",
            "sweep", "--manifest", "data/manifest.toml",
            "--participant", "p01", "--task", "rest",
        ],
        root,
    );
    let grid = std::fs::read_to_string(root.join("sweep_out/sweep_grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 526, "header + 525 grid rows");
    assert!(root.join("sweep_out/sweep_f1_vs_flow.svg").exists());

    // full report
    run_ok(
        &[
            "--out-dir", "report_out", "--config", "fast.toml",
            "report", "--manifest", "data/manifest.toml",
        ],
        root,
    );
    for file in [
        "report_summary.csv",
        "chosen_filters.csv",
        "distributions.csv",
        "stats_anova.csv",
        "stats_pairwise.csv",
        "summary.txt",
        "windows_base.csv",
        "windows_global.csv",
        "windows_per_person_task.csv",
        "plots/mean_ibi_dist.svg",
        "plots/rmssd_dist.svg",
    ] {
        assert!(
            root.join("report_out").join(file).exists(),
            "missing {file}"
        );
    }

    // stats recomputation from the emitted distributions
    run_ok(
        &[
            "--out-dir", "stats_out",
            "stats", "--distributions", "report_out/distributions.csv",
        ],
        root,
    );
    assert!(root.join("stats_out/stats_anova.csv").exists());
}

#[test]
fn validation_failures_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();

    // missing manifest
    let out = bin()
        .args(["ingest", "--manifest", "nope.toml"])
        .current_dir(root)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{:?}", out);

    // malformed beats file
    std::fs::write(root.join("bad.csv"), "time_ms\n100\n50\n").unwrap();
    std::fs::write(root.join("ok.csv"), "time_ms\n100\n500\n").unwrap();
    let out = bin()
        .args(["match", "--ppg-beats", "bad.csv", "--ecg-beats", "ok.csv"])
        .current_dir(root)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{:?}", out);

    // invalid band on the filter command
    std::fs::write(root.join("sig.csv"), "time_ms,value\n0,1.0\n15.625,2.0\n").unwrap();
    let out = bin()
        .args([
            "filter", "--input", "sig.csv", "--fs", "64", "--low", "4.0",
            "--high", "0.5", "--output", "x.csv",
        ])
        .current_dir(root)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{:?}", out);
}
