use std::path::{Path, PathBuf};
use std::process::Command;

use nsch_core::coupled;
use nsch_sim::config::Config;
use nsch_sim::output::{self, Checkpoint};
use nsch_sim::run;

const SMALL: &str = "\
[grid]
nx = 16
ny = 16

[fluids]
nu1 = 0.05
nu2 = 0.02
eps0 = 1.0

[rho]
profile = blob
inside = 2.0
outside = 1.0
radius = 0.25
width = 0.08

[phi]
profile = tanh
axis = y
width = 0.1

[velocity]
profile = taylor-green
grad_norm = 0.5

[scheme]
dt = 0.0009765625
t_end = 0.009765625
seed = 7

[output]
series_every = 1
snapshot_every = 5
";

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("case.ini");
    std::fs::write(&path, text).unwrap();
    path
}

fn nsch(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_nsch")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn run_case(config: &Path, out: &Path, extra: &[&str]) -> (i32, String, String) {
    let mut args = vec!["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    nsch(&args)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_series_snapshots_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    let (code, stdout, stderr) = run_case(&cfg, &out, &[]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.lines().any(|l| l.starts_with("initial: ")));
    let summary = stdout.lines().find(|l| l.starts_with("summary: ")).unwrap();
    assert!(summary.contains("steps=10 "), "{summary}");

    let rows = output::read_series(&out.join(output::SERIES_FILE)).unwrap();
    assert_eq!(rows.len(), 11);
    assert_eq!(rows[0].t, 0.0);
    assert_eq!(rows[10].t, 0.009765625);
    for step in [0, 5, 10] {
        let text = std::fs::read_to_string(out.join(output::snapshot_name(step))).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(output::SNAPSHOT_HEADER));
        assert_eq!(lines.count(), 16 * 16);
    }
    assert!(!out.join(output::snapshot_name(3)).exists());
    let info = output::read_run_info(&out.join(output::RUN_INFO_FILE)).unwrap();
    assert_eq!(info["nx"], "16");
    assert_eq!(info["nu_star"].parse::<f64>().unwrap(), 0.02);
}

#[test]
fn zero_end_time_writes_initial_snapshot_only() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    let (code, stdout, stderr) = run_case(&cfg, &out, &["--t-end", "0"]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("steps=0 "));
    assert_eq!(output::read_series(&out.join(output::SERIES_FILE)).unwrap().len(), 1);
    let snaps: Vec<_> = std::fs::read_dir(&out)
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().into_string().unwrap())
        .filter(|n| n.starts_with("snap_"))
        .collect();
    assert_eq!(snaps, vec!["snap_0.csv".to_string()]);
}

#[test]
fn runs_are_bitwise_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SMALL.replace("profile = tanh\naxis = y\nwidth = 0.1", "profile = random\namplitude = 0.3\nmodes = 3");
    let cfg = write_config(tmp.path(), &text);
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    assert_eq!(run_case(&cfg, &a, &[]).0, 0);
    assert_eq!(run_case(&cfg, &b, &[]).0, 0);
    assert_eq!(run_case(&cfg, &c, &["--seed", "8"]).0, 0);
    let read = |d: &Path, f: &str| std::fs::read(d.join(f)).unwrap();
    for f in [output::SERIES_FILE, "snap_10.csv"] {
        assert_eq!(read(&a, f), read(&b, f), "{f}");
    }
    assert_ne!(read(&a, output::SERIES_FILE), read(&c, output::SERIES_FILE));
}

#[test]
fn checkpoint_resume_matches_continuous_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let (short, long) = (tmp.path().join("short"), tmp.path().join("long"));
    assert_eq!(run_case(&cfg, &short, &[]).0, 0);
    assert_eq!(run_case(&cfg, &long, &["--t-end", "0.01171875"]).0, 0);

    let ck = Checkpoint::load(&short.join(output::CHECKPOINT_FILE)).unwrap();
    assert_eq!(ck.step, 10);
    let state = ck.restore().unwrap();
    let config = Config::load(&cfg).unwrap();
    let params = run::step_params(&config).unwrap();
    let resumed = coupled::step(&state, ck.serrin_acc, 0.0009765625, &params).unwrap().record;
    let continuous = output::read_series(&long.join(output::SERIES_FILE)).unwrap()[11];
    for (a, b) in resumed.to_array().iter().zip(continuous.to_array()) {
        assert!((a - b).abs() <= 1e-15 * b.abs().max(1.0), "{a} vs {b}");
    }
}

#[test]
fn configuration_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(tmp.path(), &SMALL.replace("nx = 16", "nx = 2"));
    let (code, _, stderr) = run_case(&cfg, &out, &[]);
    assert_eq!(code, 1);
    assert!(stderr.contains("grid.nx"), "{stderr}");

    let cfg = write_config(tmp.path(), &SMALL.replace("[output]", "[output]\ncolour = red"));
    let (code, _, stderr) = run_case(&cfg, &out, &[]);
    assert_eq!(code, 1);
    assert!(stderr.contains("output.colour"), "{stderr}");

    let (code, _, _) = run_case(&tmp.path().join("missing.ini"), &out, &[]);
    assert_eq!(code, 1);
    assert_eq!(nsch(&["run"]).0, 1);
    assert_eq!(nsch(&["--help"]).0, 0);
}

#[test]
fn unwritable_output_fails_before_stepping() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &SMALL.replace("t_end = 0.009765625", "t_end = 1000.0"));
    let blocker = tmp.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let start = std::time::Instant::now();
    let (code, stdout, stderr) = run_case(&cfg, &blocker.join("out"), &[]);
    assert_eq!(code, 1, "{stderr}");
    assert!(stdout.is_empty());
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn diag_recomputes_the_accumulator() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    assert_eq!(run_case(&cfg, &out, &[]).0, 0);
    let series = out.join(output::SERIES_FILE);
    let (code, stdout, _) = nsch(&["diag", "--series", s(&series), "--r", "12"]);
    assert_eq!(code, 0);
    let line = stdout.lines().find(|l| l.starts_with("serrin: ")).unwrap();
    assert!(line.contains("exponent=8 ") && line.ends_with("verdict=pass"), "{line}");
    let stored = output::read_series(&series).unwrap()[10].serrin_acc;
    let field = |k: &str| -> f64 {
        line.split_whitespace().find_map(|w| w.strip_prefix(k)).unwrap().parse().unwrap()
    };
    assert_eq!(field("stored="), stored);
    assert!((field("recomputed=") - stored).abs() <= 1e-12 * stored);

    // the series holds r = 12 norms
    assert_eq!(nsch(&["diag", "--series", s(&series), "--r", "8"]).0, 1);

    let mut rows = output::read_series(&series).unwrap();
    rows[4].serrin_acc = rows[3].serrin_acc * 0.5;
    let bad = tmp.path().join("bad").join(output::SERIES_FILE);
    std::fs::create_dir_all(bad.parent().unwrap()).unwrap();
    let mut w = output::SeriesWriter::create(&bad).unwrap();
    rows.iter().for_each(|r| w.write(r).unwrap());
    drop(w);
    let (code, stdout, _) = nsch(&["diag", "--series", s(&bad), "--r", "12"]);
    assert_eq!(code, 3);
    assert!(stdout.contains("verdict=fail"));
    assert_eq!(nsch(&["diag", "--series", s(&bad), "--r", "6"]).0, 1);
}

#[test]
fn check_decay_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    assert_eq!(run_case(&cfg, &out, &[]).0, 0);
    let series = out.join(output::SERIES_FILE);
    let info = output::read_run_info(&out.join(output::RUN_INFO_FILE)).unwrap();
    let (code, stdout, stderr) = nsch(&["check-decay", "--series", s(&series), "--eps0", &info["smallness"], "--c0", "1"]);
    assert_eq!(code, 0, "{stdout}{stderr}");
    assert!(stdout.lines().any(|l| l.starts_with("decay: ") && l.ends_with("verdict=pass")));
    assert!(stdout.lines().any(|l| l.starts_with("half-energy: ")));

    // growing energy violates any envelope
    let mut rows = output::read_series(&series).unwrap();
    for (k, r) in rows.iter_mut().enumerate() {
        r.energy = 1.0 + k as f64;
    }
    let lone = tmp.path().join("lone.csv");
    let mut w = output::SeriesWriter::create(&lone).unwrap();
    rows.iter().for_each(|r| w.write(r).unwrap());
    drop(w);
    let (code, stdout, _) = nsch(&["check-decay", "--series", s(&lone), "--eps0", "1", "--c0", "1", "--nu-star", "0.02"]);
    assert_eq!(code, 3);
    assert!(stdout.contains("verdict=fail"));
    // no run_info.ini next to it and no --nu-star
    assert_eq!(nsch(&["check-decay", "--series", s(&lone), "--eps0", "1", "--c0", "1"]).0, 1);
    assert_eq!(nsch(&["check-decay", "--series", s(&tmp.path().join("none.csv")), "--eps0", "1", "--c0", "1"]).0, 1);
}
