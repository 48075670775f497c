use std::path::Path;
use std::process::{Command, Output};

use tcm_cli::checkpoint;
use tcm_cli::config::RunConfig;
use tcm_cli::output::COLUMNS;

fn tcm(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tcm")).args(args).current_dir(cwd).output().expect("tcm binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    std::fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

fn small(out: &str, extra: &str) -> String {
    small_until(out, 0.05, extra)
}

fn small_until(out: &str, t_end: f64, extra: &str) -> String {
    format!(
        "grid.n1 = 8\ngrid.n2 = 8\ngrid.n3 = 8\nstep.dt = 0.01\nstep.t_end = {t_end}\nout.cadence = 1\n\
         ic.kind = random_band\nic.max_mode = 2\nic.seed = 3\nout.dir = {out}\n{extra}"
    )
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let j = COLUMNS.iter().position(|c| *c == name).unwrap();
    csv.lines().skip(1).map(|l| l.split(',').nth(j).unwrap().parse().unwrap()).collect()
}

#[test]
fn zero_end_time_writes_only_the_initial_row() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.txt", &small_until("o", 0.0, ""));
    let out = tcm(&["run", &cfg], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(tmp.path().join("o/diagnostics.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], COLUMNS.join(","));
    assert_eq!(column(&csv, "time"), vec![0.0]);
    assert_eq!(column(&csv, "D_cum"), vec![0.0]);
}

#[test]
fn identical_runs_write_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let extra = "out.checkpoint_every = 2\ndiag.cancellations = true\n";
    let a = write(tmp.path(), "a.txt", &small("a", extra));
    let b = write(tmp.path(), "b.txt", &small("b", extra));
    assert!(tcm(&["run", &a, "--emit-plot-data"], tmp.path()).status.success());
    assert!(tcm(&["run", &b, "--emit-plot-data"], tmp.path()).status.success());
    for f in ["diagnostics.csv", "checkpoint_00000004.bin", "final.bin", "plot/E.dat", "summary.txt"] {
        let x = std::fs::read(tmp.path().join("a").join(f)).unwrap();
        let y = std::fs::read(tmp.path().join("b").join(f)).unwrap();
        assert!(x == y, "{f} differs");
    }
}

#[test]
fn manifest_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.txt", &small("o", "model.alpha = 1.75\nmodel.switches.damping = false\n"));
    assert!(tcm(&["run", &cfg], tmp.path()).status.success());
    let manifest = std::fs::read_to_string(tmp.path().join("o/manifest.txt")).unwrap();
    let parsed = RunConfig::parse(&manifest).unwrap();
    let original = RunConfig::load(&tmp.path().join("c.txt")).unwrap();
    assert_eq!(parsed.to_manifest(), manifest);
    assert_eq!(parsed.model.alpha, 1.75);
    assert!(!parsed.model.switches.damping);
    assert_eq!(parsed.to_manifest(), original.to_manifest());
}

#[test]
fn restart_from_checkpoint_continues_the_clock() {
    let tmp = tempfile::tempdir().unwrap();
    let first = write(tmp.path(), "a.txt", &small("a", "out.checkpoint_every = 5\n"));
    assert!(tcm(&["run", &first], tmp.path()).status.success());
    let c = checkpoint::load(&tmp.path().join("a/final.bin")).unwrap();
    assert!((c.state.time - 0.05).abs() < 1e-12);
    let restart = format!(
        "grid.n1 = 8\ngrid.n2 = 8\ngrid.n3 = 8\nstep.dt = 0.01\nstep.t_end = 0.08\nout.cadence = 1\n\
         ic.kind = checkpoint\nic.checkpoint = a/final.bin\nout.dir = b\n"
    );
    let second = write(tmp.path(), "b.txt", &restart);
    let out = tcm(&["run", &second], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(tmp.path().join("b/diagnostics.csv")).unwrap();
    let t = column(&csv, "time");
    assert!((t[0] - 0.05).abs() < 1e-12 && (t.last().unwrap() - 0.08).abs() < 1e-12, "{t:?}");
}

#[test]
fn blowup_exits_with_its_own_code_and_keeps_history() {
    let tmp = tempfile::tempdir().unwrap();
    let inviscid = "ic.amplitude = 5\nmodel.switches.horizontal_viscosity = false\n\
                    model.switches.fractional_dissipation = false\nmodel.switches.thermal_diffusion = false\n\
                    model.switches.damping = false\n";
    let free = write(tmp.path(), "free.txt", &small_until("free", 0.2, inviscid));
    assert!(tcm(&["run", &free], tmp.path()).status.success());
    let csv = std::fs::read_to_string(tmp.path().join("free/diagnostics.csv")).unwrap();
    let grad: Vec<f64> = column(&csv, "grad_u").iter().map(|g| g.sqrt()).collect();
    assert!(grad[4] > grad[3] && grad[3] > grad[0], "{grad:?}");
    // first crossing lands on step 4
    let threshold = 0.5 * (grad[3] + grad[4]);

    let extra = format!("{inviscid}step.blowup_threshold = {threshold:e}\n");
    let cfg = write(tmp.path(), "c.txt", &small_until("o", 0.2, &extra));
    let out = tcm(&["run", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = std::fs::read_to_string(tmp.path().join("o/summary.txt")).unwrap();
    assert!(summary.contains("blow-up at t = 4e-2"), "{summary}");
    let csv = std::fs::read_to_string(tmp.path().join("o/diagnostics.csv")).unwrap();
    assert_eq!(column(&csv, "time"), vec![0.0, 0.01, 0.02, 0.03, 0.04]);
    let truncated: Vec<f64> = column(&csv, "grad_u").iter().map(|g| g.sqrt()).collect();
    assert_eq!(truncated, grad[..5]);
}

#[test]
fn config_errors_name_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.txt", "grid.n1 = 8\n# comment\nmodel.alpha = 0.5\n");
    let out = tcm(&["run", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");

    let cfg = write(tmp.path(), "d.txt", "grid.n1 = 8\nmodel.colour = red\n");
    let out = tcm(&["run", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn tampered_tolerance_fails_that_criterion() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tcm(&["verify", "--level", "fast", "--tamper", "5"], tmp.path());
    assert_eq!(out.status.code(), Some(4));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let fails: Vec<&str> = stdout.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert_eq!(fails.len(), 1, "{stdout}");
    assert!(fails[0].contains("Leray"), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 9, "{stdout}");
}

#[test]
fn sweep_covers_every_cell_in_order() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write(tmp.path(), "s.txt", &small("sw", "sweep.alpha = 1.5, 1.75\nsweep.beta = 4, 5\nsweep.workers = 2\n"));
    let out = tcm(&["sweep", &spec], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(tmp.path().join("sw/sweep_summary.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    let cells: Vec<(f64, f64)> = rows.iter().map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap())).collect();
    assert_eq!(cells, vec![(1.5, 4.0), (1.5, 5.0), (1.75, 4.0), (1.75, 5.0)]);
    assert!(rows.iter().all(|r| r[2] == "bounded"), "{csv}");
    assert!(tmp.path().join("sw/alpha_1.75_beta_5/diagnostics.csv").exists());
}

#[test]
fn single_cell_sweep_matches_a_plain_run() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write(tmp.path(), "s.txt", &small("sw", "sweep.alpha = 1.5\nsweep.beta = 4\n"));
    let run = write(tmp.path(), "r.txt", &small("r", ""));
    assert!(tcm(&["sweep", &spec], tmp.path()).status.success());
    let out = tcm(&["run", &run], tmp.path());
    assert!(out.status.success());
    let summary = String::from_utf8_lossy(&out.stdout);
    let csv = std::fs::read_to_string(tmp.path().join("sw/sweep_summary.csv")).unwrap();
    let verdict = csv.lines().nth(1).unwrap().split(',').nth(2).unwrap();
    assert!(summary.contains(&format!("verdict: {verdict}")), "{summary}");
    let a = std::fs::read(tmp.path().join("sw/alpha_1.5_beta_4/diagnostics.csv")).unwrap();
    let b = std::fs::read(tmp.path().join("r/diagnostics.csv")).unwrap();
    assert!(a == b);
}

#[test]
fn bench_writes_samples_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["bench", "vertical-sup", "--n", "8", "--samples", "12", "--max-mode", "2", "--out", "b"];
    let out = tcm(&args, tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(tmp.path().join("b/bench_vertical-sup.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("seed,ratio"));
    assert_eq!(csv.lines().count(), 13);
    assert!(tmp.path().join("b/bench_vertical-sup.txt").exists());

    let out = tcm(&["bench", "no-such-bench", "--n", "8"], tmp.path());
    assert!(!out.status.success());
}
