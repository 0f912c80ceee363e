mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::pulse_train;

fn bin(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bradyset"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = bin(args, dir);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn synth_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["synth", "--seed", "7", "--n", "500", "--out", "a.csv", "--labels", "la.csv"], d);
    ok(&["synth", "--seed", "7", "--n", "500", "--out", "b.csv", "--labels", "lb.csv"], d);
    assert_eq!(fs::read(d.join("a.csv")).unwrap(), fs::read(d.join("b.csv")).unwrap());
    assert_eq!(fs::read(d.join("la.csv")).unwrap(), fs::read(d.join("lb.csv")).unwrap());
    let labels = read(d, "la.csv");
    assert_eq!(labels.lines().filter(|l| *l == "1").count(), 25);
    assert_eq!(read(d, "a.csv").lines().count(), 501);
}

#[test]
fn evaluate_writes_one_row_per_trial() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["synth", "--seed", "3", "--out", "p.csv", "--labels", "l.csv"], d);
    let stdout = ok(
        &[
            "evaluate", "--peaks", "p.csv", "--labels", "l.csv", "--out-dir", "rep", "--splits", "0.7,0.2,0.1",
            "--trials", "20", "--kernel", "epanechnikov", "--grid-size", "48",
        ],
        d,
    );
    assert!(stdout.contains("mean_epe="));
    let trials = read(d, "rep/trials_0.7_0.2_0.1.csv");
    let mut lines = trials.lines();
    assert_eq!(lines.next().unwrap(), "trial,seed,h,c_k,tp,fp,fn,tn,epe");
    assert_eq!(lines.count(), 20);
    let summary = read(d, "rep/summary.csv");
    assert_eq!(summary.lines().count(), 2);
    assert!(summary.starts_with("split,trials,mean_epe,"));
}

#[test]
fn degenerate_inputs_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("one.csv"), "event_id,t_sample,amplitude\n0,100,1.5\n").unwrap();
    for extra in [&[][..], &["--no-normalize"][..]] {
        let mut args = vec!["select-bandwidth", "--peaks", "one.csv"];
        args.extend_from_slice(extra);
        let out = bin(&args, d);
        assert!(!out.status.success());
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.trim_end().lines().count(), 1, "{err}");
        assert!(err.starts_with("error: "));
    }
    assert!(!bin(&["frobnicate"], d).status.success());
    assert!(!bin(&["synth", "--bogus"], d).status.success());

    fs::write(d.join("bad.conf"), "kernel = cosine\nwidth = 3\n").unwrap();
    let out = bin(&["--config", "bad.conf", "synth"], d);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    fs::write(d.join("short.csv"), "event_id,t_sample,amplitude\n0,1,2\n0,5\n").unwrap();
    let out = bin(&["select-bandwidth", "--peaks", "short.csv"], d);
    assert!(String::from_utf8_lossy(&out.stderr).contains("short.csv:3:"));
    assert!(!bin(&["select-bandwidth", "--peaks", "missing.csv"], d).status.success());
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["synth", "--seed", "1", "--out", "p.csv", "--labels", "l.csv"], d);
    fs::write(d.join("c.conf"), "h_min = 0.5\nh_max = 0.6\nh_steps = 2\n").unwrap();
    let out = ok(&["--config", "c.conf", "select-bandwidth", "--peaks", "p.csv"], d);
    let h: f64 = out.trim().strip_prefix("h_cv=").unwrap().parse().unwrap();
    assert!(h == 0.5 || h == 0.6);
    let out = ok(
        &["--config", "c.conf", "select-bandwidth", "--peaks", "p.csv", "--h-min", "0.9", "--h-max", "1.0", "--curve", "cv.csv"],
        d,
    );
    let h: f64 = out.trim().strip_prefix("h_cv=").unwrap().parse().unwrap();
    assert!(h >= 0.9);
    let curve = read(d, "cv.csv");
    assert!(curve.starts_with("h,score\n"));
    assert_eq!(curve.lines().count(), 3);
}

#[test]
fn build_test_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["synth", "--seed", "5", "--n", "400", "--anomalies", "0", "--out", "train.csv", "--labels", "lt.csv"], d);
    ok(&["synth", "--seed", "6", "--n", "150", "--anomalies", "0", "--out", "val.csv", "--labels", "lv.csv"], d);
    ok(&["synth", "--seed", "8", "--n", "200", "--out", "test.csv", "--labels", "ltest.csv"], d);
    let out = ok(
        &[
            "build-set", "--train", "train.csv", "--val", "val.csv", "--hull", "hull.csv", "--transform", "tf.txt",
            "--grid", "grid.csv", "--grid-size", "40",
        ],
        d,
    );
    assert!(out.contains("c_k="));
    let hull = read(d, "hull.csv");
    assert!(hull.starts_with("# c_k="));
    assert!(hull.contains("kernel=gaussian"));
    assert_eq!(read(d, "grid.csv").lines().count(), 1 + 40 * 40);

    let out = ok(
        &["test-points", "--hull", "hull.csv", "--transform", "tf.txt", "--peaks", "test.csv", "--out", "flags.csv", "--labels", "ltest.csv"],
        d,
    );
    assert!(out.contains("tested=200"));
    assert!(out.contains("ConfusionMatrix"));
    let flags = read(d, "flags.csv");
    assert!(flags.starts_with("event_id,t_sample,amplitude,onset\n"));
    assert_eq!(flags.lines().count(), 201);

    ok(&["export-grid", "--peaks", "train.csv", "--grid", "g2.csv", "--hull", "h2.csv", "--grid-size", "16", "--h", "0.5"], d);
    assert!(read(d, "g2.csv").starts_with("x,y,density\n"));
    assert!(read(d, "h2.csv").contains("h=0.5"));
}

#[test]
fn signal_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let fs_hz = 500.0;
    // 60 s recording, one beat per 0.8 s, with a slow baseline drift
    let (beats, _) = pulse_train(fs_hz, 60.0, 0.3, 0.8, 74, &[1.0]);
    let raw: String = beats
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let drift = 0.3 * (std::f64::consts::TAU * 0.05 * i as f64 / fs_hz).sin();
            format!("{}\n", ((v + drift) * 800.0 + 16.0).round())
        })
        .collect();
    fs::write(d.join("rec.dat.txt"), raw).unwrap();
    fs::write(d.join("rec.hea"), "# test record\nrec 1 500\nrec.dat 16 800 12 0 base=16\n").unwrap();
    fs::write(d.join("onsets.txt"), "100\n10000\n20000\n29000\n").unwrap();

    let out = ok(&["calibrate", "--header", "rec.hea", "--signal", "rec.dat.txt", "--out", "clean.txt"], d);
    assert!(out.contains("fs=500"));
    let out = ok(&["segment", "--signal", "clean.txt", "--onsets", "onsets.txt", "--out", "events.csv"], d);
    assert!(out.contains("events=2 skipped=2"), "{out}");
    let out = ok(&["detect-peaks", "--events", "events.csv", "--out", "peaks.csv"], d);
    let n: usize = out.trim().rsplit('=').next().unwrap().parse().unwrap();
    // two events of 15 s at 0.8 s per beat
    assert!((2 * 17..=2 * 19).contains(&n), "{out}");
    let peaks = read(d, "peaks.csv");
    assert!(peaks.starts_with("event_id,t_sample,amplitude\n"));
}
