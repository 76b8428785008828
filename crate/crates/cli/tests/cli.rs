use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fperiod(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fperiod")).args(args).current_dir(dir).output().expect("binary runs")
}

fn ok(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Wide CSV of noisy curves with a small weekday effect, deterministic.
fn write_wide(path: &Path, days: usize, slots: usize) {
    let mut s = String::from("date");
    for j in 0..slots {
        s += &format!(",slot{j}");
    }
    s.push('\n');
    let mut state: u64 = 12345;
    let mut noise = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    for t in 0..days {
        s += &format!("2021-{:03}", t + 1);
        for j in 0..slots {
            let u = j as f64 / (slots - 1) as f64;
            let v = 4.0 + (6.0 * u).sin() + 0.05 * ((t % 7) as f64) * u + noise();
            s += &format!(",{v:.4}");
        }
        s.push('\n');
    }
    fs::write(path, s).unwrap();
}

#[test]
fn ingest_check_reports_trimming() {
    let dir = tempfile::tempdir().unwrap();
    write_wide(&dir.path().join("d.csv"), 15, 48);
    let out = ok(&fperiod(&["ingest-check", "d.csv"], dir.path()));
    assert!(out.contains("days = 14"), "{out}");
    assert!(out.contains("trimmed_days = 1"));
    assert!(out.contains("warning = dropped 1 trailing day"));
}

#[test]
fn negative_value_under_sqrt_fails_with_row() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    write_wide(&path, 14, 12);
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut cells: Vec<&str> = lines[3].split(',').collect();
    cells[1] = "-1";
    lines[3] = cells.join(",");
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    let o = fperiod(&["ingest-check", "d.csv", "--sqrt"], dir.path());
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 4") && err.contains("negative"), "{err}");
}

#[test]
fn emitted_wide_csv_reads_back_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    write_wide(&dir.path().join("d.csv"), 21, 10);
    ok(&fperiod(&["ingest-check", "d.csv", "--sqrt", "--bspline", "6:4", "--emit", "a.csv"], dir.path()));
    ok(&fperiod(&["ingest-check", "a.csv", "--emit", "b.csv"], dir.path()));
    assert_eq!(fs::read(dir.path().join("a.csv")).unwrap(), fs::read(dir.path().join("b.csv")).unwrap());
}

#[test]
fn test_report_is_complete_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    write_wide(&dir.path().join("d.csv"), 70, 24);
    let args = ["test", "d.csv", "--proj", "1,2", "--mc-reps", "20000", "--svg", "--out"];
    let first = ok(&fperiod(&[&args[..], &["r1"]].concat(), dir.path()));
    ok(&fperiod(&[&args[..], &["r2"]].concat(), dir.path()));
    for f in ["pvalues.csv", "diagnostics.txt", "weekday_means.csv", "weekday_means.svg"] {
        assert_eq!(fs::read(dir.path().join("r1").join(f)).unwrap(), fs::read(dir.path().join("r2").join(f)).unwrap(), "{f}");
    }
    let lines: Vec<&str> = first.lines().collect();
    assert_eq!(lines[0], "row,MEV1,MTR1,MEV2,MTR2,FTR1,FTR2,explained_variance");
    assert_eq!(lines.len(), 4);
    let ff: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(ff[0], "FF");
    assert!(ff[1..5].iter().all(|c| c.is_empty()));
    for line in &lines[2..] {
        let cells: Vec<&str> = line.split(',').collect();
        assert!(cells[5].is_empty() && cells[6].is_empty());
        assert!(!cells[7].is_empty());
    }
    let pvals = lines[1..].iter().flat_map(|l| l.split(',').skip(1).take(6)).filter(|c| !c.is_empty());
    for p in pvals {
        let v: f64 = p.parse().unwrap();
        assert!((0.0..=1.0).contains(&v));
    }
    let diag = fs::read_to_string(dir.path().join("r1/diagnostics.txt")).unwrap();
    for key in ["config.alpha = 0.05", "noise.bandwidth = 4", "mc.seed = ", "test.FF.FTR1.eigenvalues = ", "test.p2.MEV2.mc_se = "] {
        assert!(diag.contains(key), "missing {key}");
    }
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    write_wide(&dir.path().join("d.csv"), 30, 12);
    fs::write(dir.path().join("run.ini"), "period = 5\nalpha = 0.1\nproj = 2\nmc_reps = 10000\n").unwrap();
    ok(&fperiod(&["--config", "run.ini", "--alpha", "0.01", "test", "d.csv", "--out", "r"], dir.path()));
    let diag = fs::read_to_string(dir.path().join("r/diagnostics.txt")).unwrap();
    assert!(diag.contains("config.period = 5"));
    assert!(diag.contains("config.alpha = 0.01"));
    assert!(diag.contains("config.proj = 2"));
    assert!(diag.contains("data.days = 30"));
}

#[test]
fn simulate_table_has_sample_size_pairs_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["simulate", "--dgp", "ma5-null", "--reps", "200", "--proj", "1", "--mc-reps", "10000", "--seed", "5", "--out"];
    let table = ok(&fperiod(&[&args[..], &["a"]].concat(), dir.path()));
    ok(&fperiod(&[&args[..], &["b"]].concat(), dir.path()));
    for f in ["rates.csv", "table.csv", "diagnostics.txt"] {
        assert_eq!(fs::read(dir.path().join("a").join(f)).unwrap(), fs::read(dir.path().join("b").join(f)).unwrap(), "{f}");
    }
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows[0], "row,N,MEV1@0.05,MTR1@0.05,MEV2@0.05,MTR2@0.05,FTR1@0.05,FTR2@0.05");
    assert!(rows[1].starts_with("FF,210,") && rows[2].starts_with("FF,420,"));
    assert!(rows[3].starts_with("p=1,210,") && rows[4].starts_with("p=1,420,"));
    let rates = fs::read_to_string(dir.path().join("a/rates.csv")).unwrap();
    assert!(rates.starts_with("dgp,N,test,alpha,rate,se,reps,failures,seed\nma5-null,210,FTR1,0.05,"));
}

#[test]
fn localpower_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "localpower", "--signal", "2", "--loading", "2", "--proj", "5", "--xs", "0:3:1.5", "--reps", "200", "--mc-reps",
        "10000", "--svg", "--out",
    ];
    let csv = ok(&fperiod(&[&args[..], &["a"]].concat(), dir.path()));
    ok(&fperiod(&[&args[..], &["b"]].concat(), dir.path()));
    for f in ["localpower.csv", "localpower.svg", "diagnostics.txt"] {
        assert_eq!(fs::read(dir.path().join("a").join(f)).unwrap(), fs::read(dir.path().join("b").join(f)).unwrap(), "{f}");
    }
    assert!(csv.starts_with("x,test,rate,se,reps,failures,seed\n0,MEV1 p=5,"));
    assert_eq!(csv.lines().count(), 1 + 3 * 6);
}

#[test]
fn bad_input_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    write_wide(&dir.path().join("d.csv"), 10, 12);
    let o = fperiod(&["ingest-check", "d.csv"], dir.path());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("at least 14 complete days"));
    let o = fperiod(&["simulate", "--dgp", "garch"], dir.path());
    assert!(!o.status.success());
    let o = fperiod(&["--period", "1", "ingest-check", "d.csv"], dir.path());
    assert!(!o.status.success());
}
