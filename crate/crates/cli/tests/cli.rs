use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dul(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dul")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn summary(dir: &Path, id: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(format!("{id}.json"))).unwrap()).unwrap()
}

/// CSV text without the leading comment lines.
fn body(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect()
}

fn as_f64(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn eval_partial_sum_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = dul(&["eval", "--series", "ordinary", "--s", "2,0", "--n", "10", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = summary(dir.path(), "eval");
    // Σ_{n≤10} n⁻² = 1968329/1270080
    assert!((as_f64(&v["value"][0]) - 1968329.0 / 1270080.0).abs() < 1e-15);
    assert_eq!(as_f64(&v["value"][1]), 0.0);
    assert_eq!(v["status"], "ok");
}

#[test]
fn mv_check_rows_all_hold() {
    let dir = tempfile::tempdir().unwrap();
    let o = dul(&["mv-check", "--random", "10", "--seed", "1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = body(&dir.path().join("mv-check.csv"));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("instance,n,lhs,rhs,holds"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r.ends_with(",true")));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&dul(&["no-such-command"])), 64);
    assert_eq!(code(&dul(&["eval", "--series", "zeta", "--s", "2", "--bogus", "1"])), 64);
    assert_eq!(code(&dul(&["--help"])), 0);
    // below the square-mean threshold
    let o = dul(&["mean-square", "--series", "alt-ordinary", "--sigma", "0.4", "--T", "10", "--out", out]);
    assert_eq!(code(&o), 2);
    assert_eq!(summary(dir.path(), "mean-square")["status"], "error");
    // the log ζ path runs into the first zero
    let o = dul(&["eval", "--series", "prime", "--s", "0.6,14.134725", "--out", out]);
    assert_eq!(code(&o), 3);
    assert_eq!(summary(dir.path(), "eval")["kind"], "numeric");
}

fn scan_args<'a>(out: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![
        "translate-scan",
        "--series",
        "alt-ordinary",
        "--target",
        "const:0.4",
        "--compact",
        "0.7,0.8,0,0.1",
        "--T",
        "200",
        "--step",
        "0.1",
        "--eps",
        "0.5",
        "--out",
        out,
    ];
    v.extend_from_slice(extra);
    v
}

#[test]
fn paused_scan_resumes_to_the_same_result() {
    let whole = tempfile::tempdir().unwrap();
    let parts = tempfile::tempdir().unwrap();
    let (w, p) = (whole.path().to_str().unwrap(), parts.path().to_str().unwrap());
    assert_eq!(code(&dul(&scan_args(w, &[]))), 0);
    let first = dul(&scan_args(p, &["--max-cells", "700"]));
    assert_eq!(code(&first), 0);
    assert_eq!(summary(parts.path(), "translate-scan")["status"], "paused");
    let side = parts.path().join("translate-scan.checkpoint.json");
    let side = side.to_str().unwrap();
    assert_eq!(code(&dul(&scan_args(p, &["--max-cells", "700", "--resume", side]))), 0);
    assert_eq!(summary(parts.path(), "translate-scan")["status"], "paused");
    assert_eq!(code(&dul(&scan_args(p, &["--resume", side]))), 0);
    assert_eq!(summary(parts.path(), "translate-scan")["status"], "done");
    assert_eq!(body(&whole.path().join("translate-scan.csv")), body(&parts.path().join("translate-scan.csv")));
    let (a, b) = (summary(whole.path(), "translate-scan"), summary(parts.path(), "translate-scan"));
    for key in ["density", "best_tau", "best_distance", "excluded_fraction"] {
        assert_eq!(a[key], b[key], "{key}");
    }
}

#[test]
fn scan_rejects_a_foreign_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&dul(&scan_args(out, &["--max-cells", "10"]))), 0);
    let side = dir.path().join("translate-scan.checkpoint.json");
    let mut other = scan_args(out, &["--resume", side.to_str().unwrap()]);
    other[4] = "const:0.5";
    assert_eq!(code(&dul(&other)), 2);
}

#[test]
fn reruns_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = dul(&[
            "mc-sample",
            "--series",
            "poly",
            "--s",
            "0.8",
            "--count",
            "200",
            "--seed",
            "3",
            "--n-terms",
            "500",
            "--out",
            d.path().to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (x, y) = (body(&a.path().join("mc-sample.csv")), body(&b.path().join("mc-sample.csv")));
    assert_eq!(x.lines().count(), 201);
    assert_eq!(x, y);
}

#[test]
fn thread_count_does_not_change_output() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for (d, threads) in [(&a, "1"), (&b, "3")] {
        let o = Command::new(env!("CARGO_BIN_EXE_dul"))
            .args(scan_args(d.path().to_str().unwrap(), &[]))
            .env("DUL_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0);
    }
    assert_eq!(body(&a.path().join("translate-scan.csv")), body(&b.path().join("translate-scan.csv")));
}

#[test]
fn csv_config_lines_replay_the_run() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let o = dul(&[
        "divergence-oracle",
        "--series",
        "alt-ordinary",
        "--atoms",
        "0.75,0",
        "--nmax",
        "5000",
        "--out",
        a.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(a.path().join("divergence-oracle.csv")).unwrap();
    let cfg: String = csv.lines().filter_map(|l| l.strip_prefix("# config: ")).map(|l| format!("{l}\n")).collect();
    assert!(cfg.starts_with("command = divergence-oracle\n"));
    let cfg_path = b.path().join("run.cfg");
    fs::write(&cfg_path, cfg).unwrap();
    // flags after the config override it
    let o = dul(&["--config", cfg_path.to_str().unwrap(), "divergence-oracle", "--out", b.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(body(&a.path().join("divergence-oracle.csv")), body(&b.path().join("divergence-oracle.csv")));
}
