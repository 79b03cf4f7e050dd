use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_semiperm"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn semiperm")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn terms(cache_text: &str) -> Vec<String> {
    cache_text.lines().skip(1).map(str::to_owned).collect()
}

fn enumerate_to(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.path().join(name);
    let mut all = vec!["enumerate"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--out", path.to_str().unwrap()]);
    let out = run(&all);
    assert!(out.status.success(), "{}", stderr(&out));
    path
}

#[test]
fn enumerate_examples() {
    let out = run(&["enumerate", "S2", "--order", "3", "--ring", "exact"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("semiperm-terms v1 model=S2"));
    assert_eq!(terms(&text), ["1", "4", "14", "48"]);

    let out = run(&["enumerate", "QP", "--order", "2"]);
    assert_eq!(terms(&stdout(&out)), ["1", "2", "6"]);

    let out = run(&["enumerate", "S5", "--order", "0"]);
    assert_eq!(terms(&stdout(&out)), ["1"]);
}

#[test]
fn enumerate_modular_and_returns() {
    let out = run(&["enumerate", "S2", "--order", "3", "--ring", "mod:7"]);
    assert_eq!(terms(&stdout(&out)), ["1", "4", "0", "6"]);
    let out = run(&["enumerate", "QP", "--order", "4", "--kind", "returns"]);
    assert_eq!(terms(&stdout(&out)), ["1", "0", "2", "0", "10"]);
}

#[test]
fn enumerate_from_model_file() {
    let dir = TempDir::new().unwrap();
    let spec = dir.path().join("model.json");
    std::fs::write(&spec, semiperm::model::catalog_model("S3").unwrap().to_json()).unwrap();
    let from_file = run(&["enumerate", spec.to_str().unwrap(), "--order", "6"]);
    let from_id = run(&["enumerate", "S3", "--order", "6"]);
    assert!(from_file.status.success(), "{}", stderr(&from_file));
    assert_eq!(terms(&stdout(&from_file)), terms(&stdout(&from_id)));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["enumerate", "S9"]).status.code(), Some(2));
    assert_eq!(run(&["enumerate", "S2", "--ring", "mod:8"]).status.code(), Some(2));
    assert_eq!(run(&["check", "--what", "nothing"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn resource_guard_exits_3() {
    let out = bin()
        .args(["enumerate", "S2", "--order", "100"])
        .env("SEMIPERM_CELL_BUDGET", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("budget"));
}

#[test]
fn check_examples() {
    for args in [
        &["check", "--what", "kernel-q", "--order", "30"][..],
        &["check", "--what", "star", "--order", "10"],
        &["check", "--what", "feq", "--model", "S2", "--interp", "y-all,x-all", "--order", "25"],
        &["check", "--what", "orbit", "--model", "S4b", "--order", "8"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", stdout(&out));
        assert!(stdout(&out).starts_with("PASS"));
    }
}

#[test]
fn failed_check_exits_1_with_offender() {
    let out = run(&["check", "--what", "feq", "--model", "S5", "--interp", "y-all,x-all", "--order", "6"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.starts_with("FAIL feq through t^6"), "{text}");
    assert!(text.contains("first nonzero t^"), "{text}");

    let out = run(&["check", "--what", "s3-form", "--order", "6", "--reading", "section-first"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("t^2"));
}

#[test]
fn verify_recurrence_examples() {
    let dir = TempDir::new().unwrap();
    let rec = data("s2_totals.rec");
    let s2 = enumerate_to(&dir, "s2.txt", &["S2", "--order", "500"]);
    let out = run(&["verify-recurrence", s2.to_str().unwrap(), rec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "SUCCESS for n = 0..=498");

    let s5 = enumerate_to(&dir, "s5.txt", &["S5", "--order", "60"]);
    let out = run(&["verify-recurrence", s5.to_str().unwrap(), rec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).starts_with("VIOLATION at n = "), "{}", stdout(&out));

    let bad = dir.path().join("bad.rec");
    std::fs::write(&bad, "a(n): n+1\na(n+1): (n+2\n").unwrap();
    let out = run(&["verify-recurrence", s2.to_str().unwrap(), bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn guess_finds_s2_recurrence() {
    let dir = TempDir::new().unwrap();
    let s2 = enumerate_to(&dir, "s2.txt", &["S2", "--order", "200"]);
    let out = run(&["guess", s2.to_str().unwrap(), "--budget", "64", "--second-prime", "65521"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let found = report["found"].as_array().unwrap();
    assert!(!found.is_empty());
    assert!(found.iter().all(|f| f["holdout_verified"] == true));
    assert_eq!(found[0]["strength"], "strong");
}

#[test]
fn guess_recovers_planted_sequence() {
    // a(n+1) = (n+3) a(n) + 1 written as an exact cache.
    let dir = TempDir::new().unwrap();
    let mut values = vec![num_bigint::BigInt::from(2)];
    for n in 0..79u32 {
        let next = values.last().unwrap() * (n + 3) + 1;
        values.push(next);
    }
    let cache = semiperm::cache::TermCache {
        model: None,
        kind: semiperm::cache::SequenceKind::Sequence,
        values: semiperm::cache::TermValues::Exact(values),
    };
    let path = dir.path().join("planted.txt");
    cache.save(&path).unwrap();
    let out = run(&["guess", path.to_str().unwrap(), "--budget", "12"]);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let found = report["found"].as_array().unwrap();
    assert_eq!(found.len(), 1, "{report}");
    assert_eq!(found[0]["order"], 2);
    assert_eq!(found[0]["degree"], 1);
}

#[test]
fn guess_fixed_shape_and_ode() {
    let dir = TempDir::new().unwrap();
    let s2 = enumerate_to(&dir, "s2.txt", &["S2", "--order", "60", "--ring", "mod:45007"]);
    let out = run(&["guess", s2.to_str().unwrap(), "--shape", "2,5"]);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["basis"].as_array().unwrap().len(), 1);

    let qp = enumerate_to(&dir, "qp.txt", &["QP", "--order", "120", "--ring", "mod:45007"]);
    let out = run(&["guess", qp.to_str().unwrap(), "--ode", "3,4"]);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(report["dimension"].as_u64().unwrap() >= 1, "{report}");
    assert_eq!(report["holdout_verified"], report["dimension"]);
}

#[test]
fn asymptotics_reports_json() {
    let dir = TempDir::new().unwrap();
    let s2 = enumerate_to(&dir, "s2.txt", &["S2", "--order", "300"]);
    let out = run(&["asymptotics", s2.to_str().unwrap(), "--mu", "4", "--alpha", "-1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let fit: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((fit["mu"].as_f64().unwrap() - 4.0).abs() < 1e-3);
    assert!((fit["alpha"].as_f64().unwrap() + 1.0).abs() < 0.05);
    assert!(fit["conditional"]["c"].as_f64().unwrap() > 0.0);

    let qp = enumerate_to(&dir, "qp.txt", &["QP", "--order", "400", "--kind", "returns", "--ring", "log"]);
    let out = run(&["asymptotics", qp.to_str().unwrap()]);
    let fit: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((fit["alpha"].as_f64().unwrap() + 3.0).abs() < 0.05, "{fit}");

    let m = enumerate_to(&dir, "m.txt", &["QP", "--order", "100", "--ring", "mod:45007"]);
    assert_eq!(run(&["asymptotics", m.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn orbit_sum_examples() {
    let out = run(&["orbit-sum", "--start", "0,0"]);
    let text = stdout(&out);
    let expected = semiperm::LaurentPoly2::from_ints(semiperm::Integers, &[(1, 1, 1), (-1, 1, -1), (1, -1, -1), (-1, -1, 1)]);
    assert_eq!(text.trim(), expected.to_string());
    assert_eq!(stdout(&run(&["orbit-sum", "--start", "-1,-1"])).trim(), "0");
    assert_eq!(stdout(&run(&["orbit-sum", "--start", "-1,1"])).trim(), "0");
}

#[test]
fn cache_round_trip_is_bit_exact() {
    let dir = TempDir::new().unwrap();
    for ring in ["exact", "mod:65521", "log"] {
        let path = enumerate_to(&dir, "c.txt", &["S4a", "--order", "40", "--ring", ring]);
        let text = std::fs::read_to_string(&path).unwrap();
        let cache = semiperm::cache::TermCache::load(&path).unwrap();
        assert_eq!(cache.to_string(), text);
    }
}

#[test]
fn threads_flag_gives_same_output() {
    let one = run(&["--threads", "1", "enumerate", "S5", "--order", "80", "--ring", "mod:45007"]);
    let many = run(&["enumerate", "S5", "--order", "80", "--ring", "mod:45007"]);
    assert_eq!(stdout(&one), stdout(&many));
}
