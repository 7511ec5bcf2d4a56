use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn koszul(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_koszul")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stderr)))
}

/// Drops the one field allowed to differ between identical runs.
fn without_timestamp(text: &str) -> String {
    text.lines().filter(|l| !l.trim_start().starts_with("\"generated_at\"")).collect::<Vec<_>>().join("\n")
}

#[test]
fn betti_example_grid() {
    let o = koszul(&["betti", "--curve", "g2hyp", "--L", "5*inf", "--B", "trivial", "--pmax", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "p\\q,0,1,2\n0,1,-1,0\n1,0,1,2\n2,0,0,2\n3,0,0,0\n");
}

#[test]
fn betti_json_agrees_across_primes() {
    let o = koszul(&["betti", "--curve", "g3quartic", "--L", "2*H", "--format", "json", "--second-prime", "32003"]);
    assert_eq!(o.status.code(), Some(0));
    let doc = json(&o);
    assert_eq!(doc["schema"], "koszul-betti/1");
    assert_eq!(doc["cross_prime"]["agree"], true);
    assert!(doc["euler_checks"].as_array().unwrap().iter().all(|e| e["holds"] == true));
}

#[test]
fn thm11_quartic_passes() {
    let o = koszul(&["check", "thm11", "--curve", "g3quartic", "--L", "3*H"]);
    assert_eq!(o.status.code(), Some(0));
    let doc = json(&o);
    assert_eq!(doc["reports"][0]["status"], "pass");
    assert_eq!(doc["reports"][0]["boundary"]["last_nonzero_p"], 6);
}

#[test]
fn veronese_deviation_is_not_a_failure() {
    let o = koszul(&["check", "thm11", "--curve", "g3quartic", "--L", "2*H"]);
    assert_eq!(o.status.code(), Some(0));
    let r = &json(&o)["reports"][0];
    assert_eq!(r["status"], "hypothesis_unmet");
    assert_eq!(r["boundary"]["last_nonzero_p"], 3);
}

#[test]
fn wrong_gonality_fails_with_reproducible_inputs() {
    let o = koszul(&["check", "thm11", "--curve", "g2hyp", "--L", "5*inf", "--gonality", "3"]);
    assert_eq!(o.status.code(), Some(1));
    let r = &json(&o)["reports"][0];
    assert_eq!(r["status"], "fail");
    assert_eq!(r["inputs"]["l"], "5*inf");
    assert_eq!(r["inputs"]["gonality"], 3);
    assert!(r["cells"][0]["cell"]["outgoing"]["rows"].is_u64());
}

#[test]
fn pample_prints_a_fiber_witness() {
    let o = koszul(&["pample", "--curve", "g2hyp", "--B", "canonical", "--p", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let doc = json(&o);
    let outcome = &doc["verdict"]["outcome"];
    assert_eq!(outcome["kind"], "failure_witness");
    assert_eq!(outcome["jet_rank"], 1);
    assert_eq!(doc["witness_reverified"], true);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["frobnicate"][..],
        &["betti", "--curve", "g2hyp"],
        &["betti", "--curve", "g2hyp", "--L", "5*banana"],
        &["betti", "--curve", "g2hyp", "--L", "5*inf", "--prime", "10008"],
        &["check", "thm99", "--curve", "g2hyp"],
        &["check", "thm11", "--curve", "no-such-curve"],
        &["rank-bench", "--random", "12by4"],
    ] {
        let o = koszul(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn reruns_are_byte_identical() {
    for args in [
        &["check", "duality", "--curve", "g2hyp", "--L", "6*inf"][..],
        &["check", "prop36_sweep", "--curve", "g3quartic"],
        &["betti", "--curve", "g2hyp", "--L", "6*inf", "--format", "json"],
        &["pample", "--curve", "g3quartic", "--B", "canonical", "--p", "2", "--exhaustive-cap", "20000"],
    ] {
        let a = stdout(&koszul(args));
        let b = stdout(&koszul(args));
        assert!(a.contains("\"generated_at\""));
        assert_eq!(without_timestamp(&a), without_timestamp(&b), "{args:?}");
    }
}

#[test]
fn cache_round_trip_reproduces_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    let args = ["betti", "--curve", "g3quartic", "--L", "3*H - P1", "--cache-dir", cache];
    let cold = stdout(&koszul(&args));
    let files: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).collect();
    assert!(!files.is_empty());
    assert!(files.iter().all(|p| fs::read(p).unwrap().starts_with(b"KSZM")));
    assert_eq!(stdout(&koszul(&args)), cold);
    // a damaged entry is ignored and rebuilt
    fs::write(&files[0], b"KSZM garbage").unwrap();
    assert_eq!(stdout(&koszul(&args)), cold);
}

#[test]
fn sweep_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("experiment.json");
    let out = dir.path().join("report.json");
    fs::write(
        &config,
        r#"{
            "schema_version": 1,
            "curves": ["g2hyp", {"kind": "hyperelliptic", "p": 10007, "coefficients": [1, 0, 0, 0, 0, 1]}],
            "checks": [
                {"check": "green_regression"},
                {"check": "prop32_sweep", "ps": [1], "b_degrees": [7], "l_degrees": [6, 7], "variants": 1}
            ],
            "seed": 3,
            "second_prime": 32003,
            "workers": 2
        }"#,
    )
    .unwrap();
    let o = koszul(&["sweep", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["schema"], "koszul-report/1");
    assert_eq!(doc["summary"]["total"], 10);
    assert_eq!(doc["summary"]["pass"], 10);
    let csv = fs::read_to_string(out.with_extension("csv")).unwrap();
    assert!(csv.starts_with("index,check,status,"));
    assert_eq!(csv.lines().count(), 11);
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    fs::write(&config, r#"{"curves": ["g2hyp"], "checks": [{"check": "thm11", "colour": 1}]}"#).unwrap();
    assert_eq!(koszul(&["sweep", config.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn section_spaces_export() {
    let dir = tempfile::tempdir().unwrap();
    let o = koszul(&["betti", "--curve", "g2hyp", "--L", "5*inf", "--dump-spaces", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v = fs::read_to_string(dir.path().join("V.csv")).unwrap();
    assert!(v.starts_with("section,x_exp,y_exp,z_exp,coefficient\n"));
    // h0(5 inf) = 4 sections
    let sections: std::collections::BTreeSet<&str> = v.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(sections.len(), 4);
    assert!(Path::new(&dir.path().join("W_2.csv")).is_file());
}

#[test]
fn rank_bench_methods_agree() {
    let o = koszul(&["rank-bench", "--random", "300x200", "--density", "0.05", "--wiedemann", "--oracle"]);
    assert_eq!(o.status.code(), Some(0));
    let doc = json(&o);
    let runs = doc["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 3);
    assert!(runs.iter().all(|r| r["rank"] == runs[0]["rank"]));
    let o = koszul(&["rank-bench", "--curve", "g3quartic", "--L", "3*H", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("method,rows,cols,nnz,rank,peak_nnz,elapsed_seconds\nelimination,"));
}

#[test]
fn exhausted_budgets_are_reported_not_failed() {
    for limit in [["--budget-seconds", "0"], ["--max-nnz", "1"]] {
        let mut args = vec!["check", "thm11", "--curve", "g3quartic", "--L", "3*H"];
        args.extend(limit);
        let o = koszul(&args);
        assert_eq!(o.status.code(), Some(0));
        let r = &json(&o)["reports"][0];
        assert_eq!(r["status"], "budget_exceeded", "{limit:?}");
        assert!(r["error"].is_string());
    }
}
