use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn coreset(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coreset"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = coreset(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen_mixture(dir: &TempDir, name: &str, n: usize, d: usize) -> PathBuf {
    let out = path(dir, name);
    let (n, d) = (n.to_string(), d.to_string());
    ok_json(&["gen", "--kind", "gaussian-mixture", "--n", &n, "--d", &d, "--k-true", "4", "--seed", "7", "--output", s(&out)]);
    out
}

#[test]
fn gen_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = gen_mixture(&dir, "a.bin", 1000, 10);
    let b = gen_mixture(&dir, "b.bin", 1000, 10);
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    assert_eq!(&bytes[..4], b"CKZ1");
    assert_eq!(bytes.len(), 4 + 8 + 8 + 1 + 1000 * 10 * 8);
}

#[test]
fn gen_lowerbound_shape() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "lb.csv");
    let v = ok_json(&["gen", "--kind", "lowerbound", "--k", "1", "--z", "100", "--d", "3", "--output", s(&out)]);
    assert_eq!((v["n"].as_u64(), v["d"].as_u64(), v["dim_used"].as_u64()), (Some(6), Some(3), Some(3)));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert_eq!(text.lines().next(), Some("1,0,0"));
}

#[test]
fn gen_single_point_box() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "one.csv");
    let v = ok_json(&["gen", "--kind", "uniform-box", "--n", "1", "--d", "4", "--output", s(&out)]);
    assert_eq!(v["n"], 1);
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 1);
}

#[test]
fn gen_rejects_bad_parameters() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "x.bin");
    assert_eq!(coreset(&["gen", "--kind", "spiral", "--output", s(&out)]).status.code(), Some(1));
    let sep = ["gen", "--kind", "lowerbound", "--separation", "3", "--output", s(&out)];
    assert_eq!(coreset(&sep).status.code(), Some(1));
}

#[test]
fn uniform_build_respects_draw_count() {
    let dir = TempDir::new().unwrap();
    let x = gen_mixture(&dir, "x.bin", 2000, 3);
    let out = path(&dir, "s.bin");
    let v = ok_json(&["build", "--input", s(&x), "--output", s(&out), "--method", "uniform", "--n2", "100", "--k", "4"]);
    let rows = v["rows"].as_u64().unwrap();
    assert!((1..=100).contains(&rows));
    assert!((v["total_weight"].as_f64().unwrap() - 2000.0).abs() < 1e-6);
    let side: Value = serde_json::from_slice(&std::fs::read(path(&dir, "s.bin.meta.json")).unwrap()).unwrap();
    assert_eq!(side["coreset_meta"]["builder"], "uniform");
    assert!(side["wall_time_s"].as_f64().is_some());
}

#[test]
fn theory_mode_refuses_saturated_sizes() {
    let dir = TempDir::new().unwrap();
    let x = gen_mixture(&dir, "x.bin", 200, 2);
    let out = path(&dir, "s.bin");
    let res = coreset(&[
        "build", "--input", s(&x), "--output", s(&out), "--z", "2", "--epsilon", "0.1", "--theory-mode", "true",
    ]);
    assert_eq!(res.status.code(), Some(1));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("N1"), "{err}");
    assert!(!out.exists());
}

#[test]
fn eval_of_identity_coreset_is_exact() {
    let dir = TempDir::new().unwrap();
    let x = gen_mixture(&dir, "x.csv", 300, 3);
    let text = std::fs::read_to_string(&x).unwrap();
    let with_weights: String = text.lines().map(|l| format!("{l},1\n")).collect();
    let s_path = path(&dir, "s.csv");
    std::fs::write(&s_path, with_weights).unwrap();
    let out = coreset(&[
        "eval", "--input", s(&x), "--coreset", s(&s_path), "--k", "4", "--eps-budget", "1e-9",
        "--ensembles", "kmeanspp:20,random_box:20,lloyd_on_coreset:5",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["eps_emp"].as_f64().unwrap() <= 1e-9);
    assert_eq!(v["evaluated"], 45);
    for key in ["dataset_digest", "coreset_meta", "ensembles", "wall_time_s"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    let e = &v["ensembles"][0];
    for key in ["kind", "trials", "max_rel_err", "mean_rel_err", "worst_center_digest"] {
        assert!(e.get(key).is_some(), "{key}");
    }
}

#[test]
fn zero_budget_fails_with_status_two() {
    let dir = TempDir::new().unwrap();
    let x = gen_mixture(&dir, "x.bin", 1000, 2);
    let out = path(&dir, "s.bin");
    ok_json(&["build", "--input", s(&x), "--output", s(&out), "--k", "4", "--n1", "300", "--n2", "100"]);
    let res = coreset(&["eval", "--input", s(&x), "--coreset", s(&out), "--eps-budget", "0", "--ensembles", "kmeanspp:10"]);
    assert_eq!(res.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(v["within_budget"], false);
    assert_eq!(v["coreset_meta"]["builder"], "two_stage");
}

#[test]
fn dimension_mismatch_is_an_error() {
    let dir = TempDir::new().unwrap();
    let x2 = gen_mixture(&dir, "x2.bin", 500, 2);
    let x3 = gen_mixture(&dir, "x3.bin", 500, 3);
    let out = path(&dir, "s.bin");
    ok_json(&["build", "--input", s(&x3), "--output", s(&out), "--k", "3", "--n1", "100", "--n2", "50"]);
    let res = coreset(&["eval", "--input", s(&x2), "--coreset", s(&out)]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("dimension mismatch"));
}

#[test]
fn missing_input_is_an_error() {
    let dir = TempDir::new().unwrap();
    let res = coreset(&["build", "--input", s(&path(&dir, "nope.bin")), "--output", s(&path(&dir, "s.bin"))]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn csv_and_bin_inputs_give_identical_coresets() {
    let dir = TempDir::new().unwrap();
    let bin = gen_mixture(&dir, "x.bin", 1500, 3);
    let csv = gen_mixture(&dir, "x.csv", 1500, 3);
    let (a, b) = (path(&dir, "a.bin"), path(&dir, "b.bin"));
    for (input, out) in [(&bin, &a), (&csv, &b)] {
        ok_json(&[
            "build", "--input", s(input), "--output", s(out), "--k", "4", "--n1", "500", "--n2", "200",
            "--record-timings", "false", "--seed", "3",
        ]);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(
        std::fs::read(path(&dir, "a.bin.meta.json")).unwrap(),
        std::fs::read(path(&dir, "b.bin.meta.json")).unwrap()
    );
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = TempDir::new().unwrap();
    let x = gen_mixture(&dir, "x.bin", 800, 2);
    let out = path(&dir, "s.bin");
    let cfg = path(&dir, "run.toml");
    std::fs::write(
        &cfg,
        format!("input = {:?}\noutput = {:?}\nmethod = \"fl11\"\nk = 4\nn2 = 120\nseed = 5\n", s(&x), s(&out)),
    )
    .unwrap();
    let v = ok_json(&["build", "--config", s(&cfg)]);
    assert_eq!(v["coreset_meta"]["builder"], "fl11");
    assert_eq!(v["coreset_meta"]["seed"], 5);
    let v = ok_json(&["build", "--config", s(&cfg), "--method", "bfl16", "--seed", "6"]);
    assert_eq!(v["coreset_meta"]["builder"], "bfl16");
    assert_eq!((v["coreset_meta"]["seed"].as_u64(), v["coreset_meta"]["k"].as_u64()), (Some(6), Some(4)));

    std::fs::write(&cfg, "k = 4\nnot_a_key = true\n").unwrap();
    let res = coreset(&["build", "--config", s(&cfg), "--input", s(&x), "--output", s(&out)]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("not_a_key"));
}

#[test]
fn report_goes_to_file_when_requested() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "x.bin");
    let report = path(&dir, "gen.json");
    let res = coreset(&["gen", "--kind", "uniform-box", "--n", "10", "--output", s(&out), "--report", s(&report)]);
    assert!(res.status.success());
    assert!(res.stdout.is_empty());
    let v: Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(v["n"], 10);
}

#[test]
fn subspace_on_flat_data_reports_both_zero() {
    let dir = TempDir::new().unwrap();
    let x = path(&dir, "flat.csv");
    let rows: String = (0..60)
        .map(|i| {
            let (a, b) = (i as f64 * 0.37 - 5.0, (i % 7) as f64 - 3.0);
            format!("{a},{b},{},{}\n", a + b, 2.0 * a - b)
        })
        .collect();
    std::fs::write(&x, rows).unwrap();
    let v = ok_json(&["subspace", "--input", s(&x), "--k", "2", "--count", "30"]);
    assert_eq!(v["both_zero"], true);
    assert_eq!(v["ratio"], 1.0);
}

#[test]
fn subspace_brute_cross_check() {
    let dir = TempDir::new().unwrap();
    let x = path(&dir, "tiny.bin");
    ok_json(&["gen", "--kind", "gaussian-mixture", "--n", "10", "--d", "3", "--k-true", "2", "--seed", "2", "--output", s(&x)]);
    let v = ok_json(&["subspace", "--input", s(&x), "--k", "1", "--z", "1", "--count", "10", "--brute", "true"]);
    let brute = &v["brute"];
    assert_eq!(brute["brute_not_worse"], true);
    assert!(brute["brute_value"].as_f64().unwrap() <= brute["svd_flat_value_at_z"].as_f64().unwrap() * (1.0 + 1e-12));
    let too_big = coreset(&["subspace", "--input", s(&gen_mixture(&dir, "big.bin", 40, 3)), "--k", "1", "--brute", "true"]);
    assert_eq!(too_big.status.code(), Some(1));
}

#[test]
fn undersized_uniform_coreset_fails_on_the_lower_bound_instance() {
    let dir = TempDir::new().unwrap();
    let x = path(&dir, "lb.bin");
    let v = ok_json(&["gen", "--kind", "lowerbound", "--k", "1", "--z", "100", "--d", "32", "--output", s(&x)]);
    assert_eq!(v["n"], 64);
    let out = path(&dir, "s.bin");
    ok_json(&["build", "--input", s(&x), "--output", s(&out), "--method", "uniform", "--n2", "32", "--k", "1", "--z", "100"]);
    let res = coreset(&["eval", "--input", s(&x), "--coreset", s(&out), "--ensembles", "adversarial", "--z", "100", "--k", "1"]);
    let v: Value = serde_json::from_slice(&res.stdout).unwrap();
    assert!(v["eps_emp"].as_f64().unwrap() >= 0.5, "{v}");
    assert_eq!(v["ensembles"][0]["kind"], "adversarial");
}

#[test]
fn bench_reports_every_method() {
    let v = ok_json(&[
        "bench", "--n", "600", "--d", "3", "--k", "3", "--n1", "200", "--n2", "100", "--ensembles", "kmeanspp:5",
        "--record-timings", "false",
    ]);
    let methods: Vec<&str> = v["methods"].as_array().unwrap().iter().map(|m| m["method"].as_str().unwrap()).collect();
    assert_eq!(methods, ["two_stage", "fl11", "bfl16", "uniform"]);
    assert!(v["methods"][0]["build_s"].is_null());
}
