use std::path::PathBuf;
use std::process::{Command, Output};

fn tricok(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tricok")).args(args).output().expect("run tricok")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tricok-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn mc_prints_decimal() {
    for (p, l, want) in [("5", "7", "1"), ("2", "1,1", "3"), ("2", "1,1,1", "21")] {
        let o = tricok(&["mc", "--p", p, "--partition", l]);
        assert!(o.status.success());
        assert_eq!(stdout(&o).trim(), want);
    }
}

#[test]
fn pmf_table_sums_to_one() {
    let o = tricok(&["theory-pmf", "--p", "2", "--chi", "0.5", "--xmin", "-20", "--xmax", "20", "--format", "csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let last = text.lines().last().unwrap();
    let sum: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert!(last.starts_with("sum,") && sum >= 1.0 - 1e-8);
}

#[test]
fn exit_codes() {
    let bad = |args: &[&str]| tricok(args).status.code().unwrap();
    assert_eq!(bad(&["theory-pmf", "--p", "2", "--chi", "0.5", "--xmin", "3", "--xmax", "1"]), 2);
    assert_eq!(bad(&["theory-pmf", "--p", "4", "--chi", "0.5", "--xmin", "0", "--xmax", "1"]), 2);
    assert_eq!(bad(&["chi0", "--p", "2", "--dist", "0:1", "--seed", "1"]), 2);
    assert_eq!(bad(&["simulate", "--p", "2", "--n", "100000", "--trials", "100000000", "--seed", "1"]), 4);
    assert_eq!(bad(&["no-such-command"]), 2);
}

#[test]
fn chi0_closed_form_and_estimate() {
    let o = tricok(&["chi0", "--p", "2", "--alpha", "0.5"]);
    assert!(stdout(&o).contains("\"closed_form\":5.0000000000000000e-1"));
    let o = tricok(&["chi0", "--p", "3", "--dist", "0:0.2,1:0.5,2:0.3", "--n", "100", "--trials", "2000", "--seed", "4"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["convergence"].as_array().unwrap().len(), 3);
    let est = v["estimate"]["estimate"].as_f64().unwrap();
    assert!(est.is_finite() && est > 0.0 && v["estimate"]["stderr"].as_f64().unwrap() > 0.0);
}

#[test]
fn simulate_then_compare() {
    let dir = scratch("sim");
    let h1 = dir.join("a.json");
    let h2 = dir.join("b.json");
    let rep = dir.join("r.json");
    let args = ["simulate", "--p", "2", "--n", "512", "--trials", "3000", "--seed", "12", "--zeta", "0"];
    for h in [&h1, &h2] {
        let o = tricok(&[&args[..], &["--out", h.to_str().unwrap()]].concat());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read(&h1).unwrap();
    assert_eq!(a, std::fs::read(&h2).unwrap());
    let o = tricok(&["compare", "--hist", h1.to_str().unwrap(), "--alpha", "0.5", "--lambdas", "1", "--out", rep.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    assert!(v["tv"].as_f64().unwrap() < 0.1);
    let m = &v["moments"][0];
    assert!((m["theory"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    std::fs::write(dir.join("bad.json"), "{\"p\": 2}").unwrap();
    let o = tricok(&["compare", "--hist", dir.join("bad.json").to_str().unwrap(), "--alpha", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn moments_trivial_group() {
    let o = tricok(&["moments", "--p", "2", "--G", "", "--n", "64", "--trials", "10", "--seed", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["empirical"].as_f64(), Some(1.0));
    assert_eq!(v["theory"].as_f64(), Some(1.0));
}

#[test]
fn selftest_passes() {
    let o = tricok(&["selftest"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).count(), 4);
}
