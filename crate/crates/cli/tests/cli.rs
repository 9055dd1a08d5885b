use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::{Command, Output};

fn dfx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dfx")).args(args).output().expect("run dfx")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dfx-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

/// Report JSON with timings removed.
fn untimed(mut v: serde_json::Value) -> serde_json::Value {
    for r in v["reports"].as_array_mut().unwrap() {
        r.as_object_mut().unwrap().remove("seconds");
    }
    v
}

#[test]
fn check_all_passes_and_is_reproducible() {
    let a = dfx(&["check", "all", "--sites", "8", "--seed", "7"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let va = json(&a);
    assert_eq!(va["passed"], true);
    assert_eq!(va["reports"].as_array().unwrap().len(), 12);
    let b = dfx(&["check", "all", "--sites", "8", "--seed", "7"]);
    assert_eq!(untimed(va), untimed(json(&b)));
}

#[test]
fn module_checks_with_parameters() {
    for args in [&["car", "check", "--sites", "10"][..], &["check", "groupoid", "--samples", "2000"], &["fock", "check", "--sites", "6"]] {
        let out = dfx(args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(json(&out)["passed"], true);
    }
}

#[test]
fn unknown_suite_is_an_error() {
    let out = dfx(&["check", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
}

/// Open chain of `m` sites with nearest-neighbour hopping: single-particle energies
/// `±2t cos(kπ/(m+1))`, a set symmetric under sign change.
#[test]
fn assemble_and_spectrum_match_tight_binding() {
    let dir = scratch("tb");
    let pat = dir.join("chain.json");
    let spec = dir.join("h.toml");
    let op = dir.join("op.mtx");
    let eig = dir.join("eig.csv");
    std::fs::write(&spec, "[[block]]\narity = 1\nrange = 1.0\nkind = \"hopping\"\nparams = { t = 0.75 }\n").unwrap();
    assert!(dfx(&["pattern", "gen", "--kind", "periodic", "--dim", "1", "--window", "6", "-o", pat.to_str().unwrap()]).status.success());
    let out = dfx(&["ham", "assemble", "--pattern", pat.to_str().unwrap(), "--N", "1", "--spec", spec.to_str().unwrap(), "-o", op.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["dimension"], 13);
    assert!(dfx(&["ham", "spectrum", op.to_str().unwrap(), "-o", eig.to_str().unwrap()]).status.success());
    let text = std::fs::read_to_string(&eig).unwrap();
    let got: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(got.windows(2).all(|w| w[0] <= w[1]));
    let mut oracle: Vec<f64> = (1..=13).map(|k| 2.0 * 0.75 * (k as f64 * PI / 14.0).cos()).collect();
    oracle.sort_by(f64::total_cmp);
    for (g, o) in got.iter().zip(&oracle) {
        assert!((g - o).abs() < 1e-10, "{g} {o}");
    }
    let trace: f64 = got.iter().sum();
    assert!(trace.abs() < 1e-10);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn pattern_commands() {
    let dir = scratch("pat");
    let (a, b) = (dir.join("a.json"), dir.join("b.csv"));
    assert!(dfx(&["--seed", "3", "pattern", "gen", "--kind", "random_displaced", "--lambda", "0.3", "-o", a.to_str().unwrap()]).status.success());
    let v = dfx(&["pattern", "validate", a.to_str().unwrap()]);
    assert!(v.status.success());
    assert_eq!(json(&v)["valid"], true);
    let m = dfx(&["pattern", "metric", a.to_str().unwrap(), a.to_str().unwrap(), "--grid", "32"]);
    let d = json(&m)["value"].as_f64().unwrap();
    assert!(d > 0.0 && d <= 1.0);
    assert!(dfx(&["pattern", "gen", "--kind", "periodic", "-o", b.to_str().unwrap()]).status.success());
    assert!(std::fs::read_to_string(&b).unwrap().lines().count() > 100);
    let bad = dfx(&["pattern", "gen", "--kind", "nope"]);
    assert_eq!(bad.status.code(), Some(2));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn canonical_order_command() {
    let dir = scratch("canon");
    let p = dir.join("p.json");
    assert!(dfx(&["--window", "5", "pattern", "gen", "--kind", "perturbed_periodic", "--dim", "1", "--epsilon", "0.1", "-o", p.to_str().unwrap()]).status.success());
    let out = dfx(&["canon", "order", "--pattern", p.to_str().unwrap(), "--subset", "4,0,2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let labels: Vec<i64> = v["labels"].as_array().unwrap().iter().map(|l| l[0].as_i64().unwrap()).collect();
    assert!(labels.windows(2).all(|w| w[0] < w[1]));
    let mut order: Vec<u64> = v["order"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    order.sort_unstable();
    assert_eq!(order, vec![0, 2, 4]);
    assert_eq!(dfx(&["canon", "order", "--pattern", p.to_str().unwrap(), "--subset", "0,999"]).status.code(), Some(2));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn algebra_commands() {
    let dir = scratch("alg");
    let p = dir.join("p.json");
    assert!(dfx(&["--window", "7", "pattern", "gen", "--kind", "perturbed_periodic", "--dim", "2", "-o", p.to_str().unwrap()]).status.success());
    let g = dfx(&["groupoid", "verify", "--pattern", p.to_str().unwrap(), "--arity", "2", "--samples", "300"]);
    assert!(g.status.success(), "{}", String::from_utf8_lossy(&g.stderr));
    let a = dfx(&["galg", "check", "--pattern", p.to_str().unwrap(), "--arity", "2"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(json(&a)["reports"].as_array().unwrap().len(), 3);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn selfbinding_experiment_csv() {
    let dir = scratch("sb");
    let cfg = dir.join("exp.toml");
    let csv = dir.join("spec.csv");
    std::fs::write(&cfg, "sites = 12\nu = -6.0\n").unwrap();
    let out = dfx(&["experiment", "selfbinding", "--config", cfg.to_str().unwrap(), "-o", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["dimension"], 66);
    assert!(v["gap"].as_f64().unwrap() >= 2.0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "index,eigenvalue,island,mean_pair_distance");
    assert_eq!(text.lines().count(), 67);
    let capped = dfx(&["experiment", "selfbinding", "--sites", "200"]);
    assert_eq!(capped.status.code(), Some(2));
    std::fs::remove_dir_all(dir).ok();
}
