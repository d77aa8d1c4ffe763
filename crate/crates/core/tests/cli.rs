use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cubesos")).args(args).output().expect("binary runs")
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cubesos-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn bounds_on_k2_maxcut() {
    let g = scratch("k2.json", r#"{"n": 2, "edges": [[1, 2]]}"#);
    let spec = format!("maxcut:{}", g.display());
    let v = json(&run(&["--quiet", "bounds", "--instance", &spec, "--r", "2"]));
    assert_eq!(v["f_min"], -1.0);
    assert!((v["outer"]["value"].as_f64().unwrap() + 1.0).abs() < 1e-6);
    assert!((v["inner"]["value"].as_f64().unwrap() + 1.0).abs() < 1e-9);
    assert_eq!(v["argmin"], "01");
}

#[test]
fn bounds_on_constant_and_weight() {
    let c = scratch("const.json", r#"{"n": 3, "terms": [{"vars": [], "coef": 2.5}]}"#);
    let v = json(&run(&["--quiet", "bounds", "--poly", c.to_str().unwrap(), "--r", "1"]));
    for key in [&v["f_min"], &v["outer"]["value"], &v["inner"]["value"]] {
        assert!((key.as_f64().unwrap() - 2.5).abs() < 1e-6);
    }
    let w = scratch("weight.json", r#"{"n": 4, "terms": [{"vars": [1], "coef": 1}, {"vars": [2], "coef": 1}, {"vars": [3], "coef": 1}, {"vars": [4], "coef": 1}]}"#);
    let v = json(&run(&["--quiet", "bounds", "--poly", w.to_str().unwrap(), "--r", "4", "--which", "inner"]));
    assert!(v["inner"]["value"].as_f64().unwrap().abs() < 1e-8);
}

#[test]
fn bounds_on_matrix_input() {
    let m = scratch("m.json", r#"{"n": 2, "k": 2, "entries": [{"i": 1, "j": 1, "poly": [{"vars": [1], "coef": 1}]}, {"i": 1, "j": 2, "poly": [{"vars": [2], "coef": 0.5}]}, {"i": 2, "j": 2, "poly": [{"vars": [], "coef": 1}]}]}"#);
    let v = json(&run(&["--quiet", "bounds", "--matrix", m.to_str().unwrap(), "--r", "2"]));
    let f_min = v["f_min"].as_f64().unwrap();
    assert!(v["outer"]["value"].as_f64().unwrap() <= f_min + 1e-6);
    assert!(v["inner"]["value"].as_f64().unwrap() >= f_min - 1e-8);
}

#[test]
fn exit_codes() {
    let bad = scratch("bad.json", "{ not json");
    assert_eq!(run(&["bounds", "--poly", bad.to_str().unwrap(), "--r", "1"]).status.code(), Some(2));
    assert_eq!(run(&["bounds", "--r", "1"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    // degree 2 at r = 1 on n = 8 has lambda_tilde >= 1
    let q = scratch(
        "quad.json",
        r#"{"n": 8, "terms": [{"vars": [1, 2], "coef": 1}, {"vars": [3, 4], "coef": -1}, {"vars": [5], "coef": 0.5}]}"#,
    );
    let out = run(&["certify", "--poly", q.to_str().unwrap(), "--r", "1"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no certificate"));
}

#[test]
fn certify_constant_and_verify() {
    let c = scratch("c2.json", r#"{"n": 3, "terms": [{"vars": [], "coef": -1}]}"#);
    let v = json(&run(&["--quiet", "certify", "--poly", c.to_str().unwrap(), "--r", "1", "--verify"]));
    assert_eq!(v["delta"], 0.0);
    let lin = scratch("lin.json", r#"{"n": 10, "terms": [{"vars": [1], "coef": 1}, {"vars": [4], "coef": -2}, {"vars": [7], "coef": 0.5}]}"#);
    let v = json(&run(&["--quiet", "certify", "--poly", lin.to_str().unwrap(), "--r", "5", "--verify"]));
    assert!(v["residual"].as_f64().unwrap() <= 1e-7);
}

#[test]
fn sweeps_and_determinism() {
    let a = run(&["--quiet", "sweep", "--mode", "roots", "--n", "100", "--q", "2"]);
    assert!(a.status.success());
    let text = String::from_utf8(a.stdout.clone()).unwrap();
    assert_eq!(text.lines().next().unwrap(), "n,q,r,xi,xi_over_n,phi_q(r/n)");
    assert_eq!(text.lines().count(), 51);
    assert_eq!(run(&["--quiet", "sweep", "--mode", "roots", "--n", "100", "--q", "2"]).stdout, a.stdout);
    let phi = run(&["--quiet", "sweep", "--mode", "phi", "--q", "2,3,4,5"]);
    assert_eq!(String::from_utf8(phi.stdout).unwrap().lines().count(), 801);
    let e1 = run(&["--quiet", "sweep", "--mode", "errors", "--d", "1", "--n", "6", "--t", "0.5", "--samples", "2"]);
    let e2 = run(&["--quiet", "sweep", "--mode", "errors", "--d", "1", "--n", "6", "--t", "0.5", "--samples", "2"]);
    assert!(e1.status.success());
    assert_eq!(e1.stdout, e2.stdout);
    let body = String::from_utf8(e1.stdout).unwrap();
    assert!(body.starts_with("n,r,t,max_outer_gap,max_inner_gap,bound_2Cd_xi_over_n,phi,status"));
}

#[test]
fn gamma_outputs() {
    let out = run(&["--quiet", "gamma", "--dmax", "12"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let r2 = 1.0 + 2f64.sqrt();
    for (d, line) in text.lines().skip(1).enumerate() {
        let g: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(g <= r2.powi(d as i32 + 1));
    }
    let sweep = run(&["--quiet", "gamma", "--dmax", "2", "--n-sweep", "6"]);
    let text = String::from_utf8(sweep.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "d,k,n,rho_finite,rho_infinity,gamma_d,C_d");
}

#[test]
fn max_n_env_limits_enumeration() {
    let out = Command::new(env!("CARGO_BIN_EXE_cubesos"))
        .env("CUBESOS_MAX_N", "4")
        .args(["--quiet", "bounds", "--instance", "maxcut-complete:6", "--r", "1", "--which", "brute"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
