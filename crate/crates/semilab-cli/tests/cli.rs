use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn semilab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semilab"))
        .args(args)
        .output()
        .expect("spawning semilab")
}

fn write_inputs(dir: &Path) {
    let status = semilab(&["generate", "--seed", "7", "--out", dir.to_str().unwrap()]).status;
    assert!(status.success());
}

#[test]
fn generate_writes_bundle() {
    let dir = tempfile::tempdir().unwrap();
    write_inputs(dir.path());
    for name in ["operator.json", "chain.json", "suite.toml"] {
        assert!(dir.path().join(name).exists(), "missing {name}");
    }
}

#[test]
fn suite_is_deterministic_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    write_inputs(dir.path());
    let cfg = dir.path().join("small.toml");
    fs::write(
        &cfg,
        "seed = 11\ntol = 1e-8\n\n[inputs]\noperator = \"operator.json\"\nchain = \"chain.json\"\n\n\
         [[checks]]\nname = \"semigroup_law\"\n\n\
         [[checks]]\nname = \"resolvent_convergence\"\n\n\
         [[checks]]\nname = \"markov_transition\"\nn = 2000\n",
    )
    .unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let res = semilab(&[
            "suite",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(
            res.status.success(),
            "suite failed: {}{}",
            String::from_utf8_lossy(&res.stdout),
            String::from_utf8_lossy(&res.stderr)
        );
    }
    for name in ["report.json", "resolvent_convergence.csv"] {
        let a = fs::read(out_a.join(name)).unwrap();
        let b = fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_a.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["all_pass"], serde_json::Value::Bool(true));
    assert_eq!(report["seed"], serde_json::json!(11));
}

#[test]
fn suite_seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    write_inputs(dir.path());
    let cfg = dir.path().join("small.toml");
    fs::write(
        &cfg,
        "seed = 11\n\n[inputs]\noperator = \"operator.json\"\n\n[[checks]]\nname = \"semigroup_law\"\n",
    )
    .unwrap();
    let out = dir.path().join("o");
    let res = semilab(&[
        "suite",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "99",
    ]);
    assert!(res.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], serde_json::json!(99));
}

#[test]
fn empty_check_list_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.toml");
    fs::write(&cfg, "seed = 1\n").unwrap();
    let out = dir.path().join("o");
    let res = semilab(&[
        "suite",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(0));
}

#[test]
fn unknown_check_name_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    write_inputs(dir.path());
    let cfg = dir.path().join("bad.toml");
    fs::write(
        &cfg,
        "seed = 1\n\n[inputs]\noperator = \"operator.json\"\n\n[[checks]]\nname = \"nonsense\"\n",
    )
    .unwrap();
    let res = semilab(&[
        "suite",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn malformed_toml_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("broken.toml");
    fs::write(&cfg, "seed = [[[\n").unwrap();
    let res = semilab(&[
        "suite",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    write_inputs(dir.path());
    let cfg = dir.path().join("fail.toml");
    // no chain ever stays in a proper subset with probability > 1
    fs::write(
        &cfg,
        "seed = 1\n\n[inputs]\nchain = \"chain.json\"\n\n\
         [[checks]]\nname = \"containment\"\nn = 1000\nmin_probability = 1.5\n",
    )
    .unwrap();
    let res = semilab(&[
        "suite",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stdout).contains("FAIL containment"));
}

#[test]
fn chernoff_reports_valid_bound() {
    let res = semilab(&["chernoff", "--dist", "gamma:3:6", "--c", "1.2"]);
    assert_eq!(res.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(v["valid"], serde_json::Value::Bool(true));
    assert!(v["exact_tail"].as_f64().unwrap() <= v["bound"].as_f64().unwrap());
}

#[test]
fn dominate_exit_codes_track_verdict() {
    let ok = semilab(&["dominate", "--d1", "gammadom:1", "--d2", "gamma:2:4"]);
    assert_eq!(ok.status.code(), Some(0));
    // Exponential(1) does not dominate Exponential(0.5)
    let bad = semilab(&["dominate", "--d1", "exp:1", "--d2", "exp:0.5"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn resolvent_quadrature_agrees_with_solve() {
    let dir = tempfile::tempdir().unwrap();
    write_inputs(dir.path());
    let x = dir.path().join("x.json");
    fs::write(&x, r#"{"values": [1.0, 0.0, 0.0, 0.0]}"#).unwrap();
    let res = semilab(&[
        "resolvent",
        "--operator",
        dir.path().join("operator.json").to_str().unwrap(),
        "--element",
        x.to_str().unwrap(),
        "--lambda",
        "2.0",
        "--quadrature",
    ]);
    assert_eq!(res.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert!(v["quadrature"]["gap"].as_f64().unwrap() < 1e-8);
}

#[test]
fn yosida_table_errors_within_certificates() {
    let dir = tempfile::tempdir().unwrap();
    write_inputs(dir.path());
    let res = semilab(&[
        "yosida",
        "--operator",
        dir.path().join("operator.json").to_str().unwrap(),
        "--t",
        "0.5",
        "--indices",
        "8,32,128",
    ]);
    assert_eq!(res.status.code(), Some(0));
    let text = String::from_utf8_lossy(&res.stdout);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n,certificate,true_error");
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        let cert: f64 = cols[1].parse().unwrap();
        let err: f64 = cols[2].parse().unwrap();
        assert!(err <= cert * (1.0 + 1e-9) + 1e-13, "error {err} above certificate {cert}");
    }
}
