use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rhmsp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rhmsp"))
        .args(args)
        .current_dir(dir)
        .env_remove("RHMSP_SEED")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn entries(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    v.sort();
    v
}

#[test]
fn simulate_writes_one_column_per_path() {
    let d = tempfile::tempdir().unwrap();
    let o = rhmsp(d.path(), &["simulate", "--grid", "0:1:4096", "--paths", "100", "--terms", "5000", "--seed", "7", "--out", "p.csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(d.path().join("p.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4097 + 1);
    assert!(lines[0].starts_with("t,path_0,"));
    assert!(lines.iter().all(|l| l.split(',').count() == 101));
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("p.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["seed"], "7");
    assert_eq!(meta["path_count"], 100);
    assert_eq!(entries(d.path()), ["p.csv", "p.meta.json"]);
}

#[test]
fn same_seed_same_bytes() {
    let d = tempfile::tempdir().unwrap();
    for out in ["a.csv", "b.csv"] {
        let o = rhmsp(d.path(), &["simulate", "--grid", "0:1:64", "--paths", "4", "--terms", "200", "--seed", "3", "--out", out]);
        assert_eq!(code(&o), 0);
    }
    assert_eq!(fs::read(d.path().join("a.csv")).unwrap(), fs::read(d.path().join("b.csv")).unwrap());
}

#[test]
fn seed_falls_back_to_the_environment() {
    let d = tempfile::tempdir().unwrap();
    let run = |out: &str, env: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_rhmsp"));
        c.args(["simulate", "--grid", "0:1:32", "--paths", "2", "--terms", "200", "--out", out]).current_dir(d.path());
        match env {
            Some(v) => c.env("RHMSP_SEED", v),
            None => c.env_remove("RHMSP_SEED"),
        };
        assert!(c.status().unwrap().success());
        fs::read(d.path().join(out)).unwrap()
    };
    let from_env = run("e.csv", Some("11"));
    let flag = rhmsp(d.path(), &["simulate", "--grid", "0:1:32", "--paths", "2", "--terms", "200", "--seed", "11", "--out", "f.csv"]);
    assert_eq!(code(&flag), 0);
    assert_eq!(from_env, fs::read(d.path().join("f.csv")).unwrap());
    assert_ne!(from_env, run("z.csv", None));
}

#[test]
fn usage_errors_exit_2_without_artifacts() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("bad.cfg"), "alpha = = 3\n").unwrap();
    let cases: [&[&str]; 4] = [
        &["frobnicate"],
        &["norm", "--spec", "bad.cfg", "--times", "0.5", "--coeffs", "1", "--out", "o"],
        &["norm", "--spec", "missing.cfg", "--times", "0.5", "--coeffs", "1", "--out", "o"],
        &["norm", "--alpha", "2.5", "--times", "0.5", "--coeffs", "1", "--out", "o"],
    ];
    for args in cases {
        let o = rhmsp(d.path(), args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
    assert_eq!(entries(d.path()), ["bad.cfg"]);
}

#[test]
fn existing_output_needs_force() {
    let d = tempfile::tempdir().unwrap();
    fs::create_dir(d.path().join("out")).unwrap();
    fs::write(d.path().join("out/keep"), "x").unwrap();
    let args = ["norm", "--times", "0.5", "--coeffs", "1", "--out", "out"];
    assert_eq!(code(&rhmsp(d.path(), &args)), 2);
    assert!(d.path().join("out/keep").exists());
    let mut forced = args.to_vec();
    forced.push("--force");
    assert_eq!(code(&rhmsp(d.path(), &forced)), 0);
    assert_eq!(entries(&d.path().join("out")), ["config.cfg", "norm.json"]);
}

#[test]
fn runtime_error_leaves_nothing_behind() {
    let d = tempfile::tempdir().unwrap();
    let o = rhmsp(d.path(), &["norm", "--times", "2.0", "--coeffs", "1", "--out", "o"]);
    assert_ne!(code(&o), 0);
    assert!(entries(d.path()).is_empty(), "{:?}", entries(d.path()));
}

#[test]
fn norm_reports_the_self_similar_value() {
    let d = tempfile::tempdir().unwrap();
    let value = |t: &str, out: &str| {
        let o = rhmsp(d.path(), &["norm", "--times", t, "--coeffs", "1", "--out", out]);
        assert_eq!(code(&o), 0);
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join(out).join("norm.json")).unwrap()).unwrap();
        v["scale_norm"].as_f64().unwrap()
    };
    // constant H = 0.5 by default
    let (a, b) = (value("0.25", "a"), value("1", "b"));
    assert!((a - 0.5 * b).abs() <= 1e-7 * b);
}

#[test]
fn failing_check_exits_1_and_keeps_its_report() {
    let d = tempfile::tempdir().unwrap();
    let o = rhmsp(d.path(), &["ft-check", "--h", "1.5", "--t", "1", "--out", "ft"]);
    assert_eq!(code(&o), 1);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("FAIL ft_check")), "{stdout}");
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("ft/ft_check.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], false);
    assert!(report["config"].is_object());
}
