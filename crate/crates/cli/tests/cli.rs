use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path
}

fn multispec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multispec"))
        .args(args)
        .env_remove("MULTISPEC_OUT")
        .env_remove("MULTISPEC_WORKERS")
        .output()
        .unwrap()
}

fn run(experiment: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![experiment, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    multispec(&args)
}

fn only_dir(out: &Path) -> PathBuf {
    let dirs: Vec<PathBuf> = fs::read_dir(out).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(dirs.len(), 1, "{dirs:?}");
    dirs.into_iter().next().unwrap()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

/// Column `name` of a results table, parsed as numbers.
fn column(dir: &Path, name: &str) -> Vec<f64> {
    let mut r = csv::Reader::from_path(dir.join("results.csv")).unwrap();
    let ix = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records().map(|rec| rec.unwrap()[ix].parse().unwrap()).collect()
}

const XSB: &str = r#"
experiment = "xsb"
seed = 4

[xsb]
manifold = { kind = "s3" }
degree = 4
pairs = [[0.0, 0.6], [1.0, 0.6], [1.0, 0.75]]
samples = 4096
"#;

const OPTIMALITY: &str = r#"
experiment = "optimality"

[optimality]
d = 2
family = "highest-weight"
schedule = [4, 8, 16, 32, 64]
"#;

const NLS: &str = r#"
experiment = "nls"
seed = 9

[nls]
manifold = { kind = "zonal", dim = 3 }
degree = 12
decay = 3.0
nonlinearity = "pure-power"
alpha = 3.0
t_end = 0.5
dt = 0.01
samples = 6
"#;

#[test]
fn same_config_and_seed_give_identical_outputs() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), XSB);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(run("xsb", &cfg, &a, &["--workers", "1"]).status.success());
    assert!(run("xsb", &cfg, &b, &["--workers", "3"]).status.success());
    let (da, db) = (only_dir(&a), only_dir(&b));
    for f in ["results.csv", "report.json"] {
        assert_eq!(fs::read(da.join(f)).unwrap(), fs::read(db.join(f)).unwrap(), "{f}");
    }
    let c = tmp.path().join("c");
    assert!(run("xsb", &cfg, &c, &["--seed", "5"]).status.success());
    assert_ne!(fs::read(da.join("results.csv")).unwrap(), fs::read(only_dir(&c).join("results.csv")).unwrap());
}

#[test]
fn lattice_tables_are_deterministic_across_workers() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "experiment = \"lattice\"\n[lattice]\ncounter = \"gauss-rep\"\nschedule = [4, 8, 16, 32]\ntau_max = 10000\n",
    );
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(run("lattice", &cfg, &a, &["--workers", "1"]).status.success());
    assert!(run("lattice", &cfg, &b, &["--workers", "4"]).status.success());
    let csv = fs::read_to_string(only_dir(&a).join("results.csv")).unwrap();
    assert_eq!(csv, fs::read_to_string(only_dir(&b).join("results.csv")).unwrap());
    assert!(csv.starts_with("n,max_count,normalized,argmax\n"));
}

#[test]
fn malformed_configs_exit_with_config_code_and_write_nothing() {
    let cases = [
        ("xsb", "experiment = \"xsb\"\n[xsb\n"),
        ("xsb", &format!("{XSB}\nextra = 1\n")),
        ("lattice", XSB),
        ("xsb", &XSB.replace("samples = 4096", "samples = 1000")),
        ("optimality", &OPTIMALITY.replace("[4, 8, 16, 32, 64]", "[4, 8, 16, 32]")),
        ("nls", &NLS.replace("dt = 0.01", "dt = -0.01")),
    ];
    for (experiment, text) in cases {
        let tmp = TempDir::new().unwrap();
        let cfg = write_config(tmp.path(), text);
        let out = tmp.path().join("out");
        let o = run(experiment, &cfg, &out, &[]);
        assert_eq!(o.status.code(), Some(2), "{text}\n{}", String::from_utf8_lossy(&o.stderr));
        assert!(!out.exists(), "{text}");
    }
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), XSB);
    let out = tmp.path().join("out");
    assert_eq!(run("xsb", &cfg, &out, &["--workers", "0"]).status.code(), Some(2));
    assert_eq!(run("xsb", &tmp.path().join("missing.toml"), &out, &[]).status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn unresolved_time_sampling_exits_with_precision_code() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), &XSB.replace("samples = 4096", "samples = 16"));
    let out = tmp.path().join("out");
    let o = run("xsb", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = only_dir(&out);
    assert!(dir.join("FAILED").exists());
    let manifest: Value = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "failed");
}

#[test]
fn reports_carry_exponents_and_versions() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), OPTIMALITY);
    let out = tmp.path().join("out");
    assert!(run("optimality", &cfg, &out, &[]).status.success());
    let dir = only_dir(&out);
    let r = report(&dir);
    assert_eq!(r["schema"], "multispec-report/1");
    assert_eq!(r["model_exponent"], 0.25);
    assert!(r["measured_exponent"].as_f64().is_some());
    assert!(r["residual"].as_f64().is_some());
    assert!(r["precision_estimate"].as_f64().is_some());
    let m: Value = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["schema"], "multispec-manifest/1");
    assert!(m["versions"]["multispec"].is_string());
    assert!(m["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert_eq!(m["parameters"]["optimality"]["d"], 2);
    assert!(!dir.join("FAILED").exists());
}

fn fine_changes_stay_within_precision(experiment: &str, text: &str, columns: &[&str]) {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), text);
    let coarse = tmp.path().join("coarse");
    let fine = tmp.path().join("fine");
    assert!(run(experiment, &cfg, &coarse, &[]).status.success());
    assert!(run(experiment, &cfg, &fine, &["--fine"]).status.success());
    let (dc, df) = (only_dir(&coarse), only_dir(&fine));
    let precision = report(&dc)["precision_estimate"].as_f64().unwrap();
    for col in columns {
        for (a, b) in column(&dc, col).iter().zip(column(&df, col)) {
            assert!((a - b).abs() <= precision * a.abs(), "{experiment}.{col}: {a} vs {b} (precision {precision})");
        }
    }
    if let Some(p) = report(&dc)["exponent_precision"].as_f64() {
        let a = report(&dc)["measured_exponent"].as_f64().unwrap();
        let b = report(&df)["measured_exponent"].as_f64().unwrap();
        assert!((a - b).abs() <= p, "{a} vs {b} (precision {p})");
    }
}

#[test]
fn fine_runs_move_optimality_values_within_precision() {
    fine_changes_stay_within_precision("optimality", OPTIMALITY, &["ratio"]);
}

#[test]
fn fine_runs_move_nls_values_within_precision() {
    fine_changes_stay_within_precision("nls", NLS, &["energy", "h1"]);
}

#[test]
fn fine_runs_move_xsb_values_within_precision() {
    fine_changes_stay_within_precision("xsb", XSB, &["xsb"]);
}

#[test]
fn environment_sets_output_directory() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), OPTIMALITY);
    let out = tmp.path().join("env-out");
    let o = Command::new(env!("CARGO_BIN_EXE_multispec"))
        .args(["optimality", "--config", cfg.to_str().unwrap()])
        .env("MULTISPEC_OUT", &out)
        .env("MULTISPEC_WORKERS", "2")
        .output()
        .unwrap();
    assert!(o.status.success());
    let m: Value =
        serde_json::from_str(&fs::read_to_string(only_dir(&out).join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["workers"], 2);
}
