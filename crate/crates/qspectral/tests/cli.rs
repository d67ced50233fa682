use std::path::PathBuf;
use std::process::{Command, Output};

use qspectral::eigenfunctions::{u_k, SpectralParam};
use qspectral::jacobi::{JacobiOperator, Regime};
use qspectral::{Complex, QBase};

fn qspectral(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qspectral")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qspectral-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn eval_qexp_at_zero_parameter() {
    let o = qspectral(&["eval", "--fn", "qexp", "--q", "0.5", "--z", "0.3", "--t", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["re"], 1.0);
    assert_eq!(v["im"], 0.0);
}

#[test]
fn eval_matches_library_call() {
    let o = qspectral(&["eval", "--fn", "u", "--case", "2", "--s", "1.5", "--t", "-0.4", "--q", "0.25", "--k", "0", "--y", "0.3+0.2i", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let got = Complex::new(row[1].parse().unwrap(), row[2].parse().unwrap());
    let op = JacobiOperator::new(Regime::case2(1.5, -0.4).unwrap(), QBase::new(0.25).unwrap()).unwrap();
    let sp = SpectralParam::from_y(Complex::new(0.3, 0.2)).unwrap();
    assert_eq!(got, u_k(op.params(), &sp, 0).unwrap());
    // 17 significant digits in scientific form
    assert!(row[1].split('e').next().unwrap().trim_start_matches('-').len() == 18, "{}", row[1]);
}

#[test]
fn invalid_regime_exits_with_two() {
    let o = qspectral(&["eval", "--fn", "u", "--case", "1", "--t", "0.5", "--y", "0.3"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("invalid regime") && err.contains("(0, inf)"), "{err}");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(qspectral(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(qspectral(&["eval", "--fn", "u", "--case", "2"]).status.code(), Some(2));
    assert_eq!(qspectral(&["verify", "no-such-suite"]).status.code(), Some(2));
    assert_eq!(qspectral(&["eval", "--fn", "theta", "--q", "1.5", "--z", "0.3"]).status.code(), Some(2));
}

#[test]
fn verify_reports_and_exit_codes() {
    let dir = scratch_dir("verify");
    let report = dir.join("report.json");
    let o = qspectral(&["verify", "quadratic", "--report", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["suite"], "quadratic");
    assert_eq!(r["pass"], true);
    assert!(r["max_residual"].as_f64().unwrap() < 1e-10);
    assert!(r["cases"].as_u64().unwrap() >= 50);

    let o = qspectral(&["verify", "orthogonality", "--case", "1", "--theta", "0.7"]);
    assert_eq!(o.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(r["max_residual"].as_f64().unwrap() < 1e-6);

    // an empty suite verifies nothing and does not pass
    let o = qspectral(&["verify", "recurrence", "--draws", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn spectrum_files_have_requested_rows_and_grid_flag() {
    let dir = scratch_dir("spectrum");
    let o = qspectral(&["spectrum", "--case", "1", "--psi", "0", "--r", "0.8", "--theta", "0.4", "--resolution", "37", "--out-dir", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.join("density.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("chi,x,density"));
    assert_eq!(csv.lines().count(), 38);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("spectrum.json")).unwrap()).unwrap();
    assert_eq!(json["continuous"].as_array().unwrap().len(), 37);
    assert!(json["grid_fit"]["max_residual"].as_f64().unwrap() < 1e-8);
    assert!(json["discrete"][0]["mass_kk"].as_f64().unwrap() > 0.0);

    let o = qspectral(&["spectrum", "--case", "2", "--resolution", "5", "--out-dir", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("spectrum.json")).unwrap()).unwrap();
    assert!(json.get("grid_fit").is_none());
}

#[test]
fn outputs_are_byte_stable() {
    let args = ["orthogonality", "--case", "2", "--theta", "1.1", "--k-lo", "-2", "--k-hi", "2"];
    let (a, b) = (qspectral(&args), qspectral(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("k,l,re,im,abs_err\n"));
    assert_eq!(stdout(&a).lines().count(), 26);
}

#[test]
fn flags_override_config() {
    let dir = scratch_dir("config");
    let cfg = dir.join("run.json");
    std::fs::write(&cfg, r#"{"case": 2, "s": 1.5, "t": "-0.4", "q": 0.25, "fn": "u", "y": "0.3+0.2i", "k": 0}"#).unwrap();
    let from_file = qspectral(&["eval", "--config", cfg.to_str().unwrap()]);
    let flags = qspectral(&["eval", "--fn", "u", "--case", "2", "--s", "1.5", "--t", "-0.4", "--q", "0.25", "--y", "0.3+0.2i"]);
    assert_eq!(from_file.stdout, flags.stdout);
    let overridden = qspectral(&["eval", "--config", cfg.to_str().unwrap(), "--q", "0.5"]);
    let direct = qspectral(&["eval", "--fn", "u", "--case", "2", "--s", "1.5", "--t", "-0.4", "--q", "0.5", "--y", "0.3+0.2i"]);
    assert_eq!(overridden.stdout, direct.stdout);
    assert_ne!(overridden.stdout, from_file.stdout);

    std::fs::write(&cfg, r#"{"cas": 2}"#).unwrap();
    assert_eq!(qspectral(&["eval", "--config", cfg.to_str().unwrap(), "--fn", "u"]).status.code(), Some(2));
}

#[test]
fn quadcheck_and_qexp_limit_csv() {
    let o = qspectral(&["quadcheck", "--q", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("case,params,residual"));
    assert!(text.lines().any(|l| l.starts_with("transform_random,")));

    let o = qspectral(&["qexp-limit", "--bases", "0.9,0.99"]);
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("q,lambda,z,value,exact,rel_err"));
    assert_eq!(text.lines().count(), 1 + 2 * 27);
}

#[test]
fn masspoints_window_checks() {
    let o = qspectral(&["masspoints", "--case", "1", "--psi", "0", "--r", "0.8", "--x-max", "30"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["points"].as_array().unwrap().len(), 6);
    assert!(v["grid_fit"].is_object());
    assert_eq!(qspectral(&["masspoints", "--case", "1", "--x-min", "0.5", "--x-max", "3"]).status.code(), Some(2));
}
