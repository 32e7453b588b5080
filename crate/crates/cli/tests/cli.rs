// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use monitored_search::model::{matrix_elements, ModelParams};
use monitored_search::spectral::eigenvalues;
use serde_json::Value;

fn msearch(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msearch"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("MSEARCH_JOBS")
        .output()
        .expect("binary runs")
}

fn ok(out: &Path, args: &[&str]) {
    let o = msearch(out, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn query_reports_exponents_and_validity_bound() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["query", "--r-bar", "-1", "--s", "-1", "--dt0", "0.01"]);
    let q = json(&dir.path().join("query.json"));
    assert!((q["row"]["tau_physical_exponent"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((q["n_star"]["Finite"].as_f64().unwrap() - 100.0).abs() < 1e-9);

    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["query", "--r-bar", "-1", "--s", "-2"]);
    assert_eq!(json(&dir.path().join("query.json"))["n_star"], "Unbounded");
}

#[test]
fn manifest_lists_every_output_with_checksum() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["tau", "--n", "100,1000,10000", "--r-bar", "0", "--s", "0.5"]);
    let m = json(&dir.path().join("manifest.json"));
    assert_eq!(m["command"], "tau");
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
    let outputs = m["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 2);
    for o in outputs {
        let file = dir.path().join(o["file"].as_str().unwrap());
        assert_eq!(fs::metadata(&file).unwrap().len(), o["bytes"].as_u64().unwrap());
        let digest = o["sha256"].as_str().unwrap();
        assert_eq!(digest.len(), 64);
        assert!(digest.chars().all(|c| c.is_ascii_hexdigit()));
        assert_eq!(o["schema_version"], 1);
    }
    assert!(m["parameters"]["sizes"]["n"].is_array());
}

#[test]
fn spectrum_row_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["spectrum", "--n", "1000", "--gamma", "0.002", "--kappa", "0.05"]);
    let rows = csv_rows(&dir.path().join("spectrum.csv"));
    assert_eq!(rows.len(), 2);
    let col = |name: &str| rows[0].iter().position(|h| h == name).unwrap();
    let sd = eigenvalues(&matrix_elements(&ModelParams::new(1000, 0.002, 0.05).unwrap()));
    let get = |name: &str| rows[1][col(name)].parse::<f64>().unwrap();
    assert_eq!(get("re_lambda_plus"), sd.lambda_plus.re);
    assert_eq!(get("im_lambda_minus"), sd.lambda_minus.im);
    assert_eq!(rows[1][col("near_ep")], "false");
}

#[test]
fn fixed_step_reruns_are_byte_identical_across_job_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["pt", "--n", "32", "--kappa", "0.3", "--method", "full-rk4", "--dt", "0.05", "--points", "11"];
    ok(a.path(), &[&["--jobs", "1"], &args[..]].concat());
    ok(b.path(), &[&["--jobs", "3"], &args[..]].concat());
    assert_eq!(fs::read(a.path().join("pt.csv")).unwrap(), fs::read(b.path().join("pt.csv")).unwrap());

    let sweep = ["spectrum", "--n-geom", "2,6,9", "--r-bar", "-0.5", "--s", "0.25"];
    ok(a.path(), &[&["--jobs", "1"], &sweep[..]].concat());
    ok(b.path(), &[&["--jobs", "4"], &sweep[..]].concat());
    assert_eq!(fs::read(a.path().join("spectrum.csv")).unwrap(), fs::read(b.path().join("spectrum.csv")).unwrap());
}

#[test]
fn monte_carlo_is_reproducible_for_fixed_seed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["mc", "--n", "64", "--kappa", "0.25", "--trajectories", "5000", "--seed", "11", "--bins", "20", "--reset-period", "10"];
    ok(a.path(), &args);
    ok(b.path(), &[&["--jobs", "2"], &args[..]].concat());
    assert_eq!(fs::read(a.path().join("histogram.csv")).unwrap(), fs::read(b.path().join("histogram.csv")).unwrap());
    let m = json(&a.path().join("manifest.json"));
    assert_eq!(m["seeds"][0], 11);
    let s = json(&a.path().join("summary.json"));
    assert!(s["ks_statistic"].as_f64().unwrap() < s["ks_limit_1pct"].as_f64().unwrap());
}

#[test]
fn config_file_fills_flags_and_command_line_wins() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# sizes\nn = 100,1000\nr_bar = 0\ns = 0.5\nepsilon = 0.01\n").unwrap();
    let out = dir.path().join("a");
    ok(&out, &["--config", cfg.to_str().unwrap(), "tau"]);
    assert_eq!(csv_rows(&out.join("tau.csv")).len(), 3);
    assert_eq!(json(&out.join("fit.json"))["epsilon"], 0.01);

    let out = dir.path().join("b");
    ok(&out, &["--config", cfg.to_str().unwrap(), "tau", "--n", "500", "--epsilon", "0.001"]);
    let rows = csv_rows(&out.join("tau.csv"));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][0], "500");
    assert_eq!(json(&out.join("fit.json"))["epsilon"], 0.001);

    let jcfg = dir.path().join("run.json");
    fs::write(&jcfg, r#"{"r_grid": [-1, 0, 2], "s_grid": [0.5, 0.5, 1], "mode": "reset-fast"}"#).unwrap();
    let out = dir.path().join("c");
    ok(&out, &["phase-diagram", "--config", jcfg.to_str().unwrap()]);
    assert_eq!(csv_rows(&out.join("cells.csv")).len(), 3);
    assert_eq!(json(&out.join("metadata.json"))["mode"], "reset-fast");
}

#[test]
fn exit_codes_distinguish_input_and_numerical_failures() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| msearch(dir.path(), args).status.code().unwrap();
    assert_eq!(code(&["reset-scan", "--n", "100"]), 2);
    assert_eq!(code(&["oracle-check", "--n", "5000", "--kappa", "0.1"]), 2);
    assert_eq!(code(&["query", "--r-bar", "0", "--s", "0.5"]), 2);
    assert_eq!(code(&["tau", "--n", "1"]), 2);
    assert_eq!(code(&["tau", "--n", "100", "--kappa", "0"]), 3);
    assert_eq!(code(&["tau", "--n", "100", "--gamma", "0", "--kappa", "0.1"]), 3);
    assert_eq!(code(&["tau"]), 2);
    assert_eq!(code(&["no-such-command"]), 2);
}

#[test]
fn oracle_check_reports_small_deviation() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["oracle-check", "--n", "256", "--gamma", "0.006", "--kappa", "0.09", "--points", "21"]);
    let r = json(&dir.path().join("report.json"));
    assert!(r["max_dev_p"].as_f64().unwrap() < 1e-8);
    assert!(r["max_conservation_residual"].as_f64().unwrap() < 1e-9);
}

#[test]
fn single_point_requests_produce_single_rows() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["tau", "--n", "1000"]);
    assert_eq!(csv_rows(&dir.path().join("tau.csv")).len(), 2);
    ok(dir.path(), &["pt", "--n", "100", "--points", "1", "--t-min", "3"]);
    assert_eq!(csv_rows(&dir.path().join("pt.csv")).len(), 2);
    ok(dir.path(), &["phase-diagram", "--r-grid", "0.5,0.5,1", "--s-grid", "0.5,0.5,1"]);
    let cells = csv_rows(&dir.path().join("cells.csv"));
    assert_eq!(cells.len(), 2);
    assert_eq!(cells[1][2], "B");
    assert_eq!(cells[1][3], "2.5");
}

#[test]
fn reset_scan_shows_crossing_below_one() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["reset-scan", "--n", "1000", "--gamma-bar", "0.9", "--r-bar", "0", "--s", "0.5", "--periods", "0.1,200,40"]);
    let rows = csv_rows(&dir.path().join("reset_scan.csv"));
    let ratios: Vec<f64> = rows[1..].iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(ratios.iter().any(|&r| r < 1.0) && ratios.iter().any(|&r| r > 1.0));
}
