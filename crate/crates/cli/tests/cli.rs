use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn revdiss(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_revdiss"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("REVDISS_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], out: &Path) -> Value {
    let o = revdiss(args, out);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn eigen_flags_ep_near_odd_phase() {
    let dir = TempDir::new().unwrap();
    let s = ok(
        &[
            "eigen",
            "--model",
            "effective",
            "--G",
            "10",
            "--J",
            "10",
            "--theta",
            "1.5707963",
        ],
        dir.path(),
    );
    assert_eq!(s["ep"], true);
    let csv = fs::read_to_string(dir.path().join("eigen.csv")).unwrap();
    assert!(csv.starts_with("source,branch,re,im,discrepancy\n"));
    assert_eq!(csv.lines().count(), 3);
    assert!(dir.path().join("eigen.json").exists());
}

#[test]
fn eigen_away_from_ep_is_not_flagged() {
    let dir = TempDir::new().unwrap();
    let s = ok(&["eigen", "--theta-over-halfpi", "0"], dir.path());
    assert_eq!(s["ep"], false);
}

#[test]
fn eigen_compare_full_adds_three_numeric_branches() {
    let dir = TempDir::new().unwrap();
    let s = ok(&["eigen", "--compare-full", "--lift", "resonant"], dir.path());
    let csv = fs::read_to_string(dir.path().join("eigen.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| l.starts_with("full-numeric")).count(), 3);
    assert!(s["adiabatic_error"].as_f64().unwrap() < 0.1 * 10.0);
}

#[test]
fn ring_eigen_reports_both_forms_and_discrepancy() {
    let dir = TempDir::new().unwrap();
    let s = ok(
        &["eigen", "--model", "ring", "--closed-form", "paper,circulant"],
        dir.path(),
    );
    let csv = fs::read_to_string(dir.path().join("eigen.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| l.starts_with("ring-as-published")).count(), 3);
    assert_eq!(csv.lines().filter(|l| l.starts_with("ring-circulant")).count(), 3);
    assert!(s["discrepancy"]["max"].as_f64().unwrap() > 1.0);
}

#[test]
fn malformed_config_names_key_and_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[model.effective]\nG = 10\nJay = 3\n").unwrap();
    let out = dir.path().join("out");
    let o = revdiss(&["eigen", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Jay"));
    assert!(!out.exists());
}

#[test]
fn two_model_sections_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("two.toml");
    fs::write(&cfg, "[model.effective]\nG = 10\n[model.ring]\nG = 10\n").unwrap();
    let o = revdiss(&["eigen", "--config", cfg.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn invalid_parameter_exits_one() {
    let dir = TempDir::new().unwrap();
    let o = revdiss(&["eigen", "--J", "-1"], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn config_values_apply_and_flags_override() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("ring.toml");
    fs::write(
        &cfg,
        "units = \"kappa_i\"\n[model.ring]\nkappa = 1000\nG = 10\nJ = 10\ntheta_over_halfpi = 1\n[sweep]\ndelta_min = -50\ndelta_max = 50\npoints = 11\n",
    )
    .unwrap();
    let s = ok(
        &[
            "smatrix",
            "--config",
            cfg.to_str().unwrap(),
            "--pair",
            "21",
            "--pair",
            "12",
        ],
        dir.path(),
    );
    assert_eq!(s["model"], "ring");
    assert_eq!(s["points"], 11);
    let ratio = s["pairs"]["S12"]["max_abs"].as_f64().unwrap() / s["pairs"]["S21"]["max_abs"].as_f64().unwrap();
    assert!(ratio > 40.0, "contrast {ratio}");

    let s = ok(
        &[
            "smatrix",
            "--config",
            cfg.to_str().unwrap(),
            "--pair",
            "21",
            "--points",
            "7",
        ],
        dir.path(),
    );
    assert_eq!(s["points"], 7);
}

#[test]
fn smatrix_s41_vanishes_at_odd_ep_on_exact_grid() {
    let dir = TempDir::new().unwrap();
    ok(
        &[
            "smatrix",
            "--pair",
            "41",
            "--pair",
            "14",
            "--theta-over-halfpi",
            "1",
            "--delta-range",
            "-110",
            "110",
            "--points",
            "2001",
        ],
        dir.path(),
    );
    let (header, rows) = read_csv(&dir.path().join("S41.csv"));
    assert_eq!(header, ["delta", "re", "im", "abs"]);
    assert_eq!(rows.len(), 2001);
    assert_eq!(rows[0][0], -110.0);
    assert_eq!(rows[2000][0], 110.0);
    assert!(rows.iter().all(|r| r[3] == 0.0));
    let (_, back) = read_csv(&dir.path().join("S14.csv"));
    assert!(back.iter().any(|r| r[3] > 0.5));
    assert!(dir.path().join("S41.meta.json").exists());
}

#[test]
fn ring_pole_rows_flagged_and_run_continues() {
    let dir = TempDir::new().unwrap();
    ok(
        &[
            "smatrix",
            "--model",
            "ring",
            "--kappa",
            "1e-15",
            "--J",
            "0",
            "--delta-range",
            "-20",
            "20",
            "--points",
            "5",
            "--pair",
            "21",
            "--all-ports",
        ],
        dir.path(),
    );
    let (header, rows) = read_csv(&dir.path().join("S21.csv"));
    assert_eq!(header.last().unwrap(), "pole");
    let flagged: Vec<f64> = rows.iter().filter(|r| r[4] == 1.0).map(|r| r[0]).collect();
    assert_eq!(flagged, [-20.0, 10.0]);
    assert!(rows.iter().filter(|r| r[4] == 0.0).all(|r| r[3].is_finite()));
    let all: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("smatrix.json")).unwrap()).unwrap();
    assert_eq!(all["records"].as_array().unwrap().len(), 5);
}

#[test]
fn smatrix_rejects_unknown_pair() {
    let dir = TempDir::new().unwrap();
    let o = revdiss(&["smatrix", "--pair", "31"], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn ep_find_default_box_has_four_alternating() {
    let dir = TempDir::new().unwrap();
    let s = ok(&["ep-find"], dir.path());
    assert_eq!(s["count"], 4);
    let eps: Vec<Value> = serde_json::from_str(&fs::read_to_string(dir.path().join("eps.json")).unwrap()).unwrap();
    let parities: Vec<&str> = eps.iter().map(|e| e["parity"].as_str().unwrap()).collect();
    assert_eq!(parities, ["odd", "even", "odd", "even"]);
    for e in &eps {
        assert!((e["j_over_g"].as_f64().unwrap() - 1.0).abs() < 1e-6);
        assert!(e["eigengap"].as_f64().unwrap() <= 1e-5);
    }
}

#[test]
fn ep_find_empty_box_gives_empty_array() {
    let dir = TempDir::new().unwrap();
    ok(&["ep-find", "--theta-range", "0.1", "0.2"], dir.path());
    let text = fs::read_to_string(dir.path().join("eps.json")).unwrap();
    assert_eq!(text.trim(), "[]");
}

#[test]
fn ep_find_ring_order_three_labels_both_sources() {
    let dir = TempDir::new().unwrap();
    let s = ok(&["ep-find", "--order", "3", "--model", "ring"], dir.path());
    assert_eq!(s["result"]["defective"]["count"], 0);
    let published = s["result"]["as_published"]["points"].as_array().unwrap();
    assert!(!published.is_empty());
    assert!(published
        .iter()
        .all(|p| p["source"] == "ring-as-published" && p["order"] == 3));
}

#[test]
fn ep_find_order_three_needs_ring() {
    let dir = TempDir::new().unwrap();
    let o = revdiss(&["ep-find", "--order", "3"], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn chirality_spans_both_directions() {
    let dir = TempDir::new().unwrap();
    let s = ok(&["chirality", "--points", "9"], dir.path());
    assert_eq!(s["alpha_min"], -1.0);
    assert_eq!(s["alpha_max"], 1.0);
    let (header, rows) = read_csv(&dir.path().join("chirality.csv"));
    assert_eq!(header, ["theta", "theta_over_halfpi", "alpha", "S41_abs", "S23_abs"]);
    assert_eq!(rows.len(), 9);
}

#[test]
fn bandwidth_full_model_one_column_per_gamma() {
    let dir = TempDir::new().unwrap();
    let s = ok(
        &[
            "bandwidth",
            "--model",
            "full",
            "--gamma-over-g",
            "1,50",
            "--points",
            "801",
        ],
        dir.path(),
    );
    let (header, rows) = read_csv(&dir.path().join("bandwidth.csv"));
    assert_eq!(header, ["delta", "D_gamma1", "D_gamma50", "D_effective"]);
    assert_eq!(rows.len(), 801);
    let narrow = s["curves"]["D_gamma1"]["fwhm"].as_f64().unwrap();
    let wide = s["curves"]["D_gamma50"]["fwhm"].as_f64().unwrap();
    assert!(narrow < wide);
}

#[test]
fn figure_fig5_has_one_column_per_gamma() {
    let dir = TempDir::new().unwrap();
    ok(&["figure", "fig5"], dir.path());
    let (header, _) = read_csv(&dir.path().join("fig5.csv"));
    let gammas = header.iter().filter(|h| h.starts_with("D_gamma")).count();
    assert_eq!(gammas, 6);
    assert!(dir.path().join("fig5.meta.json").exists());
}

#[test]
fn figure_unknown_id_lists_valid_ids() {
    let dir = TempDir::new().unwrap();
    let o = revdiss(&["figure", "fig7"], &dir.path().join("out"));
    assert_ne!(o.status.code(), Some(0));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("fig2a") && err.contains("fig9"), "{err}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    ok(&["figure", "fig4b", "--threads", "1"], a.path());
    ok(&["figure", "fig4b", "--threads", "4"], b.path());
    for name in ["fig4b.csv", "fig4b.meta.json"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn output_dir_from_environment_and_flag_wins() {
    let dir = TempDir::new().unwrap();
    let env_out = dir.path().join("env");
    let o = Command::new(env!("CARGO_BIN_EXE_revdiss"))
        .args(["eigen"])
        .env("REVDISS_OUT_DIR", &env_out)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(env_out.join("eigen.csv").exists());

    let flag_out = dir.path().join("flag");
    let o = Command::new(env!("CARGO_BIN_EXE_revdiss"))
        .args(["eigen", "--out"])
        .arg(&flag_out)
        .env("REVDISS_OUT_DIR", dir.path().join("unused"))
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(flag_out.join("eigen.csv").exists());
    assert!(!dir.path().join("unused").exists());
}
