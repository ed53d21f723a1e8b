//! End-to-end runs of the `stefan-sim` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Workspace {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn config(&self, name: &str, body: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    fn out(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stefan-sim"))
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .env("STEFAN_SIM_THREADS", "1")
        .output()
        .unwrap()
}

fn summary(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap()
}

const FLUX: &str = r#"{
    "schema_version": 1,
    "mode": "solve_flux",
    "dimensionless": {"a": 1.0, "alpha0": 0.5, "nu": 0.5, "qstar": 1.0, "m": 0.5},
    "model": {"kind": "constant"}
}"#;

#[test]
fn csv_profile_has_header_and_one_row_per_node() {
    let ws = Workspace::new();
    let cfg = ws.config("flux.json", FLUX);
    let out = ws.out("run");
    let o = run(&cfg, &out, &["--quiet"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let csv = std::fs::read_to_string(out.join("profile.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 258);
    assert_eq!(lines[0], "eta,u2,theta");
    let first: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first[0], 0.5);
    let last: Vec<f64> = lines[257].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last[1], 0.0);
    // Melt isotherm: θ = θ_m (u + 1) with the default θ_m = 1.
    assert_eq!(last[2], 1.0);
    for line in &lines[1..] {
        for field in line.split(',') {
            let digits = field.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(digits.len(), 17, "{field}");
        }
    }
}

#[test]
fn json_profile_round_trips_xi_exactly() {
    let ws = Workspace::new();
    let cfg = ws.config("flux.json", FLUX);
    let out = ws.out("run");
    let o = run(&cfg, &out, &["--format", "json", "--quiet"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(out.join("profile.json")).unwrap()).unwrap();
    let xi_profile = doc["summary"]["xi"].as_f64().unwrap();
    let xi_summary = summary(&out)["xi"].as_f64().unwrap();
    let cfg_value = stefan_core::cli::ScenarioConfig::from_json(FLUX).unwrap();
    let direct = stefan_core::cli::execute(&cfg_value, 1).unwrap();
    let xi_direct = direct.summary.get("xi").unwrap().as_f64().unwrap();
    assert_eq!(xi_profile.to_bits(), xi_direct.to_bits());
    assert_eq!(xi_summary.to_bits(), xi_direct.to_bits());
    assert_eq!(doc["eta"].as_array().unwrap().len(), 257);
    assert_eq!(doc["eta"][256].as_f64().unwrap().to_bits(), xi_direct.to_bits());
}

#[test]
fn vapor_mode_with_direct_coefficients() {
    let ws = Workspace::new();
    let cfg = ws.config(
        "vapor.json",
        r#"{"schema_version": 1, "mode": "vapor", "vapor": {"d": 3.0, "e": -4.0}}"#,
    );
    let out = ws.out("run");
    let o = run(&cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("alpha0=1"));
    assert_eq!(summary(&out)["alpha0"].as_f64(), Some(1.0));
    assert!(!out.join("profile.csv").exists());
}

#[test]
fn solve_flux_agrees_with_closed_form_mode() {
    let ws = Workspace::new();
    let cfg = ws.config("flux.json", FLUX);
    let (a, b) = (ws.out("solve"), ws.out("closed"));
    assert_eq!(run(&cfg, &a, &["--quiet"]).status.code(), Some(0));
    assert_eq!(
        run(&cfg, &b, &["--quiet", "--mode", "closed_form"]).status.code(),
        Some(0)
    );
    let (sa, sb) = (summary(&a), summary(&b));
    assert_eq!(sb["mode"], "closed_form");
    assert!((sa["xi"].as_f64().unwrap() - sb["xi"].as_f64().unwrap()).abs() < 1e-8);
    assert_eq!(sa["iterations"].as_u64(), Some(2));
}

#[test]
fn physical_input_takes_alpha0_from_the_vapour_zone() {
    let ws = Workspace::new();
    let cfg = ws.config(
        "phys.json",
        r#"{
            "schema_version": 1,
            "mode": "solve_convective",
            "physical": {
                "lambda0": 1.0, "c0": 1.0, "rho0": 1.0,
                "theta_m": 1.0, "theta_b": 6.0, "theta_im": 5.0, "theta_star": 0.5,
                "l_m": 0.25, "l_b": 4.0, "gamma_m": 1.0, "gamma_b": 1.0,
                "p0": 2.0, "nu": 0.5
            },
            "model": {"kind": "linear", "alpha": 0.1, "beta": 0.1}
        }"#,
    );
    let out = ws.out("run");
    let o = run(&cfg, &out, &["--quiet"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    assert_eq!(s["alpha0"], s["vapor"]["alpha0"]);
    assert!(s["xi"].as_f64().unwrap() > s["alpha0"].as_f64().unwrap());
    assert!(s["residuals"]["stefan"].as_f64().unwrap().abs() < 1e-5);
}

#[test]
fn verify_mode_writes_a_comparison_table() {
    let ws = Workspace::new();
    let cfg = ws.config("flux.json", FLUX);
    let out = ws.out("run");
    let o = run(&cfg, &out, &["--quiet", "--mode", "verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(out.join("comparison.csv")).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[1].starts_with("pipeline,"));
    assert!(rows[2].starts_with("oracle,"));
    assert!(rows[3].starts_with("constant_flux,"));
    assert_eq!(summary(&out)["verified"], true);
}

#[test]
fn configuration_errors_exit_with_status_one() {
    let ws = Workspace::new();
    let bad_nu = ws.config(
        "nu.json",
        r#"{"schema_version": 1, "mode": "solve_flux",
            "dimensionless": {"a": 1.0, "alpha0": 0.5, "nu": 1.5, "qstar": 1.0, "m": 0.5}}"#,
    );
    let o = run(&bad_nu, &ws.out("a"), &[]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("`nu`") && err.contains("0 < nu < 1"), "{err}");
    assert!(!ws.out("a").join("summary.json").exists());

    let o = run(&ws.out("missing.json"), &ws.out("b"), &[]);
    assert_eq!(o.status.code(), Some(1));

    let typo = ws.config(
        "typo.json",
        "{\"schema_version\": 1,\n \"mode\": \"solve_flux\",\n \"dimensionles\": {}}",
    );
    let o = run(&typo, &ws.out("c"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    let cfg = ws.config("flux.json", FLUX);
    let o = Command::new(env!("CARGO_BIN_EXE_stefan-sim"))
        .args(["--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(ws.out("d"))
        .env("STEFAN_SIM_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("STEFAN_SIM_THREADS"));
}

#[test]
fn solver_failures_exit_with_status_two() {
    let ws = Workspace::new();
    // a p* Ste / 2 below α₀: the melt front cannot leave the boiling front.
    let no_front = ws.config(
        "nofront.json",
        r#"{"schema_version": 1, "mode": "solve_convective",
            "dimensionless": {"a": 0.5, "alpha0": 1.0, "nu": 0.5, "pstar": 0.5, "ste": 0.5}}"#,
    );
    let o = run(&no_front, &ws.out("a"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error[solver]"));

    let stalled = ws.config(
        "stalled.json",
        r#"{"schema_version": 1, "mode": "solve_convective",
            "dimensionless": {"a": 1.0, "alpha0": 0.5, "nu": 0.5, "pstar": 1.0, "ste": 2.0},
            "model": {"kind": "linear", "alpha": 1.0, "beta": 1.0},
            "solver": {"max_iter": 1}}"#,
    );
    let o = run(&stalled, &ws.out("b"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("did not converge"));
}
