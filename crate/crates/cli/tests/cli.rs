use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use prandtl_cli::RunConfig;
use proptest::prelude::*;
use serde_json::Value;

fn prandtl(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prandtl")).args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn json_file(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).unwrap_or_else(|_| panic!("stderr is not JSON: {}", String::from_utf8_lossy(&o.stderr)))
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn blasius_default_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = prandtl(&["blasius"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let a = json_file(&dir.path().join("blasius.json"));
    let b0 = f(&a["result"]["b0"]);
    assert!((0.4695..=0.4697).contains(&b0), "{b0}");
    assert!(f(&a["result"]["residual"]) < 1e-10);
    assert_eq!(a["config"]["blasius"]["z_max"], 10.0);
    let csv = fs::read_to_string(dir.path().join("blasius_profile.csv")).unwrap();
    assert!(csv.starts_with("z,f,fp,fpp\n") && !csv.contains('\r'));
}

#[test]
fn short_truncation_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = prandtl(&["blasius", "--z-max", "2"], dir.path());
    assert_ne!(o.status.code(), Some(0));
    let e = stderr_json(&o);
    assert!(e["error"]["message"].as_str().unwrap().contains("z_max"));
}

#[test]
fn step_halving_shows_fourth_order_drift() {
    let dir = tempfile::tempdir().unwrap();
    let b0: Vec<f64> = ["0.025", "0.0125", "0.00625"]
        .iter()
        .map(|h| {
            let o = prandtl(&["blasius", "--step", h, "--residual-tol", "1e-4", "--shoot-tol", "1e-12"], dir.path());
            assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
            f(&json_file(&dir.path().join("blasius.json"))["result"]["b0"])
        })
        .collect();
    let ratio = (b0[0] - b0[1]) / (b0[1] - b0[2]);
    assert!((12.0..=20.0).contains(&ratio), "drift ratio {ratio}");
}

#[test]
fn eigen_default_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = prandtl(&["eigen"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let r = &json_file(&dir.path().join("eigen.json"))["result"];
    let l = f(&r["lambda1"]);
    assert!((0.995..=1.005).contains(&l), "{l}");
    let csv = fs::read_to_string(dir.path().join("eigvec.csv")).unwrap();
    assert!(csv.starts_with("psi,v\n"));
    assert_eq!(csv.lines().count(), 1026);
}

#[test]
fn coarse_eigen_run_and_monotone_history() {
    let dir = tempfile::tempdir().unwrap();
    let o = prandtl(&["eigen", "--cells", "64"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let r = &json_file(&dir.path().join("eigen.json"))["result"];
    let l = f(&r["lambda1"]);
    assert!((0.97..=1.03).contains(&l), "{l}");
    let hist: Vec<f64> = r["refine_history"].as_array().unwrap().iter().map(|e| (f(&e[1]) - 1.0).abs()).collect();
    assert!(hist.len() >= 3 && hist.windows(2).all(|w| w[1] < w[0]), "{hist:?}");
}

#[test]
fn malformed_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[eigen\ncells = 64\n").unwrap();
    let o = prandtl(&["eigen", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let e = stderr_json(&o);
    assert_eq!(e["error"]["code"], "config_parse");
    assert!(e["error"]["message"].as_str().unwrap().contains("malformed config"));
}

#[test]
fn equilibrium_smoke_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = prandtl(&["solve", "--preset", "equilibrium"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let r = &json_file(&dir.path().join("solve.json"))["result"];
    assert!(f(&r["final_equilibrium_error"]) < 1e-6);
    assert!(dir.path().join("trajectory.csv").exists() && dir.path().join("guards.csv").exists());
}

#[test]
fn convex_data_trips_fatal_guard() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("convex.csv");
    let mut text = String::from("y,u\n");
    for k in 0..=1200 {
        let y = k as f64 * 0.005;
        text.push_str(&format!("{y},{}\n", (0.2 * y + 0.2 * y * y).min(1.0)));
    }
    fs::write(&path, text).unwrap();
    let o = prandtl(&["solve", "--inflow-csv", path.to_str().unwrap(), "--fatal-guards", "--concavity-guard"], dir.path());
    assert_eq!(o.status.code(), Some(4));
    let e = stderr_json(&o);
    assert_eq!(e["error"]["code"], "guard_violation");
    assert!(e["error"]["message"].as_str().unwrap().contains("concav"));
}

#[test]
fn shifted_oracle_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = prandtl(&["solve", "--preset", "shifted_s4"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let r = &json_file(&dir.path().join("solve.json"))["result"];
    assert!(f(&r["final_oracle_error"]) < 5e-4);
}

#[test]
fn decay_report_slopes_for_shifted_preset() {
    let dir = tempfile::tempdir().unwrap();
    let o = prandtl(&["decay", "--preset", "shifted_s4"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let r = &json_file(&dir.path().join("decay.json"))["result"];
    assert_eq!(r["schema"], 1);
    let s00 = f(&r["slopes"]["00"]["fit"]["slope"]);
    let s01 = f(&r["slopes"]["01"]["fit"]["slope"]);
    assert!((s00 + 1.0).abs() <= 0.05, "slope_00 = {s00:.4}");
    assert!((s01 + 1.5).abs() <= 0.08, "slope_01 = {s01:.4}");
}

#[test]
fn decay_artifacts_are_complete() {
    let dir = tempfile::tempdir().unwrap();
    let o = prandtl(&["decay", "--preset", "shifted_s1.2"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let header = fs::read_to_string(dir.path().join("norms.csv")).unwrap();
    assert!(header.starts_with("x,norm_00,norm_01,norm_02,norm_10\n"));
    assert!(dir.path().join("loglog.csv").exists() && dir.path().join("weighted.csv").exists());
    let r = &json_file(&dir.path().join("decay.json"))["result"];
    let stations: Vec<f64> = r["stations"].as_array().unwrap().iter().map(f).collect();
    assert!(stations.windows(2).all(|w| w[1] > w[0]));
    for key in ["00", "01", "02", "10"] {
        assert!(r["slopes"][key]["fit"]["residual"].is_number());
    }
}

#[test]
fn empty_station_list_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[decay]\nstations = []\n").unwrap();
    let o = prandtl(&["decay", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"]["code"], "too_few_stations");
}

#[test]
fn artifacts_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let names = ["decay.json", "norms.csv", "weighted.csv"];
    let read = || names.map(|n| fs::read(dir.path().join(n)).unwrap());
    prandtl(&["decay", "--preset", "tanh", "--seed", "11"], dir.path());
    let first = read();
    prandtl(&["decay", "--preset", "tanh", "--seed", "11"], dir.path());
    assert_eq!(first, read());

    prandtl(&["eigen", "--cells", "128", "--refine", "64,128"], dir.path());
    let e1 = fs::read(dir.path().join("eigen.json")).unwrap();
    prandtl(&["eigen", "--cells", "128", "--refine", "64,128"], dir.path());
    assert_eq!(e1, fs::read(dir.path().join("eigen.json")).unwrap());
}

#[test]
fn sweep_writes_one_directory_per_preset() {
    let dir = tempfile::tempdir().unwrap();
    let o = prandtl(&["solve", "--preset", "all", "--xi-end", "1", "--workers", "3"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    for name in ["shifted_s0.5", "shifted_s4", "tanh", "erf", "sine_w3"] {
        assert!(dir.path().join(name).join("solve.json").exists(), "{name}");
    }
    let sweep = json_file(&dir.path().join("sweep.json"));
    assert_eq!(sweep["result"].as_array().unwrap().len(), 7);
}

#[test]
fn sharpness_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = prandtl(&["sharpness", "--preset", "shifted_s2", "--window-lo", "200", "--window-hi", "2000"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let r = &json_file(&dir.path().join("sharpness.json"))["result"];
    assert_eq!(json_file(&dir.path().join("sharpness.json"))["config"]["sharpness"]["s"], 2.0);
    let s10 = f(&r["slopes"]["10"]["fit"]["slope"]);
    assert!((s10 + 2.0).abs() < 0.05, "{s10}");
}

#[test]
fn failure_paths_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let missing = p.join("missing.toml");
    let cases: Vec<(Vec<&str>, i32)> = vec![
        (vec!["eigen", "--cells", "many"], 2),
        (vec!["eigen", "--config", missing.to_str().unwrap()], 2),
        (vec!["solve", "--preset", "gaussian"], 2),
        (vec!["eigen", "--preset", "tanh"], 2),
        (vec!["eigen", "--cells", "16"], 2),
        (vec!["eigen", "--tol", "1e-15"], 2),
        (vec!["eigen", "--psi-max", "40"], 2),
        (vec!["eigen", "--seed", "18446744073709551615"], 2),
    ];
    let mut codes = Vec::new();
    for (args, status) in &cases {
        let o = prandtl(args, p);
        assert_eq!(o.status.code(), Some(*status), "{args:?}");
        let e = stderr_json(&o);
        assert_eq!(e["error"]["exit"], *status);
        codes.push(e["error"]["code"].as_str().unwrap().to_string());
    }
    for want in ["usage", "config_read", "unknown_preset", "invalid_override", "invalid_parameter"] {
        assert!(codes.iter().any(|c| c == want), "{want} missing from {codes:?}");
    }
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "seed = 3\n[eigen]\ncells = 128\nrefine = [64, 128]\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_prandtl"))
        .args(["eigen", "--config", cfg.to_str().unwrap(), "--cells", "64", "--print-config"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let c = RunConfig::parse(std::str::from_utf8(&o.stdout).unwrap()).unwrap();
    assert_eq!((c.seed, c.eigen.cells, c.eigen.refine.clone()), (3, 64, vec![64, 128]));
}

#[test]
fn printed_config_is_canonical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "# comment\n[sharpness]\nd = 1.0\ns = 2.5\n\n[solve]\npreset = 'tanh'\nguards = { fatal = true, comparison = true, wall_slope = true, concavity = false }\n").unwrap();
    let print = |path: &Path| {
        let o = Command::new(env!("CARGO_BIN_EXE_prandtl")).args(["solve", "--config", path.to_str().unwrap(), "--print-config"]).output().unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        o.stdout
    };
    let first = print(&cfg);
    let again = dir.path().join("canonical.toml");
    fs::write(&again, &first).unwrap();
    assert_eq!(first, print(&again));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn config_round_trips(seed in 0..=i64::MAX as u64, cells in 64usize..4096, tol in 1e-12f64..1e-3, psi in proptest::option::of(1.0f64..12.0),
                          window in (0.5f64..10.0, 20.0f64..500.0), refine in proptest::collection::vec(64usize..2048, 0..6),
                          stations in proptest::option::of(proptest::collection::vec(0.0f64..100.0, 0..8))) {
        let mut c = RunConfig::default();
        c.seed = seed;
        c.eigen.cells = cells;
        c.eigen.tol = tol;
        c.eigen.psi_max = psi;
        c.eigen.refine = refine;
        c.decay.window = window;
        c.decay.stations = stations;
        c.sharpness.s = window.0;
        let text = c.canonical().unwrap();
        let back = RunConfig::parse(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.canonical().unwrap(), text);
    }
}
