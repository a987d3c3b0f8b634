use std::process::{Command, Output};

use serde_json::Value;
use vbsprep::analysis::verify::{data_register, reference_vbs_state};
use vbsprep::circuits::exec::{simulate, SimMode};
use vbsprep::circuits::qasm::{parse_qasm, OpaqueRegistry};
use vbsprep::lattice::{build_chain, ChainBoundary};

fn vbsprep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vbsprep"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn check<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check {name}"))
}

#[test]
fn prepare_open_chain_reports_norm() {
    let out = vbsprep(&["prepare", "--spin", "2", "--lattice", "chain:4:open:aligned", "--method", "probabilistic"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    // (3/4)^4 - (1/4)^4 = 80/256
    let p = r["analytic"]["success_probability_closed_form"].as_f64().unwrap();
    assert!((p - 80.0 / 256.0).abs() < 1e-12);
    let sim = r["simulated"]["success_probability"].as_f64().unwrap();
    assert!((sim - 0.3125).abs() < 1e-10);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["method"], "probabilistic");
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn prepare_lcu_three_link_pair() {
    let out = vbsprep(&["prepare", "--spin", "3", "--lattice", "three-link-pair", "--method", "lcu"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let c = check(&r, "fidelity_reference");
    assert!((c["actual"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert_eq!(c["pass"], true);
}

#[test]
fn mps_with_spin_three_halves_is_rejected() {
    let out = vbsprep(&["prepare", "--spin", "3", "--lattice", "three-link-pair", "--method", "mps"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("spin"));
}

#[test]
fn exit_codes_are_distinct() {
    let usage = vbsprep(&["prepare"]);
    assert_eq!(usage.status.code(), Some(2));
    let cfg = vbsprep(&["prepare", "--lattice", "chain:3:ring", "--method", "teleport"]);
    assert_eq!(cfg.status.code(), Some(3));
    let cap = vbsprep(&["prepare", "--lattice", "chain:7:ring", "--method", "mps"]);
    assert_eq!(cap.status.code(), Some(3));
    let lat = vbsprep(&["prepare", "--lattice", "square:4"]);
    assert_eq!(lat.status.code(), Some(4));
    let odd = vbsprep(&["prepare", "--lattice", "chain:3:ring", "--method", "islands"]);
    assert_eq!(odd.status.code(), Some(4));
    let io = vbsprep(&["prepare", "--lattice", "chain:2:ring", "--out", "/nonexistent/dir/r.json"]);
    assert_eq!(io.status.code(), Some(6));
    let emit = vbsprep(&["emit-qasm", "--lattice", "three-link-pair", "--qasm-mode", "basis"]);
    assert_eq!(emit.status.code(), Some(7));
}

#[test]
fn shots_are_tallied() {
    let out = vbsprep(&["prepare", "--lattice", "chain:3:ring", "--shots", "2000", "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["shots"]["shots"], 2000);
    assert_eq!(r["shots"]["seed"], 5);
    assert!(check(&r, "success_rate_abs_z")["actual"].as_f64().unwrap() <= 3.0);
}

#[test]
fn verify_open_chain_five() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.json");
    let out = vbsprep(&[
        "verify",
        "--spin",
        "2",
        "--lattice",
        "chain:5:open:aligned",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let projectors: Vec<&Value> = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["name"].as_str().unwrap().starts_with("projector_"))
        .collect();
    assert_eq!(projectors.len(), 4);
    for c in projectors {
        assert!(c["actual"].as_f64().unwrap() <= 1e-10);
    }
    assert!((r["simulated"]["energy"].as_f64().unwrap() + 8.0 / 3.0).abs() < 1e-10);
    assert!(r["simulated"]["fidelity_vs_mps"].as_f64().unwrap() > 1.0 - 1e-10);
}

#[test]
fn verify_ring_norm() {
    let out = vbsprep(&["verify", "--lattice", "chain:4:ring"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let c = check(&r, "norm_closed_form");
    let expected = 0.75f64.powi(4) + 3.0 * 0.25f64.powi(4);
    assert!((c["actual"].as_f64().unwrap() - expected).abs() < 1e-12);
}

#[test]
fn resources_grid() {
    let out = vbsprep(&["resources"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let depths: Vec<u64> = text
        .lines()
        .skip(1)
        .take(8)
        .map(|l| l.split_whitespace().nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(depths, vec![8, 11, 10, 17, 27, 45, 51, 105]);
    assert!(text.contains("414 total cnots"));
}

#[test]
fn resources_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("res.json");
    let out = vbsprep(&["resources", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r["depth_grid"].as_array().unwrap().len(), 8);
    assert_eq!(r["lcu_spin2"]["cswaps"], 46);
}

#[test]
fn basis_qasm_round_trip_spin_one() {
    let out = vbsprep(&["emit-qasm", "--spin", "2", "--lattice", "chain:3:open:aligned", "--qasm-mode", "basis"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.contains("opaque"));
    let circuit = parse_qasm(&text, &OpaqueRegistry::new()).unwrap();
    let r = simulate(&circuit, SimMode::PostSelect).unwrap();
    // (3/4)^3 - (-1/4)^3
    assert!((r.postselect_probability - 28.0 / 64.0).abs() < 1e-10);
    let lattice = build_chain(3, ChainBoundary::ALIGNED).unwrap();
    let (reference, _) = reference_vbs_state(&lattice).unwrap();
    let data = data_register(&r.state, 6, None).unwrap();
    assert!(data.fidelity(&reference).unwrap() > 1.0 - 1e-10);
}

#[test]
fn structural_qasm_spin_three_halves_has_opaque() {
    let out = vbsprep(&["emit-qasm", "--spin", "3", "--lattice", "three-link-pair"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("OPENQASM 2.0;"));
    assert!(text.lines().any(|l| l.starts_with("opaque ")));
}

#[test]
fn same_seed_byte_identical() {
    let args = ["prepare", "--lattice", "chain:4:ring", "--method", "retry", "--shots", "500", "--seed", "42"];
    let a = vbsprep(&args);
    let b = vbsprep(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = vbsprep(&["prepare", "--lattice", "chain:4:ring", "--method", "retry", "--shots", "500", "--seed", "43"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn linear_coupling_routes() {
    let out = vbsprep(&["prepare", "--lattice", "chain:3:open:anti", "--coupling", "linear"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert!(check(&r, "fidelity_routed")["actual"].as_f64().unwrap() > 1.0 - 1e-12);
}

#[test]
fn vbs_max_qubits_cap() {
    let out = Command::new(env!("CARGO_BIN_EXE_vbsprep"))
        .args(["prepare", "--lattice", "chain:4:ring"])
        .env("VBS_MAX_QUBITS", "4")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}
