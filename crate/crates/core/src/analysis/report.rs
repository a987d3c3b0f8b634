//! Run orchestration and the JSON report.

use std::collections::BTreeMap;

use serde::Serialize;

use super::formulas::{mps_ring_success_probability, vbs_norm};
use super::montecarlo::{island_success_probability, monte_carlo_success, sublattice_retry_simulation};
use super::resources::{chain_shape, method_circuit, place_and_route, Method};
use super::verify::{aklt_energy, data_register, projector_residuals, reference_vbs_state};
use crate::circuits::accounting::{cnot_count, cnot_depth};
use crate::circuits::exec::{simulate, SimMode};
use crate::circuits::ir::Circuit;
use crate::error::{Result, VbsError};
use crate::lattice::{heavy_hex_star_layout, ChainBoundary, CouplingKind, Lattice, SiteEncoding, Sublattice};
use crate::mpsprep::{DEFAULT_EMBEDDING_SCALE, MPS_SITE_CAP};
use crate::spinops::SpinValue;
use crate::statesim::Statevector;

/// Version of the report layout.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

pub const FIDELITY_TOL: f64 = 1e-10;
pub const ROUTING_TOL: f64 = 1e-12;
pub const PROBABILITY_TOL: f64 = 1e-10;
pub const PROJECTOR_TOL: f64 = 1e-10;
pub const ENERGY_TOL: f64 = 1e-10;
pub const Z_LIMIT: f64 = 3.0;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: f64,
    pub actual: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    /// `|actual - expected| <= tol`.
    pub fn close(name: impl Into<String>, expected: f64, actual: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            expected,
            actual,
            tol,
            pass: (actual - expected).abs() <= tol,
        }
    }

    /// `actual <= bound`.
    pub fn at_most(name: impl Into<String>, bound: f64, actual: f64) -> Self {
        Check {
            name: name.into(),
            expected: bound,
            actual,
            tol: 0.0,
            pass: actual <= bound,
        }
    }

    /// `actual >= 1 - tol`.
    pub fn fidelity(name: impl Into<String>, actual: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            expected: 1.0,
            actual,
            tol,
            pass: actual >= 1.0 - tol,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ShotTally {
    pub shots: u64,
    pub seed: u64,
    pub successes: u64,
    pub rate: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub method: Method,
    pub lattice: String,
    pub coupling: CouplingKind,
    pub analytic: BTreeMap<String, f64>,
    pub simulated: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots: Option<ShotTally>,
    pub resources: BTreeMap<String, u64>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Validated inputs of a run.
#[derive(Clone, Debug)]
pub struct RunSpec {
    pub lattice: Lattice,
    pub method: Method,
    pub coupling: CouplingKind,
    pub shots: u64,
    pub seed: u64,
}

impl RunSpec {
    /// Checks that method, lattice, coupling and the requested spin fit
    /// together before any simulation.
    pub fn new(
        twice_s: Option<u32>,
        lattice: Lattice,
        method: Method,
        coupling: CouplingKind,
        shots: u64,
        seed: u64,
    ) -> Result<Self> {
        let uniform = lattice.uniform_spin();
        if let Some(t) = twice_s {
            let s = SpinValue::new(t)?;
            if uniform != Some(s) {
                return Err(VbsError::InvalidArgument(format!(
                    "lattice `{}` does not carry uniform spin {s}",
                    lattice.name()
                )));
            }
        }
        match method {
            Method::Mps => {
                if twice_s.is_some_and(|t| t != 2) {
                    return Err(VbsError::UnsupportedSpin(twice_s.unwrap_or(0)));
                }
                match chain_shape(&lattice) {
                    Some((n, _)) if n <= MPS_SITE_CAP => {}
                    Some((n, _)) => {
                        return Err(VbsError::CapExceeded {
                            what: "mps sites",
                            requested: n,
                            cap: MPS_SITE_CAP,
                        })
                    }
                    None => return Err(VbsError::InvalidArgument("mps needs a spin-1 chain".into())),
                }
            }
            Method::MitigatedIslands | Method::MitigatedRetry => {
                lattice.two_coloring()?;
            }
            Method::Probabilistic | Method::Lcu => {}
        }
        if coupling == CouplingKind::HeavyHex {
            let star = heavy_hex_star_layout()?;
            if star.lattice.descriptor() != lattice.descriptor() {
                return Err(VbsError::InvalidArgument(
                    "heavy-hex placement exists only for the heavy-hex-star lattice".into(),
                ));
            }
        }
        Ok(RunSpec {
            lattice,
            method,
            coupling,
            shots,
            seed,
        })
    }
}

/// Output of one method on one lattice.
pub struct MethodRun {
    pub circuit: Circuit,
    pub encoding: SiteEncoding,
    /// Normalized data register.
    pub state: Statevector,
    pub postselect_probability: f64,
    /// Single-attempt success probability of every retry loop.
    pub retry: Vec<f64>,
}

pub fn run_method(method: Method, lattice: &Lattice) -> Result<MethodRun> {
    let (circuit, encoding) = method_circuit(method, lattice)?;
    let r = simulate(&circuit, SimMode::PostSelect)?;
    let state = data_register(&r.state, encoding.n_data, None)?;
    Ok(MethodRun {
        circuit,
        encoding,
        state,
        postselect_probability: r.postselect_probability,
        retry: r.retry,
    })
}

/// Expected post-selection probability of `method`, from closed forms when
/// the lattice is a spin-1 chain and from the reference norm otherwise.
/// The second value names the source.
pub fn expected_success(method: Method, lattice: &Lattice, reference_norm: f64) -> Result<(f64, &'static str)> {
    let shape = chain_shape(lattice);
    let (norm, source) = match shape {
        Some((n, b)) => (vbs_norm(SpinValue::ONE, n, b)?, "closed_form"),
        None => (reference_norm, "reference"),
    };
    Ok(match method {
        Method::Probabilistic | Method::Lcu => (norm, source),
        Method::MitigatedIslands | Method::MitigatedRetry => {
            let colors = lattice.two_coloring()?;
            let mut islands = 1.0;
            for (site, c) in colors.iter().enumerate() {
                if *c == Sublattice::A {
                    islands *= island_success_probability(lattice, site)?;
                }
            }
            (norm / islands, source)
        }
        Method::Mps => match shape {
            Some((n, ChainBoundary::Ring)) => (mps_ring_success_probability(n, DEFAULT_EMBEDDING_SCALE), "closed_form"),
            _ => (1.0, "closed_form"),
        },
    })
}

fn add_resources(report: &mut Report, circuit: &Circuit, spec: &RunSpec, swaps: usize) {
    if let Ok(c) = cnot_count(circuit, spec.coupling) {
        report.resources.insert("cnot_count".into(), c);
    }
    if let Ok(d) = cnot_depth(circuit, spec.coupling) {
        report.resources.insert("cnot_depth".into(), d);
    }
    report.resources.insert("qubits".into(), circuit.n_qubits() as u64);
    report.resources.insert("swaps".into(), swaps as u64);
}

/// Builds, simulates and checks one preparation.
pub fn prepare(spec: &RunSpec) -> Result<Report> {
    let lattice = &spec.lattice;
    let run = run_method(spec.method, lattice)?;
    let (reference, ref_norm) = reference_vbs_state(lattice)?;
    let mut report = Report {
        schema_version: REPORT_SCHEMA_VERSION,
        method: spec.method,
        lattice: lattice.name().to_string(),
        coupling: spec.coupling,
        analytic: BTreeMap::new(),
        simulated: BTreeMap::new(),
        shots: None,
        resources: BTreeMap::new(),
        checks: Vec::new(),
    };
    let (expected, source) = expected_success(spec.method, lattice, ref_norm)?;
    report.analytic.insert(format!("success_probability_{source}"), expected);
    report.analytic.insert("vbs_norm_reference".into(), ref_norm);
    report.simulated.insert("success_probability".into(), run.postselect_probability);
    report.checks.push(Check::close(
        "success_probability",
        expected,
        run.postselect_probability,
        PROBABILITY_TOL,
    ));
    let fid = run.state.fidelity(&reference)?;
    report.simulated.insert("fidelity_reference".into(), fid);
    report.checks.push(Check::fidelity("fidelity_reference", fid, FIDELITY_TOL));
    for (k, p) in run.retry.iter().enumerate() {
        report.simulated.insert(format!("retry_{k}_single_attempt"), *p);
    }

    let routed = place_and_route(&run.circuit, &run.encoding, spec.coupling, None)?;
    add_resources(&mut report, &routed.circuit, spec, routed.swaps.len());
    if spec.coupling != CouplingKind::AllToAll {
        let r = simulate(&routed.circuit, SimMode::PostSelect)?;
        let moved = data_register(&r.state, run.encoding.n_data, Some(&routed.final_placement))?;
        let f = moved.fidelity(&run.state)?;
        report.simulated.insert("fidelity_routed".into(), f);
        report.checks.push(Check::fidelity("fidelity_routed", f, ROUTING_TOL));
    }

    if spec.shots > 0 {
        let mc = monte_carlo_success(&run.circuit, expected, spec.shots, spec.seed)?;
        report.shots = Some(ShotTally {
            shots: mc.shots,
            seed: spec.seed,
            successes: mc.successes,
            rate: mc.rate,
        });
        report.simulated.insert("success_rate".into(), mc.rate);
        report.checks.push(Check::at_most("success_rate_abs_z", Z_LIMIT, mc.z.abs()));
        if spec.method == Method::MitigatedRetry {
            let st = sublattice_retry_simulation(lattice, spec.shots, spec.seed)?;
            report.analytic.insert("expected_rounds".into(), st.expected_rounds);
            report.simulated.insert("mean_rounds".into(), st.mean_rounds);
            report.checks.push(Check::at_most("retry_rounds_max_abs_z", Z_LIMIT, st.max_abs_z));
        }
    }
    Ok(report)
}

/// Ground-state checks on the prepared state plus cross-route fidelities.
pub fn verify(spec: &RunSpec) -> Result<Report> {
    let mut report = prepare(&RunSpec { shots: 0, ..spec.clone() })?;
    let lattice = &spec.lattice;
    let run = run_method(spec.method, lattice)?;
    let residuals = projector_residuals(&run.state, &run.encoding, lattice)?;
    let worst = residuals.iter().map(|r| r.1).fold(0.0, f64::max);
    report.simulated.insert("max_projector_residual".into(), worst);
    for ((a, b), r) in residuals {
        report.checks.push(Check::at_most(format!("projector_{a}_{b}"), PROJECTOR_TOL, r));
    }
    if lattice.uniform_spin() == Some(SpinValue::ONE) {
        let e = aklt_energy(&run.state, &run.encoding, lattice)?;
        let bonds = {
            let mut pairs: Vec<(usize, usize)> = lattice.links().iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
            pairs.sort_unstable();
            pairs.dedup();
            pairs.len()
        };
        let expected = -2.0 * bonds as f64 / 3.0;
        report.analytic.insert("energy".into(), expected);
        report.simulated.insert("energy".into(), e);
        report.checks.push(Check::close("energy", expected, e, ENERGY_TOL));
    }
    if let Some((n, b)) = chain_shape(lattice) {
        let (_, ref_norm) = reference_vbs_state(lattice)?;
        report.checks.push(Check::close("norm_closed_form", vbs_norm(SpinValue::ONE, n, b)?, ref_norm, 1e-12));
    }
    for other in Method::ALL {
        if other == spec.method || !route_applies(other, lattice) {
            continue;
        }
        let o = run_method(other, lattice)?;
        let f = o.state.fidelity(&run.state)?;
        report.simulated.insert(format!("fidelity_vs_{other}"), f);
        report.checks.push(Check::fidelity(format!("fidelity_vs_{other}"), f, FIDELITY_TOL));
    }
    Ok(report)
}

/// Whether `method` can run on `lattice` at desk scale.
pub fn route_applies(method: Method, lattice: &Lattice) -> bool {
    let max_t = (0..lattice.n_sites()).map(|s| lattice.site_qubit_count(s)).max().unwrap_or(0);
    let data = lattice.total_data_qubits();
    match method {
        Method::Probabilistic => data + lattice.n_sites() <= 20,
        Method::MitigatedIslands | Method::MitigatedRetry => {
            lattice.is_bipartite() && data + lattice.n_sites() <= 20
        }
        Method::Lcu => max_t <= 3 && data + 6 <= 20,
        Method::Mps => chain_shape(lattice).is_some_and(|(n, _)| n <= MPS_SITE_CAP),
    }
}
