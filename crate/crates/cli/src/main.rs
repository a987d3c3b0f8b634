//! `vbsprep` command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success, every check passed |
//! | 1 | run finished but at least one check failed |
//! | 2 | command-line usage error |
//! | 3 | invalid configuration (method, spin, coupling or cap) |
//! | 4 | invalid lattice, or one the method cannot use (odd cycle) |
//! | 5 | simulation or numerical failure |
//! | 6 | I/O or serialization failure |
//! | 7 | missing declared cost or non-expandable gate during emission |

mod latspec;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vbsprep::analysis::report::{prepare, verify, Report, RunSpec};
use vbsprep::analysis::resources::{depth_grid, method_circuit, place_and_route, Method};
use vbsprep::circuits::lcu::lcu_resources;
use vbsprep::circuits::qasm::{emit_qasm, QasmMode};
use vbsprep::lattice::CouplingKind;
use vbsprep::VbsError;

#[derive(Parser)]
#[command(name = "vbsprep", version, about = "Prepare and check valence-bond-solid states on a statevector simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build, simulate and check one preparation; writes a JSON report.
    Prepare(RunArgs),
    /// Projector, energy, norm and cross-method checks; writes a JSON report.
    Verify(RunArgs),
    /// Print the CNOT depth grid and the spin-2 LCU totals.
    Resources {
        /// Also write the records as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the circuit as OpenQASM 2.0.
    EmitQasm {
        #[command(flatten)]
        run: RunArgs,
        /// `structural` keeps opaque blocks, `basis` expands them.
        #[arg(long, default_value = "structural")]
        qasm_mode: String,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Twice the site spin (2 for spin 1, 3 for spin 3/2).
    #[arg(long)]
    spin: Option<u32>,
    /// chain:N:open:aligned|anti, chain:N:ring, three-link-pair,
    /// honeycomb:R:C, c3ring:N, heavy-hex-star or file:PATH.
    #[arg(long)]
    lattice: String,
    /// probabilistic, mitigated_islands, mitigated_retry, lcu or mps.
    #[arg(long, default_value = "probabilistic")]
    method: String,
    /// all_to_all, linear or heavy_hex.
    #[arg(long, default_value = "all_to_all")]
    coupling: String,
    /// Monte Carlo shots (0 skips sampling).
    #[arg(long, default_value_t = 0)]
    shots: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    msg: String,
}

impl From<VbsError> for Failure {
    fn from(e: VbsError) -> Self {
        let code = match &e {
            VbsError::InvalidArgument(_)
            | VbsError::UnsupportedSpin(_)
            | VbsError::CapExceeded { .. }
            | VbsError::EmbeddingScale { .. } => 3,
            VbsError::InvalidLattice(_) | VbsError::OddCycle { .. } => 4,
            VbsError::Io(_) | VbsError::Json(_) => 6,
            VbsError::MissingDeclaredCost { .. } | VbsError::UnexpandableOpaque(_) => 7,
            _ => 5,
        };
        Failure { code, msg: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 6, msg: e.to_string() }
    }
}

fn run_spec(a: &RunArgs) -> Result<RunSpec, Failure> {
    let lattice = latspec::parse_lattice(&a.lattice)?;
    let method: Method = a.method.parse()?;
    let coupling: CouplingKind = a.coupling.parse()?;
    Ok(RunSpec::new(a.spin, lattice, method, coupling, a.shots, a.seed)?)
}

fn write_out(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_report(report: &Report, out: &Option<PathBuf>) -> Result<u8, Failure> {
    let mut text = report.to_json()?;
    text.push('\n');
    write_out(out, &text)?;
    for c in report.failures() {
        eprintln!("FAIL {}: expected {} got {} (tol {})", c.name, c.expected, c.actual, c.tol);
    }
    Ok(if report.passed() { 0 } else { 1 })
}

fn cmd_resources(out: &Option<PathBuf>) -> Result<u8, Failure> {
    let grid = depth_grid()?;
    println!("{:<6} {:<18} {:<11} {:>6} {:>6} {:>6}", "2S", "method", "coupling", "depth", "cnots", "swaps");
    for r in &grid {
        let count = r.cnot_count.map_or_else(|| "-".to_string(), |c| c.to_string());
        println!(
            "{:<6} {:<18} {:<11} {:>6} {:>6} {:>6}",
            r.twice_s,
            r.method.name(),
            r.coupling.name(),
            r.cnot_depth,
            count,
            r.swaps
        );
    }
    let lcu = lcu_resources(4)?;
    println!(
        "lcu 2S=4: {} cswaps, {} cswap cnots, {} w-state cnots, {} total cnots",
        lcu.cswaps, lcu.cswap_cnots, lcu.w_state_cnots, lcu.total_cnots
    );
    if out.is_some() {
        let doc = serde_json::json!({ "depth_grid": grid, "lcu_spin2": {
            "cswaps": lcu.cswaps,
            "cswap_cnots": lcu.cswap_cnots,
            "w_state_cnots": lcu.w_state_cnots,
            "total_cnots": lcu.total_cnots,
        }});
        let mut text = serde_json::to_string_pretty(&doc).map_err(VbsError::from)?;
        text.push('\n');
        write_out(out, &text)?;
    }
    Ok(0)
}

fn cmd_emit(a: &RunArgs, mode: &str) -> Result<u8, Failure> {
    let spec = run_spec(a)?;
    let mode: QasmMode = mode.parse()?;
    let (circuit, enc) = method_circuit(spec.method, &spec.lattice)?;
    let circuit = if spec.coupling == CouplingKind::AllToAll {
        circuit
    } else {
        place_and_route(&circuit, &enc, spec.coupling, None)?.circuit
    };
    write_out(&a.out, &emit_qasm(&circuit, mode)?)?;
    Ok(0)
}

fn dispatch(cli: Cli) -> Result<u8, Failure> {
    match cli.cmd {
        Cmd::Prepare(a) => emit_report(&prepare(&run_spec(&a)?)?, &a.out),
        Cmd::Verify(a) => emit_report(&verify(&run_spec(&a)?)?, &a.out),
        Cmd::Resources { out } => cmd_resources(&out),
        Cmd::EmitQasm { run, qasm_mode } => cmd_emit(&run, &qasm_mode),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
