//! Circuit IR, builders, accounting, routing, QASM and execution.

pub mod accounting;
pub mod builders;
pub mod costs;
pub mod exec;
pub mod ir;
pub mod lcu;
pub mod qasm;
pub mod routing;
pub mod schmidt;

pub use accounting::{cnot_count, cnot_depth};
pub use builders::{
    cswap_gate, fredkin_fragment, hadamard_test_fragment, island_block, island_of, islands_method_circuit,
    permutation_circuits, pre_vbs_circuit, probabilistic_method_circuit, retry_method_circuit,
    swap_sequence_operator, valence_bond_subcircuit, w_block_angle, w_state_circuit,
};
pub use exec::{circuit_unitary, simulate, simulate_from, SimMode, SimResult};
pub use ir::{Circuit, CostKey, DeclaredCost, Gate, OpaqueGate};
pub use lcu::{lcu_method_circuit, lcu_resources, lcu_symmetrization_circuit, LcuResources, LcuVariant};
pub use qasm::{emit_qasm, parse_qasm, registry_of, QasmMode};
pub use routing::{route, RoutedCircuit};
pub use schmidt::{island_prep_circuit, island_state, schmidt_decompose, schmidt_prepare};

use crate::lattice::SiteEncoding;

/// Line placement for a chain: each site's first qubit, its ancilla (if
/// any), then its remaining qubits. Neighboring sites' link qubits end up
/// adjacent, and every ancilla sits between its site's qubits.
pub fn linear_chain_placement(encoding: &SiteEncoding) -> Vec<usize> {
    let mut order = Vec::with_capacity(encoding.total_qubits);
    for (site, qs) in encoding.site_qubits.iter().enumerate() {
        order.push(qs[0]);
        if let Some(a) = encoding.ancilla[site] {
            if !order.contains(&a) {
                order.push(a);
            }
        }
        order.extend(qs[1..].iter().copied());
    }
    let mut placement = vec![0usize; encoding.total_qubits];
    for (pos, &logical) in order.iter().enumerate() {
        placement[logical] = pos;
    }
    placement
}
