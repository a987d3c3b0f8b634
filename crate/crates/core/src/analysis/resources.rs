//! Method selection, placement on couplings and CNOT resource records.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::circuits::accounting::{cnot_count, cnot_depth};
use crate::circuits::builders::{islands_method_circuit, probabilistic_method_circuit, retry_method_circuit};
use crate::circuits::ir::Circuit;
use crate::circuits::lcu::{lcu_method_circuit, LcuVariant};
use crate::circuits::linear_chain_placement;
use crate::circuits::routing::{route, RoutedCircuit};
use crate::error::{Result, VbsError};
use crate::lattice::{
    assign_qubits, build_chain, heavy_hex_star_layout, Boundary, ChainBoundary, CouplingKind, CouplingMap,
    EncodingMethod, HeavyHexLayout, Lattice, SiteEncoding, Sublattice,
};
use crate::mpsprep::mps_circuit;
use crate::spinops::SpinValue;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Probabilistic,
    MitigatedIslands,
    MitigatedRetry,
    Lcu,
    Mps,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Probabilistic,
        Method::MitigatedIslands,
        Method::MitigatedRetry,
        Method::Lcu,
        Method::Mps,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Probabilistic => "probabilistic",
            Method::MitigatedIslands => "mitigated_islands",
            Method::MitigatedRetry => "mitigated_retry",
            Method::Lcu => "lcu",
            Method::Mps => "mps",
        }
    }

    pub fn encoding(self) -> EncodingMethod {
        match self {
            Method::Probabilistic | Method::MitigatedRetry => EncodingMethod::HadamardAll,
            Method::MitigatedIslands => EncodingMethod::IslandsPlusSublattice,
            Method::Lcu => EncodingMethod::DataOnly,
            Method::Mps => EncodingMethod::Mps,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = VbsError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "probabilistic" => Ok(Method::Probabilistic),
            "mitigated_islands" | "islands" => Ok(Method::MitigatedIslands),
            "mitigated_retry" | "retry" => Ok(Method::MitigatedRetry),
            "lcu" => Ok(Method::Lcu),
            "mps" => Ok(Method::Mps),
            other => Err(VbsError::InvalidArgument(format!("unknown method `{other}`"))),
        }
    }
}

/// Chain parameters when `lattice` is a spin-1 chain.
pub fn chain_shape(lattice: &Lattice) -> Option<(usize, ChainBoundary)> {
    if lattice.uniform_spin() != Some(SpinValue::ONE) {
        return None;
    }
    match lattice.boundary() {
        Boundary::Ring => Some((lattice.n_sites(), ChainBoundary::Ring)),
        Boundary::OpenChain { left, right } => Some((lattice.n_sites(), ChainBoundary::Open { left, right })),
        Boundary::ExplicitGraph => None,
    }
}

/// Circuit of `method` on `lattice` with the encoding it needs.
pub fn method_circuit(method: Method, lattice: &Lattice) -> Result<(Circuit, SiteEncoding)> {
    let enc = assign_qubits(lattice, method.encoding())?;
    let c = match method {
        Method::Probabilistic => probabilistic_method_circuit(lattice, &enc)?,
        Method::MitigatedIslands => islands_method_circuit(lattice, &enc)?,
        Method::MitigatedRetry => retry_method_circuit(lattice, &enc)?,
        Method::Lcu => {
            let all_two = (0..lattice.n_sites()).all(|s| lattice.site_qubit_count(s) <= 2);
            let variant = if all_two { LcuVariant::Dense } else { LcuVariant::Sparse };
            lcu_method_circuit(lattice, &enc, variant)?
        }
        Method::Mps => {
            let (n, b) = chain_shape(lattice)
                .ok_or_else(|| VbsError::InvalidArgument("mps needs a spin-1 chain".into()))?;
            mps_circuit(n, b, None)?
        }
    };
    Ok((c, enc))
}

/// Places and routes `circuit` on `coupling`. Linear maps use the chain
/// placement; heavy-hex needs the star layout's lattice.
pub fn place_and_route(
    circuit: &Circuit,
    encoding: &SiteEncoding,
    coupling: CouplingKind,
    layout: Option<&HeavyHexLayout>,
) -> Result<RoutedCircuit> {
    match coupling {
        CouplingKind::AllToAll => route(circuit, &CouplingMap::all_to_all(circuit.n_qubits().max(1))?, None),
        CouplingKind::Linear => {
            let n = circuit.n_qubits();
            let placement = if encoding.total_qubits == n {
                linear_chain_placement(encoding)
            } else {
                (0..n).collect()
            };
            route(circuit, &CouplingMap::linear(n)?, Some(&placement))
        }
        CouplingKind::HeavyHex => {
            let owned;
            let layout = match layout {
                Some(l) => l,
                None => {
                    owned = heavy_hex_star_layout()?;
                    &owned
                }
            };
            let placement = layout.placement(encoding)?;
            route(circuit, &layout.coupling, Some(&placement))
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ResourceRecord {
    pub twice_s: u32,
    pub method: Method,
    pub coupling: CouplingKind,
    pub lattice: String,
    /// `None` when a block declares only its depth.
    pub cnot_count: Option<u64>,
    pub cnot_depth: u64,
    pub swaps: usize,
    pub swap_cnots: usize,
}

/// Lattice used for the resource grid. Spin 1: a three-site open chain
/// whose middle site is the bulk island. Spin 3/2: the honeycomb star.
pub fn resource_lattice(s: SpinValue) -> Result<Lattice> {
    match s.twice_s() {
        2 => build_chain(3, ChainBoundary::ALIGNED)?.with_sublattice(vec![Sublattice::B, Sublattice::A, Sublattice::B]),
        3 => Ok(heavy_hex_star_layout()?.lattice),
        t => Err(VbsError::UnsupportedSpin(t)),
    }
}

/// CNOT count and depth of `method` for spin `s` on `coupling`.
pub fn resource_summary(s: SpinValue, method: Method, coupling: CouplingKind) -> Result<ResourceRecord> {
    if !matches!(method, Method::Probabilistic | Method::MitigatedIslands) {
        return Err(VbsError::InvalidArgument(format!("no resource model for method {method}")));
    }
    let lattice = resource_lattice(s)?;
    let (c, enc) = method_circuit(method, &lattice)?;
    let routed = place_and_route(&c, &enc, coupling, None)?;
    Ok(ResourceRecord {
        twice_s: s.twice_s(),
        method,
        coupling,
        lattice: lattice.name().to_string(),
        cnot_count: cnot_count(&routed.circuit, coupling).ok(),
        cnot_depth: cnot_depth(&routed.circuit, coupling)?,
        swaps: routed.swaps.len(),
        swap_cnots: routed.swap_cnots(),
    })
}

/// The eight depth cells: spin 1 on all-to-all and linear, spin 3/2 on
/// all-to-all and heavy-hex, each for the probabilistic and islands methods.
pub fn depth_grid() -> Result<Vec<ResourceRecord>> {
    let mut out = Vec::new();
    for (s, couplings) in [
        (SpinValue::ONE, [CouplingKind::AllToAll, CouplingKind::Linear]),
        (SpinValue::THREE_HALVES, [CouplingKind::AllToAll, CouplingKind::HeavyHex]),
    ] {
        for c in couplings {
            for m in [Method::Probabilistic, Method::MitigatedIslands] {
                out.push(resource_summary(s, m, c)?);
            }
        }
    }
    Ok(out)
}
