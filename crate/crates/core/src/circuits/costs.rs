//! Declared CNOT costs for blocks whose optimized decompositions are not
//! synthesized here. One table, versioned; builders read from it.

use super::ir::{CostKey, DeclaredCost};

pub const COST_TABLE_VERSION: u32 = 1;

/// Controlled-SWAP used as the spin-1 Hadamard test (phase gate dropped).
pub fn hadamard_test_s1() -> Vec<(CostKey, DeclaredCost)> {
    vec![
        (CostKey::AllToAll, DeclaredCost::count(7)),
        (CostKey::Linear, DeclaredCost::count(9)),
    ]
}

/// Controlled `exp(-i pi Sym)` on three qubits. On heavy-hex the cost depends
/// on whether the ancilla and site qubits form a path or a star.
pub fn hadamard_test_s32() -> Vec<(CostKey, DeclaredCost)> {
    vec![
        (CostKey::AllToAll, DeclaredCost::count(26)),
        (CostKey::Linear, DeclaredCost::count(39)),
        (CostKey::HeavyHexPath, DeclaredCost::count(41)),
        (CostKey::HeavyHexStar, DeclaredCost::count(39)),
    ]
}

/// Controlled-SWAP inside LCU select oracles.
pub fn cswap() -> Vec<(CostKey, DeclaredCost)> {
    vec![
        (CostKey::AllToAll, DeclaredCost::count(7)),
        (CostKey::Linear, DeclaredCost::count(9)),
    ]
}

/// Island preparation blocks: (all-to-all U, all-to-all V, optional Schmidt
/// block B) for the bulk island of the given 2S.
pub struct IslandCosts {
    pub u: DeclaredCost,
    pub v: DeclaredCost,
    pub b: Option<DeclaredCost>,
    /// Whole-island block on restricted couplings.
    pub restricted: Vec<(CostKey, DeclaredCost)>,
}

pub fn island(twice_s: u32) -> Option<IslandCosts> {
    match twice_s {
        2 => Some(IslandCosts {
            u: DeclaredCost::count(2),
            v: DeclaredCost::count(2),
            b: None,
            restricted: vec![(CostKey::Linear, DeclaredCost::depth_only(8))],
        }),
        3 => Some(IslandCosts {
            u: DeclaredCost::count(14),
            v: DeclaredCost::count(15),
            b: Some(DeclaredCost::new(3, 3)),
            restricted: vec![(CostKey::HeavyHex, DeclaredCost::depth_only(57))],
        }),
        _ => None,
    }
}

/// Generic upper bounds for an arbitrary k-qubit unitary used by Schmidt
/// preparation on non-island targets.
pub fn generic_unitary(k: usize) -> Option<DeclaredCost> {
    match k {
        1 => Some(DeclaredCost::ZERO),
        2 => Some(DeclaredCost::count(3)),
        3 => Some(DeclaredCost::count(20)),
        _ => None,
    }
}

/// The MPS route is reported with a cost of roughly 20 CNOTs per site.
pub const MPS_CNOTS_PER_SITE: u32 = 20;
