//! Reference states and ground-state checks.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use crate::circuits::builders::pre_vbs_gates;
use crate::circuits::exec::{simulate, SimMode};
use crate::circuits::ir::{u_matrix, Circuit};
use crate::error::{Result, VbsError};
use crate::lattice::{assign_qubits, EncodingMethod, Lattice, SiteEncoding};
use crate::spinops::{blbq_hamiltonian_term, max_spin_link_projector, symmetrizer};
use crate::statesim::Statevector;

/// Amplitude left outside the data register before it counts as an error.
pub const STRAY_TOL: f64 = 1e-10;

/// VBS state on the data qubits built by applying every site symmetrizer to
/// the simulated pre-VBS state, with the squared norm the symmetrizers
/// leave (the all-success probability).
pub fn reference_vbs_state(lattice: &Lattice) -> Result<(Statevector, f64)> {
    let enc = assign_qubits(lattice, EncodingMethod::DataOnly)?;
    let c = Circuit::from_gates(enc.n_data, pre_vbs_gates(&enc)?)?;
    let mut sv = simulate(&c, SimMode::PostSelect)?.state;
    let mut norm = 1.0;
    for qs in &enc.site_qubits {
        if qs.len() > 1 {
            norm *= sv.apply_nonunitary(&symmetrizer(qs.len())?, qs)?;
        }
    }
    Ok((sv, norm))
}

/// Data register of a simulated state. Non-data qubits left in a definite
/// basis state are cleared first; anything still outside the register is
/// an error. `placement` maps logical qubits to the qubits of `state`.
pub fn data_register(state: &Statevector, n_data: usize, placement: Option<&[usize]>) -> Result<Statevector> {
    let positions: Vec<usize> = match placement {
        Some(p) => p[..n_data].to_vec(),
        None => (0..n_data).collect(),
    };
    let mut sv = state.clone();
    for q in 0..sv.n_qubits() {
        if positions.contains(&q) {
            continue;
        }
        if sv.outcome_probability(q, 1)? > 1.0 - 1e-12 {
            sv.apply_unitary(&u_matrix(PI, 0.0, PI), &[q])?;
        }
    }
    let (out, stray) = sv.extract(&positions)?;
    if stray > STRAY_TOL {
        return Err(VbsError::InvalidArgument(format!(
            "non-data qubits entangled with the register ({stray:.3e})"
        )));
    }
    Ok(out)
}

fn site_pairs(lattice: &Lattice) -> Vec<(usize, usize)> {
    let set: BTreeSet<(usize, usize)> = lattice
        .links()
        .iter()
        .map(|&(a, b)| (a.min(b), a.max(b)))
        .collect();
    set.into_iter().collect()
}

/// `||P |psi>||` for the maximal-spin projector of every linked site pair.
pub fn projector_residuals(state: &Statevector, encoding: &SiteEncoding, lattice: &Lattice) -> Result<Vec<((usize, usize), f64)>> {
    let mut out = Vec::new();
    for (a, b) in site_pairs(lattice) {
        let qa = &encoding.site_qubits[a];
        let qb = &encoding.site_qubits[b];
        let p = max_spin_link_projector(qa.len(), qb.len())?;
        let qs: Vec<usize> = qa.iter().chain(qb).copied().collect();
        out.push(((a, b), state.image_norm(&p, &qs)?));
    }
    Ok(out)
}

/// Energy of the spin-1 AKLT Hamiltonian `sum (S.S + (S.S)^2 / 3)` over
/// linked site pairs.
pub fn aklt_energy(state: &Statevector, encoding: &SiteEncoding, lattice: &Lattice) -> Result<f64> {
    let h = blbq_hamiltonian_term(1.0 / 3.0)?;
    let mut e = 0.0;
    for (a, b) in site_pairs(lattice) {
        let qa = &encoding.site_qubits[a];
        let qb = &encoding.site_qubits[b];
        if qa.len() != 2 || qb.len() != 2 {
            return Err(VbsError::UnsupportedSpin((qa.len().max(qb.len())) as u32));
        }
        let qs = [qa[0], qa[1], qb[0], qb[1]];
        e += state.expectation(&h, &qs)?;
    }
    Ok(e)
}

/// Ground energy `-2(N-1)/3` of the open spin-1 AKLT chain.
pub fn open_chain_ground_energy(n_sites: usize) -> f64 {
    -2.0 * (n_sites as f64 - 1.0) / 3.0
}
