//! Symmetrization as a linear combination of permutation unitaries.
//!
//! Sparse variant: one ancilla per permutation, prepared in the one-hot
//! W state; each permutation is applied as controlled SWAPs on its own
//! ancilla. Dense variant: `log2(n!)` ancillas prepared by Hadamards, only
//! for `n = 2`.

use serde::Serialize;

use super::accounting::cnot_count;
use super::builders::{cswap_gate, permutation_circuits, pre_vbs_gates, w_state_gates};
use super::ir::{h, inverse_gates, Circuit, CostKey, Gate};
use crate::error::{Result, VbsError};
use crate::lattice::{Lattice, SiteEncoding};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LcuVariant {
    Sparse,
    Dense,
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Ancillas the variant needs for `n` site qubits.
pub fn lcu_ancilla_count(n_halves: usize, variant: LcuVariant) -> Result<usize> {
    let m = factorial(n_halves);
    match variant {
        LcuVariant::Sparse => Ok(m),
        LcuVariant::Dense => {
            if !m.is_power_of_two() {
                return Err(VbsError::InvalidArgument(format!(
                    "dense LCU needs n! to be a power of two (n = {n_halves})"
                )));
            }
            Ok(m.trailing_zeros() as usize)
        }
    }
}

/// Prepare, select, unprepare and the all-zero post-selection on the
/// ancillas. On success the site qubits carry `Sym |psi>`.
pub fn lcu_fragment(site_qubits: &[usize], ancillas: &[usize], variant: LcuVariant) -> Result<Vec<Gate>> {
    let n = site_qubits.len();
    let want = lcu_ancilla_count(n, variant)?;
    if ancillas.len() != want {
        return Err(VbsError::WrongAncillaCount {
            expected: want,
            got: ancillas.len(),
        });
    }
    let perms = permutation_circuits(n)?;
    let mut g = Vec::new();
    match variant {
        LcuVariant::Sparse => {
            let prep: Vec<Gate> = w_state_gates(ancillas.len())?
                .iter()
                .map(|g| g.remapped(&|q| ancillas[q]))
                .collect();
            g.extend(prep.iter().cloned());
            for (k, seq) in perms.iter().enumerate() {
                for &(a, b) in seq {
                    g.push(cswap_gate(ancillas[k], site_qubits[a], site_qubits[b])?);
                }
            }
            g.extend(inverse_gates(&prep)?);
        }
        LcuVariant::Dense => {
            // n = 2 only: one ancilla selects between identity and SWAP
            g.push(h(ancillas[0]));
            for &(a, b) in &perms[1] {
                g.push(cswap_gate(ancillas[0], site_qubits[a], site_qubits[b])?);
            }
            g.push(h(ancillas[0]));
        }
    }
    for &a in ancillas {
        g.push(Gate::Measure {
            qubit: a,
            postselect: Some(0),
        });
    }
    Ok(g)
}

/// Stand-alone LCU circuit on `[site qubits..., ancillas...]`.
pub fn lcu_symmetrization_circuit(n_halves: usize, variant: LcuVariant) -> Result<Circuit> {
    let m = lcu_ancilla_count(n_halves, variant)?;
    let site: Vec<usize> = (0..n_halves).collect();
    let anc: Vec<usize> = (n_halves..n_halves + m).collect();
    Ok(Circuit::from_gates(n_halves + m, lcu_fragment(&site, &anc, variant)?)?.with_meta("method", "lcu"))
}

/// Pre-VBS layer, then LCU symmetrization site by site on one shared
/// ancilla block placed after the data qubits. Post-selecting the ancillas on
/// zero returns them to `|0>`, so the block is reused without resets.
pub fn lcu_method_circuit(lattice: &Lattice, encoding: &SiteEncoding, variant: LcuVariant) -> Result<Circuit> {
    encoding.check_against(lattice)?;
    let max_t = encoding.site_qubits.iter().map(Vec::len).max().unwrap_or(0);
    let m = lcu_ancilla_count(max_t, variant)?;
    let base = encoding.n_data;
    let mut c = Circuit::new(base + m);
    c.extend(pre_vbs_gates(encoding)?)?;
    c.push(Gate::Barrier)?;
    for qs in &encoding.site_qubits {
        if qs.len() < 2 {
            continue;
        }
        let k = lcu_ancilla_count(qs.len(), variant)?;
        let anc: Vec<usize> = (base..base + k).collect();
        c.extend(lcu_fragment(qs, &anc, variant)?)?;
    }
    Ok(c.with_meta("method", "lcu").with_meta("lattice", lattice.descriptor()))
}

/// CNOT arithmetic of the sparse LCU symmetrizer on `n` qubits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LcuResources {
    pub n_halves: usize,
    pub permutations: usize,
    pub cswaps: usize,
    pub cswap_cnots: u64,
    pub w_state_cnots: u64,
    pub total_cnots: u64,
}

pub fn lcu_resources(n_halves: usize) -> Result<LcuResources> {
    let c = lcu_symmetrization_circuit(n_halves, LcuVariant::Sparse)?;
    let cswaps = c.opaque_gates().iter().filter(|o| o.label == "cswap").count();
    let m = factorial(n_halves);
    let w = Circuit::from_gates(m, w_state_gates(m)?)?;
    let w_cnots = w.count_explicit_cnots() as u64;
    let total = cnot_count(&c, CostKey::AllToAll)?;
    Ok(LcuResources {
        n_halves,
        permutations: m,
        cswaps,
        cswap_cnots: total - 2 * w_cnots,
        w_state_cnots: w_cnots,
        total_cnots: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ancilla_counts() {
        assert_eq!(lcu_ancilla_count(3, LcuVariant::Sparse).unwrap(), 6);
        assert_eq!(lcu_ancilla_count(2, LcuVariant::Dense).unwrap(), 1);
        assert!(lcu_ancilla_count(3, LcuVariant::Dense).is_err());
        assert!(matches!(
            lcu_fragment(&[0, 1], &[2], LcuVariant::Sparse),
            Err(VbsError::WrongAncillaCount { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn spin_two_arithmetic() {
        let r = lcu_resources(4).unwrap();
        assert_eq!((r.cswaps, r.cswap_cnots, r.w_state_cnots, r.total_cnots), (46, 322, 46, 414));
    }
}
