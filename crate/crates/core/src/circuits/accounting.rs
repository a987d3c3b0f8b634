//! CNOT count and depth.
//!
//! Explicit CNOTs cost one; opaque blocks cost their declared numbers for the
//! chosen coupling. Depth uses per-qubit earliest-time scheduling in program
//! order: single-qubit gates, measurements and resets take no CNOT time, a
//! barrier synchronizes every qubit, and a retry loop counts one attempt.

use super::ir::{Circuit, CostKey, Gate};
use crate::error::{Result, VbsError};

fn count_gates(gates: &[Gate], key: CostKey) -> Result<u64> {
    let mut total = 0u64;
    for g in gates {
        total += match g {
            Gate::Cnot { .. } => 1,
            Gate::Opaque(o) => {
                let c = o.cost(key)?;
                u64::from(c.count.ok_or_else(|| VbsError::MissingDeclaredCost {
                    label: format!("{} (count)", o.label),
                    coupling: format!("{key:?}"),
                })?)
            }
            Gate::RetryUntil { body, .. } => count_gates(body, key)?,
            _ => 0,
        };
    }
    Ok(total)
}

fn schedule(gates: &[Gate], key: CostKey, t: &mut [u64]) -> Result<()> {
    for g in gates {
        match g {
            Gate::Cnot { control, target } => {
                let s = t[*control].max(t[*target]) + 1;
                t[*control] = s;
                t[*target] = s;
            }
            Gate::Opaque(o) => {
                let c = o.cost(key)?;
                let d = c.effective_depth().ok_or_else(|| VbsError::MissingDeclaredCost {
                    label: format!("{} (depth)", o.label),
                    coupling: format!("{key:?}"),
                })?;
                let s = o.qubits.iter().map(|&q| t[q]).max().unwrap_or(0) + u64::from(d);
                for &q in &o.qubits {
                    t[q] = s;
                }
            }
            Gate::Barrier => {
                let m = t.iter().copied().max().unwrap_or(0);
                t.iter_mut().for_each(|x| *x = m);
            }
            Gate::RetryUntil { body, .. } => schedule(body, key, t)?,
            Gate::U { .. } | Gate::Measure { .. } | Gate::Reset { .. } => {}
        }
    }
    Ok(())
}

pub fn cnot_count(circuit: &Circuit, key: impl Into<CostKey>) -> Result<u64> {
    count_gates(circuit.gates(), key.into())
}

pub fn cnot_depth(circuit: &Circuit, key: impl Into<CostKey>) -> Result<u64> {
    let mut t = vec![0u64; circuit.n_qubits()];
    schedule(circuit.gates(), key.into(), &mut t)?;
    Ok(t.into_iter().max().unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::ir::{cx, h, DeclaredCost, OpaqueGate};
    use crate::spinops::DenseOperator;

    #[test]
    fn parallel_and_sequential() {
        let mut c = Circuit::new(4);
        c.extend([cx(0, 1), cx(2, 3), h(1), cx(1, 2)]).unwrap();
        assert_eq!(cnot_count(&c, CostKey::AllToAll).unwrap(), 3);
        assert_eq!(cnot_depth(&c, CostKey::AllToAll).unwrap(), 2);
    }

    #[test]
    fn opaque_costs() {
        let o = OpaqueGate::new("blk", vec![0, 1], DenseOperator::identity(4))
            .unwrap()
            .with_cost(CostKey::AllToAll, DeclaredCost::new(5, 3));
        let mut c = Circuit::new(3);
        c.extend([Gate::Opaque(o), cx(1, 2), Gate::Barrier, cx(0, 2)]).unwrap();
        assert_eq!(cnot_count(&c, CostKey::AllToAll).unwrap(), 7);
        assert_eq!(cnot_depth(&c, CostKey::AllToAll).unwrap(), 5);
        assert!(matches!(
            cnot_count(&c, CostKey::Linear),
            Err(VbsError::MissingDeclaredCost { .. })
        ));
    }
}
