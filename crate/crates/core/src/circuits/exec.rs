//! Runs circuits on the statevector simulator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ir::{u_matrix, Circuit, Gate};
use crate::error::{Result, VbsError};
use crate::statesim::{OpMode, Statevector};

/// Upper bound on body executions inside one retry loop.
pub const MAX_RETRIES: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimMode {
    /// Measurements with a post-selection target are projected onto it;
    /// retry loops run once and are projected onto success.
    PostSelect,
    /// One sampled trajectory.
    Sample { seed: u64 },
}

#[derive(Clone, Debug)]
pub struct SimResult {
    pub state: Statevector,
    /// Product of the post-selected outcome probabilities (retry loops
    /// excluded).
    pub postselect_probability: f64,
    /// Per retry loop: single-attempt success probability (post-select mode)
    /// or attempts used (sample mode, stored as f64).
    pub retry: Vec<f64>,
    /// Sample mode: all post-selection targets were hit.
    pub success: bool,
    /// Sampled outcomes in program order.
    pub outcomes: Vec<(usize, u8)>,
}

struct Runner {
    mode: SimMode,
    rng: ChaCha8Rng,
    prob: f64,
    retry: Vec<f64>,
    success: bool,
    outcomes: Vec<(usize, u8)>,
}

impl Runner {
    fn sample_outcome(&mut self, sv: &mut Statevector, q: usize) -> Result<u8> {
        let p1 = sv.outcome_probability(q, 1)?;
        let r: f64 = self.rng.gen();
        let out = u8::from(r < p1);
        sv.project_qubit(q, out, true)?;
        Ok(out)
    }

    fn measured_reset(&mut self, sv: &mut Statevector, q: usize) -> Result<()> {
        let out = self.sample_outcome(sv, q)?;
        if out == 1 {
            sv.apply_unitary(&u_matrix(std::f64::consts::PI, 0.0, std::f64::consts::PI), &[q])?;
        }
        Ok(())
    }

    fn run(&mut self, sv: &mut Statevector, gates: &[Gate]) -> Result<()> {
        for g in gates {
            match g {
                Gate::Cnot { control, target } => sv.apply_cnot(*control, *target)?,
                Gate::U {
                    theta,
                    phi,
                    lambda,
                    qubit,
                } => sv.apply_unitary(&u_matrix(*theta, *phi, *lambda), &[*qubit])?,
                Gate::Opaque(o) => sv.apply_operator(&o.matrix, &o.qubits, OpMode::Unitary)?,
                Gate::Barrier => {}
                Gate::Reset { qubit } => match self.mode {
                    SimMode::PostSelect => sv.reset_qubit(*qubit)?,
                    SimMode::Sample { .. } => self.measured_reset(sv, *qubit)?,
                },
                Gate::Measure { qubit, postselect } => match (self.mode, postselect) {
                    (SimMode::PostSelect, Some(b)) => {
                        self.prob *= sv.project_qubit(*qubit, *b, true)?;
                    }
                    _ => {
                        let out = self.sample_outcome(sv, *qubit)?;
                        self.outcomes.push((*qubit, out));
                        if let Some(b) = postselect {
                            self.success &= out == *b;
                        }
                    }
                },
                Gate::RetryUntil {
                    body,
                    ancilla,
                    success,
                    reset,
                } => match self.mode {
                    SimMode::PostSelect => {
                        self.run(sv, body)?;
                        let p = sv.project_qubit(*ancilla, *success, true)?;
                        self.retry.push(p);
                    }
                    SimMode::Sample { .. } => {
                        let mut attempts = 0usize;
                        loop {
                            attempts += 1;
                            self.run(sv, body)?;
                            let out = self.sample_outcome(sv, *ancilla)?;
                            if out == *success {
                                break;
                            }
                            if attempts >= MAX_RETRIES {
                                return Err(VbsError::InvalidArgument("retry loop did not terminate".into()));
                            }
                            self.measured_reset(sv, *ancilla)?;
                            for &q in reset {
                                if q != *ancilla {
                                    self.measured_reset(sv, q)?;
                                }
                            }
                        }
                        self.retry.push(attempts as f64);
                    }
                },
            }
        }
        Ok(())
    }
}

/// Simulates `circuit` from `initial` (default `|0...0>`).
pub fn simulate_from(circuit: &Circuit, initial: Statevector, mode: SimMode) -> Result<SimResult> {
    if initial.n_qubits() != circuit.n_qubits() {
        return Err(VbsError::DimensionMismatch {
            expected: circuit.n_qubits(),
            got: initial.n_qubits(),
        });
    }
    let seed = match mode {
        SimMode::Sample { seed } => seed,
        SimMode::PostSelect => 0,
    };
    let mut r = Runner {
        mode,
        rng: ChaCha8Rng::seed_from_u64(seed),
        prob: 1.0,
        retry: Vec::new(),
        success: true,
        outcomes: Vec::new(),
    };
    let mut sv = initial;
    r.run(&mut sv, circuit.gates())?;
    Ok(SimResult {
        state: sv,
        postselect_probability: r.prob,
        retry: r.retry,
        success: r.success,
        outcomes: r.outcomes,
    })
}

pub fn simulate(circuit: &Circuit, mode: SimMode) -> Result<SimResult> {
    simulate_from(circuit, Statevector::new_zero_state(circuit.n_qubits())?, mode)
}

/// Unitary of a measurement-free circuit, built column by column.
pub fn circuit_unitary(circuit: &Circuit) -> Result<crate::spinops::DenseOperator> {
    let n = circuit.n_qubits();
    if n > 10 {
        return Err(VbsError::CapExceeded {
            what: "circuit unitary qubits",
            requested: n,
            cap: 10,
        });
    }
    let dim = 1usize << n;
    let mut cols = Vec::with_capacity(dim);
    for j in 0..dim {
        let res = simulate_from(circuit, Statevector::basis_state(n, j)?, SimMode::PostSelect)?;
        cols.push(res.state.into_amplitudes());
    }
    Ok(crate::spinops::DenseOperator::from_fn(dim, "circuit", |i, j| cols[j][i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::ir::{cx, h};

    #[test]
    fn bell_and_postselect() {
        let mut c = Circuit::new(2);
        c.extend([h(0), cx(0, 1), Gate::Measure { qubit: 0, postselect: Some(1) }]).unwrap();
        let r = simulate(&c, SimMode::PostSelect).unwrap();
        assert!((r.postselect_probability - 0.5).abs() < 1e-12);
        assert!((r.state.amplitudes()[3].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampled_runs_are_seeded() {
        let mut c = Circuit::new(1);
        c.extend([h(0), Gate::Measure { qubit: 0, postselect: Some(0) }]).unwrap();
        let a: Vec<bool> = (0..20).map(|s| simulate(&c, SimMode::Sample { seed: s }).unwrap().success).collect();
        let b: Vec<bool> = (0..20).map(|s| simulate(&c, SimMode::Sample { seed: s }).unwrap().success).collect();
        assert_eq!(a, b);
        assert!(a.iter().any(|&x| x) && a.iter().any(|&x| !x));
    }

    #[test]
    fn retry_loop_always_succeeds_in_sample_mode() {
        let mut c = Circuit::new(2);
        let body = vec![h(0), cx(0, 1)];
        c.push(Gate::RetryUntil {
            body,
            ancilla: 0,
            success: 1,
            reset: vec![1],
        })
        .unwrap();
        for seed in 0..10 {
            let r = simulate(&c, SimMode::Sample { seed }).unwrap();
            assert!((r.state.amplitudes()[3].norm() - 1.0).abs() < 1e-12);
            assert!(r.retry[0] >= 1.0);
        }
        let r = simulate(&c, SimMode::PostSelect).unwrap();
        assert!((r.retry[0] - 0.5).abs() < 1e-12);
    }
}
