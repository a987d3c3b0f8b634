//! Shot sampling of post-selection success and retry-round statistics.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuits::builders::{hadamard_test_body, hadamard_test_success, island_of, valence_bond_subcircuit};
use crate::circuits::exec::{simulate, SimMode};
use crate::circuits::ir::{x, Circuit, Gate};
use crate::error::{Result, VbsError};
use crate::lattice::{assign_qubits, EncodingMethod, Lattice, Sublattice};

#[derive(Clone, Debug, Serialize)]
pub struct MonteCarlo {
    pub shots: u64,
    pub successes: u64,
    pub rate: f64,
    pub expected: f64,
    pub sigma: f64,
    pub z: f64,
    /// Exact success probability of the sampled distribution, when the
    /// measurements could be deferred to the end.
    pub exact: Option<f64>,
    pub deferred: bool,
}

fn z_score(successes: u64, shots: u64, p: f64) -> (f64, f64) {
    let n = shots as f64;
    let sigma = (p * (1.0 - p) / n).sqrt();
    let rate = successes as f64 / n;
    let z = if sigma > 0.0 {
        (rate - p) / sigma
    } else if (rate - p).abs() < 1e-15 {
        0.0
    } else {
        f64::INFINITY
    };
    (sigma, z)
}

/// Measurements can be moved to the end when nothing touches a measured
/// qubit afterwards and there are no resets or retry loops.
fn deferrable(circuit: &Circuit) -> bool {
    let mut measured = BTreeSet::new();
    for g in circuit.gates() {
        match g {
            Gate::Reset { .. } | Gate::RetryUntil { .. } => return false,
            Gate::Measure { qubit, .. } => {
                if !measured.insert(*qubit) {
                    return false;
                }
            }
            Gate::Barrier => {}
            other => {
                if other.qubits().iter().any(|q| measured.contains(q)) {
                    return false;
                }
            }
        }
    }
    true
}

/// Samples `shots` runs of `circuit` and counts those hitting every
/// post-selection target. The z-score compares against `expected_p`.
pub fn monte_carlo_success(circuit: &Circuit, expected_p: f64, shots: u64, seed: u64) -> Result<MonteCarlo> {
    if !(expected_p > 0.0 && expected_p <= 1.0) {
        return Err(VbsError::InvalidArgument(format!("expected probability {expected_p} outside (0, 1]")));
    }
    if shots == 0 {
        return Err(VbsError::InvalidArgument("shots must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (successes, exact, deferred) = if deferrable(circuit) {
        let mut targets = Vec::new();
        let mut unitary = Circuit::new(circuit.n_qubits());
        for g in circuit.gates() {
            match g {
                Gate::Measure { qubit, postselect } => {
                    if let Some(b) = postselect {
                        targets.push((*qubit, *b));
                    }
                }
                other => unitary.push(other.clone())?,
            }
        }
        let state = simulate(&unitary, SimMode::PostSelect)?.state;
        let qs: Vec<usize> = targets.iter().map(|t| t.0).collect();
        let want = targets.iter().fold(0usize, |acc, t| (acc << 1) | t.1 as usize);
        let probs = if qs.is_empty() {
            vec![1.0]
        } else {
            state.marginal_probabilities(&qs)?
        };
        let mut cum = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for p in &probs {
            acc += p;
            cum.push(acc);
        }
        let mut hits = 0u64;
        for _ in 0..shots {
            let r: f64 = rng.gen::<f64>() * acc;
            let k = cum.partition_point(|&c| c <= r).min(probs.len() - 1);
            if k == want {
                hits += 1;
            }
        }
        (hits, Some(probs[want] / acc), true)
    } else {
        let mut hits = 0u64;
        for _ in 0..shots {
            let s: u64 = rng.gen();
            if simulate(circuit, SimMode::Sample { seed: s })?.success {
                hits += 1;
            }
        }
        (hits, None, false)
    };
    let (sigma, z) = z_score(successes, shots, expected_p);
    Ok(MonteCarlo {
        shots,
        successes,
        rate: successes as f64 / shots as f64,
        expected: expected_p,
        sigma,
        z,
        exact,
        deferred,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundCheck {
    pub round: usize,
    pub empirical_cdf: f64,
    pub analytic_cdf: f64,
    pub z: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RetryStatistics {
    /// `(site, single-attempt success probability)` per sublattice-A island.
    pub islands: Vec<(usize, f64)>,
    pub trials: u64,
    pub seed: u64,
    /// Rounds needed (max over islands) to trial count.
    pub histogram: BTreeMap<usize, u64>,
    pub rounds: Vec<RoundCheck>,
    pub mean_rounds: f64,
    pub expected_rounds: f64,
    pub z_mean: f64,
    pub max_abs_z: f64,
}

/// Success probability of one island's Hadamard test, by simulating the
/// island's valence bonds and test on its own qubits.
pub fn island_success_probability(lattice: &Lattice, site: usize) -> Result<f64> {
    let enc = assign_qubits(lattice, EncodingMethod::DataOnly)?;
    let isl = island_of(lattice, &enc, site)?;
    let t = isl.site_positions.len();
    if t < 2 {
        return Ok(1.0);
    }
    let anc = isl.qubits.len();
    let mut c = Circuit::new(anc + 1);
    for &(a, b) in &isl.singlets {
        c.extend(valence_bond_subcircuit(a, b)?)?;
    }
    for &(q, b) in &isl.fixed {
        if b == 1 {
            c.push(x(q))?;
        }
    }
    c.extend(hadamard_test_body(anc, &isl.site_positions)?)?;
    c.push(Gate::Measure {
        qubit: anc,
        postselect: Some(hadamard_test_success(t)),
    })?;
    Ok(simulate(&c, SimMode::PostSelect)?.postselect_probability)
}

fn max_rounds_cdf(ps: &[f64], n: usize) -> f64 {
    ps.iter().map(|&p| 1.0 - (1.0 - p).powi(n as i32)).product()
}

/// Retries every sublattice-A island until its test succeeds, `trials`
/// times, and compares the distribution of the slowest island's round count
/// with `prod_i (1 - (1-p_i)^n)`. Islands are independent, so each is drawn
/// from its own geometric distribution.
pub fn sublattice_retry_simulation(lattice: &Lattice, trials: u64, seed: u64) -> Result<RetryStatistics> {
    if trials == 0 {
        return Err(VbsError::InvalidArgument("trials must be positive".into()));
    }
    let colors = lattice.two_coloring()?;
    let mut islands = Vec::new();
    for (site, c) in colors.iter().enumerate() {
        if *c == Sublattice::A {
            islands.push((site, island_success_probability(lattice, site)?));
        }
    }
    let ps: Vec<f64> = islands.iter().map(|i| i.1).filter(|&p| p < 1.0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut histogram = BTreeMap::new();
    let mut sum = 0.0;
    for _ in 0..trials {
        let mut worst = 1usize;
        for &p in &ps {
            let mut k = 1usize;
            while rng.gen::<f64>() >= p {
                k += 1;
            }
            worst = worst.max(k);
        }
        *histogram.entry(worst).or_insert(0u64) += 1;
        sum += worst as f64;
    }
    let max_seen = *histogram.keys().next_back().expect("trials > 0");
    let mut rounds = Vec::with_capacity(max_seen);
    let mut cum = 0u64;
    let mut max_abs_z: f64 = 0.0;
    for n in 1..=max_seen {
        cum += histogram.get(&n).copied().unwrap_or(0);
        let f = max_rounds_cdf(&ps, n);
        let emp = cum as f64 / trials as f64;
        let sd = (f * (1.0 - f) / trials as f64).sqrt();
        let z = if sd > 0.0 {
            (emp - f) / sd
        } else if (emp - f).abs() < 1e-15 {
            0.0
        } else {
            f64::INFINITY
        };
        max_abs_z = max_abs_z.max(z.abs());
        rounds.push(RoundCheck {
            round: n,
            empirical_cdf: emp,
            analytic_cdf: f,
            z,
        });
    }
    // moments of the analytic distribution
    let (mut mean, mut second, mut prev, mut n) = (0.0, 0.0, 0.0, 1usize);
    loop {
        let f = max_rounds_cdf(&ps, n);
        mean += n as f64 * (f - prev);
        second += (n * n) as f64 * (f - prev);
        prev = f;
        if 1.0 - f < 1e-12 {
            break;
        }
        n += 1;
    }
    let var = (second - mean * mean).max(0.0);
    let mean_rounds = sum / trials as f64;
    let sd = (var / trials as f64).sqrt();
    let z_mean = if sd > 0.0 { (mean_rounds - mean) / sd } else { 0.0 };
    Ok(RetryStatistics {
        islands,
        trials,
        seed,
        histogram,
        rounds,
        mean_rounds,
        expected_rounds: mean,
        z_mean,
        max_abs_z: max_abs_z.max(z_mean.abs()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::ir::{cx, h};

    #[test]
    fn deterministic_circuit_rate_one() {
        let mut c = Circuit::new(2);
        c.extend([
            h(0),
            cx(0, 1),
            h(0),
            Gate::Measure {
                qubit: 1,
                postselect: None,
            },
        ])
        .unwrap();
        let mut d = Circuit::new(1);
        d.push(Gate::Measure {
            qubit: 0,
            postselect: Some(0),
        })
        .unwrap();
        let r = monte_carlo_success(&d, 1.0, 1000, 3).unwrap();
        assert_eq!(r.rate, 1.0);
        assert_eq!(r.z, 0.0);
        assert!(monte_carlo_success(&c, 0.0, 10, 1).is_err());
    }

    #[test]
    fn same_seed_same_tally() {
        let mut c = Circuit::new(1);
        c.extend([
            h(0),
            Gate::Measure {
                qubit: 0,
                postselect: Some(1),
            },
        ])
        .unwrap();
        let a = monte_carlo_success(&c, 0.5, 5000, 11).unwrap();
        let b = monte_carlo_success(&c, 0.5, 5000, 11).unwrap();
        assert_eq!(a.successes, b.successes);
        assert!(a.z.abs() < 4.0);
    }
}
