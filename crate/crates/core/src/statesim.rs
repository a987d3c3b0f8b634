//! Exact statevector simulation.
//!
//! Qubit 0 is the most significant bit of the basis index, so a register
//! `(q0, q1, ..., q_{n-1})` matches the Kronecker order `q0 (x) q1 (x) ...`.
//! Operators acting on a qubit list use the same rule locally: `qubits[0]`
//! is the most significant bit of the operator's index.

use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, VbsError};
use crate::spinops::DenseOperator;

pub const DEFAULT_QUBIT_CAP: usize = 26;
/// Environment variable overriding [`DEFAULT_QUBIT_CAP`].
pub const QUBIT_CAP_ENV: &str = "VBS_MAX_QUBITS";

pub const UNITARY_TOL: f64 = 1e-10;
pub const IMPOSSIBLE_PROB: f64 = 1e-14;

/// Active qubit cap, honoring `VBS_MAX_QUBITS`.
pub fn qubit_cap() -> usize {
    std::env::var(QUBIT_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&v| v >= 1)
        .unwrap_or(DEFAULT_QUBIT_CAP)
}

/// Whether [`Statevector::apply_operator`] checks unitarity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpMode {
    Unitary,
    AllowNonUnitary,
}

#[derive(Clone, Debug)]
pub struct Statevector {
    n: usize,
    amps: Vec<C64>,
    tracked_norm_sq: f64,
}

fn check_cap(n: usize) -> Result<()> {
    let cap = qubit_cap();
    if n == 0 || n > cap {
        return Err(VbsError::CapExceeded {
            what: "statevector qubits",
            requested: n,
            cap,
        });
    }
    Ok(())
}

impl Statevector {
    pub fn new_zero_state(n_qubits: usize) -> Result<Self> {
        Self::basis_state(n_qubits, 0)
    }

    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        check_cap(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(VbsError::InvalidArgument(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self {
            n: n_qubits,
            amps,
            tracked_norm_sq: 1.0,
        })
    }

    /// Wraps raw amplitudes (not renormalized).
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        if !amps.len().is_power_of_two() || amps.len() < 2 {
            return Err(VbsError::InvalidArgument(format!(
                "amplitude count {} is not a power of two >= 2",
                amps.len()
            )));
        }
        let n = amps.len().trailing_zeros() as usize;
        check_cap(n)?;
        Ok(Self {
            n,
            amps,
            tracked_norm_sq: 1.0,
        })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::from_amplitudes(amps.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn tracked_norm_sq(&self) -> f64 {
        self.tracked_norm_sq
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let ns = self.norm_sq();
        if ns < IMPOSSIBLE_PROB {
            return Err(VbsError::VanishingNorm { norm_sq: ns });
        }
        let inv = 1.0 / ns.sqrt();
        self.amps.iter_mut().for_each(|a| *a *= inv);
        Ok(())
    }

    fn bit(&self, q: usize) -> usize {
        1usize << (self.n - 1 - q)
    }

    fn check_qubits(&self, qubits: &[usize]) -> Result<()> {
        for (i, &q) in qubits.iter().enumerate() {
            if q >= self.n {
                return Err(VbsError::InvalidQubit {
                    qubit: q,
                    n_qubits: self.n,
                });
            }
            if qubits[..i].contains(&q) {
                return Err(VbsError::DuplicateQubit(q));
            }
        }
        Ok(())
    }

    /// Applies a unitary (checked to 1e-10) to `qubits`.
    pub fn apply_unitary(&mut self, op: &DenseOperator, qubits: &[usize]) -> Result<()> {
        self.apply_operator(op, qubits, OpMode::Unitary)
    }

    pub fn apply_operator(&mut self, op: &DenseOperator, qubits: &[usize], mode: OpMode) -> Result<()> {
        self.check_qubits(qubits)?;
        let want = 1usize << qubits.len();
        if op.dim() != want {
            return Err(VbsError::DimensionMismatch {
                expected: want,
                got: op.dim(),
            });
        }
        if mode == OpMode::Unitary {
            let dev = op.unitary_deviation();
            if dev > UNITARY_TOL {
                return Err(VbsError::NonUnitary {
                    label: op.label().to_string(),
                    deviation: dev,
                });
            }
        }
        match qubits.len() {
            1 => self.kernel_1q(op, qubits[0]),
            _ => self.kernel_kq(op, qubits),
        }
        Ok(())
    }

    fn kernel_1q(&mut self, op: &DenseOperator, q: usize) {
        let m = op.matrix();
        let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        let bit = self.bit(q);
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let x0 = self.amps[i];
                let x1 = self.amps[i | bit];
                self.amps[i] = a * x0 + b * x1;
                self.amps[i | bit] = c * x0 + d * x1;
            }
        }
    }

    fn kernel_kq(&mut self, op: &DenseOperator, qubits: &[usize]) {
        let k = qubits.len();
        let local = 1usize << k;
        let masks: Vec<usize> = qubits.iter().map(|&q| self.bit(q)).collect();
        let all: usize = masks.iter().fold(0, |acc, m| acc | m);
        let offsets: Vec<usize> = (0..local)
            .map(|i| {
                (0..k)
                    .filter(|&j| (i >> (k - 1 - j)) & 1 == 1)
                    .fold(0, |acc, j| acc | masks[j])
            })
            .collect();
        let m = op.matrix();
        // Row-major copy so the inner loop walks contiguous memory.
        let rows: Vec<C64> = (0..local)
            .flat_map(|r| (0..local).map(move |c| (r, c)))
            .map(|(r, c)| m[(r, c)])
            .collect();
        let mut buf = vec![C64::new(0.0, 0.0); local];
        for base in 0..self.amps.len() {
            if base & all != 0 {
                continue;
            }
            for (slot, off) in buf.iter_mut().zip(&offsets) {
                *slot = self.amps[base | off];
            }
            for r in 0..local {
                let row = &rows[r * local..(r + 1) * local];
                let mut acc = C64::new(0.0, 0.0);
                for (x, y) in row.iter().zip(&buf) {
                    acc += x * y;
                }
                self.amps[base | offsets[r]] = acc;
            }
        }
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubits(&[control, target])?;
        let cb = self.bit(control);
        let tb = self.bit(target);
        for i in 0..self.amps.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amps.swap(i, i | tb);
            }
        }
        Ok(())
    }

    /// Probability (relative to the current norm) of `outcome` on qubit `q`.
    pub fn outcome_probability(&self, q: usize, outcome: u8) -> Result<f64> {
        self.check_qubits(&[q])?;
        let bit = self.bit(q);
        let total = self.norm_sq();
        if total < IMPOSSIBLE_PROB {
            return Err(VbsError::VanishingNorm { norm_sq: total });
        }
        let want = if outcome == 0 { 0 } else { bit };
        let part: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit == want)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        Ok(part / total)
    }

    /// Projects qubit `q` onto `outcome`; returns the outcome probability.
    pub fn project_qubit(&mut self, q: usize, outcome: u8, renormalize: bool) -> Result<f64> {
        if outcome > 1 {
            return Err(VbsError::InvalidArgument(format!("outcome {outcome}")));
        }
        let prob = self.outcome_probability(q, outcome)?;
        if prob < IMPOSSIBLE_PROB {
            return Err(VbsError::ImpossibleOutcome {
                qubit: q,
                outcome,
                probability: prob,
            });
        }
        let bit = self.bit(q);
        let keep = if outcome == 0 { 0 } else { bit };
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & bit != keep {
                *a = C64::new(0.0, 0.0);
            }
        }
        if renormalize {
            self.normalize()?;
            self.tracked_norm_sq *= prob;
        }
        Ok(prob)
    }

    /// Returns a qubit in a definite state to `|0>`.
    pub fn reset_qubit(&mut self, q: usize) -> Result<()> {
        let p1 = self.outcome_probability(q, 1)?;
        if p1 > IMPOSSIBLE_PROB && p1 < 1.0 - IMPOSSIBLE_PROB {
            return Err(VbsError::IndefiniteReset(q));
        }
        if p1 >= 0.5 {
            let bit = self.bit(q);
            for i in 0..self.amps.len() {
                if i & bit == 0 {
                    self.amps.swap(i, i | bit);
                }
            }
        }
        Ok(())
    }

    /// Applies a general operator, renormalizes, and returns
    /// `<psi|op^dag op|psi> / <psi|psi>`.
    pub fn apply_nonunitary(&mut self, op: &DenseOperator, qubits: &[usize]) -> Result<f64> {
        let before = self.norm_sq();
        self.apply_operator(op, qubits, OpMode::AllowNonUnitary)?;
        let after = self.norm_sq();
        if after < IMPOSSIBLE_PROB * before.max(1e-300) {
            return Err(VbsError::VanishingNorm { norm_sq: after });
        }
        let ratio = after / before;
        self.normalize()?;
        self.tracked_norm_sq *= ratio;
        Ok(ratio)
    }

    /// `<self|other>` after normalizing both.
    pub fn overlap(&self, other: &Statevector) -> Result<C64> {
        if self.n != other.n {
            return Err(VbsError::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        let na = self.norm_sq();
        let nb = other.norm_sq();
        if na < IMPOSSIBLE_PROB || nb < IMPOSSIBLE_PROB {
            return Err(VbsError::VanishingNorm { norm_sq: na.min(nb) });
        }
        let raw: C64 = self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(raw / (na * nb).sqrt())
    }

    /// `|<self|other>|^2`, insensitive to global phase.
    pub fn fidelity(&self, other: &Statevector) -> Result<f64> {
        Ok(self.overlap(other)?.norm_sqr())
    }

    /// `<psi|op|psi> / <psi|psi>` for a Hermitian `op`.
    pub fn expectation(&self, op: &DenseOperator, qubits: &[usize]) -> Result<f64> {
        let dev = op.hermitian_deviation();
        if dev > UNITARY_TOL {
            return Err(VbsError::NonHermitian {
                label: op.label().to_string(),
                deviation: dev,
            });
        }
        let mut image = self.clone();
        image.apply_operator(op, qubits, OpMode::AllowNonUnitary)?;
        let num: C64 = self
            .amps
            .iter()
            .zip(&image.amps)
            .map(|(a, b)| a.conj() * b)
            .sum();
        let ns = self.norm_sq();
        if ns < IMPOSSIBLE_PROB {
            return Err(VbsError::VanishingNorm { norm_sq: ns });
        }
        Ok(num.re / ns)
    }

    /// Norm of `op|psi>` relative to `|psi>`.
    pub fn image_norm(&self, op: &DenseOperator, qubits: &[usize]) -> Result<f64> {
        let mut image = self.clone();
        image.apply_operator(op, qubits, OpMode::AllowNonUnitary)?;
        Ok((image.norm_sq() / self.norm_sq()).sqrt())
    }

    /// Born probabilities of every basis state.
    pub fn probabilities(&self) -> Vec<f64> {
        let ns = self.norm_sq();
        self.amps.iter().map(|a| a.norm_sqr() / ns).collect()
    }

    /// Marginal distribution over `qubits` (first listed is most significant).
    pub fn marginal_probabilities(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        self.check_qubits(qubits)?;
        let k = qubits.len();
        let mut out = vec![0.0; 1 << k];
        for (i, p) in self.probabilities().into_iter().enumerate() {
            out[self.local_index(i, qubits)] += p;
        }
        Ok(out)
    }

    fn local_index(&self, i: usize, qubits: &[usize]) -> usize {
        qubits
            .iter()
            .fold(0, |acc, &q| (acc << 1) | usize::from(i & self.bit(q) != 0))
    }

    /// Seeded sampling of full basis outcomes.
    pub fn sample(&self, seed: u64, shots: u64) -> BTreeMap<usize, u64> {
        let mut cdf = Vec::with_capacity(self.amps.len());
        let mut acc = 0.0;
        for a in &self.amps {
            acc += a.norm_sqr();
            cdf.push(acc);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut hist = BTreeMap::new();
        let last = cdf.len() - 1;
        for _ in 0..shots {
            let r: f64 = rng.gen::<f64>() * acc;
            let idx = cdf.partition_point(|&c| c <= r).min(last);
            *hist.entry(idx).or_insert(0) += 1;
        }
        hist
    }

    /// Seeded sampling restricted to `qubits`; keys are local indices.
    pub fn sample_qubits(&self, qubits: &[usize], seed: u64, shots: u64) -> Result<BTreeMap<usize, u64>> {
        self.check_qubits(qubits)?;
        let mut out = BTreeMap::new();
        for (idx, count) in self.sample(seed, shots) {
            *out.entry(self.local_index(idx, qubits)).or_insert(0) += count;
        }
        Ok(out)
    }

    /// `self (x) other`, `self` more significant.
    pub fn tensor(&self, other: &Statevector) -> Result<Statevector> {
        check_cap(self.n + other.n)?;
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(Statevector {
            n: self.n + other.n,
            amps,
            tracked_norm_sq: self.tracked_norm_sq * other.tracked_norm_sq,
        })
    }

    /// Extracts the logical state living on `positions` (logical qubit `k` sits
    /// on `positions[k]`) assuming every other qubit is `|0>`. Returns the
    /// state and the weight found outside that subspace.
    pub fn extract(&self, positions: &[usize]) -> Result<(Statevector, f64)> {
        self.check_qubits(positions)?;
        let k = positions.len();
        let mut amps = vec![C64::new(0.0, 0.0); 1 << k];
        let mut covered = 0usize;
        for &p in positions {
            covered |= self.bit(p);
        }
        let mut stray = 0.0;
        for (i, a) in self.amps.iter().enumerate() {
            if i & !covered != 0 {
                stray += a.norm_sqr();
                continue;
            }
            amps[self.local_index(i, positions)] = *a;
        }
        let mut sv = Statevector::from_amplitudes(amps)?;
        sv.tracked_norm_sq = self.tracked_norm_sq;
        Ok((sv, stray / self.norm_sq()))
    }

    /// Debug dump: little-endian f64 pairs (re, im) per amplitude.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        for a in &self.amps {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spinops::{exp_minus_i_pi_symmetrizer, swap_operator};

    fn h() -> DenseOperator {
        let r = 1.0 / 2f64.sqrt();
        DenseOperator::from_real_rows(&[&[r, r], &[r, -r]], "H").unwrap()
    }

    #[test]
    fn zero_state() {
        let s = Statevector::new_zero_state(2).unwrap();
        assert_eq!(s.amplitudes()[0], C64::new(1.0, 0.0));
        assert_eq!(s.tracked_norm_sq(), 1.0);
        assert!(Statevector::new_zero_state(0).is_err());
    }

    #[test]
    fn swap_and_minus_swap() {
        let mut s = Statevector::basis_state(2, 0b01).unwrap();
        s.apply_unitary(&swap_operator(2, 0, 1), &[0, 1]).unwrap();
        assert_eq!(s.amplitudes()[0b10], C64::new(1.0, 0.0));
        let mut s = Statevector::basis_state(2, 0b01).unwrap();
        s.apply_unitary(&exp_minus_i_pi_symmetrizer(2).unwrap(), &[0, 1]).unwrap();
        assert!((s.amplitudes()[0b10] + 1.0).norm() < 1e-15);
    }

    #[test]
    fn identity_is_bitwise_noop() {
        let mut s = Statevector::new_zero_state(3).unwrap();
        s.apply_unitary(&h(), &[1]).unwrap();
        let before = s.amplitudes().to_vec();
        s.apply_unitary(&DenseOperator::identity(4), &[2, 0]).unwrap();
        assert_eq!(before, s.amplitudes());
    }

    #[test]
    fn operator_qubit_order_is_significance_order() {
        // X on local qubit 0 (most significant) of the op applied to qubits [2, 0]
        // must flip global qubit 2.
        let x = DenseOperator::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]], "X").unwrap();
        let xi = x.kron(&DenseOperator::identity(2));
        let mut s = Statevector::new_zero_state(3).unwrap();
        s.apply_unitary(&xi, &[2, 0]).unwrap();
        assert_eq!(s.amplitudes()[0b001], C64::new(1.0, 0.0));
    }

    #[test]
    fn rejects_nonunitary_without_opt_in() {
        let mut s = Statevector::new_zero_state(1).unwrap();
        let p = DenseOperator::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]], "P").unwrap();
        assert!(matches!(s.apply_unitary(&p, &[0]), Err(VbsError::NonUnitary { .. })));
        assert!(s.apply_operator(&p, &[0], OpMode::AllowNonUnitary).is_ok());
        assert!(matches!(
            s.apply_unitary(&DenseOperator::identity(4), &[0]),
            Err(VbsError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn projection() {
        let mut s = Statevector::new_zero_state(1).unwrap();
        s.apply_unitary(&h(), &[0]).unwrap();
        let p = s.project_qubit(0, 1, true).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        assert!((s.tracked_norm_sq() - 0.5).abs() < 1e-15);
        assert!(matches!(s.project_qubit(0, 0, true), Err(VbsError::ImpossibleOutcome { .. })));
    }

    #[test]
    fn singlet_projection() {
        let r = 1.0 / 2f64.sqrt();
        let mut s = Statevector::from_real(&[0.0, r, -r, 0.0]).unwrap();
        let p = s.project_qubit(0, 0, true).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        assert!((s.amplitudes()[1].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reset_definite_qubit() {
        let mut s = Statevector::basis_state(2, 0b10).unwrap();
        s.reset_qubit(0).unwrap();
        assert_eq!(s.amplitudes()[0], C64::new(1.0, 0.0));
        let mut s = Statevector::new_zero_state(1).unwrap();
        s.apply_unitary(&h(), &[0]).unwrap();
        assert!(matches!(s.reset_qubit(0), Err(VbsError::IndefiniteReset(0))));
    }

    #[test]
    fn overlap_and_nonunitary() {
        let a = Statevector::basis_state(2, 1).unwrap();
        let b = Statevector::basis_state(2, 2).unwrap();
        assert_eq!(a.overlap(&b).unwrap(), C64::new(0.0, 0.0));
        assert!((a.overlap(&a).unwrap() - 1.0).norm() < 1e-15);
        let mut c = a.clone();
        let r = c.apply_nonunitary(&DenseOperator::identity(4), &[0, 1]).unwrap();
        assert!((r - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sampling_is_seeded() {
        let s = Statevector::new_zero_state(2).unwrap();
        let hist = s.sample(1, 100);
        assert_eq!(hist.get(&0), Some(&100));
        let mut t = Statevector::new_zero_state(1).unwrap();
        t.apply_unitary(&h(), &[0]).unwrap();
        assert_eq!(t.sample(7, 1000), t.sample(7, 1000));
        let ones = *t.sample(3, 100_000).get(&1).unwrap() as f64;
        let sigma = (100_000.0f64 * 0.25).sqrt();
        assert!((ones - 50_000.0).abs() < 3.0 * sigma);
    }

    #[test]
    fn extract_and_dump() {
        let s = Statevector::basis_state(3, 0b100).unwrap();
        let (sub, stray) = s.extract(&[2, 0]).unwrap();
        assert_eq!(stray, 0.0);
        assert_eq!(sub.amplitudes()[0b01], C64::new(1.0, 0.0));
        let mut buf = Vec::new();
        s.write_dump(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 * 16);
    }
}
