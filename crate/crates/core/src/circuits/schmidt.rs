//! State preparation through the Schmidt decomposition, and the island
//! circuits built on it.
//!
//! A target on `n` qubits is cut into the first `a = n/2` qubits (small side)
//! and the remaining `b` qubits. With `M = U S V^dag`, the circuit prepares
//! `sum_k s_k |k>` on the small side (block B), copies the index onto the last
//! `a` qubits of the big side with a CNOT ladder, then applies `U` on the small
//! side and `W` on the big side, where `W|k>` is the k-th right singular vector.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::costs;
use super::exec::circuit_unitary;
use super::ir::{cx, ry, u_angles, Circuit, CostKey, DeclaredCost, Gate, OpaqueGate};
use crate::error::{Result, VbsError};
use crate::spinops::{symmetrizer, DenseOperator, SpinValue};
use crate::statesim::{OpMode, Statevector};

const ZERO_TOL: f64 = 1e-12;

/// Pieces of a Schmidt preparation on local qubits `0..n`.
#[derive(Clone, Debug)]
pub struct SchmidtCircuit {
    pub n_qubits: usize,
    pub n_small: usize,
    pub schmidt_values: Vec<f64>,
    pub b: Vec<Gate>,
    pub ladder: Vec<Gate>,
    pub u: Gate,
    pub v: Gate,
}

impl SchmidtCircuit {
    pub fn is_product(&self) -> bool {
        self.b.is_empty() && self.ladder.is_empty()
    }

    pub fn gates(&self) -> Vec<Gate> {
        let mut g = self.b.clone();
        g.extend(self.ladder.iter().cloned());
        g.push(self.u.clone());
        g.push(self.v.clone());
        g
    }

    pub fn to_circuit(&self) -> Result<Circuit> {
        Circuit::from_gates(self.n_qubits, self.gates()).map(|c| c.with_meta("method", "schmidt"))
    }

    /// Replaces B by one opaque block with a declared cost.
    pub fn wrap_b(&mut self, cost: DeclaredCost) -> Result<()> {
        if self.b.is_empty() {
            return Ok(());
        }
        let local = Circuit::from_gates(self.n_small, self.b.clone())?;
        let m = circuit_unitary(&local)?.with_label("schmidt_b");
        let o = OpaqueGate::new("schmidt_b", (0..self.n_small).collect(), m)?
            .with_uniform_cost(cost)
            .with_expansion(self.b.clone());
        self.b = vec![Gate::Opaque(o)];
        Ok(())
    }

    /// Overrides the declared cost of the U and V blocks when they are opaque.
    pub fn set_uv_costs(&mut self, u: DeclaredCost, v: DeclaredCost) {
        for (g, c) in [(&mut self.u, u), (&mut self.v, v)] {
            if let Gate::Opaque(o) = g {
                o.costs.clear();
                for k in [CostKey::AllToAll, CostKey::Linear, CostKey::HeavyHex] {
                    o.costs.insert(k, c);
                }
            }
        }
    }
}

/// Completes the given orthonormal columns to a unitary by column-pivoted
/// Gram-Schmidt over the standard basis. Columns that are numerically zero
/// or dependent are replaced.
pub fn complete_unitary(cols: &[Vec<C64>], dim: usize, label: &str) -> Result<DenseOperator> {
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(dim);
    let orth = |v: &mut Vec<C64>, basis: &[Vec<C64>]| {
        for _ in 0..2 {
            for b in basis {
                let p: C64 = b.iter().zip(v.iter()).map(|(x, y)| x.conj() * y).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= p * bi;
                }
            }
        }
        v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    };
    for c in cols {
        let mut v = c.clone();
        if v.len() != dim {
            return Err(VbsError::DimensionMismatch {
                expected: dim,
                got: v.len(),
            });
        }
        let n = orth(&mut v, &basis);
        if n > 1e-9 {
            v.iter_mut().for_each(|z| *z /= n);
            basis.push(v);
        } else {
            basis.push(Vec::new()); // placeholder filled below
        }
    }
    // fill placeholders and remaining columns from the standard basis,
    // picking the candidate with the largest residual each time
    let mut filled: Vec<Vec<C64>> = Vec::with_capacity(dim);
    let fixed: Vec<Option<Vec<C64>>> = basis.into_iter().map(|v| if v.is_empty() { None } else { Some(v) }).collect();
    let known: Vec<Vec<C64>> = fixed.iter().flatten().cloned().collect();
    let mut extra: Vec<Vec<C64>> = Vec::new();
    while known.len() + extra.len() < dim {
        let mut best: Option<(f64, Vec<C64>)> = None;
        for e in 0..dim {
            let mut v = vec![C64::new(0.0, 0.0); dim];
            v[e] = C64::new(1.0, 0.0);
            let all: Vec<Vec<C64>> = known.iter().chain(extra.iter()).cloned().collect();
            let n = orth(&mut v, &all);
            if best.as_ref().is_none_or(|(bn, _)| n > *bn + 1e-12) {
                v.iter_mut().for_each(|z| *z /= n);
                best = Some((n, v));
            }
        }
        let (n, v) = best.expect("dim > 0");
        if n < 1e-9 {
            return Err(VbsError::RankDeficient(format!("{label}: completion failed")));
        }
        extra.push(v);
    }
    let mut extra_it = extra.into_iter();
    for f in fixed {
        filled.push(f.unwrap_or_else(|| extra_it.next().expect("enough completions")));
    }
    filled.extend(extra_it);
    let m = DMatrix::from_fn(dim, dim, |i, j| filled[j][i]);
    DenseOperator::new(m, label)
}

fn unitary_gate(m: DenseOperator, qubits: Vec<usize>, label: &str) -> Result<Gate> {
    if qubits.len() == 1 {
        let (theta, phi, lambda, _) = u_angles(&m)?;
        return Ok(Gate::U {
            theta,
            phi,
            lambda,
            qubit: qubits[0],
        });
    }
    let mut o = OpaqueGate::new(label, qubits.clone(), m.with_label(label))?;
    if let Some(c) = costs::generic_unitary(qubits.len()) {
        o = o.with_uniform_cost(c);
    }
    Ok(Gate::Opaque(o))
}

/// Schmidt decomposition of `amps` (length `2^n`, `n >= 2`).
pub fn schmidt_decompose(amps: &[C64]) -> Result<SchmidtCircuit> {
    let dim = amps.len();
    if dim < 4 || !dim.is_power_of_two() {
        return Err(VbsError::InvalidArgument(format!("schmidt target of length {dim}")));
    }
    let n = dim.trailing_zeros() as usize;
    if n > 6 {
        return Err(VbsError::CapExceeded {
            what: "schmidt qubits",
            requested: n,
            cap: 6,
        });
    }
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm < ZERO_TOL {
        return Err(VbsError::VanishingNorm { norm_sq: norm * norm });
    }
    let a = n / 2;
    let b = n - a;
    let (da, db) = (1usize << a, 1usize << b);
    let m = DMatrix::from_fn(da, db, |i, j| amps[i * db + j] / norm);
    let svd = m.svd(true, true);
    let uu = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].partial_cmp(&svd.singular_values[x]).unwrap());
    let s: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let ucols: Vec<Vec<C64>> = order.iter().map(|&k| uu.column(k).iter().copied().collect()).collect();
    let vcols: Vec<Vec<C64>> = order.iter().map(|&k| vt.row(k).iter().copied().collect()).collect();

    let small: Vec<usize> = (0..a).collect();
    let big: Vec<usize> = (a..n).collect();
    let product = s.len() < 2 || s[1] < ZERO_TOL;
    let (b_gates, ladder, ucols, vcols) = if product {
        (Vec::new(), Vec::new(), vec![ucols[0].clone()], vec![vcols[0].clone()])
    } else {
        let bg = prepare_real_amplitudes(&s, a)?;
        let ladder = (0..a).map(|i| cx(small[i], big[b - a + i])).collect();
        (bg, ladder, ucols, vcols)
    };
    let um = complete_unitary(&ucols, da, "schmidt_u")?;
    let vm = complete_unitary(&vcols, db, "schmidt_v")?;
    Ok(SchmidtCircuit {
        n_qubits: n,
        n_small: a,
        schmidt_values: s,
        b: b_gates,
        ladder,
        u: unitary_gate(um, small, "schmidt_u")?,
        v: unitary_gate(vm, big, "schmidt_v")?,
    })
}

/// Gates on qubits `0..k` preparing `sum_i s_i |i>` from `|0>` (entries of
/// `s` beyond `2^k` must vanish).
fn prepare_real_amplitudes(s: &[f64], k: usize) -> Result<Vec<Gate>> {
    let mut v = vec![C64::new(0.0, 0.0); 1 << k];
    for (i, &x) in s.iter().enumerate().take(1 << k) {
        v[i] = C64::new(x, 0.0);
    }
    if k == 1 {
        let theta = 2.0 * v[1].re.atan2(v[0].re);
        return Ok(vec![ry(theta, 0)]);
    }
    Ok(schmidt_decompose(&v)?.gates())
}

/// Circuit preparing `target` (2 to 6 qubits) with generic declared costs.
pub fn schmidt_prepare(target: &Statevector) -> Result<Circuit> {
    schmidt_decompose(target.amplitudes())?.to_circuit()
}

/// Island layout: qubit order and singlet pairs of a bulk island with `t`
/// links. Order is `[p0, s0, s1, p1, s2, p2, ...]`; singlets run
/// `(p0, s0)`, `(s1, p1)`, ... with the first member on top.
pub fn bulk_island_layout(t: usize) -> (Vec<usize>, Vec<(usize, usize)>) {
    let site: Vec<usize> = (0..t).map(|k| if k == 0 { 1 } else { 2 * k }).collect();
    let pairs = (0..t).map(|k| (2 * k, 2 * k + 1)).collect();
    (site, pairs)
}

/// `Sym(site) prod singlet(pairs) prod |fixed>` on `n` qubits, normalized.
pub fn symmetrized_product(
    n: usize,
    site: &[usize],
    singlets: &[(usize, usize)],
    fixed: &[(usize, u8)],
) -> Result<Statevector> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
    let bit = |q: usize| 1usize << (n - 1 - q);
    let base: usize = fixed.iter().filter(|(_, b)| *b == 1).map(|(q, _)| bit(*q)).sum();
    for mask in 0..(1usize << singlets.len()) {
        let mut idx = base;
        let mut sign = 1.0;
        for (k, &(top, bot)) in singlets.iter().enumerate() {
            if mask >> k & 1 == 0 {
                idx |= bit(bot); // |01>
            } else {
                idx |= bit(top); // -|10>
                sign = -sign;
            }
        }
        amps[idx] = C64::new(sign * r.powi(singlets.len() as i32), 0.0);
    }
    let mut sv = Statevector::from_amplitudes(amps)?;
    if site.len() > 1 {
        sv.apply_operator(&symmetrizer(site.len())?, site, OpMode::AllowNonUnitary)?;
    }
    sv.normalize()?;
    Ok(sv)
}

/// Normalized bulk island state for spin `s`.
pub fn island_state(s: SpinValue) -> Result<Statevector> {
    let t = s.qubits();
    let (site, pairs) = bulk_island_layout(t);
    symmetrized_product(2 * t, &site, &pairs, &[])
}

/// Schmidt circuit for an island target, with the declared island costs
/// applied when `twice_s` has an entry in the cost table.
pub fn island_schmidt(target: &Statevector, twice_s: Option<u32>) -> Result<SchmidtCircuit> {
    let mut sc = schmidt_decompose(target.amplitudes())?;
    if let Some(c) = twice_s.and_then(costs::island) {
        sc.set_uv_costs(c.u, c.v);
        if let Some(bc) = c.b {
            sc.wrap_b(bc)?;
        }
    }
    Ok(sc)
}

/// Island preparation circuit on `4S` local qubits.
pub fn island_prep_circuit(s: SpinValue) -> Result<Circuit> {
    if !matches!(s.twice_s(), 2 | 3) {
        return Err(VbsError::UnsupportedSpin(s.twice_s()));
    }
    let target = island_state(s)?;
    Ok(island_schmidt(&target, Some(s.twice_s()))?
        .to_circuit()?
        .with_meta("method", "island")
        .with_meta("spin", s.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::exec::{simulate, SimMode};

    fn check_prepares(target: &Statevector) {
        let c = schmidt_prepare(target).unwrap();
        let out = simulate(&c, SimMode::PostSelect).unwrap().state;
        assert!(out.fidelity(target).unwrap() > 1.0 - 1e-10);
    }

    #[test]
    fn bell_uses_one_cnot() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let t = Statevector::from_real(&[r, 0.0, 0.0, r]).unwrap();
        let sc = schmidt_decompose(t.amplitudes()).unwrap();
        assert_eq!(sc.ladder.len(), 1);
        assert_eq!(sc.b.len(), 1);
        assert!(matches!(sc.b[0], Gate::U { .. }));
        check_prepares(&t);
    }

    #[test]
    fn product_skips_cnot() {
        let t = Statevector::from_real(&[0.6, 0.8, 0.0, 0.0]).unwrap();
        let sc = schmidt_decompose(t.amplitudes()).unwrap();
        assert!(sc.is_product());
        check_prepares(&t);
    }

    #[test]
    fn random_targets() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for n in 2..=6 {
            let amps: Vec<C64> = (0..1 << n).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
            check_prepares(&Statevector::from_amplitudes(amps).unwrap());
        }
    }

    #[test]
    fn completion_is_unitary() {
        let c = vec![vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8), C64::new(0.0, 0.0)]];
        let u = complete_unitary(&c, 3, "t").unwrap();
        assert!(u.is_unitary(1e-12));
        assert!((u.get(1, 0) - C64::new(0.0, 0.8)).norm() < 1e-15);
    }
}
