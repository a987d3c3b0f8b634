//! Hand-rolled reference constructions used as test oracles. Nothing here
//! calls into the library's operator or state code.

#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

/// All permutations of `0..n`.
pub fn perms(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in perms(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn bit(i: usize, q: usize, n: usize) -> usize {
    (i >> (n - 1 - q)) & 1
}

/// Symmetrizer on `n` qubits built by permuting basis-state bits.
pub fn sym_oracle(n: usize) -> DMatrix<f64> {
    let dim = 1 << n;
    let ps = perms(n);
    let w = 1.0 / ps.len() as f64;
    let mut m = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for p in &ps {
            let mut j = 0;
            for (k, &pk) in p.iter().enumerate() {
                j |= bit(i, k, n) << (n - 1 - pk);
            }
            m[(j, i)] += w;
        }
    }
    m
}

/// Applies a `2^k x 2^k` real matrix to `qubits` of an `n`-qubit real vector
/// (qubit 0 is the most significant bit).
pub fn apply_real(v: &[f64], op: &DMatrix<f64>, qubits: &[usize], n: usize) -> Vec<f64> {
    let k = qubits.len();
    let mut out = vec![0.0; v.len()];
    for (i, &a) in v.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let mut col = 0;
        for &q in qubits {
            col = (col << 1) | bit(i, q, n);
        }
        let mut rest = i;
        for &q in qubits {
            rest &= !(1 << (n - 1 - q));
        }
        for row in 0..(1 << k) {
            let x = op[(row, col)];
            if x == 0.0 {
                continue;
            }
            let mut j = rest;
            for (t, &q) in qubits.iter().enumerate() {
                j |= ((row >> (k - 1 - t)) & 1) << (n - 1 - q);
            }
            out[j] += x * a;
        }
    }
    out
}

/// Product of singlets `(|01> - |10>)/sqrt2` on `pairs` with the remaining
/// listed qubits fixed to the given bits; all other qubits `|0>`.
pub fn singlet_product(n: usize, pairs: &[(usize, usize)], fixed: &[(usize, usize)]) -> Vec<f64> {
    let mut v = vec![0.0; 1 << n];
    let mut base = 0;
    for &(q, b) in fixed {
        base |= b << (n - 1 - q);
    }
    let r = (0.5f64).sqrt().powi(pairs.len() as i32);
    for mask in 0..(1usize << pairs.len()) {
        let mut idx = base;
        let mut sign = 1.0;
        for (k, &(a, b)) in pairs.iter().enumerate() {
            if mask >> k & 1 == 0 {
                idx |= 1 << (n - 1 - b);
            } else {
                idx |= 1 << (n - 1 - a);
                sign = -sign;
            }
        }
        v[idx] = sign * r;
    }
    v
}

pub fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Fidelity between a complex state and a real one (both normalized here).
pub fn fidelity(a: &[C64], b: &[f64]) -> f64 {
    let na: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let nb = norm_sq(b);
    let ov: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    ov.norm_sqr() / (na * nb)
}

/// Largest entry difference after removing the global phase of `a`.
pub fn phase_aligned_diff(a: &[C64], b: &[f64]) -> f64 {
    let k = b
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
        .map(|x| x.0)
        .unwrap();
    let phase = a[k] / a[k].norm() * b[k].signum();
    a.iter()
        .zip(b)
        .map(|(x, y)| (x / phase - y).norm())
        .fold(0.0, f64::max)
}

/// Spin-1 states (basis `m = +1, 0, -1`) from a qubit state whose site
/// qubit pairs are `sites`. Returns the spin amplitudes and the weight left
/// outside the symmetric subspace.
pub fn to_spin_one(amps: &[C64], n_qubits: usize, sites: &[(usize, usize)]) -> (Vec<C64>, f64) {
    let n = sites.len();
    let mut out = vec![C64::new(0.0, 0.0); 3usize.pow(n as u32)];
    let r = (0.5f64).sqrt();
    for (i, a) in amps.iter().enumerate() {
        if a.norm() == 0.0 {
            continue;
        }
        let mut idx = 0;
        let mut w = 1.0;
        for &(p, q) in sites {
            let m = bit(i, p, n_qubits) + bit(i, q, n_qubits);
            if m == 1 {
                w *= r;
            }
            idx = idx * 3 + m;
        }
        out[idx] += a * w;
    }
    let kept: f64 = out.iter().map(|z| z.norm_sqr()).sum();
    let total: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    (out, total - kept)
}

/// `S_a . S_b` for two spin-1 sites, basis `m = +1, 0, -1` per site.
pub fn spin_one_dot() -> DMatrix<f64> {
    let s2 = 2f64.sqrt();
    let sz = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0]);
    let sp = DMatrix::from_row_slice(3, 3, &[0.0, s2, 0.0, 0.0, 0.0, s2, 0.0, 0.0, 0.0]);
    let sm = sp.transpose();
    sz.kronecker(&sz) + (sp.kronecker(&sm) + sm.kronecker(&sp)) * 0.5
}

/// Two-site AKLT term `S.S + (S.S)^2 / 3`.
pub fn aklt_term() -> DMatrix<f64> {
    let d = spin_one_dot();
    &d + &d * &d / 3.0
}

/// Projector onto total spin 2 of two spin-1 sites.
pub fn spin_two_projector() -> DMatrix<f64> {
    let d = spin_one_dot();
    let id = DMatrix::<f64>::identity(9, 9);
    (&d + &id * 2.0) * (&d + &id) / 6.0
}

/// Applies a two-site operator on spin-1 sites `a`, `b` of an `n`-site state.
pub fn apply_two_site(v: &[C64], op: &DMatrix<f64>, a: usize, b: usize, n: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); v.len()];
    let digit = |i: usize, s: usize| (i / 3usize.pow((n - 1 - s) as u32)) % 3;
    for (i, x) in v.iter().enumerate() {
        if x.norm() == 0.0 {
            continue;
        }
        let (da, db) = (digit(i, a), digit(i, b));
        let base = i - da * 3usize.pow((n - 1 - a) as u32) - db * 3usize.pow((n - 1 - b) as u32);
        for ra in 0..3 {
            for rb in 0..3 {
                let m = op[(ra * 3 + rb, da * 3 + db)];
                if m != 0.0 {
                    let j = base + ra * 3usize.pow((n - 1 - a) as u32) + rb * 3usize.pow((n - 1 - b) as u32);
                    out[j] += x * m;
                }
            }
        }
    }
    out
}

pub fn cnorm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Full AKLT Hamiltonian of an open spin-1 chain.
pub fn open_chain_hamiltonian(n: usize) -> DMatrix<f64> {
    let dim = 3usize.pow(n as u32);
    let h2 = aklt_term();
    let mut h = DMatrix::zeros(dim, dim);
    for i in 0..n - 1 {
        let left = DMatrix::<f64>::identity(3usize.pow(i as u32), 3usize.pow(i as u32));
        let right = DMatrix::<f64>::identity(3usize.pow((n - 2 - i) as u32), 3usize.pow((n - 2 - i) as u32));
        h += left.kronecker(&h2).kronecker(&right);
    }
    h
}

/// Lowest eigenvalue and its multiplicity (eigenvalues within `tol`).
pub fn ground_level(h: &DMatrix<f64>, tol: f64) -> (f64, usize) {
    let e = SymmetricEigen::new(h.clone()).eigenvalues;
    let min = e.iter().copied().fold(f64::INFINITY, f64::min);
    (min, e.iter().filter(|&&x| x - min < tol).count())
}

/// `|W_m>`: uniform superposition of single excitations.
pub fn w_state(m: usize) -> Vec<f64> {
    let mut v = vec![0.0; 1 << m];
    for k in 0..m {
        v[1 << k] = 1.0 / (m as f64).sqrt();
    }
    v
}

/// Expected VBS norm of an open spin-1 chain or ring, by direct
/// symmetrization of the singlet product. Site `i` owns qubits `2i, 2i+1`.
pub fn chain_norm_oracle(n: usize, ring: bool, left_bit: usize, right_bit: usize) -> f64 {
    let nq = 2 * n;
    let (pairs, fixed): (Vec<(usize, usize)>, Vec<(usize, usize)>) = if ring {
        ((0..n).map(|i| (2 * i + 1, (2 * i + 2) % nq)).collect(), Vec::new())
    } else {
        (
            (0..n - 1).map(|i| (2 * i + 1, 2 * i + 2)).collect(),
            vec![(0, left_bit), (nq - 1, right_bit)],
        )
    };
    let mut v = singlet_product(nq, &pairs, &fixed);
    let s = sym_oracle(2);
    for i in 0..n {
        v = apply_real(&v, &s, &[2 * i, 2 * i + 1], nq);
    }
    norm_sq(&v)
}
