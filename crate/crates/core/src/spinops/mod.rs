//! Spin operators, symmetrizers and AKLT projectors as dense matrices.
//!
//! A spin-S site is encoded in 2S qubits (spin up = `|0>`). Site spin
//! operators are sums of the constituent spin-1/2 operators; on the
//! exchange-symmetric subspace they reproduce the spin-S algebra.

mod operator;

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

pub use operator::{kron_all, DenseOperator};

use crate::error::{Result, VbsError};

/// Largest qubit count accepted by [`symmetrizer`].
pub const SYMMETRIZER_CAP: usize = 5;
/// Largest qubit count accepted by [`total_spin_squared`].
pub const TOTAL_SPIN_CAP: usize = 6;
/// Largest qubit count used internally for link projectors (two spin-3/2 sites).
const LINK_CAP: usize = 6;

const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// A spin value stored as the integer 2S.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpinValue(u32);

impl SpinValue {
    pub const HALF: SpinValue = SpinValue(1);
    pub const ONE: SpinValue = SpinValue(2);
    pub const THREE_HALVES: SpinValue = SpinValue(3);

    pub fn new(twice_s: u32) -> Result<Self> {
        if twice_s == 0 {
            return Err(VbsError::UnsupportedSpin(0));
        }
        Ok(Self(twice_s))
    }

    pub fn twice_s(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// Dimension 2S+1 of the spin representation.
    pub fn multiplicity(self) -> usize {
        self.0 as usize + 1
    }

    /// Number of qubits encoding one site.
    pub fn qubits(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for SpinValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Cartesian spin components.
#[derive(Clone, Debug)]
pub struct SpinTriple {
    pub x: DenseOperator,
    pub y: DenseOperator,
    pub z: DenseOperator,
}

impl SpinTriple {
    pub fn components(&self) -> [&DenseOperator; 3] {
        [&self.x, &self.y, &self.z]
    }
}

/// Spin matrices in the basis m = S, S-1, ..., -S via ladder operators.
pub fn spin_matrices(s: SpinValue) -> SpinTriple {
    let d = s.multiplicity();
    let sv = s.value();
    // S+ |m> = sqrt(S(S+1) - m(m+1)) |m+1>; row index k has m = S - k.
    let mut plus = DMatrix::<C64>::zeros(d, d);
    for k in 1..d {
        let m = sv - k as f64;
        plus[(k - 1, k)] = C64::new((sv * (sv + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let minus = plus.adjoint();
    let x = (&plus + &minus) * C64::new(0.5, 0.0);
    let y = (&plus - &minus) * C64::new(0.0, -0.5);
    let z = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            C64::new(sv - i as f64, 0.0)
        } else {
            ZERO
        }
    });
    SpinTriple {
        x: DenseOperator::new(x, format!("Sx[{s}]")).unwrap(),
        y: DenseOperator::new(y, format!("Sy[{s}]")).unwrap(),
        z: DenseOperator::new(z, format!("Sz[{s}]")).unwrap(),
    }
}

/// Spin-1/2 component `axis` (0=x, 1=y, 2=z) acting on `qubit` of `n`.
fn embedded_half_spin(axis: usize, qubit: usize, n: usize) -> DenseOperator {
    let half = spin_matrices(SpinValue::HALF);
    let op = half.components()[axis].clone();
    let factors: Vec<DenseOperator> = (0..n)
        .map(|k| {
            if k == qubit {
                op.clone()
            } else {
                DenseOperator::identity(2)
            }
        })
        .collect();
    kron_all(&factors)
}

/// Total spin components of the listed qubits inside an `n`-qubit register.
pub fn collective_spin(qubits: &[usize], n: usize) -> [DenseOperator; 3] {
    let dim = 1usize << n;
    let mut out = [
        DenseOperator::zeros(dim),
        DenseOperator::zeros(dim),
        DenseOperator::zeros(dim),
    ];
    for (axis, slot) in out.iter_mut().enumerate() {
        for &q in qubits {
            *slot = slot.add(&embedded_half_spin(axis, q, n));
        }
    }
    out
}

/// `(S_total)^2` for `n_halves` spin-1/2 particles.
pub fn total_spin_squared(n_halves: usize) -> Result<DenseOperator> {
    if n_halves == 0 || n_halves > TOTAL_SPIN_CAP {
        return Err(VbsError::CapExceeded {
            what: "total_spin_squared qubits",
            requested: n_halves,
            cap: TOTAL_SPIN_CAP,
        });
    }
    let all: Vec<usize> = (0..n_halves).collect();
    let comps = collective_spin(&all, n_halves);
    let mut sq = DenseOperator::zeros(1 << n_halves);
    for c in &comps {
        sq = sq.add(&c.mul(c));
    }
    Ok(sq.with_label(format!("S_tot^2[{n_halves}]")))
}

/// All permutations of `0..n` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// Basis index after moving the state of qubit `k` to position `image[k]`.
fn permute_index(idx: usize, image: &[usize]) -> usize {
    let n = image.len();
    let mut out = 0;
    for (k, &target) in image.iter().enumerate() {
        let bit = (idx >> (n - 1 - k)) & 1;
        out |= bit << (n - 1 - target);
    }
    out
}

/// Qubit permutation operator: the state of qubit `k` is moved to `image[k]`.
pub fn permutation_operator(image: &[usize]) -> DenseOperator {
    let n = image.len();
    let dim = 1usize << n;
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    for j in 0..dim {
        m[(permute_index(j, image), j)] = ONE;
    }
    DenseOperator::new(m, format!("perm{image:?}")).unwrap()
}

/// SWAP of qubits `a` and `b` in an `n`-qubit register.
pub fn swap_operator(n: usize, a: usize, b: usize) -> DenseOperator {
    let mut image: Vec<usize> = (0..n).collect();
    image.swap(a, b);
    permutation_operator(&image).with_label(format!("SWAP({a},{b})"))
}

fn check_sym_cap(n: usize, cap: usize) -> Result<()> {
    if n == 0 || n > cap {
        return Err(VbsError::CapExceeded {
            what: "symmetrizer qubits",
            requested: n,
            cap,
        });
    }
    Ok(())
}

fn symmetrizer_by_permutations(n: usize) -> DenseOperator {
    let dim = 1usize << n;
    let perms = all_permutations(n);
    let w = 1.0 / perms.len() as f64;
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    for p in &perms {
        for j in 0..dim {
            m[(permute_index(j, p), j)] += C64::new(w, 0.0);
        }
    }
    DenseOperator::new(m, format!("Sym[{n}]")).unwrap()
}

/// Symmetrizer on `n_halves` qubits as the uniform average over all qubit
/// permutations.
pub fn symmetrizer(n_halves: usize) -> Result<DenseOperator> {
    check_sym_cap(n_halves, SYMMETRIZER_CAP)?;
    Ok(symmetrizer_by_permutations(n_halves))
}

/// Symmetrizer built as a normalized product of `(S_tot^2 - S'(S'+1))` over
/// all total spins S' below the maximal one.
pub fn symmetrizer_from_spin_projector(n_halves: usize) -> Result<DenseOperator> {
    check_sym_cap(n_halves, SYMMETRIZER_CAP)?;
    let s2 = total_spin_squared(n_halves)?;
    let dim = 1usize << n_halves;
    let smax = n_halves as f64 / 2.0;
    let mut acc = DenseOperator::identity(dim);
    let mut sp = smax - 1.0;
    while sp >= -1e-9 {
        let shift = sp * (sp + 1.0);
        let factor = s2.sub(&DenseOperator::identity(dim).scale_re(shift));
        acc = acc.mul(&factor).scale_re(1.0 / (smax * (smax + 1.0) - shift));
        sp -= 1.0;
    }
    Ok(acc.with_label(format!("Sym[{n_halves}]")))
}

/// `exp(-i theta Sym) = I - (1 - e^{-i theta}) Sym`.
pub fn exp_symmetrizer(n_halves: usize, theta: f64) -> Result<DenseOperator> {
    let s = symmetrizer(n_halves)?;
    let c = ONE - C64::from_polar(1.0, -theta);
    Ok(DenseOperator::identity(1 << n_halves)
        .sub(&s.scale(c))
        .with_label(format!("exp(-i{theta}Sym[{n_halves}])")))
}

/// `exp(-i pi Sym) = I - 2 Sym`.
pub fn exp_minus_i_pi_symmetrizer(n_halves: usize) -> Result<DenseOperator> {
    let s = symmetrizer(n_halves)?;
    Ok(DenseOperator::identity(1 << n_halves)
        .sub(&s.scale_re(2.0))
        .with_label(format!("U_sym{n_halves}")))
}

/// `S_A . S_B` for two adjacent sites holding `ta` and `tb` qubits.
pub fn site_dot_product(ta: usize, tb: usize) -> DenseOperator {
    let n = ta + tb;
    let a: Vec<usize> = (0..ta).collect();
    let b: Vec<usize> = (ta..n).collect();
    let sa = collective_spin(&a, n);
    let sb = collective_spin(&b, n);
    let mut acc = DenseOperator::zeros(1 << n);
    for k in 0..3 {
        acc = acc.add(&sa[k].mul(&sb[k]));
    }
    acc.with_label(format!("SA.SB[{ta},{tb}]"))
}

/// Polynomial coefficients (constant first) of the two-site projector onto
/// total spin 2S, in powers of `S_A . S_B`.
pub fn aklt_coefficients(s: SpinValue) -> Result<&'static [f64]> {
    match s.twice_s() {
        2 => Ok(&[1.0 / 3.0, 1.0 / 2.0, 1.0 / 6.0]),
        3 => Ok(&[11.0 / 192.0, 27.0 / 160.0, 29.0 / 360.0, 1.0 / 90.0]),
        t => Err(VbsError::UnsupportedSpin(t)),
    }
}

/// Two-site AKLT projector on 4S qubits (site A first). It is a projector on
/// the product of the two single-site symmetric subspaces.
pub fn aklt_two_site_projector(s: SpinValue) -> Result<DenseOperator> {
    let coeffs = aklt_coefficients(s)?;
    let t = s.qubits();
    let x = site_dot_product(t, t);
    let dim = 1usize << (2 * t);
    let mut acc = DenseOperator::zeros(dim);
    let mut pow = DenseOperator::identity(dim);
    for &c in coeffs {
        acc = acc.add(&pow.scale_re(c));
        pow = pow.mul(&x);
    }
    Ok(acc.with_label(format!("P_AKLT[{s}]")))
}

/// `Sym(ta) (x) Sym(tb)`.
pub fn site_pair_symmetrizer(ta: usize, tb: usize) -> Result<DenseOperator> {
    let a = if ta == 1 {
        DenseOperator::identity(2)
    } else {
        symmetrizer_by_permutations_checked(ta)?
    };
    let b = if tb == 1 {
        DenseOperator::identity(2)
    } else {
        symmetrizer_by_permutations_checked(tb)?
    };
    Ok(a.kron(&b))
}

fn symmetrizer_by_permutations_checked(n: usize) -> Result<DenseOperator> {
    check_sym_cap(n, LINK_CAP)?;
    Ok(symmetrizer_by_permutations(n))
}

/// Projector onto maximal total spin of two sites holding `ta` and `tb`
/// qubits, valid on states already symmetric within each site. It equals the
/// symmetrizer of all `ta + tb` qubits, which works for mixed spins too.
pub fn max_spin_link_projector(ta: usize, tb: usize) -> Result<DenseOperator> {
    Ok(symmetrizer_by_permutations_checked(ta + tb)?.with_label(format!("Pmax[{ta},{tb}]")))
}

/// Bilinear-biquadratic term `x + beta x^2`, `x = S_A . S_B`, for two spin-1
/// sites (4 qubits).
pub fn blbq_hamiltonian_term(beta: f64) -> Result<DenseOperator> {
    if !beta.is_finite() {
        return Err(VbsError::InvalidArgument("beta must be finite".into()));
    }
    let x = site_dot_product(2, 2);
    Ok(x.add(&x.mul(&x).scale_re(beta)).with_label(format!("H_BLBQ[{beta}]")))
}

/// Fraction `(c+1)/2^c` of spin configurations kept by the symmetrizer on a
/// site of coordination `c`.
pub fn symmetric_fraction(coordination: u32) -> Result<Ratio<u64>> {
    if coordination == 0 || coordination > 62 {
        return Err(VbsError::InvalidArgument(format!(
            "coordination {coordination} outside 1..=62"
        )));
    }
    Ok(Ratio::new(coordination as u64 + 1, 1u64 << coordination))
}

/// Convenience `f64` version of [`symmetric_fraction`].
pub fn symmetric_fraction_f64(coordination: u32) -> Result<f64> {
    let r = symmetric_fraction(coordination)?;
    Ok(*r.numer() as f64 / *r.denom() as f64)
}
