//! Matrix-product form of the spin-1 VBS chain and its sequential
//! preparation by inverted disentanglers.
//!
//! Site `i` owns qubits `2i` (left) and `2i+1` (right); the physical index
//! of a tensor is `p = 2 sL + sR`. Preparation runs right to left: the bond
//! to the left of site `i` is carried on qubit `2i-1` until site `i-1`
//! consumes it. A ring uses one extra ancilla, qubit `2N`, post-selected on
//! `|0>`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::circuits::exec::{simulate, SimMode};
use crate::circuits::ir::{Circuit, DeclaredCost, Gate, OpaqueGate};
use crate::circuits::schmidt::{complete_unitary, schmidt_prepare};
use crate::circuits::costs;
use crate::error::{Result, VbsError};
use crate::lattice::ChainBoundary;
use crate::spinops::DenseOperator;
use crate::statesim::Statevector;

/// Largest chain handled by [`prepare_via_mps`].
pub const MPS_SITE_CAP: usize = 6;

/// Embedding scale used when none is given.
pub const DEFAULT_EMBEDDING_SCALE: f64 = 1.0;

const CANON_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct MpsTensor {
    pub left_dim: usize,
    pub right_dim: usize,
    /// One `left_dim x right_dim` matrix per physical index `2 sL + sR`.
    pub mats: [DMatrix<f64>; 4],
    pub left_canonical: bool,
}

impl MpsTensor {
    pub fn new(mats: [DMatrix<f64>; 4]) -> Result<Self> {
        let (l, r) = mats[0].shape();
        if mats.iter().any(|m| m.shape() != (l, r)) {
            return Err(VbsError::InvalidArgument("tensor slices differ in shape".into()));
        }
        Ok(MpsTensor {
            left_dim: l,
            right_dim: r,
            mats,
            left_canonical: false,
        })
    }

    /// Max entry of `sum_p A_p^T A_p - I`.
    pub fn left_norm_deviation(&self) -> f64 {
        let mut s = DMatrix::<f64>::zeros(self.right_dim, self.right_dim);
        for m in &self.mats {
            s += m.transpose() * m;
        }
        s -= DMatrix::<f64>::identity(self.right_dim, self.right_dim);
        s.amax()
    }

    /// Rows `alpha * 4 + p`, columns the right bond.
    pub fn isometry(&self) -> DMatrix<f64> {
        DMatrix::from_fn(4 * self.left_dim, self.right_dim, |row, col| {
            self.mats[row % 4][(row / 4, col)]
        })
    }

    fn from_isometry(w: &DMatrix<f64>, left_dim: usize) -> Self {
        let right_dim = w.ncols();
        let mats = std::array::from_fn(|p| DMatrix::from_fn(left_dim, right_dim, |a, b| w[(a * 4 + p, b)]));
        MpsTensor {
            left_dim,
            right_dim,
            mats,
            left_canonical: false,
        }
    }
}

/// Bulk tensor of the spin-1 VBS chain.
pub fn vbs_local_tensor() -> MpsTensor {
    let t = (2.0f64 / 3.0).sqrt();
    let d = 1.0 / 6f64.sqrt();
    let uu = DMatrix::from_row_slice(2, 2, &[0.0, t, 0.0, 0.0]);
    let ud = DMatrix::from_row_slice(2, 2, &[-d, 0.0, 0.0, d]);
    let dd = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, -t, 0.0]);
    let mut a = MpsTensor::new([uu, ud.clone(), ud, dd]).expect("fixed shapes");
    a.left_canonical = true;
    a
}

/// MPS of the spin-1 VBS chain. A ring gets `n_sites` copies of the bulk
/// tensor. An open chain cuts the ring bond, fixes the free bond indices
/// from the boundary spins and is brought to left-canonical form.
pub fn vbs_mps(n_sites: usize, boundary: ChainBoundary) -> Result<Vec<MpsTensor>> {
    if n_sites < 2 {
        return Err(VbsError::InvalidArgument(format!("mps chain needs at least 2 sites, got {n_sites}")));
    }
    let a = vbs_local_tensor();
    match boundary {
        ChainBoundary::Ring => Ok(vec![a; n_sites]),
        ChainBoundary::Open { left, right } => {
            let x_l = left.bit() as usize;
            let x_r = 1 - right.bit() as usize;
            let mut ts = vec![a.clone(); n_sites];
            ts[0] = MpsTensor::new(std::array::from_fn(|p| a.mats[p].rows(x_l, 1).into_owned()))?;
            let last = n_sites - 1;
            ts[last] = MpsTensor::new(std::array::from_fn(|p| ts[last].mats[p].columns(x_r, 1).into_owned()))?;
            left_canonicalize(&ts)
        }
    }
}

/// One left-to-right sweep of polar decompositions. The norm left over
/// at the right end is dropped.
pub fn left_canonicalize(tensors: &[MpsTensor]) -> Result<Vec<MpsTensor>> {
    let mut out = Vec::with_capacity(tensors.len());
    let mut carry: Option<DMatrix<f64>> = None;
    for t in tensors {
        let mut t = t.clone();
        if let Some(r) = carry.take() {
            if r.ncols() != t.left_dim {
                return Err(VbsError::DimensionMismatch {
                    expected: r.ncols(),
                    got: t.left_dim,
                });
            }
            for m in t.mats.iter_mut() {
                *m = &r * &*m;
            }
            t.left_dim = r.nrows();
        }
        let w = t.isometry();
        let svd = w.svd(true, true);
        let smin = svd.singular_values.min();
        if smin < CANON_TOL {
            return Err(VbsError::RankDeficient(format!(
                "singular value {smin:.3e} would be discarded"
            )));
        }
        let u = svd.u.expect("u requested");
        let vt = svd.v_t.expect("v_t requested");
        let q = &u * &vt;
        let r = vt.transpose() * DMatrix::from_diagonal(&svd.singular_values) * &vt;
        let mut c = MpsTensor::from_isometry(&q, t.left_dim);
        c.left_canonical = true;
        out.push(c);
        carry = Some(r);
    }
    Ok(out)
}

/// Amplitudes `Tr(A_1 ... A_N)` (ring) or the single entry of the product
/// (open), indexed with site 0 most significant.
pub fn contract_mps(tensors: &[MpsTensor]) -> Vec<f64> {
    let n = tensors.len();
    let mut out = vec![0.0; 1 << (2 * n)];
    for (idx, amp) in out.iter_mut().enumerate() {
        let mut m = DMatrix::<f64>::identity(tensors[0].left_dim, tensors[0].left_dim);
        for (i, t) in tensors.iter().enumerate() {
            let p = (idx >> (2 * (n - 1 - i))) & 3;
            m *= &t.mats[p];
        }
        *amp = if m.is_square() { m.trace() } else { m[(0, 0)] };
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DisentanglerRole {
    FirstOpen,
    Bulk,
    LastOpen,
    FirstPeriodicEmbedded,
    LastPeriodicState,
}

/// Adjoint of a matrix-product disentangler: the gate used during
/// preparation. Its leading columns are the fixed ones; the rest is an
/// orthonormal completion.
#[derive(Clone, Debug)]
pub struct Disentangler {
    pub role: DisentanglerRole,
    pub matrix: DenseOperator,
    /// Embedding scale (periodic first site only).
    pub scale: Option<f64>,
}

fn to_complex(m: &DMatrix<f64>) -> Vec<Vec<C64>> {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|&x| C64::new(x, 0.0)).collect())
        .collect()
}

/// Completes a left-canonical tensor to its preparation unitary on
/// `(bond, sL, sR)`, or `(sL, sR)` when the left bond is trivial. Input
/// column `beta` is the right bond.
pub fn build_disentangler(tensor: &MpsTensor) -> Result<Disentangler> {
    let dev = tensor.left_norm_deviation();
    if !tensor.left_canonical || dev > 1e-10 {
        return Err(VbsError::RankDeficient(format!(
            "tensor is not left-canonical (deviation {dev:.3e})"
        )));
    }
    let role = match (tensor.left_dim, tensor.right_dim) {
        (1, 2) => DisentanglerRole::FirstOpen,
        (2, 2) => DisentanglerRole::Bulk,
        (2, 1) => DisentanglerRole::LastOpen,
        (l, r) => {
            return Err(VbsError::InvalidArgument(format!(
                "bond dimensions ({l}, {r}) are not supported"
            )))
        }
    };
    let w = tensor.isometry();
    let m = complete_unitary(&to_complex(&w), w.nrows(), "mps_d")?;
    Ok(Disentangler {
        role,
        matrix: m,
        scale: None,
    })
}

/// Ring tensor of the last site flattened to the normalized 16-vector over
/// `(gamma, sL, sR, delta)`, completed to a unitary with it as column 0.
pub fn periodic_boundary_state(tensor: &MpsTensor) -> Result<Disentangler> {
    if (tensor.left_dim, tensor.right_dim) != (2, 2) {
        return Err(VbsError::InvalidArgument("periodic tensor must have bond dimension 2".into()));
    }
    let mut v = vec![C64::new(0.0, 0.0); 16];
    for g in 0..2 {
        for p in 0..4 {
            for d in 0..2 {
                v[g * 8 + p * 2 + d] = C64::new(tensor.mats[p][(g, d)], 0.0);
            }
        }
    }
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm < CANON_TOL {
        return Err(VbsError::VanishingNorm { norm_sq: norm * norm });
    }
    v.iter_mut().for_each(|z| *z /= norm);
    Ok(Disentangler {
        role: DisentanglerRole::LastPeriodicState,
        matrix: complete_unitary(&[v], 16, "mps_ring_state")?,
        scale: None,
    })
}

/// The first-site tensor of a ring as a 4x4 matrix: rows the physical
/// index, columns `(left bond, right bond)`.
pub fn fused_first_site(tensor: &MpsTensor) -> DenseOperator {
    DenseOperator::from_fn(4, "a_tilde", |p, col| C64::new(tensor.mats[p][(col / 2, col % 2)], 0.0))
}

/// Largest admissible embedding scale, `1 / s_max`.
pub fn embedding_bound(a_tilde: &DenseOperator) -> f64 {
    let smax = a_tilde.matrix().clone().svd(false, false).singular_values.max();
    1.0 / smax
}

/// Embeds `n * a_tilde` as the top-left block of an 8x8 unitary. The
/// block below is `C = U (I - n^2 S^2)^{1/2} V^dagger`; the remaining four
/// columns complete the basis.
pub fn embed_nonunitary_periodic(a_tilde: &DenseOperator, n: f64) -> Result<Disentangler> {
    if a_tilde.dim() != 4 {
        return Err(VbsError::DimensionMismatch {
            expected: 4,
            got: a_tilde.dim(),
        });
    }
    let bound = embedding_bound(a_tilde);
    if !(n > 0.0 && n <= bound * (1.0 + 1e-12)) {
        return Err(VbsError::EmbeddingScale { n, bound });
    }
    let svd = a_tilde.matrix().clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let damp = svd
        .singular_values
        .map(|s| C64::new((1.0 - n * n * s * s).max(0.0).sqrt(), 0.0));
    let c = &u * DMatrix::from_diagonal(&damp) * &vt;
    let top = a_tilde.matrix() * C64::new(n, 0.0);
    let cols: Vec<Vec<C64>> = (0..4)
        .map(|j| top.column(j).iter().chain(c.column(j).iter()).copied().collect())
        .collect();
    Ok(Disentangler {
        role: DisentanglerRole::FirstPeriodicEmbedded,
        matrix: complete_unitary(&cols, 8, "u_a_tilde")?,
        scale: Some(n),
    })
}

/// Explicit bulk preparation unitary for the spin-1 chain in closed form,
/// used as a reference for the numerically completed one.
pub fn reference_bulk_disentangler() -> DenseOperator {
    let a = 2.0 * 2f64.sqrt() / 5.0 + 3f64.sqrt() / 30.0;
    let b = -(5.0 / 12.0 - a * a).sqrt();
    let r12 = 1.0 / 12f64.sqrt();
    let f = (a - 0.5 * b) / (r12 + 0.5 * b);
    let c = -(1.0 + f * f + 0.25 * (1.0 + f) * (1.0 + f)).powf(-0.5);
    let d = f * c;
    let e = -(c + d) / 2.0;
    let r6 = 1.0 / 6f64.sqrt();
    let r3 = 1.0 / 3f64.sqrt();
    let t = (2.0f64 / 3.0).sqrt();
    let rows: [[f64; 8]; 8] = [
        [0.0, t, 0.0, 0.0, 0.0, 0.0, 0.0, -r3],
        [-r6, 0.0, 0.0, a, a, c, 0.0, 0.0],
        [-r6, 0.0, 0.0, -r12, -r12, d, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, r6, 0.0, 0.5, -0.5, 0.0, 0.0, r3],
        [0.0, r6, 0.0, -0.5, 0.5, 0.0, 0.0, r3],
        [-t, 0.0, 0.0, b, b, e, 0.0, 0.0],
    ];
    DenseOperator::from_fn(8, "reference_d", |i, j| C64::new(rows[i][j], 0.0))
}

fn opaque(label: &str, qubits: Vec<usize>, m: &DenseOperator, cost: DeclaredCost) -> Result<Gate> {
    Ok(Gate::Opaque(
        OpaqueGate::new(label, qubits, m.clone().with_label(label))?.with_uniform_cost(cost),
    ))
}

/// Preparation circuit on `2N` data qubits (plus ancilla `2N` for a ring).
/// `scale` is the ring embedding scale (`None` for the default).
pub fn mps_circuit(n_sites: usize, boundary: ChainBoundary, scale: Option<f64>) -> Result<Circuit> {
    if !(2..=MPS_SITE_CAP).contains(&n_sites) {
        return Err(VbsError::CapExceeded {
            what: "mps sites",
            requested: n_sites,
            cap: MPS_SITE_CAP,
        });
    }
    let n = n_sites;
    let tensors = vbs_mps(n, boundary)?;
    let per_site = DeclaredCost::count(costs::MPS_CNOTS_PER_SITE);
    let generic2 = costs::generic_unitary(2).expect("two-qubit cost");
    let ring = matches!(boundary, ChainBoundary::Ring);
    let mut c = Circuit::new(if ring { 2 * n + 1 } else { 2 * n });
    if ring {
        let ds = periodic_boundary_state(&tensors[n - 1])?;
        let target = Statevector::from_amplitudes(ds.matrix.column(0))?;
        let sp = schmidt_prepare(&target)?;
        let map = [2 * n - 3, 2 * n - 2, 2 * n - 1, 0];
        c.append_mapped(&sp, &map)?;
    } else {
        let d = build_disentangler(&tensors[n - 1])?;
        c.push(opaque("mps_d_last", vec![2 * n - 3, 2 * n - 2, 2 * n - 1], &d.matrix, per_site)?)?;
    }
    for i in (1..n - 1).rev() {
        let d = build_disentangler(&tensors[i])?;
        c.push(opaque("mps_d_bulk", vec![2 * i - 1, 2 * i, 2 * i + 1], &d.matrix, per_site)?)?;
    }
    if ring {
        let a_tilde = fused_first_site(&tensors[0]);
        let d = embed_nonunitary_periodic(&a_tilde, scale.unwrap_or(DEFAULT_EMBEDDING_SCALE))?;
        c.push(opaque("mps_u_a_tilde", vec![2 * n, 0, 1], &d.matrix, per_site)?)?;
        c.push(Gate::Measure {
            qubit: 2 * n,
            postselect: Some(0),
        })?;
    } else {
        let d = build_disentangler(&tensors[0])?;
        c.push(opaque("mps_d_first", vec![0, 1], &d.matrix, generic2)?)?;
    }
    let kind = if ring { "ring" } else { "open" };
    Ok(c.with_meta("method", "mps").with_meta("boundary", kind))
}

/// Runs [`mps_circuit`] and returns the normalized `2N`-qubit data state
/// with the ancilla post-selection probability (1 for open chains).
pub fn prepare_via_mps(n_sites: usize, boundary: ChainBoundary, scale: Option<f64>) -> Result<(Statevector, f64)> {
    let c = mps_circuit(n_sites, boundary, scale)?;
    let r = simulate(&c, SimMode::PostSelect)?;
    let data: Vec<usize> = (0..2 * n_sites).collect();
    let (sv, stray) = r.state.extract(&data)?;
    if stray > 1e-10 {
        return Err(VbsError::InvalidArgument(format!("ancilla left entangled ({stray:.3e})")));
    }
    Ok((sv, r.postselect_probability))
}
