//! Dense complex operators.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Result, VbsError};

/// Square complex matrix with a free-text label.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    mat: DMatrix<C64>,
    label: String,
}

impl DenseOperator {
    pub fn new(mat: DMatrix<C64>, label: impl Into<String>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(VbsError::DimensionMismatch {
                expected: mat.nrows(),
                got: mat.ncols(),
            });
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(VbsError::NonFinite);
        }
        Ok(Self {
            mat,
            label: label.into(),
        })
    }

    /// Builds from a closure; panics only if the closure yields non-finite values.
    pub fn from_fn(dim: usize, label: impl Into<String>, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self::new(DMatrix::from_fn(dim, dim, f), label).expect("non-finite entry")
    }

    pub fn from_real_rows(rows: &[&[f64]], label: impl Into<String>) -> Result<Self> {
        let dim = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(VbsError::DimensionMismatch {
                expected: dim,
                got: bad.len(),
            });
        }
        Self::new(
            DMatrix::from_fn(dim, dim, |i, j| C64::new(rows[i][j], 0.0)),
            label,
        )
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: DMatrix::identity(dim, dim),
            label: format!("I{dim}"),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: DMatrix::zeros(dim, dim),
            label: format!("0_{dim}"),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Number of qubits when the dimension is a power of two.
    pub fn n_qubits(&self) -> Option<usize> {
        let d = self.dim();
        d.is_power_of_two().then(|| d.trailing_zeros() as usize)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            mat: self.mat.adjoint(),
            label: format!("{}^dag", self.label),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        Self {
            mat: &self.mat * &rhs.mat,
            label: format!("{}*{}", self.label, rhs.label),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self {
            mat: &self.mat + &rhs.mat,
            label: format!("{}+{}", self.label, rhs.label),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self {
            mat: &self.mat - &rhs.mat,
            label: format!("{}-{}", self.label, rhs.label),
        }
    }

    pub fn scale(&self, z: C64) -> Self {
        Self {
            mat: &self.mat * z,
            label: self.label.clone(),
        }
    }

    pub fn scale_re(&self, x: f64) -> Self {
        self.scale(C64::new(x, 0.0))
    }

    /// Kronecker product; `self` is the more significant factor.
    pub fn kron(&self, rhs: &Self) -> Self {
        Self {
            mat: self.mat.kronecker(&rhs.mat),
            label: format!("{}(x){}", self.label, rhs.label),
        }
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        if self.dim() != rhs.dim() {
            return f64::INFINITY;
        }
        self.mat
            .iter()
            .zip(rhs.mat.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn unitary_deviation(&self) -> f64 {
        let prod = self.mat.adjoint() * &self.mat;
        let id = DMatrix::<C64>::identity(self.dim(), self.dim());
        prod.iter()
            .zip(id.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn idempotent_deviation(&self) -> f64 {
        let sq = &self.mat * &self.mat;
        sq.iter()
            .zip(self.mat.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitary_deviation() <= tol
    }

    pub fn is_idempotent(&self, tol: f64) -> bool {
        self.idempotent_deviation() <= tol
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let d = self.dim();
        assert_eq!(v.len(), d, "vector length");
        (0..d)
            .map(|i| (0..d).map(|j| self.mat[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        self.mat.column(j).iter().copied().collect()
    }

    /// Block-diagonal `diag(I, self)`: the operator controlled on one extra,
    /// most significant qubit.
    pub fn controlled(&self) -> Self {
        let d = self.dim();
        let mut m = DMatrix::<C64>::zeros(2 * d, 2 * d);
        for i in 0..d {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m.view_mut((d, d), (d, d)).copy_from(&self.mat);
        Self {
            mat: m,
            label: format!("c-{}", self.label),
        }
    }

    /// `P A P` where `P` is a projector of the same dimension.
    pub fn sandwich(&self, p: &Self) -> Self {
        Self {
            mat: &p.mat * &self.mat * &p.mat,
            label: format!("[{}]", self.label),
        }
    }
}

/// Kronecker product of a list, first factor most significant.
pub fn kron_all(ops: &[DenseOperator]) -> DenseOperator {
    let mut it = ops.iter();
    let first = it.next().expect("kron_all of empty list").clone();
    it.fold(first, |acc, op| acc.kron(op))
}
