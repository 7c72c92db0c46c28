use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::func::eigh;
use crate::repr::MatrixRepr;
use crate::{c64, symmetrize, trace_product_re, CMat, CVec, Complex64, OpError};

const HERMITIAN_TOL: f64 = 1e-12;
const STATE_EIG_TOL: f64 = 1e-10;
const STATE_TRACE_TOL: f64 = 1e-10;

/// Dense Hermitian operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct HermitianOp {
    m: CMat,
}

impl HermitianOp {
    /// Validates Hermiticity (relative to the largest entry) and stores the
    /// symmetrized matrix.
    pub fn new(m: CMat) -> Result<Self, OpError> {
        if m.nrows() != m.ncols() {
            return Err(OpError::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        if m.nrows() == 0 {
            return Err(OpError::Malformed("zero dimension".into()));
        }
        let scale = m.iter().fold(1.0f64, |acc, z| acc.max(z.norm()));
        let mut dev = 0.0f64;
        for i in 0..m.nrows() {
            for j in 0..=i {
                dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        if !dev.is_finite() || dev > HERMITIAN_TOL * scale {
            return Err(OpError::NotHermitian { deviation: dev });
        }
        Ok(Self { m: symmetrize(&m) })
    }

    /// Builds an operator from an arbitrary square matrix by taking (m + m†)/2.
    pub fn from_symmetrized(m: &CMat) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "square matrix required");
        Self { m: symmetrize(m) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: CMat::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { m: CMat::zeros(dim, dim) }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let v = CVec::from_iterator(diag.len(), diag.iter().map(|&x| c64(x, 0.0)));
        Self { m: CMat::from_diagonal(&v) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn into_matrix(self) -> CMat {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.diagonal().iter().map(|z| z.re).sum()
    }

    /// Eigenvalues in ascending order with the matching eigenvector columns.
    pub fn eigh(&self) -> Result<(Vec<f64>, CMat), OpError> {
        eigh(&self.m)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>, OpError> {
        Ok(self.eigh()?.0)
    }

    pub fn min_eigenvalue(&self) -> Result<f64, OpError> {
        Ok(self.eigenvalues()?[0])
    }

    pub fn max_eigenvalue(&self) -> Result<f64, OpError> {
        Ok(*self.eigenvalues()?.last().expect("nonempty"))
    }

    /// tr{self · other} for two Hermitian operators (always real).
    pub fn trace_with(&self, other: &HermitianOp) -> f64 {
        trace_product_re(&self.m, &other.m)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { m: &self.m * c64(s, 0.0) }
    }

    /// Largest elementwise deviation from `other`.
    pub fn max_abs_diff(&self, other: &HermitianOp) -> f64 {
        (&self.m - &other.m).iter().fold(0.0, |a, z| a.max(z.norm()))
    }
}

impl Add for &HermitianOp {
    type Output = HermitianOp;
    fn add(self, rhs: &HermitianOp) -> HermitianOp {
        HermitianOp { m: &self.m + &rhs.m }
    }
}

impl Sub for &HermitianOp {
    type Output = HermitianOp;
    fn sub(self, rhs: &HermitianOp) -> HermitianOp {
        HermitianOp { m: &self.m - &rhs.m }
    }
}

impl Mul<f64> for &HermitianOp {
    type Output = HermitianOp;
    fn mul(self, rhs: f64) -> HermitianOp {
        self.scale(rhs)
    }
}

impl Neg for &HermitianOp {
    type Output = HermitianOp;
    fn neg(self) -> HermitianOp {
        self.scale(-1.0)
    }
}

/// Statistical operator: positive semidefinite with unit trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HermitianOp", into = "HermitianOp")]
pub struct StateOp {
    op: HermitianOp,
}

impl TryFrom<HermitianOp> for StateOp {
    type Error = OpError;
    fn try_from(op: HermitianOp) -> Result<Self, OpError> {
        StateOp::new(op)
    }
}

impl From<StateOp> for HermitianOp {
    fn from(s: StateOp) -> Self {
        s.op
    }
}

impl StateOp {
    pub fn new(op: HermitianOp) -> Result<Self, OpError> {
        let tr = op.trace();
        if (tr - 1.0).abs() > STATE_TRACE_TOL {
            return Err(OpError::NotState(format!("trace {tr}")));
        }
        let min = op.min_eigenvalue()?;
        if min < -STATE_EIG_TOL {
            return Err(OpError::NotState(format!("min eigenvalue {min:e}")));
        }
        Ok(Self { op })
    }

    /// Symmetrizes and validates a matrix.
    pub fn from_matrix(m: &CMat) -> Result<Self, OpError> {
        Self::new(HermitianOp::from_symmetrized(m))
    }

    /// Symmetrizes a positive matrix and divides by its trace.
    pub fn normalized(m: &CMat) -> Result<Self, OpError> {
        let h = HermitianOp::from_symmetrized(m);
        let tr = h.trace();
        if !(tr > 0.0 && tr.is_finite()) {
            return Err(OpError::NotState(format!("trace {tr}")));
        }
        Self::new(h.scale(1.0 / tr))
    }

    /// Builds a state without validation; the caller guarantees positivity and unit trace.
    pub fn new_unchecked(op: HermitianOp) -> Self {
        Self { op }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { op: HermitianOp::identity(dim).scale(1.0 / dim as f64) }
    }

    pub fn pure(ket: &Ket) -> Self {
        let k = ket.normalized();
        Self { op: k.projector() }
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn op(&self) -> &HermitianOp {
        &self.op
    }

    pub fn matrix(&self) -> &CMat {
        self.op.matrix()
    }

    /// Born probability tr{ρΠ}.
    pub fn prob(&self, outcome: &HermitianOp) -> f64 {
        self.op.trace_with(outcome)
    }

    pub fn purity(&self) -> f64 {
        self.op.trace_with(&self.op)
    }

    /// Bloch vector (⟨σx⟩, ⟨σy⟩, ⟨σz⟩) of a qubit state.
    pub fn bloch(&self) -> [f64; 3] {
        assert_eq!(self.dim(), 2, "Bloch vector needs a qubit");
        let m = self.matrix();
        [2.0 * m[(0, 1)].re, -2.0 * m[(0, 1)].im, (m[(0, 0)] - m[(1, 1)]).re]
    }

    /// State with the given qubit Bloch vector.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self, OpError> {
        let m = CMat::from_row_slice(
            2,
            2,
            &[
                c64(0.5 * (1.0 + r[2]), 0.0),
                c64(0.5 * r[0], -0.5 * r[1]),
                c64(0.5 * r[0], 0.5 * r[1]),
                c64(0.5 * (1.0 - r[2]), 0.0),
            ],
        );
        Self::from_matrix(&m)
    }
}

/// State vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    amps: CVec,
}

impl Ket {
    pub fn new(amps: CVec) -> Self {
        Self { amps }
    }

    pub fn from_slice(amps: &[Complex64]) -> Self {
        Self { amps: CVec::from_column_slice(amps) }
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut amps = CVec::zeros(dim);
        amps[i] = c64(1.0, 0.0);
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn normalized(&self) -> Self {
        Self { amps: &self.amps / c64(self.norm(), 0.0) }
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Ket) -> Complex64 {
        self.amps.dotc(&other.amps)
    }

    /// |ψ⟩⟨ψ| without normalization.
    pub fn projector(&self) -> HermitianOp {
        HermitianOp::from_symmetrized(&(&self.amps * self.amps.adjoint()))
    }

    pub fn tensor(&self, other: &Ket) -> Ket {
        Ket { amps: self.amps.kronecker(&other.amps) }
    }
}
