//! Operators as vectors in the D²-dimensional operator space.
//!
//! Coordinates are taken in the generalized Gell-Mann basis normalized to
//! tr{Γ_jΓ_k} = δ_jk. Index 0 is 1/√D, indices 1..D are the diagonal
//! elements, then each pair j < k contributes its symmetric and
//! antisymmetric element.

use nalgebra::{DMatrix, DVector};
use operators::{c64, CMat, Complex64, HermitianOp};
use serde::{Deserialize, Serialize};

/// Coordinates of an operator in the Gell-Mann basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperKet {
    pub coords: Vec<Complex64>,
}

impl SuperKet {
    pub fn of(m: &CMat) -> Self {
        Self { coords: coords(m) }
    }

    /// ⟨⟨self|other⟩⟩ = tr{self† other}.
    pub fn inner(&self, other: &SuperKet) -> Complex64 {
        self.coords.iter().zip(&other.coords).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn to_matrix(&self) -> CMat {
        from_coords(&self.coords)
    }
}

fn diag_norm(l: usize) -> f64 {
    ((l * (l + 1)) as f64).sqrt()
}

/// Gell-Mann coordinates of an arbitrary square matrix.
pub fn coords(m: &CMat) -> Vec<Complex64> {
    let d = m.nrows();
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(d * d);
    let tr: Complex64 = m.diagonal().iter().sum();
    out.push(tr / (d as f64).sqrt());
    let mut partial = c64(0.0, 0.0);
    for l in 1..d {
        partial += m[(l - 1, l - 1)];
        out.push((partial - m[(l, l)] * l as f64) / diag_norm(l));
    }
    for j in 0..d {
        for k in (j + 1)..d {
            out.push((m[(j, k)] + m[(k, j)]) * s2);
            out.push((m[(j, k)] - m[(k, j)]) * c64(0.0, s2));
        }
    }
    out
}

/// Real Gell-Mann coordinates of a Hermitian operator.
pub fn real_coords(h: &HermitianOp) -> DVector<f64> {
    DVector::from_iterator(h.dim() * h.dim(), coords(h.matrix()).into_iter().map(|z| z.re))
}

/// Inverse of [`coords`].
pub fn from_coords(c: &[Complex64]) -> CMat {
    let d = (c.len() as f64).sqrt().round() as usize;
    assert_eq!(d * d, c.len(), "coordinate count must be a square");
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = CMat::zeros(d, d);
    let id = c[0] / (d as f64).sqrt();
    for i in 0..d {
        m[(i, i)] += id;
    }
    for l in 1..d {
        let a = c[l] / diag_norm(l);
        for i in 0..l {
            m[(i, i)] += a;
        }
        m[(l, l)] -= a * l as f64;
    }
    let mut idx = d;
    for j in 0..d {
        for k in (j + 1)..d {
            let s = c[idx] * s2;
            let a = c[idx + 1] * s2;
            // symmetric element |j⟩⟨k| + |k⟩⟨j|, antisymmetric −i|j⟩⟨k| + i|k⟩⟨j|
            m[(j, k)] += s - a * c64(0.0, 1.0);
            m[(k, j)] += s + a * c64(0.0, 1.0);
            idx += 2;
        }
    }
    m
}

/// Hermitian operator with the given real Gell-Mann coordinates.
pub fn from_real_coords(c: &DVector<f64>) -> HermitianOp {
    let cc: Vec<Complex64> = c.iter().map(|&x| c64(x, 0.0)).collect();
    HermitianOp::from_symmetrized(&from_coords(&cc))
}

/// The k-th Gell-Mann basis element in dimension d.
pub fn basis_element(d: usize, k: usize) -> HermitianOp {
    let mut c = DVector::zeros(d * d);
    c[k] = 1.0;
    from_real_coords(&c)
}

/// Matrix whose columns are the real coordinates of the given operators.
pub fn coordinate_matrix(ops: &[HermitianOp]) -> DMatrix<f64> {
    let d2 = ops.first().map(|o| o.dim() * o.dim()).unwrap_or(0);
    let mut c = DMatrix::zeros(d2, ops.len());
    for (j, o) in ops.iter().enumerate() {
        c.set_column(j, &real_coords(o));
    }
    c
}
