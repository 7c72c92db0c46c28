//! Dense complex operator algebra on finite-dimensional Hilbert spaces.
//!
//! Every operator is stored as a dense `DMatrix<Complex64>`. [`HermitianOp`]
//! is the base currency, [`StateOp`] adds positivity and unit trace, and
//! [`Ket`] holds state vectors.

mod error;
mod func;
mod ops;
pub mod pauli;
pub mod random;
mod repr;
mod tensor;

pub use error::OpError;
pub use func::{
    expm, fidelity, hermitian_fn, inverse, logm, sqrtm, trace_class_distance, trace_norm,
    von_neumann_entropy, DEFAULT_EIG_FLOOR,
};
pub use ops::{HermitianOp, Ket, StateOp};
pub use repr::MatrixRepr;
pub use tensor::{
    kron, partial_trace, partial_trace_mat, partial_transpose, partial_transpose_mat, tensor,
};

pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;

/// Dense complex matrix used throughout the workspace.
pub type CMat = DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVec = DVector<Complex64>;

/// Shorthand for a complex number.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Hilbert-Schmidt inner product tr{a†b}.
pub fn hs_inner(a: &CMat, b: &CMat) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Real part of tr{ab} for two matrices, computed without forming the product.
pub fn trace_product_re(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for k in 0..n {
            let x = a[(i, k)];
            let y = b[(k, i)];
            s += x.re * y.re - x.im * y.im;
        }
    }
    s
}

/// (m + m†)/2.
pub fn symmetrize(m: &CMat) -> CMat {
    (m + m.adjoint()) * c64(0.5, 0.0)
}

/// Trace of a complex matrix.
pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().iter().sum()
}
