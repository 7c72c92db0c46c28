use nalgebra::SymmetricEigen;

use crate::{c64, CMat, HermitianOp, OpError, StateOp};

/// Eigenvalue floor applied by [`logm`] and [`inverse`].
pub const DEFAULT_EIG_FLOOR: f64 = 1e-12;

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub(crate) fn eigh(m: &CMat) -> Result<(Vec<f64>, CMat), OpError> {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    let vals = eig.eigenvalues;
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(OpError::Eigen);
    }
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let vecs = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((sorted, vecs))
}

/// Applies `f` to the spectrum of `a`.
///
/// Eigenvalues below `eig_floor` are raised to it before `f` is applied; a
/// floor of zero or less disables clamping, which is what smooth functions such
/// as the exponential want.
pub fn hermitian_fn(
    a: &HermitianOp,
    f: impl Fn(f64) -> f64,
    eig_floor: f64,
) -> Result<HermitianOp, OpError> {
    let (vals, vecs) = eigh(a.matrix())?;
    let n = vals.len();
    let mut scaled = vecs.clone();
    for (c, &v) in vals.iter().enumerate() {
        let x = if eig_floor > 0.0 { v.max(eig_floor) } else { v };
        let fx = f(x);
        if !fx.is_finite() {
            return Err(OpError::Eigen);
        }
        for r in 0..n {
            scaled[(r, c)] *= c64(fx, 0.0);
        }
    }
    Ok(HermitianOp::from_symmetrized(&(scaled * vecs.adjoint())))
}

pub fn expm(a: &HermitianOp) -> Result<HermitianOp, OpError> {
    hermitian_fn(a, f64::exp, 0.0)
}

/// Natural logarithm with eigenvalues floored at [`DEFAULT_EIG_FLOOR`].
pub fn logm(a: &HermitianOp) -> Result<HermitianOp, OpError> {
    hermitian_fn(a, f64::ln, DEFAULT_EIG_FLOOR)
}

/// Inverse with eigenvalues floored at [`DEFAULT_EIG_FLOOR`].
pub fn inverse(a: &HermitianOp) -> Result<HermitianOp, OpError> {
    hermitian_fn(a, |x| 1.0 / x, DEFAULT_EIG_FLOOR)
}

/// Positive square root; negative eigenvalues are treated as zero.
pub fn sqrtm(a: &HermitianOp) -> Result<HermitianOp, OpError> {
    hermitian_fn(a, |x| x.max(0.0).sqrt(), 0.0)
}

/// Sum of singular values.
pub fn trace_norm(m: &CMat) -> f64 {
    m.clone().svd(false, false).singular_values.iter().sum()
}

/// tr|a − b| / 2.
pub fn trace_class_distance(a: &HermitianOp, b: &HermitianOp) -> Result<f64, OpError> {
    if a.dim() != b.dim() {
        return Err(OpError::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    let d = a - b;
    Ok(0.5 * d.eigenvalues()?.iter().map(|x| x.abs()).sum::<f64>())
}

/// −tr{ρ ln ρ} with 0 ln 0 = 0.
pub fn von_neumann_entropy(rho: &StateOp) -> f64 {
    let vals = rho.op().eigenvalues().unwrap_or_default();
    vals.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum::<f64>().max(0.0)
}

/// (tr √(√a b √a))².
pub fn fidelity(a: &StateOp, b: &StateOp) -> Result<f64, OpError> {
    if a.dim() != b.dim() {
        return Err(OpError::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    let sa = sqrtm(a.op())?;
    let inner = sa.matrix() * b.matrix() * sa.matrix();
    let vals = HermitianOp::from_symmetrized(&inner).eigenvalues()?;
    let s: f64 = vals.iter().map(|x| x.max(0.0).sqrt()).sum();
    Ok((s * s).clamp(0.0, 1.0))
}
