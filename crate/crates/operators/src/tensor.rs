//! Bipartite structure: Kronecker products, partial transpose and partial trace.
//!
//! Composite indices follow the Kronecker convention `i = i0 * d1 + i1` for
//! `dims = (d0, d1)`; subsystem `0` is the left factor.

use crate::{CMat, HermitianOp, OpError};

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn tensor(a: &HermitianOp, b: &HermitianOp) -> HermitianOp {
    HermitianOp::from_symmetrized(&kron(a.matrix(), b.matrix()))
}

fn check_dims(m: &CMat, dims: (usize, usize)) -> Result<(), OpError> {
    let n = dims.0 * dims.1;
    if m.nrows() != n || m.ncols() != n {
        return Err(OpError::DimensionMismatch { expected: n, found: m.nrows() });
    }
    Ok(())
}

fn check_index(i: usize) -> Result<(), OpError> {
    if i > 1 {
        return Err(OpError::DimensionMismatch { expected: 1, found: i });
    }
    Ok(())
}

/// Transposes the given tensor factor of an arbitrary square matrix.
pub fn partial_transpose_mat(m: &CMat, subsystem: usize, dims: (usize, usize)) -> Result<CMat, OpError> {
    check_dims(m, dims)?;
    check_index(subsystem)?;
    let (d0, d1) = dims;
    let mut out = m.clone();
    for a0 in 0..d0 {
        for a1 in 0..d1 {
            for b0 in 0..d0 {
                for b1 in 0..d1 {
                    let (r, c) = if subsystem == 0 {
                        (b0 * d1 + a1, a0 * d1 + b1)
                    } else {
                        (a0 * d1 + b1, b0 * d1 + a1)
                    };
                    out[(a0 * d1 + a1, b0 * d1 + b1)] = m[(r, c)];
                }
            }
        }
    }
    Ok(out)
}

pub fn partial_transpose(a: &HermitianOp, subsystem: usize, dims: (usize, usize)) -> Result<HermitianOp, OpError> {
    Ok(HermitianOp::from_symmetrized(&partial_transpose_mat(a.matrix(), subsystem, dims)?))
}

/// Traces out every factor except `keep`.
pub fn partial_trace_mat(m: &CMat, keep: usize, dims: (usize, usize)) -> Result<CMat, OpError> {
    check_dims(m, dims)?;
    check_index(keep)?;
    let (d0, d1) = dims;
    if keep == 0 {
        Ok(CMat::from_fn(d0, d0, |i, j| (0..d1).map(|k| m[(i * d1 + k, j * d1 + k)]).sum()))
    } else {
        Ok(CMat::from_fn(d1, d1, |i, j| (0..d0).map(|k| m[(k * d1 + i, k * d1 + j)]).sum()))
    }
}

pub fn partial_trace(a: &HermitianOp, keep: usize, dims: (usize, usize)) -> Result<HermitianOp, OpError> {
    Ok(HermitianOp::from_symmetrized(&partial_trace_mat(a.matrix(), keep, dims)?))
}
