//! Qubit Pauli operators and multi-qubit Pauli strings.

use crate::{c64, CMat, HermitianOp};

pub fn id2() -> CMat {
    CMat::identity(2, 2)
}

pub fn x() -> CMat {
    CMat::from_row_slice(2, 2, &[c64(0., 0.), c64(1., 0.), c64(1., 0.), c64(0., 0.)])
}

pub fn y() -> CMat {
    CMat::from_row_slice(2, 2, &[c64(0., 0.), c64(0., -1.), c64(0., 1.), c64(0., 0.)])
}

pub fn z() -> CMat {
    CMat::from_row_slice(2, 2, &[c64(1., 0.), c64(0., 0.), c64(0., 0.), c64(-1., 0.)])
}

pub fn sigma_x() -> HermitianOp {
    HermitianOp::from_symmetrized(&x())
}

pub fn sigma_y() -> HermitianOp {
    HermitianOp::from_symmetrized(&y())
}

pub fn sigma_z() -> HermitianOp {
    HermitianOp::from_symmetrized(&z())
}

/// Single-qubit Pauli by index: 0 = 1, 1 = X, 2 = Y, 3 = Z.
pub fn by_index(i: usize) -> CMat {
    match i {
        0 => id2(),
        1 => x(),
        2 => y(),
        3 => z(),
        _ => panic!("Pauli index {i} out of range"),
    }
}

/// Tensor product of single-qubit Paulis, leftmost factor first.
pub fn string(indices: &[usize]) -> CMat {
    indices
        .iter()
        .fold(CMat::identity(1, 1), |acc, &i| acc.kronecker(&by_index(i)))
}
