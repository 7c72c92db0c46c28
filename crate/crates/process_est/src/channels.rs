//! Gates, noisy gates and input-state sets used in process tomography.

use operators::{c64, CMat, Ket, StateOp};
use pom::{build_standard, StandardPom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::choi::{isometry_blocks, Channel};
use crate::ProcError;

fn permutation(images: &[usize]) -> CMat {
    let n = images.len();
    let mut u = CMat::zeros(n, n);
    for (col, &row) in images.iter().enumerate() {
        u[(row, col)] = c64(1.0, 0.0);
    }
    u
}

/// Control on the first qubit.
pub fn cnot_unitary() -> CMat {
    permutation(&[0, 1, 3, 2])
}

/// Controls on the first two qubits.
pub fn toffoli_unitary() -> CMat {
    permutation(&[0, 1, 2, 3, 4, 5, 7, 6])
}

pub fn cnot() -> Channel {
    Channel::unitary(cnot_unitary()).expect("permutation is unitary")
}

pub fn toffoli() -> Channel {
    Channel::unitary(toffoli_unitary()).expect("permutation is unitary")
}

fn check_eps(eps: f64) -> Result<(), ProcError> {
    if (0.0..=1.0).contains(&eps) {
        Ok(())
    } else {
        Err(ProcError::InvalidConfig(format!("noise weight {eps} outside [0, 1]")))
    }
}

/// CNOT with probability 1−ε, identity with probability ε.
pub fn cnot_imperfect(eps: f64) -> Result<Channel, ProcError> {
    check_eps(eps)?;
    Channel::new(vec![cnot_unitary() * c64((1.0 - eps).sqrt(), 0.0), CMat::identity(4, 4) * c64(eps.sqrt(), 0.0)])
}

/// CNOT with probability 1−ε plus fifteen random Kraus operators √ε B_j,
/// ΣB_j†B_j = 1, giving a full-rank Choi operator.
pub fn cnot_random(eps: f64, seed: u64) -> Result<Channel, ProcError> {
    check_eps(eps)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kraus = vec![cnot_unitary() * c64((1.0 - eps).sqrt(), 0.0)];
    kraus.extend(isometry_blocks(4, 4, 15, &mut rng).into_iter().map(|b| b * c64(eps.sqrt(), 0.0)));
    Channel::new(kraus)
}

/// The sixteen products of {|0⟩, |1⟩, |+⟩, |+i⟩} on two qubits, first
/// factor slowest.
pub fn product_pool() -> Vec<StateOp> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let kets = [
        Ket::from_slice(&[c64(1.0, 0.0), c64(0.0, 0.0)]),
        Ket::from_slice(&[c64(0.0, 0.0), c64(1.0, 0.0)]),
        Ket::from_slice(&[c64(s, 0.0), c64(s, 0.0)]),
        Ket::from_slice(&[c64(s, 0.0), c64(0.0, s)]),
    ];
    let mut out = Vec::with_capacity(16);
    for a in &kets {
        for b in &kets {
            out.push(StateOp::pure(&a.tensor(b)));
        }
    }
    out
}

/// Normalized projectors of the n-qubit product-SIC POM, 4ⁿ states.
pub fn sic_inputs(qubits: usize) -> Result<Vec<StateOp>, ProcError> {
    let pom = build_standard(StandardPom::ProductSic(qubits))?;
    pom.outcomes().iter().map(|o| Ok(StateOp::normalized(o.matrix())?)).collect()
}
