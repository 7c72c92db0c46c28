//! Random kets, states and unitaries.

use rand::Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};

use crate::{c64, CMat, CVec, Complex64, HermitianOp, Ket, StateOp};

/// Standard complex Gaussian: real and imaginary parts each N(0, 1/2).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix of independent standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-uniform normalized ket.
pub fn random_ket<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Ket {
    Ket::new(CVec::from_fn(dim, |_, _| complex_gaussian(rng))).normalized()
}

/// Hilbert-Schmidt-uniform mixed state GG†/tr{GG†}.
pub fn hs_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> StateOp {
    let g = ginibre(dim, dim, rng);
    StateOp::normalized(&(&g * g.adjoint())).expect("Ginibre product is positive")
}

/// Haar-random unitary via QR with the phase correction of the R diagonal.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMat {
    let g = ginibre(dim, dim, rng);
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for c in 0..dim {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
        for row in 0..dim {
            q[(row, c)] *= phase;
        }
    }
    q
}

/// Random Hermitian operator with entries of unit scale, rescaled to the
/// requested spectral radius.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, radius: f64, rng: &mut R) -> HermitianOp {
    let g = ginibre(dim, dim, rng);
    let h = HermitianOp::from_symmetrized(&g);
    let vals = h.eigenvalues().expect("finite");
    let r = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if r == 0.0 {
        h
    } else {
        h.scale(radius / r)
    }
}

/// Multinomial draw of `n` trials over `probs`, as a chain of conditional
/// binomials. Any mass missing from Σp is a silent extra category.
pub fn multinomial<R: Rng + ?Sized>(probs: &[f64], n: u64, rng: &mut R) -> Vec<u64> {
    let mut left = n;
    let mut mass = probs.iter().map(|p| p.max(0.0)).sum::<f64>().max(1.0);
    probs
        .iter()
        .map(|&p| {
            let p = p.max(0.0);
            if left == 0 || mass <= 0.0 {
                return 0;
            }
            let q = (p / mass).min(1.0);
            let k = Binomial::new(left, q).expect("q in [0, 1]").sample(rng);
            left -= k;
            mass -= p;
            k
        })
        .collect()
}
