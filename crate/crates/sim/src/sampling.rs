//! Seeded random streams, detection statistics and random truths.

use operators::random::random_ket;
use operators::{c64, CMat, StateOp};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::SimError;

/// Slack on Σp ≤ 1 before probabilities are rejected.
pub const MASS_TOL: f64 = 1e-12;

/// ChaCha stream `stream` of `seed`; equal pairs give equal draw sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Detection counts for N copies.
///
/// With Σp = 1 this is one multinomial draw. With Σp = η < 1 the number of
/// detected copies is first drawn from Binomial(N, η) and then spread over
/// the outcomes by a multinomial on p/η.
pub fn sample_counts<R: Rng + ?Sized>(probs: &[f64], n: u64, rng: &mut R) -> Result<Vec<u64>, SimError> {
    if probs.is_empty() {
        return Err(SimError::InvalidProbabilities("empty probability list".into()));
    }
    if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(SimError::InvalidProbabilities(format!("entry {p} is not a probability")));
    }
    let eta: f64 = probs.iter().sum();
    if eta > 1.0 + MASS_TOL {
        return Err(SimError::InvalidProbabilities(format!("probabilities sum to {eta}")));
    }
    if eta == 0.0 {
        return Ok(vec![0; probs.len()]);
    }
    let detected = if eta >= 1.0 - MASS_TOL {
        n
    } else {
        Binomial::new(n, eta).expect("η in (0, 1)").sample(rng)
    };
    let conditional: Vec<f64> = probs.iter().map(|p| p / eta).collect();
    Ok(operators::random::multinomial(&conditional, detected, rng))
}

/// ρ = Σ_k |α_k|^ν |ψ_k⟩⟨ψ_k| / Σ_k |α_k|^ν over `dim` Haar-random kets with
/// complex Gaussian weights α_k. ν = 0 mixes the kets equally; large ν lets
/// the largest |α_k| dominate and pushes the purity toward 1.
pub fn random_state<R: Rng + ?Sized>(dim: usize, nu: u32, rng: &mut R) -> Result<StateOp, SimError> {
    if dim == 0 {
        return Err(SimError::InvalidSpec("state dimension must be positive".into()));
    }
    let kets: Vec<_> = (0..dim).map(|_| random_ket(dim, rng)).collect();
    let mags: Vec<f64> = (0..dim).map(|_| operators::random::complex_gaussian(rng).norm()).collect();
    // Powers taken relative to the largest magnitude so large ν cannot overflow.
    let top = mags.iter().cloned().fold(0.0f64, f64::max);
    let weights: Vec<f64> = mags.iter().map(|m| (m / top).powi(nu as i32)).collect();
    let total: f64 = weights.iter().sum();
    let mut m = CMat::zeros(dim, dim);
    for (k, w) in kets.iter().zip(&weights) {
        m += k.projector().matrix() * c64(w / total, 0.0);
    }
    Ok(StateOp::normalized(&m)?)
}
