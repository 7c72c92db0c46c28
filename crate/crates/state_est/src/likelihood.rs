use operators::{c64, trace_product_re, CMat, HermitianOp, StateOp};
use pom::Pom;

use crate::{EstError, Frequencies};

/// Probabilities below this are raised to it inside R when the outcome was observed.
pub(crate) const PROB_FLOOR: f64 = 1e-14;

/// Measurement data in the form the iterations consume.
#[derive(Debug, Clone)]
pub(crate) struct Problem {
    pub dim: usize,
    pub outcomes: Vec<CMat>,
    pub counts: Vec<f64>,
    pub total: f64,
    pub freqs: Vec<f64>,
    /// G = Σ_j Π_j over the outcomes listed here.
    pub g: CMat,
}

/// Probabilities and likelihood pieces at one state.
pub(crate) struct Born {
    pub p: Vec<f64>,
    pub eta: f64,
    /// Per-copy log-likelihood Σ f_j ln(p_j/η) (η = 1 for perfect detection).
    pub loglik: f64,
}

impl Problem {
    pub fn new(freqs: &Frequencies, pom: &Pom) -> Result<Self, EstError> {
        if freqs.len() != pom.len() {
            return Err(EstError::OutcomeMismatch(freqs.len(), pom.len()));
        }
        Ok(Self::from_parts(
            pom.outcomes().iter().map(|o| o.matrix().clone()).collect(),
            freqs.counts().to_vec(),
        ))
    }

    pub fn from_parts(outcomes: Vec<CMat>, counts: Vec<f64>) -> Self {
        let dim = outcomes[0].nrows();
        let total: f64 = counts.iter().sum();
        let freqs = counts.iter().map(|n| n / total).collect();
        let g = outcomes.iter().fold(CMat::zeros(dim, dim), |a, o| a + o);
        Self { dim, outcomes, counts, total, freqs, g }
    }

    pub fn born(&self, rho: &CMat, imperfect: bool) -> Born {
        let p: Vec<f64> = self.outcomes.iter().map(|o| trace_product_re(rho, o)).collect();
        let eta = if imperfect { p.iter().sum() } else { 1.0 };
        let mut loglik = 0.0;
        for (f, &pj) in self.freqs.iter().zip(&p) {
            if *f > 0.0 {
                loglik += f * (pj.max(PROB_FLOOR) / eta).ln();
            }
        }
        Born { p, eta, loglik }
    }

    /// R = Σ f_jΠ_j/p_j with floored probabilities.
    pub fn r_matrix(&self, born: &Born) -> CMat {
        let mut r = CMat::zeros(self.dim, self.dim);
        for ((o, f), &pj) in self.outcomes.iter().zip(&self.freqs).zip(&born.p) {
            if *f > 0.0 {
                r += o * c64(f / pj.max(PROB_FLOOR), 0.0);
            }
        }
        r
    }

    /// R − 1, or R − G/η for imperfect detection.
    pub fn gradient(&self, born: &Born, imperfect: bool) -> CMat {
        let r = self.r_matrix(born);
        if imperfect {
            r - &self.g * c64(1.0 / born.eta, 0.0)
        } else {
            r - CMat::identity(self.dim, self.dim)
        }
    }

    fn check_support(&self, p: &[f64]) -> Result<(), EstError> {
        match self.counts.iter().zip(p).position(|(n, pj)| *n > 0.0 && *pj <= 0.0) {
            Some(index) => Err(EstError::ZeroProbabilityWithCounts { index }),
            None => Ok(()),
        }
    }
}

fn check_dim(pom: &Pom, rho: &StateOp) -> Result<(), EstError> {
    if pom.dim() != rho.dim() {
        return Err(EstError::Op(operators::OpError::DimensionMismatch { expected: pom.dim(), found: rho.dim() }));
    }
    Ok(())
}

/// Σ n_j ln p_j, or Σ n_j ln(p_j/η) with η = Σ_k p_k when `imperfect` is set.
pub fn log_likelihood(freqs: &Frequencies, pom: &Pom, rho: &StateOp, imperfect: bool) -> Result<f64, EstError> {
    check_dim(pom, rho)?;
    let prob = Problem::new(freqs, pom)?;
    let born = prob.born(rho.matrix(), imperfect);
    prob.check_support(&born.p)?;
    Ok(prob.total * born.loglik)
}

/// R = Σ_j f_jΠ_j/p_j.
pub fn r_operator(freqs: &Frequencies, pom: &Pom, rho: &StateOp) -> Result<HermitianOp, EstError> {
    check_dim(pom, rho)?;
    let prob = Problem::new(freqs, pom)?;
    let born = prob.born(rho.matrix(), false);
    prob.check_support(&born.p)?;
    Ok(HermitianOp::from_symmetrized(&prob.r_matrix(&born)))
}
