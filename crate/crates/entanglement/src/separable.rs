//! Maximum likelihood over separable two-party states.
//!
//! The state is kept as an ensemble ρ = Σ_l |φ₁ₗ⟩⟨φ₁ₗ| ⊗ |φ₂ₗ⟩⟨φ₂ₗ| of
//! subnormalized product terms. Each factor is moved by
//! |φ⟩ → (1 + εR')|φ⟩, where R' is R traced against the partner factor.

use operators::random::random_ket;
use operators::{c64, CMat, CVec, StateOp};
use pom::Pom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use state_est::{log_likelihood, ml_dg, EstError, EstimationConfig, Frequencies, LineSearch};

use crate::EntError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeparableConfig {
    /// Number of product terms in the ensemble.
    pub terms: usize,
    /// Initial step ε.
    pub epsilon: f64,
    /// Stop when the stationarity residual falls to this value.
    pub precision: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Certificate threshold on the per-copy log-likelihood gap.
    pub decision_gap: f64,
    /// Factor dimensions.
    pub dims: (usize, usize),
}

impl Default for SeparableConfig {
    fn default() -> Self {
        Self { terms: 16, epsilon: 0.5, precision: 1e-6, max_iter: 50_000, seed: 0, decision_gap: 1e-6, dims: (2, 2) }
    }
}

#[derive(Debug, Clone)]
pub struct SeparableResult {
    /// Largest log-likelihood found over separable states.
    pub max_loglik_sep: f64,
    /// Log-likelihood of the unconstrained ML estimator.
    pub max_loglik: f64,
    /// True when no separable state reaches the unconstrained maximum, i.e.
    /// the data certify entanglement.
    pub certificate: bool,
    pub state: StateOp,
    pub iterations: usize,
    pub residual: f64,
}

struct Ensemble {
    a: Vec<CVec>,
    b: Vec<CVec>,
}

impl Ensemble {
    fn state(&self) -> CMat {
        let (da, db) = (self.a[0].len(), self.b[0].len());
        let mut rho = CMat::zeros(da * db, da * db);
        for (a, b) in self.a.iter().zip(&self.b) {
            let v = a.kronecker(b);
            rho += &v * v.adjoint();
        }
        rho
    }

    /// Rescales so that tr ρ = 1 and both factors of a term share one norm.
    fn normalize(&mut self) {
        let weights: Vec<f64> = self.a.iter().zip(&self.b).map(|(a, b)| a.norm_squared() * b.norm_squared()).collect();
        let total: f64 = weights.iter().sum();
        for ((a, b), w) in self.a.iter_mut().zip(self.b.iter_mut()).zip(weights) {
            let target = (w / total).sqrt().sqrt();
            let (na, nb) = (a.norm(), b.norm());
            if na > 0.0 && nb > 0.0 {
                *a *= c64(target / na, 0.0);
                *b *= c64(target / nb, 0.0);
            }
        }
    }
}

/// R traced against a fixed factor: (1⊗⟨φ|)R(1⊗|φ⟩)/⟨φ|φ⟩ when the partner
/// sits on subsystem 2, and the mirror image otherwise.
fn reduced(r: &CMat, partner: &CVec, partner_is_second: bool, dims: (usize, usize)) -> CMat {
    let (da, db) = dims;
    let norm = partner.norm_squared();
    if partner_is_second {
        CMat::from_fn(da, da, |i, k| {
            let mut s = c64(0.0, 0.0);
            for j in 0..db {
                for l in 0..db {
                    s += partner[j].conj() * r[(i * db + j, k * db + l)] * partner[l];
                }
            }
            s / norm
        })
    } else {
        CMat::from_fn(db, db, |j, l| {
            let mut s = c64(0.0, 0.0);
            for i in 0..da {
                for k in 0..da {
                    s += partner[i].conj() * r[(i * db + j, k * db + l)] * partner[k];
                }
            }
            s / norm
        })
    }
}

const PROB_FLOOR: f64 = 1e-300;

fn loglik_and_r(freqs: &[f64], outcomes: &[CMat], rho: &CMat) -> (f64, CMat) {
    let n = rho.nrows();
    let mut ll = 0.0;
    let mut r = CMat::zeros(n, n);
    for (f, o) in freqs.iter().zip(outcomes) {
        if *f == 0.0 {
            continue;
        }
        let p = operators::trace_product_re(o, rho).max(PROB_FLOOR);
        ll += f * p.ln();
        r += o * c64(f / p, 0.0);
    }
    (ll, r)
}

/// Stationarity residual √Σ_{m,l} ‖(R'ₘₗ − 1)|φₘₗ⟩⟨φₘₗ|‖², with the
/// Hilbert-Schmidt norm.
fn step_directions(r: &CMat, e: &Ensemble, dims: (usize, usize)) -> (Vec<CMat>, Vec<CMat>, f64) {
    let mut res = 0.0;
    let mut ra = Vec::with_capacity(e.a.len());
    let mut rb = Vec::with_capacity(e.b.len());
    for (a, b) in e.a.iter().zip(&e.b) {
        let r1 = reduced(r, b, true, dims);
        let r2 = reduced(r, a, false, dims);
        let g1 = &r1 * a - a;
        let g2 = &r2 * b - b;
        res += g1.norm_squared() * a.norm_squared() + g2.norm_squared() * b.norm_squared();
        ra.push(r1);
        rb.push(r2);
    }
    (ra, rb, res.sqrt())
}

/// Maximizes Σ f_j ln p_j over separable states and compares the maximum with
/// the unconstrained ML value.
pub fn ml_separable(freqs: &Frequencies, pom: &Pom, cfg: &SeparableConfig) -> Result<SeparableResult, EntError> {
    let (da, db) = cfg.dims;
    if da * db != pom.dim() {
        return Err(EntError::InvalidConfig(format!("factor dimensions {da}x{db} do not match POM dimension {}", pom.dim())));
    }
    if cfg.terms == 0 || !(cfg.epsilon > 0.0) || !(cfg.precision > 0.0) {
        return Err(EntError::InvalidConfig("terms, epsilon and precision must be positive".into()));
    }
    if freqs.len() != pom.len() {
        return Err(EstError::OutcomeMismatch(freqs.len(), pom.len()).into());
    }

    let ml_cfg = EstimationConfig { line_search: LineSearch::Quadratic3, precision: 1e-9, ..Default::default() };
    let ml = match ml_dg(freqs, pom, &ml_cfg) {
        Ok(r) => r,
        Err(EstError::MaxIterExceeded(best)) => *best,
        Err(e) => return Err(e.into()),
    };
    let max_loglik = log_likelihood(freqs, pom, &ml.estimator, false)?;

    let f = freqs.frequencies();
    let outcomes: Vec<CMat> = pom.outcomes().iter().map(|o| o.matrix().clone()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut ens = Ensemble {
        a: (0..cfg.terms).map(|_| random_ket(da, &mut rng).amplitudes().clone()).collect(),
        b: (0..cfg.terms).map(|_| random_ket(db, &mut rng).amplitudes().clone()).collect(),
    };
    ens.normalize();

    let mut eps = cfg.epsilon;
    let (mut ll, mut r) = loglik_and_r(&f, &outcomes, &ens.state());
    let mut iterations = 0;
    let mut residual;
    let mut converged = false;
    loop {
        let (ra, rb, res) = step_directions(&r, &ens, cfg.dims);
        residual = res;
        if residual <= cfg.precision {
            converged = true;
            break;
        }
        if iterations >= cfg.max_iter {
            break;
        }
        iterations += 1;
        let mut accepted = false;
        for _ in 0..60 {
            let mut trial = Ensemble {
                a: ens.a.iter().zip(&ra).map(|(a, r1)| a + r1 * a * c64(eps, 0.0)).collect(),
                b: ens.b.iter().zip(&rb).map(|(b, r2)| b + r2 * b * c64(eps, 0.0)).collect(),
            };
            trial.normalize();
            let (tll, tr) = loglik_and_r(&f, &outcomes, &trial.state());
            if tll >= ll - 1e-13 * (1.0 + ll.abs()) {
                ens = trial;
                ll = tll;
                r = tr;
                eps *= 1.25;
                accepted = true;
                break;
            }
            eps *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    let n = freqs.total();
    let state = StateOp::normalized(&ens.state())?;
    let max_loglik_sep = n * ll;
    let certificate = (max_loglik - max_loglik_sep) / n > cfg.decision_gap;
    let result = SeparableResult { max_loglik_sep, max_loglik, certificate, state, iterations, residual };
    if converged {
        Ok(result)
    } else {
        Err(EntError::MaxIterExceeded(Box::new(result)))
    }
}
