use operators::random::hs_state;
use operators::{c64, logm, symmetrize, trace_product_re, CMat};
use pom::Pom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ascent::{self, eigh, first_floored, finish, residual_of, Ascent, Eval};
use crate::likelihood::Problem;
use crate::ml::{ml_imperfect, run_sandwich, spectral, Kind};
use crate::quadrature::exp_average;
use crate::{EstError, EstimationConfig, EstimationResult, Frequencies, LineSearch};

/// Default step for Schemes A and B, applied to the per-copy gradient.
const SCHEME_STEP: f64 = 10.0;

/// New MLME iterations ρ ← (1+ε𝕽)ρ(1+ε𝕽)/tr{…} with
/// 𝕽 = R − 1 − λ(log ρ − tr{ρ log ρ}), or R' − G'/η − λ(…) for imperfect
/// detection. They ascend λS + (1/N) log ℒ.
pub fn mlme_new(
    freqs: &Frequencies,
    pom: &Pom,
    cfg: &EstimationConfig,
    imperfect: bool,
) -> Result<EstimationResult, EstError> {
    cfg.validate()?;
    let prob = Problem::new(freqs, pom)?;
    let rho0 = ascent::start_state(cfg, prob.dim)?;
    run_sandwich(&prob, Kind::Mlme { imperfect, lambda: cfg.lambda }, rho0, cfg.step(0.1), cfg)
}

/// States exp(B + Σ_jλ_jΓ_j)/tr{…} climbing the likelihood in λ.
struct ExpFamily<'a> {
    prob: &'a Problem,
    generators: Vec<CMat>,
    base: CMat,
    imperfect: bool,
    integral: bool,
    /// Polak-Ribière conjugate directions; only used with a line search.
    conjugate: bool,
    direction: Option<Vec<f64>>,
    previous: Option<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Ascent for ExpFamily<'_> {
    type Pos = Vec<f64>;
    type Grad = Vec<f64>;

    fn eval(&self, lambda: &Vec<f64>) -> Result<Eval<Vec<f64>>, EstError> {
        let h = self
            .generators
            .iter()
            .zip(lambda)
            .fold(self.base.clone(), |acc, (g, l)| acc + g * c64(*l, 0.0));
        let (vals, vecs) = eigh(&h)?;
        let top = vals.iter().fold(f64::NEG_INFINITY, |a, v| a.max(*v));
        let weights: Vec<f64> = vals.iter().map(|v| (v - top).exp()).collect();
        let z: f64 = weights.iter().sum();
        let rho = spectral(&vecs, &weights.iter().map(|w| w / z).collect::<Vec<_>>());
        let born = self.prob.born(&rho, self.imperfect);
        let floored = first_floored(self.prob, &born);
        let x = self.prob.gradient(&born, self.imperfect);
        let residual = residual_of(&x, &rho);
        let grad = if self.integral {
            // (∫₀¹ e^{sH} X e^{−sH} ds)_ab = X_ab φ(h_a − h_b) in the eigenbasis of H.
            let mut k = vecs.adjoint() * &x * &vecs;
            let n = vals.len();
            for a in 0..n {
                for b in 0..n {
                    k[(a, b)] *= exp_average(vals[a] - vals[b]);
                }
            }
            let y = &vecs * k * vecs.adjoint();
            let rho_y = &rho * y;
            self.generators.iter().map(|g| trace_product_re(g, &rho_y)).collect()
        } else {
            let m = symmetrize(&(&x * &rho));
            self.generators.iter().map(|g| trace_product_re(g, &m)).collect()
        };
        Ok(Eval { rho, obj: born.loglik, residual, floored, grad })
    }

    fn prepare(&mut self, _lambda: &Vec<f64>, at: &Eval<Vec<f64>>) {
        if !self.conjugate {
            return;
        }
        let g = &at.grad;
        let h = match (self.direction.take(), self.previous.take()) {
            (Some(h), Some(prev)) => {
                let denom = dot(&prev, &prev);
                let num: f64 = g.iter().zip(&prev).map(|(a, b)| a * (a - b)).sum();
                let gamma = if denom > 0.0 { (num / denom).max(0.0) } else { 0.0 };
                let h: Vec<f64> = g.iter().zip(&h).map(|(a, b)| a + gamma * b).collect();
                if dot(g, &h) > 0.0 {
                    h
                } else {
                    g.clone()
                }
            }
            _ => g.clone(),
        };
        self.direction = Some(h);
        self.previous = Some(g.clone());
    }

    fn step(&self, lambda: &Vec<f64>, at: &Eval<Vec<f64>>, t: f64) -> Vec<f64> {
        let h = self.direction.as_ref().unwrap_or(&at.grad);
        lambda.iter().zip(h).map(|(l, g)| l + t * g).collect()
    }

    fn slope(&self, at: &Eval<Vec<f64>>) -> f64 {
        dot(&at.grad, self.direction.as_ref().unwrap_or(&at.grad))
    }
}

fn family<'a>(
    prob: &'a Problem,
    generators: Vec<CMat>,
    base: CMat,
    imperfect: bool,
    cfg: &EstimationConfig,
) -> ExpFamily<'a> {
    ExpFamily {
        prob,
        generators,
        base,
        imperfect,
        integral: cfg.integral_gradient,
        conjugate: cfg.line_search != LineSearch::None,
        direction: None,
        previous: None,
    }
}

fn run_family(mut fam: ExpFamily<'_>, cfg: &EstimationConfig) -> Result<EstimationResult, EstError> {
    let lambda0 = vec![0.0; fam.generators.len()];
    let total = fam.prob.total;
    ascent::run(&mut fam, lambda0, cfg.step(SCHEME_STEP), cfg.line_search, cfg, total)
}

/// MLME Scheme A: ρ = e^{Σλ_jΠ_j}/tr{…} from λ = 0, with
/// λ_j ← λ_j + ε tr{ρ((Π_jR + RΠ_j)/2 − Π_j)}.
///
/// The gradient is per copy. `cfg.integral_gradient` replaces the symmetric
/// approximation by the exact integral, evaluated with 16-point
/// Gauss-Legendre quadrature. The default step is ε = 10. With a line search
/// the λ updates follow Polak-Ribière conjugate directions.
pub fn mlme_scheme_a(freqs: &Frequencies, pom: &Pom, cfg: &EstimationConfig) -> Result<EstimationResult, EstError> {
    cfg.validate()?;
    let prob = Problem::new(freqs, pom)?;
    let fam = family(&prob, prob.outcomes.clone(), CMat::zeros(prob.dim, prob.dim), false, cfg);
    run_family(fam, cfg)
}

/// Observed-outcome problem and the designated unobserved outcome.
fn split_missing(freqs: &Frequencies, pom: &Pom, missing: usize) -> Result<(Problem, CMat), EstError> {
    if freqs.len() != pom.len() {
        return Err(EstError::OutcomeMismatch(freqs.len(), pom.len()));
    }
    if missing >= pom.len() || pom.len() < 2 {
        return Err(EstError::InvalidData(format!("no outcome {missing} to treat as unobserved")));
    }
    if freqs.counts()[missing] != 0.0 {
        return Err(EstError::InvalidData(format!("outcome {missing} has counts")));
    }
    let mut outcomes = Vec::new();
    let mut counts = Vec::new();
    for (j, (o, n)) in pom.outcomes().iter().zip(freqs.counts()).enumerate() {
        if j != missing {
            outcomes.push(o.matrix().clone());
            counts.push(*n);
        }
    }
    Ok((Problem::from_parts(outcomes, counts), pom.outcomes()[missing].matrix().clone()))
}

fn best_of(r: Result<EstimationResult, EstError>) -> Result<EstimationResult, EstError> {
    match r {
        Err(EstError::MaxIterExceeded(best)) => Ok(*best),
        other => other,
    }
}

/// MLME Scheme B for data with one unobserved outcome K.
///
/// A first ML run on the observed outcomes gives β_j = p_j/Σ_{k≠K} p_k; the
/// estimator is then grown along Π_j + β_jΠ_K while ascending
/// Σ n_j ln(p_j/η). Without a missing outcome this is Scheme A.
pub fn mlme_scheme_b(
    freqs: &Frequencies,
    pom: &Pom,
    missing: Option<usize>,
    cfg: &EstimationConfig,
) -> Result<EstimationResult, EstError> {
    let Some(k) = missing else {
        return mlme_scheme_a(freqs, pom, cfg);
    };
    cfg.validate()?;
    let (prob, pi_k) = split_missing(freqs, pom, k)?;
    let reference = best_of(ml_imperfect(&prob, &EstimationConfig { start: None, ..cfg.clone() }))?;
    let born = prob.born(reference.estimator.matrix(), true);
    let generators =
        prob.outcomes.iter().zip(&born.p).map(|(o, p)| o + &pi_k * c64(p / born.eta, 0.0)).collect();
    let fam = family(&prob, generators, CMat::zeros(prob.dim, prob.dim), true, cfg);
    run_family(fam, cfg)
}

/// The naive alternative to Scheme B: ρ = exp(log ρ₀ + Σ_jλ_jΠ_j)/tr{…} over
/// all outcomes, starting from a Hilbert-Schmidt random ρ₀ drawn from
/// `cfg.seed`. Different seeds land on different points of the ML plateau.
pub fn mlme_naive(
    freqs: &Frequencies,
    pom: &Pom,
    missing: usize,
    cfg: &EstimationConfig,
) -> Result<EstimationResult, EstError> {
    cfg.validate()?;
    let (prob, _) = split_missing(freqs, pom, missing)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let rho0 = hs_state(prob.dim, &mut rng);
    let generators = pom.outcomes().iter().map(|o| o.matrix().clone()).collect();
    let fam = family(&prob, generators, logm(rho0.op())?.into_matrix(), true, cfg);
    run_family(fam, cfg)
}

/// Maximum-entropy state reproducing the frequencies exactly.
///
/// Minimizes the dual φ(λ) = ln tr{e^{Σλ_jΠ_j}} − Σ_jλ_jf_j. Any state with
/// the measured probabilities bounds φ from below by its entropy, so a
/// negative φ proves that no such state exists. The residual is
/// Σ_j |tr{ρΠ_j} − f_j|.
pub fn max_entropy_exact(
    freqs: &Frequencies,
    pom: &Pom,
    cfg: &EstimationConfig,
) -> Result<EstimationResult, EstError> {
    cfg.validate()?;
    let prob = Problem::new(freqs, pom)?;
    let dual = |lambda: &[f64]| -> Result<(f64, CMat, Vec<f64>), EstError> {
        let h = prob.outcomes.iter().zip(lambda).fold(CMat::zeros(prob.dim, prob.dim), |acc, (o, l)| acc + o * c64(*l, 0.0));
        let (vals, vecs) = eigh(&h)?;
        let top = vals.iter().fold(f64::NEG_INFINITY, |a, v| a.max(*v));
        let weights: Vec<f64> = vals.iter().map(|v| (v - top).exp()).collect();
        let z: f64 = weights.iter().sum();
        let rho = spectral(&vecs, &weights.iter().map(|w| w / z).collect::<Vec<_>>());
        let phi = top + z.ln() - lambda.iter().zip(&prob.freqs).map(|(l, f)| l * f).sum::<f64>();
        let grad = prob.outcomes.iter().zip(&prob.freqs).map(|(o, f)| trace_product_re(&rho, o) - f).collect();
        Ok((phi, rho, grad))
    };
    let mut lambda = vec![0.0; prob.outcomes.len()];
    let (mut phi, mut rho, mut grad) = dual(&lambda)?;
    let mut t = cfg.step(1.0);
    let mut trace = vec![prob.total * prob.born(&rho, false).loglik];
    let mut iterations = 0;
    let residual = |g: &[f64]| g.iter().map(|x| x.abs()).sum::<f64>();
    loop {
        if phi < 0.0 {
            return Err(EstError::Infeasible { certificate: phi });
        }
        if residual(&grad) <= cfg.precision || iterations >= cfg.max_iter {
            break;
        }
        let g2: f64 = grad.iter().map(|x| x * x).sum();
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = lambda.iter().zip(&grad).map(|(l, g)| l - t * g).collect();
            let (p, r, g) = dual(&trial)?;
            if p <= phi - 0.5 * t * g2 {
                (lambda, phi, rho, grad) = (trial, p, r, g);
                accepted = true;
                t *= 2.0;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        iterations += 1;
        trace.push(prob.total * prob.born(&rho, false).loglik);
    }
    let res = residual(&grad);
    finish(&rho, iterations, res, trace, 0, res <= cfg.precision)
}

/// One point of a λ sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepPoint {
    pub lambda: f64,
    pub entropy: f64,
    pub loglik: f64,
    pub result: EstimationResult,
}

/// Runs [`mlme_new`] for each λ, to pick a value where entropy and likelihood
/// have both levelled off.
pub fn lambda_sweep(
    freqs: &Frequencies,
    pom: &Pom,
    lambdas: &[f64],
    cfg: &EstimationConfig,
    imperfect: bool,
) -> Result<Vec<SweepPoint>, EstError> {
    lambdas
        .iter()
        .map(|&lambda| {
            let result = mlme_new(freqs, pom, &EstimationConfig { lambda, ..cfg.clone() }, imperfect)?;
            let loglik = crate::log_likelihood(freqs, pom, &result.estimator, imperfect)?;
            Ok(SweepPoint { lambda, entropy: result.entropy, loglik, result })
        })
        .collect()
}
