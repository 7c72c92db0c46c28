use operators::{c64, hs_inner, trace, trace_product_re, CMat, HermitianOp};
use pom::{dual_frame, Pom};

use crate::ascent::{self, eigh, first_floored, residual_of, sandwich, Ascent, Eval};
use crate::likelihood::Problem;
use crate::{EstError, EstimationConfig, EstimationResult, Frequencies, LineSearch};

const LOG_FLOOR: f64 = operators::DEFAULT_EIG_FLOOR;

/// Objective driving a state-space iteration ρ → (1 + tX)ρ(1 + tX)/tr.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Kind {
    /// Σ f ln p, or Σ f ln(p/η).
    Ml { imperfect: bool },
    /// λS + Σ f ln(p/η).
    Mlme { imperfect: bool, lambda: f64 },
    /// (β/N) ln det ρ + Σ f ln p.
    Hml { beta: f64 },
}

pub(crate) struct Sandwich<'a> {
    pub prob: &'a Problem,
    pub kind: Kind,
}

impl Sandwich<'_> {
    /// Factor multiplying X in 1 + tX.
    fn half(&self) -> f64 {
        match self.kind {
            Kind::Mlme { .. } => 1.0,
            _ => 0.5,
        }
    }
}

impl Ascent for Sandwich<'_> {
    type Pos = CMat;
    type Grad = CMat;

    fn eval(&self, rho: &CMat) -> Result<Eval<CMat>, EstError> {
        let imperfect = matches!(self.kind, Kind::Ml { imperfect: true } | Kind::Mlme { imperfect: true, .. });
        let born = self.prob.born(rho, imperfect);
        let floored = first_floored(self.prob, &born);
        let x = self.prob.gradient(&born, imperfect);
        let d = self.prob.dim;
        let (obj, grad) = match self.kind {
            Kind::Ml { .. } => (born.loglik, x),
            Kind::Mlme { lambda, .. } => {
                let (vals, vecs) = eigh(rho)?;
                let logs: Vec<f64> = vals.iter().map(|v| v.max(LOG_FLOOR).ln()).collect();
                let tr_log: f64 = vals.iter().zip(&logs).map(|(v, l)| v * l).sum();
                let entropy: f64 = vals.iter().filter(|v| **v > 0.0).map(|v| -v * v.ln()).sum();
                let log_rho = spectral(&vecs, &logs);
                let shifted = log_rho - CMat::identity(d, d) * c64(tr_log, 0.0);
                (lambda * entropy + born.loglik, x - shifted * c64(lambda, 0.0))
            }
            Kind::Hml { beta } => {
                let (vals, vecs) = eigh(rho)?;
                let log_det: f64 = vals.iter().map(|v| v.max(LOG_FLOOR).ln()).sum();
                let inv: Vec<f64> = vals.iter().map(|v| 1.0 / v.max(LOG_FLOOR)).collect();
                let hedge = spectral(&vecs, &inv) - CMat::identity(d, d) * c64(d as f64, 0.0);
                let w = beta / self.prob.total;
                (born.loglik + w * log_det, x + hedge * c64(w, 0.0))
            }
        };
        let residual = residual_of(&grad, rho);
        Ok(Eval { rho: rho.clone(), obj, residual, floored, grad })
    }

    fn step(&self, rho: &CMat, at: &Eval<CMat>, t: f64) -> CMat {
        sandwich(rho, &at.grad, t * self.half())
    }

    fn slope(&self, at: &Eval<CMat>) -> f64 {
        2.0 * self.half() * trace_product_re(&(&at.grad * &at.rho), &at.grad)
    }
}

/// V diag(vals) V†.
pub(crate) fn spectral(vecs: &CMat, vals: &[f64]) -> CMat {
    let mut scaled = vecs.clone();
    for (c, v) in vals.iter().enumerate() {
        scaled.column_mut(c).scale_mut(*v);
    }
    scaled * vecs.adjoint()
}

pub(crate) fn run_sandwich(
    prob: &Problem,
    kind: Kind,
    rho0: CMat,
    t0: f64,
    cfg: &EstimationConfig,
) -> Result<EstimationResult, EstError> {
    let mut s = Sandwich { prob, kind };
    ascent::run(&mut s, rho0, t0, cfg.line_search, cfg, prob.total)
}

/// Steepest ascent ρ ← (1 + ε/2(R−1))ρ(1 + ε/2(R−1))/tr{…} from 1/D.
pub fn ml_dg(freqs: &Frequencies, pom: &Pom, cfg: &EstimationConfig) -> Result<EstimationResult, EstError> {
    cfg.validate()?;
    let prob = Problem::new(freqs, pom)?;
    let rho0 = ascent::start_state(cfg, prob.dim)?;
    run_sandwich(&prob, Kind::Ml { imperfect: false }, rho0, cfg.step(0.1), cfg)
}

/// ML for a subnormalized POM: maximizes Σ n_j ln(p_j/η).
pub(crate) fn ml_imperfect(prob: &Problem, cfg: &EstimationConfig) -> Result<EstimationResult, EstError> {
    let rho0 = ascent::start_state(cfg, prob.dim)?;
    run_sandwich(prob, Kind::Ml { imperfect: true }, rho0, cfg.step(0.1), cfg)
}

struct ConjugateGradient<'a> {
    prob: &'a Problem,
    xi: f64,
    direction: Option<CMat>,
    previous: Option<CMat>,
}

fn re_inner(a: &CMat, b: &CMat) -> f64 {
    hs_inner(a, b).re
}

impl Ascent for ConjugateGradient<'_> {
    type Pos = CMat;
    /// ∂ log ℒ/∂𝒜.
    type Grad = CMat;

    fn eval(&self, a: &CMat) -> Result<Eval<CMat>, EstError> {
        let m = a.adjoint() * a;
        let norm = trace(&m).re;
        let rho = m / c64(norm, 0.0);
        let born = self.prob.born(&rho, false);
        let floored = first_floored(self.prob, &born);
        let x = self.prob.gradient(&born, false);
        let residual = residual_of(&x, &rho);
        let grad = a * x / c64(norm, 0.0);
        Ok(Eval { rho, obj: born.loglik, residual, floored, grad })
    }

    fn prepare(&mut self, _a: &CMat, at: &Eval<CMat>) {
        let g = &at.grad;
        let h = match (self.direction.take(), self.previous.take()) {
            (Some(h), Some(prev)) => {
                let denom = re_inner(&prev, &prev);
                let gamma = if denom > 0.0 {
                    (re_inner(g, &(g - &prev * c64(self.xi, 0.0))) / denom).max(0.0)
                } else {
                    0.0
                };
                let h = g + h * c64(gamma, 0.0);
                if re_inner(g, &h) > 0.0 {
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

    fn step(&self, a: &CMat, at: &Eval<CMat>, t: f64) -> CMat {
        let h = self.direction.as_ref().unwrap_or(&at.grad);
        a + h * c64(t, 0.0)
    }

    fn slope(&self, at: &Eval<CMat>) -> f64 {
        2.0 * re_inner(&at.grad, self.direction.as_ref().unwrap_or(&at.grad))
    }
}

/// Conjugate-gradient ML over ρ = 𝒜†𝒜/tr{𝒜†𝒜} with the damped
/// Polak-Ribière factor γ' = max{⟨G₊, G₊ − ξG⟩/⟨G, G⟩, 0}.
///
/// The step comes from a line search; `LineSearch::None` selects the ten-point
/// search.
pub fn ml_cg(freqs: &Frequencies, pom: &Pom, cfg: &EstimationConfig) -> Result<EstimationResult, EstError> {
    cfg.validate()?;
    let prob = Problem::new(freqs, pom)?;
    let a0 = match &cfg.start {
        Some(_) => {
            let rho = ascent::start_state(cfg, prob.dim)?;
            operators::sqrtm(&HermitianOp::from_symmetrized(&rho))?.into_matrix()
        }
        None => CMat::identity(prob.dim, prob.dim),
    };
    let mode = match cfg.line_search {
        LineSearch::None => LineSearch::Quadratic10,
        m => m,
    };
    let mut cg = ConjugateGradient { prob: &prob, xi: cfg.xi, direction: None, previous: None };
    ascent::run(&mut cg, a0, cfg.step(0.1), mode, cfg, prob.total)
}

/// σ̂ = Σ_j f_jΘ_j with the canonical duals; not necessarily positive.
pub fn linear_inversion(freqs: &Frequencies, pom: &Pom) -> Result<HermitianOp, EstError> {
    if freqs.len() != pom.len() {
        return Err(EstError::OutcomeMismatch(freqs.len(), pom.len()));
    }
    Ok(dual_frame(pom)?.reconstruct(&freqs.frequencies()))
}

/// Hedged ML: ρ ← (1+Δ)ρ(1+Δ)/tr{…} with Δ = (ε/2)[β(ρ⁻¹ − D) + N(R − 1)].
///
/// The default step is ε = 1/N. The reported residual is
/// ‖β(1 − Dρ) + N(R − 1)ρ‖_tr divided by N.
pub fn hml(freqs: &Frequencies, pom: &Pom, cfg: &EstimationConfig) -> Result<EstimationResult, EstError> {
    cfg.validate()?;
    let prob = Problem::new(freqs, pom)?;
    let rho0 = ascent::start_state(cfg, prob.dim)?;
    let eps = cfg.step(1.0 / prob.total);
    run_sandwich(&prob, Kind::Hml { beta: cfg.beta }, rho0, eps * prob.total, cfg)
}
