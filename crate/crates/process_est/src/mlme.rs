//! MLME process estimation.
//!
//! E ascends I(λ; E) = λS(E) + Σ_lm f_lm ln p_lm through
//! E ← (1+Z†)E(1+Z) with
//! 1+Z = (1+δA)[√(tr_K{(1+δA)E(1+δA)}) ⊗ 1_K]⁻¹ and
//! δA = (ε/2)(W − ½tr_K{WE+EW}⊗1_K). The normalization is applied exactly,
//! so every iterate satisfies tr_K{E} = 1_H to rounding.

use operators::{c64, hermitian_fn, kron, sqrtm, symmetrize, trace_product_re, CMat, HermitianOp, StateOp};
use serde::{Deserialize, Serialize};

use crate::choi::{lift, output_unnormalized, tp_defect, trace_out_output, ChoiOp};
use crate::{QptData, ProcError};

/// Eigenvalue floor inside log(E/D_i) and the inverse square root.
const EIG_FLOOR: f64 = 1e-300;
/// Step-halving attempts per iteration.
const MAX_HALVINGS: usize = 60;
const STEP_GROWTH: f64 = 1.25;
/// Bound on the Frobenius norm of δA. Larger steps lose positivity to
/// rounding once 1+δA is dominated by δA.
pub(crate) const MAX_STEP_NORM: f64 = 1.0;
/// Iterations between evaluations of the extremal residual.
const RESIDUAL_EVERY: usize = 10;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QptConfig {
    /// Entropy weight λ.
    pub lambda: f64,
    /// Initial step ε. Accepted steps grow it by 1.25, rejected ones halve it.
    pub epsilon: f64,
    /// Target for the extremal residual ‖ΛEΛ − WEW‖_tr.
    pub precision: f64,
    pub max_iter: usize,
    /// Seed for random starting points where a strategy needs them.
    pub seed: u64,
    /// Starting operator; 1/D_o when absent.
    #[serde(skip)]
    pub start: Option<ChoiOp>,
}

impl Default for QptConfig {
    fn default() -> Self {
        Self { lambda: 1e-3, epsilon: 0.5, precision: 1e-7, max_iter: 100_000, seed: 0, start: None }
    }
}

impl QptConfig {
    pub fn validate(&self) -> Result<(), ProcError> {
        let bad = |m: &str| Err(ProcError::InvalidConfig(m.into()));
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be nonnegative");
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon must be positive");
        }
        if !(self.precision > 0.0) {
            return bad("precision must be positive");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be positive");
        }
        Ok(())
    }
}

#[derive(Clone)]
pub struct QptResult {
    pub estimator: ChoiOp,
    pub iterations: usize,
    /// Final ‖ΛEΛ − WEW‖_tr.
    pub residual: f64,
    /// Σ_lm f_lm ln p_lm at the estimator; for imperfect detection the
    /// undetected fraction is included.
    pub loglik: f64,
    /// I(λ; E) after each iteration; entry 0 is the start.
    pub objective_trace: Vec<f64>,
    /// Channel entropy S(E).
    pub entropy: f64,
    /// Largest ‖tr_K{E_n} − 1_H‖ over all iterates, the start included.
    pub max_tp_defect: f64,
    pub converged: bool,
}

impl std::fmt::Debug for QptResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QptResult")
            .field("iterations", &self.iterations)
            .field("residual", &self.residual)
            .field("loglik", &self.loglik)
            .field("entropy", &self.entropy)
            .field("max_tp_defect", &self.max_tp_defect)
            .field("converged", &self.converged)
            .finish()
    }
}

/// Data prepared for repeated likelihood evaluations.
pub(crate) struct Problem {
    pub d_in: usize,
    pub d_out: usize,
    pub inputs: Vec<CMat>,
    pub inputs_t: Vec<CMat>,
    pub outcomes: Vec<CMat>,
    pub freqs: Vec<Vec<f64>>,
    /// G = ΣΠ̃_m for imperfect detection.
    pub total_outcome: Option<CMat>,
    /// Σ_lρ_lᵀ⊗1_K/L, added back to W − W₀ when the residual is evaluated.
    residual_shift: Option<CMat>,
    pub lambda: f64,
}

pub(crate) struct Eval {
    pub obj: f64,
    pub loglik: f64,
    pub w: CMat,
}

impl Problem {
    fn new(data: &QptData, efficiencies: Option<&[f64]>, lambda: f64) -> Result<Self, ProcError> {
        let (d_in, d_out) = data.dims();
        let outcomes: Vec<CMat> = match efficiencies {
            None => data.pom().outcomes().iter().map(|o| o.matrix().clone()).collect(),
            Some(eta) => {
                if eta.len() != data.pom().len() {
                    return Err(ProcError::InvalidData(format!("{} efficiencies for {} outcomes", eta.len(), data.pom().len())));
                }
                if eta.iter().any(|e| !(0.0..=1.0).contains(e)) {
                    return Err(ProcError::InvalidData("efficiencies must lie in [0, 1]".into()));
                }
                data.pom().outcomes().iter().zip(eta).map(|(o, e)| o.matrix() * c64(*e, 0.0)).collect()
            }
        };
        let total_outcome =
            efficiencies.map(|_| outcomes.iter().fold(CMat::zeros(d_out, d_out), |acc, o| acc + o));
        let residual_shift = efficiencies.map(|_| {
            let sum_t = data.inputs().iter().fold(CMat::zeros(d_in, d_in), |acc, r| acc + r.matrix().transpose());
            lift(&sum_t, d_out) / c64(data.len() as f64, 0.0)
        });
        Ok(Self {
            d_in,
            d_out,
            residual_shift,
            inputs: data.inputs().iter().map(|r| r.matrix().clone()).collect(),
            inputs_t: data.inputs().iter().map(|r| r.matrix().transpose()).collect(),
            outcomes,
            freqs: data.frequencies(),
            total_outcome,
            lambda,
        })
    }

    pub fn eval(&self, e: &CMat) -> Result<Eval, ProcError> {
        let l = self.inputs.len() as f64;
        let n = e.nrows();
        let mut loglik = 0.0;
        let mut detected = 0.0;
        let mut w = CMat::zeros(n, n);
        for ((rho, rho_t), f) in self.inputs.iter().zip(&self.inputs_t).zip(&self.freqs) {
            let out = output_unnormalized(e, rho, self.d_in, self.d_out);
            let mut q = CMat::zeros(self.d_out, self.d_out);
            for (o, &flm) in self.outcomes.iter().zip(f) {
                let p = trace_product_re(o, &out) / l;
                detected += p;
                if flm > 0.0 {
                    if !(p > 0.0) {
                        return Ok(Eval { obj: f64::NEG_INFINITY, loglik: f64::NEG_INFINITY, w });
                    }
                    loglik += flm * p.ln();
                    q += o * c64(flm / p, 0.0);
                }
            }
            w += kron(rho_t, &q) / c64(l, 0.0);
        }
        if let Some(g) = &self.total_outcome {
            // W₀ = Σ_l ρ_lᵀ⊗G / (L Σ_l p'_l) accounts for undetected copies.
            let sum_t = self.inputs_t.iter().fold(CMat::zeros(self.d_in, self.d_in), |acc, r| acc + r);
            w -= kron(&sum_t, g) / c64(l * detected, 0.0);
            loglik -= self.freqs.iter().flatten().sum::<f64>() * detected.ln();
        }
        let mut obj = loglik;
        if self.lambda > 0.0 {
            let d = self.d_in as f64;
            let (vals, vecs) = HermitianOp::from_symmetrized(e).eigh()?;
            let mut entropy = 0.0;
            let mut scaled = vecs.clone();
            for (c, v) in vals.iter().enumerate() {
                // Rounding leaves tiny negative eigenvalues. Flooring them
                // would push them outward at the strongest rate, so they get
                // the gradient of their magnitude instead.
                let mu = (v / d).abs().max(EIG_FLOOR);
                entropy -= mu * mu.ln();
                for r in 0..n {
                    scaled[(r, c)] *= c64(-(self.lambda / d) * (1.0 + mu.ln()), 0.0);
                }
            }
            w += scaled * vecs.adjoint();
            obj += self.lambda * entropy;
        }
        Ok(Eval { obj, loglik, w: symmetrize(&w) })
    }

    /// Extremal residual at `e`. A shift W → W + A⊗1_K leaves the
    /// trace-preserving stationarity condition unchanged. With imperfect
    /// detection W − W₀ has a multiplier near zero, where Λ = √(tr_K{WEW})
    /// amplifies rounding, so the shift Σ_lρ_lᵀ⊗1_K/L restores the
    /// perfect-detection scale first.
    fn residual(&self, e: &CMat, w: &CMat) -> Result<f64, ProcError> {
        match &self.residual_shift {
            Some(shift) => extremal_residual(e, &(w + shift), self.d_in, self.d_out),
            None => extremal_residual(e, w, self.d_in, self.d_out),
        }
    }
}

/// Direction W − ½tr_K{WE+EW}⊗1_K of the steepest trace-preserving ascent.
pub(crate) fn tp_direction(e: &CMat, x: &CMat, d_in: usize, d_out: usize) -> CMat {
    let xe = x * e;
    let proj = trace_out_output(&(&xe + xe.adjoint()), d_in, d_out) * c64(0.5, 0.0);
    x - lift(&proj, d_out)
}

/// Largest step for which ‖δA‖ stays at [`MAX_STEP_NORM`].
pub(crate) fn step_cap(direction: &CMat) -> f64 {
    2.0 * MAX_STEP_NORM / direction.norm().max(f64::MIN_POSITIVE)
}

/// E ← (1+Z)E(1+Z) with δA = (eps/2)·`direction`.
pub(crate) fn tp_step(e: &CMat, direction: &CMat, eps: f64, d_in: usize, d_out: usize) -> Result<CMat, ProcError> {
    let n = e.nrows();
    let b = CMat::identity(n, n) + direction * c64(eps / 2.0, 0.0);
    let beb = symmetrize(&(&b * e * &b));
    let t = HermitianOp::from_symmetrized(&trace_out_output(&beb, d_in, d_out));
    let s = lift(hermitian_fn(&t, |v| 1.0 / v.sqrt(), EIG_FLOOR)?.matrix(), d_out);
    Ok(symmetrize(&(&s * beb * &s)))
}

/// ‖ΛEΛ − XEX‖_tr with Λ = √(tr_K{XEX}) ⊗ 1_K.
pub(crate) fn extremal_residual(e: &CMat, x: &CMat, d_in: usize, d_out: usize) -> Result<f64, ProcError> {
    let xex = symmetrize(&(x * e * x));
    let t = HermitianOp::from_symmetrized(&trace_out_output(&xex, d_in, d_out));
    let lam = lift(sqrtm(&t)?.matrix(), d_out);
    Ok(hermitian_trace_norm(&(&lam * e * &lam - xex)))
}

/// tr|h| for a Hermitian matrix.
pub(crate) fn hermitian_trace_norm(h: &CMat) -> f64 {
    symmetrize(h).symmetric_eigenvalues().iter().map(|v| v.abs()).sum()
}

fn start_operator(cfg: &QptConfig, d_in: usize, d_out: usize) -> Result<CMat, ProcError> {
    match &cfg.start {
        Some(s) if s.dims() != (d_in, d_out) => {
            Err(ProcError::Dimension(format!("start is {:?}, data need ({d_in}, {d_out})", s.dims())))
        }
        Some(s) => Ok(s.matrix().clone()),
        None => Ok(ChoiOp::maximally_mixed(d_in, d_out).matrix().clone()),
    }
}

fn run(prob: &Problem, cfg: &QptConfig) -> Result<QptResult, ProcError> {
    cfg.validate()?;
    let (d_in, d_out) = (prob.d_in, prob.d_out);
    let mut e = start_operator(cfg, d_in, d_out)?;
    let mut at = prob.eval(&e)?;
    if !at.obj.is_finite() {
        return Err(ProcError::InvalidData("starting operator gives zero probability to observed counts".into()));
    }
    let mut max_tp_defect = tp_defect(&e, d_in, d_out);
    let mut trace = vec![at.obj];
    let mut eps = cfg.epsilon;
    let mut iterations = 0;
    let mut converged = false;
    let mut residual = f64::INFINITY;
    loop {
        if iterations % RESIDUAL_EVERY == 0 || iterations >= cfg.max_iter {
            residual = prob.residual(&e, &at.w)?;
            if residual <= cfg.precision {
                converged = true;
                break;
            }
        }
        if iterations >= cfg.max_iter {
            break;
        }
        let dir = tp_direction(&e, &at.w, d_in, d_out);
        eps = eps.min(step_cap(&dir));
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial = tp_step(&e, &dir, eps, d_in, d_out)?;
            let ev = prob.eval(&trial)?;
            if ev.obj >= at.obj - 1e-15 * (1.0 + at.obj.abs()) {
                accepted = Some((trial, ev));
                break;
            }
            eps *= 0.5;
        }
        let Some((next, ev)) = accepted else {
            residual = prob.residual(&e, &at.w)?;
            break;
        };
        eps *= STEP_GROWTH;
        e = next;
        at = ev;
        iterations += 1;
        max_tp_defect = max_tp_defect.max(tp_defect(&e, d_in, d_out));
        trace.push(at.obj);
    }
    let estimator = ChoiOp::from_matrix_unchecked(&e, d_in, d_out);
    let entropy = crate::channel_entropy(&estimator);
    let result = QptResult {
        estimator,
        iterations,
        residual,
        loglik: at.loglik,
        objective_trace: trace,
        entropy,
        max_tp_defect,
        converged,
    };
    if converged {
        Ok(result)
    } else {
        Err(ProcError::MaxIterExceeded(Box::new(result)))
    }
}

fn check_perfect(data: &QptData) -> Result<(), ProcError> {
    if !data.pom().is_complete() {
        return Err(ProcError::InvalidData("POM does not sum to the identity; use mlme_qpt_imperfect".into()));
    }
    let totals: Vec<f64> = data.counts().iter().map(|r| r.iter().sum()).collect();
    let first = totals[0];
    if totals.iter().any(|t| (t - first).abs() > 1e-9 * first.max(1.0)) {
        return Err(ProcError::InvalidData("every input state needs the same number of copies".into()));
    }
    Ok(())
}

/// MLME estimator of the Choi operator from perfectly detected data.
pub fn mlme_qpt(data: &QptData, cfg: &QptConfig) -> Result<QptResult, ProcError> {
    check_perfect(data)?;
    run(&Problem::new(data, None, cfg.lambda)?, cfg)
}

/// MLME with outcome efficiencies η_m: the POM Π̃_m = η_mΠ_m no longer sums
/// to 1_K and W is replaced by W − W₀.
pub fn mlme_qpt_imperfect(data: &QptData, efficiencies: &[f64], cfg: &QptConfig) -> Result<QptResult, ProcError> {
    run(&Problem::new(data, Some(efficiencies), cfg.lambda)?, cfg)
}

/// Keeps the best iterate of an unconverged run.
pub fn best_effort(r: Result<QptResult, ProcError>) -> Result<QptResult, ProcError> {
    match r {
        Err(ProcError::MaxIterExceeded(best)) => Ok(*best),
        other => other,
    }
}

/// Output of each input under `e`, normalized.
pub fn outputs(e: &ChoiOp, inputs: &[StateOp]) -> Result<Vec<StateOp>, ProcError> {
    inputs.iter().map(|r| crate::apply_channel(e, r)).collect()
}
