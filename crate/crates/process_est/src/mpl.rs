//! Maximum projected likelihood over the next input state.
//!
//! With L inputs measured, the next input ρ and the channel E jointly
//! maximize
//! log L̃ = Σ_lm ν_lm/(L+1) ln p̃_lm + Σ_m ν̃_m/(L+1) ln p̃_m,
//! where p̃ uses E/(L+1) and the projected frequencies ν̃_m = tr{E_prior ρᵀ⊗Π_m}
//! stand in for the data ρ would produce. The functional is not concave in
//! ρ, so several starts are run and their distinct maxima returned.

use operators::random::hs_state;
use operators::{c64, symmetrize, trace_product_re, CMat, StateOp};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::choi::{output_unnormalized, ChoiOp};
use crate::mlme::{extremal_residual, hermitian_trace_norm, step_cap, tp_direction, tp_step, MAX_STEP_NORM};
use crate::{ProcError, QptData};

const MAX_HALVINGS: usize = 60;
const STEP_GROWTH: f64 = 1.25;
const RESIDUAL_EVERY: usize = 10;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MplConfig {
    /// Initial step ε₁ for the channel.
    pub epsilon_choi: f64,
    /// Initial step ε₂ for the state.
    pub epsilon_state: f64,
    /// Target for the channel's extremal residual.
    pub precision_choi: f64,
    /// Target for the state's extremal residual.
    pub precision_state: f64,
    pub max_iter: usize,
    pub starts: usize,
    /// Pairs closer than this in trace distance count as one solution.
    pub dedup_tol: f64,
    pub seed: u64,
    /// Starting channel for every start; 1/D_o when absent.
    #[serde(skip)]
    pub start_choi: Option<ChoiOp>,
}

impl Default for MplConfig {
    fn default() -> Self {
        Self {
            epsilon_choi: 0.05,
            epsilon_state: 0.05,
            precision_choi: 1e-6,
            precision_state: 1e-6,
            max_iter: 20_000,
            starts: 8,
            dedup_tol: 1e-4,
            seed: 0,
            start_choi: None,
        }
    }
}

impl MplConfig {
    pub fn validate(&self) -> Result<(), ProcError> {
        let bad = |m: &str| Err(ProcError::InvalidConfig(m.into()));
        if !(self.epsilon_choi > 0.0 && self.epsilon_state > 0.0) {
            return bad("MPL steps must be positive");
        }
        if !(self.precision_choi > 0.0 && self.precision_state > 0.0) || self.max_iter == 0 || self.starts == 0 {
            return bad("precisions, max_iter and starts must be positive");
        }
        if !(self.dedup_tol >= 0.0) {
            return bad("dedup_tol must be nonnegative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MplPair {
    pub state: StateOp,
    pub choi: ChoiOp,
    /// log L̃ at the pair.
    pub objective: f64,
    /// ‖Λ̃EΛ̃ − 𝒳E𝒳‖_tr.
    pub residual_choi: f64,
    /// ‖ρ𝒴 − tr{𝒴ρ}ρ‖_tr.
    pub residual_state: f64,
    pub iterations: usize,
    pub converged: bool,
    /// log L̃ after each iteration; entry 0 is the start.
    pub objective_trace: Vec<f64>,
    pub start: usize,
}

#[derive(Debug, Clone, Default)]
pub struct MplOutcome {
    /// Distinct converged maxima, highest objective first.
    pub pairs: Vec<MplPair>,
    /// Starts that hit `max_iter`, kept for callers that need a fallback.
    pub unconverged: Vec<MplPair>,
    /// Fraction of converged starts that repeated an earlier solution.
    pub repeated_fraction: f64,
    pub warnings: Vec<String>,
}

struct Projected<'a> {
    d_in: usize,
    d_out: usize,
    inputs: Vec<CMat>,
    inputs_t: Vec<CMat>,
    outcomes: Vec<CMat>,
    /// ν_lm, normalized per input.
    nu: Vec<Vec<f64>>,
    prior: &'a CMat,
}

struct MplEval {
    obj: f64,
    x: CMat,
    y: CMat,
}

/// C_{hh'} = tr{Π · E_{(h·),(h'·)}}, so that tr{E(ρᵀ⊗Π)} = tr{Cᵀρ}.
fn contract_output(e: &CMat, op: &CMat, d_in: usize, d_out: usize) -> CMat {
    CMat::from_fn(d_in, d_in, |h, g| {
        let mut s = c64(0.0, 0.0);
        for k in 0..d_out {
            for j in 0..d_out {
                s += e[(h * d_out + k, g * d_out + j)] * op[(j, k)];
            }
        }
        s
    })
}

impl<'a> Projected<'a> {
    fn new(data: &QptData, prior: &'a ChoiOp) -> Self {
        let (d_in, d_out) = data.dims();
        let nu = data
            .counts()
            .iter()
            .map(|row| {
                let t: f64 = row.iter().sum();
                row.iter().map(|n| if t > 0.0 { n / t } else { 0.0 }).collect()
            })
            .collect();
        Self {
            d_in,
            d_out,
            inputs: data.inputs().iter().map(|r| r.matrix().clone()).collect(),
            inputs_t: data.inputs().iter().map(|r| r.matrix().transpose()).collect(),
            outcomes: data.pom().outcomes().iter().map(|o| o.matrix().clone()).collect(),
            nu,
            prior: prior.matrix(),
        }
    }
}

impl Projected<'_> {
    fn eval(&self, e: &CMat, rho: &CMat) -> MplEval {
        let n = e.nrows();
        let l1 = self.inputs.len() as f64 + 1.0;
        let mut obj = 0.0;
        let mut x = CMat::zeros(n, n);
        let mut bad = false;
        for ((r, r_t), nu) in self.inputs.iter().zip(&self.inputs_t).zip(&self.nu) {
            let out = output_unnormalized(e, r, self.d_in, self.d_out);
            let mut q = CMat::zeros(self.d_out, self.d_out);
            for (o, &v) in self.outcomes.iter().zip(nu) {
                if v > 0.0 {
                    let p = trace_product_re(o, &out) / l1;
                    if !(p > 0.0) {
                        bad = true;
                        continue;
                    }
                    obj += v / l1 * p.ln();
                    q += o * c64(v / (p * l1 * l1), 0.0);
                }
            }
            x += operators::kron(r_t, &q);
        }
        let out = output_unnormalized(e, rho, self.d_in, self.d_out);
        let out_prior = output_unnormalized(self.prior, rho, self.d_in, self.d_out);
        let mut q = CMat::zeros(self.d_out, self.d_out);
        let mut log_weights = CMat::zeros(self.d_out, self.d_out);
        let mut ratio_weights = CMat::zeros(self.d_out, self.d_out);
        for o in &self.outcomes {
            let nu = trace_product_re(o, &out_prior).max(0.0);
            let p = trace_product_re(o, &out) / l1;
            if !(p > 0.0) {
                if nu > 0.0 {
                    bad = true;
                }
                continue;
            }
            obj += nu / l1 * p.ln();
            q += o * c64(nu / (p * l1 * l1), 0.0);
            log_weights += o * c64(p.ln() / l1, 0.0);
            ratio_weights += o * c64(nu / (l1 * l1 * p), 0.0);
        }
        x += operators::kron(&rho.transpose(), &q);
        let y = (contract_output(self.prior, &log_weights, self.d_in, self.d_out)
            + contract_output(e, &ratio_weights, self.d_in, self.d_out))
        .transpose();
        if bad {
            obj = f64::NEG_INFINITY;
        }
        MplEval { obj, x: symmetrize(&x), y: symmetrize(&y) }
    }

    fn residuals(&self, e: &CMat, rho: &CMat, at: &MplEval) -> Result<(f64, f64), ProcError> {
        let rc = extremal_residual(e, &at.x, self.d_in, self.d_out)?;
        let xi = xi_of(&at.y, rho);
        Ok((rc, operators::trace_norm(&(rho * xi))))
    }
}

/// Ξ = 𝒴 − tr{𝒴ρ}.
fn xi_of(y: &CMat, rho: &CMat) -> CMat {
    let n = y.nrows();
    y - CMat::identity(n, n) * c64(trace_product_re(y, rho), 0.0)
}

fn sandwich(rho: &CMat, xi: &CMat, t: f64) -> CMat {
    let n = rho.nrows();
    let b = CMat::identity(n, n) + xi * c64(t, 0.0);
    let m = symmetrize(&(&b * rho * &b));
    let tr = operators::trace(&m).re;
    m / c64(tr, 0.0)
}

fn run_start(prob: &Projected<'_>, cfg: &MplConfig, start: usize) -> Result<MplPair, ProcError> {
    let (d_in, d_out) = (prob.d_in, prob.d_out);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(start as u64));
    let mut rho = hs_state(d_in, &mut rng).matrix().clone();
    let mut e = match &cfg.start_choi {
        Some(c) => c.matrix().clone(),
        None => ChoiOp::maximally_mixed(d_in, d_out).matrix().clone(),
    };
    let mut at = prob.eval(&e, &rho);
    let mut trace = vec![at.obj];
    let (mut eps1, mut eps2) = (cfg.epsilon_choi, cfg.epsilon_state);
    let mut iterations = 0;
    let mut converged = false;
    let (mut rc, mut rs) = (f64::INFINITY, f64::INFINITY);
    loop {
        if iterations % RESIDUAL_EVERY == 0 || iterations >= cfg.max_iter {
            (rc, rs) = prob.residuals(&e, &rho, &at)?;
            if rc <= cfg.precision_choi && rs <= cfg.precision_state {
                converged = true;
                break;
            }
        }
        if iterations >= cfg.max_iter {
            break;
        }
        let dir = tp_direction(&e, &at.x, d_in, d_out);
        let xi = xi_of(&at.y, &rho);
        eps1 = eps1.min(step_cap(&dir));
        eps2 = eps2.min(MAX_STEP_NORM / xi.norm().max(f64::MIN_POSITIVE));
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let e_new = tp_step(&e, &dir, eps1, d_in, d_out)?;
            let rho_new = sandwich(&rho, &xi, eps2);
            let ev = prob.eval(&e_new, &rho_new);
            if ev.obj >= at.obj - 1e-15 * (1.0 + at.obj.abs()) {
                accepted = Some((e_new, rho_new, ev));
                break;
            }
            eps1 *= 0.5;
            eps2 *= 0.5;
        }
        let Some((e_new, rho_new, ev)) = accepted else {
            (rc, rs) = prob.residuals(&e, &rho, &at)?;
            break;
        };
        eps1 *= STEP_GROWTH;
        eps2 *= STEP_GROWTH;
        e = e_new;
        rho = rho_new;
        at = ev;
        iterations += 1;
        trace.push(at.obj);
    }
    Ok(MplPair {
        state: StateOp::normalized(&rho)?,
        choi: ChoiOp::from_matrix_unchecked(&e, d_in, d_out),
        objective: at.obj,
        residual_choi: rc,
        residual_state: rs,
        iterations,
        converged,
        objective_trace: trace,
        start,
    })
}

fn state_distance(a: &StateOp, b: &StateOp) -> f64 {
    0.5 * hermitian_trace_norm(&(a.matrix() - b.matrix()))
}

/// Runs `cfg.starts` MPL iterations from random states and returns the
/// distinct maxima. Solutions that coincide with an input already in `data`
/// are dropped.
pub fn mpl_optimize(data: &QptData, prior: &ChoiOp, cfg: &MplConfig) -> Result<MplOutcome, ProcError> {
    cfg.validate()?;
    let (d_in, d_out) = data.dims();
    if prior.dims() != (d_in, d_out) {
        return Err(ProcError::Dimension(format!("prior is {:?}, data need ({d_in}, {d_out})", prior.dims())));
    }
    let prob = Projected::new(data, prior);
    let runs: Vec<MplPair> =
        (0..cfg.starts).into_par_iter().map(|s| run_start(&prob, cfg, s)).collect::<Result<_, _>>()?;

    let mut out = MplOutcome::default();
    let mut converged: Vec<MplPair> = Vec::new();
    for r in runs {
        if r.converged {
            converged.push(r);
        } else {
            out.warnings.push(format!("MPL start {} stopped at residuals ({:.2e}, {:.2e})", r.start, r.residual_choi, r.residual_state));
            out.unconverged.push(r);
        }
    }
    let total = converged.len();
    converged.sort_by(|a, b| b.objective.total_cmp(&a.objective));
    for p in converged {
        let repeat = out.pairs.iter().any(|q: &MplPair| {
            state_distance(&p.state, &q.state) <= cfg.dedup_tol
                && p.choi.distance(&q.choi).map(|d| d <= cfg.dedup_tol).unwrap_or(false)
        });
        if !repeat {
            out.pairs.push(p);
        }
    }
    out.repeated_fraction = if total > 0 { 1.0 - out.pairs.len() as f64 / total as f64 } else { 0.0 };
    out.pairs.retain(|p| data.inputs().iter().all(|r| state_distance(&p.state, r) > cfg.dedup_tol));
    out.unconverged.sort_by(|a, b| b.objective.total_cmp(&a.objective));
    Ok(out)
}

/// log L̃ for a given pair; exposed for diagnostics.
pub fn projected_log_likelihood(data: &QptData, prior: &ChoiOp, e: &ChoiOp, rho: &StateOp) -> Result<f64, ProcError> {
    let (d_in, d_out) = data.dims();
    if e.dims() != (d_in, d_out) || prior.dims() != (d_in, d_out) || rho.dim() != d_in {
        return Err(ProcError::Dimension("pair does not match the data".into()));
    }
    let prob = Projected::new(data, prior);
    Ok(prob.eval(e.matrix(), rho.matrix()).obj)
}
