//! Generic ascent loop and the line searches shared by every iterative estimator.

use operators::{c64, symmetrize, trace, trace_norm, von_neumann_entropy, CMat, HermitianOp, StateOp};

use crate::likelihood::{Born, Problem, PROB_FLOOR};
use crate::{EstError, EstimationConfig, EstimationResult, LineSearch};

/// Step-halving attempts before a line search gives up.
const MAX_SHRINK: usize = 60;

/// Objective evaluated at one point of the search.
pub(crate) struct Eval<G> {
    pub rho: CMat,
    /// Per-copy objective.
    pub obj: f64,
    pub residual: f64,
    /// An observed outcome whose probability had to be floored.
    pub floored: Option<usize>,
    pub grad: G,
}

pub(crate) trait Ascent {
    type Pos;
    type Grad;
    fn eval(&self, pos: &Self::Pos) -> Result<Eval<Self::Grad>, EstError>;
    /// Fixes the search direction at the current point.
    fn prepare(&mut self, _pos: &Self::Pos, _at: &Eval<Self::Grad>) {}
    fn step(&self, pos: &Self::Pos, at: &Eval<Self::Grad>, t: f64) -> Self::Pos;
    /// Derivative of the objective along the step at t = 0.
    fn slope(&self, at: &Eval<Self::Grad>) -> f64;
}

/// Sufficient-increase constant for fixed steps.
const ARMIJO: f64 = 0.25;

fn accept_tol(f0: f64) -> f64 {
    1e-13 * (1.0 + f0.abs())
}

struct Trial<P, G> {
    t: f64,
    pos: P,
    eval: Eval<G>,
}

fn obj_or_min(e: &Eval<impl Sized>) -> f64 {
    if e.obj.is_nan() {
        f64::NEG_INFINITY
    } else {
        e.obj
    }
}

fn try_step<A: Ascent>(a: &A, pos: &A::Pos, at: &Eval<A::Grad>, t: f64) -> Result<Trial<A::Pos, A::Grad>, EstError> {
    let p = a.step(pos, at, t);
    let eval = a.eval(&p)?;
    Ok(Trial { t, pos: p, eval })
}

fn better<P, G>(a: Trial<P, G>, b: Trial<P, G>) -> Trial<P, G> {
    if obj_or_min(&b.eval) > obj_or_min(&a.eval) {
        b
    } else {
        a
    }
}

/// Vertex of the parabola through three points, if it opens downwards.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<f64> {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let curv = (d2 - d1) / (x[2] - x[0]);
    if !(curv < 0.0) {
        return None;
    }
    let v = 0.5 * (x[0] + x[1]) - d1 / (2.0 * curv);
    v.is_finite().then_some(v)
}

fn line_search<A: Ascent>(
    a: &A,
    mode: LineSearch,
    t0: f64,
    pos: &A::Pos,
    at: &Eval<A::Grad>,
) -> Result<Option<Trial<A::Pos, A::Grad>>, EstError> {
    let f0 = at.obj;
    let slope = a.slope(at).max(0.0);
    let ok = |tr: &Trial<A::Pos, A::Grad>| {
        let gain = if mode == LineSearch::None { ARMIJO * tr.t * slope } else { 0.0 };
        obj_or_min(&tr.eval) >= f0 + gain - accept_tol(f0)
    };
    let mut t = t0;
    for _ in 0..MAX_SHRINK {
        let best = match mode {
            LineSearch::None => try_step(a, pos, at, t)?,
            LineSearch::Quadratic3 => {
                let one = try_step(a, pos, at, t)?;
                let two = try_step(a, pos, at, 2.0 * t)?;
                let vertex = parabola_vertex([0.0, t, 2.0 * t], [f0, one.eval.obj, two.eval.obj]);
                let mut best = better(one, two);
                if let Some(v) = vertex.filter(|v| *v > 0.0) {
                    best = better(best, try_step(a, pos, at, v.min(8.0 * t))?);
                }
                best
            }
            LineSearch::Quadratic10 => {
                let mut trials = Vec::with_capacity(10);
                for i in 0..10 {
                    trials.push(try_step(a, pos, at, t * 2f64.powi(i - 5))?);
                }
                let i = (0..10)
                    .max_by(|&x, &y| obj_or_min(&trials[x].eval).total_cmp(&obj_or_min(&trials[y].eval)))
                    .unwrap_or(0);
                let vertex = if i > 0 && i < 9 {
                    let xs = [trials[i - 1].t, trials[i].t, trials[i + 1].t];
                    let ys = [trials[i - 1].eval.obj, trials[i].eval.obj, trials[i + 1].eval.obj];
                    parabola_vertex(xs, ys).filter(|v| *v > xs[0] && *v < xs[2])
                } else {
                    None
                };
                let mut best = trials.swap_remove(i);
                if let Some(v) = vertex {
                    best = better(best, try_step(a, pos, at, v)?);
                }
                best
            }
        };
        if ok(&best) {
            return Ok(Some(best));
        }
        t *= match mode {
            LineSearch::Quadratic10 => 1.0 / 1024.0,
            LineSearch::Quadratic3 => 0.25,
            LineSearch::None => 0.5,
        };
    }
    Ok(None)
}

pub(crate) fn finish(
    rho: &CMat,
    iterations: usize,
    residual: f64,
    loglik_trace: Vec<f64>,
    warnings: usize,
    converged: bool,
) -> Result<EstimationResult, EstError> {
    let estimator = StateOp::normalized(rho)?;
    let entropy = von_neumann_entropy(&estimator);
    let result = EstimationResult { estimator, iterations, residual, loglik_trace, entropy, converged, warnings };
    if converged {
        Ok(result)
    } else {
        Err(EstError::MaxIterExceeded(Box::new(result)))
    }
}

/// Runs `a` from `pos` until the residual drops to `cfg.precision`.
///
/// With `LineSearch::None` the step starts at `t0` and is halved, for good,
/// whenever it fails a sufficient-increase test. The line searches carry
/// their accepted step over to the next iteration.
pub(crate) fn run<A: Ascent>(
    a: &mut A,
    mut pos: A::Pos,
    t0: f64,
    mode: LineSearch,
    cfg: &EstimationConfig,
    scale: f64,
) -> Result<EstimationResult, EstError> {
    let mut at = a.eval(&pos)?;
    let mut trace = vec![scale * at.obj];
    let mut warnings = 0;
    let mut t = t0;
    let mut iterations = 0;
    let mut converged = false;
    loop {
        if at.residual <= cfg.precision {
            converged = true;
            break;
        }
        if iterations >= cfg.max_iter {
            break;
        }
        a.prepare(&pos, &at);
        let Some(trial) = line_search(a, mode, t, &pos, &at)? else {
            break;
        };
        t = trial.t;
        if trial.eval.obj < at.obj {
            warnings += 1;
        }
        pos = trial.pos;
        at = trial.eval;
        if at.floored.is_some() {
            warnings += 1;
        }
        iterations += 1;
        trace.push(scale * at.obj);
    }
    if converged {
        if let Some(index) = at.floored {
            return Err(EstError::ZeroProbabilityWithCounts { index });
        }
    }
    finish(&at.rho, iterations, at.residual, trace, warnings, converged)
}

/// (1 + tX)ρ(1 + tX)/tr{…}.
pub(crate) fn sandwich(rho: &CMat, x: &CMat, t: f64) -> CMat {
    let n = rho.nrows();
    let b = CMat::identity(n, n) + x * c64(t, 0.0);
    let m = symmetrize(&(&b * rho * &b));
    let tr = trace(&m).re;
    m / c64(tr, 0.0)
}

pub(crate) fn first_floored(prob: &Problem, born: &Born) -> Option<usize> {
    prob.freqs.iter().zip(&born.p).position(|(f, p)| *f > 0.0 && *p <= PROB_FLOOR)
}

pub(crate) fn start_state(cfg: &EstimationConfig, dim: usize) -> Result<CMat, EstError> {
    match &cfg.start {
        Some(s) if s.dim() != dim => {
            Err(EstError::Op(operators::OpError::DimensionMismatch { expected: dim, found: s.dim() }))
        }
        Some(s) => Ok(s.matrix().clone()),
        None => Ok(StateOp::maximally_mixed(dim).matrix().clone()),
    }
}

/// Eigendecomposition of a state matrix.
pub(crate) fn eigh(rho: &CMat) -> Result<(Vec<f64>, CMat), EstError> {
    Ok(HermitianOp::from_symmetrized(rho).eigh()?)
}

pub(crate) fn residual_of(x: &CMat, rho: &CMat) -> f64 {
    trace_norm(&(x * rho))
}
