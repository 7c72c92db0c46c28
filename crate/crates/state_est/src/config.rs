use operators::StateOp;
use serde::{Deserialize, Serialize};

use crate::EstError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineSearch {
    /// Fixed step ε, halved only when a step would lower the objective.
    #[default]
    None,
    /// Parabola through the objective at {0, ε, 2ε}.
    Quadratic3,
    /// Ten log-spaced trial steps, refined by a parabola around the best one.
    Quadratic10,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimationConfig {
    /// Step size. `None` picks the estimator default: 0.1, or 1/N for HML.
    pub epsilon: Option<f64>,
    /// Entropy weight λ for the new MLME iterations.
    pub lambda: f64,
    /// Residual target.
    pub precision: f64,
    pub max_iter: usize,
    pub line_search: LineSearch,
    /// Polak-Ribière damping ξ.
    pub xi: f64,
    /// Hedging exponent β.
    pub beta: f64,
    pub seed: u64,
    /// Use the exact integral gradient in Schemes A and B.
    pub integral_gradient: bool,
    /// Starting state; 1/D when absent.
    #[serde(skip)]
    pub start: Option<StateOp>,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        Self {
            epsilon: None,
            lambda: 1e-3,
            precision: 1e-7,
            max_iter: 100_000,
            line_search: LineSearch::None,
            xi: 0.5,
            beta: 0.5,
            seed: 0,
            integral_gradient: false,
            start: None,
        }
    }
}

impl EstimationConfig {
    pub fn validate(&self) -> Result<(), EstError> {
        let bad = |m: &str| Err(EstError::InvalidConfig(m.into()));
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e.is_finite()) {
                return bad("epsilon must be positive");
            }
        }
        if !(self.precision > 0.0) {
            return bad("precision must be positive");
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be nonnegative");
        }
        if !(0.0..=1.0).contains(&self.xi) {
            return bad("xi must lie in [0, 1]");
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return bad("beta must lie in (0, 1]");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be positive");
        }
        Ok(())
    }

    pub(crate) fn step(&self, default: f64) -> f64 {
        self.epsilon.unwrap_or(default)
    }
}

/// Output of every iterative estimator.
#[derive(Clone, Serialize, Deserialize)]
pub struct EstimationResult {
    pub estimator: StateOp,
    pub iterations: usize,
    /// Final value of the estimator's extremal residual.
    pub residual: f64,
    /// Objective after each iteration, scaled to the full data set: log ℒ for
    /// ML and the MLME schemes, log ℒ_H for HML, and N times the information
    /// functional for the new MLME iterations. Entry 0 is the start.
    pub loglik_trace: Vec<f64>,
    pub entropy: f64,
    pub converged: bool,
    /// Steps that lowered the objective, plus iterations that needed a
    /// probability floor.
    pub warnings: usize,
}

impl std::fmt::Debug for EstimationResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EstimationResult")
            .field("estimator", self.estimator.matrix())
            .field("iterations", &self.iterations)
            .field("residual", &self.residual)
            .field("final_objective", &self.loglik_trace.last())
            .field("entropy", &self.entropy)
            .field("converged", &self.converged)
            .field("warnings", &self.warnings)
            .finish()
    }
}
