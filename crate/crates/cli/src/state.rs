use std::path::PathBuf;

use operators::MatrixRepr;
use serde::{Deserialize, Serialize};
use state_est::{
    hml, max_entropy_exact, ml_cg, ml_dg, mlme_new, EstError, EstimationConfig, EstimationResult, Frequencies,
};

use crate::io::{csv_bytes, emit, emit_json, header, load_config, resolve_pom, summary};
use crate::{CliError, Common};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum StateEstimator {
    MlDg,
    MlCg,
    Hml,
    #[default]
    MlmeNew,
    /// MLME with the gradient for outcomes that do not sum to the identity.
    MlmeImperfect,
    MaxEntropy,
}

impl StateEstimator {
    fn name(self) -> &'static str {
        match self {
            StateEstimator::MlDg => "ml_dg",
            StateEstimator::MlCg => "ml_cg",
            StateEstimator::Hml => "hml",
            StateEstimator::MlmeNew => "mlme_new",
            StateEstimator::MlmeImperfect => "mlme_imperfect",
            StateEstimator::MaxEntropy => "max_entropy",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateRun {
    pom: Option<String>,
    pom_file: Option<PathBuf>,
    #[serde(default)]
    estimator: StateEstimator,
    /// One count per outcome; fractional counts are accepted.
    counts: Vec<f64>,
    /// Per-iteration CSV of the objective.
    trace: Option<PathBuf>,
    #[serde(default)]
    settings: EstimationConfig,
}

#[derive(Serialize)]
struct StateArtifact<'a> {
    estimator: StateEstimator,
    pom: String,
    dim: usize,
    converged: bool,
    iterations: usize,
    residual: f64,
    entropy: f64,
    warnings: usize,
    bloch: Option<[f64; 3]>,
    rho: MatrixRepr,
    loglik_trace: &'a [f64],
}

pub(crate) fn run(common: &Common) -> Result<(), CliError> {
    let cfg: StateRun = load_config(common.config.as_deref())?;
    let (pom, label) = resolve_pom(cfg.pom.as_deref(), cfg.pom_file.as_deref())?;
    if cfg.counts.len() != pom.len() {
        return Err(CliError::Config(format!("{} counts for a POM with {} outcomes", cfg.counts.len(), pom.len())));
    }
    let freqs = Frequencies::from_real_counts(cfg.counts.clone())?;
    let mut settings = cfg.settings.clone();
    if let Some(seed) = common.seed {
        settings.seed = seed;
    }
    settings.validate()?;

    let outcome = match cfg.estimator {
        StateEstimator::MlDg => ml_dg(&freqs, &pom, &settings),
        StateEstimator::MlCg => ml_cg(&freqs, &pom, &settings),
        StateEstimator::Hml => hml(&freqs, &pom, &settings),
        StateEstimator::MlmeNew => mlme_new(&freqs, &pom, &settings, false),
        StateEstimator::MlmeImperfect => mlme_new(&freqs, &pom, &settings, true),
        StateEstimator::MaxEntropy => max_entropy_exact(&freqs, &pom, &settings),
    };
    // A run that hits max_iter still reports its best iterate before failing.
    let (result, failure): (EstimationResult, Option<EstError>) = match outcome {
        Ok(r) => (r, None),
        Err(e) => match e.best_iterate() {
            Some(r) => (r.clone(), Some(e)),
            None => return Err(e.into()),
        },
    };

    let rho = &result.estimator;
    let artifact = StateArtifact {
        estimator: cfg.estimator,
        pom: label,
        dim: rho.dim(),
        converged: result.converged,
        iterations: result.iterations,
        residual: result.residual,
        entropy: result.entropy,
        warnings: result.warnings,
        bloch: (rho.dim() == 2).then(|| rho.bloch().map(|v| v + 0.0)),
        rho: MatrixRepr::from_matrix(rho.matrix()),
        loglik_trace: &result.loglik_trace,
    };
    emit_json(common.out.as_deref(), &artifact)?;
    if let Some(path) = &cfg.trace {
        let rows = result.loglik_trace.iter().enumerate().map(|(i, v)| vec![i.to_string(), v.to_string()]);
        emit(Some(path), &csv_bytes(&header(&["iteration", "objective"]), rows)?)?;
    }
    summary(&format!(
        "estimator={} iterations={} residual={:e} converged={}",
        cfg.estimator.name(),
        result.iterations, result.residual, result.converged
    ));
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}
