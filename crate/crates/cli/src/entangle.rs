use entanglement::{
    adaptive_witness_measure, AdaptiveConfig, ExactProvider, ReplayProvider, Round, SimulatedProvider,
    WitnessDataProvider,
};
use operators::{c64, CMat, MatrixRepr, StateOp};
use serde::{Deserialize, Serialize};

use crate::io::{emit_json, load_config, summary};
use crate::{CliError, Common};

fn default_copies() -> u64 {
    10_000
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum TwoQubitState {
    /// p|Ψ⁻⟩⟨Ψ⁻| + (1 − p)/4.
    Werner { p: f64 },
    Matrix { rho: MatrixRepr },
}

impl TwoQubitState {
    fn build(&self) -> Result<StateOp, CliError> {
        let m = match self {
            TwoQubitState::Werner { p } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(CliError::Config(format!("Werner weight {p} outside [0, 1]")));
                }
                let mut m = CMat::identity(4, 4) * c64((1.0 - p) / 4.0, 0.0);
                for (r, c, v) in [(1, 1, 0.5), (2, 2, 0.5), (1, 2, -0.5), (2, 1, -0.5)] {
                    m[(r, c)] += c64(p * v, 0.0);
                }
                m
            }
            TwoQubitState::Matrix { rho } => rho.to_matrix().map_err(|e| CliError::Config(e.to_string()))?,
        };
        if m.nrows() != 4 {
            return Err(CliError::Config("the witness bases need a two-qubit state".into()));
        }
        StateOp::from_matrix(&m).map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntanglementRun {
    /// Simulated source; exclusive with `counts`.
    state: Option<TwoQubitState>,
    /// Recorded counts, one row of four per basis index.
    counts: Option<Vec<[f64; 4]>>,
    #[serde(default = "default_copies")]
    copies: u64,
    /// Expected counts instead of multinomial samples.
    #[serde(default)]
    exact: bool,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    adaptive: AdaptiveConfig,
}

#[derive(Serialize)]
struct EntanglementArtifact {
    detected: bool,
    bases_used: usize,
    separable_certificate: Option<bool>,
    rounds: Vec<Round>,
    final_estimator: Option<MatrixRepr>,
    warnings: Vec<String>,
}

pub(crate) fn run(common: &Common) -> Result<(), CliError> {
    let cfg: EntanglementRun = load_config(common.config.as_deref())?;
    let seed = common.seed.unwrap_or(cfg.seed);
    let mut provider: Box<dyn WitnessDataProvider> = match (&cfg.state, &cfg.counts) {
        (Some(s), None) if cfg.exact => Box::new(ExactProvider { state: s.build()?, copies: cfg.copies as f64 }),
        (Some(s), None) => Box::new(SimulatedProvider::new(s.build()?, cfg.copies, seed)),
        (None, Some(c)) => Box::new(ReplayProvider { counts: c.clone() }),
        _ => return Err(CliError::Config("set exactly one of state and counts".into())),
    };
    let out = adaptive_witness_measure(provider.as_mut(), &cfg.adaptive)?;
    let artifact = EntanglementArtifact {
        detected: out.detected,
        bases_used: out.bases_used,
        separable_certificate: out.separable_certificate,
        final_estimator: out.final_estimator.as_ref().map(|r| MatrixRepr::from_matrix(r.matrix())),
        rounds: out.rounds,
        warnings: out.warnings,
    };
    emit_json(common.out.as_deref(), &artifact)?;
    summary(&format!(
        "detected={} bases_used={}{}",
        artifact.detected,
        artifact.bases_used,
        artifact.separable_certificate.map_or(String::new(), |c| format!(" separable_certificate={c}"))
    ));
    Ok(())
}
