use sim::{run_batch, ExperimentSpec};

use crate::io::{emit, load_config, summary};
use crate::{CliError, Common};

/// Per-run CSV from the batch; exits 1 when any run failed.
pub(crate) fn run(common: &Common) -> Result<(), CliError> {
    let mut spec: ExperimentSpec = load_config(common.config.as_deref())?;
    if let Some(seed) = common.seed {
        spec.seed = seed;
    }
    let result = run_batch(&spec)?;
    let csv = result.to_csv_string()?;
    emit(common.out.as_deref(), csv.as_bytes())?;
    summary(&format!("runs={} failures={} mean_distance={}", result.records.len(), result.failures, result.mean_distance));
    if result.failures > 0 {
        return Err(CliError::Estimator(format!("{} of {} runs failed", result.failures, result.records.len())));
    }
    Ok(())
}
