use process_est::{
    choi_from_kraus, product_pool, run_strategy, sic_inputs, ChoiOp, ExactQpt, QptDataProvider, SimulatedQpt,
    StrategyConfig,
};
use serde::Deserialize;
use sim::{ChannelId, InputSet};

use crate::io::{csv_bytes, emit, header, load_config, resolve_pom, summary};
use crate::{CliError, Common};

fn default_copies() -> u64 {
    10_000
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProcessRun {
    channel: ChannelId,
    /// Output POM id; the product SIC on the channel's qubits when absent.
    pom: Option<String>,
    #[serde(default = "default_copies")]
    copies: u64,
    #[serde(default)]
    inputs: InputSet,
    /// Expected counts N·p instead of multinomial samples.
    #[serde(default)]
    noiseless: bool,
    #[serde(default)]
    seed: u64,
    /// Channel guess used only to rank inputs: `maximally_mixed` or a channel
    /// id. Defaults to the ideal gate (`cnot` for the CNOT family).
    prior: Option<String>,
    #[serde(default)]
    run: StrategyConfig,
}

fn prior_choi(cfg: &ProcessRun, d_in: usize, d_out: usize) -> Result<ChoiOp, CliError> {
    let id = match cfg.prior.as_deref() {
        Some("maximally_mixed") => return Ok(ChoiOp::maximally_mixed(d_in, d_out)),
        Some(text) => text.parse::<ChannelId>().map_err(|e| CliError::Config(format!("prior: {e}")))?,
        None => match cfg.channel {
            ChannelId::Toffoli => ChannelId::Toffoli,
            _ => ChannelId::Cnot,
        },
    };
    if id.qubits() != cfg.channel.qubits() {
        return Err(CliError::Config(format!("prior {id} acts on a different number of qubits")));
    }
    Ok(choi_from_kraus(&id.channel()?))
}

/// Per-round CSV: round, L, distance, delta, loglik_max. One input is
/// measured per round, so L equals the round number; delta is empty unless
/// `run.plateau_samples` is set.
pub(crate) fn run(common: &Common) -> Result<(), CliError> {
    let cfg: ProcessRun = load_config(common.config.as_deref())?;
    let qubits = cfg.channel.qubits();
    let pom_id = cfg.pom.clone().unwrap_or_else(|| format!("product_sic:{qubits}"));
    let (pom, _) = resolve_pom(Some(&pom_id), None)?;
    let truth = choi_from_kraus(&cfg.channel.channel()?);
    let pool = match cfg.inputs {
        InputSet::ProductPool if qubits != 2 => {
            return Err(CliError::Config("the product pool has two-qubit states only".into()))
        }
        InputSet::ProductPool => product_pool(),
        InputSet::Sic => sic_inputs(qubits)?,
    };
    if cfg.copies == 0 {
        return Err(CliError::Config("copies must be positive".into()));
    }
    let seed = common.seed.unwrap_or(cfg.seed);
    let (d_in, d_out) = truth.dims();
    let prior = prior_choi(&cfg, d_in, d_out)?;
    let mut provider: Box<dyn QptDataProvider> = if cfg.noiseless {
        Box::new(ExactQpt { channel: truth.clone(), pom, copies: cfg.copies as f64 })
    } else {
        Box::new(SimulatedQpt::new(truth.clone(), pom, cfg.copies, seed))
    };
    let trace = run_strategy(provider.as_mut(), &pool, &prior, &cfg.run)?;
    let distances = trace.distances(&truth)?;

    let rows = trace.rounds.iter().zip(&distances).enumerate().map(|(i, (r, d))| {
        vec![
            (i + 1).to_string(),
            r.round.to_string(),
            d.to_string(),
            r.delta.map_or(String::new(), |v| v.to_string()),
            r.loglik_max.to_string(),
        ]
    });
    emit(common.out.as_deref(), &csv_bytes(&header(&["round", "L", "distance", "delta", "loglik_max"]), rows)?)?;
    for w in &trace.warnings {
        summary(&format!("warning: {w}"));
    }
    summary(&format!(
        "channel={} rounds={} final_distance={}{}",
        cfg.channel,
        trace.rounds.len(),
        distances.last().copied().unwrap_or(f64::NAN),
        trace.switched_at.map_or(String::new(), |r| format!(" switched_at={r}"))
    ));
    Ok(())
}
