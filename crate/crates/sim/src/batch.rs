//! Batches of independent simulated experiments.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use operators::{trace_class_distance, von_neumann_entropy, StateOp};
use pom::{build_standard, Pom, StandardPom};
use process_est::{
    channel_entropy, choi_from_kraus, cnot, cnot_imperfect, cnot_random, mlme_qpt, product_pool,
    sic_inputs, toffoli, Channel, ChoiOp, ProcError, QptConfig, QptData, QptResult,
};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use state_est::{hml, ml_cg, ml_dg, mlme_new, EstError, EstimationConfig, EstimationResult, Frequencies};

use crate::{random_state, sample_counts, RngStream, SimError};

/// Channels addressable by id: `cnot`, `cnot_imperfect(ε)`,
/// `cnot_random(ε,seed)` and `toffoli`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ChannelId {
    Cnot,
    CnotImperfect(f64),
    CnotRandom(f64, u64),
    Toffoli,
}

impl ChannelId {
    pub fn channel(&self) -> Result<Channel, SimError> {
        Ok(match *self {
            ChannelId::Cnot => cnot(),
            ChannelId::CnotImperfect(eps) => cnot_imperfect(eps)?,
            ChannelId::CnotRandom(eps, seed) => cnot_random(eps, seed)?,
            ChannelId::Toffoli => toffoli(),
        })
    }

    pub fn qubits(&self) -> usize {
        match self {
            ChannelId::Toffoli => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelId::Cnot => write!(f, "cnot"),
            ChannelId::CnotImperfect(e) => write!(f, "cnot_imperfect({e})"),
            ChannelId::CnotRandom(e, s) => write!(f, "cnot_random({e},{s})"),
            ChannelId::Toffoli => write!(f, "toffoli"),
        }
    }
}

impl FromStr for ChannelId {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self, SimError> {
        let unknown = || SimError::UnknownChannel(s.to_string());
        let t = s.trim();
        let (name, args) = match t.split_once('(') {
            Some((n, rest)) => (n.trim(), Some(rest.strip_suffix(')').ok_or_else(unknown)?)),
            None => (t, None),
        };
        let args: Vec<&str> = args.map(|a| a.split(',').map(str::trim).collect()).unwrap_or_default();
        let eps = |i: usize| -> Result<f64, SimError> { args.get(i).and_then(|a| a.parse().ok()).ok_or_else(unknown) };
        match (name, args.len()) {
            ("cnot", 0) => Ok(ChannelId::Cnot),
            ("toffoli", 0) => Ok(ChannelId::Toffoli),
            ("cnot_imperfect", 1) => Ok(ChannelId::CnotImperfect(eps(0)?)),
            ("cnot_random", 2) => Ok(ChannelId::CnotRandom(eps(0)?, args[1].parse().map_err(|_| unknown())?)),
            _ => Err(unknown()),
        }
    }
}

impl TryFrom<String> for ChannelId {
    type Error = SimError;
    fn try_from(s: String) -> Result<Self, SimError> {
        s.parse()
    }
}

impl From<ChannelId> for String {
    fn from(c: ChannelId) -> String {
        c.to_string()
    }
}

/// Input states for process estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputSet {
    /// Products of {|0⟩, |1⟩, |+⟩, |+i⟩}; two-qubit channels only.
    #[default]
    ProductPool,
    /// Normalized product-SIC projectors.
    Sic,
}

/// What the simulated data come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Truth {
    /// A fresh [`random_state`] with purity exponent ν for every run.
    RandomState { dim: usize, nu: u32 },
    /// A fresh Hilbert-Schmidt random state for every run.
    HsState { dim: usize },
    /// A fixed qubit state.
    Bloch { r: [f64; 3] },
    /// A fixed channel probed by the first `inputs` states of `input_set`
    /// (all of them when `inputs` is 0).
    Channel {
        channel: ChannelId,
        #[serde(default)]
        input_set: InputSet,
        #[serde(default)]
        inputs: usize,
    },
}

impl Truth {
    fn is_channel(&self) -> bool {
        matches!(self, Truth::Channel { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorId {
    MlDg,
    MlCg,
    MlmeNew,
    Hml,
    MlmeQpt,
}

impl EstimatorId {
    pub fn name(&self) -> &'static str {
        match self {
            EstimatorId::MlDg => "ml_dg",
            EstimatorId::MlCg => "ml_cg",
            EstimatorId::MlmeNew => "mlme_new",
            EstimatorId::Hml => "hml",
            EstimatorId::MlmeQpt => "mlme_qpt",
        }
    }
}

impl fmt::Display for EstimatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub truth: Truth,
    /// Standard POM id such as `tetrahedron` or `product_sic:2`.
    pub pom: String,
    /// Copies N per run (per input state for channels).
    pub copies: u64,
    pub runs: usize,
    pub seed: u64,
    pub estimator: EstimatorId,
    #[serde(default)]
    pub state_config: EstimationConfig,
    #[serde(default)]
    pub qpt_config: QptConfig,
    /// Write measured wall time; when false `wall_ms` is 0 so that equal
    /// specs give byte-identical CSV.
    #[serde(default = "yes")]
    pub record_wall_time: bool,
}

fn yes() -> bool {
    true
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidSpec(m));
        if self.copies == 0 {
            return bad("copies must be at least 1".into());
        }
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        if self.truth.is_channel() != (self.estimator == EstimatorId::MlmeQpt) {
            return bad(format!("estimator {} does not fit truth {:?}", self.estimator, self.truth));
        }
        match &self.truth {
            Truth::RandomState { dim, .. } | Truth::HsState { dim } if *dim == 0 => bad("dimension must be positive".into()),
            Truth::Channel { channel: ChannelId::Toffoli, input_set: InputSet::ProductPool, .. } => {
                bad("the product pool has two-qubit states only".into())
            }
            _ => Ok(()),
        }
    }
}

/// One experiment. Failed runs keep the best iterate where the estimator
/// supplies one, and NaN metrics otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: usize,
    pub estimator: String,
    pub copies: u64,
    pub iterations: usize,
    pub residual: f64,
    pub distance: f64,
    pub entropy: f64,
    pub wall_ms: u64,
    pub converged: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchResult {
    /// Mean trace-class distance over runs with a finite distance.
    pub mean_distance: f64,
    pub failures: usize,
    pub records: Vec<RunRecord>,
}

impl BatchResult {
    /// Summary of run records in any order; records are sorted by run id.
    pub fn aggregate(mut records: Vec<RunRecord>) -> Self {
        records.sort_by_key(|r| r.run_id);
        let finite: Vec<f64> = records.iter().map(|r| r.distance).filter(|d| d.is_finite()).collect();
        let mean_distance = if finite.is_empty() { f64::NAN } else { finite.iter().sum::<f64>() / finite.len() as f64 };
        let failures = records.iter().filter(|r| r.error.is_some()).count();
        Self { mean_distance, failures, records }
    }

    /// CSV with columns run_id, estimator, N, iterations, residual, distance,
    /// entropy, wall_ms.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), SimError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.records {
            w.write_record([
                r.run_id.to_string(),
                r.estimator.clone(),
                r.copies.to_string(),
                r.iterations.to_string(),
                r.residual.to_string(),
                r.distance.to_string(),
                r.entropy.to_string(),
                r.wall_ms.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String, SimError> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
    }
}

pub const CSV_HEADER: [&str; 8] = ["run_id", "estimator", "N", "iterations", "residual", "distance", "entropy", "wall_ms"];

struct Outcome {
    iterations: usize,
    residual: f64,
    distance: f64,
    entropy: f64,
    converged: bool,
    error: Option<String>,
}

impl Outcome {
    fn failed(e: impl ToString) -> Self {
        Self { iterations: 0, residual: f64::NAN, distance: f64::NAN, entropy: f64::NAN, converged: false, error: Some(e.to_string()) }
    }
}

/// Runs every experiment of `spec` in parallel, run `i` on [`RngStream`] (seed, i).
pub fn run_batch(spec: &ExperimentSpec) -> Result<BatchResult, SimError> {
    spec.validate()?;
    let pom: StandardPom = spec.pom.parse()?;
    let pom = build_standard(pom)?;
    let fixed = match &spec.truth {
        Truth::Channel { channel, input_set, inputs } => {
            let choi = choi_from_kraus(&channel.channel()?);
            if choi.dims().1 != pom.dim() {
                return Err(SimError::InvalidSpec(format!("POM dimension {} does not match channel output {}", pom.dim(), choi.dims().1)));
            }
            let mut states = match input_set {
                InputSet::ProductPool => product_pool(),
                InputSet::Sic => sic_inputs(channel.qubits())?,
            };
            if *inputs > 0 {
                if *inputs > states.len() {
                    return Err(SimError::InvalidSpec(format!("{inputs} inputs requested from a pool of {}", states.len())));
                }
                states.truncate(*inputs);
            }
            Some((choi, states))
        }
        Truth::RandomState { dim, .. } | Truth::HsState { dim } => check_state_dim(*dim, &pom)?,
        Truth::Bloch { .. } => check_state_dim(2, &pom)?,
    };
    let records = (0..spec.runs)
        .into_par_iter()
        .map(|run_id| {
            let mut rng = RngStream::new(spec.seed, run_id as u64).rng();
            let start = Instant::now();
            let outcome = match &fixed {
                Some((choi, inputs)) => run_channel(spec, choi, inputs, &pom, &mut rng),
                None => run_state(spec, &pom, &mut rng),
            }
            .unwrap_or_else(Outcome::failed);
            let wall_ms = if spec.record_wall_time { start.elapsed().as_millis() as u64 } else { 0 };
            RunRecord {
                run_id,
                estimator: spec.estimator.to_string(),
                copies: spec.copies,
                iterations: outcome.iterations,
                residual: outcome.residual,
                distance: outcome.distance,
                entropy: outcome.entropy,
                wall_ms,
                converged: outcome.converged,
                error: outcome.error,
            }
        })
        .collect();
    Ok(BatchResult::aggregate(records))
}

fn check_state_dim<T>(dim: usize, pom: &Pom) -> Result<Option<T>, SimError> {
    if dim != pom.dim() {
        return Err(SimError::InvalidSpec(format!("POM dimension {} does not match state dimension {dim}", pom.dim())));
    }
    Ok(None)
}

fn truth_state<R: Rng>(truth: &Truth, rng: &mut R) -> Result<StateOp, SimError> {
    match truth {
        Truth::RandomState { dim, nu } => random_state(*dim, *nu, rng),
        Truth::HsState { dim } => Ok(operators::random::hs_state(*dim, rng)),
        Truth::Bloch { r } => Ok(StateOp::from_bloch(*r)?),
        Truth::Channel { .. } => Err(SimError::InvalidSpec("channel truth in a state run".into())),
    }
}

fn run_state<R: Rng>(spec: &ExperimentSpec, pom: &Pom, rng: &mut R) -> Result<Outcome, SimError> {
    let truth = truth_state(&spec.truth, rng)?;
    let counts = sample_counts(&pom.probabilities(&truth), spec.copies, rng)?;
    let freqs = Frequencies::from_counts(&counts)?;
    let cfg = &spec.state_config;
    let result = match spec.estimator {
        EstimatorId::MlDg => ml_dg(&freqs, pom, cfg),
        EstimatorId::MlCg => ml_cg(&freqs, pom, cfg),
        EstimatorId::MlmeNew => mlme_new(&freqs, pom, cfg, !pom.is_complete()),
        EstimatorId::Hml => hml(&freqs, pom, cfg),
        EstimatorId::MlmeQpt => unreachable!("rejected by validate"),
    };
    let (result, error): (EstimationResult, _) = match result {
        Ok(r) => (r, None),
        Err(EstError::MaxIterExceeded(best)) => {
            let msg = format!("no convergence after {} iterations", best.iterations);
            (*best, Some(msg))
        }
        Err(e) => return Ok(Outcome::failed(e)),
    };
    Ok(Outcome {
        iterations: result.iterations,
        residual: result.residual,
        distance: trace_class_distance(result.estimator.op(), truth.op())?,
        entropy: von_neumann_entropy(&result.estimator),
        converged: result.converged,
        error,
    })
}

fn run_channel<R: Rng>(
    spec: &ExperimentSpec,
    truth: &ChoiOp,
    inputs: &[StateOp],
    pom: &Pom,
    rng: &mut R,
) -> Result<Outcome, SimError> {
    let data = QptData::simulate(truth, inputs.to_vec(), pom.clone(), spec.copies, rng.random())?;
    let cfg = &spec.qpt_config;
    let (result, error): (QptResult, _) = match mlme_qpt(&data, cfg) {
        Ok(r) => (r, None),
        Err(ProcError::MaxIterExceeded(best)) => {
            let msg = format!("no convergence after {} iterations", best.iterations);
            (*best, Some(msg))
        }
        Err(e) => return Ok(Outcome::failed(e)),
    };
    Ok(Outcome {
        iterations: result.iterations,
        residual: result.residual,
        distance: result.estimator.distance(truth)?,
        entropy: channel_entropy(&result.estimator),
        converged: result.converged,
        error,
    })
}
