//! Adaptive ordering of the six witness bases.
//!
//! After each undetected round the accumulated data are estimated by MLME,
//! and the next basis is the one whose predicted margin 4p₁p₂ − (p₃−p₄)² is
//! smallest under that estimator.

use operators::random::multinomial;
use operators::{HermitianOp, StateOp};
use pom::Pom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use state_est::{mlme_new, EstError, EstimationConfig, Frequencies, LineSearch};

use crate::basis::{build_six_bases, witness_criterion, WitnessBasis};
use crate::separable::{ml_separable, SeparableConfig};
use crate::EntError;

/// Supplies four detection counts for a requested witness basis.
pub trait WitnessDataProvider {
    fn measure(&mut self, index: usize, basis: &WitnessBasis) -> Result<[f64; 4], EntError>;
}

/// Multinomial samples of `copies` per basis from a known state.
pub struct SimulatedProvider {
    pub state: StateOp,
    pub copies: u64,
    rng: ChaCha8Rng,
}

impl SimulatedProvider {
    pub fn new(state: StateOp, copies: u64, seed: u64) -> Self {
        Self { state, copies, rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl WitnessDataProvider for SimulatedProvider {
    fn measure(&mut self, _index: usize, basis: &WitnessBasis) -> Result<[f64; 4], EntError> {
        let p = basis.probabilities(self.state.matrix());
        let n = multinomial(&p, self.copies, &mut self.rng);
        Ok(std::array::from_fn(|j| n[j] as f64))
    }
}

/// Expected counts N·p_j from a known state: the noiseless limit.
pub struct ExactProvider {
    pub state: StateOp,
    pub copies: f64,
}

impl WitnessDataProvider for ExactProvider {
    fn measure(&mut self, _index: usize, basis: &WitnessBasis) -> Result<[f64; 4], EntError> {
        Ok(basis.probabilities(self.state.matrix()).map(|p| self.copies * p.max(0.0)))
    }
}

/// Replays recorded counts, one row per basis index.
pub struct ReplayProvider {
    pub counts: Vec<[f64; 4]>,
}

impl WitnessDataProvider for ReplayProvider {
    fn measure(&mut self, index: usize, _basis: &WitnessBasis) -> Result<[f64; 4], EntError> {
        self.counts.get(index).copied().ok_or_else(|| EntError::Provider(format!("no counts recorded for basis {index}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    #[default]
    Adaptive,
    /// Bases in their listed order.
    Fixed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaptiveConfig {
    pub first_basis: usize,
    pub ordering: Ordering,
    /// Run the separable-ML check once all six bases leave the criterion intact.
    pub separable_check: bool,
    pub estimator: EstimationConfig,
    pub separable: SeparableConfig,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        Self {
            first_basis: 0,
            ordering: Ordering::Adaptive,
            separable_check: false,
            estimator: EstimationConfig { line_search: LineSearch::Quadratic3, ..Default::default() },
            separable: SeparableConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Round {
    pub basis: usize,
    pub counts: [f64; 4],
    pub margin: f64,
    /// Predicted margins of the remaining bases under the MLME estimator,
    /// as (basis, margin) pairs. Empty for the last round or when detected.
    pub predictions: Vec<(usize, f64)>,
}

#[derive(Debug, Clone)]
pub struct AdaptiveOutcome {
    pub detected: bool,
    pub bases_used: usize,
    pub final_estimator: Option<StateOp>,
    pub rounds: Vec<Round>,
    /// Set when the separable check ran: true if it certified entanglement.
    pub separable_certificate: Option<bool>,
    pub warnings: Vec<String>,
}

fn combined(bases: &[WitnessBasis], order: &[usize], counts: &[[f64; 4]]) -> Result<(Frequencies, Pom), EntError> {
    let k = order.len() as f64;
    let outcomes: Vec<HermitianOp> =
        order.iter().flat_map(|&b| bases[b].projectors()).map(|p| p.scale(1.0 / k)).collect();
    let pom = Pom::new(outcomes)?;
    let freqs = Frequencies::from_real_counts(counts.iter().flatten().copied().collect())?;
    Ok((freqs, pom))
}

fn normalized(c: [f64; 4]) -> [f64; 4] {
    let total: f64 = c.iter().sum();
    if total > 0.0 {
        c.map(|x| x / total)
    } else {
        c
    }
}

/// Measures witness bases until the criterion is violated or all six are used.
pub fn adaptive_witness_measure(
    provider: &mut dyn WitnessDataProvider,
    cfg: &AdaptiveConfig,
) -> Result<AdaptiveOutcome, EntError> {
    let bases: Vec<WitnessBasis> = build_six_bases().into_iter().map(|e| e.basis).collect();
    if cfg.first_basis >= bases.len() {
        return Err(EntError::InvalidConfig(format!("first_basis {} out of range", cfg.first_basis)));
    }
    let mut remaining: Vec<usize> = (0..bases.len()).collect();
    let mut next = cfg.first_basis;
    let mut order = Vec::new();
    let mut counts = Vec::new();
    let mut rounds = Vec::new();
    let mut estimator = None;
    let mut warnings = Vec::new();

    loop {
        remaining.retain(|&b| b != next);
        let c = provider.measure(next, &bases[next])?;
        let verdict = witness_criterion(normalized(c));
        order.push(next);
        counts.push(c);
        rounds.push(Round { basis: next, counts: c, margin: verdict.margin, predictions: Vec::new() });
        if verdict.violated {
            return Ok(AdaptiveOutcome {
                detected: true,
                bases_used: order.len(),
                final_estimator: estimator,
                rounds,
                separable_certificate: None,
                warnings,
            });
        }

        let (freqs, pom) = combined(&bases, &order, &counts)?;
        let rho = match mlme_new(&freqs, &pom, &cfg.estimator, false) {
            Ok(r) => r.estimator,
            Err(EstError::MaxIterExceeded(best)) => {
                warnings.push(format!("MLME hit max_iter after {} bases", order.len()));
                best.estimator
            }
            Err(e) => return Err(e.into()),
        };
        if remaining.is_empty() {
            estimator = Some(rho);
            break;
        }
        let mut predictions: Vec<(usize, f64)> = remaining
            .iter()
            .map(|&b| (b, witness_criterion(bases[b].probabilities(rho.matrix())).margin))
            .collect();
        next = match cfg.ordering {
            Ordering::Fixed => remaining[0],
            Ordering::Adaptive => {
                predictions.iter().min_by(|x, y| x.1.total_cmp(&y.1)).map(|&(b, _)| b).expect("nonempty")
            }
        };
        predictions.sort_by_key(|&(b, _)| b);
        rounds.last_mut().expect("pushed").predictions = predictions;
        estimator = Some(rho);
    }

    let mut separable_certificate = None;
    if cfg.separable_check {
        let (freqs, pom) = combined(&bases, &order, &counts)?;
        match ml_separable(&freqs, &pom, &cfg.separable) {
            Ok(r) => separable_certificate = Some(r.certificate),
            Err(EntError::MaxIterExceeded(r)) => {
                // An unconverged separable search can only understate the
                // separable maximum, so it never certifies.
                warnings.push(format!("separable search stopped at residual {:.3e}", r.residual));
                separable_certificate = Some(false);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(AdaptiveOutcome {
        detected: separable_certificate == Some(true),
        bases_used: order.len(),
        final_estimator: estimator,
        rounds,
        separable_certificate,
        warnings,
    })
}
