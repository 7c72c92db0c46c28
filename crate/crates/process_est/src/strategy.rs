//! Input-state strategies for incomplete process tomography.
//!
//! Every strategy measures one input per round, re-estimates E by MLME on
//! all data so far, and picks the next input. E_prior only steers the
//! choice; it never enters an estimate.

use operators::{StateOp, CMat};
use pom::Pom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::choi::{choi_from_kraus, Channel, ChoiOp};
use crate::data::outcome_probabilities;
use crate::mlme::{best_effort, mlme_qpt, QptConfig};
use crate::mpl::{mpl_optimize, MplConfig, MplPair};
use crate::{ProcError, QptData, QptDataProvider};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Pool inputs in their listed order.
    None,
    /// Pool input whose projected estimator moves furthest.
    #[default]
    Adaptive,
    /// Maximum projected likelihood over all states.
    Mpl,
    /// MPL until its solutions repeat often enough, then `Adaptive`.
    Hybrid,
}

/// Figure of merit for choosing among candidate inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Largest 𝒟_tr between the candidate's estimator and the current one.
    #[default]
    FarthestFromEstimate,
    /// Smallest 𝒟_tr between the candidate's estimator and E_prior.
    ClosestToPrior,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrategyConfig {
    pub strategy: Strategy,
    pub selection: Selection,
    /// Pool index of the first input.
    pub first_input: usize,
    /// Stop once consecutive estimators are closer than this.
    pub stop_threshold: Option<f64>,
    /// Round limit; the pool size, or D_i² for MPL, when absent.
    pub max_rounds: Option<usize>,
    /// Hybrid switch: repeated fraction of MPL solutions at which the
    /// strategy falls back to the fixed pool.
    pub switch_threshold: f64,
    /// Plateau samples per round for Δ; 0 skips it.
    pub plateau_samples: usize,
    /// MLME on the measured data.
    pub mlme: QptConfig,
    /// MLME on projected candidate data, warm-started from the current
    /// estimator.
    pub projected: QptConfig,
    pub mpl: MplConfig,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::Adaptive,
            selection: Selection::FarthestFromEstimate,
            first_input: 0,
            stop_threshold: None,
            max_rounds: None,
            switch_threshold: 0.5,
            plateau_samples: 0,
            mlme: QptConfig::default(),
            projected: QptConfig { precision: 1e-5, max_iter: 500, ..QptConfig::default() },
            mpl: MplConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InputSource {
    Pool(usize),
    Mpl,
}

#[derive(Debug, Clone)]
pub struct RoundRecord {
    /// Number of inputs measured so far.
    pub round: usize,
    pub input: StateOp,
    pub source: InputSource,
    pub estimator: ChoiOp,
    /// 𝒟_tr to the previous round's estimator.
    pub step_distance: Option<f64>,
    /// Σ f_lm ln p̂_lm at the estimator.
    pub loglik_max: f64,
    pub delta: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct StrategyTrace {
    pub rounds: Vec<RoundRecord>,
    pub data: QptData,
    /// Round after which the hybrid strategy switched to the pool.
    pub switched_at: Option<usize>,
    pub warnings: Vec<String>,
}

impl StrategyTrace {
    /// 𝒟_tr of each round's estimator to `truth`.
    pub fn distances(&self, truth: &ChoiOp) -> Result<Vec<f64>, ProcError> {
        self.rounds.iter().map(|r| r.estimator.distance(truth)).collect()
    }
}

fn estimate(data: &QptData, cfg: &QptConfig, warm: Option<&ChoiOp>) -> Result<crate::QptResult, ProcError> {
    let cfg = QptConfig { start: warm.cloned(), ..cfg.clone() };
    best_effort(mlme_qpt(data, &cfg))
}

fn row_total(data: &QptData) -> f64 {
    data.total() / data.len() as f64
}

/// Projected MLME estimator after adding `candidate` with prior-predicted
/// counts.
fn projected_estimator(
    data: &QptData,
    candidate: &StateOp,
    prior: &ChoiOp,
    current: &ChoiOp,
    cfg: &QptConfig,
) -> Result<ChoiOp, ProcError> {
    let n = row_total(data);
    let counts = outcome_probabilities(prior, candidate, data.pom())?.into_iter().map(|p| n * p.max(0.0)).collect();
    let mut projected = data.clone();
    projected.push(candidate.clone(), counts)?;
    Ok(estimate(&projected, cfg, Some(current))?.estimator)
}

fn score(selection: Selection, candidate: &ChoiOp, current: &ChoiOp, prior: &ChoiOp) -> Result<f64, ProcError> {
    Ok(match selection {
        Selection::FarthestFromEstimate => candidate.distance(current)?,
        Selection::ClosestToPrior => -candidate.distance(prior)?,
    })
}

fn best_index(scores: &[f64]) -> usize {
    // First maximum, so ties resolve to the earlier pool entry.
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    best
}

fn pick_from_pool(
    data: &QptData,
    pool: &[StateOp],
    remaining: &[usize],
    prior: &ChoiOp,
    current: &ChoiOp,
    cfg: &StrategyConfig,
) -> Result<usize, ProcError> {
    let scores: Vec<f64> = remaining
        .par_iter()
        .map(|&k| {
            let e = projected_estimator(data, &pool[k], prior, current, &cfg.projected)?;
            score(cfg.selection, &e, current, prior)
        })
        .collect::<Result<_, _>>()?;
    Ok(remaining[best_index(&scores)])
}

fn pick_from_mpl(pairs: &[MplPair], current: &ChoiOp, prior: &ChoiOp, selection: Selection) -> Result<StateOp, ProcError> {
    let scores: Vec<f64> = pairs.iter().map(|p| score(selection, &p.choi, current, prior)).collect::<Result<_, _>>()?;
    Ok(pairs[best_index(&scores)].state.clone())
}

/// Runs `cfg.strategy` against `provider`.
pub fn run_strategy(
    provider: &mut dyn QptDataProvider,
    pool: &[StateOp],
    prior: &ChoiOp,
    cfg: &StrategyConfig,
) -> Result<StrategyTrace, ProcError> {
    cfg.mlme.validate()?;
    cfg.projected.validate()?;
    if pool.is_empty() {
        return Err(ProcError::InvalidConfig("empty input pool".into()));
    }
    if cfg.first_input >= pool.len() {
        return Err(ProcError::InvalidConfig(format!("first_input {} outside a pool of {}", cfg.first_input, pool.len())));
    }
    let pom: Pom = provider.pom().clone();
    let d_in = pool[0].dim();
    if prior.dims() != (d_in, pom.dim()) {
        return Err(ProcError::Dimension(format!("prior is {:?}, inputs and POM need ({d_in}, {})", prior.dims(), pom.dim())));
    }
    let max_rounds = cfg.max_rounds.unwrap_or(match cfg.strategy {
        Strategy::Mpl => d_in * d_in,
        _ => pool.len(),
    });

    let mut remaining: Vec<usize> = (0..pool.len()).filter(|&k| k != cfg.first_input).collect();
    let first = pool[cfg.first_input].clone();
    let counts = provider.measure(&first)?;
    let mut data = QptData::new(vec![first.clone()], pom, vec![counts])?;
    let mut next = (first, InputSource::Pool(cfg.first_input));
    let mut rounds: Vec<RoundRecord> = Vec::new();
    let mut warnings = Vec::new();
    let mut switched_at = None;
    let mut mpl_round = 0u64;

    loop {
        let previous = rounds.last().map(|r| r.estimator.clone());
        let fit = estimate(&data, &cfg.mlme, previous.as_ref())?;
        if !fit.converged {
            warnings.push(format!("MLME stopped at residual {:.2e} in round {}", fit.residual, data.len()));
        }
        let step_distance = previous.as_ref().map(|p| fit.estimator.distance(p)).transpose()?;
        let delta = if cfg.plateau_samples >= 2 {
            Some(plateau_spread(&data, cfg.plateau_samples, &cfg.mlme)?)
        } else {
            None
        };
        let current = fit.estimator.clone();
        rounds.push(RoundRecord {
            round: data.len(),
            input: next.0.clone(),
            source: next.1,
            estimator: fit.estimator,
            step_distance,
            loglik_max: fit.loglik,
            delta,
            iterations: fit.iterations,
            converged: fit.converged,
        });

        if step_distance.zip(cfg.stop_threshold).is_some_and(|(d, t)| d < t) || data.len() >= max_rounds {
            break;
        }

        let use_mpl = match cfg.strategy {
            Strategy::Mpl => true,
            Strategy::Hybrid => switched_at.is_none(),
            _ => false,
        };
        let mut chosen = None;
        if use_mpl && !(cfg.strategy == Strategy::Hybrid && cfg.switch_threshold <= 0.0) {
            let mpl_cfg = MplConfig {
                seed: cfg.mpl.seed.wrapping_add(1000 * mpl_round),
                start_choi: Some(current.clone()),
                ..cfg.mpl.clone()
            };
            mpl_round += 1;
            let out = mpl_optimize(&data, prior, &mpl_cfg)?;
            warnings.extend(out.warnings.iter().cloned());
            let switch = cfg.strategy == Strategy::Hybrid && out.repeated_fraction >= cfg.switch_threshold;
            if !switch {
                let pairs = if out.pairs.is_empty() {
                    warnings.push(format!("no converged MPL pair in round {}; using the best unconverged one", data.len()));
                    &out.unconverged
                } else {
                    &out.pairs
                };
                if pairs.is_empty() {
                    return Err(ProcError::InvalidData("MPL produced no candidate input".into()));
                }
                chosen = Some((pick_from_mpl(pairs, &current, prior, cfg.selection)?, InputSource::Mpl));
            }
        }
        if chosen.is_none() && cfg.strategy == Strategy::Hybrid && switched_at.is_none() {
            switched_at = Some(data.len());
        }
        let chosen = match chosen {
            Some(c) => c,
            None => {
                if remaining.is_empty() {
                    break;
                }
                let k = match cfg.strategy {
                    Strategy::None => remaining[0],
                    _ => pick_from_pool(&data, pool, &remaining, prior, &current, cfg)?,
                };
                remaining.retain(|&j| j != k);
                (pool[k].clone(), InputSource::Pool(k))
            }
        };
        let counts = provider.measure(&chosen.0)?;
        data.push(chosen.0.clone(), counts)?;
        next = chosen;
    }
    Ok(StrategyTrace { rounds, data, switched_at, warnings })
}

/// Adaptive MLME over a fixed pool of inputs.
pub fn adaptive_fixed(
    provider: &mut dyn QptDataProvider,
    pool: &[StateOp],
    prior: &ChoiOp,
    cfg: &StrategyConfig,
) -> Result<StrategyTrace, ProcError> {
    run_strategy(provider, pool, prior, &StrategyConfig { strategy: Strategy::Adaptive, ..cfg.clone() })
}

/// MPL-MLME until the repeated fraction of MPL solutions reaches
/// `switch_threshold`, then adaptive MLME on the rest of the pool.
pub fn hybrid_strategy(
    provider: &mut dyn QptDataProvider,
    pool: &[StateOp],
    prior: &ChoiOp,
    switch_threshold: f64,
    cfg: &StrategyConfig,
) -> Result<StrategyTrace, ProcError> {
    run_strategy(provider, pool, prior, &StrategyConfig { strategy: Strategy::Hybrid, switch_threshold, ..cfg.clone() })
}

/// Spread Δ = (1/D_i)√(Σ_j tr{(Ê_j − Ē)²}/(2N₀)) of λ = 0 ML estimators
/// started from `n_samples` random channels.
pub fn plateau_spread(data: &QptData, n_samples: usize, cfg: &QptConfig) -> Result<f64, ProcError> {
    if n_samples < 2 {
        return Err(ProcError::InvalidConfig("plateau_spread needs at least two samples".into()));
    }
    let (d_in, d_out) = data.dims();
    let estimates: Vec<CMat> = (0..n_samples)
        .into_par_iter()
        .map(|j| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(j as u64));
            let start = choi_from_kraus(&Channel::random(d_in, d_out, d_in * d_out, &mut rng));
            let run_cfg = QptConfig { lambda: 0.0, start: Some(start), ..cfg.clone() };
            Ok(best_effort(mlme_qpt(data, &run_cfg))?.estimator.matrix().clone())
        })
        .collect::<Result<_, ProcError>>()?;
    let n = estimates.len() as f64;
    let centroid = estimates.iter().fold(CMat::zeros(d_in * d_out, d_in * d_out), |acc, e| acc + e) / operators::c64(n, 0.0);
    let spread: f64 = estimates.iter().map(|e| (e - &centroid).norm_squared()).sum();
    Ok((spread / (2.0 * n)).sqrt() / d_in as f64)
}

/// 𝒟_tr of the MLME estimator for each L in `ls`, with the copy budget
/// `budget` split evenly over the first L pool inputs. One row per trial.
pub fn fixed_budget_distances(
    channel: &ChoiOp,
    pool: &[StateOp],
    pom: &Pom,
    budget: u64,
    ls: &[usize],
    trials: usize,
    cfg: &QptConfig,
    seed: u64,
) -> Result<Vec<Vec<f64>>, ProcError> {
    if ls.iter().any(|&l| l == 0 || l > pool.len()) {
        return Err(ProcError::InvalidConfig("every L must lie in 1..=pool size".into()));
    }
    (0..trials)
        .into_par_iter()
        .map(|t| {
            ls.iter()
                .map(|&l| {
                    let data = QptData::simulate(
                        channel,
                        pool[..l].to_vec(),
                        pom.clone(),
                        budget / l as u64,
                        seed.wrapping_add((t * 1000 + l) as u64),
                    )?;
                    best_effort(mlme_qpt(&data, cfg))?.estimator.distance(channel)
                })
                .collect()
        })
        .collect()
}
