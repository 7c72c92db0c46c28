//! Quantum process estimation on Choi operators.
//!
//! A channel M from H to K is represented by E = Σ_jk |j⟩⟨k| ⊗ M(|j⟩⟨k|),
//! positive with tr_K{E} = 1_H. Input state ρ_l measured with outcome Π_m
//! occurs with probability p_lm = tr{E(ρ_lᵀ⊗Π_m)}/L. The MLME iteration
//! keeps trace preservation exact at every step; the adaptive strategies pick
//! the next input state from a fixed pool or from the whole state space,
//! guided by a prior guess E_prior that never enters the estimate itself.

mod channels;
mod choi;
mod data;
mod error;
mod mlme;
mod mpl;
mod strategy;

pub use channels::{cnot, cnot_imperfect, cnot_random, cnot_unitary, product_pool, sic_inputs, toffoli, toffoli_unitary};
pub use choi::{apply_channel, channel_entropy, choi_from_kraus, Channel, ChoiOp, KRAUS_TOL, POSITIVITY_TOL, TP_TOL};
pub use data::{outcome_probabilities, ExactQpt, QptData, QptDataProvider, SimulatedQpt};
pub use error::ProcError;
pub use mlme::{best_effort, mlme_qpt, mlme_qpt_imperfect, outputs, QptConfig, QptResult};
pub use mpl::{mpl_optimize, projected_log_likelihood, MplConfig, MplOutcome, MplPair};
pub use strategy::{
    adaptive_fixed, fixed_budget_distances, hybrid_strategy, plateau_spread, run_strategy, InputSource, RoundRecord,
    Selection, Strategy, StrategyConfig, StrategyTrace,
};
