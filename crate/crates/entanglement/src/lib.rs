//! Two-qubit witness bases.
//!
//! A witness basis is the common eigenbasis of a one-parameter family of
//! optimal decomposable witnesses: two product kets and two maximally
//! entangled kets. Measuring it tests the whole family at once through the
//! criterion 4f₁f₂ ≥ (f₃−f₄)². This crate builds the bases from Weyl-operator
//! settings (u₁,u₂,a), enumerates which sets of six are informationally
//! complete, orders bases adaptively from MLME estimates, and maximizes the
//! likelihood over separable states to certify entanglement that no single
//! basis detects.

mod adaptive;
mod basis;
mod census;
mod error;
mod separable;
mod weyl;

pub use adaptive::{
    adaptive_witness_measure, AdaptiveConfig, AdaptiveOutcome, ExactProvider, Ordering, ReplayProvider, Round,
    SimulatedProvider, WitnessDataProvider,
};
pub use basis::{
    build_six_bases, clifford_c, minimal_witness_value, witness_criterion, SixBasisEntry, WitnessBasis,
    WitnessVerdict, SIX_SETTINGS,
};
pub use census::{
    census_with_ranks, enumerate_ic_sets, enumerate_ic_sets_with, CandidateRank, IcCensus, IcClass, IcSet, CLASS_RESOLUTION,
};
pub use error::EntError;
pub use separable::{ml_separable, SeparableConfig, SeparableResult};
pub use weyl::{observables_for_setting, weyl_coefficients, ComplementList, ObservableMatrix, Weyl, WitnessSetting, RANK_TOL};
