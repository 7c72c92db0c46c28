//! Monte Carlo harness for the estimators.
//!
//! Every run draws from its own [`RngStream`] (batch seed, run id), so a
//! batch is a pure function of its [`ExperimentSpec`] whatever order the
//! runs execute in.

mod batch;
mod error;
mod sampling;

pub use batch::{
    run_batch, BatchResult, ChannelId, EstimatorId, ExperimentSpec, InputSet, RunRecord, Truth, CSV_HEADER,
};
pub use error::SimError;
pub use sampling::{random_state, sample_counts, RngStream, MASS_TOL};
