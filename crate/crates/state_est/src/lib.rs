//! State estimators: linear inversion, maximum likelihood by steepest ascent
//! and conjugate gradients, maximum-likelihood maximum-entropy (MLME) in its
//! Lagrange-parameter and direct forms, and hedged maximum likelihood.
//!
//! Every iterative estimator returns an [`EstimationResult`]. Runs that hit
//! `max_iter` fail with [`EstError::MaxIterExceeded`], which carries the last
//! iterate.

mod ascent;
mod config;
mod data;
mod error;
mod likelihood;
mod ml;
mod mlme;
mod quadrature;

pub use config::{EstimationConfig, EstimationResult, LineSearch};
pub use data::Frequencies;
pub use error::EstError;
pub use likelihood::{log_likelihood, r_operator};
pub use ml::{hml, linear_inversion, ml_cg, ml_dg};
pub use mlme::{lambda_sweep, max_entropy_exact, mlme_naive, mlme_new, mlme_scheme_a, mlme_scheme_b, SweepPoint};
pub use quadrature::{exp_average, gauss_legendre};
