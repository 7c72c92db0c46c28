//! Continuous-variable tooling on a truncated Fock space.
//!
//! Quadrature, time-multiplexed and Shack-Hartmann POMs for MLME
//! reconstruction, the Wigner function, the ℛ(τ) quasi-distributions with
//! the nonclassicality depth, and the laser, cat, Fock and coherent
//! reference states.

mod detectors;
mod error;
mod fock;
mod phase;
mod sh;
pub mod special;

pub use detectors::{
    click_probability, homodyne_pom, pattern_label, port_efficiencies, tmd_pom, QuadratureSetting, MAX_PORTS,
};
pub use error::CvError;
pub use fock::{displacement, reference_state, Displacement, FockSpace, ReferenceState, DISPLACEMENT_TOL};
pub use phase::{
    laser_r, min_r, nonclassicality_depth, nonclassicality_r, square_grid, wigner_fock, wigner_origin_by_parity,
    wigner_points, DepthConfig, DepthResult, PhasePoint,
};
pub use sh::{fresnel_propagator, gaussian_modes, sh_pom, Fresnel, ShGeometry, ORTHONORMALITY_TOL};
pub use special::{fock_wavefunctions, hermite, laguerre, quadrature_wavefunction};
