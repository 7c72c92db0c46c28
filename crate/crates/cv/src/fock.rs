//! Truncated Fock space, reference states and the displacement operator.

use operators::{c64, CMat, Complex64, HermitianOp, Ket, StateOp};
use serde::{Deserialize, Serialize};

use crate::special::ln_factorials;
use crate::CvError;

/// Norm defect above which [`Displacement::truncation_warning`] fires.
pub const DISPLACEMENT_TOL: f64 = 1e-6;

/// Span of |0⟩, …, |D_sub − 1⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockSpace {
    dim: usize,
}

impl FockSpace {
    pub fn new(dim: usize) -> Result<Self, CvError> {
        if dim < 2 {
            return Err(CvError::InvalidParameter(format!("Fock truncation {dim} is below 2")));
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Annihilation operator A with A|n⟩ = √n|n−1⟩.
    pub fn annihilation(&self) -> CMat {
        CMat::from_fn(self.dim, self.dim, |r, c| if c == r + 1 { c64((c as f64).sqrt(), 0.0) } else { c64(0.0, 0.0) })
    }

    /// Parity operator diag((−1)ⁿ).
    pub fn parity(&self) -> HermitianOp {
        HermitianOp::from_diagonal(&(0..self.dim).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect::<Vec<_>>())
    }

    /// Fock amplitudes e^{−|α|²/2}αⁿ/√n! of the coherent state, not renormalized.
    pub fn coherent_amplitudes(&self, alpha: Complex64) -> Vec<Complex64> {
        let lf = ln_factorials(self.dim);
        let r2 = alpha.norm_sqr();
        (0..self.dim)
            .map(|n| {
                if n == 0 {
                    return c64((-0.5 * r2).exp(), 0.0);
                }
                if alpha.norm() == 0.0 {
                    return c64(0.0, 0.0);
                }
                let mag = (-0.5 * r2 + n as f64 * alpha.norm().ln() - 0.5 * lf[n]).exp();
                Complex64::from_polar(mag, n as f64 * alpha.arg())
            })
            .collect()
    }
}

/// Reference states used in the TMD and homodyne examples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReferenceState {
    /// Poisson photon-number mixture with mean μ.
    Laser { mu: f64 },
    /// Even cat (|α′⟩ + |−α′⟩)/√(2(1+e^{−2|α′|²})).
    Cat { alpha: f64 },
    Fock { n: usize },
    Coherent { re: f64, im: f64 },
}

/// The truncated, renormalized reference state.
pub fn reference_state(kind: ReferenceState, space: FockSpace) -> Result<StateOp, CvError> {
    let d = space.dim();
    match kind {
        ReferenceState::Laser { mu } => {
            if !(mu >= 0.0 && mu.is_finite()) {
                return Err(CvError::InvalidParameter(format!("laser mean photon number {mu}")));
            }
            let weights: Vec<f64> = space.coherent_amplitudes(c64(mu.sqrt(), 0.0)).iter().map(|a| a.norm_sqr()).collect();
            let total: f64 = weights.iter().sum();
            let diag: Vec<f64> = weights.iter().map(|w| w / total).collect();
            Ok(StateOp::new_unchecked(HermitianOp::from_diagonal(&diag)))
        }
        ReferenceState::Cat { alpha } => {
            if !alpha.is_finite() || alpha == 0.0 {
                return Err(CvError::InvalidParameter(format!("cat amplitude {alpha}")));
            }
            let norm = (2.0 * (1.0 + (-2.0 * alpha * alpha).exp())).sqrt();
            let plus = space.coherent_amplitudes(c64(alpha, 0.0));
            let minus = space.coherent_amplitudes(c64(-alpha, 0.0));
            let amps: Vec<Complex64> = plus.iter().zip(&minus).map(|(a, b)| (a + b) / norm).collect();
            Ok(StateOp::pure(&Ket::from_slice(&amps).normalized()))
        }
        ReferenceState::Fock { n } => {
            if n >= d {
                return Err(CvError::InvalidParameter(format!("Fock state |{n}> outside truncation {d}")));
            }
            Ok(StateOp::pure(&Ket::basis(d, n)))
        }
        ReferenceState::Coherent { re, im } => {
            let amps = space.coherent_amplitudes(c64(re, im));
            Ok(StateOp::pure(&Ket::from_slice(&amps).normalized()))
        }
    }
}

/// exp(αA† − α*A) on the truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct Displacement {
    pub op: CMat,
    /// Coherent-state weight beyond the truncation, 1 − Σ_{n<D} e^{−|α|²}|α|^{2n}/n!.
    pub norm_defect: f64,
}

impl Displacement {
    pub fn truncation_warning(&self) -> bool {
        self.norm_defect > DISPLACEMENT_TOL
    }
}

/// Exponential of the truncated generator, unitary to rounding on the truncation.
pub fn displacement(space: FockSpace, alpha: Complex64) -> Result<Displacement, CvError> {
    if !(alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(CvError::InvalidParameter(format!("displacement {alpha}")));
    }
    let a = space.annihilation();
    let g = a.adjoint() * alpha - &a * alpha.conj();
    // G is anti-Hermitian, so H = iG is Hermitian and exp(G) = exp(−iH).
    let h = HermitianOp::from_symmetrized(&(g * c64(0.0, 1.0)));
    let (vals, vecs) = h.eigh()?;
    let phases = CMat::from_diagonal(&operators::CVec::from_iterator(
        vals.len(),
        vals.iter().map(|&v| Complex64::from_polar(1.0, -v)),
    ));
    let op = &vecs * phases * vecs.adjoint();
    let kept: f64 = space.coherent_amplitudes(alpha).iter().map(|c| c.norm_sqr()).sum();
    Ok(Displacement { op, norm_defect: (1.0 - kept).max(0.0) })
}
