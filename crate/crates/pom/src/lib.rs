//! Probability operator measurements (POMs).
//!
//! A [`Pom`] is an ordered list of positive outcomes Π_j with G = ΣΠ_j ≤ 1.
//! This crate builds the standard families, computes Gram matrices, frame
//! superoperators and canonical duals, and folds detector efficiencies into
//! the outcomes.

mod error;
mod frame;
mod standard;
pub mod superket;

pub use error::PomError;
pub use frame::{
    dual_frame, frame_superoperator, gram_matrix, measurement_subspace, product_sic_dual_closed_form,
    sic_dual_closed_form, DualFrame, MeasurementSubspace, RANK_TOL,
};
pub use standard::{build_random, build_standard, StandardPom};
pub use superket::SuperKet;

use nalgebra::DMatrix;
use operators::{HermitianOp, MatrixRepr, StateOp};
use serde::{Deserialize, Serialize};

const POSITIVITY_TOL: f64 = 1e-10;
const BOUND_TOL: f64 = 1e-9;

/// Probability operator measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PomRepr", into = "PomRepr")]
pub struct Pom {
    outcomes: Vec<HermitianOp>,
    dim: usize,
    efficiency: Option<DMatrix<f64>>,
    complete: bool,
}

impl Pom {
    /// A POM whose outcomes sum to the identity.
    pub fn new(outcomes: Vec<HermitianOp>) -> Result<Self, PomError> {
        let p = Self::subnormalized(outcomes)?;
        if !p.complete {
            return Err(PomError::Incomplete);
        }
        Ok(p)
    }

    /// A POM with G = ΣΠ_j ≤ 1; the completeness flag records whether G = 1.
    pub fn subnormalized(outcomes: Vec<HermitianOp>) -> Result<Self, PomError> {
        let first = outcomes.first().ok_or(PomError::Empty)?;
        let dim = first.dim();
        for (index, o) in outcomes.iter().enumerate() {
            if o.dim() != dim {
                return Err(PomError::DimensionMismatch { expected: dim, found: o.dim() });
            }
            let min = o.min_eigenvalue()?;
            if min < -POSITIVITY_TOL {
                return Err(PomError::NotPositive { index, min_eigenvalue: min });
            }
        }
        let g = total(&outcomes);
        let max = g.max_eigenvalue()?;
        if max > 1.0 + BOUND_TOL {
            return Err(PomError::NotBounded { max_eigenvalue: max });
        }
        let complete = g.max_abs_diff(&HermitianOp::identity(dim)) <= BOUND_TOL;
        Ok(Self { outcomes, dim, efficiency: None, complete })
    }

    pub fn outcomes(&self) -> &[HermitianOp] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn efficiency(&self) -> Option<&DMatrix<f64>> {
        self.efficiency.as_ref()
    }

    /// True when G = ΣΠ_j equals the identity.
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// G = ΣΠ_j.
    pub fn total(&self) -> HermitianOp {
        total(&self.outcomes)
    }

    /// p_j = tr{ρΠ_j}.
    pub fn probabilities(&self, rho: &StateOp) -> Vec<f64> {
        self.outcomes.iter().map(|o| rho.prob(o)).collect()
    }

    pub fn is_informationally_complete(&self) -> bool {
        gram_matrix(self).1 == self.dim * self.dim
    }

    /// Outcomes Π_j ⊗ Π'_k, index j·K' + k.
    pub fn tensor(&self, other: &Pom) -> Pom {
        let mut out = Vec::with_capacity(self.len() * other.len());
        for a in &self.outcomes {
            for b in &other.outcomes {
                out.push(operators::tensor(a, b));
            }
        }
        Pom {
            outcomes: out,
            dim: self.dim * other.dim,
            efficiency: None,
            complete: self.complete && other.complete,
        }
    }

    /// Folds the efficiency matrix into the outcomes: Π'_j = Σ_k η_jk Π_k.
    ///
    /// Rows of η that vanish entirely are dropped together with their outcome.
    pub fn apply_efficiency(&self, eta: &DMatrix<f64>) -> Result<Pom, PomError> {
        let k = self.len();
        if eta.ncols() != k {
            return Err(PomError::DimensionMismatch { expected: k, found: eta.ncols() });
        }
        if let Some(v) = eta.iter().find(|&&v| v < 0.0 || !v.is_finite()) {
            return Err(PomError::InvalidEfficiency(format!("entry {v}")));
        }
        for c in 0..k {
            let s: f64 = eta.column(c).sum();
            if s > 1.0 + 1e-12 {
                return Err(PomError::InvalidEfficiency(format!("column {c} sums to {s}")));
            }
        }
        let kept: Vec<usize> = (0..eta.nrows()).filter(|&r| eta.row(r).iter().any(|&v| v > 0.0)).collect();
        if kept.is_empty() {
            return Err(PomError::Empty);
        }
        let outcomes: Vec<HermitianOp> = kept
            .iter()
            .map(|&r| {
                let mut acc = HermitianOp::zeros(self.dim);
                for c in 0..k {
                    if eta[(r, c)] != 0.0 {
                        acc = &acc + &self.outcomes[c].scale(eta[(r, c)]);
                    }
                }
                acc
            })
            .collect();
        let mut p = Pom::subnormalized(outcomes)?;
        p.efficiency = Some(DMatrix::from_fn(kept.len(), k, |r, c| eta[(kept[r], c)]));
        Ok(p)
    }

    /// Removes one outcome, leaving a POM with G < 1.
    pub fn without_outcome(&self, index: usize) -> Result<Pom, PomError> {
        let eta = DMatrix::from_fn(self.len(), self.len(), |r, c| if r == c && r != index { 1.0 } else { 0.0 });
        self.apply_efficiency(&eta)
    }
}

fn total(outcomes: &[HermitianOp]) -> HermitianOp {
    let dim = outcomes[0].dim();
    outcomes.iter().fold(HermitianOp::zeros(dim), |acc, o| &acc + o)
}

#[derive(Serialize, Deserialize)]
struct PomRepr {
    outcomes: Vec<MatrixRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    efficiency: Option<Vec<Vec<f64>>>,
}

impl From<Pom> for PomRepr {
    fn from(p: Pom) -> Self {
        PomRepr {
            outcomes: p.outcomes.into_iter().map(MatrixRepr::from).collect(),
            efficiency: p
                .efficiency
                .map(|e| (0..e.nrows()).map(|r| e.row(r).iter().copied().collect()).collect()),
        }
    }
}

impl TryFrom<PomRepr> for Pom {
    type Error = PomError;
    fn try_from(r: PomRepr) -> Result<Self, PomError> {
        let outcomes = r
            .outcomes
            .into_iter()
            .map(HermitianOp::try_from)
            .collect::<Result<Vec<_>, _>>()?;
        let mut p = Pom::subnormalized(outcomes)?;
        if let Some(rows) = r.efficiency {
            let cols = rows.first().map_or(0, Vec::len);
            if rows.len() != p.len() || rows.iter().any(|row| row.len() != cols) {
                return Err(PomError::InvalidEfficiency("shape does not match outcomes".into()));
            }
            p.efficiency = Some(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]));
        }
        Ok(p)
    }
}
