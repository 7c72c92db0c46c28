use serde::{Deserialize, Serialize};

use crate::EstError;

/// Detection counts n_j per outcome.
///
/// Counts are stored as reals so that exact probabilities can stand in for
/// the N → ∞ limit; [`Frequencies::from_counts`] is the usual entry point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Frequencies {
    counts: Vec<f64>,
    total: f64,
}

impl Frequencies {
    pub fn from_counts(counts: &[u64]) -> Result<Self, EstError> {
        Self::from_real_counts(counts.iter().map(|&n| n as f64).collect())
    }

    pub fn from_real_counts(counts: Vec<f64>) -> Result<Self, EstError> {
        if counts.is_empty() {
            return Err(EstError::InvalidData("no outcomes".into()));
        }
        if counts.iter().any(|n| !n.is_finite() || *n < 0.0) {
            return Err(EstError::InvalidData("counts must be finite and nonnegative".into()));
        }
        let total: f64 = counts.iter().sum();
        if total <= 0.0 {
            return Err(EstError::InvalidData("no detected copies".into()));
        }
        Ok(Self { counts, total })
    }

    /// Counts N·p_j for a probability vector.
    pub fn from_probabilities(p: &[f64], copies: f64) -> Result<Self, EstError> {
        Self::from_real_counts(p.iter().map(|x| x * copies).collect())
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    /// N.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// f_j = n_j/N.
    pub fn frequencies(&self) -> Vec<f64> {
        self.counts.iter().map(|n| n / self.total).collect()
    }
}

impl TryFrom<Vec<f64>> for Frequencies {
    type Error = EstError;
    fn try_from(v: Vec<f64>) -> Result<Self, EstError> {
        Self::from_real_counts(v)
    }
}

impl From<Frequencies> for Vec<f64> {
    fn from(f: Frequencies) -> Vec<f64> {
        f.counts
    }
}
