use operators::random::multinomial;
use operators::{trace_product_re, StateOp};
use pom::Pom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::choi::{output_unnormalized, ChoiOp};
use crate::ProcError;

/// Counts n_lm for L input states measured with one M-outcome POM.
#[derive(Debug, Clone)]
pub struct QptData {
    inputs: Vec<StateOp>,
    pom: Pom,
    counts: Vec<Vec<f64>>,
}

impl QptData {
    pub fn new(inputs: Vec<StateOp>, pom: Pom, counts: Vec<Vec<f64>>) -> Result<Self, ProcError> {
        if inputs.is_empty() || inputs.len() != counts.len() {
            return Err(ProcError::InvalidData(format!("{} input states but {} count rows", inputs.len(), counts.len())));
        }
        let d_in = inputs[0].dim();
        if inputs.iter().any(|r| r.dim() != d_in) {
            return Err(ProcError::Dimension("input states differ in dimension".into()));
        }
        if counts.iter().any(|row| row.len() != pom.len()) {
            return Err(ProcError::InvalidData(format!("every count row needs {} entries", pom.len())));
        }
        if counts.iter().flatten().any(|n| !(n.is_finite() && *n >= 0.0)) {
            return Err(ProcError::InvalidData("counts must be finite and nonnegative".into()));
        }
        if counts.iter().flatten().sum::<f64>() <= 0.0 {
            return Err(ProcError::InvalidData("no counts".into()));
        }
        Ok(Self { inputs, pom, counts })
    }

    /// Noiseless data: n_lm = N·tr{E(ρ_lᵀ⊗Π_m)}.
    pub fn exact(channel: &ChoiOp, inputs: Vec<StateOp>, pom: Pom, copies: f64) -> Result<Self, ProcError> {
        let counts = inputs
            .iter()
            .map(|r| Ok(outcome_probabilities(channel, r, &pom)?.into_iter().map(|p| copies * p.max(0.0)).collect()))
            .collect::<Result<_, ProcError>>()?;
        Self::new(inputs, pom, counts)
    }

    /// Multinomial counts of `copies` per input.
    pub fn simulate(channel: &ChoiOp, inputs: Vec<StateOp>, pom: Pom, copies: u64, seed: u64) -> Result<Self, ProcError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let counts = inputs
            .iter()
            .map(|r| {
                let p = outcome_probabilities(channel, r, &pom)?;
                Ok(multinomial(&p, copies, &mut rng).into_iter().map(|n| n as f64).collect())
            })
            .collect::<Result<_, ProcError>>()?;
        Self::new(inputs, pom, counts)
    }

    pub fn inputs(&self) -> &[StateOp] {
        &self.inputs
    }

    pub fn pom(&self) -> &Pom {
        &self.pom
    }

    pub fn counts(&self) -> &[Vec<f64>] {
        &self.counts
    }

    /// Number of input states L.
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// (D_i, D_o).
    pub fn dims(&self) -> (usize, usize) {
        (self.inputs[0].dim(), self.pom.dim())
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().flatten().sum()
    }

    /// f_lm = n_lm/Σn, which is n_lm/(LN) for equal row totals.
    pub fn frequencies(&self) -> Vec<Vec<f64>> {
        let total = self.total();
        self.counts.iter().map(|row| row.iter().map(|n| n / total).collect()).collect()
    }

    /// p_lm = tr{E(ρ_lᵀ⊗Π_m)}/L.
    pub fn probabilities(&self, e: &ChoiOp) -> Result<Vec<Vec<f64>>, ProcError> {
        let l = self.len() as f64;
        self.inputs
            .iter()
            .map(|r| Ok(outcome_probabilities(e, r, &self.pom)?.into_iter().map(|p| p / l).collect()))
            .collect()
    }

    /// Σ_lm f_lm ln p_lm, the log-likelihood per copy.
    pub fn log_likelihood(&self, e: &ChoiOp) -> Result<f64, ProcError> {
        let p = self.probabilities(e)?;
        Ok(self
            .frequencies()
            .iter()
            .flatten()
            .zip(p.iter().flatten())
            .filter(|(f, _)| **f > 0.0)
            .map(|(f, p)| f * p.ln())
            .sum())
    }

    /// Appends one input state with its counts.
    pub fn push(&mut self, input: StateOp, counts: Vec<f64>) -> Result<(), ProcError> {
        if input.dim() != self.inputs[0].dim() || counts.len() != self.pom.len() {
            return Err(ProcError::Dimension("appended round does not match the data".into()));
        }
        if counts.iter().any(|n| !(n.is_finite() && *n >= 0.0)) {
            return Err(ProcError::InvalidData("counts must be finite and nonnegative".into()));
        }
        self.inputs.push(input);
        self.counts.push(counts);
        Ok(())
    }

    /// The first `l` rounds.
    pub fn truncated(&self, l: usize) -> Result<Self, ProcError> {
        let l = l.min(self.len());
        Self::new(self.inputs[..l].to_vec(), self.pom.clone(), self.counts[..l].to_vec())
    }
}

/// tr{E(ρᵀ⊗Π_m)} for every outcome.
pub fn outcome_probabilities(e: &ChoiOp, rho: &StateOp, pom: &Pom) -> Result<Vec<f64>, ProcError> {
    let (d_in, d_out) = e.dims();
    if rho.dim() != d_in || pom.dim() != d_out {
        return Err(ProcError::Dimension(format!(
            "channel is {d_in}->{d_out}, input has dimension {} and POM {}",
            rho.dim(),
            pom.dim()
        )));
    }
    let out = output_unnormalized(e.matrix(), rho.matrix(), d_in, d_out);
    Ok(pom.outcomes().iter().map(|o| trace_product_re(o.matrix(), &out)).collect())
}

/// Supplies counts for a requested input state, measured with a fixed POM.
pub trait QptDataProvider {
    fn pom(&self) -> &Pom;
    fn measure(&mut self, input: &StateOp) -> Result<Vec<f64>, ProcError>;
}

/// Multinomial samples of `copies` per input from a known channel.
pub struct SimulatedQpt {
    pub channel: ChoiOp,
    pub pom: Pom,
    pub copies: u64,
    rng: ChaCha8Rng,
}

impl SimulatedQpt {
    pub fn new(channel: ChoiOp, pom: Pom, copies: u64, seed: u64) -> Self {
        Self { channel, pom, copies, rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl QptDataProvider for SimulatedQpt {
    fn pom(&self) -> &Pom {
        &self.pom
    }

    fn measure(&mut self, input: &StateOp) -> Result<Vec<f64>, ProcError> {
        let p = outcome_probabilities(&self.channel, input, &self.pom)?;
        Ok(multinomial(&p, self.copies, &mut self.rng).into_iter().map(|n| n as f64).collect())
    }
}

/// Expected counts N·p from a known channel.
pub struct ExactQpt {
    pub channel: ChoiOp,
    pub pom: Pom,
    pub copies: f64,
}

impl QptDataProvider for ExactQpt {
    fn pom(&self) -> &Pom {
        &self.pom
    }

    fn measure(&mut self, input: &StateOp) -> Result<Vec<f64>, ProcError> {
        Ok(outcome_probabilities(&self.channel, input, &self.pom)?.into_iter().map(|p| self.copies * p.max(0.0)).collect())
    }
}
