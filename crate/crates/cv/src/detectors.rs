//! Homodyne and time-multiplexed detection POMs on the truncated Fock space.

use operators::{c64, CMat, CVec, Complex64, HermitianOp};
use pom::Pom;
use serde::{Deserialize, Serialize};

use crate::fock::{displacement, FockSpace};
use crate::special::fock_wavefunctions;
use crate::CvError;

/// Most output ports a TMD POM accepts (2⁴ click patterns).
pub const MAX_PORTS: usize = 4;

/// Quadrature angle ϑ with the sampled eigenvalues x_j.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSetting {
    pub theta: f64,
    pub points: Vec<f64>,
    #[serde(default = "unit_weight")]
    pub weight: f64,
}

fn unit_weight() -> f64 {
    1.0
}

impl QuadratureSetting {
    pub fn new(theta: f64, points: Vec<f64>) -> Self {
        Self { theta, points, weight: 1.0 }
    }
}

/// Projectors w |x_ϑ⟩⟨x_ϑ| cut to the truncated space, one per sample point
/// in setting order. When ΣΠ exceeds the identity all outcomes are scaled by
/// 1/λ_max so that the result is a subnormalized POM.
pub fn homodyne_pom(space: FockSpace, settings: &[QuadratureSetting]) -> Result<Pom, CvError> {
    let d = space.dim();
    let mut outcomes = Vec::new();
    for s in settings {
        if !(s.weight > 0.0 && s.weight.is_finite()) || !s.theta.is_finite() {
            return Err(CvError::InvalidParameter(format!("quadrature setting ϑ = {}, weight {}", s.theta, s.weight)));
        }
        for &x in &s.points {
            if !x.is_finite() {
                return Err(CvError::InvalidParameter(format!("quadrature sample {x}")));
            }
            let psi = fock_wavefunctions(d, x);
            let v = CVec::from_fn(d, |n, _| Complex64::from_polar(psi[n], -(n as f64) * s.theta));
            outcomes.push(HermitianOp::from_symmetrized(&(&v * v.adjoint() * c64(s.weight, 0.0))));
        }
    }
    scaled_pom(outcomes)
}

/// Subnormalized POM, dividing by λ_max(ΣΠ) first when it exceeds 1.
pub(crate) fn scaled_pom(outcomes: Vec<HermitianOp>) -> Result<Pom, CvError> {
    if outcomes.is_empty() {
        return Err(CvError::InvalidParameter("no outcomes".into()));
    }
    let d = outcomes[0].dim();
    let g = outcomes.iter().fold(CMat::zeros(d, d), |acc, o| acc + o.matrix());
    let max = HermitianOp::from_symmetrized(&g).max_eigenvalue()?;
    let outcomes = if max > 1.0 { outcomes.iter().map(|o| o.scale(1.0 / max)).collect() } else { outcomes };
    Ok(Pom::subnormalized(outcomes)?)
}

/// Overall port efficiencies η̃_k = η_k(1 − T_k + T_{K+1}δ_{k,K+1}) Π_{j<k} T_j
/// for K beam splitters with transmissions T_1..T_K feeding K + 1 detectors.
/// The last port collects everything transmitted by all splitters.
pub fn port_efficiencies(transmissions: &[f64], detector_efficiencies: &[f64]) -> Result<Vec<f64>, CvError> {
    if detector_efficiencies.len() != transmissions.len() + 1 {
        return Err(CvError::Dimension(format!(
            "{} splitters need {} detector efficiencies, got {}",
            transmissions.len(),
            transmissions.len() + 1,
            detector_efficiencies.len()
        )));
    }
    if transmissions.iter().chain(detector_efficiencies).any(|&t| !(0.0..=1.0).contains(&t)) {
        return Err(CvError::InvalidParameter("transmissions and efficiencies must lie in [0, 1]".into()));
    }
    let mut through = 1.0;
    let mut out = Vec::with_capacity(detector_efficiencies.len());
    for (k, &eta) in detector_efficiencies.iter().enumerate() {
        match transmissions.get(k) {
            Some(&t) => {
                out.push(eta * (1.0 - t) * through);
                through *= t;
            }
            None => out.push(eta * through),
        }
    }
    Ok(out)
}

/// Probability of click pattern `pattern` given n photons.
///
/// Each photon lands in port k with probability η̃_k and is lost otherwise.
/// A port clicks when at least one photon reaches it, so by inclusion and
/// exclusion P(S | n) = Σ_{T⊆S} (−1)^{|S|−|T|} (1 − Ση̃ + Σ_{k∈T} η̃_k)ⁿ.
/// Bit K−1−k of `pattern` is port k, so "10" means only the first port clicked.
pub fn click_probability(port_eff: &[f64], pattern: usize, n: usize) -> f64 {
    let k = port_eff.len();
    let loss = 1.0 - port_eff.iter().sum::<f64>();
    let clicked: Vec<usize> = (0..k).filter(|&j| pattern >> (k - 1 - j) & 1 == 1).collect();
    let mut total = 0.0;
    for subset in 0usize..(1 << clicked.len()) {
        let reach: f64 = clicked.iter().enumerate().filter(|(i, _)| subset >> i & 1 == 1).map(|(_, &j)| port_eff[j]).sum();
        let sign = if (clicked.len() - subset.count_ones() as usize) % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * (loss + reach).max(0.0).powi(n as i32);
    }
    total
}

/// Click pattern label, first port leftmost.
pub fn pattern_label(pattern: usize, ports: usize) -> String {
    (0..ports).map(|j| if pattern >> (ports - 1 - j) & 1 == 1 { '1' } else { '0' }).collect()
}

/// TMD outcomes: for each displacement α (0 gives the undisplaced set) the
/// 2^K pattern operators 𝒟(α)Π_b𝒟(α)†/𝒩 with Π_b = Σ_n P(b|n)|n⟩⟨n|.
/// 𝒩 is the number of displacements, so the full list sums to the identity.
/// Index α·2^K + b.
pub fn tmd_pom(space: FockSpace, port_eff: &[f64], displacements: &[Complex64]) -> Result<Pom, CvError> {
    let k = port_eff.len();
    if k == 0 || k > MAX_PORTS {
        return Err(CvError::InvalidParameter(format!("TMD needs 1 to {MAX_PORTS} ports, got {k}")));
    }
    let total: f64 = port_eff.iter().sum();
    if port_eff.iter().any(|e| !(0.0..=1.0).contains(e)) || total > 1.0 + 1e-12 {
        return Err(CvError::InvalidParameter(format!("port efficiencies {port_eff:?} are not a subprobability")));
    }
    let alphas: Vec<Complex64> = if displacements.is_empty() { vec![c64(0.0, 0.0)] } else { displacements.to_vec() };
    let d = space.dim();
    let scale = 1.0 / alphas.len() as f64;
    let diagonal: Vec<Vec<f64>> =
        (0..1usize << k).map(|b| (0..d).map(|n| click_probability(port_eff, b, n)).collect()).collect();
    let mut outcomes = Vec::with_capacity(alphas.len() << k);
    for &alpha in &alphas {
        let u = displacement(space, alpha)?.op;
        for diag in &diagonal {
            let pi = CMat::from_diagonal(&CVec::from_iterator(d, diag.iter().map(|&c| c64(c * scale, 0.0))));
            outcomes.push(HermitianOp::from_symmetrized(&(&u * pi * u.adjoint())));
        }
    }
    Ok(Pom::subnormalized(outcomes)?)
}
