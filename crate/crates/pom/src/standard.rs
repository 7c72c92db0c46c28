use std::fmt;
use std::str::FromStr;

use operators::pauli::{id2, x, y, z};
use operators::random::ginibre;
use operators::{c64, hermitian_fn, CMat, HermitianOp, Ket};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Pom, PomError};

/// Named POM families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum StandardPom {
    /// Qubit SIC POM with tetrahedral Bloch vectors.
    Tetrahedron,
    /// Three-outcome qubit POM with Bloch vectors 120° apart in the x-z plane.
    Trine,
    /// Projectors onto Φ+, Φ−, Ψ+, Ψ−.
    BellBasis,
    /// n-fold tensor power of the tetrahedron.
    ProductSic(usize),
    /// n-fold tensor power of the six Pauli eigenprojectors, each weighted 1/3.
    PauliBasis(usize),
}

impl fmt::Display for StandardPom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StandardPom::Tetrahedron => write!(f, "tetrahedron"),
            StandardPom::Trine => write!(f, "trine"),
            StandardPom::BellBasis => write!(f, "bell"),
            StandardPom::ProductSic(n) => write!(f, "product_sic:{n}"),
            StandardPom::PauliBasis(n) => write!(f, "pauli:{n}"),
        }
    }
}

impl FromStr for StandardPom {
    type Err = PomError;
    fn from_str(s: &str) -> Result<Self, PomError> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let count = || -> Result<usize, PomError> {
            arg.ok_or_else(|| PomError::Unsupported(format!("{s}: missing qubit count")))?
                .parse()
                .map_err(|_| PomError::Unsupported(format!("{s}: bad qubit count")))
        };
        match name {
            "tetrahedron" | "sic" => Ok(StandardPom::Tetrahedron),
            "trine" => Ok(StandardPom::Trine),
            "bell" | "bell_basis" => Ok(StandardPom::BellBasis),
            "product_sic" => Ok(StandardPom::ProductSic(count()?)),
            "pauli" | "pauli_basis" => Ok(StandardPom::PauliBasis(count()?)),
            _ => Err(PomError::Unsupported(s.to_string())),
        }
    }
}

impl TryFrom<String> for StandardPom {
    type Error = PomError;
    fn try_from(s: String) -> Result<Self, PomError> {
        s.parse()
    }
}

impl From<StandardPom> for String {
    fn from(p: StandardPom) -> String {
        p.to_string()
    }
}

/// Bloch vectors of the tetrahedron legs.
pub(crate) fn tetrahedron_bloch() -> [[f64; 3]; 4] {
    let s = 1.0 / 3f64.sqrt();
    [[s, s, s], [s, -s, -s], [-s, -s, s], [-s, s, -s]]
}

fn bloch_op(weight: f64, r: [f64; 3]) -> HermitianOp {
    let m = (id2() + x() * c64(r[0], 0.0) + y() * c64(r[1], 0.0) + z() * c64(r[2], 0.0)) * c64(weight, 0.0);
    HermitianOp::from_symmetrized(&m)
}

fn power(base: &Pom, n: usize) -> Pom {
    (1..n).fold(base.clone(), |acc, _| acc.tensor(base))
}

pub fn build_standard(kind: StandardPom) -> Result<Pom, PomError> {
    match kind {
        StandardPom::Tetrahedron => Pom::new(tetrahedron_bloch().iter().map(|&r| bloch_op(0.25, r)).collect()),
        StandardPom::Trine => {
            let h = 3f64.sqrt() / 2.0;
            Pom::new(vec![
                bloch_op(1.0 / 3.0, [0.0, 0.0, 1.0]),
                bloch_op(1.0 / 3.0, [h, 0.0, -0.5]),
                bloch_op(1.0 / 3.0, [-h, 0.0, -0.5]),
            ])
        }
        StandardPom::BellBasis => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let kets = [[s, 0.0, 0.0, s], [s, 0.0, 0.0, -s], [0.0, s, s, 0.0], [0.0, s, -s, 0.0]];
            Pom::new(
                kets.iter()
                    .map(|k| Ket::from_slice(&k.map(|v| c64(v, 0.0))).projector())
                    .collect(),
            )
        }
        StandardPom::ProductSic(n) | StandardPom::PauliBasis(n) if n == 0 || n > 3 => {
            Err(PomError::Unsupported(format!("{kind}: qubit count must be 1..=3")))
        }
        StandardPom::ProductSic(n) => Ok(power(&build_standard(StandardPom::Tetrahedron)?, n)),
        StandardPom::PauliBasis(n) => {
            let axes = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
            let mut single = Vec::new();
            for a in axes {
                single.push(bloch_op(1.0 / 6.0, a));
                single.push(bloch_op(1.0 / 6.0, a.map(|v: f64| -v)));
            }
            Ok(power(&Pom::new(single)?, n))
        }
    }
}

const MAX_RETRIES: usize = 100;

/// Random POM Π_j = χ^{−1/2}B_j†B_jχ^{−1/2} with χ = ΣB_j†B_j and complex
/// Gaussian B_j.
pub fn build_random(dim: usize, count: usize, seed: u64) -> Result<Pom, PomError> {
    if count == 0 || dim == 0 {
        return Err(PomError::Empty);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_RETRIES {
        let raw: Vec<CMat> = (0..count)
            .map(|_| {
                let b = ginibre(dim, dim, &mut rng);
                b.adjoint() * b
            })
            .collect();
        let chi = HermitianOp::from_symmetrized(&raw.iter().fold(CMat::zeros(dim, dim), |a, m| a + m));
        let vals = chi.eigenvalues()?;
        if vals[0] <= 1e-10 * vals[dim - 1] {
            continue;
        }
        let s = hermitian_fn(&chi, |v| 1.0 / v.sqrt(), 0.0)?;
        let outcomes = raw
            .iter()
            .map(|m| HermitianOp::from_symmetrized(&(s.matrix() * m * s.matrix())))
            .collect();
        return Pom::new(outcomes);
    }
    Err(PomError::RankDeficientChi)
}
