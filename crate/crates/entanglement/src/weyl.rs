//! Qubit Weyl operators, witness settings (u₁,u₂,a) and observable matrices.

use nalgebra::DMatrix;
use operators::{c64, kron, pauli, CMat, HermitianOp};
use serde::{Deserialize, Serialize};

use crate::EntError;

/// Order-2 qubit Weyl operators. `Y` stands for iXZ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Weyl {
    Z,
    X,
    Y,
}

impl Weyl {
    /// The ordered list {Z, X, iXZ} that u = 1, 2, 3 refers to.
    pub const ORDER: [Weyl; 3] = [Weyl::Z, Weyl::X, Weyl::Y];

    pub fn matrix(self) -> CMat {
        match self {
            Weyl::Z => pauli::z(),
            Weyl::X => pauli::x(),
            // iXZ equals σ_y.
            Weyl::Y => pauli::x() * pauli::z() * c64(0.0, 1.0),
        }
    }
}

/// The complementary operators V assigned to u = 1, 2, 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ComplementList(pub [Weyl; 3]);

impl ComplementList {
    /// {X, iXZ, Z}: the cyclic shift of the U list, so every V anticommutes with its U.
    pub const CANONICAL: ComplementList = ComplementList([Weyl::X, Weyl::Y, Weyl::Z]);

    pub fn v(&self, u: u8) -> Weyl {
        self.0[usize::from(u) - 1]
    }

    /// The list shifted one place to the left.
    pub fn cyclic_shift(&self) -> ComplementList {
        let [a, b, c] = self.0;
        ComplementList([b, c, a])
    }

    /// True when every V anticommutes with its U.
    pub fn is_complementary(&self) -> bool {
        Weyl::ORDER.iter().zip(self.0).all(|(u, v)| *u != v)
    }

    /// The eight lists with V ≠ U for every u.
    pub fn all_complementary() -> Vec<ComplementList> {
        let mut out = Vec::with_capacity(8);
        for a in [Weyl::X, Weyl::Y] {
            for b in [Weyl::Y, Weyl::Z] {
                for c in [Weyl::Z, Weyl::X] {
                    out.push(ComplementList([a, b, c]));
                }
            }
        }
        out
    }
}

impl Default for ComplementList {
    fn default() -> Self {
        Self::CANONICAL
    }
}

/// A witness setting (u₁, u₂, a) with u_k ∈ {1,2,3} and a ∈ {0,1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WitnessSetting {
    pub u1: u8,
    pub u2: u8,
    pub a: u8,
}

impl WitnessSetting {
    pub fn new(u1: u8, u2: u8, a: u8) -> Result<Self, EntError> {
        if !(1..=3).contains(&u1) || !(1..=3).contains(&u2) || a > 1 {
            return Err(EntError::InvalidSetting(format!("({u1},{u2},{a})")));
        }
        Ok(Self { u1, u2, a })
    }

    /// All 18 settings, ordered by u₁, then u₂, then a.
    pub fn all() -> Vec<WitnessSetting> {
        let mut out = Vec::with_capacity(18);
        for u1 in 1..=3 {
            for u2 in 1..=3 {
                for a in 0..=1 {
                    out.push(WitnessSetting { u1, u2, a });
                }
            }
        }
        out
    }

    pub fn u_ops(&self) -> (Weyl, Weyl) {
        (Weyl::ORDER[usize::from(self.u1) - 1], Weyl::ORDER[usize::from(self.u2) - 1])
    }

    /// (−1)^a.
    pub fn sign(&self) -> f64 {
        if self.a == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

impl std::fmt::Display for WitnessSetting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.u1, self.u2, self.a)
    }
}

/// The three independent observables measured by a setting:
/// U₁ + (−1)^a U₂, U₁U₂ and V₁V₂[1 − (−1)^a U₁U₂].
pub fn observables_for_setting(s: &WitnessSetting, list: &ComplementList) -> [HermitianOp; 3] {
    let (u1, u2) = s.u_ops();
    let (v1, v2) = (list.v(s.u1).matrix(), list.v(s.u2).matrix());
    let id = pauli::id2();
    let sign = c64(s.sign(), 0.0);
    let uu = kron(&u1.matrix(), &u2.matrix());
    let first = kron(&u1.matrix(), &id) + kron(&id, &u2.matrix()) * sign;
    let third = kron(&v1, &v2) * (CMat::identity(4, 4) - &uu * sign);
    [
        HermitianOp::from_symmetrized(&first),
        HermitianOp::from_symmetrized(&uu),
        HermitianOp::from_symmetrized(&third),
    ]
}

/// Real coefficients of a two-qubit operator over the 15 nontrivial products
/// σ_a⊗σ_b, ordered (a, b) = (0,1), (0,2), …, (3,3).
///
/// The Weyl products X^pZ^q differ from these only by the phase of XZ = −iY,
/// so rank and singular values of the observable matrix are the same in
/// either basis.
pub fn weyl_coefficients(op: &HermitianOp) -> [f64; 15] {
    let mut out = [0.0; 15];
    for (k, slot) in out.iter_mut().enumerate() {
        let idx = k + 1;
        let p = pauli::string(&[idx / 4, idx % 4]);
        *slot = (op.matrix() * p).trace().re / 4.0;
    }
    out
}

/// Rows of observable coefficients for a list of settings, three rows per setting.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableMatrix {
    pub rows: DMatrix<f64>,
}

/// Relative singular-value cut below which a direction counts as missing.
pub const RANK_TOL: f64 = 1e-9;

impl ObservableMatrix {
    pub fn for_settings(settings: &[WitnessSetting], list: &ComplementList) -> Self {
        let coeffs: Vec<[f64; 15]> =
            settings.iter().flat_map(|s| observables_for_setting(s, list)).map(|o| weyl_coefficients(&o)).collect();
        Self::from_rows(&coeffs)
    }

    pub fn from_rows(coeffs: &[[f64; 15]]) -> Self {
        Self { rows: DMatrix::from_fn(coeffs.len(), 15, |r, c| coeffs[r][c]) }
    }

    /// Singular values in decreasing order.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut sv: Vec<f64> = self.rows.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    pub fn rank(&self) -> usize {
        rank_of(&self.singular_values())
    }
}

pub(crate) fn rank_of(sv: &[f64]) -> usize {
    let max = sv.first().copied().unwrap_or(0.0);
    sv.iter().filter(|&&s| s > RANK_TOL * max).count()
}
