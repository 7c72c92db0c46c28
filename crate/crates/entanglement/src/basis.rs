//! Witness bases: the eigenbases of one-parameter families of optimal
//! decomposable witnesses, and the witness criterion evaluated on them.

use operators::{c64, kron, CMat, HermitianOp, Ket};
use pom::Pom;
use serde::{Deserialize, Serialize};

use crate::weyl::{ComplementList, WitnessSetting};

/// Outcome of the witness criterion 4f₁f₂ ≥ (f₃−f₄)².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessVerdict {
    /// True when the criterion fails, which detects entanglement.
    pub violated: bool,
    /// 4f₁f₂ − (f₃−f₄)².
    pub margin: f64,
}

/// Evaluates the witness criterion on the four frequencies of a witness
/// basis, product outcomes first.
pub fn witness_criterion(f: [f64; 4]) -> WitnessVerdict {
    let margin = 4.0 * f[0] * f[1] - (f[2] - f[3]).powi(2);
    WitnessVerdict { violated: margin < 0.0, margin }
}

/// min over α of ⟨(|Ψ_α⟩⟨Ψ_α|)^T₂⟩ = (f₁+f₂)/2 − ½√((f₁−f₂)² + (f₃−f₄)²).
pub fn minimal_witness_value(f: [f64; 4]) -> f64 {
    (f[0] + f[1]) / 2.0 - 0.5 * ((f[0] - f[1]).powi(2) + (f[2] - f[3]).powi(2)).sqrt()
}

/// Four orthonormal kets: two product kets followed by the two maximally
/// entangled kets (|0,1+a⟩ ± |1,a⟩)/√2 of the local frame.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessBasis {
    kets: [Ket; 4],
    /// Local product unitary whose columns are the frame kets |j,k⟩.
    pub frame: CMat,
    /// Cyclic shift a applied to qubit 2.
    pub shift: u8,
    pub setting: Option<WitnessSetting>,
    /// Wave-plate pair (U₁ʷᵖ, U₂ʷᵖ) that realizes the basis in front of the
    /// canonical witness set-up.
    pub wave_plates: Option<(CMat, CMat)>,
}

fn canonical_kets(shift: u8) -> [CMat; 4] {
    let e = |j: usize, k: usize| {
        let mut v = CMat::zeros(4, 1);
        v[(2 * j + k, 0)] = c64(1.0, 0.0);
        v
    };
    let a = usize::from(shift);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [
        e(0, a),
        e(1, 1 - a),
        (e(0, 1 - a) + e(1, a)) * c64(s, 0.0),
        (e(0, 1 - a) - e(1, a)) * c64(s, 0.0),
    ]
}

impl WitnessBasis {
    /// Basis for a frame unitary and a qubit-2 shift.
    pub fn from_frame(frame: CMat, shift: u8) -> Self {
        let kets = canonical_kets(shift).map(|k| Ket::new((&frame * k).column(0).into_owned()));
        Self { kets, frame, shift, setting: None, wave_plates: None }
    }

    /// Basis for a wave-plate pair: the canonical basis seen through
    /// ρ → (U₁⊗U₂)ρ(U₁⊗U₂)†, i.e. kets (U₁⊗U₂)†|·⟩.
    pub fn from_wave_plates(u1: CMat, u2: CMat) -> Self {
        let frame = kron(&u1, &u2).adjoint();
        let mut b = Self::from_frame(frame, 0);
        b.wave_plates = Some((u1, u2));
        b
    }

    /// Basis for a setting: |j⟩ on qubit k is the (−1)^j eigenket of U_k,
    /// with |1⟩ = V_k|0⟩ so that V_k acts as the cyclic shift.
    pub fn from_setting(s: WitnessSetting) -> Self {
        let list = ComplementList::CANONICAL;
        let (u1, u2) = s.u_ops();
        let local = |u: crate::Weyl, v: crate::Weyl| {
            let (vals, vecs) = HermitianOp::from_symmetrized(&u.matrix()).eigh().expect("2x2 Hermitian");
            let top = if vals[0] > vals[1] { 0 } else { 1 };
            let e0 = vecs.column(top).into_owned();
            let e1 = v.matrix() * &e0;
            CMat::from_columns(&[e0, e1])
        };
        let frame = kron(&local(u1, list.v(s.u1)), &local(u2, list.v(s.u2)));
        let mut b = Self::from_frame(frame, s.a);
        b.setting = Some(s);
        b
    }

    pub fn kets(&self) -> &[Ket; 4] {
        &self.kets
    }

    pub fn projectors(&self) -> [HermitianOp; 4] {
        std::array::from_fn(|j| self.kets[j].projector())
    }

    pub fn pom(&self) -> Pom {
        Pom::new(self.projectors().to_vec()).expect("orthonormal basis")
    }

    /// Born probabilities (p₁, p₂, p₃, p₄).
    pub fn probabilities(&self, rho: &CMat) -> [f64; 4] {
        std::array::from_fn(|j| {
            let k = self.kets[j].amplitudes();
            (k.adjoint() * rho * k)[(0, 0)].re
        })
    }

    /// Family member Σ_j w_jΠ_j with weights cos²α, sin²α, ±sinα cosα.
    pub fn witness(&self, alpha: f64) -> HermitianOp {
        let (s, c) = alpha.sin_cos();
        let p = self.projectors();
        let w = [c * c, s * s, s * c, -s * c];
        p.iter().zip(w).fold(HermitianOp::zeros(4), |acc, (pj, wj)| &acc + &pj.scale(wj))
    }

    /// The three observables the basis measures: 2(Π₁−Π₂), (−1)^a(Π₁+Π₂−Π₃−Π₄)
    /// and 2(Π₃−Π₄).
    pub fn observables(&self) -> [HermitianOp; 3] {
        let [p1, p2, p3, p4] = self.projectors();
        let sign = if self.shift == 0 { 1.0 } else { -1.0 };
        [
            (&p1 - &p2).scale(2.0),
            (&(&p1 + &p2) - &(&p3 + &p4)).scale(sign),
            (&p3 - &p4).scale(2.0),
        ]
    }
}

/// The Clifford unitary C with C|V⟩ = (|V⟩+|H⟩)/√2 and C|H⟩ = i(|H⟩−|V⟩)/√2,
/// taking |V⟩ as the first basis ket. It permutes X → Y → Z → X.
pub fn clifford_c() -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_row_slice(2, 2, &[c64(s, 0.0), c64(0.0, -s), c64(s, 0.0), c64(0.0, s)])
}

/// One of the six witness bases together with its measured observables.
#[derive(Debug, Clone)]
pub struct SixBasisEntry {
    pub basis: WitnessBasis,
    pub observables: [HermitianOp; 3],
}

/// Settings of the six-basis informationally complete family.
pub const SIX_SETTINGS: [(u8, u8, u8); 6] = [(1, 1, 0), (1, 1, 1), (2, 3, 0), (2, 3, 1), (3, 2, 0), (3, 2, 1)];

/// The six witness bases built from their settings, each annotated with the
/// wave-plate pair that realizes it: (1,1), (1,X), (C†,C), (C†,XC), (C,C†), (C,XC†).
pub fn build_six_bases() -> Vec<SixBasisEntry> {
    let c = clifford_c();
    let cd = c.adjoint();
    let id = CMat::identity(2, 2);
    let x = operators::pauli::x();
    let plates = [
        (id.clone(), id.clone()),
        (id, x.clone()),
        (cd.clone(), c.clone()),
        (cd.clone(), &x * &c),
        (c.clone(), cd.clone()),
        (c, &x * &cd),
    ];
    SIX_SETTINGS
        .iter()
        .zip(plates)
        .map(|(&(u1, u2, a), wp)| {
            let mut basis = WitnessBasis::from_setting(WitnessSetting { u1, u2, a });
            basis.wave_plates = Some(wp);
            let observables = basis.observables();
            SixBasisEntry { basis, observables }
        })
        .collect()
}
