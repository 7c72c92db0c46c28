//! Channels as Kraus lists and as Choi operators on H⊗K.
//!
//! E = Σ_jk |j⟩⟨k| ⊗ M(|j⟩⟨k|), so tr E = D_i and trace preservation reads
//! tr_K{E} = 1_H. The input space H is the first tensor factor.

use operators::random::ginibre;
use operators::{c64, kron, partial_trace_mat, CMat, HermitianOp, StateOp};
use rand::Rng;

use crate::ProcError;

/// Tolerance on ΣK†K = 1 for [`Channel::new`].
pub const KRAUS_TOL: f64 = 1e-10;
/// Tolerance on tr_K{E} = 1_H for [`ChoiOp::new`].
pub const TP_TOL: f64 = 1e-8;
/// Most negative eigenvalue accepted by [`ChoiOp::new`].
pub const POSITIVITY_TOL: f64 = 1e-9;

/// Completely positive trace-preserving map given by Kraus operators
/// K_m : H → K.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    kraus: Vec<CMat>,
    d_in: usize,
    d_out: usize,
}

impl Channel {
    pub fn new(kraus: Vec<CMat>) -> Result<Self, ProcError> {
        let first = kraus.first().ok_or_else(|| ProcError::InvalidData("empty Kraus list".into()))?;
        let (d_out, d_in) = first.shape();
        if kraus.iter().any(|k| k.shape() != (d_out, d_in)) {
            return Err(ProcError::Dimension("Kraus operators differ in shape".into()));
        }
        let sum = kraus.iter().fold(CMat::zeros(d_in, d_in), |acc, k| acc + k.adjoint() * k);
        let dev = (sum - CMat::identity(d_in, d_in)).iter().fold(0.0f64, |m, v| m.max(v.norm()));
        if dev > KRAUS_TOL {
            return Err(ProcError::NotTracePreserving(dev));
        }
        Ok(Self { kraus, d_in, d_out })
    }

    pub fn unitary(u: CMat) -> Result<Self, ProcError> {
        Self::new(vec![u])
    }

    pub fn identity(dim: usize) -> Self {
        Self { kraus: vec![CMat::identity(dim, dim)], d_in: dim, d_out: dim }
    }

    /// Channel with `count` Kraus operators cut from a QR-orthonormalized
    /// stack of Ginibre blocks. Generic draws give a Choi operator of rank
    /// min(count, D_i D_o). The count is raised to ⌈D_i/D_o⌉ when smaller,
    /// the fewest Kraus operators a trace-preserving map can have.
    pub fn random<R: Rng + ?Sized>(d_in: usize, d_out: usize, count: usize, rng: &mut R) -> Self {
        let count = count.max(d_in.div_ceil(d_out));
        Self { kraus: isometry_blocks(d_in, d_out, count, rng), d_in, d_out }
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    /// (D_i, D_o).
    pub fn dims(&self) -> (usize, usize) {
        (self.d_in, self.d_out)
    }

    /// ΣK_mρK_m†.
    pub fn apply(&self, rho: &StateOp) -> Result<StateOp, ProcError> {
        if rho.dim() != self.d_in {
            return Err(ProcError::Dimension(format!("input state has dimension {}, channel expects {}", rho.dim(), self.d_in)));
        }
        let out = self.kraus.iter().fold(CMat::zeros(self.d_out, self.d_out), |acc, k| acc + k * rho.matrix() * k.adjoint());
        Ok(StateOp::normalized(&out)?)
    }
}

/// `count` blocks B_j (d_out × d_in) with ΣB_j†B_j = 1.
pub(crate) fn isometry_blocks<R: Rng + ?Sized>(d_in: usize, d_out: usize, count: usize, rng: &mut R) -> Vec<CMat> {
    let stacked = ginibre(count * d_out, d_in, rng);
    let q = stacked.qr().q();
    (0..count).map(|j| q.rows(j * d_out, d_out).into_owned()).collect()
}

/// Positive operator on H⊗K with tr_K{E} = 1_H.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiOp {
    op: HermitianOp,
    d_in: usize,
    d_out: usize,
}

impl ChoiOp {
    pub fn new(op: HermitianOp, d_in: usize, d_out: usize) -> Result<Self, ProcError> {
        if op.dim() != d_in * d_out {
            return Err(ProcError::Dimension(format!("operator of dimension {} is not {d_in}x{d_out}", op.dim())));
        }
        let min = op.min_eigenvalue()?;
        if min < -POSITIVITY_TOL {
            return Err(ProcError::NotChoi(format!("minimum eigenvalue {min:e}")));
        }
        let e = Self { op, d_in, d_out };
        let defect = e.tp_defect();
        if defect > TP_TOL {
            return Err(ProcError::NotChoi(format!("trace-preservation defect {defect:e}")));
        }
        Ok(e)
    }

    pub(crate) fn from_matrix_unchecked(m: &CMat, d_in: usize, d_out: usize) -> Self {
        Self { op: HermitianOp::from_symmetrized(m), d_in, d_out }
    }

    /// 1_{HK}/D_o, the completely depolarizing channel.
    pub fn maximally_mixed(d_in: usize, d_out: usize) -> Self {
        Self { op: HermitianOp::identity(d_in * d_out).scale(1.0 / d_out as f64), d_in, d_out }
    }

    /// (D_i, D_o).
    pub fn dims(&self) -> (usize, usize) {
        (self.d_in, self.d_out)
    }

    pub fn op(&self) -> &HermitianOp {
        &self.op
    }

    pub fn matrix(&self) -> &CMat {
        self.op.matrix()
    }

    /// Frobenius norm of tr_K{E} − 1_H.
    pub fn tp_defect(&self) -> f64 {
        tp_defect(self.op.matrix(), self.d_in, self.d_out)
    }

    pub fn apply(&self, rho: &StateOp) -> Result<StateOp, ProcError> {
        apply_channel(self, rho)
    }

    /// 𝒟_tr = tr|E − E'|/(2D_i).
    pub fn distance(&self, other: &ChoiOp) -> Result<f64, ProcError> {
        if self.dims() != other.dims() {
            return Err(ProcError::Dimension("Choi operators of different shape".into()));
        }
        let d = self.op.matrix() - other.op.matrix();
        Ok(crate::mlme::hermitian_trace_norm(&d) / (2.0 * self.d_in as f64))
    }

    /// Number of eigenvalues above `tol`.
    pub fn rank(&self, tol: f64) -> Result<usize, ProcError> {
        Ok(self.op.eigenvalues()?.iter().filter(|&&v| v > tol).count())
    }
}

pub(crate) fn trace_out_output(m: &CMat, d_in: usize, d_out: usize) -> CMat {
    partial_trace_mat(m, 0, (d_in, d_out)).expect("dimensions checked by caller")
}

pub(crate) fn tp_defect(m: &CMat, d_in: usize, d_out: usize) -> f64 {
    (trace_out_output(m, d_in, d_out) - CMat::identity(d_in, d_in)).norm()
}

/// h ⊗ 1_K.
pub(crate) fn lift(h: &CMat, d_out: usize) -> CMat {
    kron(h, &CMat::identity(d_out, d_out))
}

/// E = Σ_m |ψ_m⟩⟨ψ_m| with |ψ_m⟩ = Σ_j |j⟩ ⊗ K_m|j⟩.
pub fn choi_from_kraus(ch: &Channel) -> ChoiOp {
    let (d_in, d_out) = ch.dims();
    let n = d_in * d_out;
    let mut e = CMat::zeros(n, n);
    for k in ch.kraus() {
        let psi = operators::CVec::from_fn(n, |r, _| k[(r % d_out, r / d_out)]);
        e += &psi * psi.adjoint();
    }
    ChoiOp::from_matrix_unchecked(&e, d_in, d_out)
}

/// tr_H{E(ρᵀ⊗1_K)} without forming the product.
pub(crate) fn output_unnormalized(e: &CMat, rho: &CMat, d_in: usize, d_out: usize) -> CMat {
    let mut out = CMat::zeros(d_out, d_out);
    for j in 0..d_in {
        for k in 0..d_in {
            // (ρᵀ)_{kj} = ρ_{jk}
            let w = rho[(j, k)];
            if w == c64(0.0, 0.0) {
                continue;
            }
            for a in 0..d_out {
                for b in 0..d_out {
                    out[(a, b)] += w * e[(j * d_out + a, k * d_out + b)];
                }
            }
        }
    }
    out
}

/// ρ_o = tr_H{E(ρᵀ⊗1_K)}.
pub fn apply_channel(e: &ChoiOp, rho: &StateOp) -> Result<StateOp, ProcError> {
    let (d_in, d_out) = e.dims();
    if rho.dim() != d_in {
        return Err(ProcError::Dimension(format!("input state has dimension {}, channel expects {d_in}", rho.dim())));
    }
    Ok(StateOp::normalized(&output_unnormalized(e.matrix(), rho.matrix(), d_in, d_out))?)
}

/// S(E) = −tr{(E/D_i) log(E/D_i)}.
pub fn channel_entropy(e: &ChoiOp) -> f64 {
    let d = e.d_in as f64;
    e.op.eigenvalues()
        .map(|v| v.iter().map(|x| x / d).filter(|&x| x > 0.0).map(|x| -x * x.ln()).sum())
        .unwrap_or(f64::NAN)
}
