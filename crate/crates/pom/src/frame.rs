use nalgebra::{DMatrix, DVector, SymmetricEigen};
use operators::{HermitianOp, StateOp};

use crate::superket::{coordinate_matrix, from_real_coords, real_coords};
use crate::{build_standard, Pom, PomError, StandardPom};

/// Relative singular-value threshold for rank decisions.
pub const RANK_TOL: f64 = 1e-9;

fn numerical_rank(sym: &DMatrix<f64>) -> usize {
    let vals = SymmetricEigen::new(sym.clone()).eigenvalues;
    let max = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if max == 0.0 {
        return 0;
    }
    vals.iter().filter(|v| v.abs() > RANK_TOL * max).count()
}

/// Gram matrix 𝔐_jk = tr{Π_jΠ_k} and its numerical rank.
pub fn gram_matrix(pom: &Pom) -> (DMatrix<f64>, usize) {
    let c = coordinate_matrix(pom.outcomes());
    let g = c.transpose() * &c;
    let rank = numerical_rank(&g);
    (g, rank)
}

/// Frame superoperator ℱ = Σ_j |Π_j⟩⟩⟨⟨Π_j| in Gell-Mann coordinates.
pub fn frame_superoperator(pom: &Pom) -> DMatrix<f64> {
    let c = coordinate_matrix(pom.outcomes());
    &c * c.transpose()
}

/// Dual operators Θ_j with tr{Θ_jΠ_k} = δ_jk for minimal IC sets.
#[derive(Debug, Clone, PartialEq)]
pub struct DualFrame {
    pub duals: Vec<HermitianOp>,
}

impl DualFrame {
    /// Σ_j f_j Θ_j.
    pub fn reconstruct(&self, f: &[f64]) -> HermitianOp {
        assert_eq!(f.len(), self.duals.len(), "one weight per dual");
        let dim = self.duals[0].dim();
        self.duals
            .iter()
            .zip(f)
            .fold(HermitianOp::zeros(dim), |acc, (t, &w)| &acc + &t.scale(w))
    }

    /// Reconstructs ρ from its own Born probabilities.
    pub fn reconstruct_state(&self, pom: &Pom, rho: &StateOp) -> HermitianOp {
        self.reconstruct(&pom.probabilities(rho))
    }
}

/// Canonical duals |Θ_j⟩⟩ = ℱ⁻¹|Π_j⟩⟩.
pub fn dual_frame(pom: &Pom) -> Result<DualFrame, PomError> {
    let d2 = pom.dim() * pom.dim();
    let f = frame_superoperator(pom);
    let rank = numerical_rank(&f);
    if rank < d2 {
        return Err(PomError::NotInformationallyComplete { rank, needed: d2 });
    }
    let chol = f.cholesky().ok_or(PomError::NotInformationallyComplete { rank, needed: d2 })?;
    let duals = pom
        .outcomes()
        .iter()
        .map(|o| from_real_coords(&chol.solve(&real_coords(o))))
        .collect();
    Ok(DualFrame { duals })
}

fn sic_deviation(pom: &Pom) -> f64 {
    let d = pom.dim() as f64;
    if pom.len() != pom.dim() * pom.dim() {
        return f64::INFINITY;
    }
    let (g, _) = gram_matrix(pom);
    let mut dev = 0.0f64;
    for j in 0..pom.len() {
        for k in 0..pom.len() {
            let delta = if j == k { 1.0 } else { 0.0 };
            let expected = (d * delta + 1.0) / (d * d * (d + 1.0));
            dev = dev.max((g[(j, k)] - expected).abs());
        }
    }
    dev
}

/// Θ_j = D(D+1)Π_j − 1 for a SIC POM.
pub fn sic_dual_closed_form(pom: &Pom) -> Result<DualFrame, PomError> {
    let deviation = sic_deviation(pom);
    if deviation > 1e-8 {
        return Err(PomError::NotSic { deviation });
    }
    let d = pom.dim() as f64;
    let id = HermitianOp::identity(pom.dim());
    let duals = pom.outcomes().iter().map(|o| &o.scale(d * (d + 1.0)) - &id).collect();
    Ok(DualFrame { duals })
}

/// Duals of the n-fold product tetrahedron: tensor products of the qubit
/// duals 6Π_j − 1, in the outcome order of `StandardPom::ProductSic(n)`.
pub fn product_sic_dual_closed_form(n: usize) -> Result<DualFrame, PomError> {
    let tet = build_standard(StandardPom::Tetrahedron)?;
    let single = sic_dual_closed_form(&tet)?;
    build_standard(StandardPom::ProductSic(n))?;
    let mut duals = single.duals.clone();
    for _ in 1..n {
        duals = duals
            .iter()
            .flat_map(|a| single.duals.iter().map(move |b| operators::tensor(a, b)))
            .collect();
    }
    Ok(DualFrame { duals })
}

/// Orthonormal split of operator space into the span of the outcomes and its
/// complement.
#[derive(Debug, Clone)]
pub struct MeasurementSubspace {
    /// Γ_1..Γ_n spanning the outcomes.
    pub span: Vec<HermitianOp>,
    /// Remaining orthonormal operators, orthogonal to every outcome.
    pub complement: Vec<HermitianOp>,
    /// a_jk = tr{Γ_kΠ_j}, one row per outcome.
    pub coefficients: DMatrix<f64>,
}

impl MeasurementSubspace {
    pub fn n_pos(&self) -> usize {
        self.span.len()
    }
}

fn orthogonalize(v: &mut DVector<f64>, basis: &[DVector<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let p = b.dot(v);
            v.axpy(-p, b, 1.0);
        }
    }
}

/// Gram-Schmidt over the outcome superkets, completed with Gell-Mann elements.
pub fn measurement_subspace(pom: &Pom) -> MeasurementSubspace {
    let d2 = pom.dim() * pom.dim();
    let cols: Vec<DVector<f64>> = pom.outcomes().iter().map(real_coords).collect();
    let scale = cols.iter().fold(0.0f64, |a, c| a.max(c.norm()));
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for c in &cols {
        let mut v = c.clone();
        orthogonalize(&mut v, &basis);
        let n = v.norm();
        if n > RANK_TOL.sqrt() * scale.max(1e-300) {
            basis.push(v / n);
        }
    }
    let n_pos = basis.len();
    for k in 0..d2 {
        if basis.len() == d2 {
            break;
        }
        let mut v = DVector::zeros(d2);
        v[k] = 1.0;
        orthogonalize(&mut v, &basis);
        let n = v.norm();
        if n > 1e-6 {
            basis.push(v / n);
        }
    }
    let coefficients = DMatrix::from_fn(cols.len(), n_pos, |j, k| basis[k].dot(&cols[j]));
    let ops: Vec<HermitianOp> = basis.iter().map(from_real_coords).collect();
    let (span, complement) = ops.split_at(n_pos);
    MeasurementSubspace { span: span.to_vec(), complement: complement.to_vec(), coefficients }
}
