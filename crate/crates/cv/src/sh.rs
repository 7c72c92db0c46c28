//! One-dimensional Shack-Hartmann POM from sampled mode amplitudes.
//!
//! A mode ψ_n is cut by aperture mask a_k, propagated by a discrete Fresnel
//! kernel to the detector plane and read out at pixel x_j. The outcome for
//! (k, j) is |v⟩⟨v| with v_n = ψ'*_{n,k}(x_j), so that its matrix elements are
//! ψ'_{m,k}(x_j)ψ'*_{n,k}(x_j).

use operators::{c64, CMat, CVec, Complex64, HermitianOp};
use pom::Pom;
use serde::{Deserialize, Serialize};

use crate::detectors::scaled_pom;
use crate::CvError;

/// Largest tolerated max|⟨ψ_m|ψ_n⟩ − δ_mn| of the sampled modes.
pub const ORTHONORMALITY_TOL: f64 = 1e-3;

/// Fresnel parameters: wave number ζ and propagation distance z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fresnel {
    pub zeta: f64,
    pub z: f64,
}

/// Sampling grid, apertures and selected pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShGeometry {
    /// Uniform transverse grid shared by object and detector planes.
    pub grid: Vec<f64>,
    /// Amplitude mask per aperture, sampled on `grid`.
    pub apertures: Vec<Vec<f64>>,
    pub fresnel: Fresnel,
    /// (aperture, grid index) of every read-out pixel.
    pub pixels: Vec<(usize, usize)>,
}

impl ShGeometry {
    /// `apertures` adjacent windows tiling [−extent, extent] on `grid_points`
    /// samples, each read out at `pixels_per_aperture` evenly spaced
    /// positions inside its own window.
    pub fn tiled(
        extent: f64,
        grid_points: usize,
        apertures: usize,
        pixels_per_aperture: usize,
        fresnel: Fresnel,
    ) -> Result<Self, CvError> {
        if grid_points < 2 || apertures == 0 || pixels_per_aperture == 0 || !(extent > 0.0) {
            return Err(CvError::InvalidParameter("empty Shack-Hartmann geometry".into()));
        }
        let dx = 2.0 * extent / (grid_points - 1) as f64;
        let grid: Vec<f64> = (0..grid_points).map(|i| -extent + i as f64 * dx).collect();
        let width = grid_points / apertures;
        if width < pixels_per_aperture {
            return Err(CvError::InvalidParameter(format!("{apertures} apertures leave fewer than {pixels_per_aperture} samples each")));
        }
        let mut masks = Vec::with_capacity(apertures);
        let mut pixels = Vec::new();
        for k in 0..apertures {
            let start = k * width;
            let end = if k + 1 == apertures { grid_points } else { start + width };
            masks.push((0..grid_points).map(|i| if (start..end).contains(&i) { 1.0 } else { 0.0 }).collect());
            let span = end - start;
            for p in 0..pixels_per_aperture {
                pixels.push((k, start + (2 * p + 1) * span / (2 * pixels_per_aperture)));
            }
        }
        Ok(Self { grid, apertures: masks, fresnel, pixels })
    }

    fn dx(&self) -> f64 {
        (self.grid[self.grid.len() - 1] - self.grid[0]) / (self.grid.len() - 1) as f64
    }
}

/// The `count` lowest Gaussian-weighted monomials x^l e^{−x²/w²},
/// Gram-Schmidt orthonormalized on the grid with weight dx.
pub fn gaussian_modes(count: usize, grid: &[f64], waist: f64) -> Result<Vec<Vec<Complex64>>, CvError> {
    if grid.len() < 2 || !(waist > 0.0) {
        return Err(CvError::InvalidParameter("mode grid needs ≥ 2 points and a positive waist".into()));
    }
    let dx = (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64;
    let mut modes: Vec<Vec<f64>> = Vec::with_capacity(count);
    for l in 0..count {
        let mut f: Vec<f64> = grid.iter().map(|&x| x.powi(l as i32) * (-(x * x) / (waist * waist)).exp()).collect();
        for m in &modes {
            let overlap: f64 = m.iter().zip(&f).map(|(a, b)| a * b).sum::<f64>() * dx;
            f.iter_mut().zip(m).for_each(|(v, mv)| *v -= overlap * mv);
        }
        let norm = (f.iter().map(|v| v * v).sum::<f64>() * dx).sqrt();
        if norm < 1e-12 {
            return Err(CvError::GridTooCoarse(1.0));
        }
        modes.push(f.iter().map(|v| v / norm).collect());
    }
    Ok(modes.into_iter().map(|m| m.into_iter().map(|v| c64(v, 0.0)).collect()).collect())
}

/// Discrete kernel √(ζ/z) e^{iζ(x−x′)²/2z} dx, replaced by its unitary polar factor.
pub fn fresnel_propagator(grid: &[f64], fresnel: Fresnel) -> Result<CMat, CvError> {
    if !(fresnel.zeta > 0.0 && fresnel.z > 0.0) {
        return Err(CvError::InvalidParameter(format!("Fresnel parameters ζ = {}, z = {}", fresnel.zeta, fresnel.z)));
    }
    let n = grid.len();
    let dx = (grid[n - 1] - grid[0]) / (n - 1) as f64;
    let amp = (fresnel.zeta / fresnel.z).sqrt() * dx;
    let h = CMat::from_fn(n, n, |i, j| {
        let d = grid[i] - grid[j];
        Complex64::from_polar(amp, fresnel.zeta * d * d / (2.0 * fresnel.z))
    });
    let svd = h.svd(true, true);
    match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => Ok(u * v_t),
        _ => Err(CvError::InvalidParameter("Fresnel kernel decomposition failed".into())),
    }
}

/// Shack-Hartmann POM on the span of `modes`.
pub fn sh_pom(modes: &[Vec<Complex64>], geometry: &ShGeometry) -> Result<Pom, CvError> {
    let n = geometry.grid.len();
    let d = modes.len();
    if d == 0 || geometry.pixels.is_empty() || n < 2 {
        return Err(CvError::InvalidParameter("need at least one mode, one pixel and two grid points".into()));
    }
    if modes.iter().any(|m| m.len() != n) || geometry.apertures.iter().any(|a| a.len() != n) {
        return Err(CvError::Dimension(format!("modes and apertures must have {n} samples")));
    }
    if let Some(&(k, j)) = geometry.pixels.iter().find(|&&(k, j)| k >= geometry.apertures.len() || j >= n) {
        return Err(CvError::Dimension(format!("pixel ({k}, {j}) is outside the geometry")));
    }
    let dx = geometry.dx();
    let sqrt_dx = dx.sqrt();
    // Columns φ_n = ψ_n √dx are orthonormal in ℂⁿ when the sampling is fine enough.
    let phi = CMat::from_fn(n, d, |i, m| modes[m][i] * sqrt_dx);
    let defect = (phi.adjoint() * &phi - CMat::identity(d, d)).iter().fold(0.0f64, |m, v| m.max(v.norm()));
    if defect > ORTHONORMALITY_TOL {
        return Err(CvError::GridTooCoarse(defect));
    }
    let u = fresnel_propagator(&geometry.grid, geometry.fresnel)?;
    let propagated: Vec<CMat> = geometry
        .apertures
        .iter()
        .map(|mask| {
            let masked = CMat::from_fn(n, d, |i, m| phi[(i, m)] * mask[i]);
            &u * masked
        })
        .collect();
    let outcomes = geometry
        .pixels
        .iter()
        .map(|&(k, j)| {
            let v = CVec::from_fn(d, |m, _| propagated[k][(j, m)].conj());
            HermitianOp::from_symmetrized(&(&v * v.adjoint()))
        })
        .collect();
    scaled_pom(outcomes)
}
