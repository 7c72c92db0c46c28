//! Phase-space functions: the Wigner function, the ℛ(τ) family between the P
//! and Q functions, and the nonclassicality depth.
//!
//! All three share one Fock-basis series. For ρ_mn with n< = min(m,n),
//! Δ = |m − n| and z = x + ip the generic term is
//!
//!   A (−1)^{n<} √(n<!/n>!) s^Δ q^{n>} |z|^Δ e^{∓iΔ arg z} e^{−u|z|²} L_{n<}^{(Δ)}(v|z|²)
//!
//! with the lower sign for m > n. The Wigner function uses A = 2, s = √2,
//! q = u = 1, v = 2, so W(0,0) = 2 for the vacuum and ∫W dx dp/(2π) = 1.
//! ℛ(τ) uses A = 1/τ, s = 1/(√2(1−τ)), q = (1−τ)/τ, u = 1/(2τ),
//! v = 1/(2τ(1−τ)), which reduces to W at τ = 1/2.

use operators::{CMat, StateOp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::special::{laguerre, laguerre_seq, ln_factorials};
use crate::CvError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: f64,
    pub p: f64,
}

impl PhasePoint {
    pub fn new(x: f64, p: f64) -> Self {
        Self { x, p }
    }

    pub fn origin() -> Self {
        Self { x: 0.0, p: 0.0 }
    }

    /// |α|² = x² + p².
    pub fn norm_sqr(&self) -> f64 {
        self.x * self.x + self.p * self.p
    }
}

#[derive(Debug, Clone, Copy)]
struct Kernel {
    ln_a: f64,
    ln_s: f64,
    ln_q: f64,
    u: f64,
    v: f64,
}

impl Kernel {
    fn wigner() -> Self {
        Self { ln_a: 2f64.ln(), ln_s: 0.5 * 2f64.ln(), ln_q: 0.0, u: 1.0, v: 2.0 }
    }

    fn r(tau: f64) -> Self {
        Self {
            ln_a: -tau.ln(),
            ln_s: -(2f64.sqrt() * (1.0 - tau)).ln(),
            ln_q: ((1.0 - tau) / tau).ln(),
            u: 0.5 / tau,
            v: 0.5 / (tau * (1.0 - tau)),
        }
    }
}

/// Point-independent part of the series, ln|coefficient| for every (n<, Δ).
struct Series {
    dim: usize,
    kernel: Kernel,
    /// ln(A √(k!/(k+Δ)!) s^Δ q^{k+Δ}), indexed [Δ][k].
    ln_coef: Vec<Vec<f64>>,
    /// exp(ln_coef) when every entry stays far from overflow.
    coef: Option<Vec<Vec<f64>>>,
    /// ρ_{k+Δ,k}, indexed [Δ][k].
    rho: Vec<Vec<(f64, f64)>>,
}

impl Series {
    fn new(rho: &CMat, kernel: Kernel) -> Self {
        let dim = rho.nrows();
        let lf = ln_factorials(dim);
        let ln_coef: Vec<Vec<f64>> = (0..dim)
            .map(|d| {
                (0..dim - d)
                    .map(|k| kernel.ln_a + 0.5 * (lf[k] - lf[k + d]) + d as f64 * kernel.ln_s + (k + d) as f64 * kernel.ln_q)
                    .collect()
            })
            .collect();
        let rho = (0..dim).map(|d| (0..dim - d).map(|k| (rho[(k + d, k)].re, rho[(k + d, k)].im)).collect()).collect();
        let max = ln_coef.iter().flatten().fold(f64::NEG_INFINITY, |m: f64, &v| m.max(v));
        let coef = (max < 600.0).then(|| ln_coef.iter().map(|row| row.iter().map(|v| v.exp()).collect()).collect());
        Self { dim, kernel, ln_coef, coef, rho }
    }

    fn eval(&self, pt: PhasePoint, lag: &mut [f64]) -> f64 {
        let r2 = pt.norm_sqr();
        let r = r2.sqrt();
        let theta = pt.p.atan2(pt.x);
        let y = self.kernel.v * r2;
        let mut total = 0.0;
        for d in 0..self.dim {
            if d > 0 && r == 0.0 {
                break;
            }
            let ln_point = if d == 0 { 0.0 } else { d as f64 * r.ln() } - self.kernel.u * r2;
            let count = self.dim - d;
            laguerre_seq(d as f64, y, &mut lag[..count]);
            let (c, s) = ((d as f64 * theta).cos(), (d as f64 * theta).sin());
            let scale = ln_point.exp();
            let mut partial = 0.0;
            for k in 0..count {
                let (re, im) = self.rho[d][k];
                // ρ e^{−iΔθ}, doubled for the Hermitian partner when Δ > 0.
                let angular = if d == 0 { re } else { 2.0 * (re * c + im * s) };
                if angular == 0.0 {
                    continue;
                }
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let magnitude = match &self.coef {
                    Some(coef) => coef[d][k] * scale,
                    None => (self.ln_coef[d][k] + ln_point).exp(),
                };
                partial += sign * magnitude * lag[k] * angular;
            }
            total += partial;
        }
        total
    }
}

/// W(x,p) of a truncated Fock-space state.
pub fn wigner_fock(rho: &StateOp, pt: PhasePoint) -> f64 {
    let series = Series::new(rho.matrix(), Kernel::wigner());
    let mut lag = vec![0.0; rho.dim()];
    series.eval(pt, &mut lag)
}

/// W evaluated on every point, in parallel.
pub fn wigner_points(rho: &StateOp, points: &[PhasePoint]) -> Vec<f64> {
    let series = Series::new(rho.matrix(), Kernel::wigner());
    points.par_iter().map_init(|| vec![0.0; rho.dim()], |lag, &pt| series.eval(pt, lag)).collect()
}

/// W(0,0) = 2 tr{ρ𝒫} with the parity operator 𝒫 = diag((−1)ⁿ).
pub fn wigner_origin_by_parity(rho: &StateOp) -> f64 {
    2.0 * (0..rho.dim()).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 } * rho.matrix()[(n, n)].re).sum::<f64>()
}

fn check_tau(tau: f64) -> Result<(), CvError> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(CvError::InvalidParameter(format!("τ = {tau} is outside (0, 1)")));
    }
    Ok(())
}

/// ℛ(x,p;τ), the τ-parametrized quasi-distribution normalized like the
/// Wigner function; τ = 1/2 gives W and τ → 1 the Husimi function.
pub fn nonclassicality_r(rho: &StateOp, pt: PhasePoint, tau: f64) -> Result<f64, CvError> {
    check_tau(tau)?;
    let series = Series::new(rho.matrix(), Kernel::r(tau));
    let mut lag = vec![0.0; rho.dim()];
    Ok(series.eval(pt, &mut lag))
}

/// Closed form of ℛ for the truncated laser state with mean μ on `dim` levels:
///
///   e^{−|α|²/2τ} / (τ Σ_{n<D} μⁿ/n!) · Σ_{n<D} (−μ(1−τ)/τ)ⁿ/n! · L_n(|α|²/(2τ(1−τ))).
pub fn laser_r(mu: f64, dim: usize, pt: PhasePoint, tau: f64) -> Result<f64, CvError> {
    check_tau(tau)?;
    let r2 = pt.norm_sqr();
    let y = r2 / (2.0 * tau * (1.0 - tau));
    let lf = ln_factorials(dim);
    let mut z = 0.0;
    let mut sum = 0.0;
    for (n, lfn) in lf.iter().enumerate() {
        let w = (n as f64 * mu.ln() - lfn).exp();
        z += w;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * w * ((1.0 - tau) / tau).powi(n as i32) * laguerre(n, 0.0, y);
    }
    Ok((-r2 / (2.0 * tau)).exp() / (tau * z) * sum)
}

/// Square phase-space grid restricted to the disk |α| ≤ `extent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DepthConfig {
    /// Grid half-width; points outside |α| ≤ extent are dropped.
    pub extent: f64,
    /// Points per axis.
    pub points: usize,
    /// Interior τ grid points i/(tau_points + 1).
    pub tau_points: usize,
    /// ℛ counts as negative below −threshold.
    pub threshold: f64,
    pub bisection_steps: usize,
}

impl Default for DepthConfig {
    fn default() -> Self {
        Self { extent: 5.0, points: 101, tau_points: 99, threshold: 1e-9, bisection_steps: 20 }
    }
}

impl DepthConfig {
    pub fn grid(&self) -> Vec<PhasePoint> {
        square_grid(self.extent, self.points)
            .into_iter()
            .filter(|pt| pt.norm_sqr() <= self.extent * self.extent * (1.0 + 1e-12))
            .collect()
    }

    pub fn tau_grid(&self) -> Vec<f64> {
        (1..=self.tau_points).map(|i| i as f64 / (self.tau_points + 1) as f64).collect()
    }
}

/// `points` × `points` grid on [−extent, extent]², x fastest.
pub fn square_grid(extent: f64, points: usize) -> Vec<PhasePoint> {
    let axis: Vec<f64> = if points < 2 {
        vec![0.0]
    } else {
        (0..points).map(|i| -extent + 2.0 * extent * i as f64 / (points - 1) as f64).collect()
    };
    axis.iter().flat_map(|&p| axis.iter().map(move |&x| PhasePoint { x, p })).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthResult {
    /// τ̃, the smallest τ above which ℛ ≥ 0 on the grid.
    pub tau: f64,
    /// Half-width of the bracket that contains τ̃.
    pub half_width: f64,
    /// (τ, min over the grid of ℛ) for every τ grid point that was evaluated.
    pub scan: Vec<(f64, f64)>,
}

/// min over `grid` of ℛ(·;τ).
pub fn min_r(rho: &StateOp, grid: &[PhasePoint], tau: f64) -> Result<f64, CvError> {
    check_tau(tau)?;
    let series = Series::new(rho.matrix(), Kernel::r(tau));
    Ok(grid
        .par_iter()
        .map_init(|| vec![0.0; rho.dim()], |lag, &pt| series.eval(pt, lag))
        .reduce(|| f64::INFINITY, f64::min))
}

/// Nonclassicality depth τ̃.
///
/// The τ grid is scanned downward until ℛ first dips below −threshold; τ̃
/// is then bisected between that point and its upper neighbour (τ = 1 above
/// the top grid point, where ℛ is the Husimi function). A state with ℛ ≥ 0
/// at every grid τ gets τ̃ = 0 with the lowest grid τ as its half-width.
pub fn nonclassicality_depth(rho: &StateOp, cfg: &DepthConfig) -> Result<DepthResult, CvError> {
    if cfg.points < 2 || cfg.tau_points == 0 || !(cfg.extent > 0.0) {
        return Err(CvError::InvalidParameter("depth grid needs extent > 0, ≥ 2 points and ≥ 1 τ value".into()));
    }
    let grid = cfg.grid();
    let taus = cfg.tau_grid();
    let mut scan = Vec::new();
    for (i, &tau) in taus.iter().enumerate().rev() {
        let m = min_r(rho, &grid, tau)?;
        scan.push((tau, m));
        if m < -cfg.threshold {
            let mut lo = tau;
            let mut hi = taus.get(i + 1).copied().unwrap_or(1.0);
            for _ in 0..cfg.bisection_steps {
                let mid = 0.5 * (lo + hi);
                if min_r(rho, &grid, mid)? < -cfg.threshold {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            scan.reverse();
            return Ok(DepthResult { tau: hi, half_width: 0.5 * (hi - lo), scan });
        }
    }
    scan.reverse();
    Ok(DepthResult { tau: 0.0, half_width: taus[0], scan })
}
