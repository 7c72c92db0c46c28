//! Hermite and Laguerre polynomials and the Fock-state quadrature wavefunctions.

use operators::{c64, Complex64};

/// Physicists' Hermite polynomial H_n(x) by the three-term recurrence.
pub fn hermite(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Associated Laguerre polynomial L_n^{(k)}(y).
pub fn laguerre(n: usize, k: f64, y: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 1.0 + k - y);
    if n == 0 {
        return prev;
    }
    for i in 1..n {
        let i = i as f64;
        let next = ((2.0 * i + 1.0 + k - y) * cur - (i + k) * prev) / (i + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// L_0^{(k)}(y), …, L_{count-1}^{(k)}(y) written into `out`.
pub(crate) fn laguerre_seq(k: f64, y: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = 1.0 + k - y;
    }
    for i in 1..out.len().saturating_sub(1) {
        let f = i as f64;
        out[i + 1] = ((2.0 * f + 1.0 + k - y) * out[i] - (f + k) * out[i - 1]) / (f + 1.0);
    }
}

/// ln 0!, ln 1!, …, ln (n−1)!.
pub(crate) fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut acc = 0.0;
    for k in 0..n {
        if k > 0 {
            acc += (k as f64).ln();
        }
        out.push(acc);
    }
    out
}

const RESCALE: f64 = 1e150;

/// ⟨n|x⟩ for n < `count`, real-valued.
///
/// Uses the normalized recurrence ψ_{n+1} = √(2/(n+1)) x ψ_n − √(n/(n+1)) ψ_{n−1}
/// with the Gaussian factor kept in a separate log scale, so large n and |x|
/// neither overflow nor flush to zero early.
pub fn fock_wavefunctions(count: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let mut log_scale = -0.5 * x * x - 0.25 * std::f64::consts::PI.ln();
    let (mut prev, mut cur) = (0.0, 1.0);
    out.push(log_scale.exp());
    for n in 0..count - 1 {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * cur - (nf / (nf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            prev /= RESCALE;
            cur /= RESCALE;
            log_scale += RESCALE.ln();
        }
        out.push(if cur == 0.0 { 0.0 } else { cur.signum() * (cur.abs().ln() + log_scale).exp() });
    }
    out
}

/// ⟨n|x_ϑ⟩ = e^{−inϑ} π^{−1/4}(2ⁿn!)^{−1/2} e^{−x²/2} H_n(x).
pub fn quadrature_wavefunction(n: usize, x: f64, theta: f64) -> Complex64 {
    let psi = fock_wavefunctions(n + 1, x)[n];
    let phase = -(n as f64) * theta;
    c64(psi * phase.cos(), psi * phase.sin())
}
