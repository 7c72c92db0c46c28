use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use cv::*;
use operators::random::hs_state;
use operators::{c64, CMat, Complex64, StateOp};
use pom::gram_matrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn space(d: usize) -> FockSpace {
    FockSpace::new(d).unwrap()
}

fn fock(n: usize, d: usize) -> StateOp {
    reference_state(ReferenceState::Fock { n }, space(d)).unwrap()
}

/// Equal mixture of |β e^{ikπ/2}⟩, k = 0..3.
fn coherent_mixture(beta: f64, d: usize) -> StateOp {
    let mut m = CMat::zeros(d, d);
    for k in 0..4 {
        let a = Complex64::from_polar(beta, k as f64 * FRAC_PI_2);
        m += reference_state(ReferenceState::Coherent { re: a.re, im: a.im }, space(d)).unwrap().matrix();
    }
    StateOp::normalized(&m).unwrap()
}

/// Four angles with five asymmetric sample points each.
fn homodyne_settings() -> Vec<QuadratureSetting> {
    (0..4).map(|k| QuadratureSetting::new(k as f64 * FRAC_PI_4, vec![-1.7, -0.6, 0.2, 0.9, 1.8])).collect()
}

fn sh_geometry() -> ShGeometry {
    ShGeometry::tiled(4.0, 256, 7, 5, Fresnel { zeta: 20.0, z: 1.0 }).unwrap()
}

/// W(x,p) = ∫dy e^{ipy}⟨x − y/2|ρ|x + y/2⟩ by trapezoidal quadrature.
fn wigner_by_integral(rho: &StateOp, x: f64, p: f64) -> f64 {
    let d = rho.dim();
    let (half, n) = (16.0, 3201);
    let dy = 2.0 * half / (n - 1) as f64;
    let mut total = 0.0;
    for i in 0..n {
        let y = -half + i as f64 * dy;
        let left = fock_wavefunctions(d, x - 0.5 * y);
        let right = fock_wavefunctions(d, x + 0.5 * y);
        let mut kernel = c64(0.0, 0.0);
        for m in 0..d {
            for k in 0..d {
                kernel += rho.matrix()[(m, k)] * left[m] * right[k];
            }
        }
        total += (Complex64::from_polar(1.0, p * y) * kernel).re * dy;
    }
    total
}

#[test]
fn quadrature_wavefunction_fixtures() {
    assert!((quadrature_wavefunction(0, 0.0, 0.0).re - PI.powf(-0.25)).abs() < 1e-15);
    assert!(quadrature_wavefunction(1, 0.0, 0.3).norm() < 1e-15);
    let (half, n) = (10.0, 200);
    let dx = 2.0 * half / (n - 1) as f64;
    for k in 0..=10 {
        let norm: f64 = (0..n).map(|i| quadrature_wavefunction(k, -half + i as f64 * dx, 0.7).norm_sqr()).sum::<f64>() * dx;
        assert!((norm - 1.0).abs() < 1e-6, "n = {k}: {norm}");
    }
}

#[test]
fn high_order_wavefunctions_stay_finite() {
    for x in [0.0, 3.0, 11.0, 25.0, 40.0] {
        let psi = fock_wavefunctions(65, x);
        assert!(psi.iter().all(|v| v.is_finite() && v.abs() < 1.0), "x = {x}");
    }
    // Near the classical turning point √(2n+1) the high orders dominate.
    assert!(fock_wavefunctions(65, 11.0)[64].abs() > 1e-3);
}

#[test]
fn homodyne_pom_ranks() {
    let settings = homodyne_settings();
    let p5 = homodyne_pom(space(5), &settings).unwrap();
    assert_eq!(p5.len(), 20);
    assert_eq!(gram_matrix(&p5).1, 20);
    assert!(!p5.is_complete());
    assert!(p5.total().max_eigenvalue().unwrap() <= 1.0 + 1e-9);
    assert!(p5.outcomes().iter().all(|o| o.eigenvalues().unwrap().iter().filter(|&&v| v > 1e-12).count() == 1));

    let p4 = homodyne_pom(space(4), &settings).unwrap();
    assert_eq!(gram_matrix(&p4).1, 16);
    assert!(p4.is_informationally_complete());

    let single = homodyne_pom(space(5), &[QuadratureSetting::new(0.4, vec![0.5])]).unwrap();
    assert_eq!((single.len(), gram_matrix(&single).1), (1, 1));
}

#[test]
fn wigner_fixtures() {
    assert!((wigner_fock(&fock(0, 6), PhasePoint::origin()) - 2.0).abs() < 1e-14);
    assert!((wigner_fock(&fock(1, 6), PhasePoint::origin()) + 2.0).abs() < 1e-14);
    // Vacuum: 2e^{−(x²+p²)}.
    let pt = PhasePoint::new(0.7, -0.4);
    assert!((wigner_fock(&fock(0, 6), pt) - 2.0 * (-0.65f64).exp()).abs() < 1e-14);
}

#[test]
fn wigner_matches_the_wavefunction_integral() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let rho = hs_state(6, &mut rng);
    for (x, p) in [(0.0, 0.0), (0.8, -0.3), (-1.2, 1.5), (2.0, 0.4)] {
        let series = wigner_fock(&rho, PhasePoint::new(x, p));
        let integral = wigner_by_integral(&rho, x, p);
        assert!((series - integral).abs() < 1e-8, "({x}, {p}): {series} vs {integral}");
    }
    // A coherent state is a Gaussian centred on (√2 Re β, √2 Im β).
    let beta = c64(0.6, -0.3);
    let rho = reference_state(ReferenceState::Coherent { re: beta.re, im: beta.im }, space(30)).unwrap();
    let (x0, p0) = (2f64.sqrt() * beta.re, 2f64.sqrt() * beta.im);
    for (x, p) in [(x0, p0), (x0 + 0.5, p0 - 0.2)] {
        let expect = 2.0 * (-(x - x0).powi(2) - (p - p0).powi(2)).exp();
        assert!((wigner_fock(&rho, PhasePoint::new(x, p)) - expect).abs() < 1e-10);
    }
}

#[test]
fn parity_identity_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..20 {
        let rho = hs_state(2 + i % 9, &mut rng);
        let w = wigner_fock(&rho, PhasePoint::origin());
        let parity = 2.0 * rho.op().trace_with(&FockSpace::new(rho.dim()).unwrap().parity());
        assert!((w - parity).abs() < 1e-9);
        assert!((w - wigner_origin_by_parity(&rho)).abs() < 1e-9);
    }
}

#[test]
fn r_function_fixtures() {
    let vac = fock(0, 8);
    for tau in [0.05, 0.3, 0.5, 0.9, 0.99] {
        assert!(nonclassicality_r(&vac, PhasePoint::origin(), tau).unwrap() > 0.0);
    }
    // ℛ(0;τ) for |1⟩ is −(1 − τ)/τ².
    let one = fock(1, 8);
    let r = nonclassicality_r(&one, PhasePoint::origin(), 0.4).unwrap();
    assert!((r + 0.6 / 0.16).abs() < 1e-12, "{r}");
    for tau in [0.0, 1.0, -0.1, f64::NAN] {
        assert!(nonclassicality_r(&vac, PhasePoint::origin(), tau).is_err());
    }
}

#[test]
fn r_at_one_half_is_the_wigner_function() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let rho = hs_state(7, &mut rng);
    for pt in square_grid(2.5, 6) {
        let r = nonclassicality_r(&rho, pt, 0.5).unwrap();
        assert!((r - wigner_fock(&rho, pt)).abs() < 1e-8);
    }
}

#[test]
fn laser_closed_form_matches_the_series() {
    for (mu, d) in [(4.0, 20), (1.5, 12)] {
        let rho = reference_state(ReferenceState::Laser { mu }, space(d)).unwrap();
        for tau in [0.2, 0.39, 0.5, 0.8] {
            for pt in square_grid(3.0, 5) {
                let series = nonclassicality_r(&rho, pt, tau).unwrap();
                let closed = laser_r(mu, d, pt, tau).unwrap();
                assert!((series - closed).abs() < 1e-9 * (1.0 + closed.abs()), "μ={mu} τ={tau} {pt:?}");
            }
        }
    }
}

#[test]
fn nonclassicality_depth_fixtures() {
    let cfg = DepthConfig::default();
    let classical = nonclassicality_depth(&coherent_mixture(0.2, 30), &cfg).unwrap();
    assert_eq!(classical.tau, 0.0);
    assert!(classical.half_width <= 0.01);

    let cat = reference_state(ReferenceState::Cat { alpha: 2.0 }, space(30)).unwrap();
    let cat = nonclassicality_depth(&cat, &cfg).unwrap();
    assert!(cat.tau >= 1.0 - 0.01, "{}", cat.tau);

    let one = nonclassicality_depth(&fock(1, 10), &cfg).unwrap();
    assert!(one.tau >= 0.5);

    // Truncated laser, μ = 4 on 20 levels: τ̃ ≈ 0.394.
    let laser = reference_state(ReferenceState::Laser { mu: 4.0 }, space(20)).unwrap();
    let laser = nonclassicality_depth(&laser, &cfg).unwrap();
    assert!((laser.tau - 0.394).abs() < 0.005, "{}", laser.tau);
}

#[test]
fn reference_state_fixtures() {
    let d = 20;
    let laser = reference_state(ReferenceState::Laser { mu: 4.0 }, space(d)).unwrap();
    let mut poisson: Vec<f64> = (0..d).map(|n| (-4.0f64).exp() * 4f64.powi(n as i32) / (1..=n).product::<usize>() as f64).collect();
    let total: f64 = poisson.iter().sum();
    poisson.iter_mut().for_each(|p| *p /= total);
    for n in 0..d {
        assert!((laser.matrix()[(n, n)].re - poisson[n]).abs() < 1e-14);
        for m in 0..d {
            if m != n {
                assert_eq!(laser.matrix()[(n, m)], c64(0.0, 0.0));
            }
        }
    }
    // A large truncation keeps the cat's normalization 2(1 + e^{−2α′²}) intact.
    let alpha: f64 = 1.0;
    let cat = reference_state(ReferenceState::Cat { alpha }, space(40)).unwrap();
    let amp0 = 2.0 * (-0.5 * alpha * alpha).exp() / (2.0 * (1.0 + (-2.0 * alpha * alpha).exp())).sqrt();
    assert!((cat.matrix()[(0, 0)].re - amp0 * amp0).abs() < 1e-12);
    assert!((1..40).step_by(2).all(|n| cat.matrix()[(n, n)].re.abs() < 1e-15));

    let vac = fock(0, 5);
    assert_eq!(vac.matrix()[(0, 0)], c64(1.0, 0.0));
    assert!((vac.matrix().trace().re - 1.0).abs() < 1e-15);
    assert!(reference_state(ReferenceState::Fock { n: 5 }, space(5)).is_err());
    assert!(FockSpace::new(1).is_err());
}

#[test]
fn displacement_fixtures() {
    let d = 20;
    let id = displacement(space(d), c64(0.0, 0.0)).unwrap();
    assert!((id.op - CMat::identity(d, d)).iter().all(|v| v.norm() < 1e-14));
    for alpha in [c64(1.0, 0.0), c64(0.3, -0.6), c64(-0.5, 0.5)] {
        let plus = displacement(space(d), alpha).unwrap();
        let minus = displacement(space(d), -alpha).unwrap();
        assert!((&plus.op * &minus.op - CMat::identity(d, d)).iter().all(|v| v.norm() < 1e-6));
        let overlap = plus.op[(0, 0)];
        assert!((overlap - c64((-0.5 * alpha.norm_sqr()).exp(), 0.0)).norm() < 1e-6);
        assert!(!plus.truncation_warning());
    }
    assert!(displacement(space(6), c64(2.0, 0.0)).unwrap().truncation_warning());
}

#[test]
fn tmd_fixtures() {
    let d = 8;
    let eff = port_efficiencies(&[0.5], &[1.0, 1.0]).unwrap();
    assert_eq!(eff, vec![0.5, 0.5]);
    let pom = tmd_pom(space(d), &eff, &[]).unwrap();
    assert!(pom.is_complete());
    let labels: Vec<String> = (0..4).map(|b| pattern_label(b, 2)).collect();
    assert_eq!(labels, ["00", "01", "10", "11"]);

    let probs = pom.probabilities(&fock(0, d));
    assert!((probs[0] - 1.0).abs() < 1e-14);
    let probs = pom.probabilities(&fock(1, d));
    assert!((probs[1] - 0.5).abs() < 1e-14 && (probs[2] - 0.5).abs() < 1e-14);
    assert!(probs[0].abs() < 1e-14 && probs[3].abs() < 1e-14);

    // Four ports, 16 patterns, lossy detectors, two displacements.
    let eff = port_efficiencies(&[0.7, 0.6, 0.5], &[0.9, 0.8, 0.85, 0.7]).unwrap();
    let pom = tmd_pom(space(d), &eff, &[c64(0.0, 0.0), c64(0.4, 0.2)]).unwrap();
    assert_eq!(pom.len(), 32);
    assert!(pom.total().max_abs_diff(&operators::HermitianOp::identity(d)) < 1e-10);
    assert!(tmd_pom(space(d), &[0.2; 5], &[]).is_err());
}

#[test]
fn port_efficiency_formula() {
    let t = [0.7, 0.6, 0.5];
    let eta = [0.9, 0.8, 0.85, 0.7];
    let got = port_efficiencies(&t, &eta).unwrap();
    let expect = [0.9 * 0.3, 0.8 * 0.4 * 0.7, 0.85 * 0.5 * 0.7 * 0.6, 0.7 * 0.7 * 0.6 * 0.5];
    for (g, e) in got.iter().zip(expect) {
        assert!((g - e).abs() < 1e-15);
    }
    // Perfect detectors route every photon somewhere.
    assert!((port_efficiencies(&t, &[1.0; 4]).unwrap().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    assert!(port_efficiencies(&t, &eta[..3]).is_err());
}

#[test]
fn shack_hartmann_ranks() {
    let geom = sh_geometry();
    assert_eq!(geom.pixels.len(), 35);
    let p5 = sh_pom(&gaussian_modes(5, &geom.grid, 1.5).unwrap(), &geom).unwrap();
    assert_eq!(gram_matrix(&p5).1, 25);
    assert!(p5.is_informationally_complete());
    let p9 = sh_pom(&gaussian_modes(9, &geom.grid, 1.5).unwrap(), &geom).unwrap();
    assert_eq!(gram_matrix(&p9).1, 35);
    assert!(!p9.is_informationally_complete());
}

#[test]
fn single_mode_single_aperture() {
    let geom = ShGeometry::tiled(4.0, 128, 1, 3, Fresnel { zeta: 5.0, z: 1.0 }).unwrap();
    let modes = gaussian_modes(1, &geom.grid, 1.5).unwrap();
    let pom = sh_pom(&modes, &geom).unwrap();
    assert_eq!(pom.dim(), 1);
    assert!(pom.outcomes().iter().all(|o| o.matrix()[(0, 0)].re > 0.0));
}

#[test]
fn poorly_sampled_modes_are_rejected() {
    // Fock wavefunctions on a window that cuts off their tails.
    let geom = ShGeometry::tiled(1.5, 64, 2, 2, Fresnel { zeta: 20.0, z: 1.0 }).unwrap();
    let modes: Vec<Vec<Complex64>> =
        (0..3).map(|n| geom.grid.iter().map(|&x| c64(fock_wavefunctions(3, x)[n], 0.0)).collect()).collect();
    assert!(matches!(sh_pom(&modes, &geom), Err(CvError::GridTooCoarse(_))));
    let good = gaussian_modes(3, &geom.grid, 1.0).unwrap();
    assert!(sh_pom(&good, &geom).is_ok());
}
