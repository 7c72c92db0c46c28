use operators::pauli::{sigma_x, sigma_z};
use operators::random::{haar_unitary, hs_state, random_hermitian};
use operators::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bell_minus() -> Ket {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Ket::from_slice(&[c64(0., 0.), c64(s, 0.), c64(-s, 0.), c64(0., 0.)])
}

fn bell_plus() -> Ket {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Ket::from_slice(&[c64(s, 0.), c64(0., 0.), c64(0., 0.), c64(s, 0.)])
}

#[test]
fn tensor_identities() {
    let i4 = tensor(&HermitianOp::identity(2), &HermitianOp::identity(2));
    assert!(i4.max_abs_diff(&HermitianOp::identity(4)) < 1e-15);
    let zz = tensor(&sigma_z(), &sigma_z());
    assert!(zz.max_abs_diff(&HermitianOp::from_diagonal(&[1., -1., -1., 1.])) < 1e-15);
}

#[test]
fn tensor_of_tetrahedron_legs_has_quarter_trace() {
    // (1 + a·σ)/4 with a = (1,1,1)/√3
    let a = 1.0 / 3f64.sqrt();
    let p = &(&HermitianOp::identity(2) + &(&(&sigma_x() * a) + &(&sigma_z() * a)))
        + &(&operators::pauli::sigma_y() * a);
    let p = p.scale(0.25);
    assert!((p.trace() - 0.5).abs() < 1e-15);
    assert!((tensor(&p, &p).trace() - 0.25).abs() < 1e-15);
}

#[test]
fn partial_transpose_of_singlet() {
    let psi = bell_minus().projector();
    let pt = partial_transpose(&psi, 1, (2, 2)).unwrap();
    assert!((pt.min_eigenvalue().unwrap() + 0.5).abs() < 1e-12);
    let mixed = HermitianOp::identity(4).scale(0.25);
    assert_eq!(partial_transpose(&mixed, 0, (2, 2)).unwrap(), mixed);
}

#[test]
fn partial_transpose_of_separable_state_is_positive() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut sep = CMat::zeros(4, 4);
    for _ in 0..5 {
        let a = hs_state(2, &mut rng);
        let b = hs_state(2, &mut rng);
        sep += kron(a.matrix(), b.matrix()) * c64(0.2, 0.0);
    }
    let sep = HermitianOp::from_symmetrized(&sep);
    for sub in 0..2 {
        let pt = partial_transpose(&sep, sub, (2, 2)).unwrap();
        assert!(pt.min_eigenvalue().unwrap() >= -1e-12);
    }
}

#[test]
fn partial_trace_of_bell_state() {
    let psi = bell_plus().projector();
    let half = HermitianOp::identity(2).scale(0.5);
    assert!(partial_trace(&psi, 1, (2, 2)).unwrap().max_abs_diff(&half) < 1e-15);
    assert!(partial_trace(&psi, 0, (2, 2)).unwrap().max_abs_diff(&half) < 1e-15);
}

#[test]
fn partial_trace_of_product_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a = hs_state(2, &mut rng);
    let b = hs_state(3, &mut rng);
    let ab = tensor(a.op(), b.op());
    assert!(partial_trace(&ab, 0, (2, 3)).unwrap().max_abs_diff(a.op()) < 1e-14);
    assert!(partial_trace(&ab, 1, (2, 3)).unwrap().max_abs_diff(b.op()) < 1e-14);
}

#[test]
fn partial_ops_reject_mismatched_dims() {
    let a = HermitianOp::identity(4);
    assert!(matches!(partial_trace(&a, 0, (2, 3)), Err(OpError::DimensionMismatch { .. })));
    assert!(matches!(partial_transpose(&a, 1, (3, 3)), Err(OpError::DimensionMismatch { .. })));
}

#[test]
fn matrix_functions() {
    let e = expm(&HermitianOp::zeros(3)).unwrap();
    assert!(e.max_abs_diff(&HermitianOp::identity(3)) < 1e-15);
    let l = logm(&HermitianOp::from_diagonal(&[0.5, 0.5])).unwrap();
    let ln2 = 2f64.ln();
    assert!(l.max_abs_diff(&HermitianOp::from_diagonal(&[-ln2, -ln2])) < 1e-15);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rho = hs_state(4, &mut rng);
    let inv = inverse(rho.op()).unwrap();
    let prod = rho.matrix() * inv.matrix();
    assert!((prod - CMat::identity(4, 4)).iter().all(|z| z.norm() < 1e-10));
}

#[test]
fn log_floor_keeps_singular_states_finite() {
    let p = Ket::basis(2, 0).projector();
    let l = logm(&p).unwrap();
    assert!((l.matrix()[(1, 1)].re - 1e-12f64.ln()).abs() < 1e-9);
    assert!(l.matrix()[(0, 0)].re.abs() < 1e-12);
}

#[test]
fn distances() {
    let a = StateOp::pure(&Ket::basis(2, 0));
    let b = StateOp::pure(&Ket::basis(2, 1));
    assert!(trace_class_distance(a.op(), a.op()).unwrap() < 1e-15);
    assert!((trace_class_distance(a.op(), b.op()).unwrap() - 1.0).abs() < 1e-14);
    assert!(trace_class_distance(a.op(), &HermitianOp::identity(3)).is_err());
}

#[test]
fn entropies() {
    assert!(von_neumann_entropy(&StateOp::pure(&Ket::basis(3, 1))).abs() < 1e-14);
    assert!((von_neumann_entropy(&StateOp::maximally_mixed(5)) - 5f64.ln()).abs() < 1e-12);
    let s = von_neumann_entropy(&StateOp::new(HermitianOp::from_diagonal(&[0.75, 0.25])).unwrap());
    let oracle = -0.75 * 0.75f64.ln() - 0.25 * 0.25f64.ln();
    assert!((s - oracle).abs() < 1e-14);
    assert!((s - 0.5623).abs() < 1e-4);
}

#[test]
fn fidelities() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = hs_state(3, &mut rng);
    assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-9);
    let p0 = StateOp::pure(&Ket::basis(2, 0));
    let p1 = StateOp::pure(&Ket::basis(2, 1));
    assert!(fidelity(&p0, &p1).unwrap() < 1e-12);
    assert!((fidelity(&p0, &StateOp::maximally_mixed(2)).unwrap() - 0.5).abs() < 1e-12);
    let b = hs_state(3, &mut rng);
    assert!((fidelity(&a, &b).unwrap() - fidelity(&b, &a).unwrap()).abs() < 1e-9);
}

#[test]
fn state_validation() {
    assert!(StateOp::new(HermitianOp::from_diagonal(&[1.2, -0.2])).is_err());
    assert!(StateOp::new(HermitianOp::from_diagonal(&[0.6, 0.6])).is_err());
    let nh = CMat::from_row_slice(2, 2, &[c64(1., 0.), c64(1., 0.), c64(0., 0.), c64(0., 0.)]);
    assert!(matches!(HermitianOp::new(nh), Err(OpError::NotHermitian { .. })));
}

#[test]
fn bloch_round_trip() {
    let r = [0.3, -0.2, 0.5];
    let rho = StateOp::from_bloch(r).unwrap();
    let back = rho.bloch();
    for i in 0..3 {
        assert!((back[i] - r[i]).abs() < 1e-15);
    }
}

#[test]
fn serde_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let rho = hs_state(3, &mut rng);
    let json = serde_json::to_string(&rho).unwrap();
    let back: StateOp = serde_json::from_str(&json).unwrap();
    assert!(back.op().max_abs_diff(rho.op()) < 1e-15);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["dim"], 3);
    assert_eq!(v["entries"].as_array().unwrap().len(), 9);
    let bad = r#"{"dim":2,"entries":[[1,0],[0,0],[0,0]]}"#;
    assert!(serde_json::from_str::<HermitianOp>(bad).is_err());
}

#[test]
fn random_generators_are_well_formed() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let u = haar_unitary(4, &mut rng);
    assert!((u.adjoint() * &u - CMat::identity(4, 4)).iter().all(|z| z.norm() < 1e-12));
    let h = random_hermitian(3, 5.0, &mut rng);
    let r = h.eigenvalues().unwrap().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    assert!((r - 5.0).abs() < 1e-12);
}
