use operators::pauli::{id2, x, y, z};
use operators::random::hs_state;
use operators::{c64, kron, trace_product_re, CMat, HermitianOp, Ket, StateOp};
use pom::{build_standard, Pom, StandardPom};
use process_est::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn psic2() -> Pom {
    build_standard(StandardPom::ProductSic(2)).unwrap()
}

fn basis_state(dim: usize, i: usize) -> StateOp {
    StateOp::pure(&Ket::basis(dim, i))
}

fn close(a: &CMat, b: &CMat, tol: f64) -> bool {
    a.iter().zip(b.iter()).all(|(p, q)| (p - q).norm() < tol)
}

fn quick() -> StrategyConfig {
    StrategyConfig {
        mlme: QptConfig { precision: 1e-5, max_iter: 3000, ..Default::default() },
        projected: QptConfig { precision: 1e-4, max_iter: 200, ..Default::default() },
        mpl: MplConfig { starts: 3, precision_choi: 1e-4, max_iter: 1500, ..Default::default() },
        ..Default::default()
    }
}

#[test]
fn choi_ranks() {
    let id = choi_from_kraus(&Channel::identity(2));
    assert_eq!(id.rank(1e-9).unwrap(), 1);
    // D_i|Ψ₊⟩⟨Ψ₊| has entries 1 at (00,00), (00,11), (11,00), (11,11).
    let mut expected = CMat::zeros(4, 4);
    for (r, c) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
        expected[(r, c)] = c64(1.0, 0.0);
    }
    assert!(close(id.matrix(), &expected, 1e-14));
    assert!((id.matrix().trace().re - 2.0).abs() < 1e-14);

    assert_eq!(choi_from_kraus(&cnot()).rank(1e-9).unwrap(), 1);
    assert_eq!(choi_from_kraus(&cnot_imperfect(0.1).unwrap()).rank(1e-9).unwrap(), 2);
    assert_eq!(choi_from_kraus(&cnot_random(0.1, 3).unwrap()).rank(1e-9).unwrap(), 16);
}

#[test]
fn invalid_kraus_sets_are_rejected() {
    let half = CMat::identity(2, 2) * c64(0.5, 0.0);
    assert!(matches!(Channel::new(vec![half]), Err(ProcError::NotTracePreserving(_))));
    let depolarizing = HermitianOp::from_symmetrized(&(CMat::identity(4, 4) * c64(0.5, 0.0)));
    assert!(ChoiOp::new(depolarizing, 2, 2).is_ok());
    let doubled = HermitianOp::from_symmetrized(&CMat::identity(4, 4));
    assert!(matches!(ChoiOp::new(doubled, 2, 2), Err(ProcError::NotChoi(_))));
}

#[test]
fn channel_action_fixtures() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rho = hs_state(2, &mut rng);
    let id = choi_from_kraus(&Channel::identity(2));
    assert!(close(apply_channel(&id, &rho).unwrap().matrix(), rho.matrix(), 1e-14));

    let out = apply_channel(&choi_from_kraus(&cnot()), &basis_state(4, 2)).unwrap();
    assert!(close(out.matrix(), basis_state(4, 3).matrix(), 1e-14));

    let out = apply_channel(&choi_from_kraus(&cnot_imperfect(0.1).unwrap()), &basis_state(4, 2)).unwrap();
    let expected = basis_state(4, 3).matrix() * c64(0.9, 0.0) + basis_state(4, 2).matrix() * c64(0.1, 0.0);
    assert!(close(out.matrix(), &expected, 1e-14));

    let wrong = basis_state(2, 0);
    assert!(apply_channel(&choi_from_kraus(&cnot()), &wrong).is_err());
}

fn mixture_entropy(w: f64) -> f64 {
    -w * w.ln() - (1.0 - w) * (1.0 - w).ln()
}

#[test]
fn channel_entropy_fixtures() {
    assert!(channel_entropy(&choi_from_kraus(&cnot())).abs() < 1e-9);
    assert!(channel_entropy(&choi_from_kraus(&toffoli())).abs() < 1e-9);

    // CNOT and CNOT·(Z⊗1) are orthogonal Kraus operators, so the spectrum of
    // E/D_i is the pair of weights.
    let zc = cnot_unitary() * kron(&z(), &id2());
    let pair = Channel::new(vec![cnot_unitary() * c64(0.9f64.sqrt(), 0.0), zc * c64(0.1f64.sqrt(), 0.0)]).unwrap();
    let s = channel_entropy(&choi_from_kraus(&pair));
    assert!((s - mixture_entropy(0.9)).abs() < 1e-12);
    assert!((s - 0.3251).abs() < 1e-4);

    // The identity admixture overlaps CNOT: ⟨ψ_U|ψ_1⟩ = tr U/D_i = 1/2, so
    // the weights are the eigenvalues of [[0.9, 0.15], [0.15, 0.1]].
    let w = 0.5 + (0.16f64 + 0.0225).sqrt();
    let s = channel_entropy(&choi_from_kraus(&cnot_imperfect(0.1).unwrap()));
    assert!((s - mixture_entropy(w)).abs() < 1e-12);

    let paulis = [id2(), x(), y(), z()].map(|p| p * c64(0.5, 0.0));
    let depol = Channel::new(paulis.to_vec()).unwrap();
    assert!((channel_entropy(&choi_from_kraus(&depol)) - 4f64.ln()).abs() < 1e-12);
}

#[test]
fn probabilities_sum_to_one_over_l() {
    let e = choi_from_kraus(&cnot_random(0.2, 1).unwrap());
    let data = QptData::exact(&e, product_pool()[..5].to_vec(), psic2(), 100.0).unwrap();
    for row in data.probabilities(&e).unwrap() {
        assert!((row.iter().sum::<f64>() - 0.2).abs() < 1e-12);
    }
    assert!(ChoiOp::maximally_mixed(4, 4).tp_defect() < 1e-15);
}

#[test]
fn noiseless_cnot_recovery() {
    let truth = choi_from_kraus(&cnot());
    let inputs = sic_inputs(2).unwrap();
    let cfg = QptConfig { lambda: 1e-6, ..Default::default() };

    let full = QptData::exact(&truth, inputs.clone(), psic2(), 1e6).unwrap();
    let r = mlme_qpt(&full, &cfg).unwrap();
    assert!(r.estimator.distance(&truth).unwrap() <= 1e-3);
    assert!(r.max_tp_defect <= 1e-7);

    let half = QptData::exact(&truth, inputs[..8].to_vec(), psic2(), 1e6).unwrap();
    let r = mlme_qpt(&half, &QptConfig::default()).unwrap();
    assert!(r.estimator.distance(&truth).unwrap() <= 0.05);
    assert!(r.residual <= 1e-7);
}

#[test]
fn single_input_stays_trace_preserving() {
    let truth = choi_from_kraus(&cnot_imperfect(0.1).unwrap());
    let data = QptData::exact(&truth, product_pool()[..1].to_vec(), psic2(), 1e4).unwrap();
    let r = mlme_qpt(&data, &QptConfig::default()).unwrap();
    assert!(r.max_tp_defect <= 1e-7);
    assert!(r.estimator.tp_defect() <= 1e-7);
    // One input pins down one output; the plateau leaves E far from the truth.
    assert!(r.estimator.distance(&truth).unwrap() > 0.3);
    let out = apply_channel(&r.estimator, &product_pool()[0]).unwrap();
    assert!(close(out.matrix(), apply_channel(&truth, &product_pool()[0]).unwrap().matrix(), 1e-2));
}

#[test]
fn incomplete_pom_is_routed_to_the_imperfect_variant() {
    let pom = Pom::subnormalized(psic2().outcomes().iter().map(|o| o.scale(0.5)).collect()).unwrap();
    let e = choi_from_kraus(&cnot());
    let data = QptData::exact(&e, product_pool()[..2].to_vec(), pom, 100.0).unwrap();
    assert!(matches!(mlme_qpt(&data, &QptConfig::default()), Err(ProcError::InvalidData(_))));
}

#[test]
fn unit_efficiencies_reproduce_the_perfect_trajectory() {
    let truth = choi_from_kraus(&cnot_imperfect(0.1).unwrap());
    let data = QptData::simulate(&truth, product_pool()[..6].to_vec(), psic2(), 2000, 4).unwrap();
    let cfg = QptConfig { max_iter: 400, ..Default::default() };
    let a = best_effort(mlme_qpt(&data, &cfg)).unwrap();
    let b = best_effort(mlme_qpt_imperfect(&data, &[1.0; 16], &cfg)).unwrap();
    assert_eq!(a.iterations, b.iterations);
    assert!(close(a.estimator.matrix(), b.estimator.matrix(), 1e-9));
    for (p, q) in a.objective_trace.iter().zip(&b.objective_trace) {
        assert!((p - q).abs() < 1e-9 * (1.0 + p.abs()));
    }
}

#[test]
fn uniform_efficiency_matches_perfect_detection() {
    let truth = choi_from_kraus(&cnot_imperfect(0.1).unwrap());
    let pom = psic2();
    let inputs = product_pool()[..6].to_vec();
    let perfect = QptData::simulate(&truth, inputs.clone(), pom.clone(), 2000, 9).unwrap();
    // The detected counts are the same multinomial draw thinned by 0.8 in
    // expectation; using the scaled counts isolates the normalization.
    let detected: Vec<Vec<f64>> = perfect.counts().iter().map(|r| r.iter().map(|n| 0.8 * n).collect()).collect();
    let lossy = QptData::new(inputs, pom, detected).unwrap();
    let cfg = QptConfig::default();
    let a = mlme_qpt(&perfect, &cfg).unwrap();
    let b = mlme_qpt_imperfect(&lossy, &[0.8; 16], &cfg).unwrap();
    assert!(a.estimator.distance(&b.estimator).unwrap() <= 1e-3);
}

#[test]
fn dead_outcome_still_converges() {
    let truth = choi_from_kraus(&cnot_imperfect(0.1).unwrap());
    let pom = psic2();
    let inputs = product_pool()[..6].to_vec();
    let mut eta = [1.0; 16];
    eta[5] = 0.0;
    let exact = QptData::exact(&truth, inputs.clone(), pom.clone(), 1e4).unwrap();
    let counts: Vec<Vec<f64>> =
        exact.counts().iter().map(|r| r.iter().zip(&eta).map(|(n, e)| n * e).collect()).collect();
    let data = QptData::new(inputs.clone(), pom.clone(), counts).unwrap();
    let r = mlme_qpt_imperfect(&data, &eta, &QptConfig::default()).unwrap();
    assert!(r.converged);
    assert!(r.estimator.tp_defect() <= 1e-7);
    let l = inputs.len() as f64;
    for rho in &inputs {
        let out = apply_channel(&r.estimator, rho).unwrap();
        let detected: f64 =
            pom.outcomes().iter().zip(&eta).map(|(o, e)| e * trace_product_re(o.matrix(), out.matrix()) / l).sum();
        assert!(detected < 1.0 / l);
    }
}

#[test]
fn mpl_after_one_input_gives_valid_pairs() {
    let prior = choi_from_kraus(&Channel::identity(2));
    let pom = build_standard(StandardPom::Tetrahedron).unwrap();
    let data = QptData::exact(&prior, vec![basis_state(2, 0)], pom, 100.0).unwrap();
    let cfg = MplConfig { starts: 3, ..Default::default() };
    let out = mpl_optimize(&data, &prior, &cfg).unwrap();
    assert!(!out.pairs.is_empty());
    for p in out.pairs.iter().chain(&out.unconverged) {
        assert!((p.state.matrix().trace().re - 1.0).abs() < 1e-12);
        assert!(p.state.op().min_eigenvalue().unwrap() > -1e-9);
        assert!(p.choi.tp_defect() <= 1e-7);
    }
    for p in &out.pairs {
        assert!(p.residual_choi <= cfg.precision_choi && p.residual_state <= cfg.precision_state);
    }
}

#[test]
fn mpl_is_deterministic() {
    let truth = choi_from_kraus(&cnot_imperfect(0.1).unwrap());
    let prior = choi_from_kraus(&cnot());
    let data = QptData::simulate(&truth, product_pool()[..2].to_vec(), psic2(), 1000, 2).unwrap();
    let cfg = MplConfig { starts: 3, max_iter: 300, seed: 11, ..Default::default() };
    let a = mpl_optimize(&data, &prior, &cfg).unwrap();
    let b = mpl_optimize(&data, &prior, &cfg).unwrap();
    let all = |o: &MplOutcome| o.pairs.iter().chain(&o.unconverged).map(|p| (p.start, p.objective)).collect::<Vec<_>>();
    assert_eq!(all(&a), all(&b));
    for (p, q) in a.pairs.iter().chain(&a.unconverged).zip(b.pairs.iter().chain(&b.unconverged)) {
        assert_eq!(p.state.matrix(), q.state.matrix());
        assert_eq!(p.choi.matrix(), q.choi.matrix());
    }
}

#[test]
fn mpl_needs_data() {
    let prior = choi_from_kraus(&cnot());
    assert!(QptData::new(Vec::new(), psic2(), Vec::new()).is_err());
    let data = QptData::exact(&prior, product_pool()[..1].to_vec(), psic2(), 10.0).unwrap();
    assert!(mpl_optimize(&data, &prior, &MplConfig { starts: 0, ..Default::default() }).is_err());
}

#[test]
fn pool_of_one_is_a_single_mlme_call() {
    let truth = choi_from_kraus(&cnot_imperfect(0.1).unwrap());
    let pool = product_pool()[..1].to_vec();
    let mut provider = ExactQpt { channel: truth.clone(), pom: psic2(), copies: 1e4 };
    let cfg = quick();
    let trace = adaptive_fixed(&mut provider, &pool, &choi_from_kraus(&cnot()), &cfg).unwrap();
    assert_eq!(trace.rounds.len(), 1);
    let direct = best_effort(mlme_qpt(&QptData::exact(&truth, pool, psic2(), 1e4).unwrap(), &cfg.mlme)).unwrap();
    assert!(close(trace.rounds[0].estimator.matrix(), direct.estimator.matrix(), 1e-12));
}

#[test]
fn adaptive_with_true_prior_decreases_monotonically() {
    let truth = choi_from_kraus(&cnot_imperfect(0.1).unwrap());
    let mut provider = ExactQpt { channel: truth.clone(), pom: psic2(), copies: 1e4 };
    let cfg = StrategyConfig { max_rounds: Some(8), ..quick() };
    let a = adaptive_fixed(&mut provider, &product_pool(), &truth, &cfg).unwrap();
    let b = adaptive_fixed(&mut provider, &product_pool(), &truth, &cfg).unwrap();
    let sources = |t: &StrategyTrace| t.rounds.iter().map(|r| r.source).collect::<Vec<_>>();
    assert_eq!(sources(&a), sources(&b));
    let d = a.distances(&truth).unwrap();
    for w in d.windows(2) {
        assert!(w[1] <= w[0] + 1e-3, "{d:?}");
    }
}

#[test]
fn stop_threshold_ends_the_session() {
    let truth = choi_from_kraus(&cnot());
    let mut provider = ExactQpt { channel: truth.clone(), pom: psic2(), copies: 1e4 };
    let cfg = StrategyConfig { strategy: Strategy::None, stop_threshold: Some(1.0), ..quick() };
    let t = run_strategy(&mut provider, &product_pool(), &truth, &cfg).unwrap();
    assert_eq!(t.rounds.len(), 2);
}

#[test]
fn hybrid_threshold_extremes() {
    let truth = choi_from_kraus(&cnot_imperfect(0.1).unwrap());
    let prior = choi_from_kraus(&cnot());
    let cfg = StrategyConfig { max_rounds: Some(4), ..quick() };

    let mut provider = SimulatedQpt::new(truth.clone(), psic2(), 1000, 1);
    let fixed = hybrid_strategy(&mut provider, &product_pool(), &prior, 0.0, &cfg).unwrap();
    assert_eq!(fixed.switched_at, Some(1));
    assert!(fixed.rounds.iter().all(|r| matches!(r.source, InputSource::Pool(_))));
    let mut provider = SimulatedQpt::new(truth.clone(), psic2(), 1000, 1);
    let adaptive = adaptive_fixed(&mut provider, &product_pool(), &prior, &cfg).unwrap();
    let sources = |t: &StrategyTrace| t.rounds.iter().map(|r| r.source).collect::<Vec<_>>();
    assert_eq!(sources(&fixed), sources(&adaptive));

    let mut provider = SimulatedQpt::new(truth, psic2(), 1000, 1);
    let mpl = hybrid_strategy(&mut provider, &product_pool(), &prior, 1.0, &cfg).unwrap();
    assert_eq!(mpl.switched_at, None);
    assert!(mpl.rounds[1..].iter().all(|r| r.source == InputSource::Mpl));
}

#[test]
fn plateau_spread_fixtures() {
    let cfg = QptConfig { precision: 1e-8, ..Default::default() };
    let cnot_e = choi_from_kraus(&cnot());
    let ic = QptData::exact(&cnot_e, sic_inputs(2).unwrap(), psic2(), 1e6).unwrap();
    assert!(plateau_spread(&ic, 4, &cfg).unwrap() <= 1e-3);

    let noisy = choi_from_kraus(&cnot_imperfect(0.1).unwrap());
    let one = QptData::exact(&noisy, product_pool()[..1].to_vec(), psic2(), 1e6).unwrap();
    assert!(plateau_spread(&one, 4, &QptConfig::default()).unwrap() > 0.05);
    assert!(plateau_spread(&one, 1, &cfg).is_err());
}

#[test]
fn config_rejects_unknown_and_invalid_fields() {
    assert!(QptConfig { lambda: -1.0, ..Default::default() }.validate().is_err());
    assert!(QptConfig { epsilon: 0.0, ..Default::default() }.validate().is_err());
    let cfg: StrategyConfig = serde_json::from_str(r#"{"strategy": "hybrid", "mpl": {"starts": 2}}"#).unwrap();
    assert_eq!(cfg.strategy, Strategy::Hybrid);
    assert_eq!(cfg.mpl.starts, 2);
    assert!(serde_json::from_str::<StrategyConfig>(r#"{"strateg": "mpl"}"#).is_err());
}

#[test]
fn mpl_ordering_shrinks_the_plateau_at_least_as_fast_as_fixed_order() {
    let truth = choi_from_kraus(&cnot_imperfect(0.1).unwrap());
    let prior = choi_from_kraus(&cnot());
    let deltas = |strategy| {
        let mut provider = ExactQpt { channel: truth.clone(), pom: psic2(), copies: 1e4 };
        let cfg = StrategyConfig { strategy, max_rounds: Some(6), plateau_samples: 4, ..quick() };
        let t = run_strategy(&mut provider, &product_pool(), &prior, &cfg).unwrap();
        t.rounds.iter().map(|r| r.delta.unwrap()).collect::<Vec<_>>()
    };
    let fixed = deltas(Strategy::None);
    let mpl = deltas(Strategy::Mpl);
    assert!((mpl[0] - fixed[0]).abs() < 1e-12);
    for (m, f) in mpl.iter().zip(&fixed) {
        assert!(m <= f, "MPL {mpl:?} vs fixed {fixed:?}");
    }
}
