//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach standard
//! output. `ACCEPTANCE_ONLY=2,9` restricts the run to the listed criteria.

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use cv::{
    gaussian_modes, nonclassicality_depth, reference_state, sh_pom, wigner_fock, DepthConfig, FockSpace, Fresnel,
    PhasePoint, ReferenceState, ShGeometry,
};
use operators::random::{haar_unitary, hs_state, multinomial};
use operators::{c64, logm, trace_class_distance, trace_norm, CMat, Complex64, Ket, StateOp};
use pom::{build_random, build_standard, gram_matrix, Pom, StandardPom};
use process_est::{
    channel_entropy, choi_from_kraus, cnot, cnot_imperfect, fixed_budget_distances, mlme_qpt, product_pool,
    run_strategy, sic_inputs, toffoli, MplConfig, QptConfig, QptData, SimulatedQpt, Strategy, StrategyConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use state_est::{
    hml, max_entropy_exact, ml_cg, ml_dg, mlme_new, r_operator, EstError, EstimationConfig, EstimationResult,
    Frequencies, LineSearch,
};

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn dist(a: &StateOp, b: &StateOp) -> f64 {
    trace_class_distance(a.op(), b.op()).unwrap()
}

fn finished(r: Result<EstimationResult, EstError>) -> Result<EstimationResult, String> {
    match r {
        Ok(r) => Ok(r),
        Err(EstError::MaxIterExceeded(best)) => Ok(*best),
        Err(e) => Err(e.to_string()),
    }
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Bootstrap standard error of median(a) − median(b) over paired trials.
fn paired_median_se(a: &[f64], b: &[f64], rng: &mut ChaCha8Rng) -> f64 {
    let n = a.len();
    let diffs: Vec<f64> = (0..1000)
        .map(|_| {
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let ra: Vec<f64> = idx.iter().map(|&i| a[i]).collect();
            let rb: Vec<f64> = idx.iter().map(|&i| b[i]).collect();
            median(&ra) - median(&rb)
        })
        .collect();
    let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
    (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (diffs.len() - 1) as f64).sqrt()
}

/// A random state mixed with 1/D.
fn interior(dim: usize, rng: &mut ChaCha8Rng) -> StateOp {
    let rho = hs_state(dim, rng);
    let m = rho.op().scale(0.6).matrix() + CMat::identity(dim, dim) * c64(0.4 / dim as f64, 0.0);
    StateOp::from_matrix(&m).unwrap()
}

fn random_counts(k: usize, rng: &mut ChaCha8Rng) -> Vec<u64> {
    loop {
        let counts: Vec<u64> = (0..k).map(|_| rng.random_range(0..60)).collect();
        if counts.iter().any(|&n| n > 0) {
            return counts;
        }
    }
}

fn witness_census() -> Outcome {
    let out = std::env::temp_dir().join(format!("qtomo-acceptance-scan-{}.csv", std::process::id()));
    let run = Command::new(env!("CARGO_BIN_EXE_qtomo"))
        .args(["witness-scan", "--out"])
        .arg(&out)
        .output()
        .map_err(|e| e.to_string())?;
    let csv = std::fs::read_to_string(&out).map_err(|e| e.to_string())?;
    let _ = std::fs::remove_file(&out);
    let summary = String::from_utf8_lossy(&run.stderr).trim().to_string();
    let rows = csv.lines().count() - 1;
    let ic_rows = csv.lines().skip(1).filter(|l| l.contains(",15,true,")).count();
    ensure(
        run.status.success()
            && rows == 18564
            && ic_rows == 1395
            && summary.contains("ic_sets=1395")
            && summary.contains("classes=6"),
        format!("{rows} rows, {ic_rows} IC rows; {summary}"),
    )
}

fn trine_fixture() -> Outcome {
    let trine = build_standard(StandardPom::Trine).unwrap();
    let f = Frequencies::from_real_counts(vec![2.0 / 3.0, 2.0 / 9.0, 1.0 / 9.0]).unwrap();
    let start = Instant::now();
    let r = mlme_new(&f, &trine, &EstimationConfig::default(), false).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let b = r.estimator.bloch();
    let me = max_entropy_exact(&f, &trine, &EstimationConfig::default());
    let infeasible = matches!(me, Err(EstError::Infeasible { .. }));
    let close = b.iter().zip([0.194, 0.0, 0.981]).all(|(x, y)| (x - y).abs() <= 1e-2);
    ensure(
        close && infeasible && elapsed < Duration::from_secs(1),
        format!("Bloch ({:.4}, {:.4}, {:.4}), ME infeasible: {infeasible}, {elapsed:.2?}", b[0], b[1], b[2]),
    )
}

fn add_beta_rule() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = EstimationConfig::default();
    let mut worst = 0.0f64;
    for dim in [2, 3, 4] {
        for _ in 0..20 {
            let u = haar_unitary(dim, &mut rng);
            let pom = Pom::new((0..dim).map(|c| Ket::new(u.column(c).into_owned()).projector()).collect()).unwrap();
            let counts = random_counts(dim, &mut rng);
            let f = Frequencies::from_counts(&counts).unwrap();
            let r = hml(&f, &pom, &cfg).map_err(|e| e.to_string())?;
            let n = f.total();
            let mut expect: Vec<f64> =
                counts.iter().map(|&k| (k as f64 + cfg.beta) / (n + dim as f64 * cfg.beta)).collect();
            expect.sort_by(f64::total_cmp);
            let eig = r.estimator.op().eigenvalues().unwrap();
            worst = eig.iter().zip(&expect).fold(worst, |m, (a, b)| m.max((a - b).abs()));
        }
    }
    ensure(worst <= 1e-6, format!("largest eigenvalue error {worst:.2e} over 60 count vectors"))
}

fn hml_uniqueness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for fixture in 0..10u64 {
        let dim = 2 + (fixture as usize % 2);
        let pom = build_random(dim, dim * dim + 1, 100 + fixture).unwrap();
        let f = Frequencies::from_counts(&random_counts(pom.len(), &mut rng)).unwrap();
        let runs: Vec<StateOp> = (0..20)
            .map(|_| {
                let cfg = EstimationConfig { start: Some(hs_state(dim, &mut rng)), ..Default::default() };
                hml(&f, &pom, &cfg).map(|r| r.estimator).map_err(|e| e.to_string())
            })
            .collect::<Result<_, _>>()?;
        for (i, a) in runs.iter().enumerate() {
            for b in &runs[i + 1..] {
                worst = worst.max(dist(a, b));
            }
        }
    }
    ensure(worst <= 1e-4, format!("largest pairwise distance {worst:.2e} over 10 fixtures × 20 starts"))
}

fn extremal_certificates() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut ml_worst, mut me_worst, mut tp_worst) = (0.0f64, 0.0f64, 0.0f64);
    let mut checked = 0;
    for seed in 0..6u64 {
        let dim = 2 + (seed as usize % 2);
        let pom = build_random(dim, dim * dim + 2, 200 + seed).unwrap();
        let f = Frequencies::from_counts(&random_counts(pom.len(), &mut rng)).unwrap();
        let id = CMat::identity(dim, dim);
        let cfg = EstimationConfig { line_search: LineSearch::Quadratic3, ..Default::default() };
        for r in [ml_dg(&f, &pom, &cfg), ml_cg(&f, &pom, &cfg)].into_iter().flatten() {
            let rho = r.estimator.matrix();
            let big_r = r_operator(&f, &pom, &r.estimator).unwrap();
            ml_worst = ml_worst.max(trace_norm(&(big_r.matrix() * rho - rho)));
            checked += 1;
        }
        if let Ok(r) = mlme_new(&f, &pom, &cfg, false) {
            let rho = r.estimator.matrix();
            let big_r = r_operator(&f, &pom, &r.estimator).unwrap();
            let log = logm(r.estimator.op()).unwrap();
            let tr_log = log.trace_with(r.estimator.op());
            let curly = big_r.matrix() - &id - (log.matrix() - &id * c64(tr_log, 0.0)) * c64(cfg.lambda, 0.0);
            me_worst = me_worst.max(trace_norm(&(rho * curly)));
            checked += 1;
        }
    }
    let pom = build_standard(StandardPom::ProductSic(2)).unwrap();
    for (k, channel) in [cnot(), cnot_imperfect(0.1).unwrap()].iter().enumerate() {
        let truth = choi_from_kraus(channel);
        let data = QptData::simulate(&truth, product_pool()[..10].to_vec(), pom.clone(), 2000, 30 + k as u64).unwrap();
        let r = match mlme_qpt(&data, &QptConfig { precision: 1e-6, ..Default::default() }) {
            Ok(r) => r,
            Err(e) => e.best_iterate().cloned().ok_or(e.to_string())?,
        };
        tp_worst = tp_worst.max(r.max_tp_defect);
        checked += 1;
    }
    ensure(
        ml_worst <= 1e-7 * (1.0 + 1e-6) && me_worst <= 1e-6 && tp_worst <= 1e-7,
        format!(
            "{checked} runs; ML tr|Rρ−ρ| {ml_worst:.2e}, MLME ‖ρ𝕽‖ {me_worst:.2e}, QPT TP defect {tp_worst:.2e}"
        ),
    )
}

fn cg_versus_dg() -> Outcome {
    let pom = build_standard(StandardPom::ProductSic(2)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cfg = EstimationConfig { precision: 1e-7, ..Default::default() };
    let (mut dg, mut cg) = (Vec::new(), Vec::new());
    for _ in 0..20 {
        let truth = hs_state(4, &mut rng);
        let counts = multinomial(&pom.probabilities(&truth), 8000, &mut rng);
        let f = Frequencies::from_counts(&counts).unwrap();
        dg.push(finished(ml_dg(&f, &pom, &cfg))?.iterations as f64);
        cg.push(finished(ml_cg(&f, &pom, &cfg))?.iterations as f64);
    }
    let (m_dg, m_cg) = (median(&dg), median(&cg));
    ensure(m_cg <= m_dg, format!("median iterations CG {m_cg} vs DG {m_dg}"))
}

fn noiseless_recovery() -> Outcome {
    let pom = build_standard(StandardPom::ProductSic(2)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let tight = EstimationConfig { precision: 1e-9, line_search: LineSearch::Quadratic3, ..Default::default() };
    let names = ["ml_dg", "ml_cg", "mlme_new", "hml"];
    let mut worst = [0.0f64; 4];
    for _ in 0..10 {
        let truth = interior(4, &mut rng);
        let f = Frequencies::from_probabilities(&pom.probabilities(&truth), 1e9).unwrap();
        let runs = [
            ml_dg(&f, &pom, &tight),
            ml_cg(&f, &pom, &tight),
            mlme_new(&f, &pom, &EstimationConfig { lambda: 1e-9, ..tight.clone() }, false),
            hml(&f, &pom, &EstimationConfig { beta: 1e-6, ..tight.clone() }),
        ];
        for (w, r) in worst.iter_mut().zip(runs) {
            *w = w.max(dist(&finished(r)?.estimator, &truth));
        }
    }
    let detail: Vec<String> = names.iter().zip(&worst).map(|(n, w)| format!("{n} {w:.1e}")).collect();
    ensure(worst.iter().all(|&w| w <= 1e-4), format!("largest distance: {}", detail.join(", ")))
}

fn qpt_unitary_economy() -> Outcome {
    let start = Instant::now();
    let truth = choi_from_kraus(&cnot());
    let inputs = sic_inputs(2).unwrap();
    let pom = build_standard(StandardPom::ProductSic(2)).unwrap();
    let cfg = QptConfig { lambda: 1e-6, ..Default::default() };
    let mut d = Vec::new();
    for l in [8, 16] {
        let data = QptData::exact(&truth, inputs[..l].to_vec(), pom.clone(), 1e6).unwrap();
        let r = match mlme_qpt(&data, &cfg) {
            Ok(r) => r,
            Err(e) => e.best_iterate().cloned().ok_or(e.to_string())?,
        };
        d.push(r.estimator.distance(&truth).unwrap());
    }
    let s_cnot = channel_entropy(&truth);
    let s_toffoli = channel_entropy(&choi_from_kraus(&toffoli()));
    let elapsed = start.elapsed();
    ensure(
        d[0] <= 0.05 && d[1] <= 1e-3 && s_cnot.abs() <= 1e-9 && s_toffoli.abs() <= 1e-9 && elapsed < Duration::from_secs(120),
        format!(
            "D(L=8) {:.2e}, D(L=16) {:.2e}, S(CNOT) {s_cnot:.1e}, S(Toffoli) {s_toffoli:.1e}, {elapsed:.1?}",
            d[0], d[1]
        ),
    )
}

/// Reduced-effort settings for the strategy comparison.
fn strategy_settings(strategy: Strategy, rounds: usize) -> StrategyConfig {
    StrategyConfig {
        strategy,
        max_rounds: Some(rounds),
        mlme: QptConfig { precision: 1e-5, max_iter: 3000, ..Default::default() },
        projected: QptConfig { precision: 1e-4, max_iter: 200, ..Default::default() },
        mpl: MplConfig { starts: 3, precision_choi: 1e-4, max_iter: 1500, ..Default::default() },
        ..Default::default()
    }
}

const STRATEGY_TRIALS: usize = 20;
const STRATEGY_ROUNDS: usize = 8;

fn strategy_ordering() -> Outcome {
    let truth = choi_from_kraus(&cnot_imperfect(0.1).unwrap());
    let pom = build_standard(StandardPom::ProductSic(2)).unwrap();
    let pool = product_pool();
    // The experimenter's target gate serves as the prior guess.
    let prior = choi_from_kraus(&cnot());
    let strategies = [Strategy::Mpl, Strategy::Adaptive, Strategy::None];
    // distances[s][trial][round]
    let mut distances = vec![Vec::new(); strategies.len()];
    for (s, &strategy) in strategies.iter().enumerate() {
        for trial in 0..STRATEGY_TRIALS {
            let mut provider = SimulatedQpt::new(truth.clone(), pom.clone(), 10_000, 900 + trial as u64);
            let cfg = strategy_settings(strategy, STRATEGY_ROUNDS);
            let trace = run_strategy(&mut provider, &pool, &prior, &cfg).map_err(|e| e.to_string())?;
            distances[s].push(trace.distances(&truth).map_err(|e| e.to_string())?);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut ok = true;
    let mut cells = Vec::new();
    for l in 0..STRATEGY_ROUNDS {
        let at = |s: usize| -> Vec<f64> { distances[s].iter().map(|t| t[l]).collect() };
        let (mpl, adaptive, none) = (at(0), at(1), at(2));
        let se_ma = paired_median_se(&mpl, &adaptive, &mut rng);
        let se_an = paired_median_se(&adaptive, &none, &mut rng);
        let (m, a, n) = (median(&mpl), median(&adaptive), median(&none));
        let holds = m - a <= se_ma && a - n <= se_an;
        ok &= holds;
        cells.push(format!("L={}: {m:.3}/{a:.3}/{n:.3}{}", l + 1, if holds { "" } else { "!" }));
    }
    // Fixed total copies LN split evenly over the first L pool inputs.
    let sweep = fixed_budget_distances(
        &truth,
        &pool,
        &pom,
        160_000,
        &[4, 8, 16],
        STRATEGY_TRIALS,
        &QptConfig { precision: 1e-5, max_iter: 3000, ..Default::default() },
        77,
    )
    .map_err(|e| e.to_string())?;
    let sweep_medians: Vec<f64> = (0..3).map(|k| median(&sweep.iter().map(|t| t[k]).collect::<Vec<_>>())).collect();
    let sweep_ok = sweep_medians.windows(2).all(|w| w[1] <= w[0]);
    ensure(
        ok && sweep_ok,
        format!(
            "median D_tr MPL/adaptive/none {}; fixed-LN medians L=4,8,16: {:.3}, {:.3}, {:.3}",
            cells.join(" "),
            sweep_medians[0],
            sweep_medians[1],
            sweep_medians[2]
        ),
    )
}

fn cv_diagnostics() -> Outcome {
    let space = |d| FockSpace::new(d).unwrap();
    let fock = |n, d| reference_state(ReferenceState::Fock { n }, space(d)).unwrap();
    let w0 = wigner_fock(&fock(0, 8), PhasePoint::origin());
    let w1 = wigner_fock(&fock(1, 8), PhasePoint::origin());
    let fock_ok = (w0 - 2.0).abs() < 1e-12 && (w1 + 2.0).abs() < 1e-12;

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut parity_worst = 0.0f64;
    for k in 0..20 {
        let d = 2 + k % 15;
        let rho = hs_state(d, &mut rng);
        let w = wigner_fock(&rho, PhasePoint::origin());
        parity_worst = parity_worst.max((w - 2.0 * rho.op().trace_with(&space(d).parity())).abs());
    }

    let cfg = DepthConfig::default();
    let mut mix = CMat::zeros(30, 30);
    for k in 0..4 {
        let a = Complex64::from_polar(0.2, k as f64 * FRAC_PI_2);
        mix += reference_state(ReferenceState::Coherent { re: a.re, im: a.im }, space(30)).unwrap().matrix();
    }
    let classical = nonclassicality_depth(&StateOp::normalized(&mix).unwrap(), &cfg).map_err(|e| e.to_string())?;
    let cat = reference_state(ReferenceState::Cat { alpha: 2.0 }, space(30)).unwrap();
    let cat = nonclassicality_depth(&cat, &cfg).map_err(|e| e.to_string())?;
    let grid_half_width = 0.5 / (cfg.tau_points + 1) as f64;

    let geom = ShGeometry::tiled(4.0, 256, 7, 5, Fresnel { zeta: 20.0, z: 1.0 }).map_err(|e| e.to_string())?;
    let rank = |d| -> Result<usize, String> {
        let modes = gaussian_modes(d, &geom.grid, 1.5).map_err(|e| e.to_string())?;
        Ok(gram_matrix(&sh_pom(&modes, &geom).map_err(|e| e.to_string())?).1)
    };
    let (r5, r9) = (rank(5)?, rank(9)?);
    ensure(
        fock_ok
            && parity_worst <= 1e-9
            && classical.tau == 0.0
            && 1.0 - cat.tau <= grid_half_width
            && geom.pixels.len() == 35
            && r5 == 25
            && r9 == 35,
        format!(
            "W00 {w0}/{w1}, parity {parity_worst:.1e}, depth mixture {} cat {:.5}, SH ranks {r5}/{r9} on {} pixels",
            classical.tau,
            cat.tau,
            geom.pixels.len()
        ),
    )
}

/// Newest `properties-*` test binary per crate, found next to this binary.
fn property_binaries() -> Vec<(String, PathBuf)> {
    let exe = std::env::current_exe().unwrap();
    let Some(deps) = exe.parent() else { return Vec::new() };
    let mut newest: std::collections::BTreeMap<String, (std::time::SystemTime, PathBuf)> = Default::default();
    for entry in std::fs::read_dir(deps).into_iter().flatten().flatten() {
        let path = entry.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if !name.starts_with("properties-") || path.extension().is_some() {
            continue;
        }
        let Some(krate) = crate_of(&path.with_extension("d")) else { continue };
        let modified = entry.metadata().and_then(|m| m.modified()).unwrap_or(std::time::UNIX_EPOCH);
        if newest.get(&krate).is_none_or(|(t, _)| modified > *t) {
            newest.insert(krate, (modified, path));
        }
    }
    newest.into_iter().map(|(k, (_, p))| (k, p)).collect()
}

/// Crate name from the `crates/<name>/tests/properties.rs` entry of a dep-info file.
fn crate_of(dep_info: &Path) -> Option<String> {
    let text = std::fs::read_to_string(dep_info).ok()?;
    let first = text.lines().next()?;
    let at = first.find("tests/properties.rs")?;
    let prefix = first[..at].trim_end_matches('/');
    Some(prefix.rsplit(['/', ' ']).next()?.to_string())
}

fn property_suites() -> Outcome {
    let bins = property_binaries();
    let start = Instant::now();
    let mut failed = Vec::new();
    for (krate, bin) in &bins {
        let ok = Command::new(bin).arg("--quiet").output().map(|o| o.status.success()).unwrap_or(false);
        if !ok {
            failed.push(krate.clone());
        }
    }
    let elapsed = start.elapsed();
    let names: Vec<&str> = bins.iter().map(|(k, _)| k.as_str()).collect();
    ensure(
        bins.len() == 7 && failed.is_empty() && elapsed < Duration::from_secs(15 * 60),
        format!("{} suites [{}], failed {:?}, {elapsed:.1?}", bins.len(), names.join(", "), failed),
    )
}

fn main() {
    let criteria: [(usize, &str, fn() -> Outcome); 11] = [
        (1, "witness-set census", witness_census),
        (2, "trine MLME fixture", trine_fixture),
        (3, "add-beta rule", add_beta_rule),
        (4, "HML uniqueness", hml_uniqueness),
        (5, "extremal certificates", extremal_certificates),
        (6, "CG vs DG iterations", cg_versus_dg),
        (7, "noiseless recovery", noiseless_recovery),
        (8, "QPT unitary-channel economy", qpt_unitary_economy),
        (9, "strategy ordering", strategy_ordering),
        (10, "CV diagnostics", cv_diagnostics),
        (11, "property suites", property_suites),
    ];
    let only: Option<Vec<usize>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let start = Instant::now();
    let mut failures = Vec::new();
    for (id, name, check) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("[{tag}] criterion {id:>2} {name}: {detail} ({:.1?})", t.elapsed());
        if outcome.is_err() {
            failures.push(id);
        }
    }
    println!("acceptance finished in {:.1?}", start.elapsed());
    if !failures.is_empty() {
        println!("failed criteria: {failures:?}");
        std::process::exit(1);
    }
}
