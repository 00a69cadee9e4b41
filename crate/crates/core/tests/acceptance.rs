//! Acceptance suite: every verified statement run at scale with its stated
//! tolerance. One pass/fail line per criterion (visible with
//! `cargo test --test acceptance -- --nocapture`).

use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qcoh_core::block::{block_coherence, closest_free_state};
use qcoh_core::decomp::{Povm, ProjectiveDecomposition};
use qcoh_core::matrix::{max_abs_diff, CMat, CVec};
use qcoh_core::povm::{affinity_povm_coherence, relative_entropy_povm_coherence};
use qcoh_core::spectral::{random_density, DensityMatrix, Tolerances};
use qcoh_core::suite::{replay_trial, run_check, run_suite, CheckKind, CheckRecord, SuiteConfig};

fn base_config(trials: usize, dims: Vec<usize>) -> SuiteConfig {
    SuiteConfig {
        master_seed: 20_240_817,
        trials_per_check: trials,
        dims,
        tol_assert: None,
        checks: vec![],
        oracle_samples: 200,
    }
}

fn report_line(criterion: usize, label: &str, record: &CheckRecord, elapsed: f64) -> bool {
    let pass = record.failures == 0;
    println!(
        "{} criterion {:>2}: {:<28} trials {:>5}  failures {:>3}  worst {:>12.3e}  tol {:.0e}  {:.1}s",
        if pass { "PASS" } else { "FAIL" },
        criterion,
        label,
        record.trials,
        record.failures,
        record.worst_violation,
        record.tolerance,
        elapsed,
    );
    pass
}

fn run_criterion(criterion: usize, label: &str, kind: CheckKind, cfg: &SuiteConfig) {
    let start = Instant::now();
    let record = run_check(kind, cfg);
    let pass = report_line(criterion, label, &record, start.elapsed().as_secs_f64());
    assert!(
        pass,
        "criterion {criterion} ({label}): {} of {} trials violated tolerance {:.0e}, worst {:.3e}",
        record.failures, record.trials, record.tolerance, record.worst_violation
    );
}

#[test]
fn criterion_01_block_order_preserving() {
    // 1,000 refinement pairs over dims 2-8 plus 100 full chains.
    let cfg = base_config(1000, (2..=8).collect());
    run_criterion(
        1,
        "block order-preserving",
        CheckKind::OrderPreservingBlock,
        &cfg,
    );
}

#[test]
fn criterion_02_closest_free_state() {
    // 500 trials; 200 sampled free states per trial never beat σ_ρ.
    let cfg = base_config(500, (2..=8).collect());
    run_criterion(2, "closest free state", CheckKind::ClosestFreeState, &cfg);
}

#[test]
fn criterion_03_additivity() {
    let cfg = base_config(500, (2..=8).collect());
    run_criterion(3, "additivity", CheckKind::Additivity, &cfg);
}

#[test]
fn criterion_04_faithfulness() {
    // Each trial scores one dephased state (≤ 1e-9) and one non-free pure
    // state (> 1e-7).
    let cfg = base_config(500, (2..=8).collect());
    run_criterion(4, "faithfulness", CheckKind::Faithfulness, &cfg);
}

#[test]
fn criterion_05_monotonicity_and_invariance() {
    // Each trial checks one sampled free operation and one block unitary.
    let cfg = base_config(1000, (2..=8).collect());
    run_criterion(
        5,
        "monotonicity + invariance",
        CheckKind::Monotonicity,
        &cfg,
    );
}

#[test]
fn criterion_06_basis_degeneration() {
    let cfg = base_config(300, (1..=8).collect());
    run_criterion(6, "basis degeneration", CheckKind::BasisDegeneration, &cfg);
}

#[test]
fn criterion_07_maximal_coherence() {
    // 1,000 trials: constructed states hit 1 - 1/M, random pure states stay
    // below, and the equality-iff-uniform calibration holds per trial.
    let cfg = base_config(1000, (2..=8).collect());
    run_criterion(7, "maximal coherence", CheckKind::MaxCoherent, &cfg);
}

#[test]
fn criterion_08_povm_order_preserving() {
    // Random POVMs with up to 6 elements on dims 2-6, random partitions.
    let cfg = base_config(500, (2..=6).collect());
    run_criterion(
        8,
        "POVM order-preserving",
        CheckKind::PovmOrderPreserving,
        &cfg,
    );
}

#[test]
fn criterion_09_kraus_invariance() {
    let cfg = base_config(300, (2..=6).collect());
    run_criterion(
        9,
        "Kraus-choice invariance",
        CheckKind::KrausInvariance,
        &cfg,
    );
}

#[test]
fn criterion_10_deterministic_replay() {
    let start = Instant::now();
    let mut cfg = base_config(25, vec![2, 3, 4, 5]);
    cfg.checks = CheckKind::ALL.to_vec();
    cfg.oracle_samples = 50;

    let first = run_suite(&cfg);
    let second = run_suite(&cfg);
    let identical = first.normalized() == second.normalized()
        && serde_json::to_string(&first.normalized()).unwrap()
            == serde_json::to_string(&second.normalized()).unwrap();

    // Every recorded worst case replays to the identical violation.
    let mut replays_ok = true;
    for (kind, record) in cfg.checks.iter().zip(&first.checks) {
        let (seed, violation) = replay_trial(*kind, &cfg, record.worst_case_trial);
        replays_ok &= seed == record.worst_case_seed;
        replays_ok &= violation == record.worst_violation;
    }

    let pass = identical && replays_ok;
    println!(
        "{} criterion 10: deterministic replay          two runs identical: {}, worst cases replay: {}  {:.1}s",
        if pass { "PASS" } else { "FAIL" },
        identical,
        replays_ok,
        start.elapsed().as_secs_f64(),
    );
    assert!(pass, "replay determinism violated");
}

#[test]
fn criterion_11_spot_values() {
    let start = Instant::now();
    let tol = Tolerances::DEFAULT;
    let s = 1.0 / 2.0f64.sqrt();
    let plus = DensityMatrix::from_pure(&CVec::from_vec(vec![
        Complex64::new(s, 0.0),
        Complex64::new(s, 0.0),
    ]))
    .unwrap();
    let z_basis = ProjectiveDecomposition::computational_basis(2);

    let c_block = block_coherence(&plus, &z_basis).unwrap();
    let ok_block = (c_block - 0.5).abs() <= 1e-9;

    let sigma = closest_free_state(&plus, &z_basis).unwrap();
    let ok_sigma = max_abs_diff(sigma.matrix(), DensityMatrix::maximally_mixed(2).matrix()) <= 1e-9;

    let c_rel = relative_entropy_povm_coherence(&plus, &z_basis.to_povm()).unwrap();
    let ok_rel = (c_rel - 1.0).abs() <= 1e-9;

    let half = CMat::identity(2, 2).scale(0.5);
    let uniform = Povm::new(vec![half.clone(), half], &tol).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut ok_uniform = true;
    for _ in 0..10 {
        let rho = random_density(2, 2, &mut rng);
        let c = affinity_povm_coherence(&rho, &uniform).unwrap();
        ok_uniform &= (c - 0.5).abs() <= 1e-9;
    }

    let pass = ok_block && ok_sigma && ok_rel && ok_uniform;
    println!(
        "{} criterion 11: spot values                   C_block={:.9} σ=I/2: {} C_rel={:.9} C_aff(I/2 pair)=0.5: {}  {:.1}s",
        if pass { "PASS" } else { "FAIL" },
        c_block,
        ok_sigma,
        c_rel,
        ok_uniform,
        start.elapsed().as_secs_f64(),
    );
    assert!(pass, "spot values drifted");
}
