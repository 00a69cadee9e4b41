//! Seeded randomized verifier: every measure axiom and order statement
//! becomes a pass/fail check over derived per-trial RNG streams, with the
//! worst signed margin and its trial seed recorded for replay.
//!
//! A trial's violation is calibrated so that `violation > tolerance` means
//! the property failed; negative values are safety margins. Streams derive
//! from `(master_seed, check name, trial index)`, so trials are
//! order-independent and any single trial can be re-run in isolation.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::block::{
    affinity_distance, apply_operation, block_coherence, closest_free_state, dephase,
    max_coherent_state, random_block_unitary, random_free_state, sample_free_operation,
    superposed_state,
};
use crate::decomp::{random_composition, refine_randomly, Partition, ProjectiveDecomposition};
use crate::error::{Error, Result};
use crate::matrix::{herm_product_trace, max_abs_diff};
use crate::povm::{
    affinity_coherence_with_kraus, canonical_kraus, povm_order_check, random_povm, randomize_kraus,
    relative_entropy_coherence_with_kraus,
};
use crate::spectral::{
    flat_simplex_weights, haar_unitary, psd_sqrt, random_density, random_pure, DensityMatrix,
    Tolerances,
};

/// Violation reported when a trial hits an internal error: finite so the
/// report stays valid JSON, large so it always counts as a failure.
const ERROR_VIOLATION: f64 = 1e300;

/// The named checks, one per verified statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    /// C(ρ) = 0 exactly on dephasing-invariant states.
    Faithfulness,
    /// C(Φ(ρ)) ≤ C(ρ) over the sampled free-operation family, plus
    /// block-unitary invariance.
    Monotonicity,
    /// C(qρ₁ ⊕ (1-q)ρ₂) = qC(ρ₁) + (1-q)C(ρ₂).
    Additivity,
    /// C(ρ,Q) ≥ C(ρ,P) for refinement pairs and along maximal chains.
    OrderPreservingBlock,
    /// The closed-form σ_ρ attains the affinity distance and beats sampling.
    ClosestFreeState,
    /// Rank-1 decompositions reproduce the basis formula
    /// 1 - Σ_i ⟨μ_i|√ρ|μ_i⟩².
    BasisDegeneration,
    /// Constructed equal-weight superpositions hit 1 - 1/M; pure states
    /// never exceed it; equality tracks weight uniformity.
    MaxCoherent,
    /// Fine POVM values dominate coarse-grained ones for both measures.
    PovmOrderPreserving,
    /// Both POVM measures are invariant under A_i ↦ U_i A_i.
    KrausInvariance,
}

impl CheckKind {
    pub const ALL: [CheckKind; 9] = [
        CheckKind::Faithfulness,
        CheckKind::Monotonicity,
        CheckKind::Additivity,
        CheckKind::OrderPreservingBlock,
        CheckKind::ClosestFreeState,
        CheckKind::BasisDegeneration,
        CheckKind::MaxCoherent,
        CheckKind::PovmOrderPreserving,
        CheckKind::KrausInvariance,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CheckKind::Faithfulness => "faithfulness",
            CheckKind::Monotonicity => "monotonicity",
            CheckKind::Additivity => "additivity",
            CheckKind::OrderPreservingBlock => "order-preserving-block",
            CheckKind::ClosestFreeState => "closest-free-state",
            CheckKind::BasisDegeneration => "basis-degeneration",
            CheckKind::MaxCoherent => "max-coherent",
            CheckKind::PovmOrderPreserving => "povm-order-preserving",
            CheckKind::KrausInvariance => "kraus-invariance",
        }
    }

    pub fn from_name(name: &str) -> Option<CheckKind> {
        let normalized = name.trim().to_ascii_lowercase().replace('_', "-");
        CheckKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == normalized)
    }

    /// Per-check assertion gate used when no global tolerance is forced.
    /// The basis-degeneration identity is algebraically exact and holds a
    /// tighter band.
    pub fn default_tolerance(&self) -> f64 {
        match self {
            CheckKind::BasisDegeneration => 1e-10,
            _ => 1e-9,
        }
    }
}

/// Configuration of a suite run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub master_seed: u64,
    pub trials_per_check: usize,
    /// Dimensions sampled uniformly per trial.
    pub dims: Vec<usize>,
    /// Global assertion gate; `None` keeps per-check defaults.
    pub tol_assert: Option<f64>,
    pub checks: Vec<CheckKind>,
    /// Free states sampled per closest-free-state trial.
    pub oracle_samples: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            master_seed: 42,
            trials_per_check: 100,
            dims: (2..=8).collect(),
            tol_assert: None,
            checks: CheckKind::ALL.to_vec(),
            oracle_samples: 200,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials_per_check < 1 {
            return Err(Error::Parse("trials_per_check must be ≥ 1".into()));
        }
        if self.dims.is_empty() || self.dims.iter().any(|&d| d < 1) {
            return Err(Error::Parse("dims must be non-empty, all ≥ 1".into()));
        }
        if let Some(t) = self.tol_assert {
            if !t.is_finite() || t <= 0.0 {
                return Err(Error::Parse("tol_assert must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Result of one check: trial count, failure count, and the worst signed
/// violation with the seed and index that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    pub worst_violation: f64,
    pub worst_case_seed: u64,
    pub worst_case_trial: u64,
    pub tolerance: f64,
    pub elapsed_seconds: f64,
}

/// Machine-readable record of a whole suite run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub master_seed: u64,
    pub trials_per_check: usize,
    pub dims: Vec<usize>,
    pub tol_assert: Option<f64>,
    pub oracle_samples: usize,
    pub checks: Vec<CheckRecord>,
}

impl SuiteReport {
    pub fn total_failures(&self) -> usize {
        self.checks.iter().map(|c| c.failures).sum()
    }

    /// Copy with timing fields zeroed: the determinism comparison surface.
    pub fn normalized(&self) -> SuiteReport {
        let mut copy = self.clone();
        for check in &mut copy.checks {
            check.elapsed_seconds = 0.0;
        }
        copy
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Stream seed for `(master_seed, check name, trial index)`.
pub fn derive_trial_seed(master_seed: u64, check_name: &str, trial: u64) -> u64 {
    let label = fnv1a64(check_name.as_bytes());
    splitmix64(master_seed ^ label.rotate_left(13) ^ splitmix64(trial))
}

/// Re-runs a single trial of a check; returns its stream seed and violation.
pub fn replay_trial(kind: CheckKind, cfg: &SuiteConfig, trial: u64) -> (u64, f64) {
    let seed = derive_trial_seed(cfg.master_seed, kind.name(), trial);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (seed, run_trial(kind, cfg, trial, &mut rng))
}

/// Total trials for a check. Order-preserving appends one full refinement
/// chain per ten pair trials.
pub fn total_trials(kind: CheckKind, cfg: &SuiteConfig) -> usize {
    match kind {
        CheckKind::OrderPreservingBlock => {
            cfg.trials_per_check + (cfg.trials_per_check / 10).max(1)
        }
        _ => cfg.trials_per_check,
    }
}

/// Runs one check over its derived trial streams.
pub fn run_check(kind: CheckKind, cfg: &SuiteConfig) -> CheckRecord {
    let start = Instant::now();
    let tolerance = cfg.tol_assert.unwrap_or_else(|| kind.default_tolerance());
    let trials = total_trials(kind, cfg);
    let mut failures = 0;
    let mut worst_violation = f64::NEG_INFINITY;
    let mut worst_case_seed = 0;
    let mut worst_case_trial = 0;
    for t in 0..trials {
        let (seed, violation) = replay_trial(kind, cfg, t as u64);
        if violation > tolerance {
            failures += 1;
        }
        if violation > worst_violation {
            worst_violation = violation;
            worst_case_seed = seed;
            worst_case_trial = t as u64;
        }
    }
    CheckRecord {
        name: kind.name().to_string(),
        trials,
        failures,
        worst_violation,
        worst_case_seed,
        worst_case_trial,
        tolerance,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs the selected checks and aggregates the report. Deterministic for a
/// fixed configuration up to the timing fields.
pub fn run_suite(cfg: &SuiteConfig) -> SuiteReport {
    cfg.validate().expect("invalid suite configuration");
    let checks = cfg
        .checks
        .iter()
        .map(|&kind| run_check(kind, cfg))
        .collect();
    SuiteReport {
        master_seed: cfg.master_seed,
        trials_per_check: cfg.trials_per_check,
        dims: cfg.dims.clone(),
        tol_assert: cfg.tol_assert,
        oracle_samples: cfg.oracle_samples,
        checks,
    }
}

fn run_trial(kind: CheckKind, cfg: &SuiteConfig, trial: u64, rng: &mut ChaCha8Rng) -> f64 {
    let result = match kind {
        CheckKind::Faithfulness => faithfulness_trial(cfg, rng),
        CheckKind::Monotonicity => monotonicity_trial(cfg, rng),
        CheckKind::Additivity => additivity_trial(cfg, rng),
        CheckKind::OrderPreservingBlock => {
            if (trial as usize) < cfg.trials_per_check {
                order_pair_trial(cfg, rng)
            } else {
                order_chain_trial(cfg, rng)
            }
        }
        CheckKind::ClosestFreeState => closest_free_state_trial(cfg, rng),
        CheckKind::BasisDegeneration => basis_degeneration_trial(cfg, rng),
        CheckKind::MaxCoherent => max_coherent_trial(cfg, rng),
        CheckKind::PovmOrderPreserving => povm_order_trial(cfg, rng),
        CheckKind::KrausInvariance => kraus_invariance_trial(cfg, rng),
    };
    result.unwrap_or(ERROR_VIOLATION)
}

fn draw_dim(cfg: &SuiteConfig, rng: &mut impl Rng) -> usize {
    cfg.dims[rng.random_range(0..cfg.dims.len())]
}

fn draw_state(d: usize, rng: &mut impl Rng) -> DensityMatrix {
    let rank = rng.random_range(1..=d);
    random_density(d, rank, rng)
}

fn draw_decomposition(d: usize, rng: &mut impl Rng) -> Result<ProjectiveDecomposition> {
    let sizes = random_composition(d, rng);
    ProjectiveDecomposition::from_blocks(&haar_unitary(d, rng), &sizes)
}

/// Composition resampled until the predicate holds (d ≥ 2 guarantees both
/// "≥ 2 blocks" and "some block of rank ≥ 2" are reachable).
fn draw_composition_where(
    d: usize,
    rng: &mut impl Rng,
    pred: impl Fn(&[usize]) -> bool,
) -> Vec<usize> {
    loop {
        let sizes = random_composition(d, rng);
        if pred(&sizes) {
            return sizes;
        }
    }
}

fn faithfulness_trial(cfg: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<f64> {
    let d = draw_dim(cfg, rng);
    let p = draw_decomposition(d, rng)?;
    let rho = draw_state(d, rng);
    let free = dephase(&rho, &p)?;
    let v_free = block_coherence(&free, &p)?;
    if p.len() == 1 {
        // Everything is free for {I}; the positive side is vacuous.
        return Ok(v_free);
    }
    for _ in 0..64 {
        let candidate = random_pure(d, rng);
        let dephased = dephase(&candidate, &p)?;
        if max_abs_diff(candidate.matrix(), dephased.matrix()) >= 1e-6 {
            let v_nonfree = 1e-7 - block_coherence(&candidate, &p)?;
            return Ok(v_free.max(v_nonfree));
        }
    }
    Ok(v_free)
}

fn monotonicity_trial(cfg: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<f64> {
    let d = draw_dim(cfg, rng);
    let p = draw_decomposition(d, rng)?;
    let rho = draw_state(d, rng);
    let before = block_coherence(&rho, &p)?;

    let op = sample_free_operation(&p, rng)?;
    let mapped = apply_operation(&op, &rho)?;
    let v_mono = block_coherence(&mapped, &p)? - before;

    let u = random_block_unitary(&p, rng)?;
    let rotated = u.matrix() * rho.matrix() * u.matrix().adjoint();
    let rotated = DensityMatrix::new(rotated, &Tolerances::DEFAULT)?;
    let v_invariance = (block_coherence(&rotated, &p)? - before).abs();

    Ok(v_mono.max(v_invariance))
}

fn additivity_trial(cfg: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<f64> {
    let d = draw_dim(cfg, rng);
    if d < 2 {
        return Ok(-1.0);
    }
    let sizes = draw_composition_where(d, rng, |s| s.len() >= 2);
    let p = ProjectiveDecomposition::from_blocks(&haar_unitary(d, rng), &sizes)?;

    // Split the blocks into two non-empty groups Λ₁, Λ₂.
    let mut in_first = vec![false; p.len()];
    loop {
        for flag in in_first.iter_mut() {
            *flag = rng.random::<bool>();
        }
        let ones = in_first.iter().filter(|&&f| f).count();
        if ones > 0 && ones < p.len() {
            break;
        }
    }
    let group1: Vec<usize> = (0..p.len()).filter(|&m| in_first[m]).collect();
    let group2: Vec<usize> = (0..p.len()).filter(|&m| !in_first[m]).collect();

    let q: f64 = rng.random();
    let (c1, emb1) = grouped_component(&p, &group1, rng)?;
    let (c2, emb2) = grouped_component(&p, &group2, rng)?;
    let combined = emb1.scale(q) + emb2.scale(1.0 - q);
    let rho = DensityMatrix::new(combined, &Tolerances::DEFAULT)?;
    let total = block_coherence(&rho, &p)?;
    Ok((total - q * c1 - (1.0 - q) * c2).abs())
}

/// Draws a random state on the direct sum of the given blocks. Returns its
/// coherence with respect to the restricted decomposition and its embedding
/// into the full space.
fn grouped_component(
    p: &ProjectiveDecomposition,
    group: &[usize],
    rng: &mut ChaCha8Rng,
) -> Result<(f64, crate::matrix::CMat)> {
    let sizes: Vec<usize> = group.iter().map(|&m| p.block_dims()[m]).collect();
    let sub_dim: usize = sizes.iter().sum();
    let rho_small = draw_state(sub_dim, rng);
    let id = crate::spectral::UnitaryMatrix::new(
        crate::matrix::CMat::identity(sub_dim, sub_dim),
        &Tolerances::DEFAULT,
    )?;
    let p_small = ProjectiveDecomposition::from_blocks(&id, &sizes)?;
    let c = block_coherence(&rho_small, &p_small)?;

    let full_dim = p.dim();
    let mut isometry = crate::matrix::CMat::zeros(full_dim, sub_dim);
    let mut offset = 0;
    for (&m, &size) in group.iter().zip(&sizes) {
        let basis = p.block_basis(m)?;
        isometry.columns_mut(offset, size).copy_from(&basis);
        offset += size;
    }
    let embedded = &isometry * rho_small.matrix() * isometry.adjoint();
    Ok((c, embedded))
}

fn order_pair_trial(cfg: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<f64> {
    let d = draw_dim(cfg, rng);
    if d < 2 {
        return Ok(-1.0);
    }
    let sizes = draw_composition_where(d, rng, |s| s.iter().any(|&r| r >= 2));
    let p = ProjectiveDecomposition::from_blocks(&haar_unitary(d, rng), &sizes)?;
    let (q, _witness) = refine_randomly(&p, rng)?;
    let rho = draw_state(d, rng);
    Ok(block_coherence(&rho, &p)? - block_coherence(&rho, &q)?)
}

fn order_chain_trial(cfg: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<f64> {
    let d = draw_dim(cfg, rng);
    let rho = draw_state(d, rng);
    let mut p = ProjectiveDecomposition::trivial(d);
    let mut previous = block_coherence(&rho, &p)?;
    let mut worst = -1.0f64;
    while p.block_dims().iter().any(|&r| r >= 2) {
        let (next, _) = refine_randomly(&p, rng)?;
        let current = block_coherence(&rho, &next)?;
        worst = worst.max(previous - current);
        previous = current;
        p = next;
    }
    Ok(worst)
}

fn closest_free_state_trial(cfg: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<f64> {
    let d = draw_dim(cfg, rng);
    let p = draw_decomposition(d, rng)?;
    let rho = draw_state(d, rng);
    let sigma = closest_free_state(&rho, &p)?;
    let base = affinity_distance(&rho, &sigma)?;
    let v_identity = (base - block_coherence(&rho, &p)?).abs();
    let mut v_minimality = f64::NEG_INFINITY;
    for _ in 0..cfg.oracle_samples {
        let other = random_free_state(&p, rng)?;
        v_minimality = v_minimality.max(base - affinity_distance(&rho, &other)?);
    }
    Ok(v_identity.max(v_minimality))
}

fn basis_degeneration_trial(cfg: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<f64> {
    let d = draw_dim(cfg, rng);
    let u = haar_unitary(d, rng);
    let p = ProjectiveDecomposition::from_blocks(&u, &vec![1; d])?;
    let rho = draw_state(d, rng);
    let sqrt_rho = psd_sqrt(&rho)?;
    // Direct dual evaluation of the original basis formula.
    let mut retained = 0.0;
    for i in 0..d {
        let col = u.matrix().column(i);
        let diag = (col.adjoint() * sqrt_rho.matrix() * col)[(0, 0)].re;
        retained += diag * diag;
    }
    let direct = 1.0 - retained;
    Ok((block_coherence(&rho, &p)? - direct).abs())
}

fn max_coherent_trial(cfg: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<f64> {
    let d = draw_dim(cfg, rng);
    let p = draw_decomposition(d, rng)?;
    let blocks = p.len();
    let bound = 1.0 - 1.0 / blocks as f64;

    // Constructed equal-weight superposition must land on the bound.
    let star = max_coherent_state(&p, rng)?;
    let v_constructed = (block_coherence(&star, &p)? - bound).abs();

    // Random pure states never exceed the bound, and the shortfall equals
    // the squared deviation of the block weights from uniform:
    // bound - C = Σ_m (‖P_mψ‖² - 1/M)².
    let phi = random_pure(d, rng);
    let c_phi = block_coherence(&phi, &p)?;
    let v_bound = c_phi - bound;
    let gap = bound - c_phi;
    let deviations: Vec<f64> = p
        .projectors()
        .iter()
        .map(|pm| herm_product_trace(pm, phi.matrix()) - 1.0 / blocks as f64)
        .collect();
    let sum_sq: f64 = deviations.iter().map(|x| x * x).sum();
    let v_identity = (gap - sum_sq).abs();
    let max_dev = deviations.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    // Near-equality forces near-uniform weights: a coherence gap ≤ 1e-6
    // caps every weight deviation at √1e-6.
    let v_uniform = if gap <= 1e-6 { max_dev - 1e-3 } else { -1.0 };

    // Deliberately skewed weights must sit visibly below the bound.
    let mut v_skew = -1.0f64;
    if blocks >= 2 {
        for _ in 0..32 {
            let w = flat_simplex_weights(blocks, rng);
            let dev = w
                .iter()
                .map(|&x| (x - 1.0 / blocks as f64).abs())
                .fold(0.0f64, f64::max);
            if dev >= 0.05 {
                let skew = superposed_state(&p, &w, rng)?;
                v_skew = 1e-6 - (bound - block_coherence(&skew, &p)?);
                break;
            }
        }
    }

    Ok(v_constructed
        .max(v_bound)
        .max(v_identity)
        .max(v_uniform)
        .max(v_skew))
}

fn povm_order_trial(cfg: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<f64> {
    let d = draw_dim(cfg, rng);
    let elements = rng.random_range(2..=6);
    let e = random_povm(d, elements, rng)?;
    let rho = draw_state(d, rng);
    let partition = Partition::random(elements, rng);
    let record = povm_order_check(&rho, &e, &partition)?;
    Ok((record.coarse_rel - record.fine_rel).max(record.coarse_aff - record.fine_aff))
}

fn kraus_invariance_trial(cfg: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<f64> {
    let d = draw_dim(cfg, rng);
    let elements = rng.random_range(1..=6);
    let e = random_povm(d, elements, rng)?;
    let rho = draw_state(d, rng);
    let canonical = canonical_kraus(&e)?;
    let randomized = randomize_kraus(&canonical, rng);
    let v_rel = (relative_entropy_coherence_with_kraus(&rho, &canonical)?
        - relative_entropy_coherence_with_kraus(&rho, &randomized)?)
    .abs();
    let v_aff = (affinity_coherence_with_kraus(&rho, &canonical)?
        - affinity_coherence_with_kraus(&rho, &randomized)?)
    .abs();
    Ok(v_rel.max(v_aff))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> SuiteConfig {
        SuiteConfig {
            master_seed: 7,
            trials_per_check: 10,
            dims: vec![2, 3, 4],
            tol_assert: None,
            checks: CheckKind::ALL.to_vec(),
            oracle_samples: 20,
        }
    }

    #[test]
    fn default_config_is_valid() {
        SuiteConfig::default().validate().unwrap();
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = small_cfg();
        cfg.trials_per_check = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = small_cfg();
        cfg.dims = vec![];
        assert!(cfg.validate().is_err());
        let mut cfg = small_cfg();
        cfg.dims = vec![0, 2];
        assert!(cfg.validate().is_err());
        let mut cfg = small_cfg();
        cfg.tol_assert = Some(-1.0);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn check_names_roundtrip() {
        for kind in CheckKind::ALL {
            assert_eq!(CheckKind::from_name(kind.name()), Some(kind));
        }
        assert_eq!(
            CheckKind::from_name("order_preserving_block"),
            Some(CheckKind::OrderPreservingBlock)
        );
        assert_eq!(CheckKind::from_name("nonsense"), None);
    }

    #[test]
    fn empty_check_selector_gives_empty_report() {
        let mut cfg = small_cfg();
        cfg.checks = vec![];
        let report = run_suite(&cfg);
        assert!(report.checks.is_empty());
        assert_eq!(report.total_failures(), 0);
    }

    #[test]
    fn small_run_passes_every_check() {
        let report = run_suite(&small_cfg());
        for check in &report.checks {
            assert_eq!(
                check.failures, 0,
                "{} failed with worst violation {}",
                check.name, check.worst_violation
            );
            assert!(check.worst_violation <= check.tolerance);
        }
    }

    #[test]
    fn same_seed_gives_identical_reports() {
        let a = run_suite(&small_cfg()).normalized();
        let b = run_suite(&small_cfg()).normalized();
        assert_eq!(a, b);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn different_seed_changes_worst_margins() {
        let mut cfg = small_cfg();
        let a = run_suite(&cfg);
        cfg.master_seed = 8;
        let b = run_suite(&cfg);
        let differs = a
            .checks
            .iter()
            .zip(&b.checks)
            .any(|(x, y)| x.worst_violation != y.worst_violation);
        assert!(differs);
    }

    #[test]
    fn trials_are_order_independent() {
        let cfg = small_cfg();
        for kind in [CheckKind::Additivity, CheckKind::Monotonicity] {
            let n = total_trials(kind, &cfg) as u64;
            let forward: Vec<f64> = (0..n).map(|t| replay_trial(kind, &cfg, t).1).collect();
            let backward: Vec<f64> = (0..n)
                .rev()
                .map(|t| replay_trial(kind, &cfg, t).1)
                .collect();
            let reversed: Vec<f64> = backward.into_iter().rev().collect();
            assert_eq!(forward, reversed);
        }
    }

    #[test]
    fn worst_case_trial_replays_exactly() {
        let cfg = small_cfg();
        for kind in [CheckKind::OrderPreservingBlock, CheckKind::MaxCoherent] {
            let record = run_check(kind, &cfg);
            let (seed, violation) = replay_trial(kind, &cfg, record.worst_case_trial);
            assert_eq!(seed, record.worst_case_seed);
            assert_eq!(violation, record.worst_violation);
        }
    }

    #[test]
    fn order_preserving_appends_chain_trials() {
        let cfg = small_cfg();
        assert_eq!(total_trials(CheckKind::OrderPreservingBlock, &cfg), 11);
        assert_eq!(total_trials(CheckKind::Faithfulness, &cfg), 10);
    }

    #[test]
    fn unreachable_tolerance_produces_failures() {
        let mut cfg = small_cfg();
        cfg.checks = vec![CheckKind::ClosestFreeState, CheckKind::Additivity];
        cfg.tol_assert = Some(1e-18);
        let report = run_suite(&cfg);
        assert!(
            report.total_failures() > 0,
            "roundoff should exceed 1e-18 somewhere"
        );
    }

    #[test]
    fn seed_derivation_separates_checks_and_trials() {
        let a = derive_trial_seed(1, "faithfulness", 0);
        let b = derive_trial_seed(1, "faithfulness", 1);
        let c = derive_trial_seed(1, "monotonicity", 0);
        let d = derive_trial_seed(2, "faithfulness", 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }
}
