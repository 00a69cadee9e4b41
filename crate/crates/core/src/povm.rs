//! POVM coherence measures: the relative-entropy measure
//! `C_rel(ρ,E) = H[{p_i}] + Σ_i p_i S(ρ_i) - S(ρ)` and the affinity extension
//! `C(ρ,E) = 1 - Σ_i Tr[(A_i √ρ A_i†)²]`, with canonical measurement
//! operators A_i = √E_i.
//!
//! Both measures are invariant under the choice of measurement operators
//! (A_i ↦ U_i A_i leaves them unchanged) and monotone under outcome
//! coarse-graining. For C_rel the coarse side of that comparison is the
//! coarse-grained *instrument*: merged outcome probabilities
//! q_j = Σ_{i∈Λ_j} p_i with mixed outcome states ρ_j = Σ_{i∈Λ_j} (p_i/q_j) ρ_i,
//! which is not the same number as C_rel evaluated on the coarse POVM with its
//! own canonical Kraus set; see [`relative_entropy_coarse_direct`].

use rand::Rng;

use crate::block::clamp_tiny_negative;
use crate::decomp::{coarse_grain_povm, Partition, Povm};
use crate::error::{Error, Result};
use crate::matrix::{frobenius_norm_sq, herm_product_trace, identity_deviation, CMat};
use crate::spectral::{
    entropy_bits, ginibre, haar_unitary, psd_inv_root_raw, psd_root_raw, psd_sqrt,
    von_neumann_entropy, DensityMatrix, ProbabilityVector, Tolerances,
};

/// Measurement operators {A_i} with Σ_i A_i†A_i = I; each A_i†A_i is one
/// POVM element.
#[derive(Debug, Clone)]
pub struct KrausSet {
    dim: usize,
    operators: Vec<CMat>,
}

impl KrausSet {
    /// Validates completeness Σ A_i†A_i = I within `tol_proj`.
    pub fn new(operators: Vec<CMat>, tol: &Tolerances) -> Result<Self> {
        if operators.is_empty() {
            return Err(Error::Empty);
        }
        let dim = operators[0].nrows();
        for a in &operators {
            if a.nrows() != dim || a.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: a.nrows().max(a.ncols()),
                });
            }
        }
        let mut sum = CMat::zeros(dim, dim);
        for a in &operators {
            sum += a.adjoint() * a;
        }
        let deviation = identity_deviation(&sum);
        if deviation > tol.proj {
            return Err(Error::Incomplete { deviation });
        }
        Ok(Self { dim, operators })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn operators(&self) -> &[CMat] {
        &self.operators
    }

    /// The POVM {A_i†A_i} these operators measure.
    pub fn povm(&self) -> Result<Povm> {
        let elements = self.operators.iter().map(|a| a.adjoint() * a).collect();
        Povm::new(elements, &Tolerances::DEFAULT)
    }
}

/// Canonical measurement operators A_i = √E_i (principal PSD root).
pub fn canonical_kraus(e: &Povm) -> Result<KrausSet> {
    let tol = Tolerances::DEFAULT;
    let operators = e
        .elements()
        .iter()
        .map(|el| psd_root_raw(el, tol.psd))
        .collect::<Result<Vec<_>>>()?;
    KrausSet::new(operators, &tol)
}

/// Replaces each A_i by U_i A_i with independent Haar U_i; the measured POVM
/// is unchanged since A_i†U_i†U_iA_i = A_i†A_i.
pub fn randomize_kraus(k: &KrausSet, rng: &mut impl Rng) -> KrausSet {
    let operators = k
        .operators()
        .iter()
        .map(|a| haar_unitary(k.dim(), rng).matrix() * a)
        .collect();
    KrausSet {
        dim: k.dim(),
        operators,
    }
}

/// Outcome statistics of measuring ρ with a Kraus set: probabilities
/// p_i = Tr(A_i†A_i ρ) and, for p_i above the zero threshold, the
/// post-measurement states ρ_i = A_i ρ A_i† / p_i.
#[derive(Debug, Clone)]
pub struct OutcomeEnsemble {
    probs: ProbabilityVector,
    states: Vec<Option<DensityMatrix>>,
}

impl OutcomeEnsemble {
    pub fn probs(&self) -> &ProbabilityVector {
        &self.probs
    }

    /// Post-measurement state of outcome `i`; `None` when p_i ≤ tol_zero.
    pub fn state(&self, i: usize) -> Option<&DensityMatrix> {
        self.states[i].as_ref()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

pub fn outcome_ensemble(rho: &DensityMatrix, k: &KrausSet) -> Result<OutcomeEnsemble> {
    if rho.dim() != k.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: k.dim(),
        });
    }
    let tol = Tolerances::DEFAULT;
    let mut probs = Vec::with_capacity(k.len());
    let mut states = Vec::with_capacity(k.len());
    for a in k.operators() {
        let effect = a.adjoint() * a;
        let p = herm_product_trace(&effect, rho.matrix()).max(0.0);
        probs.push(p);
        if p > tol.zero {
            let mapped = a * rho.matrix() * a.adjoint();
            states.push(Some(DensityMatrix::normalized(mapped, &tol)?));
        } else {
            states.push(None);
        }
    }
    let probs = ProbabilityVector::new(probs, &tol)?;
    Ok(OutcomeEnsemble { probs, states })
}

/// C_rel(ρ,E) = H[{p_i}] + Σ_i p_i S(ρ_i) - S(ρ) in bits, evaluated with the
/// canonical Kraus set. Values in `(-1e-9, 0)` report as zero.
pub fn relative_entropy_povm_coherence(rho: &DensityMatrix, e: &Povm) -> Result<f64> {
    let k = canonical_kraus(e)?;
    relative_entropy_coherence_with_kraus(rho, &k)
}

/// C_rel evaluated with an explicit (possibly non-canonical) Kraus set.
pub fn relative_entropy_coherence_with_kraus(rho: &DensityMatrix, k: &KrausSet) -> Result<f64> {
    let ensemble = outcome_ensemble(rho, k)?;
    let value = ensemble_rel_value(&ensemble)? - von_neumann_entropy(rho)?;
    Ok(clamp_tiny_negative(value, 1e-9))
}

/// H[{p_i}] + Σ_i p_i S(ρ_i): the measurement part of C_rel.
fn ensemble_rel_value(ensemble: &OutcomeEnsemble) -> Result<f64> {
    let probs = ensemble.probs().as_slice();
    let mut value = entropy_bits(probs.iter().copied());
    for (i, &p) in probs.iter().enumerate() {
        if let Some(state) = ensemble.state(i) {
            value += p * von_neumann_entropy(state)?;
        }
    }
    Ok(value)
}

/// Affinity POVM coherence C(ρ,E) = 1 - Σ_i Tr[(A_i √ρ A_i†)²] with the
/// canonical Kraus set. Clamped to [0,1] within a 1e-12 band.
pub fn affinity_povm_coherence(rho: &DensityMatrix, e: &Povm) -> Result<f64> {
    let k = canonical_kraus(e)?;
    affinity_coherence_with_kraus(rho, &k)
}

/// Affinity measure from an explicit Kraus set.
pub fn affinity_coherence_with_kraus(rho: &DensityMatrix, k: &KrausSet) -> Result<f64> {
    if rho.dim() != k.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: k.dim(),
        });
    }
    let sqrt_rho = psd_sqrt(rho)?;
    let mut retained = 0.0;
    for a in k.operators() {
        let mapped = a * sqrt_rho.matrix() * a.adjoint();
        // A_i√ρA_i† is Hermitian PSD, so Tr[(·)²] = ‖·‖_F².
        retained += frobenius_norm_sq(&mapped);
    }
    let value = 1.0 - retained;
    if value > 1.0 && value < 1.0 + 1e-12 {
        return Ok(1.0);
    }
    Ok(clamp_tiny_negative(value, 1e-12))
}

/// Fine and coarse values of both POVM measures across one coarse-graining.
///
/// `coarse_rel` is the coarse-grained-instrument evaluation
/// (q_j = Σ_{i∈Λ_j} p_i, ρ_j = Σ_{i∈Λ_j} (p_i/q_j) ρ_i); `coarse_aff` is the
/// affinity measure of the coarse POVM F_j = Σ_{i∈Λ_j} E_i.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PovmOrderRecord {
    pub fine_rel: f64,
    pub coarse_rel: f64,
    pub fine_aff: f64,
    pub coarse_aff: f64,
}

pub fn povm_order_check(
    rho: &DensityMatrix,
    e: &Povm,
    partition: &Partition,
) -> Result<PovmOrderRecord> {
    if rho.dim() != e.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: e.dim(),
        });
    }
    Partition::new(partition.groups().to_vec(), e.len())?;
    let k = canonical_kraus(e)?;
    let ensemble = outcome_ensemble(rho, &k)?;
    let s_rho = von_neumann_entropy(rho)?;

    let fine_rel = clamp_tiny_negative(ensemble_rel_value(&ensemble)? - s_rho, 1e-9);
    let fine_aff = affinity_coherence_with_kraus(rho, &k)?;

    let coarse_rel = clamp_tiny_negative(
        coarse_instrument_rel_value(&ensemble, partition)? - s_rho,
        1e-9,
    );

    let f = coarse_grain_povm(e, partition)?;
    let coarse_aff = affinity_povm_coherence(rho, &f)?;

    Ok(PovmOrderRecord {
        fine_rel,
        coarse_rel,
        fine_aff,
        coarse_aff,
    })
}

/// H[{q_j}] + Σ_j q_j S(ρ_j) for the merged outcomes, with
/// ρ_j = Σ_{i∈Λ_j} (p_i/q_j) ρ_i.
fn coarse_instrument_rel_value(ensemble: &OutcomeEnsemble, partition: &Partition) -> Result<f64> {
    let tol = Tolerances::DEFAULT;
    let probs = ensemble.probs().as_slice();
    let dim = ensemble
        .states
        .iter()
        .flatten()
        .next()
        .map(|s| s.dim())
        .unwrap_or(0);
    let mut value = 0.0;
    let mut qs = Vec::with_capacity(partition.len());
    for group in partition.groups() {
        let q: f64 = group.iter().map(|&i| probs[i]).sum();
        qs.push(q);
        let mut mixed = CMat::zeros(dim, dim);
        for &i in group {
            if let Some(state) = ensemble.state(i) {
                mixed += state.matrix().scale(probs[i]);
            }
        }
        if crate::matrix::trace_re(&mixed) <= tol.zero {
            continue;
        }
        let state = DensityMatrix::normalized(mixed, &tol)?;
        value += q * von_neumann_entropy(&state)?;
    }
    value += entropy_bits(qs.into_iter());
    Ok(value)
}

/// C_rel of the coarse POVM evaluated directly through its own canonical
/// Kraus set. Differs in general from the instrument evaluation used in
/// [`povm_order_check`]; exposed so the two can be compared.
pub fn relative_entropy_coarse_direct(
    rho: &DensityMatrix,
    e: &Povm,
    partition: &Partition,
) -> Result<f64> {
    let f = coarse_grain_povm(e, partition)?;
    relative_entropy_povm_coherence(rho, &f)
}

/// Random M-element POVM E_i = S^{-1/2} G_iG_i† S^{-1/2} with Ginibre G_i and
/// S = Σ_k G_kG_k†, which is complete by construction.
pub fn random_povm(d: usize, m: usize, rng: &mut impl Rng) -> Result<Povm> {
    assert!(d >= 1 && m >= 1, "need d ≥ 1 and m ≥ 1");
    let tol = Tolerances::DEFAULT;
    for _ in 0..16 {
        let grams: Vec<CMat> = (0..m)
            .map(|_| {
                let g = ginibre(d, d, rng);
                &g * g.adjoint()
            })
            .collect();
        let mut total = CMat::zeros(d, d);
        for g in &grams {
            total += g;
        }
        let inv_root = match psd_inv_root_raw(&total, 1e-10) {
            Ok(ir) => ir,
            Err(_) => continue, // near-singular draw; try again
        };
        let elements = grams.iter().map(|g| &inv_root * g * &inv_root).collect();
        return Povm::new(elements, &tol);
    }
    Err(Error::Singular {
        min_eigenvalue: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::block_coherence;
    use crate::decomp::ProjectiveDecomposition;
    use crate::matrix::{max_abs_diff, CVec};
    use crate::spectral::{random_density, random_pure};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn z_povm() -> Povm {
        ProjectiveDecomposition::computational_basis(2).to_povm()
    }

    fn plus_state() -> DensityMatrix {
        let s = 1.0 / 2.0f64.sqrt();
        let psi = CVec::from_vec(vec![Complex64::new(s, 0.0), Complex64::new(s, 0.0)]);
        DensityMatrix::from_pure(&psi).unwrap()
    }

    fn diag_density(entries: &[f64]) -> DensityMatrix {
        let d = entries.len();
        let m = CMat::from_fn(d, d, |i, j| {
            if i == j {
                Complex64::new(entries[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        DensityMatrix::new(m, &Tolerances::DEFAULT).unwrap()
    }

    #[test]
    fn canonical_kraus_of_projective_povm_is_projectors() {
        let e = z_povm();
        let k = canonical_kraus(&e).unwrap();
        for (a, el) in k.operators().iter().zip(e.elements()) {
            assert!(max_abs_diff(a, el) < 1e-12);
        }
    }

    #[test]
    fn canonical_kraus_of_uniform_povm() {
        let half = CMat::identity(2, 2).scale(0.5);
        let e = Povm::new(vec![half.clone(), half], &Tolerances::DEFAULT).unwrap();
        let k = canonical_kraus(&e).unwrap();
        let expected = CMat::identity(2, 2).scale(1.0 / 2.0f64.sqrt());
        for a in k.operators() {
            assert!(max_abs_diff(a, &expected) < 1e-12);
        }
    }

    #[test]
    fn canonical_kraus_completeness_random_povm() {
        let mut rng = ChaCha8Rng::seed_from_u64(90);
        let e = random_povm(3, 4, &mut rng).unwrap();
        let k = canonical_kraus(&e).unwrap();
        let mut sum = CMat::zeros(3, 3);
        for a in k.operators() {
            sum += a.adjoint() * a;
        }
        assert!(identity_deviation(&sum) <= 1e-9);
    }

    #[test]
    fn randomize_kraus_reproduces_povm() {
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        let e = random_povm(3, 3, &mut rng).unwrap();
        let k = canonical_kraus(&e).unwrap();
        let k2 = randomize_kraus(&k, &mut rng);
        let back = k2.povm().unwrap();
        for (a, b) in back.elements().iter().zip(e.elements()) {
            assert!(max_abs_diff(a, b) <= 1e-10);
        }
    }

    #[test]
    fn outcome_ensemble_projective_diagonal() {
        let rho = diag_density(&[0.25, 0.75]);
        let k = canonical_kraus(&z_povm()).unwrap();
        let ensemble = outcome_ensemble(&rho, &k).unwrap();
        assert!((ensemble.probs().as_slice()[0] - 0.25).abs() < 1e-12);
        assert!((ensemble.probs().as_slice()[1] - 0.75).abs() < 1e-12);
        let s0 = ensemble.state(0).unwrap();
        assert!((s0.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn outcome_ensemble_trivial_povm() {
        let mut rng = ChaCha8Rng::seed_from_u64(92);
        let rho = random_density(3, 3, &mut rng);
        let k = canonical_kraus(&Povm::trivial(3)).unwrap();
        let ensemble = outcome_ensemble(&rho, &k).unwrap();
        assert_eq!(ensemble.probs().len(), 1);
        assert!((ensemble.probs().as_slice()[0] - 1.0).abs() < 1e-12);
        assert!(max_abs_diff(ensemble.state(0).unwrap().matrix(), rho.matrix()) < 1e-10);
    }

    #[test]
    fn zero_probability_outcome_is_omitted() {
        let rho = diag_density(&[1.0, 0.0]);
        let one = CMat::from_fn(2, 2, |i, j| {
            if i == 1 && j == 1 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let zero = CMat::from_fn(2, 2, |i, j| {
            if i == 0 && j == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let e = Povm::new(vec![one, zero], &Tolerances::DEFAULT).unwrap();
        let k = canonical_kraus(&e).unwrap();
        let ensemble = outcome_ensemble(&rho, &k).unwrap();
        assert!(ensemble.state(0).is_none());
        assert!(ensemble.state(1).is_some());
    }

    #[test]
    fn ensemble_reconstructs_channel_output() {
        // Σ_i p_i ρ_i must equal Σ_i A_i ρ A_i†.
        let mut rng = ChaCha8Rng::seed_from_u64(93);
        let rho = random_density(3, 2, &mut rng);
        let e = random_povm(3, 4, &mut rng).unwrap();
        let k = canonical_kraus(&e).unwrap();
        let ensemble = outcome_ensemble(&rho, &k).unwrap();
        let mut recon = CMat::zeros(3, 3);
        for (i, &p) in ensemble.probs().as_slice().iter().enumerate() {
            if let Some(s) = ensemble.state(i) {
                recon += s.matrix().scale(p);
            }
        }
        let mut direct = CMat::zeros(3, 3);
        for a in k.operators() {
            direct += a * rho.matrix() * a.adjoint();
        }
        assert!(max_abs_diff(&recon, &direct) <= 1e-9);
    }

    #[test]
    fn rel_coherence_trivial_povm_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(94);
        let rho = random_density(4, 4, &mut rng);
        let c = relative_entropy_povm_coherence(&rho, &Povm::trivial(4)).unwrap();
        assert!(c.abs() < 1e-10);
    }

    #[test]
    fn rel_coherence_plus_state_is_one_bit() {
        let c = relative_entropy_povm_coherence(&plus_state(), &z_povm()).unwrap();
        assert!((c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rel_coherence_diagonal_state_is_zero() {
        let rho = diag_density(&[0.25, 0.75]);
        let c = relative_entropy_povm_coherence(&rho, &z_povm()).unwrap();
        assert!(c.abs() < 1e-10);
    }

    #[test]
    fn affinity_povm_matches_block_for_projective() {
        let mut rng = ChaCha8Rng::seed_from_u64(95);
        for d in 2..=5 {
            let u = crate::spectral::haar_unitary(d, &mut rng);
            let p = ProjectiveDecomposition::from_blocks(&u, &vec![1; d]).unwrap();
            let rho = random_density(d, d, &mut rng);
            let via_block = block_coherence(&rho, &p).unwrap();
            let via_povm = affinity_povm_coherence(&rho, &p.to_povm()).unwrap();
            assert!((via_block - via_povm).abs() <= 1e-10);
        }
    }

    #[test]
    fn affinity_povm_trivial_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(96);
        let rho = random_density(3, 3, &mut rng);
        assert!(
            affinity_povm_coherence(&rho, &Povm::trivial(3))
                .unwrap()
                .abs()
                < 1e-12
        );
    }

    #[test]
    fn affinity_povm_uniform_pair_is_half_for_any_state() {
        // Each term is Tr[(√ρ/2)²] = 1/4, so the measure is 1/2 regardless
        // of ρ — the free set of this POVM is empty.
        let half = CMat::identity(2, 2).scale(0.5);
        let e = Povm::new(vec![half.clone(), half], &Tolerances::DEFAULT).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(97);
        for _ in 0..5 {
            let rho = random_density(2, rng.random_range(1..=2), &mut rng);
            let c = affinity_povm_coherence(&rho, &e).unwrap();
            assert!((c - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn affinity_depends_only_on_povm() {
        // Tr[(A_i√ρA_i†)²] = Tr(E_i√ρE_i√ρ): check against that direct form.
        let mut rng = ChaCha8Rng::seed_from_u64(98);
        let e = random_povm(4, 3, &mut rng).unwrap();
        let rho = random_density(4, 4, &mut rng);
        let sqrt_rho = psd_sqrt(&rho).unwrap();
        let direct: f64 = 1.0
            - e.elements()
                .iter()
                .map(|el| {
                    let t = el * sqrt_rho.matrix() * el * sqrt_rho.matrix();
                    t.trace().re
                })
                .sum::<f64>();
        let c = affinity_povm_coherence(&rho, &e).unwrap();
        assert!((c - direct).abs() < 1e-10);
    }

    #[test]
    fn order_record_singleton_partition_equal() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let e = random_povm(3, 4, &mut rng).unwrap();
        let rho = random_density(3, 3, &mut rng);
        let rec = povm_order_check(&rho, &e, &Partition::singletons(4)).unwrap();
        assert!((rec.fine_rel - rec.coarse_rel).abs() < 1e-10);
        assert!((rec.fine_aff - rec.coarse_aff).abs() < 1e-10);
    }

    #[test]
    fn order_record_total_partition() {
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        let e = random_povm(3, 4, &mut rng).unwrap();
        let rho = random_density(3, 2, &mut rng);
        let rec = povm_order_check(&rho, &e, &Partition::total(4)).unwrap();
        // The affinity measure of {I} vanishes; the instrument evaluation of
        // C_rel keeps the post-measurement mixing and stays non-negative.
        assert!(rec.coarse_aff.abs() < 1e-10);
        assert!(rec.coarse_rel >= -1e-9);
        assert!(rec.fine_rel >= rec.coarse_rel - 1e-9);
        assert!(rec.fine_aff >= rec.coarse_aff - 1e-9);
    }

    #[test]
    fn order_preserving_random_trials() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for _ in 0..15 {
            let d = rng.random_range(2..=4);
            let m = rng.random_range(2..=5);
            let e = random_povm(d, m, &mut rng).unwrap();
            let rho = random_density(d, rng.random_range(1..=d), &mut rng);
            let partition = Partition::random(m, &mut rng);
            let rec = povm_order_check(&rho, &e, &partition).unwrap();
            assert!(
                rec.fine_rel >= rec.coarse_rel - 1e-9,
                "rel: fine {} < coarse {}",
                rec.fine_rel,
                rec.coarse_rel
            );
            assert!(
                rec.fine_aff >= rec.coarse_aff - 1e-9,
                "aff: fine {} < coarse {}",
                rec.fine_aff,
                rec.coarse_aff
            );
        }
    }

    #[test]
    fn rel_instrument_vs_direct_coarse_evaluation_differ() {
        // Total coarse-graining of the Z measurement on |+⟩⟨+|: the direct
        // evaluation on {I} gives 0, the instrument evaluation keeps the
        // dephased mixture and gives 1 bit. Both are recorded; the order
        // comparison uses the instrument form.
        let rho = plus_state();
        let e = z_povm();
        let partition = Partition::total(2);
        let direct = relative_entropy_coarse_direct(&rho, &e, &partition).unwrap();
        let rec = povm_order_check(&rho, &e, &partition).unwrap();
        assert!(direct.abs() < 1e-12);
        assert!((rec.coarse_rel - 1.0).abs() < 1e-12);
        assert!(rec.fine_rel >= rec.coarse_rel - 1e-9);
    }

    #[test]
    fn coarse_graining_in_two_steps_composes() {
        let mut rng = ChaCha8Rng::seed_from_u64(102);
        let e = random_povm(3, 6, &mut rng).unwrap();
        let rho = random_density(3, 3, &mut rng);
        // First merge {0,1},{2,3},{4,5}, then {0,1},{2}: the composite is
        // {0,1,2,3},{4,5}.
        let first = Partition::new(vec![vec![0, 1], vec![2, 3], vec![4, 5]], 6).unwrap();
        let second = Partition::new(vec![vec![0, 1], vec![2]], 3).unwrap();
        let combined = Partition::new(vec![vec![0, 1, 2, 3], vec![4, 5]], 6).unwrap();

        let once = coarse_grain_povm(&coarse_grain_povm(&e, &first).unwrap(), &second).unwrap();
        let direct = coarse_grain_povm(&e, &combined).unwrap();
        for (a, b) in once.elements().iter().zip(direct.elements()) {
            assert!(max_abs_diff(a, b) < 1e-12);
        }
        let via_steps = affinity_povm_coherence(&rho, &once).unwrap();
        let via_combined = affinity_povm_coherence(&rho, &direct).unwrap();
        assert!((via_steps - via_combined).abs() < 1e-9);

        let rel_steps = relative_entropy_povm_coherence(&rho, &once).unwrap();
        let rel_combined = relative_entropy_povm_coherence(&rho, &direct).unwrap();
        assert!((rel_steps - rel_combined).abs() < 1e-9);
    }

    #[test]
    fn kraus_choice_invariance_both_measures() {
        let mut rng = ChaCha8Rng::seed_from_u64(103);
        for _ in 0..10 {
            let d = rng.random_range(2..=4);
            let m = rng.random_range(2..=4);
            let e = random_povm(d, m, &mut rng).unwrap();
            let rho = random_density(d, d, &mut rng);
            let k = canonical_kraus(&e).unwrap();
            let k2 = randomize_kraus(&k, &mut rng);
            let rel_a = relative_entropy_coherence_with_kraus(&rho, &k).unwrap();
            let rel_b = relative_entropy_coherence_with_kraus(&rho, &k2).unwrap();
            assert!((rel_a - rel_b).abs() <= 1e-9);
            let aff_a = affinity_coherence_with_kraus(&rho, &k).unwrap();
            let aff_b = affinity_coherence_with_kraus(&rho, &k2).unwrap();
            assert!((aff_a - aff_b).abs() <= 1e-9);
        }
    }

    #[test]
    fn rel_nonnegative_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(104);
        for _ in 0..20 {
            let d = rng.random_range(2..=5);
            let m = rng.random_range(1..=5);
            let e = random_povm(d, m, &mut rng).unwrap();
            let rho = random_density(d, rng.random_range(1..=d), &mut rng);
            let c = relative_entropy_povm_coherence(&rho, &e).unwrap();
            assert!(c >= -1e-9, "C_rel = {c} went negative");
        }
    }

    #[test]
    fn pure_state_rel_equals_outcome_entropy_part() {
        // For pure ρ: S(ρ) = 0 and each outcome A_i|ψ⟩ is pure, so
        // C_rel = H[{p_i}].
        let mut rng = ChaCha8Rng::seed_from_u64(105);
        let d = 3;
        let u = crate::spectral::haar_unitary(d, &mut rng);
        let p = ProjectiveDecomposition::from_blocks(&u, &vec![1; d]).unwrap();
        let rho = random_pure(d, &mut rng);
        let k = canonical_kraus(&p.to_povm()).unwrap();
        let ensemble = outcome_ensemble(&rho, &k).unwrap();
        let h = entropy_bits(ensemble.probs().as_slice().iter().copied());
        let c = relative_entropy_povm_coherence(&rho, &p.to_povm()).unwrap();
        assert!((c - h).abs() < 1e-9);
    }
}
