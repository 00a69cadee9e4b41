//! Block (subspace) and POVM coherence measures with a randomized
//! property-verification suite.
//!
//! The library computes coherence of a state relative to a projective
//! decomposition or a POVM:
//!
//! - the 1/2-affinity block measure `C(ρ,P) = 1 - Σ_m Tr[(P_m √ρ P_m)²]`,
//!   together with its exact closest free state,
//! - the relative-entropy POVM measure
//!   `C_rel(ρ,E) = H[{p_i}] + Σ_i p_i S(ρ_i) - S(ρ)` (bits), and
//! - the affinity POVM extension `C(ρ,E) = 1 - Σ_i Tr[(A_i √ρ A_i†)²]`.
//!
//! Measurements carry a coarse-graining partial order (merge outcomes, get a
//! coarser measurement); all three measures are monotone along it. The
//! [`suite`] module turns that statement and the other measure axioms
//! (faithfulness, monotonicity under free operations, additivity) into seeded
//! randomized checks with recorded worst-case margins.

pub mod block;
pub mod decomp;
pub mod error;
pub mod matrix;
pub mod povm;
pub mod spectral;
pub mod suite;

pub use block::{
    affinity_distance, apply_operation, block_coherence, closest_free_state, dephase,
    max_coherent_state, random_free_state, sample_free_operation, FreeOperation,
};
pub use decomp::{
    coarse_grain, coarse_grain_povm, is_refinement, random_composition, random_decomposition,
    refine_randomly, Partition, Povm, ProjectiveDecomposition, RefinementCheck, RefinementWitness,
};
pub use error::{Error, Result};
pub use matrix::{CMat, CVec};
pub use povm::{
    affinity_povm_coherence, canonical_kraus, outcome_ensemble, povm_order_check, random_povm,
    randomize_kraus, relative_entropy_povm_coherence, KrausSet, OutcomeEnsemble, PovmOrderRecord,
};
pub use spectral::{
    haar_unitary, hermitian_eig, psd_sqrt, random_density, random_pure, shannon_entropy,
    von_neumann_entropy, DensityMatrix, HermitianMatrix, ProbabilityVector, Tolerances,
    UnitaryMatrix,
};
pub use suite::{run_suite, CheckKind, CheckRecord, SuiteConfig, SuiteReport};
