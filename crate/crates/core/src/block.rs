//! The 1/2-affinity block coherence measure and its satellite objects:
//! affinity distance, exact closest free state, block dephasing, maximally
//! coherent states, and a sampled family of free operations.
//!
//! For a state ρ and an orthogonal decomposition P = {P_m},
//!
//! ```text
//! C(ρ,P) = 1 - Σ_m Tr[(P_m √ρ P_m)²]
//! ```
//!
//! equals the minimal 1/2-affinity distance `1 - [Tr(√ρ√σ)]²` from ρ to the
//! block-diagonal (free) states σ = Σ_m P_m σ P_m, and the minimum is attained
//! at a unique closed-form state built from the pinched blocks of √ρ.

use rand::Rng;

use crate::decomp::ProjectiveDecomposition;
use crate::error::{Error, Result};
use crate::matrix::{frobenius_norm_sq, herm_product_trace, CMat, CVec};
use crate::spectral::{
    complex_gaussian, flat_simplex_weights, haar_unitary, psd_sqrt, random_density, DensityMatrix,
    ProbabilityVector, Tolerances, UnitaryMatrix,
};

fn ensure_same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { left: a, right: b });
    }
    Ok(())
}

/// Block coherence C(ρ,P) = 1 - Σ_m Tr[(P_m √ρ P_m)²].
///
/// Values in `(-1e-12, 0)` report as exactly zero.
pub fn block_coherence(rho: &DensityMatrix, p: &ProjectiveDecomposition) -> Result<f64> {
    ensure_same_dim(rho.dim(), p.dim())?;
    let sqrt_rho = psd_sqrt(rho)?;
    Ok(coherence_from_sqrt(sqrt_rho.matrix(), p))
}

/// Same sum evaluated from a precomputed √ρ.
pub(crate) fn coherence_from_sqrt(sqrt_rho: &CMat, p: &ProjectiveDecomposition) -> f64 {
    let mut retained = 0.0;
    for pm in p.projectors() {
        let pinched = pm * sqrt_rho * pm;
        // Tr[(P_m √ρ P_m)²] = ‖P_m √ρ P_m‖_F² since the pinching is Hermitian.
        retained += frobenius_norm_sq(&pinched);
    }
    clamp_tiny_negative(1.0 - retained, 1e-12)
}

pub(crate) fn clamp_tiny_negative(v: f64, band: f64) -> f64 {
    if v < 0.0 && v > -band {
        0.0
    } else {
        v
    }
}

/// 1/2-affinity distance d_a(ρ,σ) = 1 - [Tr(√ρ√σ)]², clamped to [0,1].
pub fn affinity_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    ensure_same_dim(rho.dim(), sigma.dim())?;
    let a = psd_sqrt(rho)?;
    let b = psd_sqrt(sigma)?;
    let affinity = herm_product_trace(a.matrix(), b.matrix());
    Ok((1.0 - affinity * affinity).clamp(0.0, 1.0))
}

/// The unique closest free state
/// σ_ρ = ⊕_m w_m · (P_m√ρP_m)²/Tr[(P_m√ρP_m)²] with
/// w_m = Tr[(P_m√ρP_m)²] / Σ_n Tr[(P_n√ρP_n)²].
///
/// Blocks of weight ≤ tol_zero are omitted. Satisfies
/// `affinity_distance(ρ, σ_ρ) = block_coherence(ρ, P)`.
pub fn closest_free_state(
    rho: &DensityMatrix,
    p: &ProjectiveDecomposition,
) -> Result<DensityMatrix> {
    ensure_same_dim(rho.dim(), p.dim())?;
    let tol = Tolerances::DEFAULT;
    let sqrt_rho = psd_sqrt(rho)?;
    let d = rho.dim();
    let mut total = 0.0;
    let mut accum = CMat::zeros(d, d);
    for pm in p.projectors() {
        let pinched = pm * sqrt_rho.matrix() * pm;
        let weight = frobenius_norm_sq(&pinched);
        if weight > tol.zero {
            accum += &pinched * &pinched;
            total += weight;
        }
    }
    if total <= tol.zero {
        return Err(Error::DegenerateNormalization { total });
    }
    DensityMatrix::normalized(accum, &tol)
}

/// Block dephasing ρ ↦ Σ_m P_m ρ P_m, the projection onto the free set.
pub fn dephase(rho: &DensityMatrix, p: &ProjectiveDecomposition) -> Result<DensityMatrix> {
    ensure_same_dim(rho.dim(), p.dim())?;
    let d = rho.dim();
    let mut accum = CMat::zeros(d, d);
    for pm in p.projectors() {
        accum += pm * rho.matrix() * pm;
    }
    DensityMatrix::normalized(accum, &Tolerances::DEFAULT)
}

/// A maximally coherent pure state |ψ⟩ = (1/√M) Σ_m |ψ_m⟩ with each |ψ_m⟩
/// Haar-random inside range(P_m). Its block coherence is 1 - 1/M.
pub fn max_coherent_state(
    p: &ProjectiveDecomposition,
    rng: &mut impl Rng,
) -> Result<DensityMatrix> {
    superposed_state(p, &vec![1.0 / p.len() as f64; p.len()], rng)
}

/// Pure state Σ_m √w_m |ψ_m⟩ with prescribed block weights w and Haar-random
/// unit vectors |ψ_m⟩ ∈ range(P_m). Weights must sum to one.
pub fn superposed_state(
    p: &ProjectiveDecomposition,
    weights: &[f64],
    rng: &mut impl Rng,
) -> Result<DensityMatrix> {
    if weights.len() != p.len() {
        return Err(Error::DimensionMismatch {
            left: weights.len(),
            right: p.len(),
        });
    }
    let d = p.dim();
    let mut psi = CVec::zeros(d);
    for (m, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        let component = random_vector_in_range(p.projector(m), rng);
        psi += component.scale(w.sqrt());
    }
    DensityMatrix::from_pure(&psi)
}

/// Haar-random unit vector in the range of a projector: project a Gaussian
/// vector and normalize.
fn random_vector_in_range(projector: &CMat, rng: &mut impl Rng) -> CVec {
    let d = projector.nrows();
    loop {
        let g = CVec::from_fn(d, |_, _| complex_gaussian(rng));
        let projected = projector * g;
        let norm = projected.norm();
        if norm > 1e-8 {
            return projected.scale(1.0 / norm);
        }
    }
}

/// A random free state ⊕_m w_m σ_m: flat-simplex weights across blocks and an
/// independent random density matrix on each block's range.
pub fn random_free_state(p: &ProjectiveDecomposition, rng: &mut impl Rng) -> Result<DensityMatrix> {
    let d = p.dim();
    let weights = flat_simplex_weights(p.len(), rng);
    let mut accum = CMat::zeros(d, d);
    for (m, &w) in weights.iter().enumerate() {
        let r = p.block_dims()[m];
        let rank = rng.random_range(1..=r);
        let small = random_density(r, rank, rng);
        let basis = p.block_basis(m)?;
        accum += (&basis * small.matrix() * basis.adjoint()).scale(w);
    }
    DensityMatrix::normalized(accum, &Tolerances::DEFAULT)
}

/// A channel that maps the free set of a decomposition into itself.
///
/// The family covers unital non-unitary (dephasing), invariance
/// (block-diagonal unitaries), block-permuting (swaps of equal-rank blocks),
/// and convex-combination behavior.
#[derive(Debug, Clone)]
pub enum FreeOperation {
    /// Conjugation by U = ⊕_m U_m; commutes with every P_m.
    BlockUnitary { unitary: UnitaryMatrix },
    /// ρ ↦ Σ_m P_m ρ P_m.
    Dephasing {
        decomposition: ProjectiveDecomposition,
    },
    /// Conjugation by the involution exchanging two equal-rank block ranges
    /// through a subspace unitary, acting as the identity elsewhere.
    BlockSwap {
        block_a: usize,
        block_b: usize,
        unitary: UnitaryMatrix,
    },
    /// ρ ↦ Σ_i w_i Φ_i(ρ) for free Φ_i.
    ConvexMixture {
        weights: ProbabilityVector,
        operations: Vec<FreeOperation>,
    },
}

impl FreeOperation {
    pub fn kind_name(&self) -> &'static str {
        match self {
            FreeOperation::BlockUnitary { .. } => "block-unitary",
            FreeOperation::Dephasing { .. } => "dephasing",
            FreeOperation::BlockSwap { .. } => "block-swap",
            FreeOperation::ConvexMixture { .. } => "convex-mixture",
        }
    }
}

/// Draws one free operation, uniformly over the four kinds. A block swap
/// falls back to a block unitary when no two blocks share a rank; mixture
/// components are drawn from the three base kinds.
pub fn sample_free_operation(
    p: &ProjectiveDecomposition,
    rng: &mut impl Rng,
) -> Result<FreeOperation> {
    sample_operation_inner(p, rng, true)
}

fn sample_operation_inner(
    p: &ProjectiveDecomposition,
    rng: &mut impl Rng,
    allow_mixture: bool,
) -> Result<FreeOperation> {
    let kinds = if allow_mixture { 4 } else { 3 };
    match rng.random_range(0..kinds) {
        0 => Ok(FreeOperation::BlockUnitary {
            unitary: random_block_unitary(p, rng)?,
        }),
        1 => Ok(FreeOperation::Dephasing {
            decomposition: p.clone(),
        }),
        2 => match sample_block_swap(p, rng)? {
            Some(op) => Ok(op),
            None => Ok(FreeOperation::BlockUnitary {
                unitary: random_block_unitary(p, rng)?,
            }),
        },
        _ => {
            let w = rng.random::<f64>();
            let weights = ProbabilityVector::new(vec![w, 1.0 - w], &Tolerances::DEFAULT)?;
            let first = sample_operation_inner(p, rng, false)?;
            let second = sample_operation_inner(p, rng, false)?;
            Ok(FreeOperation::ConvexMixture {
                weights,
                operations: vec![first, second],
            })
        }
    }
}

/// U = Σ_m W_m H_m W_m† with independent Haar H_m per block; block-diagonal
/// with respect to p.
pub fn random_block_unitary(
    p: &ProjectiveDecomposition,
    rng: &mut impl Rng,
) -> Result<UnitaryMatrix> {
    let d = p.dim();
    let mut u = CMat::zeros(d, d);
    for m in 0..p.len() {
        let r = p.block_dims()[m];
        let basis = p.block_basis(m)?;
        let h = haar_unitary(r, rng);
        u += &basis * h.matrix() * basis.adjoint();
    }
    UnitaryMatrix::new(u, &Tolerances::DEFAULT)
}

fn sample_block_swap(
    p: &ProjectiveDecomposition,
    rng: &mut impl Rng,
) -> Result<Option<FreeOperation>> {
    let mut pairs = Vec::new();
    for a in 0..p.len() {
        for b in (a + 1)..p.len() {
            if p.block_dims()[a] == p.block_dims()[b] {
                pairs.push((a, b));
            }
        }
    }
    let Some(&(a, b)) = pairs.get(rng.random_range(0..pairs.len().max(1))) else {
        return Ok(None);
    };
    let x = haar_unitary(p.block_dims()[a], rng);
    Ok(Some(block_swap_operation(p, a, b, &x)?))
}

/// The involution W_b X W_a† + W_a X† W_b† + (I - P_a - P_b): it exchanges
/// the two block ranges through X and fixes every other block.
pub fn block_swap_operation(
    p: &ProjectiveDecomposition,
    block_a: usize,
    block_b: usize,
    subspace_unitary: &UnitaryMatrix,
) -> Result<FreeOperation> {
    let ra = p.block_dims()[block_a];
    let rb = p.block_dims()[block_b];
    if ra != rb {
        return Err(Error::DimensionMismatch {
            left: ra,
            right: rb,
        });
    }
    ensure_same_dim(subspace_unitary.dim(), ra)?;
    let wa = p.block_basis(block_a)?;
    let wb = p.block_basis(block_b)?;
    let x = subspace_unitary.matrix();
    let mut u = CMat::identity(p.dim(), p.dim());
    u -= p.projector(block_a);
    u -= p.projector(block_b);
    u += &wb * x * wa.adjoint();
    u += &wa * x.adjoint() * wb.adjoint();
    Ok(FreeOperation::BlockSwap {
        block_a,
        block_b,
        unitary: UnitaryMatrix::new(u, &Tolerances::DEFAULT)?,
    })
}

/// Applies a free operation; the output is validated as a density matrix.
pub fn apply_operation(op: &FreeOperation, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let tol = Tolerances::DEFAULT;
    match op {
        FreeOperation::BlockUnitary { unitary } | FreeOperation::BlockSwap { unitary, .. } => {
            ensure_same_dim(unitary.dim(), rho.dim())?;
            let m = unitary.matrix() * rho.matrix() * unitary.matrix().adjoint();
            DensityMatrix::normalized(m, &tol)
        }
        FreeOperation::Dephasing { decomposition } => dephase(rho, decomposition),
        FreeOperation::ConvexMixture {
            weights,
            operations,
        } => {
            let d = rho.dim();
            let mut accum = CMat::zeros(d, d);
            for (w, inner) in weights.as_slice().iter().zip(operations) {
                let mapped = apply_operation(inner, rho)?;
                accum += mapped.matrix().scale(*w);
            }
            DensityMatrix::normalized(accum, &tol)
        }
    }
}
