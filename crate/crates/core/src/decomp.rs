//! Projective decompositions and POVMs as first-class values: validation,
//! coarse-graining, refinement detection for the partial order ⪰, and random
//! generation of decomposition/refinement pairs.
//!
//! A decomposition `P = {P_m}` is stored as explicit projector matrices (not
//! bases) so that refinement checks stay basis-free. `Q ⪰ P` holds when every
//! `P_m` is a sum of `Q_n`'s over a disjoint cover `{Λ_m}` of the fine index
//! set; the witness records the assignment n ↦ m.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{
    self, ensure_finite, hermitian_deviation, identity_deviation, is_square, max_abs, max_abs_diff,
    trace_re, CMat,
};
use crate::spectral::hermitian_eig;
use crate::spectral::{haar_unitary, HermitianMatrix, Tolerances, UnitaryMatrix};

/// Ordered list of mutually orthogonal projectors summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveDecomposition {
    dim: usize,
    projectors: Vec<CMat>,
    block_dims: Vec<usize>,
}

impl ProjectiveDecomposition {
    /// Validates a list of matrices as an orthogonal decomposition.
    ///
    /// Checks, in order: squareness and matching dims, Hermiticity,
    /// idempotency `|P² - P| ≤ tol_proj`, pairwise orthogonality
    /// `|P_m P_n| ≤ tol_proj`, completeness `|ΣP - I| ≤ tol_proj`, and
    /// integer ranks from the traces.
    pub fn new(mats: Vec<CMat>, tol: &Tolerances) -> Result<Self> {
        if mats.is_empty() {
            return Err(Error::Empty);
        }
        let dim = is_square(&mats[0])?;
        for m in &mats {
            let d = is_square(m)?;
            if d != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: d,
                });
            }
            ensure_finite(m)?;
        }
        for (i, p) in mats.iter().enumerate() {
            let dev = hermitian_deviation(p);
            if dev > tol.herm {
                return Err(Error::ElementNonHermitian {
                    index: i,
                    deviation: dev,
                });
            }
            let dev = max_abs_diff(&(p * p), p);
            if dev > tol.proj {
                return Err(Error::NotIdempotent {
                    index: i,
                    deviation: dev,
                });
            }
        }
        for i in 0..mats.len() {
            for j in (i + 1)..mats.len() {
                let dev = max_abs(&(&mats[i] * &mats[j]));
                if dev > tol.proj {
                    return Err(Error::NotOrthogonal {
                        first: i,
                        second: j,
                        deviation: dev,
                    });
                }
            }
        }
        let mut sum = CMat::zeros(dim, dim);
        for p in &mats {
            sum += p;
        }
        let dev = identity_deviation(&sum);
        if dev > tol.proj {
            return Err(Error::Incomplete { deviation: dev });
        }
        let mut block_dims = Vec::with_capacity(mats.len());
        for (i, p) in mats.iter().enumerate() {
            let trace = trace_re(p);
            let rank = trace.round();
            if (trace - rank).abs() > 1e-6 || rank < 1.0 {
                return Err(Error::NonIntegerRank { index: i, trace });
            }
            block_dims.push(rank as usize);
        }
        let total: usize = block_dims.iter().sum();
        if total != dim {
            return Err(Error::SizeMismatch { total, dim });
        }
        Ok(Self {
            dim,
            projectors: mats,
            block_dims,
        })
    }

    /// P_m = Σ_k u_k u_k† over the m-th group of columns of `u`.
    pub fn from_blocks(u: &UnitaryMatrix, block_sizes: &[usize]) -> Result<Self> {
        let dim = u.dim();
        let total: usize = block_sizes.iter().sum();
        if total != dim || block_sizes.contains(&0) {
            return Err(Error::SizeMismatch { total, dim });
        }
        let mut projectors = Vec::with_capacity(block_sizes.len());
        let mut start = 0;
        for &size in block_sizes {
            let cols = u.matrix().columns(start, size);
            projectors.push(cols * cols.adjoint());
            start += size;
        }
        Self::new(projectors, &Tolerances::DEFAULT)
    }

    /// The trivial decomposition {I}.
    pub fn trivial(d: usize) -> Self {
        Self {
            dim: d,
            projectors: vec![CMat::identity(d, d)],
            block_dims: vec![d],
        }
    }

    /// The computational-basis decomposition {|k⟩⟨k|}.
    pub fn computational_basis(d: usize) -> Self {
        let id = UnitaryMatrix::new(CMat::identity(d, d), &Tolerances::DEFAULT).unwrap();
        Self::from_blocks(&id, &vec![1; d]).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of blocks M.
    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn projectors(&self) -> &[CMat] {
        &self.projectors
    }

    pub fn projector(&self, m: usize) -> &CMat {
        &self.projectors[m]
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    /// d×r isometry whose columns span range(P_m), from the eigenvectors of
    /// P_m with eigenvalue near one.
    pub fn block_basis(&self, m: usize) -> Result<CMat> {
        let p = HermitianMatrix::new(self.projectors[m].clone(), &Tolerances::DEFAULT)?;
        let (values, vectors) = hermitian_eig(&p)?;
        let r = self.block_dims[m];
        let start = self.dim - r;
        debug_assert!(values[start] > 0.5, "rank mismatch in block basis");
        Ok(vectors.matrix().columns(start, r).into_owned())
    }

    /// The decomposition viewed as a POVM (projectors are PSD and complete).
    pub fn to_povm(&self) -> Povm {
        Povm {
            dim: self.dim,
            elements: self.projectors.clone(),
        }
    }
}

impl Serialize for ProjectiveDecomposition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire {
            dim: usize,
            projectors: Vec<matrix::MatrixRows>,
        }
        Wire {
            dim: self.dim,
            projectors: self.projectors.iter().map(matrix::to_rows).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProjectiveDecomposition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            dim: usize,
            projectors: Vec<matrix::MatrixRows>,
        }
        let wire = Wire::deserialize(d)?;
        let mats = wire
            .projectors
            .iter()
            .map(matrix::from_rows)
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        let dec = ProjectiveDecomposition::new(mats, &Tolerances::DEFAULT)
            .map_err(serde::de::Error::custom)?;
        if dec.dim() != wire.dim {
            return Err(serde::de::Error::custom(format!(
                "declared dim {} does not match matrices of dim {}",
                wire.dim,
                dec.dim()
            )));
        }
        Ok(dec)
    }
}

/// Ordered list of PSD operators summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    dim: usize,
    elements: Vec<CMat>,
}

impl Povm {
    /// Validates a list of matrices as a POVM: Hermitian, PSD within
    /// `tol_psd`, and complete within `tol_proj`.
    pub fn new(mats: Vec<CMat>, tol: &Tolerances) -> Result<Self> {
        if mats.is_empty() {
            return Err(Error::Empty);
        }
        let dim = is_square(&mats[0])?;
        for m in &mats {
            let d = is_square(m)?;
            if d != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: d,
                });
            }
            ensure_finite(m)?;
        }
        for (i, e) in mats.iter().enumerate() {
            let dev = hermitian_deviation(e);
            if dev > tol.herm {
                return Err(Error::ElementNonHermitian {
                    index: i,
                    deviation: dev,
                });
            }
            let h = HermitianMatrix::new(matrix::hermitian_part(e), tol)?;
            let (values, _) = hermitian_eig(&h)?;
            let min_ev = values.first().copied().unwrap_or(0.0);
            if min_ev < -tol.psd {
                return Err(Error::ElementNotPositive {
                    index: i,
                    min_eigenvalue: min_ev,
                });
            }
        }
        let mut sum = CMat::zeros(dim, dim);
        for e in &mats {
            sum += e;
        }
        let dev = identity_deviation(&sum);
        if dev > tol.proj {
            return Err(Error::Incomplete { deviation: dev });
        }
        Ok(Self {
            dim,
            elements: mats,
        })
    }

    /// The trivial POVM {I}.
    pub fn trivial(d: usize) -> Self {
        Self {
            dim: d,
            elements: vec![CMat::identity(d, d)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of elements M.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[CMat] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &CMat {
        &self.elements[i]
    }
}

impl Serialize for Povm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire {
            dim: usize,
            elements: Vec<matrix::MatrixRows>,
        }
        Wire {
            dim: self.dim,
            elements: self.elements.iter().map(matrix::to_rows).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Povm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            dim: usize,
            elements: Vec<matrix::MatrixRows>,
        }
        let wire = Wire::deserialize(d)?;
        let mats = wire
            .elements
            .iter()
            .map(matrix::from_rows)
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        let povm = Povm::new(mats, &Tolerances::DEFAULT).map_err(serde::de::Error::custom)?;
        if povm.dim() != wire.dim {
            return Err(serde::de::Error::custom(format!(
                "declared dim {} does not match matrices of dim {}",
                wire.dim,
                povm.dim()
            )));
        }
        Ok(povm)
    }
}

/// Disjoint grouping {Λ_j} of outcome indices {0,…,M-1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Partition {
    groups: Vec<Vec<usize>>,
}

impl Partition {
    /// Validates that `groups` are non-empty, disjoint, and exactly cover
    /// `{0,…,num_outcomes-1}`.
    pub fn new(groups: Vec<Vec<usize>>, num_outcomes: usize) -> Result<Self> {
        let mut seen = vec![false; num_outcomes];
        let mut count = 0;
        for (j, group) in groups.iter().enumerate() {
            if group.is_empty() {
                return Err(Error::InvalidPartition {
                    reason: format!("group {j} is empty"),
                });
            }
            for &i in group {
                if i >= num_outcomes {
                    return Err(Error::InvalidPartition {
                        reason: format!("index {i} out of range 0..{num_outcomes}"),
                    });
                }
                if seen[i] {
                    return Err(Error::InvalidPartition {
                        reason: format!("index {i} appears in two groups"),
                    });
                }
                seen[i] = true;
                count += 1;
            }
        }
        if count != num_outcomes {
            return Err(Error::InvalidPartition {
                reason: format!("groups cover {count} of {num_outcomes} indices"),
            });
        }
        Ok(Self { groups })
    }

    /// One group per index: the identity coarse-graining.
    pub fn singletons(num_outcomes: usize) -> Self {
        Self {
            groups: (0..num_outcomes).map(|i| vec![i]).collect(),
        }
    }

    /// A single group holding every index: the total coarse-graining.
    pub fn total(num_outcomes: usize) -> Self {
        Self {
            groups: vec![(0..num_outcomes).collect()],
        }
    }

    /// Uniformly random partition: each index draws a label, labels are then
    /// compacted in order of first appearance.
    pub fn random(num_outcomes: usize, rng: &mut impl Rng) -> Self {
        let mut labels = vec![usize::MAX; num_outcomes];
        let mut next = 0;
        let raw: Vec<usize> = (0..num_outcomes)
            .map(|_| rng.random_range(0..num_outcomes))
            .collect();
        let mut map = std::collections::HashMap::new();
        for (i, &l) in raw.iter().enumerate() {
            let id = *map.entry(l).or_insert_with(|| {
                let id = next;
                next += 1;
                id
            });
            labels[i] = id;
        }
        let mut groups = vec![Vec::new(); next];
        for (i, &l) in labels.iter().enumerate() {
            groups[l].push(i);
        }
        Self { groups }
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// Number of groups N.
    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

/// Witness that Q refines P: maps each fine index n to the coarse block m
/// whose projector absorbs Q_n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RefinementWitness {
    assignment: Vec<usize>,
}

impl RefinementWitness {
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// The partition of the fine index set induced by the assignment,
    /// ordered by coarse index.
    pub fn induced_partition(&self, num_coarse: usize) -> Partition {
        let mut groups = vec![Vec::new(); num_coarse];
        for (n, &m) in self.assignment.iter().enumerate() {
            groups[m].push(n);
        }
        Partition { groups }
    }
}

/// Outcome of a refinement check.
#[derive(Debug, Clone, PartialEq)]
pub enum RefinementCheck {
    Refinement(RefinementWitness),
    NotRefinement(NotRefinementReason),
}

impl RefinementCheck {
    pub fn witness(&self) -> Option<&RefinementWitness> {
        match self {
            RefinementCheck::Refinement(w) => Some(w),
            RefinementCheck::NotRefinement(_) => None,
        }
    }

    pub fn is_refinement(&self) -> bool {
        matches!(self, RefinementCheck::Refinement(_))
    }
}

/// Why a pair (Q, P) fails to satisfy Q ⪰ P.
#[derive(Debug, Clone, PartialEq)]
pub enum NotRefinementReason {
    /// No coarse projector absorbs Q_n.
    Unabsorbed { fine_index: usize },
    /// Two coarse projectors both absorb Q_n within tolerance; the Λ sets
    /// would not be well-defined.
    Ambiguous {
        fine_index: usize,
        first: usize,
        second: usize,
    },
    /// The fine projectors assigned to block m do not sum back to P_m.
    SumMismatch { coarse_index: usize, deviation: f64 },
}

/// Decides Q ⪰ P by absorption: assigns each Q_n to the unique m with
/// `|P_m Q_n - Q_n| ≤ tol`, then verifies `Σ_{n∈Λ_m} Q_n = P_m` per block.
pub fn is_refinement(
    q: &ProjectiveDecomposition,
    p: &ProjectiveDecomposition,
    tol: f64,
) -> Result<RefinementCheck> {
    if q.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            left: q.dim(),
            right: p.dim(),
        });
    }
    let mut assignment = Vec::with_capacity(q.len());
    for (n, qn) in q.projectors().iter().enumerate() {
        let mut hit: Option<usize> = None;
        for (m, pm) in p.projectors().iter().enumerate() {
            let residual = max_abs_diff(&(pm * qn), qn);
            if residual <= tol {
                match hit {
                    None => hit = Some(m),
                    Some(first) => {
                        return Ok(RefinementCheck::NotRefinement(
                            NotRefinementReason::Ambiguous {
                                fine_index: n,
                                first,
                                second: m,
                            },
                        ))
                    }
                }
            }
        }
        match hit {
            Some(m) => assignment.push(m),
            None => {
                return Ok(RefinementCheck::NotRefinement(
                    NotRefinementReason::Unabsorbed { fine_index: n },
                ))
            }
        }
    }
    for (m, pm) in p.projectors().iter().enumerate() {
        let mut sum = CMat::zeros(p.dim(), p.dim());
        for (n, qn) in q.projectors().iter().enumerate() {
            if assignment[n] == m {
                sum += qn;
            }
        }
        let deviation = max_abs_diff(&sum, pm);
        if deviation > tol {
            return Ok(RefinementCheck::NotRefinement(
                NotRefinementReason::SumMismatch {
                    coarse_index: m,
                    deviation,
                },
            ));
        }
    }
    Ok(RefinementCheck::Refinement(RefinementWitness {
        assignment,
    }))
}

/// Coarse-grains a decomposition: the j-th new projector is Σ_{n∈Λ_j} P_n.
pub fn coarse_grain(
    p: &ProjectiveDecomposition,
    partition: &Partition,
) -> Result<ProjectiveDecomposition> {
    Partition::new(partition.groups.clone(), p.len())?;
    let mats = partition
        .groups
        .iter()
        .map(|group| {
            let mut sum = CMat::zeros(p.dim(), p.dim());
            for &n in group {
                sum += p.projector(n);
            }
            sum
        })
        .collect();
    ProjectiveDecomposition::new(mats, &Tolerances::DEFAULT)
}

/// Coarse-grains a POVM: F_j = Σ_{i∈Λ_j} E_i.
pub fn coarse_grain_povm(e: &Povm, partition: &Partition) -> Result<Povm> {
    Partition::new(partition.groups.clone(), e.len())?;
    let mats = partition
        .groups
        .iter()
        .map(|group| {
            let mut sum = CMat::zeros(e.dim(), e.dim());
            for &i in group {
                sum += e.element(i);
            }
            sum
        })
        .collect();
    Povm::new(mats, &Tolerances::DEFAULT)
}

/// Splits one block of rank ≥ 2 into two Haar-random orthogonal sub-blocks.
///
/// Returns the refined decomposition together with the witness for
/// `is_refinement(q, p)`.
pub fn refine_randomly(
    p: &ProjectiveDecomposition,
    rng: &mut impl Rng,
) -> Result<(ProjectiveDecomposition, RefinementWitness)> {
    let splittable: Vec<usize> = (0..p.len()).filter(|&m| p.block_dims()[m] >= 2).collect();
    if splittable.is_empty() {
        return Err(Error::NothingToRefine);
    }
    let m = splittable[rng.random_range(0..splittable.len())];
    let r = p.block_dims()[m];
    let basis = p.block_basis(m)?;
    let rotated = &basis * haar_unitary(r, rng).matrix();
    let split = rng.random_range(1..r);

    let first = rotated.columns(0, split);
    let second = rotated.columns(split, r - split);
    let q_first = first * first.adjoint();
    let q_second = second * second.adjoint();

    let mut mats = Vec::with_capacity(p.len() + 1);
    let mut assignment = Vec::with_capacity(p.len() + 1);
    for (k, proj) in p.projectors().iter().enumerate() {
        if k == m {
            mats.push(q_first.clone());
            mats.push(q_second.clone());
            assignment.push(m);
            assignment.push(m);
        } else {
            mats.push(proj.clone());
            assignment.push(k);
        }
    }
    let q = ProjectiveDecomposition::new(mats, &Tolerances::DEFAULT)?;
    Ok((q, RefinementWitness { assignment }))
}

/// Uniformly random composition of d into positive parts (each of the d-1
/// gaps is a block boundary with probability 1/2).
pub fn random_composition(d: usize, rng: &mut impl Rng) -> Vec<usize> {
    assert!(d >= 1);
    let mut sizes = Vec::new();
    let mut current = 1;
    for _ in 1..d {
        if rng.random::<bool>() {
            sizes.push(current);
            current = 1;
        } else {
            current += 1;
        }
    }
    sizes.push(current);
    sizes
}

/// Haar-random decomposition of dimension d with a random block composition.
pub fn random_decomposition(d: usize, rng: &mut impl Rng) -> ProjectiveDecomposition {
    let sizes = random_composition(d, rng);
    let u = haar_unitary(d, rng);
    ProjectiveDecomposition::from_blocks(&u, &sizes).expect("construction satisfies invariants")
}
