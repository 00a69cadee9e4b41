//! Validated Hermitian matrix calculus: eigendecomposition, principal square
//! root, entropies, and seeded random generators for states and unitaries.
//!
//! Every validated type clamps what is plainly roundoff and rejects what is
//! not: eigenvalues in `(-tol_psd, 0)` are set to zero, anything more negative
//! is an error. Entropies are in bits (log base 2).

use nalgebra::linalg::SymmetricEigen;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::de::Deserializer;
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{
    self, ensure_finite, frobenius_norm_sq, hermitian_deviation, hermitian_part, is_square,
    max_abs, max_abs_diff, trace_re, CMat, CVec,
};

/// Absolute tolerances for validation and reconstruction checks.
///
/// Double-precision spectral routines on dims ≤ 64 sit comfortably inside
/// these bands; violations beyond them indicate bad input, not roundoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Hermiticity: max-abs of `M - M†`.
    pub herm: f64,
    /// Positivity: admissible negative dip of the smallest eigenvalue.
    pub psd: f64,
    /// Unit trace deviation.
    pub trace: f64,
    /// Unitarity: max-abs of `U†U - I`.
    pub unitary: f64,
    /// Spectral reconstruction residual.
    pub recon: f64,
    /// Probability vector entries and sum.
    pub prob: f64,
    /// Projector idempotency, orthogonality, and completeness.
    pub proj: f64,
    /// Refinement containment test `|P_m Q_n - Q_n|`; looser than the
    /// construction tolerances because products amplify roundoff.
    pub refine: f64,
    /// Threshold below which a weight or probability counts as zero.
    pub zero: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        herm: 1e-10,
        psd: 1e-10,
        trace: 1e-10,
        unitary: 1e-10,
        recon: 1e-9,
        prob: 1e-10,
        proj: 1e-9,
        refine: 1e-8,
        zero: 1e-12,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// A square complex matrix validated to be Hermitian within `tol.herm`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    mat: CMat,
}

impl HermitianMatrix {
    pub fn new(mat: CMat, tol: &Tolerances) -> Result<Self> {
        is_square(&mat)?;
        ensure_finite(&mat)?;
        let deviation = hermitian_deviation(&mat);
        if deviation > tol.herm {
            return Err(Error::NonHermitian {
                deviation,
                tolerance: tol.herm,
            });
        }
        Ok(Self { mat })
    }

    /// Wraps a matrix that is Hermitian by construction.
    pub(crate) fn from_valid(mat: CMat) -> Self {
        debug_assert!(hermitian_deviation(&mat) <= 1e-9);
        Self { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }
}

/// A square complex matrix validated to be unitary within `tol.unitary`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    mat: CMat,
}

impl UnitaryMatrix {
    pub fn new(mat: CMat, tol: &Tolerances) -> Result<Self> {
        let d = is_square(&mat)?;
        ensure_finite(&mat)?;
        let id = CMat::identity(d, d);
        let dev_left = max_abs_diff(&(mat.adjoint() * &mat), &id);
        let dev_right = max_abs_diff(&(&mat * mat.adjoint()), &id);
        let deviation = dev_left.max(dev_right);
        if deviation > tol.unitary {
            return Err(Error::NotUnitary {
                deviation,
                tolerance: tol.unitary,
            });
        }
        Ok(Self { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    /// The `k`-th column as a vector.
    pub fn column(&self, k: usize) -> CVec {
        CVec::from_column_slice(self.mat.column(k).as_slice())
    }
}

/// Hermitian, positive semidefinite, unit-trace operator: the state ρ.
///
/// Construction clamps eigenvalues in `(-tol_psd, 0)` to zero and
/// renormalizes the trace to exactly one; see [`DensityMatrix::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMat,
}

impl DensityMatrix {
    /// Validates `mat` as a density matrix.
    ///
    /// The Hermitian part `(M+M†)/2` is taken before the spectral checks.
    /// On success the returned matrix has its eigenvalues clamped to
    /// `[0, ∞)` and its trace renormalized to one.
    pub fn new(mat: CMat, tol: &Tolerances) -> Result<Self> {
        is_square(&mat)?;
        ensure_finite(&mat)?;
        let deviation = hermitian_deviation(&mat);
        if deviation > tol.herm {
            return Err(Error::NonHermitian {
                deviation,
                tolerance: tol.herm,
            });
        }
        let trace_dev = (trace_re(&mat) - 1.0).abs();
        if trace_dev > tol.trace {
            return Err(Error::TraceDeviation {
                deviation: trace_dev,
                tolerance: tol.trace,
            });
        }
        Self::clamp_and_normalize(hermitian_part(&mat), tol)
    }

    /// Validates `mat / Tr(mat)` as a density matrix.
    ///
    /// For operators that are positive and Hermitian by construction but
    /// whose trace carries roundoff (pinchings, Kraus outputs, mixtures).
    pub(crate) fn normalized(mat: CMat, tol: &Tolerances) -> Result<Self> {
        is_square(&mat)?;
        let t = trace_re(&mat);
        if t <= tol.zero {
            return Err(Error::DegenerateNormalization { total: t });
        }
        Self::clamp_and_normalize(hermitian_part(&mat).scale(1.0 / t), tol)
    }

    fn clamp_and_normalize(herm: CMat, tol: &Tolerances) -> Result<Self> {
        let scale = max_abs(&herm).max(1.0);
        let eig = hermitian_eig_raw(herm)?;
        let mut min_ev = f64::INFINITY;
        let mut clamped = Vec::with_capacity(eig.values.len());
        for &ev in &eig.values {
            min_ev = min_ev.min(ev);
            clamped.push(ev.max(0.0));
        }
        // The clamping band scales with the matrix norm so that validation
        // of prenormalized operators keeps a meaningful relative test.
        if min_ev < -tol.psd * scale {
            return Err(Error::NotPositive {
                min_eigenvalue: min_ev,
                tolerance: tol.psd,
            });
        }
        let total: f64 = clamped.iter().sum();
        if total <= tol.zero {
            return Err(Error::DegenerateNormalization { total });
        }
        let lam = CVec::from_iterator(
            clamped.len(),
            clamped.iter().map(|&ev| Complex64::new(ev / total, 0.0)),
        );
        let mat = &eig.vectors * CMat::from_diagonal(&lam) * eig.vectors.adjoint();
        Ok(Self {
            mat: hermitian_part(&mat),
        })
    }

    /// |ψ⟩⟨ψ| for a nonzero vector ψ (normalized internally).
    pub fn from_pure(psi: &CVec) -> Result<Self> {
        let norm = psi.norm();
        if norm <= 1e-150 {
            return Err(Error::DegenerateNormalization { total: 0.0 });
        }
        let v = psi.scale(1.0 / norm);
        let mat = &v * v.adjoint();
        Self::normalized(mat, &Tolerances::DEFAULT)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    /// Tr(ρ²); equals 1 exactly for pure states.
    pub fn purity(&self) -> f64 {
        frobenius_norm_sq(&self.mat)
    }

    /// The maximally mixed state I/d.
    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            mat: CMat::identity(d, d).scale(1.0 / d as f64),
        }
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        matrix::to_rows(&self.mat).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = matrix::MatrixRows::deserialize(deserializer)?;
        let mat = matrix::from_rows(&rows).map_err(serde::de::Error::custom)?;
        DensityMatrix::new(mat, &Tolerances::DEFAULT).map_err(serde::de::Error::custom)
    }
}

/// Non-negative reals summing to one within `tol.prob`.
///
/// Entries in `(-tol_prob, 0)` are clamped to zero at construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbabilityVector {
    probs: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(mut probs: Vec<f64>, tol: &Tolerances) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Empty);
        }
        for (i, p) in probs.iter_mut().enumerate() {
            if !p.is_finite() || *p < -tol.prob {
                return Err(Error::NegativeProbability {
                    index: i,
                    value: *p,
                });
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > tol.prob {
            return Err(Error::ProbabilityNotNormalized {
                sum,
                tolerance: tol.prob,
            });
        }
        Ok(Self { probs })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub struct HermitianEig {
    /// Real eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Unitary matrix whose k-th column is the eigenvector of `values[k]`.
    pub vectors: CMat,
}

fn hermitian_eig_raw(h: CMat) -> Result<HermitianEig> {
    let d = h.nrows();
    if d == 0 {
        return Err(Error::Empty);
    }
    let eig =
        SymmetricEigen::try_new(h, f64::EPSILON, 0).ok_or(Error::ConvergenceFailure { dim: d })?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMat::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(HermitianEig { values, vectors })
}

/// Eigendecomposition with ascending eigenvalues and orthonormal eigenvectors.
///
/// The output satisfies `V diag(λ) V† = h` within `tol_recon` in max-abs norm;
/// a residual beyond that reports as [`Error::ConvergenceFailure`].
pub fn hermitian_eig(h: &HermitianMatrix) -> Result<(Vec<f64>, UnitaryMatrix)> {
    let tol = Tolerances::DEFAULT;
    let sym = hermitian_part(h.matrix());
    let eig = hermitian_eig_raw(sym.clone())?;
    let lam = CVec::from_iterator(
        eig.values.len(),
        eig.values.iter().map(|&ev| Complex64::new(ev, 0.0)),
    );
    let recon = &eig.vectors * CMat::from_diagonal(&lam) * eig.vectors.adjoint();
    let residual = max_abs_diff(&recon, h.matrix());
    if residual > tol.recon {
        return Err(Error::ConvergenceFailure { dim: h.dim() });
    }
    let vectors = UnitaryMatrix::new(eig.vectors, &tol)?;
    Ok((eig.values, vectors))
}

/// Eigenvalues below this fraction of the largest one are numerically
/// indistinguishable from zero and are floored before square-rooting.
/// Without the floor, spectral noise of order ε turns into √ε ≈ 1e-8 in the
/// root of a rank-deficient matrix.
const SQRT_NOISE_FLOOR_REL: f64 = 1e-12;

/// Principal square root of a PSD Hermitian matrix given spectrally.
///
/// Eigenvalues in `(-psd_tol, 0)` are clamped to zero before rooting;
/// anything more negative is rejected.
pub(crate) fn psd_root_raw(m: &CMat, psd_tol: f64) -> Result<CMat> {
    let eig = hermitian_eig_raw(hermitian_part(m))?;
    let floor = eig.values.last().copied().unwrap_or(0.0).max(0.0) * SQRT_NOISE_FLOOR_REL;
    let mut lam = Vec::with_capacity(eig.values.len());
    for &ev in &eig.values {
        if ev < -psd_tol {
            return Err(Error::NotPositive {
                min_eigenvalue: ev,
                tolerance: psd_tol,
            });
        }
        let ev = if ev <= floor { 0.0 } else { ev };
        lam.push(Complex64::new(ev.sqrt(), 0.0));
    }
    let lam = CVec::from_vec(lam);
    let root = &eig.vectors * CMat::from_diagonal(&lam) * eig.vectors.adjoint();
    Ok(hermitian_part(&root))
}

/// Inverse principal square root of a positive definite Hermitian matrix.
pub(crate) fn psd_inv_root_raw(m: &CMat, singular_tol: f64) -> Result<CMat> {
    let eig = hermitian_eig_raw(hermitian_part(m))?;
    let min_ev = eig.values.first().copied().unwrap_or(0.0);
    if min_ev <= singular_tol {
        return Err(Error::Singular {
            min_eigenvalue: min_ev,
        });
    }
    let lam = CVec::from_iterator(
        eig.values.len(),
        eig.values
            .iter()
            .map(|&ev| Complex64::new(1.0 / ev.sqrt(), 0.0)),
    );
    let root = &eig.vectors * CMat::from_diagonal(&lam) * eig.vectors.adjoint();
    Ok(hermitian_part(&root))
}

/// √ρ: Hermitian PSD with √ρ·√ρ = ρ within `tol_recon`.
pub fn psd_sqrt(rho: &DensityMatrix) -> Result<HermitianMatrix> {
    let root = psd_root_raw(rho.matrix(), Tolerances::DEFAULT.psd)?;
    Ok(HermitianMatrix::from_valid(root))
}

/// Von Neumann entropy S(ρ) = -Σ λ_k log₂ λ_k in bits, with 0·log 0 ≡ 0.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let eig = hermitian_eig_raw(rho.matrix().clone())?;
    Ok(entropy_bits(eig.values.iter().map(|&ev| ev.max(0.0))))
}

/// Shannon entropy H(p) = -Σ p_i log₂ p_i in bits, with 0·log 0 ≡ 0.
pub fn shannon_entropy(p: &ProbabilityVector) -> f64 {
    entropy_bits(p.as_slice().iter().copied())
}

pub(crate) fn entropy_bits(probs: impl Iterator<Item = f64>) -> f64 {
    let mut h = 0.0;
    for p in probs {
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h
}

/// One standard complex Gaussian: independent N(0,1) real and imaginary parts.
pub fn complex_gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// d×d matrix of independent standard complex Gaussians (Ginibre ensemble).
pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-distributed random unitary.
///
/// QR of a Ginibre matrix with the phases of the R diagonal folded into Q,
/// which makes the factorization unique and the law left and right invariant.
pub fn haar_unitary(d: usize, rng: &mut impl Rng) -> UnitaryMatrix {
    assert!(d >= 1, "dimension must be positive");
    let g = ginibre(d, d, rng);
    let (q, r) = g.qr().unpack();
    let phases = CVec::from_iterator(
        d,
        (0..d).map(|k| {
            let rkk = r[(k, k)];
            if rkk.norm() > 0.0 {
                rkk / rkk.norm()
            } else {
                Complex64::new(1.0, 0.0)
            }
        }),
    );
    let u = q * CMat::from_diagonal(&phases);
    UnitaryMatrix::new(u, &Tolerances::DEFAULT).expect("QR yields a unitary matrix")
}

/// Random density matrix ρ = GG†/Tr(GG†) with G a d×rank complex Gaussian.
pub fn random_density(d: usize, rank: usize, rng: &mut impl Rng) -> DensityMatrix {
    assert!(d >= 1 && rank >= 1 && rank <= d, "need 1 ≤ rank ≤ d");
    let g = ginibre(d, rank, rng);
    let m = &g * g.adjoint();
    DensityMatrix::normalized(m, &Tolerances::DEFAULT)
        .expect("Gaussian Gram matrix is a valid unnormalized state")
}

/// Random rank-1 density matrix from a normalized Gaussian vector.
pub fn random_pure(d: usize, rng: &mut impl Rng) -> DensityMatrix {
    assert!(d >= 1, "dimension must be positive");
    let psi = CVec::from_fn(d, |_, _| complex_gaussian(rng));
    DensityMatrix::from_pure(&psi).expect("Gaussian vector is nonzero")
}

/// Flat-simplex (Dirichlet(1,…,1)) random weights via normalized Exp(1) draws.
pub fn flat_simplex_weights(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    assert!(n >= 1);
    let mut w: Vec<f64> = (0..n)
        .map(|_| rng.sample::<f64, _>(Exp1).max(1e-300))
        .collect();
    let total: f64 = w.iter().sum();
    for x in w.iter_mut() {
        *x /= total;
    }
    w
}
