//! Dense complex matrices and the JSON encoding used library-wide.
//!
//! A complex scalar is encoded as a two-element array `[re, im]`; a matrix as
//! a row-major array of rows, e.g. `identity(2) = [[[1,0],[0,0]],[[0,0],[1,0]]]`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Max-abs (entrywise sup) norm.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max-abs norm of `a - b`. Panics on shape mismatch.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Max-abs norm of `m - m†`.
pub fn hermitian_deviation(m: &CMat) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Max-abs norm of `m - I`.
pub fn identity_deviation(m: &CMat) -> f64 {
    let id = CMat::identity(m.nrows(), m.ncols());
    max_abs_diff(m, &id)
}

/// Σ |m_ij|² = Tr(m† m). Equals Tr(m²) when m is Hermitian.
pub fn frobenius_norm_sq(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Real part of the trace.
pub fn trace_re(m: &CMat) -> f64 {
    m.trace().re
}

/// Tr(a·b) for Hermitian `a`, `b`, evaluated as Σ_ij a_ij·conj(b_ij).
/// The result is real for Hermitian inputs; the imaginary part is dropped.
pub fn herm_product_trace(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in herm_product_trace");
    a.iter().zip(b.iter()).map(|(x, y)| (x * y.conj()).re).sum()
}

/// (m + m†)/2.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn is_square(m: &CMat) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub fn ensure_finite(m: &CMat) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Row-major nested representation backing the JSON encoding.
pub type MatrixRows = Vec<Vec<[f64; 2]>>;

pub fn to_rows(m: &CMat) -> MatrixRows {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

pub fn from_rows(rows: &MatrixRows) -> Result<CMat> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::Parse("matrix has no rows".into()));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Parse(format!(
                "row {i} has {} entries, expected {n} (square matrix required)",
                row.len()
            )));
        }
    }
    let m = CMat::from_fn(n, n, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1]));
    ensure_finite(&m)?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_roundtrip_identity() {
        let m = CMat::identity(2, 2);
        let rows = to_rows(&m);
        assert_eq!(
            rows,
            vec![vec![[1.0, 0.0], [0.0, 0.0]], vec![[0.0, 0.0], [1.0, 0.0]],]
        );
        let back = from_rows(&rows).unwrap();
        assert_eq!(max_abs_diff(&m, &back), 0.0);
    }

    #[test]
    fn ragged_rows_rejected() {
        let rows = vec![vec![[1.0, 0.0]], vec![[0.0, 0.0], [1.0, 0.0]]];
        assert!(from_rows(&rows).is_err());
    }

    #[test]
    fn non_finite_rejected() {
        let rows = vec![
            vec![[f64::NAN, 0.0], [0.0, 0.0]],
            vec![[0.0, 0.0], [1.0, 0.0]],
        ];
        assert!(matches!(from_rows(&rows), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn herm_product_trace_matches_direct_product() {
        let a = CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.5, 0.0),
                Complex64::new(0.1, 0.2),
                Complex64::new(0.1, -0.2),
                Complex64::new(0.5, 0.0),
            ],
        );
        let b = CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.25, 0.0),
                Complex64::new(-0.3, 0.05),
                Complex64::new(-0.3, -0.05),
                Complex64::new(0.75, 0.0),
            ],
        );
        let direct = (&a * &b).trace().re;
        assert!((herm_product_trace(&a, &b) - direct).abs() < 1e-14);
    }
}
