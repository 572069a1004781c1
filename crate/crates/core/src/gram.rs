//! Gram-matrix precomputation.
//!
//! `G = X Xᵀ` and `H = W G` are computed once; afterwards every loss and
//! gradient evaluation is independent of the number of calibration columns.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Symmetry tolerance (absolute) enforced when adopting an external `G`.
pub const GRAM_SYMMETRY_TOL: f64 = 1e-9;

/// Precomputed buffers `G = X Xᵀ` (`d_in x d_in`) and `H = W G`
/// (`d_out x d_in`). Immutable after construction and safe to share across
/// threads.
#[derive(Debug, Clone)]
pub struct GramCache {
    g: DenseMatrix,
    h: DenseMatrix,
}

impl GramCache {
    pub fn g(&self) -> &DenseMatrix {
        &self.g
    }

    pub fn h(&self) -> &DenseMatrix {
        &self.h
    }

    pub fn d_in(&self) -> usize {
        self.g.rows()
    }

    pub fn d_out(&self) -> usize {
        self.h.rows()
    }
}

/// Accumulates `G = X Xᵀ` over column batches of width `batch_cols`
/// (left-to-right, fixed accumulation order) and forms `H = W G`.
///
/// The result is independent of `batch_cols` up to accumulation order.
pub fn gram_precompute(x: &DenseMatrix, w: &DenseMatrix, batch_cols: usize) -> Result<GramCache> {
    if batch_cols == 0 {
        return Err(Error::InvalidArgument("batch_cols must be at least 1".to_string()));
    }
    let d_in = x.rows();
    if w.cols() != d_in {
        return Err(Error::Shape(format!(
            "weights have {} columns but activations have {} rows",
            w.cols(),
            d_in
        )));
    }
    let samples = x.cols();
    let mut g = DenseMatrix::zeros(d_in, d_in);
    let mut start = 0;
    while start < samples {
        let end = (start + batch_cols).min(samples);
        for i in 0..d_in {
            let xi = &x.row(i)[start..end];
            for j in 0..d_in {
                let xj = &x.row(j)[start..end];
                let dot: f64 = xi.iter().zip(xj).map(|(a, b)| a * b).sum();
                g.set(i, j, g.get(i, j) + dot);
            }
        }
        start = end;
    }
    let h = w.matmul(&g)?;
    Ok(GramCache { g, h })
}

/// Builds the cache from an externally supplied `G` (e.g. loaded from disk),
/// checking squareness and symmetry.
pub fn gram_from_matrix(g: DenseMatrix, w: &DenseMatrix) -> Result<GramCache> {
    if g.rows() != g.cols() {
        return Err(Error::Shape(format!(
            "gram matrix must be square, got {}x{}",
            g.rows(),
            g.cols()
        )));
    }
    if w.cols() != g.rows() {
        return Err(Error::Shape(format!(
            "weights have {} columns but gram matrix is {}x{}",
            w.cols(),
            g.rows(),
            g.cols()
        )));
    }
    for i in 0..g.rows() {
        for j in (i + 1)..g.cols() {
            if (g.get(i, j) - g.get(j, i)).abs() > GRAM_SYMMETRY_TOL {
                return Err(Error::Numerical(format!(
                    "gram matrix asymmetric at ({i},{j})"
                )));
            }
        }
    }
    let h = w.matmul(&g)?;
    Ok(GramCache { g, h })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_activation_gives_identity_gram() {
        let x = DenseMatrix::from_rows(&[&[1.0, 0.0], &[0.0, 1.0]]).unwrap();
        let w = DenseMatrix::from_rows(&[&[1.0, 2.0]]).unwrap();
        let cache = gram_precompute(&x, &w, 2).unwrap();
        assert_eq!(cache.g().as_slice(), &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(cache.h().as_slice(), &[1.0, 2.0]);
    }

    #[test]
    fn single_column_outer_product() {
        let x = DenseMatrix::from_rows(&[&[1.0], &[0.0]]).unwrap();
        let w = DenseMatrix::from_rows(&[&[1.0, 1.0]]).unwrap();
        let cache = gram_precompute(&x, &w, 1).unwrap();
        assert_eq!(cache.g().as_slice(), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn dimension_mismatch_is_shape_error() {
        let x = DenseMatrix::zeros(3, 4);
        let w = DenseMatrix::zeros(2, 2);
        assert!(matches!(
            gram_precompute(&x, &w, 1),
            Err(crate::error::Error::Shape(_))
        ));
    }

    #[test]
    fn external_gram_must_be_symmetric() {
        let g = DenseMatrix::from_rows(&[&[1.0, 0.5], &[0.0, 1.0]]).unwrap();
        let w = DenseMatrix::zeros(1, 2);
        assert!(gram_from_matrix(g, &w).is_err());
    }
}
