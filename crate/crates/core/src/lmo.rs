//! Linear minimization oracles over the relaxed mask polytopes.
//!
//! A vertex of the relaxed polytope is a binary mask within budget; the
//! minimizer of `⟨V, grad⟩` puts ones at the budgeted most negative gradient
//! entries. Entries are included only when strictly negative: coordinates at
//! exactly zero contribute nothing to the linear objective and are left out
//! even when budget remains. Ties are broken by lowest flat row-major index
//! so runs are reproducible. Selection is exact, not approximate.

use crate::error::{Error, Result};
use crate::mask::BinaryMask;
use crate::matrix::DenseMatrix;
use crate::pattern::SparsityPattern;

/// Oracle input: the gradient, plus an optional set of frozen coordinates
/// that are excluded from selection.
#[derive(Debug, Clone, Copy)]
pub struct LmoRequest<'a> {
    pub grad: &'a DenseMatrix,
    pub frozen: Option<&'a BinaryMask>,
}

impl<'a> LmoRequest<'a> {
    pub fn new(grad: &'a DenseMatrix) -> Self {
        Self { grad, frozen: None }
    }

    pub fn with_frozen(grad: &'a DenseMatrix, frozen: &'a BinaryMask) -> Self {
        Self {
            grad,
            frozen: Some(frozen),
        }
    }

    fn validate(&self) -> Result<()> {
        if let Some(frozen) = self.frozen {
            if frozen.values().shape() != self.grad.shape() {
                return Err(Error::Shape(
                    "frozen mask and gradient differ in shape".to_string(),
                ));
            }
        }
        Ok(())
    }

    #[inline]
    fn is_frozen(&self, flat: usize) -> bool {
        self.frozen
            .map_or(false, |f| f.values().as_slice()[flat] == 1.0)
    }
}

/// Fills `out` with ones at the up-to-`budget` most negative non-frozen
/// entries of `grad` within `range`, subject to strict negativity. Errors
/// when `budget` exceeds the non-frozen coordinate count and
/// `enforce_budget` is set.
fn select_block(
    req: &LmoRequest<'_>,
    range: std::ops::Range<usize>,
    budget: usize,
    enforce_budget: bool,
    scratch: &mut Vec<usize>,
    out: &mut [f64],
) -> Result<()> {
    let grad = req.grad.as_slice();
    scratch.clear();
    scratch.extend(range.filter(|&j| !req.is_frozen(j)));
    if enforce_budget && budget > scratch.len() {
        return Err(Error::Budget(format!(
            "budget {budget} exceeds {} selectable coordinates",
            scratch.len()
        )));
    }
    scratch.sort_by(|&a, &b| grad[a].total_cmp(&grad[b]).then(a.cmp(&b)));
    for &j in scratch.iter().take(budget) {
        if grad[j] < 0.0 {
            out[j] = 1.0;
        }
    }
    Ok(())
}

/// LMO for the unstructured polytope: up to `k` ones anywhere.
pub fn lmo_unstructured(req: &LmoRequest<'_>, k: usize) -> Result<BinaryMask> {
    req.validate()?;
    let (rows, cols) = req.grad.shape();
    let mut out = DenseMatrix::zeros(rows, cols);
    let mut scratch = Vec::new();
    select_block(req, 0..rows * cols, k, true, &mut scratch, out.as_mut_slice())?;
    BinaryMask::new(out, SparsityPattern::Unstructured { k })
}

/// LMO for per-row budgets: each row selects independently.
pub fn lmo_per_row(req: &LmoRequest<'_>, k_row: usize) -> Result<BinaryMask> {
    req.validate()?;
    let (rows, cols) = req.grad.shape();
    if k_row > cols {
        return Err(Error::Budget(format!(
            "per-row budget {k_row} exceeds {cols} columns"
        )));
    }
    let mut out = DenseMatrix::zeros(rows, cols);
    let mut scratch = Vec::new();
    for i in 0..rows {
        select_block(
            req,
            i * cols..(i + 1) * cols,
            k_row,
            true,
            &mut scratch,
            out.as_mut_slice(),
        )?;
    }
    BinaryMask::new(out, SparsityPattern::PerRow { k_row })
}

/// LMO for n:m sparsity: each consecutive block of `n` columns within a row
/// selects up to `m` entries independently.
pub fn lmo_nm(req: &LmoRequest<'_>, n: usize, m: usize) -> Result<BinaryMask> {
    req.validate()?;
    let (rows, cols) = req.grad.shape();
    let pattern = SparsityPattern::Nm { n, m };
    pattern.validate_for(rows, cols)?;
    let mut out = DenseMatrix::zeros(rows, cols);
    let mut scratch = Vec::new();
    for (range, budget) in pattern.groups(rows, cols) {
        select_block(req, range, budget, false, &mut scratch, out.as_mut_slice())?;
    }
    BinaryMask::new(out, pattern)
}

/// Dispatches to the oracle matching `pattern`.
pub fn lmo(req: &LmoRequest<'_>, pattern: &SparsityPattern) -> Result<BinaryMask> {
    match *pattern {
        SparsityPattern::Unstructured { k } => lmo_unstructured(req, k),
        SparsityPattern::PerRow { k_row } => lmo_per_row(req, k_row),
        SparsityPattern::Nm { n, m } => lmo_nm(req, n, m),
    }
}
