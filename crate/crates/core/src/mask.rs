//! Continuous and binary mask types plus top-k selection over pattern groups.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::pattern::SparsityPattern;

/// Entry tolerance for continuous masks after convex updates.
pub const STATE_ENTRY_TOL: f64 = 1e-12;
/// Budget tolerance for continuous masks, in the L1 sense.
pub const STATE_BUDGET_TOL: f64 = 1e-9;

/// A continuous Frank-Wolfe iterate: entries in `[0, 1]`, group sums within
/// the pattern budget in the L1 sense.
#[derive(Debug, Clone)]
pub struct MaskState {
    values: DenseMatrix,
    pattern: SparsityPattern,
}

impl MaskState {
    pub fn new(values: DenseMatrix, pattern: SparsityPattern) -> Result<Self> {
        pattern.validate_for(values.rows(), values.cols())?;
        for &v in values.as_slice() {
            if !v.is_finite() || v < -STATE_ENTRY_TOL || v > 1.0 + STATE_ENTRY_TOL {
                return Err(Error::Numerical(format!(
                    "mask entry {v} outside [0, 1] tolerance"
                )));
            }
        }
        for (range, budget) in pattern.groups(values.rows(), values.cols()) {
            let sum: f64 = values.as_slice()[range].iter().sum();
            if sum > budget as f64 + STATE_BUDGET_TOL {
                return Err(Error::Budget(format!(
                    "group mass {sum} exceeds budget {budget}"
                )));
            }
        }
        Ok(Self { values, pattern })
    }

    pub fn values(&self) -> &DenseMatrix {
        &self.values
    }

    pub fn pattern(&self) -> &SparsityPattern {
        &self.pattern
    }

    pub fn l1_mass(&self) -> f64 {
        self.values.as_slice().iter().sum()
    }
}

/// A finalized binary mask: entries exactly 0.0 or 1.0, group sums within the
/// pattern budget with no tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMask {
    values: DenseMatrix,
    pattern: SparsityPattern,
}

impl BinaryMask {
    pub fn new(values: DenseMatrix, pattern: SparsityPattern) -> Result<Self> {
        pattern.validate_for(values.rows(), values.cols())?;
        for &v in values.as_slice() {
            if v != 0.0 && v != 1.0 {
                return Err(Error::Numerical(format!("mask entry {v} is not binary")));
            }
        }
        for (range, budget) in pattern.groups(values.rows(), values.cols()) {
            let ones = values.as_slice()[range].iter().filter(|&&v| v == 1.0).count();
            if ones > budget {
                return Err(Error::Budget(format!(
                    "group has {ones} ones, budget is {budget}"
                )));
            }
        }
        Ok(Self { values, pattern })
    }

    pub fn zeros(rows: usize, cols: usize, pattern: SparsityPattern) -> Result<Self> {
        Self::new(DenseMatrix::zeros(rows, cols), pattern)
    }

    pub fn values(&self) -> &DenseMatrix {
        &self.values
    }

    pub fn pattern(&self) -> &SparsityPattern {
        &self.pattern
    }

    pub fn ones(&self) -> usize {
        self.values.as_slice().iter().filter(|&&v| v == 1.0).count()
    }

    /// True when the mask saturates its pattern: the full budget for
    /// unstructured and per-row masks, at most `m` per block for n:m.
    pub fn satisfies_pattern_exactly(&self) -> bool {
        let (rows, cols) = self.values.shape();
        match *self.pattern() {
            SparsityPattern::Unstructured { k } => self.ones() == k.min(rows * cols),
            SparsityPattern::PerRow { k_row } => (0..rows).all(|i| {
                self.values.row(i).iter().filter(|&&v| v == 1.0).count() == k_row
            }),
            SparsityPattern::Nm { .. } => self
                .pattern
                .groups(rows, cols)
                .into_iter()
                .all(|(range, budget)| {
                    self.values.as_slice()[range]
                        .iter()
                        .filter(|&&v| v == 1.0)
                        .count()
                        <= budget
                }),
        }
    }

    pub fn to_state(&self) -> MaskState {
        MaskState {
            values: self.values.clone(),
            pattern: self.pattern.clone(),
        }
    }
}

/// Binary values with ones at the `budget_per_group` largest entries of each
/// pattern group, ties broken by lowest flat index. Coordinates where
/// `frozen` is one are excluded from selection.
pub(crate) fn top_entries_per_group(
    values: &DenseMatrix,
    pattern: &SparsityPattern,
    budget_per_group: usize,
    frozen: Option<&DenseMatrix>,
) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(values.rows(), values.cols());
    let vals = values.as_slice();
    let mut idx: Vec<usize> = Vec::new();
    for (range, _) in pattern.groups(values.rows(), values.cols()) {
        idx.clear();
        idx.extend(range.filter(|&j| frozen.map_or(true, |f| f.as_slice()[j] != 1.0)));
        let take = budget_per_group.min(idx.len());
        idx.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));
        for &j in idx.iter().take(take) {
            out.as_mut_slice()[j] = 1.0;
        }
    }
    out
}

/// Restricts a binary mask to at most `budget_per_group` ones per group,
/// keeping the entries with the highest `ranking` values (ties broken by
/// lowest flat index).
pub(crate) fn trim_to_budget_per_group(
    mask_values: &DenseMatrix,
    ranking: &DenseMatrix,
    pattern: &SparsityPattern,
    budget_per_group: usize,
) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(mask_values.rows(), mask_values.cols());
    let rank = ranking.as_slice();
    for (range, _) in pattern.groups(mask_values.rows(), mask_values.cols()) {
        let mut idx: Vec<usize> = range
            .filter(|&j| mask_values.as_slice()[j] == 1.0)
            .collect();
        idx.sort_by(|&a, &b| rank[b].total_cmp(&rank[a]).then(a.cmp(&b)));
        for &j in idx.iter().take(budget_per_group) {
            out.as_mut_slice()[j] = 1.0;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unstructured(k: usize) -> SparsityPattern {
        SparsityPattern::Unstructured { k }
    }

    #[test]
    fn state_accepts_tiny_overshoot() {
        let values = DenseMatrix::new(1, 2, vec![1.0 + 5e-13, -5e-13]).unwrap();
        assert!(MaskState::new(values, unstructured(2)).is_ok());
    }

    #[test]
    fn state_rejects_out_of_range() {
        let values = DenseMatrix::new(1, 2, vec![1.1, 0.0]).unwrap();
        assert!(MaskState::new(values, unstructured(2)).is_err());
    }

    #[test]
    fn state_rejects_budget_overflow() {
        let values = DenseMatrix::new(1, 3, vec![0.9, 0.9, 0.9]).unwrap();
        assert!(matches!(
            MaskState::new(values, unstructured(2)),
            Err(Error::Budget(_))
        ));
    }

    #[test]
    fn binary_rejects_fractional_entries() {
        let values = DenseMatrix::new(1, 2, vec![0.5, 1.0]).unwrap();
        assert!(BinaryMask::new(values, unstructured(2)).is_err());
    }

    #[test]
    fn binary_rejects_budget_overflow() {
        let values = DenseMatrix::new(1, 3, vec![1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            BinaryMask::new(values, unstructured(2)),
            Err(Error::Budget(_))
        ));
    }

    #[test]
    fn exactness_per_family() {
        let values = DenseMatrix::new(2, 2, vec![1.0, 0.0, 1.0, 0.0]).unwrap();
        let m = BinaryMask::new(values.clone(), unstructured(2)).unwrap();
        assert!(m.satisfies_pattern_exactly());
        let m = BinaryMask::new(values.clone(), SparsityPattern::PerRow { k_row: 1 }).unwrap();
        assert!(m.satisfies_pattern_exactly());
        let m = BinaryMask::new(values, SparsityPattern::Nm { n: 2, m: 1 }).unwrap();
        assert!(m.satisfies_pattern_exactly());
        let under = BinaryMask::zeros(2, 2, SparsityPattern::PerRow { k_row: 1 }).unwrap();
        assert!(!under.satisfies_pattern_exactly());
    }

    #[test]
    fn top_entries_break_ties_by_flat_index() {
        let values = DenseMatrix::new(1, 4, vec![0.5, 0.5, 0.5, 0.5]).unwrap();
        let out = top_entries_per_group(&values, &unstructured(2), 2, None);
        assert_eq!(out.as_slice(), &[1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn top_entries_respect_frozen() {
        let values = DenseMatrix::new(1, 4, vec![0.9, 0.8, 0.1, 0.2]).unwrap();
        let frozen = DenseMatrix::new(1, 4, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let out = top_entries_per_group(&values, &unstructured(2), 2, Some(&frozen));
        assert_eq!(out.as_slice(), &[0.0, 1.0, 0.0, 1.0]);
    }
}
