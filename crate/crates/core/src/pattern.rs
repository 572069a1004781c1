//! Sparsity constraint families and their textual spec form.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Target constraint family for a mask over a `d_out x d_in` matrix.
///
/// `Unstructured` caps the total number of nonzeros, `PerRow` caps every row
/// independently, and `Nm` caps every consecutive block of `n` columns within
/// a row at `m` nonzeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SparsityPattern {
    Unstructured { k: usize },
    PerRow { k_row: usize },
    Nm { n: usize, m: usize },
}

impl SparsityPattern {
    /// Checks the pattern against concrete matrix dimensions.
    pub fn validate_for(&self, rows: usize, cols: usize) -> Result<()> {
        match *self {
            SparsityPattern::Unstructured { k } => {
                if k > rows * cols {
                    return Err(Error::Pattern(format!(
                        "budget {k} exceeds {rows}x{cols} entries"
                    )));
                }
            }
            SparsityPattern::PerRow { k_row } => {
                if k_row > cols {
                    return Err(Error::Pattern(format!(
                        "per-row budget {k_row} exceeds {cols} columns"
                    )));
                }
            }
            SparsityPattern::Nm { n, m } => {
                if m == 0 || n == 0 || m > n {
                    return Err(Error::Pattern(format!(
                        "n:m pattern requires 0 < m <= n, got n={n}, m={m}"
                    )));
                }
                if cols % n != 0 {
                    return Err(Error::Pattern(format!(
                        "{cols} columns not divisible by block size {n}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Total number of nonzeros the pattern allows on a `rows x cols` matrix.
    pub fn budget(&self, rows: usize, cols: usize) -> usize {
        match *self {
            SparsityPattern::Unstructured { k } => k.min(rows * cols),
            SparsityPattern::PerRow { k_row } => rows * k_row,
            SparsityPattern::Nm { n, m } => rows * (cols / n) * m,
        }
    }

    /// Nonzero budget of a single constraint group (whole matrix, one row, or
    /// one block).
    pub fn group_budget(&self) -> usize {
        match *self {
            SparsityPattern::Unstructured { k } => k,
            SparsityPattern::PerRow { k_row } => k_row,
            SparsityPattern::Nm { m, .. } => m,
        }
    }

    /// Constraint groups as contiguous flat index ranges with their budgets.
    pub fn groups(&self, rows: usize, cols: usize) -> Vec<(Range<usize>, usize)> {
        match *self {
            SparsityPattern::Unstructured { k } => vec![(0..rows * cols, k)],
            SparsityPattern::PerRow { k_row } => (0..rows)
                .map(|i| (i * cols..(i + 1) * cols, k_row))
                .collect(),
            SparsityPattern::Nm { n, m } => {
                let blocks = cols / n;
                let mut out = Vec::with_capacity(rows * blocks);
                for i in 0..rows {
                    for b in 0..blocks {
                        let start = i * cols + b * n;
                        out.push((start..start + n, m));
                    }
                }
                out
            }
        }
    }

    /// Returns the same family with each group budget replaced by
    /// `group_budget`.
    pub fn with_group_budget(&self, group_budget: usize) -> SparsityPattern {
        match *self {
            SparsityPattern::Unstructured { .. } => SparsityPattern::Unstructured { k: group_budget },
            SparsityPattern::PerRow { .. } => SparsityPattern::PerRow { k_row: group_budget },
            SparsityPattern::Nm { n, .. } => SparsityPattern::Nm { n, m: group_budget },
        }
    }
}

/// Parsed form of a pattern spec string, before matrix dimensions are known.
///
/// Accepted forms: `u:K` (unstructured nonzero count), `u%:P` (unstructured,
/// keep `floor(P% of total)` nonzeros), `row:K` (per-row count), and `M:N`
/// (at most M nonzeros per block of N, e.g. `2:4`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternSpec {
    Count(usize),
    Percent(u32),
    RowCount(usize),
    Nm { n: usize, m: usize },
}

impl PatternSpec {
    /// Resolves the spec against concrete matrix dimensions.
    pub fn resolve(&self, rows: usize, cols: usize) -> Result<SparsityPattern> {
        let pattern = match *self {
            PatternSpec::Count(k) => SparsityPattern::Unstructured { k },
            PatternSpec::Percent(p) => SparsityPattern::Unstructured {
                k: rows * cols * p as usize / 100,
            },
            PatternSpec::RowCount(k_row) => SparsityPattern::PerRow { k_row },
            PatternSpec::Nm { n, m } => SparsityPattern::Nm { n, m },
        };
        pattern.validate_for(rows, cols)?;
        Ok(pattern)
    }
}

impl FromStr for PatternSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse_count = |v: &str, what: &str| -> Result<usize> {
            v.parse::<usize>()
                .map_err(|_| Error::Pattern(format!("invalid {what} in pattern spec {s:?}")))
        };
        if let Some(v) = s.strip_prefix("u%:") {
            let p = parse_count(v, "percentage")? as u32;
            if p > 100 {
                return Err(Error::Pattern(format!("percentage {p} exceeds 100")));
            }
            return Ok(PatternSpec::Percent(p));
        }
        if let Some(v) = s.strip_prefix("u:") {
            return Ok(PatternSpec::Count(parse_count(v, "count")?));
        }
        if let Some(v) = s.strip_prefix("row:") {
            return Ok(PatternSpec::RowCount(parse_count(v, "count")?));
        }
        if let Some((m_str, n_str)) = s.split_once(':') {
            let m = parse_count(m_str, "nonzero count")?;
            let n = parse_count(n_str, "block size")?;
            if m == 0 || n == 0 || m > n {
                return Err(Error::Pattern(format!(
                    "n:m spec requires 0 < M <= N, got {s:?}"
                )));
            }
            return Ok(PatternSpec::Nm { n, m });
        }
        Err(Error::Pattern(format!("unrecognized pattern spec {s:?}")))
    }
}

impl fmt::Display for PatternSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PatternSpec::Count(k) => write!(f, "u:{k}"),
            PatternSpec::Percent(p) => write!(f, "u%:{p}"),
            PatternSpec::RowCount(k) => write!(f, "row:{k}"),
            PatternSpec::Nm { n, m } => write!(f, "{m}:{n}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_round_trips_to_canonical_form() {
        for s in ["u:12", "u%:60", "row:3", "2:4", "1:2"] {
            let spec: PatternSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
    }

    #[test]
    fn nm_spec_orders_m_before_n() {
        let spec: PatternSpec = "2:4".parse().unwrap();
        assert_eq!(spec, PatternSpec::Nm { n: 4, m: 2 });
        let p = spec.resolve(3, 8).unwrap();
        assert_eq!(p, SparsityPattern::Nm { n: 4, m: 2 });
        assert_eq!(p.budget(3, 8), 12);
    }

    #[test]
    fn percent_budget_rounds_down() {
        let spec: PatternSpec = "u%:60".parse().unwrap();
        let p = spec.resolve(3, 3).unwrap();
        assert_eq!(p, SparsityPattern::Unstructured { k: 5 });
    }

    #[test]
    fn bad_specs_are_rejected() {
        for s in ["", "x:1", "u:", "u%:101", "3:2", "0:4", "2:0", "row:x"] {
            assert!(s.parse::<PatternSpec>().is_err(), "{s:?} should fail");
        }
    }

    #[test]
    fn nm_requires_divisible_columns() {
        let p = SparsityPattern::Nm { n: 4, m: 2 };
        assert!(p.validate_for(2, 8).is_ok());
        assert!(matches!(p.validate_for(2, 10), Err(Error::Pattern(_))));
    }

    #[test]
    fn budgets_per_family() {
        assert_eq!(SparsityPattern::Unstructured { k: 7 }.budget(2, 3), 6);
        assert_eq!(SparsityPattern::PerRow { k_row: 2 }.budget(4, 6), 8);
        assert_eq!(SparsityPattern::Nm { n: 4, m: 2 }.budget(2, 8), 8);
    }

    #[test]
    fn groups_cover_matrix() {
        let p = SparsityPattern::Nm { n: 2, m: 1 };
        let groups = p.groups(2, 4);
        assert_eq!(groups.len(), 4);
        let total: usize = groups.iter().map(|(r, _)| r.len()).sum();
        assert_eq!(total, 8);
    }
}
