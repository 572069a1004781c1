//! Greedy mask-selection baselines: magnitude, Wanda, RIA, and single-weight
//! SparseGPT with optimal reconstruction of the surviving weights.

use crate::error::{Error, Result};
use crate::mask::{top_entries_per_group, BinaryMask};
use crate::matrix::DenseMatrix;
use crate::pattern::SparsityPattern;

/// Nonnegative per-weight importance scores.
#[derive(Debug, Clone)]
pub struct SaliencyMatrix {
    scores: DenseMatrix,
}

impl SaliencyMatrix {
    pub fn new(scores: DenseMatrix) -> Result<Self> {
        scores.ensure_finite("saliency scores")?;
        if scores.as_slice().iter().any(|&v| v < 0.0) {
            return Err(Error::Numerical("negative saliency score".to_string()));
        }
        Ok(Self { scores })
    }

    pub fn scores(&self) -> &DenseMatrix {
        &self.scores
    }
}

fn column_norms(w: &DenseMatrix, g: &DenseMatrix) -> Result<Vec<f64>> {
    if g.rows() != g.cols() || g.rows() != w.cols() {
        return Err(Error::Shape(format!(
            "gram matrix {}x{} does not match {} weight columns",
            g.rows(),
            g.cols(),
            w.cols()
        )));
    }
    (0..w.cols())
        .map(|j| {
            let gjj = g.get(j, j);
            if gjj < -1e-12 {
                return Err(Error::Numerical(format!(
                    "gram diagonal entry {gjj} at column {j} is negative"
                )));
            }
            Ok(gjj.max(0.0).sqrt())
        })
        .collect()
}

/// Wanda saliency `S_ij = |W_ij| * ‖X_j‖₂`, where the activation norm comes
/// from the Gram diagonal: `‖X_j‖₂² = G_jj`.
pub fn wanda_scores(w: &DenseMatrix, g: &DenseMatrix) -> Result<SaliencyMatrix> {
    let norms = column_norms(w, g)?;
    let mut scores = DenseMatrix::zeros(w.rows(), w.cols());
    for i in 0..w.rows() {
        for (j, &norm) in norms.iter().enumerate() {
            scores.set(i, j, w.get(i, j).abs() * norm);
        }
    }
    SaliencyMatrix::new(scores)
}

/// RIA saliency: Wanda rescaled by the reciprocal row and column absolute
/// sums of `W`. A zero row or column contributes a zero reciprocal term.
pub fn ria_scores(w: &DenseMatrix, g: &DenseMatrix) -> Result<SaliencyMatrix> {
    let norms = column_norms(w, g)?;
    let row_sums: Vec<f64> = (0..w.rows())
        .map(|i| w.row(i).iter().map(|v| v.abs()).sum())
        .collect();
    let col_sums: Vec<f64> = (0..w.cols())
        .map(|j| (0..w.rows()).map(|i| w.get(i, j).abs()).sum())
        .collect();
    let mut scores = DenseMatrix::zeros(w.rows(), w.cols());
    for i in 0..w.rows() {
        let row_term = if row_sums[i] > 0.0 { 1.0 / row_sums[i] } else { 0.0 };
        for j in 0..w.cols() {
            let col_term = if col_sums[j] > 0.0 { 1.0 / col_sums[j] } else { 0.0 };
            scores.set(i, j, w.get(i, j).abs() * (row_term + col_term) * norms[j]);
        }
    }
    SaliencyMatrix::new(scores)
}

/// Plain magnitude saliency `S_ij = |W_ij|`.
pub fn magnitude_scores(w: &DenseMatrix) -> Result<SaliencyMatrix> {
    let data = w.as_slice().iter().map(|v| v.abs()).collect();
    SaliencyMatrix::new(DenseMatrix::new(w.rows(), w.cols(), data)?)
}

/// Keeps the top-budget saliency entries per pattern group, pruning the rest.
/// Ties are broken by lowest flat index.
pub fn saliency_mask(s: &SaliencyMatrix, pattern: &SparsityPattern) -> Result<BinaryMask> {
    let (rows, cols) = s.scores.shape();
    pattern.validate_for(rows, cols)?;
    let values = top_entries_per_group(&s.scores, pattern, pattern.group_budget(), None);
    BinaryMask::new(values, pattern.clone())
}

/// Iterative greedy single-weight pruning without weight updates: repeatedly
/// removes the weight minimizing `w_q² G_qq` until `k` remain. The scores do
/// not change after a removal, so the result equals the Wanda top-k mask on
/// the same row.
pub fn greedy_single_weight_mask(w_row: &[f64], g: &DenseMatrix, k: usize) -> Result<BinaryMask> {
    let d = w_row.len();
    if g.rows() != d || g.cols() != d {
        return Err(Error::Shape("gram matrix does not match row length".to_string()));
    }
    if k > d {
        return Err(Error::Budget(format!("budget {k} exceeds row length {d}")));
    }
    let scores: Vec<f64> = (0..d).map(|q| w_row[q] * w_row[q] * g.get(q, q)).collect();
    let mut alive = vec![true; d];
    for _ in 0..d - k {
        let mut best: Option<usize> = None;
        for q in 0..d {
            if !alive[q] {
                continue;
            }
            // Ties remove the highest index first, so the kept set matches
            // the lowest-index-wins convention of `saliency_mask`.
            let better = match best {
                None => true,
                Some(b) => scores[q] < scores[b] || (scores[q] == scores[b] && q > b),
            };
            if better {
                best = Some(q);
            }
        }
        alive[best.expect("at least one coordinate alive")] = false;
    }
    let values: Vec<f64> = alive.iter().map(|&a| if a { 1.0 } else { 0.0 }).collect();
    BinaryMask::new(
        DenseMatrix::new(1, d, values)?,
        SparsityPattern::PerRow { k_row: k },
    )
}

/// Gauss-Jordan inverse with partial pivoting.
fn invert(a: &DenseMatrix) -> Result<DenseMatrix> {
    let d = a.rows();
    let mut work = a.clone();
    let mut inv = DenseMatrix::zeros(d, d);
    for i in 0..d {
        inv.set(i, i, 1.0);
    }
    let scale = a
        .as_slice()
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1.0);
    for col in 0..d {
        let mut pivot = col;
        for r in col + 1..d {
            if work.get(r, col).abs() > work.get(pivot, col).abs() {
                pivot = r;
            }
        }
        if work.get(pivot, col).abs() <= 1e-13 * scale {
            return Err(Error::Numerical("singular system".to_string()));
        }
        if pivot != col {
            for j in 0..d {
                let tmp = work.get(col, j);
                work.set(col, j, work.get(pivot, j));
                work.set(pivot, j, tmp);
                let tmp = inv.get(col, j);
                inv.set(col, j, inv.get(pivot, j));
                inv.set(pivot, j, tmp);
            }
        }
        let p = work.get(col, col);
        for j in 0..d {
            work.set(col, j, work.get(col, j) / p);
            inv.set(col, j, inv.get(col, j) / p);
        }
        for r in 0..d {
            if r == col {
                continue;
            }
            let factor = work.get(r, col);
            if factor == 0.0 {
                continue;
            }
            for j in 0..d {
                work.set(r, j, work.get(r, j) - factor * work.get(col, j));
                inv.set(r, j, inv.get(r, j) - factor * inv.get(col, j));
            }
        }
    }
    Ok(inv)
}

/// Default damping for the SparseGPT Hessian: `0.01 * mean(diag(G))`.
pub fn default_damping(g: &DenseMatrix) -> f64 {
    let d = g.rows();
    if d == 0 {
        return 0.0;
    }
    let trace: f64 = (0..d).map(|i| g.get(i, i)).sum();
    0.01 * trace / d as f64
}

/// Single-weight SparseGPT on one row: repeatedly selects the weight
/// minimizing `w_q² / [H⁻¹]_qq` over the surviving coordinates (with
/// `H = G + damping·I`), applies the optimal reconstruction update
/// `w ← w - (w_q / [H⁻¹]_qq) H⁻¹ e_q`, and zeroes the pruned coordinate.
/// The inverse restricted to the surviving coordinates is recomputed each
/// step. Returns the mask and the reconstructed surviving weights.
pub fn sparsegpt_greedy_row(
    w_row: &[f64],
    g: &DenseMatrix,
    k: usize,
    damping: f64,
) -> Result<(BinaryMask, Vec<f64>)> {
    let d = w_row.len();
    if g.rows() != d || g.cols() != d {
        return Err(Error::Shape("gram matrix does not match row length".to_string()));
    }
    if k > d {
        return Err(Error::Budget(format!("budget {k} exceeds row length {d}")));
    }
    let mut h = g.clone();
    for i in 0..d {
        h.set(i, i, h.get(i, i) + damping);
    }
    let mut weights = w_row.to_vec();
    let mut alive = vec![true; d];
    for _ in 0..d - k {
        let active: Vec<usize> = (0..d).filter(|&q| alive[q]).collect();
        let n = active.len();
        let mut sub = DenseMatrix::zeros(n, n);
        for (p, &gi) in active.iter().enumerate() {
            for (q, &gj) in active.iter().enumerate() {
                sub.set(p, q, h.get(gi, gj));
            }
        }
        let hinv = invert(&sub)?;
        let mut best_local = 0;
        let mut best_score = f64::INFINITY;
        for p in 0..n {
            let diag = hinv.get(p, p);
            if !diag.is_finite() || diag <= 0.0 {
                return Err(Error::Numerical(
                    "inverse Hessian diagonal not positive".to_string(),
                ));
            }
            let wq = weights[active[p]];
            let score = wq * wq / diag;
            if score < best_score {
                best_score = score;
                best_local = p;
            }
        }
        let q_global = active[best_local];
        let coef = weights[q_global] / hinv.get(best_local, best_local);
        for (p, &gi) in active.iter().enumerate() {
            weights[gi] -= coef * hinv.get(p, best_local);
        }
        weights[q_global] = 0.0;
        alive[q_global] = false;
    }
    let values: Vec<f64> = alive.iter().map(|&a| if a { 1.0 } else { 0.0 }).collect();
    let mask = BinaryMask::new(
        DenseMatrix::new(1, d, values)?,
        SparsityPattern::PerRow { k_row: k },
    )?;
    Ok((mask, weights))
}
