//! Brute-force combinatorial solvers and numerical verification of the
//! rounding-error bound for thresholded Frank-Wolfe iterates.

use crate::error::{Error, Result};
use crate::gram::gram_from_matrix;
use crate::mask::{BinaryMask, MaskState};
use crate::matrix::DenseMatrix;
use crate::objective::{lambda_max, row_hessian, ObjectiveContext};
use crate::pattern::SparsityPattern;
use crate::solver::{fw_solve, threshold_topk, SolverConfig, Warmstart};

/// Enumeration is limited to this many candidate coordinates.
pub const ENUMERATION_LIMIT: usize = 24;

/// Quantities of the thresholding-error bound for one row instance.
///
/// `bound_value = epsilon + 2·lambda_max·(min(k,r) + sqrt(2·r·min(k,r)))`
/// with `r = d_in - k`; `satisfied` records whether
/// `f_hat - f_int <= bound_value` within tolerance.
#[derive(Debug, Clone)]
pub struct BoundReport {
    /// Optimization error of the relaxed solve, estimated against a 100x
    /// longer reference run.
    pub epsilon: f64,
    pub lambda_max: f64,
    pub k: usize,
    /// `d_in - k`.
    pub r: usize,
    /// Mass of the continuous iterate outside its top-k set.
    pub tau: f64,
    pub bound_value: f64,
    /// Loss of the thresholded mask.
    pub f_hat: f64,
    /// Brute-force integral optimum.
    pub f_int: f64,
    pub satisfied: bool,
    /// L1 mass of the iterate before the deficit redistribution.
    pub raw_mass: f64,
}

/// Visits all `C(n, k)` index combinations in lexicographic order.
fn for_each_combination(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        visit(&combo);
        // Advance to the next combination.
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if combo[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        combo[i] += 1;
        for j in i + 1..k {
            combo[j] = combo[j - 1] + 1;
        }
    }
}

/// True when the mask with 1s at `keep_a` is lexicographically smaller than
/// the mask with 1s at `keep_b` (both sorted ascending).
fn mask_lex_less(keep_a: &[usize], keep_b: &[usize], d: usize) -> bool {
    let mut ia = 0;
    let mut ib = 0;
    for j in 0..d {
        let a = ia < keep_a.len() && keep_a[ia] == j;
        let b = ib < keep_b.len() && keep_b[ib] == j;
        if a != b {
            return !a;
        }
        if a {
            ia += 1;
        }
        if b {
            ib += 1;
        }
    }
    false
}

fn keep_set_to_mask(keep: &[usize], d: usize) -> DenseMatrix {
    let mut values = DenseMatrix::zeros(1, d);
    for &j in keep {
        values.as_mut_slice()[j] = 1.0;
    }
    values
}

/// Exact minimizer of the row loss `(1-m)ᵀ Q (1-m)` over all masks with
/// exactly `k` ones, by enumeration of all `C(d_in, k)` candidates. Ties go
/// to the lexicographically smallest mask.
pub fn brute_force_row(w_row: &[f64], g: &DenseMatrix, k: usize) -> Result<(BinaryMask, f64)> {
    let d = w_row.len();
    if d > ENUMERATION_LIMIT {
        return Err(Error::Capacity(format!(
            "row length {d} exceeds enumeration limit {ENUMERATION_LIMIT}"
        )));
    }
    if k > d {
        return Err(Error::Budget(format!("budget {k} exceeds row length {d}")));
    }
    let q = row_hessian(w_row, g)?;
    let mut best_loss = f64::INFINITY;
    let mut best_keep: Vec<usize> = Vec::new();
    let mut pruned: Vec<usize> = Vec::with_capacity(d - k);
    for_each_combination(d, k, |keep| {
        pruned.clear();
        let mut it = keep.iter().copied().peekable();
        for j in 0..d {
            if it.peek() == Some(&j) {
                it.next();
            } else {
                pruned.push(j);
            }
        }
        let mut loss = 0.0;
        for &a in &pruned {
            for &b in &pruned {
                loss += q.get(a, b);
            }
        }
        if loss < best_loss
            || (loss == best_loss && mask_lex_less(keep, &best_keep, d))
        {
            best_loss = loss;
            best_keep = keep.to_vec();
        }
    });
    let mask = BinaryMask::new(
        keep_set_to_mask(&best_keep, d),
        SparsityPattern::Unstructured { k },
    )?;
    Ok((mask, best_loss))
}

/// Exact minimizer over all masks with exactly `k` ones anywhere in the
/// matrix, the coupled non-separable problem. Enumeration over
/// `C(d_out·d_in, k)` flattened candidates.
pub fn brute_force_unstructured(
    w: &DenseMatrix,
    g: &DenseMatrix,
    k: usize,
) -> Result<(BinaryMask, f64)> {
    let (rows, cols) = w.shape();
    let total = rows * cols;
    if total > ENUMERATION_LIMIT {
        return Err(Error::Capacity(format!(
            "{total} coordinates exceed enumeration limit {ENUMERATION_LIMIT}"
        )));
    }
    if k > total {
        return Err(Error::Budget(format!("budget {k} exceeds {total} coordinates")));
    }
    let hessians: Vec<DenseMatrix> = (0..rows)
        .map(|i| row_hessian(w.row(i), g))
        .collect::<Result<_>>()?;
    let mut best_loss = f64::INFINITY;
    let mut best_keep: Vec<usize> = Vec::new();
    let mut kept = vec![false; total];
    for_each_combination(total, k, |keep| {
        kept.iter_mut().for_each(|v| *v = false);
        for &j in keep {
            kept[j] = true;
        }
        let mut loss = 0.0;
        for (i, q) in hessians.iter().enumerate() {
            let base = i * cols;
            for a in 0..cols {
                if kept[base + a] {
                    continue;
                }
                for b in 0..cols {
                    if !kept[base + b] {
                        loss += q.get(a, b);
                    }
                }
            }
        }
        if loss < best_loss
            || (loss == best_loss && mask_lex_less(keep, &best_keep, total))
        {
            best_loss = loss;
            best_keep = keep.to_vec();
        }
    });
    let mut values = DenseMatrix::zeros(rows, cols);
    for &j in &best_keep {
        values.as_mut_slice()[j] = 1.0;
    }
    let mask = BinaryMask::new(values, SparsityPattern::Unstructured { k })?;
    Ok((mask, best_loss))
}

/// Indices of the `k` largest entries, ties broken by lowest index.
fn top_k_set(values: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

/// Raises the iterate's L1 mass to exactly `k` by distributing the deficit
/// uniformly over the top-k coordinates that sit below one. Feasible and
/// top-k-set preserving; the top-k coordinates always have enough headroom
/// to absorb the deficit.
fn redistribute_mass(values: &mut [f64], k: usize) {
    loop {
        let mass: f64 = values.iter().sum();
        let deficit = k as f64 - mass;
        if deficit <= 1e-12 {
            return;
        }
        let top = top_k_set(values, k);
        let open: Vec<usize> = top.into_iter().filter(|&j| values[j] < 1.0).collect();
        if open.is_empty() {
            return;
        }
        let headroom = open
            .iter()
            .map(|&j| 1.0 - values[j])
            .fold(f64::INFINITY, f64::min);
        let add = (deficit / open.len() as f64).min(headroom);
        for &j in &open {
            values[j] = (values[j] + add).min(1.0);
        }
        if add <= 0.0 {
            return;
        }
    }
}

/// Runs a row-wise Frank-Wolfe solve for `iterations` steps, lifts the
/// iterate onto the simplex face `Σ m = k`, thresholds it, brute-forces the
/// integral optimum, and fills in every quantity of the rounding-error
/// bound. The optimization error is estimated against a reference run 100x
/// longer.
pub fn verify_lemma_bound(
    w_row: &[f64],
    g: &DenseMatrix,
    k: usize,
    iterations: usize,
) -> Result<BoundReport> {
    let d = w_row.len();
    if d > ENUMERATION_LIMIT {
        return Err(Error::Capacity(format!(
            "row length {d} exceeds enumeration limit {ENUMERATION_LIMIT}"
        )));
    }
    if k > d {
        return Err(Error::Budget(format!("budget {k} exceeds row length {d}")));
    }
    let r = d - k;
    let w = DenseMatrix::new(1, d, w_row.to_vec())?;
    let cache = gram_from_matrix(g.clone(), &w)?;
    let ctx = ObjectiveContext::new(w, cache)?;
    let pattern = SparsityPattern::Unstructured { k };

    let scores = crate::baselines::wanda_scores(ctx.weights(), ctx.cache().g())?;
    let warm = crate::baselines::saliency_mask(&scores, &pattern)?;

    let mut cfg = SolverConfig::new(pattern.clone());
    cfg.iterations = iterations;
    cfg.warmstart = Warmstart::Custom(warm.clone());
    cfg.trace_every = 0;
    let (state, _) = fw_solve(&ctx, &cfg, &warm)?;

    let mut ref_cfg = cfg.clone();
    ref_cfg.iterations = iterations.saturating_mul(100).max(1);
    let (reference, _) = fw_solve(&ctx, &ref_cfg, &warm)?;

    let raw_mass = state.l1_mass();
    let mut lifted = state.values().clone();
    redistribute_mass(lifted.as_mut_slice(), k);
    let lifted_state = MaskState::new(lifted, pattern.clone())?;

    // The reference loss stands in for the relaxed optimum; lifting it onto
    // the simplex face can only help in degenerate cases, so take the better
    // of the two.
    let mut ref_lifted = reference.values().clone();
    redistribute_mass(ref_lifted.as_mut_slice(), k);
    let ref_loss = ctx
        .loss(&reference)?
        .min(ctx.loss_values(&ref_lifted)?);
    let epsilon = ctx.loss(&lifted_state)? - ref_loss;

    let top = top_k_set(lifted_state.values().as_slice(), k);
    let mut tau: f64 = lifted_state.values().as_slice().iter().sum();
    for &j in &top {
        tau -= lifted_state.values().as_slice()[j];
    }

    let m_hat = threshold_topk(&lifted_state, k)?;
    let f_hat = ctx.loss_binary(&m_hat)?;

    let q = row_hessian(w_row, g)?;
    let lam = lambda_max(&q, 10_000, 1e-12)?;

    let min_kr = k.min(r) as f64;
    let bound_value = epsilon + 2.0 * lam * (min_kr + (2.0 * r as f64 * min_kr).sqrt());

    let (_, f_int) = brute_force_row(w_row, g, k)?;
    let scale = 1.0f64.max(f_hat.abs()).max(bound_value.abs());
    let satisfied = f_hat - f_int <= bound_value + 1e-9 * scale;

    Ok(BoundReport {
        epsilon,
        lambda_max: lam,
        k,
        r,
        tau,
        bound_value,
        f_hat,
        f_int,
        satisfied,
        raw_mass,
    })
}
