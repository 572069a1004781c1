//! Shared test oracles, independent of the implementation paths they check.

#![allow(dead_code)]

use maskopt::gram::{gram_precompute, GramCache};
use maskopt::matrix::DenseMatrix;
use maskopt::objective::ObjectiveContext;
use maskopt::pattern::SparsityPattern;
use maskopt::synth::generate_synthetic_layer;

/// Largest eigenvalue of a symmetric matrix by the cyclic Jacobi rotation
/// method; the dense reference for power-iteration estimates.
pub fn jacobi_lambda_max(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    assert_eq!(n, a.cols(), "jacobi oracle needs a square matrix");
    let mut m = a.clone();
    for _ in 0..200 {
        let mut off = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    off += m.get(p, q) * m.get(p, q);
                }
            }
        }
        if off < 1e-26 {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m.get(q, q) - m.get(p, p)) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let aip = m.get(i, p);
                    let aiq = m.get(i, q);
                    m.set(i, p, c * aip - s * aiq);
                    m.set(i, q, s * aip + c * aiq);
                }
                for j in 0..n {
                    let apj = m.get(p, j);
                    let aqj = m.get(q, j);
                    m.set(p, j, c * apj - s * aqj);
                    m.set(q, j, s * apj + c * aqj);
                }
            }
        }
    }
    (0..n).map(|i| m.get(i, i)).fold(f64::NEG_INFINITY, f64::max)
}

/// Central finite differences of the loss in mask space.
pub fn finite_difference_gradient(
    ctx: &ObjectiveContext,
    mask_values: &DenseMatrix,
    step: f64,
) -> DenseMatrix {
    let mut grad = DenseMatrix::zeros(mask_values.rows(), mask_values.cols());
    let mut probe = mask_values.clone();
    for i in 0..mask_values.rows() {
        for j in 0..mask_values.cols() {
            let orig = probe.get(i, j);
            probe.set(i, j, orig + step);
            let up = ctx.loss_values(&probe).unwrap();
            probe.set(i, j, orig - step);
            let down = ctx.loss_values(&probe).unwrap();
            probe.set(i, j, orig);
            grad.set(i, j, (up - down) / (2.0 * step));
        }
    }
    grad
}

/// Visits every binary matrix of the given shape that is feasible for the
/// pattern (a vertex of the relaxed polytope). Panics above 20 coordinates.
pub fn for_each_vertex(
    rows: usize,
    cols: usize,
    pattern: &SparsityPattern,
    mut visit: impl FnMut(&DenseMatrix),
) {
    let total = rows * cols;
    assert!(total <= 20, "vertex enumeration limited to 20 coordinates");
    let groups = pattern.groups(rows, cols);
    let mut values = DenseMatrix::zeros(rows, cols);
    'outer: for bits in 0u32..(1u32 << total) {
        for (range, budget) in &groups {
            let ones = range.clone().filter(|&j| bits >> j & 1 == 1).count();
            if ones > *budget {
                continue 'outer;
            }
        }
        for j in 0..total {
            values.as_mut_slice()[j] = f64::from(bits >> j & 1);
        }
        visit(&values);
    }
}

pub fn inner_product(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x * y).sum()
}

/// Random layer plus its Gram cache.
pub fn make_context(
    seed: u64,
    d_out: usize,
    d_in: usize,
    samples: usize,
) -> (ObjectiveContext, DenseMatrix) {
    let (w, x) = generate_synthetic_layer(d_out, d_in, samples, seed, 0, 1.0).unwrap();
    let cache: GramCache = gram_precompute(&x, &w, samples).unwrap();
    (ObjectiveContext::new(w, cache).unwrap(), x)
}

pub fn rel_err(actual: f64, reference: f64) -> f64 {
    (actual - reference).abs() / reference.abs().max(1e-300)
}

/// Row instance with correlated activation features: the second half of the
/// activation rows are noisy copies of the first half, so the Gram matrix
/// carries strong off-diagonal structure and mask interactions matter.
pub fn correlated_row_instance(
    seed: u64,
    d_in: usize,
    samples: usize,
    noise: f64,
) -> (DenseMatrix, DenseMatrix) {
    let mut s = maskopt::synth::NormalSampler::new(seed);
    let mut w = DenseMatrix::zeros(1, d_in);
    for v in w.as_mut_slice() {
        *v = s.sample();
    }
    let mut x = DenseMatrix::zeros(d_in, samples);
    for i in 0..d_in / 2 {
        for t in 0..samples {
            x.set(i, t, s.sample());
        }
    }
    for i in d_in / 2..d_in {
        for t in 0..samples {
            let parent = x.get(i - d_in / 2, t);
            x.set(i, t, parent + noise * s.sample());
        }
    }
    (w, x)
}
