//! The per-layer pruning loss, its gradient in mask space, row Hessians,
//! spectral estimates and the Frank-Wolfe duality gap.

use crate::error::{Error, Result};
use crate::gram::GramCache;
use crate::mask::{BinaryMask, MaskState};
use crate::matrix::DenseMatrix;
use crate::synth::NormalSampler;

/// Read-only evaluation context: the weight matrix together with its Gram
/// cache. `loss` and `gradient` are pure and safe to call concurrently on a
/// shared context.
#[derive(Debug, Clone)]
pub struct ObjectiveContext {
    w: DenseMatrix,
    cache: GramCache,
}

impl ObjectiveContext {
    pub fn new(w: DenseMatrix, cache: GramCache) -> Result<Self> {
        if cache.d_out() != w.rows() || cache.d_in() != w.cols() {
            return Err(Error::Shape(format!(
                "cache is {}x{} but weights are {}x{}",
                cache.d_out(),
                cache.d_in(),
                w.rows(),
                w.cols()
            )));
        }
        Ok(Self { w, cache })
    }

    pub fn weights(&self) -> &DenseMatrix {
        &self.w
    }

    pub fn cache(&self) -> &GramCache {
        &self.cache
    }

    pub fn d_out(&self) -> usize {
        self.w.rows()
    }

    pub fn d_in(&self) -> usize {
        self.w.cols()
    }

    fn check_mask_shape(&self, values: &DenseMatrix) -> Result<()> {
        if values.shape() != self.w.shape() {
            return Err(Error::Shape(format!(
                "mask is {}x{} but weights are {}x{}",
                values.rows(),
                values.cols(),
                self.w.rows(),
                self.w.cols()
            )));
        }
        Ok(())
    }

    /// Pruning loss `Tr(D G Dᵀ)` with `D = W ⊙ (1 - M)`; equals
    /// `‖W X - (M ⊙ W) X‖_F²` and is nonnegative up to rounding.
    pub fn loss_values(&self, mask_values: &DenseMatrix) -> Result<f64> {
        self.check_mask_shape(mask_values)?;
        let g = self.cache.g();
        let d_in = self.d_in();
        let mut residual = vec![0.0; d_in];
        let mut total = 0.0;
        for i in 0..self.d_out() {
            let w_row = self.w.row(i);
            let m_row = mask_values.row(i);
            for ((r, &w), &m) in residual.iter_mut().zip(w_row).zip(m_row) {
                *r = w * (1.0 - m);
            }
            for (j, &rj) in residual.iter().enumerate() {
                if rj == 0.0 {
                    continue;
                }
                let g_row = g.row(j);
                let dot: f64 = g_row.iter().zip(&residual).map(|(a, b)| a * b).sum();
                total += rj * dot;
            }
        }
        Ok(total)
    }

    pub fn loss(&self, mask: &MaskState) -> Result<f64> {
        self.loss_values(mask.values())
    }

    pub fn loss_binary(&self, mask: &BinaryMask) -> Result<f64> {
        self.loss_values(mask.values())
    }

    /// Gradient of the loss in mask space:
    /// `-2 · W ⊙ (H - (W ⊙ M) G)`. Cost is independent of the calibration
    /// column count.
    pub fn gradient_values(&self, mask_values: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_mask_shape(mask_values)?;
        let masked = self.w.hadamard(mask_values)?;
        let propagated = masked.matmul(self.cache.g())?;
        let mut out = DenseMatrix::zeros(self.w.rows(), self.w.cols());
        let w = self.w.as_slice();
        let h = self.cache.h().as_slice();
        let p = propagated.as_slice();
        for (((o, &w), &h), &p) in out.as_mut_slice().iter_mut().zip(w).zip(h).zip(p) {
            *o = -2.0 * w * (h - p);
        }
        Ok(out)
    }

    pub fn gradient(&self, mask: &MaskState) -> Result<DenseMatrix> {
        self.gradient_values(mask.values())
    }
}

/// Direct loss evaluation `‖W X - (M ⊙ W) X‖_F²` from raw activations; the
/// cross-check path for the Gram-based loss.
pub fn direct_loss(w: &DenseMatrix, x: &DenseMatrix, mask_values: &DenseMatrix) -> Result<f64> {
    if mask_values.shape() != w.shape() {
        return Err(Error::Shape("mask and weights differ in shape".to_string()));
    }
    if x.rows() != w.cols() {
        return Err(Error::Shape("activations and weights differ in d_in".to_string()));
    }
    let mut residual = DenseMatrix::zeros(w.rows(), w.cols());
    for ((r, &wv), &mv) in residual
        .as_mut_slice()
        .iter_mut()
        .zip(w.as_slice())
        .zip(mask_values.as_slice())
    {
        *r = wv * (1.0 - mv);
    }
    Ok(residual.matmul(x)?.frobenius_norm_sq())
}

/// Row Hessian `Q = Diag(w) G Diag(w)`; symmetric positive semidefinite
/// whenever `G` is.
pub fn row_hessian(w_row: &[f64], g: &DenseMatrix) -> Result<DenseMatrix> {
    let d = w_row.len();
    if g.rows() != d || g.cols() != d {
        return Err(Error::Shape(format!(
            "row has {d} entries but gram matrix is {}x{}",
            g.rows(),
            g.cols()
        )));
    }
    let mut q = DenseMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            q.set(i, j, w_row[i] * g.get(i, j) * w_row[j]);
        }
    }
    Ok(q)
}

/// Largest-eigenvalue estimate for a symmetric matrix by power iteration
/// with a fixed seeded start vector. Returns 0 for the zero matrix.
pub fn lambda_max(q: &DenseMatrix, iters: usize, tol: f64) -> Result<f64> {
    let d = q.rows();
    if q.cols() != d {
        return Err(Error::Shape(format!(
            "matrix must be square, got {}x{}",
            q.rows(),
            q.cols()
        )));
    }
    if d == 0 {
        return Ok(0.0);
    }
    let mut sampler = NormalSampler::new(0x706f_7765);
    let mut v: Vec<f64> = (0..d).map(|_| sampler.sample()).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut v {
        *x /= norm;
    }
    let mut estimate = 0.0;
    let mut next = vec![0.0; d];
    for _ in 0..iters {
        for (i, slot) in next.iter_mut().enumerate() {
            *slot = q.row(i).iter().zip(&v).map(|(a, b)| a * b).sum();
        }
        let rayleigh: f64 = next.iter().zip(&v).map(|(a, b)| a * b).sum();
        let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(0.0);
        }
        for (x, n) in v.iter_mut().zip(&next) {
            *x = n / norm;
        }
        if (rayleigh - estimate).abs() <= tol * rayleigh.abs().max(1e-300) {
            return Ok(rayleigh);
        }
        estimate = rayleigh;
    }
    Ok(estimate)
}

/// Frank-Wolfe primal gap certificate `⟨M - V, ∇L(M)⟩`; nonnegative when `V`
/// solves the linear minimization for `grad`.
pub fn fw_gap(grad: &DenseMatrix, mask: &MaskState, vertex: &BinaryMask) -> Result<f64> {
    if grad.shape() != mask.values().shape() || grad.shape() != vertex.values().shape() {
        return Err(Error::Shape("gap operands differ in shape".to_string()));
    }
    let mut gap = 0.0;
    for ((&g, &m), &v) in grad
        .as_slice()
        .iter()
        .zip(mask.values().as_slice())
        .zip(vertex.values().as_slice())
    {
        gap += (m - v) * g;
    }
    Ok(gap)
}
