//! Deterministic synthetic layer generation.
//!
//! The generator is pinned so fixtures are reproducible across platforms and
//! reimplementations: a ChaCha8 stream keyed via `seed_from_u64(seed)`,
//! uniform doubles taken from the top 53 bits of each `next_u64`, and
//! standard normals via the Box-Muller transform (both outputs of each pair
//! are consumed). The weight matrix is filled first in row-major order, then
//! the activation matrix.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Standard normal sampler over a seeded ChaCha8 stream.
pub struct NormalSampler {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl NormalSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform in (0, 1]; never zero so the Box-Muller log is safe.
    fn uniform_open(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [0, 1).
    fn uniform_half_open(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn sample(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let radius = (-2.0 * self.uniform_open().ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * self.uniform_half_open();
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }

    fn fill(&mut self, rows: usize, cols: usize) -> DenseMatrix {
        let data = (0..rows * cols).map(|_| self.sample()).collect();
        DenseMatrix::new(rows, cols, data).expect("sized by construction")
    }
}

/// Generates a weight matrix `W` (`d_out x d_in`) and activation matrix `X`
/// (`d_in x samples`) with i.i.d. standard normal entries. The first
/// `outlier_cols` rows of `X` are scaled by `outlier_scale`, modelling input
/// features with outsized activation norms. The same seed yields bitwise
/// identical matrices.
pub fn generate_synthetic_layer(
    d_out: usize,
    d_in: usize,
    samples: usize,
    seed: u64,
    outlier_cols: usize,
    outlier_scale: f64,
) -> Result<(DenseMatrix, DenseMatrix)> {
    if d_out == 0 || d_in == 0 || samples == 0 {
        return Err(Error::InvalidArgument(
            "layer dimensions must be at least 1".to_string(),
        ));
    }
    if outlier_cols > d_in {
        return Err(Error::InvalidArgument(format!(
            "outlier_cols {outlier_cols} exceeds d_in {d_in}"
        )));
    }
    if !outlier_scale.is_finite() {
        return Err(Error::InvalidArgument("outlier_scale must be finite".to_string()));
    }
    let mut sampler = NormalSampler::new(seed);
    let weights = sampler.fill(d_out, d_in);
    let mut acts = sampler.fill(d_in, samples);
    for i in 0..outlier_cols {
        for v in acts.row_mut(i) {
            *v *= outlier_scale;
        }
    }
    Ok((weights, acts))
}
