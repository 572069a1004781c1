//! Layerwise pruning mask selection.
//!
//! Selecting which weights of a linear layer survive pruning, so that the
//! layer's output on a calibration batch changes as little as possible, is a
//! hard combinatorial problem. This crate solves its convex relaxation with
//! the Frank-Wolfe algorithm and rounds the result back to a binary mask,
//! alongside the greedy baselines (magnitude, Wanda, RIA, single-weight
//! SparseGPT) and brute-force enumeration oracles that verify the rounding
//! error bound at small scale.
//!
//! The `maskopt` binary wraps the library: `gen` writes synthetic layers,
//! `prune` runs the solver end to end, `bench` sweeps solver settings
//! against the baselines, and `oracle` checks the bound on random instances.

pub mod baselines;
pub mod cli;
pub mod error;
pub mod gram;
pub mod io;
pub mod lmo;
pub mod mask;
pub mod matrix;
pub mod objective;
pub mod oracle;
pub mod pattern;
pub mod solver;
pub mod synth;

pub use error::{Error, Result};
pub use gram::{gram_from_matrix, gram_precompute, GramCache};
pub use mask::{BinaryMask, MaskState};
pub use matrix::DenseMatrix;
pub use objective::ObjectiveContext;
pub use pattern::{PatternSpec, SparsityPattern};
pub use solver::{SolveTrace, SolverConfig, Warmstart};
