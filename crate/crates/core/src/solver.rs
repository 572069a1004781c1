//! The Frank-Wolfe mask-selection loop and its saliency-fixing extension.
//!
//! `fw_solve` runs plain conditional gradient from a binary warmstart and
//! returns the continuous iterate. `fw_solve_fixed` first freezes the
//! highest-saliency weights as unprunable, runs Frank-Wolfe over the
//! remaining coordinates with the reduced budget, thresholds, and merges the
//! frozen weights back in so the final mask carries exactly the full budget.

use crate::baselines::{magnitude_scores, ria_scores, saliency_mask, wanda_scores, SaliencyMatrix};
use crate::error::{Error, Result};
use crate::lmo::{lmo, LmoRequest};
use crate::mask::{top_entries_per_group, trim_to_budget_per_group, BinaryMask, MaskState};
use crate::matrix::DenseMatrix;
use crate::objective::ObjectiveContext;
use crate::pattern::SparsityPattern;

/// Warmstart mask source for the solver.
#[derive(Debug, Clone)]
pub enum Warmstart {
    Wanda,
    Ria,
    Magnitude,
    Custom(BinaryMask),
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Frank-Wolfe iteration count `T`.
    pub iterations: usize,
    /// Fraction of the budget fixed to the highest-saliency weights, in
    /// `[0, 1]`. Zero runs plain Frank-Wolfe; one returns the saliency mask.
    pub alpha: f64,
    pub pattern: SparsityPattern,
    pub warmstart: Warmstart,
    /// Record a trace entry every this many steps; 0 disables tracing.
    pub trace_every: usize,
    /// When set, the frozen weights sit at one inside the iterate the
    /// gradient is evaluated at. Off by default: the fixing construction
    /// treats frozen weights as pruned during the solve and only restores
    /// them on return.
    pub merge_fixed_into_iterate: bool,
}

impl SolverConfig {
    pub fn new(pattern: SparsityPattern) -> Self {
        Self {
            iterations: 2000,
            alpha: 0.0,
            pattern,
            warmstart: Warmstart::Wanda,
            trace_every: 10,
            merge_fixed_into_iterate: false,
        }
    }
}

/// One traced step of a solve.
#[derive(Debug, Clone, Copy)]
pub struct TraceRecord {
    pub step: usize,
    /// Loss of the continuous iterate (frozen weights counted as kept).
    pub loss_continuous: f64,
    /// Loss of the thresholded iterate at the same budget as the final
    /// threshold.
    pub loss_thresholded: f64,
    /// Primal gap certificate `⟨M_t - V_t, ∇L(M_t)⟩`.
    pub fw_gap: f64,
    /// Mean L1 distance between the continuous and thresholded mask.
    pub threshold_residual: f64,
}

/// Trace of a solve plus final losses (always populated, even when step
/// tracing is disabled).
#[derive(Debug, Clone, Default)]
pub struct SolveTrace {
    pub records: Vec<TraceRecord>,
    pub final_loss_continuous: f64,
    pub final_loss_thresholded: f64,
}

/// Step size schedule `η_t = 2 / (t + 2)`; always in `(0, 1]`.
pub fn step_size(t: usize) -> f64 {
    2.0 / (t as f64 + 2.0)
}

/// Rounds a continuous mask to a binary one by keeping the
/// `budget_per_group` largest entries of each pattern group, ties broken by
/// lowest flat index. The output saturates the requested budget exactly.
pub fn threshold_topk(mask: &MaskState, budget_per_group: usize) -> Result<BinaryMask> {
    let values = top_entries_per_group(mask.values(), mask.pattern(), budget_per_group, None);
    BinaryMask::new(values, mask.pattern().clone())
}

struct LoopSetup<'a> {
    ctx: &'a ObjectiveContext,
    pattern: SparsityPattern,
    frozen: Option<&'a BinaryMask>,
    merge_fixed: bool,
    iterations: usize,
    trace_every: usize,
    trace_budget: usize,
}

fn add_fixed(values: &DenseMatrix, fixed: Option<&BinaryMask>) -> DenseMatrix {
    match fixed {
        None => values.clone(),
        Some(f) => {
            let mut out = values.clone();
            for (o, &fv) in out.as_mut_slice().iter_mut().zip(f.values().as_slice()) {
                if fv == 1.0 {
                    *o = 1.0;
                }
            }
            out
        }
    }
}

fn check_iterate(values: &DenseMatrix, pattern: &SparsityPattern) -> Result<()> {
    MaskState::new(values.clone(), pattern.clone()).map(|_| ())
}

fn fw_loop(setup: &LoopSetup<'_>, m0: DenseMatrix) -> Result<(DenseMatrix, SolveTrace)> {
    let mut m = m0;
    let mut trace = SolveTrace::default();
    let traced = |t: usize| setup.trace_every > 0 && t % setup.trace_every == 0;

    let record = |t: usize,
                      m: &DenseMatrix,
                      grad: &DenseMatrix,
                      vertex: &BinaryMask,
                      trace: &mut SolveTrace|
     -> Result<()> {
        check_iterate(m, &setup.pattern)?;
        let thresholded =
            top_entries_per_group(m, &setup.pattern, setup.trace_budget, setup.frozen.map(|f| f.values()));
        let loss_continuous = setup.ctx.loss_values(&add_fixed(m, setup.frozen))?;
        let loss_thresholded = setup
            .ctx
            .loss_values(&add_fixed(&thresholded, setup.frozen))?;
        let mut gap = 0.0;
        let mut residual = 0.0;
        for ((&g, &mv), (&vv, &tv)) in grad
            .as_slice()
            .iter()
            .zip(m.as_slice())
            .zip(vertex.values().as_slice().iter().zip(thresholded.as_slice()))
        {
            gap += (mv - vv) * g;
            residual += (mv - tv).abs();
        }
        trace.records.push(TraceRecord {
            step: t,
            loss_continuous,
            loss_thresholded,
            fw_gap: gap,
            threshold_residual: residual / m.len() as f64,
        });
        Ok(())
    };

    for t in 0..setup.iterations {
        let grad_point = if setup.merge_fixed {
            add_fixed(&m, setup.frozen)
        } else {
            m.clone()
        };
        let grad = setup.ctx.gradient_values(&grad_point)?;
        let req = match setup.frozen {
            Some(f) => LmoRequest::with_frozen(&grad, f),
            None => LmoRequest::new(&grad),
        };
        let vertex = lmo(&req, &setup.pattern)?;
        if traced(t) {
            record(t, &m, &grad, &vertex, &mut trace)?;
        }
        let eta = step_size(t);
        for (mv, &vv) in m.as_mut_slice().iter_mut().zip(vertex.values().as_slice()) {
            *mv = (1.0 - eta) * *mv + eta * vv;
        }
    }

    if setup.trace_every > 0 {
        let grad_point = if setup.merge_fixed {
            add_fixed(&m, setup.frozen)
        } else {
            m.clone()
        };
        let grad = setup.ctx.gradient_values(&grad_point)?;
        let req = match setup.frozen {
            Some(f) => LmoRequest::with_frozen(&grad, f),
            None => LmoRequest::new(&grad),
        };
        let vertex = lmo(&req, &setup.pattern)?;
        record(setup.iterations, &m, &grad, &vertex, &mut trace)?;
    }

    trace.final_loss_continuous = setup.ctx.loss_values(&add_fixed(&m, setup.frozen))?;
    let thresholded =
        top_entries_per_group(&m, &setup.pattern, setup.trace_budget, setup.frozen.map(|f| f.values()));
    trace.final_loss_thresholded = setup
        .ctx
        .loss_values(&add_fixed(&thresholded, setup.frozen))?;
    Ok((m, trace))
}

/// Runs `cfg.iterations` steps of gradient → LMO → convex update starting at
/// the binary mask `m0`, and returns the final continuous iterate with its
/// trace. Every intermediate iterate stays feasible; `cfg.alpha` is ignored
/// (saliency fixing lives in [`fw_solve_fixed`]).
pub fn fw_solve(
    ctx: &ObjectiveContext,
    cfg: &SolverConfig,
    m0: &BinaryMask,
) -> Result<(MaskState, SolveTrace)> {
    cfg.pattern.validate_for(ctx.d_out(), ctx.d_in())?;
    // Feasibility of the start point under the solve pattern.
    let start = m0.values().clone();
    BinaryMask::new(start.clone(), cfg.pattern.clone())?;
    let setup = LoopSetup {
        ctx,
        pattern: cfg.pattern.clone(),
        frozen: None,
        merge_fixed: false,
        iterations: cfg.iterations,
        trace_every: cfg.trace_every,
        trace_budget: cfg.pattern.group_budget(),
    };
    let (values, trace) = fw_loop(&setup, start)?;
    Ok((MaskState::new(values, cfg.pattern.clone())?, trace))
}

fn warmstart_mask(
    ctx: &ObjectiveContext,
    cfg: &SolverConfig,
    fallback: &SaliencyMatrix,
) -> Result<BinaryMask> {
    match &cfg.warmstart {
        Warmstart::Wanda => saliency_mask(&wanda_scores(ctx.weights(), ctx.cache().g())?, &cfg.pattern),
        Warmstart::Ria => saliency_mask(&ria_scores(ctx.weights(), ctx.cache().g())?, &cfg.pattern),
        Warmstart::Magnitude => saliency_mask(&magnitude_scores(ctx.weights())?, &cfg.pattern),
        Warmstart::Custom(mask) => {
            if mask.values().shape() != ctx.weights().shape() {
                return Err(Error::Shape("custom warmstart shape mismatch".to_string()));
            }
            let _ = fallback;
            Ok(mask.clone())
        }
    }
}

/// Frank-Wolfe with saliency fixing: freezes the `⌊budget·α⌋` top-saliency
/// weights per pattern group, solves the remaining coordinates with the
/// reduced budget starting from the warmstart mask (frozen coordinates
/// zeroed, then trimmed to the reduced budget by saliency), thresholds, and
/// returns the union. The result carries exactly the pattern budget: the
/// reduced budget is `budget - ⌊budget·α⌋` rather than `⌊budget·(1-α)⌋`, so
/// no ones are lost to double flooring. `α = 0` degenerates to
/// `threshold(fw_solve(..))`; `α = 1` returns the pure saliency mask.
pub fn fw_solve_fixed(
    ctx: &ObjectiveContext,
    cfg: &SolverConfig,
    saliency: &SaliencyMatrix,
) -> Result<(BinaryMask, SolveTrace)> {
    if !(0.0..=1.0).contains(&cfg.alpha) {
        return Err(Error::InvalidArgument(format!(
            "alpha {} outside [0, 1]",
            cfg.alpha
        )));
    }
    let (rows, cols) = ctx.weights().shape();
    cfg.pattern.validate_for(rows, cols)?;
    if saliency.scores().shape() != (rows, cols) {
        return Err(Error::Shape("saliency shape mismatch".to_string()));
    }

    if cfg.pattern.budget(rows, cols) == 0 {
        return Ok((
            BinaryMask::zeros(rows, cols, cfg.pattern.clone())?,
            SolveTrace::default(),
        ));
    }

    let group_budget = cfg.pattern.group_budget();
    let keep = ((group_budget as f64) * cfg.alpha).floor() as usize;
    let new_budget = group_budget - keep;

    let fixed_values = top_entries_per_group(saliency.scores(), &cfg.pattern, keep, None);
    let fixed = BinaryMask::new(fixed_values, cfg.pattern.clone())?;

    if new_budget == 0 {
        let loss = ctx.loss_binary(&fixed)?;
        let trace = SolveTrace {
            records: Vec::new(),
            final_loss_continuous: loss,
            final_loss_thresholded: loss,
        };
        return Ok((fixed, trace));
    }

    let restricted = cfg.pattern.with_group_budget(new_budget);
    let warm = warmstart_mask(ctx, cfg, saliency)?;
    let mut start = warm.values().clone();
    for (s, &f) in start.as_mut_slice().iter_mut().zip(fixed.values().as_slice()) {
        if f == 1.0 {
            *s = 0.0;
        }
    }
    let start = trim_to_budget_per_group(&start, saliency.scores(), &restricted, new_budget);

    let setup = LoopSetup {
        ctx,
        pattern: restricted.clone(),
        frozen: Some(&fixed),
        merge_fixed: cfg.merge_fixed_into_iterate,
        iterations: cfg.iterations,
        trace_every: cfg.trace_every,
        trace_budget: new_budget,
    };
    let (final_values, trace) = fw_loop(&setup, start)?;

    let thresholded =
        top_entries_per_group(&final_values, &restricted, new_budget, Some(fixed.values()));
    let mut merged = thresholded;
    for (o, &f) in merged.as_mut_slice().iter_mut().zip(fixed.values().as_slice()) {
        if f == 1.0 {
            *o = 1.0;
        }
    }
    Ok((BinaryMask::new(merged, cfg.pattern.clone())?, trace))
}
