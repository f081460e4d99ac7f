//! Non-universal baselines: projected (sub)gradient descent and AdaGrad-norm.

use crate::error::{Error, Result};
use crate::metric::{dot, sub};
use crate::oracle::{Oracle, OracleConfig};
use crate::problem::{project_ball, CompositeObjective};

use super::{
    Observer, ReportPoint, RunningAverage, SolveResult, SolverOptions, TraceRecord, Tracer,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// `c(k) = c`.
    Constant(f64),
    /// `c(k) = c / √(k + 1)` for `k = 0, 1, ...`.
    Decaying(f64),
}

impl StepRule {
    fn base(&self) -> f64 {
        match *self {
            StepRule::Constant(c) | StepRule::Decaying(c) => c,
        }
    }

    fn at(&self, k: usize) -> f64 {
        match *self {
            StepRule::Constant(c) => c,
            StepRule::Decaying(c) => c / ((k + 1) as f64).sqrt(),
        }
    }
}

/// `xₖ₊₁ = proj(xₖ − c(k)·B⁻¹gₖ)`. Returns the average iterate; the trace's `h`
/// column holds `1/c(k)`.
pub fn run_projected_subgrad(
    obj: &CompositeObjective,
    oracle: OracleConfig,
    step: StepRule,
    opts: &SolverOptions,
    observer: &mut dyn Observer,
) -> Result<SolveResult> {
    let c = step.base();
    if !(c.is_finite() && c >= 0.0) {
        return Err(Error::usage(format!("step size must be >= 0, got {c}")));
    }
    let mut x = opts.validate(obj)?;
    let mut oracle = Oracle::new(oracle, obj)?;
    let metric = obj.metric();
    let mut tracer = Tracer::new(opts, observer);
    let mut avg = RunningAverage::new(obj.dim());

    for k in 0..opts.max_iters {
        let g = oracle.sample(obj, &x)?.g;
        let ck = step.at(k);
        let target: Vec<f64> = x
            .iter()
            .zip(&g)
            .zip(metric.b_diag())
            .map(|((xi, gi), b)| xi - ck * gi / b)
            .collect();
        let x_next = project_ball(&target, obj.domain(), metric)?;
        let r = metric.distance(&x_next, &x)?;
        avg.add(&x_next);
        x = x_next;

        if tracer.wants(k + 1) {
            let f_value = match opts.report {
                ReportPoint::Average => obj.value(&avg.mean().expect("k >= 1"))?,
                ReportPoint::Last => obj.value(&x)?,
            };
            tracer.push(TraceRecord {
                k: k + 1,
                f_value,
                h: 1.0 / ck,
                r,
                beta: 0.0,
                cert_gap: None,
                grad_diff_norm: None,
                oracle_calls: oracle.calls(),
                wall_time_s: tracer.elapsed(),
            });
        }
    }

    Ok(SolveResult {
        x: avg.mean().unwrap_or(x),
        trace: tracer.finish(),
        final_h: 1.0 / step.at(opts.max_iters.saturating_sub(1)),
        oracle_calls: oracle.calls(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdagradVariant {
    /// `γᵢ = ‖gᵢ − gᵢ₋₁‖*`.
    #[default]
    GradDiff,
    /// Classical `γᵢ = ‖gᵢ‖*`.
    GradNorm,
}

/// Same prox iteration as USGM with `H′ₖ = (1/D)·√(Σᵢ₌₁ᵏ γᵢ²)` in place of
/// the balance-equation coefficient. Returns the average iterate.
pub fn run_adagrad_norm(
    obj: &CompositeObjective,
    oracle: OracleConfig,
    variant: AdagradVariant,
    opts: &SolverOptions,
    observer: &mut dyn Observer,
) -> Result<SolveResult> {
    let mut x = opts.validate(obj)?;
    let mut oracle = Oracle::new(oracle, obj)?;
    let metric = obj.metric();
    let d = opts.diameter;
    let mut tracer = Tracer::new(opts, observer);
    let mut avg = RunningAverage::new(obj.dim());
    let mut sum_sq = 0.0;
    let mut h = 0.0;

    if opts.max_iters == 0 {
        return Ok(SolveResult {
            x,
            trace: tracer.finish(),
            final_h: h,
            oracle_calls: 0,
        });
    }

    let mut g = oracle.sample(obj, &x)?.g;

    for k in 0..opts.max_iters {
        let x_next = obj.prox(&g, &x, h)?;
        let g_next = oracle.sample(obj, &x_next)?.g;

        let step = sub(&x_next, &x);
        let r = metric.norm(&step)?;
        let g_diff = sub(&g_next, &g);
        let diff_norm = metric.dual_norm(&g_diff)?;
        let gamma = match variant {
            AdagradVariant::GradDiff => diff_norm,
            AdagradVariant::GradNorm => metric.dual_norm(&g_next)?,
        };
        sum_sq += gamma * gamma;
        h = sum_sq.sqrt() / d;
        avg.add(&x_next);

        x = x_next;
        let beta = dot(&g_diff, &step);
        g = g_next;

        if tracer.wants(k + 1) {
            let f_value = match opts.report {
                ReportPoint::Average => obj.value(&avg.mean().expect("k >= 1"))?,
                ReportPoint::Last => obj.value(&x)?,
            };
            tracer.push(TraceRecord {
                k: k + 1,
                f_value,
                h,
                r,
                beta,
                cert_gap: None,
                grad_diff_norm: Some(diff_norm),
                oracle_calls: oracle.calls(),
                wall_time_s: tracer.elapsed(),
            });
        }
    }

    Ok(SolveResult {
        x: avg.mean().expect("at least one iteration"),
        trace: tracer.finish(),
        final_h: h,
        oracle_calls: oracle.calls(),
    })
}
