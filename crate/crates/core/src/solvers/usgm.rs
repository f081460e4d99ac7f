use crate::error::Result;
use crate::metric::{dot, sub};
use crate::oracle::{Oracle, OracleConfig};
use crate::problem::CompositeObjective;

use super::balance::{balance_update, BalanceInputs};
use super::{
    Observer, ReportPoint, RunningAverage, SolveResult, SolverOptions, TraceRecord, Tracer,
};

/// Universal stochastic gradient method.
///
/// Same prox iteration as UGM but on stochastic gradients, with the Bregman
/// distance replaced by the symmetrized surrogate `⟨gₖ₊₁ − gₖ, xₖ₊₁ − xₖ⟩`.
/// `gₖ₊₁` is drawn only after `xₖ₊₁` is fixed. Returns `x̄ₖ = (1/k) Σᵢ₌₁ᵏ xᵢ`.
pub fn run_usgm(
    obj: &CompositeObjective,
    oracle: OracleConfig,
    opts: &SolverOptions,
    observer: &mut dyn Observer,
) -> Result<SolveResult> {
    let mut x = opts.validate(obj)?;
    let mut oracle = Oracle::new(oracle, obj)?;
    let omega = opts.diameter * opts.diameter;
    let metric = obj.metric();
    let mut tracer = Tracer::new(opts, observer);
    let mut h = 0.0;
    let mut avg = RunningAverage::new(obj.dim());

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
        let beta = dot(&g_diff, &step);
        h = balance_update(BalanceInputs {
            h,
            beta,
            rho: 0.5 * r * r,
            omega,
        });
        avg.add(&x_next);

        x = x_next;
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
                grad_diff_norm: Some(metric.dual_norm(&g_diff)?),
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
