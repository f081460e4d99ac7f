use crate::error::Result;
use crate::metric::{dot, sub};
use crate::problem::{certificate_gap, CertificateAccumulator, CompositeObjective};

use super::balance::{balance_update, BalanceInputs};
use super::{Observer, SolveResult, SolverOptions, TraceRecord, Tracer};

/// Universal line-search-free gradient method with exact (sub)gradients.
///
/// Each step is a prox step `x₊ = argmin ⟨g, x⟩ + psi(x) + H/2‖x − xₖ‖²`,
/// followed by the balance update of `H` driven by the exact Bregman distance
/// `f(x₊) − f(xₖ) − ⟨g, x₊ − xₖ⟩`. The trace reports the best value seen and
/// the certificate gap; the returned point is the best iterate among `x₁..xₖ`.
pub fn run_ugm(
    obj: &CompositeObjective,
    opts: &SolverOptions,
    observer: &mut dyn Observer,
) -> Result<SolveResult> {
    let mut x = opts.validate(obj)?;
    let omega = opts.diameter * opts.diameter;
    let mut tracer = Tracer::new(opts, observer);
    let mut h = 0.0;
    let mut cert = CertificateAccumulator::new(obj.dim());

    if opts.max_iters == 0 {
        return Ok(SolveResult {
            x,
            trace: tracer.finish(),
            final_h: h,
            oracle_calls: 0,
        });
    }

    let (mut f_x, mut g) = obj.value_and_gradient(&x)?;
    let mut calls = 1u64;

    for k in 0..opts.max_iters {
        cert.add_linearization(&x, &g, f_x)?;
        let x_next = obj.prox(&g, &x, h)?;
        let (f_next, g_next) = obj.value_and_gradient(&x_next)?;
        calls += 1;

        let step = sub(&x_next, &x);
        let r = obj.metric().norm(&step)?;
        let beta = f_next - f_x - dot(&g, &step);
        h = balance_update(BalanceInputs {
            h,
            beta,
            rho: 0.5 * r * r,
            omega,
        });
        cert.offer(&x_next, f_next)?;

        x = x_next;
        f_x = f_next;
        g = g_next;

        if tracer.wants(k + 1) {
            let gap = certificate_gap(&cert, obj.domain(), obj.metric())?;
            tracer.push(TraceRecord {
                k: k + 1,
                f_value: cert.best_value(),
                h,
                r,
                beta,
                cert_gap: Some(gap.eps_star),
                grad_diff_norm: None,
                oracle_calls: calls,
                wall_time_s: tracer.elapsed(),
            });
        }
    }

    let best = cert.best_x().map(<[f64]>::to_vec).unwrap_or(x);
    Ok(SolveResult {
        x: best,
        trace: tracer.finish(),
        final_h: h,
        oracle_calls: calls,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::matrix::DenseMatrix;
    use crate::metric::MetricSpace;
    use crate::problem::{BallDomain, Linear};
    use crate::solvers::Silent;

    #[test]
    fn zero_iterations_returns_start() {
        let obj = CompositeObjective::new(
            Arc::new(Linear::new(vec![1.0, 1.0], 0.0)),
            BallDomain::centered(2, 1.0).unwrap(),
            MetricSpace::identity(2).unwrap(),
            "lin",
        )
        .unwrap();
        let res = run_ugm(&obj, &SolverOptions::for_problem(&obj, 0), &mut Silent).unwrap();
        assert_eq!(res.x, vec![0.0, 0.0]);
        assert!(res.trace.is_empty());
    }

    #[test]
    fn linear_objective_solved_in_one_step() {
        let obj = CompositeObjective::new(
            Arc::new(Linear::new(vec![3.0, -4.0], 1.0)),
            BallDomain::centered(2, 1.0).unwrap(),
            MetricSpace::identity(2).unwrap(),
            "lin",
        )
        .unwrap();
        let res = run_ugm(&obj, &SolverOptions::for_problem(&obj, 5), &mut Silent).unwrap();
        assert!((res.x[0] + 0.6).abs() < 1e-15 && (res.x[1] - 0.8).abs() < 1e-15);
        for rec in &res.trace {
            assert_eq!(rec.h, 0.0);
            assert!((rec.f_value - (1.0 - 5.0)).abs() < 1e-14);
            assert!(rec.cert_gap.unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_infeasible_start_and_bad_diameter() {
        let obj = CompositeObjective::least_squares(
            DenseMatrix::identity(2).unwrap(),
            vec![1.0, 0.0],
            BallDomain::centered(2, 1.0).unwrap(),
            MetricSpace::identity(2).unwrap(),
        )
        .unwrap();
        let mut opts = SolverOptions::for_problem(&obj, 10);
        opts.x0 = Some(vec![2.0, 0.0]);
        assert!(run_ugm(&obj, &opts, &mut Silent).is_err());
        let opts = SolverOptions::for_problem(&obj, 10).with_diameter(0.0);
        assert!(run_ugm(&obj, &opts, &mut Silent).is_err());
    }

    #[test]
    fn observer_sees_every_record() {
        let obj = CompositeObjective::least_squares(
            DenseMatrix::from_rows(&[vec![2.0, 0.5], vec![0.1, 1.0]]).unwrap(),
            vec![3.0, -1.0],
            BallDomain::centered(2, 1.0).unwrap(),
            MetricSpace::identity(2).unwrap(),
        )
        .unwrap();
        let mut seen = Vec::new();
        let mut obs = |r: &TraceRecord| seen.push(r.k);
        let res = run_ugm(&obj, &SolverOptions::for_problem(&obj, 25), &mut obs).unwrap();
        assert_eq!(seen, (1..=25).collect::<Vec<_>>());
        assert_eq!(res.trace.len(), 25);
        assert_eq!(res.oracle_calls, 26);
    }
}
