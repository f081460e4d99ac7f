use crate::error::{Error, Result};
use crate::metric::{combine_into, dot, sub};
use crate::oracle::{Oracle, OracleConfig};
use crate::problem::CompositeObjective;

use super::balance::{balance_update, BalanceInputs};
use super::{Observer, SolveResult, SolverOptions, TraceRecord, Tracer};

/// How the accelerated method estimates the Bregman distance between `yₖ` and `xₖ₊₁`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SurrogateMode {
    /// `⟨gˣₖ₊₁ − gʸₖ, xₖ₊₁ − yₖ⟩` with a fresh sample at `xₖ₊₁`. Works with any oracle.
    #[default]
    StochasticSymmetrized,
    /// `f(xₖ₊₁) − f(yₖ) − ⟨gʸₖ, xₖ₊₁ − yₖ⟩`. Needs exact gradients and function values.
    DeterministicBregman,
}

/// Universal (stochastic) fast gradient method, in the similar-triangles form.
///
/// With `aₖ₊₁ = k + 1` and `Aₖ₊₁ = Aₖ + aₖ₊₁`:
///
/// ```text
/// yₖ   = (Aₖ xₖ + aₖ₊₁ vₖ) / Aₖ₊₁,        gʸ ~ g(yₖ)
/// vₖ₊₁ = argmin aₖ₊₁⟨gʸ, x⟩ + psi + Hₖ/2‖x − vₖ‖²
/// xₖ₊₁ = (Aₖ xₖ + aₖ₊₁ vₖ₊₁) / Aₖ₊₁
/// ```
///
/// and `H` follows the balance equation with `β = Aₖ₊₁ β̂ₖ₊₁`, `r = ‖vₖ₊₁ − vₖ‖`.
/// Returns the last `xₖ`.
pub fn run_usfgm(
    obj: &CompositeObjective,
    oracle: OracleConfig,
    mode: SurrogateMode,
    opts: &SolverOptions,
    observer: &mut dyn Observer,
) -> Result<SolveResult> {
    if mode == SurrogateMode::DeterministicBregman && !oracle.is_exact() {
        return Err(Error::usage(
            "deterministic Bregman surrogate needs an exact gradient oracle",
        ));
    }
    let x0 = opts.validate(obj)?;
    let mut oracle = Oracle::new(oracle, obj)?;
    let omega = opts.diameter * opts.diameter;
    let metric = obj.metric();
    let mut tracer = Tracer::new(opts, observer);

    let mut x = x0.clone();
    let mut v = x0;
    let mut y = vec![0.0; obj.dim()];
    let mut x_next = vec![0.0; obj.dim()];
    let mut a_sum = 0.0;
    let mut h = 0.0;
    let mut calls = 0u64;

    for k in 0..opts.max_iters {
        let a = (k + 1) as f64;
        let a_next = a_sum + a;
        combine_into(&mut y, a_sum / a_next, &x, a / a_next, &v);

        let (f_y, g_y) = match mode {
            SurrogateMode::DeterministicBregman => obj.value_and_gradient(&y)?,
            SurrogateMode::StochasticSymmetrized => (f64::NAN, oracle.sample(obj, &y)?.g),
        };
        calls += 1;

        let scaled: Vec<f64> = g_y.iter().map(|gi| a * gi).collect();
        let v_next = obj.prox(&scaled, &v, h)?;
        combine_into(&mut x_next, a_sum / a_next, &x, a / a_next, &v_next);

        let r = metric.distance(&v_next, &v)?;
        let step = sub(&x_next, &y);
        let (beta_hat, f_next) = match mode {
            SurrogateMode::StochasticSymmetrized => {
                let g_x = oracle.sample(obj, &x_next)?.g;
                calls += 1;
                (dot(&sub(&g_x, &g_y), &step), None)
            }
            SurrogateMode::DeterministicBregman => {
                let f_next = obj.value(&x_next)?;
                (f_next - f_y - dot(&g_y, &step), Some(f_next))
            }
        };
        let beta = a_next * beta_hat;
        h = balance_update(BalanceInputs {
            h,
            beta,
            rho: 0.5 * r * r,
            omega,
        });

        std::mem::swap(&mut x, &mut x_next);
        v = v_next;
        a_sum = a_next;

        if tracer.wants(k + 1) {
            let f_value = match f_next {
                Some(f) => f,
                None => obj.value(&x)?,
            };
            tracer.push(TraceRecord {
                k: k + 1,
                f_value,
                h,
                r,
                beta,
                cert_gap: None,
                grad_diff_norm: None,
                oracle_calls: calls,
                wall_time_s: tracer.elapsed(),
            });
        }
    }

    Ok(SolveResult {
        x,
        trace: tracer.finish(),
        final_h: h,
        oracle_calls: calls,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::DenseMatrix;
    use crate::metric::MetricSpace;
    use crate::problem::BallDomain;
    use crate::solvers::Silent;

    fn ls() -> CompositeObjective {
        CompositeObjective::least_squares(
            DenseMatrix::from_rows(&[vec![1.0, 0.2], vec![0.3, 2.0], vec![-0.5, 0.4]]).unwrap(),
            vec![1.0, 3.0, -0.2],
            BallDomain::centered(2, 1.0).unwrap(),
            MetricSpace::identity(2).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn deterministic_mode_rejects_noisy_oracle() {
        let obj = ls();
        let opts = SolverOptions::for_problem(&obj, 3);
        let err = run_usfgm(
            &obj,
            OracleConfig::gaussian(0.5, 1),
            SurrogateMode::DeterministicBregman,
            &opts,
            &mut Silent,
        );
        assert!(matches!(err, Err(Error::Usage(_))));
    }

    #[test]
    fn first_step_uses_start_as_intermediate_point() {
        // With A₀ = 0 the first y equals v₀ = x₀, so the first x equals v₁.
        let obj = ls();
        let mut opts = SolverOptions::for_problem(&obj, 1);
        opts.x0 = Some(vec![0.3, -0.4]);
        let res = run_usfgm(
            &obj,
            OracleConfig::exact(),
            SurrogateMode::DeterministicBregman,
            &opts,
            &mut Silent,
        )
        .unwrap();
        let (_, g0) = obj.value_and_gradient(&[0.3, -0.4]).unwrap();
        let v1 = obj.prox(&g0, &[0.3, -0.4], 0.0).unwrap();
        assert_eq!(res.x, v1);
    }

    #[test]
    fn oracle_call_counts() {
        let obj = ls();
        let opts = SolverOptions::for_problem(&obj, 10);
        let det = run_usfgm(
            &obj,
            OracleConfig::exact(),
            SurrogateMode::DeterministicBregman,
            &opts,
            &mut Silent,
        )
        .unwrap();
        assert_eq!(det.oracle_calls, 10);
        let sto = run_usfgm(
            &obj,
            OracleConfig::gaussian(0.1, 2),
            SurrogateMode::StochasticSymmetrized,
            &opts,
            &mut Silent,
        )
        .unwrap();
        assert_eq!(sto.oracle_calls, 20);
    }
}
