//! Composite objective `F = f + psi` with `psi` the indicator of a metric ball.

mod certificate;
mod domain;
mod loss;

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};
use crate::matrix::DenseMatrix;
use crate::metric::MetricSpace;

pub use certificate::{certificate_gap, Certificate, CertificateAccumulator};
pub use domain::{project_ball, prox_step, BallDomain, FEASIBILITY_TOL};
pub use loss::{FiniteSum, LeastSquares, Linear, Logistic, Loss, PPowerResidual};

/// `f` together with the ball domain and the metric it is measured in.
///
/// On the domain `F = f`, so every value reported here is `F` at a feasible point.
#[derive(Clone)]
pub struct CompositeObjective {
    loss: Arc<dyn Loss>,
    domain: BallDomain,
    metric: MetricSpace,
    label: String,
}

impl std::fmt::Debug for CompositeObjective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CompositeObjective")
            .field("label", &self.label)
            .field("dim", &self.dim())
            .field("domain", &self.domain)
            .field("metric", &self.metric)
            .finish()
    }
}

impl CompositeObjective {
    pub fn new(
        loss: Arc<dyn Loss>,
        domain: BallDomain,
        metric: MetricSpace,
        label: impl Into<String>,
    ) -> Result<Self> {
        check_dim("domain", loss.dim(), domain.dim())?;
        check_dim("metric", loss.dim(), metric.dim())?;
        Ok(Self {
            loss,
            domain,
            metric,
            label: label.into(),
        })
    }

    /// Least squares `½‖Ax − b‖²` over `domain`.
    pub fn least_squares(
        a: DenseMatrix,
        b: Vec<f64>,
        domain: BallDomain,
        metric: MetricSpace,
    ) -> Result<Self> {
        Self::new(
            Arc::new(LeastSquares::new(a, b)?),
            domain,
            metric,
            "least_squares",
        )
    }

    pub fn logistic(
        features: DenseMatrix,
        labels: Vec<f64>,
        domain: BallDomain,
        metric: MetricSpace,
    ) -> Result<Self> {
        Self::new(
            Arc::new(Logistic::new(features, labels)?),
            domain,
            metric,
            "logistic",
        )
    }

    pub fn p_power(
        a: DenseMatrix,
        b: Vec<f64>,
        p: f64,
        domain: BallDomain,
        metric: MetricSpace,
    ) -> Result<Self> {
        let label = format!("ppower({p})");
        Self::new(
            Arc::new(PPowerResidual::new(a, b, p)?),
            domain,
            metric,
            label,
        )
    }

    pub fn dim(&self) -> usize {
        self.loss.dim()
    }

    pub fn domain(&self) -> &BallDomain {
        &self.domain
    }

    pub fn metric(&self) -> &MetricSpace {
        &self.metric
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn loss(&self) -> &dyn Loss {
        self.loss.as_ref()
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim("objective value", self.dim(), x.len())?;
        Ok(self.loss.value(x))
    }

    pub fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        check_dim("objective gradient", self.dim(), x.len())?;
        Ok(self.loss.value_and_gradient(x))
    }

    /// Prox step on this objective's domain and metric.
    pub fn prox(&self, c: &[f64], anchor: &[f64], h: f64) -> Result<Vec<f64>> {
        prox_step(c, anchor, h, &self.domain, &self.metric)
    }

    /// Same objective over a different ball.
    pub fn with_domain(&self, domain: BallDomain) -> Result<Self> {
        Self::new(
            self.loss.clone(),
            domain,
            self.metric.clone(),
            self.label.clone(),
        )
    }
}

/// Empirical lower estimate of the Hölder constant
/// `sup ‖g(x) − g(y)‖* / ‖x − y‖^ν` from `n_pairs` uniform pairs in the domain.
pub fn estimate_holder_constant(
    obj: &CompositeObjective,
    nu: f64,
    n_pairs: usize,
    seed: u64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&nu) {
        return Err(Error::usage(format!(
            "Hölder exponent must be in [0, 1], got {nu}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let metric = obj.metric();
    let mut best: f64 = 0.0;
    for _ in 0..n_pairs {
        let x = obj.domain().sample_uniform(metric, &mut rng);
        let y = obj.domain().sample_uniform(metric, &mut rng);
        let dist = metric.distance(&x, &y)?;
        if dist == 0.0 {
            continue;
        }
        let (_, gx) = obj.value_and_gradient(&x)?;
        let (_, gy) = obj.value_and_gradient(&y)?;
        let diff: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| a - b).collect();
        best = best.max(metric.dual_norm(&diff)? / dist.powf(nu));
    }
    Ok(best)
}
