//! Smooth (or Hölder-smooth) parts `f` of the composite objective.

use crate::error::{check_dim, Error, Result};
use crate::matrix::DenseMatrix;
use crate::metric::dot;

/// The function part `f` of `F = f + psi`.
///
/// Implementations may assume `x.len() == self.dim()`; dimension checks happen
/// in [`CompositeObjective`](super::CompositeObjective).
pub trait Loss: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    /// Value and one element of the subdifferential at `x`.
    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>);

    /// Row-decomposition of `f`, when it has one (needed by mini-batch oracles).
    fn finite_sum(&self) -> Option<&dyn FiniteSum> {
        None
    }
}

/// `f(x) = Σᵢ fᵢ(x)` over `terms()` rows.
pub trait FiniteSum {
    fn terms(&self) -> usize;

    /// `out += weight · ∇fᵢ(x)`.
    fn add_term_gradient(&self, i: usize, x: &[f64], weight: f64, out: &mut [f64]);
}

/// `f(x) = ½‖Ax − b‖²`.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    a: DenseMatrix,
    b: Vec<f64>,
}

impl LeastSquares {
    pub fn new(a: DenseMatrix, b: Vec<f64>) -> Result<Self> {
        check_dim("least squares targets", a.rows(), b.len())?;
        Ok(Self { a, b })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.a
    }

    fn residual(&self, x: &[f64]) -> Vec<f64> {
        (0..self.a.rows())
            .map(|i| dot(self.a.row(i), x) - self.b[i])
            .collect()
    }
}

impl Loss for LeastSquares {
    fn dim(&self) -> usize {
        self.a.cols()
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.5 * self.residual(x).iter().map(|r| r * r).sum::<f64>()
    }

    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let r = self.residual(x);
        let value = 0.5 * r.iter().map(|v| v * v).sum::<f64>();
        let grad = self
            .a
            .tr_mul_vec(&r)
            .expect("residual has one entry per row");
        (value, grad)
    }

    fn finite_sum(&self) -> Option<&dyn FiniteSum> {
        Some(self)
    }
}

impl FiniteSum for LeastSquares {
    fn terms(&self) -> usize {
        self.a.rows()
    }

    fn add_term_gradient(&self, i: usize, x: &[f64], weight: f64, out: &mut [f64]) {
        let row = self.a.row(i);
        let coef = weight * (dot(row, x) - self.b[i]);
        for (o, a) in out.iter_mut().zip(row) {
            *o += coef * a;
        }
    }
}

/// `f(x) = Σᵢ log(1 + exp(−bᵢ⟨aᵢ, x⟩))` with labels `bᵢ ∈ {−1, +1}`.
#[derive(Debug, Clone)]
pub struct Logistic {
    features: DenseMatrix,
    labels: Vec<f64>,
}

impl Logistic {
    pub fn new(features: DenseMatrix, labels: Vec<f64>) -> Result<Self> {
        check_dim("logistic labels", features.rows(), labels.len())?;
        if let Some(i) = labels.iter().position(|l| *l != 1.0 && *l != -1.0) {
            return Err(Error::Data(format!(
                "logistic loss needs labels in {{-1, +1}}; row {} has {}",
                i + 1,
                labels[i]
            )));
        }
        Ok(Self { features, labels })
    }
}

/// `log(1 + eᵗ)` without overflow.
fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

/// `1 / (1 + e⁻ᵗ)` without overflow.
fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

impl Loss for Logistic {
    fn dim(&self) -> usize {
        self.features.cols()
    }

    fn value(&self, x: &[f64]) -> f64 {
        (0..self.features.rows())
            .map(|i| softplus(-self.labels[i] * dot(self.features.row(i), x)))
            .sum()
    }

    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.dim()];
        let mut value = 0.0;
        for i in 0..self.features.rows() {
            let row = self.features.row(i);
            let t = -self.labels[i] * dot(row, x);
            value += softplus(t);
            let coef = -self.labels[i] * sigmoid(t);
            for (g, a) in grad.iter_mut().zip(row) {
                *g += coef * a;
            }
        }
        (value, grad)
    }

    fn finite_sum(&self) -> Option<&dyn FiniteSum> {
        Some(self)
    }
}

impl FiniteSum for Logistic {
    fn terms(&self) -> usize {
        self.features.rows()
    }

    fn add_term_gradient(&self, i: usize, x: &[f64], weight: f64, out: &mut [f64]) {
        let row = self.features.row(i);
        let t = -self.labels[i] * dot(row, x);
        let coef = -weight * self.labels[i] * sigmoid(t);
        for (o, a) in out.iter_mut().zip(row) {
            *o += coef * a;
        }
    }
}

/// `f(x) = (1/m) Σᵢ |⟨aᵢ, x⟩ − bᵢ|ᵖ` for `p ∈ [1, 2]`; Hölder-smooth with `ν = p − 1`.
#[derive(Debug, Clone)]
pub struct PPowerResidual {
    a: DenseMatrix,
    b: Vec<f64>,
    p: f64,
}

impl PPowerResidual {
    pub fn new(a: DenseMatrix, b: Vec<f64>, p: f64) -> Result<Self> {
        check_dim("p-power targets", a.rows(), b.len())?;
        if !(1.0..=2.0).contains(&p) {
            return Err(Error::usage(format!(
                "p-power loss needs p in [1, 2], got {p}"
            )));
        }
        Ok(Self { a, b, p })
    }

    pub fn exponent(&self) -> f64 {
        self.p
    }

    /// `d/dr |r|ᵖ`, taking the zero subgradient at `r = 0`.
    fn derivative(&self, r: f64) -> f64 {
        if r == 0.0 {
            0.0
        } else {
            self.p * r.signum() * r.abs().powf(self.p - 1.0)
        }
    }
}

impl Loss for PPowerResidual {
    fn dim(&self) -> usize {
        self.a.cols()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let m = self.a.rows() as f64;
        (0..self.a.rows())
            .map(|i| (dot(self.a.row(i), x) - self.b[i]).abs().powf(self.p))
            .sum::<f64>()
            / m
    }

    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let m = self.a.rows() as f64;
        let mut grad = vec![0.0; self.dim()];
        let mut value = 0.0;
        for i in 0..self.a.rows() {
            let row = self.a.row(i);
            let r = dot(row, x) - self.b[i];
            value += r.abs().powf(self.p);
            let coef = self.derivative(r) / m;
            if coef != 0.0 {
                for (g, a) in grad.iter_mut().zip(row) {
                    *g += coef * a;
                }
            }
        }
        (value / m, grad)
    }

    fn finite_sum(&self) -> Option<&dyn FiniteSum> {
        Some(self)
    }
}

impl FiniteSum for PPowerResidual {
    fn terms(&self) -> usize {
        self.a.rows()
    }

    fn add_term_gradient(&self, i: usize, x: &[f64], weight: f64, out: &mut [f64]) {
        let row = self.a.row(i);
        let coef = weight * self.derivative(dot(row, x) - self.b[i]) / self.a.rows() as f64;
        for (o, a) in out.iter_mut().zip(row) {
            *o += coef * a;
        }
    }
}

/// `f(x) = ⟨c, x⟩ + offset`. Useful for exercising the linear-minimization path.
#[derive(Debug, Clone)]
pub struct Linear {
    c: Vec<f64>,
    offset: f64,
}

impl Linear {
    pub fn new(c: Vec<f64>, offset: f64) -> Self {
        Self { c, offset }
    }
}

impl Loss for Linear {
    fn dim(&self) -> usize {
        self.c.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        dot(&self.c, x) + self.offset
    }

    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (self.value(x), self.c.clone())
    }
}
