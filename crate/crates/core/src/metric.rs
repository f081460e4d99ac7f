//! Vector arithmetic under a diagonal Euclidean metric `B`.
//!
//! Primal norm `‖x‖ = ⟨Bx, x⟩^½`, dual norm `‖s‖* = ⟨s, B⁻¹s⟩^½`, and the
//! standard pairing `⟨s, x⟩`. Only diagonal `B` is supported so that every
//! prox step stays closed-form.

use crate::error::{check_dim, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpace {
    b_diag: Vec<f64>,
}

impl MetricSpace {
    /// Metric with the given diagonal; every entry must be finite and positive.
    pub fn diagonal(b_diag: Vec<f64>) -> Result<Self> {
        if b_diag.is_empty() {
            return Err(Error::usage("metric dimension must be at least 1"));
        }
        if let Some(i) = b_diag.iter().position(|b| !(b.is_finite() && *b > 0.0)) {
            return Err(Error::usage(format!(
                "metric diagonal entry {i} is not a positive finite number: {}",
                b_diag[i]
            )));
        }
        Ok(Self { b_diag })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::diagonal(vec![1.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.b_diag.len()
    }

    pub fn b_diag(&self) -> &[f64] {
        &self.b_diag
    }

    pub fn norm(&self, x: &[f64]) -> Result<f64> {
        check_dim("norm", self.dim(), x.len())?;
        Ok(self.norm_unchecked(x))
    }

    pub fn dual_norm(&self, s: &[f64]) -> Result<f64> {
        check_dim("dual_norm", self.dim(), s.len())?;
        Ok(self.dual_norm_unchecked(s))
    }

    /// `‖x − y‖`, without allocating the difference.
    pub fn distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dim("distance", self.dim(), x.len())?;
        check_dim("distance", self.dim(), y.len())?;
        let sq: f64 = self
            .b_diag
            .iter()
            .zip(x.iter().zip(y))
            .map(|(b, (xi, yi))| b * (xi - yi) * (xi - yi))
            .sum();
        if sq.is_finite() && sq > 1e-280 || sq == 0.0 {
            return Ok(sq.sqrt());
        }
        Ok(self.norm_unchecked(&sub(x, y)))
    }

    /// `Bx`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim("apply", self.dim(), x.len())?;
        Ok(self.b_diag.iter().zip(x).map(|(b, xi)| b * xi).collect())
    }

    /// `B⁻¹s`, the primal representative of a dual vector.
    pub fn apply_inverse(&self, s: &[f64]) -> Result<Vec<f64>> {
        check_dim("apply_inverse", self.dim(), s.len())?;
        Ok(self.b_diag.iter().zip(s).map(|(b, si)| si / b).collect())
    }

    pub(crate) fn norm_unchecked(&self, x: &[f64]) -> f64 {
        weighted_norm(x, |i| self.b_diag[i])
    }

    pub(crate) fn dual_norm_unchecked(&self, s: &[f64]) -> f64 {
        weighted_norm(s, |i| 1.0 / self.b_diag[i])
    }
}

/// `√(Σ wᵢvᵢ²)`, rescaled by `max|vᵢ|` when the plain sum over- or underflows.
fn weighted_norm(v: &[f64], w: impl Fn(usize) -> f64) -> f64 {
    let sq: f64 = v.iter().enumerate().map(|(i, vi)| w(i) * vi * vi).sum();
    if sq.is_finite() && sq > 1e-280 || sq == 0.0 && v.iter().all(|vi| *vi == 0.0) {
        return sq.sqrt();
    }
    let scale = v.iter().fold(0.0f64, |m, vi| m.max(vi.abs()));
    if !scale.is_finite() || scale == 0.0 {
        return if scale == 0.0 { 0.0 } else { f64::INFINITY };
    }
    let sq: f64 = v
        .iter()
        .enumerate()
        .map(|(i, vi)| {
            let t = vi / scale;
            w(i) * t * t
        })
        .sum();
    scale * sq.sqrt()
}

/// `⟨s, x⟩ = Σ sᵢxᵢ`.
pub fn pairing(s: &[f64], x: &[f64]) -> Result<f64> {
    check_dim("pairing", s.len(), x.len())?;
    Ok(dot(s, x))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `(wa·a + wb·b)` written into `out`.
pub(crate) fn combine_into(out: &mut [f64], wa: f64, a: &[f64], wb: f64, b: &[f64]) {
    for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
        *o = wa * x + wb * y;
    }
}
