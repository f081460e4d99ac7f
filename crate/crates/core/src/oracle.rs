//! Unbiased stochastic gradient oracles with a known noise level.
//!
//! Randomness is counter-based: draw `d` of a run with seed `s` uses the
//! ChaCha8 stream `d` of the key derived from `s`. Any single sample can be
//! replayed from `(seed, draw_index)` alone, and a sample's randomness never
//! depends on anything but its own position, so it is generated strictly after
//! the query point is fixed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::problem::CompositeObjective;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleKind {
    Exact,
    /// `f'(x) + δ` with Gaussian `δ` normalized so that `E‖δ‖*² = σ²`.
    Gaussian {
        sigma: f64,
    },
    /// Average of `batch_size` row gradients drawn uniformly with replacement.
    /// With `exhaustive`, every row is used once and the result is exact.
    Minibatch {
        batch_size: usize,
        exhaustive: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub kind: OracleKind,
    pub seed: u64,
}

impl OracleConfig {
    pub fn exact() -> Self {
        Self {
            kind: OracleKind::Exact,
            seed: 0,
        }
    }

    pub fn gaussian(sigma: f64, seed: u64) -> Self {
        Self {
            kind: OracleKind::Gaussian { sigma },
            seed,
        }
    }

    pub fn minibatch(batch_size: usize, seed: u64) -> Self {
        Self {
            kind: OracleKind::Minibatch {
                batch_size,
                exhaustive: false,
            },
            seed,
        }
    }

    pub fn is_exact(&self) -> bool {
        match self.kind {
            OracleKind::Exact => true,
            OracleKind::Gaussian { sigma } => sigma == 0.0,
            OracleKind::Minibatch { exhaustive, .. } => exhaustive,
        }
    }

    /// The noise level `σ` when it is known by construction.
    pub fn declared_sigma(&self) -> Option<f64> {
        match self.kind {
            OracleKind::Exact => Some(0.0),
            OracleKind::Gaussian { sigma } => Some(sigma),
            OracleKind::Minibatch {
                exhaustive: true, ..
            } => Some(0.0),
            OracleKind::Minibatch { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientSample {
    pub g: Vec<f64>,
    /// Number of oracle calls that preceded this one in the run.
    pub draw_index: u64,
}

/// A stateful oracle bound to one solver run.
#[derive(Debug, Clone)]
pub struct Oracle {
    config: OracleConfig,
    draws: u64,
    noise_scale: Vec<f64>,
}

impl Oracle {
    pub fn new(config: OracleConfig, obj: &CompositeObjective) -> Result<Self> {
        let noise_scale = match config.kind {
            OracleKind::Exact => Vec::new(),
            OracleKind::Gaussian { sigma } => {
                if !(sigma.is_finite() && sigma >= 0.0) {
                    return Err(Error::usage(format!(
                        "gaussian oracle needs finite sigma >= 0, got {sigma}"
                    )));
                }
                // Coordinate i has variance σ²·bᵢ/n, so Σ Var(δᵢ)/bᵢ = σ².
                let n = obj.dim() as f64;
                obj.metric()
                    .b_diag()
                    .iter()
                    .map(|b| sigma * (b / n).sqrt())
                    .collect()
            }
            OracleKind::Minibatch { batch_size, .. } => {
                let rows = obj
                    .loss()
                    .finite_sum()
                    .ok_or_else(|| {
                        Error::usage(format!(
                            "mini-batch oracle needs a finite-sum objective, {} is not",
                            obj.label()
                        ))
                    })?
                    .terms();
                if batch_size == 0 || batch_size > rows {
                    return Err(Error::usage(format!(
                        "mini-batch size must be in 1..={rows}, got {batch_size}"
                    )));
                }
                Vec::new()
            }
        };
        Ok(Self {
            config,
            draws: 0,
            noise_scale,
        })
    }

    pub fn config(&self) -> &OracleConfig {
        &self.config
    }

    /// Total number of samples drawn so far.
    pub fn calls(&self) -> u64 {
        self.draws
    }

    /// Generator for draw `draw_index`, independent of every other draw.
    pub fn rng_for_draw(seed: u64, draw_index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(draw_index);
        rng
    }

    /// Draws a stochastic gradient at `x`.
    pub fn sample(&mut self, obj: &CompositeObjective, x: &[f64]) -> Result<GradientSample> {
        let draw_index = self.draws;
        let g = self.sample_at(obj, x, draw_index)?;
        self.draws += 1;
        Ok(GradientSample { g, draw_index })
    }

    /// Recomputes the sample with the given draw index (does not advance the oracle).
    pub fn replay(&self, obj: &CompositeObjective, x: &[f64], draw_index: u64) -> Result<Vec<f64>> {
        self.sample_at(obj, x, draw_index)
    }

    fn sample_at(&self, obj: &CompositeObjective, x: &[f64], draw_index: u64) -> Result<Vec<f64>> {
        match self.config.kind {
            OracleKind::Exact => Ok(obj.value_and_gradient(x)?.1),
            OracleKind::Gaussian { sigma } => {
                let (_, mut g) = obj.value_and_gradient(x)?;
                if sigma > 0.0 {
                    let mut rng = Self::rng_for_draw(self.config.seed, draw_index);
                    for (gi, s) in g.iter_mut().zip(&self.noise_scale) {
                        *gi += s * rng.sample::<f64, _>(StandardNormal);
                    }
                }
                Ok(g)
            }
            OracleKind::Minibatch {
                batch_size,
                exhaustive,
            } => {
                let fs = obj.loss().finite_sum().expect("checked at construction");
                let rows = fs.terms();
                if x.len() != obj.dim() {
                    return Err(Error::usage("mini-batch oracle: dimension mismatch"));
                }
                let mut g = vec![0.0; obj.dim()];
                if exhaustive {
                    for i in 0..rows {
                        fs.add_term_gradient(i, x, 1.0, &mut g);
                    }
                } else {
                    // Unbiased for Σᵢ ∇fᵢ: each sampled row is weighted m/B.
                    let weight = rows as f64 / batch_size as f64;
                    let mut rng = Self::rng_for_draw(self.config.seed, draw_index);
                    for _ in 0..batch_size {
                        let i = rng.random_range(0..rows);
                        fs.add_term_gradient(i, x, weight, &mut g);
                    }
                }
                Ok(g)
            }
        }
    }
}
