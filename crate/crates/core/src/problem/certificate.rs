//! Computable optimality certificate for the composite gradient method.
//!
//! After `k` linearizations the averaged model
//! `Φₖ(x) = (1/k) Σᵢ [f(xᵢ) + ⟨gᵢ, x − xᵢ⟩] + psi(x)` lower-bounds `F`
//! everywhere, so its minimum over the ball `Φₖ*` satisfies `Φₖ* ≤ F*`, and
//! `εₖ* = F(best) − Φₖ*` bounds the suboptimality of the best point seen.

use crate::error::{check_dim, Error, Result};
use crate::metric::{dot, MetricSpace};

use super::domain::BallDomain;

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateAccumulator {
    k: usize,
    sum_g: Vec<f64>,
    sum_affine_const: f64,
    best_value: f64,
    best_x: Option<Vec<f64>>,
}

/// `(Φₖ*, εₖ*)`. `eps_star` is nonnegative up to round-off and is reported unclamped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub phi_star: f64,
    pub eps_star: f64,
}

impl CertificateAccumulator {
    pub fn new(dim: usize) -> Self {
        Self {
            k: 0,
            sum_g: vec![0.0; dim],
            sum_affine_const: 0.0,
            best_value: f64::INFINITY,
            best_x: None,
        }
    }

    /// Number of linearizations accumulated.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn sum_g(&self) -> &[f64] {
        &self.sum_g
    }

    pub fn sum_affine_const(&self) -> f64 {
        self.sum_affine_const
    }

    pub fn best_value(&self) -> f64 {
        self.best_value
    }

    pub fn best_x(&self) -> Option<&[f64]> {
        self.best_x.as_deref()
    }

    /// Adds the linearization of `f` at `x` (value `f_x`, subgradient `g`) and
    /// offers `x` as a best-point candidate with objective value `big_f_x`.
    pub fn update(&mut self, x: &[f64], g: &[f64], f_x: f64, big_f_x: f64) -> Result<()> {
        self.add_linearization(x, g, f_x)?;
        self.offer(x, big_f_x)
    }

    pub fn add_linearization(&mut self, x: &[f64], g: &[f64], f_x: f64) -> Result<()> {
        check_dim("certificate point", self.sum_g.len(), x.len())?;
        check_dim("certificate subgradient", self.sum_g.len(), g.len())?;
        for (s, gi) in self.sum_g.iter_mut().zip(g) {
            *s += gi;
        }
        self.sum_affine_const += f_x - dot(g, x);
        self.k += 1;
        Ok(())
    }

    /// Records `x` as the best point if `value` is strictly smaller than the
    /// current best; ties keep the earlier point.
    pub fn offer(&mut self, x: &[f64], value: f64) -> Result<()> {
        check_dim("certificate candidate", self.sum_g.len(), x.len())?;
        if value < self.best_value {
            self.best_value = value;
            match &mut self.best_x {
                Some(b) => b.copy_from_slice(x),
                None => self.best_x = Some(x.to_vec()),
            }
        }
        Ok(())
    }
}

/// Minimizes the averaged linear model over the ball in closed form.
pub fn certificate_gap(
    acc: &CertificateAccumulator,
    domain: &BallDomain,
    metric: &MetricSpace,
) -> Result<Certificate> {
    if acc.k == 0 {
        return Err(Error::usage("certificate needs at least one linearization"));
    }
    check_dim("certificate domain", acc.sum_g.len(), domain.dim())?;
    check_dim("certificate metric", acc.sum_g.len(), metric.dim())?;
    let k = acc.k as f64;
    let c_bar: Vec<f64> = acc.sum_g.iter().map(|s| s / k).collect();
    let kappa = acc.sum_affine_const / k;
    let phi_star =
        kappa + dot(&c_bar, domain.center()) - domain.radius() * metric.dual_norm(&c_bar)?;
    Ok(Certificate {
        phi_star,
        eps_star: acc.best_value - phi_star,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::sub;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_disc() -> (BallDomain, MetricSpace) {
        (
            BallDomain::centered(2, 1.0).unwrap(),
            MetricSpace::identity(2).unwrap(),
        )
    }

    #[test]
    fn first_update() {
        let mut acc = CertificateAccumulator::new(2);
        acc.update(&[0.5, 0.25], &[2.0, -4.0], 3.0, 3.0).unwrap();
        assert_eq!(acc.k(), 1);
        assert_eq!(acc.sum_g(), &[2.0, -4.0]);
        assert_eq!(acc.sum_affine_const(), 3.0 - (1.0 - 1.0));
        assert_eq!(acc.best_x().unwrap(), &[0.5, 0.25]);
    }

    #[test]
    fn zero_updates_is_usage_error() {
        let (d, m) = unit_disc();
        let acc = CertificateAccumulator::new(2);
        assert!(matches!(
            certificate_gap(&acc, &d, &m),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn linear_objective_is_certified_exactly() {
        // f(x) = ⟨c, x⟩ + 1: min over unit disc is 1 − ‖c‖.
        let (d, m) = unit_disc();
        let c = [3.0, 4.0];
        let x0 = [0.1, 0.2];
        let f0 = dot(&c, &x0) + 1.0;
        let mut acc = CertificateAccumulator::new(2);
        acc.update(&x0, &c, f0, f0).unwrap();
        let cert = certificate_gap(&acc, &d, &m).unwrap();
        assert!((cert.phi_star - (1.0 - 5.0)).abs() < 1e-14);
        assert!((cert.eps_star - (f0 + 4.0)).abs() < 1e-14);
    }

    #[test]
    fn repeated_point_equals_single_linearization() {
        let (d, m) = unit_disc();
        let mut one = CertificateAccumulator::new(2);
        one.update(&[0.3, -0.1], &[1.0, 2.0], 5.0, 5.0).unwrap();
        let mut many = CertificateAccumulator::new(2);
        for _ in 0..7 {
            many.update(&[0.3, -0.1], &[1.0, 2.0], 5.0, 5.0).unwrap();
        }
        let a = certificate_gap(&one, &d, &m).unwrap();
        let b = certificate_gap(&many, &d, &m).unwrap();
        assert!((a.phi_star - b.phi_star).abs() < 1e-13);
        assert!((a.eps_star - b.eps_star).abs() < 1e-13);
    }

    #[test]
    fn ties_keep_earliest_best() {
        let mut acc = CertificateAccumulator::new(1);
        acc.offer(&[0.1], 2.0).unwrap();
        acc.offer(&[0.2], 2.0).unwrap();
        acc.offer(&[0.3], 3.0).unwrap();
        assert_eq!(acc.best_x().unwrap(), &[0.1]);
        acc.offer(&[0.4], 1.0).unwrap();
        assert_eq!(acc.best_x().unwrap(), &[0.4]);
        assert_eq!(acc.best_value(), 1.0);
    }

    // f(x) = ½‖x − a‖², one linearization; Φ₁* checked against a polar grid.
    #[test]
    fn quadratic_certificate_matches_grid_minimum() {
        let (d, m) = unit_disc();
        let a = [0.2, -0.3];
        let f = |x: &[f64]| 0.5 * ((x[0] - a[0]).powi(2) + (x[1] - a[1]).powi(2));
        let grad = |x: &[f64]| vec![x[0] - a[0], x[1] - a[1]];
        for xi in [[0.2, -0.3], [0.5, 0.4]] {
            let mut acc = CertificateAccumulator::new(2);
            acc.update(&xi, &grad(&xi), f(&xi), f(&xi)).unwrap();
            let cert = certificate_gap(&acc, &d, &m).unwrap();
            let g = grad(&xi);
            let phi = |x: &[f64]| f(&xi) + dot(&g, &sub(x, &xi));
            let mut grid_min = f64::INFINITY;
            for i in 0..=800 {
                let rho = i as f64 / 800.0;
                for j in 0..1440 {
                    let t = j as f64 * std::f64::consts::PI / 720.0;
                    grid_min = grid_min.min(phi(&[rho * t.cos(), rho * t.sin()]));
                }
            }
            assert!(
                (cert.phi_star - grid_min).abs() < 1e-5,
                "{} vs {grid_min}",
                cert.phi_star
            );
            assert!((cert.eps_star - (f(&xi) - grid_min)).abs() < 1e-5);
        }
    }

    #[test]
    fn certificate_lower_bounds_objective_on_domain() {
        let dom = BallDomain::new(vec![0.5, -0.5, 0.0], 1.3).unwrap();
        let m = MetricSpace::diagonal(vec![1.0, 2.0, 4.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        // Convex f(x) = Σ wⱼ (xⱼ − tⱼ)⁴.
        let w = [1.0, 0.5, 2.0];
        let t = [0.3, 0.9, -0.4];
        let f = |x: &[f64]| (0..3).map(|j| w[j] * (x[j] - t[j]).powi(4)).sum::<f64>();
        let g = |x: &[f64]| {
            (0..3)
                .map(|j| 4.0 * w[j] * (x[j] - t[j]).powi(3))
                .collect::<Vec<_>>()
        };
        let mut acc = CertificateAccumulator::new(3);
        for _ in 0..10 {
            let x = dom.sample_uniform(&m, &mut rng);
            acc.update(&x, &g(&x), f(&x), f(&x)).unwrap();
            let cert = certificate_gap(&acc, &dom, &m).unwrap();
            assert!(cert.eps_star >= -1e-9);
            for _ in 0..100 {
                let y = dom.sample_uniform(&m, &mut rng);
                assert!(cert.phi_star <= f(&y) + 1e-12);
            }
        }
    }
}
