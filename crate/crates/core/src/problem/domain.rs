use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};
use crate::metric::MetricSpace;

/// Relative slack, in units of the radius, accepted when checking that a point
/// lies in the ball. Absorbs projection round-off.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Ball `{x : ‖x − center‖ ≤ radius}` in the metric norm.
#[derive(Debug, Clone, PartialEq)]
pub struct BallDomain {
    center: Vec<f64>,
    radius: f64,
}

impl BallDomain {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::usage("ball center must have dimension at least 1"));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::usage(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::usage("ball center must be finite"));
        }
        Ok(Self { center, radius })
    }

    /// Ball of the given radius around the origin.
    pub fn centered(dim: usize, radius: f64) -> Result<Self> {
        Self::new(vec![0.0; dim], radius)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    /// Whether `x` lies in the ball up to [`FEASIBILITY_TOL`].
    pub fn contains(&self, metric: &MetricSpace, x: &[f64]) -> Result<bool> {
        check_dim("contains", self.dim(), x.len())?;
        Ok(metric.distance(x, &self.center)? <= self.radius * (1.0 + FEASIBILITY_TOL))
    }

    /// Draws a point uniformly from the ball (uniform in the metric's geometry).
    pub fn sample_uniform<R: Rng + ?Sized>(&self, metric: &MetricSpace, rng: &mut R) -> Vec<f64> {
        let n = self.dim();
        // z ~ N(0, B⁻¹) has a B-rotation-invariant law, so z/‖z‖ is uniform on the sphere.
        let z: Vec<f64> = metric
            .b_diag()
            .iter()
            .map(|b| rng.sample::<f64, _>(StandardNormal) / b.sqrt())
            .collect();
        let zn = metric.norm_unchecked(&z);
        let u: f64 = rng.random::<f64>();
        let scale = self.radius * u.powf(1.0 / n as f64) / zn;
        self.center
            .iter()
            .zip(&z)
            .map(|(c, zi)| c + scale * zi)
            .collect()
    }
}

/// Metric projection of `x` onto the ball: radial scaling toward the center.
pub fn project_ball(x: &[f64], domain: &BallDomain, metric: &MetricSpace) -> Result<Vec<f64>> {
    check_dim("project_ball", domain.dim(), x.len())?;
    check_dim("project_ball metric", domain.dim(), metric.dim())?;
    let dist = metric.distance(x, domain.center())?;
    if dist <= domain.radius() {
        return Ok(x.to_vec());
    }
    let scale = domain.radius() / dist;
    Ok(domain
        .center()
        .iter()
        .zip(x)
        .map(|(c, xi)| c + scale * (xi - c))
        .collect())
}

/// Solves `argmin_{x in ball} ⟨c, x⟩ + (H/2)‖x − anchor‖²`.
///
/// With `H > 0` this is the projection of `anchor − B⁻¹c/H`. With `H = 0` it is
/// the linear minimization point `center − radius·B⁻¹c/‖c‖*`; when `c = 0`
/// every point is optimal and the anchor is returned.
pub fn prox_step(
    c: &[f64],
    anchor: &[f64],
    h: f64,
    domain: &BallDomain,
    metric: &MetricSpace,
) -> Result<Vec<f64>> {
    check_dim("prox_step linear term", domain.dim(), c.len())?;
    check_dim("prox_step anchor", domain.dim(), anchor.len())?;
    check_dim("prox_step metric", domain.dim(), metric.dim())?;
    if h.is_nan() || h < 0.0 {
        return Err(Error::usage(format!(
            "prox_step: H must be nonnegative, got {h}"
        )));
    }
    if !domain.contains(metric, anchor)? {
        return Err(Error::usage("prox_step: anchor lies outside the domain"));
    }
    if c.iter().all(|ci| *ci == 0.0) {
        return Ok(anchor.to_vec());
    }
    if h > 0.0 {
        let target: Vec<f64> = anchor
            .iter()
            .zip(c)
            .zip(metric.b_diag())
            .map(|((a, ci), b)| a - ci / (b * h))
            .collect();
        if target.iter().all(|t| t.is_finite()) {
            return project_ball(&target, domain, metric);
        }
        // H so small that the step overflows: the limit H → 0 is the LMO point.
    }
    Ok(linear_minimizer(c, domain, metric))
}

/// `argmin_{x in ball} ⟨c, x⟩` for nonzero `c`.
pub(crate) fn linear_minimizer(c: &[f64], domain: &BallDomain, metric: &MetricSpace) -> Vec<f64> {
    let cn = metric.dual_norm_unchecked(c);
    let scale = domain.radius() / cn;
    domain
        .center()
        .iter()
        .zip(c)
        .zip(metric.b_diag())
        .map(|((ctr, ci), b)| ctr - scale * ci / b)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::dot;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_ball(n: usize) -> (BallDomain, MetricSpace) {
        (
            BallDomain::centered(n, 1.0).unwrap(),
            MetricSpace::identity(n).unwrap(),
        )
    }

    #[test]
    fn prox_projects_unconstrained_minimizer() {
        let (dom, m) = unit_ball(2);
        let x = prox_step(&[2.0, 0.0], &[0.0, 0.0], 1.0, &dom, &m).unwrap();
        assert!((x[0] + 1.0).abs() < 1e-15 && x[1].abs() < 1e-15, "{x:?}");
    }

    // Brute-force check of the example above on a polar grid of the unit disc.
    #[test]
    fn prox_example_matches_grid_search() {
        let obj = |x: f64, y: f64| 2.0 * x + 0.5 * (x * x + y * y);
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in 0..=400 {
            let rho = i as f64 / 400.0;
            for j in 0..720 {
                let t = j as f64 * std::f64::consts::PI / 360.0;
                let (x, y) = (rho * t.cos(), rho * t.sin());
                let v = obj(x, y);
                if v < best.0 {
                    best = (v, x, y);
                }
            }
        }
        assert!(
            (best.1 + 1.0).abs() < 1e-6 && best.2.abs() < 1e-6,
            "{best:?}"
        );
    }

    #[test]
    fn prox_with_zero_linear_term_returns_anchor() {
        let (dom, m) = unit_ball(2);
        for h in [0.0, 0.5, 10.0] {
            let x = prox_step(&[0.0, 0.0], &[0.3, -0.2], h, &dom, &m).unwrap();
            assert_eq!(x, vec![0.3, -0.2]);
        }
    }

    #[test]
    fn prox_with_zero_h_is_linear_minimization() {
        let (dom, m) = unit_ball(2);
        let x = prox_step(&[0.0, 3.0], &[0.5, 0.0], 0.0, &dom, &m).unwrap();
        assert_eq!(x, vec![0.0, -1.0]);
    }

    #[test]
    fn prox_rejects_infeasible_anchor_and_negative_h() {
        let (dom, m) = unit_ball(2);
        assert!(matches!(
            prox_step(&[1.0, 0.0], &[2.0, 0.0], 1.0, &dom, &m),
            Err(Error::Usage(_))
        ));
        assert!(prox_step(&[1.0, 0.0], &[0.0, 0.0], -1.0, &dom, &m).is_err());
        // Within the feasibility tolerance is fine.
        assert!(prox_step(&[1.0, 0.0], &[1.0 + 1e-12, 0.0], 1.0, &dom, &m).is_ok());
    }

    #[test]
    fn prox_with_tiny_h_does_not_overflow() {
        let (dom, m) = unit_ball(2);
        let x = prox_step(&[1e300, 0.0], &[0.0, 0.0], 1e-300, &dom, &m).unwrap();
        assert_eq!(x, vec![-1.0, 0.0]);
    }

    #[test]
    fn projection_examples() {
        let (dom, m) = unit_ball(2);
        assert_eq!(project_ball(&[0.2, 0.1], &dom, &m).unwrap(), vec![0.2, 0.1]);
        assert_eq!(project_ball(&[0.0, 2.0], &dom, &m).unwrap(), vec![0.0, 1.0]);
        let once = project_ball(&[3.0, -4.0], &dom, &m).unwrap();
        assert_eq!(project_ball(&once, &dom, &m).unwrap(), once);
    }

    #[test]
    fn projection_in_scaled_metric() {
        let dom = BallDomain::new(vec![1.0, 1.0], 2.0).unwrap();
        let m = MetricSpace::diagonal(vec![4.0, 1.0]).unwrap();
        let p = project_ball(&[5.0, 1.0], &dom, &m).unwrap();
        assert!((m.distance(&p, dom.center()).unwrap() - 2.0).abs() < 1e-14);
        assert!(
            (p[0] - 2.0).abs() < 1e-14 && (p[1] - 1.0).abs() < 1e-14,
            "{p:?}"
        );
    }

    #[test]
    fn uniform_samples_stay_inside() {
        let dom = BallDomain::new(vec![0.5, -1.0, 2.0], 0.7).unwrap();
        let m = MetricSpace::diagonal(vec![1.0, 9.0, 0.25]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let x = dom.sample_uniform(&m, &mut rng);
            assert!(m.distance(&x, dom.center()).unwrap() <= 0.7 * (1.0 + 1e-12));
        }
    }

    fn prox_case() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>, f64, u64)> {
        (1usize..6).prop_flat_map(|n| {
            (
                prop::collection::vec(0.1f64..10.0, n),
                prop::collection::vec(-20.0f64..20.0, n),
                prop::collection::vec(-1.0f64..1.0, n),
                0.0f64..50.0,
                any::<u64>(),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        // Strong convexity of the prox objective at its minimizer.
        #[test]
        fn prox_optimality_condition((b, c, anchor_dir, h, seed) in prox_case()) {
            let n = b.len();
            let m = MetricSpace::diagonal(b).unwrap();
            let dom = BallDomain::new(vec![0.1; n], 1.5).unwrap();
            let anchor = project_ball(
                &anchor_dir.iter().map(|a| 0.1 + a).collect::<Vec<_>>(), &dom, &m).unwrap();
            let xp = prox_step(&c, &anchor, h, &dom, &m).unwrap();
            prop_assert!(m.distance(&xp, dom.center()).unwrap() <= 1.5 * (1.0 + 1e-12));
            let phi = |x: &[f64]| dot(&c, x) + 0.5 * h * m.distance(x, &anchor).unwrap().powi(2);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..20 {
                let x = dom.sample_uniform(&m, &mut rng);
                let lhs = phi(&x);
                let rhs = phi(&xp) + 0.5 * h * m.distance(&x, &xp).unwrap().powi(2);
                prop_assert!(lhs >= rhs - 1e-9 * (1.0 + lhs.abs()), "lhs {} rhs {}", lhs, rhs);
            }
        }

        #[test]
        fn projection_is_idempotent_and_feasible(x in prop::collection::vec(-10.0f64..10.0, 3)) {
            let m = MetricSpace::diagonal(vec![1.0, 2.0, 0.5]).unwrap();
            let dom = BallDomain::new(vec![0.0, 1.0, -1.0], 1.0).unwrap();
            let p = project_ball(&x, &dom, &m).unwrap();
            prop_assert!(m.distance(&p, dom.center()).unwrap() <= 1.0 + 1e-12);
            let pp = project_ball(&p, &dom, &m).unwrap();
            for (a, b) in p.iter().zip(&pp) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}
