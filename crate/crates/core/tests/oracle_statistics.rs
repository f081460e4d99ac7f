use unigrad::dataio::synth_least_squares;
use unigrad::oracle::{Oracle, OracleConfig};
use unigrad::problem::{BallDomain, CompositeObjective};
use unigrad::MetricSpace;

const DRAWS: usize = 40_000;

fn problem() -> CompositeObjective {
    let (ds, _) = synth_least_squares(25, 4, 6).unwrap();
    CompositeObjective::least_squares(
        ds.features,
        ds.labels,
        BallDomain::centered(4, 1.0).unwrap(),
        MetricSpace::diagonal(vec![0.5, 1.0, 2.0, 8.0]).unwrap(),
    )
    .unwrap()
}

fn points() -> [Vec<f64>; 3] {
    [
        vec![0.0; 4],
        vec![0.5, -0.25, 0.1, 0.2],
        vec![-0.3, 0.3, -0.3, 0.1],
    ]
}

/// Per-coordinate sample mean and standard error, plus mean of `‖g − exact‖*²`.
fn moments(obj: &CompositeObjective, cfg: OracleConfig, x: &[f64]) -> (Vec<f64>, Vec<f64>, f64) {
    let (_, exact) = obj.value_and_gradient(x).unwrap();
    let mut oracle = Oracle::new(cfg, obj).unwrap();
    let n = x.len();
    let (mut s1, mut s2) = (vec![0.0; n], vec![0.0; n]);
    let mut dual_sq = 0.0;
    for _ in 0..DRAWS {
        let g = oracle.sample(obj, x).unwrap().g;
        let delta: Vec<f64> = g.iter().zip(&exact).map(|(a, b)| a - b).collect();
        for i in 0..n {
            s1[i] += delta[i];
            s2[i] += delta[i] * delta[i];
        }
        dual_sq += obj.metric().dual_norm(&delta).unwrap().powi(2);
    }
    let d = DRAWS as f64;
    let mean: Vec<f64> = s1.iter().map(|s| s / d).collect();
    let se = s2
        .iter()
        .zip(&mean)
        .map(|(s, m)| ((s / d - m * m) / d).sqrt())
        .collect();
    (mean, se, dual_sq / d)
}

#[test]
fn gaussian_oracle_is_unbiased_with_declared_variance() {
    let obj = problem();
    for (i, x) in points().iter().enumerate() {
        let sigma = 0.7;
        let (mean, se, var) = moments(&obj, OracleConfig::gaussian(sigma, 100 + i as u64), x);
        for (m, s) in mean.iter().zip(&se) {
            assert!(m.abs() <= 4.0 * s, "bias {m} vs se {s}");
        }
        assert!((var / (sigma * sigma) - 1.0).abs() < 0.03, "variance {var}");
    }
}

#[test]
fn minibatch_oracle_is_unbiased() {
    let obj = problem();
    for (i, x) in points().iter().enumerate() {
        let (mean, se, var) = moments(&obj, OracleConfig::minibatch(3, 200 + i as u64), x);
        assert!(var > 0.0);
        for (m, s) in mean.iter().zip(&se) {
            assert!(m.abs() <= 4.0 * s, "bias {m} vs se {s}");
        }
    }
}

#[test]
fn replay_reproduces_any_draw() {
    let obj = problem();
    let x = &points()[1];
    for cfg in [
        OracleConfig::gaussian(1.0, 5),
        OracleConfig::minibatch(4, 5),
    ] {
        let mut oracle = Oracle::new(cfg, &obj).unwrap();
        let draws: Vec<_> = (0..10).map(|_| oracle.sample(&obj, x).unwrap()).collect();
        for d in draws.iter().rev() {
            assert_eq!(oracle.replay(&obj, x, d.draw_index).unwrap(), d.g);
        }
    }
}
