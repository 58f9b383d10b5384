//! The online Newton step against dense reference implementations.

use nalgebra::DMatrix;

use dynregret::rng::{stream, uniform_in_ball};
use dynregret::*;

/// Metric projection by bisection on the multiplier of the norm constraint:
/// `z(μ) = (P + μI)⁻¹ P y`.
fn oracle_projection(y: &Vector, p: &DMatrix<f64>, radius: f64) -> Vector {
    if y.norm() <= radius {
        return y.clone();
    }
    let n = y.len();
    let py = p * y;
    let z = |mu: f64| (p + DMatrix::identity(n, n) * mu).lu().solve(&py).unwrap();
    let (mut lo, mut hi) = (0.0, 1.0);
    while z(hi).norm() > radius {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if z(mid).norm() > radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    z(hi)
}

fn tracking_stream(seed: u64, t: usize, n: usize, ball: &FeasibleBall) -> Vec<LossFunction> {
    let mut rng = stream(seed, 3);
    (0..t)
        .map(|_| LossFunction::tracking_quadratic(uniform_in_ball(&mut rng, n, 1.0), ball).unwrap())
        .collect()
}

#[test]
fn quasi_newton_inverse_matches_dense_accumulation() {
    let n = 4;
    let ball = FeasibleBall::new(1.0, n).unwrap();
    let config = NewtonConfig::new(NewtonCase::ExpConcave, 0.95, 0.1, 0.5).unwrap();
    let losses = tracking_stream(1, 500, n, &ball);
    let mut state = NewtonState::init(&config, Vector::zeros(n), &ball).unwrap();
    let mut dense = DMatrix::identity(n, n) * 0.5;
    for f in &losses {
        let g = f.gradient(state.theta()).unwrap();
        dense = dense * 0.95 + &g * g.transpose();
        let before = state.theta().clone();
        state = state.step(&g, None, &config, &ball).unwrap();

        assert!((state.p().as_matrix() - &dense).amax() <= 1e-10 * dense.amax());
        let step = dense.clone().try_inverse().unwrap() * &g / 0.1;
        let expected = oracle_projection(&(before - step), &dense, 1.0);
        assert!((state.theta() - &expected).norm() <= 1e-8, "{} vs {}", state.theta(), expected);
    }
    assert_eq!(state.jitter_retries(), 0);
}

#[test]
fn undiscounted_quasi_newton_is_online_newton_step() {
    let n = 2;
    let ball = FeasibleBall::new(1.0, n).unwrap();
    let eta = 0.125;
    let config = NewtonConfig::new(NewtonCase::ExpConcave, 1.0, eta, 1.0).unwrap();
    let losses = tracking_stream(2, 300, n, &ball);
    let mut learner = DiscountedNewton::new(config, ball, Vector::zeros(n)).unwrap();
    let trace = run_learner(&mut learner, &losses).unwrap();

    let mut theta = Vector::zeros(n);
    let mut a = DMatrix::identity(n, n);
    for (t, f) in losses.iter().enumerate() {
        assert!((&trace.predictions[t] - &theta).norm() <= 1e-8, "round {t}");
        let g = f.gradient(&theta).unwrap();
        a += &g * g.transpose();
        let y = &theta - a.clone().try_inverse().unwrap() * &g / eta;
        theta = oracle_projection(&y, &a, 1.0);
    }
    assert!((&trace.predictions[losses.len()] - &theta).norm() <= 1e-8);
}

#[test]
fn full_newton_uses_discounted_hessian_sum() {
    let n = 3;
    let ball = FeasibleBall::new(1.0, n).unwrap();
    let spec = ScenarioSpec::new(ScenarioKind::Stationary, 200, n, 1.0, 4)
        .with_loss_family(LossFamily::GeneralLeastSquares { m: 5, ell: 0.5, u: 2.0 })
        .with_noise(0.2);
    let s = generate(&spec).unwrap();
    let config = NewtonConfig::new(NewtonCase::StronglyConvexSmooth, 0.8, 0.25, 1.0).unwrap();
    let mut state = NewtonState::init(&config, Vector::zeros(n), &ball).unwrap();
    let mut dense = DMatrix::identity(n, n);
    for f in &s.losses {
        let g = f.gradient(state.theta()).unwrap();
        let h = f.hessian(state.theta()).unwrap();
        dense = dense * 0.8 + h.as_matrix();
        let y = state.theta() - dense.clone().try_inverse().unwrap() * &g / 0.25;
        let expected = oracle_projection(&y, &dense, 1.0);
        state = state.step(&g, Some(&h), &config, &ball).unwrap();
        assert!((state.theta() - &expected).norm() <= 1e-8);
    }
}
