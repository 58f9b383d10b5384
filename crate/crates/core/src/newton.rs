//! Discounted online Newton step.
//!
//! Each round the curvature matrix is discounted and refreshed,
//!
//! ```text
//! quasi-Newton:  P_t = γP_{t−1} + ∇_t∇_tᵀ
//! full-Newton:   P_t = γP_{t−1} + ∇²f_t(θ_t)
//! ```
//!
//! and the iterate moves to `Π^{P_t}(θ_t − (1/η)P_t⁻¹∇_t)`, the projection onto
//! the ball in the `P_t`-norm. `P_0 = εI`. The quasi-Newton variant keeps
//! `P_t⁻¹` current with a Sherman–Morrison update (`O(n²)` per round); the
//! full-Newton variant refactorizes.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gd::check_gamma;
use crate::geometry::{FeasibleBall, SpdMatrix, Vector};
use crate::learner::OnlineLearner;
use crate::losses::{ConvexityProfile, LossFunction};
use nalgebra::DMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NewtonVariant {
    QuasiNewton,
    FullNewton,
}

/// The loss class the learner is configured for. It fixes the curvature
/// update and the admissible range of `η`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NewtonCase {
    /// α-exp-concave losses: quasi-Newton, `η ≤ ½·min{1/(4GD), α}`.
    ExpConcave,
    /// Strongly convex and smooth: full Newton, `η ≤ ℓ/u`.
    StronglyConvexSmooth,
    /// Losses bounded below by their Hessian quadratic: full Newton, `η ≤ 1`.
    QuadBound,
}

impl NewtonCase {
    pub fn variant(&self) -> NewtonVariant {
        match self {
            NewtonCase::ExpConcave => NewtonVariant::QuasiNewton,
            NewtonCase::StronglyConvexSmooth | NewtonCase::QuadBound => NewtonVariant::FullNewton,
        }
    }

    /// Largest admissible `η` for losses described by `profile`.
    pub fn max_eta(&self, profile: &ConvexityProfile, radius: f64) -> f64 {
        match self {
            NewtonCase::ExpConcave => profile.rho(radius),
            NewtonCase::StronglyConvexSmooth => profile.ell() / profile.u(),
            NewtonCase::QuadBound => 1.0,
        }
    }
}

/// Named choices for the initial curvature `P_0 = εI`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonPreset {
    /// `ε = 1`.
    Unit,
    /// `ε = 1/(ρ²D²)`.
    InverseRhoSqDSq,
    /// `ε = 1/(ρ²D²N)` for a grid of `N` experts.
    InverseRhoSqDSqN,
}

impl EpsilonPreset {
    pub fn value(&self, profile: &ConvexityProfile, radius: f64, experts: usize) -> f64 {
        let rho = profile.rho(radius);
        match self {
            EpsilonPreset::Unit => 1.0,
            EpsilonPreset::InverseRhoSqDSq => 1.0 / (rho * rho * radius * radius),
            EpsilonPreset::InverseRhoSqDSqN => 1.0 / (rho * rho * radius * radius * experts.max(1) as f64),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonConfig {
    gamma: f64,
    eta: f64,
    epsilon: f64,
    case: NewtonCase,
}

impl NewtonConfig {
    pub fn new(case: NewtonCase, gamma: f64, eta: f64, epsilon: f64) -> Result<Self> {
        check_gamma(gamma)?;
        if !(eta.is_finite() && eta > 0.0) {
            return Err(invalid(format!("η must be finite and > 0, got {eta}")));
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(invalid(format!("ε must be finite and > 0, got {epsilon}")));
        }
        Ok(NewtonConfig { gamma, eta, epsilon, case })
    }

    /// Checks `η` against the bound of the configured case.
    pub fn validate_for(&self, profile: &ConvexityProfile, ball: &FeasibleBall) -> Result<()> {
        let max = self.case.max_eta(profile, ball.radius());
        if self.eta > max * (1.0 + 1e-12) {
            return Err(invalid(format!("η = {} exceeds the admissible {max} for {:?}", self.eta, self.case)));
        }
        Ok(())
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn case(&self) -> NewtonCase {
        self.case
    }

    pub fn variant(&self) -> NewtonVariant {
        self.case.variant()
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(NewtonConfig { gamma, ..*self })
    }

    /// Cap on `‖P_t‖₂`: `ε + G²/(1−γ)` (quasi) or `ε + u/(1−γ)` (full).
    /// Infinite when `γ = 1`.
    pub fn p_norm_cap(&self, profile: &ConvexityProfile) -> f64 {
        let per_round = match self.variant() {
            NewtonVariant::QuasiNewton => profile.g() * profile.g(),
            NewtonVariant::FullNewton => profile.u(),
        };
        if self.gamma >= 1.0 {
            f64::INFINITY
        } else {
            self.epsilon + per_round / (1.0 - self.gamma)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonState {
    theta: Vector,
    p: SpdMatrix,
    p_inv: Option<DMatrix<f64>>,
    t: u64,
    jitter_retries: u32,
}

impl NewtonState {
    /// `θ_1` and `P_0 = εI`.
    pub fn init(config: &NewtonConfig, theta1: Vector, ball: &FeasibleBall) -> Result<Self> {
        ball.require_feasible(&theta1, "initial iterate")?;
        let n = ball.dim();
        let p_inv = match config.variant() {
            NewtonVariant::QuasiNewton => Some(DMatrix::identity(n, n) / config.epsilon),
            NewtonVariant::FullNewton => None,
        };
        Ok(NewtonState {
            theta: theta1,
            p: SpdMatrix::scaled_identity(n, config.epsilon),
            p_inv,
            t: 1,
            jitter_retries: 0,
        })
    }

    pub fn theta(&self) -> &Vector {
        &self.theta
    }

    /// The most recent curvature matrix (`P_{t−1}` while round `t` is being played).
    pub fn p(&self) -> &SpdMatrix {
        &self.p
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// Number of times a factorization needed diagonal jitter or the
    /// incremental inverse had to be rebuilt.
    pub fn jitter_retries(&self) -> u32 {
        self.jitter_retries
    }

    pub fn step(
        &self,
        grad: &Vector,
        hess: Option<&SpdMatrix>,
        config: &NewtonConfig,
        ball: &FeasibleBall,
    ) -> Result<NewtonState> {
        ball.check_point(grad, "gradient")?;
        let gamma = config.gamma;
        let mut retries = self.jitter_retries;
        let (p, direction, p_inv) = match config.variant() {
            NewtonVariant::QuasiNewton => {
                if hess.is_some() {
                    return Err(invalid("quasi-Newton update does not take a Hessian"));
                }
                let p = self.p.discounted_add(gamma, &(grad * grad.transpose()));
                let prev = self.p_inv.as_ref().ok_or_else(|| Error::Internal("missing inverse".into()))?;
                let b = prev / gamma;
                let bg = &b * grad;
                let denom = 1.0 + grad.dot(&bg);
                let inv = SpdMatrix::symmetrized(b - &bg * bg.transpose() / denom).into_inner();
                let inv = if inv.iter().all(|x| x.is_finite()) {
                    inv
                } else {
                    retries += 1;
                    factorize_with_jitter(&p, &mut retries)?.inverse()
                };
                let direction = &inv * grad;
                (p, direction, Some(inv))
            }
            NewtonVariant::FullNewton => {
                let h = hess.ok_or(Error::MissingHessian)?;
                if h.dim() != ball.dim() {
                    return Err(Error::DimensionMismatch { expected: ball.dim(), found: h.dim() });
                }
                let p = self.p.discounted_add(gamma, h.as_matrix());
                let chol = factorize_with_jitter(&p, &mut retries)?;
                let direction = chol.solve(grad);
                (p, direction, None)
            }
        };
        let proposal = &self.theta - direction / config.eta;
        let theta = project_with_jitter(ball, &proposal, &p, &mut retries)?;
        Ok(NewtonState { theta, p, p_inv, t: self.t + 1, jitter_retries: retries })
    }
}

fn jittered(p: &SpdMatrix) -> SpdMatrix {
    let n = p.dim();
    let jitter = 1e-12 * p.as_matrix().trace() / n as f64;
    p.discounted_add(1.0, &(DMatrix::identity(n, n) * jitter.max(f64::MIN_POSITIVE)))
}

fn factorize_with_jitter(p: &SpdMatrix, retries: &mut u32) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    match p.cholesky() {
        Ok(c) => Ok(c),
        Err(_) => {
            *retries += 1;
            jittered(p).cholesky()
        }
    }
}

fn project_with_jitter(ball: &FeasibleBall, y: &Vector, p: &SpdMatrix, retries: &mut u32) -> Result<Vector> {
    match ball.project_metric(y, p) {
        Err(Error::SingularMetric) => {
            *retries += 1;
            ball.project_metric(y, &jittered(p))
        }
        other => other,
    }
}

/// The discounted Newton step as an [`OnlineLearner`].
#[derive(Clone, Debug)]
pub struct DiscountedNewton {
    config: NewtonConfig,
    ball: FeasibleBall,
    state: NewtonState,
    stepped: bool,
}

impl DiscountedNewton {
    pub fn new(config: NewtonConfig, ball: FeasibleBall, theta1: Vector) -> Result<Self> {
        let state = NewtonState::init(&config, theta1, &ball)?;
        Ok(DiscountedNewton { config, ball, state, stepped: false })
    }

    pub fn config(&self) -> &NewtonConfig {
        &self.config
    }

    pub fn state(&self) -> &NewtonState {
        &self.state
    }
}

impl OnlineLearner for DiscountedNewton {
    fn prediction(&self) -> &Vector {
        &self.state.theta
    }

    fn observe(&mut self, loss: &LossFunction) -> Result<()> {
        let grad = loss.gradient(&self.state.theta)?;
        let hess = match self.config.variant() {
            NewtonVariant::FullNewton => Some(loss.hessian(&self.state.theta)?),
            NewtonVariant::QuasiNewton => None,
        };
        self.state = self.state.step(&grad, hess.as_ref(), &self.config, &self.ball)?;
        self.stepped = true;
        Ok(())
    }

    fn last_step_size(&self) -> f64 {
        if self.stepped {
            self.config.eta
        } else {
            f64::NAN
        }
    }

    fn discount(&self) -> f64 {
        self.config.gamma
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn init_sets_scaled_identity() {
        let ball = FeasibleBall::new(1.0, 2).unwrap();
        let c = NewtonConfig::new(NewtonCase::ExpConcave, 0.9, 0.1, 1.0).unwrap();
        let s = NewtonState::init(&c, dvector![0.0, 0.0], &ball).unwrap();
        assert_eq!(s.p(), &SpdMatrix::identity(2));
        assert_eq!(s.t(), 1);

        let ball1 = FeasibleBall::new(1.0, 1).unwrap();
        let c = NewtonConfig::new(NewtonCase::QuadBound, 0.9, 1.0, 0.25).unwrap();
        let s = NewtonState::init(&c, dvector![0.0], &ball1).unwrap();
        assert_eq!(s.p().as_matrix()[(0, 0)], 0.25);
    }

    #[test]
    fn init_rejects_infeasible_start() {
        let ball = FeasibleBall::new(1.0, 2).unwrap();
        let c = NewtonConfig::new(NewtonCase::ExpConcave, 0.9, 0.1, 1.0).unwrap();
        assert!(matches!(
            NewtonState::init(&c, dvector![1.5, 0.0], &ball),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn full_newton_hand_example() {
        let ball = FeasibleBall::new(2.0, 1).unwrap();
        let c = NewtonConfig::new(NewtonCase::QuadBound, 0.5, 1.0, 1.0).unwrap();
        let s = NewtonState::init(&c, dvector![0.0], &ball).unwrap();
        let f = LossFunction::tracking_quadratic(dvector![1.0], &ball).unwrap();
        let x = s.theta().clone();
        let next = s.step(&f.gradient(&x).unwrap(), Some(&f.hessian(&x).unwrap()), &c, &ball).unwrap();
        assert!((next.p().as_matrix()[(0, 0)] - 1.5).abs() < 1e-15);
        assert!((next.theta()[0] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_gradient_still_discounts_curvature() {
        let ball = FeasibleBall::new(1.0, 1).unwrap();
        let c = NewtonConfig::new(NewtonCase::ExpConcave, 0.5, 0.1, 1.0).unwrap();
        let s = NewtonState::init(&c, dvector![0.3], &ball).unwrap();
        let next = s.step(&dvector![0.0], None, &c, &ball).unwrap();
        assert_eq!(next.theta(), &dvector![0.3]);
        assert!((next.p().as_matrix()[(0, 0)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn full_newton_requires_hessian() {
        let ball = FeasibleBall::new(1.0, 1).unwrap();
        let c = NewtonConfig::new(NewtonCase::QuadBound, 0.5, 1.0, 1.0).unwrap();
        let s = NewtonState::init(&c, dvector![0.0], &ball).unwrap();
        assert_eq!(s.step(&dvector![1.0], None, &c, &ball), Err(Error::MissingHessian));
    }

    #[test]
    fn eta_bounds_per_case() {
        let ball = FeasibleBall::new(1.0, 2).unwrap();
        let f = LossFunction::tracking_quadratic(dvector![0.0, 0.0], &ball).unwrap();
        let profile = f.profile();
        // G = 2, D = 1, α = 1/4 ⇒ η ≤ ½·min{1/8, 1/4} = 1/16.
        assert!((NewtonCase::ExpConcave.max_eta(profile, 1.0) - 1.0 / 16.0).abs() < 1e-15);
        let ok = NewtonConfig::new(NewtonCase::ExpConcave, 0.9, 1.0 / 16.0, 1.0).unwrap();
        assert!(ok.validate_for(profile, &ball).is_ok());
        let too_big = NewtonConfig::new(NewtonCase::ExpConcave, 0.9, 0.1, 1.0).unwrap();
        assert!(too_big.validate_for(profile, &ball).is_err());
        let full = NewtonConfig::new(NewtonCase::QuadBound, 0.9, 1.5, 1.0).unwrap();
        assert!(full.validate_for(profile, &ball).is_err());
        assert_eq!(NewtonCase::ExpConcave.variant(), NewtonVariant::QuasiNewton);
    }

    #[test]
    fn epsilon_presets() {
        let ball = FeasibleBall::new(1.0, 1).unwrap();
        let f = LossFunction::tracking_quadratic(dvector![0.0], &ball).unwrap();
        let rho = f.profile().rho(1.0);
        assert_eq!(EpsilonPreset::Unit.value(f.profile(), 1.0, 4), 1.0);
        assert!((EpsilonPreset::InverseRhoSqDSq.value(f.profile(), 1.0, 4) - 1.0 / (rho * rho)).abs() < 1e-9);
        assert!((EpsilonPreset::InverseRhoSqDSqN.value(f.profile(), 1.0, 4) - 1.0 / (4.0 * rho * rho)).abs() < 1e-9);
    }
}
