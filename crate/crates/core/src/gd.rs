//! Projected online gradient descent with discounted step sizes.
//!
//! Two step-size rules are provided:
//!
//! - smooth and strongly convex: `η_t = (1−γ) / (ℓ(γ−γᵗ) + u(1−γ))`
//! - strongly convex: `η_t = (1−γ) / (ℓ(1−γᵗ))`
//!
//! With `ℓ = u = 1` both reduce to the discounted least-squares step
//! `(1−γ)/(1−γᵗ)`. At `γ = 1` the limits `1/(ℓ(t−1)+u)` and `1/(ℓt)` are used.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{FeasibleBall, Vector};
use crate::learner::OnlineLearner;
use crate::losses::LossFunction;

/// `γᵗ` below this is treated as zero when forming step sizes.
pub(crate) const NEGLIGIBLE_POWER: f64 = 1e-15;
const POWER_FLOOR: f64 = 1e-300;

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma > 0.0 && gamma <= 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("discount factor must lie in (0, 1], got {gamma}")))
    }
}

/// Running `γᵗ`, computed by repeated multiplication and floored so that it
/// never underflows to zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct DiscountPower {
    gamma: f64,
    pow: f64,
}

impl DiscountPower {
    /// State for round `t = 1`, i.e. `γ¹`.
    pub(crate) fn new(gamma: f64) -> Self {
        DiscountPower { gamma, pow: gamma }
    }

    pub(crate) fn at(gamma: f64, t: u64) -> Self {
        let pow = if t > i32::MAX as u64 { 0.0 } else { gamma.powi(t as i32) };
        DiscountPower { gamma, pow: pow.max(POWER_FLOOR) }
    }

    pub(crate) fn value(&self) -> f64 {
        self.pow
    }

    pub(crate) fn is_negligible(&self) -> bool {
        self.gamma < 1.0 && self.pow < NEGLIGIBLE_POWER
    }

    pub(crate) fn advance(&mut self) {
        self.pow = (self.pow * self.gamma).max(POWER_FLOOR);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GdRule {
    SmoothStronglyConvex,
    StronglyConvex,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GdConfig {
    rule: GdRule,
    gamma: f64,
    ell: f64,
    u: f64,
}

impl GdConfig {
    /// Smooth strongly convex rule; requires `0 < ℓ ≤ u`.
    pub fn smooth(gamma: f64, ell: f64, u: f64) -> Result<Self> {
        check_gamma(gamma)?;
        if !(ell.is_finite() && ell > 0.0 && u.is_finite() && ell <= u) {
            return Err(invalid(format!("smooth rule needs 0 < ℓ ≤ u, got ℓ={ell}, u={u}")));
        }
        Ok(GdConfig { rule: GdRule::SmoothStronglyConvex, gamma, ell, u })
    }

    /// Strongly convex rule; `u` is not used.
    pub fn strongly_convex(gamma: f64, ell: f64) -> Result<Self> {
        check_gamma(gamma)?;
        if !(ell.is_finite() && ell > 0.0) {
            return Err(invalid(format!("strong convexity must be > 0, got {ell}")));
        }
        Ok(GdConfig { rule: GdRule::StronglyConvex, gamma, ell, u: f64::NAN })
    }

    pub fn rule(&self) -> GdRule {
        self.rule
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(GdConfig { gamma, ..*self })
    }

    fn step_size_with(&self, t: u64, power: &DiscountPower) -> f64 {
        let (gamma, ell) = (self.gamma, self.ell);
        let tf = t as f64;
        match self.rule {
            GdRule::SmoothStronglyConvex => {
                if gamma == 1.0 {
                    1.0 / (ell * (tf - 1.0) + self.u)
                } else if power.is_negligible() {
                    (1.0 - gamma) / (ell * gamma + self.u * (1.0 - gamma))
                } else {
                    (1.0 - gamma) / (ell * (gamma - power.value()) + self.u * (1.0 - gamma))
                }
            }
            GdRule::StronglyConvex => {
                if gamma == 1.0 {
                    1.0 / (ell * tf)
                } else if power.is_negligible() {
                    (1.0 - gamma) / ell
                } else {
                    (1.0 - gamma) / (ell * (1.0 - power.value()))
                }
            }
        }
    }
}

/// Step size `η_t` of the configured rule at round `t ≥ 1`.
pub fn stepsize(config: &GdConfig, t: u64) -> f64 {
    assert!(t >= 1, "rounds are numbered from 1");
    config.step_size_with(t, &DiscountPower::at(config.gamma, t))
}

#[derive(Clone, Debug, PartialEq)]
pub struct GdState {
    theta: Vector,
    t: u64,
    power: DiscountPower,
    last_eta: f64,
}

impl GdState {
    pub fn new(theta1: Vector, config: &GdConfig, ball: &FeasibleBall) -> Result<Self> {
        ball.require_feasible(&theta1, "initial iterate")?;
        Ok(GdState { theta: theta1, t: 1, power: DiscountPower::new(config.gamma), last_eta: f64::NAN })
    }

    pub fn theta(&self) -> &Vector {
        &self.theta
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn gamma_pow_t(&self) -> f64 {
        self.power.value()
    }

    pub fn last_step_size(&self) -> f64 {
        self.last_eta
    }

    /// `θ_{t+1} = Π_S(θ_t − η_t ∇f_t(θ_t))`.
    pub fn step(&self, grad: &Vector, config: &GdConfig, ball: &FeasibleBall) -> Result<GdState> {
        ball.check_point(grad, "gradient")?;
        let eta = config.step_size_with(self.t, &self.power);
        let theta = ball.project_euclidean(&(&self.theta - grad * eta))?;
        let mut power = self.power;
        power.advance();
        Ok(GdState { theta, t: self.t + 1, power, last_eta: eta })
    }
}

/// How the discount factor is chosen from the horizon.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Schedule {
    /// `γ = 1 − T^{−β}`.
    BetaPower { beta: f64 },
    /// `γ = 1 − ½·√(max{V, ln²T/T} / (2DT))` for a path-length budget `V`.
    PathTuned { budget: f64 },
    Fixed { gamma: f64 },
}

impl Schedule {
    pub fn make_gamma(&self, horizon: u64, radius: f64) -> Result<f64> {
        if horizon < 2 {
            return Err(invalid(format!("horizon must be at least 2, got {horizon}")));
        }
        let t = horizon as f64;
        match *self {
            Schedule::BetaPower { beta } => {
                if !(beta > 0.0 && beta < 1.0) {
                    return Err(invalid(format!("β must lie in (0, 1), got {beta}")));
                }
                Ok(1.0 - t.powf(-beta))
            }
            Schedule::PathTuned { budget } => {
                if !(budget >= 0.0 && budget <= 2.0 * radius * t) {
                    return Err(invalid(format!("path budget {budget} outside [0, 2DT] = [0, {}]", 2.0 * radius * t)));
                }
                Ok(1.0 - 0.5 * (path_term(budget, t) / (2.0 * radius * t)).sqrt())
            }
            Schedule::Fixed { gamma } => {
                check_gamma(gamma)?;
                Ok(gamma)
            }
        }
    }
}

pub(crate) fn path_term(budget: f64, t: f64) -> f64 {
    budget.max(t.ln().powi(2) / t)
}

/// Projected gradient descent as an [`OnlineLearner`].
#[derive(Clone, Debug)]
pub struct DiscountedGd {
    config: GdConfig,
    ball: FeasibleBall,
    state: GdState,
}

impl DiscountedGd {
    pub fn new(config: GdConfig, ball: FeasibleBall, theta1: Vector) -> Result<Self> {
        let state = GdState::new(theta1, &config, &ball)?;
        Ok(DiscountedGd { config, ball, state })
    }

    pub fn config(&self) -> &GdConfig {
        &self.config
    }

    pub fn state(&self) -> &GdState {
        &self.state
    }
}

impl OnlineLearner for DiscountedGd {
    fn prediction(&self) -> &Vector {
        &self.state.theta
    }

    fn observe(&mut self, loss: &LossFunction) -> Result<()> {
        let grad = loss.gradient(&self.state.theta)?;
        self.state = self.state.step(&grad, &self.config, &self.ball)?;
        Ok(())
    }

    fn last_step_size(&self) -> f64 {
        self.state.last_eta
    }

    fn discount(&self) -> f64 {
        self.config.gamma
    }
}
