//! Dynamic-regret online optimization with forgetting factors.
//!
//! The crate provides a family of discounted online learners together with
//! the machinery needed to measure how well they track a drifting optimum:
//!
//! - [`newton`]: the discounted online Newton step, with quasi-Newton
//!   (gradient outer products) and full-Newton (Hessian) curvature updates and
//!   a projection in the metric induced by the curvature matrix.
//! - [`rls`]: discounted recursive least squares, both for the tracking
//!   quadratic `½‖θ − y‖²` and for general least squares `½‖y − Aθ‖²`.
//! - [`gd`]: projected gradient descent with the two discounted step-size
//!   rules, and the discount schedules that tune `γ` from the horizon or a
//!   path-length budget.
//! - [`meta`]: exponentially weighted experts over a geometric grid of
//!   discount factors.
//! - [`regret`]: comparator sequences, regret ledgers and growth-rate fits.
//! - [`scenarios`]: seeded generators of drifting loss streams, including a
//!   random-sign adversary that forces a known expected dynamic regret.
//! - [`harness`]: the config-driven experiment runner behind the `dynregret`
//!   binary.
//!
//! Every "log T" that appears in a schedule or grid is the natural
//! logarithm; `log₂` is used only for the expert-grid size.

pub mod error;
pub mod gd;
pub mod geometry;
pub mod harness;
pub mod learner;
pub mod losses;
pub mod meta;
pub mod newton;
pub mod regret;
pub mod rls;
pub mod rng;
pub mod scenarios;

pub use error::{Error, Result};
pub use gd::{stepsize, DiscountedGd, GdConfig, GdRule, GdState, Schedule};
pub use geometry::{FeasibleBall, SpdMatrix, Vector};
pub use learner::{run_learner, LearnerTrace, OnlineLearner};
pub use losses::{check_class_inequalities, ClassReport, ConvexityProfile, LossFunction, LossKind};
pub use meta::{check_expert_regret_bound, ExpertGrid, ExpertWeights, MetaLearner};
pub use newton::{DiscountedNewton, EpsilonPreset, NewtonCase, NewtonConfig, NewtonState, NewtonVariant};
pub use regret::{regret_of, ComparatorKind, ComparatorTrace, GrowthFit, RegretReport};
pub use rls::{DiscountedRls, RlsState};
pub use scenarios::{generate, LossFamily, Scenario, ScenarioKind, ScenarioSpec};
