//! Seeded generators of drifting loss streams.
//!
//! A scenario draws a latent path `x_1 … x_T` inside the ball and turns each
//! point into a loss whose minimizer is that point:
//!
//! - tracking quadratic: `f_t(θ) = ½‖θ − y_t‖²` with `y_t = x_t`;
//! - general least squares: `f_t(θ) = ½‖y_t − A_tθ‖²` with `y_t = A_t x_t`
//!   and a random design whose `A_tᵀA_t` has spectrum in `[ℓ, u]`.
//!
//! Optional Gaussian observation noise is added to `y_t` (then clipped to the
//! ball), which leaves the latent path untouched. The random-sign adversary
//! instead emits `(θ − ε_t)²` with `ε_t = ±2σ` and designates `z_t = ε_t/2`
//! as the comparator.
//!
//! Random streams: stream 0 drives the latent path (or the adversary's
//! signs), stream 1 the designs and stream 2 the noise, all derived from
//! `seed` as described in [`crate::rng`].

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{FeasibleBall, Vector};
use crate::losses::{ConvexityProfile, LossFunction};
use crate::rng::{gaussian_vector, stream, uniform_in_ball, unit_direction, StreamRng};

/// A path-length budget, either absolute or as a power of the horizon.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Budget {
    Absolute(f64),
    /// `scale · T^exponent`.
    Power {
        exponent: f64,
        #[serde(default = "one")]
        scale: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl Budget {
    pub fn resolve(&self, horizon: u64) -> f64 {
        match *self {
            Budget::Absolute(v) => v,
            Budget::Power { exponent, scale } => scale * (horizon as f64).powf(exponent),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioKind {
    /// The latent point never moves.
    Stationary,
    /// Steps of length `V/T` in uniformly random directions.
    RandomWalk { budget: Budget },
    /// `segments` constant pieces separated by jumps of length `V/(segments−1)`.
    PiecewiseConstant { segments: u64, budget: Budget },
    /// Random-sign scalar adversary with `σ = T^{−2(1−γ₀)/(4−γ₀)}`.
    LowerBoundAdversary { gamma0: f64 },
}

impl ScenarioKind {
    pub fn label(&self) -> &'static str {
        match self {
            ScenarioKind::Stationary => "stationary",
            ScenarioKind::RandomWalk { .. } => "random_walk",
            ScenarioKind::PiecewiseConstant { .. } => "piecewise_constant",
            ScenarioKind::LowerBoundAdversary { .. } => "lower_bound_adversary",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum LossFamily {
    #[default]
    TrackingQuadratic,
    /// `m × n` designs with `ℓI ⪯ AᵀA ⪯ uI`.
    GeneralLeastSquares { m: usize, ell: f64, u: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub horizon: u64,
    pub dim: usize,
    #[serde(default = "one")]
    pub radius: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub loss_family: LossFamily,
    /// Standard deviation of Gaussian noise added to each observation.
    #[serde(default)]
    pub noise: f64,
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind, horizon: u64, dim: usize, radius: f64, seed: u64) -> Self {
        ScenarioSpec { kind, horizon, dim, radius, seed, loss_family: LossFamily::TrackingQuadratic, noise: 0.0 }
    }

    pub fn with_loss_family(mut self, family: LossFamily) -> Self {
        self.loss_family = family;
        self
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_horizon(mut self, horizon: u64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn ball(&self) -> Result<FeasibleBall> {
        FeasibleBall::new(self.radius, self.dim)
    }

    /// The path-length budget `V`, if the scenario declares one.
    pub fn declared_budget(&self) -> Option<f64> {
        match self.kind {
            ScenarioKind::Stationary => Some(0.0),
            ScenarioKind::RandomWalk { budget } | ScenarioKind::PiecewiseConstant { budget, .. } => {
                Some(budget.resolve(self.horizon))
            }
            ScenarioKind::LowerBoundAdversary { gamma0 } => {
                Some(2.0 * adversary_sigma(self.horizon, gamma0) * self.horizon as f64)
            }
        }
    }

    /// Radius of the ball holding the latent path.
    fn latent_radius(&self) -> f64 {
        match self.loss_family {
            LossFamily::TrackingQuadratic => self.radius,
            LossFamily::GeneralLeastSquares { u, .. } => self.radius / u.sqrt().max(1.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(invalid("horizon must be at least 1"));
        }
        self.ball()?;
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(invalid(format!("noise must be finite and ≥ 0, got {}", self.noise)));
        }
        if let LossFamily::GeneralLeastSquares { m, ell, u } = self.loss_family {
            if m < self.dim {
                return Err(invalid(format!("design needs m ≥ n for full rank, got m = {m}, n = {}", self.dim)));
            }
            if !(ell.is_finite() && u.is_finite() && ell > 0.0 && ell <= u) {
                return Err(invalid(format!("need 0 < ℓ ≤ u, got ℓ = {ell}, u = {u}")));
            }
        }
        match self.kind {
            ScenarioKind::Stationary => {}
            ScenarioKind::RandomWalk { .. } => self.check_budget()?,
            ScenarioKind::PiecewiseConstant { segments, .. } => {
                self.check_budget()?;
                if segments < 1 || segments > self.horizon {
                    return Err(invalid(format!("segments must lie in [1, T], got {segments}")));
                }
            }
            ScenarioKind::LowerBoundAdversary { gamma0 } => {
                if !(gamma0 > 0.0 && gamma0 < 1.0) {
                    return Err(invalid(format!("γ₀ must lie in (0, 1), got {gamma0}")));
                }
                if self.dim != 1 {
                    return Err(invalid("the adversary is one-dimensional"));
                }
                if self.loss_family != LossFamily::TrackingQuadratic {
                    return Err(invalid("the adversary emits its own scalar losses; use the default loss family"));
                }
                let sigma = adversary_sigma(self.horizon, gamma0);
                if 2.0 * sigma > self.radius {
                    return Err(invalid(format!("2σ = {} exceeds the radius {}", 2.0 * sigma, self.radius)));
                }
            }
        }
        Ok(())
    }

    fn check_budget(&self) -> Result<()> {
        let v = self.declared_budget().unwrap_or(0.0);
        if !(v.is_finite() && v >= 0.0) {
            return Err(invalid(format!("path budget must be finite and ≥ 0, got {v}")));
        }
        Ok(())
    }

    /// Convexity constants shared by every loss of the scenario.
    pub fn profile(&self) -> Result<ConvexityProfile> {
        self.validate()?;
        let ball = self.ball()?;
        let f = match self.loss_family {
            _ if matches!(self.kind, ScenarioKind::LowerBoundAdversary { .. }) => {
                let sigma = self.sigma().unwrap_or(0.0);
                LossFunction::scalar_adversarial(2.0 * sigma, &ball)?
            }
            LossFamily::TrackingQuadratic => LossFunction::tracking_quadratic(Vector::zeros(self.dim), &ball)?,
            LossFamily::GeneralLeastSquares { m, ell, u } => {
                let mut design = DMatrix::zeros(m, self.dim);
                for i in 0..self.dim {
                    design[(i, i)] = ell.sqrt();
                }
                LossFunction::general_least_squares(design, Vector::zeros(m), ell, u, &ball)?
            }
        };
        Ok(*f.profile())
    }

    pub fn sigma(&self) -> Option<f64> {
        match self.kind {
            ScenarioKind::LowerBoundAdversary { gamma0 } => Some(adversary_sigma(self.horizon, gamma0)),
            _ => None,
        }
    }
}

/// `σ = T^{−2(1−γ₀)/(4−γ₀)}`.
pub fn adversary_sigma(horizon: u64, gamma0: f64) -> f64 {
    (horizon as f64).powf(-2.0 * (1.0 - gamma0) / (4.0 - gamma0))
}

/// Expected dynamic regret `3σ²T` of any learner whose play does not depend
/// on the current sign.
pub fn expected_adversary_regret(horizon: u64, gamma0: f64) -> f64 {
    let sigma = adversary_sigma(horizon, gamma0);
    3.0 * sigma * sigma * horizon as f64
}

/// A generated stream.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub spec: ScenarioSpec,
    pub losses: Vec<LossFunction>,
    /// Latent minimizers `x_t` (for the adversary, `ε_t`).
    pub targets: Vec<Vector>,
    /// Comparator supplied by the scenario itself (the adversary's `ε_t/2`).
    pub designated: Option<Vec<Vector>>,
    pub sigma: Option<f64>,
    pub declared_budget: Option<f64>,
    /// `Σ‖x_t − x_{t−1}‖` of the latent path.
    pub realized_path: f64,
}

pub fn path_length(points: &[Vector]) -> f64 {
    points.windows(2).map(|w| (&w[1] - &w[0]).norm()).sum()
}

pub fn generate(spec: &ScenarioSpec) -> Result<Scenario> {
    spec.validate()?;
    let ball = spec.ball()?;
    let t = spec.horizon as usize;

    if let ScenarioKind::LowerBoundAdversary { gamma0 } = spec.kind {
        let sigma = adversary_sigma(spec.horizon, gamma0);
        let mut rng = stream(spec.seed, 0);
        let eps: Vec<f64> = (0..t).map(|_| if rng.random::<bool>() { 2.0 * sigma } else { -2.0 * sigma }).collect();
        let losses = eps.iter().map(|&e| LossFunction::scalar_adversarial(e, &ball)).collect::<Result<Vec<_>>>()?;
        let targets: Vec<Vector> = eps.iter().map(|&e| Vector::from_element(1, e)).collect();
        let designated: Vec<Vector> = eps.iter().map(|&e| Vector::from_element(1, 0.5 * e)).collect();
        return Ok(Scenario {
            spec: spec.clone(),
            realized_path: path_length(&targets),
            losses,
            targets,
            designated: Some(designated),
            sigma: Some(sigma),
            declared_budget: spec.declared_budget(),
        });
    }

    let latent = latent_path(spec)?;
    let mut design_rng = stream(spec.seed, 1);
    let mut noise_rng = stream(spec.seed, 2);
    let mut losses = Vec::with_capacity(t);
    for x in &latent {
        let f = match spec.loss_family {
            LossFamily::TrackingQuadratic => {
                let y = noisy(x.clone(), spec.noise, &mut noise_rng, &ball)?;
                LossFunction::tracking_quadratic(y, &ball)?
            }
            LossFamily::GeneralLeastSquares { m, ell, u } => {
                let a = random_design(&mut design_rng, m, spec.dim, ell, u);
                let clean = &a * x;
                let y = noisy(clean, spec.noise, &mut noise_rng, &FeasibleBall::new(spec.radius, m)?)?;
                LossFunction::general_least_squares(a, y, ell, u, &ball)?
            }
        };
        losses.push(f);
    }
    Ok(Scenario {
        spec: spec.clone(),
        realized_path: path_length(&latent),
        losses,
        targets: latent,
        designated: None,
        sigma: None,
        declared_budget: spec.declared_budget(),
    })
}

fn noisy(y: Vector, noise: f64, rng: &mut StreamRng, ball: &FeasibleBall) -> Result<Vector> {
    if noise == 0.0 {
        return Ok(y);
    }
    let n = y.len();
    ball.project_euclidean(&(y + gaussian_vector(rng, n) * noise))
}

fn latent_path(spec: &ScenarioSpec) -> Result<Vec<Vector>> {
    let t = spec.horizon as usize;
    let n = spec.dim;
    let r = spec.latent_radius();
    let mut rng = stream(spec.seed, 0);
    let start = uniform_in_ball(&mut rng, n, 0.5 * r);
    let mut path = Vec::with_capacity(t);
    path.push(start);
    let budget = spec.declared_budget().unwrap_or(0.0);
    let mut used = 0.0;

    let move_by = |from: &Vector, length: f64, rng: &mut StreamRng, used: &mut f64| -> Result<Vector> {
        let length = length.min(budget - *used).max(0.0);
        if length == 0.0 {
            return Ok(from.clone());
        }
        let mut candidate = None;
        for _ in 0..64 {
            let next = from + unit_direction(rng, n) * length;
            if next.norm() <= r {
                candidate = Some(next);
                break;
            }
        }
        let next = match candidate {
            Some(c) => c,
            None => {
                let proposal = from + unit_direction(rng, n) * length;
                clip_to_radius(&proposal, r)
            }
        };
        *used += (&next - from).norm();
        Ok(next)
    };

    match spec.kind {
        ScenarioKind::Stationary | ScenarioKind::LowerBoundAdversary { .. } => {
            for _ in 1..t {
                path.push(path[0].clone());
            }
        }
        ScenarioKind::RandomWalk { .. } => {
            let step = budget / t as f64;
            for i in 1..t {
                let next = move_by(&path[i - 1], step, &mut rng, &mut used)?;
                path.push(next);
            }
        }
        ScenarioKind::PiecewiseConstant { segments, .. } => {
            let k = segments as usize;
            let jump = if k > 1 { budget / (k - 1) as f64 } else { 0.0 };
            for i in 1..t {
                // Segment of round i (0-based) under an equal split of T rounds.
                let seg = i * k / t;
                let prev_seg = (i - 1) * k / t;
                let next = if seg != prev_seg {
                    move_by(&path[i - 1], jump, &mut rng, &mut used)?
                } else {
                    path[i - 1].clone()
                };
                path.push(next);
            }
        }
    }
    Ok(path)
}

fn clip_to_radius(y: &Vector, r: f64) -> Vector {
    let norm = y.norm();
    if norm <= r {
        y.clone()
    } else {
        y * (r / norm)
    }
}

/// `A = U·diag(s)·Vᵀ` with orthonormal `U` (m×n), orthogonal `V` and singular
/// values uniform in `[√ℓ, √u]`.
fn random_design(rng: &mut StreamRng, m: usize, n: usize, ell: f64, u: f64) -> DMatrix<f64> {
    let gauss = |rng: &mut StreamRng, rows: usize, cols: usize| {
        let data = gaussian_vector(rng, rows * cols);
        DMatrix::from_column_slice(rows, cols, data.as_slice())
    };
    let q_left = gauss(rng, m, n).qr().q();
    let q_right = gauss(rng, n, n).qr().q();
    let (lo, hi) = (ell.sqrt(), u.sqrt());
    let s = DMatrix::from_diagonal(&Vector::from_iterator(n, (0..n).map(|_| lo + (hi - lo) * rng.random::<f64>())));
    q_left * s * q_right.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::losses::LossKind;

    #[test]
    fn stationary_has_no_motion() {
        let spec = ScenarioSpec::new(ScenarioKind::Stationary, 50, 3, 1.0, 9);
        let s = generate(&spec).unwrap();
        assert_eq!(s.realized_path, 0.0);
        assert!(s.losses.iter().all(|f| f.kind() == s.losses[0].kind()));
    }

    #[test]
    fn adversary_sigma_example() {
        let sigma = adversary_sigma(10_000, 0.5);
        assert!((sigma - 0.071969).abs() < 1e-6);
        let spec = ScenarioSpec::new(ScenarioKind::LowerBoundAdversary { gamma0: 0.5 }, 10_000, 1, 1.0, 3);
        let s = generate(&spec).unwrap();
        for f in &s.losses {
            match f.kind() {
                LossKind::ScalarAdversarial { eps } => assert!((eps.abs() - 0.143938).abs() < 1e-6),
                other => panic!("unexpected loss {other:?}"),
            }
        }
        let z = s.designated.unwrap();
        assert!(path_length(&z) <= 2.0 * sigma * 10_000.0);
        assert!((expected_adversary_regret(10_000, 0.5) - 155.4).abs() < 0.05);
    }

    #[test]
    fn expected_adversary_regret_grows_with_horizon() {
        let mut prev = 0.0;
        for t in [10u64, 100, 1000, 10_000, 100_000] {
            let r = expected_adversary_regret(t, 0.5);
            assert!(r > prev);
            prev = r;
        }
    }

    #[test]
    fn random_walk_saturates_budget() {
        let spec = ScenarioSpec::new(ScenarioKind::RandomWalk { budget: Budget::Absolute(10.0) }, 1000, 2, 1.0, 1);
        let s = generate(&spec).unwrap();
        assert!(s.realized_path <= 10.0, "{}", s.realized_path);
        assert!(s.realized_path >= 9.9, "{}", s.realized_path);
        assert!(s.targets.iter().all(|x| x.norm() <= 1.0 + 1e-12));
    }

    #[test]
    fn piecewise_jumps() {
        let spec = ScenarioSpec::new(
            ScenarioKind::PiecewiseConstant { segments: 5, budget: Budget::Absolute(2.0) },
            100,
            2,
            1.0,
            4,
        );
        let s = generate(&spec).unwrap();
        let jumps = s.targets.windows(2).filter(|w| w[0] != w[1]).count();
        assert_eq!(jumps, 4);
        assert!(s.realized_path <= 2.0 + 1e-12);
    }

    #[test]
    fn least_squares_stream_respects_spectrum() {
        let spec = ScenarioSpec::new(ScenarioKind::RandomWalk { budget: Budget::Power { exponent: 0.5, scale: 1.0 } }, 100, 4, 1.0, 2)
            .with_loss_family(LossFamily::GeneralLeastSquares { m: 6, ell: 1.0, u: 2.0 });
        let s = generate(&spec).unwrap();
        let ball = spec.ball().unwrap();
        for (f, x) in s.losses.iter().zip(&s.targets) {
            let z = f.minimizer(&ball).unwrap();
            assert!((z - x).norm() < 1e-9);
        }
    }

    #[test]
    fn same_seed_same_stream() {
        let spec = ScenarioSpec::new(ScenarioKind::RandomWalk { budget: Budget::Absolute(3.0) }, 200, 3, 1.0, 11).with_noise(0.1);
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a.losses, b.losses);
        let c = generate(&spec.clone().with_seed(12)).unwrap();
        assert_ne!(a.losses, c.losses);
    }

    #[test]
    fn invalid_specs_rejected() {
        let adv = ScenarioSpec::new(ScenarioKind::LowerBoundAdversary { gamma0: 0.5 }, 100, 2, 1.0, 0);
        assert!(generate(&adv).is_err());
        let big_sigma = ScenarioSpec::new(ScenarioKind::LowerBoundAdversary { gamma0: 0.01 }, 2, 1, 1.0, 0);
        assert!(generate(&big_sigma).is_err());
        let neg = ScenarioSpec::new(ScenarioKind::RandomWalk { budget: Budget::Absolute(-1.0) }, 10, 1, 1.0, 0);
        assert!(generate(&neg).is_err());
    }
}
