//! Per-round loss families with declared convexity constants.
//!
//! Three quadratic families are provided:
//!
//! | kind | `f(θ)` | Hessian | gradient bound `G` on the ball |
//! |------|--------|---------|------------------------------|
//! | tracking quadratic | `½‖θ − y‖²` | `I` | `2D` |
//! | general least squares | `½‖y − Aθ‖²` | `AᵀA` | `D·max{√u(u/ℓ+1), u+√u}` |
//! | scalar adversarial | `(θ − ε)²` | `2` | `2(D + |ε|)` |
//!
//! Every family is written as `½θᵀHθ − bᵀθ + c`, which is what the comparator
//! solvers in [`crate::regret`] consume.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::geometry::{ensure_dim, FeasibleBall, SpdMatrix, Vector};
use crate::rng;

/// Curvature constants of a loss: exp-concavity `alpha`, strong convexity
/// `ell`, smoothness `u` and gradient bound `g`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvexityProfile {
    alpha: f64,
    ell: f64,
    u: f64,
    g: f64,
}

impl ConvexityProfile {
    /// Builds a profile; when `alpha` is `None` it is filled with `ℓ/G²`.
    pub fn new(alpha: Option<f64>, ell: f64, u: f64, g: f64) -> Result<Self> {
        let finite_nonneg = |x: f64| x.is_finite() && x >= 0.0;
        if !finite_nonneg(ell) {
            return Err(invalid(format!("strong convexity must be finite and ≥ 0, got {ell}")));
        }
        if !(u.is_finite() && u > 0.0) {
            return Err(invalid(format!("smoothness must be finite and > 0, got {u}")));
        }
        if !(g.is_finite() && g > 0.0) {
            return Err(invalid(format!("gradient bound must be finite and > 0, got {g}")));
        }
        if ell > u {
            return Err(invalid(format!("strong convexity {ell} exceeds smoothness {u}")));
        }
        let alpha = alpha.unwrap_or(ell / (g * g));
        if !finite_nonneg(alpha) {
            return Err(invalid(format!("exp-concavity must be finite and ≥ 0, got {alpha}")));
        }
        Ok(ConvexityProfile { alpha, ell, u, g })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    /// `ρ = ½·min{1/(4GD), α}`, the curvature admissible in the
    /// exp-concave lower bound.
    pub fn rho(&self, radius: f64) -> f64 {
        0.5 * (1.0 / (4.0 * self.g * radius)).min(self.alpha)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LossKind {
    TrackingQuadratic { target: Vector },
    GeneralLeastSquares { design: DMatrix<f64>, target: Vector },
    ScalarAdversarial { eps: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct LossFunction {
    kind: LossKind,
    profile: ConvexityProfile,
}

impl LossFunction {
    /// `½‖θ − y‖²` with `y` in the ball.
    pub fn tracking_quadratic(target: Vector, ball: &FeasibleBall) -> Result<Self> {
        ball.require_feasible(&target, "target")?;
        let d = ball.radius();
        let profile = ConvexityProfile::new(None, 1.0, 1.0, 2.0 * d)?;
        Ok(LossFunction { kind: LossKind::TrackingQuadratic { target }, profile })
    }

    /// `½‖y − Aθ‖²` with `ℓI ⪯ AᵀA ⪯ uI` and `‖y‖ ≤ D`.
    pub fn general_least_squares(
        design: DMatrix<f64>,
        target: Vector,
        ell: f64,
        u: f64,
        ball: &FeasibleBall,
    ) -> Result<Self> {
        if design.ncols() != ball.dim() {
            return Err(Error::DimensionMismatch { expected: ball.dim(), found: design.ncols() });
        }
        ensure_dim(&target, design.nrows())?;
        if !design.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("design matrix"));
        }
        if !target.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("target"));
        }
        if target.norm() > ball.radius() * (1.0 + 1e-12) {
            return Err(Error::Infeasible { norm: target.norm(), radius: ball.radius() });
        }
        if !(ell > 0.0) {
            return Err(invalid("least-squares design needs ℓ > 0 (full column rank)"));
        }
        let gram = SpdMatrix::new(design.transpose() * &design)?;
        let eig = gram.eigenvalues();
        let (lo, hi) = (eig.min(), eig.max());
        if lo < ell * (1.0 - 1e-9) || hi > u * (1.0 + 1e-9) {
            return Err(invalid(format!(
                "AᵀA spectrum [{lo}, {hi}] is not inside the declared [{ell}, {u}]"
            )));
        }
        let d = ball.radius();
        let g = d * (u.sqrt() * (u / ell + 1.0)).max(u + u.sqrt());
        let profile = ConvexityProfile::new(None, ell, u, g)?;
        Ok(LossFunction { kind: LossKind::GeneralLeastSquares { design, target }, profile })
    }

    /// `(θ − ε)²` on a one-dimensional ball.
    pub fn scalar_adversarial(eps: f64, ball: &FeasibleBall) -> Result<Self> {
        if ball.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: ball.dim() });
        }
        if !eps.is_finite() {
            return Err(Error::NonFinite("adversary offset"));
        }
        let g = 2.0 * (ball.radius() + eps.abs());
        let profile = ConvexityProfile::new(None, 2.0, 2.0, g)?;
        Ok(LossFunction { kind: LossKind::ScalarAdversarial { eps }, profile })
    }

    /// Replaces the declared profile, keeping the loss itself.
    pub fn with_profile(mut self, profile: ConvexityProfile) -> Self {
        self.profile = profile;
        self
    }

    pub fn kind(&self) -> &LossKind {
        &self.kind
    }

    pub fn profile(&self) -> &ConvexityProfile {
        &self.profile
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            LossKind::TrackingQuadratic { target } => target.len(),
            LossKind::GeneralLeastSquares { design, .. } => design.ncols(),
            LossKind::ScalarAdversarial { .. } => 1,
        }
    }

    pub fn value(&self, x: &Vector) -> Result<f64> {
        ensure_dim(x, self.dim())?;
        Ok(match &self.kind {
            LossKind::TrackingQuadratic { target } => 0.5 * (x - target).norm_squared(),
            LossKind::GeneralLeastSquares { design, target } => 0.5 * (target - design * x).norm_squared(),
            LossKind::ScalarAdversarial { eps } => (x[0] - eps).powi(2),
        })
    }

    pub fn gradient(&self, x: &Vector) -> Result<Vector> {
        ensure_dim(x, self.dim())?;
        Ok(match &self.kind {
            LossKind::TrackingQuadratic { target } => x - target,
            LossKind::GeneralLeastSquares { design, target } => design.transpose() * (design * x - target),
            LossKind::ScalarAdversarial { eps } => Vector::from_element(1, 2.0 * (x[0] - eps)),
        })
    }

    pub fn hessian(&self, x: &Vector) -> Result<SpdMatrix> {
        ensure_dim(x, self.dim())?;
        Ok(self.curvature())
    }

    fn curvature(&self) -> SpdMatrix {
        match &self.kind {
            LossKind::TrackingQuadratic { target } => SpdMatrix::identity(target.len()),
            LossKind::GeneralLeastSquares { design, .. } => {
                SpdMatrix::symmetrized(design.transpose() * design)
            }
            LossKind::ScalarAdversarial { .. } => SpdMatrix::scaled_identity(1, 2.0),
        }
    }

    /// `(H, b, c)` with `f(θ) = ½θᵀHθ − bᵀθ + c`.
    pub fn quadratic_parts(&self) -> (SpdMatrix, Vector, f64) {
        match &self.kind {
            LossKind::TrackingQuadratic { target } => {
                (self.curvature(), target.clone(), 0.5 * target.norm_squared())
            }
            LossKind::GeneralLeastSquares { design, target } => {
                (self.curvature(), design.transpose() * target, 0.5 * target.norm_squared())
            }
            LossKind::ScalarAdversarial { eps } => {
                (self.curvature(), Vector::from_element(1, 2.0 * eps), eps * eps)
            }
        }
    }

    /// Minimizer over all of ℝⁿ.
    pub fn unconstrained_minimizer(&self) -> Result<Vector> {
        match &self.kind {
            LossKind::TrackingQuadratic { target } => Ok(target.clone()),
            LossKind::ScalarAdversarial { eps } => Ok(Vector::from_element(1, *eps)),
            LossKind::GeneralLeastSquares { .. } => {
                let (h, b, _) = self.quadratic_parts();
                h.solve(&b)
            }
        }
    }

    /// Minimizer over the feasible ball.
    pub fn minimizer(&self, ball: &FeasibleBall) -> Result<Vector> {
        ensure_dim(&Vector::zeros(ball.dim()), self.dim())?;
        let (h, b, _) = self.quadratic_parts();
        ball.minimize_quadratic(&h, &b)
    }
}

/// Largest violation found for each curvature inequality.
///
/// A positive entry means the inequality failed on some sampled pair by that
/// amount; inequalities that cannot be tested for the profile (e.g. strong
/// convexity with `ℓ = 0`) report `0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassReport {
    /// `f(y) ≥ f(x) + ∇f(x)ᵀ(y−x) + ρ/2·(∇f(x)ᵀ(x−y))²`.
    pub exp_bound: f64,
    /// `f(y) ≥ f(x) + ∇f(x)ᵀ(y−x) + ℓ/2·‖x−y‖²`.
    pub strong_convexity: f64,
    /// `f(y) ≥ f(x) + ∇f(x)ᵀ(y−x) + ½‖x−y‖²_{∇²f(x)}`.
    pub quad_bound: f64,
    /// `f(y) ≤ f(x) + ∇f(x)ᵀ(y−x) + u/2·‖x−y‖²`.
    pub smoothness: f64,
    /// Midpoint concavity of `exp(−αf)`.
    pub exp_concavity: f64,
    /// Largest `|lhs − rhs|` of the Hessian-weighted bound; zero for exact quadratics.
    pub quad_bound_residual: f64,
}

impl ClassReport {
    pub const TOLERANCE: f64 = 1e-9;

    pub fn certified(&self) -> bool {
        [self.exp_bound, self.strong_convexity, self.quad_bound, self.smoothness, self.exp_concavity]
            .iter()
            .all(|&v| v <= Self::TOLERANCE)
    }
}

/// Samples `samples` pairs uniformly from the ball and records the worst
/// violation of each curvature inequality implied by `profile`.
pub fn check_class_inequalities(
    f: &LossFunction,
    profile: &ConvexityProfile,
    ball: &FeasibleBall,
    samples: usize,
    seed: u64,
) -> Result<ClassReport> {
    if samples == 0 {
        return Err(invalid("need at least one sample"));
    }
    let mut rng = rng::stream(seed, 0);
    let rho = profile.rho(ball.radius());
    let mut report = ClassReport {
        exp_bound: f64::NEG_INFINITY,
        strong_convexity: f64::NEG_INFINITY,
        quad_bound: f64::NEG_INFINITY,
        smoothness: f64::NEG_INFINITY,
        exp_concavity: f64::NEG_INFINITY,
        quad_bound_residual: 0.0,
    };
    for _ in 0..samples {
        let x = rng::uniform_in_ball(&mut rng, ball.dim(), ball.radius());
        let y = match rng.random_range(0..4) {
            // Occasionally pair boundary points to probe the extremes of S.
            0 => rng::unit_direction(&mut rng, ball.dim()) * ball.radius(),
            _ => rng::uniform_in_ball(&mut rng, ball.dim(), ball.radius()),
        };
        let fx = f.value(&x)?;
        let fy = f.value(&y)?;
        let grad = f.gradient(&x)?;
        let h = f.hessian(&x)?;
        let diff = &y - &x;
        let linear = fx + grad.dot(&diff);
        let dist2 = diff.norm_squared();

        let exp_rhs = linear + 0.5 * rho * grad.dot(&diff).powi(2);
        report.exp_bound = report.exp_bound.max(exp_rhs - fy);

        let strong_rhs = linear + 0.5 * profile.ell() * dist2;
        report.strong_convexity = report.strong_convexity.max(strong_rhs - fy);

        let quad_rhs = linear + 0.5 * h.quad_form(&diff);
        report.quad_bound = report.quad_bound.max(quad_rhs - fy);
        report.quad_bound_residual = report.quad_bound_residual.max((quad_rhs - fy).abs());

        let smooth_rhs = linear + 0.5 * profile.u() * dist2;
        report.smoothness = report.smoothness.max(fy - smooth_rhs);

        let alpha = profile.alpha();
        let mid = (&x + &y) * 0.5;
        let g = |v: f64| (-alpha * v).exp();
        let gap = 0.5 * g(fx) + 0.5 * g(fy) - g(f.value(&mid)?);
        report.exp_concavity = report.exp_concavity.max(gap);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn ball(n: usize) -> FeasibleBall {
        FeasibleBall::new(1.0, n).unwrap()
    }

    #[test]
    fn tracking_quadratic_values() {
        let f = LossFunction::tracking_quadratic(dvector![1.0, 0.0], &ball(2)).unwrap();
        assert_eq!(f.value(&dvector![1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(f.value(&dvector![0.0, 0.0]).unwrap(), 0.5);
        assert_eq!(f.gradient(&dvector![1.0, 0.0]).unwrap(), dvector![0.0, 0.0]);
        assert_eq!(f.gradient(&dvector![0.0, 0.0]).unwrap(), dvector![-1.0, 0.0]);
        assert_eq!(f.hessian(&dvector![0.3, 0.1]).unwrap(), SpdMatrix::identity(2));
    }

    #[test]
    fn scalar_adversarial_values() {
        let f = LossFunction::scalar_adversarial(0.2, &ball(1)).unwrap();
        assert!((f.value(&dvector![0.5]).unwrap() - 0.09).abs() < 1e-15);
        assert_eq!(f.hessian(&dvector![0.0]).unwrap().as_matrix()[(0, 0)], 2.0);
    }

    #[test]
    fn least_squares_gradient_and_hessian() {
        let b = FeasibleBall::new(2.0, 2).unwrap();
        let f = LossFunction::general_least_squares(DMatrix::identity(2, 2), dvector![2.0, 0.0], 1.0, 1.0, &b)
            .unwrap();
        assert_eq!(f.gradient(&dvector![0.0, 0.0]).unwrap(), dvector![-2.0, 0.0]);

        let a = DMatrix::from_diagonal(&dvector![2.0, 1.0]);
        let f = LossFunction::general_least_squares(a, dvector![0.0, 0.0], 1.0, 4.0, &b).unwrap();
        assert_eq!(f.hessian(&dvector![0.0, 0.0]).unwrap(), SpdMatrix::from_diagonal(&[4.0, 1.0]).unwrap());
    }

    #[test]
    fn least_squares_rejects_spectrum_outside_declared_range() {
        let a = DMatrix::from_diagonal(&dvector![2.0, 1.0]);
        assert!(LossFunction::general_least_squares(a, dvector![0.0, 0.0], 1.0, 2.0, &ball(2)).is_err());
    }

    #[test]
    fn tracking_target_must_be_feasible() {
        assert!(matches!(
            LossFunction::tracking_quadratic(dvector![2.0, 0.0], &ball(2)),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let f = LossFunction::tracking_quadratic(dvector![1.0, 0.0], &ball(2)).unwrap();
        assert!(matches!(f.value(&dvector![1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn profile_fills_alpha_and_rejects_inconsistent_curvature() {
        let p = ConvexityProfile::new(None, 1.0, 2.0, 2.0).unwrap();
        assert_eq!(p.alpha(), 0.25);
        assert!(ConvexityProfile::new(None, 3.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn tracking_quadratic_certifies_all_classes() {
        let b = ball(2);
        let f = LossFunction::tracking_quadratic(dvector![0.4, -0.3], &b).unwrap();
        let report = check_class_inequalities(&f, f.profile(), &b, 2000, 11).unwrap();
        assert!(report.certified(), "{report:?}");
        assert!(report.quad_bound_residual <= 1e-12);
    }

    #[test]
    fn adversary_is_exp_concave_with_ratio_constant() {
        let b = ball(1);
        let sigma = 0.1;
        let f = LossFunction::scalar_adversarial(2.0 * sigma, &b).unwrap();
        assert!((f.profile().g() - (2.0 + 4.0 * sigma)).abs() < 1e-15);
        let report = check_class_inequalities(&f, f.profile(), &b, 2000, 5).unwrap();
        assert!(report.exp_concavity <= 1e-12, "{report:?}");
        assert!(report.certified());
    }

    #[test]
    fn overstated_strong_convexity_is_caught() {
        let b = ball(2);
        let f = LossFunction::tracking_quadratic(dvector![0.0, 0.0], &b).unwrap();
        let wrong = ConvexityProfile::new(None, 1.5, 2.0, 2.0).unwrap();
        let report = check_class_inequalities(&f, &wrong, &b, 500, 1).unwrap();
        assert!(report.strong_convexity > 1e-3);
        assert!(!report.certified());
    }
}
