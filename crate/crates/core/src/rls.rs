//! Discounted recursive least squares.
//!
//! The learner keeps `P_t = γP_{t−1} + A_tᵀA_t` and `Φ_t = γΦ_{t−1} + A_tᵀy_t`
//! (with `P_0 = 0`, `Φ_0 = 0`) and plays the weighted least-squares solution
//! `θ_{t+1} = P_t⁻¹Φ_t`. For the tracking quadratic (`A_t = I`) this collapses
//! to gradient descent with step `η_t = (1−γ)/(1−γᵗ)`, which is the form used
//! by [`RlsState::step_quadratic`].

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::gd::{check_gamma, DiscountPower};
use crate::geometry::{ensure_dim, ensure_finite, SpdMatrix, Vector};
use crate::learner::OnlineLearner;
use crate::losses::{LossFunction, LossKind};

/// The algebraically equivalent ways of writing the tracking-quadratic update.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadraticUpdateForm {
    /// `argmin_θ Σ γ^{i−1} f_{t+1−i}(θ)`, i.e. `P_t⁻¹Φ_t`.
    WeightedArgmin,
    /// `((γ−γᵗ)/(1−γᵗ))θ_t + ((1−γ)/(1−γᵗ))y_t`.
    ConvexCombination,
    /// `θ_t − P_t⁻¹∇f_t(θ_t)`.
    InverseCurvatureStep,
    /// `θ_t − η_t∇f_t(θ_t)`.
    GradientStep,
}

impl QuadraticUpdateForm {
    pub const ALL: [QuadraticUpdateForm; 4] = [
        QuadraticUpdateForm::WeightedArgmin,
        QuadraticUpdateForm::ConvexCombination,
        QuadraticUpdateForm::InverseCurvatureStep,
        QuadraticUpdateForm::GradientStep,
    ];
}

#[derive(Clone, Debug, PartialEq)]
pub struct RlsState {
    theta: Vector,
    p: DMatrix<f64>,
    p_inv: Option<DMatrix<f64>>,
    phi: Vector,
    gamma: f64,
    t: u64,
    power: DiscountPower,
}

impl RlsState {
    pub fn new(theta1: Vector, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        ensure_finite(&theta1, "initial iterate")?;
        let n = theta1.len();
        if n == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        Ok(RlsState {
            theta: theta1,
            p: DMatrix::zeros(n, n),
            p_inv: None,
            phi: Vector::zeros(n),
            gamma,
            t: 1,
            power: DiscountPower::new(gamma),
        })
    }

    pub fn theta(&self) -> &Vector {
        &self.theta
    }

    /// `P_{t−1}`: the discounted curvature accumulated so far.
    pub fn p(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn phi(&self) -> &Vector {
        &self.phi
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// `(γ−γᵗ)/(1−γᵗ)` and `(1−γ)/(1−γᵗ)` for the current round.
    fn coefficients(&self) -> (f64, f64) {
        let t = self.t as f64;
        if self.gamma == 1.0 {
            ((t - 1.0) / t, 1.0 / t)
        } else if self.power.is_negligible() {
            (self.gamma, 1.0 - self.gamma)
        } else {
            let denom = 1.0 - self.power.value();
            ((self.gamma - self.power.value()) / denom, (1.0 - self.gamma) / denom)
        }
    }

    /// `η_t = (1−γ)/(1−γᵗ)`, or `1/t` when `γ = 1`.
    pub fn quadratic_step_size(&self) -> f64 {
        self.coefficients().1
    }

    /// `θ_{t+1}` computed by the requested form, without advancing the state.
    pub fn quadratic_next(&self, target: &Vector, form: QuadraticUpdateForm) -> Result<Vector> {
        ensure_dim(target, self.theta.len())?;
        let (keep, take) = self.coefficients();
        let grad = &self.theta - target;
        Ok(match form {
            QuadraticUpdateForm::WeightedArgmin => {
                let weight = self.gamma * self.p[(0, 0)] + 1.0;
                (&self.phi * self.gamma + target) / weight
            }
            QuadraticUpdateForm::ConvexCombination => &self.theta * keep + target * take,
            QuadraticUpdateForm::InverseCurvatureStep => {
                let weight = self.gamma * self.p[(0, 0)] + 1.0;
                &self.theta - grad / weight
            }
            QuadraticUpdateForm::GradientStep => &self.theta - grad * take,
        })
    }

    /// One round on `f_t(θ) = ½‖θ − y_t‖²`.
    pub fn step_quadratic(&self, target: &Vector) -> Result<RlsState> {
        ensure_finite(target, "target")?;
        let theta = self.quadratic_next(target, QuadraticUpdateForm::ConvexCombination)?;
        let n = self.theta.len();
        let p = &self.p * self.gamma + DMatrix::identity(n, n);
        let phi = &self.phi * self.gamma + target;
        let mut power = self.power;
        power.advance();
        Ok(RlsState { theta, p, p_inv: None, phi, gamma: self.gamma, t: self.t + 1, power })
    }

    /// One round on `f_t(θ) = ½‖y_t − A_tθ‖²`.
    ///
    /// `P_t⁻¹` is carried along with a Woodbury update when `A_t` has fewer
    /// rows than columns; otherwise `P_t` is refactorized.
    pub fn step_general(&self, design: &DMatrix<f64>, target: &Vector) -> Result<RlsState> {
        let n = self.theta.len();
        if design.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: design.ncols() });
        }
        ensure_dim(target, design.nrows())?;
        ensure_finite(target, "target")?;
        let at = design.transpose();
        let p = SpdMatrix::symmetrized(&self.p * self.gamma + &at * design).into_inner();
        let phi = &self.phi * self.gamma + &at * target;

        let woodbury = match &self.p_inv {
            Some(prev) if design.nrows() < n => {
                let b = prev / self.gamma;
                let bat = &b * &at;
                let inner = DMatrix::identity(design.nrows(), design.nrows()) + design * &bat;
                let inner = SpdMatrix::symmetrized(inner);
                let k = inner.cholesky().ok().map(|c| c.solve(&bat.transpose()));
                k.map(|k| SpdMatrix::symmetrized(&b - &bat * k).into_inner())
            }
            _ => None,
        };
        let p_inv = match woodbury {
            Some(inv) if inv.iter().all(|x| x.is_finite()) => inv,
            _ => SpdMatrix::symmetrized(p.clone()).inverse().map_err(|_| {
                invalid("accumulated AᵀA is singular; the first design matrix must have full column rank")
            })?,
        };
        let theta = &p_inv * &phi;
        let mut power = self.power;
        power.advance();
        Ok(RlsState { theta, p, p_inv: Some(p_inv), phi, gamma: self.gamma, t: self.t + 1, power })
    }
}

/// `max_t ‖θ_{t+1} − y_t − ((γ−γᵗ)/(1−γᵗ))(θ_t − y_t)‖` over a quadratic trace.
///
/// `thetas` holds `θ_1 … θ_{T+1}` and `targets` holds `y_1 … y_T`.
pub fn tracking_recursion_residual(thetas: &[Vector], targets: &[Vector], gamma: f64) -> Result<f64> {
    if thetas.len() != targets.len() + 1 {
        return Err(Error::LengthMismatch { left: thetas.len(), right: targets.len() + 1 });
    }
    let mut worst = 0.0f64;
    for (i, y) in targets.iter().enumerate() {
        let t = (i + 1) as f64;
        let coeff = if gamma == 1.0 {
            (t - 1.0) / t
        } else {
            let pow = gamma.powf(t);
            (gamma - pow) / (1.0 - pow)
        };
        let lhs = &thetas[i + 1] - y;
        let rhs = (&thetas[i] - y) * coeff;
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// `√(u/ℓ)·uγ/(uγ + ℓ(1−γ))`.
pub fn contraction_factor_general(gamma: f64, ell: f64, u: f64) -> f64 {
    (u / ell).sqrt() * u * gamma / (u * gamma + ell * (1.0 - gamma))
}

/// Discount factors below `1/(δ^{3/2} − δ + 1)` make the general contraction
/// factor smaller than one.
pub fn contraction_gamma_limit(condition_number: f64) -> f64 {
    1.0 / (condition_number.powf(1.5) - condition_number + 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContractionReport {
    pub max_ratio: f64,
    pub bound: f64,
    pub rounds_checked: usize,
}

impl ContractionReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.max_ratio <= self.bound + tol
    }
}

/// Worst ratio `‖θ_{t+1} − θ_t*‖ / ‖θ_t − θ_t*‖` along a general least-squares
/// trace, against the factor from [`contraction_factor_general`].
pub fn check_contraction_general(
    thetas: &[Vector],
    minimizers: &[Vector],
    gamma: f64,
    ell: f64,
    u: f64,
) -> Result<ContractionReport> {
    if thetas.len() != minimizers.len() + 1 {
        return Err(Error::LengthMismatch { left: thetas.len(), right: minimizers.len() + 1 });
    }
    let mut max_ratio = 0.0f64;
    let mut rounds_checked = 0;
    for (t, star) in minimizers.iter().enumerate() {
        let before = (&thetas[t] - star).norm();
        if before < 1e-12 {
            continue;
        }
        max_ratio = max_ratio.max((&thetas[t + 1] - star).norm() / before);
        rounds_checked += 1;
    }
    Ok(ContractionReport { max_ratio, bound: contraction_factor_general(gamma, ell, u), rounds_checked })
}

/// Discounted RLS as an [`OnlineLearner`]; picks the quadratic or the general
/// recursion from the loss kind.
#[derive(Clone, Debug)]
pub struct DiscountedRls {
    state: RlsState,
    last_eta: f64,
}

impl DiscountedRls {
    pub fn new(theta1: Vector, gamma: f64) -> Result<Self> {
        Ok(DiscountedRls { state: RlsState::new(theta1, gamma)?, last_eta: f64::NAN })
    }

    pub fn state(&self) -> &RlsState {
        &self.state
    }
}

impl OnlineLearner for DiscountedRls {
    fn prediction(&self) -> &Vector {
        &self.state.theta
    }

    fn observe(&mut self, loss: &LossFunction) -> Result<()> {
        let eta = self.state.quadratic_step_size();
        self.state = match loss.kind() {
            LossKind::TrackingQuadratic { target } => self.state.step_quadratic(target)?,
            LossKind::GeneralLeastSquares { design, target } => self.state.step_general(design, target)?,
            LossKind::ScalarAdversarial { eps } => {
                // (θ − ε)² is the least-squares loss with A = √2, y = √2·ε.
                let design = DMatrix::from_element(1, 1, std::f64::consts::SQRT_2);
                let target = Vector::from_element(1, std::f64::consts::SQRT_2 * eps);
                self.state.step_general(&design, &target)?
            }
        };
        self.last_eta = eta;
        Ok(())
    }

    fn last_step_size(&self) -> f64 {
        self.last_eta
    }

    fn discount(&self) -> f64 {
        self.state.gamma
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn first_step_lands_on_first_target() {
        for gamma in [0.3, 0.9, 1.0] {
            let s = RlsState::new(dvector![0.7, -0.2], gamma).unwrap();
            let next = s.step_quadratic(&dvector![0.1, 0.4]).unwrap();
            assert!((next.theta() - dvector![0.1, 0.4]).norm() < 1e-15);
        }
    }

    #[test]
    fn hand_example_second_round() {
        // θ₂ = 1 after y₁ = 1; then y₂ = 0 with γ = ½ gives θ₃ = 1/3.
        let s = RlsState::new(dvector![0.0], 0.5).unwrap();
        let s = s.step_quadratic(&dvector![1.0]).unwrap();
        assert_eq!(s.theta(), &dvector![1.0]);
        let s = s.step_quadratic(&dvector![0.0]).unwrap();
        assert!((s.theta()[0] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn accumulated_curvature_is_geometric_sum() {
        let gamma = 0.8;
        let mut s = RlsState::new(dvector![0.0, 0.0], gamma).unwrap();
        for t in 1..=50 {
            s = s.step_quadratic(&dvector![0.1, 0.2]).unwrap();
            let expected = (1.0 - gamma.powi(t)) / (1.0 - gamma);
            assert!((s.p()[(0, 0)] - expected).abs() <= 1e-12 * expected);
            assert_eq!(s.p()[(0, 1)], 0.0);
        }
    }

    #[test]
    fn stationary_target_contracts_geometrically() {
        let gamma = 0.6;
        let y = dvector![0.5];
        let mut s = RlsState::new(dvector![0.0], gamma).unwrap();
        s = s.step_quadratic(&dvector![-0.5]).unwrap();
        for t in 2..40 {
            let before = s.theta()[0] - y[0];
            s = s.step_quadratic(&y).unwrap();
            let coeff = (gamma - gamma.powi(t)) / (1.0 - gamma.powi(t));
            assert!((s.theta()[0] - y[0] - coeff * before).abs() < 1e-15);
        }
    }

    #[test]
    fn gamma_one_is_running_average() {
        let ys = [0.3, -0.1, 0.8, 0.5, -0.6];
        let mut s = RlsState::new(dvector![0.0], 1.0).unwrap();
        let mut sum = 0.0;
        for (i, y) in ys.iter().enumerate() {
            s = s.step_quadratic(&dvector![*y]).unwrap();
            sum += y;
            assert!((s.theta()[0] - sum / (i + 1) as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn recursion_first_term_vanishes() {
        let s = RlsState::new(dvector![0.9], 0.4).unwrap();
        let y = dvector![-0.3];
        let next = s.step_quadratic(&y).unwrap();
        let r = tracking_recursion_residual(&[s.theta().clone(), next.theta().clone()], &[y], 0.4).unwrap();
        assert!(r < 1e-15);
    }

    #[test]
    fn general_first_step_is_round_minimizer() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.5, 0.0, 2.0, 1.0, 1.0]);
        let y = dvector![0.2, -0.4, 0.1];
        let s = RlsState::new(dvector![0.3, 0.3], 0.9).unwrap();
        let next = s.step_general(&a, &y).unwrap();
        let gram = SpdMatrix::new(a.transpose() * &a).unwrap();
        let star = gram.solve(&(a.transpose() * &y)).unwrap();
        assert!((next.theta() - star).norm() < 1e-12);
    }

    #[test]
    fn general_with_identity_design_matches_quadratic() {
        let gamma = 0.75;
        let mut q = RlsState::new(dvector![0.0, 0.0], gamma).unwrap();
        let mut g = RlsState::new(dvector![0.0, 0.0], gamma).unwrap();
        let eye = DMatrix::identity(2, 2);
        for k in 0..30 {
            let y = dvector![(k as f64 * 0.37).sin() * 0.5, (k as f64 * 0.11).cos() * 0.5];
            q = q.step_quadratic(&y).unwrap();
            g = g.step_general(&eye, &y).unwrap();
            assert!((q.theta() - g.theta()).norm() < 1e-12);
        }
    }

    #[test]
    fn rank_deficient_first_design_is_rejected() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let s = RlsState::new(dvector![0.0, 0.0], 0.9).unwrap();
        assert!(s.step_general(&a, &dvector![1.0]).is_err());
    }

    #[test]
    fn contraction_factor_reduces_to_gamma_for_unit_condition_number() {
        for gamma in [0.1, 0.5, 0.9] {
            assert!((contraction_factor_general(gamma, 2.0, 2.0) - gamma).abs() < 1e-15);
        }
    }

    #[test]
    fn contraction_factor_below_one_inside_gamma_limit() {
        for delta in [1.0f64, 1.5, 2.0, 3.0] {
            let limit = contraction_gamma_limit(delta);
            for frac in [0.2, 0.5, 0.9, 0.999] {
                assert!(contraction_factor_general(limit * frac, 1.0, delta) < 1.0);
            }
            if delta > 1.0 {
                assert!(contraction_factor_general(limit, 1.0, delta) >= 1.0 - 1e-12);
            }
        }
    }
}
