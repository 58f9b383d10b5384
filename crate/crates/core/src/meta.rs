//! Exponentially weighted experts over a geometric grid of discount factors.
//!
//! Each expert runs its own discounted learner with `γ_i = 1 − η_i`, where
//! `η_i = ½·ln T/(T√(2D))·2^{i−1}`. The meta learner plays the weighted average
//! of the experts' points and reweights them by `exp(−λ f_t(θ_t^i))`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gd::{path_term, DiscountedGd, GdConfig, GdRule};
use crate::geometry::{FeasibleBall, Vector};
use crate::learner::OnlineLearner;
use crate::losses::{ConvexityProfile, LossFunction};
use crate::newton::{DiscountedNewton, NewtonCase, NewtonConfig};

/// The discount-factor grid `H`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpertGrid {
    etas: Vec<f64>,
    gammas: Vec<f64>,
    base_size: usize,
    include_gamma_one: bool,
}

impl ExpertGrid {
    /// `N = ⌈½·log₂(2DT²/ln²T)⌉ + 1`.
    pub fn grid_size(horizon: u64, radius: f64) -> Result<usize> {
        if horizon < 2 {
            return Err(invalid(format!("expert grid needs T ≥ 2, got {horizon}")));
        }
        let t = horizon as f64;
        let ln_t = t.ln();
        let n = (0.5 * (2.0 * radius * t * t / (ln_t * ln_t)).log2()).ceil() + 1.0;
        Ok(n.max(1.0) as usize)
    }

    pub fn build(horizon: u64, radius: f64, include_gamma_one: bool) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(invalid(format!("radius must be finite and > 0, got {radius}")));
        }
        let base_size = Self::grid_size(horizon, radius)?;
        let t = horizon as f64;
        let eta1 = 0.5 * t.ln() / (t * (2.0 * radius).sqrt());
        let etas: Vec<f64> = (0..base_size).map(|i| eta1 * 2f64.powi(i as i32)).collect();
        let mut gammas: Vec<f64> = etas.iter().map(|e| 1.0 - e).collect();
        if let Some(g) = gammas.iter().find(|g| !(**g > 0.0)) {
            return Err(invalid(format!("grid produced a non-positive discount factor {g}")));
        }
        if include_gamma_one {
            gammas.insert(0, 1.0);
        }
        Ok(ExpertGrid { etas, gammas, base_size, include_gamma_one })
    }

    /// `η_1 < η_2 < …`, one per grid expert (the `γ = 1` expert has none).
    pub fn etas(&self) -> &[f64] {
        &self.etas
    }

    /// Discount factors in expert order, descending. With `include_gamma_one`
    /// the first entry is `1`.
    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    /// `N`, the number of grid experts excluding the `γ = 1` expert.
    pub fn base_size(&self) -> usize {
        self.base_size
    }

    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    pub fn includes_gamma_one(&self) -> bool {
        self.include_gamma_one
    }

    /// Prior weight of each expert, in the order of [`gammas`](Self::gammas).
    ///
    /// Grid expert `i` gets `C/(i(i+1))` with `C = 1 + 1/|H|`. The `γ = 1`
    /// expert, when present, takes index `N + 1`; with `|H| = N + 1` the
    /// weights still sum to one.
    pub fn prior(&self) -> Vec<f64> {
        let size = self.len() as f64;
        let c = 1.0 + 1.0 / size;
        let w = |i: usize| c / (i as f64 * (i as f64 + 1.0));
        let mut prior: Vec<f64> = (1..=self.base_size).map(w).collect();
        if self.include_gamma_one {
            prior.insert(0, w(self.base_size + 1));
        }
        prior
    }

    /// Index (into [`etas`](Self::etas)) of a grid step `η_k` with
    /// `η_k ≤ η ≤ 2η_k`.
    pub fn covering_index(&self, eta: f64) -> Option<usize> {
        self.etas.iter().position(|&e| e <= eta * (1.0 + 1e-12) && eta <= 2.0 * e * (1.0 + 1e-12))
    }
}

/// The path-tuned `1 − γ` for budget `V`: `½√(max{V, ln²T/T}/(2DT))`.
pub fn tuned_eta(budget: f64, horizon: u64, radius: f64) -> f64 {
    let t = horizon as f64;
    0.5 * (path_term(budget, t) / (2.0 * radius * t)).sqrt()
}

/// How the mixing rate `λ` is derived from the loss constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixingRate {
    /// `λ = α`.
    ExpConcave,
    /// `λ = ℓ/G²`.
    StronglyConvex,
}

impl MixingRate {
    pub fn lambda(&self, profile: &ConvexityProfile) -> f64 {
        match self {
            MixingRate::ExpConcave => profile.alpha(),
            MixingRate::StronglyConvex => profile.ell() / (profile.g() * profile.g()),
        }
    }
}

/// Expert weights kept as log-weights, normalized so the largest is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpertWeights {
    log_weights: Vec<f64>,
    lambda: f64,
}

impl ExpertWeights {
    pub fn new(prior: &[f64], lambda: f64) -> Result<Self> {
        if prior.is_empty() {
            return Err(invalid("at least one expert is required"));
        }
        if prior.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(invalid("prior weights must be finite and positive"));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(invalid(format!("λ must be finite and > 0, got {lambda}")));
        }
        let mut w = ExpertWeights { log_weights: prior.iter().map(|w| w.ln()).collect(), lambda };
        w.renormalize();
        Ok(w)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn len(&self) -> usize {
        self.log_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_weights.is_empty()
    }

    fn renormalize(&mut self) {
        let max = self.log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for l in &mut self.log_weights {
            *l -= max;
        }
    }

    /// The probability vector `w_t`.
    pub fn probabilities(&self) -> Vec<f64> {
        let raw: Vec<f64> = self.log_weights.iter().map(|l| l.exp()).collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    }

    /// `Σ_i w_i θ_i`, summed in expert order.
    pub fn combine(&self, predictions: &[Vector]) -> Result<Vector> {
        if predictions.len() != self.len() {
            return Err(Error::LengthMismatch { left: predictions.len(), right: self.len() });
        }
        let mut out = Vector::zeros(predictions[0].len());
        for (w, p) in self.probabilities().iter().zip(predictions) {
            if p.len() != out.len() {
                return Err(Error::DimensionMismatch { expected: out.len(), found: p.len() });
            }
            out.axpy(*w, p, 1.0);
        }
        Ok(out)
    }

    /// `w_{t+1}^i ∝ w_t^i·exp(−λ·loss_i)`.
    pub fn update(&mut self, losses: &[f64]) -> Result<()> {
        if losses.len() != self.len() {
            return Err(Error::LengthMismatch { left: losses.len(), right: self.len() });
        }
        if losses.iter().any(|l| !l.is_finite()) {
            return Err(Error::NonFinite("expert loss"));
        }
        for (lw, l) in self.log_weights.iter_mut().zip(losses) {
            *lw -= self.lambda * l;
        }
        self.renormalize();
        Ok(())
    }

    /// One aggregation round: plays the weighted average of `predictions`
    /// under the current weights and returns it with the updated weights.
    pub fn round(&self, losses: &[f64], predictions: &[Vector]) -> Result<(Vector, ExpertWeights)> {
        let prediction = self.combine(predictions)?;
        let mut next = self.clone();
        next.update(losses)?;
        Ok((prediction, next))
    }
}

/// Outcome of comparing the meta learner with every expert.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpertBoundReport {
    /// `max_i [(meta − expert_i) − ln(1/w₁^i)/λ]`; the bound holds when this
    /// is at most the tolerance.
    pub worst_excess: f64,
    /// Expert attaining `worst_excess`.
    pub worst_expert: usize,
}

impl ExpertBoundReport {
    pub const TOLERANCE: f64 = 1e-9;

    pub fn holds(&self) -> bool {
        self.worst_excess <= Self::TOLERANCE
    }
}

/// Checks `meta_cum − expert_cum ≤ (1/λ)·ln(1/w₁)` for every expert.
pub fn check_expert_regret_bound(
    meta_cum: f64,
    expert_cums: &[f64],
    prior: &[f64],
    lambda: f64,
) -> Result<ExpertBoundReport> {
    if expert_cums.len() != prior.len() {
        return Err(Error::LengthMismatch { left: expert_cums.len(), right: prior.len() });
    }
    let mut report = ExpertBoundReport { worst_excess: f64::NEG_INFINITY, worst_expert: 0 };
    for (i, (cum, w)) in expert_cums.iter().zip(prior).enumerate() {
        let excess = (meta_cum - cum) - (1.0 / w).ln() / lambda;
        if excess > report.worst_excess {
            report = ExpertBoundReport { worst_excess: excess, worst_expert: i };
        }
    }
    Ok(report)
}

/// The base learner each expert runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "learner", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExpertKind {
    /// Discounted Newton with fixed `η` and `P_0 = εI`.
    Newton { case: NewtonCase, eta: f64, epsilon: f64 },
    /// Discounted gradient descent.
    Gd { rule: GdRule, ell: f64, u: f64 },
}

#[derive(Clone, Debug)]
enum Expert {
    Newton(DiscountedNewton),
    Gd(DiscountedGd),
}

impl Expert {
    fn learner(&self) -> &dyn OnlineLearner {
        match self {
            Expert::Newton(l) => l,
            Expert::Gd(l) => l,
        }
    }

    fn learner_mut(&mut self) -> &mut dyn OnlineLearner {
        match self {
            Expert::Newton(l) => l,
            Expert::Gd(l) => l,
        }
    }
}

/// The aggregating learner.
#[derive(Clone, Debug)]
pub struct MetaLearner {
    experts: Vec<Expert>,
    gammas: Vec<f64>,
    prior: Vec<f64>,
    weights: ExpertWeights,
    prediction: Vector,
    expert_cum: Vec<f64>,
    meta_cum: f64,
}

impl MetaLearner {
    pub fn new(grid: &ExpertGrid, kind: ExpertKind, lambda: f64, ball: &FeasibleBall, theta1: Vector) -> Result<Self> {
        let mut experts = Vec::with_capacity(grid.len());
        for &gamma in grid.gammas() {
            let expert = match kind {
                ExpertKind::Newton { case, eta, epsilon } => {
                    let config = NewtonConfig::new(case, gamma, eta, epsilon)?;
                    Expert::Newton(DiscountedNewton::new(config, *ball, theta1.clone())?)
                }
                ExpertKind::Gd { rule, ell, u } => {
                    let config = match rule {
                        GdRule::SmoothStronglyConvex => GdConfig::smooth(gamma, ell, u)?,
                        GdRule::StronglyConvex => GdConfig::strongly_convex(gamma, ell)?,
                    };
                    Expert::Gd(DiscountedGd::new(config, *ball, theta1.clone())?)
                }
            };
            experts.push(expert);
        }
        let prior = grid.prior();
        let weights = ExpertWeights::new(&prior, lambda)?;
        let n = experts.len();
        Ok(MetaLearner {
            experts,
            gammas: grid.gammas().to_vec(),
            prior,
            weights,
            prediction: theta1,
            expert_cum: vec![0.0; n],
            meta_cum: 0.0,
        })
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn expert_weights(&self) -> &ExpertWeights {
        &self.weights
    }

    /// Current point of each expert.
    pub fn expert_predictions(&self) -> Vec<Vector> {
        self.experts.iter().map(|e| e.learner().prediction().clone()).collect()
    }

    /// Cumulative loss of each expert so far.
    pub fn expert_cumulative_losses(&self) -> &[f64] {
        &self.expert_cum
    }

    pub fn cumulative_loss(&self) -> f64 {
        self.meta_cum
    }

    /// Regret bound against every expert for the rounds played so far.
    pub fn expert_bound(&self) -> Result<ExpertBoundReport> {
        check_expert_regret_bound(self.meta_cum, &self.expert_cum, &self.prior, self.weights.lambda())
    }
}

impl OnlineLearner for MetaLearner {
    fn prediction(&self) -> &Vector {
        &self.prediction
    }

    fn observe(&mut self, loss: &LossFunction) -> Result<()> {
        let losses = self
            .experts
            .iter()
            .map(|e| loss.value(e.learner().prediction()))
            .collect::<Result<Vec<f64>>>()?;
        self.meta_cum += loss.value(&self.prediction)?;
        for (c, l) in self.expert_cum.iter_mut().zip(&losses) {
            *c += l;
        }
        self.weights.update(&losses)?;
        for e in &mut self.experts {
            e.learner_mut().observe(loss)?;
        }
        self.prediction = self.weights.combine(&self.expert_predictions())?;
        Ok(())
    }

    /// The mixing rate `λ`.
    fn last_step_size(&self) -> f64 {
        self.weights.lambda()
    }

    /// `γ` of the currently heaviest expert.
    fn discount(&self) -> f64 {
        let p = self.weights.probabilities();
        let best = p
            .iter()
            .enumerate()
            .fold(0, |best, (i, w)| if *w > p[best] { i } else { best });
        self.gammas[best]
    }

    fn weights(&self) -> Option<Vec<f64>> {
        Some(self.weights.probabilities())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn grid_for_hundred_rounds() {
        let g = ExpertGrid::build(100, 1.0, false).unwrap();
        assert_eq!(g.base_size(), 6);
        assert!((g.etas()[0] - 0.0162822).abs() < 1e-6);
        for w in g.etas().windows(2) {
            assert_eq!(w[1] / w[0], 2.0);
        }
        let max = *g.etas().last().unwrap();
        assert!((0.5..1.0).contains(&max));
        assert!(ExpertGrid::build(1, 1.0, false).is_err());
    }

    #[test]
    fn prior_sums_to_one() {
        let g = ExpertGrid { etas: vec![0.1, 0.2, 0.4], gammas: vec![0.9, 0.8, 0.6], base_size: 3, include_gamma_one: false };
        let p = g.prior();
        let expect = [2.0 / 3.0, 2.0 / 9.0, 1.0 / 9.0];
        for (a, b) in p.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        let with_one = ExpertGrid::build(1000, 1.0, true).unwrap();
        assert_eq!(with_one.gammas()[0], 1.0);
        assert_eq!(with_one.len(), with_one.base_size() + 1);
        assert!((with_one.prior().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equal_losses_keep_weights() {
        let mut w = ExpertWeights::new(&[0.2, 0.3, 0.5], 1.0).unwrap();
        w.update(&[1.0, 1.0, 1.0]).unwrap();
        let p = w.probabilities();
        for (a, b) in p.iter().zip([0.2, 0.3, 0.5]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn two_expert_update() {
        let w = ExpertWeights::new(&[0.5, 0.5], 1.0).unwrap();
        let (pred, next) = w.round(&[0.0, 2f64.ln()], &[dvector![1.0], dvector![-1.0]]).unwrap();
        assert!(pred[0].abs() < 1e-15);
        let p = next.probabilities();
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((p[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn point_mass_plays_that_expert() {
        let w = ExpertWeights::new(&[1.0, 1e-300], 1.0).unwrap();
        let mut w = w;
        w.update(&[0.0, 1e3]).unwrap();
        let c = w.combine(&[dvector![0.3, 0.1], dvector![-0.5, 0.2]]).unwrap();
        assert_eq!(c, dvector![0.3, 0.1]);
    }

    #[test]
    fn non_finite_loss_rejected() {
        let mut w = ExpertWeights::new(&[0.5, 0.5], 1.0).unwrap();
        assert_eq!(w.update(&[f64::NAN, 0.0]), Err(Error::NonFinite("expert loss")));
    }

    #[test]
    fn single_expert_bound_is_exact() {
        let r = check_expert_regret_bound(3.0, &[3.0], &[1.0], 0.5).unwrap();
        assert!(r.holds());
        assert_eq!(r.worst_excess, 0.0);
    }

    #[test]
    fn tuned_eta_is_covered() {
        let (t, d) = (10_000u64, 1.0);
        let g = ExpertGrid::build(t, d, false).unwrap();
        for k in 0..=100 {
            let v = 2.0 * d * t as f64 * (k as f64 / 100.0);
            assert!(g.covering_index(tuned_eta(v, t, d)).is_some(), "V = {v}");
        }
    }
}
