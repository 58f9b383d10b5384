//! Comparator sequences, regret ledgers and growth-rate fits.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{FeasibleBall, SpdMatrix, Vector};
use crate::losses::LossFunction;
use crate::scenarios::path_length;

/// Which comparator sequence regret is measured against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ComparatorKind {
    /// The best fixed point in hindsight (static regret).
    FixedOptimum,
    /// `z_t = argmin_S f_t`.
    PerRoundMinimizer,
    /// Follows the per-round minimizers with a total path length of at most
    /// `budget`.
    TrackingBudget { budget: f64 },
    /// The comparator supplied by the scenario.
    Designated,
    /// A caller-supplied sequence.
    Explicit,
}

impl ComparatorKind {
    pub fn label(&self) -> &'static str {
        match self {
            ComparatorKind::FixedOptimum => "fixed_optimum",
            ComparatorKind::PerRoundMinimizer => "per_round_minimizer",
            ComparatorKind::TrackingBudget { .. } => "tracking_budget",
            ComparatorKind::Designated => "designated",
            ComparatorKind::Explicit => "explicit",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparatorTrace {
    kind: ComparatorKind,
    points: Vec<Vector>,
    path_length: f64,
}

impl ComparatorTrace {
    /// `argmin_{θ∈S} Σ_t f_t(θ)`.
    pub fn fixed_optimum(losses: &[LossFunction], ball: &FeasibleBall) -> Result<Self> {
        let first = losses.first().ok_or_else(|| invalid("empty loss stream"))?;
        let n = first.dim();
        let mut h = nalgebra::DMatrix::zeros(n, n);
        let mut b = Vector::zeros(n);
        for f in losses {
            let (hf, bf, _) = f.quadratic_parts();
            if hf.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: hf.dim() });
            }
            h += hf.as_matrix();
            b += bf;
        }
        let z = ball.minimize_quadratic(&SpdMatrix::new(h)?, &b)?;
        Ok(ComparatorTrace { kind: ComparatorKind::FixedOptimum, points: vec![z; losses.len()], path_length: 0.0 })
    }

    /// `z_t = argmin_{θ∈S} f_t(θ)`; its path length is `V*`.
    pub fn per_round_minimizers(losses: &[LossFunction], ball: &FeasibleBall) -> Result<Self> {
        let points = losses.iter().map(|f| f.minimizer(ball)).collect::<Result<Vec<_>>>()?;
        Ok(Self::with_kind(ComparatorKind::PerRoundMinimizer, points))
    }

    /// Moves toward each round's minimizer by at most `budget/(T−1)` per
    /// round, so the path length never exceeds `budget`.
    pub fn tracking_budget(losses: &[LossFunction], ball: &FeasibleBall, budget: f64) -> Result<Self> {
        if !(budget.is_finite() && budget >= 0.0) {
            return Err(invalid(format!("comparator budget must be finite and ≥ 0, got {budget}")));
        }
        let minimizers = Self::per_round_minimizers(losses, ball)?.points;
        let per_step = if minimizers.len() > 1 { budget / (minimizers.len() - 1) as f64 } else { 0.0 };
        let mut points: Vec<Vector> = Vec::with_capacity(minimizers.len());
        let mut used = 0.0;
        for m in minimizers {
            let next = match points.last() {
                None => m,
                Some(prev) => {
                    let delta = &m - prev;
                    let allowed = per_step.min(budget - used).max(0.0);
                    let dist = delta.norm();
                    if dist <= allowed {
                        m
                    } else {
                        prev + delta * (allowed / dist)
                    }
                }
            };
            if let Some(prev) = points.last() {
                used += (&next - prev).norm();
            }
            points.push(next);
        }
        Ok(Self::with_kind(ComparatorKind::TrackingBudget { budget }, points))
    }

    /// A given sequence; every point must be feasible.
    pub fn explicit(points: Vec<Vector>, ball: &FeasibleBall) -> Result<Self> {
        Self::labelled(ComparatorKind::Explicit, points, ball)
    }

    /// A scenario-supplied sequence.
    pub fn designated(points: Vec<Vector>, ball: &FeasibleBall) -> Result<Self> {
        Self::labelled(ComparatorKind::Designated, points, ball)
    }

    fn labelled(kind: ComparatorKind, points: Vec<Vector>, ball: &FeasibleBall) -> Result<Self> {
        for p in &points {
            ball.require_feasible(p, "comparator point")?;
        }
        Ok(Self::with_kind(kind, points))
    }

    fn with_kind(kind: ComparatorKind, points: Vec<Vector>) -> Self {
        let path_length = path_length(&points);
        ComparatorTrace { kind, points, path_length }
    }

    pub fn kind(&self) -> ComparatorKind {
        self.kind
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    /// `Σ_{t≥2} ‖z_t − z_{t−1}‖`.
    pub fn path_length(&self) -> f64 {
        self.path_length
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundRecord {
    pub t: u64,
    pub loss: f64,
    pub comparator_loss: f64,
    pub cum_regret: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegretReport {
    pub kind: ComparatorKind,
    pub records: Vec<RoundRecord>,
    /// Path length of the comparator.
    pub path_length: f64,
}

impl RegretReport {
    pub fn total(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.cum_regret)
    }

    pub fn horizon(&self) -> u64 {
        self.records.len() as u64
    }

    /// Cumulative regret after `t` rounds.
    pub fn regret_at(&self, t: u64) -> Option<f64> {
        if t == 0 {
            return Some(0.0);
        }
        self.records.get(t as usize - 1).map(|r| r.cum_regret)
    }

    pub fn total_loss(&self) -> f64 {
        self.records.iter().map(|r| r.loss).sum()
    }

    pub fn total_comparator_loss(&self) -> f64 {
        self.records.iter().map(|r| r.comparator_loss).sum()
    }

    /// `(T_j, R(T_j))` at `T/8, T/4, T/2, T`, skipping empty prefixes.
    pub fn checkpoints(&self) -> Vec<(f64, f64)> {
        let t = self.horizon();
        let mut out: Vec<(f64, f64)> = Vec::new();
        for div in [8, 4, 2, 1] {
            let tj = t / div;
            if tj == 0 || out.last().is_some_and(|(prev, _)| *prev == tj as f64) {
                continue;
            }
            out.push((tj as f64, self.regret_at(tj).unwrap_or(f64::NAN)));
        }
        out
    }
}

/// The ledger `Σ f_t(θ_t) − Σ f_t(z_t)` for played points `θ_1 … θ_T`.
pub fn regret_of(played: &[Vector], losses: &[LossFunction], comparator: &ComparatorTrace) -> Result<RegretReport> {
    if played.len() != losses.len() {
        return Err(Error::LengthMismatch { left: played.len(), right: losses.len() });
    }
    if comparator.len() != losses.len() {
        return Err(Error::LengthMismatch { left: comparator.len(), right: losses.len() });
    }
    let mut records = Vec::with_capacity(losses.len());
    let mut cum = 0.0;
    for (i, ((theta, f), z)) in played.iter().zip(losses).zip(comparator.points()).enumerate() {
        let loss = f.value(theta)?;
        let comparator_loss = f.value(z)?;
        cum += loss - comparator_loss;
        records.push(RoundRecord { t: i as u64 + 1, loss, comparator_loss, cum_regret: cum });
    }
    Ok(RegretReport { kind: comparator.kind(), records, path_length: comparator.path_length() })
}

/// Ordinary least-squares line through transformed `(T, R)` points.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points_used: usize,
    /// Points dropped because their regret was not positive.
    pub dropped: usize,
}

impl GrowthFit {
    /// `ln R` against `ln T`; the slope is the growth exponent.
    pub fn power_law(points: &[(f64, f64)]) -> Result<Self> {
        Self::fit_positive(points, |t| t.ln())
    }

    /// `ln R` against `ln ln T`; slope 1 means `R ∝ ln T`.
    pub fn log_log(points: &[(f64, f64)]) -> Result<Self> {
        if points.iter().any(|(t, _)| *t <= std::f64::consts::E) {
            return Err(invalid("log-log fits need T > e"));
        }
        Self::fit_positive(points, |t| t.ln().ln())
    }

    /// `R` against `ln T`.
    pub fn linear_in_log(points: &[(f64, f64)]) -> Result<Self> {
        let xy: Vec<(f64, f64)> = points.iter().map(|(t, r)| (t.ln(), *r)).collect();
        ols(&xy, 0)
    }

    fn fit_positive(points: &[(f64, f64)], x: impl Fn(f64) -> f64) -> Result<Self> {
        let kept: Vec<(f64, f64)> =
            points.iter().filter(|(_, r)| *r > 0.0 && r.is_finite()).map(|(t, r)| (x(*t), r.ln())).collect();
        ols(&kept, points.len() - kept.len())
    }
}

fn ols(xy: &[(f64, f64)], dropped: usize) -> Result<GrowthFit> {
    if xy.len() < 2 {
        return Err(invalid(format!("a growth fit needs at least two usable points, got {}", xy.len())));
    }
    if xy.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::NonFinite("growth-fit point"));
    }
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = xy.iter().map(|(_, y)| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("growth fit needs at least two distinct horizons"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(GrowthFit { slope, intercept, r2, points_used: xy.len(), dropped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn tq(y: f64, ball: &FeasibleBall) -> LossFunction {
        LossFunction::tracking_quadratic(dvector![y], ball).unwrap()
    }

    #[test]
    fn hand_example_static_regret() {
        let ball = FeasibleBall::new(1.0, 1).unwrap();
        let losses = vec![tq(1.0, &ball), tq(1.0, &ball), tq(1.0, &ball)];
        let cmp = ComparatorTrace::fixed_optimum(&losses, &ball).unwrap();
        assert!((cmp.points()[0][0] - 1.0).abs() < 1e-12);
        let played = vec![dvector![0.0], dvector![1.0], dvector![1.0]];
        let r = regret_of(&played, &losses, &cmp).unwrap();
        let losses_seen: Vec<f64> = r.records.iter().map(|x| x.loss).collect();
        assert_eq!(losses_seen[0], 0.5);
        assert!(losses_seen[1..].iter().all(|l| *l < 1e-24));
        assert!((r.total() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fixed_optimum_is_the_mean_when_feasible() {
        let ball = FeasibleBall::new(1.0, 1).unwrap();
        let losses = vec![tq(0.2, &ball), tq(-0.6, &ball), tq(0.7, &ball)];
        let cmp = ComparatorTrace::fixed_optimum(&losses, &ball).unwrap();
        assert!((cmp.points()[0][0] - 0.1).abs() < 1e-15);
        assert_eq!(cmp.path_length(), 0.0);
    }

    #[test]
    fn playing_the_comparator_gives_zero_regret() {
        let ball = FeasibleBall::new(1.0, 1).unwrap();
        let losses = vec![tq(0.2, &ball), tq(-0.6, &ball), tq(0.7, &ball)];
        let cmp = ComparatorTrace::per_round_minimizers(&losses, &ball).unwrap();
        let r = regret_of(cmp.points(), &losses, &cmp).unwrap();
        assert!(r.records.iter().all(|x| x.cum_regret == 0.0));
        assert!((cmp.path_length() - 2.1).abs() < 1e-15);
    }

    #[test]
    fn tracking_budget_respects_budget() {
        let ball = FeasibleBall::new(1.0, 1).unwrap();
        let losses: Vec<_> = (0..20).map(|i| tq(if i % 2 == 0 { 0.9 } else { -0.9 }, &ball)).collect();
        let cmp = ComparatorTrace::tracking_budget(&losses, &ball, 1.0).unwrap();
        assert!(cmp.path_length() <= 1.0 + 1e-12);
        let zero = ComparatorTrace::tracking_budget(&losses, &ball, 0.0).unwrap();
        assert_eq!(zero.path_length(), 0.0);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let ball = FeasibleBall::new(1.0, 1).unwrap();
        let losses = vec![tq(0.2, &ball)];
        let cmp = ComparatorTrace::per_round_minimizers(&losses, &ball).unwrap();
        assert!(matches!(regret_of(&[], &losses, &cmp), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn exact_power_laws_fit_exactly() {
        let ts: [f64; 4] = [1000.0, 2000.0, 4000.0, 8000.0];
        let lin: Vec<_> = ts.iter().map(|t| (*t, 3.0 * t)).collect();
        let root: Vec<_> = ts.iter().map(|t| (*t, 3.0 * t.sqrt())).collect();
        assert!((GrowthFit::power_law(&lin).unwrap().slope - 1.0).abs() < 1e-9);
        assert!((GrowthFit::power_law(&root).unwrap().slope - 0.5).abs() < 1e-9);
    }

    #[test]
    fn logarithmic_growth_in_log_log_coordinates() {
        let pts: Vec<_> = [1e3, 1e4, 1e5, 1e6].iter().map(|t: &f64| (*t, 2.0 * t.ln())).collect();
        let fit = GrowthFit::log_log(&pts).unwrap();
        assert!((fit.slope - 1.0).abs() < 0.05);
        let lin = GrowthFit::linear_in_log(&pts).unwrap();
        assert!((lin.slope - 2.0).abs() < 1e-12);
    }

    #[test]
    fn nonpositive_points_are_dropped() {
        let pts = [(10.0, -1.0), (20.0, 2.0), (40.0, 4.0), (80.0, 8.0)];
        let fit = GrowthFit::power_law(&pts).unwrap();
        assert_eq!(fit.dropped, 1);
        assert_eq!(fit.points_used, 3);
        assert!((fit.slope - 1.0).abs() < 1e-12);
    }
}
