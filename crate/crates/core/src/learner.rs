use crate::error::Result;
use crate::geometry::Vector;
use crate::losses::LossFunction;

/// A full-information online learner: it plays [`prediction`](Self::prediction),
/// then sees the round's loss.
pub trait OnlineLearner {
    /// The point `θ_t` played in the current round.
    fn prediction(&self) -> &Vector;

    /// Reveals `f_t` and advances to round `t + 1`.
    fn observe(&mut self, loss: &LossFunction) -> Result<()>;

    /// Step size used by the most recent update (`NaN` before the first one).
    fn last_step_size(&self) -> f64;

    /// Discount factor `γ` in effect.
    fn discount(&self) -> f64;

    /// Expert weights for aggregating learners; `None` for single learners.
    fn weights(&self) -> Option<Vec<f64>> {
        None
    }
}

/// Everything recorded while driving a learner through a loss stream.
#[derive(Clone, Debug, Default)]
pub struct LearnerTrace {
    /// `θ_1, …, θ_{T+1}`.
    pub predictions: Vec<Vector>,
    /// `η_t` used after round `t`.
    pub step_sizes: Vec<f64>,
    pub discounts: Vec<f64>,
    /// Weights in effect when `θ_t` was played (aggregating learners only).
    pub weights: Vec<Vec<f64>>,
}

impl LearnerTrace {
    /// The played points `θ_1, …, θ_T`.
    pub fn played(&self) -> &[Vector] {
        &self.predictions[..self.predictions.len().saturating_sub(1)]
    }
}

pub fn run_learner<L: OnlineLearner + ?Sized>(learner: &mut L, losses: &[LossFunction]) -> Result<LearnerTrace> {
    let mut trace = LearnerTrace {
        predictions: Vec::with_capacity(losses.len() + 1),
        step_sizes: Vec::with_capacity(losses.len()),
        discounts: Vec::with_capacity(losses.len()),
        weights: Vec::new(),
    };
    for loss in losses {
        trace.predictions.push(learner.prediction().clone());
        if let Some(w) = learner.weights() {
            trace.weights.push(w);
        }
        learner.observe(loss)?;
        trace.step_sizes.push(learner.last_step_size());
        trace.discounts.push(learner.discount());
    }
    trace.predictions.push(learner.prediction().clone());
    Ok(trace)
}
