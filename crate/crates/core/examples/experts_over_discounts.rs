//! Exponentially weighted experts over a grid of discount factors. The
//! aggregate tracks abrupt jumps without knowing the path length.

use dynregret::meta::{ExpertKind, MixingRate};
use dynregret::*;

fn main() -> Result<()> {
    let horizon = 8_000;
    let spec = ScenarioSpec::new(ScenarioKind::PiecewiseConstant { segments: 6, budget: scenarios::Budget::Absolute(5.0) }, horizon, 2, 1.0, 2);
    let s = generate(&spec)?;
    let ball = spec.ball()?;
    let profile = spec.profile()?;
    let cmp = ComparatorTrace::per_round_minimizers(&s.losses, &ball)?;

    let grid = ExpertGrid::build(horizon, 1.0, true)?;
    println!("{} experts, γ from {:.5} to {:.5}", grid.len(), grid.gammas()[1], grid.gammas().last().unwrap());

    let lambda = MixingRate::StronglyConvex.lambda(&profile);
    let kind = ExpertKind::Gd { rule: GdRule::StronglyConvex, ell: profile.ell(), u: profile.u() };
    let mut meta = MetaLearner::new(&grid, kind, lambda, &ball, Vector::zeros(2))?;
    let trace = run_learner(&mut meta, &s.losses)?;
    let report = regret_of(trace.played(), &s.losses, &cmp)?;
    println!("meta dynamic regret {:.3}", report.total());

    let final_weights = meta.expert_weights().probabilities();
    for (i, (g, w)) in grid.gammas().iter().zip(&final_weights).enumerate() {
        println!("  expert {i:>2}  γ={g:.5}  weight {w:.4}  loss {:.3}", meta.expert_cumulative_losses()[i]);
    }
    let bound = meta.expert_bound()?;
    println!("regret-to-expert bound holds: {} (slack {:.3})", bound.holds(), -bound.worst_excess);

    let gamma = Schedule::PathTuned { budget: 5.0 }.make_gamma(horizon, 1.0)?;
    let mut single = DiscountedGd::new(GdConfig::strongly_convex(gamma, 1.0)?, ball, Vector::zeros(2))?;
    let t = run_learner(&mut single, &s.losses)?;
    println!("path-tuned single learner dynamic regret {:.3}", regret_of(t.played(), &s.losses, &cmp)?.total());
    Ok(())
}
