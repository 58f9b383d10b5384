//! Discounted gradient descent: the two step-size rules and how the discount
//! schedules pick γ from the horizon or a path-length budget.

use dynregret::*;

fn main() -> Result<()> {
    let config = GdConfig::smooth(0.9, 1.0, 4.0)?;
    let sc = GdConfig::strongly_convex(0.9, 1.0)?;
    println!("   t  smooth η_t  strongly convex η_t");
    for t in [1, 2, 5, 10, 50, 1000] {
        println!("{t:>4}  {:>10.5}  {:>19.5}", stepsize(&config, t), stepsize(&sc, t));
    }

    let horizon = 10_000;
    for schedule in [
        Schedule::BetaPower { beta: 0.5 },
        Schedule::PathTuned { budget: 0.0 },
        Schedule::PathTuned { budget: 100.0 },
        Schedule::Fixed { gamma: 1.0 },
    ] {
        println!("{schedule:?}: γ = {:.6}", schedule.make_gamma(horizon, 1.0)?);
    }

    let budget = (horizon as f64).sqrt();
    let kind = ScenarioKind::RandomWalk { budget: scenarios::Budget::Absolute(budget) };
    let s = generate(&ScenarioSpec::new(kind, horizon, 2, 1.0, 5))?;
    let ball = FeasibleBall::new(1.0, 2)?;
    let cmp = ComparatorTrace::per_round_minimizers(&s.losses, &ball)?;
    for schedule in [Schedule::PathTuned { budget }, Schedule::Fixed { gamma: 1.0 }] {
        let gamma = schedule.make_gamma(horizon, 1.0)?;
        let mut gd = DiscountedGd::new(GdConfig::strongly_convex(gamma, 1.0)?, ball, Vector::zeros(2))?;
        let trace = run_learner(&mut gd, &s.losses)?;
        println!("{schedule:?}: dynamic regret {:.2}", regret_of(trace.played(), &s.losses, &cmp)?.total());
    }
    Ok(())
}
