//! The discounted online Newton step in its three configurations, on a
//! drifting least-squares stream.

use dynregret::*;

fn main() -> Result<()> {
    let horizon = 4_000;
    let spec = ScenarioSpec::new(ScenarioKind::RandomWalk { budget: scenarios::Budget::Absolute(8.0) }, horizon, 3, 1.0, 3)
        .with_loss_family(LossFamily::GeneralLeastSquares { m: 4, ell: 0.5, u: 2.0 });
    let s = generate(&spec)?;
    let ball = spec.ball()?;
    let profile = spec.profile()?;
    let cmp = ComparatorTrace::per_round_minimizers(&s.losses, &ball)?;
    let gamma = Schedule::PathTuned { budget: 8.0 }.make_gamma(horizon, 1.0)?;
    println!("path-tuned γ = {gamma:.5}, realized path length {:.3}", s.realized_path);

    for case in [NewtonCase::ExpConcave, NewtonCase::StronglyConvexSmooth, NewtonCase::QuadBound] {
        for g in [gamma, 1.0] {
            let eta = case.max_eta(&profile, ball.radius());
            let config = NewtonConfig::new(case, g, eta, 1.0)?;
            let mut learner = DiscountedNewton::new(config, ball, Vector::zeros(3))?;
            let trace = run_learner(&mut learner, &s.losses)?;
            let r = regret_of(trace.played(), &s.losses, &cmp)?;
            println!("{case:?} ({:?}) γ={g:.4} η={eta:.4}: dynamic regret {:.3}", config.variant(), r.total());
        }
    }
    Ok(())
}
