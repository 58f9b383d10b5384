//! The random-sign adversary: no learner can do better than 3σ²T in
//! expectation against its designated comparator.

use dynregret::scenarios::{adversary_sigma, expected_adversary_regret};
use dynregret::*;

fn main() -> Result<()> {
    let (horizon, gamma0) = (10_000, 0.5);
    let sigma = adversary_sigma(horizon, gamma0);
    let ball = FeasibleBall::new(1.0, 1)?;
    println!("σ = {sigma:.6}, 3σ²T = {:.2}", expected_adversary_regret(horizon, gamma0));

    for (name, gamma) in [("path-tuned", Schedule::PathTuned { budget: 2.0 * sigma * horizon as f64 }.make_gamma(horizon, 1.0)?), ("undiscounted", 1.0)] {
        let mut total = 0.0;
        let seeds = 20;
        for seed in 0..seeds {
            let s = generate(&ScenarioSpec::new(ScenarioKind::LowerBoundAdversary { gamma0 }, horizon, 1, 1.0, seed))?;
            let cmp = ComparatorTrace::designated(s.designated.clone().expect("adversary has a comparator"), &ball)?;
            let mut gd = DiscountedGd::new(GdConfig::strongly_convex(gamma, 2.0)?, ball, Vector::zeros(1))?;
            let trace = run_learner(&mut gd, &s.losses)?;
            total += regret_of(trace.played(), &s.losses, &cmp)?.total();
        }
        println!("{name:>12} (γ={gamma:.4}): mean regret over {seeds} seeds {:.2}", total / seeds as f64);
    }
    Ok(())
}
