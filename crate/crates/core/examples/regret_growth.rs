//! Comparator sequences, regret ledgers and growth-rate fits over a grid of
//! horizons.

use dynregret::*;

fn main() -> Result<()> {
    let mut points = Vec::new();
    for horizon in [1_000u64, 4_000, 16_000, 64_000] {
        let budget = (horizon as f64).sqrt();
        let kind = ScenarioKind::RandomWalk { budget: scenarios::Budget::Absolute(budget) };
        let s = generate(&ScenarioSpec::new(kind, horizon, 2, 1.0, 9))?;
        let ball = FeasibleBall::new(1.0, 2)?;
        let gamma = Schedule::PathTuned { budget }.make_gamma(horizon, 1.0)?;
        let mut rls = DiscountedRls::new(Vector::zeros(2), gamma)?;
        let trace = run_learner(&mut rls, &s.losses)?;

        for cmp in [
            ComparatorTrace::fixed_optimum(&s.losses, &ball)?,
            ComparatorTrace::tracking_budget(&s.losses, &ball, budget / 4.0)?,
            ComparatorTrace::per_round_minimizers(&s.losses, &ball)?,
        ] {
            let r = regret_of(trace.played(), &s.losses, &cmp)?;
            println!("T={horizon:>6} {:>20} path {:>8.2} regret {:>9.3}", cmp.kind().label(), cmp.path_length(), r.total());
            if matches!(cmp.kind(), ComparatorKind::PerRoundMinimizer) {
                points.push((horizon as f64, r.total()));
            }
        }
    }
    let fit = GrowthFit::power_law(&points)?;
    println!("regret against per-round minimizers grows like T^{:.3} (R² {:.4})", fit.slope, fit.r2);
    Ok(())
}
