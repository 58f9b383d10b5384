//! Discounted recursive least squares: the four equivalent forms of the
//! tracking update, and the general least-squares recursion.

use dynregret::rls::QuadraticUpdateForm;
use dynregret::*;

fn main() -> Result<()> {
    let spec = ScenarioSpec::new(ScenarioKind::RandomWalk { budget: scenarios::Budget::Absolute(3.0) }, 500, 3, 1.0, 1);
    let s = generate(&spec)?;

    let mut state = RlsState::new(Vector::zeros(3), 0.9)?;
    let mut worst = 0.0f64;
    for y in &s.targets {
        let reference = state.quadratic_next(y, QuadraticUpdateForm::ConvexCombination)?;
        for form in QuadraticUpdateForm::ALL {
            worst = worst.max((state.quadratic_next(y, form)? - &reference).norm());
        }
        state = state.step_quadratic(y)?;
    }
    println!("tracking: largest disagreement between update forms {worst:.2e}");
    println!("tracking: final estimate {:?}, target {:?}", state.theta().as_slice(), s.targets.last().unwrap().as_slice());

    // General least squares through the learner interface.
    let spec = spec.with_loss_family(LossFamily::GeneralLeastSquares { m: 5, ell: 0.5, u: 2.0 }).with_noise(0.05);
    let s = generate(&spec)?;
    let ball = spec.ball()?;
    for gamma in [0.5, 0.9, 0.99, 1.0] {
        let mut rls = DiscountedRls::new(Vector::zeros(3), gamma)?;
        let trace = run_learner(&mut rls, &s.losses)?;
        let cmp = ComparatorTrace::per_round_minimizers(&s.losses, &ball)?;
        let r = regret_of(trace.played(), &s.losses, &cmp)?;
        println!("least squares γ={gamma:<5} regret against per-round minimizers {:>9.4}", r.total());
    }
    Ok(())
}
