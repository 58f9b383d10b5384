//! The three loss families and an empirical check of the curvature constants
//! each one declares.

use dynregret::scenarios::adversary_sigma;
use dynregret::*;

fn main() -> Result<()> {
    let ball3 = FeasibleBall::new(1.0, 3)?;
    let ball1 = FeasibleBall::new(1.0, 1)?;

    let tracking = LossFunction::tracking_quadratic(Vector::from_vec(vec![0.2, -0.5, 0.1]), &ball3)?;
    let spec = ScenarioSpec::new(ScenarioKind::Stationary, 1, 3, 1.0, 7)
        .with_loss_family(LossFamily::GeneralLeastSquares { m: 5, ell: 0.5, u: 2.0 });
    let least_squares = generate(&spec)?.losses.remove(0);
    let adversarial = LossFunction::scalar_adversarial(2.0 * adversary_sigma(10_000, 0.5), &ball1)?;

    for (name, f, ball) in [("tracking", &tracking, &ball3), ("least squares", &least_squares, &ball3), ("adversarial", &adversarial, &ball1)] {
        let p = f.profile();
        let report = check_class_inequalities(f, p, ball, 5_000, 1)?;
        println!(
            "{name:>14}: α={:.4} ℓ={:.3} u={:.3} G={:.3} ρ={:.4}  certified: {}",
            p.alpha(),
            p.ell(),
            p.u(),
            p.g(),
            p.rho(ball.radius()),
            report.certified()
        );
        println!("{:>14}  worst violations {report:?}", "");
    }
    Ok(())
}
