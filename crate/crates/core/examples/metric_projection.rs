//! Projecting onto the feasible ball in the Euclidean norm and in the norm
//! induced by a curvature matrix.

use dynregret::{FeasibleBall, SpdMatrix, Vector};

fn main() -> dynregret::Result<()> {
    let ball = FeasibleBall::new(1.0, 2)?;
    let p = SpdMatrix::from_diagonal(&[1.0, 25.0])?;
    let y = Vector::from_vec(vec![1.5, 1.5]);

    let euclid = ball.project_euclidean(&y)?;
    let metric = ball.project_metric(&y, &p)?;
    println!("y               = [{:.4}, {:.4}]", y[0], y[1]);
    println!("euclidean       = [{:.4}, {:.4}]  P-distance² {:.4}", euclid[0], euclid[1], p.quad_form(&(&euclid - &y)));
    println!("metric (P)      = [{:.4}, {:.4}]  P-distance² {:.4}", metric[0], metric[1], p.quad_form(&(&metric - &y)));
    println!("‖metric‖        = {:.12}", metric.norm());

    // Points already inside are fixed.
    let inside = Vector::from_vec(vec![0.3, -0.2]);
    assert_eq!(ball.project_metric(&inside, &p)?, inside);
    Ok(())
}
