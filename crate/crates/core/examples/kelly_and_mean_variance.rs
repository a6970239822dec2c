//! The same conditional direction solves three objectives; only the
//! overall scale changes.

use nalgebra::{DMatrix, DVector};
use smm::{
    evaluate, optimal_objective_value, q_of, scaling_constant, smm_policy, DiscreteMarket, MomentPair, Objective,
};

fn main() -> smm::Result<()> {
    let market = DiscreteMarket::new(vec![
        (
            0.3,
            MomentPair::from_covariance(
                DVector::from_vec(vec![0.05, 0.02]),
                DMatrix::from_row_slice(2, 2, &[0.04, 0.01, 0.01, 0.09]),
            )?,
        ),
        (
            0.7,
            MomentPair::from_covariance(
                DVector::from_vec(vec![-0.01, 0.03]),
                DMatrix::from_row_slice(2, 2, &[0.02, -0.005, -0.005, 0.03]),
            )?,
        ),
    ])?;
    let q = q_of(&market)?;
    println!("q = {q:.8}");

    let objectives = [
        Objective::sharpe(0.1, 0.0)?,
        Objective::mean_variance(0.5)?,
        Objective::Kelly,
    ];
    for obj in &objectives {
        let pol = smm_policy(&market, obj)?;
        let perf = evaluate(&market, &pol, obj.risk_free())?;
        println!(
            "{:?}\n  scale {:.6}  achieved {:.10}  closed form {:.10}",
            obj,
            scaling_constant(q, obj)?,
            obj.value(&perf).unwrap_or(f64::NAN),
            optimal_objective_value(q, obj)?
        );
    }

    // Kelly growth is maximized at scale 1.
    let unit = smm_policy(&market, &Objective::Kelly)?;
    for c in [0.8, 0.9, 1.0, 1.1, 1.2] {
        let perf = evaluate(&market, &unit.scaled(c), 0.0)?;
        println!("kelly growth at c = {c:.1}: {:.8}", Objective::Kelly.value(&perf).unwrap());
    }
    Ok(())
}
