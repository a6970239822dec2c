//! Zero covariance to a fixed holding of the first asset. The lost squared
//! Hansen ratio is exactly the part spanned by the constraint.

use nalgebra::{DMatrix, DVector};
use smm::discrete::Policy;
use smm::hedging::{hedging_example_c1, inner_product, optimize_basis, solve_hedge, HedgeConstraint};
use smm::{evaluate, DiscreteMarket, MomentPair, Objective};

fn main() -> smm::Result<()> {
    let market = DiscreteMarket::new(vec![
        (0.5, MomentPair::from_covariance(DVector::from_vec(vec![1.0, 1.0]), DMatrix::identity(2, 2))?),
        (0.5, MomentPair::from_covariance(DVector::from_vec(vec![2.0, 2.0]), DMatrix::identity(2, 2) * 2.0)?),
    ])?;
    let target = Policy::constant(2, DVector::from_vec(vec![1.0, 0.0]));
    let obj = Objective::sharpe(1.0, 0.0)?;

    let constraint = HedgeConstraint::zero_covariance(&market, target.clone())?;
    let (hedged, sol) = solve_hedge(&market, std::slice::from_ref(&constraint), &obj)?;
    println!("q = {:.10}  q_g = {:.10}  spanned = {:.10}", sol.q, sol.q_g, sol.spanned_q);
    println!("multiplier {:.10}  closed form {:.10}", sol.multipliers[0], hedging_example_c1(&market, &target)?);

    let perf = evaluate(&market, &hedged, 0.0)?;
    let target_perf = evaluate(&market, &target, 0.0)?;
    let both = Policy::new(hedged.weights.iter().zip(&target.weights).map(|(a, b)| a + b).collect())?;
    let joint = evaluate(&market, &both, 0.0)?;
    let cov = (joint.variance - perf.variance - target_perf.variance) / 2.0;
    println!("hedged sharpe {:.10}  covariance with target {:.2e}", perf.sharpe.unwrap(), cov);
    println!("orthogonality residual {:.2e}", inner_product(&hedged, &constraint.g, &market)?);

    // The spanned part is recovered by optimizing over A⁻¹g alone.
    let spanned_basis = Policy::new(
        market
            .states()
            .iter()
            .zip(&constraint.g.weights)
            .map(|(m, g)| m.solve_second_moment(g))
            .collect(),
    )?;
    let span = optimize_basis(&market, &[spanned_basis], &Objective::Kelly)?;
    println!("basis over A⁻¹g: hansen² = {:.10}", span.hansen_sq);
    Ok(())
}
