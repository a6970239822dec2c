//! Coarsening the feature partition never raises q.

use nalgebra::{DMatrix, DVector};
use smm::{merge_states, q_of, DiscreteMarket, MomentPair};

fn main() -> smm::Result<()> {
    let state = |m: f64, v: f64| MomentPair::from_covariance(DVector::from_vec(vec![m, 0.5 * m]), DMatrix::identity(2, 2) * v);
    let market = DiscreteMarket::new(vec![
        (0.25, state(1.0, 1.0)?),
        (0.25, state(2.0, 2.0)?),
        (0.25, state(-0.5, 1.5)?),
        (0.25, state(0.2, 0.5)?),
    ])?;
    println!("all four states: q = {:.10}", q_of(&market)?);
    for subset in [vec![0, 1], vec![2, 3], vec![0, 2], vec![0, 1, 2, 3]] {
        let (merged, dq) = merge_states(&market, &subset)?;
        println!(
            "merge {:?}: {} states, q = {:.10}, delta q = {:+.3e}",
            subset,
            merged.probs().len(),
            q_of(&merged)?,
            dq
        );
    }
    Ok(())
}
