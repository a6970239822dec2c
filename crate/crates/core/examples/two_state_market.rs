//! Two equally likely states with proportional means and covariances.
//! The conditional Markowitz policy is down-levered state by state into
//! the second-moment policy, which earns a higher unconditional Sharpe.

use nalgebra::{DMatrix, DVector};
use smm::{evaluate, markowitz_policy, q_of, smm_policy, tas, DiscreteMarket, MomentPair, Objective};

fn main() -> smm::Result<()> {
    let calm = MomentPair::from_covariance(DVector::from_vec(vec![1.0, 1.0]), DMatrix::identity(2, 2))?;
    let wild = MomentPair::from_covariance(DVector::from_vec(vec![2.0, 2.0]), DMatrix::identity(2, 2) * 2.0)?;
    let market = DiscreteMarket::new(vec![(0.5, calm), (0.5, wild)])?;

    let obj = Objective::sharpe(1.0, 0.0)?;
    let q = q_of(&market)?;
    println!("q = {q:.12} (11/15 = {:.12})", 11.0 / 15.0);
    println!("implied Sharpe tas(sqrt q) = {:.10}", tas(q.sqrt())?);

    let smm = smm_policy(&market, &obj)?;
    let mp = markowitz_policy(&market, &obj)?;
    let smm_perf = evaluate(&market, &smm, 0.0)?;
    let mp_perf = evaluate(&market, &mp, 0.0)?;

    for (name, pol, perf) in [("second-moment", &smm, &smm_perf), ("markowitz", &mp, &mp_perf)] {
        println!("{name:>14}: weights {:?}", pol.to_rows());
        println!(
            "{:>14}  mean {:.6}  risk {:.6}  sharpe {:.10}",
            "",
            perf.mean,
            perf.risk,
            perf.sharpe.unwrap_or(f64::NAN)
        );
    }
    let boost = smm_perf.sharpe.unwrap() / mp_perf.sharpe.unwrap() - 1.0;
    println!("Sharpe boost {:.4}%", 100.0 * boost);
    Ok(())
}
