//! Linear-in-features policies via pseudo-assets r ⊗ f: a classical
//! optimization on the flattened sample equals the basis optimization on
//! the empirical law.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use smm::hedging::{
    classical_optimum, flatten_pseudo_assets, linear_feature_basis, optimize_basis_on, sample_moments, EmpiricalLaw,
};
use smm::Objective;

fn main() -> smm::Result<()> {
    let (t, n, k) = (500, 2, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut z = || -> f64 { StandardNormal.sample(&mut rng) };

    let mut features = DMatrix::zeros(t, k);
    let mut returns = DMatrix::zeros(t, n);
    for s in 0..t {
        features[(s, 0)] = 1.0;
        features[(s, 1)] = z();
        returns[(s, 0)] = 0.05 * features[(s, 1)] + 0.2 * z();
        returns[(s, 1)] = 0.02 - 0.03 * features[(s, 1)] + 0.3 * z();
    }

    let obj = Objective::Kelly;
    let pseudo = flatten_pseudo_assets(&returns, &features)?;
    let (mean, second) = sample_moments(&pseudo);
    let flat = classical_optimum(mean, second, &obj)?;

    let law = EmpiricalLaw::from_returns(&returns);
    let basis = linear_feature_basis(&features, n);
    let direct = optimize_basis_on(&law, &basis, &obj)?;

    println!("pseudo-assets: {} columns", pseudo.ncols());
    println!("flattened coefficients {:?}", flat.coefficients.as_slice());
    println!("basis coefficients     {:?}", direct.coefficients.as_slice());
    println!("hansen² {:.12} vs {:.12}", flat.hansen_sq, direct.hansen_sq);
    println!("in-sample Sharpe {:.6}", flat.summary.sharpe.unwrap_or(f64::NAN));
    Ok(())
}
