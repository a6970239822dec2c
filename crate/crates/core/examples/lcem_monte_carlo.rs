//! Second-moment vs Markowitz policies when expected returns are linear in
//! Gaussian features. The report is identical for any number of streams.

use nalgebra::{DMatrix, DVector};
use smm::lcem::{compare_policies, LcemModel, McConfig};

fn main() -> smm::Result<()> {
    let model = LcemModel::new(
        DMatrix::from_row_slice(2, 3, &[0.04, 0.02, -0.03, -0.03, -0.02, 0.02]),
        DMatrix::from_row_slice(2, 2, &[1.0, -0.1, -0.1, 1.0]),
        DVector::from_vec(vec![1.0, 1.0, -2.0]),
        DMatrix::identity(3, 3),
    )?;
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2_000_000);
    let cfg = McConfig::new(n, 42);

    let start = std::time::Instant::now();
    let report = compare_policies(&model, &cfg, 1.0)?;
    print!("{}", report.to_text());
    println!("elapsed {:.2?}", start.elapsed());

    let threaded = compare_policies(&model, &cfg.with_streams(4), 1.0)?;
    println!("4 streams identical: {}", threaded == report);
    Ok(())
}
