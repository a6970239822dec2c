//! Audit the leverage choices of a strategy: regress unit returns and their
//! squares on leverage, then compare the implied optimal leverage with the
//! one actually used. Writes a plot-ready CSV to standard output.

use smm::io::write_leverage_csv;
use smm::leverage::{audit, slope_through_origin, synthetic_sample, AuditOptions};

fn main() -> smm::Result<()> {
    // Unit returns are N(a·x, σ²) at leverage x, so the optimal leverage
    // curve is proportional to a·x/σ².
    let (a, sigma) = (0.1, 1.0);
    let sample = synthetic_sample(a, sigma, 0.5, 2.5, 20_000, 0)?;
    let curve = audit(&sample, &AuditOptions::default())?;

    let slope = slope_through_origin(&curve, 0.1);
    eprintln!("bandwidth {:.4}  points {}", curve.bandwidth, curve.len());
    eprintln!("fitted slope {slope:.5}  true {:.5}", a / (sigma * sigma));
    write_leverage_csv(&curve, std::io::stdout().lock())
}
