use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use smm::leverage::{audit, leverage_curve, silverman_bandwidth, synthetic_sample, AuditOptions, LeverageSample};

fn sample() -> LeverageSample {
    synthetic_sample(0.2, 0.8, 0.5, 2.0, 3000, 4).unwrap()
}

#[test]
fn doubling_returns_rescales_curve() {
    let s = sample();
    let doubled = LeverageSample::new(s.leverage().to_vec(), s.returns().iter().map(|z| 2.0 * z).collect()).unwrap();
    let opts = AuditOptions {
        floor: Some(1e-12),
        ..AuditOptions::default()
    };
    let a = audit(&s, &opts).unwrap();
    let b = audit(&doubled, &opts).unwrap();
    assert_eq!(a.grid, b.grid);
    for i in 0..a.len() {
        assert!((b.m_hat[i] - 2.0 * a.m_hat[i]).abs() <= 1e-12 * (1.0 + a.m_hat[i].abs()));
        assert!((b.s_raw[i] - 4.0 * a.s_raw[i]).abs() <= 1e-12 * (1.0 + a.s_raw[i].abs()));
        assert!((b.lever_hat[i] - 0.5 * a.lever_hat[i]).abs() <= 1e-12 * (1.0 + a.lever_hat[i].abs()));
    }
}

#[test]
fn shuffling_time_order_leaves_curve_unchanged() {
    let s = sample();
    let mut idx: Vec<usize> = (0..s.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(1));
    let shuffled = LeverageSample::new(
        idx.iter().map(|&i| s.leverage()[i]).collect(),
        idx.iter().map(|&i| s.returns()[i]).collect(),
    )
    .unwrap();
    let a = audit(&s, &AuditOptions::default()).unwrap();
    let b = audit(&shuffled, &AuditOptions::default()).unwrap();
    assert_eq!(a.bandwidth.to_bits(), silverman_bandwidth(s.leverage()).to_bits());
    for i in 0..a.len() {
        assert!((a.lever_hat[i] - b.lever_hat[i]).abs() <= 1e-10 * (1.0 + a.lever_hat[i].abs()));
    }
}

#[test]
fn floor_bounds_denominator() {
    let s = sample();
    let grid: Vec<f64> = (0..40).map(|i| 0.5 + 1.5 * i as f64 / 39.0).collect();
    let curve = leverage_curve(&s, &grid, 0.05, 0.5).unwrap();
    assert!(curve.s_hat.iter().all(|&v| v >= 0.5));
    assert!(curve.s_hat.iter().zip(&curve.s_raw).all(|(a, b)| *a == b.max(0.5)));
}
