use nalgebra::{DMatrix, DVector};
use smm::lcem::{
    compare_policies, estimate_q, lcem_conditional_weights, lcem_weights_via_moments, policy_moments,
    sample_policy_returns, LcemModel, LcemPolicy, McConfig,
};

fn small_model(scale: f64) -> LcemModel {
    LcemModel::new(
        DMatrix::from_row_slice(2, 2, &[0.3, -0.1, 0.05, 0.2]) * scale,
        DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 0.8]),
        DVector::from_vec(vec![0.5, -0.5]),
        DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 0.6]),
    )
    .unwrap()
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

#[test]
fn raw_sampling_agrees_with_conditional_averaging() {
    let model = small_model(1.0);
    let cfg = McConfig::new(200_000, 5);
    for policy in [LcemPolicy::Smm, LcemPolicy::Markowitz] {
        let raw = sample_policy_returns(&model, &cfg, policy).unwrap();
        let (mean, second) = policy_moments(&model, &cfg, policy).unwrap();

        let (m_raw, m_se) = mean_and_se(&raw);
        let sq: Vec<f64> = raw.iter().map(|x| x * x).collect();
        let (s_raw, s_se) = mean_and_se(&sq);
        let tol_m = 4.0 * (m_se.powi(2) + mean.std_error.powi(2)).sqrt();
        let tol_s = 4.0 * (s_se.powi(2) + second.std_error.powi(2)).sqrt();
        assert!((m_raw - mean.value).abs() <= tol_m, "{policy:?} mean {m_raw} vs {}", mean.value);
        assert!((s_raw - second.value).abs() <= tol_s, "{policy:?} second {s_raw} vs {}", second.value);
        let var_raw = s_raw - m_raw * m_raw;
        let var = second.value - mean.value * mean.value;
        assert!((var_raw - var).abs() <= tol_s + 2.0 * tol_m * mean.value.abs().max(m_raw.abs()) + tol_m * tol_m);
    }
}

#[test]
fn doubling_signal_raises_q() {
    let cfg = McConfig::new(50_000, 9);
    let q1 = estimate_q(&small_model(1.0), &cfg).unwrap();
    let q2 = estimate_q(&small_model(2.0), &cfg).unwrap();
    assert!((0.0..1.0).contains(&q1.value) && (0.0..1.0).contains(&q2.value));
    assert!(q2.value > q1.value);
}

#[test]
fn report_is_stream_independent_and_smm_dominates() {
    let model = small_model(1.0);
    let base = compare_policies(&model, &McConfig::new(30_000, 1), 0.5).unwrap();
    for k in [2, 3, 8] {
        let r = compare_policies(&model, &McConfig::new(30_000, 1).with_streams(k), 0.5).unwrap();
        assert_eq!(r, base, "n_streams = {k}");
    }
    let se = (base.sr_smm.std_error.powi(2) + base.sr_mp.std_error.powi(2)).sqrt();
    assert!(base.sr_smm.value >= base.sr_mp.value - 3.0 * se);
    assert!(base.delta_sr.value >= 0.0);
}

#[test]
fn closed_form_weights_match_moment_pair_route() {
    let model = small_model(1.0);
    for f in [[0.0, 0.0], [1.0, -2.0], [3.0, 0.5]] {
        let f = DVector::from_column_slice(&f);
        let a = lcem_conditional_weights(&model, &f, 1.7).unwrap();
        let b = lcem_weights_via_moments(&model, &f, 1.7).unwrap();
        assert!((&a - &b).amax() <= 1e-12 * (1.0 + b.amax()));
    }
}
