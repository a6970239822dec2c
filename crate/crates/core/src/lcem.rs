//! Linear conditional expectation model: `μ(f) = B f` with constant residual
//! covariance `Σ`, so `A(f) = Σ + (Bf)(Bf)ᵀ`, and Gaussian features
//! `f ~ N(m, F)`.
//!
//! Everything the policies need conditional on `f` depends only on
//! `s(f) = (Bf)ᵀΣ⁻¹(Bf)`:
//!
//! * unit second-moment policy `A⁻¹Bf`: mean and second moment `s/(1+s)`,
//! * unit Markowitz policy `Σ⁻¹Bf`: mean `s`, second moment `s + s²`.
//!
//! Monte Carlo therefore runs over `f` only; returns are integrated out
//! analytically.
//!
//! Samples are drawn in fixed chunks of [`CHUNK`]; chunk `c` uses its own
//! ChaCha stream `c` under the user seed. A worker stream owns a contiguous
//! range of chunks and partial sums are reduced in chunk order, so estimates
//! are bit-identical for any number of worker streams.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SmmError};
use crate::linalg::{symmetrize, SpdFactor};
use crate::moments::{smm_direction, MomentPair};

/// Samples per RNG chunk.
pub const CHUNK: usize = 4096;

#[derive(Debug, Clone)]
pub struct LcemModel {
    b: DMatrix<f64>,
    sigma: DMatrix<f64>,
    sigma_factor: SpdFactor,
    feature_mean: DVector<f64>,
    feature_cov: DMatrix<f64>,
    /// `G` with `G Gᵀ = F`; features are sampled as `m + G z`.
    feature_root: DMatrix<f64>,
    /// `L⁻¹B` where `Σ = L Lᵀ`, so that `s(f) = ‖L⁻¹B f‖²`.
    whitened_b: DMatrix<f64>,
}

impl LcemModel {
    pub fn new(
        b: DMatrix<f64>,
        sigma: DMatrix<f64>,
        feature_mean: DVector<f64>,
        feature_cov: DMatrix<f64>,
    ) -> Result<Self> {
        let (n, k) = b.shape();
        if n == 0 || k == 0 {
            return Err(SmmError::InvalidInput("B must be non-empty".into()));
        }
        if sigma.shape() != (n, n) {
            return Err(SmmError::DimensionMismatch {
                what: "sigma".into(),
                expected: n,
                found: sigma.nrows(),
            });
        }
        if feature_mean.len() != k {
            return Err(SmmError::DimensionMismatch {
                what: "feature_mean".into(),
                expected: k,
                found: feature_mean.len(),
            });
        }
        if feature_cov.shape() != (k, k) {
            return Err(SmmError::DimensionMismatch {
                what: "feature_cov".into(),
                expected: k,
                found: feature_cov.nrows(),
            });
        }
        let all = b
            .iter()
            .chain(sigma.iter())
            .chain(feature_mean.iter())
            .chain(feature_cov.iter());
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(SmmError::InvalidInput("non-finite model entry".into()));
        }
        let (sigma, _) = symmetrize(&sigma);
        let (feature_cov, _) = symmetrize(&feature_cov);
        let sigma_factor = SpdFactor::new(&sigma, "sigma")?;
        let feature_root = psd_root(&feature_cov)?;
        let mut whitened_b = DMatrix::zeros(n, k);
        for j in 0..k {
            let col = sigma_factor.forward(&b.column(j).into_owned());
            whitened_b.set_column(j, &col);
        }
        Ok(LcemModel {
            b,
            sigma,
            sigma_factor,
            feature_mean,
            feature_cov,
            feature_root,
            whitened_b,
        })
    }

    pub fn n_assets(&self) -> usize {
        self.b.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.b.ncols()
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn feature_mean(&self) -> &DVector<f64> {
        &self.feature_mean
    }

    pub fn feature_cov(&self) -> &DMatrix<f64> {
        &self.feature_cov
    }

    /// Conditional moments at feature value `f`.
    pub fn moments_at(&self, f: &DVector<f64>) -> Result<MomentPair> {
        MomentPair::from_covariance(&self.b * f, self.sigma.clone())
    }

    /// `s(f) = (Bf)ᵀΣ⁻¹(Bf)`.
    pub fn sharpe_sq_at(&self, f: &DVector<f64>) -> f64 {
        (&self.whitened_b * f).norm_squared()
    }
}

/// Square root of a positive semidefinite matrix via its eigendecomposition.
fn psd_root(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = cov.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let mut root = eig.eigenvectors.clone();
    for (j, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam < -1e-10 * max.max(1e-300) {
            return Err(SmmError::NotPositiveDefinite {
                what: "feature_cov (not positive semidefinite)".into(),
                index: j,
                pivot: lam,
            });
        }
        let scale = lam.max(0.0).sqrt();
        root.column_mut(j).scale_mut(scale);
    }
    Ok(root)
}

/// `scale · Σ⁻¹Bf / (1 + (Bf)ᵀΣ⁻¹(Bf))`.
pub fn lcem_conditional_weights(model: &LcemModel, f: &DVector<f64>, scale: f64) -> Result<DVector<f64>> {
    if f.len() != model.n_features() {
        return Err(SmmError::DimensionMismatch {
            what: "feature vector".into(),
            expected: model.n_features(),
            found: f.len(),
        });
    }
    let mu = &model.b * f;
    let s = model.sharpe_sq_at(f);
    Ok(model.sigma_factor.solve(&mu) * (scale / (1.0 + s)))
}

/// Same weights computed through a [`MomentPair`] and its `A⁻¹μ` solve.
pub fn lcem_weights_via_moments(model: &LcemModel, f: &DVector<f64>, scale: f64) -> Result<DVector<f64>> {
    Ok(smm_direction(&model.moments_at(f)?) * scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub n_streams: usize,
}

impl McConfig {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        McConfig {
            n_samples,
            seed,
            n_streams: 1,
        }
    }

    pub fn with_streams(mut self, n_streams: usize) -> Self {
        self.n_streams = n_streams;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(SmmError::InvalidInput("n_samples must be at least 1".into()));
        }
        if self.n_streams == 0 {
            return Err(SmmError::InvalidInput("n_streams must be at least 1".into()));
        }
        Ok(())
    }

    pub fn n_chunks(&self) -> usize {
        self.n_samples.div_ceil(CHUNK)
    }

    /// Chunk range owned by worker stream `s`.
    pub fn stream_chunks(&self, s: usize) -> std::ops::Range<usize> {
        let nc = self.n_chunks();
        (s * nc / self.n_streams)..((s + 1) * nc / self.n_streams)
    }

    fn chunk_len(&self, c: usize) -> usize {
        CHUNK.min(self.n_samples - c * CHUNK)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n: usize,
}

/// Shift applied before accumulating power sums, so that variances are
/// formed from small deviations rather than differences of large raw moments.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Shift {
    h: f64,
    s: f64,
}

impl Shift {
    /// Values at the feature mean; identical for every chunk.
    fn at_mean(model: &LcemModel) -> Self {
        let s = model.sharpe_sq_at(&model.feature_mean);
        Shift { h: s / (1.0 + s), s }
    }
}

/// Shifted power sums of `x = (h, s, s²)` with `h = s/(1+s)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Sums {
    n: usize,
    /// First powers of the deviations.
    d: [f64; 3],
    /// Cross products of the deviations.
    dd: [[f64; 3]; 3],
    /// Third and fourth powers of the `h` deviation.
    h3: f64,
    h4: f64,
}

impl Sums {
    fn push(&mut self, shift: &Shift, s: f64) {
        let h = s / (1.0 + s);
        let x = [h - shift.h, s - shift.s, s * s - shift.s * shift.s];
        self.n += 1;
        for i in 0..3 {
            self.d[i] += x[i];
            for j in 0..3 {
                self.dd[i][j] += x[i] * x[j];
            }
        }
        let h2 = x[0] * x[0];
        self.h3 += h2 * x[0];
        self.h4 += h2 * h2;
    }

    fn merge(&mut self, o: &Sums) {
        self.n += o.n;
        for i in 0..3 {
            self.d[i] += o.d[i];
            for j in 0..3 {
                self.dd[i][j] += o.dd[i][j];
            }
        }
        self.h3 += o.h3;
        self.h4 += o.h4;
    }
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Draws the features of chunk `c` and feeds each through `visit`.
fn for_each_feature(model: &LcemModel, cfg: &McConfig, c: usize, mut visit: impl FnMut(&[f64], &mut ChaCha8Rng)) {
    let k = model.n_features();
    let mut rng = chunk_rng(cfg.seed, c);
    let mut z = vec![0.0; k];
    let mut f = vec![0.0; k];
    let root = &model.feature_root;
    let mean = &model.feature_mean;
    for _ in 0..cfg.chunk_len(c) {
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(&mut rng);
        }
        for i in 0..k {
            let mut acc = mean[i];
            for j in 0..k {
                acc += root[(i, j)] * z[j];
            }
            f[i] = acc;
        }
        visit(&f, &mut rng);
    }
}

fn chunk_sums(model: &LcemModel, cfg: &McConfig, c: usize) -> Sums {
    let (n, k) = model.whitened_b.shape();
    let wb = &model.whitened_b;
    let shift = Shift::at_mean(model);
    let mut sums = Sums::default();
    for_each_feature(model, cfg, c, |f, _| {
        let mut s = 0.0;
        for i in 0..n {
            let mut y = 0.0;
            for j in 0..k {
                y += wb[(i, j)] * f[j];
            }
            s += y * y;
        }
        sums.push(&shift, s);
    });
    sums
}

/// Runs every chunk, spreading contiguous chunk ranges across worker streams,
/// and returns per-chunk results in chunk order.
fn run_chunks<T: Send>(cfg: &McConfig, work: impl Fn(usize) -> T + Sync) -> Vec<T> {
    if cfg.n_streams == 1 {
        return (0..cfg.n_chunks()).map(&work).collect();
    }
    let work = &work;
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..cfg.n_streams)
            .map(|s| {
                let range = cfg.stream_chunks(s);
                scope.spawn(move || range.map(work).collect::<Vec<T>>())
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("monte carlo worker panicked"))
            .collect()
    })
}

fn collect_sums(model: &LcemModel, cfg: &McConfig) -> Result<Moments3> {
    cfg.validate()?;
    let parts = run_chunks(cfg, |c| chunk_sums(model, cfg, c));
    let mut total = Sums::default();
    for p in &parts {
        total.merge(p);
    }
    Ok(Moments3::from_sums(&total, &Shift::at_mean(model)))
}

/// Sample mean and covariance of `(h, s, s²)`.
struct Moments3 {
    n: usize,
    mean: [f64; 3],
    /// Unbiased sample covariance.
    cov: [[f64; 3]; 3],
    /// Biased central fourth moment of `h`.
    h_central4: f64,
}

impl Moments3 {
    fn from_sums(t: &Sums, shift: &Shift) -> Self {
        let n = t.n as f64;
        let dm = [t.d[0] / n, t.d[1] / n, t.d[2] / n];
        let base = [shift.h, shift.s, shift.s * shift.s];
        let mean = [base[0] + dm[0], base[1] + dm[1], base[2] + dm[2]];
        let bessel = if t.n > 1 { n / (n - 1.0) } else { 0.0 };
        let mut cov = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                cov[i][j] = (t.dd[i][j] / n - dm[i] * dm[j]) * bessel;
            }
            cov[i][i] = cov[i][i].max(0.0);
        }
        let (m1, m2, m3, m4) = (dm[0], t.dd[0][0] / n, t.h3 / n, t.h4 / n);
        let h_central4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1.powi(4);
        Moments3 {
            n: t.n,
            mean,
            cov,
            h_central4,
        }
    }

    fn delta_se(&self, grad: [f64; 3]) -> f64 {
        let mut v = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                v += grad[i] * self.cov[i][j] * grad[j];
            }
        }
        (v.max(0.0) / self.n as f64).sqrt()
    }
}

/// Monte-Carlo estimate of `q = E_f[s/(1+s)]`.
pub fn estimate_q(model: &LcemModel, cfg: &McConfig) -> Result<McEstimate> {
    let m = collect_sums(model, cfg)?;
    Ok(McEstimate {
        value: m.mean[0],
        std_error: (m.cov[0][0] / m.n as f64).sqrt(),
        n: m.n,
    })
}

/// Head-to-head of the second-moment policy and the conditional Markowitz
/// policy, both scaled to unconditional risk `risk_budget`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LcemReport {
    pub q: McEstimate,
    pub sr_smm: McEstimate,
    pub sr_mp: McEstimate,
    pub delta_sr: McEstimate,
    /// Standard deviation of `1/(1 + s(f))`, the ratio between the two policies' conditional scales.
    pub rescale_std: McEstimate,
    /// Scale on `A⁻¹Bf` saturating the risk budget.
    pub scale_smm: f64,
    /// Scale on `Σ⁻¹Bf` saturating the risk budget.
    pub scale_mp: f64,
    pub risk_budget: f64,
}

impl LcemReport {
    /// Aligned-column text rendering.
    pub fn to_text(&self) -> String {
        let mut out = format!("{:<12} {:>24} {:>24} {:>10}\n", "quantity", "value", "std_error", "n");
        for (name, e) in [
            ("q", &self.q),
            ("sr_smm", &self.sr_smm),
            ("sr_mp", &self.sr_mp),
            ("delta_sr", &self.delta_sr),
            ("rescale_std", &self.rescale_std),
        ] {
            out.push_str(&format!(
                "{:<12} {:>24.16e} {:>24.16e} {:>10}\n",
                name, e.value, e.std_error, e.n
            ));
        }
        out.push_str(&format!("{:<12} {:>24.16e}\n", "scale_smm", self.scale_smm));
        out.push_str(&format!("{:<12} {:>24.16e}\n", "scale_mp", self.scale_mp));
        out.push_str(&format!("{:<12} {:>24.16e}\n", "risk_budget", self.risk_budget));
        out
    }
}

pub fn compare_policies(model: &LcemModel, cfg: &McConfig, risk_budget: f64) -> Result<LcemReport> {
    if !(risk_budget > 0.0 && risk_budget.is_finite()) {
        return Err(SmmError::Domain(format!(
            "risk budget must be positive, got {risk_budget}"
        )));
    }
    let m = collect_sums(model, cfg)?;
    let n = m.n;
    let est = |value: f64, std_error: f64| McEstimate { value, std_error, n };

    let q = m.mean[0];
    let q_est = est(q, (m.cov[0][0] / n as f64).sqrt());

    // Standard deviation of 1/(1+s) = 1 − h equals that of h.
    let var_h = m.cov[0][0];
    let sd_h = var_h.sqrt();
    let rescale_se = if sd_h > 0.0 && n > 1 {
        let nf = n as f64;
        let biased_var = var_h * (nf - 1.0) / nf;
        ((m.h_central4 - biased_var * biased_var).max(0.0) / (4.0 * biased_var * nf)).sqrt()
    } else {
        0.0
    };
    let rescale_std = est(sd_h, rescale_se);

    if q <= 0.0 {
        log::warn!("estimated q is zero: no conditional opportunity, both policies are flat");
        let zero = est(0.0, 0.0);
        return Ok(LcemReport {
            q: q_est,
            sr_smm: zero,
            sr_mp: zero,
            delta_sr: zero,
            rescale_std,
            scale_smm: 0.0,
            scale_mp: 0.0,
            risk_budget,
        });
    }
    if q >= 1.0 {
        return Err(SmmError::DegenerateMarket(format!("estimated q = {q} is not below 1")));
    }

    let sr_smm = (q / (1.0 - q)).sqrt();
    let d_smm = 1.0 / (2.0 * q.sqrt() * (1.0 - q).powf(1.5));

    let (m1, m2) = (m.mean[1], m.mean[2]);
    let var_mp = m1 + m2 - m1 * m1;
    if !(var_mp > 0.0) {
        return Err(SmmError::DegenerateMarket("Markowitz policy has zero risk".into()));
    }
    let sr_mp = m1 / var_mp.sqrt();
    let d_mp_m1 = 1.0 / var_mp.sqrt() - m1 * (1.0 - 2.0 * m1) / (2.0 * var_mp.powf(1.5));
    let d_mp_m2 = -m1 / (2.0 * var_mp.powf(1.5));

    Ok(LcemReport {
        q: q_est,
        sr_smm: est(sr_smm, m.delta_se([d_smm, 0.0, 0.0])),
        sr_mp: est(sr_mp, m.delta_se([0.0, d_mp_m1, d_mp_m2])),
        delta_sr: est(sr_smm - sr_mp, m.delta_se([d_smm, -d_mp_m1, -d_mp_m2])),
        rescale_std,
        scale_smm: risk_budget / (q - q * q).sqrt(),
        scale_mp: risk_budget / var_mp.sqrt(),
        risk_budget,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LcemPolicy {
    /// Unit second-moment policy `A(f)⁻¹Bf`.
    Smm,
    /// Unit Markowitz policy `Σ⁻¹Bf`.
    Markowitz,
}

/// Unconditional mean and second moment of a unit policy, averaging the
/// analytic conditional moments over sampled features.
pub fn policy_moments(model: &LcemModel, cfg: &McConfig, policy: LcemPolicy) -> Result<(McEstimate, McEstimate)> {
    let m = collect_sums(model, cfg)?;
    let n = m.n;
    let (mean, second, var_mean, var_second) = match policy {
        LcemPolicy::Smm => (m.mean[0], m.mean[0], m.cov[0][0], m.cov[0][0]),
        // Second moment s + s²: Var = Var(s) + 2 Cov(s, s²) + Var(s²).
        LcemPolicy::Markowitz => (
            m.mean[1],
            m.mean[1] + m.mean[2],
            m.cov[1][1],
            (m.cov[1][1] + 2.0 * m.cov[1][2] + m.cov[2][2]).max(0.0),
        ),
    };
    let nf = n as f64;
    Ok((
        McEstimate { value: mean, std_error: (var_mean / nf).sqrt(), n },
        McEstimate { value: second, std_error: (var_second / nf).sqrt(), n },
    ))
}

/// Realized returns `w(f)ᵀr` of a unit policy with `r ~ N(Bf, Σ)` drawn
/// explicitly. Much noisier than [`policy_moments`]; kept as a cross-check.
pub fn sample_policy_returns(model: &LcemModel, cfg: &McConfig, policy: LcemPolicy) -> Result<Vec<f64>> {
    cfg.validate()?;
    let n = model.n_assets();
    let chol = model.sigma_factor.lower().clone();
    let parts = run_chunks(cfg, |c| {
        let mut out = Vec::with_capacity(cfg.chunk_len(c));
        for_each_feature(model, cfg, c, |f, rng| {
            let f = DVector::from_column_slice(f);
            let mu = &model.b * &f;
            let s = model.sharpe_sq_at(&f);
            let mut w = model.sigma_factor.solve(&mu);
            if policy == LcemPolicy::Smm {
                w /= 1.0 + s;
            }
            let eps = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut *rng));
            let r = &mu + &chol * eps;
            out.push(w.dot(&r));
        });
        out
    });
    Ok(parts.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn small_model() -> LcemModel {
        LcemModel::new(
            DMatrix::from_row_slice(2, 2, &[0.3, -0.1, 0.05, 0.2]),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 0.8]),
            DVector::from_vec(vec![0.5, -0.5]),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 0.6]),
        )
        .unwrap()
    }

    #[test]
    fn weights_simple_cases() {
        let m = LcemModel::new(
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DVector::zeros(1),
            DMatrix::from_element(1, 1, 1.0),
        )
        .unwrap();
        let w = lcem_conditional_weights(&m, &DVector::from_vec(vec![1.0]), 1.0).unwrap();
        assert_relative_eq!(w[0], 0.5, epsilon = 1e-15);
        let z = lcem_conditional_weights(&m, &DVector::zeros(1), 3.0).unwrap();
        assert_eq!(z[0], 0.0);
        assert!(lcem_conditional_weights(&m, &DVector::zeros(2), 1.0).is_err());
    }

    #[test]
    fn zero_b_gives_zero_q() {
        let m = LcemModel::new(
            DMatrix::zeros(2, 3),
            DMatrix::identity(2, 2),
            DVector::from_vec(vec![1.0, 1.0, -2.0]),
            DMatrix::identity(3, 3),
        )
        .unwrap();
        let cfg = McConfig::new(10_000, 7);
        let q = estimate_q(&m, &cfg).unwrap();
        assert_eq!(q.value, 0.0);
        assert_eq!(q.std_error, 0.0);
        let rep = compare_policies(&m, &cfg, 1.0).unwrap();
        assert_eq!(rep.sr_smm.value, 0.0);
        assert_eq!(rep.sr_mp.value, 0.0);
        assert_eq!(rep.delta_sr.value, 0.0);
    }

    #[test]
    fn degenerate_feature_law_is_closed_form() {
        let b = DMatrix::from_row_slice(2, 1, &[0.4, -0.2]);
        let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 0.5]);
        let m = LcemModel::new(b.clone(), sigma.clone(), DVector::from_vec(vec![1.5]), DMatrix::zeros(1, 1)).unwrap();
        let q = estimate_q(&m, &McConfig::new(5000, 1)).unwrap();
        let mu = &b * DVector::from_vec(vec![1.5]);
        let inv = sigma.try_inverse().unwrap();
        let s = mu.dot(&(inv * &mu));
        assert_relative_eq!(q.value, s / (1.0 + s), epsilon = 1e-13);
        assert!(q.std_error < 1e-12);
    }

    #[test]
    fn rejects_bad_models_and_configs() {
        assert!(LcemModel::new(
            DMatrix::zeros(2, 1),
            DMatrix::identity(3, 3),
            DVector::zeros(1),
            DMatrix::identity(1, 1)
        )
        .is_err());
        assert!(LcemModel::new(
            DMatrix::zeros(1, 1),
            DMatrix::from_element(1, 1, -1.0),
            DVector::zeros(1),
            DMatrix::identity(1, 1)
        )
        .is_err());
        assert!(LcemModel::new(
            DMatrix::zeros(1, 1),
            DMatrix::identity(1, 1),
            DVector::zeros(1),
            DMatrix::from_element(1, 1, -1.0)
        )
        .is_err());
        let m = small_model();
        assert!(estimate_q(&m, &McConfig::new(0, 0)).is_err());
        assert!(estimate_q(&m, &McConfig::new(10, 0).with_streams(0)).is_err());
        assert!(compare_policies(&m, &McConfig::new(10, 0), 0.0).is_err());
    }

    #[test]
    fn stream_partition_covers_all_chunks() {
        let cfg = McConfig::new(10 * CHUNK + 17, 0).with_streams(4);
        let mut seen = vec![];
        for s in 0..4 {
            seen.extend(cfg.stream_chunks(s));
        }
        assert_eq!(seen, (0..cfg.n_chunks()).collect::<Vec<_>>());
        let many = McConfig::new(100, 0).with_streams(8);
        let total: usize = (0..8).map(|s| many.stream_chunks(s).len()).sum();
        assert_eq!(total, 1);
    }

    #[test]
    fn streams_do_not_change_estimates() {
        let m = small_model();
        let base = McConfig::new(3 * CHUNK + 5, 11);
        let one = compare_policies(&m, &base, 1.0).unwrap();
        for ns in [2, 3, 7] {
            assert_eq!(compare_policies(&m, &base.with_streams(ns), 1.0).unwrap(), one);
        }
    }

    #[test]
    fn smm_dominates_markowitz_in_population() {
        let m = small_model();
        let rep = compare_policies(&m, &McConfig::new(200_000, 3), 1.0).unwrap();
        assert!(rep.delta_sr.value >= -3.0 * rep.delta_sr.std_error);
        assert!(rep.q.value > 0.0 && rep.q.value < 1.0);
    }

    #[test]
    fn text_report_has_aligned_rows() {
        let rep = compare_policies(&small_model(), &McConfig::new(1000, 0), 1.0).unwrap();
        let txt = rep.to_text();
        assert!(txt.lines().count() == 9);
        assert!(txt.lines().nth(1).unwrap().starts_with("q "));
    }
}
