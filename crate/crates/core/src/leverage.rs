//! Leverage overlay for an existing strategy.
//!
//! Given per-period leverage `x_t` and strategy returns `z_t`, the unit-levered
//! returns are `y_t = z_t / x_t`. The leverage that maximizes the quadratic
//! objective is proportional to `E[y | x] / E[y² | x]`; both conditional
//! moments are estimated with Nadaraya-Watson regression on `x`. A strategy
//! already levering optimally traces a straight line through the origin.
//! The curve is reported up to that unknown positive constant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SmmError};

/// Total kernel weight below this leaves a grid point without an estimate.
pub const MIN_KERNEL_MASS: f64 = 1e-300;

/// Default number of grid points.
pub const DEFAULT_GRID_SIZE: usize = 101;

/// Default floor on the second moment, relative to its largest estimate.
pub const DEFAULT_RELATIVE_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct LeverageSample {
    leverage: Vec<f64>,
    returns: Vec<f64>,
    unit_returns: Vec<f64>,
}

impl LeverageSample {
    pub fn new(leverage: Vec<f64>, returns: Vec<f64>) -> Result<Self> {
        if leverage.len() != returns.len() {
            return Err(SmmError::DimensionMismatch {
                what: "returns".into(),
                expected: leverage.len(),
                found: returns.len(),
            });
        }
        if leverage.len() < 2 {
            return Err(SmmError::InvalidInput(
                "leverage sample needs at least two observations".into(),
            ));
        }
        for (t, (&x, &z)) in leverage.iter().zip(&returns).enumerate() {
            if !(x > 0.0 && x.is_finite()) {
                return Err(SmmError::InvalidInput(format!(
                    "row {t}: leverage {x} must be positive and finite"
                )));
            }
            if !z.is_finite() {
                return Err(SmmError::InvalidInput(format!("row {t}: return is not finite")));
            }
        }
        let unit_returns = leverage.iter().zip(&returns).map(|(x, z)| z / x).collect();
        Ok(LeverageSample {
            leverage,
            returns,
            unit_returns,
        })
    }

    pub fn len(&self) -> usize {
        self.leverage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leverage.is_empty()
    }

    pub fn leverage(&self) -> &[f64] {
        &self.leverage
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    pub fn unit_returns(&self) -> &[f64] {
        &self.unit_returns
    }
}

fn gaussian(u: f64) -> f64 {
    (-0.5 * u * u).exp()
}

fn check_regression_inputs(xs: &[f64], ys: &[f64], bandwidth: f64) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(SmmError::DimensionMismatch {
            what: "regression responses".into(),
            expected: xs.len(),
            found: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(SmmError::InvalidInput("kernel regression needs at least two points".into()));
    }
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(SmmError::InvalidInput(format!(
            "bandwidth must be positive, got {bandwidth}"
        )));
    }
    Ok(())
}

/// Nadaraya-Watson estimate with a Gaussian kernel at a single point.
pub fn kernel_regress_at(xs: &[f64], ys: &[f64], at: f64, bandwidth: f64) -> Result<f64> {
    check_regression_inputs(xs, ys, bandwidth)?;
    nw_point(xs, ys, at, bandwidth)
}

fn nw_point(xs: &[f64], ys: &[f64], at: f64, bandwidth: f64) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let k = gaussian((at - x) / bandwidth);
        num += k * y;
        den += k;
    }
    if den < MIN_KERNEL_MASS {
        return Err(SmmError::EmptyWindow(at));
    }
    Ok(num / den)
}

/// Nadaraya-Watson estimates on `grid`; `None` where the kernel mass vanishes.
pub fn kernel_regress(xs: &[f64], ys: &[f64], grid: &[f64], bandwidth: f64) -> Result<Vec<Option<f64>>> {
    check_regression_inputs(xs, ys, bandwidth)?;
    Ok(grid
        .iter()
        .map(|&g| nw_point(xs, ys, g, bandwidth).ok())
        .collect())
}

/// Silverman's rule of thumb, `1.06 · sd(x) · T^(−1/5)`.
pub fn silverman_bandwidth(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    1.06 * var.sqrt() * n.powf(-0.2)
}

/// `size` equally spaced points from `min(xs)` to `max(xs)`.
pub fn default_grid(xs: &[f64], size: usize) -> Vec<f64> {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    match size {
        0 => vec![],
        1 => vec![0.5 * (lo + hi)],
        _ => (0..size)
            .map(|i| lo + (hi - lo) * i as f64 / (size - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeverageCurve {
    pub grid: Vec<f64>,
    pub m_hat: Vec<f64>,
    /// Floored second-moment estimate.
    pub s_hat: Vec<f64>,
    /// Second-moment estimate before flooring.
    pub s_raw: Vec<f64>,
    /// `m_hat / s_hat`, optimal leverage up to a positive constant.
    pub lever_hat: Vec<f64>,
    pub bandwidth: f64,
    pub floor: f64,
}

impl LeverageCurve {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}

/// Conditional mean and floored second moment of unit-levered returns on
/// `grid`. Grid points with no kernel mass are omitted.
pub fn leverage_curve(sample: &LeverageSample, grid: &[f64], bandwidth: f64, floor: f64) -> Result<LeverageCurve> {
    if !(floor > 0.0 && floor.is_finite()) {
        return Err(SmmError::InvalidInput(format!("floor must be positive, got {floor}")));
    }
    let (m, s) = raw_moments(sample, grid, bandwidth)?;
    Ok(assemble(grid, &m, &s, bandwidth, floor))
}

/// Kernel estimates of `E[y|x]` and `E[y²|x]`, `None` where no data reaches.
type RawMoments = (Vec<Option<f64>>, Vec<Option<f64>>);

fn raw_moments(
    sample: &LeverageSample,
    grid: &[f64],
    bandwidth: f64,
) -> Result<RawMoments> {
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(SmmError::InvalidInput("grid must be strictly increasing".into()));
    }
    let y = sample.unit_returns();
    let y2: Vec<f64> = y.iter().map(|v| v * v).collect();
    let m = kernel_regress(sample.leverage(), y, grid, bandwidth)?;
    let s = kernel_regress(sample.leverage(), &y2, grid, bandwidth)?;
    Ok((m, s))
}

fn assemble(grid: &[f64], m: &[Option<f64>], s: &[Option<f64>], bandwidth: f64, floor: f64) -> LeverageCurve {
    let mut curve = LeverageCurve {
        grid: vec![],
        m_hat: vec![],
        s_hat: vec![],
        s_raw: vec![],
        lever_hat: vec![],
        bandwidth,
        floor,
    };
    for ((&g, mi), si) in grid.iter().zip(m).zip(s) {
        if let (Some(mi), Some(si)) = (mi, si) {
            let sf = si.max(floor);
            curve.grid.push(g);
            curve.m_hat.push(*mi);
            curve.s_raw.push(*si);
            curve.s_hat.push(sf);
            curve.lever_hat.push(mi / sf);
        }
    }
    curve
}

/// Optional overrides for [`audit`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuditOptions {
    pub bandwidth: Option<f64>,
    pub grid_size: Option<usize>,
    pub floor: Option<f64>,
}

/// [`leverage_curve`] with default bandwidth, grid and floor where not given.
pub fn audit(sample: &LeverageSample, opts: &AuditOptions) -> Result<LeverageCurve> {
    let bandwidth = match opts.bandwidth {
        Some(h) => h,
        None => silverman_bandwidth(sample.leverage()),
    };
    if !(bandwidth > 0.0) {
        return Err(SmmError::InvalidInput(format!(
            "bandwidth {bandwidth} is not positive (constant leverage?)"
        )));
    }
    let grid = default_grid(sample.leverage(), opts.grid_size.unwrap_or(DEFAULT_GRID_SIZE));
    let (m, s) = raw_moments(sample, &grid, bandwidth)?;
    let floor = match opts.floor {
        Some(f) => f,
        None => {
            let max_s = s.iter().flatten().copied().fold(0.0_f64, f64::max);
            (DEFAULT_RELATIVE_FLOOR * max_s).max(f64::MIN_POSITIVE)
        }
    };
    if !(floor > 0.0 && floor.is_finite()) {
        return Err(SmmError::InvalidInput(format!("floor must be positive, got {floor}")));
    }
    Ok(assemble(&grid, &m, &s, bandwidth, floor))
}

/// Synthetic strategy with known optimal leverage: leverage `x_t ~ U(lo, hi)`
/// and unit-levered returns `y_t | x_t ~ N(a·x_t, σ²)`, so
/// `E[y|x] / E[y²|x] = a x / (σ² + a²x²) ≈ (a/σ²) x` when `σ² ≫ (a x)²`.
pub fn synthetic_sample(a: f64, sigma: f64, lo: f64, hi: f64, t: usize, seed: u64) -> Result<LeverageSample> {
    if !(sigma > 0.0) || !(lo > 0.0 && hi > lo) {
        return Err(SmmError::InvalidInput(
            "synthetic sample needs sigma > 0 and 0 < lo < hi".into(),
        ));
    }
    let noise = Normal::new(0.0, sigma).map_err(|e| SmmError::InvalidInput(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::with_capacity(t);
    let mut z = Vec::with_capacity(t);
    for _ in 0..t {
        let xt: f64 = rng.random_range(lo..hi);
        let yt = a * xt + noise.sample(&mut rng);
        x.push(xt);
        z.push(yt * xt);
    }
    LeverageSample::new(x, z)
}

/// Least-squares slope through the origin of `lever_hat` against the grid,
/// over the central `1 − 2·trim` fraction of grid points.
pub fn slope_through_origin(curve: &LeverageCurve, trim: f64) -> f64 {
    let n = curve.len();
    let cut = (n as f64 * trim).floor() as usize;
    let (mut num, mut den) = (0.0, 0.0);
    for i in cut..n.saturating_sub(cut) {
        num += curve.grid[i] * curve.lever_hat[i];
        den += curve.grid[i] * curve.grid[i];
    }
    num / den
}
