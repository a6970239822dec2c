//! Conditional moment pairs, the Sherman-Morrison relation between the
//! Markowitz and second-moment portfolios, and Hansen/Sharpe conversions.
//!
//! For a conditional mean `μ` and covariance `Σ`, the second moment matrix is
//! `A = Σ + μμᵀ` and
//!
//! ```text
//! A⁻¹μ = Σ⁻¹μ / (1 + μᵀΣ⁻¹μ)
//! ```
//!
//! so the second-moment portfolio is a down-levered Markowitz portfolio.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SmmError};
use crate::linalg::{max_abs, symmetrize, SpdFactor, ASYMMETRY_WARN};

/// Which matrix the caller supplied when building a [`MomentPair`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentInput {
    Covariance,
    SecondMoment,
}

/// Conditional mean and covariance of asset returns for one feature state.
///
/// Both `Σ` and `A = Σ + μμᵀ` are factored at construction, so every
/// accessor below is infallible.
#[derive(Debug, Clone)]
pub struct MomentPair {
    mu: DVector<f64>,
    sigma: DMatrix<f64>,
    second_moment: DMatrix<f64>,
    supplied: MomentInput,
    sigma_factor: SpdFactor,
    second_factor: SpdFactor,
}

impl MomentPair {
    pub fn from_covariance(mu: DVector<f64>, sigma: DMatrix<f64>) -> Result<Self> {
        let sigma = checked_symmetric(&mu, sigma, "sigma")?;
        let second_moment = &sigma + &mu * mu.transpose();
        Self::build(mu, sigma, second_moment, MomentInput::Covariance)
    }

    pub fn from_second_moment(mu: DVector<f64>, second_moment: DMatrix<f64>) -> Result<Self> {
        let second_moment = checked_symmetric(&mu, second_moment, "second_moment")?;
        let sigma = &second_moment - &mu * mu.transpose();
        Self::build(mu, sigma, second_moment, MomentInput::SecondMoment)
    }

    fn build(
        mu: DVector<f64>,
        sigma: DMatrix<f64>,
        second_moment: DMatrix<f64>,
        supplied: MomentInput,
    ) -> Result<Self> {
        let sigma_factor = SpdFactor::new(&sigma, "sigma")?;
        let second_factor = SpdFactor::new(&second_moment, "second_moment")?;
        Ok(MomentPair {
            mu,
            sigma,
            second_moment,
            supplied,
            sigma_factor,
            second_factor,
        })
    }

    pub fn n_assets(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn second_moment(&self) -> &DMatrix<f64> {
        &self.second_moment
    }

    pub fn supplied(&self) -> MomentInput {
        self.supplied
    }

    /// `A⁻¹ x`.
    pub fn solve_second_moment(&self, x: &DVector<f64>) -> DVector<f64> {
        self.second_factor.solve(x)
    }

    /// `Σ⁻¹ x`.
    pub fn solve_sigma(&self, x: &DVector<f64>) -> DVector<f64> {
        self.sigma_factor.solve(x)
    }

    /// Squared conditional Sharpe ratio `μᵀΣ⁻¹μ`.
    pub fn sharpe_sq(&self) -> f64 {
        self.sigma_factor.inv_quad(&self.mu)
    }
}

fn checked_symmetric(mu: &DVector<f64>, m: DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let n = mu.len();
    if n == 0 {
        return Err(SmmError::InvalidInput("mu must have at least one asset".into()));
    }
    if m.nrows() != n || m.ncols() != n {
        return Err(SmmError::DimensionMismatch {
            what: what.to_string(),
            expected: n,
            found: if m.nrows() != n { m.nrows() } else { m.ncols() },
        });
    }
    if mu.iter().chain(m.iter()).any(|v| !v.is_finite()) {
        return Err(SmmError::InvalidInput(format!("non-finite entry in mu or {what}")));
    }
    let (sym, asym) = symmetrize(&m);
    if asym > ASYMMETRY_WARN * (1.0 + max_abs(&m)) {
        log::warn!("{what} asymmetric by {asym:.3e}; symmetrized");
    }
    Ok(sym)
}

/// The second-moment ("Sherman-Morrison-Markowitz") direction `A⁻¹μ`.
pub fn smm_direction(m: &MomentPair) -> DVector<f64> {
    m.solve_second_moment(&m.mu)
}

/// The Markowitz direction `Σ⁻¹μ`.
pub fn markowitz_direction(m: &MomentPair) -> DVector<f64> {
    m.solve_sigma(&m.mu)
}

/// Conditional squared Hansen ratio `μᵀA⁻¹μ = ζ²/(1+ζ²)`, in `[0, 1)`.
pub fn conditional_q(m: &MomentPair) -> f64 {
    m.second_factor.inv_quad(&m.mu)
}

/// Tangent of arcsin: Hansen ratio to Sharpe ratio.
pub fn tas(h: f64) -> Result<f64> {
    if !(h.abs() < 1.0) {
        return Err(SmmError::Domain(format!("tas requires |h| < 1, got {h}")));
    }
    Ok(h / (1.0 - h * h).sqrt())
}

/// Inverse of [`tas`]: Sharpe ratio to Hansen ratio.
pub fn itas(s: f64) -> f64 {
    if s.is_infinite() {
        return s.signum();
    }
    s / (1.0 + s * s).sqrt()
}

/// What the policy scale is chosen to optimize.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Objective {
    /// Maximize Sharpe with unconditional volatility capped at `risk_budget`.
    SharpeBudget { risk_budget: f64, risk_free: f64 },
    /// Maximize `mean − variance / risk_param`.
    MeanVariance { risk_param: f64 },
    /// Maximize `mean − second_moment / 2`, the quadratic log-wealth approximation.
    Kelly,
}

impl Objective {
    pub fn sharpe(risk_budget: f64, risk_free: f64) -> Result<Self> {
        Objective::SharpeBudget {
            risk_budget,
            risk_free,
        }
        .validated()
    }

    pub fn mean_variance(risk_param: f64) -> Result<Self> {
        Objective::MeanVariance { risk_param }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        match self {
            Objective::SharpeBudget {
                risk_budget,
                risk_free,
            } => {
                if !(risk_budget > 0.0 && risk_budget.is_finite()) {
                    return Err(SmmError::Domain(format!(
                        "risk budget must be positive, got {risk_budget}"
                    )));
                }
                if !(risk_free >= 0.0 && risk_free.is_finite()) {
                    return Err(SmmError::Domain(format!(
                        "risk-free rate must be non-negative, got {risk_free}"
                    )));
                }
            }
            Objective::MeanVariance { risk_param } => {
                if !(risk_param > 0.0 && risk_param.is_finite()) {
                    return Err(SmmError::Domain(format!(
                        "risk parameter must be positive, got {risk_param}"
                    )));
                }
            }
            Objective::Kelly => {}
        }
        Ok(self)
    }

    /// Risk-free rate used when reporting Sharpe ratios.
    pub fn risk_free(&self) -> f64 {
        match self {
            Objective::SharpeBudget { risk_free, .. } => *risk_free,
            _ => 0.0,
        }
    }

    /// Objective value of a policy with the given unconditional moments.
    /// `None` for the Sharpe objective when the policy has zero risk.
    pub fn value(&self, perf: &PerfSummary) -> Option<f64> {
        match self {
            Objective::SharpeBudget { .. } => perf.sharpe,
            Objective::MeanVariance { risk_param } => Some(perf.mean - perf.variance / risk_param),
            Objective::Kelly => Some(perf.mean - 0.5 * perf.second_moment),
        }
    }
}

fn check_q(q: f64) -> Result<()> {
    if !(0.0..1.0).contains(&q) {
        return Err(SmmError::Domain(format!("q must lie in [0, 1), got {q}")));
    }
    Ok(())
}

/// Scale applied to the unit second-moment policy `A⁻¹μ` for the given
/// objective, where `q` is the unconditional squared Hansen ratio of that
/// unit policy (its mean and second moment both equal `q`).
pub fn scaling_constant(q: f64, obj: &Objective) -> Result<f64> {
    check_q(q)?;
    match *obj {
        Objective::SharpeBudget { risk_budget, .. } => {
            if q <= 0.0 {
                return Err(SmmError::DegenerateMarket(
                    "q = 0: no risky opportunity, Sharpe scale undefined".into(),
                ));
            }
            Ok(risk_budget / (q - q * q).sqrt())
        }
        Objective::MeanVariance { risk_param } => Ok(risk_param / (2.0 * (1.0 - q))),
        Objective::Kelly => Ok(1.0),
    }
}

/// Optimal objective value attained by the scaled second-moment policy.
pub fn optimal_objective_value(q: f64, obj: &Objective) -> Result<f64> {
    check_q(q)?;
    Ok(match *obj {
        Objective::SharpeBudget {
            risk_budget,
            risk_free,
        } => (q / (1.0 - q)).sqrt() - risk_free / risk_budget,
        Objective::MeanVariance { risk_param } => 0.25 * risk_param * q / (1.0 - q),
        Objective::Kelly => 0.5 * q,
    })
}

/// Unconditional performance of a policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerfSummary {
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
    pub risk: f64,
    /// `(mean − rfr) / risk`; `None` when risk is zero and mean ≠ rfr.
    pub sharpe: Option<f64>,
    pub hansen: f64,
}

impl PerfSummary {
    pub fn from_moments(mean: f64, second_moment: f64, rfr: f64) -> Self {
        let second_moment = second_moment.max(0.0);
        let variance = (second_moment - mean * mean).max(0.0);
        let risk = variance.sqrt();
        let sharpe = if risk > 0.0 {
            Some((mean - rfr) / risk)
        } else if mean == rfr {
            Some(0.0)
        } else {
            None
        };
        let hansen = if second_moment > 0.0 {
            (mean / second_moment.sqrt()).clamp(-1.0, 1.0)
        } else {
            0.0
        };
        PerfSummary {
            mean,
            second_moment,
            variance,
            risk,
            sharpe,
            hansen,
        }
    }

    pub fn zero_risk(&self) -> bool {
        self.sharpe.is_none()
    }
}
