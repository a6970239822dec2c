//! Hedging constraints and optimization over basis portfolios.
//!
//! Constraints require the policy to be orthogonal, in expectation over the
//! states, to given per-state vectors `g_j`:
//! `⟨w, g_j⟩ = Σ_s π_s w_sᵀ g_{j,s} = 0`. The solution has the form
//! `w_s = c A_s⁻¹(μ_s + Σ_j c_j g_{j,s})` where the multipliers solve
//! `M c = b` with `M_ij = ⟨g_i, A⁻¹g_j⟩` and `b_i = −⟨g_i, A⁻¹μ⟩`.
//! The unconstrained optimum then splits as `q = q_g + bᵀM⁻¹b`.

use nalgebra::{DMatrix, DVector};

use crate::discrete::{policy_moments, q_of, DiscreteMarket, Policy, StateMoments};
use crate::error::{Result, SmmError};
use crate::linalg::{condition_estimate, SpdFactor};
use crate::moments::{scaling_constant, Objective, PerfSummary};

/// Constraint systems with a larger condition number are rejected.
pub const MAX_CONSTRAINT_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub enum HedgeKind {
    Raw,
    /// Zero covariance against the per-state portfolio `target`.
    ZeroCovarianceAgainst(Policy),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HedgeConstraint {
    pub g: Policy,
    pub kind: HedgeKind,
}

impl HedgeConstraint {
    pub fn raw(market: &DiscreteMarket, g: Policy) -> Result<Self> {
        market.check_policy(&g, "constraint")?;
        Ok(HedgeConstraint {
            g,
            kind: HedgeKind::Raw,
        })
    }

    /// `g_s = A_s w_s − ⟨w, μ⟩ μ_s`, so that `⟨x, g⟩` is the unconditional
    /// covariance between the returns of `x` and of `target`.
    pub fn zero_covariance(market: &DiscreteMarket, target: Policy) -> Result<Self> {
        market.check_policy(&target, "hedge target")?;
        let (w_mu, _) = policy_moments(market, &target);
        let g = target
            .weights
            .iter()
            .zip(market.states())
            .map(|(w, m)| m.second_moment() * w - m.mu() * w_mu)
            .collect();
        Ok(HedgeConstraint {
            g: Policy { weights: g },
            kind: HedgeKind::ZeroCovarianceAgainst(target),
        })
    }
}

/// `⟨x, y⟩ = Σ_s π_s x_sᵀ y_s`.
pub fn inner_product(x: &Policy, y: &Policy, market: &DiscreteMarket) -> Result<f64> {
    market.check_policy(x, "left operand")?;
    market.check_policy(y, "right operand")?;
    Ok(inner(market, x, y))
}

fn inner<M: StateMoments + ?Sized>(market: &M, x: &Policy, y: &Policy) -> f64 {
    x.weights
        .iter()
        .zip(&y.weights)
        .enumerate()
        .map(|(s, (a, b))| market.prob(s) * a.dot(b))
        .sum()
}

fn solve_per_state(market: &DiscreteMarket, x: &Policy) -> Policy {
    Policy {
        weights: x
            .weights
            .iter()
            .zip(market.states())
            .map(|(v, m)| m.solve_second_moment(v))
            .collect(),
    }
}

#[derive(Debug, Clone)]
pub struct HedgeSolution {
    pub m: DMatrix<f64>,
    pub b: DVector<f64>,
    /// Constraint multipliers `c_j`.
    pub multipliers: DVector<f64>,
    /// Optimal squared Hansen ratio under the constraints.
    pub q_g: f64,
    /// `bᵀM⁻¹b`, the squared Hansen ratio lost to the constraints.
    pub spanned_q: f64,
    /// Unconstrained q of the market.
    pub q: f64,
    /// Overall scale applied to `A⁻¹(μ + Σ c_j g_j)`.
    pub scale: f64,
}

pub fn solve_hedge(
    market: &DiscreteMarket,
    constraints: &[HedgeConstraint],
    obj: &Objective,
) -> Result<(Policy, HedgeSolution)> {
    for (j, h) in constraints.iter().enumerate() {
        market
            .check_policy(&h.g, "constraint")
            .map_err(|e| e.context(&format!("constraint {j}")))?;
    }
    let q = q_of(market)?;
    let mu = market.means();
    let unit = solve_per_state(market, &mu);
    let hedge_dirs: Vec<Policy> = constraints
        .iter()
        .map(|h| solve_per_state(market, &h.g))
        .collect();

    let jn = constraints.len();
    let mut m = DMatrix::zeros(jn, jn);
    let mut b = DVector::zeros(jn);
    for i in 0..jn {
        b[i] = -inner(market, &constraints[i].g, &unit);
        for j in 0..=i {
            let v = 0.5
                * (inner(market, &constraints[i].g, &hedge_dirs[j])
                    + inner(market, &constraints[j].g, &hedge_dirs[i]));
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }

    let multipliers = if jn == 0 {
        DVector::zeros(0)
    } else {
        for (j, h) in constraints.iter().enumerate() {
            if h.g.weights.iter().all(|v| v.iter().all(|x| *x == 0.0)) {
                return Err(SmmError::SingularConstraintSystem {
                    constraint: Some(j),
                    reason: "constraint vector is identically zero".into(),
                });
            }
        }
        let cond = condition_estimate(&m);
        if !(cond <= MAX_CONSTRAINT_CONDITION) {
            return Err(SmmError::SingularConstraintSystem {
                constraint: None,
                reason: format!("condition estimate {cond:.3e} exceeds {MAX_CONSTRAINT_CONDITION:.0e}"),
            });
        }
        let f = SpdFactor::new(&m, "constraint matrix").map_err(|e| {
            SmmError::SingularConstraintSystem {
                constraint: None,
                reason: e.to_string(),
            }
        })?;
        f.solve(&b)
    };
    let spanned_q = b.dot(&multipliers);
    let q_g = (q - spanned_q).max(0.0);

    let mut direction = unit;
    for (cj, h) in multipliers.iter().zip(&hedge_dirs) {
        for (d, v) in direction.weights.iter_mut().zip(&h.weights) {
            *d += v * *cj;
        }
    }
    let scale = scaling_constant(q_g, obj)?;
    let policy = direction.scaled(scale);
    Ok((
        policy,
        HedgeSolution {
            m,
            b,
            multipliers,
            q_g,
            spanned_q,
            q,
            scale,
        },
    ))
}

/// Closed-form multiplier for a single zero-covariance hedge against `target`:
///
/// ```text
/// c₁ = −(⟨w,μ⟩ − ⟨w,μ⟩ q) / (⟨w,Aw⟩ − 2⟨w,μ⟩² + ⟨w,μ⟩² q)
/// ```
pub fn hedging_example_c1(market: &DiscreteMarket, target: &Policy) -> Result<f64> {
    market.check_policy(target, "hedge target")?;
    let q = q_of(market)?;
    let (w_mu, w_aw) = policy_moments(market, target);
    let num = w_mu - w_mu * q;
    let den = w_aw - 2.0 * w_mu * w_mu + w_mu * w_mu * q;
    let scale = w_aw.abs() + 2.0 * w_mu * w_mu + w_mu * w_mu * q;
    if !(den > 1e-12 * scale) {
        return Err(SmmError::SingularConstraintSystem {
            constraint: Some(0),
            reason: format!("hedge denominator {den:.3e} is not positive"),
        });
    }
    Ok(-num / den)
}

/// Result of optimizing over the span of a finite set of basis portfolios.
#[derive(Debug, Clone)]
pub struct BasisOptimum {
    /// Optimal coefficient on each basis function.
    pub coefficients: DVector<f64>,
    /// Basis means `μ̃_i = ⟨μ, basis_i⟩`.
    pub basis_mean: DVector<f64>,
    /// Basis second moments `S̃_ij = ⟨basis_i, A basis_j⟩`.
    pub basis_second_moment: DMatrix<f64>,
    /// `μ̃ᵀS̃⁻¹μ̃`, the optimal squared Hansen ratio over the span.
    pub hansen_sq: f64,
    pub summary: PerfSummary,
}

impl BasisOptimum {
    /// The per-state policy `Σ_i β_i basis_i`.
    pub fn policy(&self, basis: &[Policy]) -> Policy {
        let mut out = Policy::zeros(
            basis.first().map(|b| b.n_states()).unwrap_or(0),
            basis
                .first()
                .and_then(|b| b.weights.first())
                .map(|w| w.len())
                .unwrap_or(0),
        );
        for (beta, f) in self.coefficients.iter().zip(basis) {
            for (o, v) in out.weights.iter_mut().zip(&f.weights) {
                *o += v * *beta;
            }
        }
        out
    }
}

pub fn optimize_basis(
    market: &DiscreteMarket,
    basis: &[Policy],
    obj: &Objective,
) -> Result<BasisOptimum> {
    for (i, f) in basis.iter().enumerate() {
        market
            .check_policy(f, "basis function")
            .map_err(|e| e.context(&format!("basis {i}")))?;
    }
    optimize_basis_on(market, basis, obj)
}

/// Basis optimization against any per-state moment law, including empirical
/// laws whose per-state second moments are singular.
pub fn optimize_basis_on<M: StateMoments + ?Sized>(
    law: &M,
    basis: &[Policy],
    obj: &Objective,
) -> Result<BasisOptimum> {
    let nb = basis.len();
    if nb == 0 {
        return Err(SmmError::SingularBasis("empty basis".into()));
    }
    for (i, f) in basis.iter().enumerate() {
        if f.n_states() != law.n_states()
            || f.weights.iter().any(|w| w.len() != law.n_assets())
        {
            return Err(SmmError::ShapeMismatch(format!(
                "basis {i} does not match the market's states and assets"
            )));
        }
    }
    let mut mu_t = DVector::zeros(nb);
    let mut s_t = DMatrix::zeros(nb, nb);
    let applied: Vec<Vec<DVector<f64>>> = basis
        .iter()
        .map(|f| {
            f.weights
                .iter()
                .enumerate()
                .map(|(s, w)| law.second_moment(s) * w)
                .collect()
        })
        .collect();
    for i in 0..nb {
        mu_t[i] = (0..law.n_states())
            .map(|s| law.prob(s) * law.mean(s).dot(&basis[i].weights[s]))
            .sum();
        for j in 0..=i {
            let v: f64 = (0..law.n_states())
                .map(|s| {
                    0.5 * law.prob(s)
                        * (basis[i].weights[s].dot(&applied[j][s])
                            + basis[j].weights[s].dot(&applied[i][s]))
                })
                .sum();
            s_t[(i, j)] = v;
            s_t[(j, i)] = v;
        }
    }
    classical_optimum(mu_t, s_t, obj)
}

/// Classical single-period optimum given the mean `μ̃` and second moment `S̃`
/// of a set of (pseudo-)assets: `β = c S̃⁻¹μ̃`, which is parallel to `Σ̃⁻¹μ̃`.
pub fn classical_optimum(
    mean: DVector<f64>,
    second_moment: DMatrix<f64>,
    obj: &Objective,
) -> Result<BasisOptimum> {
    let f = SpdFactor::new(&second_moment, "basis second moment")
        .map_err(|e| SmmError::SingularBasis(e.to_string()))?;
    let direction = f.solve(&mean);
    let hansen_sq = f.inv_quad(&mean);
    if hansen_sq >= 1.0 {
        return Err(SmmError::SingularBasis(format!(
            "basis squared Hansen ratio {hansen_sq} is not below 1"
        )));
    }
    let c = scaling_constant(hansen_sq, obj)?;
    let coefficients = direction * c;
    let m = coefficients.dot(&mean);
    let s2 = coefficients.dot(&(&second_moment * &coefficients));
    Ok(BasisOptimum {
        summary: PerfSummary::from_moments(m, s2, obj.risk_free()),
        coefficients,
        basis_mean: mean,
        basis_second_moment: second_moment,
        hansen_sq,
    })
}

/// Pseudo-asset returns `r_t ⊗ f_t`. Column `i·k + j` (zero-based) holds
/// asset `i` times feature `j`.
pub fn flatten_pseudo_assets(
    returns: &DMatrix<f64>,
    features: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let t = returns.nrows();
    if t == 0 || features.nrows() != t {
        return Err(SmmError::ShapeMismatch(format!(
            "returns have {t} rows, features have {}",
            features.nrows()
        )));
    }
    let (n, k) = (returns.ncols(), features.ncols());
    Ok(DMatrix::from_fn(t, n * k, |row, col| {
        returns[(row, col / k)] * features[(row, col % k)]
    }))
}

/// Sample mean and uncentered second moment of the rows of `sample`.
pub fn sample_moments(sample: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let t = sample.nrows() as f64;
    let mean = sample.row_mean().transpose();
    let second = sample.transpose() * sample / t;
    (mean, second)
}

/// Sample observations treated as equally likely states, each with a
/// degenerate (rank-one) second moment `r_t r_tᵀ`.
#[derive(Debug, Clone)]
pub struct EmpiricalLaw {
    means: Vec<DVector<f64>>,
    seconds: Vec<DMatrix<f64>>,
}

impl EmpiricalLaw {
    pub fn from_returns(returns: &DMatrix<f64>) -> Self {
        let means: Vec<DVector<f64>> = returns
            .row_iter()
            .map(|r| r.transpose().into_owned())
            .collect();
        let seconds = means.iter().map(|r| r * r.transpose()).collect();
        EmpiricalLaw { means, seconds }
    }
}

impl StateMoments for EmpiricalLaw {
    fn n_states(&self) -> usize {
        self.means.len()
    }
    fn n_assets(&self) -> usize {
        self.means.first().map(|m| m.len()).unwrap_or(0)
    }
    fn prob(&self, _s: usize) -> f64 {
        1.0 / self.means.len() as f64
    }
    fn mean(&self, s: usize) -> &DVector<f64> {
        &self.means[s]
    }
    fn second_moment(&self, s: usize) -> &DMatrix<f64> {
        &self.seconds[s]
    }
}

/// Basis `w_{ij}(f) = e_i e_jᵀ f` of policies linear in the features, one
/// per (asset, feature) pair in the same order as [`flatten_pseudo_assets`].
pub fn linear_feature_basis(features: &DMatrix<f64>, n_assets: usize) -> Vec<Policy> {
    let k = features.ncols();
    let mut out = Vec::with_capacity(n_assets * k);
    for i in 0..n_assets {
        for j in 0..k {
            let weights = features
                .row_iter()
                .map(|f| {
                    let mut w = DVector::zeros(n_assets);
                    w[i] = f[j];
                    w
                })
                .collect();
            out.push(Policy { weights });
        }
    }
    out
}
