//! Markets whose feature takes one of finitely many states.
//!
//! A [`Policy`] holds one weight vector per state. Its unconditional mean and
//! second moment are probability-weighted sums over states,
//! `Σ_s π_s μ_sᵀw_s` and `Σ_s π_s w_sᵀA_s w_s`, accumulated in state order.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SmmError};
use crate::moments::{
    conditional_q, markowitz_direction, scaling_constant, smm_direction, MomentPair, Objective,
    PerfSummary,
};

/// Probabilities must sum to one within this.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// The two q formulas must agree within this.
pub const Q_AGREEMENT_TOL: f64 = 1e-10;

/// Read access to per-state probabilities, means and second moments.
///
/// Implemented by [`DiscreteMarket`] and by empirical laws whose per-state
/// second moments may be singular.
pub trait StateMoments {
    fn n_states(&self) -> usize;
    fn n_assets(&self) -> usize;
    fn prob(&self, s: usize) -> f64;
    fn mean(&self, s: usize) -> &DVector<f64>;
    fn second_moment(&self, s: usize) -> &DMatrix<f64>;
}

#[derive(Debug, Clone)]
pub struct DiscreteMarket {
    probs: Vec<f64>,
    states: Vec<MomentPair>,
    n_assets: usize,
}

impl DiscreteMarket {
    pub fn new(states: Vec<(f64, MomentPair)>) -> Result<Self> {
        if states.is_empty() {
            return Err(SmmError::InvalidMarket("market has no states".into()));
        }
        let n_assets = states[0].1.n_assets();
        let mut total = 0.0;
        for (s, (p, m)) in states.iter().enumerate() {
            if !(*p > 0.0 && *p <= 1.0) {
                return Err(SmmError::InvalidMarket(format!(
                    "state {s}: probability {p} not in (0, 1]"
                )));
            }
            if m.n_assets() != n_assets {
                return Err(SmmError::DimensionMismatch {
                    what: format!("state {s} asset count"),
                    expected: n_assets,
                    found: m.n_assets(),
                });
            }
            total += p;
        }
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(SmmError::InvalidMarket(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        let (probs, states) = states.into_iter().unzip();
        Ok(DiscreteMarket {
            probs,
            states,
            n_assets,
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn states(&self) -> &[MomentPair] {
        &self.states
    }

    pub fn state(&self, s: usize) -> &MomentPair {
        &self.states[s]
    }

    /// Per-state conditional means as a policy-shaped object.
    pub fn means(&self) -> Policy {
        Policy {
            weights: self.states.iter().map(|m| m.mu().clone()).collect(),
        }
    }

    pub fn check_policy(&self, policy: &Policy, what: &str) -> Result<()> {
        if policy.n_states() != self.states.len() {
            return Err(SmmError::DimensionMismatch {
                what: format!("{what} state count"),
                expected: self.states.len(),
                found: policy.n_states(),
            });
        }
        for (s, w) in policy.weights.iter().enumerate() {
            if w.len() != self.n_assets {
                return Err(SmmError::DimensionMismatch {
                    what: format!("{what} state {s} weights"),
                    expected: self.n_assets,
                    found: w.len(),
                });
            }
        }
        Ok(())
    }
}

impl StateMoments for DiscreteMarket {
    fn n_states(&self) -> usize {
        self.states.len()
    }
    fn n_assets(&self) -> usize {
        self.n_assets
    }
    fn prob(&self, s: usize) -> f64 {
        self.probs[s]
    }
    fn mean(&self, s: usize) -> &DVector<f64> {
        self.states[s].mu()
    }
    fn second_moment(&self, s: usize) -> &DMatrix<f64> {
        self.states[s].second_moment()
    }
}

/// One asset-weight vector per market state.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    pub weights: Vec<DVector<f64>>,
}

impl Policy {
    pub fn new(weights: Vec<DVector<f64>>) -> Result<Self> {
        if weights.iter().flat_map(|w| w.iter()).any(|v| !v.is_finite()) {
            return Err(SmmError::InvalidInput("policy has non-finite weights".into()));
        }
        Ok(Policy { weights })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Policy::new(rows.iter().map(|r| DVector::from_column_slice(r)).collect())
    }

    pub fn zeros(n_states: usize, n_assets: usize) -> Self {
        Policy {
            weights: vec![DVector::zeros(n_assets); n_states],
        }
    }

    /// The same weight vector in every state.
    pub fn constant(n_states: usize, w: DVector<f64>) -> Self {
        Policy {
            weights: vec![w; n_states],
        }
    }

    pub fn n_states(&self) -> usize {
        self.weights.len()
    }

    pub fn scaled(&self, c: f64) -> Policy {
        Policy {
            weights: self.weights.iter().map(|w| w * c).collect(),
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.weights.iter().map(|w| w.iter().copied().collect()).collect()
    }
}

/// Unconditional mean and second moment of `policy`.
pub fn policy_moments<M: StateMoments + ?Sized>(market: &M, policy: &Policy) -> (f64, f64) {
    let mut mean = 0.0;
    let mut second = 0.0;
    for (s, w) in policy.weights.iter().enumerate() {
        let p = market.prob(s);
        mean += p * market.mean(s).dot(w);
        second += p * w.dot(&(market.second_moment(s) * w));
    }
    (mean, second)
}

pub fn evaluate(market: &DiscreteMarket, policy: &Policy, rfr: f64) -> Result<PerfSummary> {
    market.check_policy(policy, "policy")?;
    let (mean, second) = policy_moments(market, policy);
    Ok(PerfSummary::from_moments(mean, second, rfr))
}

/// `q = Σ_s π_s μ_sᵀA_s⁻¹μ_s`, cross-checked against
/// `1 − Σ_s π_s / (1 + μ_sᵀΣ_s⁻¹μ_s)`.
pub fn q_of(market: &DiscreteMarket) -> Result<f64> {
    let (direct, via_sigma) = q_both_ways(market);
    if (direct - via_sigma).abs() > Q_AGREEMENT_TOL {
        return Err(SmmError::Internal(format!(
            "q formulas disagree: {direct} vs {via_sigma}"
        )));
    }
    Ok(direct)
}

/// Both q formulas, unchecked.
pub fn q_both_ways(market: &DiscreteMarket) -> (f64, f64) {
    let mut direct = 0.0;
    let mut complement = 0.0;
    for (p, m) in market.probs.iter().zip(&market.states) {
        direct += p * conditional_q(m);
        complement += p / (1.0 + m.sharpe_sq());
    }
    (direct, 1.0 - complement)
}

fn unit_smm_policy(market: &DiscreteMarket) -> Policy {
    Policy {
        weights: market.states.iter().map(smm_direction).collect(),
    }
}

fn unit_markowitz_policy(market: &DiscreteMarket) -> Policy {
    Policy {
        weights: market.states.iter().map(markowitz_direction).collect(),
    }
}

/// Optimal policy: `w_s = c A_s⁻¹μ_s` with `c` from [`scaling_constant`].
pub fn smm_policy(market: &DiscreteMarket, obj: &Objective) -> Result<Policy> {
    let q = q_of(market)?;
    let c = scaling_constant(q, obj)?;
    Ok(unit_smm_policy(market).scaled(c))
}

/// Conditional Markowitz policy `w_s = c Σ_s⁻¹μ_s` with one `c` for all states,
/// chosen to optimize `obj` over that one-parameter family.
pub fn markowitz_policy(market: &DiscreteMarket, obj: &Objective) -> Result<Policy> {
    let unit = unit_markowitz_policy(market);
    let (mean, second) = policy_moments(market, &unit);
    let variance = second - mean * mean;
    if !(mean > 0.0) || !(variance > 0.0) {
        return Err(SmmError::DegenerateMarket(
            "conditional Markowitz policy has no expected return or no risk".into(),
        ));
    }
    let c = match *obj {
        Objective::SharpeBudget { risk_budget, .. } => risk_budget / variance.sqrt(),
        Objective::MeanVariance { risk_param } => risk_param * mean / (2.0 * variance),
        Objective::Kelly => mean / second,
    };
    Ok(unit.scaled(c))
}

/// Collapses the states in `subset` into one state carrying their total
/// probability and the probability-weighted mean and second moment. The
/// merged state takes the position of the smallest index in `subset`.
///
/// Returns the coarser market and `q_merged − q_original` (never positive).
pub fn merge_states(market: &DiscreteMarket, subset: &[usize]) -> Result<(DiscreteMarket, f64)> {
    let n = market.states.len();
    let mut idx = subset.to_vec();
    idx.sort_unstable();
    idx.dedup();
    if idx.len() != subset.len() {
        return Err(SmmError::InvalidSubset("duplicate state index".into()));
    }
    if idx.len() < 2 {
        return Err(SmmError::InvalidSubset(
            "need at least two states to merge".into(),
        ));
    }
    if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
        return Err(SmmError::InvalidSubset(format!(
            "state index {bad} out of range (market has {n} states)"
        )));
    }

    let k = market.n_assets;
    let mut p_total = 0.0;
    let mut mu = DVector::zeros(k);
    let mut second = DMatrix::zeros(k, k);
    for &i in &idx {
        let p = market.probs[i];
        p_total += p;
        mu += market.states[i].mu() * p;
        second += market.states[i].second_moment() * p;
    }
    mu /= p_total;
    second /= p_total;
    let merged = MomentPair::from_second_moment(mu, second)
        .map_err(|e| e.context("merged state"))?;

    let mut states = Vec::with_capacity(n - idx.len() + 1);
    for i in 0..n {
        if i == idx[0] {
            states.push((p_total, merged.clone()));
        } else if !idx.contains(&i) {
            states.push((market.probs[i], market.states[i].clone()));
        }
    }
    let coarse = DiscreteMarket {
        probs: states.iter().map(|(p, _)| *p).collect(),
        states: states.into_iter().map(|(_, m)| m).collect(),
        n_assets: k,
    };
    let delta_q = q_of(&coarse)? - q_of(market)?;
    Ok((coarse, delta_q))
}
