#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use smm::discrete::Policy;
use smm::hedging::HedgeConstraint;
use smm::{DiscreteMarket, MomentPair};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| scale * normal(rng))
}

/// `GGᵀ/n + εI` with a random scale, comfortably positive definite.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| normal(rng));
    let scale = rng.random_range(0.1..2.0);
    (&g * g.transpose() / n as f64 + DMatrix::identity(n, n) * 0.2) * scale
}

pub fn random_pair(rng: &mut ChaCha8Rng, n: usize) -> MomentPair {
    let sigma = random_spd(rng, n);
    let mu_scale = rng.random_range(0.05..1.5);
    MomentPair::from_covariance(random_vector(rng, n, mu_scale), sigma).unwrap()
}

pub fn random_probs(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|p| p / total).collect()
}

pub fn random_market(rng: &mut ChaCha8Rng, n_states: usize, n_assets: usize) -> DiscreteMarket {
    let probs = random_probs(rng, n_states);
    DiscreteMarket::new(probs.into_iter().map(|p| (p, random_pair(rng, n_assets))).collect()).unwrap()
}

pub fn random_policy(rng: &mut ChaCha8Rng, n_states: usize, n_assets: usize) -> Policy {
    Policy::new((0..n_states).map(|_| random_vector(rng, n_assets, 1.0)).collect()).unwrap()
}

/// A mix of raw and zero-covariance constraints, fewer than the policy dimension.
pub fn random_constraints(rng: &mut ChaCha8Rng, market: &DiscreteMarket, count: usize) -> Vec<HedgeConstraint> {
    let (k, n) = (market.probs().len(), market.state(0).n_assets());
    (0..count)
        .map(|j| {
            let p = random_policy(rng, k, n);
            if j % 2 == 0 {
                HedgeConstraint::zero_covariance(market, p).unwrap()
            } else {
                HedgeConstraint::raw(market, p).unwrap()
            }
        })
        .collect()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
