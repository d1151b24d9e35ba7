// SPDX-License-Identifier: Apache-2.0

//! Closed-form means and Chernoff-style probability bounds for the attack,
//! plus an exact binomial oracle used to check them.
//!
//! All logarithms are natural. Bounds are returned raw: a value at or below
//! zero carries no guarantee and is flagged `vacuous`, but is never clamped
//! here so that the delay/bound inversions stay exact.

mod exact;
mod sweep;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::consensus::ForkRule;

pub use exact::{exact_delta_tail, EXACT_MAX_TRIALS};
pub use sweep::{curve_sweep, SweepAxis, SweepPoint};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum AnalysisError {
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
    #[error("this bound needs k = 2, got k = {0}")]
    WrongK(u32),
    #[error("attacker expects {mu_m} blocks; at least one is needed to derive the deviation factor")]
    DegenerateAttacker { mu_m: f64 },
    #[error("the longest-tip probability pi is required")]
    MissingPi,
    #[error("{0} trials per subgraph exceeds the exact oracle limit")]
    TooLarge(u64),
    #[error("epsilon {0} leaves no positive delay bound")]
    InvalidEpsilon(f64),
}

/// Inputs shared by every formula.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    /// Total mining power, hashes per second.
    pub t: f64,
    /// Difficulty, hashes per block.
    pub d: f64,
    /// Attacker share of the mining power.
    pub rho: f64,
    /// Number of subgraphs the correct miners are split into.
    pub k: u32,
    /// Delay, in seconds.
    pub tau: f64,
    pub epsilon: Option<f64>,
    /// Chernoff deviation factor; derived from the means when absent.
    pub delta: Option<f64>,
    /// Probability that a correct miner extends the current longest tip.
    pub pi: Option<f64>,
}

impl BoundInputs {
    pub fn new(t: f64, d: f64, rho: f64, k: u32, tau: f64) -> Self {
        BoundInputs { t, d, rho, k, tau, epsilon: None, delta: None, pi: None }
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        let unit_open = |x: f64| x > 0.0 && x < 1.0;
        if !positive(self.t) {
            return Err(AnalysisError::InvalidInput("t must be positive"));
        }
        if !positive(self.d) {
            return Err(AnalysisError::InvalidInput("d must be positive"));
        }
        if !unit_open(self.rho) {
            return Err(AnalysisError::InvalidInput("rho must lie in (0, 1)"));
        }
        if self.k < 2 {
            return Err(AnalysisError::InvalidInput("k must be at least 2"));
        }
        if !(self.tau >= 0.0) || !self.tau.is_finite() {
            return Err(AnalysisError::InvalidInput("tau must be non-negative"));
        }
        if self.epsilon.is_some_and(|e| !unit_open(e)) {
            return Err(AnalysisError::InvalidInput("epsilon must lie in (0, 1)"));
        }
        if self.delta.is_some_and(|d| !unit_open(d)) {
            return Err(AnalysisError::InvalidInput("delta must lie in (0, 1)"));
        }
        if self.pi.is_some_and(|p| !(p > 0.0 && p <= 1.0)) {
            return Err(AnalysisError::InvalidInput("pi must lie in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Means {
    /// Expected blocks mined by each correct subgraph during the delay.
    pub mu_c: f64,
    /// Expected blocks mined by the attacker during the delay.
    pub mu_m: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Formula {
    /// Two subgraphs, heaviest-subtree rule, deviation 2rho/(1-rho).
    GhostK2,
    /// Two subgraphs, longest-chain rule, main-branch mean.
    NakamotoK2,
    /// k subgraphs, threshold mu_m with derived deviation.
    GeneralKMuM,
    /// k subgraphs, threshold 2 delta mu_c with a supplied deviation.
    GeneralKDelta,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub mu_c: f64,
    pub mu_m: f64,
    /// Deviation factor used for `delta_threshold`.
    pub delta: f64,
    /// 2 delta mu_c.
    pub delta_threshold: f64,
    /// Lower bound on Pr[Delta < 2 delta mu_c].
    pub delta_bound: f64,
    /// Lower bound on Pr[Delta < mu_m]; absent when mu_m <= 1.
    pub mu_m_threshold_bound: Option<f64>,
    pub success_lower_bound: f64,
    pub vacuous: bool,
    pub formula_used: Formula,
}

pub fn expected_means(inputs: &BoundInputs) -> Means {
    let BoundInputs { t, d, rho, k, tau, .. } = *inputs;
    Means { mu_c: (1.0 - rho) * t * tau / (f64::from(k) * d), mu_m: rho * t * tau / d }
}

/// `1 - 4 exp(-4 rho^2 mu_c / (3 (1 - rho)^2))`.
pub fn ghost_bound_from_mean(rho: f64, mu_c: f64) -> f64 {
    let exponent = 4.0 * rho * rho * mu_c / (3.0 * (1.0 - rho) * (1.0 - rho));
    1.0 - 4.0 * libm::exp(-exponent)
}

/// `1 - 2k exp(-delta^2 mu_c / 3)`.
pub fn chernoff_difference_bound(k: u32, delta: f64, mu_c: f64) -> f64 {
    1.0 - 2.0 * f64::from(k) * libm::exp(-delta * delta * mu_c / 3.0)
}

/// Probability that the attacker out-mines the difference between two subgraphs.
pub fn ghost_success_bound(inputs: &BoundInputs) -> Result<f64, AnalysisError> {
    inputs.validate()?;
    if inputs.k != 2 {
        return Err(AnalysisError::WrongK(inputs.k));
    }
    Ok(ghost_bound_from_mean(inputs.rho, expected_means(inputs).mu_c))
}

/// Deviation factor that makes the difference threshold equal `mu_m - 1`.
pub fn derived_delta(means: &Means) -> Option<f64> {
    (means.mu_m > 1.0 && means.mu_c > 0.0).then(|| (means.mu_m - 1.0) / (2.0 * means.mu_c))
}

pub fn general_k_bounds(inputs: &BoundInputs) -> Result<BoundReport, AnalysisError> {
    inputs.validate()?;
    let means = expected_means(inputs);
    let derived = derived_delta(&means);
    let delta = inputs.delta.or(derived).ok_or(AnalysisError::DegenerateAttacker { mu_m: means.mu_m })?;
    let delta_bound = chernoff_difference_bound(inputs.k, delta, means.mu_c);
    let mu_m_threshold_bound = derived.map(|_| {
        let gap = means.mu_m - 1.0;
        1.0 - 2.0 * f64::from(inputs.k) * libm::exp(-gap * gap / (12.0 * means.mu_c))
    });
    let (success_lower_bound, formula_used) = match mu_m_threshold_bound {
        Some(b) if inputs.delta.is_none() => (b, Formula::GeneralKMuM),
        _ => (delta_bound, Formula::GeneralKDelta),
    };
    Ok(BoundReport {
        mu_c: means.mu_c,
        mu_m: means.mu_m,
        delta,
        delta_threshold: 2.0 * delta * means.mu_c,
        delta_bound,
        mu_m_threshold_bound,
        success_lower_bound,
        vacuous: success_lower_bound <= 0.0,
        formula_used,
    })
}

/// Expected main-branch blocks per subgraph when every correct miner extends
/// the longest tip with probability `pi`: `(1 - rho) t tau / (2 d pi)`.
pub fn bitcoin_mean(inputs: &BoundInputs) -> Result<f64, AnalysisError> {
    inputs.validate()?;
    if inputs.k != 2 {
        return Err(AnalysisError::WrongK(inputs.k));
    }
    let pi = inputs.pi.ok_or(AnalysisError::MissingPi)?;
    Ok((1.0 - inputs.rho) * inputs.t * inputs.tau / (2.0 * inputs.d * pi))
}

/// Headline report for a fork rule: the two-subgraph bound when `k = 2`, the
/// general-k bound otherwise.
pub fn success_report(inputs: &BoundInputs, rule: ForkRule) -> Result<BoundReport, AnalysisError> {
    inputs.validate()?;
    if inputs.k != 2 {
        return general_k_bounds(inputs);
    }
    let means = expected_means(inputs);
    let (mu_c, formula_used) = match rule {
        ForkRule::Ghost => (means.mu_c, Formula::GhostK2),
        ForkRule::Nakamoto => (bitcoin_mean(inputs)?, Formula::NakamotoK2),
    };
    let delta = 2.0 * inputs.rho / (1.0 - inputs.rho);
    let bound = ghost_bound_from_mean(inputs.rho, mu_c);
    let mu_m_threshold_bound = derived_delta(&means).map(|_| {
        let gap = means.mu_m - 1.0;
        1.0 - 4.0 * libm::exp(-gap * gap / (12.0 * means.mu_c))
    });
    Ok(BoundReport {
        mu_c,
        mu_m: means.mu_m,
        delta,
        delta_threshold: 2.0 * delta * mu_c,
        delta_bound: bound,
        mu_m_threshold_bound,
        success_lower_bound: bound,
        vacuous: bound <= 0.0,
        formula_used,
    })
}

/// Two-subgraph delay after which the attacker out-mines the difference with
/// probability at least `1 - epsilon`: `(1 - rho) 6 d ln(4/epsilon) / (4 rho^2 t)`.
pub fn ghost_min_delay(rho: f64, t: f64, d: f64, epsilon: f64) -> Result<f64, AnalysisError> {
    if !(epsilon > 0.0 && epsilon <= 4.0) {
        return Err(AnalysisError::InvalidEpsilon(epsilon));
    }
    Ok((1.0 - rho) * 6.0 * d * libm::log(4.0 / epsilon) / (4.0 * rho * rho * t))
}

/// k-subgraph delay `3 k d ln(2k/epsilon) / (delta^2 (1 - rho) t)`.
///
/// Without an explicit `delta`, the deviation `(mu_m - 1)/(2 mu_c)` itself
/// grows with the delay; the returned delay is the unique point where the
/// inequality becomes tight, i.e. the larger root of
/// `a^2 tau^2 - (2a + 4 b^2 C) tau + 1 = 0` with `a = rho t/d`,
/// `b = (1 - rho) t/(k d)` and `C` the constant above.
pub fn general_min_delay(
    k: u32,
    rho: f64,
    t: f64,
    d: f64,
    epsilon: f64,
    delta: Option<f64>,
) -> Result<f64, AnalysisError> {
    let two_k = 2.0 * f64::from(k);
    if !(epsilon > 0.0 && epsilon <= two_k) {
        return Err(AnalysisError::InvalidEpsilon(epsilon));
    }
    let constant = 3.0 * f64::from(k) * d * libm::log(two_k / epsilon) / ((1.0 - rho) * t);
    match delta {
        Some(delta) => Ok(constant / (delta * delta)),
        None => {
            let a = rho * t / d;
            let b = (1.0 - rho) * t / (f64::from(k) * d);
            let lin = 2.0 * a + 4.0 * b * b * constant;
            let disc = lin * lin - 4.0 * a * a;
            Ok((lin + libm::sqrt(disc.max(0.0))) / (2.0 * a * a))
        }
    }
}
