//! Monte Carlo driver: replicate simulate → estimate and aggregate.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimator::{
    asymptotic_variance_auto, estimate_quadratic_functional, estimator_target, finite_sample_variance, risk_bounds,
    theoretical_rate, BandwidthRule, EstimatorConfig, RateSide, Regime,
};
use crate::rng::StreamKey;
use crate::states::{SmoothnessClass, StateModel};
use crate::stats;
use crate::tomography::{simulate_with, IdealSampler, NoiseConfig, SamplerPath};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub state: StateModel,
    pub eta: f64,
    pub n_grid: Vec<u64>,
    pub replicates: usize,
    pub bandwidth_rule: BandwidthRule,
    #[serde(default)]
    pub class: Option<SmoothnessClass>,
    pub seed: u64,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        self.state.validate()?;
        NoiseConfig::new(self.eta)?;
        if self.replicates < 2 {
            return Err(invalid(format!("replicates must be at least 2, got {}", self.replicates)));
        }
        if self.n_grid.is_empty() {
            return Err(invalid("n_grid is empty"));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("n_grid must be strictly increasing"));
        }
        if self.n_grid[0] < 2 {
            return Err(Error::TooFewSamples(self.n_grid[0] as usize));
        }
        if let Some(cls) = &self.class {
            cls.validate()?;
        }
        if self.bandwidth_rule.needs_class() && self.class.is_none() {
            return Err(invalid(format!("rule {} needs a smoothness class", self.bandwidth_rule.name())));
        }
        Ok(())
    }
}

/// Aggregated replicates at one sample size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McRow {
    pub n: u64,
    pub delta: f64,
    pub mean_estimate: f64,
    pub empirical_bias: f64,
    /// Population (1/R) variance, so that `mse = bias² + variance` exactly.
    pub empirical_variance: f64,
    pub empirical_mse: f64,
    pub mse_stderr: f64,
    pub mean_stderr: f64,
    pub theoretical_rate: Option<f64>,
    pub bias_bound_sq: Option<f64>,
    pub var_bound: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub truth: f64,
    pub rows: Vec<McRow>,
}

/// Replicate the estimator at one sample size; replicate `r` uses stream `(seed, grid, r)`.
pub fn replicate_estimates(
    sampler: &IdealSampler,
    eta: f64,
    delta: f64,
    n: u64,
    replicates: usize,
    key: StreamKey,
) -> Result<Vec<f64>> {
    let noise = NoiseConfig::new(eta)?;
    let cfg = EstimatorConfig::new(eta, delta)?;
    (0..replicates)
        .into_par_iter()
        .map(|r| {
            let data = simulate_with(sampler, noise, n as usize, key.replicate(r as u64))?;
            Ok(estimate_quadratic_functional(&data, &cfg)?.d2_hat)
        })
        .collect()
}

/// Summarise replicate estimates against a known truth.
pub fn summarize(n: u64, delta: f64, truth: f64, estimates: &[f64]) -> McRow {
    let r = estimates.len() as f64;
    let mean_estimate = stats::mean(estimates);
    let empirical_variance = stats::population_variance(estimates);
    let empirical_bias = mean_estimate - truth;
    let sq: Vec<f64> = estimates.iter().map(|d| (d - truth) * (d - truth)).collect();
    let empirical_mse = empirical_bias * empirical_bias + empirical_variance;
    McRow {
        n,
        delta,
        mean_estimate,
        empirical_bias,
        empirical_variance,
        empirical_mse,
        mse_stderr: (stats::sample_variance(&sq) / r).sqrt(),
        mean_stderr: (stats::sample_variance(estimates) / r).sqrt(),
        theoretical_rate: None,
        bias_bound_sq: None,
        var_bound: None,
    }
}

pub fn run_mse_experiment(plan: &ExperimentPlan) -> Result<McSummary> {
    plan.validate()?;
    let truth = plan.state.true_purity();
    let sampler = IdealSampler::new(plan.state, SamplerPath::Auto)?;
    let root = StreamKey::new(plan.seed);
    let mut rows = Vec::with_capacity(plan.n_grid.len());
    for (i, &n) in plan.n_grid.iter().enumerate() {
        let delta = plan.bandwidth_rule.resolve(plan.class.as_ref(), plan.eta, n)?;
        let estimates = replicate_estimates(&sampler, plan.eta, delta, n, plan.replicates, root.grid(i as u64))?;
        let mut row = summarize(n, delta, truth, &estimates);
        if let Some(cls) = &plan.class {
            if let Ok(rate) = theoretical_rate(cls, plan.eta, n, RateSide::Upper) {
                row.theoretical_rate = Some(rate);
            }
            if let Ok(b) = risk_bounds(cls, plan.eta, delta, n) {
                row.bias_bound_sq = Some(b.bias_bound_sq);
                row.var_bound = Some(b.var_bound);
            }
        }
        rows.push(row);
    }
    Ok(McSummary { truth, rows })
}

/// Least-squares slope of `ln mse` against `ln n`.
pub fn rate_regression(summary: &McSummary) -> Result<f64> {
    let points: Vec<(f64, f64)> = summary
        .rows
        .iter()
        .filter(|r| r.empirical_mse > 0.0)
        .map(|r| ((r.n as f64).ln(), r.empirical_mse.ln()))
        .collect();
    if points.len() < 3 {
        return Err(Error::InsufficientPoints(points.len()));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
    Ok(stats::ols_slope(&x, &y))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalityReport {
    pub n: u64,
    pub delta: f64,
    pub truth: f64,
    /// Limiting variance used to standardise the residuals.
    pub asymptotic_variance: f64,
    /// Exact `n · Var(d²_n)` at this `n` and `δ`.
    pub finite_n_variance: f64,
    /// Empirical `n · Var` over replicates (unbiased).
    pub empirical_n_variance: f64,
    pub ks_distance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// KS distance after standardising with the exact finite-`n` variance instead.
    pub ks_distance_finite_n: f64,
    pub estimates: Vec<f64>,
    pub residuals: Vec<f64>,
}

/// Standardised residuals `√n (d²_n - d²) / √𝒲` and their distance from N(0, 1).
pub fn run_normality_check(
    state: &StateModel,
    eta: f64,
    n: u64,
    replicates: usize,
    rule: &BandwidthRule,
    class: Option<&SmoothnessClass>,
    seed: u64,
) -> Result<NormalityReport> {
    if replicates < 2 {
        return Err(invalid("normality check needs at least 2 replicates"));
    }
    let delta = rule.resolve(class, eta, n)?;
    if let Some(cls) = class {
        if crate::estimator::regime(cls, eta)? != Regime::R2Parametric {
            return Err(invalid("normality check needs the parametric regime"));
        }
    }
    let w = asymptotic_variance_auto(state, eta)?;
    let truth = estimator_target(state)?;
    let exact = finite_sample_variance(state, eta, delta, n)?;
    let sampler = IdealSampler::new(*state, SamplerPath::Auto)?;
    let estimates = replicate_estimates(&sampler, eta, delta, n, replicates, StreamKey::new(seed))?;
    let root_n = (n as f64).sqrt();
    let residuals: Vec<f64> = estimates.iter().map(|d| root_n * (d - truth) / w.value.sqrt()).collect();
    let exact_sd = exact.variance.sqrt();
    let exact_residuals: Vec<f64> = estimates.iter().map(|d| (d - exact.mean) / exact_sd).collect();
    Ok(NormalityReport {
        n,
        delta,
        truth,
        asymptotic_variance: w.value,
        finite_n_variance: exact.scaled(n),
        empirical_n_variance: n as f64 * stats::sample_variance(&estimates),
        ks_distance: stats::ks_distance_normal(&residuals),
        skewness: stats::skewness(&residuals),
        excess_kurtosis: stats::excess_kurtosis(&residuals),
        ks_distance_finite_n: stats::ks_distance_normal(&exact_residuals),
        estimates,
        residuals,
    })
}

pub const DEFAULT_TAU: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pure,
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    /// `|d2_hat - 1/(2π)| - τ`; negative means inside the pure band.
    pub margin: f64,
}

/// Threshold classifier: pure iff `|d2_hat - 1/(2π)| < τ`.
pub fn purity_classify(d2_hat: f64, tau: f64) -> Result<Classification> {
    if !(tau > 0.0) {
        return Err(invalid(format!("tau must be positive, got {tau}")));
    }
    let distance = (d2_hat - 1.0 / (2.0 * PI)).abs();
    let verdict = if distance < tau { Verdict::Pure } else { Verdict::Mixed };
    Ok(Classification { verdict, margin: distance - tau })
}
