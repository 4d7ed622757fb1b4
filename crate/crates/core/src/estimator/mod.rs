//! Kernel U-statistic estimator of the purity `d² = ∫ W²`.
//!
//! With `a = (1 - η)/2` and truncation `T = 1/(δ√η)` the estimator is
//!
//! ```text
//! d²_n = η / (4π n(n-1)) ∫_{|t|≤T} |t| e^{a t²} (|S(t)|² - n) dt,   S(t) = Σ_k e^{itY_k}
//! ```
//!
//! which equals the pairwise sum `η/(4π n(n-1)) Σ_{k≠ℓ} g(Y_k - Y_ℓ)` with
//! `g(y) = ∫_{|t|≤T} |t| e^{a t²} e^{ity} dt`. The phase integral of the
//! original definition contributes an exact factor `π`.

mod bandwidth;
mod variance;

pub use bandwidth::*;
pub use variance::*;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{adaptive_gk, simpson_weight};
use crate::tomography::HomodyneSample;

/// Largest admissible kernel exponent `a T²`.
pub const MAX_KERNEL_EXPONENT: f64 = 700.0;
/// Sample-size guard of the O(n²) pairwise oracle.
pub const ORACLE_LIMIT: usize = 2000;

/// Node spacing rule for the frequency grid on `[0, T]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DtPolicy {
    /// `Δt = min(0.05, π / (4 (max|Y| + 1)))`.
    #[default]
    Auto,
    /// Fixed target spacing.
    Spacing(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub eta: f64,
    pub delta: f64,
    #[serde(default)]
    pub dt_policy: DtPolicy,
}

impl EstimatorConfig {
    pub fn new(eta: f64, delta: f64) -> Result<Self> {
        let cfg = EstimatorConfig { eta, delta, dt_policy: DtPolicy::Auto };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_dt_policy(mut self, dt_policy: DtPolicy) -> Self {
        self.dt_policy = dt_policy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(invalid(format!("eta must lie in (0, 1), got {}", self.eta)));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(invalid(format!("bandwidth must be positive, got {}", self.delta)));
        }
        if let DtPolicy::Spacing(h) = self.dt_policy {
            if !(h > 0.0 && h.is_finite()) {
                return Err(invalid(format!("grid spacing must be positive, got {h}")));
            }
        }
        let t = self.t_max();
        if !(t.is_finite() && t > 0.0) {
            return Err(invalid("truncation 1/(delta sqrt(eta)) is not finite"));
        }
        Ok(())
    }

    /// Frequency truncation `T = 1/(δ√η)`.
    pub fn t_max(&self) -> f64 {
        1.0 / (self.delta * self.eta.sqrt())
    }

    /// Deconvolution exponent `a = (1 - η)/2`.
    pub fn kernel_rate(&self) -> f64 {
        (1.0 - self.eta) / 2.0
    }

    fn check_overflow(&self) -> Result<()> {
        let exponent = self.kernel_rate() * self.t_max().powi(2);
        if exponent > MAX_KERNEL_EXPONENT {
            return Err(Error::UnstableKernel { exponent });
        }
        Ok(())
    }

    /// Frequency grid for a given sample set.
    pub fn grid(&self, samples: &[HomodyneSample]) -> Result<FrequencyGrid> {
        self.validate()?;
        self.check_overflow()?;
        let target = match self.dt_policy {
            DtPolicy::Auto => {
                let ymax = samples.iter().map(|s| s.y.abs()).fold(0.0, f64::max);
                (PI / (4.0 * (ymax + 1.0))).min(0.05)
            }
            DtPolicy::Spacing(h) => h,
        };
        Ok(FrequencyGrid::new(self.t_max(), target))
    }

    /// `∫_{|t|≤T} η|t| e^{a t²} dt · π / (4π²)`.
    pub fn kernel_mass(&self) -> f64 {
        let a = self.kernel_rate();
        let t = self.t_max();
        self.eta * (a * t * t).exp_m1() / a * PI / (4.0 * PI * PI)
    }
}

/// Uniform Simpson grid on `[0, T]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrequencyGrid {
    pub t_max: f64,
    pub intervals: usize,
}

impl FrequencyGrid {
    /// Even number of intervals with spacing no larger than `target`.
    pub fn new(t_max: f64, target: f64) -> Self {
        let raw = (t_max / target).ceil() as usize;
        let intervals = (raw + raw % 2).max(2);
        FrequencyGrid { t_max, intervals }
    }

    pub fn spacing(&self) -> f64 {
        self.t_max / self.intervals as f64
    }

    pub fn nodes(&self) -> usize {
        self.intervals + 1
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.spacing()
    }

    /// Simpson weight times `h/3` for node `j`.
    pub fn weight(&self, j: usize) -> f64 {
        simpson_weight(j, self.intervals) * self.spacing() / 3.0
    }
}

/// Estimate and quadrature diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub d2_hat: f64,
    pub delta: f64,
    pub t_max: f64,
    pub nodes: usize,
    pub kernel_mass: f64,
    pub n: usize,
}

fn check_samples(samples: &[HomodyneSample]) -> Result<()> {
    if samples.len() < 2 {
        return Err(Error::TooFewSamples(samples.len()));
    }
    if let Some(s) = samples.iter().find(|s| !s.y.is_finite() || !s.phi.is_finite()) {
        return Err(invalid(format!("non-finite sample ({}, {})", s.y, s.phi)));
    }
    Ok(())
}

/// Fast O(n·m) evaluation through the empirical characteristic function.
pub fn estimate_quadratic_functional(samples: &[HomodyneSample], cfg: &EstimatorConfig) -> Result<EstimateResult> {
    check_samples(samples)?;
    let grid = cfg.grid(samples)?;
    let n = samples.len() as f64;
    let a = cfg.kernel_rate();

    // Node values in index order; each node sums samples sequentially, so the
    // result does not depend on the thread count.
    let values: Vec<f64> = (0..grid.nodes())
        .into_par_iter()
        .map(|j| {
            let t = grid.node(j);
            if t == 0.0 {
                return 0.0;
            }
            let (mut re, mut im) = (0.0, 0.0);
            for s in samples {
                let (sn, cs) = (t * s.y).sin_cos();
                re += cs;
                im += sn;
            }
            t * (a * t * t).exp() * (re * re + im * im - n)
        })
        .collect();
    let mut half = 0.0;
    for (j, v) in values.iter().enumerate() {
        half += grid.weight(j) * v;
    }
    let d2_hat = cfg.eta / (4.0 * PI * n * (n - 1.0)) * 2.0 * half;
    Ok(EstimateResult {
        d2_hat,
        delta: cfg.delta,
        t_max: grid.t_max,
        nodes: grid.nodes(),
        kernel_mass: cfg.kernel_mass(),
        n: samples.len(),
    })
}

/// `g(y) = 2 ∫₀^T t e^{a t²} cos(t y) dt` on a fixed Simpson grid.
pub fn kernel_g_on_grid(y: f64, grid: &FrequencyGrid, eta: f64) -> f64 {
    let a = (1.0 - eta) / 2.0;
    let mut acc = 0.0;
    for j in 0..grid.nodes() {
        let t = grid.node(j);
        acc += grid.weight(j) * t * (a * t * t).exp() * (t * y).cos();
    }
    2.0 * acc
}

/// `g(y) = ∫_{|t|≤T} |t| e^{a t²} e^{ity} dt` by adaptive Gauss–Kronrod quadrature.
pub fn kernel_g(y: f64, t_max: f64, eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) || !(t_max > 0.0) || !y.is_finite() {
        return Err(invalid("kernel_g needs eta in (0,1), t_max > 0 and finite y"));
    }
    let a = (1.0 - eta) / 2.0;
    let exponent = a * t_max * t_max;
    if exponent > MAX_KERNEL_EXPONENT {
        return Err(Error::UnstableKernel { exponent });
    }
    let y = y.abs();
    let f = |t: f64| t * (a * t * t).exp() * (t * y).cos();
    // Split into pieces of roughly one oscillation period.
    let pieces = ((t_max * y / (2.0 * PI)).ceil() as usize).max(1);
    let step = t_max / pieces as f64;
    let mut acc = 0.0;
    for p in 0..pieces {
        let lo = p as f64 * step;
        acc += adaptive_gk(f, lo, lo + step, 1e-300, 1e-14);
    }
    Ok(2.0 * acc)
}

/// Literal double sum over ordered pairs, using the fast path's frequency grid.
pub fn estimate_pairwise_oracle(samples: &[HomodyneSample], cfg: &EstimatorConfig) -> Result<f64> {
    check_samples(samples)?;
    if samples.len() > ORACLE_LIMIT {
        return Err(Error::TooManySamples { n: samples.len(), limit: ORACLE_LIMIT });
    }
    let grid = cfg.grid(samples)?;
    pairwise_sum(samples, cfg.eta, |d| kernel_g_on_grid(d, &grid, cfg.eta))
}

/// Pairwise oracle with `g` from adaptive quadrature instead of the grid.
pub fn estimate_pairwise_adaptive(samples: &[HomodyneSample], cfg: &EstimatorConfig) -> Result<f64> {
    check_samples(samples)?;
    if samples.len() > ORACLE_LIMIT {
        return Err(Error::TooManySamples { n: samples.len(), limit: ORACLE_LIMIT });
    }
    cfg.validate()?;
    cfg.check_overflow()?;
    let t_max = cfg.t_max();
    let mut first_err = None;
    let out = pairwise_sum(samples, cfg.eta, |d| match kernel_g(d, t_max, cfg.eta) {
        Ok(v) => v,
        Err(e) => {
            first_err.get_or_insert(e);
            f64::NAN
        }
    })?;
    match first_err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

fn pairwise_sum<G: FnMut(f64) -> f64>(samples: &[HomodyneSample], eta: f64, mut g: G) -> Result<f64> {
    let n = samples.len();
    let mut acc = 0.0;
    for k in 0..n {
        for l in 0..n {
            if k != l {
                acc += PI * eta * g(samples[k].y - samples[l].y);
            }
        }
    }
    Ok(acc / (4.0 * PI * PI * n as f64 * (n as f64 - 1.0)))
}
