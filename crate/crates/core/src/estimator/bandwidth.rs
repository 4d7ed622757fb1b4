//! Bandwidth rules, theoretical rates and risk bounds.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::states::SmoothnessClass;

/// Convergence regime of the estimator for a given class and efficiency.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    #[serde(rename = "r_lt_2")]
    RLt2,
    R2Slow,
    R2Parametric,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::RLt2 => "r_lt_2",
            Regime::R2Slow => "r2_slow",
            Regime::R2Parametric => "r2_parametric",
        }
    }
}

/// `(1 - η)/(2η)`, the growth rate of the deconvolution weight in frequency.
pub fn noise_rate(eta: f64) -> f64 {
    (1.0 - eta) / (2.0 * eta)
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(invalid(format!("eta must lie in (0, 1), got {eta}")));
    }
    Ok(())
}

/// Sign test of `(1-η)/(2η) - 2α` for `r = 2`.
fn r2_regime(alpha: f64, eta: f64) -> Result<Regime> {
    let c = noise_rate(eta);
    let gap = c - 2.0 * alpha;
    if gap.abs() <= 1e-12 * c.max(2.0 * alpha) {
        Err(Error::DegenerateBoundary)
    } else if gap > 0.0 {
        Ok(Regime::R2Slow)
    } else {
        Ok(Regime::R2Parametric)
    }
}

pub fn regime(cls: &SmoothnessClass, eta: f64) -> Result<Regime> {
    cls.validate()?;
    check_eta(eta)?;
    if cls.r < 2.0 {
        Ok(Regime::RLt2)
    } else {
        r2_regime(cls.alpha, eta)
    }
}

/// `log n - (log log n)²`.
pub fn log_budget(n: u64) -> f64 {
    let ln = (n as f64).ln();
    ln - ln.ln().powi(2)
}

/// Root `δ` of `(1-η)/(2η) δ⁻² + 2α δ⁻ʳ = log n - (log log n)²` for `0 < r < 2`.
pub fn solve_delta_opt(cls: &SmoothnessClass, eta: f64, n: u64) -> Result<f64> {
    cls.validate()?;
    check_eta(eta)?;
    if !(cls.r < 2.0) {
        return Err(invalid("delta_opt requires r < 2"));
    }
    if n < 8 {
        return Err(Error::SampleTooSmall(n));
    }
    let rhs = log_budget(n);
    if rhs <= 0.0 {
        return Err(Error::SampleTooSmall(n));
    }
    let c = noise_rate(eta);
    let lhs = |x: f64| c * x * x + 2.0 * cls.alpha * x.powf(cls.r);

    let mut lo = 1e-6;
    let mut hi = 1.0;
    if lhs(lo) >= rhs {
        return Err(Error::SampleTooSmall(n));
    }
    while lhs(hi) <= rhs {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if lhs(mid) > rhs {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let x = if (lhs(lo) - rhs).abs() <= (lhs(hi) - rhs).abs() { lo } else { hi };
    Ok(1.0 / x)
}

/// Residual `LHS(δ) - RHS` of the bandwidth equation.
pub fn delta_opt_residual(cls: &SmoothnessClass, eta: f64, n: u64, delta: f64) -> f64 {
    noise_rate(eta) / (delta * delta) + 2.0 * cls.alpha / delta.powf(cls.r) - log_budget(n)
}

/// Closed-form bandwidth for `r = 2` and the matching regime.
pub fn delta_star(alpha: f64, eta: f64, n: u64) -> Result<(f64, Regime)> {
    check_eta(eta)?;
    if !(alpha > 0.0) {
        return Err(invalid(format!("alpha must be > 0, got {alpha}")));
    }
    if n < 2 {
        return Err(Error::SampleTooSmall(n));
    }
    let ln = (n as f64).ln();
    match r2_regime(alpha, eta)? {
        Regime::R2Slow => Ok(((ln / (noise_rate(eta) + 2.0 * alpha)).powf(-0.5), Regime::R2Slow)),
        _ => Ok(((eta * ln / (1.0 - eta)).powf(-0.5), Regime::R2Parametric)),
    }
}

/// Which of the two class-free bandwidths to use.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AdaptiveVariant {
    First,
    /// Second rule with constant `A > α₀`.
    Second {
        a: f64,
    },
}

/// Adaptive bandwidths `δ¹_ad`, `δ²_ad`.
pub fn delta_adaptive(variant: AdaptiveVariant, eta: f64, n: u64) -> Result<f64> {
    check_eta(eta)?;
    if n < 2 {
        return Err(Error::SampleTooSmall(n));
    }
    let q = 2.0 * eta * (n as f64).ln() / (1.0 - eta);
    let inner = match variant {
        AdaptiveVariant::First => q - q.sqrt(),
        AdaptiveVariant::Second { a } => {
            if !(a > 0.0) {
                return Err(invalid(format!("adaptive constant A must be > 0, got {a}")));
            }
            q - 4.0 * a * eta / (1.0 - eta) * q.sqrt()
        }
    };
    if inner <= 0.0 {
        return Err(Error::SampleTooSmall(n));
    }
    Ok(inner.powf(-0.5))
}

/// Smallest `k ≥ 1` with `r ≤ 2k/(k+1)`.
pub fn auto_iteration_count(r: f64) -> usize {
    ((r / (2.0 - r) - 1e-9).ceil() as usize).max(1)
}

/// Successive approximations `δ_k = (s_n - (α/a) δ_{k-1}^{-r})^{-1/2}` from `δ₀ = s_n^{-1/2}`.
pub fn delta_iterative(cls: &SmoothnessClass, eta: f64, n: u64, k: Option<usize>) -> Result<f64> {
    cls.validate()?;
    check_eta(eta)?;
    if !(cls.r < 2.0) {
        return Err(invalid("iterative bandwidth requires r < 2"));
    }
    if n < 2 {
        return Err(Error::SampleTooSmall(n));
    }
    let a = (1.0 - eta) / (4.0 * eta);
    let s_n = log_budget(n) / (2.0 * a);
    if s_n <= 0.0 {
        return Err(Error::IterateCollapse { step: 0, inner: s_n });
    }
    let steps = k.unwrap_or_else(|| auto_iteration_count(cls.r));
    let mut delta = s_n.powf(-0.5);
    for step in 1..=steps {
        let inner = s_n - cls.alpha / a * delta.powf(-cls.r);
        if inner <= 0.0 {
            return Err(Error::IterateCollapse { step, inner });
        }
        delta = inner.powf(-0.5);
    }
    Ok(delta)
}

/// Upper- or lower-bound side of the rate in the slow `r = 2` regime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateSide {
    Upper,
    Lower,
}

/// Squared minimax rate `φ_n²` for the class.
pub fn theoretical_rate(cls: &SmoothnessClass, eta: f64, n: u64, side: RateSide) -> Result<f64> {
    match regime(cls, eta)? {
        Regime::RLt2 => {
            let delta = solve_delta_opt(cls, eta, n)?;
            Ok(cls.big_l * cls.big_l * (-4.0 * cls.alpha / delta.powf(cls.r)).exp())
        }
        Regime::R2Slow => {
            let p = -4.0 * cls.alpha / (noise_rate(eta) + 2.0 * cls.alpha);
            let nf = n as f64;
            Ok(match side {
                RateSide::Upper => nf.powf(p),
                RateSide::Lower => (nf * nf.ln()).powf(p),
            })
        }
        Regime::R2Parametric => Ok(1.0 / n as f64),
    }
}

/// Bias and variance bounds at a given bandwidth.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskBounds {
    /// `L² e^{-4α/δ^r}`.
    pub bias_bound_sq: f64,
    pub var_bound: f64,
    /// Pairwise (degenerate) part of the variance bound.
    pub var_pairwise: f64,
    /// Linear part of the variance bound.
    pub var_linear: f64,
    pub regime: Regime,
}

impl RiskBounds {
    pub fn total(&self) -> f64 {
        self.bias_bound_sq + self.var_bound
    }
}

pub fn risk_bounds(cls: &SmoothnessClass, eta: f64, delta: f64, n: u64) -> Result<RiskBounds> {
    let regime = regime(cls, eta)?;
    if !(delta > 0.0) {
        return Err(invalid(format!("bandwidth must be positive, got {delta}")));
    }
    if n < 2 {
        return Err(Error::SampleTooSmall(n));
    }
    let SmoothnessClass { alpha, r, big_l } = *cls;
    let nf = n as f64;
    let c = noise_rate(eta);
    let bias_bound_sq = big_l * big_l * (-4.0 * alpha / delta.powf(r)).exp();
    let var_pairwise =
        (8.0 * eta * eta / (1.0 - eta).powi(2)) / (PI * PI * nf * nf) * ((1.0 - eta) / (eta * delta * delta)).exp();
    let var_linear = match regime {
        Regime::RLt2 => {
            8.0 * big_l / (nf * PI) * (eta / (1.0 - eta)) * (c / (delta * delta) - 2.0 * alpha / delta.powf(r)).exp()
        }
        Regime::R2Slow => {
            8.0 * big_l / (nf * PI) * eta / (1.0 - eta - 4.0 * alpha * eta)
                * ((c - 2.0 * alpha) / (delta * delta)).exp()
        }
        Regime::R2Parametric => 8.0 * eta * big_l / (4.0 * alpha * eta - 1.0 + eta) / nf,
    };
    Ok(RiskBounds { bias_bound_sq, var_bound: var_pairwise + var_linear, var_pairwise, var_linear, regime })
}

/// How the bandwidth is chosen for each sample size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum BandwidthRule {
    Fixed {
        delta: f64,
    },
    DeltaOpt,
    DeltaStar,
    Adaptive1,
    Adaptive2 {
        a: f64,
    },
    Iterative {
        #[serde(default)]
        k: Option<usize>,
    },
}

impl BandwidthRule {
    pub fn name(&self) -> &'static str {
        match self {
            BandwidthRule::Fixed { .. } => "fixed",
            BandwidthRule::DeltaOpt => "delta_opt",
            BandwidthRule::DeltaStar => "delta_star",
            BandwidthRule::Adaptive1 => "adaptive1",
            BandwidthRule::Adaptive2 { .. } => "adaptive2",
            BandwidthRule::Iterative { .. } => "iterative",
        }
    }

    pub fn needs_class(&self) -> bool {
        matches!(self, BandwidthRule::DeltaOpt | BandwidthRule::DeltaStar | BandwidthRule::Iterative { .. })
    }

    /// Bandwidth for sample size `n`.
    pub fn resolve(&self, cls: Option<&SmoothnessClass>, eta: f64, n: u64) -> Result<f64> {
        let need = || cls.ok_or_else(|| invalid(format!("rule '{}' needs a smoothness class", self.name())));
        match *self {
            BandwidthRule::Fixed { delta } => {
                if !(delta > 0.0 && delta.is_finite()) {
                    return Err(invalid(format!("fixed bandwidth must be positive, got {delta}")));
                }
                Ok(delta)
            }
            BandwidthRule::DeltaOpt => {
                let cls = need()?;
                if cls.r >= 2.0 {
                    return Err(invalid("rule delta_opt requires r < 2"));
                }
                solve_delta_opt(cls, eta, n)
            }
            BandwidthRule::DeltaStar => {
                let cls = need()?;
                if cls.r != 2.0 {
                    return Err(invalid("rule delta_star requires r = 2"));
                }
                delta_star(cls.alpha, eta, n).map(|(d, _)| d)
            }
            BandwidthRule::Adaptive1 => delta_adaptive(AdaptiveVariant::First, eta, n),
            BandwidthRule::Adaptive2 { a } => delta_adaptive(AdaptiveVariant::Second { a }, eta, n),
            BandwidthRule::Iterative { k } => delta_iterative(need()?, eta, n, k),
        }
    }
}
