//! Exact moments of the estimator for a known state.
//!
//! Everything here is expressed through the phase-averaged characteristic
//! function `ψ(s) = E[e^{isX}]` after the substitution `s = √η t`, which
//! removes the detector noise from the formulas.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bandwidth::noise_rate;
use super::MAX_KERNEL_EXPONENT;
use crate::error::{invalid, Error, Result};
use crate::quadrature::{pow2_at_least, simpson, simpson_weight};
use crate::states::StateModel;

const LATTICE_STEP: f64 = 0.01;

/// `ψ` tabulated on the lattice `-2S + k h`, `k = 0..=2N`, with `h = 2S/N`.
struct PsiLattice {
    half_width: f64,
    intervals: usize,
    values: Vec<Complex64>,
}

impl PsiLattice {
    fn new(state: &StateModel, half_width: f64, intervals: usize) -> Self {
        let h = 2.0 * half_width / intervals as f64;
        let values = (0..=2 * intervals)
            .into_par_iter()
            .map(|k| state.marginal_char_fn(-2.0 * half_width + k as f64 * h))
            .collect();
        PsiLattice { half_width, intervals, values }
    }

    fn step(&self) -> f64 {
        2.0 * self.half_width / self.intervals as f64
    }

    /// Node `i` of the integration axis `[-S, S]`.
    fn axis(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.step()
    }

    /// `ψ` at axis node `i`.
    fn at(&self, i: usize) -> Complex64 {
        self.values[i + self.intervals / 2]
    }

    /// `ψ(s_i + s_j)`.
    fn at_sum(&self, i: usize, j: usize) -> Complex64 {
        self.values[i + j]
    }

    /// `ψ(-(s_i + s_j))`.
    fn at_neg_sum(&self, i: usize, j: usize) -> Complex64 {
        self.values[2 * self.intervals - i - j]
    }

    /// 2-D tensor Simpson of `f(i, j)` over `[-S, S]²`; rows reduced in index order.
    fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(usize, usize) -> f64 + Sync,
    {
        let n = self.intervals;
        let rows: Vec<f64> = (0..=n)
            .into_par_iter()
            .map(|i| {
                let wi = simpson_weight(i, n);
                let mut acc = 0.0;
                for j in 0..=n {
                    acc += wi * simpson_weight(j, n) * f(i, j);
                }
                acc
            })
            .collect();
        let h = self.step();
        rows.iter().sum::<f64>() * (h / 3.0) * (h / 3.0)
    }
}

/// `lim E[d²_n]` at bandwidth `δ`: `(1/2π) ∫₀^{1/δ} s |ψ(s)|² ds`.
///
/// For rotation-invariant states this equals the purity restricted to the
/// frequency ball `‖w‖ ≤ 1/δ`; for other states the phase-blind estimator
/// targets this value instead of `d²`.
pub fn expected_estimate(state: &StateModel, delta: f64) -> Result<f64> {
    state.validate()?;
    if !(delta > 0.0) {
        return Err(invalid(format!("bandwidth must be positive, got {delta}")));
    }
    let radius = (1.0 / delta).min(state.frequency_cutoff(1e-12));
    let nodes = pow2_at_least((radius / 0.002) as usize).max(1024);
    Ok(simpson(|s| s * state.marginal_char_fn(s).norm_sqr(), 0.0, radius, nodes) / (2.0 * PI))
}

/// Value the estimator converges to as `δ → 0`.
pub fn estimator_target(state: &StateModel) -> Result<f64> {
    if state.is_rotation_invariant() {
        return Ok(state.true_purity());
    }
    expected_estimate(state, 1e-3)
}

/// Hoeffding decomposition of the estimator's variance at finite `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteVariance {
    /// `E[d²_n]`.
    pub mean: f64,
    /// Variance of the first-order projection `h₁(Y)`.
    pub zeta1: f64,
    /// Variance of the full kernel `h(Y₁, Y₂)`.
    pub zeta2: f64,
    /// `(4(n-2) ζ₁ + 2 ζ₂) / (n(n-1))`.
    pub variance: f64,
}

impl FiniteVariance {
    /// `n · Var(d²_n)`.
    pub fn scaled(&self, n: u64) -> f64 {
        n as f64 * self.variance
    }

    /// Share of `n · Var` due to the linear (asymptotically normal) term.
    pub fn linear_share(&self, n: u64) -> f64 {
        let nf = n as f64;
        4.0 * (nf - 2.0) * self.zeta1 / (nf * (nf - 1.0)) / self.variance
    }
}

/// Exact variance of `d²_n` for a known state by 2-D quadrature.
pub fn finite_sample_variance(state: &StateModel, eta: f64, delta: f64, n: u64) -> Result<FiniteVariance> {
    state.validate()?;
    if !(eta > 0.0 && eta < 1.0) || !(delta > 0.0) {
        return Err(invalid("finite_sample_variance needs eta in (0,1) and delta > 0"));
    }
    if n < 2 {
        return Err(Error::TooFewSamples(n as usize));
    }
    let c = noise_rate(eta);
    let radius = 1.0 / delta;
    let exponent = 2.0 * c * radius * radius;
    if exponent > MAX_KERNEL_EXPONENT {
        return Err(Error::UnstableKernel { exponent });
    }
    let intervals = pow2_at_least((2.0 * radius / LATTICE_STEP) as usize).max(512);
    let psi = PsiLattice::new(state, radius, intervals);

    let mean = {
        let h = psi.step();
        let half = intervals / 2;
        let mut acc = 0.0;
        for i in 0..=half {
            let s = i as f64 * h;
            acc += simpson_weight(i, half) * s * psi.at(half + i).norm_sqr();
        }
        acc * h / 3.0 / (2.0 * PI)
    };
    let projection_sq = psi.integrate(|i, j| {
        let (s1, s2) = (psi.axis(i), psi.axis(j));
        let z = psi.at(i).conj() * psi.at(j).conj() * psi.at_sum(i, j);
        s1.abs() * s2.abs() * (-c * s1 * s2).exp() * z.re
    }) / (16.0 * PI * PI);
    let kernel_sq = psi.integrate(|i, j| {
        let (s1, s2) = (psi.axis(i), psi.axis(j));
        s1.abs() * s2.abs() * (-2.0 * c * s1 * s2).exp() * psi.at_sum(i, j).norm_sqr()
    }) / (16.0 * PI * PI);

    let zeta1 = projection_sq - mean * mean;
    let zeta2 = kernel_sq - mean * mean;
    let nf = n as f64;
    let variance = (4.0 * (nf - 2.0) * zeta1 + 2.0 * zeta2) / (nf * (nf - 1.0));
    Ok(FiniteVariance { mean, zeta1, zeta2, variance })
}

/// Limiting variance of `√n (d²_n - d²)` in the parametric regime.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticVariance {
    pub value: f64,
    /// `(1/4π²) ∬ |t₁||t₂| e^{c t₁t₂} ψ(t₁)ψ(t₂)ψ(-t₁-t₂) dt₁dt₂`.
    pub cross_moment: f64,
    /// Subtracted term `4 θ²`, `θ` the estimator target (`d²` for rotation-invariant states).
    pub centering: f64,
    pub t_max: f64,
    pub nodes: usize,
    pub subtraction: String,
}

/// Truncation radius where the variance integrand is negligible.
pub fn variance_cutoff(state: &StateModel, eta: f64) -> f64 {
    let c = noise_rate(eta);
    let g = |s: f64| {
        let e = state.envelope(s);
        let diagonal = s * s * e * e * state.envelope(2.0 * s) * (c * s * s).exp();
        diagonal.max(s * e * e)
    };
    let mut s = 0.1;
    let mut peak: f64 = 0.0;
    loop {
        let v = g(s);
        peak = peak.max(v);
        if (v < 1e-14 * peak && g(s + 0.1) <= v) || s > 200.0 {
            return s;
        }
        s += 0.1;
    }
}

pub fn asymptotic_variance(state: &StateModel, eta: f64, t_max: f64, nodes: usize) -> Result<AsymptoticVariance> {
    state.validate()?;
    if !(eta > 0.0 && eta < 1.0) {
        return Err(invalid(format!("eta must lie in (0, 1), got {eta}")));
    }
    if eta <= 0.25 {
        return Err(Error::NonIntegrable { eta });
    }
    if !(t_max > 0.0) || nodes < 16 {
        return Err(invalid("asymptotic_variance needs t_max > 0 and at least 16 nodes"));
    }
    let c = noise_rate(eta);
    let intervals = pow2_at_least(nodes);
    let psi = PsiLattice::new(state, t_max, intervals);
    let integrand = |i: usize, j: usize| {
        let (s1, s2) = (psi.axis(i), psi.axis(j));
        let z = psi.at(i) * psi.at(j) * psi.at_neg_sum(i, j);
        s1.abs() * s2.abs() * (c * s1 * s2).exp() * z.re
    };
    let edge = (0..=intervals).map(|j| integrand(0, j).abs().max(integrand(intervals, j).abs())).fold(0.0, f64::max);
    let peak = (0..=intervals)
        .step_by(4)
        .flat_map(|i| (0..=intervals).step_by(4).map(move |j| (i, j)))
        .map(|(i, j)| integrand(i, j).abs())
        .fold(0.0, f64::max);
    if edge > 1e-10 * peak {
        return Err(Error::TailNotNegligible { t_max, tail: edge / peak });
    }
    let cross_moment = psi.integrate(integrand) / (4.0 * PI * PI);

    let theta = {
        let h = psi.step();
        let half = intervals / 2;
        let mut acc = 0.0;
        for i in 0..=half {
            acc += simpson_weight(i, half) * (i as f64 * h) * psi.at(half + i).norm_sqr();
        }
        acc * h / 3.0 / (2.0 * PI)
    };
    let centering = 4.0 * theta * theta;
    let mut value = cross_moment - centering;
    if value < -1e-6 {
        return Err(Error::NegativeVariance(value));
    }
    if value < 0.0 {
        value = 0.0;
    }
    Ok(AsymptoticVariance {
        value,
        cross_moment,
        centering,
        t_max,
        nodes: intervals + 1,
        subtraction: "4*theta^2 (theta = limit of E[d2_n]; equals 4*d2^2 for rotation-invariant states)".into(),
    })
}

/// [`asymptotic_variance`] with truncation and node count chosen from the state's envelope.
pub fn asymptotic_variance_auto(state: &StateModel, eta: f64) -> Result<AsymptoticVariance> {
    if eta <= 0.25 {
        return Err(Error::NonIntegrable { eta });
    }
    let t_max = variance_cutoff(state, eta);
    let nodes = pow2_at_least((2.0 * t_max / 0.02) as usize).max(512);
    asymptotic_variance(state, eta, t_max, nodes)
}
