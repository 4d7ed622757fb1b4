//! Catalog of quantum states described by the Fourier transforms of their
//! Wigner functions.
//!
//! The Fourier convention is `W̃(u, v) = ∬ W(p, q) e^{i(up + vq)} dp dq`, so
//! `W̃(t cos φ, t sin φ)` is the characteristic function of the quadrature
//! `X` measured at phase `φ`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{periodic_trapezoid, pow2_at_least, simpson};

/// Relative tail level below which a radial integrand is treated as negligible.
pub const TAIL_TOLERANCE: f64 = 1e-12;

const PHI_NODES: usize = 512;
const ENVELOPE_STEP: f64 = 0.05;
const ENVELOPE_LIMIT: f64 = 4000.0;

/// A catalog state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateModel {
    Vacuum,
    SinglePhoton,
    /// Even superposition of coherent states centered at `±x0` on the `p` axis.
    Cat {
        x0: f64,
    },
    /// Coherent state with mean photon number `nbar`.
    Coherent {
        nbar: f64,
    },
    /// Squeezed state with squeezing `xi` and displacement `disp` along `q`.
    Squeezed {
        xi: f64,
        disp: f64,
    },
    /// Thermal state at inverse temperature `beta`.
    Thermal {
        beta: f64,
    },
}

/// Smoothness class `A(alpha, r, L)`: `∬|W̃|² e^{2α‖w‖^r} dw ≤ (2π)² L`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothnessClass {
    pub alpha: f64,
    pub r: f64,
    #[serde(rename = "l")]
    pub big_l: f64,
}

impl SmoothnessClass {
    pub fn new(alpha: f64, r: f64, big_l: f64) -> Result<Self> {
        let cls = SmoothnessClass { alpha, r, big_l };
        cls.validate()?;
        Ok(cls)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if !(self.r > 0.0 && self.r <= 2.0) {
            return Err(invalid(format!("r must lie in (0, 2], got {}", self.r)));
        }
        if !(self.big_l > 0.0 && self.big_l.is_finite()) {
            return Err(invalid(format!("L must be > 0, got {}", self.big_l)));
        }
        Ok(())
    }
}

impl StateModel {
    /// One representative of each catalog entry.
    pub fn catalog() -> [StateModel; 6] {
        [
            StateModel::Vacuum,
            StateModel::SinglePhoton,
            StateModel::Cat { x0: 1.5 },
            StateModel::Coherent { nbar: 4.0 },
            StateModel::Squeezed { xi: 0.3, disp: 1.0 },
            StateModel::Thermal { beta: 1.0 },
        ]
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            StateModel::Vacuum | StateModel::SinglePhoton => Ok(()),
            StateModel::Cat { x0 } if x0 > 0.0 && x0.is_finite() => Ok(()),
            StateModel::Coherent { nbar } if nbar >= 0.0 && nbar.is_finite() => Ok(()),
            StateModel::Squeezed { xi, disp } if xi.is_finite() && disp.is_finite() => Ok(()),
            StateModel::Thermal { beta } if beta > 0.0 && beta.is_finite() => Ok(()),
            s => Err(invalid(format!("state parameters out of range: {s}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            StateModel::Vacuum => "vacuum",
            StateModel::SinglePhoton => "single_photon",
            StateModel::Cat { .. } => "cat",
            StateModel::Coherent { .. } => "coherent",
            StateModel::Squeezed { .. } => "squeezed",
            StateModel::Thermal { .. } => "thermal",
        }
    }

    /// True when `W̃` depends on `(u, v)` only through `‖(u, v)‖`.
    pub fn is_rotation_invariant(&self) -> bool {
        matches!(self, StateModel::Vacuum | StateModel::SinglePhoton | StateModel::Thermal { .. })
            || matches!(self, StateModel::Coherent { nbar } if *nbar == 0.0)
    }

    /// Fourier transform of the Wigner function at `(u, v)`.
    pub fn char_fn(&self, u: f64, v: f64) -> Complex64 {
        let r2 = u * u + v * v;
        match *self {
            StateModel::Vacuum => Complex64::new((-r2 / 4.0).exp(), 0.0),
            StateModel::SinglePhoton => Complex64::new((1.0 - r2 / 2.0) * (-r2 / 4.0).exp(), 0.0),
            StateModel::Cat { x0 } => {
                let overlap = (-x0 * x0).exp();
                // cosh(x0 v) e^{-x0²} folded into the exponent to avoid overflow.
                let e_plus = (-r2 / 4.0 + x0 * v - x0 * x0).exp();
                let e_minus = (-r2 / 4.0 - x0 * v - x0 * x0).exp();
                let peaks = (-r2 / 4.0).exp() * (u * x0).cos();
                Complex64::new((peaks + 0.5 * (e_plus + e_minus)) / (1.0 + overlap), 0.0)
            }
            StateModel::Coherent { nbar } => Complex64::from_polar((-r2 / 4.0).exp(), nbar.sqrt() * v),
            StateModel::Squeezed { xi, disp } => {
                let modulus = (-u * u * (2.0 * xi).exp() / 4.0 - v * v * (-2.0 * xi).exp() / 4.0).exp();
                Complex64::from_polar(modulus, v * disp)
            }
            StateModel::Thermal { beta } => Complex64::new((-r2 / (4.0 * (beta / 2.0).tanh())).exp(), 0.0),
        }
    }

    /// `W̃(t cos φ, t sin φ) = E[e^{itX} | Φ = φ]`.
    pub fn char_fn_radial(&self, t: f64, phi: f64) -> Complex64 {
        if self.is_rotation_invariant() {
            return self.char_fn(t, 0.0);
        }
        let (s, c) = phi.sin_cos();
        self.char_fn(t * c, t * s)
    }

    /// `E[e^{itX}]` with `Φ ~ Uniform[0, π]`.
    pub fn marginal_char_fn(&self, t: f64) -> Complex64 {
        if self.is_rotation_invariant() || t == 0.0 {
            return self.char_fn_radial(t, 0.0);
        }
        let re = simpson(|p| self.char_fn_radial(t, p).re, 0.0, PI, PHI_NODES);
        let im = simpson(|p| self.char_fn_radial(t, p).im, 0.0, PI, PHI_NODES);
        Complex64::new(re, im) / PI
    }

    /// `∫ W²`: `1/(2π)` for pure states, `tanh(β/2)/(2π)` for the thermal state.
    pub fn true_purity(&self) -> f64 {
        match *self {
            StateModel::Thermal { beta } => (beta / 2.0).tanh() / (2.0 * PI),
            _ => 1.0 / (2.0 * PI),
        }
    }

    pub fn is_pure(&self) -> bool {
        !matches!(self, StateModel::Thermal { .. })
    }

    /// Supremum of `alpha` for which the state lies in some `A(alpha, 2, L)`.
    pub fn class_alpha_threshold(&self) -> f64 {
        match *self {
            StateModel::Squeezed { xi, .. } => (-2.0 * xi.abs()).exp() / 4.0,
            StateModel::Thermal { beta } => 1.0 / (4.0 * (beta / 2.0).tanh()),
            _ => 0.25,
        }
    }

    /// Upper bound on `|W̃(w)|` over the circle `‖w‖ = t`.
    pub fn envelope(&self, t: f64) -> f64 {
        let t2 = t * t;
        match *self {
            StateModel::Vacuum | StateModel::Coherent { .. } => (-t2 / 4.0).exp(),
            StateModel::SinglePhoton => (1.0 + t2 / 2.0) * (-t2 / 4.0).exp(),
            StateModel::Cat { x0 } => {
                let shifted = (t - 2.0 * x0).max(0.0);
                ((-t2 / 4.0).exp() + (-shifted * shifted / 4.0).exp()) / (1.0 + (-x0 * x0).exp())
            }
            StateModel::Squeezed { xi, .. } => (-t2 * (-2.0 * xi.abs()).exp() / 4.0).exp(),
            StateModel::Thermal { beta } => (-t2 / (4.0 * (beta / 2.0).tanh())).exp(),
        }
    }

    /// Smallest radius on the scan grid beyond which `|W̃|` stays below `eps`.
    pub fn frequency_cutoff(&self, eps: f64) -> f64 {
        let mut t = 0.0;
        loop {
            let e = self.envelope(t);
            if (e < eps && self.envelope(t + ENVELOPE_STEP) <= e) || t > ENVELOPE_LIMIT {
                return t;
            }
            t += ENVELOPE_STEP;
        }
    }

    /// Standard-deviation-like spatial scale used to size density grids.
    pub fn spatial_scale(&self) -> f64 {
        match *self {
            StateModel::Vacuum | StateModel::SinglePhoton => 0.0,
            StateModel::Cat { x0 } => x0,
            StateModel::Coherent { nbar } => nbar.sqrt(),
            StateModel::Squeezed { xi, disp } => xi.abs().exp() + disp.abs(),
            StateModel::Thermal { beta } => (1.0 / (beta / 2.0).tanh() / 2.0).sqrt(),
        }
    }

    /// `∫₀^{2π}∫₀^{t_max} t · f(t, W̃(t cos φ, t sin φ)) dt dφ`, Simpson in `t`
    /// and periodic trapezoid in `φ`.
    fn polar_integral<F>(&self, t_max: f64, nodes: usize, f: F) -> f64
    where
        F: Fn(f64, Complex64) -> f64,
    {
        if self.is_rotation_invariant() {
            return 2.0 * PI * simpson(|t| t * f(t, self.char_fn(t, 0.0)), 0.0, t_max, nodes);
        }
        periodic_trapezoid(
            |phi| simpson(|t| t * f(t, self.char_fn_radial(t, phi)), 0.0, t_max, nodes),
            0.0,
            2.0 * PI,
            PHI_NODES,
        )
    }

    fn max_modulus_on_circle(&self, t: f64) -> f64 {
        (0..PHI_NODES)
            .map(|j| self.char_fn_radial(t, 2.0 * PI * j as f64 / PHI_NODES as f64).norm())
            .fold(0.0, f64::max)
    }

    /// `d² = (1/4π²) ∬ |W̃|²` by polar quadrature on `‖w‖ ≤ t_max`.
    pub fn purity_by_plancherel(&self, t_max: f64, nodes: usize) -> Result<f64> {
        if nodes < 64 {
            return Err(invalid(format!("at least 64 quadrature nodes required, got {nodes}")));
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(invalid(format!("t_max must be positive, got {t_max}")));
        }
        let edge = self.max_modulus_on_circle(t_max);
        let tail = edge * edge * t_max;
        if tail >= TAIL_TOLERANCE {
            return Err(Error::TailNotNegligible { t_max, tail });
        }
        Ok(self.polar_integral(t_max, nodes, |_, w| w.norm_sqr()) / (4.0 * PI * PI))
    }

    /// Plancherel purity with truncation and node count picked automatically.
    pub fn purity_by_plancherel_auto(&self) -> Result<f64> {
        let t_max = self.frequency_cutoff(1e-8);
        let nodes = pow2_at_least((t_max / 0.005) as usize).max(2048);
        self.purity_by_plancherel(t_max, nodes)
    }

    /// `(1/4π²) ∬_{‖w‖ ≤ radius} |W̃|²`, the purity seen through a frequency ball.
    pub fn truncated_purity(&self, radius: f64) -> f64 {
        let nodes = pow2_at_least((radius / 0.002) as usize).max(1024);
        self.polar_integral(radius, nodes, |_, w| w.norm_sqr()) / (4.0 * PI * PI)
    }

    /// Smallest `L` such that the state lies in `A(alpha, r, L)`.
    pub fn class_norm(&self, alpha: f64, r: f64) -> Result<f64> {
        if !(alpha >= 0.0 && alpha.is_finite()) || !(r > 0.0 && r <= 2.0) {
            return Err(invalid(format!("class parameters out of range: alpha={alpha}, r={r}")));
        }
        let weighted = |t: f64| {
            let e = self.envelope(t);
            t * e * e * (2.0 * alpha * t.powf(r)).exp()
        };
        let mut peak: f64 = 0.0;
        let mut t = ENVELOPE_STEP;
        let t_max = loop {
            let g = weighted(t);
            if !g.is_finite() || t > ENVELOPE_LIMIT {
                return Err(Error::Divergent { alpha, r });
            }
            peak = peak.max(g);
            if g < TAIL_TOLERANCE * peak && weighted(t + ENVELOPE_STEP) <= g {
                break t;
            }
            t += ENVELOPE_STEP;
        };
        let nodes = pow2_at_least((t_max / 0.004) as usize).max(2048);
        let integral = self.polar_integral(t_max, nodes, |t, w| w.norm_sqr() * (2.0 * alpha * t.powf(r)).exp());
        Ok(integral / (4.0 * PI * PI))
    }
}

impl fmt::Display for StateModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            StateModel::Vacuum => write!(f, "vacuum"),
            StateModel::SinglePhoton => write!(f, "single_photon"),
            StateModel::Cat { x0 } => write!(f, "cat:{x0}"),
            StateModel::Coherent { nbar } => write!(f, "coherent:{nbar}"),
            StateModel::Squeezed { xi, disp } => write!(f, "squeezed:{xi},{disp}"),
            StateModel::Thermal { beta } => write!(f, "thermal:{beta}"),
        }
    }
}

/// Parses `vacuum`, `single_photon`, `cat:X0`, `coherent:N`, `squeezed:XI,DISP`, `thermal:BETA`.
impl FromStr for StateModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        let nums: Vec<f64> = match args {
            Some(a) => a
                .split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad number in state '{s}'"))))
                .collect::<Result<_>>()?,
            None => Vec::new(),
        };
        let state = match (kind.trim().to_ascii_lowercase().replace('-', "_").as_str(), nums.as_slice()) {
            ("vacuum", []) => StateModel::Vacuum,
            ("single_photon", []) => StateModel::SinglePhoton,
            ("cat", [x0]) => StateModel::Cat { x0: *x0 },
            ("coherent", [nbar]) => StateModel::Coherent { nbar: *nbar },
            ("squeezed", [xi, disp]) => StateModel::Squeezed { xi: *xi, disp: *disp },
            ("thermal", [beta]) => StateModel::Thermal { beta: *beta },
            _ => return Err(Error::Config(format!("unrecognized state '{s}'"))),
        };
        state.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(state)
    }
}
