//! Simulation of noisy homodyne data.
//!
//! Ideal pairs `(X, Φ)` have `Φ ~ Uniform[0, π)` and `X | Φ = φ` distributed
//! as the Radon projection of the Wigner function at angle `φ`. Observed data
//! are `Y = √η X + √((1 - η)/2) ξ` with `ξ` standard normal.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::{Purpose, StreamKey};
use crate::states::StateModel;

const MASS_TOLERANCE: f64 = 1e-6;
const CLAMP_FLOOR: f64 = -1e-8;
const IMAG_RESIDUE: f64 = 1e-9;

/// Default number of grid intervals per conditional density.
pub const DEFAULT_GRID_INTERVALS: usize = 1024;
/// Default number of phase intervals in a [`DensityBank`].
pub const DEFAULT_PHASE_INTERVALS: usize = 256;

/// One observation `(y, φ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomodyneSample {
    pub y: f64,
    pub phi: f64,
}

/// One noiseless draw `(x, φ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdealSample {
    pub x: f64,
    pub phi: f64,
}

/// Detection efficiency `η ∈ (0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub eta: f64,
}

impl NoiseConfig {
    pub fn new(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(invalid(format!("eta must lie in the open interval (0, 1), got {eta}")));
        }
        Ok(NoiseConfig { eta })
    }

    /// Standard deviation of the additive Gaussian noise.
    pub fn noise_sd(&self) -> f64 {
        ((1.0 - self.eta) / 2.0).sqrt()
    }
}

/// Half-width of the density grid: eight scale units beyond the state's spread.
pub fn default_x_max(state: &StateModel) -> f64 {
    8.0 * (1.0 + state.spatial_scale())
}

/// Tabulated conditional density `p(x | φ)` with its cumulative table.
#[derive(Clone, Debug)]
pub struct DensityTable {
    pub phi: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub cdf: Vec<f64>,
}

impl DensityTable {
    pub fn spacing(&self) -> f64 {
        self.grid[1] - self.grid[0]
    }

    /// Trapezoid mass of the (clamped, renormalized) density.
    pub fn mass(&self) -> f64 {
        trapezoid(&self.values, self.spacing())
    }

    /// Piecewise-linear CDF at `x`.
    pub fn cdf_at(&self, x: f64) -> f64 {
        let (lo, hi) = (self.grid[0], *self.grid.last().unwrap());
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        let s = (x - lo) / self.spacing();
        let i = (s.floor() as usize).min(self.grid.len() - 2);
        let w = s - i as f64;
        self.cdf[i] + w * (self.cdf[i + 1] - self.cdf[i])
    }

    /// Inverse of the piecewise-linear CDF; flat runs resolve to their left endpoint.
    pub fn quantile(&self, u: f64) -> f64 {
        let k = self.cdf.partition_point(|&c| c <= u);
        if k == 0 {
            return self.grid[0];
        }
        if k >= self.cdf.len() {
            return *self.grid.last().unwrap();
        }
        let i = k - 1;
        let (c0, c1) = (self.cdf[i], self.cdf[i + 1]);
        self.grid[i] + (u - c0) / (c1 - c0) * self.spacing()
    }

    /// Numeric `∫ p(x) e^{itx} dx` over the grid.
    pub fn char_fn(&self, t: f64) -> Complex64 {
        let h = self.spacing();
        let last = self.grid.len() - 1;
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, (&x, &p)) in self.grid.iter().zip(&self.values).enumerate() {
            let w = if i == 0 || i == last { 0.5 } else { 1.0 };
            acc += Complex64::from_polar(w * p, t * x);
        }
        acc * h
    }
}

fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    let inner: f64 = values[1..n - 1].iter().sum();
    h * (inner + 0.5 * (values[0] + values[n - 1]))
}

/// `p(x | φ) = (1/2π) ∫ W̃(t cos φ, t sin φ) e^{-itx} dt` on `m + 1` points of `[-x_max, x_max]`.
///
/// The frequency integral uses the trapezoid rule on a symmetric grid whose
/// spacing keeps the aliasing period at four times the spatial half-width.
pub fn conditional_density(state: &StateModel, phi: f64, x_max: f64, m: usize) -> Result<DensityTable> {
    state.validate()?;
    if m < 512 {
        return Err(invalid(format!("density grid needs at least 512 intervals, got {m}")));
    }
    if !(x_max > 0.0 && x_max.is_finite()) || !phi.is_finite() {
        return Err(invalid("x_max must be positive and phi finite"));
    }
    let t_cut = state.frequency_cutoff(1e-17);
    let dt = (PI / (2.0 * x_max)).min(0.05);
    let half = (t_cut / dt).ceil() as usize;
    let char_values: Vec<(f64, Complex64)> = (0..=half)
        .map(|j| {
            let t = j as f64 * dt;
            (t, state.char_fn_radial(t, phi))
        })
        .collect();

    let dx = 2.0 * x_max / m as f64;
    let grid: Vec<f64> = (0..=m).map(|i| -x_max + i as f64 * dx).collect();
    let mut values = Vec::with_capacity(m + 1);
    for &x in &grid {
        // Pair t and -t: W̃(-t·) is the conjugate of W̃(t·).
        let mut re = char_values[0].1.re;
        let mut im = char_values[0].1.im;
        for &(t, w) in &char_values[1..] {
            let e = Complex64::from_polar(1.0, -t * x);
            let plus = w * e;
            let minus = w.conj() * e.conj();
            re += plus.re + minus.re;
            im += plus.im + minus.im;
        }
        let scale = dt / (2.0 * PI);
        assert!((im * scale).abs() < IMAG_RESIDUE, "imaginary residue {} in inverse Fourier transform", im * scale);
        values.push(re * scale);
    }

    for (&x, v) in grid.iter().zip(values.iter_mut()) {
        if *v < CLAMP_FLOOR {
            return Err(Error::NegativeDensity { x, value: *v });
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let mass = trapezoid(&values, dx);
    if (mass - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::MassDeficit { mass });
    }
    values.iter_mut().for_each(|v| *v /= mass);

    let mut cdf = Vec::with_capacity(m + 1);
    cdf.push(0.0);
    let mut acc = 0.0;
    for i in 1..=m {
        acc += 0.5 * dx * (values[i - 1] + values[i]);
        cdf.push(acc);
    }
    let total = acc;
    cdf.iter_mut().for_each(|c| *c /= total);
    cdf[m] = 1.0;
    Ok(DensityTable { phi, grid, values, cdf })
}

/// Conditional densities tabulated on a uniform phase grid over `[0, π]`.
///
/// A draw at phase `φ` between nodes `φ_j` and `φ_{j+1}` selects one of the
/// two neighbouring tables with linear weights, sampling the phase-interpolated
/// mixture.
#[derive(Clone, Debug)]
pub struct DensityBank {
    tables: Vec<DensityTable>,
    step: f64,
}

impl DensityBank {
    pub fn build(state: &StateModel, phase_intervals: usize, grid_intervals: usize) -> Result<Self> {
        if phase_intervals == 0 {
            return Err(invalid("phase grid needs at least one interval"));
        }
        let x_max = default_x_max(state);
        let step = PI / phase_intervals as f64;
        let tables = (0..=phase_intervals)
            .into_par_iter()
            .map(|j| conditional_density(state, j as f64 * step, x_max, grid_intervals))
            .collect::<Result<Vec<_>>>()?;
        Ok(DensityBank { tables, step })
    }

    pub fn tables(&self) -> &[DensityTable] {
        &self.tables
    }

    /// Draw `x | φ` from the bank.
    pub fn draw<R: Rng + ?Sized>(&self, phi: f64, rng: &mut R) -> f64 {
        let s = phi / self.step;
        let j = (s.floor() as usize).min(self.tables.len() - 2);
        let w = s - j as f64;
        let pick: f64 = rng.random();
        let u: f64 = rng.random();
        let table = if pick < w { &self.tables[j + 1] } else { &self.tables[j] };
        table.quantile(u)
    }
}

/// Which ideal-sampling route to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SamplerPath {
    /// Closed-form sampler when one exists, inverse-CDF otherwise.
    #[default]
    Auto,
    /// Inverse-CDF sampling from tabulated conditional densities.
    Generic,
}

/// Reusable ideal-data sampler for one state.
#[derive(Clone, Debug)]
pub struct IdealSampler {
    state: StateModel,
    bank: Option<DensityBank>,
}

impl IdealSampler {
    pub fn new(state: StateModel, path: SamplerPath) -> Result<Self> {
        state.validate()?;
        let bank = match (path, state) {
            (SamplerPath::Generic, _) | (SamplerPath::Auto, StateModel::Cat { .. }) => {
                Some(DensityBank::build(&state, DEFAULT_PHASE_INTERVALS, DEFAULT_GRID_INTERVALS)?)
            }
            _ => None,
        };
        Ok(IdealSampler { state, bank })
    }

    pub fn state(&self) -> &StateModel {
        &self.state
    }

    pub fn is_generic(&self) -> bool {
        self.bank.is_some()
    }

    /// Draw `X | Φ = phi`.
    pub fn draw_x<R: Rng + ?Sized>(&self, phi: f64, rng: &mut R) -> f64 {
        if let Some(bank) = &self.bank {
            return bank.draw(phi, rng);
        }
        let z: f64 = StandardNormal.sample(rng);
        match self.state {
            StateModel::Vacuum => z * 0.5f64.sqrt(),
            StateModel::Coherent { nbar } => nbar.sqrt() * phi.sin() + z * 0.5f64.sqrt(),
            StateModel::Squeezed { xi, disp } => {
                let (s, c) = phi.sin_cos();
                let var = (c * c * (2.0 * xi).exp() + s * s * (-2.0 * xi).exp()) / 2.0;
                disp * s + z * var.sqrt()
            }
            StateModel::Thermal { beta } => z * (0.5 / (beta / 2.0).tanh()).sqrt(),
            StateModel::SinglePhoton => {
                // |X|² ~ Gamma(3/2, 1); the sign is the sign of an independent normal.
                let g: f64 = Gamma::new(1.5, 1.0).unwrap().sample(rng);
                g.sqrt().copysign(z)
            }
            StateModel::Cat { .. } => unreachable!("cat states always use the density bank"),
        }
    }

    /// `n` i.i.d. ideal pairs; phases and quadratures come from separate generators.
    pub fn sample<R1, R2>(&self, n: usize, phase_rng: &mut R1, quad_rng: &mut R2) -> Result<Vec<IdealSample>>
    where
        R1: Rng + ?Sized,
        R2: Rng + ?Sized,
    {
        if n == 0 {
            return Err(invalid("sample size must be at least 1"));
        }
        Ok((0..n)
            .map(|_| {
                let phi = PI * phase_rng.random::<f64>();
                IdealSample { x: self.draw_x(phi, quad_rng), phi }
            })
            .collect())
    }
}

/// `n` ideal pairs from one generator using the automatic path.
pub fn sample_ideal<R: Rng + ?Sized>(state: &StateModel, n: usize, rng: &mut R) -> Result<Vec<IdealSample>> {
    sample_ideal_with(state, n, SamplerPath::Auto, rng)
}

/// `n` ideal pairs from one generator using the given path.
pub fn sample_ideal_with<R: Rng + ?Sized>(
    state: &StateModel,
    n: usize,
    path: SamplerPath,
    rng: &mut R,
) -> Result<Vec<IdealSample>> {
    let sampler = IdealSampler::new(*state, path)?;
    if n == 0 {
        return Err(invalid("sample size must be at least 1"));
    }
    Ok((0..n)
        .map(|_| {
            let phi = PI * rng.random::<f64>();
            IdealSample { x: sampler.draw_x(phi, rng), phi }
        })
        .collect())
}

/// `Y = √η X + √((1-η)/2) ξ`, one fresh standard normal per sample.
pub fn apply_noise<R: Rng + ?Sized>(ideal: &[IdealSample], cfg: NoiseConfig, rng: &mut R) -> Vec<HomodyneSample> {
    let gain = cfg.eta.sqrt();
    let sd = cfg.noise_sd();
    ideal
        .iter()
        .map(|s| {
            let xi: f64 = StandardNormal.sample(rng);
            HomodyneSample { y: gain * s.x + sd * xi, phi: s.phi }
        })
        .collect()
}

/// Full pipeline on the named streams of `key`.
pub fn simulate_with(
    sampler: &IdealSampler,
    noise: NoiseConfig,
    n: usize,
    key: StreamKey,
) -> Result<Vec<HomodyneSample>> {
    let ideal = sampler.sample(n, &mut key.rng(Purpose::Phase), &mut key.rng(Purpose::Quadrature))?;
    Ok(apply_noise(&ideal, noise, &mut key.rng(Purpose::Noise)))
}

/// Convenience wrapper building a sampler for a single simulation.
pub fn simulate(state: &StateModel, noise: NoiseConfig, n: usize, key: StreamKey) -> Result<Vec<HomodyneSample>> {
    simulate_with(&IdealSampler::new(*state, SamplerPath::Auto)?, noise, n, key)
}

/// Write samples as `y,phi` CSV with 17 significant digits and LF line endings.
pub fn write_samples(samples: &[HomodyneSample], path: &Path) -> Result<()> {
    let file = File::create(path)?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(BufWriter::new(file));
    w.write_record(["y", "phi"])?;
    for s in samples {
        w.write_record([format!("{:.16e}", s.y), format!("{:.16e}", s.phi)])?;
    }
    w.flush()?;
    w.into_inner().map_err(|e| Error::Io(e.into_error()))?.flush()?;
    Ok(())
}

/// Read a `y,phi` CSV written by [`write_samples`].
pub fn read_samples(path: &Path) -> Result<Vec<HomodyneSample>> {
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    let mut r = csv::ReaderBuilder::new().flexible(true).has_headers(true).from_reader(BufReader::new(file));
    let header = r.headers()?.clone();
    if header.iter().map(str::trim).collect::<Vec<_>>() != ["y", "phi"] {
        return Err(Error::MalformedRow { line: 1, reason: "header must be 'y,phi'".into() });
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 2 {
            return Err(Error::MalformedRow { line, reason: format!("expected 2 columns, found {}", rec.len()) });
        }
        let parse = |s: &str| -> Result<f64> {
            let v: f64 =
                s.trim().parse().map_err(|_| Error::MalformedRow { line, reason: format!("not a number: '{s}'") })?;
            if !v.is_finite() {
                return Err(Error::MalformedRow { line, reason: format!("non-finite value '{s}'") });
            }
            Ok(v)
        };
        out.push(HomodyneSample { y: parse(&rec[0])?, phi: parse(&rec[1])? });
    }
    Ok(out)
}

/// Write samples to any writer in the same format (used for checksums).
pub fn format_samples<W: Write>(samples: &[HomodyneSample], mut out: W) -> std::io::Result<()> {
    writeln!(out, "y,phi")?;
    for s in samples {
        writeln!(out, "{:.16e},{:.16e}", s.y, s.phi)?;
    }
    Ok(())
}
