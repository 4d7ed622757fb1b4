//! Purity estimation for quantum homodyne tomography.
//!
//! The crate simulates noisy homodyne data `(Y, Φ)` for a small catalog of
//! quantum states and estimates the purity `d² = ∫ W²` of the underlying
//! Wigner function with a kernel U-statistic. Around that core sit the
//! bandwidth rules, risk bounds, the asymptotic variance and a Monte Carlo
//! driver that checks them.
//!
//! ```
//! use qht_purity::{estimate_quadratic_functional, simulate, EstimatorConfig, NoiseConfig, StateModel, StreamKey};
//!
//! let data = simulate(&StateModel::Vacuum, NoiseConfig::new(0.9)?, 2000, StreamKey::new(7))?;
//! let est = estimate_quadratic_functional(&data, &EstimatorConfig::new(0.9, 0.5)?)?;
//! assert!((est.d2_hat - StateModel::Vacuum.true_purity()).abs() < 0.05);
//! # Ok::<(), qht_purity::Error>(())
//! ```
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod quadrature;
pub mod rng;
pub mod states;
pub mod stats;
pub mod tomography;

pub use error::{Error, Result};
pub use estimator::*;
pub use experiments::*;
pub use rng::{Purpose, StreamKey};
pub use states::{SmoothnessClass, StateModel};
pub use tomography::{simulate, HomodyneSample, NoiseConfig};
