//! Classify states as pure or mixed from a single estimate.
//!
//! cargo run --release --example purity_classifier

use qht_purity::rng::StreamKey;
use qht_purity::*;

fn main() -> Result<()> {
    let (eta, n) = (0.9, 20_000);
    let (delta, _) = delta_star(0.2, eta, n as u64)?;
    let cfg = EstimatorConfig::new(eta, delta)?;
    let states = [
        StateModel::Vacuum,
        StateModel::SinglePhoton,
        StateModel::Thermal { beta: 1.0 },
        // purity tanh(1.5)/2π ≈ 0.143 sits inside the default band
        StateModel::Thermal { beta: 3.0 },
    ];
    for (i, state) in states.iter().enumerate() {
        let data = simulate(state, NoiseConfig::new(eta)?, n, StreamKey::new(21).grid(i as u64))?;
        let d2 = estimate_quadratic_functional(&data, &cfg)?.d2_hat;
        let c = purity_classify(d2, DEFAULT_TAU)?;
        println!(
            "{:<14} d2_hat {d2:.4} -> {:?} (margin {:+.4}, actually pure: {})",
            state.to_string(),
            c.verdict,
            c.margin,
            state.is_pure()
        );
    }
    Ok(())
}
