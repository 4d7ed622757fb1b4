//! Estimate the purity from simulated data and compare the fast
//! characteristic-function path with the direct pairwise sum.
//!
//! cargo run --release --example estimate_purity

use qht_purity::rng::StreamKey;
use qht_purity::*;

fn main() -> Result<()> {
    let eta = 0.9;
    for state in [StateModel::Vacuum, StateModel::SinglePhoton, StateModel::Thermal { beta: 1.0 }] {
        let data = simulate(&state, NoiseConfig::new(eta)?, 20_000, StreamKey::new(11))?;
        let delta = BandwidthRule::Fixed { delta: 0.2 }.resolve(None, eta, data.len() as u64)?;
        let cfg = EstimatorConfig::new(eta, delta)?;
        let est = estimate_quadratic_functional(&data, &cfg)?;
        println!(
            "{state}: d2_hat {:.5} (truth {:.5}), T={:.2}, {} nodes",
            est.d2_hat,
            state.true_purity(),
            est.t_max,
            est.nodes
        );
    }

    // The O(n²) oracle agrees with the O(n·m) path to rounding.
    let small = simulate(&StateModel::Vacuum, NoiseConfig::new(eta)?, 300, StreamKey::new(12))?;
    let cfg = EstimatorConfig::new(eta, 0.4)?;
    let fast = estimate_quadratic_functional(&small, &cfg)?.d2_hat;
    let oracle = estimate_pairwise_oracle(&small, &cfg)?;
    println!("n=300: fast {fast:.12}, pairwise {oracle:.12}, rel diff {:.1e}", (fast - oracle).abs() / oracle.abs());
    Ok(())
}
