//! Draw noisy homodyne data for a cat state, write it to CSV and read it back.
//!
//! cargo run --release --example simulate_homodyne

use qht_purity::rng::StreamKey;
use qht_purity::stats;
use qht_purity::tomography::{read_samples, simulate_with, write_samples, IdealSampler, SamplerPath};
use qht_purity::{NoiseConfig, StateModel};

fn main() -> qht_purity::Result<()> {
    let state = StateModel::Cat { x0: 2.0 };
    // Building the sampler tabulates the conditional quadrature densities once.
    let sampler = IdealSampler::new(state, SamplerPath::Auto)?;

    for eta in [1.0 - 1e-9, 0.9, 0.6] {
        let data = simulate_with(&sampler, NoiseConfig::new(eta)?, 20_000, StreamKey::new(7))?;
        let ys: Vec<f64> = data.iter().map(|s| s.y).collect();
        println!("eta={eta:.2}: mean y {:+.4}, var y {:.4}", stats::mean(&ys), stats::sample_variance(&ys));
    }

    let data = simulate_with(&sampler, NoiseConfig::new(0.9)?, 1000, StreamKey::new(8))?;
    let dir = std::env::temp_dir().join("qht-simulate-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("samples.csv");
    write_samples(&data, &path)?;
    let back = read_samples(&path)?;
    assert_eq!(back, data);
    println!("wrote and re-read {} rows at {}", back.len(), path.display());
    Ok(())
}
