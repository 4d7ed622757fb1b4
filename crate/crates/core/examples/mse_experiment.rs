//! Monte Carlo MSE across a grid of sample sizes and the fitted log-log slope.
//!
//! cargo run --release --example mse_experiment

use qht_purity::*;

fn main() -> Result<()> {
    let plan = ExperimentPlan {
        state: StateModel::Vacuum,
        eta: 0.9,
        n_grid: vec![500, 1000, 2000, 4000],
        replicates: 100,
        bandwidth_rule: BandwidthRule::DeltaStar,
        class: Some(SmoothnessClass::new(0.2, 2.0, 1.0)?),
        seed: 42,
    };
    let summary = run_mse_experiment(&plan)?;
    println!("truth {:.6}", summary.truth);
    for row in &summary.rows {
        println!(
            "n={:>5} delta={:.4} mse={:.3e} ± {:.1e} bias={:+.2e} rate={}",
            row.n,
            row.delta,
            row.empirical_mse,
            row.mse_stderr,
            row.empirical_bias,
            row.theoretical_rate.map_or("n/a".into(), |r| format!("{r:.1e}"))
        );
    }
    println!("log-log slope {:.3}", rate_regression(&summary)?);
    Ok(())
}
