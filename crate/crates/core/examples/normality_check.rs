//! Standardised residuals in the parametric regime and their distance from N(0, 1).
//!
//! cargo run --release --example normality_check

use qht_purity::*;

fn main() -> Result<()> {
    let cls = SmoothnessClass::new(0.2, 2.0, 1.0)?;
    let report = run_normality_check(&StateModel::Vacuum, 0.9, 4000, 200, &BandwidthRule::DeltaStar, Some(&cls), 3)?;
    println!("n={} delta={:.4} truth={:.6}", report.n, report.delta, report.truth);
    println!(
        "n*Var: limiting {:.4}, exact {:.4}, empirical {:.4}",
        report.asymptotic_variance, report.finite_n_variance, report.empirical_n_variance
    );
    println!(
        "KS {:.3} (exact-variance standardisation {:.3}), skew {:.3}, excess kurtosis {:.3}",
        report.ks_distance, report.ks_distance_finite_n, report.skewness, report.excess_kurtosis
    );
    Ok(())
}
