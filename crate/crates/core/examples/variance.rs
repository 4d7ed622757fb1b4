//! Exact finite-sample variance of the estimator against its limiting value.
//! The degenerate second-order term keeps n·Var well above the limit at
//! practical sample sizes.
//!
//! cargo run --release --example variance

use qht_purity::*;

fn main() -> Result<()> {
    let state = StateModel::Vacuum;
    let eta = 0.9;
    let w = asymptotic_variance_auto(&state, eta)?;
    println!(
        "limiting variance {:.5} (cross moment {:.5} - {} {:.5})",
        w.value, w.cross_moment, w.subtraction, w.centering
    );

    for n in [1_000u64, 10_000, 100_000] {
        let (delta, _) = delta_star(0.2, eta, n)?;
        let v = finite_sample_variance(&state, eta, delta, n)?;
        println!(
            "n={n:>7}: delta {delta:.4}, n*Var {:.4}, linear share {:.1}%",
            v.scaled(n),
            100.0 * v.linear_share(n)
        );
    }

    // With a fixed bandwidth the first-order term dominates as n grows.
    for n in [1_000u64, 100_000, 10_000_000] {
        let v = finite_sample_variance(&state, eta, 0.6, n)?;
        println!("fixed delta 0.6, n={n:>9}: n*Var {:.4}", v.scaled(n));
    }

    match asymptotic_variance_auto(&state, 0.2) {
        Err(e) => println!("eta=0.2: {e}"),
        Ok(v) => println!("eta=0.2: {}", v.value),
    }
    Ok(())
}
