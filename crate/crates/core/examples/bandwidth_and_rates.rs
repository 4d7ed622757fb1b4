//! Bandwidth rules, the theoretical rate and the bias/variance risk bound
//! across sample sizes for a few smoothness classes.
//!
//! cargo run --release --example bandwidth_and_rates

use qht_purity::*;

fn main() -> Result<()> {
    let eta = 0.9;
    let ns = [1_000u64, 10_000, 100_000, 1_000_000];

    let cls = SmoothnessClass::new(0.25, 1.0, 1.0)?;
    println!("class alpha=0.25 r=1 L=1, regime {}", regime(&cls, eta)?.as_str());
    println!(
        "{:>9} {:>10} {:>10} {:>10} {:>10} {:>11} {:>11}",
        "n", "delta_opt", "adaptive1", "adaptive2", "iterative", "rate", "risk bound"
    );
    for n in ns {
        let opt = solve_delta_opt(&cls, eta, n)?;
        let ad1 = BandwidthRule::Adaptive1.resolve(Some(&cls), eta, n)?;
        let ad2 = BandwidthRule::Adaptive2 { a: 0.3125 }.resolve(Some(&cls), eta, n);
        let it = BandwidthRule::Iterative { k: None }.resolve(Some(&cls), eta, n);
        let rate = theoretical_rate(&cls, eta, n, RateSide::Upper)?;
        let bound = risk_bounds(&cls, eta, opt, n)?.total();
        let show = |r: Result<f64>| r.map(|d| format!("{d:.5}")).unwrap_or_else(|_| "n/a".into());
        println!("{n:>9} {opt:>10.5} {ad1:>10.5} {:>10} {:>10} {rate:>11.3e} {bound:>11.3e}", show(ad2), show(it));
    }

    // r = 2 with 4αη/(1-η) > 1: parametric rate 1/n with δ*.
    let smooth = SmoothnessClass::new(0.2, 2.0, 1.0)?;
    println!("\nclass alpha=0.2 r=2, regime {}", regime(&smooth, eta)?.as_str());
    for n in ns {
        let (d, _) = delta_star(smooth.alpha, eta, n)?;
        let b = risk_bounds(&smooth, eta, d, n)?;
        println!("n={n:>8}: delta* {d:.5}, bias² bound {:.3e}, variance bound {:.3e}", b.bias_bound_sq, b.var_bound);
    }
    Ok(())
}
