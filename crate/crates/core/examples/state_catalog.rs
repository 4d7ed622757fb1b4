//! Walk the built-in state catalog: exact purity, the Plancherel cross-check,
//! and the smoothness-class norm for a couple of exponents.
//!
//! cargo run --release --example state_catalog

use qht_purity::StateModel;

fn main() -> qht_purity::Result<()> {
    println!("{:<22} {:>12} {:>12} {:>10} {:>12}", "state", "purity", "plancherel", "|diff|", "L(0.1, 2)");
    for state in StateModel::catalog() {
        let exact = state.true_purity();
        let numeric = state.purity_by_plancherel_auto()?;
        let norm = state.class_norm(0.1, 2.0)?;
        println!(
            "{:<22} {exact:>12.9} {numeric:>12.9} {:>10.1e} {norm:>12.6}",
            state.to_string(),
            (exact - numeric).abs()
        );
    }

    // Characteristic function along one direction.
    let cat = StateModel::Cat { x0: 2.0 };
    for t in [0.0, 0.5, 1.0, 2.0, 4.0] {
        let z = cat.char_fn_radial(t, 0.0);
        println!("cat W~({t}, phi=0) = {:+.6} {:+.6}i", z.re, z.im);
    }
    Ok(())
}
