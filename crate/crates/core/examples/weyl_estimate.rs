//! Estimating Weyl constants from counting functions.
//!
//! Run with `cargo run --release --example weyl_estimate`.

use std::f64::consts::PI;

use pweyl::domain::Domain;
use pweyl::exact_spectra::weyl_constant_1d;
use pweyl::spectrum::Bc;
use pweyl::weyl::{check_friedlander_bounds, exact_weyl_estimate, ExactProvider};

fn main() -> pweyl::Result<()> {
    let provider = ExactProvider::default();
    let interval = Domain::unit_interval();
    for p in [1.5, 2.0, 3.0] {
        let (curve, est) =
            exact_weyl_estimate(&interval, p, Bc::Dirichlet, 1e2, 1e8, 0.5, &provider)?;
        let truth = weyl_constant_1d(p)?;
        let fit = check_friedlander_bounds(&curve, None)?.fit.unwrap();
        println!(
            "interval p={p}: c_hat = {:.6}, closed form {:.6} ({:+.3}%), window [{:.0e}, {:.0e}], C2/C1 = {:.4}",
            est.c_hat,
            truth,
            100.0 * (est.c_hat / truth - 1.0),
            est.window[0],
            est.window[1],
            fit.ratio()
        );
    }

    let square = Domain::unit_cube(2);
    for bc in [Bc::Dirichlet, Bc::Neumann] {
        let (_, est) = exact_weyl_estimate(&square, 2.0, bc, 1e2, 1e6, 0.5, &provider)?;
        println!(
            "unit square {bc:?}: c_hat = {:.6}, expected 1/(4 pi) = {:.6}",
            est.c_hat,
            1.0 / (4.0 * PI)
        );
    }
    Ok(())
}
