//! Closed-form spectra and the independent shooting check.
//!
//! Run with `cargo run --release --example exact_spectra`.

use pweyl::domain::Domain;
use pweyl::exact_spectra::{
    box_spectrum_p2, eigenvalue_1d, pi_p, shooting_eigenvalue_1d, torus_spectrum_p2,
    weyl_constant_1d,
};
use pweyl::spectrum::Bc;
use pweyl::weyl::{count, ExactProvider, SpectrumProvider};

fn main() -> pweyl::Result<()> {
    println!(
        "{:>5} {:>10} {:>12} {:>14} {:>14}",
        "p", "pi_p", "weyl const", "lambda_3", "shooting"
    );
    for p in [1.5, 2.0, 3.0, 4.0] {
        println!(
            "{p:>5} {:>10.6} {:>12.6} {:>14.6} {:>14.6}",
            pi_p(p)?,
            weyl_constant_1d(p)?,
            eigenvalue_1d(p, 1.0, 3)?,
            shooting_eigenvalue_1d(p, 1.0, 3)?
        );
    }

    // Laplacian on boxes and tori by lattice enumeration
    let sq = box_spectrum_p2(&[1.0, 1.0], Bc::Dirichlet, 200.0)?;
    let head: Vec<String> = sq
        .eigenvalues
        .iter()
        .take(4)
        .map(|(v, m)| format!("{v:.4} (x{m})"))
        .collect();
    println!("unit square, Dirichlet: {}", head.join(", "));
    let torus = torus_spectrum_p2(&[1.0, 1.0], 200.0)?;
    println!(
        "flat torus R^2/Z^2: N(100) = {}, N(200) = {}",
        count(&torus, 100.0),
        count(&torus, 200.0)
    );

    // separated box unions are handled by merging component spectra
    let two = Domain::from_json(
        r#"{"kind":"box-union","n":2,"boxes":[{"corner":[0,0],"sides":[1,1]},{"corner":[2,0],"sides":[1,1]}]}"#,
    )?;
    let s = ExactProvider::default().spectrum(&two, 2.0, Bc::Dirichlet, 100.0)?;
    println!(
        "two separated unit squares: first eigenvalue {:.4} with multiplicity {}",
        s.eigenvalues[0].0, s.eigenvalues[0].1
    );
    Ok(())
}
