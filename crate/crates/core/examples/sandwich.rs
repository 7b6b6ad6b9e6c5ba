//! Dirichlet/Neumann bracketing of the L-shape counting function.
//!
//! Run with `cargo run --release --example sandwich`.

use std::f64::consts::PI;

use pweyl::domain::Domain;
use pweyl::weyl::{log_grid, sandwich_weyl};

fn main() -> pweyl::Result<()> {
    let l = Domain::from_json(include_str!("../../../data/lshape.json"))?;
    let grid = log_grid(10.0, 1e6, 200)?;
    let s = sandwich_weyl(&l, &grid, 0.5)?;
    let c = 1.0 / (4.0 * PI);
    let last = grid.len() - 1;
    println!("bounds ordered at every sample: {}", s.ordered);
    println!(
        "at lambda = {:.0e}: {} <= N <= {}",
        grid[last], s.lower.counts[last], s.upper.counts[last]
    );
    println!(
        "estimate {:.6} vs 1/(4 pi) = {:.6} ({:+.3}%), spread {:.2e} over {} samples",
        s.estimate.c_hat,
        c,
        100.0 * (s.estimate.c_hat / c - 1.0),
        s.estimate.spread,
        s.estimate.samples
    );
    Ok(())
}
