//! Finite-difference spectra and the variational first eigenvalue.
//!
//! Run with `cargo run --release --example discrete_solver`.

use std::f64::consts::PI;
use std::time::Instant;

use pweyl::discrete::{
    assemble_fd, eigensolve_p2, min_p_rayleigh, nodal_domains, trusted_count_threshold,
    RayleighOptions,
};
use pweyl::domain::{rasterize, Domain, GridMask};
use pweyl::exact::Exact;
use pweyl::exact_spectra::shooting_eigenvalue_1d;
use pweyl::spectrum::Bc;

fn main() -> pweyl::Result<()> {
    // Laplacian on the unit square, h = 1/32
    let mask = GridMask::box_grid(&[32, 32], Exact::ratio(1, 32));
    let op = assemble_fd(&mask, Bc::Dirichlet)?;
    let t = Instant::now();
    let s = eigensolve_p2(&op)?;
    let cut = trusted_count_threshold(&op, 0.02)?;
    println!(
        "unit square, h=1/32: {} unknowns, lambda1 = {:.6} (2 pi^2 = {:.6}), trusted below {cut:.1}, {:.2}s",
        op.dim(),
        s.first().unwrap(),
        2.0 * PI * PI,
        t.elapsed().as_secs_f64()
    );

    // variational first eigenvalue for p = 3 on an interval and on the L-shape
    let t = Instant::now();
    let line = GridMask::interval(1.0, 256)?;
    let r = min_p_rayleigh(&line, 3.0, Bc::Dirichlet, &RayleighOptions::with_tol(1e-9))?;
    println!(
        "interval p=3, h=1/256: lambda1 = {:.6}, shooting {:.6}, {} outer / {} inner steps, {:.2}s",
        r.lambda,
        shooting_eigenvalue_1d(3.0, 1.0, 1)?,
        r.outer_iterations(),
        r.inner_iterations,
        t.elapsed().as_secs_f64()
    );

    let t = Instant::now();
    let l = rasterize(&Domain::l_shape(), 1.0 / 16.0)?;
    let r = min_p_rayleigh(&l, 3.0, Bc::Dirichlet, &RayleighOptions::with_tol(1e-8))?;
    println!(
        "L-shape p=3, h=1/16: lambda1 = {:.4}, {} nodal domain(s), energy monotone: {}, {:.2}s",
        r.lambda,
        nodal_domains(&r.field),
        r.is_monotone(0.0),
        t.elapsed().as_secs_f64()
    );

    let t = Instant::now();
    let sq = GridMask::box_grid(&[64, 64], Exact::ratio(1, 64));
    let r = min_p_rayleigh(&sq, 2.0, Bc::Dirichlet, &RayleighOptions::with_tol(1e-10))?;
    println!(
        "unit square p=2, h=1/64: lambda1 = {:.10}, {} outer / {} inner steps, {:.2}s",
        r.lambda,
        r.outer_iterations(),
        r.inner_iterations,
        t.elapsed().as_secs_f64()
    );
    Ok(())
}
