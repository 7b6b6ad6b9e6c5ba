//! Randomized checks of domain monotonicity, scaling and the cutoff inequality.
//!
//! Run with `cargo run --release --example inequality_checks`.

use pweyl::domain::Domain;
use pweyl::packing::partition_cubes;
use pweyl::spectrum::Bc;
use pweyl::sweep::{
    sweep_cutoff, sweep_ddm_boxes, sweep_ddm_intervals, sweep_ndm_intervals, sweep_scaling,
};
use pweyl::weyl::{
    check_cutoff_inequality, check_neumann_monotonicity, check_scaling, cutoff_lambda, log_grid,
    ExactProvider,
};

fn main() -> pweyl::Result<()> {
    let seed = 7;
    let ps = [1.5, 2.0, 3.0];
    for rep in [
        sweep_ddm_intervals(50, seed, &ps)?,
        sweep_ddm_boxes(20, seed)?,
        sweep_ndm_intervals(50, seed, &ps)?,
        sweep_scaling(50, seed)?,
        sweep_cutoff(200, seed, &ps)?,
    ] {
        println!(
            "{:<10} {} instances, {} failed, worst margin {}",
            rep.statement, rep.instances, rep.failed_instances, rep.worst_margin
        );
    }

    // single instances with the full pointwise report
    let provider = ExactProvider::default();
    let grid = log_grid(1.0, 1e4, 50)?;
    let square = Domain::unit_cube(2);
    let cover = partition_cubes(&square, 2)?;
    let r = check_neumann_monotonicity(&cover, &grid, 2.0, &provider)?;
    println!(
        "Neumann cover of the square by 4 cubes: {:?}, worst margin {}",
        r.verdict, r.worst_margin
    );

    let r = check_scaling(
        &Domain::unit_interval(),
        &"5/3".parse()?,
        3.0,
        Bc::Neumann,
        &grid,
        &provider,
    )?;
    println!("scaling of the interval by 5/3 at p=3: {:?}", r.verdict);

    let (eps, l1, l2) = (0.05, 40.0, 60.0);
    let r = check_cutoff_inequality(1.0, eps, l1, l2, 2.0, &provider)?;
    println!(
        "cutoff with eps={eps}, l1={l1}, l2={l2} (lambda={:.3}): {:?}, lhs {} <= rhs {}",
        cutoff_lambda(eps, l1, l2),
        r.verdict,
        r.lhs[0],
        r.rhs[0]
    );
    Ok(())
}
