//! Energy of disjointly supported sums and of restrictions to a partition.
//!
//! Run with `cargo run --release --example energy_split`.

use pweyl::domain::GridMask;
use pweyl::energy::{combine_disjoint, p_energy, restrict, Field, NodeGrid};
use pweyl::exact::Exact;
use pweyl::spectrum::Bc;
use pweyl::sweep::sweep_energy_split;

fn main() -> pweyl::Result<()> {
    // two bumps on disjoint blocks of a 16 x 8 grid
    let h = Exact::ratio(1, 8);
    let ambient = GridMask::block(h.clone(), vec![0, 0], vec![16, 8]);
    let left = GridMask::block(h.clone(), vec![0, 0], vec![8, 8]);
    let right = GridMask::block(h, vec![8, 0], vec![8, 8]);
    let bump =
        |x: &[f64], x0: f64, amp: f64| amp * (x[0] - x0) * (x0 + 1.0 - x[0]) * x[1] * (1.0 - x[1]);
    let v = Field::from_fn(NodeGrid::new(&left, Bc::Dirichlet)?, |x| bump(x, 0.0, 1.0));
    let w = Field::from_fn(NodeGrid::new(&right, Bc::Dirichlet)?, |x| {
        bump(x, 1.0, -3.0) * x[1]
    });
    let sum = combine_disjoint(&v, &w, &ambient)?;
    let p = 3.0;
    let (ev, ew, es) = (p_energy(&v, p)?, p_energy(&w, p)?, p_energy(&sum, p)?);
    println!(
        "E(v) = {ev:.4}, E(w) = {ew:.4}, E(v + w) = {es:.4} <= max = {:.4}",
        ev.max(ew)
    );

    // Neumann restriction of one field to two halves
    let u = Field::from_fn(NodeGrid::new(&ambient, Bc::Neumann)?, |x| {
        (3.0 * x[0]).sin() + x[1]
    });
    let (a, b) = (restrict(&u, &left)?, restrict(&u, &right)?);
    println!(
        "E(u) = {:.4} >= min(E(u|left), E(u|right)) = {:.4}",
        p_energy(&u, p)?,
        p_energy(&a, p)?.min(p_energy(&b, p)?)
    );

    for p in [1.5, 2.0, 3.0, 4.0] {
        let rep = sweep_energy_split(200, 11, p)?;
        println!(
            "p={p}: {} instances, violations {} / {}, worst relative excess {:.3e}",
            rep.instances,
            rep.disjoint_violations,
            rep.partition_violations,
            rep.worst_relative_excess
        );
    }
    Ok(())
}
