//! Domains, rasterization and packings of the L-shape.
//!
//! Run with `cargo run --release --example domains_and_packing`.

use pweyl::domain::{rasterize, Aabb, Domain};
use pweyl::exact::Exact;
use pweyl::packing::{pack_cubes, partition_cubes, validate_packing, Packing};

fn main() -> pweyl::Result<()> {
    let json = include_str!("../../../data/lshape.json");
    let l = Domain::from_json(json)?;
    println!(
        "L-shape: dimension {}, exact volume {}",
        l.dim(),
        l.volume_exact()?
    );

    for h in [0.25, 0.125, 0.0625] {
        let mask = rasterize(&l, h)?;
        println!(
            "  rasterized at h = {h}: {} cells, volume {}",
            mask.cell_count(),
            mask.volume_exact()
        );
    }

    // dyadic sub-packing of a non-dyadic rectangle, filling all but eps of it
    let rect = Domain::box_union(vec![Aabb::new(
        vec![Exact::zero(), Exact::zero()],
        vec![Exact::one(), Exact::ratio(7, 10)],
    )])?;
    for eps in [0.1, 1e-2, 1e-3] {
        let pk = pack_cubes(&rect, eps)?;
        let rep = validate_packing(&pk);
        println!(
            "  sub-packing eps = {eps}: {} cubes, piece volume {} of {}, valid {}",
            pk.items.len(),
            rep.piece_volume,
            rep.ambient_volume,
            rep.valid
        );
    }

    // exact cover by equal cubes
    let cover = partition_cubes(&l, 3)?;
    let rep = validate_packing(&cover);
    println!(
        "  cover k = 3: {} cubes of side {}, valid {}",
        cover.items.len(),
        cover.items[0].scale,
        rep.valid
    );

    // packings survive a JSON round trip exactly
    let back = Packing::from_json(&cover.to_json()?)?;
    println!("  JSON round trip preserves the cover: {}", back == cover);

    // scaling by a rational factor is exact
    let scaled = l.scaled_exact(&"3/7".parse()?)?;
    println!("  (3/7) * L has volume {}", scaled.volume_exact()?);
    Ok(())
}
