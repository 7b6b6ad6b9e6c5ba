//! Seeded random instances for the inequality checks.
//!
//! Instance `i` of a sweep with seed `s` draws from a ChaCha8 stream keyed by
//! `s` and positioned at stream `i`, so every instance is reproducible on its
//! own and the result of a sweep does not depend on how instances are
//! scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{Aabb, Domain, GridMask};
use crate::energy::{combine_disjoint, p_energy, restrict, Field, NodeGrid};
use crate::error::{arg_err, Error, Result};
use crate::exact::Exact;
use crate::packing::{Packing, PackingItem, Relation};
use crate::spectrum::Bc;
use crate::weyl::{
    check_cutoff_inequality, check_dirichlet_monotonicity, check_neumann_monotonicity,
    check_scaling, log_grid_points, ExactProvider, InequalityReport,
};

/// Name recorded in sweep reports.
pub const GENERATOR: &str = "chacha8";

/// Environment variable capping the number of sweep threads.
pub const THREADS_ENV: &str = "PWEYL_THREADS";

/// Grid points per sweep instance.
pub const SWEEP_GRID_POINTS: usize = 1000;

/// Relative slack on energy comparisons, covering only the different
/// summation order of the two sides.
pub const ENERGY_RTOL: f64 = 1e-12;

/// Generator for instance `index` of the sweep seeded with `seed`.
pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Threads used for sweeps: `PWEYL_THREADS` if set, else 1.
pub fn thread_cap() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or(1)
}

/// `f(0..n)` on up to [`thread_cap`] threads, results in index order.
pub fn par_map<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let threads = thread_cap().min(n.max(1));
    if threads <= 1 {
        return (0..n).map(&f).collect();
    }
    let mut slots: Vec<Option<T>> = (0..n).map(|_| None).collect();
    let chunk = n.div_ceil(threads);
    std::thread::scope(|scope| {
        for (t, part) in slots.chunks_mut(chunk).enumerate() {
            let f = &f;
            scope.spawn(move || {
                for (j, slot) in part.iter_mut().enumerate() {
                    *slot = Some(f(t * chunk + j));
                }
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.expect("every slot filled"))
        .collect()
}

/// Outcome of one sweep instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceResult {
    pub index: usize,
    pub description: String,
    pub passed: bool,
    pub worst_margin: f64,
    pub violations: usize,
}

/// Summary of a randomized sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub statement: String,
    pub generator: String,
    pub seed: u64,
    pub instances: usize,
    /// Instances with at least one violated grid point.
    pub failed_instances: usize,
    pub worst_margin: f64,
    pub results: Vec<InstanceResult>,
}

impl SweepReport {
    pub fn new(statement: &str, seed: u64, results: Vec<InstanceResult>) -> Self {
        let worst = results
            .iter()
            .map(|r| r.worst_margin)
            .fold(f64::INFINITY, f64::min);
        SweepReport {
            statement: statement.to_string(),
            generator: GENERATOR.to_string(),
            seed,
            instances: results.len(),
            failed_instances: results.iter().filter(|r| !r.passed).count(),
            worst_margin: if worst.is_finite() { worst } else { 0.0 },
            results,
        }
    }

    pub fn passed(&self) -> bool {
        self.failed_instances == 0
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn from_report(index: usize, description: String, r: &InequalityReport) -> InstanceResult {
    InstanceResult {
        index,
        description,
        passed: r.passed(),
        worst_margin: r.worst_margin,
        violations: r.violations,
    }
}

fn run_sweep(
    statement: &str,
    seed: u64,
    n: usize,
    one: impl Fn(&mut ChaCha8Rng, usize) -> Result<InstanceResult> + Sync,
) -> Result<SweepReport> {
    let results = par_map(n, |i| one(&mut instance_rng(seed, i as u64), i));
    Ok(SweepReport::new(
        statement,
        seed,
        results.into_iter().collect::<Result<_>>()?,
    ))
}

/// `k / den` with `k` uniform in `lo..=hi`.
fn rational(rng: &mut ChaCha8Rng, lo: i64, hi: i64, den: i64) -> Exact {
    Exact::ratio(rng.random_range(lo..=hi), den)
}

/// `count` distinct sorted integers from `lo..=hi`.
fn distinct_sorted(rng: &mut ChaCha8Rng, count: usize, lo: i64, hi: i64) -> Vec<i64> {
    let mut picked = std::collections::BTreeSet::new();
    while picked.len() < count {
        picked.insert(rng.random_range(lo..=hi));
    }
    picked.into_iter().collect()
}

const P_SET: [f64; 4] = [1.5, 2.0, 3.0, 4.0];

/// Disjoint subintervals of `(0, L)`, each the image of a random base
/// interval under a rational scale and offset.
pub fn random_interval_packing(rng: &mut ChaCha8Rng) -> Packing {
    const DEN: i64 = 1000;
    let total = rng.random_range(500..=4000i64);
    let m = rng.random_range(1..=5usize);
    let cuts = distinct_sorted(rng, 2 * m, 0, total);
    let items = cuts
        .chunks(2)
        .map(|c| {
            let base = rational(rng, 1, 8, 4);
            let len = Exact::ratio(c[1] - c[0], DEN);
            PackingItem {
                scale: len / base.clone(),
                offset: vec![Exact::ratio(c[0], DEN)],
                piece: Domain::Interval {
                    start: Exact::zero(),
                    length: base,
                },
            }
        })
        .collect();
    Packing {
        relation: Relation::Sub,
        items,
        ambient: Domain::Interval {
            start: Exact::zero(),
            length: Exact::ratio(total, DEN),
        },
    }
}

/// Disjoint scaled rectangles inside a random rectangle: the ambient box is
/// cut into a `g x g` grid and a random subset of grid cells receives one
/// rectangle placed at a random position inside the cell.
pub fn random_box_subpacking(rng: &mut ChaCha8Rng) -> Packing {
    let sides = [rational(rng, 2, 8, 4), rational(rng, 2, 8, 4)];
    let g = rng.random_range(1..=3i64);
    let cell: Vec<Exact> = sides.iter().map(|s| s / &Exact::int(g)).collect();
    let mut items = Vec::new();
    for i in 0..g {
        for j in 0..g {
            if !items.is_empty() && rng.random_bool(0.3) {
                continue;
            }
            let base = [rational(rng, 1, 4, 4), rational(rng, 1, 4, 4)];
            let fit = (&cell[0] / &base[0]).min(&cell[1] / &base[1]);
            let scale = &fit * &rational(rng, 2, 4, 4);
            let offset = [i, j]
                .iter()
                .enumerate()
                .map(|(a, &k)| {
                    let slack = &cell[a] - &(&scale * &base[a]);
                    &(&cell[a] * &Exact::int(k)) + &(&slack * &rational(rng, 0, 8, 8))
                })
                .collect();
            items.push(PackingItem {
                scale,
                offset,
                piece: Domain::BoxUnion {
                    n: 2,
                    boxes: vec![Aabb::new(vec![Exact::zero(); 2], base.to_vec())],
                },
            });
        }
    }
    Packing {
        relation: Relation::Sub,
        items,
        ambient: Domain::BoxUnion {
            n: 2,
            boxes: vec![Aabb::new(vec![Exact::zero(); 2], sides.to_vec())],
        },
    }
}

/// `(0, L)` cut at up to four random points; each part is the unit interval
/// scaled by its length.
pub fn random_interval_partition(rng: &mut ChaCha8Rng) -> Packing {
    const DEN: i64 = 1000;
    let total = rng.random_range(500..=4000i64);
    let cuts = rng.random_range(1..=4usize);
    let mut pts = vec![0];
    pts.extend(distinct_sorted(rng, cuts, 1, total - 1));
    pts.push(total);
    let items = pts
        .windows(2)
        .map(|w| PackingItem {
            scale: Exact::ratio(w[1] - w[0], DEN),
            offset: vec![Exact::ratio(w[0], DEN)],
            piece: Domain::unit_interval(),
        })
        .collect();
    Packing {
        relation: Relation::Cover,
        items,
        ambient: Domain::Interval {
            start: Exact::zero(),
            length: Exact::ratio(total, DEN),
        },
    }
}

fn describe_packing(pk: &Packing) -> String {
    format!(
        "{} pieces, ambient volume {}",
        pk.items.len(),
        pk.ambient
            .volume_exact()
            .map(|v| v.to_string())
            .unwrap_or_default()
    )
}

/// Dirichlet monotonicity on `n` random interval packings with `p` drawn
/// from `ps`, over `SWEEP_GRID_POINTS` λ values in `[1, 1e5]`.
pub fn sweep_ddm_intervals(n: usize, seed: u64, ps: &[f64]) -> Result<SweepReport> {
    if ps.is_empty() {
        return arg_err("no exponents given");
    }
    let grid = log_grid_points(1.0, 1e5, SWEEP_GRID_POINTS)?;
    run_sweep("ddm", seed, n, |rng, i| {
        let p = ps[rng.random_range(0..ps.len())];
        let pk = random_interval_packing(rng);
        let r = check_dirichlet_monotonicity(&pk, &grid, p, &ExactProvider::default())?;
        Ok(from_report(
            i,
            format!("interval packing, p={p}, {}", describe_packing(&pk)),
            &r,
        ))
    })
}

/// Dirichlet monotonicity on `n` random rectangle sub-packings at `p = 2`.
pub fn sweep_ddm_boxes(n: usize, seed: u64) -> Result<SweepReport> {
    let grid = log_grid_points(1.0, 1e5, SWEEP_GRID_POINTS)?;
    run_sweep("ddm", seed, n, |rng, i| {
        let pk = random_box_subpacking(rng);
        let r = check_dirichlet_monotonicity(&pk, &grid, 2.0, &ExactProvider::default())?;
        Ok(from_report(
            i,
            format!("box sub-packing, p=2, {}", describe_packing(&pk)),
            &r,
        ))
    })
}

/// Neumann monotonicity on `n` random interval partitions.
pub fn sweep_ndm_intervals(n: usize, seed: u64, ps: &[f64]) -> Result<SweepReport> {
    if ps.is_empty() {
        return arg_err("no exponents given");
    }
    let grid = log_grid_points(1.0, 1e5, SWEEP_GRID_POINTS)?;
    run_sweep("ndm", seed, n, |rng, i| {
        let p = ps[rng.random_range(0..ps.len())];
        let pk = random_interval_partition(rng);
        let r = check_neumann_monotonicity(&pk, &grid, p, &ExactProvider::default())?;
        Ok(from_report(
            i,
            format!("interval partition, p={p}, {}", describe_packing(&pk)),
            &r,
        ))
    })
}

/// A random `(domain, a, p, bc)` scaling instance: an interval with any `p`,
/// a rectangle at `p = 2`, or a flat 2-torus at `p = 2`.
pub fn random_scaling_triple(rng: &mut ChaCha8Rng) -> (Domain, Exact, f64, Bc) {
    let a = rational(rng, 2, 32, 8);
    let bc = if rng.random_bool(0.5) {
        Bc::Dirichlet
    } else {
        Bc::Neumann
    };
    match rng.random_range(0..3) {
        0 => {
            let p = P_SET[rng.random_range(0..P_SET.len())];
            (
                Domain::Interval {
                    start: Exact::zero(),
                    length: rational(rng, 1, 16, 4),
                },
                a,
                p,
                bc,
            )
        }
        1 => {
            let sides = vec![rational(rng, 1, 8, 4), rational(rng, 1, 8, 4)];
            let d = Domain::BoxUnion {
                n: 2,
                boxes: vec![Aabb::new(vec![Exact::zero(); 2], sides)],
            };
            (d, a, 2.0, bc)
        }
        _ => {
            let periods = vec![rational(rng, 1, 8, 4), rational(rng, 1, 8, 4)];
            (Domain::Torus { periods }, a, 2.0, Bc::Periodic)
        }
    }
}

/// Scaling identity on `n` random triples over `[1, 1e4]`.
pub fn sweep_scaling(n: usize, seed: u64) -> Result<SweepReport> {
    let grid = log_grid_points(1.0, 1e4, SWEEP_GRID_POINTS)?;
    run_sweep("scaling", seed, n, |rng, i| {
        let (d, a, p, bc) = random_scaling_triple(rng);
        let r = check_scaling(&d, &a, p, bc, &grid, &ExactProvider::default())?;
        let kind = match d {
            Domain::Torus { .. } => "torus",
            Domain::Interval { .. } => "interval",
            _ => "box",
        };
        Ok(from_report(i, format!("{kind}, a={a}, p={p}, bc={bc}"), &r))
    })
}

/// A random cutoff instance `(eps, l1, l2, p)` on the unit interval, with
/// `l1`, `l2` log-uniform in `[0.1, 1000]`.
pub fn random_cutoff_instance(rng: &mut ChaCha8Rng, ps: &[f64]) -> (f64, f64, f64, f64) {
    let eps = rng.random_range(1e-3..0.5);
    let mut logu = || 10f64.powf(rng.random_range(-1.0..3.0));
    let (l1, l2) = (logu(), logu());
    let p = ps[rng.random_range(0..ps.len())];
    (eps, l1, l2, p)
}

/// Collar inequality on `n` random instances on the unit interval.
pub fn sweep_cutoff(n: usize, seed: u64, ps: &[f64]) -> Result<SweepReport> {
    if ps.is_empty() {
        return arg_err("no exponents given");
    }
    run_sweep("cutoff", seed, n, |rng, i| {
        let (eps, l1, l2, p) = random_cutoff_instance(rng, ps);
        let r = check_cutoff_inequality(1.0, eps, l1, l2, p, &ExactProvider::default())?;
        Ok(from_report(
            i,
            format!("eps={eps}, l1={l1}, l2={l2}, p={p}"),
            &r,
        ))
    })
}

fn random_values(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn sub_mask(ambient: &GridMask, keep: impl Fn(&[usize]) -> bool) -> GridMask {
    let mut m = ambient.clone();
    for lin in 0..m.mask.len() {
        let local = m.unravel(lin);
        m.mask[lin] = m.mask[lin] && keep(&local);
    }
    m
}

/// Random block of at least two cells per axis inside `lo..hi`.
fn random_block(rng: &mut ChaCha8Rng, lo: &[usize], hi: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let start: Vec<usize> = lo
        .iter()
        .zip(hi)
        .map(|(&l, &h)| rng.random_range(l..=h - 2))
        .collect();
    let end = start
        .iter()
        .zip(hi)
        .map(|(&s, &h)| rng.random_range(s + 2..=h))
        .collect();
    (start, end)
}

fn in_block(x: &[usize], b: &(Vec<usize>, Vec<usize>)) -> bool {
    x.iter()
        .enumerate()
        .all(|(a, &v)| b.0[a] <= v && v < b.1[a])
}

/// Energies `(E(u), E(v), E(w))` of one disjoint-support instance: `v` and
/// `w` are random Dirichlet fields on disjoint blocks of an `n`-dimensional
/// grid, `u = v + w`.
pub fn random_disjoint_pair(rng: &mut ChaCha8Rng, p: f64) -> Result<(f64, f64, f64)> {
    let n = rng.random_range(1..=2usize);
    let dims: Vec<usize> = (0..n).map(|_| rng.random_range(4..=10)).collect();
    let ambient = GridMask::block(Exact::ratio(1, dims[0] as i64), vec![0; n], dims.clone());
    // v left of a cut on axis 0, w right of it; the blocks may touch
    let cut = rng.random_range(2..=dims[0] - 2);
    let zeros = vec![0; n];
    let mut left = dims.clone();
    left[0] = cut;
    let mut right_lo = zeros.clone();
    right_lo[0] = cut;
    let bv = random_block(rng, &zeros, &left);
    let bw = random_block(rng, &right_lo, &dims);
    let vm = sub_mask(&ambient, |x| in_block(x, &bv));
    let wm = sub_mask(&ambient, |x| in_block(x, &bw));
    let vg = NodeGrid::new(&vm, Bc::Dirichlet)?;
    let wg = NodeGrid::new(&wm, Bc::Dirichlet)?;
    let v = Field::new(vg.clone(), random_values(rng, vg.len()))?;
    let w = Field::new(wg.clone(), random_values(rng, wg.len()))?;
    let u = combine_disjoint(&v, &w, &ambient)?;
    Ok((p_energy(&u, p)?, p_energy(&v, p)?, p_energy(&w, p)?))
}

/// Energies `(E(u), E(u|V), E(u|W))` for a random Neumann field `u` on a
/// block and a random partition of its cells into `V` and `W`.
pub fn random_partition_pair(rng: &mut ChaCha8Rng, p: f64) -> Result<(f64, f64, f64)> {
    let n = rng.random_range(1..=2usize);
    let dims: Vec<usize> = (0..n).map(|_| rng.random_range(2..=10)).collect();
    let ambient = GridMask::block(Exact::ratio(1, dims[0] as i64), vec![0; n], dims.clone());
    let total = ambient.mask.len();
    let mut in_v: Vec<bool> = (0..total).map(|_| rng.random_bool(0.5)).collect();
    // both parts nonempty
    in_v[0] = true;
    in_v[total - 1] = false;
    let vm = sub_mask(&ambient, |x| in_v[ambient.linear(x)]);
    let wm = sub_mask(&ambient, |x| !in_v[ambient.linear(x)]);
    let grid = NodeGrid::new(&ambient, Bc::Neumann)?;
    let u = Field::new(grid.clone(), random_values(rng, grid.len()))?;
    let (rv, rw) = (restrict(&u, &vm)?, restrict(&u, &wm)?);
    Ok((p_energy(&u, p)?, p_energy(&rv, p)?, p_energy(&rw, p)?))
}

/// Report of one energy-split sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergySplitReport {
    pub p: f64,
    pub seed: u64,
    pub generator: String,
    pub instances: usize,
    /// Instances with `E(v + w) > max(E(v), E(w))`.
    pub disjoint_violations: usize,
    /// Instances with `E(u) < min(E(u|V), E(u|W))`.
    pub partition_violations: usize,
    /// Largest relative excess over the bound seen in either family
    /// (negative when every instance holds with room to spare).
    pub worst_relative_excess: f64,
}

impl EnergySplitReport {
    pub fn passed(&self) -> bool {
        self.disjoint_violations == 0 && self.partition_violations == 0
    }
}

/// `n` disjoint-support and `n` partition instances at exponent `p`.
pub fn sweep_energy_split(n: usize, seed: u64, p: f64) -> Result<EnergySplitReport> {
    if !(p > 1.0) {
        return arg_err("p must exceed 1");
    }
    let runs = par_map(n, |i| -> Result<(f64, f64)> {
        let mut rng = instance_rng(seed, i as u64);
        let (u, v, w) = random_disjoint_pair(&mut rng, p)?;
        let hi = v.max(w);
        let (u2, a, b) = random_partition_pair(&mut rng, p)?;
        let lo = a.min(b);
        Ok(((u - hi) / hi, (lo - u2) / lo.max(f64::MIN_POSITIVE)))
    });
    let mut rep = EnergySplitReport {
        p,
        seed,
        generator: GENERATOR.to_string(),
        instances: n,
        disjoint_violations: 0,
        partition_violations: 0,
        worst_relative_excess: f64::NEG_INFINITY,
    };
    for r in runs {
        let (ei, ein) =
            r.map_err(|e| Error::Solver(format!("energy-split instance failed: {e}")))?;
        rep.disjoint_violations += (ei > ENERGY_RTOL) as usize;
        rep.partition_violations += (ein > ENERGY_RTOL) as usize;
        rep.worst_relative_excess = rep.worst_relative_excess.max(ei).max(ein);
    }
    if !rep.worst_relative_excess.is_finite() {
        rep.worst_relative_excess = 0.0;
    }
    Ok(rep)
}
