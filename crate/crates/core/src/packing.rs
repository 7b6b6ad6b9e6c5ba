//! Cube packings and partitions of box-union domains.
//!
//! A [`Packing`] lists pieces `a_i U_i + b_i` inside an ambient domain. With
//! relation [`Relation::Sub`] the pieces must be pairwise disjoint and
//! contained in the ambient domain; with [`Relation::Cover`] they must in
//! addition exhaust it, so that their closures cover the ambient closure with
//! null pairwise overlaps. All checks run in exact rational arithmetic.

use serde::{Deserialize, Serialize};

use crate::domain::{Aabb, Domain};
use crate::error::{arg_err, Error, Result};
use crate::exact::{self, Exact};

/// Default maximum number of dyadic refinements in [`pack_cubes`].
pub const DEFAULT_DEPTH_CAP: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// Disjoint pieces inside the ambient domain.
    Sub,
    /// Null-overlap pieces whose closures cover the ambient closure.
    Cover,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackingItem {
    #[serde(with = "exact::as_string")]
    pub scale: Exact,
    #[serde(with = "exact::vec_as_string")]
    pub offset: Vec<Exact>,
    pub piece: Domain,
}

impl PackingItem {
    /// Boxes of `scale * piece + offset` in ambient coordinates.
    pub fn placed_boxes(&self) -> Result<Vec<Aabb>> {
        let boxes = self.piece.boxes().ok_or_else(|| {
            Error::Argument("packing pieces must be intervals or box unions".into())
        })?;
        Ok(boxes
            .iter()
            .map(|b| b.scaled(&self.scale).translated(&self.offset))
            .collect())
    }

    /// `scale^n * vol(piece)`.
    pub fn placed_volume(&self) -> Result<Exact> {
        let n = self.piece.dim() as i32;
        Ok(self.scale.pow(n) * self.piece.volume_exact()?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Packing {
    pub relation: Relation,
    pub items: Vec<PackingItem>,
    pub ambient: Domain,
}

impl Packing {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Scale factors `a_i` as floats.
    pub fn scales_f64(&self) -> Vec<f64> {
        self.items.iter().map(|it| it.scale.to_f64()).collect()
    }
}

/// Outcome of [`validate_packing`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackingReport {
    pub valid: bool,
    pub failures: Vec<String>,
    /// `sum_i a_i^n vol(U_i)`.
    pub piece_volume: Exact,
    pub ambient_volume: Exact,
}

/// Volume of `b` that lies inside a null-overlap union of boxes.
fn covered_volume(b: &Aabb, union: &[Aabb]) -> Exact {
    union.iter().map(|u| b.overlap_volume(u)).sum()
}

/// Pairs `(i, j)` of boxes with positive-measure overlap, using a sweep on axis 0.
fn overlapping_pairs(boxes: &[(usize, Aabb)]) -> Vec<(usize, usize, Exact)> {
    let mut order: Vec<usize> = (0..boxes.len()).collect();
    order.sort_by(|&x, &y| boxes[x].1.corner[0].cmp(&boxes[y].1.corner[0]));
    let mut out = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        let upper = boxes[i].1.upper(0);
        for &j in &order[pos + 1..] {
            if boxes[j].1.corner[0] >= upper {
                break;
            }
            if boxes[i].0 == boxes[j].0 {
                continue;
            }
            let ov = boxes[i].1.overlap_volume(&boxes[j].1);
            if !ov.is_zero() {
                out.push((boxes[i].0.min(boxes[j].0), boxes[i].0.max(boxes[j].0), ov));
            }
        }
    }
    out
}

/// Checks the packing invariants for its declared relation.
pub fn validate_packing(p: &Packing) -> PackingReport {
    let mut failures = Vec::new();
    let ambient_volume = p.ambient.volume_exact().unwrap_or_else(|e| {
        failures.push(format!("ambient: {e}"));
        Exact::zero()
    });
    let ambient_boxes = match p.ambient.boxes() {
        Some(b) => b,
        None => {
            failures.push("ambient must be an interval or box union".into());
            Vec::new()
        }
    };
    let n = p.ambient.dim();

    let mut placed: Vec<(usize, Aabb)> = Vec::new();
    let mut piece_volume = Exact::zero();
    for (i, item) in p.items.iter().enumerate() {
        if !item.scale.is_positive() {
            failures.push(format!("item {i}: scale {} is not positive", item.scale));
            continue;
        }
        if item.piece.dim() != n || item.offset.len() != n {
            failures.push(format!("item {i}: dimension mismatch with ambient"));
            continue;
        }
        if let Err(e) = item.piece.validate() {
            failures.push(format!("item {i}: {e}"));
            continue;
        }
        match (item.placed_boxes(), item.placed_volume()) {
            (Ok(boxes), Ok(vol)) => {
                piece_volume = piece_volume + vol;
                for b in boxes {
                    let inside = covered_volume(&b, &ambient_boxes);
                    if inside != b.volume() {
                        failures.push(format!(
                            "item {i}: piece not contained in ambient (uncovered volume {})",
                            b.volume() - inside
                        ));
                    }
                    placed.push((i, b));
                }
            }
            (Err(e), _) | (_, Err(e)) => failures.push(format!("item {i}: {e}")),
        }
    }

    for (i, j, ov) in overlapping_pairs(&placed) {
        failures.push(format!(
            "items {i} and {j} overlap with positive measure {ov}"
        ));
    }

    match p.relation {
        Relation::Sub => {
            if piece_volume > ambient_volume {
                failures.push(format!(
                    "piece volume {piece_volume} exceeds ambient volume {ambient_volume}"
                ));
            }
        }
        Relation::Cover => {
            if piece_volume != ambient_volume {
                failures.push(format!(
                    "cover volume {piece_volume} differs from ambient volume {ambient_volume}"
                ));
            }
        }
    }

    PackingReport {
        valid: failures.is_empty(),
        failures,
        piece_volume,
        ambient_volume,
    }
}

fn cube_item(corner: Vec<Exact>, side: Exact) -> PackingItem {
    let n = corner.len();
    PackingItem {
        scale: side,
        offset: corner,
        piece: Domain::unit_cube(n),
    }
}

/// [`pack_cubes_with_cap`] with the default depth cap.
pub fn pack_cubes(ambient: &Domain, eps: f64) -> Result<Packing> {
    pack_cubes_with_cap(ambient, eps, DEFAULT_DEPTH_CAP)
}

/// Dyadic sub-packing of `ambient` by scaled unit cubes with
/// `sum a_i^n >= vol(ambient) - eps`.
///
/// Starts from the bounding cube anchored at the lower corner and halves
/// every straddling cell until the volume target is met.
pub fn pack_cubes_with_cap(ambient: &Domain, eps: f64, depth_cap: u32) -> Result<Packing> {
    ambient.validate()?;
    let boxes = ambient.boxes().ok_or_else(|| {
        Error::Argument("pack_cubes needs an interval or box-union ambient".into())
    })?;
    let vol = ambient.volume_exact()?;
    if !(eps > 0.0) || eps >= vol.to_f64() {
        return arg_err(format!(
            "need 0 < eps < vol(ambient) = {}, got {eps}",
            vol.to_f64()
        ));
    }
    let target = vol.clone() - Exact::from_f64(eps)?;
    let n = ambient.dim();

    let lo: Vec<Exact> = (0..n)
        .map(|a| {
            boxes
                .iter()
                .map(|b| b.corner[a].clone())
                .min()
                .expect("box")
        })
        .collect();
    let side = (0..n)
        .map(|a| boxes.iter().map(|b| b.upper(a)).max().expect("box") - lo[a].clone())
        .max()
        .expect("dimension >= 1");

    let mut items = Vec::new();
    let mut achieved = Exact::zero();
    let mut frontier = vec![Aabb::cube(n, side.clone()).translated(&lo)];
    for _level in 0..=depth_cap {
        let mut next = Vec::new();
        for cell in frontier {
            let inside = covered_volume(&cell, &boxes);
            let cv = cell.volume();
            if inside == cv {
                achieved = achieved + cv;
                items.push(cube_item(cell.corner.clone(), cell.sides[0].clone()));
            } else if !inside.is_zero() {
                next.extend(children(&cell));
            }
        }
        if achieved >= target {
            return Ok(Packing {
                relation: Relation::Sub,
                items,
                ambient: ambient.clone(),
            });
        }
        frontier = next;
    }
    Err(Error::Resource(format!(
        "dyadic depth cap {depth_cap} reached with packed volume {} < target {}",
        achieved.to_f64(),
        target.to_f64()
    )))
}

fn children(cell: &Aabb) -> Vec<Aabb> {
    let n = cell.dim();
    let half = &cell.sides[0] * &Exact::ratio(1, 2);
    (0..1usize << n)
        .map(|mask| {
            let corner: Vec<Exact> = (0..n)
                .map(|a| {
                    if mask >> a & 1 == 1 {
                        &cell.corner[a] + &half
                    } else {
                        cell.corner[a].clone()
                    }
                })
                .collect();
            Aabb::cube(n, half.clone()).translated(&corner)
        })
        .collect()
}

/// Exact cover of a box union by equal cubes of side `(shortest side) / k`.
pub fn partition_cubes(ambient: &Domain, k: u32) -> Result<Packing> {
    ambient.validate()?;
    if k == 0 {
        return arg_err("k must be positive");
    }
    let boxes = ambient.boxes().ok_or_else(|| {
        Error::Argument("partition_cubes needs an interval or box-union ambient".into())
    })?;
    let shortest = boxes
        .iter()
        .flat_map(|b| b.sides.iter())
        .min()
        .cloned()
        .expect("box");
    let side = shortest / Exact::int(k as i64);
    let n = ambient.dim();

    let mut items = Vec::new();
    for (bi, b) in boxes.iter().enumerate() {
        let mut counts = Vec::with_capacity(n);
        for (a, s) in b.sides.iter().enumerate() {
            let q = s / &side;
            if !q.0.is_integer() {
                return arg_err(format!(
                    "box {bi} side {s} on axis {a} is not a multiple of the cube side {side}"
                ));
            }
            counts.push(q.to_f64() as usize);
        }
        let total: usize = counts.iter().product();
        for lin in 0..total {
            let mut rem = lin;
            let mut corner = vec![Exact::zero(); n];
            for a in (0..n).rev() {
                let i = rem % counts[a];
                rem /= counts[a];
                corner[a] = &b.corner[a] + &(Exact::int(i as i64) * side.clone());
            }
            items.push(cube_item(corner, side.clone()));
        }
    }
    Ok(Packing {
        relation: Relation::Cover,
        items,
        ambient: ambient.clone(),
    })
}
