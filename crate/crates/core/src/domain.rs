//! Computational domains: intervals, unions of axis-aligned boxes, rasterized
//! grid masks and flat tori.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{arg_err, Error, Result};
use crate::exact::Exact;

/// Closed axis-aligned box `corner + [0, sides]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Aabb {
    pub corner: Vec<Exact>,
    pub sides: Vec<Exact>,
}

impl Aabb {
    pub fn new(corner: Vec<Exact>, sides: Vec<Exact>) -> Self {
        Aabb { corner, sides }
    }

    /// Box from float corner and side lengths (converted exactly).
    pub fn from_f64(corner: &[f64], sides: &[f64]) -> Result<Self> {
        Ok(Aabb {
            corner: corner
                .iter()
                .map(|&c| Exact::from_f64(c))
                .collect::<Result<_>>()?,
            sides: sides
                .iter()
                .map(|&s| Exact::from_f64(s))
                .collect::<Result<_>>()?,
        })
    }

    /// `[0,1]^n` scaled by `side` with the corner at the origin.
    pub fn cube(n: usize, side: Exact) -> Self {
        Aabb {
            corner: vec![Exact::zero(); n],
            sides: vec![side; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.corner.len()
    }

    pub fn upper(&self, axis: usize) -> Exact {
        &self.corner[axis] + &self.sides[axis]
    }

    pub fn volume(&self) -> Exact {
        self.sides.iter().fold(Exact::one(), |acc, s| &acc * s)
    }

    /// Volume of the intersection with `other` (zero when they only touch).
    pub fn overlap_volume(&self, other: &Aabb) -> Exact {
        let mut vol = Exact::one();
        for a in 0..self.dim() {
            let lo = self.corner[a].clone().max(other.corner[a].clone());
            let hi = self.upper(a).min(other.upper(a));
            if hi <= lo {
                return Exact::zero();
            }
            vol = vol * (hi - lo);
        }
        vol
    }

    pub fn scaled(&self, a: &Exact) -> Aabb {
        Aabb {
            corner: self.corner.iter().map(|c| c * a).collect(),
            sides: self.sides.iter().map(|s| s * a).collect(),
        }
    }

    pub fn translated(&self, b: &[Exact]) -> Aabb {
        Aabb {
            corner: self.corner.iter().zip(b).map(|(c, t)| c + t).collect(),
            sides: self.sides.clone(),
        }
    }

    pub fn sides_f64(&self) -> Vec<f64> {
        self.sides.iter().map(Exact::to_f64).collect()
    }

    /// Half-open membership `corner <= x < corner + side` on every axis.
    fn contains_half_open(&self, x: &[Exact]) -> bool {
        (0..self.dim()).all(|a| x[a] >= self.corner[a] && x[a] < self.upper(a))
    }

    fn validate(&self) -> Result<()> {
        if self.corner.len() != self.sides.len() || self.corner.is_empty() {
            return Err(Error::Validation(
                "box corner/sides dimension mismatch".into(),
            ));
        }
        if let Some(s) = self.sides.iter().find(|s| !s.is_positive()) {
            return Err(Error::Validation(format!("non-positive box side {s}")));
        }
        Ok(())
    }
}

/// Rasterized domain: a set of cubic cells of side `h` on the global lattice
/// `h * Z^n`. Cell with multi-index `i` covers `[(origin+i) h, (origin+i+1) h]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridMask {
    pub h: Exact,
    pub origin: Vec<i64>,
    pub dims: Vec<usize>,
    #[serde(
        serialize_with = "mask_to_string",
        deserialize_with = "mask_from_string"
    )]
    pub mask: Vec<bool>,
}

fn mask_to_string<S: Serializer>(m: &[bool], s: S) -> std::result::Result<S::Ok, S::Error> {
    let txt: String = m.iter().map(|&b| if b { '1' } else { '0' }).collect();
    s.serialize_str(&txt)
}

fn mask_from_string<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<bool>, D::Error> {
    let txt = String::deserialize(d)?;
    txt.chars()
        .map(|c| match c {
            '1' => Ok(true),
            '0' => Ok(false),
            other => Err(serde::de::Error::custom(format!("bad mask char {other:?}"))),
        })
        .collect()
}

impl GridMask {
    /// Full rectangular block of cells.
    pub fn block(h: Exact, origin: Vec<i64>, dims: Vec<usize>) -> Self {
        let total = dims.iter().product();
        GridMask {
            h,
            origin,
            dims,
            mask: vec![true; total],
        }
    }

    /// Uniform grid on `(0, length)` with `cells` cells.
    pub fn interval(length: f64, cells: usize) -> Result<Self> {
        if !(length > 0.0) || cells == 0 {
            return arg_err("interval grid needs positive length and at least one cell");
        }
        let h = Exact::from_f64(length)? / Exact::int(cells as i64);
        Ok(GridMask::block(h, vec![0], vec![cells]))
    }

    /// Block of `counts` cells of side `h` with its corner at the origin.
    pub fn box_grid(counts: &[usize], h: Exact) -> Self {
        GridMask::block(h, vec![0; counts.len()], counts.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn spacing(&self) -> f64 {
        self.h.to_f64()
    }

    pub fn cell_count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    /// Linear index of a local multi-index (last axis fastest).
    pub fn linear(&self, local: &[usize]) -> usize {
        local
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &d)| acc * d + i)
    }

    pub fn unravel(&self, mut lin: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for a in (0..self.dims.len()).rev() {
            out[a] = lin % self.dims[a];
            lin /= self.dims[a];
        }
        out
    }

    /// Whether the cell at global lattice index `g` belongs to the mask.
    pub fn contains_global(&self, g: &[i64]) -> bool {
        let mut lin = 0usize;
        for ((&x, &o), &d) in g.iter().zip(&self.origin).zip(&self.dims) {
            let local = x - o;
            if local < 0 || local as usize >= d {
                return false;
            }
            lin = lin * d + local as usize;
        }
        self.mask[lin]
    }

    /// Global indices of every cell in the mask, in linear order.
    pub fn cells(&self) -> Vec<Vec<i64>> {
        (0..self.mask.len())
            .filter(|&i| self.mask[i])
            .map(|i| {
                self.unravel(i)
                    .iter()
                    .zip(&self.origin)
                    .map(|(&l, &o)| l as i64 + o)
                    .collect()
            })
            .collect()
    }

    pub fn volume_exact(&self) -> Exact {
        Exact::int(self.cell_count() as i64) * self.h.pow(self.dim() as i32)
    }

    fn validate(&self) -> Result<()> {
        if !self.h.is_positive() {
            return Err(Error::Validation("grid spacing must be positive".into()));
        }
        if self.dims.is_empty() || self.origin.len() != self.dims.len() {
            return Err(Error::Validation("grid origin/dims mismatch".into()));
        }
        if self.mask.len() != self.dims.iter().product::<usize>() {
            return Err(Error::Validation("mask length does not match dims".into()));
        }
        if self.cell_count() == 0 {
            return Err(Error::Validation("empty grid mask".into()));
        }
        Ok(())
    }
}

/// A bounded region of `R^n`, or a flat torus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Domain {
    /// Open interval `(start, start + length)`.
    Interval {
        start: Exact,
        length: Exact,
    },
    /// Union of boxes whose pairwise overlaps have measure zero.
    BoxUnion {
        n: usize,
        boxes: Vec<Aabb>,
    },
    GridMask(GridMask),
    /// `R^n / (periods_1 Z x ... x periods_n Z)`.
    Torus {
        periods: Vec<Exact>,
    },
}

impl Domain {
    pub fn interval(start: f64, length: f64) -> Result<Self> {
        let d = Domain::Interval {
            start: Exact::from_f64(start)?,
            length: Exact::from_f64(length)?,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn unit_interval() -> Self {
        Domain::Interval {
            start: Exact::zero(),
            length: Exact::one(),
        }
    }

    pub fn unit_cube(n: usize) -> Self {
        Domain::BoxUnion {
            n,
            boxes: vec![Aabb::cube(n, Exact::one())],
        }
    }

    pub fn box_union(boxes: Vec<Aabb>) -> Result<Self> {
        let n = boxes.first().map(Aabb::dim).unwrap_or(0);
        let d = Domain::BoxUnion { n, boxes };
        d.validate()?;
        Ok(d)
    }

    pub fn single_box(corner: &[f64], sides: &[f64]) -> Result<Self> {
        Domain::box_union(vec![Aabb::from_f64(corner, sides)?])
    }

    /// `([0,2] x [0,1]) u ([0,1] x [1,2])`, volume 3.
    pub fn l_shape() -> Self {
        Domain::BoxUnion {
            n: 2,
            boxes: vec![
                Aabb::new(
                    vec![Exact::zero(), Exact::zero()],
                    vec![Exact::int(2), Exact::one()],
                ),
                Aabb::new(
                    vec![Exact::zero(), Exact::one()],
                    vec![Exact::one(), Exact::one()],
                ),
            ],
        }
    }

    pub fn torus(periods: &[f64]) -> Result<Self> {
        let d = Domain::Torus {
            periods: periods
                .iter()
                .map(|&p| Exact::from_f64(p))
                .collect::<Result<_>>()?,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let d: Domain = serde_json::from_str(s)?;
        d.validate()?;
        Ok(d)
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::BoxUnion { n, .. } => *n,
            Domain::GridMask(g) => g.dim(),
            Domain::Torus { periods } => periods.len(),
        }
    }

    /// Checks positivity of all lengths and the null-overlap condition.
    pub fn validate(&self) -> Result<()> {
        match self {
            Domain::Interval { length, .. } => {
                if !length.is_positive() {
                    return Err(Error::Validation("interval length must be positive".into()));
                }
            }
            Domain::BoxUnion { n, boxes } => {
                if boxes.is_empty() || *n == 0 {
                    return Err(Error::Validation("box union needs at least one box".into()));
                }
                for b in boxes {
                    b.validate()?;
                    if b.dim() != *n {
                        return Err(Error::Validation(format!(
                            "box of dimension {} in a {n}-dimensional union",
                            b.dim()
                        )));
                    }
                }
                for (i, a) in boxes.iter().enumerate() {
                    for (j, b) in boxes.iter().enumerate().skip(i + 1) {
                        let ov = a.overlap_volume(b);
                        if !ov.is_zero() {
                            return Err(Error::Validation(format!(
                                "boxes {i} and {j} overlap with positive measure {ov}"
                            )));
                        }
                    }
                }
            }
            Domain::GridMask(g) => g.validate()?,
            Domain::Torus { periods } => {
                if periods.is_empty() || periods.iter().any(|p| !p.is_positive()) {
                    return Err(Error::Validation("torus periods must be positive".into()));
                }
            }
        }
        Ok(())
    }

    /// Boxes making up an interval or box-union domain.
    pub fn boxes(&self) -> Option<Vec<Aabb>> {
        match self {
            Domain::Interval { start, length } => {
                Some(vec![Aabb::new(vec![start.clone()], vec![length.clone()])])
            }
            Domain::BoxUnion { boxes, .. } => Some(boxes.clone()),
            _ => None,
        }
    }

    /// The single box when the domain is an interval or a one-box union.
    pub fn as_single_box(&self) -> Option<Aabb> {
        match self.boxes() {
            Some(mut b) if b.len() == 1 => b.pop(),
            _ => None,
        }
    }

    pub fn volume_exact(&self) -> Result<Exact> {
        self.validate()?;
        Ok(match self {
            Domain::Interval { length, .. } => length.clone(),
            Domain::BoxUnion { boxes, .. } => boxes.iter().map(Aabb::volume).sum(),
            Domain::GridMask(g) => g.volume_exact(),
            Domain::Torus { periods } => periods.iter().fold(Exact::one(), |a, p| &a * p),
        })
    }

    /// Lebesgue volume; `cells * h^n` for grid masks.
    pub fn volume(&self) -> Result<f64> {
        Ok(self.volume_exact()?.to_f64())
    }

    /// The dilate `a D = { a x : x in D }`.
    pub fn scaled_exact(&self, a: &Exact) -> Result<Domain> {
        if !a.is_positive() {
            return arg_err(format!("scale factor must be positive, got {a}"));
        }
        Ok(match self {
            Domain::Interval { start, length } => Domain::Interval {
                start: start * a,
                length: length * a,
            },
            Domain::BoxUnion { n, boxes } => Domain::BoxUnion {
                n: *n,
                boxes: boxes.iter().map(|b| b.scaled(a)).collect(),
            },
            Domain::GridMask(g) => {
                // cells keep their lattice indices; only the spacing changes
                let mut g = g.clone();
                g.h = &g.h * a;
                Domain::GridMask(g)
            }
            Domain::Torus { periods } => Domain::Torus {
                periods: periods.iter().map(|p| p * a).collect(),
            },
        })
    }

    pub fn translated(&self, b: &[Exact]) -> Result<Domain> {
        if b.len() != self.dim() {
            return arg_err("translation dimension mismatch");
        }
        Ok(match self {
            Domain::Interval { start, length } => Domain::Interval {
                start: start + &b[0],
                length: length.clone(),
            },
            Domain::BoxUnion { n, boxes } => Domain::BoxUnion {
                n: *n,
                boxes: boxes.iter().map(|x| x.translated(b)).collect(),
            },
            _ => return arg_err("only interval and box-union domains can be translated"),
        })
    }
}

/// `scale_domain(d, a)`: every coordinate multiplied by `a > 0`.
pub fn scale_domain(d: &Domain, a: f64) -> Result<Domain> {
    if !(a > 0.0) || !a.is_finite() {
        return arg_err(format!("scale factor must be positive, got {a}"));
    }
    d.scaled_exact(&Exact::from_f64(a)?)
}

/// Rasterizes an interval or box union onto cells of side `h`; a cell is kept
/// when its center lies in the domain (half-open box membership).
pub fn rasterize(d: &Domain, h: f64) -> Result<GridMask> {
    d.validate()?;
    let boxes = d
        .boxes()
        .ok_or_else(|| Error::Argument("rasterize needs an interval or box-union domain".into()))?;
    if !(h > 0.0) || !h.is_finite() {
        return arg_err("grid spacing must be positive");
    }
    let hx = Exact::from_f64(h)?;
    let smallest = boxes
        .iter()
        .flat_map(|b| b.sides.iter())
        .min()
        .cloned()
        .expect("non-empty");
    if hx > smallest {
        return arg_err(format!(
            "spacing {h} exceeds the smallest box side {}: degenerate rasterization",
            smallest.to_f64()
        ));
    }
    let n = boxes[0].dim();
    let mut origin = Vec::with_capacity(n);
    let mut dims = Vec::with_capacity(n);
    for a in 0..n {
        let lo = boxes
            .iter()
            .map(|b| b.corner[a].to_f64())
            .fold(f64::INFINITY, f64::min);
        let hi = boxes
            .iter()
            .map(|b| b.upper(a).to_f64())
            .fold(f64::NEG_INFINITY, f64::max);
        let o = (lo / h).floor() as i64 - 1;
        let e = (hi / h).ceil() as i64 + 1;
        origin.push(o);
        dims.push((e - o) as usize);
    }
    let total: usize = dims.iter().product();
    let mut grid = GridMask {
        h: hx.clone(),
        origin,
        dims,
        mask: vec![false; total],
    };
    let half = Exact::ratio(1, 2);
    for lin in 0..total {
        let local = grid.unravel(lin);
        let center: Vec<Exact> = local
            .iter()
            .zip(&grid.origin)
            .map(|(&l, &o)| (Exact::int(l as i64 + o) + half.clone()) * hx.clone())
            .collect();
        grid.mask[lin] = boxes.iter().any(|b| b.contains_half_open(&center));
    }
    Ok(crop(grid))
}

/// Shrinks the bounding block of a mask to its occupied cells.
fn crop(g: GridMask) -> GridMask {
    let n = g.dim();
    let mut lo = vec![usize::MAX; n];
    let mut hi = vec![0usize; n];
    for lin in 0..g.mask.len() {
        if g.mask[lin] {
            for (a, &i) in g.unravel(lin).iter().enumerate() {
                lo[a] = lo[a].min(i);
                hi[a] = hi[a].max(i);
            }
        }
    }
    if lo[0] == usize::MAX {
        return g;
    }
    let dims: Vec<usize> = (0..n).map(|a| hi[a] - lo[a] + 1).collect();
    let origin: Vec<i64> = (0..n).map(|a| g.origin[a] + lo[a] as i64).collect();
    let mut out = GridMask::block(g.h.clone(), origin, dims);
    for lin in 0..out.mask.len() {
        let local = out.unravel(lin);
        let src: Vec<usize> = local.iter().zip(&lo).map(|(&i, &l)| i + l).collect();
        out.mask[lin] = g.mask[g.linear(&src)];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volumes() {
        assert_eq!(Domain::unit_cube(2).volume().unwrap(), 1.0);
        let d = Domain::box_union(vec![
            Aabb::from_f64(&[0.0, 0.0], &[1.0, 1.0]).unwrap(),
            Aabb::from_f64(&[1.0, 0.0], &[1.0, 1.0]).unwrap(),
        ])
        .unwrap();
        assert_eq!(d.volume().unwrap(), 2.0);
        let s = scale_domain(&Domain::unit_cube(2), 3.0).unwrap();
        assert_eq!(s.volume().unwrap(), 9.0);
        assert_eq!(Domain::l_shape().volume().unwrap(), 3.0);
    }

    #[test]
    fn overlapping_boxes_rejected() {
        let r = Domain::box_union(vec![
            Aabb::from_f64(&[0.0, 0.0], &[1.0, 1.0]).unwrap(),
            Aabb::from_f64(&[0.5, 0.0], &[1.0, 1.0]).unwrap(),
        ]);
        assert!(matches!(r, Err(Error::Validation(_))));
    }

    #[test]
    fn non_positive_sides_rejected() {
        assert!(Domain::single_box(&[0.0], &[0.0]).is_err());
        assert!(Domain::interval(0.0, -1.0).is_err());
        assert!(Domain::torus(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn scaling() {
        let d = scale_domain(&Domain::unit_interval(), 2.0).unwrap();
        assert_eq!(
            d,
            Domain::Interval {
                start: Exact::zero(),
                length: Exact::int(2)
            }
        );
        let sq = scale_domain(&Domain::unit_cube(2), 0.5).unwrap();
        assert_eq!(
            sq.as_single_box().unwrap().sides,
            vec![Exact::ratio(1, 2); 2]
        );
        assert!(scale_domain(&Domain::unit_cube(2), 0.0).is_err());
        assert!(scale_domain(&Domain::unit_cube(2), -1.0).is_err());
    }

    #[test]
    fn rasterize_aligned() {
        let g = rasterize(&Domain::unit_cube(2), 0.25).unwrap();
        assert_eq!(g.cell_count(), 16);
        assert_eq!(g.volume_exact(), Exact::one());
        let l = rasterize(&Domain::l_shape(), 0.125).unwrap();
        assert_eq!(l.cell_count(), 192);
        assert_eq!(l.volume_exact(), Exact::int(3));
        let t = rasterize(&Domain::unit_cube(2), 1.0 / 3.0).unwrap();
        assert_eq!(t.cell_count(), 9);
    }

    #[test]
    fn rasterize_refuses_coarse_spacing() {
        let d = Domain::single_box(&[0.0, 0.0], &[1.0, 0.1]).unwrap();
        assert!(rasterize(&d, 0.2).is_err());
    }

    #[test]
    fn json_round_trip() {
        let txt = r#"{"kind":"box-union","n":2,"boxes":[{"corner":[0,0],"sides":[1,1]}]}"#;
        let d = Domain::from_json(txt).unwrap();
        assert_eq!(d, Domain::unit_cube(2));
        assert_eq!(serde_json::to_string(&d).unwrap(), txt);
        let t = Domain::from_json(r#"{"kind":"torus","periods":[1,1]}"#).unwrap();
        assert_eq!(t.dim(), 2);
        let g = rasterize(&Domain::l_shape(), 0.5).unwrap();
        let s = serde_json::to_string(&Domain::GridMask(g.clone())).unwrap();
        assert_eq!(Domain::from_json(&s).unwrap(), Domain::GridMask(g));
    }
}
