//! Discrete p-Dirichlet energy on grid masks.
//!
//! Unknowns live on a node lattice derived from a [`GridMask`]:
//!
//! * Dirichlet: grid vertices all of whose adjacent cells are in the mask
//!   (vertex-centred, boundary vertices carry the value 0);
//! * Neumann: cell centres, with zero flux across the mask boundary.
//!
//! The gradient at a lattice point `x` is the vector of forward differences
//! `(u(x + e_a) - u(x)) / h`. Dirichlet ghosts read as 0, and every lattice
//! point with a node among `x, x + e_1, ..., x + e_n` contributes. Neumann
//! differences towards a non-node are 0 and only nodes contribute. For
//! `p = 2` this reproduces the standard `2n + 1` point stencil.

use std::collections::HashMap;
use std::sync::Arc;

use crate::domain::GridMask;
use crate::error::{arg_err, Error, Result};
use crate::spectrum::Bc;

/// Smoothing used in `|grad u|^(p-2)` when evaluating the discrete p-Laplacian.
pub const GRADIENT_DELTA: f64 = 1e-12;

const NONE: usize = usize::MAX;

/// Node set and gradient stencil of a grid mask under a boundary condition.
#[derive(Debug)]
pub struct NodeGrid {
    mask: GridMask,
    bc: Bc,
    h: f64,
    /// Global lattice coordinates of each node.
    nodes: Vec<Vec<i64>>,
    index: HashMap<Vec<i64>, usize>,
    /// Node at each gradient point, or `NONE` for a Dirichlet ghost.
    centers: Vec<usize>,
    /// Forward neighbour per gradient point and axis, row-major.
    forward: Vec<usize>,
}

impl NodeGrid {
    pub fn new(mask: &GridMask, bc: Bc) -> Result<Arc<NodeGrid>> {
        validate_mask(mask)?;
        let n = mask.dim();
        let cells = mask.cells();
        let nodes: Vec<Vec<i64>> = match bc {
            Bc::Neumann => cells,
            Bc::Dirichlet => {
                let mut verts: Vec<Vec<i64>> = Vec::new();
                let mut seen = std::collections::HashSet::new();
                for c in &cells {
                    for s in 0..1usize << n {
                        let v: Vec<i64> = (0..n).map(|a| c[a] + (s >> a & 1) as i64).collect();
                        if seen.insert(v.clone()) && interior_vertex(mask, &v) {
                            verts.push(v);
                        }
                    }
                }
                verts.sort();
                verts
            }
            Bc::Periodic => return arg_err("grid fields support dirichlet or neumann only"),
        };
        if nodes.is_empty() {
            return Err(Error::Domain("mask has no interior nodes".into()));
        }
        let index: HashMap<Vec<i64>, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();

        let mut points: Vec<Vec<i64>> = nodes.clone();
        if bc == Bc::Dirichlet {
            let mut ghosts = std::collections::BTreeSet::new();
            for v in &nodes {
                for a in 0..n {
                    let mut g = v.clone();
                    g[a] -= 1;
                    if !index.contains_key(&g) {
                        ghosts.insert(g);
                    }
                }
            }
            points.extend(ghosts);
        }
        let mut centers = Vec::with_capacity(points.len());
        let mut forward = Vec::with_capacity(points.len() * n);
        for x in &points {
            centers.push(index.get(x).copied().unwrap_or(NONE));
            for a in 0..n {
                let mut y = x.clone();
                y[a] += 1;
                forward.push(index.get(&y).copied().unwrap_or(NONE));
            }
        }
        Ok(Arc::new(NodeGrid {
            mask: mask.clone(),
            bc,
            h: mask.spacing(),
            nodes,
            index,
            centers,
            forward,
        }))
    }

    pub fn mask(&self) -> &GridMask {
        &self.mask
    }

    pub fn bc(&self) -> Bc {
        self.bc
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn dim(&self) -> usize {
        self.mask.dim()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Vec<i64>] {
        &self.nodes
    }

    pub fn node_index(&self, lattice: &[i64]) -> Option<usize> {
        self.index.get(lattice).copied()
    }

    /// Physical coordinates of node `i`.
    pub fn position(&self, i: usize) -> Vec<f64> {
        let shift = if self.bc == Bc::Neumann { 0.5 } else { 0.0 };
        self.nodes[i]
            .iter()
            .map(|&k| (k as f64 + shift) * self.h)
            .collect()
    }

    /// Neighbouring nodes of node `i` along all axes (both directions).
    pub fn neighbours(&self, i: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for a in 0..self.dim() {
            for d in [-1i64, 1] {
                let mut y = self.nodes[i].clone();
                y[a] += d;
                if let Some(j) = self.node_index(&y) {
                    out.push(j);
                }
            }
        }
        out
    }

    fn cell_measure(&self) -> f64 {
        self.h.powi(self.dim() as i32)
    }

    /// `(sum |grad u|^p h^n, sum |u|^p h^n)`.
    fn integrals(&self, u: &[f64], p: f64) -> (f64, f64) {
        let n = self.dim();
        let inv_h = 1.0 / self.h;
        let mut grad = 0.0;
        for (k, &c) in self.centers.iter().enumerate() {
            let uc = if c == NONE { 0.0 } else { u[c] };
            let mut sq = 0.0;
            for a in 0..n {
                let f = self.forward[k * n + a];
                let d = match (f, self.bc) {
                    (NONE, Bc::Neumann) => 0.0,
                    (NONE, _) => -uc * inv_h,
                    (f, _) => (u[f] - uc) * inv_h,
                };
                sq += d * d;
            }
            grad += pow_half(sq, p);
        }
        let lp: f64 = u.iter().map(|x| x.abs().powf(p)).sum();
        let m = self.cell_measure();
        (grad * m, lp * m)
    }

    /// Gradient of `u -> (1/p) sum |grad u|^p h^n`, written into `out`.
    fn p_laplacian_into(&self, u: &[f64], p: f64, out: &mut [f64]) {
        let n = self.dim();
        let inv_h = 1.0 / self.h;
        let m = self.cell_measure();
        out.iter_mut().for_each(|x| *x = 0.0);
        let mut diffs = vec![0.0; n];
        for (k, &c) in self.centers.iter().enumerate() {
            let uc = if c == NONE { 0.0 } else { u[c] };
            let mut sq = 0.0;
            for (a, d) in diffs.iter_mut().enumerate() {
                let f = self.forward[k * n + a];
                *d = match (f, self.bc) {
                    (NONE, Bc::Neumann) => 0.0,
                    (NONE, _) => -uc * inv_h,
                    (f, _) => (u[f] - uc) * inv_h,
                };
                sq += *d * *d;
            }
            let w = if p == 2.0 {
                1.0
            } else {
                (sq + GRADIENT_DELTA * GRADIENT_DELTA).powf(0.5 * (p - 2.0))
            };
            for (a, &d) in diffs.iter().enumerate() {
                let flux = w * d * inv_h * m;
                let f = self.forward[k * n + a];
                if f != NONE {
                    out[f] += flux;
                }
                if c != NONE {
                    out[c] -= flux;
                }
            }
        }
    }
}

fn validate_mask(mask: &GridMask) -> Result<()> {
    crate::domain::Domain::GridMask(mask.clone()).validate()
}

fn interior_vertex(mask: &GridMask, v: &[i64]) -> bool {
    let n = v.len();
    (0..1usize << n).all(|s| {
        let c: Vec<i64> = (0..n).map(|a| v[a] - (s >> a & 1) as i64).collect();
        mask.contains_global(&c)
    })
}

#[inline]
fn pow_half(sq: f64, p: f64) -> f64 {
    if p == 2.0 {
        sq
    } else {
        sq.powf(0.5 * p)
    }
}

/// Node values on a [`NodeGrid`].
#[derive(Clone, Debug)]
pub struct Field {
    pub grid: Arc<NodeGrid>,
    pub values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Arc<NodeGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return arg_err(format!(
                "expected {} node values, got {}",
                grid.len(),
                values.len()
            ));
        }
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: Arc<NodeGrid>) -> Self {
        let n = grid.len();
        Field {
            grid,
            values: vec![0.0; n],
        }
    }

    /// Samples `f` at the node positions.
    pub fn from_fn(grid: Arc<NodeGrid>, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.position(i))).collect();
        Field { grid, values }
    }

    pub fn scaled(&self, t: f64) -> Field {
        Field {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * t).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// `sum |grad u|^p h^n`.
    pub fn gradient_integral(&self, p: f64) -> f64 {
        self.grid.integrals(&self.values, p).0
    }

    /// `sum |u|^p h^n`.
    pub fn lp_integral(&self, p: f64) -> f64 {
        self.grid.integrals(&self.values, p).1
    }

    /// One CSV column of node values with a `value` header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("value\n");
        for v in &self.values {
            s.push_str(&format!("{v}\n"));
        }
        s
    }

    /// Node values as little-endian 64-bit floats.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        self.values.iter().flat_map(|v| v.to_le_bytes()).collect()
    }

    pub fn from_le_bytes(grid: Arc<NodeGrid>, bytes: &[u8]) -> Result<Self> {
        if !bytes.len().is_multiple_of(8) {
            return arg_err("byte length is not a multiple of 8");
        }
        let values = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Field::new(grid, values)
    }

    /// Domain JSON of the mask this field lives on.
    pub fn domain_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&crate::domain::Domain::GridMask(
            self.grid.mask.clone(),
        ))?)
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() {
        return arg_err(format!("p must lie in (1, inf), got {p}"));
    }
    Ok(())
}

/// `E(u) = sum |grad u|^p / sum |u|^p` (Riemann sums).
pub fn p_energy(u: &Field, p: f64) -> Result<f64> {
    check_p(p)?;
    let (num, den) = u.grid.integrals(&u.values, p);
    if den == 0.0 {
        return Err(Error::Domain(
            "energy of the zero field is undefined".into(),
        ));
    }
    Ok(num / den)
}

/// Normalization constraint used by [`normalize`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormMode {
    /// `||grad u||_p = 1`.
    GradientLp,
    /// `||u||_{W^{1,p}} = 1`, i.e. `int |grad u|^p + int |u|^p = 1`.
    SobolevW1p,
}

pub fn normalize(u: &Field, mode: NormMode, p: f64) -> Result<Field> {
    check_p(p)?;
    let (num, den) = u.grid.integrals(&u.values, p);
    if den == 0.0 {
        return Err(Error::Domain("cannot normalize the zero field".into()));
    }
    let total = match mode {
        NormMode::GradientLp => {
            if num == 0.0 {
                return Err(Error::Domain(
                    "constant field has zero gradient norm".into(),
                ));
            }
            num
        }
        NormMode::SobolevW1p => num + den,
    };
    Ok(u.scaled(total.powf(-1.0 / p)))
}

/// Gradient of `u -> (1/p) sum |grad u|^p h^n` with respect to node values.
///
/// For `p = 2` this is `h^n A u` with `A` the finite-difference Laplacian.
pub fn discrete_p_laplacian(u: &Field, p: f64) -> Result<Field> {
    check_p(p)?;
    let mut out = vec![0.0; u.values.len()];
    u.grid.p_laplacian_into(&u.values, p, &mut out);
    Ok(Field {
        grid: u.grid.clone(),
        values: out,
    })
}

pub(crate) fn integrals_raw(grid: &NodeGrid, u: &[f64], p: f64) -> (f64, f64) {
    grid.integrals(u, p)
}

pub(crate) fn p_laplacian_raw(grid: &NodeGrid, u: &[f64], p: f64, out: &mut [f64]) {
    grid.p_laplacian_into(u, p, out)
}

fn same_lattice(a: &NodeGrid, b: &NodeGrid) -> Result<()> {
    if a.bc != b.bc || a.mask.h != b.mask.h || a.dim() != b.dim() {
        return arg_err("fields live on incompatible grids");
    }
    Ok(())
}

fn mask_subset(inner: &GridMask, outer: &GridMask) -> bool {
    inner.cells().iter().all(|c| outer.contains_global(c))
}

/// `u := v + w` on `ambient` for `v`, `w` supported on disjoint sub-masks.
pub fn combine_disjoint(v: &Field, w: &Field, ambient: &GridMask) -> Result<Field> {
    same_lattice(&v.grid, &w.grid)?;
    if v.is_zero() && w.is_zero() {
        return arg_err("v and w are both zero");
    }
    let (vm, wm) = (&v.grid.mask, &w.grid.mask);
    if vm.cells().iter().any(|c| wm.contains_global(c)) {
        return arg_err("supports of v and w overlap");
    }
    if !mask_subset(vm, ambient) || !mask_subset(wm, ambient) {
        return arg_err("sub-masks are not contained in the ambient mask");
    }
    let grid = NodeGrid::new(ambient, v.grid.bc)?;
    let mut values = vec![0.0; grid.len()];
    for part in [v, w] {
        for (node, &x) in part.grid.nodes.iter().zip(&part.values) {
            let i = grid.node_index(node).ok_or_else(|| {
                Error::Argument("sub-mask node missing from the ambient grid".into())
            })?;
            values[i] += x;
        }
    }
    Ok(Field { grid, values })
}

/// Restriction `u|_S` to the nodes of a sub-mask `S`.
pub fn restrict(u: &Field, sub: &GridMask) -> Result<Field> {
    if sub.h != u.grid.mask.h || sub.dim() != u.grid.dim() {
        return arg_err("sub-mask lives on a different lattice");
    }
    if !mask_subset(sub, &u.grid.mask) {
        return arg_err("sub-mask is not contained in the field's mask");
    }
    let grid = NodeGrid::new(sub, u.grid.bc)?;
    let values = grid
        .nodes
        .iter()
        .map(|node| {
            u.grid
                .node_index(node)
                .map(|i| u.values[i])
                .ok_or_else(|| Error::Argument("sub-mask node missing from the field".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Field { grid, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::Exact;

    fn interval_grid(cells: usize, bc: Bc) -> Arc<NodeGrid> {
        NodeGrid::new(&GridMask::interval(1.0, cells).unwrap(), bc).unwrap()
    }

    #[test]
    fn linear_function_energy() {
        // u(x) = x on cell centres with zero-flux ends: E -> p + 1
        for (p, want) in [(2.0, 3.0), (3.0, 4.0)] {
            let g = interval_grid(4000, Bc::Neumann);
            let u = Field::from_fn(g, |x| x[0]);
            let e = p_energy(&u, p).unwrap();
            assert!((e - want).abs() < 1e-3 * want, "p={p}: {e}");
        }
    }

    #[test]
    fn sine_energy() {
        let g = interval_grid(1000, Bc::Dirichlet);
        let u = Field::from_fn(g, |x| (std::f64::consts::PI * x[0]).sin());
        let e = p_energy(&u, 2.0).unwrap();
        assert!((e - std::f64::consts::PI.powi(2)).abs() < 1e-2);
    }

    #[test]
    fn zero_field_is_an_error() {
        let u = Field::zeros(interval_grid(10, Bc::Dirichlet));
        assert!(matches!(p_energy(&u, 2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn constant_under_gradient_norm_is_an_error() {
        let g = interval_grid(10, Bc::Neumann);
        let u = Field::new(g.clone(), vec![1.0; g.len()]).unwrap();
        assert!(normalize(&u, NormMode::GradientLp, 2.0).is_err());
        assert!(normalize(&u, NormMode::SobolevW1p, 2.0).is_ok());
        let lap = discrete_p_laplacian(&u, 3.0).unwrap();
        assert!(lap.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn normalize_is_scale_free() {
        let g = interval_grid(50, Bc::Dirichlet);
        let u = Field::from_fn(g, |x| x[0] * (1.0 - x[0]) + 0.1 * (7.0 * x[0]).sin());
        for mode in [NormMode::GradientLp, NormMode::SobolevW1p] {
            let a = normalize(&u, mode, 3.0).unwrap();
            let b = normalize(&u.scaled(5.0), mode, 3.0).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((x - y).abs() <= 1e-14 * x.abs().max(1.0));
            }
            let (num, den) = a.grid.integrals(&a.values, 3.0);
            let norm = match mode {
                NormMode::GradientLp => num,
                NormMode::SobolevW1p => num + den,
            };
            assert!((norm - 1.0).abs() < 1e-12);
            let (e0, e1) = (p_energy(&u, 3.0).unwrap(), p_energy(&a, 3.0).unwrap());
            assert!((e0 - e1).abs() <= 1e-12 * e0);
        }
    }

    #[test]
    fn dirichlet_nodes_are_interior_vertices() {
        let g = NodeGrid::new(
            &GridMask::box_grid(&[4, 4], Exact::ratio(1, 4)),
            Bc::Dirichlet,
        )
        .unwrap();
        assert_eq!(g.len(), 9);
        let n = NodeGrid::new(
            &GridMask::box_grid(&[4, 4], Exact::ratio(1, 4)),
            Bc::Neumann,
        )
        .unwrap();
        assert_eq!(n.len(), 16);
    }

    #[test]
    fn combine_and_restrict() {
        let ambient = GridMask::interval(1.0, 20).unwrap();
        let mut left = ambient.clone();
        let mut right = ambient.clone();
        for i in 0..20 {
            left.mask[i] = i < 8;
            right.mask[i] = i >= 8;
        }
        let gv = NodeGrid::new(&left, Bc::Dirichlet).unwrap();
        let gw = NodeGrid::new(&right, Bc::Dirichlet).unwrap();
        let v = Field::from_fn(gv, |x| (x[0] * 5.0).sin().abs() + 0.1);
        let w = Field::zeros(gw);
        let u = combine_disjoint(&v, &w, &ambient).unwrap();
        assert!((p_energy(&u, 2.5).unwrap() - p_energy(&v, 2.5).unwrap()).abs() < 1e-12);
        assert!(combine_disjoint(&v, &v, &ambient).is_err());

        let gn = NodeGrid::new(&ambient, Bc::Neumann).unwrap();
        let u = Field::from_fn(gn, |x| if x[0] < 0.4 { x[0] + 1.0 } else { 0.0 });
        let r = restrict(&u, &left).unwrap();
        assert_eq!(r.values.len(), 8);
        let mut big = ambient.clone();
        big.dims = vec![21];
        big.mask.push(true);
        assert!(restrict(&u, &big).is_err());
    }
}
