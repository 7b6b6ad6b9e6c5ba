//! Finite-difference spectra on grid masks.
//!
//! For `p = 2` the standard `(2n + 1)`-point Laplacian is assembled on the
//! node lattice of [`NodeGrid`] and diagonalized densely. For general `p`,
//! only the first Dirichlet eigenvalue is computed, by a nonlinear inverse
//! power iteration on the discrete energy.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::sync::Arc;

use faer::{Mat, Side};

use crate::domain::GridMask;
use crate::energy::{self, Field, NodeGrid};
use crate::error::{arg_err, Error, Result};
use crate::spectrum::{Bc, Exactness, SolverMeta, Spectrum};

/// Largest operator dimension [`eigensolve_p2`] accepts by default.
pub const DEFAULT_DIMENSION_CAP: usize = 20_000;

/// Symmetric sparse finite-difference Laplacian (row-compressed).
#[derive(Clone, Debug)]
pub struct DiscreteOperator {
    pub grid: Arc<NodeGrid>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl DiscreteOperator {
    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    pub fn bc(&self) -> Bc {
        self.grid.bc()
    }

    pub fn h(&self) -> f64 {
        self.grid.h()
    }

    /// Entries of row `i` as `(column, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    /// `x^T A x / x^T x`.
    pub fn rayleigh_quotient(&self, x: &[f64]) -> f64 {
        let ax = self.apply(x);
        let num: f64 = ax.iter().zip(x).map(|(a, b)| a * b).sum();
        let den: f64 = x.iter().map(|v| v * v).sum();
        num / den
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).filter(|&(c, _)| c == j).map(|(_, v)| v).sum()
    }

    /// `max |A - A^T|` over stored entries.
    pub fn asymmetry(&self) -> f64 {
        (0..self.dim())
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let n = self.dim();
        let mut m = Mat::<f64>::zeros(n, n);
        for i in 0..n {
            for (j, v) in self.row(i) {
                m[(i, j)] += v;
            }
        }
        m
    }

    /// Row-sum bound on the 2-norm.
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

fn is_connected(grid: &NodeGrid) -> bool {
    let n = grid.len();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    while let Some(i) = queue.pop_front() {
        for j in grid.neighbours(i) {
            if !seen[j] {
                seen[j] = true;
                count += 1;
                queue.push_back(j);
            }
        }
    }
    count == n
}

/// Assembles the `(2n + 1)`-point Laplacian scaled by `h^-2`: zero ghosts for
/// Dirichlet, mirrored (zero-flux) ghosts for Neumann.
pub fn assemble_fd(mask: &GridMask, bc: Bc) -> Result<DiscreteOperator> {
    let grid = NodeGrid::new(mask, bc)?;
    if !is_connected(&grid) {
        return arg_err("mask is disconnected; request spectra of its components separately");
    }
    let dim = grid.dim() as f64;
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let mut row_ptr = vec![0];
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    for i in 0..grid.len() {
        let nb = grid.neighbours(i);
        let diag = match bc {
            Bc::Dirichlet => 2.0 * dim,
            _ => nb.len() as f64,
        };
        cols.push(i);
        vals.push(diag * inv_h2);
        for j in nb {
            cols.push(j);
            vals.push(-inv_h2);
        }
        row_ptr.push(cols.len());
    }
    Ok(DiscreteOperator {
        grid,
        row_ptr,
        cols,
        vals,
    })
}

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns).
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Mat<f64>,
    /// Largest `||A v - lambda v|| / ||A||` over all pairs.
    pub max_residual: f64,
}

pub fn eigen_decomposition(op: &DiscreteOperator, cap: usize) -> Result<EigenPairs> {
    let n = op.dim();
    if n > cap {
        return Err(Error::Resource(format!(
            "operator dimension {n} exceeds cap {cap}"
        )));
    }
    let dense = op.to_dense();
    let evd = dense
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Solver(format!("eigendecomposition failed: {e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[a].total_cmp(&s[b]));
    let values: Vec<f64> = order.iter().map(|&i| s[i]).collect();
    let vectors = Mat::from_fn(n, n, |r, c| u[(r, order[c])]);

    let norm = values
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let mut max_residual = 0.0f64;
    let mut col = vec![0.0; n];
    for (c, &lam) in values.iter().enumerate() {
        for (r, x) in col.iter_mut().enumerate() {
            *x = vectors[(r, c)];
        }
        let av = op.apply(&col);
        let res: f64 = av
            .iter()
            .zip(&col)
            .map(|(a, x)| (a - lam * x).powi(2))
            .sum::<f64>()
            .sqrt();
        max_residual = max_residual.max(res / norm);
    }
    Ok(EigenPairs {
        values,
        vectors,
        max_residual,
    })
}

/// Residual bound each eigenpair must satisfy, relative to `||A||`.
pub const RESIDUAL_RTOL: f64 = 1e-8;

/// Full discrete spectrum of a `p = 2` operator.
pub fn eigensolve_p2(op: &DiscreteOperator) -> Result<Spectrum> {
    eigensolve_p2_capped(op, DEFAULT_DIMENSION_CAP)
}

pub fn eigensolve_p2_capped(op: &DiscreteOperator, cap: usize) -> Result<Spectrum> {
    let pairs = eigen_decomposition(op, cap)?;
    if pairs.max_residual > RESIDUAL_RTOL {
        return Err(Error::Solver(format!(
            "eigenpair residual {:.3e} exceeds {RESIDUAL_RTOL:e}",
            pairs.max_residual
        )));
    }
    let norm = pairs.values.last().copied().unwrap_or(1.0).abs();
    // the Neumann kernel comes out at round-off level, possibly negative
    let values: Vec<f64> = pairs
        .values
        .iter()
        .map(|&v| if v.abs() <= 1e-10 * norm { 0.0 } else { v })
        .collect();
    let mask = op.grid.mask();
    let vol = mask.volume_exact().to_f64();
    let meta = SolverMeta {
        method: "dense-symmetric-evd".into(),
        h: Some(op.h()),
        tol: Some(RESIDUAL_RTOL),
        iterations: None,
    };
    Ok(
        Spectrum::from_values(values, 2.0, op.bc(), Exactness::Discrete, mask.dim(), vol)
            .with_solver(meta),
    )
}

/// Largest `lambda` for which a single-axis discrete mode underestimates its
/// continuum eigenvalue by at most `rel_err`.
///
/// Along one axis the discrete eigenvalue of a continuum mode `mu` is
/// `(4 / h^2) sin^2(sqrt(mu) h / 2)`, i.e. `mu sinc^2(sqrt(mu) h / 2)`. The
/// cut is where `1 - sinc^2` reaches `rel_err`; in several dimensions every
/// axis carries at most that error.
pub fn trusted_count_threshold(op: &DiscreteOperator, rel_err: f64) -> Result<f64> {
    trusted_threshold_for_spacing(op.h(), rel_err)
}

pub fn trusted_threshold_for_spacing(h: f64, rel_err: f64) -> Result<f64> {
    if !(rel_err > 0.0 && rel_err <= 0.1) {
        return arg_err(format!("rel_err must lie in (0, 0.1], got {rel_err}"));
    }
    let deficit = |x: f64| 1.0 - (x.sin() / x).powi(2);
    // deficit increases on (0, pi/2] and reaches 1 - 4/pi^2 > 0.1 there
    let (mut lo, mut hi) = (0.0f64, PI / 2.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if deficit(mid) <= rel_err {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((2.0 * lo / h).powi(2))
}

/// Settings for [`min_p_rayleigh`].
#[derive(Clone, Debug)]
pub struct RayleighOptions {
    /// Outer stopping rule `|lambda_{t+1} - lambda_t| <= tol * lambda_t`.
    pub tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Inner solves stop once `||grad J|| <= inner_rtol * ||grad J(v_0)||`.
    pub inner_rtol: f64,
    pub armijo_slope: f64,
    pub armijo_shrink: f64,
    /// Number of curvature pairs kept by the L-BFGS inner solver.
    pub lbfgs_memory: usize,
}

impl Default for RayleighOptions {
    fn default() -> Self {
        RayleighOptions {
            tol: 1e-8,
            max_outer: 10_000,
            max_inner: 20_000,
            inner_rtol: 1e-8,
            armijo_slope: 1e-4,
            armijo_shrink: 0.5,
            lbfgs_memory: 8,
        }
    }
}

impl RayleighOptions {
    pub fn with_tol(tol: f64) -> Self {
        RayleighOptions {
            tol,
            ..Default::default()
        }
    }
}

/// Result of [`min_p_rayleigh`].
#[derive(Clone, Debug)]
pub struct RayleighResult {
    pub lambda: f64,
    /// Minimizer with `sum |u|^p h^n = 1`.
    pub field: Field,
    /// `E` after each outer iteration, starting with the initial guess.
    pub energy_trace: Vec<f64>,
    pub inner_iterations: usize,
}

impl RayleighResult {
    pub fn outer_iterations(&self) -> usize {
        self.energy_trace.len() - 1
    }

    /// Whether the energy never increased by more than `slack` relative.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.energy_trace
            .windows(2)
            .all(|w| w[1] <= w[0] * (1.0 + slack))
    }

    pub fn meta(&self, tol: f64) -> SolverMeta {
        SolverMeta {
            method: "inverse-power".into(),
            h: Some(self.field.grid.h()),
            tol: Some(tol),
            iterations: Some(self.outer_iterations()),
        }
    }
}

fn dot_weighted(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Two-loop recursion: writes `-H g` into `out`, where `H` is the L-BFGS
/// inverse Hessian built from `(s, y, 1 / s.y)` pairs, oldest first.
fn lbfgs_direction(g: &[f64], pairs: &VecDeque<(Vec<f64>, Vec<f64>, f64)>, out: &mut [f64]) {
    out.copy_from_slice(g);
    let mut alpha = vec![0.0; pairs.len()];
    for (k, (s, y, rho)) in pairs.iter().enumerate().rev() {
        alpha[k] = rho * dot_weighted(s, out);
        out.iter_mut()
            .zip(y)
            .for_each(|(q, yi)| *q -= alpha[k] * yi);
    }
    if let Some((s, y, _)) = pairs.back() {
        let gamma = dot_weighted(s, y) / dot_weighted(y, y);
        out.iter_mut().for_each(|q| *q *= gamma);
    }
    for (k, (s, y, rho)) in pairs.iter().enumerate() {
        let beta = rho * dot_weighted(y, out);
        out.iter_mut()
            .zip(s)
            .for_each(|(r, si)| *r += (alpha[k] - beta) * si);
    }
    out.iter_mut().for_each(|r| *r = -*r);
}

/// Positive starting guess: a product of parabolic bumps `4 s (1 - s)` over
/// the mask's bounding box, floored at `1e-3`. It is not an eigenvector of
/// the discrete operator for any `p`.
fn initial_guess(grid: &Arc<NodeGrid>) -> Vec<f64> {
    let mask = grid.mask();
    let h = mask.spacing();
    let lo: Vec<f64> = mask.origin.iter().map(|&o| o as f64 * h).collect();
    let ext: Vec<f64> = mask.dims.iter().map(|&d| d as f64 * h).collect();
    (0..grid.len())
        .map(|i| {
            grid.position(i)
                .iter()
                .enumerate()
                .map(|(a, &x)| {
                    let s = (x - lo[a]) / ext[a];
                    (4.0 * s * (1.0 - s)).max(1e-3)
                })
                .product()
        })
        .collect()
}

/// Normalizes `u` in place to `sum |u|^p h^n = 1` and returns its energy.
fn normalize_lp(grid: &NodeGrid, u: &mut [f64], p: f64) -> Result<f64> {
    let (num, den) = energy::integrals_raw(grid, u, p);
    if !(den > 0.0) || !den.is_finite() {
        return Err(Error::Solver("iterate collapsed to zero".into()));
    }
    let s = den.powf(-1.0 / p);
    u.iter_mut().for_each(|x| *x *= s);
    Ok(num / den)
}

/// First Dirichlet eigenvalue of the discrete p-Laplacian on `mask`, as the
/// minimum of the discrete energy.
///
/// Each outer step minimizes the strictly convex
/// `J(v) = (1/p) sum |grad v|^p h^n - sum |u|^(p-2) u v h^n`
/// by L-BFGS with Armijo backtracking, warm-started at the optimal
/// multiple of `u`, and renormalizes. Any `v` with `J(v) <= J(t u)` has
/// `E(v) <= E(u)`, so the energy sequence is non-increasing.
pub fn min_p_rayleigh(
    mask: &GridMask,
    p: f64,
    bc: Bc,
    opts: &RayleighOptions,
) -> Result<RayleighResult> {
    if !(p > 1.0) || !p.is_finite() {
        return arg_err(format!("p must lie in (1, inf), got {p}"));
    }
    let grid = NodeGrid::new(mask, bc)?;
    if bc == Bc::Neumann {
        // constants minimize the energy
        let mut u = vec![1.0; grid.len()];
        normalize_lp(&grid, &mut u, p)?;
        return Ok(RayleighResult {
            lambda: 0.0,
            field: Field::new(grid, u)?,
            energy_trace: vec![0.0],
            inner_iterations: 0,
        });
    }
    let m = grid.h().powi(grid.dim() as i32);
    let mut u = initial_guess(&grid);
    let mut lambda = normalize_lp(&grid, &mut u, p)?;
    let mut trace = vec![lambda];
    let mut inner_total = 0usize;

    let nn = grid.len();
    let mut g = vec![0.0; nn];
    let mut v_trial = vec![0.0; nn];
    for _outer in 0..opts.max_outer {
        // s(u) h^n
        let load: Vec<f64> = u.iter().map(|&x| x.abs().powf(p - 2.0) * x * m).collect();
        let objective = |v: &[f64]| -> f64 {
            let (num, _) = energy::integrals_raw(&grid, v, p);
            num / p - dot_weighted(&load, v)
        };
        let gradient = |v: &[f64], out: &mut [f64]| {
            energy::p_laplacian_raw(&grid, v, p, out);
            for (o, l) in out.iter_mut().zip(&load) {
                *o -= l;
            }
        };

        let t = lambda.powf(-1.0 / (p - 1.0));
        let mut v: Vec<f64> = u.iter().map(|x| x * t).collect();
        let mut jv = objective(&v);
        gradient(&v, &mut g);
        let g0 = dot_weighted(&g, &g).sqrt();
        let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
        let mut dir = vec![0.0; nn];
        for _inner in 0..opts.max_inner {
            let gg = dot_weighted(&g, &g);
            if gg.sqrt() <= opts.inner_rtol * g0 || gg == 0.0 {
                break;
            }
            inner_total += 1;
            lbfgs_direction(&g, &pairs, &mut dir);
            let mut slope = dot_weighted(&g, &dir);
            if !(slope < 0.0) {
                // curvature history is useless here, fall back to steepest descent
                pairs.clear();
                dir.iter_mut().zip(&g).for_each(|(d, gi)| *d = -gi);
                slope = -gg;
            }
            let mut step = if pairs.is_empty() {
                (1.0 / gg.sqrt()).min(1.0)
            } else {
                1.0
            };
            let mut accepted = false;
            for _ in 0..60 {
                for ((vt, vi), di) in v_trial.iter_mut().zip(&v).zip(&dir) {
                    *vt = vi + step * di;
                }
                let jt = objective(&v_trial);
                // strict decrease also stops the solve at the roundoff floor of J
                if jt <= jv + opts.armijo_slope * step * slope && jt < jv {
                    jv = jt;
                    accepted = true;
                    break;
                }
                step *= opts.armijo_shrink;
            }
            if !accepted {
                break;
            }
            let dv: Vec<f64> = v_trial.iter().zip(&v).map(|(a, b)| a - b).collect();
            let g_old = g.clone();
            std::mem::swap(&mut v, &mut v_trial);
            gradient(&v, &mut g);
            let dg: Vec<f64> = g.iter().zip(&g_old).map(|(a, b)| a - b).collect();
            let sy = dot_weighted(&dv, &dg);
            if sy > 1e-300 {
                pairs.push_back((dv, dg, 1.0 / sy));
                if pairs.len() > opts.lbfgs_memory {
                    pairs.pop_front();
                }
            }
        }

        let new_lambda = normalize_lp(&grid, &mut v, p)?;
        trace.push(new_lambda);
        u = v;
        let converged = (new_lambda - lambda).abs() <= opts.tol * lambda;
        lambda = new_lambda;
        if converged {
            return Ok(RayleighResult {
                lambda,
                field: Field::new(grid, u)?,
                energy_trace: trace,
                inner_iterations: inner_total,
            });
        }
    }
    let tail: Vec<String> = trace
        .iter()
        .rev()
        .take(5)
        .map(|x| format!("{x:.10e}"))
        .collect();
    Err(Error::Solver(format!(
        "inverse power iteration did not converge in {} outer steps; last energies {}",
        opts.max_outer,
        tail.join(", ")
    )))
}

/// Number of connected sign components of `u`, ignoring values below
/// `1e-8 max |u|`.
pub fn nodal_domains(u: &Field) -> usize {
    let grid = &u.grid;
    let thr = 1e-8 * u.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let sign = |i: usize| {
        let v = u.values[i];
        if v > thr {
            1i8
        } else if v < -thr {
            -1
        } else {
            0
        }
    };
    let mut seen = vec![false; grid.len()];
    let mut domains = 0;
    for start in 0..grid.len() {
        if seen[start] || sign(start) == 0 {
            continue;
        }
        domains += 1;
        let s = sign(start);
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            for j in grid.neighbours(i) {
                if !seen[j] && sign(j) == s {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    domains
}
