//! Closed-form and oracle spectra.
//!
//! In one dimension the Dirichlet and Neumann eigenvalues of the p-Laplacian
//! on `(0, L)` are `(p - 1) (k pi_p / L)^p`. The shooting solver below
//! integrates the ODE directly and is used to certify that formula. For
//! `p = 2`, box and flat-torus spectra come from exhaustive lattice
//! enumeration.

use std::f64::consts::PI;

use crate::error::{arg_err, Error, Result};
use crate::spectrum::{Bc, Exactness, Spectrum};

/// Default number of lattice points visited before enumeration gives up.
pub const DEFAULT_LATTICE_CAP: u64 = 10_000_000;

/// Integration steps per shooting run.
pub const SHOOTING_STEPS: usize = 100_000;

/// Relative bracket width at which shooting bisection stops.
pub const SHOOTING_RTOL: f64 = 1e-10;

/// Half-period of the generalized sine, `2 pi / (p sin(pi / p))`.
pub fn pi_p(p: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return arg_err(format!("pi_p needs p > 1, got {p}"));
    }
    Ok(2.0 * PI / (p * (PI / p).sin()))
}

/// Weyl constant of the 1D problem, `(p - 1)^(-1/p) / pi_p`, per unit length.
pub fn weyl_constant_1d(p: f64) -> Result<f64> {
    Ok((p - 1.0).powf(-1.0 / p) / pi_p(p)?)
}

/// `k`-th 1D eigenvalue `(p - 1) (k pi_p / L)^p`.
pub fn eigenvalue_1d(p: f64, length: f64, k: u64) -> Result<f64> {
    Ok((p - 1.0) * (k as f64 * pi_p(p)? / length).powf(p))
}

/// `sign(x) |x|^e` with fast paths for the exponents that occur at
/// `p in {1.5, 2, 3, 4}`.
#[inline]
fn signed_pow(x: f64, e: f64) -> f64 {
    let a = x.abs();
    let m = if e == 1.0 {
        a
    } else if e == 2.0 {
        a * a
    } else if e == 3.0 {
        a * a * a
    } else if e == 0.5 {
        a.sqrt()
    } else if (e - 1.0 / 3.0).abs() < 1e-15 {
        a.cbrt()
    } else {
        a.powf(e)
    };
    m.copysign(x)
}

/// Boundary behaviour of a shooting run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Shot {
    /// `u(0) = 0, u'(0) = 1`; counts zeros of `u`.
    Dirichlet,
    /// `u(0) = 1, u'(0) = 0`; counts zeros of the flux `|u'|^(p-2) u'`.
    Neumann,
}

/// Number of sign changes of the tracked component on `(0, L]`, stopping
/// early once `stop_at` is reached.
fn shoot(p: f64, length: f64, lambda: f64, shot: Shot, stop_at: u64) -> Result<u64> {
    let steps = SHOOTING_STEPS;
    let h = length / steps as f64;
    let eu = 1.0 / (p - 1.0); // u' = sign(phi)|phi|^(1/(p-1))
    let ep = p - 1.0; // phi' = -lambda sign(u)|u|^(p-1)
    let rhs = |u: f64, phi: f64| (signed_pow(phi, eu), -lambda * signed_pow(u, ep));

    let (mut u, mut phi) = match shot {
        Shot::Dirichlet => (0.0, 1.0),
        Shot::Neumann => (1.0, 0.0),
    };
    // both tracked components start out moving to the positive side
    let mut sign = 1.0f64;
    let mut zeros = 0u64;
    for _ in 0..steps {
        let (k1u, k1p) = rhs(u, phi);
        let (k2u, k2p) = rhs(u + 0.5 * h * k1u, phi + 0.5 * h * k1p);
        let (k3u, k3p) = rhs(u + 0.5 * h * k2u, phi + 0.5 * h * k2p);
        let (k4u, k4p) = rhs(u + h * k3u, phi + h * k3p);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        phi += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        if !u.is_finite() || !phi.is_finite() {
            return Err(Error::Solver(format!(
                "shooting integrator diverged at p={p}, L={length}, lambda={lambda}"
            )));
        }
        let tracked = match shot {
            Shot::Dirichlet => u,
            Shot::Neumann => -phi,
        };
        if tracked != 0.0 && tracked.signum() != sign {
            sign = tracked.signum();
            zeros += 1;
            if zeros >= stop_at {
                break;
            }
        }
    }
    Ok(zeros)
}

fn shooting_eigenvalue(p: f64, length: f64, k: u64, shot: Shot) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return arg_err(format!("shooting needs p > 1, got {p}"));
    }
    if !(length > 0.0) || !length.is_finite() {
        return arg_err("interval length must be positive");
    }
    if k == 0 {
        return arg_err("eigenvalue index starts at 1");
    }
    // lambda_k is where the k-th zero of the tracked component reaches L
    let above = |lambda: f64| shoot(p, length, lambda, shot, k).map(|z| z >= k);
    let mut lo = 0.0;
    let mut hi = 1.0 / length.powf(p);
    let mut expansions = 0;
    while !above(hi)? {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 200 {
            return Err(Error::Solver(format!(
                "could not bracket eigenvalue {k} for p={p}, L={length}"
            )));
        }
    }
    while hi - lo > SHOOTING_RTOL * hi {
        let mid = 0.5 * (lo + hi);
        if above(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `k`-th Dirichlet eigenvalue of `-(|u'|^(p-2) u')' = lambda |u|^(p-2) u` on
/// `(0, L)` by shooting from `u(0) = 0, u'(0) = 1` and bisecting on `lambda`.
///
/// Integrates the first-order system in `(u, |u'|^(p-2) u')` with fixed-step
/// RK4, [`SHOOTING_STEPS`] steps.
pub fn shooting_eigenvalue_1d(p: f64, length: f64, k: u64) -> Result<f64> {
    shooting_eigenvalue(p, length, k, Shot::Dirichlet)
}

/// `k`-th nonzero Neumann eigenvalue on `(0, L)` by shooting from
/// `u(0) = 1, u'(0) = 0`; the flux must vanish for the `k`-th time at `L`.
pub fn shooting_eigenvalue_1d_neumann(p: f64, length: f64, k: u64) -> Result<f64> {
    shooting_eigenvalue(p, length, k, Shot::Neumann)
}

/// All 1D eigenvalues strictly below `lambda_max` on an interval of length `L`.
pub fn spectrum_1d(p: f64, length: f64, bc: Bc, lambda_max: f64) -> Result<Spectrum> {
    let pp = pi_p(p)?;
    if !(length > 0.0) {
        return arg_err("interval length must be positive");
    }
    if !(lambda_max > 0.0) {
        return arg_err("lambda_max must be positive");
    }
    let first = match bc {
        Bc::Dirichlet => 1u64,
        Bc::Neumann => 0,
        Bc::Periodic => {
            return Err(Error::Unsupported(
                "periodic 1D spectrum: use a torus".into(),
            ))
        }
    };
    let mut values = Vec::new();
    for k in first.. {
        let v = (p - 1.0) * (k as f64 * pp / length).powf(p);
        if v >= lambda_max {
            break;
        }
        values.push((v, 1));
    }
    Ok(Spectrum::from_weighted(
        values,
        p,
        bc,
        Exactness::Exact,
        1,
        length,
    ))
}

/// Enumerates `scale * sum_i (k_i / L_i)^2 < lambda_max` over `k_i >= k_min`,
/// calling `emit(value, weight)`; `weight_nonzero` multiplies the weight for
/// every nonzero index (2 for `k` and `-k` on a torus).
fn enumerate_lattice(
    lengths: &[f64],
    scale: f64,
    k_min: u64,
    weight_nonzero: u32,
    lambda_max: f64,
    cap: u64,
    emit: &mut dyn FnMut(f64, u32),
) -> Result<()> {
    let n = lengths.len();
    let mut visited = 0u64;
    let mut k = vec![k_min; n];
    // partial[a] = scale * sum_{b<a} (k_b/L_b)^2
    let term = |a: usize, k: u64| scale * (k as f64 / lengths[a]).powi(2);
    let mut stack_val = vec![0.0; n + 1];
    let mut axis = 0usize;
    loop {
        let v = stack_val[axis] + term(axis, k[axis]);
        // tail minimum from the remaining axes at k_min
        let rest: f64 = (axis + 1..n).map(|b| term(b, k_min)).sum();
        if v + rest < lambda_max {
            if axis + 1 == n {
                visited += 1;
                if visited > cap {
                    return Err(Error::Resource(format!(
                        "lattice enumeration exceeds cap of {cap} points"
                    )));
                }
                let nz = k.iter().filter(|&&x| x != 0).count() as u32;
                emit(v, weight_nonzero.pow(nz));
                k[axis] += 1;
            } else {
                stack_val[axis + 1] = v;
                axis += 1;
                k[axis] = k_min;
            }
        } else {
            if axis == 0 {
                return Ok(());
            }
            axis -= 1;
            k[axis] += 1;
        }
    }
}

fn check_lengths(lengths: &[f64], lambda_max: f64) -> Result<()> {
    if lengths.is_empty() || lengths.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return arg_err("side lengths must be positive");
    }
    if !(lambda_max > 0.0) {
        return arg_err("lambda_max must be positive");
    }
    Ok(())
}

/// Laplacian (`p = 2`) eigenvalues of the box `prod (0, L_i)` below `lambda_max`.
pub fn box_spectrum_p2(sides: &[f64], bc: Bc, lambda_max: f64) -> Result<Spectrum> {
    box_spectrum_p2_capped(sides, bc, lambda_max, DEFAULT_LATTICE_CAP)
}

pub fn box_spectrum_p2_capped(
    sides: &[f64],
    bc: Bc,
    lambda_max: f64,
    cap: u64,
) -> Result<Spectrum> {
    check_lengths(sides, lambda_max)?;
    let k_min = match bc {
        Bc::Dirichlet => 1,
        Bc::Neumann => 0,
        Bc::Periodic => {
            return Err(Error::Unsupported(
                "periodic box spectrum: use torus_spectrum_p2".into(),
            ))
        }
    };
    let mut values = Vec::new();
    enumerate_lattice(sides, PI * PI, k_min, 1, lambda_max, cap, &mut |v, w| {
        values.push((v, w))
    })?;
    let vol = sides.iter().product();
    Ok(Spectrum::from_weighted(
        values,
        2.0,
        bc,
        Exactness::Exact,
        sides.len(),
        vol,
    ))
}

/// Laplacian eigenvalues `4 pi^2 sum (k_i / L_i)^2`, `k in Z^n`, of the flat
/// torus with the given periods.
pub fn torus_spectrum_p2(periods: &[f64], lambda_max: f64) -> Result<Spectrum> {
    torus_spectrum_p2_capped(periods, lambda_max, DEFAULT_LATTICE_CAP)
}

pub fn torus_spectrum_p2_capped(periods: &[f64], lambda_max: f64, cap: u64) -> Result<Spectrum> {
    check_lengths(periods, lambda_max)?;
    let mut values = Vec::new();
    enumerate_lattice(
        periods,
        4.0 * PI * PI,
        0,
        2,
        lambda_max,
        cap,
        &mut |v, w| values.push((v, w)),
    )?;
    let vol = periods.iter().product();
    Ok(Spectrum::from_weighted(
        values,
        2.0,
        Bc::Periodic,
        Exactness::Exact,
        periods.len(),
        vol,
    ))
}
