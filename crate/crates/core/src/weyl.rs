//! Counting functions, Weyl-constant estimates and numerical checks of the
//! counting inequalities.
//!
//! Every check compares integer eigenvalue counts `N(lambda) = #{k : lambda_k < lambda}`
//! taken from exact spectra, so a report either holds at every grid point or
//! names the points where it fails. No tolerance is applied to counts.

use serde::{Deserialize, Serialize};

use crate::domain::{Aabb, Domain};
use crate::error::{arg_err, Error, Result};
use crate::exact::Exact;
use crate::exact_spectra::{
    box_spectrum_p2_capped, spectrum_1d, torus_spectrum_p2_capped, DEFAULT_LATTICE_CAP,
};
use crate::packing::{validate_packing, Packing, Relation};
use crate::spectrum::{Bc, Exactness, Spectrum};

/// Default density of logarithmic λ grids.
pub const DEFAULT_PER_DECADE: usize = 200;

/// Minimum number of curve samples accepted by [`estimate_weyl_constant`].
pub const MIN_ESTIMATE_SAMPLES: usize = 100;

/// Number of eigenvalues strictly below `lambda`, with multiplicity.
pub fn count(s: &Spectrum, lambda: f64) -> u64 {
    Counter::new(s).count(lambda)
}

/// Prefix-summed view of a spectrum for repeated counting.
#[derive(Clone, Debug)]
pub struct Counter {
    values: Vec<f64>,
    cumulative: Vec<u64>,
}

impl Counter {
    pub fn new(s: &Spectrum) -> Self {
        let mut total = 0;
        let mut values = Vec::with_capacity(s.eigenvalues.len());
        let mut cumulative = Vec::with_capacity(s.eigenvalues.len() + 1);
        cumulative.push(0);
        for &(v, m) in &s.eigenvalues {
            values.push(v);
            total += m as u64;
            cumulative.push(total);
        }
        Counter { values, cumulative }
    }

    pub fn count(&self, lambda: f64) -> u64 {
        self.cumulative[self.values.partition_point(|&v| v < lambda)]
    }
}

/// `count` points per decade, log-spaced, from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || per_decade == 0 {
        return arg_err(format!("bad λ range [{lo}, {hi}]"));
    }
    let points = ((hi / lo).log10() * per_decade as f64).ceil() as usize + 1;
    log_grid_points(lo, hi, points.max(2))
}

/// Exactly `points` log-spaced values from `lo` to `hi`.
pub fn log_grid_points(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || points < 2 {
        return arg_err(format!("bad λ range [{lo}, {hi}] with {points} points"));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let last = (points - 1) as f64;
    let mut g: Vec<f64> = (0..points)
        .map(|i| (a + (b - a) * i as f64 / last).exp())
        .collect();
    g[0] = lo;
    g[points - 1] = hi;
    Ok(g)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return arg_err("empty λ grid");
    }
    if grid.iter().any(|&l| !(l > 0.0) || !l.is_finite()) || grid.windows(2).any(|w| !(w[0] < w[1]))
    {
        return arg_err("λ grid must be positive and strictly increasing");
    }
    Ok(())
}

/// Samples of `N(lambda)` and `f(lambda) = lambda^(-n/p) N(lambda)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingCurve {
    pub n: usize,
    pub p: f64,
    pub bc: Bc,
    pub domain_volume: f64,
    pub lambda: Vec<f64>,
    pub counts: Vec<u64>,
    pub f: Vec<f64>,
}

impl CountingCurve {
    fn from_counts(n: usize, p: f64, bc: Bc, vol: f64, lambda: Vec<f64>, counts: Vec<u64>) -> Self {
        let e = n as f64 / p;
        let f = lambda
            .iter()
            .zip(&counts)
            .map(|(&l, &c)| c as f64 * l.powf(-e))
            .collect();
        CountingCurve {
            n,
            p,
            bc,
            domain_volume: vol,
            lambda,
            counts,
            f,
        }
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    /// CSV with header `lambda,N,f`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,N,f\n");
        for i in 0..self.len() {
            out.push_str(&format!(
                "{},{},{}\n",
                self.lambda[i], self.counts[i], self.f[i]
            ));
        }
        out
    }
}

/// Counting curve of `s` on `grid`.
pub fn counting_curve(s: &Spectrum, grid: &[f64]) -> Result<CountingCurve> {
    check_grid(grid)?;
    let c = Counter::new(s);
    let counts = grid.iter().map(|&l| c.count(l)).collect();
    Ok(CountingCurve::from_counts(
        s.n,
        s.p,
        s.bc,
        s.domain_volume,
        grid.to_vec(),
        counts,
    ))
}

/// Tail average of `f` per unit volume.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylEstimate {
    /// Mean of `f / vol` over the window.
    pub c_hat: f64,
    /// `(max f - min f) / vol` over the window.
    pub spread: f64,
    pub window: [f64; 2],
    pub samples: usize,
    pub method: String,
}

fn window_start(curve: &CountingCurve, fraction: f64) -> Result<usize> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return arg_err(format!(
            "window fraction must lie in (0, 1], got {fraction}"
        ));
    }
    let (lo, hi) = (curve.lambda[0].ln(), curve.lambda[curve.len() - 1].ln());
    let cut = hi - fraction * (hi - lo);
    // tiny slack so a fraction of 1 keeps the first sample despite rounding
    Ok(curve.lambda.partition_point(|&l| l.ln() < cut - 1e-12))
}

/// Averages `f` over the top `window_fraction` of the curve's log-λ range.
pub fn estimate_weyl_constant(curve: &CountingCurve, window_fraction: f64) -> Result<WeylEstimate> {
    if curve.len() < MIN_ESTIMATE_SAMPLES {
        return Err(Error::Estimation(format!(
            "need at least {MIN_ESTIMATE_SAMPLES} curve samples, got {}",
            curve.len()
        )));
    }
    let start = window_start(curve, window_fraction)?;
    let f = &curve.f[start..];
    if f.is_empty() {
        return Err(Error::Estimation("empty fit window".into()));
    }
    if curve.counts[start..].contains(&0) {
        return Err(Error::Estimation(format!(
            "N vanishes inside the fit window starting at λ = {}; raise the λ range",
            curve.lambda[start]
        )));
    }
    let vol = curve.domain_volume;
    let mean = f.iter().sum::<f64>() / f.len() as f64;
    let (mn, mx) = min_max(f);
    Ok(WeylEstimate {
        c_hat: mean / vol,
        spread: (mx - mn) / vol,
        window: [curve.lambda[start], curve.lambda[curve.len() - 1]],
        samples: f.len(),
        method: format!("tail-mean(fraction={window_fraction})"),
    })
}

fn min_max(xs: &[f64]) -> (f64, f64) {
    xs.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        })
}

/// Source of spectra for the inequality checks.
pub trait SpectrumProvider {
    /// All eigenvalues of `d` below `lambda_max`.
    fn spectrum(&self, d: &Domain, p: f64, bc: Bc, lambda_max: f64) -> Result<Spectrum>;
}

/// Closed-form and lattice spectra: intervals for any `p`; single boxes and
/// flat tori for `p = 2`; unions of boxes at positive mutual distance by
/// merging the spectra of their components.
///
/// Merging is exact for counting: on a union of separated components both
/// the sub-packing and the cover inequality apply, so `N` is additive.
#[derive(Clone, Copy, Debug)]
pub struct ExactProvider {
    pub lattice_cap: u64,
}

impl Default for ExactProvider {
    fn default() -> Self {
        ExactProvider {
            lattice_cap: DEFAULT_LATTICE_CAP,
        }
    }
}

fn separated(a: &Aabb, b: &Aabb) -> bool {
    (0..a.dim()).any(|i| a.upper(i) < b.corner[i] || b.upper(i) < a.corner[i])
}

impl ExactProvider {
    fn box_spectrum(&self, b: &Aabb, p: f64, bc: Bc, lambda_max: f64) -> Result<Spectrum> {
        let sides = b.sides_f64();
        if sides.len() == 1 {
            return spectrum_1d(p, sides[0], bc, lambda_max);
        }
        if p != 2.0 {
            return Err(Error::Unsupported(format!(
                "no exact spectrum for p = {p} in dimension {}; exact boxes need p = 2 or n = 1",
                sides.len()
            )));
        }
        box_spectrum_p2_capped(&sides, bc, lambda_max, self.lattice_cap)
    }
}

impl SpectrumProvider for ExactProvider {
    fn spectrum(&self, d: &Domain, p: f64, bc: Bc, lambda_max: f64) -> Result<Spectrum> {
        d.validate()?;
        match d {
            Domain::Torus { periods } => {
                if p != 2.0 || bc != Bc::Periodic {
                    return Err(Error::Unsupported(
                        "exact torus spectra need p = 2 and periodic boundary conditions".into(),
                    ));
                }
                let per: Vec<f64> = periods.iter().map(Exact::to_f64).collect();
                torus_spectrum_p2_capped(&per, lambda_max, self.lattice_cap)
            }
            Domain::GridMask(_) => Err(Error::Unsupported(
                "grid masks have only discrete spectra; use the finite-difference solver".into(),
            )),
            Domain::Interval { .. } | Domain::BoxUnion { .. } => {
                let boxes = d.boxes().unwrap_or_default();
                if boxes.len() > 1 {
                    for (i, a) in boxes.iter().enumerate() {
                        if boxes[i + 1..].iter().any(|b| !separated(a, b)) {
                            return Err(Error::Unsupported(
                                "exact spectra of touching box unions are unavailable; use sandwich bounds".into(),
                            ));
                        }
                    }
                }
                let mut values = Vec::new();
                for b in &boxes {
                    values.extend(self.box_spectrum(b, p, bc, lambda_max)?.eigenvalues);
                }
                Ok(Spectrum::from_weighted(
                    values,
                    p,
                    bc,
                    Exactness::Exact,
                    d.dim(),
                    d.volume()?,
                ))
            }
        }
    }
}

/// Direction of the asserted relation `lhs ? rhs`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    Ge,
    Le,
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Friedlander constants fitted on a tail window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FriedlanderFit {
    pub c1: f64,
    pub c2: f64,
    pub window: [f64; 2],
}

impl FriedlanderFit {
    pub fn ratio(&self) -> f64 {
        self.c2 / self.c1
    }
}

/// Pointwise comparison of two counting expressions on a λ grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub statement: String,
    pub relation: Comparison,
    pub lambda: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub verdict: Verdict,
    /// Smallest slack over the grid; negative exactly when the relation fails.
    pub worst_margin: f64,
    pub violations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FriedlanderFit>,
}

impl InequalityReport {
    pub fn new(
        statement: &str,
        relation: Comparison,
        lambda: Vec<f64>,
        lhs: Vec<f64>,
        rhs: Vec<f64>,
    ) -> Self {
        let slack = |l: f64, r: f64| match relation {
            Comparison::Ge => l - r,
            Comparison::Le => r - l,
            Comparison::Eq => 0.0 - (l - r).abs(),
        };
        let mut worst = f64::INFINITY;
        let mut violations = 0;
        for (&l, &r) in lhs.iter().zip(&rhs) {
            let s = slack(l, r);
            worst = worst.min(s);
            if s < 0.0 {
                violations += 1;
            }
        }
        if !worst.is_finite() {
            worst = 0.0;
        }
        let verdict = if violations == 0 {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        InequalityReport {
            statement: statement.to_string(),
            relation,
            lambda,
            lhs,
            rhs,
            verdict,
            worst_margin: worst,
            violations,
            fit: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn require_exact(s: &Spectrum) -> Result<()> {
    if s.exactness != Exactness::Exact {
        return Err(Error::Unsupported(
            "inequality checks need exact counts; got a non-exact spectrum".into(),
        ));
    }
    Ok(())
}

fn exact_counter(
    provider: &dyn SpectrumProvider,
    d: &Domain,
    p: f64,
    bc: Bc,
    lambda_max: f64,
) -> Result<Counter> {
    let s = provider.spectrum(d, p, bc, lambda_max)?;
    require_exact(&s)?;
    Ok(Counter::new(&s))
}

/// `sum_i N_{U_i}(a_i^p lambda)` over the items, reusing one spectrum per
/// distinct piece.
fn piece_sums(
    pk: &Packing,
    p: f64,
    bc: Bc,
    grid: &[f64],
    provider: &dyn SpectrumProvider,
) -> Result<Vec<f64>> {
    let top = grid[grid.len() - 1];
    let mut pieces: Vec<(&Domain, f64)> = Vec::new();
    for it in &pk.items {
        let need = it.scale.to_f64().powf(p) * top;
        match pieces.iter_mut().find(|(d, _)| *d == &it.piece) {
            Some((_, m)) => *m = m.max(need),
            None => pieces.push((&it.piece, need)),
        }
    }
    let counters = pieces
        .iter()
        .map(|(d, m)| exact_counter(provider, d, p, bc, m * (1.0 + 1e-9)))
        .collect::<Result<Vec<_>>>()?;
    let mut sums = vec![0u64; grid.len()];
    for it in &pk.items {
        let k = pieces
            .iter()
            .position(|(d, _)| *d == &it.piece)
            .expect("piece registered above");
        let ap = it.scale.to_f64().powf(p);
        for (s, &l) in sums.iter_mut().zip(grid) {
            *s += counters[k].count(ap * l);
        }
    }
    Ok(sums.into_iter().map(|s| s as f64).collect())
}

fn packing_check(
    pk: &Packing,
    relation: Relation,
    grid: &[f64],
    p: f64,
    provider: &dyn SpectrumProvider,
) -> Result<InequalityReport> {
    check_grid(grid)?;
    if pk.relation != relation {
        return arg_err(format!(
            "expected a {relation:?} packing, got {:?}",
            pk.relation
        ));
    }
    let rep = validate_packing(pk);
    if !rep.valid {
        return Err(Error::Validation(rep.failures.join("; ")));
    }
    let (bc, rel, id) = match relation {
        Relation::Sub => (Bc::Dirichlet, Comparison::Ge, "ddm"),
        Relation::Cover => (Bc::Neumann, Comparison::Le, "ndm"),
    };
    let top = grid[grid.len() - 1];
    let amb = exact_counter(provider, &pk.ambient, p, bc, top * (1.0 + 1e-9))?;
    let lhs = grid.iter().map(|&l| amb.count(l) as f64).collect();
    let rhs = piece_sums(pk, p, bc, grid, provider)?;
    Ok(InequalityReport::new(id, rel, grid.to_vec(), lhs, rhs))
}

/// `N^0_U(lambda) >= sum_i N^0_{U_i}(a_i^p lambda)` for a sub-packing.
pub fn check_dirichlet_monotonicity(
    pk: &Packing,
    grid: &[f64],
    p: f64,
    provider: &dyn SpectrumProvider,
) -> Result<InequalityReport> {
    packing_check(pk, Relation::Sub, grid, p, provider)
}

/// `N_U(lambda) <= sum_i N_{U_i}(a_i^p lambda)` for a cover.
pub fn check_neumann_monotonicity(
    pk: &Packing,
    grid: &[f64],
    p: f64,
    provider: &dyn SpectrumProvider,
) -> Result<InequalityReport> {
    packing_check(pk, Relation::Cover, grid, p, provider)
}

/// `N_{aU}(lambda) = N_U(a^p lambda)` with both sides computed from
/// independently generated spectra of `U` and its dilate.
pub fn check_scaling(
    d: &Domain,
    a: &Exact,
    p: f64,
    bc: Bc,
    grid: &[f64],
    provider: &dyn SpectrumProvider,
) -> Result<InequalityReport> {
    check_grid(grid)?;
    let scaled = d.scaled_exact(a)?;
    let ap = a.to_f64().powf(p);
    let top = grid[grid.len() - 1] * (1.0 + 1e-9);
    let big = exact_counter(provider, &scaled, p, bc, top)?;
    let small = exact_counter(provider, d, p, bc, ap * top)?;
    let lhs = grid.iter().map(|&l| big.count(l) as f64).collect();
    let rhs = grid.iter().map(|&l| small.count(ap * l) as f64).collect();
    Ok(InequalityReport::new(
        "scaling",
        Comparison::Eq,
        grid.to_vec(),
        lhs,
        rhs,
    ))
}

/// `lambda = l1 l2 / (l1 + l2 + 1/eps)`.
pub fn cutoff_lambda(eps: f64, l1: f64, l2: f64) -> f64 {
    l1 * l2 / (l1 + l2 + 1.0 / eps)
}

/// Collar inequality `N_U(lambda^p) <= N^0_U(l1^p) + N_{U_eps}(l2^p)` on
/// the interval `U = (0, length)`, with `U_eps` the two boundary strips of
/// width `eps`.
pub fn check_cutoff_inequality(
    length: f64,
    eps: f64,
    l1: f64,
    l2: f64,
    p: f64,
    provider: &dyn SpectrumProvider,
) -> Result<InequalityReport> {
    if !(length > 0.0) || !(eps > 0.0 && eps < length / 2.0) {
        return arg_err(format!("need 0 < eps < L/2, got eps = {eps}, L = {length}"));
    }
    if !(l1 > 0.0 && l2 > 0.0) {
        return arg_err("λ' and λ'' must be positive");
    }
    let lam = cutoff_lambda(eps, l1, l2);
    let u = Domain::interval(0.0, length)?;
    let collar = Domain::box_union(vec![
        Aabb::from_f64(&[0.0], &[eps])?,
        Aabb::from_f64(&[length - eps], &[eps])?,
    ])?;
    let (t, t1, t2) = (lam.powf(p), l1.powf(p), l2.powf(p));
    let pad = 1.0 + 1e-9;
    let lhs = exact_counter(provider, &u, p, Bc::Neumann, t * pad)?.count(t);
    let dir = exact_counter(provider, &u, p, Bc::Dirichlet, t1 * pad)?.count(t1);
    let strips = exact_counter(provider, &collar, p, Bc::Neumann, t2 * pad)?.count(t2);
    Ok(InequalityReport::new(
        "cutoff",
        Comparison::Le,
        vec![lam],
        vec![lhs as f64],
        vec![(dir + strips) as f64],
    ))
}

/// Fits `C1 = min f / vol` and `C2 = max f / vol` over the samples with
/// `lambda >= lower_edge` (default: from the tenth eigenvalue on) and checks
/// `0 < C1 <= C2 < inf`.
///
/// The report's pointwise relation is `C1 <= N(lambda) / (vol lambda^(n/p))`,
/// compared in normalized form so that no rounding enters; the upper side
/// holds by construction of `C2`.
pub fn check_friedlander_bounds(
    curve: &CountingCurve,
    lower_edge: Option<f64>,
) -> Result<InequalityReport> {
    if curve.counts.iter().all(|&c| c == 0) {
        return Err(Error::Estimation(
            "counting curve is identically zero".into(),
        ));
    }
    let start = match lower_edge {
        Some(e) => curve.lambda.partition_point(|&l| l < e),
        None => curve.counts.partition_point(|&c| c < 10),
    };
    if start >= curve.len() {
        return Err(Error::Estimation(
            "curve does not reach the fit window".into(),
        ));
    }
    let f = &curve.f[start..];
    let vol = curve.domain_volume;
    let (mn, mx) = min_max(f);
    let (c1, c2) = (mn / vol, mx / vol);
    let lambda = curve.lambda[start..].to_vec();
    let lhs = vec![c1; f.len()];
    let rhs = f.iter().map(|&x| x / vol).collect();
    let mut rep = InequalityReport::new("friedlander", Comparison::Le, lambda, lhs, rhs);
    if !(c1 > 0.0 && c1 <= c2 && c2.is_finite()) {
        rep.verdict = Verdict::Fail;
        rep.violations = rep.violations.max(1);
    }
    rep.fit = Some(FriedlanderFit {
        c1,
        c2,
        window: [curve.lambda[start], curve.lambda[curve.len() - 1]],
    });
    Ok(rep)
}

/// Outcome of [`sandwich_weyl`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    /// `sum` of Dirichlet counts of the member boxes.
    pub lower: CountingCurve,
    /// `sum` of Neumann counts of the member boxes.
    pub upper: CountingCurve,
    /// From the average of the two normalized curves.
    pub estimate: WeylEstimate,
    /// `lower <= upper` at every sample.
    pub ordered: bool,
}

/// Dirichlet/Neumann bracketing of the `p = 2` counting function of a box
/// union by the counts of its member boxes.
pub fn sandwich_weyl(d: &Domain, grid: &[f64], window_fraction: f64) -> Result<Sandwich> {
    check_grid(grid)?;
    let boxes = match d {
        Domain::Interval { .. } | Domain::BoxUnion { .. } => d.boxes().unwrap_or_default(),
        _ => {
            return Err(Error::Unsupported(
                "sandwich bounds need a box union".into(),
            ))
        }
    };
    d.validate()?;
    let top = grid[grid.len() - 1] * (1.0 + 1e-9);
    let provider = ExactProvider::default();
    let mut lower = vec![0u64; grid.len()];
    let mut upper = vec![0u64; grid.len()];
    for b in &boxes {
        for (bc, acc) in [(Bc::Dirichlet, &mut lower), (Bc::Neumann, &mut upper)] {
            let c = Counter::new(&provider.box_spectrum(b, 2.0, bc, top)?);
            for (a, &l) in acc.iter_mut().zip(grid) {
                *a += c.count(l);
            }
        }
    }
    let (n, vol) = (d.dim(), d.volume()?);
    let ordered = lower.iter().zip(&upper).all(|(l, u)| l <= u);
    let lower = CountingCurve::from_counts(n, 2.0, Bc::Dirichlet, vol, grid.to_vec(), lower);
    let upper = CountingCurve::from_counts(n, 2.0, Bc::Neumann, vol, grid.to_vec(), upper);
    let mut mid = lower.clone();
    mid.f = lower
        .f
        .iter()
        .zip(&upper.f)
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    let mut estimate = estimate_weyl_constant(&mid, window_fraction)?;
    estimate.method = format!("sandwich-{}", estimate.method);
    Ok(Sandwich {
        lower,
        upper,
        estimate,
        ordered,
    })
}

/// Dirichlet versus Neumann Weyl constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantComparison {
    pub dirichlet: WeylEstimate,
    pub neumann: WeylEstimate,
    pub relative_difference: f64,
    pub tol: f64,
    pub verdict: Verdict,
}

/// Passes iff `|c0 - c| <= tol * c`.
pub fn check_constant_equality(
    dirichlet: &WeylEstimate,
    neumann: &WeylEstimate,
    tol: f64,
) -> ConstantComparison {
    let rel = (dirichlet.c_hat - neumann.c_hat).abs() / neumann.c_hat;
    ConstantComparison {
        dirichlet: dirichlet.clone(),
        neumann: neumann.clone(),
        relative_difference: rel,
        tol,
        verdict: if rel <= tol {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
    }
}

/// Weyl estimate of `d` from an exact spectrum on `[lambda_min, lambda_max]`.
pub fn exact_weyl_estimate(
    d: &Domain,
    p: f64,
    bc: Bc,
    lambda_min: f64,
    lambda_max: f64,
    window_fraction: f64,
    provider: &dyn SpectrumProvider,
) -> Result<(CountingCurve, WeylEstimate)> {
    let grid = log_grid(lambda_min, lambda_max, DEFAULT_PER_DECADE)?;
    let s = provider.spectrum(d, p, bc, lambda_max * (1.0 + 1e-9))?;
    require_exact(&s)?;
    let curve = counting_curve(&s, &grid)?;
    let est = estimate_weyl_constant(&curve, window_fraction)?;
    Ok((curve, est))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_spectra::weyl_constant_1d;
    use crate::packing::{partition_cubes, PackingItem};
    use std::f64::consts::PI;

    fn toy() -> Spectrum {
        Spectrum::from_values(
            vec![1.0, 2.0, 3.0],
            2.0,
            Bc::Dirichlet,
            Exactness::Exact,
            1,
            1.0,
        )
    }

    #[test]
    fn strict_counting() {
        let s = toy();
        assert_eq!(count(&s, 2.5), 2);
        assert_eq!(count(&s, 3.0), 2);
        assert_eq!(count(&s, 0.5), 0);
        assert_eq!(count(&s, 10.0), 3);
    }

    #[test]
    fn grid_shape() {
        let g = log_grid(1.0, 100.0, 200).unwrap();
        assert_eq!(g.len(), 401);
        assert_eq!((g[0], g[400]), (1.0, 100.0));
        assert!(log_grid(2.0, 1.0, 10).is_err());
    }

    #[test]
    fn interval_curve_is_floor() {
        let s = spectrum_1d(2.0, 1.0, Bc::Dirichlet, 1e4).unwrap();
        let grid = log_grid(1.0, 1e4 - 1.0, 50).unwrap();
        let c = counting_curve(&s, &grid).unwrap();
        for (l, n) in c.lambda.iter().zip(&c.counts) {
            assert_eq!(*n, (l.sqrt() / PI).floor() as u64);
        }
        assert!(c.to_csv().starts_with("lambda,N,f\n"));
    }

    #[test]
    fn estimate_one_dimension() {
        let (_, e) = exact_weyl_estimate(
            &Domain::unit_interval(),
            2.0,
            Bc::Dirichlet,
            1e6,
            1e8,
            0.5,
            &ExactProvider::default(),
        )
        .unwrap();
        assert!((e.c_hat * PI - 1.0).abs() < 1e-3, "{e:?}");
        let (_, e) = exact_weyl_estimate(
            &Domain::unit_interval(),
            3.0,
            Bc::Dirichlet,
            1e6,
            1e8,
            0.5,
            &ExactProvider::default(),
        )
        .unwrap();
        assert!((e.c_hat / weyl_constant_1d(3.0).unwrap() - 1.0).abs() < 5e-3);
        assert!((e.c_hat - 0.3282).abs() < 0.002);
    }

    #[test]
    fn estimate_rejects_degenerate() {
        let s = spectrum_1d(2.0, 1.0, Bc::Dirichlet, 100.0).unwrap();
        let c = counting_curve(&s, &log_grid(0.01, 5.0, 200).unwrap()).unwrap();
        assert!(matches!(
            estimate_weyl_constant(&c, 0.5),
            Err(Error::Estimation(_))
        ));
        let short = counting_curve(&s, &[1.0, 50.0]).unwrap();
        assert!(matches!(
            estimate_weyl_constant(&short, 0.5),
            Err(Error::Estimation(_))
        ));
        assert!(matches!(
            check_friedlander_bounds(&c, None),
            Err(Error::Estimation(_))
        ));
    }

    #[test]
    fn identity_packings_give_equality() {
        let grid = log_grid(1.0, 1e4, 100).unwrap();
        let pv = ExactProvider::default();
        let sq = Domain::unit_cube(2);
        let item = PackingItem {
            scale: Exact::one(),
            offset: vec![Exact::zero(); 2],
            piece: sq.clone(),
        };
        for (rel, f) in [
            (
                Relation::Sub,
                check_dirichlet_monotonicity
                    as fn(&Packing, &[f64], f64, &dyn SpectrumProvider) -> Result<InequalityReport>,
            ),
            (Relation::Cover, check_neumann_monotonicity),
        ] {
            let pk = Packing {
                relation: rel,
                items: vec![item.clone()],
                ambient: sq.clone(),
            };
            let r = f(&pk, &grid, 2.0, &pv).unwrap();
            assert!(r.passed());
            assert_eq!(r.lhs, r.rhs);
        }
    }

    #[test]
    fn interval_subpacking_and_square_partition() {
        let pv = ExactProvider::default();
        let grid = log_grid_points(1.0, 1e5, 1000).unwrap();
        let unit = Domain::unit_interval();
        let pk = Packing {
            relation: Relation::Sub,
            ambient: Domain::interval(0.0, 3.0).unwrap(),
            items: vec![
                PackingItem {
                    scale: Exact::one(),
                    offset: vec![Exact::zero()],
                    piece: unit.clone(),
                },
                PackingItem {
                    scale: Exact::int(2),
                    offset: vec![Exact::one()],
                    piece: unit.clone(),
                },
            ],
        };
        assert!(check_dirichlet_monotonicity(&pk, &grid, 2.0, &pv)
            .unwrap()
            .passed());
        let cover = partition_cubes(&Domain::unit_cube(2), 2).unwrap();
        let r = check_neumann_monotonicity(&cover, &grid, 2.0, &pv).unwrap();
        assert!(r.passed(), "{}", r.worst_margin);
        assert!(check_dirichlet_monotonicity(&cover, &grid, 2.0, &pv).is_err());
    }

    #[test]
    fn scaling_identity() {
        let pv = ExactProvider::default();
        let grid = log_grid_points(1.0, 1e5, 1000).unwrap();
        let r = check_scaling(
            &Domain::unit_interval(),
            &Exact::int(2),
            3.0,
            Bc::Dirichlet,
            &grid,
            &pv,
        )
        .unwrap();
        assert!(r.passed());
        assert!(r.lhs.iter().any(|&c| c > 10.0));
        let r = check_scaling(
            &Domain::unit_cube(2),
            &Exact::ratio(1, 2),
            2.0,
            Bc::Neumann,
            &grid,
            &pv,
        )
        .unwrap();
        assert!(r.passed());
    }

    #[test]
    fn cutoff_example() {
        let r =
            check_cutoff_inequality(1.0, 0.1, 20.0, 200.0, 2.0, &ExactProvider::default()).unwrap();
        assert!(r.passed());
        let tiny =
            check_cutoff_inequality(1.0, 0.1, 20.0, 1e-9, 2.0, &ExactProvider::default()).unwrap();
        assert_eq!(tiny.lhs, vec![1.0]);
    }

    #[test]
    fn separated_union_is_additive() {
        let pv = ExactProvider::default();
        let two = Domain::box_union(vec![
            Aabb::from_f64(&[0.0], &[1.0]).unwrap(),
            Aabb::from_f64(&[2.0], &[1.0]).unwrap(),
        ])
        .unwrap();
        let s = pv.spectrum(&two, 3.0, Bc::Neumann, 1e4).unwrap();
        let one = pv
            .spectrum(&Domain::unit_interval(), 3.0, Bc::Neumann, 1e4)
            .unwrap();
        assert_eq!(s.len(), 2 * one.len());
        assert!(matches!(
            pv.spectrum(&Domain::l_shape(), 2.0, Bc::Dirichlet, 10.0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn friedlander_on_square() {
        let s =
            box_spectrum_p2_capped(&[1.0, 1.0], Bc::Dirichlet, 1e6, DEFAULT_LATTICE_CAP).unwrap();
        let c = counting_curve(&s, &log_grid(10.0, 1e6, 200).unwrap()).unwrap();
        let r3 = check_friedlander_bounds(&c, Some(1e3)).unwrap();
        let r5 = check_friedlander_bounds(&c, Some(1e5)).unwrap();
        assert!(r3.passed() && r5.passed());
        assert!(r5.fit.as_ref().unwrap().ratio() < r3.fit.as_ref().unwrap().ratio());
    }

    #[test]
    fn sandwich_single_cube_matches_dirichlet() {
        let grid = log_grid(1.0, 1e4, 200).unwrap();
        let sw = sandwich_weyl(&Domain::unit_cube(2), &grid, 0.5).unwrap();
        let s = box_spectrum_p2_capped(&[1.0, 1.0], Bc::Dirichlet, 1e4 + 1.0, DEFAULT_LATTICE_CAP)
            .unwrap();
        assert_eq!(sw.lower, counting_curve(&s, &grid).unwrap());
        assert!(sw.ordered);
    }

    #[test]
    fn report_round_trip() {
        let r =
            check_cutoff_inequality(1.0, 0.1, 20.0, 200.0, 1.5, &ExactProvider::default()).unwrap();
        let j = r.to_json().unwrap();
        assert_eq!(
            InequalityReport::from_json(&j).unwrap().to_json().unwrap(),
            j
        );
    }
}
