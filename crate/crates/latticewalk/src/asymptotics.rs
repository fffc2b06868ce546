//! Asymptotic evaluations of p(n;x) and exact-vs-asymptotic reports.
//!
//! The central approximation is the local limit formula
//!
//! ```text
//! p(n;x) ~ r (2 pi n)^{-d/2} det(B_s)^{-1/2} e^{-n phi(delta)},   delta = x/n,
//! ```
//!
//! valid on the admissible class (n congruent to the first-arrival index of
//! x modulo the period r) and zero off it. Three variants are provided:
//!
//! * [`saddle_point_estimate`]: the formula above, with the curvature B_s
//!   taken at the saddle point of delta;
//! * [`mean_hessian_estimate`]: same exponent but det B_0 (curvature at the
//!   mean) in the prefactor; accurate for delta near the mean, degrading
//!   linearly in |delta - delta0|;
//! * [`gaussian_simple_walk_estimate`]: the pure Gaussian shape
//!   2 (d / 2 pi n)^{d/2} e^{-d |x|^2 / 2n}, defined only for the simple
//!   walk, where it illustrates how the quadratic exponent undershoots the
//!   true rate function away from the center.
//!
//! [`rate_upper_bound`] evaluates e^{-n phi(delta)}, which dominates p(n;x)
//! for every n and x; [`upper_bound_check`] verifies that domination
//! against the exact kernel over all support points up to a given n.
//!
//! [`compare`] joins the exact convolution oracle with any of the formulas
//! over an (n, delta) grid and fits the decay rate of the relative error in
//! n at fixed delta; the local limit theorem predicts slope -1.

use crate::convex_geometry::Location;
use crate::cumulant::covariance_at_mean;
use crate::error::{Error, Result};
use crate::exact_kernel::{run_with_snapshots, DEFAULT_MEM_BUDGET_MB};
use crate::fmt::g17;
use crate::saddle::{solve_saddle_with, SaddleOptions, SaddlePoint, DEFAULT_TOL};
use crate::walk_model::WalkModel;
use std::io::Write;

/// Which asymptotic formula to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formula {
    /// r (2 pi n)^{-d/2} det(B_s)^{-1/2} e^{-n phi}, curvature at the saddle.
    SaddlePoint,
    /// Same exponent, curvature frozen at the mean (det B_0).
    MeanHessian,
    /// The Gaussian shape for the simple walk.
    GaussianSimpleWalk,
    /// The bound e^{-n phi}, valid for all n and x.
    RateUpperBound,
}

impl Formula {
    pub fn name(self) -> &'static str {
        match self {
            Formula::SaddlePoint => "saddle_point",
            Formula::MeanHessian => "mean_hessian",
            Formula::GaussianSimpleWalk => "gaussian_simple_walk",
            Formula::RateUpperBound => "rate_upper_bound",
        }
    }
}

/// The result of one asymptotic evaluation.
#[derive(Debug, Clone)]
pub struct AsymptoticValue {
    pub formula: Formula,
    /// The estimate; exactly 0.0 when `class_ok` is false.
    pub value: f64,
    /// ln of the value, finite even when `value` underflows; -inf off-class.
    pub log_value: f64,
    /// Whether (n, x) is on the admissible class.
    pub class_ok: bool,
    /// The saddle point behind the value, when one was solved.
    pub saddle: Option<SaddlePoint>,
}

fn off_class(formula: Formula) -> AsymptoticValue {
    AsymptoticValue {
        formula,
        value: 0.0,
        log_value: f64::NEG_INFINITY,
        class_ok: false,
        saddle: None,
    }
}

fn delta_of(n: usize, x: &[i64]) -> Vec<f64> {
    x.iter().map(|&c| c as f64 / n as f64).collect()
}

fn check_inputs(model: &WalkModel, n: usize, x: &[i64]) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if x.len() != model.dim() {
        return Err(Error::InvalidArgument(format!(
            "x has {} coordinates, the walk lives in dimension {}",
            x.len(),
            model.dim()
        )));
    }
    Ok(delta_of(n, x))
}

/// The local limit estimate with curvature at the saddle point.
pub fn saddle_point_estimate(model: &WalkModel, n: usize, x: &[i64]) -> Result<AsymptoticValue> {
    saddle_point_estimate_with(model, n, x, &SaddleOptions::default())
}

pub fn saddle_point_estimate_with(
    model: &WalkModel,
    n: usize,
    x: &[i64],
    opts: &SaddleOptions,
) -> Result<AsymptoticValue> {
    let delta = check_inputs(model, n, x)?;
    require_interior(model, &delta)?;
    if !model.class_ok(n, x) {
        return Ok(off_class(Formula::SaddlePoint));
    }
    let sp = solve_saddle_with(model, &delta, opts)?;
    let log_value = prefactor_log(model, n, sp.b_s.det) - n as f64 * sp.phi;
    Ok(AsymptoticValue {
        formula: Formula::SaddlePoint,
        value: log_value.exp(),
        log_value,
        class_ok: true,
        saddle: Some(sp),
    })
}

/// The local limit estimate with curvature frozen at the mean.
pub fn mean_hessian_estimate(model: &WalkModel, n: usize, x: &[i64]) -> Result<AsymptoticValue> {
    mean_hessian_estimate_with(model, n, x, &SaddleOptions::default())
}

pub fn mean_hessian_estimate_with(
    model: &WalkModel,
    n: usize,
    x: &[i64],
    opts: &SaddleOptions,
) -> Result<AsymptoticValue> {
    let delta = check_inputs(model, n, x)?;
    require_interior(model, &delta)?;
    if !model.class_ok(n, x) {
        return Ok(off_class(Formula::MeanHessian));
    }
    let sp = solve_saddle_with(model, &delta, opts)?;
    let det_b0 = covariance_at_mean(model)?.det;
    let log_value = prefactor_log(model, n, det_b0) - n as f64 * sp.phi;
    Ok(AsymptoticValue {
        formula: Formula::MeanHessian,
        value: log_value.exp(),
        log_value,
        class_ok: true,
        saddle: Some(sp),
    })
}

/// The Gaussian estimate 2 (d / 2 pi n)^{d/2} e^{-d |x|^2 / 2n}; only the
/// simple walk has this shape (period 2, B_0 = Identity / d).
pub fn gaussian_simple_walk_estimate(
    model: &WalkModel,
    n: usize,
    x: &[i64],
) -> Result<AsymptoticValue> {
    if !model.is_simple_walk() {
        return Err(Error::WrongModel {
            expected: "the simple walk (uniform weights on the 2d unit steps)",
        });
    }
    check_inputs(model, n, x)?;
    if !model.class_ok(n, x) {
        return Ok(off_class(Formula::GaussianSimpleWalk));
    }
    let d = model.dim() as f64;
    let nf = n as f64;
    let norm_sq: f64 = x.iter().map(|&c| (c * c) as f64).sum();
    let log_value = 2.0f64.ln() + 0.5 * d * (d / (std::f64::consts::TAU * nf)).ln()
        - 0.5 * d * norm_sq / nf;
    Ok(AsymptoticValue {
        formula: Formula::GaussianSimpleWalk,
        value: log_value.exp(),
        log_value,
        class_ok: true,
        saddle: None,
    })
}

/// The bound e^{-n phi(x/n)}, which dominates p(n;x); 0 off-class (where
/// p(n;x) itself vanishes).
pub fn rate_upper_bound(model: &WalkModel, n: usize, x: &[i64]) -> Result<AsymptoticValue> {
    rate_upper_bound_with(model, n, x, &SaddleOptions::default())
}

pub fn rate_upper_bound_with(
    model: &WalkModel,
    n: usize,
    x: &[i64],
    opts: &SaddleOptions,
) -> Result<AsymptoticValue> {
    let delta = check_inputs(model, n, x)?;
    require_interior(model, &delta)?;
    if !model.class_ok(n, x) {
        return Ok(off_class(Formula::RateUpperBound));
    }
    let sp = solve_saddle_with(model, &delta, opts)?;
    let log_value = -(n as f64) * sp.phi;
    Ok(AsymptoticValue {
        formula: Formula::RateUpperBound,
        value: log_value.exp(),
        log_value,
        class_ok: true,
        saddle: Some(sp),
    })
}

/// Evaluates the chosen formula at one (n, x).
pub fn evaluate(
    model: &WalkModel,
    n: usize,
    x: &[i64],
    formula: Formula,
    opts: &SaddleOptions,
) -> Result<AsymptoticValue> {
    match formula {
        Formula::SaddlePoint => saddle_point_estimate_with(model, n, x, opts),
        Formula::MeanHessian => mean_hessian_estimate_with(model, n, x, opts),
        Formula::GaussianSimpleWalk => gaussian_simple_walk_estimate(model, n, x),
        Formula::RateUpperBound => rate_upper_bound_with(model, n, x, opts),
    }
}

fn require_interior(model: &WalkModel, delta: &[f64]) -> Result<()> {
    match model.hull().contains(delta) {
        Location::Inside => Ok(()),
        Location::Boundary => Err(Error::NotInInterior {
            delta: delta.to_vec(),
            where_: "on the boundary of",
        }),
        Location::Outside => Err(Error::NotInInterior {
            delta: delta.to_vec(),
            where_: "outside",
        }),
    }
}

/// ln of r (2 pi n)^{-d/2} det^{-1/2}.
fn prefactor_log(model: &WalkModel, n: usize, det: f64) -> f64 {
    let d = model.dim() as f64;
    (model.period() as f64).ln()
        - 0.5 * d * (std::f64::consts::TAU * n as f64).ln()
        - 0.5 * det.ln()
}

/// The class-correct lattice point nearest to n * delta: rounds
/// coordinatewise, then applies the minimal-L1 correction into the class of
/// n, breaking ties lexicographically.
pub fn nearest_admissible(model: &WalkModel, n: usize, delta: &[f64]) -> Result<Vec<i64>> {
    let d = model.dim();
    if delta.len() != d {
        return Err(Error::InvalidArgument(format!(
            "delta has {} coordinates, the walk lives in dimension {}",
            delta.len(),
            d
        )));
    }
    let x0: Vec<i64> = delta
        .iter()
        .map(|&c| (c * n as f64).round() as i64)
        .collect();
    let target = n % model.period();
    let budget = 8 * d * model.period() + 4;
    for norm in 0..=budget {
        let mut candidates = Vec::new();
        signed_vectors_with_l1(d, norm as i64, &mut Vec::new(), &mut candidates);
        candidates.sort();
        for e in candidates {
            let x: Vec<i64> = x0.iter().zip(&e).map(|(a, b)| a + b).collect();
            if model.class_of(&x) == target {
                return Ok(x);
            }
        }
    }
    Err(Error::InvariantViolation {
        what: "no class-correct lattice point near n*delta".into(),
        witness: format!("n = {n}, delta = {delta:?}, search radius {budget}"),
    })
}

/// All integer vectors of the given L1 norm, appended to `out`.
fn signed_vectors_with_l1(d: usize, norm: i64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
    if d == 0 {
        if norm == 0 {
            out.push(prefix.clone());
        }
        return;
    }
    for c in -norm..=norm {
        prefix.push(c);
        signed_vectors_with_l1(d - 1, norm - c.abs(), prefix, out);
        prefix.pop();
    }
}

/// One row of an exact-vs-asymptotic comparison.
#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub n: usize,
    pub x: Vec<i64>,
    /// The effective velocity x/n after snapping to the class.
    pub delta: Vec<f64>,
    /// Distance from the effective velocity to the hull boundary.
    pub dist: f64,
    pub exact: f64,
    pub asym: f64,
    /// asym/exact - 1; NaN when the exact value vanishes.
    pub rel_err: f64,
}

/// Least-squares slope of ln |rel_err| against ln n at one grid velocity.
#[derive(Debug, Clone)]
pub struct FitLine {
    pub delta: Vec<f64>,
    /// NaN when fewer than two usable rows exist.
    pub slope: f64,
}

#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub model_hash: String,
    pub formula: Formula,
    pub rows: Vec<ComparisonRow>,
    pub fits: Vec<FitLine>,
}

#[derive(Debug, Clone)]
pub struct CompareOptions {
    /// Grid velocities closer to the hull boundary than this are refused.
    pub eps_boundary: f64,
    pub mem_budget_mb: usize,
    /// Saddle gradient tolerance.
    pub tol: f64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            eps_boundary: 1e-2,
            mem_budget_mb: DEFAULT_MEM_BUDGET_MB,
            tol: DEFAULT_TOL,
        }
    }
}

/// Number of worker threads for row evaluation: the LATTICEWALK_THREADS
/// environment variable when set to a positive integer, otherwise the
/// machine parallelism.
pub fn thread_count() -> usize {
    if let Ok(raw) = std::env::var("LATTICEWALK_THREADS") {
        if let Ok(n) = raw.trim().parse::<usize>() {
            if n >= 1 {
                return n;
            }
        }
    }
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Joins the exact kernel with an asymptotic formula over the product of
/// `grid` velocities and `n_list` times.
///
/// For each pair, the class-correct x nearest to n*delta is chosen, the
/// exact value is read from one convolution run shared across the whole
/// report, and the formula is evaluated at the effective velocity x/n. Rows
/// are ordered by (grid position, n); per-velocity decay fits are appended.
/// Row evaluation is spread over [`thread_count`] threads; the output does
/// not depend on the thread count.
pub fn compare(
    model: &WalkModel,
    n_list: &[usize],
    grid: &[Vec<f64>],
    formula: Formula,
    opts: &CompareOptions,
) -> Result<ComparisonReport> {
    for delta in grid {
        require_interior(model, delta)?;
        let dist = model.hull().distance_to_boundary(delta);
        if dist < opts.eps_boundary {
            return Err(Error::NearBoundary {
                dist,
                guard: opts.eps_boundary,
            });
        }
    }
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();

    struct Pending {
        n: usize,
        x: Vec<i64>,
        delta: Vec<f64>,
        dist: f64,
        exact: f64,
    }
    let mut pending = Vec::with_capacity(grid.len() * ns.len());
    for delta in grid {
        for &n in &ns {
            let x = nearest_admissible(model, n, delta)?;
            let delta_eff = delta_of(n, &x);
            let dist = model.hull().distance_to_boundary(&delta_eff);
            pending.push(Pending {
                n,
                x,
                delta: delta_eff,
                dist,
                exact: f64::NAN,
            });
        }
    }

    // One convolution pass fills every exact column.
    run_with_snapshots(model, &ns, opts.mem_budget_mb, |table| {
        for row in pending.iter_mut().filter(|r| r.n == table.n) {
            row.exact = table.get(&row.x);
        }
        Ok(())
    })?;

    // Formula evaluations are independent; chunk them across threads.
    let saddle_opts = SaddleOptions {
        tol: opts.tol,
        ..SaddleOptions::default()
    };
    let mut asym: Vec<Option<Result<AsymptoticValue>>> =
        (0..pending.len()).map(|_| None).collect();
    let threads = thread_count().min(pending.len().max(1));
    let chunk = pending.len().div_ceil(threads.max(1)).max(1);
    std::thread::scope(|scope| {
        for (inputs, outputs) in pending.chunks(chunk).zip(asym.chunks_mut(chunk)) {
            let saddle_opts = &saddle_opts;
            scope.spawn(move || {
                for (p, o) in inputs.iter().zip(outputs.iter_mut()) {
                    *o = Some(evaluate(model, p.n, &p.x, formula, saddle_opts));
                }
            });
        }
    });

    let mut rows = Vec::with_capacity(pending.len());
    for (p, a) in pending.into_iter().zip(asym) {
        let value = a.expect("every chunk was visited")?;
        let rel_err = if p.exact > 0.0 {
            value.value / p.exact - 1.0
        } else {
            f64::NAN
        };
        rows.push(ComparisonRow {
            n: p.n,
            x: p.x,
            delta: p.delta,
            dist: p.dist,
            exact: p.exact,
            asym: value.value,
            rel_err,
        });
    }

    let mut fits = Vec::with_capacity(grid.len());
    for (gi, delta) in grid.iter().enumerate() {
        let slice = &rows[gi * ns.len()..(gi + 1) * ns.len()];
        let pts: Vec<(f64, f64)> = slice
            .iter()
            .filter(|r| r.rel_err.is_finite() && r.rel_err != 0.0)
            .map(|r| ((r.n as f64).ln(), r.rel_err.abs().ln()))
            .collect();
        fits.push(FitLine {
            delta: delta.clone(),
            slope: ls_slope(&pts),
        });
    }

    Ok(ComparisonReport {
        model_hash: model.hash().to_string(),
        formula,
        rows,
        fits,
    })
}

fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    sxy / sxx
}

impl ComparisonReport {
    /// CSV with `#` metadata lines, one row per (grid velocity, n), and
    /// `#fit` trailer lines. All reals in %.17g.
    pub fn write_csv(&self, out: &mut (impl Write + ?Sized)) -> Result<()> {
        writeln!(out, "# model {}", self.model_hash)?;
        writeln!(out, "# formula {}", self.formula.name())?;
        let d = self
            .rows
            .first()
            .map(|r| r.x.len())
            .unwrap_or_else(|| self.fits.first().map(|f| f.delta.len()).unwrap_or(0));
        let mut cols = vec!["n".to_string()];
        cols.extend((1..=d).map(|j| format!("x{j}")));
        cols.extend((1..=d).map(|j| format!("delta{j}")));
        cols.extend(["dist", "exact", "asym", "rel_err"].map(String::from));
        writeln!(out, "{}", cols.join(","))?;
        for r in &self.rows {
            let mut cells = vec![r.n.to_string()];
            cells.extend(r.x.iter().map(|c| c.to_string()));
            cells.extend(r.delta.iter().map(|&c| g17(c)));
            cells.extend([r.dist, r.exact, r.asym, r.rel_err].map(g17));
            writeln!(out, "{}", cells.join(","))?;
        }
        for f in &self.fits {
            let ds: Vec<String> = f.delta.iter().map(|&c| g17(c)).collect();
            writeln!(out, "#fit delta={} slope={}", ds.join(","), g17(f.slope))?;
        }
        Ok(())
    }
}

/// The outcome of sweeping the domination check p(n;x) <= e^{-n phi(x/n)}
/// over every kernel entry up to n_max.
#[derive(Debug, Clone)]
pub struct UpperBoundReport {
    pub n_max: usize,
    pub dist_min: f64,
    /// Number of (n, x) pairs checked.
    pub checked: usize,
    /// Largest observed p(n;x) e^{n phi(x/n)}; at most 1 up to rounding.
    pub max_ratio: f64,
    /// Where the maximum was attained.
    pub worst: Option<(usize, Vec<i64>)>,
}

/// Margin allowed over 1 before the domination check fails: pure rounding
/// headroom, the inequality itself is strict mathematics.
pub const UPPER_BOUND_SLACK: f64 = 1e-9;

/// Verifies p(n;x) <= e^{-n phi(x/n)} (1 + slack) for every support entry
/// with dist(x/n, boundary) >= dist_min, for all n <= n_max.
///
/// Consecutive support points have nearby velocities, so each saddle solve
/// is warm-started from the previous one; a partially converged saddle only
/// weakens the bound (any s gives a valid upper bound), never falsifies it.
pub fn upper_bound_check(
    model: &WalkModel,
    n_max: usize,
    dist_min: f64,
    mem_budget_mb: usize,
) -> Result<UpperBoundReport> {
    let d = model.dim();
    let ns: Vec<usize> = (1..=n_max).collect();
    let opts = SaddleOptions {
        boundary_guard: dist_min,
        ..SaddleOptions::default()
    };
    let mut checked = 0usize;
    let mut max_ratio = f64::NEG_INFINITY;
    let mut worst = None;
    let mut warm: Option<[f64; 4]> = None;
    run_with_snapshots(model, &ns, mem_budget_mb, |table| {
        let n = table.n;
        let nf = n as f64;
        table.for_each_support(|x, p| {
            let mut delta = [0.0f64; 4];
            for j in 0..d {
                delta[j] = x[j] as f64 / nf;
            }
            let dist = model.hull().distance_to_boundary(&delta[..d]);
            if dist < dist_min {
                return Ok(());
            }
            let sp = crate::saddle::solve_saddle_lean(model, &delta[..d], &opts, warm)?;
            warm = Some(sp.s);
            let ratio = (p.ln() + nf * sp.phi).exp();
            checked += 1;
            if ratio > max_ratio {
                max_ratio = ratio;
                worst = Some((n, x.to_vec()));
            }
            if ratio > 1.0 + UPPER_BOUND_SLACK {
                return Err(Error::InvariantViolation {
                    what: "transition probability exceeded its rate-function bound".into(),
                    witness: format!("n = {n}, x = {x:?}, ratio = {ratio:.12}"),
                });
            }
            Ok(())
        })
    })?;
    Ok(UpperBoundReport {
        n_max,
        dist_min,
        checked,
        max_ratio,
        worst,
    })
}
