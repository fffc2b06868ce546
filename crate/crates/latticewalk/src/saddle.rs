//! The rate function phi and its saddle point.
//!
//! For a velocity delta strictly inside the hull M of the steps, the rate
//! function is the Legendre transform of log kappa:
//!
//! ```text
//! phi(delta) = sup_x { <x, delta> - log kappa(x) }
//! ```
//!
//! The supremum is attained at the unique saddle point s = s(delta) solving
//! grad log kappa(s) = delta. The objective is smooth and strictly concave
//! with Hessian -B_x, so a damped Newton iteration from x = 0 converges
//! globally; steps are ascent directions and an Armijo backtracking line
//! search guarantees monotone progress.
//!
//! Identities used downstream (and verified by finite differences in the
//! test suite): grad phi(delta) = s(delta) and D^2 phi(delta) = B_s^{-1}.
//!
//! Near the boundary of M the saddle point escapes to infinity and B_s
//! degenerates; by default the solver refuses points closer to the boundary
//! than [`SaddleOptions::boundary_guard`] unless the caller opts in.

use crate::convex_geometry::CONTAINS_TOL;
use crate::cumulant::{hessian_log_kappa, tilt_stats, QuadraticForm};
use crate::error::{Error, Result};
use crate::walk_model::WalkModel;

/// Armijo backtracking shrink factor.
const BACKTRACK_FACTOR: f64 = 0.5;
/// Armijo sufficient-increase slope.
const ARMIJO_SLOPE: f64 = 1e-4;
/// Smallest admissible line-search step before declaring failure.
const MIN_STEP: f64 = 1e-18;
/// Largest move in s per iteration. Near the boundary of the hull the
/// covariance degenerates and an unrestricted Newton step can jump
/// astronomically far; clamping the length keeps every iterate in the
/// region where the tilted moments are meaningful, at the cost of a few
/// extra (cheap) iterations when chasing a distant saddle.
const STEP_CAP: f64 = 8.0;

/// Default gradient tolerance: iterate until |grad log kappa(s) - delta|
/// is at most this.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Default distance-to-boundary guard.
pub const DEFAULT_BOUNDARY_GUARD: f64 = 1e-6;
/// Newton iteration cap.
pub const MAX_ITERATIONS: usize = 500;

#[derive(Debug, Clone)]
pub struct SaddleOptions {
    /// Gradient gap at which the iteration stops.
    pub tol: f64,
    pub max_iterations: usize,
    /// Refuse velocities closer to the hull boundary than this...
    pub boundary_guard: f64,
    /// ...unless this is set.
    pub allow_near_boundary: bool,
    /// Start Newton from this point instead of the origin (used to chase a
    /// slowly moving delta across a sweep).
    pub warm_start: Option<Vec<f64>>,
}

impl Default for SaddleOptions {
    fn default() -> Self {
        SaddleOptions {
            tol: DEFAULT_TOL,
            max_iterations: MAX_ITERATIONS,
            boundary_guard: DEFAULT_BOUNDARY_GUARD,
            allow_near_boundary: false,
            warm_start: None,
        }
    }
}

/// A solved saddle point.
#[derive(Debug, Clone)]
pub struct SaddlePoint {
    pub delta: Vec<f64>,
    /// The maximizer s(delta).
    pub s: Vec<f64>,
    /// phi(delta) = <s, delta> - log kappa(s).
    pub phi: f64,
    /// log kappa(s).
    pub log_kappa_s: f64,
    /// B_s = D^2 log kappa(s); its inverse is D^2 phi(delta).
    pub b_s: QuadraticForm,
    /// Final gradient gap |grad log kappa(s) - delta|.
    pub gap: f64,
    pub iterations: usize,
    /// Distance from delta to the hull boundary.
    pub dist_boundary: f64,
}

/// Solves the saddle equation with default options.
pub fn solve_saddle(model: &WalkModel, delta: &[f64]) -> Result<SaddlePoint> {
    solve_saddle_with(model, delta, &SaddleOptions::default())
}

/// Solves grad log kappa(s) = delta by damped Newton with Armijo
/// backtracking on f(x) = <x, delta> - log kappa(x).
pub fn solve_saddle_with(
    model: &WalkModel,
    delta: &[f64],
    opts: &SaddleOptions,
) -> Result<SaddlePoint> {
    let warm = opts.warm_start.as_deref().map(|w| {
        let mut arr = [0.0f64; 4];
        arr[..w.len()].copy_from_slice(w);
        arr
    });
    let lean = solve_saddle_lean(model, delta, opts, warm)?;
    let d = model.dim();
    // Recompute the curvature by the centered two-pass route for the final
    // report; the fused one-pass Hessian only steered Newton.
    let b_s = hessian_log_kappa(model, &lean.s[..d])?;
    Ok(SaddlePoint {
        delta: delta.to_vec(),
        s: lean.s[..d].to_vec(),
        phi: lean.phi,
        log_kappa_s: lean.log_kappa_s,
        b_s,
        gap: lean.gap,
        iterations: lean.iterations,
        dist_boundary: lean.dist_boundary,
    })
}

/// A saddle point on stack storage, without the spectral data of B_s.
/// Internal workhorse for sweeps that only consume phi.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LeanSaddle {
    pub s: [f64; 4],
    pub phi: f64,
    pub log_kappa_s: f64,
    pub gap: f64,
    pub iterations: usize,
    pub dist_boundary: f64,
}

pub(crate) fn solve_saddle_lean(
    model: &WalkModel,
    delta: &[f64],
    opts: &SaddleOptions,
    warm_start: Option<[f64; 4]>,
) -> Result<LeanSaddle> {
    let d = model.dim();
    assert_eq!(delta.len(), d);
    // The signed boundary distance classifies the point: the hull interior
    // is exactly where the minimal facet margin exceeds the containment
    // tolerance.
    let dist = model.hull().distance_to_boundary(delta);
    if dist <= CONTAINS_TOL {
        return Err(Error::NotInInterior {
            delta: delta.to_vec(),
            where_: if dist.abs() <= CONTAINS_TOL {
                "on the boundary of"
            } else {
                "outside"
            },
        });
    }
    if dist < opts.boundary_guard && !opts.allow_near_boundary {
        return Err(Error::NearBoundary {
            dist,
            guard: opts.boundary_guard,
        });
    }

    // The whole iteration runs on stack arrays (dimension at most four) so
    // that a sweep of millions of warm-started solves never allocates.
    let mut x = warm_start.unwrap_or([0.0f64; 4]);
    let mut stats = tilt_stats(model, &x[..d]);
    let mut fx = dot(&x[..d], delta) - stats.log_kappa;
    let mut iterations = 0;
    loop {
        let mut g = [0.0f64; 4];
        for j in 0..d {
            g[j] = delta[j] - stats.grad[j];
        }
        let gap = g[..d].iter().map(|c| c * c).sum::<f64>().sqrt();
        if gap <= opts.tol {
            return Ok(LeanSaddle {
                s: x,
                phi: fx,
                log_kappa_s: stats.log_kappa,
                gap,
                iterations,
                dist_boundary: dist,
            });
        }
        if iterations >= opts.max_iterations {
            return Err(Error::MaxIterations { iterations, gap });
        }
        iterations += 1;

        let mut dir = solve_spd(d, &stats.hess, &g).ok_or_else(|| Error::InvariantViolation {
            what: "covariance form must be positive definite".into(),
            witness: format!("Cholesky broke down at s = {:?}", &x[..d]),
        })?;
        let dir_norm = dir[..d].iter().map(|c| c * c).sum::<f64>().sqrt();
        if dir_norm > STEP_CAP {
            let shrink = STEP_CAP / dir_norm;
            for c in dir.iter_mut() {
                *c *= shrink;
            }
        }
        let slope: f64 = g[..d].iter().zip(&dir).map(|(a, b)| a * b).sum();
        debug_assert!(slope >= 0.0, "Newton direction must be an ascent direction");

        // Terminal phase: once the predicted increase drops below the f64
        // noise floor of the objective, the Armijo comparison is
        // meaningless; take the undamped Newton step, which converges
        // quadratically from here.
        if slope <= 1e-14 * (1.0 + fx.abs()) {
            for j in 0..d {
                x[j] += dir[j];
            }
            stats = tilt_stats(model, &x[..d]);
            fx = dot(&x[..d], delta) - stats.log_kappa;
            continue;
        }

        let mut t = 1.0;
        loop {
            let mut cand = [0.0f64; 4];
            for j in 0..d {
                cand[j] = x[j] + t * dir[j];
            }
            let cs = tilt_stats(model, &cand[..d]);
            let fc = dot(&cand[..d], delta) - cs.log_kappa;
            if fc >= fx + ARMIJO_SLOPE * t * slope {
                x = cand;
                fx = fc;
                stats = cs;
                break;
            }
            t *= BACKTRACK_FACTOR;
            if t < MIN_STEP {
                return Err(Error::MaxIterations { iterations, gap });
            }
        }
    }
}

/// Cholesky solve of a symmetric positive definite system on fixed-size
/// stack storage; returns None when the matrix is not positive definite.
fn solve_spd(d: usize, a: &[[f64; 4]; 4], b: &[f64; 4]) -> Option<[f64; 4]> {
    let mut l = [[0.0f64; 4]; 4];
    for i in 0..d {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut y = [0.0f64; 4];
    for i in 0..d {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut out = [0.0f64; 4];
    for i in (0..d).rev() {
        let mut s = y[i];
        for k in i + 1..d {
            s -= l[k][i] * out[k];
        }
        out[i] = s / l[i][i];
    }
    Some(out)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// phi(delta), via the saddle point.
pub fn phi(model: &WalkModel, delta: &[f64]) -> Result<f64> {
    Ok(solve_saddle(model, delta)?.phi)
}

/// The quadratic reference (1/2) B_0^{-1}(delta - delta0, delta - delta0):
/// the second-order expansion of phi around the mean. phi is comparable to
/// it on all of the hull interior (same order up to model constants).
pub fn phi_quadratic_reference(model: &WalkModel, delta: &[f64]) -> Result<f64> {
    let b0 = crate::cumulant::covariance_at_mean(model)?;
    let centered: Vec<f64> = delta
        .iter()
        .zip(model.mean())
        .map(|(a, b)| a - b)
        .collect();
    Ok(0.5 * b0.inv_apply(&centered))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk_model::WalkSpec;

    fn norm2(v: &[f64]) -> f64 {
        v.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    fn simple1d() -> WalkModel {
        WalkModel::validate(WalkSpec::parse("dim 1\nstep 1 1/2\nstep -1 1/2\n").unwrap())
            .unwrap()
    }

    fn simple2d() -> WalkModel {
        WalkModel::validate(
            WalkSpec::parse("dim 2\nstep 1 0 1/4\nstep -1 0 1/4\nstep 0 1 1/4\nstep 0 -1 1/4\n")
                .unwrap(),
        )
        .unwrap()
    }

    /// Closed forms for the one-dimensional simple walk:
    /// s = (1/2) log((1+d)/(1-d)), kappa(s) = 1/sqrt(1-d^2),
    /// phi = ((1-d)/2) log(1-d) + ((1+d)/2) log(1+d).
    fn closed_forms(delta: f64) -> (f64, f64, f64) {
        let s = 0.5 * ((1.0 + delta) / (1.0 - delta)).ln();
        let kappa = 1.0 / (1.0 - delta * delta).sqrt();
        let phi = 0.5 * (1.0 - delta) * (1.0 - delta).ln()
            + 0.5 * (1.0 + delta) * (1.0 + delta).ln();
        (s, kappa, phi)
    }

    #[test]
    fn matches_closed_forms_across_the_interval() {
        let model = simple1d();
        for i in 0..50 {
            let delta = -0.99 + 1.98 * i as f64 / 49.0;
            let sp = solve_saddle(&model, &[delta]).unwrap();
            let (s, kappa, phi) = closed_forms(delta);
            let tol = |x: f64| 1e-10 * x.abs().max(1.0);
            assert!((sp.s[0] - s).abs() < tol(s), "s({delta}) = {} vs {s}", sp.s[0]);
            assert!(
                (sp.log_kappa_s.exp() - kappa).abs() < tol(kappa),
                "kappa(s({delta})) = {} vs {kappa}",
                sp.log_kappa_s.exp()
            );
            assert!((sp.phi - phi).abs() < tol(phi), "phi({delta}) = {} vs {phi}", sp.phi);
        }
    }

    #[test]
    fn known_point_at_one_half() {
        let model = simple1d();
        let sp = solve_saddle(&model, &[0.5]).unwrap();
        assert!((sp.s[0] - 0.5493061443340548).abs() < 1e-12);
        assert!((sp.phi - 0.13081203594113697).abs() < 1e-12);
        // B_s = 1 - delta^2 in one dimension.
        assert!((sp.b_s.matrix[(0, 0)] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn deep_tilt_near_the_boundary() {
        let model = simple1d();
        let sp = solve_saddle(&model, &[0.99]).unwrap();
        let (s, _, phi) = closed_forms(0.99);
        assert!((sp.s[0] - s).abs() < 1e-9, "s = {} vs {s}", sp.s[0]);
        assert!((sp.phi - phi).abs() < 1e-12, "phi = {} vs {phi}", sp.phi);
        // s = (1/2) log 199, phi = 0.99 s + (1/2) log 0.0199.
        assert!((sp.s[0] - 2.646652412362246).abs() < 1e-9);
        assert!((sp.phi - 0.6616681146127786).abs() < 1e-11);
    }

    #[test]
    fn refuses_boundary_and_outside_points() {
        let model = simple1d();
        assert!(matches!(
            solve_saddle(&model, &[1.0]).unwrap_err(),
            Error::NotInInterior { .. }
        ));
        assert!(matches!(
            solve_saddle(&model, &[1.5]).unwrap_err(),
            Error::NotInInterior { .. }
        ));
        assert!(matches!(
            solve_saddle(&model, &[1.0 - 1e-9]).unwrap_err(),
            Error::NearBoundary { .. }
        ));
        let mut opts = SaddleOptions::default();
        opts.allow_near_boundary = true;
        let sp = solve_saddle_with(&model, &[1.0 - 1e-9], &opts).unwrap();
        assert!(sp.phi < 2.0f64.ln(), "phi is bounded by log 2 on the interval");
    }

    #[test]
    fn phi_at_the_mean_is_zero() {
        for model in [simple1d(), simple2d()] {
            let sp = solve_saddle(&model, model.mean()).unwrap();
            assert!(sp.phi.abs() < 1e-14);
            assert!(norm2(&sp.s) < 1e-12);
        }
    }

    #[test]
    fn gradient_of_phi_is_the_saddle_point() {
        let model = simple2d();
        let deltas = [[0.1, 0.0], [0.25, 0.3], [-0.4, 0.1], [0.0, -0.55]];
        for delta in deltas {
            let sp = solve_saddle(&model, &delta).unwrap();
            let h = 1e-5;
            for j in 0..2 {
                let mut up = delta;
                let mut dn = delta;
                up[j] += h;
                dn[j] -= h;
                let fd = (phi(&model, &up).unwrap() - phi(&model, &dn).unwrap()) / (2.0 * h);
                assert!(
                    (fd - sp.s[j]).abs() < 1e-5,
                    "grad phi[{j}] = {fd} vs s = {} at {delta:?}",
                    sp.s[j]
                );
            }
        }
    }

    #[test]
    fn hessian_of_phi_is_inverse_covariance() {
        let model = simple1d();
        for delta in [0.0, 0.3, 0.6] {
            let sp = solve_saddle(&model, &[delta]).unwrap();
            let h = 1e-4;
            let f = |d: f64| phi(&model, &[d]).unwrap();
            let fd = (f(delta + h) - 2.0 * f(delta) + f(delta - h)) / (h * h);
            let expect = 1.0 / sp.b_s.matrix[(0, 0)];
            assert!(
                (fd - expect).abs() < 1e-4 * expect.abs(),
                "D2 phi = {fd} vs 1/B_s = {expect} at {delta}"
            );
        }
    }

    #[test]
    fn fenchel_young_inequality_holds() {
        let model = simple2d();
        let points = [[0.1, 0.2], [-0.3, 0.25], [0.5, -0.1], [0.0, 0.0]];
        for a in points {
            let spa = solve_saddle(&model, &a).unwrap();
            for b in points {
                let spb = solve_saddle(&model, &b).unwrap();
                // log kappa(s_a) + phi(b) >= <s_a, b>
                let lhs = spa.log_kappa_s + spb.phi;
                let rhs: f64 = spa.s.iter().zip(&b).map(|(x, y)| x * y).sum();
                assert!(lhs >= rhs - 1e-10, "Fenchel-Young violated: {lhs} < {rhs}");
            }
        }
    }

    #[test]
    fn phi_is_convex_along_segments() {
        let model = simple2d();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let mut sample = || loop {
                let p = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                if model.hull().distance_to_boundary(&p) > 0.05 {
                    return p;
                }
            };
            let a = sample();
            let b = sample();
            let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
            let fa = phi(&model, &a).unwrap();
            let fb = phi(&model, &b).unwrap();
            let fm = phi(&model, &mid).unwrap();
            assert!(
                fm <= 0.5 * (fa + fb) + 1e-12,
                "phi not midpoint-convex at {a:?}, {b:?}"
            );
        }
    }

    #[test]
    fn quadratic_reference_matches_phi_to_second_order() {
        let model = simple1d();
        // phi(0.2) ~ 0.0201 and the quadratic reference is delta^2/2 = 0.02.
        let q = phi_quadratic_reference(&model, &[0.2]).unwrap();
        assert!((q - 0.02).abs() < 1e-15);
        let p = phi(&model, &[0.2]).unwrap();
        assert!((p - 0.020135513550688863).abs() < 1e-12);
        // Ratio -> 1 as delta -> 0.
        for delta in [0.1, 0.05, 0.025] {
            let ratio = phi(&model, &[delta]).unwrap()
                / phi_quadratic_reference(&model, &[delta]).unwrap();
            assert!((ratio - 1.0).abs() < delta * delta, "ratio {ratio} at {delta}");
        }
    }
}
