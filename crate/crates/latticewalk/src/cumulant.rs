//! The cumulant kappa and its derivatives.
//!
//! For a walk with steps v and weights p(v),
//!
//! ```text
//! kappa(u)     = sum_v p(v) exp(<u, v>)
//! log kappa(u) = log-sum-exp of (log p(v) + <u, v>)
//! ```
//!
//! grad log kappa(u) is the mean of the exponentially tilted step
//! distribution w_v(u) = p(v) e^{<u,v>} / kappa(u), and the Hessian
//! B_u = D^2 log kappa(u) is its covariance. Two independent routes to B_u
//! are implemented and cross-checked:
//!
//! * the covariance form sum_v w_v (v - g)(v - g)^T, g = grad log kappa(u);
//! * the pair sum (1/2) sum_{v,v'} w_v w_{v'} (v - v')(v - v')^T.
//!
//! All ratios run in the log domain with max-subtraction, so evaluation
//! stays finite arbitrarily deep into the exponential tilt; the plain
//! `kappa` value is guarded against overflow instead.
//!
//! On the unit torus, the characteristic function kappa(i theta) has
//! modulus at most one; the unitary set U of points where the modulus is
//! exactly one is finite with |U| = period, and is computed exactly as the
//! dual of the step-difference lattice scaled by 2 pi.

use crate::error::{Error, Result};
use crate::integer_lattice::smith_normal_form;
use crate::walk_model::WalkModel;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;

/// exp overflows near 709; stay safely below.
pub const OVERFLOW_GUARD: f64 = 700.0;

/// Relative tolerance to which the two Hessian routes must agree.
pub const HESSIAN_ROUTE_TOL: f64 = 1e-12;

/// A symmetric positive definite form with its spectral data.
#[derive(Debug, Clone)]
pub struct QuadraticForm {
    pub matrix: DMatrix<f64>,
    pub det: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    cholesky: Cholesky<f64, Dyn>,
}

impl QuadraticForm {
    /// Wraps a symmetric matrix, computing determinant and extreme
    /// eigenvalues by symmetric eigendecomposition (not LU), so that
    /// near-degeneracy is visible in `min_eigenvalue`.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let eig = matrix.clone().symmetric_eigen();
        let min_eigenvalue = eig.eigenvalues.min();
        let max_eigenvalue = eig.eigenvalues.max();
        let det = eig.eigenvalues.iter().product();
        let cholesky = Cholesky::new(matrix.clone()).ok_or_else(|| Error::InvariantViolation {
            what: "covariance form must be positive definite".into(),
            witness: format!("min eigenvalue {min_eigenvalue:.3e}"),
        })?;
        Ok(QuadraticForm {
            matrix,
            det,
            min_eigenvalue,
            max_eigenvalue,
            cholesky,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// B(u, u).
    pub fn apply(&self, u: &[f64]) -> f64 {
        let v = DVector::from_row_slice(u);
        (&self.matrix * &v).dot(&v)
    }

    /// B^{-1}(u, u).
    pub fn inv_apply(&self, u: &[f64]) -> f64 {
        let v = DVector::from_row_slice(u);
        self.cholesky.solve(&v).dot(&v)
    }

    /// Solves B x = rhs.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let v = DVector::from_row_slice(rhs);
        self.cholesky.solve(&v).iter().copied().collect()
    }

    /// Operator norm of B^{-1}.
    pub fn inv_norm(&self) -> f64 {
        1.0 / self.min_eigenvalue
    }
}

/// log kappa(u), by log-sum-exp with max subtraction.
pub fn log_kappa(model: &WalkModel, u: &[f64]) -> f64 {
    let exps = exponents(model, u);
    let m = exps.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let sum: f64 = exps.iter().map(|e| (e - m).exp()).sum();
    m + sum.ln()
}

/// kappa(u). Errors with the overflow guard when an exponent exceeds
/// [`OVERFLOW_GUARD`]; callers needing large tilts use [`log_kappa`].
pub fn kappa(model: &WalkModel, u: &[f64]) -> Result<f64> {
    let max_exponent = model
        .steps()
        .iter()
        .map(|v| dot_iv(u, v))
        .fold(f64::NEG_INFINITY, f64::max);
    if max_exponent > OVERFLOW_GUARD {
        return Err(Error::OverflowGuard { max_exponent });
    }
    Ok(log_kappa(model, u).exp())
}

/// The exponentially tilted weights w_v(u), a probability vector.
pub fn tilted_weights(model: &WalkModel, u: &[f64]) -> Vec<f64> {
    let exps = exponents(model, u);
    let m = exps.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let unnorm: Vec<f64> = exps.iter().map(|e| (e - m).exp()).collect();
    let z: f64 = unnorm.iter().sum();
    unnorm.into_iter().map(|w| w / z).collect()
}

/// grad log kappa(u): the mean of the tilted step distribution.
pub fn grad_log_kappa(model: &WalkModel, u: &[f64]) -> Vec<f64> {
    let w = tilted_weights(model, u);
    let mut g = vec![0.0; model.dim()];
    for (wv, v) in w.iter().zip(model.steps()) {
        for (gj, &vj) in g.iter_mut().zip(v) {
            *gj += wv * vj as f64;
        }
    }
    g
}

/// The raw Hessian matrix of log kappa at u: the covariance of the tilted
/// distribution, centered (two passes), so entries keep full relative
/// accuracy even when the tilt is deep and the covariance is tiny.
pub fn hessian_matrix(model: &WalkModel, u: &[f64]) -> DMatrix<f64> {
    let d = model.dim();
    let w = tilted_weights(model, u);
    let g = {
        let mut g = vec![0.0; d];
        for (wv, v) in w.iter().zip(model.steps()) {
            for (gj, &vj) in g.iter_mut().zip(v) {
                *gj += wv * vj as f64;
            }
        }
        g
    };
    let mut m = DMatrix::zeros(d, d);
    for (wv, v) in w.iter().zip(model.steps()) {
        for i in 0..d {
            let ci = v[i] as f64 - g[i];
            for j in 0..d {
                let cj = v[j] as f64 - g[j];
                m[(i, j)] += wv * ci * cj;
            }
        }
    }
    m
}

/// B_u = D^2 log kappa(u) via the covariance of the tilted distribution.
pub fn hessian_log_kappa(model: &WalkModel, u: &[f64]) -> Result<QuadraticForm> {
    QuadraticForm::new(hessian_matrix(model, u))
}

/// One-pass tilted statistics at u, in stack storage (dimension is at most
/// four), used by the Newton iteration so that sweeps of millions of solves
/// never allocate.
///
/// Moments are accumulated relative to the step carrying the largest tilted
/// weight. That anchor step then contributes exactly zero to both shifted
/// sums, so the covariance keeps full relative accuracy arbitrarily deep
/// into the tilt, where the distribution concentrates on one step and the
/// unshifted raw second moment would cancel catastrophically.
#[derive(Debug, Clone, Copy)]
pub struct TiltStats {
    pub log_kappa: f64,
    pub grad: [f64; 4],
    pub hess: [[f64; 4]; 4],
}

pub fn tilt_stats(model: &WalkModel, u: &[f64]) -> TiltStats {
    let d = model.dim();
    let steps = model.steps();
    let mut m = f64::NEG_INFINITY;
    let mut anchor = 0usize;
    for (idx, (lw, v)) in model.log_weights().iter().zip(steps).enumerate() {
        let e = lw + dot_iv(u, v);
        if e > m {
            m = e;
            anchor = idx;
        }
    }
    let a = &steps[anchor];
    let mut z = 0.0;
    let mut mean_shift = [0.0; 4];
    let mut second_shift = [[0.0; 4]; 4];
    for (lw, v) in model.log_weights().iter().zip(steps) {
        let w = (lw + dot_iv(u, v) - m).exp();
        z += w;
        for i in 0..d {
            let vi = (v[i] - a[i]) as f64;
            mean_shift[i] += w * vi;
            for j in 0..=i {
                second_shift[i][j] += w * vi * (v[j] - a[j]) as f64;
            }
        }
    }
    let inv = 1.0 / z;
    for c in mean_shift.iter_mut() {
        *c *= inv;
    }
    let mut grad = [0.0; 4];
    for i in 0..d {
        grad[i] = mean_shift[i] + a[i] as f64;
    }
    // The covariance is shift-invariant, so the anchored moments give it
    // directly.
    let mut hess = [[0.0; 4]; 4];
    for i in 0..d {
        for j in 0..=i {
            let h = second_shift[i][j] * inv - mean_shift[i] * mean_shift[j];
            hess[i][j] = h;
            hess[j][i] = h;
        }
    }
    TiltStats {
        log_kappa: m + z.ln(),
        grad,
        hess,
    }
}

/// B_u by the pair sum (1/2) sum_{v,v'} w_v w_{v'} (v-v')(v-v')^T.
/// Mathematically identical to [`hessian_log_kappa`]; kept as an
/// independent route for cross-checks (must agree to [`HESSIAN_ROUTE_TOL`]).
pub fn hessian_pair_sum(model: &WalkModel, u: &[f64]) -> DMatrix<f64> {
    let d = model.dim();
    let w = tilted_weights(model, u);
    let mut m = DMatrix::zeros(d, d);
    for (wa, a) in w.iter().zip(model.steps()) {
        for (wb, b) in w.iter().zip(model.steps()) {
            let ww = 0.5 * wa * wb;
            for i in 0..d {
                let di = (a[i] - b[i]) as f64;
                for j in 0..d {
                    m[(i, j)] += ww * di * (a[j] - b[j]) as f64;
                }
            }
        }
    }
    m
}

/// The covariance form at the origin, B_0.
pub fn covariance_at_mean(model: &WalkModel) -> Result<QuadraticForm> {
    hessian_log_kappa(model, &vec![0.0; model.dim()])
}

/// kappa(i theta): the characteristic function of one step.
pub fn char_kappa(model: &WalkModel, theta: &[f64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (w, v) in model.weights().iter().zip(model.steps()) {
        let phase = dot_iv(theta, v);
        acc += Complex64::new(0.0, phase).exp() * *w;
    }
    acc
}

/// The set U of theta in [-pi, pi)^d with |kappa(i theta)| = 1.
///
/// theta belongs to U iff <theta, v - v'> is a multiple of 2 pi for all
/// steps v, v', i.e. theta / (2 pi) lies in the dual of the step-difference
/// lattice. The points are computed exactly (rational coordinates times
/// 2 pi) and sorted lexicographically; 0 is always first.
#[derive(Debug, Clone)]
pub struct UnitarySet {
    /// Points theta, each in [-pi, pi)^d.
    pub points: Vec<Vec<f64>>,
}

pub fn unitary_set(model: &WalkModel) -> UnitarySet {
    let steps = model.steps();
    let diffs: Vec<Vec<i64>> = steps
        .iter()
        .skip(1)
        .map(|v| v.iter().zip(&steps[0]).map(|(a, b)| a - b).collect())
        .collect();
    let snf = smith_normal_form(model.dim(), &diffs);
    let mut points: Vec<Vec<f64>> = snf
        .dual_cosets()
        .into_iter()
        .map(|y| {
            y.into_iter()
                .map(|c| {
                    2.0 * std::f64::consts::PI * (*c.numer() as f64) / (*c.denom() as f64)
                })
                .collect()
        })
        .collect();
    points.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    UnitarySet { points }
}

fn exponents(model: &WalkModel, u: &[f64]) -> Vec<f64> {
    model
        .log_weights()
        .iter()
        .zip(model.steps())
        .map(|(lw, v)| lw + dot_iv(u, v))
        .collect()
}

fn dot_iv(u: &[f64], v: &[i64]) -> f64 {
    u.iter().zip(v).map(|(a, &b)| a * b as f64).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk_model::{WalkSpec, WalkModel};

    fn simple(dim: usize) -> WalkModel {
        let mut text = format!("dim {dim}\n");
        for j in 0..dim {
            for sgn in ["1", "-1"] {
                let mut coords = vec!["0"; dim];
                coords[j] = sgn;
                text.push_str(&format!("step {} 1/{}\n", coords.join(" "), 2 * dim));
            }
        }
        WalkModel::validate(WalkSpec::parse(&text).unwrap()).unwrap()
    }

    fn lazy1d() -> WalkModel {
        WalkModel::validate(
            WalkSpec::parse("dim 1\nstep 0 1/2\nstep 1 1/4\nstep -1 1/4\n").unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn kappa_of_simple_2d_walk() {
        // kappa((1,0)) = (cosh 1 + 1) / 2.
        let model = simple(2);
        let k = kappa(&model, &[1.0, 0.0]).unwrap();
        let expect = (1.0f64.cosh() + 1.0) / 2.0;
        assert!((k - expect).abs() < 1e-15, "kappa {k} vs {expect}");
    }

    #[test]
    fn kappa_overflow_guard_triggers() {
        let model = simple(1);
        let err = kappa(&model, &[800.0]).unwrap_err();
        assert!(matches!(err, Error::OverflowGuard { .. }));
        // The log-domain value is still finite: log kappa(u) ~ u - log 2.
        let lk = log_kappa(&model, &[800.0]);
        assert!((lk - (800.0 - 2.0f64.ln())).abs() < 1e-9, "log kappa {lk}");
    }

    #[test]
    fn gradient_is_tanh_in_one_dimension() {
        let model = simple(1);
        let u = 0.5 * 3.0f64.ln(); // tanh(u) = 1/2
        let g = grad_log_kappa(&model, &[u]);
        assert!((g[0] - 0.5).abs() < 1e-15, "grad {g:?}");
    }

    #[test]
    fn gradient_matches_finite_differences() {
        use rand::{Rng, SeedableRng};
        let models = [simple(1), simple(2), lazy1d()];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for model in &models {
            for _ in 0..100 {
                let u: Vec<f64> = (0..model.dim()).map(|_| rng.random_range(-3.0..3.0)).collect();
                let g = grad_log_kappa(model, &u);
                let h = 1e-6;
                for j in 0..model.dim() {
                    let mut up = u.clone();
                    let mut dn = u.clone();
                    up[j] += h;
                    dn[j] -= h;
                    let fd = (log_kappa(model, &up) - log_kappa(model, &dn)) / (2.0 * h);
                    assert!(
                        (g[j] - fd).abs() < 1e-6,
                        "grad[{j}] {} vs fd {} at {u:?}",
                        g[j],
                        fd
                    );
                }
            }
        }
    }

    #[test]
    fn hessian_routes_agree() {
        let models = [simple(1), simple(2), simple(3), lazy1d()];
        for model in &models {
            for t in [-2.0, -0.5, 0.0, 0.7, 2.5] {
                let u: Vec<f64> = (0..model.dim())
                    .map(|j| t * (1.0 + 0.3 * j as f64))
                    .collect();
                let a = hessian_log_kappa(model, &u).unwrap();
                let b = hessian_pair_sum(model, &u);
                let scale = a.max_eigenvalue.max(1e-300);
                let diff = (&a.matrix - &b).abs().max();
                assert!(
                    diff <= HESSIAN_ROUTE_TOL * scale,
                    "Hessian routes differ by {diff:.3e} at {u:?}"
                );
            }
        }
    }

    #[test]
    fn fused_stats_agree_with_the_separate_routes() {
        use rand::{Rng, SeedableRng};
        let models = [simple(1), simple(2), simple(3), lazy1d()];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(19);
        for model in &models {
            let d = model.dim();
            for _ in 0..50 {
                let u: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
                let st = tilt_stats(model, &u);
                assert!((st.log_kappa - log_kappa(model, &u)).abs() < 1e-14);
                let g = grad_log_kappa(model, &u);
                let h = hessian_matrix(model, &u);
                for i in 0..d {
                    assert!((st.grad[i] - g[i]).abs() < 1e-14, "grad mismatch at {u:?}");
                    for j in 0..d {
                        assert!(
                            (st.hess[i][j] - h[(i, j)]).abs() < 1e-12,
                            "hess[{i}{j}] {} vs {} at {u:?}",
                            st.hess[i][j],
                            h[(i, j)]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn covariance_at_mean_of_simple_walk_is_identity_over_d() {
        for dim in 1..=3 {
            let model = simple(dim);
            let b0 = covariance_at_mean(&model).unwrap();
            for i in 0..dim {
                for j in 0..dim {
                    let expect = if i == j { 1.0 / dim as f64 } else { 0.0 };
                    assert!(
                        (b0.matrix[(i, j)] - expect).abs() < 1e-15,
                        "B0[{i}{j}] = {}",
                        b0.matrix[(i, j)]
                    );
                }
            }
            assert!((b0.det - (1.0 / dim as f64).powi(dim as i32)).abs() < 1e-15);
        }
    }

    #[test]
    fn char_function_modulus_at_most_one() {
        use rand::{Rng, SeedableRng};
        let model = simple(2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let pi = std::f64::consts::PI;
        for _ in 0..10_000 {
            let theta: Vec<f64> = (0..2).map(|_| rng.random_range(-pi..pi)).collect();
            let m = char_kappa(&model, &theta).norm();
            assert!(m <= 1.0 + 1e-12, "|kappa(i theta)| = {m} at {theta:?}");
        }
    }

    #[test]
    fn unitary_set_of_simple_walks() {
        let pi = std::f64::consts::PI;
        let u1 = unitary_set(&simple(1));
        assert_eq!(u1.points.len(), 2);
        assert_eq!(u1.points[0], vec![-pi]);
        assert_eq!(u1.points[1], vec![0.0]);

        let u2 = unitary_set(&simple(2));
        assert_eq!(u2.points.len(), 2);
        assert_eq!(u2.points[0], vec![-pi, -pi]);
        assert_eq!(u2.points[1], vec![0.0, 0.0]);

        let u3 = unitary_set(&simple(3));
        assert_eq!(u3.points.len(), 2);
        assert_eq!(u3.points[0], vec![-pi, -pi, -pi]);

        let lazy = unitary_set(&lazy1d());
        assert_eq!(lazy.points, vec![vec![0.0]]);
    }

    #[test]
    fn unitary_points_have_unit_modulus_and_period_cardinality() {
        for model in [simple(1), simple(2), simple(3), lazy1d()] {
            let u = unitary_set(&model);
            assert_eq!(
                u.points.len(),
                model.period(),
                "|U| must equal the period"
            );
            for theta in &u.points {
                let m = char_kappa(&model, theta).norm();
                assert!((m - 1.0).abs() < 1e-12, "modulus {m} at {theta:?}");
                // Perturbations leave the unitary set.
                for j in 0..model.dim() {
                    let mut t = theta.clone();
                    t[j] += 0.1;
                    let m = char_kappa(&model, &t).norm();
                    assert!(m < 1.0 - 1e-5, "perturbed modulus {m}");
                }
            }
        }
    }
}
