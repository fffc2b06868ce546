//! Walk specifications and validated walk models.
//!
//! A walk is given by a finite set of integer step vectors v with positive
//! weights p(v) summing to one. The n-step transition function is the n-fold
//! convolution p(n;x). Structural quantities derived here:
//!
//! * period r: gcd of the return times {n >= 1 : p(n;0) > 0};
//! * aperiodic classes: x belongs to class j when the smallest m with
//!   p(m;x) > 0 satisfies m = j (mod r); the classes are the cosets of the
//!   lattice D generated by the pairwise step differences, and r = [Z^d : D];
//! * irreducibility: every lattice point is reachable, equivalently the
//!   steps generate Z^d as a group and every signed unit vector appears in
//!   some n-step support;
//! * mean velocity delta0 and the convex hull M of the steps.
//!
//! The text format for specs ("WALKSPEC 1") is line-based:
//!
//! ```text
//! # comment
//! dim 2
//! step  1  0 1/6
//! step -1  0 1/6
//! step  0  1 1/3
//! step  0 -1 0.3333333333333333
//! ```
//!
//! Weights are exact rationals `p/q` or decimals; rational weights must sum
//! to one exactly, decimal sums may be off by at most [`DECIMAL_SUM_TOL`].
//! The serializer writes rationals back as `p/q`, so parse -> serialize ->
//! parse is the identity.

use crate::convex_geometry::{Location, Polytope};
use crate::error::{Error, Result};
use crate::integer_lattice::{integer_rank, smith_normal_form, SmithNormalForm};
use num_integer::Integer;
use num_rational::Ratio;
use sha2::{Digest, Sha256};
use std::collections::HashSet;
use std::fmt::Write as _;

/// Tolerance on the weight sum when any weight is given as a decimal.
pub const DECIMAL_SUM_TOL: f64 = 1e-12;

/// Iteration cap for reachability searches, per unit of L1 radius.
/// Reachable points at L1 distance k are found after at most a small
/// multiple of k support iterations; the budget guards the non-reachable
/// case, which is reported as inconclusive rather than looping forever.
const BUDGET_PER_RADIUS: usize = 8;

/// A step weight: exact rational or decimal, kept as written so that specs
/// round-trip bit-exactly.
#[derive(Debug, Clone, PartialEq)]
pub enum Weight {
    Rational(Ratio<i64>),
    Decimal(f64),
}

impl Weight {
    pub fn value(&self) -> f64 {
        match self {
            Weight::Rational(r) => *r.numer() as f64 / *r.denom() as f64,
            Weight::Decimal(d) => *d,
        }
    }
}

/// One step: integer vector and weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub v: Vec<i64>,
    pub w: Weight,
}

/// Raw, unvalidated walk description.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkSpec {
    pub dim: usize,
    pub steps: Vec<Step>,
}

impl WalkSpec {
    /// Parses WALKSPEC 1 text.
    pub fn parse(text: &str) -> Result<Self> {
        let mut dim: Option<usize> = None;
        let mut steps = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = Some(idx + 1);
            let mut tok = line.split_whitespace();
            match tok.next() {
                Some("dim") => {
                    if dim.is_some() {
                        return Err(Error::InvalidSpec {
                            line: lineno,
                            msg: "duplicate dim line".into(),
                        });
                    }
                    let d: usize = tok
                        .next()
                        .ok_or_else(|| Error::InvalidSpec {
                            line: lineno,
                            msg: "dim needs a value".into(),
                        })?
                        .parse()
                        .map_err(|_| Error::InvalidSpec {
                            line: lineno,
                            msg: "dim must be a positive integer".into(),
                        })?;
                    if !(1..=4).contains(&d) {
                        return Err(Error::InvalidSpec {
                            line: lineno,
                            msg: format!("dim {d} out of supported range 1..=4"),
                        });
                    }
                    dim = Some(d);
                }
                Some("step") => {
                    let d = dim.ok_or_else(|| Error::InvalidSpec {
                        line: lineno,
                        msg: "step before dim".into(),
                    })?;
                    let fields: Vec<&str> = tok.collect();
                    if fields.len() != d + 1 {
                        return Err(Error::InvalidSpec {
                            line: lineno,
                            msg: format!(
                                "step needs {d} coordinates and a weight, got {} fields",
                                fields.len()
                            ),
                        });
                    }
                    let mut v = Vec::with_capacity(d);
                    for f in &fields[..d] {
                        v.push(f.parse::<i64>().map_err(|_| Error::InvalidSpec {
                            line: lineno,
                            msg: format!("bad coordinate {f:?}"),
                        })?);
                    }
                    let w = parse_weight(fields[d]).ok_or_else(|| Error::InvalidSpec {
                        line: lineno,
                        msg: format!("bad weight {:?}", fields[d]),
                    })?;
                    steps.push(Step { v, w });
                }
                Some(other) => {
                    return Err(Error::InvalidSpec {
                        line: lineno,
                        msg: format!("unknown directive {other:?}"),
                    })
                }
                None => unreachable!("blank lines are skipped"),
            }
        }
        let dim = dim.ok_or_else(|| Error::InvalidSpec {
            line: None,
            msg: "missing dim line".into(),
        })?;
        if steps.is_empty() {
            return Err(Error::InvalidSpec {
                line: None,
                msg: "no step lines".into(),
            });
        }
        Ok(WalkSpec { dim, steps })
    }

    /// Canonical WALKSPEC 1 text. Rationals are written as `p/q`, decimals
    /// with the shortest representation that parses back to the same f64.
    pub fn to_walkspec(&self) -> String {
        let mut out = String::new();
        writeln!(out, "dim {}", self.dim).unwrap();
        for s in &self.steps {
            let coords = s
                .v
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(" ");
            match &s.w {
                Weight::Rational(r) => writeln!(out, "step {coords} {}/{}", r.numer(), r.denom()),
                Weight::Decimal(d) => writeln!(out, "step {coords} {d}"),
            }
            .unwrap();
        }
        out
    }
}

fn parse_weight(text: &str) -> Option<Weight> {
    if let Some((num, den)) = text.split_once('/') {
        let n: i64 = num.parse().ok()?;
        let d: i64 = den.parse().ok()?;
        if d == 0 || n <= 0 || d < 0 {
            return None;
        }
        Some(Weight::Rational(Ratio::new(n, d)))
    } else {
        let v: f64 = text.parse().ok()?;
        if !(v.is_finite() && v > 0.0) {
            return None;
        }
        Some(Weight::Decimal(v))
    }
}

/// Smallest number of steps reaching a point, and its class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassIndex {
    /// Smallest m with p(m;x) > 0.
    pub m: usize,
    /// m mod period.
    pub class: usize,
}

/// A validated walk: spec plus every derived structural quantity.
#[derive(Debug, Clone)]
pub struct WalkModel {
    spec: WalkSpec,
    dim: usize,
    steps: Vec<Vec<i64>>,
    weights: Vec<f64>,
    log_weights: Vec<f64>,
    period: usize,
    mean: Vec<f64>,
    hull: Polytope,
    /// Largest L1 norm among the steps.
    range: i64,
    /// Lattice generated by the pairwise step differences.
    diff_lattice: SmithNormalForm,
    /// Base step used to label the classes: class(x) = j iff x - j*v0 lies
    /// in the difference lattice.
    v0: Vec<i64>,
    hash: String,
}

impl WalkModel {
    /// Validates a spec and derives the model. Checks, in order: shape and
    /// weights, affine span, irreducibility, then period / mean / hull /
    /// class structure.
    pub fn validate(spec: WalkSpec) -> Result<Self> {
        let dim = spec.dim;
        for s in &spec.steps {
            if s.v.len() != dim {
                return Err(Error::InvalidSpec {
                    line: None,
                    msg: format!("step {:?} has wrong dimension", s.v),
                });
            }
            if s.w.value() <= 0.0 {
                return Err(Error::InvalidSpec {
                    line: None,
                    msg: "weights must be positive".into(),
                });
            }
        }
        let mut uniq = HashSet::new();
        for s in &spec.steps {
            if !uniq.insert(s.v.clone()) {
                return Err(Error::InvalidSpec {
                    line: None,
                    msg: format!("duplicate step vector {:?}", s.v),
                });
            }
        }
        check_weight_sum(&spec)?;

        let steps: Vec<Vec<i64>> = spec.steps.iter().map(|s| s.v.clone()).collect();
        let weights: Vec<f64> = spec.steps.iter().map(|s| s.w.value()).collect();
        let range = steps
            .iter()
            .map(|v| v.iter().map(|c| c.abs()).sum::<i64>())
            .max()
            .unwrap();

        let diffs: Vec<Vec<i64>> = steps
            .iter()
            .skip(1)
            .map(|v| v.iter().zip(&steps[0]).map(|(a, b)| a - b).collect())
            .collect();
        if integer_rank(dim, &diffs) < dim {
            return Err(Error::DegenerateSupport);
        }

        if !irreducible(dim, &steps)? {
            return Err(Error::NotIrreducible {
                reason: "steps do not generate Z^d".into(),
            });
        }

        let period = period_of(dim, &steps, range)?;
        let diff_lattice = smith_normal_form(dim, &diffs);
        debug_assert_eq!(diff_lattice.rank, dim);
        // The class count equals the lattice index; cross-checked against
        // the support-iteration period in the test suite and the self test.
        let index = diff_lattice.index(dim).expect("full-rank difference lattice");
        if index as usize != period {
            return Err(Error::InvariantViolation {
                what: "period must equal the difference-lattice index".into(),
                witness: format!("period {period}, index {index}"),
            });
        }

        let mut mean = vec![0.0; dim];
        for (v, w) in steps.iter().zip(&weights) {
            for (m, c) in mean.iter_mut().zip(v) {
                *m += w * *c as f64;
            }
        }

        let hull = Polytope::hull(dim, &steps)?;
        if hull.contains(&mean) != Location::Inside {
            return Err(Error::InvariantViolation {
                what: "mean velocity must lie strictly inside the hull".into(),
                witness: format!("{mean:?}"),
            });
        }

        let v0 = steps.iter().min().unwrap().clone();
        let log_weights = weights.iter().map(|w| w.ln()).collect();
        let hash = {
            let mut h = Sha256::new();
            h.update(spec.to_walkspec().as_bytes());
            let digest = h.finalize();
            digest[..8].iter().map(|b| format!("{b:02x}")).collect()
        };

        Ok(WalkModel {
            spec,
            dim,
            steps,
            weights,
            log_weights,
            period,
            mean,
            hull,
            range,
            diff_lattice,
            v0,
            hash,
        })
    }

    pub fn spec(&self) -> &WalkSpec {
        &self.spec
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn steps(&self) -> &[Vec<i64>] {
        &self.steps
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }
    /// Period r = gcd of return times.
    pub fn period(&self) -> usize {
        self.period
    }
    /// Mean step (drift velocity) delta0.
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }
    /// Convex hull M of the steps.
    pub fn hull(&self) -> &Polytope {
        &self.hull
    }
    /// Largest L1 norm among the steps.
    pub fn range(&self) -> i64 {
        self.range
    }
    /// Hex digest identifying the walk spec in report headers.
    pub fn hash(&self) -> &str {
        &self.hash
    }

    /// Class of `x`: the unique j in [0, r) with x reachable in j (mod r)
    /// steps. Computed algebraically from the difference lattice, O(d^2).
    pub fn class_of(&self, x: &[i64]) -> usize {
        let mut shifted: Vec<i64> = x.to_vec();
        for j in 0..self.period {
            if self.diff_lattice.contains(&shifted) {
                return j;
            }
            for (s, v) in shifted.iter_mut().zip(&self.v0) {
                *s -= v;
            }
        }
        unreachable!("irreducible walks partition Z^d into r classes");
    }

    /// Whether p(n;x) can be positive: n must match the class of x mod r.
    pub fn class_ok(&self, n: usize, x: &[i64]) -> bool {
        (n % self.period) == self.class_of(x)
    }

    /// Smallest m with p(m;x) > 0, found by breadth-first support iteration,
    /// plus the class m mod r. Errors with a budget failure for points the
    /// search cannot reach in O(|x|) iterations.
    pub fn class_index(&self, x: &[i64]) -> Result<ClassIndex> {
        let radius: usize = x.iter().map(|c| c.unsigned_abs() as usize).sum();
        let budget = BUDGET_PER_RADIUS * (radius + 2) * self.dim;
        let mut support: HashSet<Vec<i64>> = HashSet::from([vec![0; self.dim]]);
        if support.contains(x) {
            return Ok(ClassIndex { m: 0, class: 0 });
        }
        for m in 1..=budget {
            support = convolve_support(&support, &self.steps);
            if support.contains(x) {
                return Ok(ClassIndex {
                    m,
                    class: m % self.period,
                });
            }
        }
        Err(Error::SearchBudgetExceeded {
            what: format!("searching the first arrival at {x:?}"),
            budget,
        })
    }

    /// First-arrival times for every point with L1 norm at most `radius`,
    /// from a single breadth-first sweep. Used by structural tests.
    pub fn first_arrival_table(&self, radius: usize) -> Vec<(Vec<i64>, usize)> {
        let budget = BUDGET_PER_RADIUS * (radius + 2) * self.dim;
        let mut seen: std::collections::HashMap<Vec<i64>, usize> =
            std::collections::HashMap::from([(vec![0; self.dim], 0)]);
        let mut support: HashSet<Vec<i64>> = HashSet::from([vec![0; self.dim]]);
        let target: usize = ball_size(self.dim, radius);
        let mut found = seen.len();
        for m in 1..=budget {
            support = convolve_support(&support, &self.steps);
            for x in &support {
                let r: usize = x.iter().map(|c| c.unsigned_abs() as usize).sum();
                if r <= radius && !seen.contains_key(x) {
                    seen.insert(x.clone(), m);
                    found += 1;
                }
            }
            if found == target {
                break;
            }
        }
        let mut out: Vec<(Vec<i64>, usize)> = seen.into_iter().collect();
        out.sort();
        out
    }

    /// Whether the steps are exactly the signed unit vectors with equal
    /// weights (the simple walk), the family the Gaussian formula covers.
    pub fn is_simple_walk(&self) -> bool {
        if self.steps.len() != 2 * self.dim {
            return false;
        }
        let w0 = 1.0 / (2 * self.dim) as f64;
        if self.weights.iter().any(|&w| (w - w0).abs() > 1e-15) {
            return false;
        }
        let mut expect: Vec<Vec<i64>> = Vec::new();
        for j in 0..self.dim {
            for sgn in [1i64, -1] {
                let mut e = vec![0i64; self.dim];
                e[j] = sgn;
                expect.push(e);
            }
        }
        expect.iter().all(|e| self.steps.contains(e))
    }
}

fn check_weight_sum(spec: &WalkSpec) -> Result<()> {
    let all_rational = spec
        .steps
        .iter()
        .all(|s| matches!(s.w, Weight::Rational(_)));
    if all_rational {
        let mut sum = Ratio::new(0i64, 1);
        for s in &spec.steps {
            if let Weight::Rational(r) = &s.w {
                sum += r;
            }
        }
        if sum != Ratio::new(1, 1) {
            return Err(Error::WeightSum {
                sum: format!("{}/{}", sum.numer(), sum.denom()),
            });
        }
    } else {
        let sum: f64 = spec.steps.iter().map(|s| s.w.value()).sum();
        if (sum - 1.0).abs() > DECIMAL_SUM_TOL {
            return Err(Error::WeightSum {
                sum: format!("{sum}"),
            });
        }
    }
    Ok(())
}

/// Number of integer points with L1 norm at most `radius` in dimension d.
fn ball_size(dim: usize, radius: usize) -> usize {
    // Recurrence over dimensions: N_d(r) = sum over last coordinate.
    let mut row: Vec<usize> = vec![1; radius + 1]; // d = 0
    for _ in 0..dim {
        let mut next = vec![0usize; radius + 1];
        for r in 0..=radius {
            // last coordinate c with |c| <= r
            next[r] = row[r] + 2 * (0..r).map(|rr| row[rr]).sum::<usize>();
        }
        row = next;
    }
    row[radius]
}

/// One support-set convolution: S + V.
fn convolve_support(support: &HashSet<Vec<i64>>, steps: &[Vec<i64>]) -> HashSet<Vec<i64>> {
    let mut next = HashSet::with_capacity(support.len() * 2);
    for x in support {
        for v in steps {
            let y: Vec<i64> = x.iter().zip(v).map(|(a, b)| a + b).collect();
            next.insert(y);
        }
    }
    next
}

/// Whether the walk reaches all of Z^d: the steps must generate Z^d as a
/// group (Smith normal form check) and every signed unit vector must appear
/// in some n-step support within the search budget. A budget failure is
/// inconclusive and surfaces as an error, distinct from a definite `false`.
pub fn irreducible(dim: usize, steps: &[Vec<i64>]) -> Result<bool> {
    let snf = smith_normal_form(dim, steps);
    match snf.index(dim) {
        None => return Ok(false),
        Some(1) => {}
        Some(_) => return Ok(false),
    }

    let mut targets: HashSet<Vec<i64>> = HashSet::new();
    for j in 0..dim {
        for sgn in [1i64, -1] {
            let mut e = vec![0i64; dim];
            e[j] = sgn;
            targets.insert(e);
        }
    }
    let budget = BUDGET_PER_RADIUS * 4 * dim;
    let mut support: HashSet<Vec<i64>> = HashSet::from([vec![0; dim]]);
    for _ in 1..=budget {
        support = convolve_support(&support, steps);
        targets.retain(|t| !support.contains(t));
        if targets.is_empty() {
            return Ok(true);
        }
    }
    Err(Error::SearchBudgetExceeded {
        what: format!("reaching the unit vectors {targets:?}"),
        budget,
    })
}

/// Period by support iteration: gcd of the n with 0 in the n-step support,
/// stopped once the running gcd has been stable for 4 * d * range steps.
fn period_of(dim: usize, steps: &[Vec<i64>], range: i64) -> Result<usize> {
    let window = 4 * dim * range as usize;
    let budget = 16 * (window + 4);
    let origin = vec![0i64; dim];
    let mut support: HashSet<Vec<i64>> = HashSet::from([origin.clone()]);
    let mut gcd: usize = 0;
    let mut stable = 0;
    for n in 1..=budget {
        support = convolve_support(&support, steps);
        if support.contains(&origin) {
            let g = if gcd == 0 { n } else { gcd.gcd(&n) };
            if g == gcd {
                stable += 1;
            } else {
                gcd = g;
                stable = 0;
            }
        } else if gcd != 0 {
            stable += 1;
        }
        if gcd != 0 && stable >= window {
            return Ok(gcd);
        }
    }
    Err(Error::SearchBudgetExceeded {
        what: "stabilizing the period gcd".into(),
        budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn simple_spec(dim: usize) -> WalkSpec {
        let mut steps = Vec::new();
        for j in 0..dim {
            for sgn in [1i64, -1] {
                let mut v = vec![0i64; dim];
                v[j] = sgn;
                steps.push(Step {
                    v,
                    w: Weight::Rational(Ratio::new(1, 2 * dim as i64)),
                });
            }
        }
        WalkSpec { dim, steps }
    }

    fn lazy_spec() -> WalkSpec {
        WalkSpec {
            dim: 1,
            steps: vec![
                Step {
                    v: vec![0],
                    w: Weight::Rational(Ratio::new(1, 2)),
                },
                Step {
                    v: vec![1],
                    w: Weight::Rational(Ratio::new(1, 4)),
                },
                Step {
                    v: vec![-1],
                    w: Weight::Rational(Ratio::new(1, 4)),
                },
            ],
        }
    }

    #[test]
    fn parses_and_round_trips() {
        let text = "# drifting walk\ndim 1\nstep 1 2/3\nstep -1 1/3\n";
        let spec = WalkSpec::parse(text).unwrap();
        assert_eq!(spec.dim, 1);
        assert_eq!(spec.steps.len(), 2);
        let canon = spec.to_walkspec();
        assert_eq!(canon, "dim 1\nstep 1 2/3\nstep -1 1/3\n");
        assert_eq!(WalkSpec::parse(&canon).unwrap(), spec);
    }

    #[test]
    fn decimal_weights_round_trip() {
        let text = "dim 1\nstep 1 0.5\nstep -1 0.5\n";
        let spec = WalkSpec::parse(text).unwrap();
        let canon = spec.to_walkspec();
        assert_eq!(WalkSpec::parse(&canon).unwrap(), spec);
        assert!(matches!(spec.steps[0].w, Weight::Decimal(v) if v == 0.5));
    }

    #[test]
    fn rejects_malformed_specs() {
        for bad in [
            "step 1 1/2",              // step before dim
            "dim 1\n",                 // no steps
            "dim 0\nstep 1 1",         // dim out of range
            "dim 1\nstep 1 1/2\nstep 1 1/2", // duplicate vector
            "dim 1\nstep 1 0/2\nstep -1 1",  // zero weight
            "dim 2\nstep 1 1/2",       // wrong arity
            "walk 1",                  // unknown directive
        ] {
            assert!(
                WalkSpec::parse(bad).and_then(WalkModel::validate).is_err(),
                "spec {bad:?} must be rejected"
            );
        }
    }

    #[test]
    fn rational_weight_sum_must_be_exact() {
        let text = "dim 1\nstep 1 1/2\nstep -1 1/3\n";
        let err = WalkSpec::parse(text).and_then(WalkModel::validate).unwrap_err();
        assert!(matches!(err, Error::WeightSum { .. }), "got {err:?}");
    }

    #[test]
    fn simple_walk_structure() {
        for dim in 1..=3 {
            let model = WalkModel::validate(simple_spec(dim)).unwrap();
            assert_eq!(model.period(), 2, "simple walk has period 2");
            assert!(model.mean().iter().all(|&m| m.abs() < 1e-15));
            assert!(model.is_simple_walk());
            assert_eq!(model.range(), 1);
        }
    }

    #[test]
    fn lazy_walk_is_aperiodic() {
        let model = WalkModel::validate(lazy_spec()).unwrap();
        assert_eq!(model.period(), 1);
        assert!(!model.is_simple_walk());
    }

    #[test]
    fn doubled_steps_are_not_irreducible() {
        assert_eq!(irreducible(1, &[vec![2], vec![-2]]).unwrap(), false);
        let spec = WalkSpec {
            dim: 1,
            steps: vec![
                Step {
                    v: vec![2],
                    w: Weight::Rational(Ratio::new(1, 2)),
                },
                Step {
                    v: vec![-2],
                    w: Weight::Rational(Ratio::new(1, 2)),
                },
            ],
        };
        assert!(matches!(
            WalkModel::validate(spec).unwrap_err(),
            Error::NotIrreducible { .. }
        ));
    }

    #[test]
    fn one_sided_walk_is_inconclusive() {
        // Steps {+1, +2} generate Z as a group but never reach -1; the
        // reachability search must report an exceeded budget, not `false`.
        let res = irreducible(1, &[vec![1], vec![2]]);
        assert!(matches!(res, Err(Error::SearchBudgetExceeded { .. })));
    }

    #[test]
    fn class_structure_of_simple_walk() {
        let model = WalkModel::validate(simple_spec(1)).unwrap();
        assert_eq!(model.class_index(&[5]).unwrap(), ClassIndex { m: 5, class: 1 });
        assert_eq!(model.class_index(&[0]).unwrap(), ClassIndex { m: 0, class: 0 });
        assert_eq!(model.class_index(&[-4]).unwrap(), ClassIndex { m: 4, class: 0 });
        assert_eq!(model.class_of(&[7]), 1);
        assert!(model.class_ok(5, &[5]));
        assert!(!model.class_ok(6, &[5]));
    }

    #[test]
    fn algebraic_class_matches_first_arrival() {
        for spec in [simple_spec(1), simple_spec(2), lazy_spec()] {
            let model = WalkModel::validate(spec).unwrap();
            for (x, m) in model.first_arrival_table(6) {
                assert_eq!(
                    model.class_of(&x),
                    m % model.period(),
                    "class of {x:?} must equal first arrival {m} mod r"
                );
            }
        }
    }

    #[test]
    fn first_arrival_grows_linearly() {
        let model = WalkModel::validate(simple_spec(2)).unwrap();
        for (x, m) in model.first_arrival_table(8) {
            let r: usize = x.iter().map(|c| c.unsigned_abs() as usize).sum();
            assert_eq!(m, r, "simple walk reaches x in exactly |x|_1 steps");
        }
    }

    #[test]
    fn drift_walk_validates_with_interior_mean() {
        let spec = WalkSpec::parse("dim 1\nstep 1 2/3\nstep -1 1/3\n").unwrap();
        let model = WalkModel::validate(spec).unwrap();
        assert!((model.mean()[0] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(model.period(), 2);
    }

    #[test]
    fn hash_is_stable_and_spec_dependent() {
        let a = WalkModel::validate(simple_spec(1)).unwrap();
        let b = WalkModel::validate(simple_spec(1)).unwrap();
        let c = WalkModel::validate(lazy_spec()).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 16);
    }
}
