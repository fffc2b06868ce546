//! Exact integer-lattice computations.
//!
//! Several structural questions about a walk reduce to questions about the
//! sublattice of Z^d generated by a finite family of integer vectors:
//!
//! * the walk generates all of Z^d as a group iff the Smith normal form of
//!   the step matrix has all invariant factors equal to 1;
//! * the aperiodic classes are the cosets of the lattice D generated by the
//!   pairwise step differences, and the period equals the index [Z^d : D];
//! * the set where the characteristic function has modulus one is the dual
//!   lattice of D scaled by 2π, reduced to the fundamental cube.
//!
//! Everything here is exact 64-bit integer arithmetic (intermediates in
//! i128); the inputs are desk-scale step sets, never large matrices.

use num_integer::Integer;
use num_rational::Ratio;

/// Smith normal form of an integer matrix `a` (`rows x cols`), together with
/// the unimodular row transform.
///
/// `u * a * v = s` for some unimodular `v` (not tracked), where `s` is
/// diagonal with `factors[i] = s[i][i] > 0` and `factors[i]` divides
/// `factors[i+1]`. Only `u` is needed by the callers: the column lattice of
/// `a` is `u^-1 * diag(factors) * Z^rank`.
#[derive(Debug, Clone)]
pub struct SmithNormalForm {
    /// Positive invariant factors, in divisibility order; length = rank.
    pub factors: Vec<i64>,
    /// Unimodular row transform, `rows x rows`.
    pub u: Vec<Vec<i64>>,
    pub rank: usize,
}

/// Computes the Smith normal form of the matrix whose columns are `cols`
/// (each of length `dim`).
pub fn smith_normal_form(dim: usize, cols: &[Vec<i64>]) -> SmithNormalForm {
    let m = cols.len();
    // a[i][j] = i-th coordinate of column j.
    let mut a: Vec<Vec<i128>> = (0..dim)
        .map(|i| cols.iter().map(|c| c[i] as i128).collect())
        .collect();
    let mut u: Vec<Vec<i128>> = (0..dim)
        .map(|i| (0..dim).map(|j| i128::from(i == j)).collect())
        .collect();

    let mut t = 0;
    while t < dim.min(m) {
        // Pivot: nonzero entry of smallest magnitude in the trailing block.
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..dim {
            for j in t..m {
                if a[i][j] != 0
                    && pivot.map_or(true, |(pi, pj)| a[i][j].abs() < a[pi][pj].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        a.swap(t, pi);
        u.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }

        // Clear column t below and row t to the right; restart whenever a
        // remainder shrinks the pivot.
        let mut clean = true;
        for i in t + 1..dim {
            let q = div_round(a[i][t], a[t][t]);
            if q != 0 {
                for j in 0..m {
                    a[i][j] -= q * a[t][j];
                }
                for j in 0..dim {
                    u[i][j] -= q * u[t][j];
                }
            }
            if a[i][t] != 0 {
                clean = false;
            }
        }
        for j in t + 1..m {
            let q = div_round(a[t][j], a[t][t]);
            if q != 0 {
                for i in 0..dim {
                    a[i][j] -= q * a[i][t];
                }
            }
            if a[t][j] != 0 {
                clean = false;
            }
        }
        if !clean {
            continue;
        }

        // Divisibility fix-up: the pivot must divide every trailing entry.
        let mut fixed = true;
        'scan: for i in t + 1..dim {
            for j in t + 1..m {
                if a[i][j] % a[t][t] != 0 {
                    for jj in 0..m {
                        a[t][jj] += a[i][jj];
                    }
                    for jj in 0..dim {
                        u[t][jj] += u[i][jj];
                    }
                    fixed = false;
                    break 'scan;
                }
            }
        }
        if fixed {
            t += 1;
        }
    }

    let mut factors = Vec::new();
    for i in 0..t {
        if a[i][i] == 0 {
            break;
        }
        if a[i][i] < 0 {
            for j in 0..dim {
                u[i][j] = -u[i][j];
            }
        }
        factors.push(i64::try_from(a[i][i].abs()).expect("invariant factor fits i64"));
    }
    let u64x = u
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|x| i64::try_from(x).expect("transform entry fits i64"))
                .collect()
        })
        .collect();
    SmithNormalForm {
        rank: factors.len(),
        factors,
        u: u64x,
    }
}

/// Quotient rounded toward the nearest integer (ties toward zero), which
/// keeps remainders at most half the pivot and speeds up the reduction.
fn div_round(a: i128, b: i128) -> i128 {
    let q = a / b;
    let r = a - q * b;
    if 2 * r.abs() > b.abs() {
        q + if (r < 0) == (b < 0) { 1 } else { -1 }
    } else {
        q
    }
}

impl SmithNormalForm {
    /// Index of the column lattice in Z^dim: the product of the invariant
    /// factors. `None` when the lattice has lower rank (infinite index).
    pub fn index(&self, dim: usize) -> Option<i64> {
        if self.rank < dim {
            return None;
        }
        let mut idx: i64 = 1;
        for &f in &self.factors {
            idx = idx.checked_mul(f).expect("lattice index fits i64");
        }
        Some(idx)
    }

    /// Whether the integer point `x` belongs to the column lattice.
    pub fn contains(&self, x: &[i64]) -> bool {
        let dim = self.u.len();
        debug_assert_eq!(x.len(), dim);
        for i in 0..dim {
            let mut acc: i128 = 0;
            for j in 0..dim {
                acc += self.u[i][j] as i128 * x[j] as i128;
            }
            if i < self.rank {
                if acc % self.factors[i] as i128 != 0 {
                    return false;
                }
            } else if acc != 0 {
                return false;
            }
        }
        true
    }

    /// Representatives of the dual lattice modulo Z^dim, as exact rationals
    /// in [-1/2, 1/2)^dim. For a full-rank lattice D these are the points y
    /// with <y, w> integral for all w in D; there are exactly `index` of
    /// them.
    pub fn dual_cosets(&self) -> Vec<Vec<Ratio<i64>>> {
        let dim = self.u.len();
        assert_eq!(self.rank, dim, "dual cosets need a full-rank lattice");
        let mut out = Vec::new();
        let mut k = vec![0i64; dim];
        loop {
            // y = u^T * diag(k_i / s_i), reduced into [-1/2, 1/2).
            let y: Vec<Ratio<i64>> = (0..dim)
                .map(|j| {
                    let mut acc = Ratio::new(0, 1);
                    for i in 0..dim {
                        acc += Ratio::new(self.u[i][j] * k[i], self.factors[i]);
                    }
                    wrap_half(acc)
                })
                .collect();
            out.push(y);

            // Odometer over k_i in [0, s_i).
            let mut carry = true;
            for i in 0..dim {
                if carry {
                    k[i] += 1;
                    if k[i] == self.factors[i] {
                        k[i] = 0;
                    } else {
                        carry = false;
                    }
                }
            }
            if carry {
                break;
            }
        }
        out.sort();
        out
    }
}

/// Reduces a rational into the half-open interval [-1/2, 1/2).
fn wrap_half(x: Ratio<i64>) -> Ratio<i64> {
    let shifted = x + Ratio::new(1, 2);
    let f = shifted.floor();
    shifted - f - Ratio::new(1, 2)
}

/// Rank over the rationals of the family of integer vectors, by fraction-free
/// elimination.
pub fn integer_rank(dim: usize, vecs: &[Vec<i64>]) -> usize {
    let mut rows: Vec<Vec<i128>> = vecs
        .iter()
        .map(|v| v.iter().map(|&x| x as i128).collect())
        .collect();
    let mut rank = 0;
    for col in 0..dim {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let (head, tail) = rows.split_at_mut(rank + 1);
        let pivot_row = &head[rank];
        for row in tail {
            if row[col] != 0 {
                let (a, b) = (pivot_row[col], row[col]);
                let g = gcd_i128(a, b);
                let (fa, fb) = (b / g, a / g);
                for j in 0..dim {
                    row[j] = row[j] * fb - pivot_row[j] * fa;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    a.abs().gcd(&b.abs())
}
