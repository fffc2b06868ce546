//! Walks on the triangular and hexagonal lattices, reduced to Z^2.
//!
//! Both lattices embed in the plane through the basis
//!
//! ```text
//! lambda_1 = (-1/2, sqrt(3)/2),    lambda_2 = (1/2, sqrt(3)/2),
//! ```
//!
//! and the coordinate map j lambda_1 + j' lambda_2 <-> (j, j') identifies
//! the triangular lattice with Z^2. The uniform nearest-neighbour walk
//! becomes the six-step walk [`triangular_model`], and everything else in
//! the crate applies unchanged.
//!
//! The hexagonal (honeycomb) lattice is not a lattice: it is the triangular
//! vertex set minus one residue class of tau(j, j') = j + 2j' mod 3 (the
//! class tau = 1). The remaining classes tau = 0 and tau = 2 form the two
//! parts of a bipartite 3-regular graph, so the uniform neighbour walk
//! alternates between them and has no single-lattice step law. Squaring the
//! walk fixes this: two hops return to the tau = 0 class, whose points form
//! a genuine index-3 sublattice, and in its own coordinates the two-hop law
//! is the seven-step walk [`hexagonal_q_model`] (hold with probability 1/3,
//! each of six directions with 1/9). [`HexKernel`] reassembles exact n-hop
//! probabilities on the honeycomb from one convolution of that squared
//! walk, and [`hex_direct_table`] recomputes them by brute dynamic
//! programming on the graph itself as an independent oracle.

use crate::asymptotics::mean_hessian_estimate;
use crate::error::Result;
use crate::exact_kernel::{convolve_kernel, KernelTable};
use crate::saddle::solve_saddle;
use crate::walk_model::{WalkModel, WalkSpec};

/// First basis vector of the planar embedding.
pub const LAMBDA_1: [f64; 2] = [-0.5, 0.8660254037844386];
/// Second basis vector of the planar embedding.
pub const LAMBDA_2: [f64; 2] = [0.5, 0.8660254037844386];

/// Plane position of the lattice point j lambda_1 + j' lambda_2.
pub fn to_plane(j: i64, jp: i64) -> [f64; 2] {
    [
        j as f64 * LAMBDA_1[0] + jp as f64 * LAMBDA_2[0],
        j as f64 * LAMBDA_1[1] + jp as f64 * LAMBDA_2[1],
    ]
}

/// The honeycomb residue: tau = (j + 2 j') mod 3. Vertices with tau = 1
/// are absent from the hexagonal lattice.
pub fn tau(j: i64, jp: i64) -> u8 {
    (j + 2 * jp).rem_euclid(3) as u8
}

const TRIANGULAR_TEXT: &str = "dim 2
step  1  0 1/6
step -1  0 1/6
step  0  1 1/6
step  0 -1 1/6
step  1 -1 1/6
step -1  1 1/6
";

const HEX_Q_TEXT: &str = "dim 2
step  0  0 1/3
step  1  0 1/9
step -1  0 1/9
step  0  1 1/9
step  0 -1 1/9
step  1 -1 1/9
step -1  1 1/9
";

/// The uniform nearest-neighbour walk on the triangular lattice, in (j, j')
/// coordinates: weight 1/6 on each of the six hexagon directions.
pub fn triangular_spec() -> WalkSpec {
    WalkSpec::parse(TRIANGULAR_TEXT).expect("builtin spec parses")
}

pub fn triangular_model() -> WalkModel {
    WalkModel::validate(triangular_spec()).expect("builtin spec validates")
}

/// The squared honeycomb walk on its tau = 0 sublattice, in that
/// sublattice's own coordinates.
pub fn hexagonal_q_spec() -> WalkSpec {
    WalkSpec::parse(HEX_Q_TEXT).expect("builtin spec parses")
}

pub fn hexagonal_q_model() -> WalkModel {
    WalkModel::validate(hexagonal_q_spec()).expect("builtin spec validates")
}

/// Outgoing honeycomb edges by residue class. The three neighbours of a
/// tau = 0 vertex have tau = 2 and vice versa; both sets are checked
/// against [`tau`] in the tests, and the sets are negatives of each other,
/// as an undirected graph requires.
pub const MOVES_FROM_TAU0: [[i64; 2]; 3] = [[0, 1], [-1, 0], [1, -1]];
pub const MOVES_FROM_TAU2: [[i64; 2]; 3] = [[1, 0], [0, -1], [-1, 1]];

/// Coordinates of a tau = 0 point in the squared-walk sublattice: the
/// sublattice has basis (1, 1), (-1, 2) inside Z^2, and this is the change
/// of basis. Returns None off the sublattice.
pub fn hex_image(j: i64, jp: i64) -> Option<[i64; 2]> {
    if tau(j, jp) != 0 {
        return None;
    }
    Some([(2 * j + jp) / 3, (jp - j) / 3])
}

/// The velocity entering the hexagonal asymptotic at time n:
/// delta = ((2j + j')/3n, (j' - j)/3n).
pub fn hex_delta(n: usize, j: i64, jp: i64) -> [f64; 2] {
    let nf = 3.0 * n as f64;
    [(2 * j + jp) as f64 / nf, (jp - j) as f64 / nf]
}

/// Whether an n-hop honeycomb transition from the origin to (j, j') can be
/// nonzero: bipartiteness forces tau = 0 at even times and tau = 2 at odd
/// times.
pub fn hex_class_ok(n: usize, j: i64, jp: i64) -> bool {
    match tau(j, jp) {
        0 => n % 2 == 0,
        2 => n % 2 == 1,
        _ => false,
    }
}

/// Exact n-hop honeycomb transition probabilities from the origin, backed
/// by one convolution of the squared walk.
///
/// For even n and tau(x) = 0 the chain is at a squared-walk time n/2, so
/// p(n;x) is a single kernel entry. For odd n and tau(x) = 2 the first hop
/// is averaged out: conditioning on the three possible first vertices u
/// leaves 2m = n - 1 hops from u to x, and x - u is back on the tau = 0
/// sublattice, so
///
/// ```text
/// p(n;x) = (1/3) [ q(m; im(x + lambda_1)) + q(m; im(x - lambda_2))
///                + q(m; im(x - lambda_1 + lambda_2)) ].
/// ```
///
/// All other (n, x) combinations are exactly zero.
pub struct HexKernel {
    n: usize,
    q: KernelTable,
}

impl HexKernel {
    pub fn new(n: usize, mem_budget_mb: usize) -> Result<Self> {
        let m = if n % 2 == 0 { n / 2 } else { (n - 1) / 2 };
        let q = convolve_kernel(&hexagonal_q_model(), m, mem_budget_mb)?;
        Ok(HexKernel { n, q })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// p(n; (j, j')).
    pub fn get(&self, j: i64, jp: i64) -> f64 {
        if !hex_class_ok(self.n, j, jp) {
            return 0.0;
        }
        if self.n % 2 == 0 {
            let im = hex_image(j, jp).expect("class-checked");
            self.q.get(&im)
        } else {
            let mut sum = 0.0;
            for mv in MOVES_FROM_TAU0 {
                // x - u runs over x + lambda_1, x - lambda_2,
                // x - lambda_1 + lambda_2 as u runs over the first hops.
                let im = hex_image(j - mv[0], jp - mv[1]).expect("neighbour of tau=2 is tau=0");
                sum += self.q.get(&im);
            }
            sum / 3.0
        }
    }

    /// Total mass over the reachable box, by compensated summation.
    pub fn mass(&self) -> f64 {
        let half = self.n as i64;
        let mut acc = crate::exact_kernel::Neumaier::default();
        for j in -half..=half {
            for jp in -half..=half {
                acc.add(self.get(j, jp));
            }
        }
        acc.value()
    }
}

/// The closed-form asymptotic for the honeycomb walk:
///
/// ```text
/// p(n; x) ~ 3 sqrt(3) (2 pi n)^{-1} e^{-n phi(delta)},
/// ```
///
/// on the admissible class and zero off it, where delta is [`hex_delta`]
/// and phi is the honeycomb rate function, expressed through the squared
/// walk as phi(delta) = phi_q(2 delta) / 2 (two hops advance the squared
/// walk by one step, doubling the velocity and halving the time). The
/// constant 3 sqrt(3) is det(B_0)^{-1/2} = (4/27)^{-1/2} of the squared
/// walk times the 2 from its halved time scale.
pub fn hex_asymptotic(q_model: &WalkModel, n: usize, j: i64, jp: i64) -> Result<f64> {
    if !hex_class_ok(n, j, jp) {
        return Ok(0.0);
    }
    let delta = hex_delta(n, j, jp);
    let doubled = [2.0 * delta[0], 2.0 * delta[1]];
    let sp = solve_saddle(q_model, &doubled)?;
    let three_sqrt3 = 27.0f64.sqrt();
    Ok(three_sqrt3 / (std::f64::consts::TAU * n as f64) * (-(n as f64) * 0.5 * sp.phi).exp())
}

/// Brute-force oracle: dynamic programming directly on the honeycomb
/// adjacency. Shares nothing with the squared-walk route.
pub struct HexDirectTable {
    pub n: usize,
    half: i64,
    values: Vec<f64>,
}

pub fn hex_direct_table(n: usize) -> HexDirectTable {
    let half = n as i64 + 1;
    let side = (2 * half + 1) as usize;
    let idx = |j: i64, jp: i64| ((j + half) as usize) * side + (jp + half) as usize;
    let mut cur = vec![0.0f64; side * side];
    let mut next = vec![0.0f64; side * side];
    cur[idx(0, 0)] = 1.0;
    for step in 0..n {
        next.fill(0.0);
        for j in -(step as i64)..=step as i64 {
            for jp in -(step as i64)..=step as i64 {
                let p = cur[idx(j, jp)];
                if p == 0.0 {
                    continue;
                }
                let moves = match tau(j, jp) {
                    0 => &MOVES_FROM_TAU0,
                    2 => &MOVES_FROM_TAU2,
                    _ => unreachable!("tau = 1 vertices are never populated"),
                };
                for mv in moves {
                    next[idx(j + mv[0], jp + mv[1])] += p / 3.0;
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    HexDirectTable {
        n,
        half,
        values: cur,
    }
}

impl HexDirectTable {
    pub fn get(&self, j: i64, jp: i64) -> f64 {
        if j.abs() > self.half || jp.abs() > self.half {
            return 0.0;
        }
        let side = (2 * self.half + 1) as usize;
        self.values[((j + self.half) as usize) * side + (jp + self.half) as usize]
    }
}

/// The triangular-lattice asymptotic sqrt(3) (2 pi n)^{-1} e^{-n phi}: the
/// general mean-curvature estimate specialized by det B_0 = 1/3 and r = 1.
pub fn triangular_asymptotic(model: &WalkModel, n: usize, j: i64, jp: i64) -> Result<f64> {
    Ok(mean_hessian_estimate(model, n, &[j, jp])?.value)
}
