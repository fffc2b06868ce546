//! Exact n-step transition kernels, by two independent routes.
//!
//! Route one is direct convolution: p(n+1;x) = sum_v p(n;x-v) p(v) over a
//! dense array covering the reachable box [-n*range, n*range]^d, with
//! compensated (Neumaier) summation per cell. Probabilities this computes
//! are exact up to f64 rounding; cells off the reachable class are never
//! touched and stay exactly zero.
//!
//! Route two inverts the characteristic function. p(n;x) is the Fourier
//! coefficient
//!
//! ```text
//! p(n;x) = (2 pi)^-d  integral over [-pi, pi)^d of kappa(i theta)^n e^{-i <theta, x>}
//! ```
//!
//! and the integrand is a trigonometric polynomial with per-axis degree at
//! most 2 n range, so the rectangle rule on an odd grid of N = 2 n range + 3
//! points per axis is exact, not approximate. [`fourier_point`] evaluates
//! the sum directly for one x; [`fourier_table`] recovers the whole kernel
//! at once with FFTs along each axis.
//!
//! The two routes share no code and make independent errors; their
//! agreement (absolute 1e-10 in the acceptance suite) validates both.

use crate::error::{Error, Result};
use crate::fmt::g17;
use crate::walk_model::WalkModel;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::io::Write;

/// Default memory budget for kernel tables, in MB.
pub const DEFAULT_MEM_BUDGET_MB: usize = 4096;

/// Dense n-step kernel over the box [-n*range, n*range]^d.
///
/// Storage is row-major over a padded box of half-width `alloc_half`
/// (one step of margin lets the convolution gather without bounds checks);
/// logical accessors clamp to the unpadded box.
#[derive(Debug, Clone)]
pub struct KernelTable {
    pub dim: usize,
    pub n: usize,
    /// Half-width of the logical box: n * range.
    pub half: i64,
    alloc_half: i64,
    values: Vec<f64>,
}

impl KernelTable {
    fn new_zero(dim: usize, n: usize, half: i64, alloc_half: i64) -> Self {
        let side = (2 * alloc_half + 1) as usize;
        KernelTable {
            dim,
            n,
            half,
            alloc_half,
            values: vec![0.0; side.pow(dim as u32)],
        }
    }

    fn linear_index(&self, x: &[i64]) -> usize {
        let side = (2 * self.alloc_half + 1) as usize;
        let mut idx = 0usize;
        for &c in x {
            debug_assert!(c.abs() <= self.alloc_half);
            idx = idx * side + (c + self.alloc_half) as usize;
        }
        idx
    }

    /// p(n;x); zero outside the box.
    pub fn get(&self, x: &[i64]) -> f64 {
        assert_eq!(x.len(), self.dim);
        if x.iter().any(|c| c.abs() > self.half) {
            return 0.0;
        }
        self.values[self.linear_index(x)]
    }

    /// Iterates the support (nonzero entries) in lexicographic order of x.
    pub fn support(&self) -> impl Iterator<Item = (Vec<i64>, f64)> + '_ {
        BoxIter::new(self.dim, self.half).filter_map(move |x| {
            let p = self.values[self.linear_index(&x)];
            (p != 0.0).then_some((x, p))
        })
    }

    /// Visits the support in lexicographic order without allocating: the
    /// callback borrows the coordinates. Stops at the first error.
    pub fn for_each_support(
        &self,
        mut f: impl FnMut(&[i64], f64) -> crate::error::Result<()>,
    ) -> crate::error::Result<()> {
        let d = self.dim;
        let mut x = [0i64; 4];
        x[..d].fill(-self.half);
        let run = (2 * self.half + 1) as usize;
        'outer: loop {
            // The last axis has stride one in the padded layout, so each
            // fixed prefix is a contiguous run of cells.
            let base = self.linear_index(&x[..d]);
            for (i, &p) in self.values[base..base + run].iter().enumerate() {
                if p != 0.0 {
                    x[d - 1] = i as i64 - self.half;
                    f(&x[..d], p)?;
                }
            }
            x[d - 1] = -self.half;
            // Odometer over the leading axes.
            let mut axis = d - 1;
            loop {
                if axis == 0 {
                    break 'outer;
                }
                axis -= 1;
                x[axis] += 1;
                if x[axis] <= self.half {
                    break;
                }
                x[axis] = -self.half;
            }
        }
        Ok(())
    }

    /// Total mass, by compensated summation; equals 1 up to accumulated
    /// rounding of order n * eps.
    pub fn mass(&self) -> f64 {
        let mut sum = Neumaier::default();
        for &v in &self.values {
            sum.add(v);
        }
        sum.value()
    }

    /// Mean of the table, sum_x x p(n;x); equals n * delta0 exactly in
    /// exact arithmetic.
    pub fn mean(&self) -> Vec<f64> {
        let mut acc = vec![Neumaier::default(); self.dim];
        for (x, p) in self.support() {
            for (a, &c) in acc.iter_mut().zip(&x) {
                a.add(p * c as f64);
            }
        }
        acc.into_iter().map(|a| a.value()).collect()
    }

    /// Covariance of the table about its mean; equals n * B_0.
    pub fn covariance(&self) -> Vec<Vec<f64>> {
        let mean = self.mean();
        let mut acc = vec![vec![Neumaier::default(); self.dim]; self.dim];
        for (x, p) in self.support() {
            for i in 0..self.dim {
                let ci = x[i] as f64 - mean[i];
                for j in 0..self.dim {
                    acc[i][j].add(p * ci * (x[j] as f64 - mean[j]));
                }
            }
        }
        acc.into_iter()
            .map(|row| row.into_iter().map(|a| a.value()).collect())
            .collect()
    }

    /// Writes the support as CSV: header x1..xd,p; probabilities in %.17g.
    pub fn write_csv(&self, out: &mut (impl Write + ?Sized)) -> Result<()> {
        let header: Vec<String> = (1..=self.dim).map(|j| format!("x{j}")).collect();
        writeln!(out, "{},p", header.join(","))?;
        for (x, p) in self.support() {
            let coords: Vec<String> = x.iter().map(|c| c.to_string()).collect();
            writeln!(out, "{},{}", coords.join(","), g17(p))?;
        }
        Ok(())
    }
}

/// Compensated (Neumaier) accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Incremental convolution driver: holds two ping-pong buffers sized for
/// the target n and exposes the table after each step.
pub struct KernelDp<'a> {
    model: &'a WalkModel,
    cur: KernelTable,
    next: KernelTable,
    /// Linear offsets of the steps in the padded box, paired with weights.
    step_offsets: Vec<(isize, f64)>,
}

impl<'a> KernelDp<'a> {
    /// Prepares buffers for up to `n_max` steps; checks the memory budget
    /// before allocating.
    pub fn new(model: &'a WalkModel, n_max: usize, mem_budget_mb: usize) -> Result<Self> {
        let dim = model.dim();
        let half = n_max as i64 * model.range();
        let alloc_half = half + model.range();
        let side = (2 * alloc_half + 1) as usize;
        let cells = side.pow(dim as u32);
        let required_mb = 2 * cells * std::mem::size_of::<f64>() / (1 << 20);
        if required_mb > mem_budget_mb {
            return Err(Error::MemoryBudget {
                required_mb,
                budget_mb: mem_budget_mb,
            });
        }
        let mut cur = KernelTable::new_zero(dim, 0, 0, alloc_half);
        let origin = vec![0i64; dim];
        let idx = cur.linear_index(&origin);
        cur.values[idx] = 1.0;
        let next = KernelTable::new_zero(dim, 0, 0, alloc_half);

        // Linear offset of step v: gathering next[x] += cur[x - v] * w reads
        // index(x) - offset(v).
        let mut strides = vec![1isize; dim];
        for j in (0..dim.saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * side as isize;
        }
        let step_offsets = model
            .steps()
            .iter()
            .zip(model.weights())
            .map(|(v, &w)| {
                let off: isize = v.iter().zip(&strides).map(|(&c, &s)| c as isize * s).sum();
                (off, w)
            })
            .collect();

        Ok(KernelDp {
            model,
            cur,
            next,
            step_offsets,
        })
    }

    pub fn table(&self) -> &KernelTable {
        &self.cur
    }

    /// Advances one step: next(x) = sum_v cur(x - v) p(v).
    pub fn step(&mut self) {
        let dim = self.model.dim();
        let new_n = self.cur.n + 1;
        let new_half = new_n as i64 * self.model.range();
        assert!(
            new_half + self.model.range() <= self.cur.alloc_half,
            "stepped past the n_max the buffers were sized for"
        );
        self.next.n = new_n;
        self.next.half = new_half;

        // Walk the target box in row-major order, maintaining the linear
        // index incrementally (odometer).
        let side = (2 * self.cur.alloc_half + 1) as usize;
        let mut x = vec![-new_half; dim];
        let mut idx = self.cur.linear_index(&x);
        let lo_idx = idx;
        let cur = &self.cur.values;
        let next = &mut self.next.values;
        'outer: loop {
            let mut acc = Neumaier::default();
            for &(off, w) in &self.step_offsets {
                let src = (idx as isize - off) as usize;
                acc.add(cur[src] * w);
            }
            next[idx] = acc.value();

            // Odometer increment over the last axis, with carries.
            let mut axis = dim;
            loop {
                if axis == 0 {
                    break 'outer;
                }
                axis -= 1;
                x[axis] += 1;
                if x[axis] <= new_half {
                    break;
                }
                x[axis] = -new_half;
            }
            // Recompute the linear index from the carry structure: cheap
            // enough at d <= 4 to do directly.
            idx = lo_idx;
            let mut mult = 1usize;
            for j in (0..dim).rev() {
                idx += (x[j] + new_half) as usize * mult;
                mult *= side;
            }
        }
        std::mem::swap(&mut self.cur, &mut self.next);
    }
}

/// p(n; .) for all x at once, by repeated convolution.
pub fn convolve_kernel(model: &WalkModel, n: usize, mem_budget_mb: usize) -> Result<KernelTable> {
    let mut dp = KernelDp::new(model, n, mem_budget_mb)?;
    for _ in 0..n {
        dp.step();
    }
    Ok(dp.cur)
}

/// Runs the convolution once, handing each requested time slice to the
/// callback as it is reached; duplicates in `ns` are visited once.
pub fn run_with_snapshots(
    model: &WalkModel,
    ns: &[usize],
    mem_budget_mb: usize,
    mut callback: impl FnMut(&KernelTable) -> Result<()>,
) -> Result<()> {
    let mut want: Vec<usize> = ns.to_vec();
    want.sort_unstable();
    want.dedup();
    let n_max = want.last().copied().unwrap_or(0);
    let mut dp = KernelDp::new(model, n_max, mem_budget_mb)?;
    let mut remaining = want.into_iter().peekable();
    if remaining.peek() == Some(&0) {
        callback(dp.table())?;
        remaining.next();
    }
    for n in 1..=n_max {
        dp.step();
        if remaining.peek() == Some(&n) {
            callback(dp.table())?;
            remaining.next();
        }
    }
    Ok(())
}

/// Odd per-axis grid size making the rectangle rule exact at time n.
pub fn fourier_grid_size(model: &WalkModel, n: usize) -> usize {
    2 * n * model.range() as usize + 3
}

/// p(n;x) by direct evaluation of the inversion sum; O(N^d) per point.
pub fn fourier_point(model: &WalkModel, n: usize, x: &[i64]) -> Result<f64> {
    let dim = model.dim();
    assert_eq!(x.len(), dim);
    let n_grid = fourier_grid_size(model, n);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut k = vec![0usize; dim];
    let two_pi = 2.0 * std::f64::consts::PI;
    loop {
        let theta: Vec<f64> = k
            .iter()
            .map(|&kj| two_pi * kj as f64 / n_grid as f64)
            .collect();
        let kap = crate::cumulant::char_kappa(model, &theta);
        let phase: f64 = theta.iter().zip(x).map(|(t, &c)| t * c as f64).sum();
        sum += kap.powu(n as u32) * Complex64::new(0.0, -phase).exp();

        let mut axis = dim;
        loop {
            if axis == 0 {
                return Ok(sum.re / (n_grid as f64).powi(dim as i32));
            }
            axis -= 1;
            k[axis] += 1;
            if k[axis] < n_grid {
                break;
            }
            k[axis] = 0;
        }
    }
}

/// The whole n-step kernel by FFT inversion of kappa(i theta)^n.
///
/// Evaluates the characteristic function on the exactness grid, raises to
/// the n-th power, and applies a forward DFT along each axis; bin k then
/// holds p(n;x) for the unique box point x = k (mod N).
pub fn fourier_table(model: &WalkModel, n: usize, mem_budget_mb: usize) -> Result<KernelTable> {
    let dim = model.dim();
    let n_grid = fourier_grid_size(model, n);
    let cells = n_grid.pow(dim as u32);
    let required_mb = cells * std::mem::size_of::<Complex64>() / (1 << 20)
        + 2 * cells * std::mem::size_of::<f64>() / (1 << 20);
    if required_mb > mem_budget_mb {
        return Err(Error::MemoryBudget {
            required_mb,
            budget_mb: mem_budget_mb,
        });
    }

    // Per-axis phase tables: phases[j][v][k] = exp(2 pi i k v_j / N).
    let two_pi = 2.0 * std::f64::consts::PI;
    let steps = model.steps();
    let weights = model.weights();
    let phases: Vec<Vec<Vec<Complex64>>> = (0..dim)
        .map(|j| {
            steps
                .iter()
                .map(|v| {
                    (0..n_grid)
                        .map(|k| {
                            Complex64::new(
                                0.0,
                                two_pi * k as f64 * v[j] as f64 / n_grid as f64,
                            )
                            .exp()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let mut grid = vec![Complex64::new(0.0, 0.0); cells];
    let mut k = vec![0usize; dim];
    for cell in grid.iter_mut() {
        let mut kap = Complex64::new(0.0, 0.0);
        for (s, &w) in weights.iter().enumerate() {
            let mut ph = Complex64::new(w, 0.0);
            for (j, &kj) in k.iter().enumerate() {
                ph *= phases[j][s][kj];
            }
            kap += ph;
        }
        *cell = kap.powu(n as u32);

        let mut axis = dim;
        loop {
            if axis == 0 {
                break;
            }
            axis -= 1;
            k[axis] += 1;
            if k[axis] < n_grid {
                break;
            }
            k[axis] = 0;
        }
    }

    // Forward DFT along each axis: sum_k F[k] e^{-2 pi i k j / N}.
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n_grid);
    let mut scratch = vec![Complex64::new(0.0, 0.0); n_grid];
    for axis in (0..dim).rev() {
        // Lines along `axis` have stride prod of sizes after it.
        let stride = n_grid.pow((dim - 1 - axis) as u32);
        let lines = cells / n_grid;
        for line in 0..lines {
            // Decompose line index into (outer, inner) around the axis.
            let inner = line % stride;
            let outer = line / stride;
            let base = outer * stride * n_grid + inner;
            for (i, s) in scratch.iter_mut().enumerate() {
                *s = grid[base + i * stride];
            }
            fft.process(&mut scratch);
            for (i, s) in scratch.iter().enumerate() {
                grid[base + i * stride] = *s;
            }
        }
    }

    let half = n as i64 * model.range();
    let mut table = KernelTable::new_zero(dim, n, half, half);
    let inv_cells = 1.0 / cells as f64;
    for x in BoxIter::new(dim, half) {
        // Frequency x lives in bin x mod N per axis.
        let mut bin = 0usize;
        for &c in &x {
            let kj = c.rem_euclid(n_grid as i64) as usize;
            bin = bin * n_grid + kj;
        }
        let idx = table.linear_index(&x);
        table.values[idx] = grid[bin].re * inv_cells;
    }
    Ok(table)
}

/// Iterator over the integer box [-half, half]^d in lexicographic order.
pub struct BoxIter {
    dim: usize,
    half: i64,
    state: Option<Vec<i64>>,
}

impl BoxIter {
    pub fn new(dim: usize, half: i64) -> Self {
        BoxIter {
            dim,
            half,
            state: Some(vec![-half; dim]),
        }
    }
}

impl Iterator for BoxIter {
    type Item = Vec<i64>;
    fn next(&mut self) -> Option<Vec<i64>> {
        let current = self.state.clone()?;
        let state = self.state.as_mut().unwrap();
        let mut axis = self.dim;
        loop {
            if axis == 0 {
                self.state = None;
                break;
            }
            axis -= 1;
            state[axis] += 1;
            if state[axis] <= self.half {
                break;
            }
            state[axis] = -self.half;
        }
        Some(current)
    }
}

/// Exact binomial oracle for the 1-d simple walk:
/// p(n;x) = C(n, (n+x)/2) / 2^n. The binomial is built in arbitrary
/// precision (each intermediate division is exact), so the result is
/// correct to the last f64 bit up to two final roundings. Test support,
/// shared by several suites as the independent ground truth.
#[cfg(test)]
pub(crate) fn binomial_oracle(n: usize, x: i64) -> f64 {
    use num_bigint::BigUint;
    use num_traits::ToPrimitive;
    if x.unsigned_abs() as usize > n || (n as i64 + x) % 2 != 0 {
        return 0.0;
    }
    let k = ((n as i64 + x) / 2) as usize;
    let mut c = BigUint::from(1u32);
    for i in 0..k {
        c = c * (n - i) / (i + 1);
    }
    c.to_f64().unwrap() * (-(n as f64)).exp2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk_model::WalkSpec;

    fn model(text: &str) -> WalkModel {
        WalkModel::validate(WalkSpec::parse(text).unwrap()).unwrap()
    }

    fn simple1d() -> WalkModel {
        model("dim 1\nstep 1 1/2\nstep -1 1/2\n")
    }

    fn lazy1d() -> WalkModel {
        model("dim 1\nstep 0 1/2\nstep 1 1/4\nstep -1 1/4\n")
    }

    fn simple2d() -> WalkModel {
        model("dim 2\nstep 1 0 1/4\nstep -1 0 1/4\nstep 0 1 1/4\nstep 0 -1 1/4\n")
    }

    #[test]
    fn binomial_oracle_sanity() {
        assert_eq!(binomial_oracle(10, 2), 210.0 / 1024.0);
        assert_eq!(binomial_oracle(10, 3), 0.0);
        assert_eq!(binomial_oracle(1, 1), 0.5);
        assert_eq!(binomial_oracle(0, 0), 1.0);
        let p = binomial_oracle(100, 50);
        assert!(
            (p - 1.9131397064512386e-7).abs() < 1e-20,
            "p(100;50) = {p:e}"
        );
    }

    #[test]
    fn convolution_matches_binomial() {
        let m = simple1d();
        for n in [1usize, 5, 20, 50] {
            let t = convolve_kernel(&m, n, DEFAULT_MEM_BUDGET_MB).unwrap();
            for x in -(n as i64)..=n as i64 {
                let expect = binomial_oracle(n, x);
                let got = t.get(&[x]);
                assert!(
                    (got - expect).abs() < 1e-14,
                    "p({n};{x}) = {got} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn ten_step_point_is_exact_dyadic() {
        let t = convolve_kernel(&simple1d(), 10, DEFAULT_MEM_BUDGET_MB).unwrap();
        assert_eq!(t.get(&[2]), 210.0 / 1024.0);
        assert_eq!(t.get(&[3]), 0.0, "off-class cells stay exactly zero");
        assert_eq!(t.get(&[11]), 0.0, "outside the box");
    }

    #[test]
    fn lazy_two_step_return() {
        let t = convolve_kernel(&lazy1d(), 2, DEFAULT_MEM_BUDGET_MB).unwrap();
        // 1/2*1/2 + 2 * 1/4*1/4 = 0.375
        assert_eq!(t.get(&[0]), 0.375);
        let f = fourier_point(&lazy1d(), 2, &[0]).unwrap();
        assert!((f - 0.375).abs() < 1e-14, "fourier gives {f}");
    }

    #[test]
    fn mass_mean_covariance_track_the_model() {
        let m = model("dim 1\nstep 1 2/3\nstep -1 1/3\n");
        let n = 40;
        let t = convolve_kernel(&m, n, DEFAULT_MEM_BUDGET_MB).unwrap();
        assert!((t.mass() - 1.0).abs() < 1e-12 * n as f64);
        let mean = t.mean();
        assert!(
            (mean[0] - n as f64 / 3.0).abs() < 1e-10 * n as f64,
            "mean {mean:?}"
        );
        let cov = t.covariance();
        // B_0 = E v^2 - (E v)^2 = 1 - 1/9 = 8/9.
        assert!(
            (cov[0][0] - n as f64 * 8.0 / 9.0).abs() < 1e-8 * n as f64,
            "cov {cov:?}"
        );
    }

    #[test]
    fn fourier_point_matches_convolution_1d() {
        let m = simple1d();
        let t = convolve_kernel(&m, 20, DEFAULT_MEM_BUDGET_MB).unwrap();
        for x in [-20i64, -7, 0, 4, 13, 20] {
            let f = fourier_point(&m, 20, &[x]).unwrap();
            assert!(
                (f - t.get(&[x])).abs() < 1e-12,
                "x = {x}: fourier {f} vs dp {}",
                t.get(&[x])
            );
        }
    }

    #[test]
    fn fourier_table_matches_convolution_2d() {
        let m = simple2d();
        for n in [1usize, 5, 12] {
            let dp = convolve_kernel(&m, n, DEFAULT_MEM_BUDGET_MB).unwrap();
            let ft = fourier_table(&m, n, DEFAULT_MEM_BUDGET_MB).unwrap();
            let mut max_diff: f64 = 0.0;
            for x in BoxIter::new(2, n as i64) {
                max_diff = max_diff.max((dp.get(&x) - ft.get(&x)).abs());
            }
            assert!(max_diff < 1e-12, "n = {n}: max diff {max_diff:e}");
        }
    }

    #[test]
    fn support_is_class_restricted() {
        let m = simple2d();
        let t = convolve_kernel(&m, 9, DEFAULT_MEM_BUDGET_MB).unwrap();
        for (x, p) in t.support() {
            assert!(p > 0.0);
            assert!(
                m.class_ok(9, &x),
                "support point {x:?} violates the class structure"
            );
        }
        let total: f64 = t.support().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-13);
    }

    #[test]
    fn memory_budget_is_enforced() {
        let m = simple2d();
        let err = convolve_kernel(&m, 4000, 1).unwrap_err();
        assert!(matches!(err, Error::MemoryBudget { .. }));
    }

    #[test]
    fn csv_export_is_deterministic_and_sorted() {
        let t = convolve_kernel(&simple1d(), 2, DEFAULT_MEM_BUDGET_MB).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "x1,p\n-2,0.25\n0,0.5\n2,0.25\n");
    }
}
