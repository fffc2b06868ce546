//! Two independent exact routes to the n-step distribution: repeated
//! convolution and inversion of the characteristic function on a grid fine
//! enough to make the inversion exact. The example runs both on the lazy
//! walk and prints the largest entrywise gap, which is pure rounding.
//!
//! Run with `cargo run --example exact_oracles`.

use latticewalk::exact_kernel::{convolve_kernel, fourier_table, DEFAULT_MEM_BUDGET_MB};
use latticewalk::fmt::g17;
use latticewalk::models::by_name;

fn main() -> Result<(), latticewalk::Error> {
    let m = by_name("lazy-d1")?;
    for n in [1usize, 5, 20, 50] {
        let conv = convolve_kernel(&m, n, DEFAULT_MEM_BUDGET_MB)?;
        let dft = fourier_table(&m, n, DEFAULT_MEM_BUDGET_MB)?;
        let mut worst = 0.0f64;
        conv.for_each_support(|x, p| {
            worst = worst.max((p - dft.get(x)).abs());
            Ok(())
        })?;
        println!(
            "n = {n:>3}: mass = {}, max |convolution - inversion| = {:.3e}",
            g17(conv.mass()),
            worst
        );
    }
    let n = 10;
    let table = convolve_kernel(&m, n, DEFAULT_MEM_BUDGET_MB)?;
    println!();
    println!("exact distribution after {n} lazy steps (nonzero entries):");
    table.for_each_support(|x, p| {
        println!("  p({n}; {:>3}) = {}", x[0], g17(p));
        Ok(())
    })?;
    Ok(())
}
