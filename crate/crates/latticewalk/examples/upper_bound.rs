//! The rate function gives a bound that holds for every n, not just in the
//! limit: p(n; x) <= exp(-n phi(x/n)). This example sweeps every reachable
//! entry of several walks up to n = 60 and reports how close the bound
//! comes to being attained.
//!
//! Run with `cargo run --example upper_bound`.

use latticewalk::asymptotics::upper_bound_check;
use latticewalk::exact_kernel::DEFAULT_MEM_BUDGET_MB;
use latticewalk::models::by_name;

fn main() -> Result<(), latticewalk::Error> {
    for name in ["simple-d1", "lazy-d1", "simple-d2", "triangular"] {
        let m = by_name(name)?;
        let report = upper_bound_check(&m, 60, 1e-6, DEFAULT_MEM_BUDGET_MB)?;
        let (n, x) = report.worst.clone().expect("entries were checked");
        println!(
            "{name:>10}: {} entries checked, max p(n;x) e^(n phi) = {:.6} at n = {n}, x = {x:?}",
            report.checked, report.max_ratio
        );
    }
    println!();
    println!("a ratio of 1 would mean the bound is tight; it is approached");
    println!("at small n near the mean and decays like n^(-d/2) elsewhere.");
    Ok(())
}
