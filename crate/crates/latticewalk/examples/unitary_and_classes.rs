//! Periodicity bookkeeping. A walk with period r cycles through r residue
//! classes; the transition probability vanishes identically off the class
//! of n, and the period is visible in the characteristic function as the
//! number of frequencies with modulus exactly one.
//!
//! Run with `cargo run --example unitary_and_classes`.

use latticewalk::cumulant::{char_kappa, unitary_set};
use latticewalk::exact_kernel::{convolve_kernel, DEFAULT_MEM_BUDGET_MB};
use latticewalk::models::{all_builtins, by_name};

fn main() -> Result<(), latticewalk::Error> {
    println!("{:>12} {:>7} {:>4}", "model", "period", "|U|");
    for (name, m) in all_builtins() {
        let u = unitary_set(&m);
        println!("{name:>12} {:>7} {:>4}", m.period(), u.points.len());
    }

    let m = by_name("simple-d2")?;
    let u = unitary_set(&m);
    println!();
    println!("simple-d2 unitary frequencies and their moduli:");
    for theta in &u.points {
        let z = char_kappa(&m, theta);
        println!("  theta = ({:>7.4}, {:>7.4})  |kappa| = {}", theta[0], theta[1], z.norm());
    }

    let n = 7;
    let table = convolve_kernel(&m, n, DEFAULT_MEM_BUDGET_MB)?;
    println!();
    println!("after n = {n} steps, x + y must be odd; a slice through y = 0:");
    for x0 in -4i64..=4 {
        let p = table.get(&[x0, 0]);
        let class = if m.class_ok(n, &[x0, 0]) { "on " } else { "off" };
        println!("  p({n}; ({x0:>2}, 0)) = {p:<22} class {class}");
    }
    Ok(())
}
