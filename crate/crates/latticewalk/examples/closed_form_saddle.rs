//! The one-dimensional simple walk admits closed forms for everything the
//! saddle solver produces: s(delta) = atanh(delta), kappa(s) = cosh(s) =
//! 1/sqrt(1 - delta^2), and phi(delta) = the binary entropy gap. This
//! example sweeps delta and prints the solver output against those forms.
//!
//! Run with `cargo run --example closed_form_saddle`.

use latticewalk::models::by_name;
use latticewalk::saddle::solve_saddle;

fn main() -> Result<(), latticewalk::Error> {
    let m = by_name("simple-d1")?;
    println!("{:>6} {:>22} {:>22} {:>12} {:>10}", "delta", "s (solver)", "s (closed form)", "phi", "iters");
    for k in 0..=9 {
        let delta = 0.1 * k as f64;
        let sp = solve_saddle(&m, &[delta])?;
        let closed = 0.5 * ((1.0 + delta) / (1.0 - delta)).ln();
        println!(
            "{delta:>6.2} {:>22.16} {closed:>22.16} {:>12.8} {:>10}",
            sp.s[0], sp.phi, sp.iterations
        );
    }
    let sp = solve_saddle(&m, &[0.5])?;
    println!();
    println!("at delta = 1/2:");
    println!("  exp(s)        = {:.16}", sp.s[0].exp());
    println!("  sqrt(3)       = {:.16}  (closed form sqrt((1+d)/(1-d)))", 3f64.sqrt());
    println!("  kappa(s)      = {:.16}", sp.log_kappa_s.exp());
    println!("  2/sqrt(3)     = {:.16}  (closed form 1/sqrt(1-d^2))", 2.0 / 3f64.sqrt());
    Ok(())
}
