//! How fast does the local limit estimate converge? This sweep fixes the
//! velocity delta = x/n and doubles n repeatedly; the relative error of the
//! estimate decays like 1/n, which shows up as a log-log slope near -1.
//!
//! Run with `cargo run --example decay_sweep`.

use latticewalk::asymptotics::{compare, CompareOptions, Formula};
use latticewalk::models::by_name;

fn main() -> Result<(), latticewalk::Error> {
    let m = by_name("simple-d1")?;
    let report = compare(
        &m,
        &[50, 100, 200, 400, 800],
        &[vec![0.2], vec![0.5]],
        Formula::SaddlePoint,
        &CompareOptions::default(),
    )?;
    println!(
        "{:>6} {:>6} {:>8} {:>24} {:>24} {:>12}",
        "n", "x", "delta", "exact", "estimate", "rel err"
    );
    for r in &report.rows {
        println!(
            "{:>6} {:>6} {:>8.4} {:>24.16e} {:>24.16e} {:>12.3e}",
            r.n, r.x[0], r.delta[0], r.exact, r.asym, r.rel_err
        );
    }
    println!();
    for f in &report.fits {
        println!(
            "velocity {:.2}: fitted decay slope of |rel err| vs n = {:.3}",
            f.delta[0], f.slope
        );
    }
    Ok(())
}
