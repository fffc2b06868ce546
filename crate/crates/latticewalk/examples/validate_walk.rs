//! Parse a walk spec from text, validate it, and print the structural
//! summary: period, mean, hull facets, and the unitary frequencies.
//!
//! Run with `cargo run --example validate_walk`.

use latticewalk::cumulant::unitary_set;
use latticewalk::fmt::g17;
use latticewalk::walk_model::{WalkModel, WalkSpec};

fn main() -> Result<(), latticewalk::Error> {
    let text = "dim 2
step  1  0 1/4
step -1  0 1/4
step  0  1 1/4
step  0 -1 1/4
";
    let model = WalkModel::validate(WalkSpec::parse(text)?)?;
    println!("hash     {}", model.hash());
    println!("dim      {}", model.dim());
    println!("steps    {}", model.steps().len());
    println!("period   {}", model.period());
    println!(
        "mean     {}",
        model
            .mean()
            .iter()
            .map(|&c| g17(c))
            .collect::<Vec<_>>()
            .join(" ")
    );
    println!("facets   {}", model.hull().facets.len());
    for f in &model.hull().facets {
        let n: Vec<String> = f.primitive_normal.iter().map(|c| c.to_string()).collect();
        println!("  <({}), delta> <= {}", n.join(", "), f.primitive_offset);
    }
    let u = unitary_set(&model);
    println!("unitary  {} frequencies", u.points.len());
    for theta in &u.points {
        let c: Vec<String> = theta.iter().map(|&v| g17(v)).collect();
        println!("  theta = ({})", c.join(", "));
    }
    Ok(())
}
