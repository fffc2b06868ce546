//! Builtin walk models, addressable by name.
//!
//! Every example in the test suite and documentation is available here so
//! that nothing depends on external files: the simple walks in one to
//! three dimensions, a lazy variant, and the two planar lattice walks from
//! [`crate::lattice_adapters`].

use crate::error::{Error, Result};
use crate::lattice_adapters::{hexagonal_q_model, triangular_model};
use crate::walk_model::{WalkModel, WalkSpec};

/// Names accepted by [`by_name`], in documentation order.
pub const BUILTIN_NAMES: [&str; 6] = [
    "simple-d1",
    "simple-d2",
    "simple-d3",
    "lazy-d1",
    "triangular",
    "hex-q",
];

const SIMPLE_D1: &str = "dim 1
step  1 1/2
step -1 1/2
";

const SIMPLE_D2: &str = "dim 2
step  1  0 1/4
step -1  0 1/4
step  0  1 1/4
step  0 -1 1/4
";

const SIMPLE_D3: &str = "dim 3
step  1  0  0 1/6
step -1  0  0 1/6
step  0  1  0 1/6
step  0 -1  0 1/6
step  0  0  1 1/6
step  0  0 -1 1/6
";

const LAZY_D1: &str = "dim 1
step  0 1/2
step  1 1/4
step -1 1/4
";

/// Look up a builtin model. Returns `InvalidArgument` for unknown names.
pub fn by_name(name: &str) -> Result<WalkModel> {
    let text = match name {
        "simple-d1" => SIMPLE_D1,
        "simple-d2" => SIMPLE_D2,
        "simple-d3" => SIMPLE_D3,
        "lazy-d1" => LAZY_D1,
        "triangular" => return Ok(triangular_model()),
        "hex-q" => return Ok(hexagonal_q_model()),
        _ => {
            return Err(Error::InvalidArgument(format!(
                "unknown builtin model '{name}' (expected one of {})",
                BUILTIN_NAMES.join(", ")
            )))
        }
    };
    WalkModel::validate(WalkSpec::parse(text).expect("builtin spec parses"))
}

/// Resolve a `--walk` argument: a builtin name if it matches one, otherwise
/// a path to a WALKSPEC file.
pub fn load_walk(arg: &str) -> Result<WalkModel> {
    if BUILTIN_NAMES.contains(&arg) {
        return by_name(arg);
    }
    let text = std::fs::read_to_string(arg).map_err(|e| {
        Error::InvalidArgument(format!(
            "'{arg}' is neither a builtin model ({}) nor a readable file: {e}",
            BUILTIN_NAMES.join(", ")
        ))
    })?;
    WalkModel::validate(WalkSpec::parse(&text)?)
}

/// All builtin models, paired with their names.
pub fn all_builtins() -> Vec<(&'static str, WalkModel)> {
    BUILTIN_NAMES
        .iter()
        .map(|&name| (name, by_name(name).expect("builtin validates")))
        .collect()
}
