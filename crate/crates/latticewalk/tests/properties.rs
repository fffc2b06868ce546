//! Property-based invariants over randomly generated walks.
//!
//! Models are built from exact rational masses with the +/- basis steps
//! always present, so every generated spec is irreducible and full
//! dimensional by construction and validation must succeed.

use latticewalk::convex_geometry::Location;
use latticewalk::cumulant::{char_kappa, grad_log_kappa, log_kappa};
use latticewalk::exact_kernel::{convolve_kernel, DEFAULT_MEM_BUDGET_MB};
use latticewalk::models::by_name;
use latticewalk::saddle::{phi, solve_saddle};
use latticewalk::walk_model::{WalkModel, WalkSpec};
use proptest::prelude::*;

/// Renders a spec with the 2d basis steps (given positive masses) plus
/// deduplicated extra steps; weights are mass/total, exactly rational.
fn spec_text(dim: usize, basis_masses: &[u32], extras: &[(Vec<i64>, u32)]) -> String {
    let mut steps: Vec<(Vec<i64>, u32)> = Vec::new();
    for j in 0..dim {
        let mut plus = vec![0i64; dim];
        plus[j] = 1;
        let mut minus = vec![0i64; dim];
        minus[j] = -1;
        steps.push((plus, basis_masses[2 * j]));
        steps.push((minus, basis_masses[2 * j + 1]));
    }
    for (v, mass) in extras {
        if !steps.iter().any(|(seen, _)| seen == v) {
            steps.push((v.clone(), *mass));
        }
    }
    let total: u32 = steps.iter().map(|(_, m)| m).sum();
    let mut text = format!("dim {dim}\n");
    for (v, mass) in steps {
        let coords: Vec<String> = v.iter().map(|c| c.to_string()).collect();
        text.push_str(&format!("step {} {mass}/{total}\n", coords.join(" ")));
    }
    text
}

fn arb_spec(dim: usize) -> impl Strategy<Value = String> {
    let basis = prop::collection::vec(1u32..10, 2 * dim);
    let extras = prop::collection::vec(
        (prop::collection::vec(-2i64..=2, dim), 1u32..10),
        0..3,
    );
    (basis, extras).prop_map(move |(b, e)| spec_text(dim, &b, &e))
}

fn arb_model() -> impl Strategy<Value = String> {
    (1usize..=2).prop_flat_map(arb_spec)
}

fn build(text: &str) -> WalkModel {
    WalkModel::validate(WalkSpec::parse(text).expect("generated spec parses"))
        .expect("generated spec validates")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn walkspec_serialization_round_trips(text in arb_model()) {
        let model = build(&text);
        let reparsed = build(&model.spec().to_walkspec());
        prop_assert_eq!(model.hash(), reparsed.hash(), "hash changed across a round trip");
        prop_assert_eq!(model.steps(), reparsed.steps());
        prop_assert_eq!(model.weights(), reparsed.weights());
    }

    #[test]
    fn hull_contains_every_convex_combination_of_steps(
        text in arb_model(),
        raw in prop::collection::vec(0.01f64..1.0, 12),
    ) {
        let model = build(&text);
        let k = model.steps().len();
        let total: f64 = raw.iter().take(k).sum();
        let mut point = vec![0.0f64; model.dim()];
        for (i, step) in model.steps().iter().enumerate() {
            let lambda = raw[i % raw.len()] / total;
            for (c, &v) in point.iter_mut().zip(step) {
                *c += lambda * v as f64;
            }
        }
        prop_assert_ne!(
            model.hull().contains(&point),
            Location::Outside,
            "convex combination {:?} fell outside the hull",
            point
        );
    }

    #[test]
    fn characteristic_function_never_exceeds_modulus_one(
        (text, theta) in (1usize..=2).prop_flat_map(|d| {
            (arb_spec(d), prop::collection::vec(-10.0f64..10.0, d))
        }),
    ) {
        let model = build(&text);
        let modulus = char_kappa(&model, &theta).norm();
        prop_assert!(
            modulus <= 1.0 + 1e-12,
            "|kappa(i theta)| = {} at theta = {:?}",
            modulus,
            theta
        );
    }

    #[test]
    fn rate_function_is_convex_between_interior_points(
        a in prop::collection::vec(-0.45f64..0.45, 2),
        b in prop::collection::vec(-0.45f64..0.45, 2),
        t in 0.0f64..1.0,
    ) {
        let m = by_name("simple-d2").unwrap();
        let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| t * x + (1.0 - t) * y).collect();
        let lhs = phi(&m, &mid).unwrap();
        let rhs = t * phi(&m, &a).unwrap() + (1.0 - t) * phi(&m, &b).unwrap();
        prop_assert!(
            lhs <= rhs + 1e-9,
            "phi({:?}) = {} exceeds the chord value {}",
            mid,
            lhs,
            rhs
        );
    }

    #[test]
    fn rate_function_dominates_every_fenchel_young_pairing(
        delta in prop::collection::vec(-0.45f64..0.45, 2),
        u in prop::collection::vec(-3.0f64..3.0, 2),
    ) {
        let m = by_name("simple-d2").unwrap();
        let pairing: f64 = u.iter().zip(&delta).map(|(a, b)| a * b).sum();
        let bound = pairing - log_kappa(&m, &u);
        let rate = phi(&m, &delta).unwrap();
        prop_assert!(
            rate >= bound - 1e-9,
            "phi = {} undercuts the tilt bound {} at u = {:?}",
            rate,
            bound,
            u
        );
    }

    #[test]
    fn saddle_solution_reproduces_the_requested_velocity(
        text in arb_model(),
        raw in prop::collection::vec(0.05f64..1.0, 12),
    ) {
        let model = build(&text);
        let k = model.steps().len();
        let total: f64 = raw.iter().take(k).sum();
        let mut delta = vec![0.0f64; model.dim()];
        for (i, step) in model.steps().iter().enumerate().take(k) {
            for (c, &v) in delta.iter_mut().zip(step) {
                *c += raw[i] / total * v as f64;
            }
        }
        prop_assume!(model.hull().distance_to_boundary(&delta) >= 1e-3);
        let sp = solve_saddle(&model, &delta).unwrap();
        let grad = grad_log_kappa(&model, &sp.s);
        for (g, d) in grad.iter().zip(&delta) {
            prop_assert!(
                (g - d).abs() <= 1e-9,
                "gradient {:?} drifted from delta {:?}",
                grad,
                delta
            );
        }
        prop_assert!(sp.phi >= -1e-12, "phi = {} is negative", sp.phi);
    }

    #[test]
    fn convolution_conserves_mass_for_random_walks(
        text in arb_model(),
        n in 1usize..=8,
    ) {
        let model = build(&text);
        let table = convolve_kernel(&model, n, DEFAULT_MEM_BUDGET_MB).unwrap();
        let mass = table.mass();
        prop_assert!(
            (mass - 1.0).abs() <= 1e-12 * n as f64,
            "mass after {} steps is {}",
            n,
            mass
        );
    }
}
