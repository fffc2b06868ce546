//! Convex hull of the step set and distance queries against it.
//!
//! The hull M of the steps is the closure of the set of velocities x/n the
//! walk can sustain; every asymptotic formula is parametrized by a velocity
//! strictly inside M, and the error terms blow up with a power of the inverse
//! distance to the boundary. This module computes M once per model and
//! answers `contains` / `distance_to_boundary` queries.
//!
//! Step sets are tiny (a handful of integer points, dimension at most four),
//! so facets are enumerated by brute force over d-subsets. Facet normals are
//! computed in exact integer arithmetic (generalized cross products), which
//! makes incidence and deduplication exact; unit normals are derived from the
//! primitive integer covectors only at the very end.

use crate::error::{Error, Result};
use crate::integer_lattice::integer_rank;
use num_integer::Integer;
use std::collections::BTreeSet;

/// Classification of a point against the hull, with tolerance
/// [`CONTAINS_TOL`] on facet incidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Inside,
    Boundary,
    Outside,
}

/// Absolute tolerance on <lambda, x> - c deciding boundary incidence.
pub const CONTAINS_TOL: f64 = 1e-12;

/// One facet of the hull: outward unit normal, offset, and the vertices
/// lying on it. `<normal, x> <= offset` for every hull point, with equality
/// exactly on the facet.
#[derive(Debug, Clone)]
pub struct Facet {
    /// Outward unit normal.
    pub normal: Vec<f64>,
    /// Offset of the supporting hyperplane under the unit normal.
    pub offset: f64,
    /// Primitive integer covector defining the same hyperplane exactly.
    pub primitive_normal: Vec<i64>,
    pub primitive_offset: i64,
    /// Indices into [`Polytope::points`] of the points on this facet.
    pub incident: Vec<usize>,
}

/// Full-dimensional convex polytope in R^d, d <= 4.
#[derive(Debug, Clone)]
pub struct Polytope {
    pub dim: usize,
    /// The generating integer points, as given.
    pub points: Vec<Vec<i64>>,
    pub facets: Vec<Facet>,
    /// Indices of the points that are vertices of the hull.
    pub vertices: Vec<usize>,
}

impl Polytope {
    /// Convex hull of a full-dimensional set of integer points.
    ///
    /// Errors with [`Error::DegenerateSupport`] when the points lie in an
    /// affine hyperplane.
    pub fn hull(dim: usize, points: &[Vec<i64>]) -> Result<Self> {
        assert!((1..=4).contains(&dim), "hull supports dimensions 1..=4");
        assert!(points.iter().all(|p| p.len() == dim));
        let diffs: Vec<Vec<i64>> = points
            .iter()
            .skip(1)
            .map(|p| sub(p, &points[0]))
            .collect();
        if integer_rank(dim, &diffs) < dim {
            return Err(Error::DegenerateSupport);
        }

        // Each facet is spanned by d affinely independent points; enumerate
        // d-subsets, keep one-sided hyperplanes, dedup by primitive covector.
        let mut seen = BTreeSet::new();
        let mut facets = Vec::new();
        let mut subset = vec![0usize; dim];
        enumerate_subsets(points.len(), dim, &mut subset, 0, 0, &mut |idx| {
            let base = &points[idx[0]];
            let spanning: Vec<Vec<i64>> =
                idx[1..].iter().map(|&i| sub(&points[i], base)).collect();
            let normal = cross_normal(dim, &spanning);
            if normal.iter().all(|&c| c == 0) {
                return; // affinely dependent subset
            }
            let offset: i128 = dot128(&normal, base);
            let mut above = false;
            let mut below = false;
            for p in points {
                let side = dot128(&normal, p) - offset;
                above |= side > 0;
                below |= side < 0;
            }
            if above && below {
                return; // not a supporting hyperplane
            }
            let (normal, offset) = if above {
                (normal.iter().map(|&c| -c).collect::<Vec<_>>(), -offset)
            } else {
                (normal, offset)
            };
            let g = normal
                .iter()
                .fold(offset.unsigned_abs(), |g, &c| g.gcd(&c.unsigned_abs()));
            let g = g.max(1) as i128;
            let prim: Vec<i64> = normal.iter().map(|&c| (c / g) as i64).collect();
            let prim_off = (offset / g) as i64;
            if seen.insert((prim.clone(), prim_off)) {
                let incident: Vec<usize> = points
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| dot128_i64(&prim, p) == prim_off as i128)
                    .map(|(i, _)| i)
                    .collect();
                let norm = prim.iter().map(|&c| (c as f64).powi(2)).sum::<f64>().sqrt();
                facets.push(Facet {
                    normal: prim.iter().map(|&c| c as f64 / norm).collect(),
                    offset: prim_off as f64 / norm,
                    primitive_normal: prim,
                    primitive_offset: prim_off,
                    incident,
                });
            }
        });

        // A point is a vertex iff its incident facet normals span R^d.
        let vertices: Vec<usize> = (0..points.len())
            .filter(|&i| {
                let normals: Vec<Vec<i64>> = facets
                    .iter()
                    .filter(|f| f.incident.contains(&i))
                    .map(|f| f.primitive_normal.clone())
                    .collect();
                normals.len() >= dim && integer_rank(dim, &normals) == dim
            })
            .collect();

        facets.sort_by(|a, b| {
            (&a.primitive_normal, a.primitive_offset)
                .cmp(&(&b.primitive_normal, b.primitive_offset))
        });
        Ok(Polytope {
            dim,
            points: points.to_vec(),
            facets,
            vertices,
        })
    }

    /// Signed distance to the boundary: positive inside, zero on the
    /// boundary, negative (penetration depth) outside. For interior points
    /// this is the exact Euclidean distance to the nearest facet plane.
    pub fn distance_to_boundary(&self, x: &[f64]) -> f64 {
        self.facets
            .iter()
            .map(|f| f.offset - dot_f64(&f.normal, x))
            .fold(f64::INFINITY, f64::min)
    }

    /// Locates `x` relative to the hull with tolerance [`CONTAINS_TOL`].
    pub fn contains(&self, x: &[f64]) -> Location {
        let d = self.distance_to_boundary(x);
        if d > CONTAINS_TOL {
            Location::Inside
        } else if d < -CONTAINS_TOL {
            Location::Outside
        } else {
            Location::Boundary
        }
    }

    /// Vertex coordinates as floats (convenience for ray constructions).
    pub fn vertex_coords(&self) -> Vec<Vec<f64>> {
        self.vertices
            .iter()
            .map(|&i| self.points[i].iter().map(|&c| c as f64).collect())
            .collect()
    }
}

fn sub(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn dot128(a: &[i128], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(&x, &y)| x * y as i128).sum()
}

fn dot128_i64(a: &[i64], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(&x, &y)| x as i128 * y as i128).sum()
}

fn dot_f64(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Generalized cross product: the vector orthogonal to the d-1 rows, with
/// components given by signed (d-1)x(d-1) minors. For d = 1 there are no
/// rows and the answer is the unit scalar.
fn cross_normal(dim: usize, rows: &[Vec<i64>]) -> Vec<i128> {
    debug_assert_eq!(rows.len(), dim - 1);
    (0..dim)
        .map(|skip| {
            let minor: Vec<Vec<i128>> = rows
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|&(j, _)| j != skip)
                        .map(|(_, &v)| v as i128)
                        .collect()
                })
                .collect();
            let sign = if skip % 2 == 0 { 1 } else { -1 };
            sign * det_small(&minor)
        })
        .collect()
}

/// Determinant of an n x n matrix, n <= 3, by cofactor expansion.
fn det_small(m: &[Vec<i128>]) -> i128 {
    match m.len() {
        0 => 1,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        3 => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
        n => panic!("determinant of size {n} not needed for d <= 4"),
    }
}

/// Visits every k-subset of {0..n} in lexicographic order.
fn enumerate_subsets(
    n: usize,
    k: usize,
    subset: &mut Vec<usize>,
    depth: usize,
    start: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    if depth == k {
        visit(subset);
        return;
    }
    for i in start..n {
        subset[depth] = i;
        enumerate_subsets(n, k, subset, depth + 1, i + 1, visit);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(list: &[&[i64]]) -> Vec<Vec<i64>> {
        list.iter().map(|p| p.to_vec()).collect()
    }

    #[test]
    fn interval_hull_in_one_dimension() {
        let p = Polytope::hull(1, &pts(&[&[1], &[-1]])).unwrap();
        assert_eq!(p.facets.len(), 2);
        assert_eq!(p.vertices.len(), 2);
        assert!((p.distance_to_boundary(&[0.0]) - 1.0).abs() < 1e-15);
        assert!((p.distance_to_boundary(&[0.99]) - 0.01).abs() < 1e-15);
        assert_eq!(p.contains(&[0.5]), Location::Inside);
        assert_eq!(p.contains(&[1.0]), Location::Boundary);
        assert_eq!(p.contains(&[1.5]), Location::Outside);
    }

    #[test]
    fn cross_polytope_in_two_dimensions() {
        // Steps of the simple walk on Z^2: the hull is |x1| + |x2| <= 1.
        let p = Polytope::hull(2, &pts(&[&[1, 0], &[-1, 0], &[0, 1], &[0, -1]])).unwrap();
        assert_eq!(p.facets.len(), 4);
        assert_eq!(p.vertices.len(), 4);
        let d0 = p.distance_to_boundary(&[0.0, 0.0]);
        assert!(
            (d0 - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15,
            "distance from the center must be 1/sqrt(2), got {d0}"
        );
        for f in &p.facets {
            assert_eq!(f.incident.len(), 2, "each edge holds two step points");
            assert_eq!(f.primitive_offset, 1);
        }
    }

    #[test]
    fn hexagon_from_six_steps() {
        let p = Polytope::hull(
            2,
            &pts(&[&[1, 0], &[-1, 0], &[0, 1], &[0, -1], &[1, -1], &[-1, 1]]),
        )
        .unwrap();
        assert_eq!(p.facets.len(), 6, "hexagonal hull has six edges");
        assert_eq!(p.vertices.len(), 6);
        // Distance from the center to an axis-aligned edge is 1; to the
        // diagonal edge x1+x2 = 1 it is 1/sqrt(2).
        let d0 = p.distance_to_boundary(&[0.0, 0.0]);
        assert!((d0 - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn interior_point_of_octahedron() {
        let p = Polytope::hull(
            3,
            &pts(&[
                &[1, 0, 0],
                &[-1, 0, 0],
                &[0, 1, 0],
                &[0, -1, 0],
                &[0, 0, 1],
                &[0, 0, -1],
            ]),
        )
        .unwrap();
        assert_eq!(p.facets.len(), 8);
        assert_eq!(p.vertices.len(), 6);
        let d = p.distance_to_boundary(&[0.0, 0.0, 0.0]);
        assert!((d - 1.0 / 3.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn interior_points_of_bigger_hull_are_not_vertices() {
        // The point (0,0) lies inside; (1,1) sits on two facets of the square.
        let p = Polytope::hull(2, &pts(&[&[1, 1], &[1, -1], &[-1, 1], &[-1, -1], &[0, 0]]))
            .unwrap();
        assert_eq!(p.facets.len(), 4);
        assert_eq!(p.vertices, vec![0, 1, 2, 3]);
    }

    #[test]
    fn degenerate_support_is_rejected() {
        let err = Polytope::hull(2, &pts(&[&[1, 0], &[-1, 0]])).unwrap_err();
        assert!(matches!(err, Error::DegenerateSupport));
    }

    #[test]
    fn lazy_walk_hull_keeps_unit_interval() {
        let p = Polytope::hull(1, &pts(&[&[0], &[1], &[-1]])).unwrap();
        assert_eq!(p.facets.len(), 2);
        assert_eq!(p.vertices, vec![1, 2]);
    }
}
