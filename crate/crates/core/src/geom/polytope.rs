//! Convex polytopes with dual vertex/halfspace representations.
//!
//! Polytopes live in an ambient dimension of 2..=6 but may have content of
//! lower affine dimension (a wrench hull from coplanar contacts, a Minkowski
//! sum of segments). Degenerate content is represented exactly with slab
//! halfspace pairs along the orthogonal complement of the affine span.

use crate::error::{Error, Result};
use crate::geom::hull::{affine_basis, null_vector, quickhull, RANK_EPS};
use crate::geom::mnp::distance_to_hull;

/// Default bound on the product of vertex counts in Minkowski enumeration.
pub const DEFAULT_MINKOWSKI_CAP: u64 = 1_000_000;

/// Halfspace `normal . x <= offset` with a unit normal.
#[derive(Debug, Clone)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// Convex polytope in ambient dimension `dim` (2..=6).
#[derive(Debug, Clone)]
pub struct ConvexPolytope {
    dim: usize,
    affine_dim: usize,
    vertices: Vec<Vec<f64>>,
    halfspaces: Vec<Halfspace>,
}

impl ConvexPolytope {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dimension of the affine span of the vertex set.
    pub fn affine_dim(&self) -> usize {
        self.affine_dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn halfspace_count(&self) -> usize {
        self.halfspaces.len()
    }

    pub fn centroid(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        for v in &self.vertices {
            for k in 0..self.dim {
                c[k] += v[k];
            }
        }
        for x in &mut c {
            *x /= self.vertices.len() as f64;
        }
        c
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_dims(points: &[Vec<f64>], d: usize) -> Result<()> {
    for p in points {
        if p.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: p.len(),
            });
        }
    }
    Ok(())
}

fn coordinate_scale(points: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .flat_map(|p| p.iter())
        .fold(0.0f64, |m, &v| m.max(v.abs()))
        .max(1.0)
}

/// Raise each offset so every vertex satisfies its halfspace exactly.
fn bump_offsets(halfspaces: &mut [Halfspace], vertices: &[Vec<f64>]) {
    for hs in halfspaces.iter_mut() {
        let worst = vertices
            .iter()
            .map(|v| dot(&hs.normal, v))
            .fold(f64::NEG_INFINITY, f64::max);
        if worst > hs.offset {
            hs.offset = worst;
        }
    }
}

/// Merge near-coincident halfspaces (triangulated coplanar facets produce
/// many copies of one plane). Bucketed by quantized normal; misses only
/// leave harmless redundant halfspaces.
fn dedup_halfspaces(halfspaces: Vec<Halfspace>, scale: f64) -> Vec<Halfspace> {
    use std::collections::HashMap;
    let quant = 1e6;
    let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    let mut keep: Vec<Option<Halfspace>> = halfspaces.into_iter().map(Some).collect();
    for i in 0..keep.len() {
        let hs = keep[i].as_ref().unwrap();
        let key: Vec<i64> = hs
            .normal
            .iter()
            .map(|v| (v * quant).round() as i64)
            .collect();
        let bucket = buckets.entry(key).or_default();
        let mut merged = false;
        for &j in bucket.iter() {
            let other = keep[j].as_ref().unwrap();
            let cos = dot(&other.normal, hs.normal.as_slice());
            if cos > 1.0 - 1e-10 && (other.offset - hs.offset).abs() <= 1e-7 * scale {
                let off = other.offset.max(hs.offset);
                keep[j].as_mut().unwrap().offset = off;
                merged = true;
                break;
            }
        }
        if merged {
            keep[i] = None;
        } else {
            bucket.push(i);
        }
    }
    let mut out: Vec<Halfspace> = keep.into_iter().flatten().collect();
    // Canonical order for reproducible serialization downstream.
    out.sort_by(|a, b| {
        a.normal
            .partial_cmp(&b.normal)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(
                a.offset
                    .partial_cmp(&b.offset)
                    .unwrap_or(std::cmp::Ordering::Equal),
            )
    });
    out
}

/// Andrew's monotone chain; returns CCW hull vertex indices.
/// Errors when all points are collinear.
pub fn monotone_chain(points: &[Vec<f64>]) -> Result<Vec<usize>> {
    let n = points.len();
    if n < 3 {
        return Err(Error::DegenerateInput(format!(
            "{n} points cannot span 2 dimensions"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        points[a]
            .partial_cmp(&points[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    order.dedup_by(|&mut a, &mut b| {
        (points[a][0] - points[b][0]).abs() < 1e-12 && (points[a][1] - points[b][1]).abs() < 1e-12
    });
    let scale = coordinate_scale(points);
    let eps = 1e-12 * scale * scale;
    let cross = |o: usize, a: usize, b: usize| -> f64 {
        (points[a][0] - points[o][0]) * (points[b][1] - points[o][1])
            - (points[a][1] - points[o][1]) * (points[b][0] - points[o][0])
    };
    let mut lower: Vec<usize> = Vec::new();
    for &p in &order {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= eps {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &p in order.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= eps {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        return Err(Error::DegenerateInput("points are collinear".into()));
    }
    Ok(lower)
}

/// Convex hull of full-dimensional input (errors with `DegenerateInput`
/// when the points span a lower-dimensional subspace).
///
/// Returns both representations; hull vertices are a subset of the input.
pub fn convex_hull(points: &[Vec<f64>], d: usize) -> Result<ConvexPolytope> {
    if !(2..=6).contains(&d) {
        return Err(Error::InvalidParameter(format!(
            "polytope dimension {d} outside 2..=6"
        )));
    }
    check_dims(points, d)?;
    let scale = coordinate_scale(points);

    if d == 2 {
        let ids = monotone_chain(points)?;
        let vertices: Vec<Vec<f64>> = ids.iter().map(|&i| points[i].clone()).collect();
        let m = vertices.len();
        let mut halfspaces = Vec::with_capacity(m);
        for i in 0..m {
            let a = &vertices[i];
            let b = &vertices[(i + 1) % m];
            let e = [b[0] - a[0], b[1] - a[1]];
            let len = (e[0] * e[0] + e[1] * e[1]).sqrt();
            // CCW edge: outward normal is the edge rotated -90 degrees.
            let normal = vec![e[1] / len, -e[0] / len];
            let offset = dot(&normal, a);
            halfspaces.push(Halfspace { normal, offset });
        }
        bump_offsets(&mut halfspaces, &vertices);
        return Ok(ConvexPolytope {
            dim: 2,
            affine_dim: 2,
            vertices,
            halfspaces,
        });
    }

    let flat: Vec<f64> = points.iter().flatten().copied().collect();
    let sol = quickhull(&flat, points.len(), d)?;
    let vertices: Vec<Vec<f64>> = sol.vertex_ids.iter().map(|&i| points[i].clone()).collect();
    let mut interior = vec![0.0; d];
    for v in &vertices {
        for k in 0..d {
            interior[k] += v[k];
        }
    }
    for x in &mut interior {
        *x /= vertices.len() as f64;
    }

    let mut halfspaces: Vec<Halfspace> = Vec::with_capacity(sol.facets.len());
    for facet in &sol.facets {
        let v0 = &points[facet[0]];
        let edges: Vec<Vec<f64>> = facet[1..]
            .iter()
            .map(|&v| (0..d).map(|k| points[v][k] - v0[k]).collect())
            .collect();
        let Some(mut normal) = null_vector(&edges, d) else {
            continue; // duplicate-point facet; plane covered by a sibling
        };
        let mut offset = dot(&normal, v0);
        if dot(&normal, &interior) - offset > 0.0 {
            for x in &mut normal {
                *x = -*x;
            }
            offset = -offset;
        }
        halfspaces.push(Halfspace { normal, offset });
    }
    let mut halfspaces = dedup_halfspaces(halfspaces, scale);
    bump_offsets(&mut halfspaces, &vertices);
    Ok(ConvexPolytope {
        dim: d,
        affine_dim: d,
        vertices,
        halfspaces,
    })
}

/// Convex hull that tolerates affinely-deficient input: the hull is built
/// inside the affine span and represented in the ambient dimension with
/// slab halfspaces along the orthogonal complement.
pub fn convex_hull_embedded(points: &[Vec<f64>], d: usize) -> Result<ConvexPolytope> {
    check_dims(points, d)?;
    if points.is_empty() {
        return Err(Error::DegenerateInput("empty point set".into()));
    }
    let scale = coordinate_scale(points);
    let flat: Vec<f64> = points.iter().flatten().copied().collect();
    let (centroid, basis) = affine_basis(&flat, points.len(), d, RANK_EPS * scale);
    let r = basis.len();
    if r == d {
        return convex_hull(points, d);
    }

    // Complete the basis to an orthonormal frame; the complement directions
    // become zero-width slabs.
    let mut complement: Vec<Vec<f64>> = Vec::new();
    {
        let mut full = basis.clone();
        for axis in 0..d {
            let mut v = vec![0.0; d];
            v[axis] = 1.0;
            for b in &full {
                let proj = dot(&v, b);
                for k in 0..d {
                    v[k] -= proj * b[k];
                }
            }
            let norm = dot(&v, &v).sqrt();
            if norm > 1e-9 {
                let unit: Vec<f64> = v.iter().map(|x| x / norm).collect();
                full.push(unit.clone());
                complement.push(unit);
            }
            if full.len() == d {
                break;
            }
        }
    }

    let (vertices, mut halfspaces) = match r {
        0 => {
            let v = points[0].clone();
            (vec![v], Vec::new())
        }
        1 => {
            let dir = &basis[0];
            let coord =
                |p: &Vec<f64>| -> f64 { (0..d).map(|k| (p[k] - centroid[k]) * dir[k]).sum() };
            let lo = (0..points.len())
                .min_by(|&a, &b| {
                    coord(&points[a])
                        .partial_cmp(&coord(&points[b]))
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap();
            let hi = (0..points.len())
                .max_by(|&a, &b| {
                    coord(&points[a])
                        .partial_cmp(&coord(&points[b]))
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap();
            let hs = vec![
                Halfspace {
                    normal: dir.clone(),
                    offset: dot(dir, &points[hi]),
                },
                Halfspace {
                    normal: dir.iter().map(|v| -v).collect(),
                    offset: -dot(dir, &points[lo]),
                },
            ];
            let verts = if hi == lo {
                vec![points[lo].clone()]
            } else {
                vec![points[lo].clone(), points[hi].clone()]
            };
            (verts, hs)
        }
        _ => {
            let projected: Vec<Vec<f64>> = points
                .iter()
                .map(|p| {
                    basis
                        .iter()
                        .map(|b| (0..d).map(|k| (p[k] - centroid[k]) * b[k]).sum())
                        .collect()
                })
                .collect();
            let sub = convex_hull(&projected, r)?;
            // Recover which input points became vertices by matching
            // projected coordinates.
            let mut verts = Vec::with_capacity(sub.vertex_count());
            for sv in sub.vertices() {
                let idx = projected
                    .iter()
                    .position(|p| {
                        p.iter()
                            .zip(sv)
                            .all(|(a, b)| (a - b).abs() <= 1e-9 * scale.max(1.0))
                    })
                    .expect("projected hull vertex must come from an input point");
                verts.push(points[idx].clone());
            }
            let hs = sub
                .halfspaces()
                .iter()
                .map(|h| {
                    let mut normal = vec![0.0; d];
                    for (coef, b) in h.normal.iter().zip(&basis) {
                        for k in 0..d {
                            normal[k] += coef * b[k];
                        }
                    }
                    let offset = h.offset + dot(&normal, &centroid);
                    Halfspace { normal, offset }
                })
                .collect();
            (verts, hs)
        }
    };

    for w in complement {
        let c = dot(&w, &centroid);
        halfspaces.push(Halfspace {
            normal: w.iter().map(|v| -v).collect(),
            offset: -c,
        });
        halfspaces.push(Halfspace { normal: w, offset: c });
    }
    let mut halfspaces = dedup_halfspaces(halfspaces, scale);
    bump_offsets(&mut halfspaces, &vertices);
    Ok(ConvexPolytope {
        dim: d,
        affine_dim: r,
        vertices,
        halfspaces,
    })
}

/// Closed-set membership: `normal . x <= offset + tol` for every halfspace.
pub fn contains(poly: &ConvexPolytope, x: &[f64], tol: f64) -> Result<bool> {
    if x.len() != poly.dim {
        return Err(Error::DimensionMismatch {
            expected: poly.dim,
            actual: x.len(),
        });
    }
    Ok(poly
        .halfspaces
        .iter()
        .all(|hs| dot(&hs.normal, x) <= hs.offset + tol))
}

/// Signed distance to the polytope boundary: positive inside (minimum
/// halfspace slack), zero on the boundary, negative outside (Euclidean
/// distance to the set, negated).
pub fn boundary_distance(poly: &ConvexPolytope, x: &[f64]) -> Result<f64> {
    if x.len() != poly.dim {
        return Err(Error::DimensionMismatch {
            expected: poly.dim,
            actual: x.len(),
        });
    }
    let min_slack = poly
        .halfspaces
        .iter()
        .map(|hs| hs.offset - dot(&hs.normal, x))
        .fold(f64::INFINITY, f64::min);
    if min_slack >= 0.0 {
        Ok(min_slack)
    } else {
        Ok(-distance_to_hull(&poly.vertices, x, poly.dim))
    }
}

/// Minkowski sum of polytopes sharing one ambient dimension, computed as a
/// left fold with hull pruning after each pairwise sum. Equals the hull of
/// all one-vertex-per-input sums.
pub fn minkowski_sum(polys: &[&ConvexPolytope]) -> Result<ConvexPolytope> {
    minkowski_sum_capped(polys, DEFAULT_MINKOWSKI_CAP)
}

pub fn minkowski_sum_capped(polys: &[&ConvexPolytope], cap: u64) -> Result<ConvexPolytope> {
    if polys.is_empty() {
        return Err(Error::DegenerateInput("empty Minkowski sum".into()));
    }
    let d = polys[0].dim;
    for p in polys {
        if p.dim != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: p.dim,
            });
        }
    }
    let mut product: u128 = 1;
    for p in polys {
        product = product.saturating_mul(p.vertex_count() as u128);
    }
    if product > cap as u128 {
        return Err(Error::CapExceeded {
            required: product,
            cap,
        });
    }
    let vertex_sets: Vec<&[Vec<f64>]> = polys.iter().map(|p| p.vertices()).collect();
    let summed = sum_vertex_sets(&vertex_sets, d, cap)?;
    convex_hull_embedded(&summed, d)
}

/// Fold vertex sets pairwise, pruning to extreme points after each step.
/// Shared by `minkowski_sum` and the wrench-space construction.
pub fn sum_vertex_sets(sets: &[&[Vec<f64>]], d: usize, cap: u64) -> Result<Vec<Vec<f64>>> {
    let mut acc: Vec<Vec<f64>> = sets[0].to_vec();
    for set in &sets[1..] {
        let pairs = acc.len() as u128 * set.len() as u128;
        if pairs > cap as u128 {
            return Err(Error::CapExceeded {
                required: pairs,
                cap,
            });
        }
        let mut sums: Vec<Vec<f64>> = Vec::with_capacity(acc.len() * set.len());
        for a in &acc {
            for b in set.iter() {
                sums.push((0..d).map(|k| a[k] + b[k]).collect());
            }
        }
        acc = extreme_points(&sums, d)?;
    }
    Ok(acc)
}

/// Extreme points of a point set, tolerating affine deficiency.
pub fn extreme_points(points: &[Vec<f64>], d: usize) -> Result<Vec<Vec<f64>>> {
    if points.len() <= d + 1 {
        return Ok(points.to_vec());
    }
    let scale = coordinate_scale(points);
    let flat: Vec<f64> = points.iter().flatten().copied().collect();
    let (centroid, basis) = affine_basis(&flat, points.len(), d, RANK_EPS * scale);
    let r = basis.len();
    match r {
        0 => Ok(vec![points[0].clone()]),
        1 => {
            let dir = &basis[0];
            let coord = |p: &Vec<f64>| -> f64 { dot(p, dir) };
            let lo = points
                .iter()
                .min_by(|a, b| {
                    coord(a)
                        .partial_cmp(&coord(b))
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap();
            let hi = points
                .iter()
                .max_by(|a, b| {
                    coord(a)
                        .partial_cmp(&coord(b))
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap();
            Ok(vec![lo.clone(), hi.clone()])
        }
        _ if r == d => {
            if d == 2 {
                let ids = monotone_chain(points)?;
                Ok(ids.into_iter().map(|i| points[i].clone()).collect())
            } else {
                let sol = quickhull(&flat, points.len(), d)?;
                Ok(sol.vertex_ids.iter().map(|&i| points[i].clone()).collect())
            }
        }
        _ => {
            let projected: Vec<Vec<f64>> = points
                .iter()
                .map(|p| {
                    basis
                        .iter()
                        .map(|b| (0..d).map(|k| (p[k] - centroid[k]) * b[k]).sum())
                        .collect()
                })
                .collect();
            let sub = extreme_points(&projected, r)?;
            let mut out = Vec::with_capacity(sub.len());
            for sv in &sub {
                let idx = projected
                    .iter()
                    .position(|p| {
                        p.iter()
                            .zip(sv)
                            .all(|(a, b)| (a - b).abs() <= 1e-9 * scale.max(1.0))
                    })
                    .expect("projected extreme point must come from an input point");
                out.push(points[idx].clone());
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit_square() -> Vec<Vec<f64>> {
        vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ]
    }

    #[test]
    fn square_hull_keeps_all_corners() {
        let poly = convex_hull(&unit_square(), 2).unwrap();
        assert_eq!(poly.vertex_count(), 4);
        assert_eq!(poly.halfspace_count(), 4);
        assert_eq!(poly.affine_dim(), 2);
    }

    #[test]
    fn centroid_point_is_dropped() {
        let mut pts = unit_square();
        pts.push(vec![0.5, 0.5]);
        let poly = convex_hull(&pts, 2).unwrap();
        assert_eq!(poly.vertex_count(), 4);
    }

    #[test]
    fn contains_is_closed() {
        let poly = convex_hull(&unit_square(), 2).unwrap();
        assert!(contains(&poly, &[0.5, 0.5], 0.0).unwrap());
        assert!(contains(&poly, &[0.0, 0.0], 0.0).unwrap()); // hull vertex
        assert!(contains(&poly, &[1.0, 0.5], 0.0).unwrap()); // edge midpoint
        assert!(!contains(&poly, &[1.1, 0.5], 0.0).unwrap());
    }

    #[test]
    fn contains_rejects_wrong_dimension() {
        let poly = convex_hull(&unit_square(), 2).unwrap();
        assert!(matches!(
            contains(&poly, &[0.5, 0.5, 0.5], 0.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn boundary_distance_cases() {
        let poly = convex_hull(&unit_square(), 2).unwrap();
        assert_abs_diff_eq!(
            boundary_distance(&poly, &[0.5, 0.5]).unwrap(),
            0.5,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            boundary_distance(&poly, &[1.0, 0.5]).unwrap(),
            0.0,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            boundary_distance(&poly, &[2.0, 0.5]).unwrap(),
            -1.0,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            boundary_distance(&poly, &[2.0, 2.0]).unwrap(),
            -std::f64::consts::SQRT_2,
            epsilon = 1e-9
        );
    }

    #[test]
    fn simplex_centroid_inside() {
        let pts = vec![
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let poly = convex_hull(&pts, 3).unwrap();
        assert!(contains(&poly, &[0.25, 0.25, 0.25], 0.0).unwrap());
        for v in poly.vertices() {
            assert!(contains(&poly, v, 1e-7).unwrap());
        }
    }

    #[test]
    fn minkowski_single_polytope_is_identity() {
        let poly = convex_hull(&unit_square(), 2).unwrap();
        let sum = minkowski_sum(&[&poly]).unwrap();
        assert_eq!(sum.vertex_count(), 4);
        for v in sum.vertices() {
            assert!(contains(&poly, v, 1e-9).unwrap());
        }
    }

    #[test]
    fn minkowski_segments_add_like_intervals() {
        // Segments on the x axis embedded in 2-D: [0,1] + [0,2] = [0,3].
        let s1 = convex_hull_embedded(&[vec![0.0, 0.0], vec![1.0, 0.0]], 2).unwrap();
        let s2 = convex_hull_embedded(&[vec![0.0, 0.0], vec![2.0, 0.0]], 2).unwrap();
        let sum = minkowski_sum(&[&s1, &s2]).unwrap();
        let mut xs: Vec<f64> = sum.vertices().iter().map(|v| v[0]).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(sum.vertex_count(), 2);
        assert_abs_diff_eq!(xs[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(xs[1], 3.0, epsilon = 1e-12);
        assert!(contains(&sum, &[1.5, 0.0], 1e-9).unwrap());
        assert!(!contains(&sum, &[1.5, 0.1], 1e-9).unwrap());
    }

    #[test]
    fn minkowski_triangles_match_enumeration_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let tri = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<Vec<f64>> {
                loop {
                    let pts: Vec<Vec<f64>> = (0..3)
                        .map(|_| (0..2).map(|_| rng.gen_range(-5.0..5.0)).collect())
                        .collect();
                    let area = (pts[1][0] - pts[0][0]) * (pts[2][1] - pts[0][1])
                        - (pts[1][1] - pts[0][1]) * (pts[2][0] - pts[0][0]);
                    if area.abs() > 0.5 {
                        return pts;
                    }
                }
            };
            let tris: Vec<Vec<Vec<f64>>> = (0..3).map(|_| tri(&mut rng)).collect();
            let polys: Vec<ConvexPolytope> = tris
                .iter()
                .map(|t| convex_hull(t, 2).unwrap())
                .collect();
            let refs: Vec<&ConvexPolytope> = polys.iter().collect();
            let sum = minkowski_sum(&refs).unwrap();

            // Oracle: hull of all 27 vertex-tuple sums, via monotone chain.
            let mut all = Vec::new();
            for a in &tris[0] {
                for b in &tris[1] {
                    for c in &tris[2] {
                        all.push(vec![a[0] + b[0] + c[0], a[1] + b[1] + c[1]]);
                    }
                }
            }
            let oracle = convex_hull(&all, 2).unwrap();
            assert_eq!(sum.vertex_count(), oracle.vertex_count());
            for v in oracle.vertices() {
                assert!(
                    sum.vertices()
                        .iter()
                        .any(|u| (u[0] - v[0]).abs() < 1e-7 && (u[1] - v[1]).abs() < 1e-7),
                    "oracle vertex missing from incremental sum"
                );
            }
        }
    }

    #[test]
    fn minkowski_cap_is_enforced() {
        let poly = convex_hull(&unit_square(), 2).unwrap();
        let refs = [&poly, &poly, &poly];
        assert!(matches!(
            minkowski_sum_capped(&refs, 10),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn degenerate_input_is_an_error_for_strict_hull() {
        let pts = vec![
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![1.0, 1.0, 0.0],
        ];
        assert!(matches!(
            convex_hull(&pts, 3),
            Err(Error::DegenerateInput(_))
        ));
        // The embedded variant projects instead.
        let poly = convex_hull_embedded(&pts, 3).unwrap();
        assert_eq!(poly.affine_dim(), 2);
        assert_eq!(poly.vertex_count(), 4);
        assert!(contains(&poly, &[0.5, 0.5, 0.0], 1e-9).unwrap());
        assert!(!contains(&poly, &[0.5, 0.5, 0.1], 1e-9).unwrap());
    }
}
