//! Incremental (quickhull-style) convex hulls in 2 to 6 dimensions.
//!
//! Coordinates are normalized per axis to the unit box and deterministically
//! joggled before facet construction. Facet hyperplanes reported to callers
//! are recomputed from the original, unjoggled coordinates. Hulls are
//! affine-invariant, so per-axis normalization does not change which points
//! are extreme.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

use crate::error::{Error, Result};

/// Fixed joggle seed: identical inputs must produce identical hulls.
const JOGGLE_SEED: u64 = 0x6a49_5f70;
/// Affine-rank epsilon on unit-box-normalized coordinates.
pub const RANK_EPS: f64 = 1e-9;
/// Joggle magnitudes tried in order when construction or validation fails.
const JOGGLE_SCALES: [f64; 3] = [1e-9, 3e-8, 1e-6];

/// Combinatorial hull: which input points are extreme and which d-tuples
/// span facets. All indices refer to the caller's point list.
#[derive(Debug, Clone)]
pub struct HullSolution {
    pub vertex_ids: Vec<usize>,
    pub facets: Vec<Vec<usize>>,
    pub dim: usize,
}

#[inline]
fn pt(points: &[f64], d: usize, i: usize) -> &[f64] {
    &points[i * d..(i + 1) * d]
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Determinant of the leading k x k block, destructive, partial pivoting.
fn det_in_place(m: &mut [[f64; 6]; 6], k: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..k {
        let mut piv = col;
        for r in col + 1..k {
            if m[r][col].abs() > m[piv][col].abs() {
                piv = r;
            }
        }
        if m[piv][col].abs() < 1e-300 {
            return 0.0;
        }
        if piv != col {
            m.swap(piv, col);
            det = -det;
        }
        det *= m[col][col];
        for r in col + 1..k {
            let f = m[r][col] / m[col][col];
            for c in col..k {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    det
}

/// Vector orthogonal to the d-1 rows of `edges` (generalized cross product).
/// Returns None if the result is numerically zero.
pub fn null_vector(edges: &[Vec<f64>], d: usize) -> Option<Vec<f64>> {
    debug_assert_eq!(edges.len(), d - 1);
    let mut normal = vec![0.0; d];
    let mut minor = [[0.0f64; 6]; 6];
    for skip in 0..d {
        for (r, e) in edges.iter().enumerate() {
            let mut cc = 0;
            for c in 0..d {
                if c == skip {
                    continue;
                }
                minor[r][cc] = e[c];
                cc += 1;
            }
        }
        let det = det_in_place(&mut minor, d - 1);
        normal[skip] = if skip % 2 == 0 { det } else { -det };
    }
    let norm = dot(&normal, &normal).sqrt();
    if norm < 1e-150 {
        return None;
    }
    for v in &mut normal {
        *v /= norm;
    }
    Some(normal)
}

/// Centroid plus orthonormal basis of the affine span, pivoted Gram-Schmidt.
pub fn affine_basis(points: &[f64], n: usize, d: usize, eps: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut centroid = vec![0.0; d];
    for i in 0..n {
        for k in 0..d {
            centroid[k] += pt(points, d, i)[k];
        }
    }
    for c in &mut centroid {
        *c /= n as f64;
    }
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut residuals: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..d)
                .map(|k| pt(points, d, i)[k] - centroid[k])
                .collect::<Vec<f64>>()
        })
        .collect();
    while basis.len() < d {
        let (best, norm) = residuals
            .iter()
            .enumerate()
            .map(|(i, r)| (i, dot(r, r).sqrt()))
            .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if norm <= eps {
            break;
        }
        let dir: Vec<f64> = residuals[best].iter().map(|v| v / norm).collect();
        for r in residuals.iter_mut() {
            let proj = dot(r, &dir);
            for k in 0..d {
                r[k] -= proj * dir[k];
            }
        }
        basis.push(dir);
    }
    (centroid, basis)
}

/// Normalizes each axis to [0, 1]; constant axes map to 0.
fn normalize_unit_box(points: &[f64], n: usize, d: usize) -> Vec<f64> {
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for i in 0..n {
        for k in 0..d {
            let v = points[i * d + k];
            lo[k] = lo[k].min(v);
            hi[k] = hi[k].max(v);
        }
    }
    let mut out = vec![0.0; n * d];
    for i in 0..n {
        for k in 0..d {
            let span = hi[k] - lo[k];
            out[i * d + k] = if span > 0.0 {
                (points[i * d + k] - lo[k]) / span
            } else {
                0.0
            };
        }
    }
    out
}

struct Facet {
    verts: Vec<u32>,
    normal: Vec<f64>,
    offset: f64,
    /// neighbors[i] lies across the ridge verts \ {verts[i]}.
    neighbors: Vec<u32>,
    outside: Vec<u32>,
    furthest: u32,
    furthest_dist: f64,
    alive: bool,
}

struct Builder<'a> {
    d: usize,
    work: &'a [f64],
    facets: Vec<Facet>,
    interior: Vec<f64>,
    eps: f64,
}

impl<'a> Builder<'a> {
    fn signed_dist(&self, f: usize, p: u32) -> f64 {
        dot(&self.facets[f].normal, pt(self.work, self.d, p as usize)) - self.facets[f].offset
    }

    fn make_facet(&self, verts: Vec<u32>) -> Result<Facet> {
        let d = self.d;
        let v0 = pt(self.work, d, verts[0] as usize);
        let edges: Vec<Vec<f64>> = verts[1..]
            .iter()
            .map(|&v| {
                let vi = pt(self.work, d, v as usize);
                (0..d).map(|k| vi[k] - v0[k]).collect()
            })
            .collect();
        let mut normal = null_vector(&edges, d)
            .ok_or_else(|| Error::Internal("degenerate facet simplex".into()))?;
        let mut offset = dot(&normal, v0);
        let side = dot(&normal, &self.interior) - offset;
        if side.abs() < self.eps * 1e-2 {
            return Err(Error::Internal("interior point on facet plane".into()));
        }
        if side > 0.0 {
            for v in &mut normal {
                *v = -*v;
            }
            offset = -offset;
        }
        Ok(Facet {
            verts,
            normal,
            offset,
            neighbors: vec![u32::MAX; d],
            outside: Vec::new(),
            furthest: u32::MAX,
            furthest_dist: 0.0,
            alive: true,
        })
    }

    fn assign_outside(&mut self, f: usize, candidates: &[u32]) {
        for &q in candidates {
            let dist = self.signed_dist(f, q);
            if dist > self.eps {
                let fac = &mut self.facets[f];
                fac.outside.push(q);
                if dist > fac.furthest_dist {
                    fac.furthest_dist = dist;
                    fac.furthest = q;
                }
            }
        }
    }
}

/// Runs one joggled construction attempt. `work` is normalized + joggled.
fn build(work: &[f64], n: usize, d: usize, eps: f64) -> Result<HullSolution> {
    // Initial simplex: greedy max-residual point selection.
    let mut chosen: Vec<u32> = Vec::with_capacity(d + 1);
    let first = (0..n)
        .min_by(|&a, &b| {
            pt(work, d, a)
                .partial_cmp(pt(work, d, b))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap() as u32;
    chosen.push(first);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let origin: Vec<f64> = pt(work, d, first as usize).to_vec();
    while chosen.len() < d + 1 {
        let mut best = u32::MAX;
        let mut best_norm = 0.0;
        for i in 0..n as u32 {
            if chosen.contains(&i) {
                continue;
            }
            let mut r: Vec<f64> = pt(work, d, i as usize)
                .iter()
                .zip(&origin)
                .map(|(a, b)| a - b)
                .collect();
            for b in &basis {
                let proj = dot(&r, b);
                for k in 0..d {
                    r[k] -= proj * b[k];
                }
            }
            let norm = dot(&r, &r).sqrt();
            if norm > best_norm {
                best_norm = norm;
                best = i;
            }
        }
        if best == u32::MAX || best_norm < 1e-13 {
            return Err(Error::Internal("initial simplex collapsed".into()));
        }
        let mut r: Vec<f64> = pt(work, d, best as usize)
            .iter()
            .zip(&origin)
            .map(|(a, b)| a - b)
            .collect();
        for b in &basis {
            let proj = dot(&r, b);
            for k in 0..d {
                r[k] -= proj * b[k];
            }
        }
        let norm = dot(&r, &r).sqrt();
        basis.push(r.iter().map(|v| v / norm).collect());
        chosen.push(best);
    }

    let mut interior = vec![0.0; d];
    for &c in &chosen {
        for k in 0..d {
            interior[k] += pt(work, d, c as usize)[k];
        }
    }
    for v in &mut interior {
        *v /= (d + 1) as f64;
    }

    let mut builder = Builder {
        d,
        work,
        facets: Vec::new(),
        interior,
        eps,
    };

    // One facet per left-out simplex vertex; neighbor alignment follows
    // from the leave-one-out structure.
    for leave in 0..=d {
        let verts: Vec<u32> = (0..=d).filter(|&i| i != leave).map(|i| chosen[i]).collect();
        let mut f = builder.make_facet(verts)?;
        for (slot, &v) in f.verts.clone().iter().enumerate() {
            let v_pos = chosen.iter().position(|&c| c == v).unwrap();
            f.neighbors[slot] = v_pos as u32;
        }
        builder.facets.push(f);
    }
    let all: Vec<u32> = (0..n as u32).filter(|i| !chosen.contains(i)).collect();
    let mut remaining = all;
    for f in 0..builder.facets.len() {
        builder.assign_outside(f, &remaining);
        let assigned: std::collections::HashSet<u32> =
            builder.facets[f].outside.iter().copied().collect();
        remaining.retain(|q| !assigned.contains(q));
    }

    let mut worklist: Vec<u32> = (0..builder.facets.len() as u32)
        .filter(|&f| !builder.facets[f as usize].outside.is_empty())
        .collect();

    while let Some(fid) = worklist.pop() {
        let f = fid as usize;
        if !builder.facets[f].alive || builder.facets[f].outside.is_empty() {
            continue;
        }
        let apex = builder.facets[f].furthest;

        // Visible region BFS.
        let mut visible = vec![fid];
        let mut seen: std::collections::HashSet<u32> = visible.iter().copied().collect();
        let mut stack = vec![fid];
        // (ridge, hidden facet, slot in hidden facet pointing back)
        let mut horizon: Vec<(Vec<u32>, u32, usize)> = Vec::new();
        while let Some(cur) = stack.pop() {
            let c = cur as usize;
            for slot in 0..d {
                let nb = builder.facets[c].neighbors[slot];
                if nb == u32::MAX {
                    return Err(Error::Internal("missing facet neighbor".into()));
                }
                if seen.contains(&nb) {
                    continue;
                }
                if builder.signed_dist(nb as usize, apex) > eps {
                    seen.insert(nb);
                    visible.push(nb);
                    stack.push(nb);
                } else {
                    let ridge: Vec<u32> = builder.facets[c]
                        .verts
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != slot)
                        .map(|(_, &v)| v)
                        .collect();
                    let back = builder.facets[nb as usize]
                        .neighbors
                        .iter()
                        .position(|&x| x == cur)
                        .ok_or_else(|| Error::Internal("asymmetric adjacency".into()))?;
                    horizon.push((ridge, nb, back));
                }
            }
        }

        // New cone of facets from the horizon to the apex.
        let mut candidates: Vec<u32> = Vec::new();
        for &v in &visible {
            candidates.extend(builder.facets[v as usize].outside.iter().copied());
            builder.facets[v as usize].alive = false;
            builder.facets[v as usize].outside = Vec::new();
        }
        candidates.retain(|&q| q != apex);

        let mut ridge_map: HashMap<Vec<u32>, (u32, usize)> = HashMap::new();
        let mut new_ids: Vec<u32> = Vec::new();
        for (ridge, hidden, back) in horizon {
            let mut verts = ridge.clone();
            verts.push(apex);
            let mut facet = builder.make_facet(verts)?;
            facet.neighbors[d - 1] = hidden;
            let new_id = builder.facets.len() as u32;
            builder.facets[hidden as usize].neighbors[back] = new_id;
            // Sub-ridges containing the apex pair up among new facets.
            for slot in 0..d - 1 {
                let mut key: Vec<u32> = facet
                    .verts
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != slot)
                    .map(|(_, &v)| v)
                    .collect();
                key.sort_unstable();
                match ridge_map.remove(&key) {
                    Some((other, other_slot)) => {
                        facet.neighbors[slot] = other;
                        builder.facets[other as usize].neighbors[other_slot] = new_id;
                    }
                    None => {
                        ridge_map.insert(key, (new_id, slot));
                    }
                }
            }
            builder.facets.push(facet);
            new_ids.push(new_id);
        }
        if !ridge_map.is_empty() {
            return Err(Error::Internal("unmatched hull ridge".into()));
        }
        for &nf in &new_ids {
            builder.assign_outside(nf as usize, &candidates);
            let fac = &builder.facets[nf as usize];
            if !fac.outside.is_empty() {
                worklist.push(nf);
            }
            // A point can sit above several new facets; keep single ownership.
            let taken: std::collections::HashSet<u32> =
                builder.facets[nf as usize].outside.iter().copied().collect();
            candidates.retain(|q| !taken.contains(q));
        }
    }

    let mut vertex_ids: Vec<usize> = builder
        .facets
        .iter()
        .filter(|f| f.alive)
        .flat_map(|f| f.verts.iter().map(|&v| v as usize))
        .collect();
    vertex_ids.sort_unstable();
    vertex_ids.dedup();
    let facets: Vec<Vec<usize>> = builder
        .facets
        .iter()
        .filter(|f| f.alive)
        .map(|f| f.verts.iter().map(|&v| v as usize).collect())
        .collect();
    Ok(HullSolution {
        vertex_ids,
        facets,
        dim: d,
    })
}

/// Full-dimensional convex hull of `n` points in `d` dimensions (3 <= d <= 6;
/// d = 2 also works but callers normally use the monotone chain).
///
/// Errors with `DegenerateInput` when the points do not affinely span R^d.
pub fn quickhull(points: &[f64], n: usize, d: usize) -> Result<HullSolution> {
    if !(2..=6).contains(&d) {
        return Err(Error::InvalidParameter(format!(
            "hull dimension {d} outside 2..=6"
        )));
    }
    if n < d + 1 {
        return Err(Error::DegenerateInput(format!(
            "{n} points cannot span {d} dimensions"
        )));
    }
    let work = normalize_unit_box(points, n, d);
    let (_, basis) = affine_basis(&work, n, d, RANK_EPS);
    if basis.len() < d {
        return Err(Error::DegenerateInput(format!(
            "points span only {} of {} dimensions",
            basis.len(),
            d
        )));
    }

    let mut last_err = None;
    for &scale in &JOGGLE_SCALES {
        let mut rng = ChaCha8Rng::seed_from_u64(JOGGLE_SEED);
        let mut joggled = work.clone();
        for v in &mut joggled {
            *v += rng.gen_range(-scale..=scale);
        }
        let eps = (scale * 1e-2).max(1e-13);
        match build(&joggled, n, d, eps) {
            Ok(sol) => match validate(points, &work, n, d, &sol, scale) {
                Ok(()) => return Ok(sol),
                Err(e) => last_err = Some(e),
            },
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::Internal("hull construction failed".into())))
}

/// Rejects a solution when some input point lies meaningfully outside a
/// facet plane recomputed from unjoggled normalized coordinates.
fn validate(
    _original: &[f64],
    work: &[f64],
    n: usize,
    d: usize,
    sol: &HullSolution,
    joggle: f64,
) -> Result<()> {
    let tol = (20.0 * joggle).max(1e-7);
    let mut interior = vec![0.0; d];
    for &v in &sol.vertex_ids {
        for k in 0..d {
            interior[k] += pt(work, d, v)[k];
        }
    }
    for v in &mut interior {
        *v /= sol.vertex_ids.len() as f64;
    }
    // Bound the validation cost on large instances by checking a prefix of
    // facets against all points; construction invariants cover the rest.
    let max_pairs = 4_000_000usize;
    let facet_limit = (max_pairs / n.max(1)).max(64).min(sol.facets.len());
    for facet in sol.facets.iter().take(facet_limit) {
        let v0 = pt(work, d, facet[0]);
        let edges: Vec<Vec<f64>> = facet[1..]
            .iter()
            .map(|&v| {
                let vi = pt(work, d, v);
                (0..d).map(|k| vi[k] - v0[k]).collect()
            })
            .collect();
        let Some(mut normal) = null_vector(&edges, d) else {
            continue; // joggle-thin facet; plane recovered at polytope assembly
        };
        let mut offset = dot(&normal, v0);
        if dot(&normal, &interior) - offset > 0.0 {
            for x in &mut normal {
                *x = -*x;
            }
            offset = -offset;
        }
        for i in 0..n {
            if dot(&normal, pt(work, d, i)) - offset > tol {
                return Err(Error::Internal(format!(
                    "hull validation: point {i} outside facet by more than {tol:.1e}"
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn flat(points: &[Vec<f64>]) -> Vec<f64> {
        points.iter().flatten().copied().collect()
    }

    #[test]
    fn tetrahedron_hull_is_itself() {
        let pts = vec![
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let sol = quickhull(&flat(&pts), 4, 3).unwrap();
        assert_eq!(sol.vertex_ids, vec![0, 1, 2, 3]);
        assert_eq!(sol.facets.len(), 4);
    }

    #[test]
    fn interior_point_dropped() {
        let pts = vec![
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.25, 0.25, 0.25],
        ];
        let sol = quickhull(&flat(&pts), 5, 3).unwrap();
        assert_eq!(sol.vertex_ids, vec![0, 1, 2, 3]);
    }

    #[test]
    fn coplanar_points_are_degenerate() {
        let pts = vec![
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![1.0, 1.0, 0.0],
        ];
        assert!(matches!(
            quickhull(&flat(&pts), 4, 3),
            Err(Error::DegenerateInput(_))
        ));
    }

    /// O(n^4) brute force: every triple whose plane has all points on one
    /// side is a hull facet; hull vertices are the union.
    fn brute_force_vertices_3d(pts: &[Vec<f64>]) -> Vec<usize> {
        let n = pts.len();
        let mut verts = std::collections::BTreeSet::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let a = nalgebra::Vector3::from_column_slice(&pts[i]);
                    let b = nalgebra::Vector3::from_column_slice(&pts[j]);
                    let c = nalgebra::Vector3::from_column_slice(&pts[k]);
                    let normal = (b - a).cross(&(c - a));
                    if normal.norm() < 1e-12 {
                        continue;
                    }
                    let mut pos = 0usize;
                    let mut neg = 0usize;
                    for (q, p) in pts.iter().enumerate() {
                        if q == i || q == j || q == k {
                            continue;
                        }
                        let s = normal.dot(&(nalgebra::Vector3::from_column_slice(p) - a));
                        if s > 1e-9 {
                            pos += 1;
                        } else if s < -1e-9 {
                            neg += 1;
                        }
                    }
                    if pos == 0 || neg == 0 {
                        verts.insert(i);
                        verts.insert(j);
                        verts.insert(k);
                    }
                }
            }
        }
        verts.into_iter().collect()
    }

    #[test]
    fn random_3d_hull_matches_brute_force_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..8 {
            let pts: Vec<Vec<f64>> = (0..20)
                .map(|_| (0..3).map(|_| rng.gen_range(-10.0..10.0)).collect())
                .collect();
            let sol = quickhull(&flat(&pts), pts.len(), 3).unwrap();
            let oracle = brute_force_vertices_3d(&pts);
            assert_eq!(sol.vertex_ids, oracle, "vertex sets differ from oracle");
        }
    }

    #[test]
    fn six_dimensional_cross_polytope() {
        // +-e_i in R^6: all 12 points extreme, 2^6 facets.
        let mut pts = Vec::new();
        for k in 0..6 {
            for s in [1.0, -1.0] {
                let mut p = vec![0.0; 6];
                p[k] = s;
                pts.push(p);
            }
        }
        let sol = quickhull(&flat(&pts), 12, 6).unwrap();
        assert_eq!(sol.vertex_ids.len(), 12);
        assert_eq!(sol.facets.len(), 64);
    }

    #[test]
    fn duplicate_heavy_cube_corners() {
        let mut pts = Vec::new();
        for x in [0.0, 1.0] {
            for y in [0.0, 1.0] {
                for z in [0.0, 1.0] {
                    pts.push(vec![x, y, z]);
                    pts.push(vec![x, y, z]);
                }
            }
        }
        pts.push(vec![0.5, 0.5, 0.5]);
        let sol = quickhull(&flat(&pts), pts.len(), 3).unwrap();
        // 8 distinct corners; duplicates may alias either copy.
        let mut coords: Vec<[i64; 3]> = sol
            .vertex_ids
            .iter()
            .map(|&i| {
                let p = &pts[i];
                [
                    p[0].round() as i64,
                    p[1].round() as i64,
                    p[2].round() as i64,
                ]
            })
            .collect();
        coords.sort_unstable();
        coords.dedup();
        assert_eq!(coords.len(), 8);
        assert!(!sol
            .vertex_ids
            .iter()
            .any(|&i| (pts[i][0] - 0.5).abs() < 1e-9));
    }
}
