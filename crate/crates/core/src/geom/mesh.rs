use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::pose::Pose;

/// Minimum triangle area accepted at construction, mm^2.
pub const MIN_TRIANGLE_AREA: f64 = 1e-12;

/// Indexed triangle mesh, vertices in mm.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TriMesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[u32; 3]>,
}

impl TriMesh {
    /// Validates indices and triangle areas.
    pub fn new(vertices: Vec<[f64; 3]>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        let mesh = TriMesh {
            vertices,
            triangles,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len() as u32;
        for (i, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                if v >= n {
                    return Err(Error::InvalidMesh(format!(
                        "triangle {i} references vertex {v} out of {n}"
                    )));
                }
            }
            let area = self.triangle_area(i);
            if area < MIN_TRIANGLE_AREA {
                return Err(Error::InvalidMesh(format!(
                    "triangle {i} has area {area:.3e} mm^2, below {MIN_TRIANGLE_AREA:.0e}"
                )));
            }
        }
        Ok(())
    }

    pub fn vertex(&self, i: u32) -> Vector3<f64> {
        Vector3::from_column_slice(&self.vertices[i as usize])
    }

    pub fn triangle_points(&self, i: usize) -> [Vector3<f64>; 3] {
        let t = self.triangles[i];
        [self.vertex(t[0]), self.vertex(t[1]), self.vertex(t[2])]
    }

    pub fn triangle_area(&self, i: usize) -> f64 {
        let [a, b, c] = self.triangle_points(i);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    /// Outward unit normal assuming consistent CCW winding.
    pub fn triangle_normal(&self, i: usize) -> Vector3<f64> {
        let [a, b, c] = self.triangle_points(i);
        (b - a).cross(&(c - a)).normalize()
    }

    /// Signed volume via the divergence theorem; positive for outward CCW winding.
    pub fn signed_volume(&self) -> f64 {
        let mut v = 0.0;
        for i in 0..self.triangles.len() {
            let [a, b, c] = self.triangle_points(i);
            v += a.dot(&b.cross(&c)) / 6.0;
        }
        v
    }

    /// Volume centroid for a closed mesh; falls back to the area-weighted
    /// surface centroid when the enclosed volume is negligible.
    pub fn centroid(&self) -> Vector3<f64> {
        let vol = self.signed_volume();
        if vol.abs() > 1e-6 {
            let mut c = Vector3::zeros();
            for i in 0..self.triangles.len() {
                let [a, b, c3] = self.triangle_points(i);
                let v6 = a.dot(&b.cross(&c3));
                c += (a + b + c3) * (v6 / 24.0);
            }
            c / vol
        } else {
            let mut c = Vector3::zeros();
            let mut area = 0.0;
            for i in 0..self.triangles.len() {
                let [a, b, c3] = self.triangle_points(i);
                let w = self.triangle_area(i);
                c += (a + b + c3) / 3.0 * w;
                area += w;
            }
            c / area.max(1e-30)
        }
    }

    /// Radius of the vertex-enclosing sphere centered at the centroid.
    /// Used as the default moment scale.
    pub fn bounding_sphere_radius(&self) -> f64 {
        let c = self.centroid();
        self.vertices
            .iter()
            .map(|v| (Vector3::from_column_slice(v) - c).norm())
            .fold(0.0, f64::max)
    }

    pub fn aabb(&self) -> ([f64; 3], [f64; 3]) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for v in &self.vertices {
            for k in 0..3 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }

    pub fn transformed(&self, pose: &Pose) -> TriMesh {
        TriMesh {
            vertices: self
                .vertices
                .iter()
                .map(|v| {
                    let p = pose.apply_point(&Vector3::from_column_slice(v));
                    [p.x, p.y, p.z]
                })
                .collect(),
            triangles: self.triangles.clone(),
        }
    }

    /// Unique undirected edges as (min, max) vertex index pairs.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut edges: Vec<(u32, u32)> = self
            .triangles
            .iter()
            .flat_map(|t| {
                [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])]
                    .into_iter()
                    .map(|(a, b)| (a.min(b), a.max(b)))
            })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    /// True when every undirected edge is shared by exactly two triangles
    /// with opposite orientation.
    pub fn is_watertight(&self) -> bool {
        use std::collections::HashMap;
        let mut directed: HashMap<(u32, u32), i32> = HashMap::new();
        for t in &self.triangles {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                *directed.entry((a.min(b), a.max(b))).or_insert(0) += if a < b { 1 } else { -1 };
            }
        }
        let mut counts: HashMap<(u32, u32), u32> = HashMap::new();
        for t in &self.triangles {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        counts.values().all(|&c| c == 2) && directed.values().all(|&s| s == 0)
    }

    /// Flips winding globally if the signed volume is negative, so that
    /// triangle normals point outward. No-op for open meshes.
    pub fn oriented_outward(mut self) -> TriMesh {
        if self.signed_volume() < 0.0 {
            for t in &mut self.triangles {
                t.swap(1, 2);
            }
        }
        self
    }
}

/// Axis-aligned box mesh centered at `center` with full extents `size`.
pub fn box_mesh(center: Vector3<f64>, size: Vector3<f64>) -> TriMesh {
    let h = size / 2.0;
    let corner = |sx: f64, sy: f64, sz: f64| {
        [
            center.x + sx * h.x,
            center.y + sy * h.y,
            center.z + sz * h.z,
        ]
    };
    let vertices = vec![
        corner(-1.0, -1.0, -1.0),
        corner(1.0, -1.0, -1.0),
        corner(1.0, 1.0, -1.0),
        corner(-1.0, 1.0, -1.0),
        corner(-1.0, -1.0, 1.0),
        corner(1.0, -1.0, 1.0),
        corner(1.0, 1.0, 1.0),
        corner(-1.0, 1.0, 1.0),
    ];
    let triangles = vec![
        [0, 2, 1],
        [0, 3, 2], // bottom (z-)
        [4, 5, 6],
        [4, 6, 7], // top (z+)
        [0, 1, 5],
        [0, 5, 4], // y-
        [2, 3, 7],
        [2, 7, 6], // y+
        [1, 2, 6],
        [1, 6, 5], // x+
        [3, 0, 4],
        [3, 4, 7], // x-
    ];
    TriMesh {
        vertices,
        triangles,
    }
}

/// Closed prism with a regular `sides`-gon cross-section of radius `radius`,
/// axis along z, spanning `[-length/2, length/2]`, centered at `center`.
pub fn cylinder_mesh(center: Vector3<f64>, radius: f64, length: f64, sides: usize) -> TriMesh {
    assert!(sides >= 3);
    let h = length / 2.0;
    let mut vertices = Vec::with_capacity(2 * sides + 2);
    for ring in [-h, h] {
        for i in 0..sides {
            let a = 2.0 * std::f64::consts::PI * i as f64 / sides as f64;
            vertices.push([
                center.x + radius * a.cos(),
                center.y + radius * a.sin(),
                center.z + ring,
            ]);
        }
    }
    let bottom_center = vertices.len() as u32;
    vertices.push([center.x, center.y, center.z - h]);
    let top_center = vertices.len() as u32;
    vertices.push([center.x, center.y, center.z + h]);

    let mut triangles = Vec::new();
    let s = sides as u32;
    for i in 0..s {
        let j = (i + 1) % s;
        // side quad
        triangles.push([i, j, s + j]);
        triangles.push([i, s + j, s + i]);
        // caps
        triangles.push([bottom_center, j, i]);
        triangles.push([top_center, s + i, s + j]);
    }
    TriMesh {
        vertices,
        triangles,
    }
}

/// Sphere mesh from `subdivisions` rounds of octahedron subdivision.
pub fn sphere_mesh(center: Vector3<f64>, radius: f64, subdivisions: usize) -> TriMesh {
    let mut vertices: Vec<Vector3<f64>> = vec![
        Vector3::new(1.0, 0.0, 0.0),
        Vector3::new(-1.0, 0.0, 0.0),
        Vector3::new(0.0, 1.0, 0.0),
        Vector3::new(0.0, -1.0, 0.0),
        Vector3::new(0.0, 0.0, 1.0),
        Vector3::new(0.0, 0.0, -1.0),
    ];
    let mut triangles: Vec<[u32; 3]> = vec![
        [0, 2, 4],
        [2, 1, 4],
        [1, 3, 4],
        [3, 0, 4],
        [2, 0, 5],
        [1, 2, 5],
        [3, 1, 5],
        [0, 3, 5],
    ];
    for _ in 0..subdivisions {
        let mut midpoints = std::collections::HashMap::new();
        let mut next = Vec::new();
        for t in &triangles {
            let mut mids = [0u32; 3];
            for (k, (a, b)) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])]
                .into_iter()
                .enumerate()
            {
                let key = (a.min(b), a.max(b));
                mids[k] = *midpoints.entry(key).or_insert_with(|| {
                    let m = (vertices[a as usize] + vertices[b as usize]).normalize();
                    vertices.push(m);
                    (vertices.len() - 1) as u32
                });
            }
            next.push([t[0], mids[0], mids[2]]);
            next.push([t[1], mids[1], mids[0]]);
            next.push([t[2], mids[2], mids[1]]);
            next.push([mids[0], mids[1], mids[2]]);
        }
        triangles = next;
    }
    TriMesh {
        vertices: vertices
            .iter()
            .map(|v| {
                let p = center + v * radius;
                [p.x, p.y, p.z]
            })
            .collect(),
        triangles,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rejects_out_of_range_index() {
        let r = TriMesh::new(vec![[0.0; 3], [1.0, 0.0, 0.0]], vec![[0, 1, 2]]);
        assert!(matches!(r, Err(Error::InvalidMesh(_))));
    }

    #[test]
    fn rejects_zero_area_triangle() {
        let r = TriMesh::new(
            vec![[0.0; 3], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]],
            vec![[0, 1, 2]],
        );
        assert!(matches!(r, Err(Error::InvalidMesh(_))));
    }

    #[test]
    fn box_mass_properties() {
        let m = box_mesh(Vector3::new(1.0, 2.0, 3.0), Vector3::new(4.0, 6.0, 2.0));
        assert_abs_diff_eq!(m.signed_volume(), 48.0, epsilon = 1e-9);
        let c = m.centroid();
        assert_abs_diff_eq!(c.x, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(c.y, 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(c.z, 3.0, epsilon = 1e-9);
        assert!(m.is_watertight());
    }

    #[test]
    fn cylinder_is_watertight_with_positive_volume() {
        let m = cylinder_mesh(Vector3::zeros(), 5.0, 75.0, 16);
        assert!(m.is_watertight());
        assert!(m.signed_volume() > 0.0);
        // Prism volume approaches pi r^2 L from below.
        assert!(m.signed_volume() < std::f64::consts::PI * 25.0 * 75.0);
        m.validate().unwrap();
    }

    #[test]
    fn sphere_is_watertight() {
        let m = sphere_mesh(Vector3::new(0.0, 0.0, 10.0), 20.0, 2);
        assert!(m.is_watertight());
        let v = m.signed_volume();
        let exact = 4.0 / 3.0 * std::f64::consts::PI * 20.0f64.powi(3);
        assert!(v > 0.8 * exact && v < exact);
    }

    #[test]
    fn outward_orientation_fixes_flipped_mesh() {
        let mut m = box_mesh(Vector3::zeros(), Vector3::new(2.0, 2.0, 2.0));
        for t in &mut m.triangles {
            t.swap(0, 2);
        }
        assert!(m.signed_volume() < 0.0);
        let fixed = m.oriented_outward();
        assert!(fixed.signed_volume() > 0.0);
    }
}
