//! Parametric triangular-pyramid cavity, the stamping frame, and the convex
//! stamp tool that creates the cavity in the jig membrane.
//!
//! The cavity frame's three axes double as the inward unit normals of the
//! three cavity faces: face k is spanned by the other two axes and passes
//! through the apex. An axis making elevation angle `a` with the horizontal
//! plane has z-component `sin(a)`, so a frame exists exactly when the
//! squared sines of the three elevations sum to one. The symmetric
//! equal-angle mode places every axis at arccos(1/sqrt(3)) from the
//! vertical, i.e. arcsin(1/sqrt(3)) above the horizontal plane.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::cloud::PointCloud;
use crate::geom::mesh::TriMesh;
use crate::geom::pose::{compose, rotation_between, Pose};

/// Physical jig parameters; lengths in mm.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JigSpec {
    /// World z of the undisturbed membrane (rim plane).
    pub surface_height: f64,
    /// Vertical thickness of the deformable region; bounds cavity depth.
    pub jig_thickness: f64,
    /// Sliding friction coefficient of the silicone membrane.
    pub membrane_friction: f64,
    /// Radius of usable membrane around the jig center.
    pub lateral_extent: f64,
}

impl Default for JigSpec {
    fn default() -> Self {
        JigSpec {
            surface_height: 0.0,
            jig_thickness: 40.0,
            membrane_friction: 1.97,
            lateral_extent: 60.0,
        }
    }
}

/// How the cavity frame axes are tilted against the horizontal plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OrientationMode {
    /// All three axes at equal elevation arcsin(1/sqrt(3)) ~ 35.26 deg
    /// (equivalently arccos(1/sqrt(3)) ~ 54.74 deg from the vertical).
    EqualAngle,
    /// Explicit per-axis elevations in radians; feasible only when the
    /// squared sines sum to 1.
    ExplicitAngles([f64; 3]),
}

/// Oriented plane through the cavity apex, inward unit normal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FacePlane {
    pub normal: [f64; 3],
    /// normal . x = offset on the plane; interior side is normal . x >= offset.
    pub offset: f64,
}

impl FacePlane {
    pub fn normal_vec(&self) -> Vector3<f64> {
        Vector3::from_column_slice(&self.normal)
    }

    /// Signed distance: positive on the open (interior) side of the cavity.
    pub fn signed_distance(&self, p: &Vector3<f64>) -> f64 {
        self.normal_vec().dot(p) - self.offset
    }
}

/// Depth-parameterized triangular-pyramid cavity in world coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CavitySpec {
    /// Apex depth below the rim plane, mm.
    pub depth: f64,
    /// Apex position, world mm.
    pub apex: [f64; 3],
    /// Stamping frame: axes are the face normals, origin is the apex.
    pub frame: Pose,
    /// Three faces; face k is spanned by axes other than k.
    pub faces: [FacePlane; 3],
    /// Rim vertices; rim[k] is opposite face k.
    pub rim: [[f64; 3]; 3],
    pub fillet_radius: f64,
}

impl CavitySpec {
    pub fn apex_vec(&self) -> Vector3<f64> {
        Vector3::from_column_slice(&self.apex)
    }

    pub fn rim_vertex(&self, k: usize) -> Vector3<f64> {
        Vector3::from_column_slice(&self.rim[k])
    }

    /// World z of the rim plane.
    pub fn rim_z(&self) -> f64 {
        self.apex[2] + self.depth
    }

    /// Rim vertex indices in counter-clockwise order viewed from above.
    pub fn rim_ccw(&self) -> [usize; 3] {
        let a = self.rim_vertex(0);
        let b = self.rim_vertex(1);
        let c = self.rim_vertex(2);
        let area2 = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
        if area2 >= 0.0 {
            [0, 1, 2]
        } else {
            [0, 2, 1]
        }
    }

    /// True when the horizontal point lies inside (or within `margin` of)
    /// the rim triangle. Negative margins shrink the triangle.
    pub fn xy_in_rim_triangle(&self, x: f64, y: f64, margin: f64) -> bool {
        let [i, j, k] = self.rim_ccw();
        let verts = [self.rim_vertex(i), self.rim_vertex(j), self.rim_vertex(k)];
        for e in 0..3 {
            let a = verts[e];
            let b = verts[(e + 1) % 3];
            let ex = b.x - a.x;
            let ey = b.y - a.y;
            let len = (ex * ex + ey * ey).sqrt();
            // CCW: interior is to the left of each edge.
            let s = (ex * (y - a.y) - ey * (x - a.x)) / len;
            if s < -margin {
                return false;
            }
        }
        true
    }

    /// Membrane surface height at (x, y): the pyramid face envelope inside
    /// the rim triangle, the flat rim plane outside it.
    pub fn surface_z_at(&self, x: f64, y: f64) -> f64 {
        if !self.xy_in_rim_triangle(x, y, 0.0) {
            return self.rim_z();
        }
        let apex = self.apex_vec();
        let mut z = f64::NEG_INFINITY;
        for face in &self.faces {
            let n = face.normal_vec();
            // Solve n.(p - apex) = 0 for p.z given (x, y); n.z > 0 always.
            let zi = apex.z - (n.x * (x - apex.x) + n.y * (y - apex.y)) / n.z;
            z = z.max(zi);
        }
        z.min(self.rim_z())
    }

    /// The whole cavity rotated by `angle` about the world z axis through
    /// the origin (used for frame-invariance checks and yaw configuration).
    pub fn rotated_z(&self, angle: f64) -> CavitySpec {
        let rz = Pose::rot_z(angle);
        let apex = rz.apply_point(&self.apex_vec());
        let frame = compose(&rz, &self.frame);
        let faces = std::array::from_fn(|k| {
            let n = rz.apply_vector(&self.faces[k].normal_vec());
            FacePlane {
                normal: [n.x, n.y, n.z],
                offset: n.dot(&apex),
            }
        });
        let rim = std::array::from_fn(|k| {
            let r = rz.apply_point(&self.rim_vertex(k));
            [r.x, r.y, r.z]
        });
        CavitySpec {
            depth: self.depth,
            apex: [apex.x, apex.y, apex.z],
            frame,
            faces,
            rim,
            fillet_radius: self.fillet_radius,
        }
    }

    /// Structural invariants; used by tests and after construction.
    pub fn validate(&self) -> Result<()> {
        let apex = self.apex_vec();
        for face in &self.faces {
            if face.signed_distance(&apex).abs() > 1e-6 {
                return Err(Error::Internal("cavity face misses the apex".into()));
            }
            if face.normal_vec().z <= 0.0 {
                return Err(Error::Internal("cavity face normal not upward".into()));
            }
        }
        for k in 0..3 {
            let r = self.rim_vertex(k);
            if (r.z - self.rim_z()).abs() > 1e-6 {
                return Err(Error::Internal("rim vertex off the rim plane".into()));
            }
            for (f, face) in self.faces.iter().enumerate() {
                let d = face.signed_distance(&r).abs();
                if f != k && d > 1e-6 {
                    return Err(Error::Internal("rim vertex off its face planes".into()));
                }
            }
        }
        Ok(())
    }
}

/// Builds a cavity of the given depth with its apex at `apex_xy` (world mm).
///
/// Errors with `InfeasibleOrientation` when explicit elevations cannot form
/// an orthonormal frame, and `CavityExceedsJig` when the rim triangle falls
/// outside the usable membrane radius.
pub fn build_cavity(
    depth: f64,
    apex_xy: [f64; 2],
    orientation: OrientationMode,
    fillet_radius: f64,
    jig: &JigSpec,
) -> Result<CavitySpec> {
    if !(depth > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "cavity depth {depth} must be positive"
        )));
    }
    if depth > jig.jig_thickness {
        return Err(Error::InvalidParameter(format!(
            "cavity depth {depth} exceeds jig thickness {}",
            jig.jig_thickness
        )));
    }
    if fillet_radius < 0.0 {
        return Err(Error::InvalidParameter("negative fillet radius".into()));
    }

    let sines: Vector3<f64> = match orientation {
        OrientationMode::EqualAngle => {
            let s = 1.0 / 3.0f64.sqrt();
            Vector3::new(s, s, s)
        }
        OrientationMode::ExplicitAngles(angles) => {
            let s = Vector3::new(angles[0].sin(), angles[1].sin(), angles[2].sin());
            let sum = s.norm_squared();
            if (sum - 1.0).abs() > 1e-6 {
                return Err(Error::InfeasibleOrientation(format!(
                    "sum of squared sines is {sum:.6}, must be 1"
                )));
            }
            if s.iter().any(|&v| v < 1e-6) {
                return Err(Error::InfeasibleOrientation(
                    "an axis elevation near zero would make a cavity face vertical".into(),
                ));
            }
            s
        }
    };

    // Frame: the rotation mapping the sine vector to +z has columns whose
    // z-components are exactly the sines.
    let rotation: Matrix3<f64> = rotation_between(&sines, &Vector3::z());
    let apex = Vector3::new(apex_xy[0], apex_xy[1], jig.surface_height - depth);
    let frame = Pose::new(rotation, apex)?;

    let axes: [Vector3<f64>; 3] = std::array::from_fn(|k| rotation.column(k).into_owned());
    let faces: [FacePlane; 3] = std::array::from_fn(|k| FacePlane {
        normal: [axes[k].x, axes[k].y, axes[k].z],
        offset: axes[k].dot(&apex),
    });
    // Rim vertex opposite face k follows axis k up to the rim plane.
    let rim: [[f64; 3]; 3] = std::array::from_fn(|k| {
        let t = depth / axes[k].z;
        let r = apex + axes[k] * t;
        [r.x, r.y, r.z]
    });

    let rim_radius = rim
        .iter()
        .map(|r| (r[0] * r[0] + r[1] * r[1]).sqrt())
        .fold(0.0f64, f64::max);
    if rim_radius > jig.lateral_extent {
        return Err(Error::CavityExceedsJig {
            rim_radius,
            lateral_extent: jig.lateral_extent,
        });
    }

    let cavity = CavitySpec {
        depth,
        apex: [apex.x, apex.y, apex.z],
        frame,
        faces,
        rim,
        fillet_radius,
    };
    cavity.validate()?;
    Ok(cavity)
}

/// The transform the stamping robot applies: from the stamp's source frame
/// to the cavity frame.
pub fn stamp_transform(cavity: &CavitySpec, object_source: &Pose) -> Pose {
    compose(&object_source.invert(), &cavity.frame)
}

/// Convex stamp-tool mesh in tool-local coordinates: apex at the origin,
/// base triangle at z = depth, optional prismatic handle above the base.
/// Fillets are approximated by tapered chamfer strips on the slant edges,
/// widest (= `fillet_radius`) at mid-edge and vanishing at the apex and
/// base corners, so the tool's bounding box is that of the sharp pyramid.
pub fn build_stamp_tool(
    cavity: &CavitySpec,
    handle_length: f64,
    handle_radius: f64,
) -> Result<TriMesh> {
    let apex = cavity.apex_vec();
    let corners: [Vector3<f64>; 3] = std::array::from_fn(|k| cavity.rim_vertex(k) - apex);
    let a = Vector3::zeros();

    let mut verts: Vec<Vector3<f64>> = vec![a, corners[0], corners[1], corners[2]];
    let mut tris: Vec<[u32; 3]> = Vec::new();
    let base_ccw = cavity.rim_ccw();

    if cavity.fillet_radius <= 0.0 {
        for k in 0..3 {
            // Face k holds the apex and the two corners other than k.
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            tris.push([0, 1 + i as u32, 1 + j as u32]);
        }
    } else {
        // Mid-edge bulge points, one per adjacent face, chord = fillet width.
        // mids[k][f]: index of the bulge of edge apex->corner k on face f.
        let mut mids = [[0u32; 3]; 3];
        for k in 0..3 {
            let edge_dir = corners[k].normalize();
            let m = corners[k] / 2.0;
            let (fi, fj) = ((k + 1) % 3, (k + 2) % 3);
            // In-face directions perpendicular to the edge: project the
            // face's other corner direction out of the edge direction.
            let mut dirs = [Vector3::zeros(); 2];
            for (slot, &f) in [fi, fj].iter().enumerate() {
                let other = (0..3).find(|&c| c != k && c != f).unwrap();
                let w = corners[other];
                dirs[slot] = (w - edge_dir * w.dot(&edge_dir)).normalize();
            }
            let gap = (dirs[0] - dirs[1]).norm().max(1e-9);
            // Clamp so strips stay well inside the faces.
            let t = (cavity.fillet_radius / gap).min(0.25 * corners[k].norm());
            for (slot, &f) in [fi, fj].iter().enumerate() {
                verts.push(m + dirs[slot] * t);
                mids[k][f] = (verts.len() - 1) as u32;
            }
        }
        for f in 0..3 {
            // Face f pentagon: apex, bulges of its two edges, two corners.
            let (cj, ck) = ((f + 1) % 3, (f + 2) % 3);
            let (mj, mk) = (mids[cj][f], mids[ck][f]);
            let (vj, vk) = (1 + cj as u32, 1 + ck as u32);
            tris.push([mj, vj, vk]);
            tris.push([mj, vk, mk]);
            tris.push([mj, mk, 0]);
        }
        for k in 0..3 {
            // Chamfer strip of edge apex->corner k between its two faces,
            // split along the bulge chord so the sharp ridge is cut.
            let (fi, fj) = ((k + 1) % 3, (k + 2) % 3);
            let (mi, mj) = (mids[k][fi], mids[k][fj]);
            tris.push([0, mi, mj]);
            tris.push([mi, 1 + k as u32, mj]);
        }
    }

    if handle_length > 0.0 {
        if handle_radius <= 0.0 {
            return Err(Error::InvalidParameter(
                "handle_length > 0 requires handle_radius > 0".into(),
            ));
        }
        let base_z = cavity.depth;
        let centroid2 = (corners[0] + corners[1] + corners[2]) / 3.0;
        let centroid = Vector3::new(centroid2.x, centroid2.y, base_z);
        // The handle cross-section must stay inside the base triangle.
        let area2 = ((corners[1] - corners[0]).cross(&(corners[2] - corners[0]))).norm();
        let perimeter = (corners[1] - corners[0]).norm()
            + (corners[2] - corners[1]).norm()
            + (corners[0] - corners[2]).norm();
        let inradius = area2 / perimeter;
        if handle_radius > 0.9 * inradius {
            return Err(Error::InvalidParameter(format!(
                "handle radius {handle_radius:.2} mm exceeds 90% of the base triangle inradius {inradius:.2} mm"
            )));
        }
        let max_r = handle_radius;
        // Octagonal handle cross-section.
        let sides = 8usize;
        let ring_base: Vec<u32> = (0..sides)
            .map(|s| {
                let ang = 2.0 * std::f64::consts::PI * s as f64 / sides as f64;
                verts.push(centroid + Vector3::new(max_r * ang.cos(), max_r * ang.sin(), 0.0));
                (verts.len() - 1) as u32
            })
            .collect();
        let ring_top: Vec<u32> = (0..sides)
            .map(|s| {
                let ang = 2.0 * std::f64::consts::PI * s as f64 / sides as f64;
                verts.push(
                    centroid + Vector3::new(max_r * ang.cos(), max_r * ang.sin(), handle_length),
                );
                (verts.len() - 1) as u32
            })
            .collect();
        // Annular base: bridge the triangle loop to the octagon loop by angle.
        let outer: Vec<u32> = base_ccw.iter().map(|&k| 1 + k as u32).collect();
        bridge_loops(&verts, &outer, &ring_base, &centroid, &mut tris);
        for s in 0..sides {
            let n = (s + 1) % sides;
            tris.push([ring_base[s], ring_base[n], ring_top[n]]);
            tris.push([ring_base[s], ring_top[n], ring_top[s]]);
        }
        let top_center = {
            verts.push(centroid + Vector3::new(0.0, 0.0, handle_length));
            (verts.len() - 1) as u32
        };
        for s in 0..sides {
            let n = (s + 1) % sides;
            tris.push([top_center, ring_top[s], ring_top[n]]);
        }
    } else {
        let [i, j, k] = base_ccw;
        tris.push([1 + i as u32, 1 + j as u32, 1 + k as u32]);
    }

    // Orient every triangle away from an interior reference point.
    let interior = (corners[0] + corners[1] + corners[2]) / 4.0;
    for t in &mut tris {
        let p0 = verts[t[0] as usize];
        let n = (verts[t[1] as usize] - p0).cross(&(verts[t[2] as usize] - p0));
        let c = (p0 + verts[t[1] as usize] + verts[t[2] as usize]) / 3.0;
        if n.dot(&(c - interior)) < 0.0 {
            t.swap(1, 2);
        }
    }

    TriMesh::new(verts.iter().map(|v| [v.x, v.y, v.z]).collect(), tris)
}

/// Triangulates the planar annulus between two convex CCW loops sharing a
/// center, walking both by polar angle. Triangles keep +z orientation.
fn bridge_loops(
    verts: &[Vector3<f64>],
    outer: &[u32],
    inner: &[u32],
    center: &Vector3<f64>,
    tris: &mut Vec<[u32; 3]>,
) {
    let _ = center;
    let p = |v: u32| verts[v as usize];
    // Align the loops: start the inner loop at the vertex nearest the
    // outer start, then zip greedily by shortest new diagonal.
    let start_i = (0..inner.len())
        .min_by(|&a, &b| {
            (p(inner[a]) - p(outer[0]))
                .norm()
                .partial_cmp(&(p(inner[b]) - p(outer[0])).norm())
                .unwrap()
        })
        .unwrap();
    let o_loop: Vec<u32> = outer.to_vec();
    let i_loop: Vec<u32> = (0..inner.len())
        .map(|i| inner[(start_i + i) % inner.len()])
        .collect();
    let (no, ni) = (o_loop.len(), i_loop.len());
    let (mut io, mut ii) = (0usize, 0usize);
    while io < no || ii < ni {
        let o_cur = o_loop[io % no];
        let i_cur = i_loop[ii % ni];
        let advance_outer = if io >= no {
            false
        } else if ii >= ni {
            true
        } else {
            let diag_o = (p(o_loop[(io + 1) % no]) - p(i_cur)).norm();
            let diag_i = (p(i_loop[(ii + 1) % ni]) - p(o_cur)).norm();
            diag_o <= diag_i
        };
        if advance_outer {
            let o_next = o_loop[(io + 1) % no];
            tris.push([o_cur, o_next, i_cur]);
            io += 1;
        } else {
            let i_next = i_loop[(ii + 1) % ni];
            tris.push([o_cur, i_next, i_cur]);
            ii += 1;
        }
    }
}

/// Samples the three interior faces at a pitch no coarser than `spacing`.
/// Face corner vertices are always retained; points shared by two faces
/// (slant edges, apex) are emitted once.
pub fn cavity_point_cloud(cavity: &CavitySpec, spacing: f64) -> Result<PointCloud> {
    if !(spacing > 0.0) {
        return Err(Error::InvalidParameter("spacing must be positive".into()));
    }
    let apex = cavity.apex_vec();
    let mut points: Vec<[f64; 3]> = Vec::new();
    let mut seen: std::collections::HashSet<[i64; 3]> = std::collections::HashSet::new();
    for k in 0..3 {
        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
        let e1 = cavity.rim_vertex(i) - apex;
        let e2 = cavity.rim_vertex(j) - apex;
        let longest = e1.norm().max(e2.norm()).max((e2 - e1).norm());
        let n = (longest / spacing).ceil().max(1.0) as usize;
        for a in 0..=n {
            for b in 0..=(n - a) {
                let p = apex + e1 * (a as f64 / n as f64) + e2 * (b as f64 / n as f64);
                let key = [
                    (p.x * 1e6).round() as i64,
                    (p.y * 1e6).round() as i64,
                    (p.z * 1e6).round() as i64,
                ];
                if seen.insert(key) {
                    points.push([p.x, p.y, p.z]);
                }
            }
        }
    }
    Ok(PointCloud::new(points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn equal_angle_cavity(depth: f64) -> CavitySpec {
        build_cavity(
            depth,
            [0.0, 0.0],
            OrientationMode::EqualAngle,
            0.0,
            &JigSpec::default(),
        )
        .unwrap()
    }

    #[test]
    fn equal_angle_axes_match_hand_trigonometry() {
        // Corner frame: each axis at arccos(1/sqrt(3)) from the vertical,
        // apex exactly depth below the rim plane, rim vertices along the
        // axes at depth * sqrt(3) from the apex.
        let c = equal_angle_cavity(20.0);
        let r = c.frame.rotation_matrix();
        let s = 1.0 / 3.0f64.sqrt();
        for k in 0..3 {
            assert_abs_diff_eq!(r.column(k).z, s, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(c.apex[2], -20.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.rim_z(), 0.0, epsilon = 1e-12);
        for k in 0..3 {
            let len = (c.rim_vertex(k) - c.apex_vec()).norm();
            assert_abs_diff_eq!(len, 20.0 * 3.0f64.sqrt(), epsilon = 1e-9);
        }
        c.validate().unwrap();
    }

    #[test]
    fn forty_five_degrees_three_times_is_infeasible() {
        let angle = 45.0f64.to_radians();
        let r = build_cavity(
            20.0,
            [0.0, 0.0],
            OrientationMode::ExplicitAngles([angle; 3]),
            0.0,
            &JigSpec::default(),
        );
        assert!(matches!(r, Err(Error::InfeasibleOrientation(_))));
    }

    #[test]
    fn feasible_explicit_angles_build_a_scalene_cavity() {
        let a1 = 20.0f64.to_radians();
        let a2 = 40.0f64.to_radians();
        let s3 = (1.0 - a1.sin().powi(2) - a2.sin().powi(2)).sqrt();
        let a3 = s3.asin();
        let c = build_cavity(
            15.0,
            [0.0, 0.0],
            OrientationMode::ExplicitAngles([a1, a2, a3]),
            0.0,
            &JigSpec::default(),
        )
        .unwrap();
        c.validate().unwrap();
        let r = c.frame.rotation_matrix();
        assert_abs_diff_eq!(r.column(0).z, a1.sin(), epsilon = 1e-9);
        assert_abs_diff_eq!(r.column(1).z, a2.sin(), epsilon = 1e-9);
        assert_abs_diff_eq!(r.column(2).z, s3, epsilon = 1e-9);
    }

    #[test]
    fn near_flat_cavity_is_valid() {
        let c = equal_angle_cavity(0.1);
        c.validate().unwrap();
        let [i, j, k] = c.rim_ccw();
        let (a, b, d) = (c.rim_vertex(i), c.rim_vertex(j), c.rim_vertex(k));
        let area = 0.5 * ((b - a).cross(&(d - a))).norm();
        assert!(area > 0.0);
    }

    #[test]
    fn depth_beyond_thickness_rejected() {
        let r = build_cavity(
            41.0,
            [0.0, 0.0],
            OrientationMode::EqualAngle,
            0.0,
            &JigSpec::default(),
        );
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn oversized_rim_rejected_by_lateral_extent() {
        let jig = JigSpec {
            lateral_extent: 20.0,
            ..JigSpec::default()
        };
        let r = build_cavity(30.0, [0.0, 0.0], OrientationMode::EqualAngle, 0.0, &jig);
        assert!(matches!(r, Err(Error::CavityExceedsJig { .. })));
    }

    #[test]
    fn surface_height_profile_matches_depth() {
        let c = equal_angle_cavity(20.0);
        assert_abs_diff_eq!(c.surface_z_at(0.0, 0.0), -20.0, epsilon = 1e-9);
        assert_abs_diff_eq!(c.surface_z_at(100.0, 100.0), 0.0, epsilon = 1e-12);
        // Max depression over the interior equals the depth, at the apex.
        let mut max_dep = 0.0f64;
        for gx in -40..=40 {
            for gy in -40..=40 {
                let (x, y) = (gx as f64, gy as f64);
                max_dep = max_dep.max(c.rim_z() - c.surface_z_at(x, y));
            }
        }
        assert_abs_diff_eq!(max_dep, 20.0, epsilon = 1e-9);
    }

    #[test]
    fn sharp_stamp_tool_is_a_watertight_pyramid() {
        let c = equal_angle_cavity(20.0);
        let tool = build_stamp_tool(&c, 0.0, 0.0).unwrap();
        assert_eq!(tool.vertices.len(), 4);
        assert_eq!(tool.triangles.len(), 4);
        assert!(tool.is_watertight());
        let (lo, hi) = tool.aabb();
        assert_abs_diff_eq!(lo[2], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hi[2], 20.0, epsilon = 1e-12);
        assert!(tool.signed_volume() > 0.0);
    }

    #[test]
    fn handled_stamp_tool_is_watertight() {
        let c = equal_angle_cavity(25.0);
        let tool = build_stamp_tool(&c, 60.0, 8.0).unwrap();
        assert!(tool.is_watertight());
        assert!(tool.signed_volume() > 0.0);
        let (_, hi) = tool.aabb();
        assert_abs_diff_eq!(hi[2], 85.0, epsilon = 1e-9);
    }

    #[test]
    fn chamfered_tool_keeps_bounding_box_and_offsets_match_hand_planes() {
        let c = build_cavity(
            20.0,
            [0.0, 0.0],
            OrientationMode::EqualAngle,
            2.0,
            &JigSpec::default(),
        )
        .unwrap();
        let sharp = build_stamp_tool(
            &CavitySpec {
                fillet_radius: 0.0,
                ..c.clone()
            },
            0.0,
            0.0,
        )
        .unwrap();
        let tool = build_stamp_tool(&c, 0.0, 0.0).unwrap();
        assert!(tool.is_watertight());
        let (lo_a, hi_a) = sharp.aabb();
        let (lo_b, hi_b) = tool.aabb();
        for k in 0..3 {
            assert_abs_diff_eq!(lo_a[k], lo_b[k], epsilon = 1e-6);
            assert_abs_diff_eq!(hi_a[k], hi_b[k], epsilon = 1e-6);
        }

        // Hand-computed mid-edge chamfer geometry for edge 0 of the
        // equal-angle pyramid: bulge points sit on the two adjacent face
        // planes, half a fillet width from the edge midplane each.
        let apex = c.apex_vec();
        let corner0 = c.rim_vertex(0) - apex;
        let mid = corner0 / 2.0;
        let fillet = 2.0;
        let mut found = 0;
        for v in &tool.vertices {
            let p = Vector3::from_column_slice(v);
            if (p - mid).norm() < fillet {
                // Bulge vertices lie exactly on one of the adjacent faces.
                let on_face = (1..3).any(|f| {
                    c.faces[f]
                        .signed_distance(&(p + apex))
                        .abs()
                        < 1e-9
                });
                assert!(on_face, "chamfer bulge off its face plane");
                found += 1;
            }
        }
        assert_eq!(found, 2, "expected two bulge vertices at mid-edge");
        // Chord width equals the fillet radius.
        let bulges: Vec<Vector3<f64>> = tool
            .vertices
            .iter()
            .map(|v| Vector3::from_column_slice(v))
            .filter(|p| (p - mid).norm() < fillet)
            .collect();
        assert_abs_diff_eq!((bulges[0] - bulges[1]).norm(), fillet, epsilon = 1e-9);
    }

    #[test]
    fn point_cloud_lies_on_faces_and_densifies() {
        let c = equal_angle_cavity(20.0);
        let apex = c.apex_vec();
        let edge = (c.rim_vertex(0) - apex).norm();

        let coarse = cavity_point_cloud(&c, edge * 2.0).unwrap();
        assert!(coarse.len() >= 3);
        // Face corners retained.
        for k in 0..3 {
            let r = c.rim_vertex(k);
            assert!(coarse
                .points
                .iter()
                .any(|p| (Vector3::from_column_slice(p) - r).norm() < 1e-9));
        }

        let s = edge / 4.0;
        let n1 = cavity_point_cloud(&c, s).unwrap().len();
        let n2 = cavity_point_cloud(&c, s / 2.0).unwrap().len();
        assert!(
            n2 >= 3 * n1,
            "halving spacing should at least triple the count ({n1} -> {n2})"
        );
        // Lattice-count oracle: each congruent face subdivides its longest
        // edge into ceil(longest / spacing) rows; slant edges and the apex
        // are shared between faces and counted once.
        let base_edge = (c.rim_vertex(1) - c.rim_vertex(0)).norm();
        let longest = base_edge.max(edge);
        let rows = |sp: f64| (longest / sp).ceil();
        let expect = |n: f64| (3.0 * n * n + 3.0 * n + 2.0) / 2.0;
        assert_eq!(n1, expect(rows(s)) as usize);
        assert_eq!(n2, expect(rows(s / 2.0)) as usize);

        let fine = cavity_point_cloud(&c, 2.0).unwrap();
        for p in &fine.points {
            let v = Vector3::from_column_slice(p);
            let on_some_face = c.faces.iter().any(|f| f.signed_distance(&v).abs() < 1e-9);
            assert!(on_some_face);
            assert!(c.xy_in_rim_triangle(p[0], p[1], 1e-9));
        }
    }

    #[test]
    fn stamp_transform_round_trips() {
        let c = equal_angle_cavity(18.0);
        let id = Pose::identity();
        let t = stamp_transform(&c, &id);
        for i in 0..3 {
            assert_abs_diff_eq!(t.translation[i], c.frame.translation[i], epsilon = 1e-12);
        }
        let t2 = stamp_transform(&c, &c.frame);
        let (dt, dr) = crate::geom::pose::pose_error(&t2, &Pose::identity());
        assert_abs_diff_eq!(dt, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(dr, 0.0, epsilon = 1e-9);

        let src = compose(&Pose::rot_z(0.8), &Pose::from_translation(Vector3::new(4.0, 5.0, 6.0)));
        let t3 = stamp_transform(&c, &src);
        let back = compose(&src, &t3);
        let (dt, dr) = crate::geom::pose::pose_error(&back, &c.frame);
        assert_abs_diff_eq!(dt, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(dr, 0.0, epsilon = 1e-9);
    }
}
