//! Antipodal two-finger grasp candidates and collision-free approach
//! counting against the cavity and membrane.
//!
//! The candidate pool is generated once in the object frame (deterministic
//! under a seed) and reused across stamping depths; N_g(D) counts candidate
//! pairs that keep at least one collision-free approach at depth D. The
//! gripper is modeled as three boxes (two fingers and a palm) swept
//! backward along the approach by the standoff distance.

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cavity::{CavitySpec, JigSpec};
use crate::geom::mesh::TriMesh;
use crate::geom::pose::{compose, orthogonal_unit, Pose};

/// Parallel-gripper dimensions, mm.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GripperSpec {
    pub max_opening: f64,
    /// Finger pad size across the closing plane.
    pub finger_width: f64,
    /// Finger size along the closing axis.
    pub finger_thickness: f64,
    /// Finger size along the approach direction.
    pub finger_length: f64,
    /// Palm depth behind the finger bases, along the approach.
    pub palm_clearance: f64,
    /// Length of the swept retreat checked for collisions.
    pub approach_standoff: f64,
}

impl Default for GripperSpec {
    fn default() -> Self {
        GripperSpec {
            max_opening: 80.0,
            finger_width: 16.0,
            finger_thickness: 8.0,
            finger_length: 40.0,
            palm_clearance: 20.0,
            approach_standoff: 30.0,
        }
    }
}

impl GripperSpec {
    pub fn validate(&self) -> crate::error::Result<()> {
        let dims = [
            self.max_opening,
            self.finger_width,
            self.finger_thickness,
            self.finger_length,
            self.palm_clearance,
            self.approach_standoff,
        ];
        if dims.iter().any(|&d| !(d > 0.0)) {
            return Err(crate::error::Error::InvalidParameter(
                "gripper dimensions must be positive".into(),
            ));
        }
        if self.max_opening <= self.finger_thickness {
            return Err(crate::error::Error::InvalidParameter(
                "max_opening must exceed finger_thickness".into(),
            ));
        }
        Ok(())
    }
}

/// One antipodal grasp hypothesis with a specific approach direction.
/// Candidates sharing `pair_id` grasp the same contact pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraspCandidate {
    pub pair_id: usize,
    pub contact_a: [f64; 3],
    pub contact_b: [f64; 3],
    /// Unit closing direction from contact_a toward contact_b.
    pub axis: [f64; 3],
    /// Unit travel direction of the gripper, orthogonal to the axis.
    pub approach: [f64; 3],
    /// Gripper frame in object coordinates: x = axis, z = approach,
    /// origin at the contact midpoint.
    pub gripper_pose: Pose,
    pub width: f64,
}

/// Safety inflation applied to gripper boxes in cavity checks, mm.
const COLLISION_INFLATION: f64 = 0.5;
/// Shrink applied in object self-collision filtering so that the pad
/// touching its own contact does not count as a collision, mm.
const SELF_CHECK_SHRINK: f64 = 0.2;

/// Oriented box: center, orthonormal axes (columns), half extents.
#[derive(Debug, Clone)]
struct Obb {
    center: Vector3<f64>,
    axes: Matrix3<f64>,
    half: Vector3<f64>,
}

impl Obb {
    fn transformed(&self, pose: &Pose) -> Obb {
        Obb {
            center: pose.apply_point(&self.center),
            axes: pose.rotation_matrix() * self.axes,
            half: self.half,
        }
    }

    fn inflated(&self, by: f64) -> Obb {
        Obb {
            center: self.center,
            axes: self.axes,
            half: self.half + Vector3::repeat(by),
        }
    }

    fn corners(&self) -> [Vector3<f64>; 8] {
        let mut out = [Vector3::zeros(); 8];
        let mut idx = 0;
        for sx in [-1.0, 1.0] {
            for sy in [-1.0, 1.0] {
                for sz in [-1.0, 1.0] {
                    out[idx] = self.center
                        + self.axes.column(0) * (sx * self.half.x)
                        + self.axes.column(1) * (sy * self.half.y)
                        + self.axes.column(2) * (sz * self.half.z);
                    idx += 1;
                }
            }
        }
        out
    }
}

/// Gripper collision volumes in the gripper frame (x closing axis,
/// z approach, origin at the contact midpoint), swept backward along z by
/// `sweep` and spread to `width` between the finger pads.
fn gripper_boxes(g: &GripperSpec, width: f64, sweep: f64) -> [Obb; 3] {
    let pad = (g.finger_width / 2.0).min(g.finger_length / 2.0);
    let tip_z = pad;
    let len = g.finger_length + sweep;
    let finger_center_z = tip_z - len / 2.0;
    let finger = |side: f64| Obb {
        center: Vector3::new(
            side * (width / 2.0 + g.finger_thickness / 2.0),
            0.0,
            finger_center_z,
        ),
        axes: Matrix3::identity(),
        half: Vector3::new(g.finger_thickness / 2.0, g.finger_width / 2.0, len / 2.0),
    };
    let palm_len = g.palm_clearance + sweep;
    let palm = Obb {
        center: Vector3::new(0.0, 0.0, tip_z - g.finger_length - palm_len / 2.0),
        axes: Matrix3::identity(),
        half: Vector3::new(
            width / 2.0 + g.finger_thickness,
            g.finger_width / 2.0,
            palm_len / 2.0,
        ),
    };
    [finger(-1.0), finger(1.0), palm]
}

/// Samples antipodal contact pairs on the object surface and fans approach
/// directions around each pair's closing axis. Deterministic under `seed`;
/// an empty result is valid.
pub fn generate_grasps(
    object: &TriMesh,
    gripper: &GripperSpec,
    mu_finger: f64,
    sample_count: usize,
    approach_directions: usize,
    seed: u64,
) -> Vec<GraspCandidate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let tri_count = object.triangles.len();
    if tri_count == 0 || sample_count == 0 {
        return out;
    }
    let mut cumulative = Vec::with_capacity(tri_count);
    let mut total = 0.0;
    for i in 0..tri_count {
        total += object.triangle_area(i);
        cumulative.push(total);
    }
    let cone_cos = 1.0 / (1.0 + mu_finger * mu_finger).sqrt();
    let mut pair_id = 0usize;

    for _ in 0..sample_count {
        let pick = rng.gen_range(0.0..total);
        let tri = cumulative.partition_point(|&c| c < pick).min(tri_count - 1);
        let [a, b, c] = object.triangle_points(tri);
        let (mut u, mut v) = (rng.gen::<f64>(), rng.gen::<f64>());
        if u + v > 1.0 {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        let p_a = a + (b - a) * u + (c - a) * v;
        let n_a = object.triangle_normal(tri);

        let dir = -n_a;
        let Some((p_b, n_b)) = raycast_exit(object, &(p_a + dir * 1e-6), &dir) else {
            continue;
        };
        let width = (p_b - p_a).norm();
        if width > gripper.max_opening || width < 1e-6 {
            continue;
        }
        let axis = (p_b - p_a) / width;
        // Antipodal condition: both surface normals inside the friction
        // cone of the closing axis.
        if n_a.dot(&-axis) < cone_cos - 1e-9 || n_b.dot(&axis) < cone_cos - 1e-9 {
            continue;
        }

        let t1 = orthogonal_unit(&axis);
        let t2 = axis.cross(&t1);
        let midpoint = (p_a + p_b) / 2.0;
        let mut accepted_any = false;
        for l in 0..approach_directions {
            let ang = 2.0 * std::f64::consts::PI * l as f64 / approach_directions as f64;
            let approach = t1 * ang.cos() + t2 * ang.sin();
            let y_axis = approach.cross(&axis);
            let rotation = Matrix3::from_columns(&[axis, y_axis, approach]);
            let Ok(gripper_pose) = Pose::new(rotation, midpoint) else {
                continue;
            };
            // The closed gripper must not collide with the object itself
            // (touching at the grasp contacts is allowed).
            let boxes = gripper_boxes(gripper, width, 0.0);
            let hits_object = boxes.iter().any(|bx| {
                let world = bx.transformed(&gripper_pose).inflated(-SELF_CHECK_SHRINK);
                mesh_intersects_box(object, &world)
            });
            if hits_object {
                continue;
            }
            out.push(GraspCandidate {
                pair_id,
                contact_a: [p_a.x, p_a.y, p_a.z],
                contact_b: [p_b.x, p_b.y, p_b.z],
                axis: [axis.x, axis.y, axis.z],
                approach: [approach.x, approach.y, approach.z],
                gripper_pose,
                width,
            });
            accepted_any = true;
        }
        if accepted_any {
            pair_id += 1;
        }
    }
    out
}

/// First ray exit through the mesh: nearest hit whose face points along
/// the ray (a back face seen from inside).
fn raycast_exit(
    object: &TriMesh,
    origin: &Vector3<f64>,
    dir: &Vector3<f64>,
) -> Option<(Vector3<f64>, Vector3<f64>)> {
    let mut best: Option<(f64, usize)> = None;
    for i in 0..object.triangles.len() {
        let tri = object.triangle_points(i);
        if let Some(t) = ray_triangle(origin, dir, &tri) {
            if t > 1e-9 && object.triangle_normal(i).dot(dir) > 1e-9 {
                if best.map(|(bt, _)| t < bt).unwrap_or(true) {
                    best = Some((t, i));
                }
            }
        }
    }
    best.map(|(t, i)| (origin + dir * t, object.triangle_normal(i)))
}

/// Moller-Trumbore ray/triangle intersection parameter.
fn ray_triangle(origin: &Vector3<f64>, dir: &Vector3<f64>, tri: &[Vector3<f64>; 3]) -> Option<f64> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let p = dir.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < 1e-14 {
        return None;
    }
    let inv = 1.0 / det;
    let s = origin - tri[0];
    let u = s.dot(&p) * inv;
    if !(-1e-9..=1.0 + 1e-9).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = dir.dot(&q) * inv;
    if v < -1e-9 || u + v > 1.0 + 1e-9 {
        return None;
    }
    let t = e2.dot(&q) * inv;
    (t > 0.0).then_some(t)
}

fn mesh_intersects_box(object: &TriMesh, obb: &Obb) -> bool {
    (0..object.triangles.len()).any(|i| triangle_box_overlap(&object.triangle_points(i), obb))
}

/// Separating-axis test between a triangle and an oriented box.
fn triangle_box_overlap(tri: &[Vector3<f64>; 3], obb: &Obb) -> bool {
    // Bring the triangle into box-local coordinates.
    let rt = obb.axes.transpose();
    let v: [Vector3<f64>; 3] = std::array::from_fn(|i| rt * (tri[i] - obb.center));
    let h = obb.half;

    // Box face axes.
    for k in 0..3 {
        let (lo, hi) = minmax3(v[0][k], v[1][k], v[2][k]);
        if lo > h[k] || hi < -h[k] {
            return false;
        }
    }
    // Triangle plane.
    let e0 = v[1] - v[0];
    let e1 = v[2] - v[1];
    let n = e0.cross(&e1);
    let d = n.dot(&v[0]);
    let r = h.x * n.x.abs() + h.y * n.y.abs() + h.z * n.z.abs();
    if d.abs() > r {
        return false;
    }
    // Nine cross axes.
    let e2 = v[0] - v[2];
    for e in [e0, e1, e2] {
        for k in 0..3 {
            let mut axis = Vector3::zeros();
            axis[k] = 1.0;
            let a = axis.cross(&e);
            if a.norm_squared() < 1e-18 {
                continue;
            }
            let p0 = a.dot(&v[0]);
            let p1 = a.dot(&v[1]);
            let p2 = a.dot(&v[2]);
            let (lo, hi) = minmax3(p0, p1, p2);
            let r = h.x * a.x.abs() + h.y * a.y.abs() + h.z * a.z.abs();
            if lo > r || hi < -r {
                return false;
            }
        }
    }
    true
}

fn minmax3(a: f64, b: f64, c: f64) -> (f64, f64) {
    (a.min(b).min(c), a.max(b).max(c))
}

/// True when the swept gripper volumes at this grasp clear the cavity
/// walls and the membrane plane outside the rim triangle. Object-finger
/// contact at the grasp contacts is allowed by construction.
pub fn approach_feasible(
    grasp: &GraspCandidate,
    object_pose: &Pose,
    cavity: &CavitySpec,
    jig: &JigSpec,
    gripper: &GripperSpec,
) -> bool {
    let _ = jig; // the membrane plane is treated as unbounded
    let world_pose = compose(object_pose, &grasp.gripper_pose);
    let apex = cavity.apex_vec();
    let face_tris: [[Vector3<f64>; 3]; 3] = std::array::from_fn(|k| {
        [
            apex,
            cavity.rim_vertex((k + 1) % 3),
            cavity.rim_vertex((k + 2) % 3),
        ]
    });
    for bx in gripper_boxes(gripper, grasp.width, gripper.approach_standoff) {
        let world = bx.transformed(&world_pose).inflated(COLLISION_INFLATION);
        for tri in &face_tris {
            if triangle_box_overlap(tri, &world) {
                return false;
            }
        }
        if box_hits_membrane(&world, cavity) {
            return false;
        }
    }
    true
}

/// Does the box dip below the rim plane anywhere outside the rim triangle?
fn box_hits_membrane(obb: &Obb, cavity: &CavitySpec) -> bool {
    let rim_z = cavity.rim_z();
    let corners = obb.corners();
    let mut below: Vec<Vector3<f64>> = corners.iter().filter(|c| c.z < rim_z - 1e-9).copied().collect();
    if below.is_empty() {
        return false;
    }
    // Add rim-plane crossings of the box edges to close the clipped hull.
    const EDGES: [(usize, usize); 12] = [
        (0, 1),
        (2, 3),
        (4, 5),
        (6, 7),
        (0, 2),
        (1, 3),
        (4, 6),
        (5, 7),
        (0, 4),
        (1, 5),
        (2, 6),
        (3, 7),
    ];
    for (a, b) in EDGES {
        let (pa, pb) = (corners[a], corners[b]);
        if (pa.z - rim_z) * (pb.z - rim_z) < 0.0 {
            let t = (rim_z - pa.z) / (pb.z - pa.z);
            below.push(pa + (pb - pa) * t);
        }
    }
    // The below-plane part is convex; it avoids the membrane only if its
    // footprint stays inside the rim triangle.
    below
        .iter()
        .any(|p| !cavity.xy_in_rim_triangle(p.x, p.y, 1e-9))
}

/// N_g: how many candidate pairs admit at least one collision-free
/// approach with the object held at `spp`.
pub fn count_feasible(
    spp: &Pose,
    cavity: &CavitySpec,
    jig: &JigSpec,
    gripper: &GripperSpec,
    grasps: &[GraspCandidate],
) -> usize {
    let mut feasible_pairs = std::collections::BTreeSet::new();
    for g in grasps {
        if feasible_pairs.contains(&g.pair_id) {
            continue;
        }
        if approach_feasible(g, spp, cavity, jig, gripper) {
            feasible_pairs.insert(g.pair_id);
        }
    }
    feasible_pairs.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::{build_cavity, OrientationMode};
    use crate::geom::mesh::{box_mesh, cylinder_mesh, sphere_mesh};
    use approx::assert_abs_diff_eq;

    #[test]
    fn cylinder_admits_diametral_grasps_along_its_length() {
        // Shaft-like part: 10 mm across, 75 mm long.
        let shaft = cylinder_mesh(Vector3::zeros(), 5.0, 75.0, 16);
        let gripper = GripperSpec {
            max_opening: 40.0,
            ..GripperSpec::default()
        };
        let grasps = generate_grasps(&shaft, &gripper, 0.3, 200, 4, 7);
        assert!(!grasps.is_empty());
        let mut zs: Vec<f64> = Vec::new();
        for g in &grasps {
            // Diametral: closing axis is perpendicular to the shaft axis
            // and the width is one diameter (inradius of the 16-gon).
            assert!(g.axis[2].abs() < 1e-6, "axis not perpendicular to shaft");
            let inradius_width = 10.0 * (std::f64::consts::PI / 16.0).cos();
            assert_abs_diff_eq!(g.width, inradius_width, epsilon = 1e-6);
            zs.push(g.contact_a[2]);
        }
        let span = zs.iter().fold(f64::NEG_INFINITY, |m, &z| m.max(z))
            - zs.iter().fold(f64::INFINITY, |m, &z| m.min(z));
        assert!(span > 30.0, "candidates span only {span:.1} mm of the shaft");
    }

    #[test]
    fn too_wide_sphere_yields_no_candidates() {
        let ball = sphere_mesh(Vector3::zeros(), 35.0, 2);
        let gripper = GripperSpec {
            max_opening: 40.0,
            ..GripperSpec::default()
        };
        let grasps = generate_grasps(&ball, &gripper, 0.5, 150, 4, 7);
        assert!(grasps.is_empty());
    }

    #[test]
    fn frictionless_cube_grasps_are_face_parallel() {
        let cube = box_mesh(Vector3::zeros(), Vector3::new(30.0, 30.0, 30.0));
        let gripper = GripperSpec {
            max_opening: 50.0,
            ..GripperSpec::default()
        };
        let grasps = generate_grasps(&cube, &gripper, 0.0, 200, 4, 7);
        assert!(!grasps.is_empty());
        for g in &grasps {
            let axis = Vector3::from_column_slice(&g.axis);
            let maxc = axis.x.abs().max(axis.y.abs()).max(axis.z.abs());
            assert!(maxc > 1.0 - 1e-9, "axis {axis:?} is not face-parallel");
            assert_abs_diff_eq!(g.width, 30.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let shaft = cylinder_mesh(Vector3::zeros(), 5.0, 75.0, 16);
        let gripper = GripperSpec::default();
        let a = generate_grasps(&shaft, &gripper, 0.4, 100, 8, 42);
        let b = generate_grasps(&shaft, &gripper, 0.4, 100, 8, 42);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        let c = generate_grasps(&shaft, &gripper, 0.4, 100, 8, 43);
        assert_ne!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&c).unwrap()
        );
    }

    #[test]
    fn candidates_satisfy_their_own_invariants() {
        let cube = box_mesh(Vector3::zeros(), Vector3::new(25.0, 40.0, 15.0));
        let gripper = GripperSpec::default();
        for g in generate_grasps(&cube, &gripper, 0.6, 150, 6, 3) {
            assert!(g.width <= gripper.max_opening);
            let axis = Vector3::from_column_slice(&g.axis);
            let approach = Vector3::from_column_slice(&g.approach);
            assert_abs_diff_eq!(axis.norm(), 1.0, epsilon = 1e-9);
            assert_abs_diff_eq!(approach.norm(), 1.0, epsilon = 1e-9);
            assert_abs_diff_eq!(axis.dot(&approach), 0.0, epsilon = 1e-9);
            let d = Vector3::from_column_slice(&g.contact_b)
                - Vector3::from_column_slice(&g.contact_a);
            assert_abs_diff_eq!(d.norm(), g.width, epsilon = 1e-9);
        }
    }

    fn demo_cavity(depth: f64) -> CavitySpec {
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
    fn top_down_approach_above_surface_is_feasible() {
        let cavity = demo_cavity(5.0);
        let jig = JigSpec::default();
        let gripper = GripperSpec::default();
        // Grasp 30 mm above the membrane, approaching straight down.
        let grasp = GraspCandidate {
            pair_id: 0,
            contact_a: [-5.0, 0.0, 30.0],
            contact_b: [5.0, 0.0, 30.0],
            axis: [1.0, 0.0, 0.0],
            approach: [0.0, 0.0, -1.0],
            gripper_pose: Pose::new(
                Matrix3::from_columns(&[
                    Vector3::x(),
                    Vector3::new(0.0, -1.0, 0.0),
                    -Vector3::z(),
                ]),
                Vector3::new(0.0, 0.0, 30.0),
            )
            .unwrap(),
            width: 10.0,
        };
        assert!(approach_feasible(
            &grasp,
            &Pose::identity(),
            &cavity,
            &jig,
            &gripper
        ));
    }

    #[test]
    fn horizontal_approach_below_rim_collides() {
        let cavity = demo_cavity(5.0);
        let jig = JigSpec::default();
        let gripper = GripperSpec::default();
        // Fingers below the rim plane, approaching sideways across the
        // membrane: the sweep must hit the jig surface.
        let grasp = GraspCandidate {
            pair_id: 0,
            contact_a: [30.0, -5.0, -2.0],
            contact_b: [30.0, 5.0, -2.0],
            axis: [0.0, 1.0, 0.0],
            approach: [-1.0, 0.0, 0.0],
            gripper_pose: Pose::new(
                Matrix3::from_columns(&[
                    Vector3::y(),
                    Vector3::new(0.0, 0.0, 1.0),
                    -Vector3::x(),
                ]),
                Vector3::new(30.0, 0.0, -2.0),
            )
            .unwrap(),
            width: 10.0,
        };
        assert!(!approach_feasible(
            &grasp,
            &Pose::identity(),
            &cavity,
            &jig,
            &gripper
        ));
    }

    #[test]
    fn widening_the_rim_never_reduces_feasible_count() {
        let shaft = cylinder_mesh(Vector3::zeros(), 5.0, 75.0, 16);
        let gripper = GripperSpec {
            max_opening: 40.0,
            ..GripperSpec::default()
        };
        let jig = JigSpec::default();
        let grasps = generate_grasps(&shaft, &gripper, 0.3, 150, 8, 11);
        // Shaft lying across the cavity at the rim plane.
        let pose = Pose::from_translation(Vector3::new(0.0, 0.0, 5.0));
        let narrow = count_feasible(&pose, &demo_cavity(10.0), &jig, &gripper, &grasps);
        let wide = count_feasible(&pose, &demo_cavity(25.0), &jig, &gripper, &grasps);
        assert!(wide >= narrow, "wide {wide} < narrow {narrow}");
    }

    #[test]
    fn empty_candidate_list_counts_zero() {
        let jig = JigSpec::default();
        assert_eq!(
            count_feasible(
                &Pose::identity(),
                &demo_cavity(10.0),
                &jig,
                &GripperSpec::default(),
                &[]
            ),
            0
        );
    }
}
