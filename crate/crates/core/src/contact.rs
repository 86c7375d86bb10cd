//! Contact detection between a posed object mesh and the cavity, and the
//! per-contact wrench sets built from linearized friction cones.
//!
//! Wrenches are referenced at the object COM with torques divided by the
//! moment scale rho, so all six components share units of N and the gravity
//! wrench is torque-free.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::cavity::CavitySpec;
use crate::error::{Error, Result};
use crate::geom::mesh::TriMesh;
use crate::geom::pose::{orthogonal_unit, Pose};

/// Which cavity feature a contact belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContactFace {
    /// One of the three pyramid faces, 0..=2.
    Face(u8),
    /// The flat membrane around the cavity.
    Rim,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContactPoint {
    /// World position on the cavity feature, mm.
    pub position: [f64; 3],
    /// Unit normal pointing into the object.
    pub normal: [f64; 3],
    pub face_id: ContactFace,
    /// Penetration below the feature plane, mm; at least -tol.
    pub penetration: f64,
}

impl ContactPoint {
    pub fn position_vec(&self) -> Vector3<f64> {
        Vector3::from_column_slice(&self.position)
    }

    pub fn normal_vec(&self) -> Vector3<f64> {
        Vector3::from_column_slice(&self.normal)
    }
}

/// Force (N) and moment-scaled torque (N) at the object COM.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WrenchVector {
    pub force: [f64; 3],
    pub torque: [f64; 3],
}

impl WrenchVector {
    pub fn as_vec6(&self) -> Vec<f64> {
        vec![
            self.force[0],
            self.force[1],
            self.force[2],
            self.torque[0],
            self.torque[1],
            self.torque[2],
        ]
    }
}

/// Linearized cone-edge wrenches of one contact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WrenchSet {
    pub contact: ContactPoint,
    pub vertices: Vec<WrenchVector>,
}

/// Default contact detection tolerance, mm.
pub const DEFAULT_CONTACT_TOL: f64 = 0.5;

/// Finds contacts between the posed object and the cavity within `tol`:
/// object vertices and edge-feature closest points near the three faces,
/// the surrounding membrane plane, and the rim edges. Contacts are
/// clustered so no two survive closer than `tol`, keeping at least the
/// deepest contact per face.
///
/// Errors with `PenetrationTooDeep` when any feature penetrates a face by
/// more than 10 * tol.
pub fn detect_contacts(
    object: &TriMesh,
    pose: &Pose,
    cavity: &CavitySpec,
    tol: f64,
) -> Result<Vec<ContactPoint>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(
            "contact tolerance must be positive".into(),
        ));
    }
    let world: Vec<Vector3<f64>> = object
        .vertices
        .iter()
        .map(|v| pose.apply_point(&Vector3::from_column_slice(v)))
        .collect();
    let rim_z = cavity.rim_z();
    let apex = cavity.apex_vec();
    let faces: [[Vector3<f64>; 3]; 3] = std::array::from_fn(|k| {
        [
            apex,
            cavity.rim_vertex((k + 1) % 3),
            cavity.rim_vertex((k + 2) % 3),
        ]
    });
    let limit = 10.0 * tol;
    let mut candidates: Vec<ContactPoint> = Vec::new();

    for p in &world {
        for k in 0..3 {
            let s = cavity.faces[k].signed_distance(p);
            if s.abs() > limit && s > 0.0 {
                continue;
            }
            let n = cavity.faces[k].normal_vec();
            let proj = p - n * s;
            if !point_in_triangle(&proj, &faces[k], tol) {
                continue;
            }
            if s < -limit {
                return Err(Error::PenetrationTooDeep {
                    depth: -s,
                    limit,
                });
            }
            if s.abs() <= tol {
                candidates.push(ContactPoint {
                    position: [proj.x, proj.y, proj.z],
                    normal: cavity.faces[k].normal,
                    face_id: ContactFace::Face(k as u8),
                    penetration: -s,
                });
            }
        }
        // Membrane plane outside the rim triangle.
        if !cavity.xy_in_rim_triangle(p.x, p.y, -tol) {
            let dz = p.z - rim_z;
            if dz < -limit {
                return Err(Error::PenetrationTooDeep {
                    depth: -dz,
                    limit,
                });
            }
            if dz.abs() <= tol {
                candidates.push(ContactPoint {
                    position: [p.x, p.y, rim_z],
                    normal: [0.0, 0.0, 1.0],
                    face_id: ContactFace::Rim,
                    penetration: -dz,
                });
            }
        }
    }

    // Edge features: object edges against face triangles and rim edges.
    let rim_edges: [(Vector3<f64>, Vector3<f64>); 3] = std::array::from_fn(|k| {
        (cavity.rim_vertex(k), cavity.rim_vertex((k + 1) % 3))
    });
    for (ia, ib) in object.edges() {
        let (a, b) = (world[ia as usize], world[ib as usize]);
        for k in 0..3 {
            let (on_seg, on_tri, dist) = segment_triangle_closest(&a, &b, &faces[k]);
            let s = cavity.faces[k].signed_distance(&on_seg);
            if dist <= tol {
                candidates.push(ContactPoint {
                    position: [on_tri.x, on_tri.y, on_tri.z],
                    normal: cavity.faces[k].normal,
                    face_id: ContactFace::Face(k as u8),
                    penetration: -s,
                });
            } else if s < -limit && point_in_triangle(&(on_seg - cavity.faces[k].normal_vec() * s), &faces[k], tol)
            {
                return Err(Error::PenetrationTooDeep { depth: -s, limit });
            }
        }
        for (ra, rb) in &rim_edges {
            let (on_obj, on_rim, dist) = segment_segment_closest(&a, &b, ra, rb);
            if dist <= tol {
                candidates.push(ContactPoint {
                    position: [on_rim.x, on_rim.y, on_rim.z],
                    normal: [0.0, 0.0, 1.0],
                    face_id: ContactFace::Rim,
                    penetration: rim_z - on_obj.z,
                });
            }
        }
    }

    // Cluster: deepest first, minimum spacing tol, then make sure every
    // touched face keeps its deepest representative.
    candidates.sort_by(|a, b| {
        b.penetration
            .partial_cmp(&a.penetration)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.position.partial_cmp(&b.position).unwrap())
    });
    let mut kept: Vec<ContactPoint> = Vec::new();
    for c in &candidates {
        let pos = c.position_vec();
        if kept
            .iter()
            .all(|k| (k.position_vec() - pos).norm() >= tol)
        {
            kept.push(c.clone());
        }
    }
    for c in &candidates {
        if !kept.iter().any(|k| k.face_id == c.face_id) {
            kept.push(c.clone());
        }
    }
    kept.sort_by(|a, b| {
        face_rank(a.face_id)
            .cmp(&face_rank(b.face_id))
            .then_with(|| a.position.partial_cmp(&b.position).unwrap())
    });
    Ok(kept)
}

fn face_rank(f: ContactFace) -> u8 {
    match f {
        ContactFace::Face(k) => k,
        ContactFace::Rim => 3,
    }
}

/// Barycentric point-in-triangle with tolerance, in the triangle's plane.
fn point_in_triangle(p: &Vector3<f64>, tri: &[Vector3<f64>; 3], tol: f64) -> bool {
    let (a, b, c) = (tri[0], tri[1], tri[2]);
    let v0 = b - a;
    let v1 = c - a;
    let v2 = p - a;
    let d00 = v0.dot(&v0);
    let d01 = v0.dot(&v1);
    let d11 = v1.dot(&v1);
    let d20 = v2.dot(&v0);
    let d21 = v2.dot(&v1);
    let denom = d00 * d11 - d01 * d01;
    if denom.abs() < 1e-18 {
        return false;
    }
    let v = (d11 * d20 - d01 * d21) / denom;
    let w = (d00 * d21 - d01 * d20) / denom;
    let scale = d00.max(d11).sqrt().max(1e-9);
    let slack = tol / scale;
    v >= -slack && w >= -slack && v + w <= 1.0 + slack
}

/// Closest points between a segment and a triangle: (on segment, on
/// triangle, distance).
fn segment_triangle_closest(
    a: &Vector3<f64>,
    b: &Vector3<f64>,
    tri: &[Vector3<f64>; 3],
) -> (Vector3<f64>, Vector3<f64>, f64) {
    let mut best = (Vector3::zeros(), Vector3::zeros(), f64::INFINITY);
    // Segment endpoints and samples against the triangle plane region.
    for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let p = a + (b - a) * t;
        let q = closest_on_triangle(&p, tri);
        let d = (p - q).norm();
        if d < best.2 {
            best = (p, q, d);
        }
    }
    // Segment against each triangle edge.
    for e in 0..3 {
        let (ta, tb) = (tri[e], tri[(e + 1) % 3]);
        let (ps, qs, d) = segment_segment_closest(a, b, &ta, &tb);
        if d < best.2 {
            best = (ps, qs, d);
        }
    }
    best
}

fn closest_on_triangle(p: &Vector3<f64>, tri: &[Vector3<f64>; 3]) -> Vector3<f64> {
    let (a, b, c) = (tri[0], tri[1], tri[2]);
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

/// Closest points between two segments: (on first, on second, distance).
fn segment_segment_closest(
    p1: &Vector3<f64>,
    q1: &Vector3<f64>,
    p2: &Vector3<f64>,
    q2: &Vector3<f64>,
) -> (Vector3<f64>, Vector3<f64>, f64) {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.dot(&d1);
    let e = d2.dot(&d2);
    let f = d2.dot(&r);
    let (mut s, mut t);
    if a <= 1e-18 && e <= 1e-18 {
        s = 0.0;
        t = 0.0;
    } else if a <= 1e-18 {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= 1e-18 {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            s = if denom.abs() > 1e-18 {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            t = (b * s + f) / e;
            if t < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            }
        }
    }
    let c1 = p1 + d1 * s;
    let c2 = p2 + d2 * t;
    (c1, c2, (c1 - c2).norm())
}

/// Cone-edge wrenches for one contact: `k` unit force directions tilted
/// `atan(mu)` off the normal (a single normal force when mu = 0), with
/// torques about `com` divided by `rho`.
pub fn friction_cone(
    contact: &ContactPoint,
    mu: f64,
    k: usize,
    com: &Vector3<f64>,
    rho: f64,
) -> Result<WrenchSet> {
    if mu < 0.0 {
        return Err(Error::InvalidParameter("negative friction".into()));
    }
    if mu > 0.0 && k < 3 {
        return Err(Error::InvalidParameter(format!(
            "friction cone needs at least 3 edges, got {k}"
        )));
    }
    if !(rho > 0.0) {
        return Err(Error::InvalidParameter("moment scale must be positive".into()));
    }
    let n = contact.normal_vec();
    let pos = contact.position_vec();
    let wrench_of = |f: Vector3<f64>| -> WrenchVector {
        let torque = (pos - com).cross(&f) / rho;
        WrenchVector {
            force: [f.x, f.y, f.z],
            torque: [torque.x, torque.y, torque.z],
        }
    };
    let vertices = if mu == 0.0 {
        vec![wrench_of(n)]
    } else {
        let t1 = orthogonal_unit(&n);
        let t2 = n.cross(&t1);
        (0..k)
            .map(|j| {
                let ang = 2.0 * std::f64::consts::PI * j as f64 / k as f64;
                let f = (n + (t1 * ang.cos() + t2 * ang.sin()) * mu).normalize();
                wrench_of(f)
            })
            .collect()
    };
    Ok(WrenchSet {
        contact: contact.clone(),
        vertices,
    })
}

/// Gravity wrench referenced at the COM: straight-down force, zero torque.
pub fn gravity_wrench(mass_kg: f64, gravity: f64) -> Result<WrenchVector> {
    if !(mass_kg > 0.0) {
        return Err(Error::InvalidParameter("mass must be positive".into()));
    }
    Ok(WrenchVector {
        force: [0.0, 0.0, -mass_kg * gravity],
        torque: [0.0, 0.0, 0.0],
    })
}
