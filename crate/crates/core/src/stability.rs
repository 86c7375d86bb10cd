//! Placement stability: the 6-D wrench space from per-contact cone-edge
//! wrenches, gravity containment, the support-polygon fallback, and the
//! two-branch stability margin.
//!
//! Branch ordering: the wrench test runs first; the geometric test is only
//! consulted when the gravity wrench is not strictly inside the wrench
//! space. A verdict is Unstable exactly when its margin is non-positive.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::cavity::CavitySpec;
use crate::contact::{detect_contacts, friction_cone, gravity_wrench, ContactPoint, WrenchSet};
use crate::error::{Error, Result};
use crate::geom::mesh::TriMesh;
use crate::geom::polytope::{
    boundary_distance, convex_hull_embedded, sum_vertex_sets, ConvexPolytope,
};
use crate::geom::pose::Pose;
use crate::planner::{MomentScale, PlannerConfig};

/// Contact footprint projected onto the horizontal support plane.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SupportPolygon {
    /// World z of the support plane (through the lowest contact).
    pub plane_z: f64,
    /// Convex polygon, counter-clockwise, mm.
    pub vertices: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictKind {
    WrenchStable,
    GeometricStable,
    Unstable,
}

/// Outcome of the stable-placement-pose test.
#[derive(Debug, Clone)]
pub struct StabilityVerdict {
    pub kind: VerdictKind,
    /// N for the wrench branch, mm for the geometric branch; negative
    /// (signed distance) when unstable.
    pub margin: f64,
    pub wrench_hull: Option<ConvexPolytope>,
    pub support_polygon: Option<SupportPolygon>,
    pub contacts: Vec<ContactPoint>,
}

/// Counts summarizing a wrench hull for reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HullStats {
    pub vertex_count: usize,
    pub halfspace_count: usize,
    pub affine_dim: usize,
}

/// Serializable view of a verdict: branch, margin, contacts, hull stats.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerdictReport {
    pub kind: VerdictKind,
    pub margin: f64,
    pub contacts: Vec<ContactPoint>,
    pub wrench_hull: Option<HullStats>,
    pub support_polygon: Option<SupportPolygon>,
}

impl StabilityVerdict {
    pub fn report(&self) -> VerdictReport {
        VerdictReport {
            kind: self.kind,
            margin: self.margin,
            contacts: self.contacts.clone(),
            wrench_hull: self.wrench_hull.as_ref().map(|h| HullStats {
                vertex_count: h.vertex_count(),
                halfspace_count: h.halfspace_count(),
                affine_dim: h.affine_dim(),
            }),
            support_polygon: self.support_polygon.clone(),
        }
    }
}

/// 6-D convex hull of the Minkowski sum of the contact wrench sets,
/// identical to the hull over all one-vertex-per-set tuples.
///
/// When the tuple count exceeds `cap` the contacts are first reduced to
/// the deepest contact per cavity face (at most four sets); if the bound
/// is still exceeded the call fails with `CapExceeded`.
pub fn wrench_space(sets: &[WrenchSet]) -> Result<ConvexPolytope> {
    wrench_space_capped(sets, crate::geom::polytope::DEFAULT_MINKOWSKI_CAP)
}

pub fn wrench_space_capped(sets: &[WrenchSet], cap: u64) -> Result<ConvexPolytope> {
    if sets.is_empty() {
        return Err(Error::DegenerateInput("no contact wrench sets".into()));
    }
    let tuple_count = |sets: &[&WrenchSet]| -> u128 {
        sets.iter()
            .fold(1u128, |p, s| p.saturating_mul(s.vertices.len() as u128))
    };
    let all: Vec<&WrenchSet> = sets.iter().collect();
    let chosen: Vec<&WrenchSet> = if tuple_count(&all) > cap as u128 {
        let mut per_face: std::collections::BTreeMap<u8, &WrenchSet> = Default::default();
        for s in sets {
            let key = match s.contact.face_id {
                crate::contact::ContactFace::Face(k) => k,
                crate::contact::ContactFace::Rim => 3,
            };
            let deeper = per_face
                .get(&key)
                .map(|cur| s.contact.penetration > cur.contact.penetration)
                .unwrap_or(true);
            if deeper {
                per_face.insert(key, s);
            }
        }
        let reduced: Vec<&WrenchSet> = per_face.into_values().collect();
        if tuple_count(&reduced) > cap as u128 {
            return Err(Error::CapExceeded {
                required: tuple_count(&reduced),
                cap,
            });
        }
        reduced
    } else {
        all
    };

    let vertex_sets: Vec<Vec<Vec<f64>>> = chosen
        .iter()
        .map(|s| s.vertices.iter().map(|w| w.as_vec6()).collect())
        .collect();
    let set_refs: Vec<&[Vec<f64>]> = vertex_sets.iter().map(|v| v.as_slice()).collect();
    let summed = sum_vertex_sets(&set_refs, 6, cap)?;
    convex_hull_embedded(&summed, 6)
}

/// Object COM in world coordinates, including any configured offset.
pub fn object_com_world(object: &TriMesh, pose: &Pose, cfg: &PlannerConfig) -> Vector3<f64> {
    let local = object.centroid() + Vector3::from_column_slice(&cfg.com_offset);
    pose.apply_point(&local)
}

/// The stable-placement-pose test.
///
/// Detects contacts, builds the wrench space, and checks whether the
/// gravity wrench lies strictly inside it (WrenchStable, margin = distance
/// to the hull boundary in N). Otherwise projects the contacts onto the
/// horizontal support plane through the lowest contact and checks the COM
/// projection against that polygon (GeometricStable, margin in mm;
/// Unstable carries the negative signed distance).
pub fn spp_test(
    object: &TriMesh,
    pose: &Pose,
    cavity: &CavitySpec,
    cfg: &PlannerConfig,
) -> Result<StabilityVerdict> {
    let contacts = detect_contacts(object, pose, cavity, cfg.contact_tol)?;
    if contacts.is_empty() {
        return Err(Error::NoContacts);
    }
    let com = object_com_world(object, pose, cfg);
    let rho = match cfg.moment_scale {
        MomentScale::BoundingSphereRadius => object.bounding_sphere_radius(),
        MomentScale::Explicit(v) => v,
    };
    let sets: Vec<WrenchSet> = contacts
        .iter()
        .map(|c| friction_cone(c, cfg.mu_cavity, cfg.cone_edges, &com, rho))
        .collect::<Result<_>>()?;
    let hull = wrench_space_capped(&sets, cfg.minkowski_cap)?;
    let w_g = gravity_wrench(cfg.mass_kg, cfg.gravity)?;
    let wrench_margin = boundary_distance(&hull, &w_g.as_vec6())?;
    if wrench_margin > 0.0 {
        return Ok(StabilityVerdict {
            kind: VerdictKind::WrenchStable,
            margin: wrench_margin,
            wrench_hull: Some(hull),
            support_polygon: None,
            contacts,
        });
    }

    let plane_z = contacts
        .iter()
        .map(|c| c.position[2])
        .fold(f64::INFINITY, f64::min);
    let xy: Vec<Vec<f64>> = contacts
        .iter()
        .map(|c| vec![c.position[0], c.position[1]])
        .collect();
    let footprint = convex_hull_embedded(&xy, 2)?;
    let geo_margin = boundary_distance(&footprint, &[com.x, com.y])?;
    let support_polygon = if footprint.affine_dim() == 2 {
        Some(SupportPolygon {
            plane_z,
            vertices: footprint
                .vertices()
                .iter()
                .map(|v| [v[0], v[1]])
                .collect(),
        })
    } else {
        None
    };
    let kind = if geo_margin > 0.0 {
        VerdictKind::GeometricStable
    } else {
        VerdictKind::Unstable
    };
    Ok(StabilityVerdict {
        kind,
        margin: geo_margin,
        wrench_hull: Some(hull),
        support_polygon,
        contacts,
    })
}

/// The margin field of a verdict (Eq. 2): for the wrench branch the minimum
/// over hull facets of (offset - normal . w_g) / |normal|, for the
/// geometric branch the signed distance of the COM projection.
pub fn stability_margin(verdict: &StabilityVerdict) -> f64 {
    verdict.margin
}
