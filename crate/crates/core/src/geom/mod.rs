//! Foundational geometry: rigid poses, triangle meshes, point clouds,
//! convex hulls in 2-D and general dimension, and point-polytope queries.

pub mod cloud;
pub mod hull;
pub mod io;
pub mod mesh;
pub mod mnp;
pub mod polytope;
pub mod pose;

pub use cloud::PointCloud;
pub use mesh::{box_mesh, cylinder_mesh, sphere_mesh, TriMesh};
pub use polytope::{
    boundary_distance, contains, convex_hull, convex_hull_embedded, minkowski_sum,
    minkowski_sum_capped, ConvexPolytope, Halfspace, DEFAULT_MINKOWSKI_CAP,
};
pub use pose::{compose, pose_error, rotation_between, Pose};
