//! Planning library for regrasp placement on a deformable jamming jig.
//!
//! Given a rigid part mesh and a parametric triangular-pyramid cavity, the
//! library finds stable placement poses (wrench-space and support-polygon
//! criteria), counts collision-free gripper approaches, optimizes the
//! stamping depth that trades the two off, and emits the placement/dropping
//! poses plus a printable stamp-tool mesh. A registration module scores
//! generated cavity geometry against the target via RANSAC + ICP.
//!
//! Units: mm for lengths, N for forces, kg for masses. All types are
//! immutable after construction and all operations are pure functions, so
//! independent evaluations can run concurrently.

pub mod cavity;
pub mod contact;
pub mod error;
pub mod geom;

pub use error::{Error, Result};
pub use geom::{Pose, PointCloud, TriMesh};
