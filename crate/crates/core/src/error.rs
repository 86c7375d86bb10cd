use thiserror::Error;

/// Errors produced by the planning library.
#[derive(Debug, Error)]
pub enum Error {
    /// Input point set does not span the requested dimension.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// A vector or polytope was used with the wrong ambient dimension.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// A vertex-enumeration bound was hit (Minkowski sums, wrench spaces).
    #[error("enumeration cap exceeded: {required} vertex tuples, cap {cap}")]
    CapExceeded { required: u128, cap: u64 },

    /// Requested cavity axis angles cannot form an orthonormal frame.
    #[error("infeasible cavity orientation: {0}")]
    InfeasibleOrientation(String),

    /// Cavity rim does not fit on the usable membrane area.
    #[error("cavity rim radius {rim_radius:.2} mm exceeds jig lateral extent {lateral_extent:.2} mm")]
    CavityExceedsJig { rim_radius: f64, lateral_extent: f64 },

    /// Object pose penetrates the cavity far beyond the contact tolerance.
    #[error("object penetrates cavity by {depth:.3} mm (limit {limit:.3} mm); pose is invalid")]
    PenetrationTooDeep { depth: f64, limit: f64 },

    /// Placement query on a pose that does not touch the cavity at all.
    #[error("object does not contact the cavity")]
    NoContacts,

    /// No resting hypothesis passed the stability test.
    #[error("no stable placement pose found")]
    NoStablePose,

    /// RANSAC could not find a transform with enough inlier support.
    #[error("registration found no consensus (best inlier fraction {inlier_fraction:.3})")]
    NoConsensus { inlier_fraction: f64 },

    /// ICP error increased for too many consecutive iterations.
    #[error("ICP diverged after {iterations} iterations")]
    Diverged { iterations: usize },

    /// Mesh violates a structural invariant (bad index, zero-area triangle).
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    /// Rotation matrix is not orthonormal within tolerance.
    #[error("invalid pose: {0}")]
    InvalidPose(String),

    /// A scalar or configuration value is out of its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    /// File contents could not be parsed (STL, OBJ, xyz).
    #[error("parse error: {0}")]
    Parse(String),

    /// Internal numerical failure that survived all retries.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
