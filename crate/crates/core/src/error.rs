//! Error types shared by all engine modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, GeomError>;

#[derive(Debug, Clone, Error)]
pub enum GeomError {
    #[error("metric is singular or ill-conditioned at {point:?}: {detail}")]
    SingularMetric { point: Vec<f64>, detail: String },

    #[error("point {point:?} (or a stencil neighbor) leaves the chart domain of `{chart}`")]
    OutOfDomain { chart: String, point: Vec<f64> },

    #[error("plane is degenerate: Gram determinant {gram} below threshold")]
    DegeneratePlane { gram: f64 },

    #[error("frame is not orthonormal: max deviation {deviation}")]
    NonOrthonormalFrame { deviation: f64 },

    #[error("pushforward rank {rank} is below the required minimum {required}")]
    RankDeficient { rank: usize, required: usize },

    #[error("map is not Riemannian at this point: singular value {value} deviates from 1 by {deviation}")]
    IsometryViolation { value: f64, deviation: f64 },

    #[error("ambient structure violates its defining identities: {0}")]
    StructureViolation(String),

    #[error("unknown space-form family `{0}`")]
    UnknownFamily(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("ξ is neither in the range nor in its orthogonal complement (projections {in_range}, {in_perp})")]
    XiMixed { in_range: f64, in_perp: f64 },

    #[error("declared ξ position `{declared}` disagrees with the computed position `{computed}`")]
    XiCaseMismatch { declared: String, computed: String },

    #[error("map is not harmonic: ‖τ‖² = {tension_norm_sq}")]
    NotHarmonic { tension_norm_sq: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
