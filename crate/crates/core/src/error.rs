use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("inadmissible mesh parameters: {0}")]
    InadmissibleParams(String),
    #[error("malformed mesh: {0}")]
    InvalidMesh(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("mesh adaptation failed: {0}")]
    AdaptationFailed(String),
    #[error("degenerate triangle {0}")]
    DegenerateTriangle(usize),
    #[error("field does not belong to this mesh (mesh {mesh}, field {field})")]
    MeshFieldMismatch { mesh: u64, field: u64 },
    #[error("crack history inconsistent with mesh: {0}")]
    InconsistentHistory(String),
    #[error("singular system: {0}")]
    SingularSystem(String),
    #[error("conjugate gradient did not converge after {iters} iterations (relative residual {residual:e})")]
    NonConvergence { iters: usize, residual: f64 },
    #[error("healing precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("invalid material: {0}")]
    InvalidMaterial(String),
    #[error("line {line}: {key}: {reason}")]
    Parse {
        line: usize,
        key: String,
        reason: String,
    },
    #[error("invalid value for {key}: {reason}")]
    Validation { key: String, reason: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
