use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown orbit family `{0}`")]
    UnknownFamily(String),

    #[error("family `{family}` is not defined for dimension {dim}")]
    DimensionMismatch { family: String, dim: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("coefficient {0} is outside the family mask")]
    OutsideMask(String),

    #[error("elliptic coordinates undefined: {0}")]
    EllipticCoordinates(String),

    #[error("degenerate torus: frequency system has condition number {condition:.3e}")]
    DegenerateTorus { condition: f64 },

    #[error("non-finite residual encountered: {0}")]
    NonFinite(String),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("no section crossing found: {0}")]
    NoCrossing(String),

    #[error("empty point set")]
    EmptySet,

    #[error("unsupported schema version {found} (expected {expected})")]
    Schema { found: u32, expected: u32 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
