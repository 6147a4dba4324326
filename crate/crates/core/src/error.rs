use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("grid error: {0}")]
    Grid(String),
    #[error("ingestion error: {0}")]
    Ingestion(String),
    #[error("capability error: {0}")]
    Capability(String),
    #[error("assembly error: {0}")]
    Assembly(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("bound violated: {0}")]
    Bound(String),
    #[error("window error: {0}")]
    Window(String),
    #[error("near-singular solve: {0}")]
    NearSingular(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error("extraction failure: {0}")]
    Extraction(String),
    #[error("correspondence violated: {0}")]
    Correspondence(String),
    #[error("instability: {0}")]
    Instability(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
