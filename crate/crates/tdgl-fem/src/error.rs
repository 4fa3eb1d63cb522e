use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh density M must be at least 1")]
    ZeroMeshDensity,

    #[error("unsupported element: {family} of degree {degree} in {dim}D")]
    UnsupportedElement {
        family: &'static str,
        degree: usize,
        dim: usize,
    },

    #[error("unsupported quadrature degree {degree} for {cell}")]
    UnsupportedQuadratureDegree { cell: &'static str, degree: usize },

    #[error("triplet index ({row}, {col}) out of range for {nrows}x{ncols} matrix")]
    TripletOutOfRange {
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },

    #[error("matrix is singular at pivot row {row}")]
    SingularMatrix { row: usize },

    #[error("sparse factorization failed: {0}")]
    Factorization(String),

    #[error("linear solve residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ResidualTooLarge { residual: f64, tol: f64 },

    #[error("functions live on different meshes")]
    MeshMismatch,

    #[error("invalid space pairing: sigma degree {sigma_degree}, vector degree {vector_degree}")]
    BadSpacePairing {
        sigma_degree: usize,
        vector_degree: usize,
    },

    #[error("solver failure at time level {level}: {source}")]
    StepFailed {
        level: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("constraint residual {residual:.3e} exceeds tolerance at time level {level}")]
    ConstraintViolated { level: usize, residual: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
