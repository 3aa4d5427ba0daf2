use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NonPositiveDefinite { row: usize, pivot: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("singular pivot at row {row}")]
    SingularPivot { row: usize },

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mass matrix is singular")]
    SingularMass,

    #[error("Newton iteration failed at time step {step} (residual {residual:e})")]
    NewtonDivergence { step: usize, residual: f64 },

    #[error("cannot take {requested} snapshots from {available} time levels")]
    BadCount { requested: usize, available: usize },

    #[error("requested {requested} modes but numerical rank is {rank}")]
    RankDeficient { requested: usize, rank: usize },

    #[error("POD basis and FE operators live on different meshes")]
    MeshMismatch,

    #[error("trajectory grid does not match the solver configuration: {0}")]
    GridMismatch(String),

    #[error("eigenvalues {k} and {j} are nearly degenerate (gap {gap:e})")]
    NearDegenerateEigenvalue { k: usize, j: usize, gap: f64 },

    #[error("improved basis is degenerate: no sensitivity column survived orthonormalization")]
    DegenerateBasis,

    #[error("sparse grid would contain {nodes} nodes, above the cap of {cap}")]
    Overflow { nodes: usize, cap: usize },

    #[error("collocation node {node}: {source}")]
    AtNode {
        node: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("Monte Carlo sample {index}: {source}")]
    AtSample {
        index: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_node(node: usize, err: Error) -> Self {
        Error::AtNode {
            node,
            source: Box::new(err),
        }
    }

    pub(crate) fn at_sample(index: u64, err: Error) -> Self {
        Error::AtSample {
            index,
            source: Box::new(err),
        }
    }
}
