use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // geometry
    #[error("degenerate curve gradient at ({x:.6e}, {y:.6e})")]
    DegenerateGradient { x: f64, y: f64 },
    #[error("closest-point projection of ({x:.6e}, {y:.6e}) did not converge after {iterations} iterations")]
    ProjectionDiverged { x: f64, y: f64, iterations: usize },
    #[error("no curve intersection along ray from ({x:.6e}, {y:.6e}) in direction ({mx:.4}, {my:.4}) for t in [0, {t_max:.6e}]")]
    NoIntersection {
        x: f64,
        y: f64,
        mx: f64,
        my: f64,
        t_max: f64,
    },
    #[error("invalid curve parameters: {0}")]
    InvalidParameters(String),

    // mesh
    #[error("mesh is empty: no background triangle lies strictly inside the domain")]
    EmptyMesh,
    #[error("mesh is disconnected: {components} edge-connected components")]
    DisconnectedMesh { components: usize },
    #[error("meshing failed: {0}")]
    MeshingFailed(String),
    #[error("boundary edge {edge} maps onto both Dirichlet and Neumann parts of the boundary; regenerate the mesh with a vertex at the split point")]
    MixedEdge { edge: usize },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("mesh invariant violated: {0}")]
    InvariantViolation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),

    // paths
    #[error("normal ray from edge {edge} at theta={theta:.4} misses the curve within {t_max:.3e}")]
    RayMiss { edge: usize, theta: f64, t_max: f64 },
    #[error("crossing vertex paths could not be repaired: {pairs:?}")]
    CrossingUnrepairable { pairs: Vec<(usize, usize)> },
    #[error("transfer path on edge {edge} has length {ratio:.2} times the element diameter")]
    PathTooLong { edge: usize, ratio: f64 },
    #[error("induced chart of edge {edge} folds back on itself")]
    FoldBack { edge: usize },

    // hdg
    #[error("element {element} is degenerate (area {area:.3e})")]
    SingularElement { element: usize, area: f64 },
    #[error("interface edge {edge} is not contained in a single subdomain")]
    EdgeStraddlesInterface { edge: usize },
    #[error("singular system matrix: zero pivot near row {row} ({block})")]
    SingularMatrix { row: usize, block: String },
    #[error("linear solve residual {residual:.3e} exceeds tolerance {tolerance:.1e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    // analysis / cli
    #[error("unknown case label '{0}'")]
    UnknownCase(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// Process exit code for this error: 2 for usage/configuration problems,
    /// 1 for everything numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::UnknownCase(_) | Error::Config(_) => 2,
            _ => 1,
        }
    }
}
