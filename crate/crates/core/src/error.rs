use thiserror::Error;

/// Errors raised while building or solving an HDG problem.
#[derive(Debug, Error)]
pub enum HdgError {
    #[error("Young's modulus must be positive, got {0}")]
    InvalidYoungsModulus(f64),
    #[error("Poisson ratio {0} is at or beyond the incompressible limit 0.5")]
    IncompressibleLimit(f64),
    #[error("Poisson ratio {0} is negative (auxetic materials are not supported)")]
    PoissonOutOfRange(f64),
    #[error("unsupported spatial dimension {0}")]
    UnsupportedDimension(usize),
    #[error("normal vector has length {0}, expected a unit vector")]
    NonUnitNormal(f64),
    #[error("mesh refinement must be at least 1")]
    InvalidRefinement,
    #[error("unsupported polynomial degree {0}")]
    UnsupportedDegree(usize),
    #[error("unsupported quadrature order {0}")]
    UnsupportedQuadratureOrder(usize),
    #[error("element {element} is inverted or degenerate (det J = {det:e})")]
    InvertedElement { element: usize, det: f64 },
    #[error("face ({0}, {1}) is shared by more than two elements")]
    NonManifoldFace(usize, usize),
    #[error("node index {node} out of range in element {element}")]
    NodeOutOfRange { element: usize, node: usize },
    #[error("the Dirichlet boundary is empty")]
    EmptyDirichletBoundary,
    #[error("local system of element {element} is singular; check the stabilisation parameter")]
    SingularLocalSystem { element: usize },
    #[error("global trace system factorisation failed: {0}")]
    SingularGlobalSystem(String),
    #[error("trace DOF index {index} out of range for a system of size {size}")]
    DofOutOfRange { index: usize, size: usize },
    #[error("trace data missing on face {face} of element {element}")]
    MissingTrace { element: usize, face: usize },
    #[error("post-process problem on element {element} is degenerate")]
    DegenerateElement { element: usize },
    #[error("stabilisation parameter must be positive, got {0}")]
    InvalidStabilisation(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HdgError>;
