use thiserror::Error;

/// Errors from cone geometry and jet handling.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("invalid group parameters: {0}")]
    BadParameters(String),
    #[error("generator {index} is not orthogonal (|G^T G - I| = {error:.3e})")]
    NotOrthogonal { index: usize, error: f64 },
    #[error("group did not close within {0} elements")]
    NotFinite(usize),
    #[error("action is not free: fixed unit vector {fixed:?}")]
    NotFree { fixed: [f64; 4] },
    #[error("tensor kind mismatch: {0}")]
    KindMismatch(String),
    #[error("curvature is not Einstein: |Ric0| = {norm:.3e}")]
    NotEinstein { norm: f64 },
    #[error("window endpoint {0} is an exceptional value")]
    EndpointExceptional(f64),
    #[error("degree {degree} exceeds cap {cap}")]
    DegreeCap { degree: i32, cap: i32 },
    #[error("field is not invariant under group element {element} (defect {defect:.3e})")]
    NotInvariant { element: usize, defect: f64 },
    #[error("{0}")]
    Invalid(String),
}

/// Errors from numerical routines (quadrature, solvers, studies).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumError {
    #[error("{what} = {value} outside admissible range: {range}")]
    OutOfRange { what: String, value: f64, range: String },
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("grid under-resolved: {0}")]
    Resolution(String),
    #[error("non-monotone data: {0}")]
    NonMonotone(String),
    #[error("iteration diverged inside certified ball: {0}")]
    Diverged(String),
    #[error("{0}")]
    Geometry(#[from] GeomError),
    #[error("{0}")]
    Invalid(String),
}

/// Errors from desingularization-tree bookkeeping.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("node {node}: group at infinity {child} does not match {point_group} at {parent}:{point}")]
    GroupMismatch { node: String, child: String, parent: String, point: String, point_group: String },
    #[error("unknown parent {0}")]
    UnknownParent(String),
    #[error("{parent} has no singular point {point}")]
    UnknownPoint { parent: String, point: String },
    #[error("singular point {parent}:{point} is used twice")]
    PointReused { parent: String, point: String },
    #[error("duplicate node label {0}")]
    DuplicateNode(String),
    #[error("node {node}: relative scale {scale} outside (0, 1)")]
    BadScale { node: String, scale: f64 },
    #[error("piece {piece}: {reason}")]
    BadPiece { piece: String, reason: String },
    #[error("unknown piece {0}")]
    UnknownPiece(String),
    #[error("fully smoothed tree has non-integral (chi, tau) = ({chi}, {tau})")]
    NonIntegral { chi: String, tau: String },
    #[error("slack decreased from {root} to {total}: inconsistent piece data")]
    Violation { root: String, total: String },
    #[error("{0}")]
    Inconsistent(String),
    #[error("{0}")]
    Numeric(#[from] NumError),
}
