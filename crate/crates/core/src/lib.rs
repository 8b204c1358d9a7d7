//! Obstruction integrals, cone harmonics, topology bookkeeping and gluing
//! diagnostics for desingularizations of Einstein 4-orbifolds.

pub mod ale_library;
pub mod annulus_solver;
pub mod cone_geometry;
pub mod curvature;
pub mod error;
pub mod gluing_lab;
pub mod linalg;
pub mod obstruction_engine;
pub mod poly;
pub mod sphere_harmonics;
pub mod topology_checker;

pub use cone_geometry::{GroupAction, GroupSpec, HomogeneousTensorField, QuadraticJet, TensorKind};
pub use curvature::{AlgebraicCurvature, CurvatureOperator};
pub use error::{GeomError, NumError, TopologyError};
