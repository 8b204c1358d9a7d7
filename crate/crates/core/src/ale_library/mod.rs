//! Concrete ALE models and their invariants.

pub mod asymptotics;
pub mod radial;

pub use asymptotics::{kronheimer_leading, o4_basis, DeformationAsymptotics};
pub use radial::{warped_curvature, Closure, RadialCurvature, RadialMetric};
pub mod invariants;

pub use invariants::{eguchi_hanson_profile, gauss_bonnet_chi, scaling_deformation, signature_tau, ScalingDeformation};
pub mod model;

pub use model::{AleCatalog, AleModel, AleTag, Provenance, TableEntry};
