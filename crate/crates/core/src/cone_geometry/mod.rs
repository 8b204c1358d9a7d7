//! Exact algebra on flat cones `R^4 / Gamma`.

pub mod coframe;
pub mod exceptional;
pub mod field;
pub mod group;
pub mod jet;

pub use coframe::InvariantCoframe;
pub use exceptional::{
    exceptional_values_vector, harmonic_sym2_dimensions, ExceptionalReport, ExceptionalValue, Sym2Filters,
};
pub use field::{HomogeneousTensorField, TensorKind};
pub use group::{make_group, GroupAction, GroupSpec};
pub use jet::{curvature_from_jet, jet_from_curvature, space_form_jet, QuadraticJet};

/// `B_e h = delta_e h + (1/2) d tr_e h` on a symmetric 2-tensor.
pub fn bianchi_apply(h: &HomogeneousTensorField) -> Result<HomogeneousTensorField, crate::error::GeomError> {
    if h.kind() != TensorKind::Sym2 {
        return Err(crate::error::GeomError::KindMismatch("Bianchi operator needs a symmetric 2-tensor".into()));
    }
    Ok(h.bianchi())
}
