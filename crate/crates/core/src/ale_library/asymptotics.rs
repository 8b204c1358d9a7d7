//! Degree `-4` leading terms of ALE metrics and of their deformations.
//!
//! Symmetric products follow `a.b = (a b + b a)/2`. Indices of the diagonal
//! term follow the `alpha_1`-distinguished convention: `j` is the index that
//! carries the `+` sign.

use nalgebra::{Matrix3, Matrix4};
use serde::Serialize;

use crate::cone_geometry::coframe::frame_product;
use crate::cone_geometry::field::{HomogeneousTensorField, TensorKind};
use crate::cone_geometry::group::GroupAction;
use crate::error::GeomError;

/// `rho^4` times the diagonal tensor `d rho^2 + rho^2 alpha_j^2 - rho^2 alpha_k^2 - rho^2 alpha_l^2`,
/// stored with radial exponent `-6`.
pub fn diagonal_term(j: usize) -> HomogeneousTensorField {
    assert!((1..=3).contains(&j));
    let mut acc = frame_product(0, 0, -6);
    for i in 1..=3 {
        let t = frame_product(i, i, -6);
        acc = if i == j { acc.add(&t) } else { acc.sub(&t) };
    }
    acc
}

/// `(rho^2 alpha_a . alpha_b + sign * rho d rho . alpha_c) / rho^4`.
pub fn mixed_term(a: usize, b: usize, c: usize, sign: f64) -> HomogeneousTensorField {
    frame_product(a, b, -6).add(&frame_product(0, c, -6).scale(sign))
}

/// Labelled degree `-4` deformation terms.
#[derive(Clone, Debug, Serialize)]
pub struct DeformationAsymptotics {
    pub labels: Vec<String>,
    #[serde(skip)]
    pub fields: Vec<HomogeneousTensorField>,
}

/// Trace, divergence, homogeneity and invariance defects of one field.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TtReport {
    pub trace: f64,
    pub divergence: f64,
    pub homogeneity: f64,
    pub invariance: f64,
}

impl TtReport {
    pub fn max(&self) -> f64 {
        self.trace.max(self.divergence).max(self.homogeneity).max(self.invariance)
    }
}

impl DeformationAsymptotics {
    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// Sampled checks of the defining properties.
    pub fn check(&self, group: &GroupAction, samples: &[[f64; 4]]) -> Vec<TtReport> {
        self.fields
            .iter()
            .map(|f| {
                let tr = f.trace();
                let dv = f.divergence();
                let mut t: f64 = 0.0;
                let mut d: f64 = 0.0;
                for x in samples {
                    t = t.max(tr.eval_scalar(x).abs());
                    d = d.max(dv.eval_covector(x).amax());
                }
                TtReport {
                    trace: t,
                    divergence: d,
                    homogeneity: f.homogeneity_defect(samples, &[0.5, 2.0, 3.0]),
                    invariance: f.invariance_defect(group, samples).1,
                }
            })
            .collect()
    }

    /// Fails unless every element is traceless, divergence free, homogeneous
    /// and invariant to `tol`.
    pub fn verify(&self, group: &GroupAction, samples: &[[f64; 4]], tol: f64) -> Result<(), GeomError> {
        for (i, r) in self.check(group, samples).iter().enumerate() {
            if r.invariance > tol {
                return Err(GeomError::NotInvariant { element: i, defect: r.invariance });
            }
            if r.max() > tol {
                return Err(GeomError::Invalid(format!("{}: not transverse traceless ({:.3e})", self.labels[i], r.max())));
            }
        }
        Ok(())
    }

    /// Frame components `O(e_a, e_b)` of element `i` at `x`.
    pub fn frame_values(&self, i: usize, x: &[f64; 4]) -> Matrix4<f64> {
        let cf = crate::cone_geometry::coframe::InvariantCoframe::at(x);
        cf.frame_components(&self.fields[i].eval_sym2(x))
    }
}

/// The three leading terms of the Eguchi-Hanson deformations:
///
/// ```text
/// O_1 = 2 (d rho^2 + rho^2 alpha_1^2 - rho^2 alpha_2^2 - rho^2 alpha_3^2) / rho^4
/// O_2 = (rho^2 alpha_1 . alpha_2 + rho d rho . alpha_3) / rho^4
/// O_3 = (rho^2 alpha_1 . alpha_3 - rho d rho . alpha_2) / rho^4
/// ```
pub fn o4_basis() -> DeformationAsymptotics {
    DeformationAsymptotics {
        labels: vec!["O4_1".into(), "O4_2".into(), "O4_3".into()],
        fields: vec![diagonal_term(1).scale(2.0), mixed_term(1, 2, 3, 1.0), mixed_term(1, 3, 2, -1.0)],
    }
}

/// Leading term `h_zeta` of a Kronheimer metric, given the Gram matrix of the
/// triple `(zeta_1, zeta_2, zeta_3)`.
pub fn kronheimer_from_gram(gram: &Matrix3<f64>) -> HomogeneousTensorField {
    let mut acc = HomogeneousTensorField::zero(TensorKind::Sym2, -4);
    for j in 1..=3 {
        acc = acc.sub(&diagonal_term(j).scale(gram[(j - 1, j - 1)]));
    }
    acc = acc.sub(&mixed_term(1, 2, 3, -1.0).scale(gram[(0, 1)]));
    acc = acc.sub(&mixed_term(1, 3, 2, 1.0).scale(gram[(0, 2)]));
    acc = acc.sub(&mixed_term(2, 3, 1, -1.0).scale(gram[(1, 2)]));
    acc
}

/// `h_zeta` for `zeta in R^{3k}`, laid out as `(zeta_1, zeta_2, zeta_3)`.
pub fn kronheimer_leading(zeta: &[f64]) -> Result<HomogeneousTensorField, GeomError> {
    if zeta.is_empty() || zeta.len() % 3 != 0 {
        return Err(GeomError::BadParameters(format!("zeta length {} is not a positive multiple of 3", zeta.len())));
    }
    let k = zeta.len() / 3;
    let part = |i: usize| &zeta[i * k..(i + 1) * k];
    let gram = Matrix3::from_fn(|i, j| part(i).iter().zip(part(j)).map(|(a, b)| a * b).sum());
    Ok(kronheimer_from_gram(&gram))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone_geometry::group::{make_group, GroupSpec};
    use crate::sphere_harmonics::sample_points;

    #[test]
    fn basis_is_transverse_traceless() {
        let z2 = make_group(&GroupSpec::CyclicSu2 { n: 2 }).unwrap();
        let pts = sample_points(10, 7);
        let basis = o4_basis();
        for r in basis.check(&z2, &pts) {
            assert!(r.max() < 1e-10, "{r:?}");
        }
        for f in &basis.fields {
            assert_eq!(f.degree(), -4);
        }
    }

    #[test]
    fn radial_value_of_first_element() {
        let basis = o4_basis();
        let x = [0.6, 0.0, 0.8, 0.0];
        assert!((basis.frame_values(0, &x)[(0, 0)] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn kronheimer_single_direction() {
        let h = kronheimer_leading(&[1.0, 0.0, 0.0]).unwrap();
        let target = o4_basis().fields[0].scale(-0.5);
        assert!(h.sub(&target).is_zero(1e-12));
        assert!(kronheimer_leading(&[0.0; 6]).unwrap().is_zero(0.0));
    }

    #[test]
    fn kronheimer_terms_are_tt() {
        let z2 = make_group(&GroupSpec::CyclicSu2 { n: 2 }).unwrap();
        let pts = sample_points(10, 3);
        let h = kronheimer_leading(&[0.3, -1.0, 0.5, 0.2, 0.7, -0.4]).unwrap();
        let d = DeformationAsymptotics { labels: vec!["h".into()], fields: vec![h] };
        assert!(d.check(&z2, &pts)[0].max() < 1e-10);
    }
}
