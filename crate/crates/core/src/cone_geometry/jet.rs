use nalgebra::{DMatrix, Matrix4, Matrix6};
use serde::{Deserialize, Serialize};

use super::field::{euclidean_metric, HomogeneousTensorField, TensorKind};
use super::group::GroupAction;
use crate::curvature::{AlgebraicCurvature, CurvatureOperator};
use crate::error::GeomError;
use crate::linalg::least_squares;
use crate::poly::Poly;

pub type JetCoeffs = [[[[f64; 4]; 4]; 4]; 4];

/// Quadratic term `H2_ij(x) = T[i][j][k][l] x^k x^l` of a metric in normal
/// coordinates, with the Einstein constant of the ambient metric.
///
/// The normal-coordinate convention is `g_ij = d_ij - (1/3) R_ikjl x^k x^l + ...`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticJet {
    pub t: JetCoeffs,
    pub lambda: f64,
}

impl QuadraticJet {
    pub fn zero(lambda: f64) -> Self {
        Self { t: [[[[0.0; 4]; 4]; 4]; 4], lambda }
    }

    /// Symmetrizes `t` in `(i, j)` and in `(k, l)`.
    pub fn symmetrized(&self) -> Self {
        let mut t = [[[[0.0; 4]; 4]; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        t[i][j][k][l] = 0.25
                            * (self.t[i][j][k][l] + self.t[j][i][k][l] + self.t[i][j][l][k] + self.t[j][i][l][k]);
                    }
                }
            }
        }
        Self { t, lambda: self.lambda }
    }

    pub fn symmetry_defect(&self) -> f64 {
        let s = self.symmetrized();
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        worst = worst.max((s.t[i][j][k][l] - self.t[i][j][k][l]).abs());
                    }
                }
            }
        }
        worst
    }

    /// The jet as a degree-2 polynomial 2-tensor. Asymmetric parts in `(i, j)`
    /// are kept, so the result is only a valid field for symmetric jets.
    pub fn field(&self) -> HomogeneousTensorField {
        let comps: Vec<Poly> = (0..16)
            .map(|ij| {
                let (i, j) = (ij / 4, ij % 4);
                let mut p = Poly::zero();
                for k in 0..4 {
                    for l in 0..4 {
                        let mut e = [0u8; 4];
                        e[k] += 1;
                        e[l] += 1;
                        p.add_term(e, self.t[i][j][k][l]);
                    }
                }
                p
            })
            .collect();
        HomogeneousTensorField::new(TensorKind::Sym2, 0, 2, comps.clone())
            .unwrap_or_else(|_| HomogeneousTensorField::raw_sym2(0, 2, comps))
    }

    /// Reads the coefficients of a degree-2 polynomial 2-tensor.
    pub fn from_field(h: &HomogeneousTensorField, lambda: f64) -> Result<Self, GeomError> {
        if h.kind() != TensorKind::Sym2 || h.degree() != 2 || h.radial_exponent() != 0 {
            return Err(GeomError::KindMismatch("expected a quadratic polynomial 2-tensor".into()));
        }
        let mut t = [[[[0.0; 4]; 4]; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                for (e, c) in h.entry(i, j).terms() {
                    let idx: Vec<usize> = (0..4).flat_map(|v| std::iter::repeat(v).take(e[v] as usize)).collect();
                    let (k, l) = (idx[0], idx[1]);
                    if k == l {
                        t[i][j][k][l] = *c;
                    } else {
                        t[i][j][k][l] = c / 2.0;
                        t[i][j][l][k] = c / 2.0;
                    }
                }
            }
        }
        Ok(Self { t, lambda })
    }

    pub fn from_curvature(r: &AlgebraicCurvature, lambda: f64) -> Self {
        let mut t = [[[[0.0; 4]; 4]; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        t[i][j][k][l] = -(r.r[i][k][j][l] + r.r[i][l][j][k]) / 6.0;
                    }
                }
            }
        }
        Self { t, lambda }
    }

    /// Curvature tensor whose normal-coordinate jet is closest to `self`.
    pub fn curvature(&self) -> AlgebraicCurvature {
        let mut cols = Vec::with_capacity(21);
        let mut basis = Vec::with_capacity(21);
        for a in 0..6 {
            for b in a..6 {
                let mut m = Matrix6::zeros();
                m[(a, b)] = 1.0;
                m[(b, a)] = 1.0;
                let j = Self::from_curvature(&AlgebraicCurvature::from_pair_matrix(&m), 0.0);
                cols.push(flatten(&j.t));
                basis.push(m);
            }
        }
        let a = DMatrix::from_fn(256, cols.len(), |r, c| cols[c][r]);
        let rhs = DMatrix::from_column_slice(256, 1, &flatten(&self.t));
        let x = least_squares(&a, &rhs, 1e-12);
        let mut m = Matrix6::zeros();
        for (k, b) in basis.iter().enumerate() {
            m += b * x[(k, 0)];
        }
        AlgebraicCurvature::from_pair_matrix(&m)
    }

    /// `d Ric_{g_e}(H2) - Lambda g_e`, a constant symmetric tensor.
    pub fn ricci_defect_tensor(&self) -> Matrix4<f64> {
        let d = self.field().linearized_ricci().sub(&euclidean_metric().scale(self.lambda));
        Matrix4::from_fn(|i, j| d.entry(i, j).coeff(&[0; 4]))
    }

    /// Sup over the unit sphere of `|d Ric(H2) - Lambda g_e|`. The defect is a
    /// constant tensor, so this is its Frobenius norm.
    pub fn linearized_ricci_check(&self) -> f64 {
        self.ricci_defect_tensor().norm()
    }

    /// `(phi^* H2)(x) = phi^T H2(phi x) phi`.
    pub fn pullback(&self, phi: &Matrix4<f64>) -> Self {
        let mut t = [[[[0.0; 4]; 4]; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let mut acc = 0.0;
                        for i in 0..4 {
                            for j in 0..4 {
                                let pij = phi[(i, a)] * phi[(j, b)];
                                if pij == 0.0 {
                                    continue;
                                }
                                for k in 0..4 {
                                    for l in 0..4 {
                                        acc += pij * phi[(k, c)] * phi[(l, d)] * self.t[i][j][k][l];
                                    }
                                }
                            }
                        }
                        t[a][b][c][d] = acc;
                    }
                }
            }
        }
        Self { t, lambda: self.lambda }
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut t = self.t;
        t.iter_mut().flatten().flatten().flatten().for_each(|v| *v *= s);
        Self { t, lambda: self.lambda * s }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut t = self.t;
        for (a, b) in t.iter_mut().flatten().flatten().flatten().zip(other.t.iter().flatten().flatten().flatten()) {
            *a += b;
        }
        Self { t, lambda: self.lambda + other.lambda }
    }

    pub fn coeff_vector(&self) -> Vec<f64> {
        flatten(&self.t)
    }

    /// Largest `|G^* H2 - H2|` coefficient over the group.
    pub fn invariance_defect(&self, group: &GroupAction) -> (usize, f64) {
        let base = self.coeff_vector();
        let mut worst = (0, 0.0);
        for (k, g) in group.elements().iter().enumerate() {
            let d = self
                .pullback(g)
                .coeff_vector()
                .iter()
                .zip(&base)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if d > worst.1 {
                worst = (k, d);
            }
        }
        worst
    }
}

fn flatten(t: &JetCoeffs) -> Vec<f64> {
    t.iter().flatten().flatten().flatten().copied().collect()
}

/// Normal-coordinate jet of a curvature operator.
///
/// In strict mode a curvature with `Ric != lambda g` is rejected.
pub fn jet_from_curvature(r: &CurvatureOperator, lambda: f64, strict: bool) -> Result<QuadraticJet, GeomError> {
    let tensor = r.to_tensor();
    if strict {
        let defect = (tensor.ricci() - Matrix4::identity() * lambda).norm();
        if defect > 1e-10 {
            return Err(GeomError::NotEinstein { norm: defect });
        }
    }
    Ok(QuadraticJet::from_curvature(&tensor, lambda))
}

/// Inverse of [`jet_from_curvature`].
pub fn curvature_from_jet(jet: &QuadraticJet) -> CurvatureOperator {
    CurvatureOperator::from_tensor(&jet.curvature())
}

/// `H2 = -k rho^4 (alpha_1^2 + alpha_2^2 + alpha_3^2) / 3`, the jet of the space
/// form of sectional curvature `k`.
pub fn space_form_jet(k: f64) -> QuadraticJet {
    QuadraticJet::from_curvature(&AlgebraicCurvature::space_form(k), 3.0 * k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone_geometry::field::r4_sum_alpha_sq;

    #[test]
    fn sphere_jet_is_minus_third_of_angular_metric() {
        let j = space_form_jet(1.0);
        let expect = r4_sum_alpha_sq().scale(-1.0 / 3.0);
        assert!(j.field().sub(&expect).is_zero(1e-14));
        assert!(j.linearized_ricci_check() < 1e-13);
    }

    #[test]
    fn hyperbolic_jet_sign() {
        let j = space_form_jet(-1.0);
        assert!(j.field().sub(&r4_sum_alpha_sq().scale(1.0 / 3.0)).is_zero(1e-14));
        assert!((j.lambda + 3.0).abs() < 1e-15);
        assert!(j.linearized_ricci_check() < 1e-13);
    }

    #[test]
    fn curvature_round_trip() {
        let wp = nalgebra::Matrix3::new(0.3, 0.1, 0.0, 0.1, -0.2, 0.4, 0.0, 0.4, -0.1);
        let wm = nalgebra::Matrix3::new(-0.5, 0.2, 0.1, 0.2, 0.6, 0.0, 0.1, 0.0, -0.1);
        let op = CurvatureOperator::einstein(&wp, &wm, -0.7);
        let j = jet_from_curvature(&op, -0.7, true).unwrap();
        assert!(j.linearized_ricci_check() < 1e-12);
        let back = curvature_from_jet(&j);
        assert!((back.block_matrix() - op.block_matrix()).amax() < 1e-10);
    }

    #[test]
    fn strict_mode_rejects_non_einstein() {
        // R x H^3: curvature -1 on the last three directions, flat in the first
        let mut t = AlgebraicCurvature::space_form(-1.0);
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    t.r[0][b][c][d] = 0.0;
                    t.r[b][0][c][d] = 0.0;
                    t.r[c][d][0][b] = 0.0;
                    t.r[c][d][b][0] = 0.0;
                }
            }
        }
        let op = CurvatureOperator::from_tensor(&t);
        assert!(matches!(jet_from_curvature(&op, -2.0, true), Err(GeomError::NotEinstein { .. })));
    }
}
