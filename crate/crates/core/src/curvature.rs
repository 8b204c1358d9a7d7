//! Algebraic curvature tensors in dimension four and the curvature operator on
//! 2-forms.
//!
//! Conventions: `R_{abcd}` with `R_{abab}` the sectional curvature of the
//! `(a, b)` plane, so a space form of curvature `k` has
//! `R_{abcd} = k (d_ac d_bd - d_ad d_bc)`. The operator acts by
//! `R(e_a ^ e_b) = (1/2) sum R_{abcd} e_c ^ e_d`, which is the identity on the
//! unit sphere.
//!
//! 2-forms are ordered `e01, e02, e03, e23, e31, e12`; the self-dual basis is
//! `(e0i + ejk)/sqrt 2` and the anti-self-dual one `(e0i - ejk)/sqrt 2`.

use nalgebra::{Matrix3, Matrix4, Matrix6};
use serde::{Deserialize, Serialize};

pub type Riem = [[[[f64; 4]; 4]; 4]; 4];

const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (2, 3), (3, 1), (1, 2)];

/// Index and sign of `e_a ^ e_b` in the ordered 2-form basis.
fn pair_index(a: usize, b: usize) -> Option<(usize, f64)> {
    if a == b {
        return None;
    }
    PAIRS.iter().enumerate().find_map(|(k, &(p, q))| {
        if (p, q) == (a, b) {
            Some((k, 1.0))
        } else if (q, p) == (a, b) {
            Some((k, -1.0))
        } else {
            None
        }
    })
}

/// Orthogonal change of basis from `(Lambda^+, Lambda^-)` to the pair basis.
fn pm_basis() -> Matrix6<f64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut p = Matrix6::zeros();
    for i in 0..3 {
        p[(i, i)] = s;
        p[(i + 3, i)] = s;
        p[(i, i + 3)] = s;
        p[(i + 3, i + 3)] = -s;
    }
    p
}

/// A tensor with the symmetries of a Riemann tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraicCurvature {
    pub r: Riem,
}

impl AlgebraicCurvature {
    pub fn zero() -> Self {
        Self { r: [[[[0.0; 4]; 4]; 4]; 4] }
    }

    /// Constant sectional curvature `k`.
    pub fn space_form(k: f64) -> Self {
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        let mut r = [[[[0.0; 4]; 4]; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for e in 0..4 {
                        r[a][b][c][e] = k * (d(a, c) * d(b, e) - d(a, e) * d(b, c));
                    }
                }
            }
        }
        Self { r }
    }

    /// Builds the tensor from a symmetric matrix in the pair basis.
    pub fn from_pair_matrix(m: &Matrix6<f64>) -> Self {
        let mut r = [[[[0.0; 4]; 4]; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                let Some((i, si)) = pair_index(a, b) else { continue };
                for c in 0..4 {
                    for e in 0..4 {
                        let Some((j, sj)) = pair_index(c, e) else { continue };
                        r[a][b][c][e] = si * sj * m[(i, j)];
                    }
                }
            }
        }
        Self { r }
    }

    pub fn pair_matrix(&self) -> Matrix6<f64> {
        Matrix6::from_fn(|i, j| {
            let (a, b) = PAIRS[i];
            let (c, e) = PAIRS[j];
            self.r[a][b][c][e]
        })
    }

    pub fn ricci(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|b, d| (0..4).map(|a| self.r[a][b][a][d]).sum())
    }

    pub fn scal(&self) -> f64 {
        self.ricci().trace()
    }

    /// Largest violation of the first Bianchi identity.
    pub fn bianchi_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let s = self.r[a][b][c][d] + self.r[a][c][d][b] + self.r[a][d][b][c];
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    /// Pullback `(phi^* R)_{abcd} = R(phi e_a, phi e_b, phi e_c, phi e_d)`.
    pub fn pullback(&self, phi: &Matrix4<f64>) -> Self {
        // contract one index at a time
        let mut t = self.r;
        for slot in 0..4 {
            let mut out = [[[[0.0; 4]; 4]; 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    for k in 0..4 {
                        for l in 0..4 {
                            let idx = [i, j, k, l];
                            let mut acc = 0.0;
                            for m in 0..4 {
                                let mut src = idx;
                                src[slot] = m;
                                acc += phi[(m, idx[slot])] * t[src[0]][src[1]][src[2]][src[3]];
                            }
                            out[i][j][k][l] = acc;
                        }
                    }
                }
            }
            t = out;
        }
        Self { r: t }
    }
}

/// Curvature operator in block form
/// `[[R_plus, ric0], [ric0^T, R_minus]]` on `Lambda^+ + Lambda^-`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureOperator {
    pub rplus: Matrix3<f64>,
    pub rminus: Matrix3<f64>,
    pub ric0: Matrix3<f64>,
    pub scal: f64,
}

impl CurvatureOperator {
    pub fn from_tensor(t: &AlgebraicCurvature) -> Self {
        let p = pm_basis();
        let m = p.transpose() * t.pair_matrix() * p;
        Self {
            rplus: m.fixed_view::<3, 3>(0, 0).into_owned(),
            rminus: m.fixed_view::<3, 3>(3, 3).into_owned(),
            ric0: m.fixed_view::<3, 3>(0, 3).into_owned(),
            scal: t.scal(),
        }
    }

    /// Full operator in the `(Lambda^+, Lambda^-)` basis.
    pub fn block_matrix(&self) -> Matrix6<f64> {
        let mut m = Matrix6::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rplus);
        m.fixed_view_mut::<3, 3>(3, 3).copy_from(&self.rminus);
        m.fixed_view_mut::<3, 3>(0, 3).copy_from(&self.ric0);
        m.fixed_view_mut::<3, 3>(3, 0).copy_from(&self.ric0.transpose());
        m
    }

    pub fn to_tensor(&self) -> AlgebraicCurvature {
        let p = pm_basis();
        AlgebraicCurvature::from_pair_matrix(&(p * self.block_matrix() * p.transpose()))
    }

    /// Einstein operator with `Ric = lambda g` and Weyl blocks `w_plus`, `w_minus`
    /// (symmetrized and made traceless here).
    pub fn einstein(w_plus: &Matrix3<f64>, w_minus: &Matrix3<f64>, lambda: f64) -> Self {
        let tl = |w: &Matrix3<f64>| {
            let s = (w + w.transpose()) * 0.5;
            s - Matrix3::identity() * (s.trace() / 3.0)
        };
        let scal = 4.0 * lambda;
        Self {
            rplus: tl(w_plus) + Matrix3::identity() * (scal / 12.0),
            rminus: tl(w_minus) + Matrix3::identity() * (scal / 12.0),
            ric0: Matrix3::zeros(),
            scal,
        }
    }

    pub fn space_form(k: f64) -> Self {
        Self::from_tensor(&AlgebraicCurvature::space_form(k))
    }

    pub fn w_plus(&self) -> Matrix3<f64> {
        self.rplus - Matrix3::identity() * (self.scal / 12.0)
    }

    pub fn w_minus(&self) -> Matrix3<f64> {
        self.rminus - Matrix3::identity() * (self.scal / 12.0)
    }

    /// Orientation reversal swaps the two blocks.
    pub fn reversed(&self) -> Self {
        Self { rplus: self.rminus, rminus: self.rplus, ric0: self.ric0.transpose(), scal: self.scal }
    }

    pub fn ric0_norm(&self) -> f64 {
        self.ric0.norm()
    }

    /// Trace identity `tr R_plus = tr R_minus = scal / 4`, as a defect.
    pub fn trace_defect(&self) -> f64 {
        (self.rplus.trace() - self.scal / 4.0).abs().max((self.rminus.trace() - self.scal / 4.0).abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_operator_is_identity() {
        let op = CurvatureOperator::space_form(1.0);
        assert!((op.rplus - Matrix3::identity()).amax() < 1e-14);
        assert!((op.rminus - Matrix3::identity()).amax() < 1e-14);
        assert!(op.ric0.amax() < 1e-14);
        assert!((op.scal - 12.0).abs() < 1e-14);
    }

    #[test]
    fn einstein_round_trip_satisfies_bianchi() {
        let wp = Matrix3::new(1.0, 0.2, -0.3, 0.2, 0.5, 0.1, -0.3, 0.1, -1.5);
        let wm = Matrix3::new(-0.4, 0.0, 0.7, 0.0, 0.9, 0.3, 0.7, 0.3, -0.5);
        let op = CurvatureOperator::einstein(&wp, &wm, 2.0);
        let t = op.to_tensor();
        assert!(t.bianchi_defect() < 1e-13);
        assert!((t.ricci() - Matrix4::identity() * 2.0).amax() < 1e-13);
        let back = CurvatureOperator::from_tensor(&t);
        assert!((back.block_matrix() - op.block_matrix()).amax() < 1e-13);
        assert!(op.trace_defect() < 1e-13);
    }

    #[test]
    fn pullback_by_rotation_preserves_sphere() {
        let s = AlgebraicCurvature::space_form(-1.0);
        let phi = crate::cone_geometry::group::left_mult(&[0.5, 0.5, 0.5, 0.5]);
        let p = s.pullback(&phi);
        assert!((p.pair_matrix() - s.pair_matrix()).amax() < 1e-14);
    }
}
