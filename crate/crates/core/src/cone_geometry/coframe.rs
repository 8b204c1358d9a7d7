//! The left-invariant coframe `(d rho, alpha_1, alpha_2, alpha_3)` of `R^4 \ {0}`.
//!
//! With `x + y i + z j + t k` the quaternion of a point and `J_i` left
//! multiplication by `i, j, k`, the forms are `alpha_i = <J_i x, dx> / rho^2`:
//!
//! ```text
//! alpha_1 = (x dy - y dx + z dt - t dz) / rho^2
//! alpha_2 = (x dz - z dx + t dy - y dt) / rho^2
//! alpha_3 = (x dt - t dx + y dz - z dy) / rho^2
//! ```
//!
//! They are invariant under right multiplication by unit quaternions, so every
//! group inside the right `SU(2)` preserves them.

use nalgebra::{Matrix4, Vector4};

use super::field::HomogeneousTensorField;
use super::group::complex_structures;
use crate::poly::Poly;

/// Coframe values at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantCoframe {
    pub rho: f64,
    pub drho: Vector4<f64>,
    pub alpha: [Vector4<f64>; 3],
}

impl InvariantCoframe {
    pub fn at(x: &[f64; 4]) -> Self {
        let v = Vector4::from_column_slice(x);
        let r2 = v.norm_squared();
        assert!(r2 > 0.0, "coframe undefined at the origin");
        let rho = r2.sqrt();
        let js = complex_structures();
        Self { rho, drho: v / rho, alpha: std::array::from_fn(|i| js[i] * v / r2) }
    }

    /// Rows `d rho, rho alpha_1, rho alpha_2, rho alpha_3`.
    pub fn orthonormal_matrix(&self) -> Matrix4<f64> {
        let rows = [self.drho, self.alpha[0] * self.rho, self.alpha[1] * self.rho, self.alpha[2] * self.rho];
        Matrix4::from_fn(|i, j| rows[i][j])
    }

    /// Largest deviation of the scaled coframe from orthonormality.
    pub fn orthonormality_defect(&self) -> f64 {
        let m = self.orthonormal_matrix();
        (m * m.transpose() - Matrix4::identity()).amax()
    }

    /// Determinant of the scaled coframe, `+1` for the standard orientation.
    pub fn orientation(&self) -> f64 {
        self.orthonormal_matrix().determinant()
    }

    /// Frame components `(h(e_a, e_b))` of a symmetric 2-tensor given in
    /// Cartesian components, with `e_0 = d_rho` and `e_i` dual to `rho alpha_i`.
    pub fn frame_components(&self, h: &Matrix4<f64>) -> Matrix4<f64> {
        let m = self.orthonormal_matrix();
        m * h * m.transpose()
    }
}

fn linear(v: [f64; 4]) -> Poly {
    let mut p = Poly::zero();
    for (i, c) in v.iter().enumerate() {
        if *c != 0.0 {
            p = p.add(&Poly::var(i).scale(*c));
        }
    }
    p
}

/// Polynomial covector `rho^2 alpha_i = J_i x . dx` for `i in 1..=3`, and
/// `rho d rho = x . dx` for `i = 0`.
pub fn frame_covector(i: usize) -> [Poly; 4] {
    if i == 0 {
        return std::array::from_fn(Poly::var);
    }
    let j = complex_structures()[i - 1];
    std::array::from_fn(|a| linear([j[(a, 0)], j[(a, 1)], j[(a, 2)], j[(a, 3)]]))
}

/// Symmetric product `(u v + v u)/2` of polynomial covectors.
pub fn sym_product(u: &[Poly; 4], v: &[Poly; 4]) -> Vec<Vec<Poly>> {
    (0..4)
        .map(|a| (0..4).map(|b| u[a].mul(&v[b]).add(&u[b].mul(&v[a])).scale(0.5)).collect())
        .collect()
}

/// The field `rho^{s} (rho^2 e_a)(rho^2 e_b)` where `e_0 = d rho / rho` and `e_i = alpha_i`,
/// i.e. `rho^{s+4}` times the symmetric product of two unit-normalized coframe
/// elements (divided by rho^2 each). Degree is `s + 2`.
pub fn frame_product(a: usize, b: usize, s: i32) -> HomogeneousTensorField {
    HomogeneousTensorField::sym2(s, sym_product(&frame_covector(a), &frame_covector(b)))
}

/// `rho^4 (sum_i c_i alpha_i^2) + c_0 rho^2 d rho^2` as a polynomial field, the
/// general diagonal quadratic frame tensor.
pub fn diagonal_frame_tensor(c: [f64; 4]) -> HomogeneousTensorField {
    let mut acc = frame_product(0, 0, 0).scale(c[0]);
    for i in 1..4 {
        acc = acc.add(&frame_product(i, i, 0).scale(c[i]));
    }
    acc
}
