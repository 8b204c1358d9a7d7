//! Obstruction integrals of a quadratic jet against the degree `-4` terms of
//! ALE deformations, the curvature tests `det R_+ = 0`, and the space-form
//! obstruction.

pub mod scan;

use nalgebra::{DMatrix, Matrix3, Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::ale_library::asymptotics::DeformationAsymptotics;
use crate::cone_geometry::coframe::InvariantCoframe;
use crate::cone_geometry::field::{HomogeneousTensorField, TensorKind};
use crate::cone_geometry::group::GroupAction;
use crate::cone_geometry::jet::{JetCoeffs, QuadraticJet};
use crate::curvature::CurvatureOperator;
use crate::error::{GeomError, NumError};
use crate::linalg::least_squares;
use crate::poly::{monomials, Poly};
use crate::sphere_harmonics::{build_quadrature, QuadratureRule};

pub use scan::{
    orientation_scan, random_einstein_jet, rank_deficient_jet, GridRow, ObstructionReport, OrientationGrid, ParityResult,
    ScanConfig, Verdict,
};

/// Tolerance on `|d Ric(H2) - Lambda g_e|` for a jet to count as Einstein-compatible.
pub const JET_TOL: f64 = 1e-8;
/// Quadrature degree used for the boundary pairings. The integrands have degree 6.
pub const PAIRING_DEGREE: usize = 8;

pub fn default_rule() -> QuadratureRule {
    build_quadrature(PAIRING_DEGREE).expect("degree within cap")
}

/// `L^2(S^3)` norm of a sym2 field on the unit sphere.
pub fn sphere_l2(f: &HomogeneousTensorField, rule: &QuadratureRule) -> f64 {
    rule.integrate(|x| f.eval_sym2(x).norm_squared()).sqrt()
}

/// The same basis with each element scaled to unit `L^2(S^3)` norm.
pub fn normalized_basis(basis: &DeformationAsymptotics, rule: &QuadratureRule) -> DeformationAsymptotics {
    DeformationAsymptotics {
        labels: basis.labels.clone(),
        fields: basis.fields.iter().map(|f| f.scale(1.0 / sphere_l2(f, rule))).collect(),
    }
}

/// `L^2(S^3)` norm of a jet, averaged: `(int |H2|^2 / |S^3|)^{1/2}`.
pub fn jet_norm(h: &QuadraticJet, rule: &QuadratureRule) -> f64 {
    let f = h.field();
    let total: f64 = rule.weights.iter().sum();
    (rule.integrate(|x| f.eval_sym2(x).norm_squared()) / total).sqrt()
}

/// Which first-order term accompanies `3 <H, O>` in the boundary pairing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairingForm {
    /// `O(B_e H, d_rho)`.
    Bianchi,
    /// `(1/2) O(grad tr_e H, d_rho)`.
    HalfTraceGradient,
}

/// Linear functionals `T -> lambda_j(T)` on jet coefficients, precomputed
/// from a basis and a quadrature rule.
#[derive(Clone, Debug)]
pub struct LambdaKernel {
    pub form: PairingForm,
    pub kernels: Vec<Vec<f64>>,
}

fn idx(i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * 4 + j) * 4 + k) * 4 + l
}

impl LambdaKernel {
    pub fn new(basis: &DeformationAsymptotics, group_order: usize, rule: &QuadratureRule, form: PairingForm) -> Self {
        let scale = -1.0 / group_order as f64;
        let kernels = basis
            .fields
            .iter()
            .map(|o| {
                let mut k = vec![0.0; 256];
                for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                    let om = o.eval_sym2(x);
                    let xv = Vector4::from_column_slice(x);
                    let wv = om * xv;
                    for i in 0..4 {
                        for j in 0..4 {
                            for a in 0..4 {
                                for b in 0..4 {
                                    k[idx(i, j, a, b)] += w * 3.0 * x[a] * x[b] * om[(i, j)];
                                }
                            }
                        }
                    }
                    for i in 0..4 {
                        for m in 0..4 {
                            for l in 0..4 {
                                if form == PairingForm::Bianchi {
                                    // -d_i H_im
                                    k[idx(i, m, i, l)] -= w * x[l] * wv[m];
                                    k[idx(i, m, l, i)] -= w * x[l] * wv[m];
                                }
                                // (1/2) d_m H_ii
                                k[idx(i, i, m, l)] += w * 0.5 * x[l] * wv[m];
                                k[idx(i, i, l, m)] += w * 0.5 * x[l] * wv[m];
                            }
                        }
                    }
                }
                k.iter_mut().for_each(|v| *v *= scale);
                k
            })
            .collect();
        Self { form, kernels }
    }

    pub fn apply(&self, t: &JetCoeffs) -> Vec<f64> {
        let flat: Vec<f64> = t.iter().flatten().flatten().flatten().copied().collect();
        self.apply_flat(&flat)
    }

    pub fn apply_flat(&self, t: &[f64]) -> Vec<f64> {
        self.kernels.iter().map(|k| k.iter().zip(t).map(|(a, b)| a * b).sum()).collect()
    }

    /// Kernel of `T -> lambda(phi^* T)`.
    pub fn rotated(&self, phi: &Matrix4<f64>) -> Self {
        Self { form: self.form, kernels: self.kernels.iter().map(|k| transform4(k, &phi.transpose())).collect() }
    }
}

/// `(phi^* K)_{abcd} = sum phi_ia phi_jb phi_kc phi_ld K_ijkl`, one index at a time.
pub fn transform4(k: &[f64], phi: &Matrix4<f64>) -> Vec<f64> {
    let mut cur = k.to_vec();
    let mut next = vec![0.0; 256];
    for slot in 0..4 {
        let stride = 1usize << (2 * (3 - slot));
        next.iter_mut().for_each(|v| *v = 0.0);
        for (pos, out) in next.iter_mut().enumerate() {
            let a = (pos / stride) % 4;
            let base = pos - a * stride;
            let mut acc = 0.0;
            for i in 0..4 {
                acc += phi[(i, a)] * cur[base + i * stride];
            }
            *out = acc;
        }
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}

fn check_jet(h: &QuadraticJet, group: &GroupAction) -> Result<(), GeomError> {
    let d = h.linearized_ricci_check();
    let size = h.coeff_vector().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if d > JET_TOL * (1.0 + size) {
        return Err(GeomError::NotEinstein { norm: d });
    }
    let (element, defect) = h.invariance_defect(group);
    if defect > 1e-10 * (1.0 + size) {
        return Err(GeomError::NotInvariant { element, defect });
    }
    Ok(())
}

fn check_basis(basis: &DeformationAsymptotics, group: &GroupAction) -> Result<(), GeomError> {
    let pts = crate::sphere_harmonics::sample_points(8, 11);
    basis.verify(group, &pts, 1e-10)
}

/// Direct pairing `-(1/|Gamma|) int (3 <H, O> + O(v, d_rho))` with a given covector `v`.
fn boundary_pairing(
    h: &HomogeneousTensorField,
    v: &HomogeneousTensorField,
    basis: &DeformationAsymptotics,
    group_order: usize,
    rule: &QuadratureRule,
) -> Vec<f64> {
    basis
        .fields
        .iter()
        .map(|o| {
            let s = rule.integrate(|x| {
                let om = o.eval_sym2(x);
                let hv = h.eval_sym2(x);
                let vv = v.eval_covector(x);
                let xv = Vector4::from_column_slice(x);
                3.0 * hv.component_mul(&om).sum() + vv.dot(&(om * xv))
            });
            -s / group_order as f64
        })
        .collect()
}

/// `lambda_j = -int_{S^3/Gamma} (3 <H2, O_j> + O_j(B_e H2, d_rho)) dS`.
pub fn lambda_integrals(
    h2: &QuadraticJet,
    basis: &DeformationAsymptotics,
    group: &GroupAction,
    rule: &QuadratureRule,
) -> Result<Vec<f64>, GeomError> {
    check_jet(h2, group)?;
    check_basis(basis, group)?;
    let f = h2.field();
    Ok(boundary_pairing(&f, &f.bianchi(), basis, group.order(), rule))
}

/// Boundary part of `lambda_hat`:
/// `-int (3 <H, O_j> + (1/2) O_j(grad tr H, d_rho)) dS`.
pub fn lambda_hat_boundary(
    h: &QuadraticJet,
    basis: &DeformationAsymptotics,
    group: &GroupAction,
    rule: &QuadratureRule,
) -> Vec<f64> {
    let f = h.field();
    let g = f.trace().grad().scale(0.5);
    boundary_pairing(&f, &g, basis, group.order(), rule)
}

/// Bulk term `int_N chi <O_o, o_i>` supplied by a model.
pub trait BulkPairing {
    fn bulk(&self, o_const: &Matrix4<f64>) -> Result<Vec<f64>, NumError>;
}

/// `lambda_hat` for a divergence-free jet, with an optional bulk term.
pub fn lambda_hat_integrals(
    h_hat: &QuadraticJet,
    o_const: &Matrix4<f64>,
    basis: &DeformationAsymptotics,
    group: &GroupAction,
    rule: &QuadratureRule,
    model: Option<&dyn BulkPairing>,
) -> Result<Vec<f64>, NumError> {
    let div = h_hat.field().divergence();
    if !div.is_zero(1e-9) {
        return Err(GeomError::Invalid(format!("jet is not divergence free ({:.3e})", div.max_coeff())).into());
    }
    let mut out = lambda_hat_boundary(h_hat, basis, group, rule);
    if o_const.amax() > 0.0 {
        let m = model.ok_or_else(|| NumError::Invalid("bulk term needs model samples of o_i".into()))?;
        for (a, b) in out.iter_mut().zip(m.bulk(o_const)?) {
            *a += b;
        }
    }
    Ok(out)
}

/// Result of [`gauge_transfer_check`].
#[derive(Clone, Debug, Serialize)]
pub struct GaugeTransfer {
    pub lambda: Vec<f64>,
    pub lambda_hat: Vec<f64>,
    pub discrepancy: f64,
    /// Coefficients of `V` on cubic monomials, component-major.
    pub v_coefficients: Vec<f64>,
    pub solve_residual: f64,
    #[serde(skip)]
    pub h_hat: Option<QuadraticJet>,
}

/// Solves `delta delta^* V = -delta H2` for a cubic covector `V`, forms
/// `H_hat = H2 + delta^* V` and compares the two obstruction vectors.
pub fn gauge_transfer_check(
    h2: &QuadraticJet,
    basis: &DeformationAsymptotics,
    group: &GroupAction,
    rule: &QuadratureRule,
) -> Result<GaugeTransfer, NumError> {
    let lambda = lambda_integrals(h2, basis, group, rule)?;
    let f = h2.field();
    let rhs_field = f.divergence().scale(-1.0);
    let cubic = monomials(3);
    let lin1 = monomials(1);
    // columns: delta delta^* applied to each basis covector x^m e_c
    let unknowns = 4 * cubic.len();
    let rows = 4 * lin1.len();
    let mut a = DMatrix::zeros(rows, unknowns);
    let comp_of = |cov: &HomogeneousTensorField, r: usize| -> f64 {
        let (c, m) = (r / lin1.len(), &lin1[r % lin1.len()]);
        cov.comp(c).coeff(m)
    };
    let mut columns = Vec::with_capacity(unknowns);
    for c in 0..4 {
        for m in &cubic {
            let mut comps: [Poly; 4] = std::array::from_fn(|_| Poly::zero());
            comps[c] = Poly::monomial(*m, 1.0);
            let v = HomogeneousTensorField::covector(0, comps);
            let col = v.sym_grad();
            columns.push(col.clone());
            let img = col.divergence();
            let img = img.with_radial_exponent(0).ok_or_else(|| NumError::Invalid("unexpected radial factor".into()))?;
            let j = columns.len() - 1;
            for r in 0..rows {
                a[(r, j)] = comp_of(&img, r);
            }
        }
    }
    let b_field = rhs_field.with_radial_exponent(0).ok_or_else(|| NumError::Invalid("unexpected radial factor".into()))?;
    let b = DMatrix::from_fn(rows, 1, |r, _| comp_of(&b_field, r));
    let x = least_squares(&a, &b, 1e-12);
    let solve_residual = (&a * &x - &b).amax();
    if solve_residual > 1e-9 * (1.0 + b.amax()) {
        return Err(NumError::Invalid(format!(
            "no exact cubic solution of delta delta^* V = -delta H2 (residual {solve_residual:.3e})"
        )));
    }
    let mut correction = HomogeneousTensorField::zero(TensorKind::Sym2, 2);
    for (j, col) in columns.iter().enumerate() {
        if x[j] != 0.0 {
            correction = correction.add(&col.scale(x[j]));
        }
    }
    let h_hat_field = f.add(&correction);
    let h_hat = QuadraticJet::from_field(&h_hat_field, h2.lambda)?;
    let lambda_hat = lambda_hat_integrals(&h_hat, &Matrix4::zeros(), basis, group, rule, None)?;
    let discrepancy = lambda.iter().zip(&lambda_hat).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(GaugeTransfer { lambda, lambda_hat, discrepancy, v_coefficients: x.iter().copied().collect(), solve_residual, h_hat: Some(h_hat) })
}

/// `(det R_+, det R_-, det R)`.
pub fn det_rplus_test(r: &CurvatureOperator) -> (f64, f64, f64) {
    (r.rplus.determinant(), r.rminus.determinant(), r.block_matrix().determinant())
}

/// Smallest singular value of `R_+`, scale-free zero test for `det R_+`.
pub fn rplus_sigma_min(r: &CurvatureOperator) -> f64 {
    smallest_singular(&r.rplus)
}

pub fn smallest_singular(m: &Matrix3<f64>) -> f64 {
    m.singular_values().iter().copied().fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceForm {
    Spherical,
    Hyperbolic,
}

/// `lim rho^4 o_1(d_rho, d_rho)` in terms of `b`, for models whose radial
/// metric coefficient has no `rho^-4` term in the constant-mean-curvature gauge
/// (Eguchi-Hanson among them).
pub const LEADING_PER_B: f64 = 12.0;

/// `-int (3 <H2, O_1> + O_1(B_e H2, d_rho))` for a space-form jet and the
/// scaling deformation of a model with coefficient `b`:
/// `-+ 12 b vol(S^3/Gamma)`, negative for hyperbolic jets.
pub fn spaceform_obstruction(b: f64, form: SpaceForm, group: &GroupAction) -> Result<f64, NumError> {
    if !(b >= 0.0) {
        return Err(NumError::OutOfRange { what: "b".into(), value: b, range: "[0, inf)".into() });
    }
    let vol = 2.0 * std::f64::consts::PI.powi(2) / group.order() as f64;
    let s = match form {
        SpaceForm::Hyperbolic => -1.0,
        SpaceForm::Spherical => 1.0,
    };
    Ok(s * LEADING_PER_B * b * vol)
}

/// The leading term of the scaling deformation of Eguchi-Hanson type models,
/// `(leading / 2) O4_1` with `leading = lim rho^4 o_1(d_rho, d_rho)`.
pub fn scaling_leading_field(leading: f64) -> DeformationAsymptotics {
    let o1 = crate::ale_library::asymptotics::o4_basis().fields.swap_remove(0);
    DeformationAsymptotics { labels: vec!["o1".into()], fields: vec![o1.scale(leading / 2.0)] }
}

/// Exact obstruction elements of Eguchi-Hanson with scale `a`, in the frame
/// `(A dr, B s1, C s2, C s3)`: `4 a^4 / r^4` times
/// `diag(1, 1, -1, -1)`, `e0.e3 + e1.e2` and `e1.e3 - e0.e2`.
#[derive(Clone, Debug)]
pub struct EguchiHansonObstructions {
    pub a: f64,
    /// Cutoff `chi(r) = 1` for `r < cut`, smooth step to 0 on `[cut, 2 cut]`.
    pub cut: f64,
    pub radial_nodes: usize,
    pub sphere_degree: usize,
}

impl EguchiHansonObstructions {
    pub fn frame_tensor(&self, i: usize, r: f64) -> Matrix4<f64> {
        let c = 4.0 * self.a.powi(4) / r.powi(4);
        let mut m = Matrix4::zeros();
        match i {
            0 => {
                m[(0, 0)] = c;
                m[(1, 1)] = c;
                m[(2, 2)] = -c;
                m[(3, 3)] = -c;
            }
            1 => {
                m[(0, 3)] = c / 2.0;
                m[(3, 0)] = c / 2.0;
                m[(1, 2)] = c / 2.0;
                m[(2, 1)] = c / 2.0;
            }
            _ => {
                m[(1, 3)] = c / 2.0;
                m[(3, 1)] = c / 2.0;
                m[(0, 2)] = -c / 2.0;
                m[(2, 0)] = -c / 2.0;
            }
        }
        m
    }

    fn cutoff(&self, r: f64) -> f64 {
        smooth_step((2.0 * self.cut - r) / self.cut)
    }
}

/// `0` for `t <= 0`, `1` for `t >= 1`, smooth in between.
fn smooth_step(t: f64) -> f64 {
    let f = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    f(t) / (f(t) + f(1.0 - t))
}

impl BulkPairing for EguchiHansonObstructions {
    fn bulk(&self, o_const: &Matrix4<f64>) -> Result<Vec<f64>, NumError> {
        let rule = build_quadrature(self.sphere_degree)?;
        let m = crate::ale_library::eguchi_hanson_profile(self.a)?;
        let (gx, gw) = crate::sphere_harmonics::gauss_legendre_unit(self.radial_nodes);
        let lo = self.a;
        let hi = 2.0 * self.cut;
        // sqrt substitution at the bolt
        let tm = (hi - lo).sqrt();
        let mut out = vec![0.0; 3];
        // sphere averages of frame components of the constant tensor
        let avg: Matrix4<f64> = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| InvariantCoframe::at(x).frame_components(o_const) * *w)
            .sum();
        for (t, w) in gx.iter().zip(&gw) {
            let t = t * tm;
            let r = lo + t * t;
            let dens = m.volume_density(r) * self.cutoff(r) * w * tm * 2.0 * t;
            for (i, o) in out.iter_mut().enumerate() {
                *o += dens * self.frame_tensor(i, r).component_mul(&avg).sum();
            }
        }
        Ok(out.iter().map(|v| v / 2.0).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ale_library::asymptotics::o4_basis;
    use crate::cone_geometry::group::{make_group, GroupSpec};
    use crate::cone_geometry::jet::space_form_jet;

    fn z2() -> GroupAction {
        make_group(&GroupSpec::CyclicSu2 { n: 2 }).unwrap()
    }

    #[test]
    fn zero_jet_has_zero_lambda() {
        let rule = default_rule();
        let l = lambda_integrals(&QuadraticJet::zero(0.0), &o4_basis(), &z2(), &rule).unwrap();
        assert!(l.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn kernel_matches_direct_pairing() {
        let rule = default_rule();
        let basis = o4_basis();
        let k = LambdaKernel::new(&basis, 2, &rule, PairingForm::Bianchi);
        for h in [space_form_jet(1.0), space_form_jet(-1.0), scan::random_einstein_jet(5, 0.7)] {
            let direct = lambda_integrals(&h, &basis, &z2(), &rule).unwrap();
            for (a, b) in k.apply(&h.t).iter().zip(&direct) {
                assert!((a - b).abs() < 1e-12, "{a} {b}");
            }
        }
    }

    #[test]
    fn rotated_kernel_matches_pullback() {
        let rule = default_rule();
        let basis = o4_basis();
        let k = LambdaKernel::new(&basis, 2, &rule, PairingForm::Bianchi);
        let h = scan::random_einstein_jet(9, -0.3);
        let q = [0.5, 0.5, -0.5, 0.5];
        let phi = crate::cone_geometry::group::left_mult(&q);
        let a = k.rotated(&phi).apply(&h.t);
        let b = k.apply(&h.pullback(&phi).t);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn space_form_chain() {
        // hyperbolic: 3<H2, O> = -O(d_rho, d_rho) and O(B_e H2, d_rho) = 2 O(d_rho, d_rho)
        let rule = default_rule();
        let lead = 4.0;
        let basis = scaling_leading_field(lead);
        let l = lambda_integrals(&space_form_jet(-1.0), &basis, &z2(), &rule).unwrap();
        let b = lead / LEADING_PER_B;
        let expect = spaceform_obstruction(b, SpaceForm::Hyperbolic, &z2()).unwrap();
        assert!((l[0] - expect).abs() < 1e-12, "{} {}", l[0], expect);
        assert!((l[0] + lead * std::f64::consts::PI.powi(2)).abs() < 1e-12);
        let s = lambda_integrals(&space_form_jet(1.0), &basis, &z2(), &rule).unwrap();
        assert!((s[0] + l[0]).abs() < 1e-12);
    }

    #[test]
    fn sphere_gauge_transfer() {
        let rule = default_rule();
        let g = gauge_transfer_check(&space_form_jet(1.0), &o4_basis(), &z2(), &rule).unwrap();
        assert!(g.discrepancy < 1e-8, "{g:?}");
    }

    /// Cartesian `(g, h)` at `x` for the Eguchi-Hanson metric and `o_i`.
    fn eh_cartesian(eh: &EguchiHansonObstructions, i: usize, x: &[f64; 4]) -> (Matrix4<f64>, Matrix4<f64>) {
        let v = Vector4::from_column_slice(x);
        let r = v.norm();
        let u = v / r;
        let js = crate::cone_geometry::group::complex_structures();
        let q = 1.0 - eh.a.powi(4) / r.powi(4);
        let (a, b, c) = (q.powf(-0.5), r * q.sqrt(), r);
        let rows = [u * a, js[0] * u * (b / r), js[1] * u * (c / r), js[2] * u * (c / r)];
        let f = Matrix4::from_fn(|p, k| rows[p][k]);
        (f.transpose() * f, f.transpose() * eh.frame_tensor(i, r) * f)
    }

    fn fd_divergence(eh: &EguchiHansonObstructions, i: usize, x: &[f64; 4]) -> f64 {
        let h = 1e-4;
        let shift = |k: usize, s: f64| {
            let mut y = *x;
            y[k] += s;
            eh_cartesian(eh, i, &y)
        };
        let mut dg = [Matrix4::zeros(); 4];
        let mut dh = [Matrix4::zeros(); 4];
        for k in 0..4 {
            let (gp, hp) = shift(k, h);
            let (gm, hm) = shift(k, -h);
            dg[k] = (gp - gm) / (2.0 * h);
            dh[k] = (hp - hm) / (2.0 * h);
        }
        let (g, t) = eh_cartesian(eh, i, x);
        let gi = g.try_inverse().unwrap();
        let gamma = |m: usize, k: usize, l: usize| -> f64 {
            (0..4).map(|n| 0.5 * gi[(m, n)] * (dg[k][(n, l)] + dg[l][(n, k)] - dg[n][(k, l)])).sum()
        };
        let mut worst: f64 = 0.0;
        for j in 0..4 {
            let mut acc = 0.0;
            for k in 0..4 {
                for l in 0..4 {
                    let mut cov = dh[k][(l, j)];
                    for m in 0..4 {
                        cov -= gamma(m, k, l) * t[(m, j)] + gamma(m, k, j) * t[(l, m)];
                    }
                    acc += gi[(k, l)] * cov;
                }
            }
            worst = worst.max(acc.abs());
        }
        worst
    }

    #[test]
    fn eguchi_hanson_obstructions_are_tt() {
        let eh = EguchiHansonObstructions { a: 1.0, cut: 5.0, radial_nodes: 64, sphere_degree: 6 };
        for x in crate::sphere_harmonics::sample_points(6, 5) {
            for r in [1.3, 2.0, 3.5] {
                let y = x.map(|v| v * r);
                for i in 0..3 {
                    let (g, t) = eh_cartesian(&eh, i, &y);
                    let tr = (g.try_inverse().unwrap() * t).trace();
                    assert!(tr.abs() < 1e-12);
                    let d = fd_divergence(&eh, i, &y);
                    assert!(d < 1e-6, "o_{} at r = {r}: {d:.3e}", i + 1);
                }
            }
        }
    }

    #[test]
    fn constant_tensors_have_zero_bulk_term() {
        let eh = EguchiHansonObstructions { a: 1.0, cut: 5.0, radial_nodes: 64, sphere_degree: 6 };
        let bulk = eh.bulk(&Matrix4::identity()).unwrap();
        assert!(bulk.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn determinants() {
        let (p, m, full) = det_rplus_test(&CurvatureOperator::space_form(1.0));
        assert!((p - 1.0).abs() < 1e-12 && (m - 1.0).abs() < 1e-12 && (full - 1.0).abs() < 1e-12);
        let (p, _, _) = det_rplus_test(&CurvatureOperator::space_form(0.0));
        assert_eq!(p, 0.0);
    }
}
