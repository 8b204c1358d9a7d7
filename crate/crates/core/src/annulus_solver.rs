//! Harmonic extension of 2-tensors on flat annuli `A(eps, 1/eps)` by spherical
//! harmonic modes, and the constant/decaying decoupling of a tensor.

use nalgebra::{DMatrix, DVector, Matrix4};
use serde::{Deserialize, Serialize};

use crate::cone_geometry::field::TensorKind;
use crate::cone_geometry::group::{make_group, GroupAction, GroupSpec};
use crate::error::NumError;
use crate::poly::Poly;
use crate::sphere_harmonics::{
    build_quadrature, component_bases, decompose, HarmonicCache, ModeCoefficients, MAX_QUADRATURE_DEGREE,
};

pub type TensorFn<'a> = dyn Fn(&[f64; 4]) -> Matrix4<f64> + 'a;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusConfig {
    /// Problems need `eps < eps_admissible`.
    pub eps_admissible: f64,
    pub k_max: usize,
    /// Boundary reconstruction error above which a warning is attached.
    pub truncation_tol: f64,
}

impl Default for AnnulusConfig {
    fn default() -> Self {
        Self { eps_admissible: 0.5, k_max: 12, truncation_tol: 1e-8 }
    }
}

/// Boundary data on `S(eps)` and `S(1/eps)` in spherical-harmonic modes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnnulusProblem {
    pub eps: f64,
    pub group: GroupSpec,
    pub k_max: usize,
    pub inner: ModeCoefficients,
    pub outer: ModeCoefficients,
    /// Largest boundary reconstruction error of the truncated modes.
    pub truncation_residual: f64,
}

fn to_vec(m: &Matrix4<f64>) -> Vec<f64> {
    (0..16).map(|k| m[(k / 4, k % 4)]).collect()
}

fn check_eps(eps: f64, cfg: &AnnulusConfig) -> Result<(), NumError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(NumError::OutOfRange { what: "eps".into(), value: eps, range: "(0, 1)".into() });
    }
    if eps >= cfg.eps_admissible {
        return Err(NumError::OutOfRange {
            what: "eps".into(),
            value: eps,
            range: format!("(0, {})", cfg.eps_admissible),
        });
    }
    Ok(())
}

impl AnnulusProblem {
    /// Decomposes `inner` on `S(eps)` and `outer` on `S(1/eps)`.
    pub fn from_fields(
        eps: f64,
        group: &GroupAction,
        inner: &TensorFn,
        outer: &TensorFn,
        cfg: &AnnulusConfig,
        cache: &HarmonicCache,
    ) -> Result<Self, NumError> {
        check_eps(eps, cfg)?;
        let fi = |x: &[f64; 4]| to_vec(&inner(x));
        let fo = |x: &[f64; 4]| to_vec(&outer(x));
        let mi = decompose(&fi, TensorKind::Sym2, eps, group, cfg.k_max, cache)?;
        let mo = decompose(&fo, TensorKind::Sym2, 1.0 / eps, group, cfg.k_max, cache)?;
        let mut problem = Self { eps, group: group.spec.clone(), k_max: cfg.k_max, inner: mi, outer: mo, truncation_residual: 0.0 };
        let sol = dirichlet_extend(&problem, cache)?;
        let rule = build_quadrature((2 * cfg.k_max + 2).min(MAX_QUADRATURE_DEGREE))?;
        let mut worst: f64 = 0.0;
        for x in rule.nodes.iter().step_by((rule.len() / 300).max(1)) {
            for (r, f) in [(eps, inner), (1.0 / eps, outer)] {
                let y = x.map(|v| v * r);
                worst = worst.max((sol.eval(&y) - f(&y)).norm());
            }
        }
        problem.truncation_residual = worst;
        Ok(problem)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusMode {
    pub component: usize,
    pub k: usize,
    pub index: usize,
    /// Coefficient of `(eps r)^k phi`.
    pub plus: f64,
    /// Coefficient of `(r / eps)^{-2-k} phi`.
    pub minus: f64,
    pub data_inner: f64,
    pub data_outer: f64,
}

/// Harmonic field `sum (eps r)^k H+_k + (r/eps)^{-2-k} H-_k`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnnulusSolution {
    pub eps: f64,
    pub k_max: usize,
    pub modes: Vec<AnnulusMode>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    bases: Vec<Vec<Poly>>,
}

/// `(H+, H-)` from data `a` on `S(eps)` and `b` on `S(1/eps)`.
pub fn mode_system(eps: f64, k: usize, a: f64, b: f64) -> (f64, f64) {
    let k = k as i32;
    let den = 1.0 - eps.powi(4 + 4 * k);
    ((b - eps.powi(4 + 2 * k) * a) / den, (a - eps.powi(2 * k) * b) / den)
}

pub fn dirichlet_extend(problem: &AnnulusProblem, cache: &HarmonicCache) -> Result<AnnulusSolution, NumError> {
    let eps = problem.eps;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(NumError::OutOfRange { what: "eps".into(), value: eps, range: "(0, 1)".into() });
    }
    let group = make_group(&problem.group)?;
    let bases = component_bases(&group, TensorKind::Sym2, problem.k_max, cache)?;
    let mut modes = Vec::with_capacity(problem.inner.entries.len());
    for (ei, eo) in problem.inner.entries.iter().zip(&problem.outer.entries) {
        debug_assert_eq!((ei.component, ei.k, ei.index), (eo.component, eo.k, eo.index));
        let (plus, minus) = mode_system(eps, ei.k, ei.value, eo.value);
        modes.push(AnnulusMode {
            component: ei.component,
            k: ei.k,
            index: ei.index,
            plus,
            minus,
            data_inner: ei.value,
            data_outer: eo.value,
        });
    }
    let mut warnings = Vec::new();
    if problem.truncation_residual > AnnulusConfig::default().truncation_tol {
        warnings.push(format!(
            "k_max = {} truncation leaves boundary residual {:.3e}",
            problem.k_max, problem.truncation_residual
        ));
    }
    Ok(AnnulusSolution {
        eps,
        k_max: problem.k_max,
        modes,
        warnings,
        bases: bases.by_degree.iter().map(|b| b.as_ref().clone()).collect(),
    })
}

impl AnnulusSolution {
    /// Radial factor of mode `k` at radius `r`, split into growing and decaying parts.
    fn radial(&self, k: usize, r: f64) -> (f64, f64) {
        ((self.eps * r).powi(k as i32), (r / self.eps).powi(-2 - k as i32))
    }

    pub fn eval(&self, x: &[f64; 4]) -> Matrix4<f64> {
        self.eval_filtered(x, |_| true)
    }

    fn eval_filtered(&self, x: &[f64; 4], keep: impl Fn(&AnnulusMode) -> bool) -> Matrix4<f64> {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let u = x.map(|v| v / r);
        let mut out = Matrix4::zeros();
        let mut cache: Vec<Option<Vec<f64>>> = vec![None; self.k_max + 1];
        for m in self.modes.iter().filter(|m| keep(m)) {
            let vals = cache[m.k].get_or_insert_with(|| self.bases[m.k].iter().map(|p| p.eval(&u)).collect());
            let (gp, gm) = self.radial(m.k, r);
            out[(m.component / 4, m.component % 4)] += (m.plus * gp + m.minus * gm) * vals[m.index];
        }
        out
    }

    /// The constant term `H+_0`.
    pub fn constant_part(&self) -> Matrix4<f64> {
        let mut out = Matrix4::zeros();
        let norm = 1.0 / (2.0 * std::f64::consts::PI.powi(2)).sqrt();
        for m in self.modes.iter().filter(|m| m.k == 0) {
            out[(m.component / 4, m.component % 4)] += m.plus * norm;
        }
        out
    }

    /// `H_tilde - H+_0`.
    pub fn eval_varying(&self, x: &[f64; 4]) -> Matrix4<f64> {
        self.eval(x) - self.constant_part()
    }

    /// Componentwise Laplacian by central differences.
    pub fn laplacian_fd(&self, x: &[f64; 4], h: f64) -> Matrix4<f64> {
        laplacian_fd(&|y| self.eval(y), x, h)
    }

    /// Radial profile of mode `(component, k, index)` solved by a second-order
    /// finite-difference scheme on `shells` log-uniform radii.
    ///
    /// In `s = ln r` the profile satisfies `F'' + 2 F' - k(k+2) F = 0`.
    pub fn fd_profile(&self, mode: &AnnulusMode, shells: usize) -> (Vec<f64>, Vec<f64>) {
        let s0 = self.eps.ln();
        let s1 = -s0;
        let n = shells;
        let h = (s1 - s0) / (n - 1) as f64;
        let kk = (mode.k * (mode.k + 2)) as f64;
        // interior unknowns 1..n-1
        let m = n - 2;
        let lower = 1.0 / (h * h) - 1.0 / h;
        let diag = -2.0 / (h * h) - kk;
        let upper = 1.0 / (h * h) + 1.0 / h;
        let mut a = DMatrix::zeros(m, m);
        let mut rhs = DVector::zeros(m);
        for i in 0..m {
            a[(i, i)] = diag;
            if i > 0 {
                a[(i, i - 1)] = lower;
            }
            if i + 1 < m {
                a[(i, i + 1)] = upper;
            }
        }
        rhs[0] -= lower * mode.data_inner;
        rhs[m - 1] -= upper * mode.data_outer;
        let sol = a.lu().solve(&rhs).expect("tridiagonal system is nonsingular");
        let radii: Vec<f64> = (0..n).map(|i| (s0 + i as f64 * h).exp()).collect();
        let mut vals = vec![mode.data_inner];
        vals.extend(sol.iter());
        vals.push(mode.data_outer);
        (radii, vals)
    }

    /// Relative `L^2` error between the mode solution and the finite-difference
    /// oracle over all modes, on `shells` log-uniform radii with volume weight `r^3 dr`.
    pub fn compare_with_fd(&self, shells: usize) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for m in &self.modes {
            if m.data_inner == 0.0 && m.data_outer == 0.0 {
                continue;
            }
            let (radii, fd) = self.fd_profile(m, shells);
            let h = (radii[1] / radii[0]).ln();
            for (r, f) in radii.iter().zip(&fd) {
                let (gp, gm) = self.radial(m.k, *r);
                let exact = m.plus * gp + m.minus * gm;
                let w = r.powi(4) * h;
                num += w * (exact - f).powi(2);
                den += w * exact * exact;
            }
        }
        if den == 0.0 {
            0.0
        } else {
            (num / den).sqrt()
        }
    }
}

/// Componentwise Euclidean Laplacian of a tensor field by central differences.
pub fn laplacian_fd(f: &TensorFn, x: &[f64; 4], h: f64) -> Matrix4<f64> {
    let f0 = f(x);
    let mut acc = Matrix4::zeros();
    for i in 0..4 {
        let mut a = *x;
        let mut b = *x;
        a[i] += h;
        b[i] -= h;
        acc += (f(&a) - f0 * 2.0 + f(&b)) / (h * h);
    }
    acc
}

/// Weight `eta(r) = max((rho1/r)^beta, (r/rho2)^beta)` of the annulus norm.
pub fn eta(r: f64, rho1: f64, rho2: f64, beta: f64) -> f64 {
    (rho1 / r).powf(beta).max((r / rho2).powf(beta))
}

/// Sampling grid on the annulus: log-uniform shells times sphere nodes.
#[derive(Clone, Debug)]
pub struct AnnulusGrid {
    pub radii: Vec<f64>,
    pub directions: Vec<[f64; 4]>,
}

impl AnnulusGrid {
    pub fn new(eps: f64, shells: usize, angular_degree: usize) -> Result<Self, NumError> {
        let rule = build_quadrature(angular_degree)?;
        let s0 = eps.ln();
        let radii = (0..shells).map(|i| (s0 - 2.0 * s0 * i as f64 / (shells - 1) as f64).exp()).collect();
        Ok(Self { radii, directions: rule.nodes })
    }

    /// `sup eta^{-1} w(r) |s|` over the grid.
    pub fn weighted_sup(&self, s: &TensorFn, eps: f64, beta: f64, w: impl Fn(f64) -> f64) -> f64 {
        let mut worst: f64 = 0.0;
        for &r in &self.radii {
            let e = eta(r, eps, 1.0 / eps, beta);
            for d in &self.directions {
                let x = d.map(|v| v * r);
                worst = worst.max(w(r) * s(&x).norm() / e);
            }
        }
        worst
    }

    pub fn plain_sup(&self, s: &TensorFn) -> f64 {
        self.weighted_sup(s, 1.0, 0.0, |_| 1.0)
    }
}

/// Result of [`decouple`].
#[derive(Clone, Debug, Serialize)]
pub struct DecoupledSolution {
    pub eps: f64,
    pub beta: f64,
    pub anchor: [f64; 4],
    pub h0: Matrix4<f64>,
    /// `(h - H_tilde)(x0)`.
    pub c0: Matrix4<f64>,
    /// `sup eta_1^{-1} |H_*|`.
    pub h_star_norm_c01: f64,
    /// `sup eta_beta^{-1} |h - H_0|`.
    pub h_minus_h0_norm: f64,
    /// `sup eta_beta^{-1} |h - H_0 - H_*|`.
    pub remainder_norm: f64,
    pub h_star_plain: f64,
    pub remainder_plain: f64,
    #[serde(skip)]
    pub extension: Option<AnnulusSolution>,
}

impl DecoupledSolution {
    /// `H_*(x) = (H_tilde - H+_0)(x) - eps^2 c0 / ((1 - eps^2) r^2)`.
    pub fn h_star(&self, x: &[f64; 4]) -> Matrix4<f64> {
        let ext = self.extension.as_ref().expect("extension retained");
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let e2 = self.eps * self.eps;
        ext.eval_varying(x) - self.c0 * (e2 / ((1.0 - e2) * r2))
    }
}

/// Default anchor on the unit sphere.
pub const DEFAULT_ANCHOR: [f64; 4] = [1.0, 0.0, 0.0, 0.0];

/// Splits `h` on `A(eps, 1/eps)` as `H_0 + H_* + remainder` with `H_0` constant
/// and `H_*` harmonic, so that the remainder vanishes at `x0` and on `S(eps)` and
/// is constant on `S(1/eps)`.
#[allow(clippy::too_many_arguments)]
pub fn decouple(
    h: &TensorFn,
    eps: f64,
    beta: f64,
    anchor: [f64; 4],
    group: &GroupAction,
    cfg: &AnnulusConfig,
    grid: &AnnulusGrid,
    cache: &HarmonicCache,
) -> Result<DecoupledSolution, NumError> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(NumError::OutOfRange { what: "beta".into(), value: beta, range: "(0, 1)".into() });
    }
    let problem = AnnulusProblem::from_fields(eps, group, h, h, cfg, cache)?;
    let ext = dirichlet_extend(&problem, cache)?;
    let c0 = h(&anchor) - ext.eval(&anchor);
    let e2 = eps * eps;
    let h0 = ext.constant_part() + c0 / (1.0 - e2);
    let mut sol = DecoupledSolution {
        eps,
        beta,
        anchor,
        h0,
        c0,
        h_star_norm_c01: 0.0,
        h_minus_h0_norm: 0.0,
        remainder_norm: 0.0,
        h_star_plain: 0.0,
        remainder_plain: 0.0,
        extension: Some(ext),
    };
    let hs = |x: &[f64; 4]| sol.h_star(x);
    let rem = |x: &[f64; 4]| h(x) - h0 - sol.h_star(x);
    let hm = |x: &[f64; 4]| h(x) - h0;
    let h_star_norm_c01 = grid.weighted_sup(&hs, eps, 1.0, |_| 1.0);
    let h_minus_h0_norm = grid.weighted_sup(&hm, eps, beta, |_| 1.0);
    let remainder_norm = grid.weighted_sup(&rem, eps, beta, |_| 1.0);
    let h_star_plain = grid.plain_sup(&hs);
    let remainder_plain = grid.plain_sup(&rem);
    sol.h_star_norm_c01 = h_star_norm_c01;
    sol.h_minus_h0_norm = h_minus_h0_norm;
    sol.remainder_norm = remainder_norm;
    sol.h_star_plain = h_star_plain;
    sol.remainder_plain = remainder_plain;
    Ok(sol)
}

/// A test tensor for [`verify_decoupling_estimates`].
pub struct TestTensor<'a> {
    pub name: String,
    pub field: Box<dyn Fn(f64) -> Box<TensorFn<'a>> + 'a>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecouplingMeasurement {
    pub name: String,
    pub eps: f64,
    /// `|H_*|_{C^0_1} / |h - H_0|_{C^0_beta}`.
    pub ratio_h_star: f64,
    /// `|h - H_0 - H_*|_{C^0_beta} / |P_e h|_{r^-2 C^0_beta}`; `None` when `P_e h = 0`.
    pub ratio_remainder: Option<f64>,
    pub remainder_abs: f64,
    pub pe_norm: f64,
}

/// Measures the two decoupling constants over a family of tensors and a list
/// of annulus sizes. `P_e h = -(1/2) Delta h` is evaluated by finite differences.
pub fn verify_decoupling_estimates(
    family: &[TestTensor],
    eps_list: &[f64],
    beta: f64,
    group: &GroupAction,
    cfg: &AnnulusConfig,
    shells: usize,
    cache: &HarmonicCache,
) -> Result<Vec<DecouplingMeasurement>, NumError> {
    let mut out = Vec::new();
    for &eps in eps_list {
        let grid = AnnulusGrid::new(eps, shells, 6)?;
        for t in family {
            let h = (t.field)(eps);
            let sol = decouple(h.as_ref(), eps, beta, DEFAULT_ANCHOR, group, cfg, &grid, cache)?;
            let pe = |x: &[f64; 4]| {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                laplacian_fd(h.as_ref(), x, 1e-3 * r) * -0.5
            };
            let pe_norm = grid.weighted_sup(&pe, eps, beta, |r| r * r);
            let scale = 1.0 + sol.h_minus_h0_norm;
            let ratio_remainder = if pe_norm <= 1e-6 * scale { None } else { Some(sol.remainder_norm / pe_norm) };
            out.push(DecouplingMeasurement {
                name: t.name.clone(),
                eps,
                ratio_h_star: if sol.h_minus_h0_norm > 0.0 { sol.h_star_norm_c01 / sol.h_minus_h0_norm } else { 0.0 },
                ratio_remainder,
                remainder_abs: sol.remainder_norm,
                pe_norm,
            });
        }
    }
    Ok(out)
}
