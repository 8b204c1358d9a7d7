//! Eguchi-Hanson, curvature integrals and the scaling deformation `u` with
//! `-nabla^* nabla u = 8`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_dual::DualNum;
use serde::{Deserialize, Serialize};

use super::radial::{warped_curvature, Closure, RadialMetric};
use crate::error::NumError;
use crate::linalg::least_squares;
use crate::sphere_harmonics::gauss_legendre_unit;

/// Eguchi-Hanson with bolt at `r = a`, asymptotic to `R^4/Z_2`:
/// `A = (1 - a^4/r^4)^{-1/2}`, `B = r (1 - a^4/r^4)^{1/2}`, `C = r`.
pub fn eguchi_hanson_profile(a: f64) -> Result<RadialMetric, NumError> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(NumError::OutOfRange { what: "scale".into(), value: a, range: "(0, inf)".into() });
    }
    Ok(RadialMetric::new(format!("eguchi-hanson(a={a})"), a, f64::INFINITY, Closure::Bolt { slope: 2.0 }, 2, move |r| {
        // (r - a)(r + a)(r^2 + a^2) / r^4, exact near the bolt
        let q = (r - a) * (r + a) * (r * r + a * a) / r.powi(4);
        let s = q.sqrt();
        [s.recip(), r * s, r]
    }))
}

/// Characteristic length of a profile, used to place quadrature panels.
fn length_scale(m: &RadialMetric) -> f64 {
    if m.r_min > 0.0 {
        m.r_min
    } else if m.r_max.is_finite() {
        m.r_max
    } else {
        1.0
    }
}

/// Composite Gauss-Legendre rule on `[r0, r1]`: a square-root substitution on
/// the first panel, geometric panels after it.
pub(crate) fn radial_nodes(r0: f64, r1: f64, scale: f64, order: usize, refine: usize) -> Vec<(f64, f64)> {
    let (gx, gw) = gauss_legendre_unit(order);
    let mut out = Vec::new();
    let first = (0.25 * scale).min(0.5 * (r1 - r0));
    // r = r0 + t^2 on [0, sqrt(first)], and symmetrically at a finite r1
    let push_sqrt = |out: &mut Vec<(f64, f64)>, base: f64, dir: f64, len: f64| {
        let tm = len.sqrt();
        for k in 0..refine {
            let (t0, t1) = (tm * k as f64 / refine as f64, tm * (k + 1) as f64 / refine as f64);
            for (x, w) in gx.iter().zip(&gw) {
                let t = t0 + (t1 - t0) * x;
                out.push((base + dir * t * t, w * (t1 - t0) * 2.0 * t));
            }
        }
    };
    push_sqrt(&mut out, r0, 1.0, first);
    let finite_end = r1.is_finite() && r1 < 1e300;
    let end = if finite_end { r1 - first } else { r1 };
    let ratio = 1.0 + 0.25 / refine as f64;
    let mut a = r0 + first;
    while a < end {
        let b = (a * ratio).max(a + first / refine as f64).min(end);
        for (x, w) in gx.iter().zip(&gw) {
            out.push((a + (b - a) * x, w * (b - a)));
        }
        a = b;
    }
    if finite_end {
        push_sqrt(&mut out, r1, -1.0, first);
    }
    out
}

/// `int_{r0}^{r1} f(r) dr`, refined until two resolutions agree to `tol`
/// relative to `scale_value`.
pub(crate) fn radial_integral(f: &dyn Fn(f64) -> f64, r0: f64, r1: f64, scale: f64, tol: f64) -> Result<f64, NumError> {
    let eval = |refine: usize| radial_nodes(r0, r1, scale, 16, refine).iter().map(|(r, w)| w * f(*r)).sum::<f64>();
    let mut prev = eval(1);
    for refine in [2, 4, 8] {
        let cur = eval(refine);
        if (cur - prev).abs() <= tol * cur.abs().max(1.0) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(NumError::Quadrature(format!("radial integral did not settle on [{r0}, {r1}]")))
}

/// Integrals of the curvature densities over a radial metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureIntegrals {
    /// `(1/8 pi^2) int (|W|^2 - |Ric0|^2/2 + scal^2/24)`.
    pub chi: f64,
    /// `(1/12 pi^2) int (|W+|^2 - |W-|^2)`.
    pub tau: f64,
    /// Measured decay exponent of `|Rm|^2` at the outer cutoff (infinite ends only).
    pub decay_exponent: Option<f64>,
    pub cutoff: f64,
}

const TAIL_EXPONENT: f64 = 8.0;

fn curvature_integrals(m: &RadialMetric) -> Result<CurvatureIntegrals, NumError> {
    let l = length_scale(m);
    let vol = m.sphere_volume();
    let (upper, decay) = if m.r_max.is_finite() {
        (m.r_max, None)
    } else {
        let cut = m.r_min.max(0.0) + 1e3 * l;
        let d1 = warped_curvature(m, cut / 2.0).rm_sq;
        let d2 = warped_curvature(m, cut).rm_sq;
        let p = if d2 > 0.0 && d1 > 0.0 { (d1 / d2).ln() / 2f64.ln() } else { f64::INFINITY };
        if p < TAIL_EXPONENT - 1e-3 {
            return Err(NumError::Quadrature(format!("curvature tail decays like r^-{p:.3}, not O(r^-8)")));
        }
        (cut, Some(p))
    };
    let euler = |r: f64| warped_curvature(m, r).euler_density() * m.volume_density(r);
    let sig = |r: f64| warped_curvature(m, r).signature_density() * m.volume_density(r);
    let ie = radial_integral(&euler, m.r_min, upper, l, 1e-12)?;
    let is = radial_integral(&sig, m.r_min, upper, l, 1e-12)?;
    Ok(CurvatureIntegrals {
        chi: ie * vol / (8.0 * PI * PI),
        tau: is * vol / (12.0 * PI * PI),
        decay_exponent: decay,
        cutoff: upper,
    })
}

/// Curvature Euler characteristic of a radial model.
pub fn gauss_bonnet_chi(m: &RadialMetric) -> Result<f64, NumError> {
    Ok(curvature_integrals(m)?.chi)
}

/// Curvature signature of a radial model.
pub fn signature_tau(m: &RadialMetric) -> Result<f64, NumError> {
    Ok(curvature_integrals(m)?.tau)
}

pub fn curvature_invariants(m: &RadialMetric) -> Result<CurvatureIntegrals, NumError> {
    curvature_integrals(m)
}

/// Largest Ricci component over `n` radii spread logarithmically.
pub fn ricci_residual(m: &RadialMetric, r_lo: f64, r_hi: f64, n: usize) -> f64 {
    (0..n)
        .map(|i| {
            let r = r_lo * (r_hi / r_lo).powf(i as f64 / (n - 1) as f64);
            warped_curvature(m, r).ricci_sup()
        })
        .fold(0.0, f64::max)
}

/// Leading `r^-4` term of `g - g_e` in frame components, split as
/// `x O4_1 + y (g_e - 4 d rho^2)/rho^4 + residual`, the second term being a
/// radial gauge change.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeadingTerm {
    pub r: f64,
    pub frame_diagonal: [f64; 4],
    pub o4_coefficient: f64,
    pub gauge_coefficient: f64,
    pub residual: f64,
}

pub fn leading_term(m: &RadialMetric, r: f64) -> LeadingTerm {
    let [a, b, c] = m.jets(r);
    let r4 = r.powi(4);
    let d = [(a.v * a.v - 1.0) * r4, (b.v * b.v / (r * r) - 1.0) * r4, (c.v * c.v / (r * r) - 1.0) * r4, (c.v * c.v / (r * r) - 1.0) * r4];
    let basis = DMatrix::from_row_slice(4, 2, &[2.0, -3.0, 2.0, 1.0, -2.0, 1.0, -2.0, 1.0]);
    let rhs = DMatrix::from_column_slice(4, 1, &d);
    let x = least_squares(&basis, &rhs, 1e-14);
    let res = (&basis * &x - rhs).amax();
    LeadingTerm { r, frame_diagonal: d, o4_coefficient: x[0], gauge_coefficient: x[1], residual: res }
}

/// The scaling deformation of a Ricci-flat radial model.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingDeformation {
    /// Coefficient of `rho^-2` in `u = rho^2 + b/rho^2 + ...` with `rho = 3/H`
    /// the constant-mean-curvature radius.
    pub b: f64,
    /// `-4 V / |S^3/Gamma|` with `V` the renormalized volume.
    pub b_volume: f64,
    /// `rho^4 o_1(d_rho, d_rho)` at the sample radii.
    pub samples: Vec<ScalingSample>,
    /// `rho^4 o_1(d_rho, d_rho)` at `r = 50` times the length scale.
    pub leading_radial: f64,
    /// `sup |rho^4 o_1(d_rho, d_rho) - 8 b|` over the fit window.
    pub eight_b_defect: f64,
    /// Relative defect of `<rho^2 sum alpha^2, O> = -O(d_rho, d_rho)` at `r = 50`.
    pub trace_identity_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingSample {
    pub r: f64,
    pub rho: f64,
    /// Frame components of `o_1 = 2 Hess u - 4 g`.
    pub o1: [f64; 4],
}

struct Potential<'a> {
    m: &'a RadialMetric,
}

impl Potential<'_> {
    /// `int_{r_min}^r A B C^2`.
    fn volume_function(&self, r: f64) -> Result<f64, NumError> {
        let f = |s: f64| self.m.volume_density(s);
        radial_integral(&f, self.m.r_min, r, length_scale(self.m), 1e-14)
    }

    /// `(u', u'')` from `(V/A) u' = 8 int A V`.
    fn derivatives(&self, r: f64) -> Result<(f64, f64), NumError> {
        let y = self.volume_function(r)?;
        let x = num_dual::Dual64::from_re(r).derivative();
        let [a, b, c] = (self.m.profile)(num_dual::Dual2_64::new(x.re, x.eps, 0.0)).map(|d| num_dual::Dual64::new(d.re, d.v1));
        let q = a / (b * c * c);
        let du = 8.0 * q.re * y;
        let ddu = 8.0 * (q.eps * y + a.re * a.re);
        Ok((du, ddu))
    }

    /// `rho = 3/H` and `rho rho'`.
    fn cmc_radius(&self, r: f64) -> (f64, f64) {
        let [a, b, c] = self.m.jets(r);
        let h = (b.d1 / b.v + 2.0 * c.d1 / c.v) / a.v;
        let dh = ((b.d2 / b.v - (b.d1 / b.v).powi(2)) + 2.0 * (c.d2 / c.v - (c.d1 / c.v).powi(2))) / a.v - h * a.d1 / a.v;
        let rho = 3.0 / h;
        (rho, rho * (-3.0 * dh / (h * h)))
    }

    fn o1(&self, r: f64) -> Result<[f64; 4], NumError> {
        let (du, ddu) = self.derivatives(r)?;
        let [a, b, c] = self.m.jets(r);
        let a2 = a.v * a.v;
        let h0 = (ddu - a.d1 / a.v * du) / a2;
        let hb = b.d1 * du / (a2 * b.v);
        let hc = c.d1 * du / (a2 * c.v);
        Ok([2.0 * h0 - 4.0, 2.0 * hb - 4.0, 2.0 * hc - 4.0, 2.0 * hc - 4.0])
    }
}

/// Fits `y(r) = sum_k c_k (l/r)^k` over `powers` and returns the coefficients.
fn inverse_power_fit(rs: &[f64], ys: &[f64], l: f64, powers: &[i32]) -> Vec<f64> {
    let a = DMatrix::from_fn(rs.len(), powers.len(), |i, j| (l / rs[i]).powi(powers[j]));
    let b = DMatrix::from_column_slice(ys.len(), 1, ys);
    let x = least_squares(&a, &b, 1e-15);
    x.iter().copied().collect()
}

/// Solves `-nabla^* nabla u = 8` with `u = rho^2 + o(1)` and extracts `b`.
pub fn scaling_deformation(m: &RadialMetric) -> Result<ScalingDeformation, NumError> {
    if m.r_max.is_finite() {
        return Err(NumError::Invalid("scaling deformation needs an infinite end".into()));
    }
    let l = length_scale(m);
    let ric = ricci_residual(m, m.r_min + 0.05 * l, m.r_min + 100.0 * l, 40);
    if ric > 1e-8 / (l * l) {
        return Err(NumError::Invalid(format!("{}: not Ricci-flat (|Ric| = {ric:.3e})", m.name)));
    }
    let pot = Potential { m };
    let window: Vec<f64> = (0..48).map(|i| m.r_min + l * 4.0 * 10f64.powf(i as f64 / 47.0)).collect();
    // u' - 2 rho rho' decays like r^-3, and its coefficient gives b
    let mut mismatch = Vec::with_capacity(window.len());
    let mut deficit = Vec::with_capacity(window.len());
    for &r in &window {
        let (du, _) = pot.derivatives(r)?;
        let (rho, rrho) = pot.cmc_radius(r);
        mismatch.push((du - 2.0 * rrho) * r.powi(3) / l.powi(4));
        deficit.push(pot.volume_function(r)? - rho.powi(4) / 4.0);
    }
    let c = inverse_power_fit(&window, &mismatch, l, &[0, 1, 2, 3, 4]);
    // u' - 2 rho rho' = c0 l^4 / r^3 + ..., and u - rho^2 = -c0 l^4 / (2 r^2) + ...
    let b = -c[0] * l.powi(4) / 2.0;
    let v = inverse_power_fit(&window, &deficit, l, &[0, 4, 5, 6, 8]);
    let b_volume = -4.0 * v[0];
    let mut samples = Vec::new();
    let mut eight_b_defect: f64 = 0.0;
    for &r in window.iter().step_by(6) {
        let (rho, _) = pot.cmc_radius(r);
        let o1 = pot.o1(r)?;
        eight_b_defect = eight_b_defect.max((rho.powi(4) * o1[0] - 8.0 * b).abs());
        samples.push(ScalingSample { r, rho, o1 });
    }
    let r50 = m.r_min.max(0.0) + 50.0 * l;
    let (rho50, _) = pot.cmc_radius(r50);
    let o50 = pot.o1(r50)?;
    let leading_radial = rho50.powi(4) * o50[0];
    let tangential = rho50.powi(4) * (o50[1] + o50[2] + o50[3]);
    let trace_identity_defect = if leading_radial != 0.0 { (tangential + leading_radial).abs() / leading_radial.abs() } else { tangential.abs() };
    Ok(ScalingDeformation { b, b_volume, samples, leading_radial, eight_b_defect, trace_identity_defect })
}
