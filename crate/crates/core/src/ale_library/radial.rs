//! Cohomogeneity-one metrics `A(r)^2 dr^2 + B(r)^2 s1^2 + C(r)^2 (s2^2 + s3^2)`
//! on `(r_min, r_max) x S^3/Gamma`, where `s_i = rho alpha_i` restricted to the
//! unit sphere, and their curvature in the orthonormal frame
//! `(dr/A, X_1/B, X_2/C, X_3/C)`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{Matrix3, Matrix4};
use num_dual::{Dual2_64, Dual64, DualNum};
use serde::{Deserialize, Serialize};

use crate::cone_geometry::group::complex_structures;
use crate::curvature::{AlgebraicCurvature, CurvatureOperator};
use crate::error::NumError;

/// Profiles `(A, B, C)` evaluated on a second-order dual number in `r`.
pub type Profile = Arc<dyn Fn(Dual2_64) -> [Dual2_64; 3] + Send + Sync>;

/// Behaviour of the metric at `r_min`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Closure {
    /// No closing condition (the interval is open there).
    Open,
    /// The `s1` circle collapses at `r_min`; `slope` is the required
    /// `dB/ds` in arclength `s` for a smooth closure.
    Bolt { slope: f64 },
    /// The whole sphere collapses at `r_min` like a cone point with
    /// `dB/ds = dC/ds = 1`.
    Point,
}

#[derive(Clone)]
pub struct RadialMetric {
    pub name: String,
    pub r_min: f64,
    /// `f64::INFINITY` for complete ends.
    pub r_max: f64,
    pub profile: Profile,
    pub closure: Closure,
    /// Order of the group acting on `S^3`; volumes are divided by it.
    pub group_order: usize,
}

impl std::fmt::Debug for RadialMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialMetric")
            .field("name", &self.name)
            .field("r_min", &self.r_min)
            .field("r_max", &self.r_max)
            .field("closure", &self.closure)
            .field("group_order", &self.group_order)
            .finish()
    }
}

/// Values and two derivatives of a profile function at one radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileJet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl From<Dual2_64> for ProfileJet {
    fn from(d: Dual2_64) -> Self {
        Self { v: d.re, d1: d.v1, d2: d.v2 }
    }
}

impl RadialMetric {
    pub fn new(
        name: impl Into<String>,
        r_min: f64,
        r_max: f64,
        closure: Closure,
        group_order: usize,
        profile: impl Fn(Dual2_64) -> [Dual2_64; 3] + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), r_min, r_max, profile: Arc::new(profile), closure, group_order }
    }

    /// The flat cone `R^4/Gamma`.
    pub fn flat(group_order: usize) -> Self {
        Self::new("flat", 0.0, f64::INFINITY, Closure::Point, group_order, |r| [Dual2_64::from_re(1.0), r, r])
    }

    /// The unit round metric `dr^2 + sin(r)^2 g_{S^3/Gamma}` on `(0, pi)`.
    pub fn round_sphere(group_order: usize) -> Self {
        Self::new("round-sphere", 0.0, PI, Closure::Point, group_order, |r| {
            let s = r.sin();
            [Dual2_64::from_re(1.0), s, s]
        })
    }

    pub fn jets(&self, r: f64) -> [ProfileJet; 3] {
        let x = Dual2_64::from_re(r).derivative();
        (self.profile)(x).map(ProfileJet::from)
    }

    /// Volume of the unit `S^3/Gamma`.
    pub fn sphere_volume(&self) -> f64 {
        2.0 * PI * PI / self.group_order as f64
    }

    /// Volume density `A B C^2` with respect to `dr` and the unit-sphere measure.
    pub fn volume_density(&self, r: f64) -> f64 {
        let [a, b, c] = self.jets(r);
        a.v * b.v * c.v * c.v
    }

    /// Mean curvature of the level set `{r} x S^3/Gamma`.
    pub fn mean_curvature(&self, r: f64) -> f64 {
        let [a, b, c] = self.jets(r);
        (b.d1 / b.v + 2.0 * c.d1 / c.v) / a.v
    }

    /// Checks positivity on sample radii and the closing condition at `r_min`.
    pub fn validate(&self) -> Result<(), NumError> {
        let hi = if self.r_max.is_finite() { self.r_max } else { self.r_min.abs().max(1.0) * 100.0 };
        for i in 1..50 {
            let r = self.r_min + (hi - self.r_min) * i as f64 / 50.0;
            let j = self.jets(r);
            if j.iter().any(|p| !(p.v > 0.0) || !p.v.is_finite()) {
                return Err(NumError::Invalid(format!("{}: profile not positive at r = {r}", self.name)));
            }
        }
        if let Some(defect) = self.closure_defect() {
            if defect > 1e-3 {
                return Err(NumError::Invalid(format!("{}: closure defect {defect:.3e} at r_min", self.name)));
            }
        }
        Ok(())
    }

    /// Deviation of `dB/ds` (and `dC/ds` at a point) from the smooth closing
    /// values, measured just outside `r_min`.
    pub fn closure_defect(&self) -> Option<f64> {
        let r = self.r_min + 1e-7 * self.r_min.abs().max(1.0);
        let [a, b, c] = self.jets(r);
        match self.closure {
            Closure::Open => None,
            Closure::Bolt { slope } => Some((b.d1 / a.v - slope).abs()),
            Closure::Point => Some((b.d1 / a.v - 1.0).abs().max((c.d1 / a.v - 1.0).abs())),
        }
    }
}

/// Structure constants `C[i][j][k]` of the vector fields `X_i = J_i x` dual to
/// `rho alpha_i` on the unit sphere: `[X_i, X_j] = sum_k C[i][j][k] X_k`.
pub fn structure_constants() -> [[[f64; 3]; 3]; 3] {
    let js = complex_structures();
    let e = nalgebra::Vector4::new(1.0, 0.0, 0.0, 0.0);
    let mut c = [[[0.0; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let br: Matrix4<f64> = js[j] * js[i] - js[i] * js[j];
            for k in 0..3 {
                c[i][j][k] = (br * e).dot(&(js[k] * e));
            }
        }
    }
    c
}

/// Curvature of a radial metric at one radius.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialCurvature {
    pub r: f64,
    pub riemann: AlgebraicCurvature,
    pub operator: CurvatureOperator,
    pub ricci: Matrix4<f64>,
    /// Sectional curvatures of the planes `01, 02, 03, 23, 31, 12`.
    pub sectional: [f64; 6],
    /// `|Rm|^2` as an operator on 2-forms.
    pub rm_sq: f64,
    pub w_plus_sq: f64,
    pub w_minus_sq: f64,
    /// `|Ric - scal g / 4|^2`.
    pub ric0_sq: f64,
    pub scal: f64,
}

impl RadialCurvature {
    /// Gauss-Bonnet integrand `|W|^2 - |Ric0|^2 / 2 + scal^2 / 24`.
    pub fn euler_density(&self) -> f64 {
        self.w_plus_sq + self.w_minus_sq - 0.5 * self.ric0_sq + self.scal * self.scal / 24.0
    }

    pub fn signature_density(&self) -> f64 {
        self.w_plus_sq - self.w_minus_sq
    }

    pub fn ricci_sup(&self) -> f64 {
        self.ricci.amax()
    }
}

fn dual(j: ProfileJet) -> (Dual64, Dual64) {
    (Dual64::new(j.v, j.d1), Dual64::new(j.d1, j.d2))
}

/// Curvature of `m` at radius `r` via the Koszul formula in the orthonormal
/// frame, with radial derivatives carried by dual numbers.
pub fn warped_curvature(m: &RadialMetric, r: f64) -> RadialCurvature {
    let jets = m.jets(r);
    let (a, _) = dual(jets[0]);
    let f: [(Dual64, Dual64); 3] = [dual(jets[1]), dual(jets[2]), dual(jets[2])];
    let sc = structure_constants();
    let zero = Dual64::from_re(0.0);
    // c[a][b][d] = <[E_a, E_b], E_d>
    let mut c = [[[zero; 4]; 4]; 4];
    for i in 0..3 {
        let (fi, dfi) = f[i];
        let v = -dfi / (a * fi);
        c[0][i + 1][i + 1] = v;
        c[i + 1][0][i + 1] = -v;
        for j in 0..3 {
            for k in 0..3 {
                if sc[i][j][k] != 0.0 {
                    c[i + 1][j + 1][k + 1] = f[k].0 / (fi * f[j].0) * sc[i][j][k];
                }
            }
        }
    }
    // g[a][b][d] = <nabla_{E_a} E_b, E_d>
    let mut g = [[[zero; 4]; 4]; 4];
    for x in 0..4 {
        for y in 0..4 {
            for z in 0..4 {
                g[x][y][z] = (c[x][y][z] - c[y][z][x] + c[z][x][y]) * 0.5;
            }
        }
    }
    let av = a.re;
    let mut riem = [[[[0.0; 4]; 4]; 4]; 4];
    for p in 0..4 {
        for q in 0..4 {
            for s in 0..4 {
                for t in 0..4 {
                    // <R(E_p, E_q) E_s, E_t>
                    let mut v = 0.0;
                    if p == 0 {
                        v += g[q][s][t].eps / av;
                    }
                    if q == 0 {
                        v -= g[p][s][t].eps / av;
                    }
                    for e in 0..4 {
                        v += g[q][s][e].re * g[p][e][t].re - g[p][s][e].re * g[q][e][t].re;
                        v -= c[p][q][e].re * g[e][s][t].re;
                    }
                    riem[p][q][t][s] = v;
                }
            }
        }
    }
    let riemann = AlgebraicCurvature { r: riem };
    let operator = CurvatureOperator::from_tensor(&riemann);
    let ricci = riemann.ricci();
    let scal = riemann.scal();
    let ric0 = ricci - Matrix4::identity() * (scal / 4.0);
    let pm = riemann.pair_matrix();
    let planes = [(0, 1), (0, 2), (0, 3), (2, 3), (3, 1), (1, 2)];
    let frob = |w: Matrix3<f64>| w.norm_squared();
    RadialCurvature {
        r,
        sectional: planes.map(|(x, y)| riem[x][y][x][y]),
        rm_sq: pm.norm_squared(),
        w_plus_sq: frob(operator.w_plus()),
        w_minus_sq: frob(operator.w_minus()),
        ric0_sq: ric0.norm_squared(),
        scal,
        riemann,
        operator,
        ricci,
    }
}

/// Curvature on a list of radii.
pub fn curvature_on_grid(m: &RadialMetric, radii: &[f64]) -> Vec<RadialCurvature> {
    radii.iter().map(|&r| warped_curvature(m, r)).collect()
}

/// Sectional curvatures by second-order central differences of the profiles,
/// using the classical diagonal formulas. Independent of the dual-number path.
pub fn sectional_fd(m: &RadialMetric, r: f64, h: f64) -> [f64; 6] {
    let val = |x: f64| m.jets(x).map(|p| p.v);
    let [a, b, c] = val(r);
    let (p, q) = (val(r + h), val(r - h));
    let d1 = |i: usize| (p[i] - q[i]) / (2.0 * h);
    let d2 = |i: usize| (p[i] - 2.0 * val(r)[i] + q[i]) / (h * h);
    let (da, db, dc) = (d1(0), d1(1), d1(2));
    let (ddb, ddc) = (d2(1), d2(2));
    // radial planes: -(f'' - A' f'/A) / (A^2 f)
    let k0b = -(ddb - da * db / a) / (a * a * b);
    let k0c = -(ddc - da * dc / a) / (a * a * c);
    // tangential planes of the Berger sphere with dX = 2 X ^ X normalization
    let (b2, c2) = (b * b, c * c);
    let k12 = b2 / (c2 * c2) - (db * dc) / (a * a * b * c);
    let k23 = (4.0 * c2 - 3.0 * b2) / (c2 * c2) - (dc * dc) / (a * a * c2);
    [k0b, k0c, k0c, k23, k12, k12]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structure_constants_su2() {
        let c = structure_constants();
        for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            assert!((c[i][j][k].abs() - 2.0).abs() < 1e-14);
            assert!((c[i][j][k] + c[j][i][k]).abs() < 1e-14);
        }
    }

    #[test]
    fn flat_profile_is_flat() {
        let m = RadialMetric::flat(1);
        for r in [0.3, 1.0, 7.0] {
            let k = warped_curvature(&m, r);
            assert!(k.rm_sq < 1e-24, "{}", k.rm_sq);
        }
    }

    #[test]
    fn round_profile_has_unit_curvature() {
        let m = RadialMetric::round_sphere(1);
        for r in [0.3, 1.0, 2.5] {
            let k = warped_curvature(&m, r);
            for s in k.sectional {
                assert!((s - 1.0).abs() < 1e-12);
            }
            assert!((k.operator.rplus - Matrix3::identity()).amax() < 1e-12);
            assert!(k.riemann.bianchi_defect() < 1e-12);
        }
    }

    #[test]
    fn berger_profile_matches_difference_formulas() {
        let m = RadialMetric::new("test", 0.5, 5.0, Closure::Open, 1, |r| {
            [(r * 0.3).cosh(), r + 0.2, r + r.sin() * 0.1]
        });
        for r in [1.0, 2.0, 3.3] {
            let k = warped_curvature(&m, r);
            let fd = sectional_fd(&m, r, 1e-4);
            for (x, y) in k.sectional.iter().zip(fd) {
                assert!((x - y).abs() < 1e-6, "{x} {y}");
            }
            assert!(k.riemann.bianchi_defect() < 1e-12);
        }
    }
}
