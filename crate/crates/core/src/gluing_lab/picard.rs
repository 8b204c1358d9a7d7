//! Quantified inverse-function iteration: for `Phi` with `|(d_0 Phi)^-1| <= c`
//! and `|Phi(x) - Phi(y) - d_0 Phi (x - y)| <= q |x - y| (|x| + |y|)`, a
//! unique zero exists in `B(0, r)` once `r <= min(r0, 1/(2qc))` and
//! `|Phi(0)| <= r / (2c)`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_dual::{Dual2_64, DualNum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use super::{build_gluing, GluedRadialMetric, GluingConfig};
use crate::ale_library::{warped_curvature, RadialMetric};
use crate::error::NumError;
use crate::sphere_harmonics::gauss_legendre_unit;

pub type VecMap = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;

#[derive(Clone)]
pub struct FixedPointProblem {
    pub name: String,
    pub dim: usize,
    pub phi0_norm: f64,
    pub c: f64,
    pub q: f64,
    pub r0: f64,
    pub phi: VecMap,
    /// Action of `(d_0 Phi)^-1`.
    pub inverse: VecMap,
    /// Stop once `|Phi(x)| <= target`.
    pub target: f64,
    pub max_iter: usize,
}

impl std::fmt::Debug for FixedPointProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FixedPointProblem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("phi0_norm", &self.phi0_norm)
            .field("c", &self.c)
            .field("q", &self.q)
            .field("r0", &self.r0)
            .finish()
    }
}

impl FixedPointProblem {
    pub fn new(name: impl Into<String>, dim: usize, c: f64, q: f64, r0: f64, phi: VecMap, inverse: VecMap) -> Self {
        let phi0_norm = phi(&DVector::zeros(dim)).norm();
        Self { name: name.into(), dim, phi0_norm, c, q, r0, phi, inverse, target: 1e-13, max_iter: 200 }
    }

    /// `min(r0, 1/(2qc))`.
    pub fn radius(&self) -> f64 {
        let r = if self.q * self.c > 0.0 { 1.0 / (2.0 * self.q * self.c) } else { f64::INFINITY };
        self.r0.min(r)
    }

    pub fn admissible(&self) -> Result<f64, Refusal> {
        let r = self.radius();
        let bound = r / (2.0 * self.c);
        if !(self.c > 0.0 && self.q >= 0.0 && r > 0.0) {
            return Err(self.refusal(r, bound, "constants must satisfy c > 0, q >= 0, r > 0"));
        }
        if !(self.phi0_norm <= bound) {
            return Err(self.refusal(r, bound, "|Phi(0)| exceeds r / (2c)"));
        }
        Ok(r)
    }

    fn refusal(&self, r: f64, bound: f64, reason: &str) -> Refusal {
        Refusal { problem: self.name.clone(), phi0_norm: self.phi0_norm, c: self.c, q: self.q, r0: self.r0, r, bound, reason: reason.into() }
    }
}

/// Why a problem was not iterated.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Refusal {
    pub problem: String,
    pub phi0_norm: f64,
    pub c: f64,
    pub q: f64,
    pub r0: f64,
    pub r: f64,
    /// `r / (2c)`.
    pub bound: f64,
    pub reason: String,
}

#[derive(Debug, Error)]
pub enum PicardError {
    #[error("inadmissible: {} (|Phi(0)| = {:.3e}, bound {:.3e})", .0.reason, .0.phi0_norm, .0.bound)]
    Refused(Refusal),
    #[error(transparent)]
    Numeric(#[from] NumError),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PicardCertificate {
    pub r: f64,
    pub q: f64,
    pub c: f64,
    pub phi0_norm: f64,
    pub iterations: usize,
    pub final_residual: f64,
    /// The solution is the only zero in the ball of this radius.
    pub uniqueness_radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PicardSolution {
    pub x: Vec<f64>,
    pub certificate: PicardCertificate,
}

fn iterate(p: &FixedPointProblem, mut x: DVector<f64>, r: f64) -> Result<(DVector<f64>, usize, f64), NumError> {
    for n in 0..=p.max_iter {
        let f = (p.phi)(&x);
        let res = f.norm();
        if res <= p.target {
            return Ok((x, n, res));
        }
        if n == p.max_iter {
            break;
        }
        x -= (p.inverse)(&f);
        if !(x.norm() <= r) {
            return Err(NumError::Diverged(format!("iterate {} left B(0, {r:.3e}) with norm {:.3e}", n + 1, x.norm())));
        }
    }
    Err(NumError::Diverged(format!("no convergence to {:e} after {} iterations", p.target, p.max_iter)))
}

pub fn picard_solve(p: &FixedPointProblem) -> Result<PicardSolution, PicardError> {
    let r = p.admissible().map_err(PicardError::Refused)?;
    let (x, iterations, final_residual) = iterate(p, DVector::zeros(p.dim), r)?;
    Ok(PicardSolution {
        x: x.as_slice().to_vec(),
        certificate: PicardCertificate { r, q: p.q, c: p.c, phi0_norm: p.phi0_norm, iterations, final_residual, uniqueness_radius: r },
    })
}

/// Restarts from `starts` seeded points in `B(0, 0.9 r)`; returns the largest
/// distance from the solution found from the origin.
pub fn multistart_spread(p: &FixedPointProblem, starts: usize, seed: u64) -> Result<f64, PicardError> {
    let base = picard_solve(p)?;
    let r = base.certificate.r;
    let x0 = DVector::from_vec(base.x);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spread = 0.0f64;
    for _ in 0..starts {
        let dir = DVector::from_fn(p.dim, |_, _| rng.gen_range(-1.0..1.0));
        let len = 0.9 * r.min(1e6) * rng.gen_range(0.0..1.0f64).powf(1.0 / p.dim as f64);
        let start = if dir.norm() > 0.0 { dir.normalize() * len } else { dir };
        let (x, _, _) = iterate(p, start, r)?;
        spread = spread.max((x - &x0).norm());
    }
    Ok(spread)
}

/// Scalar benchmark `Phi(x) = a + x + sign x^2` with `c = q = 1`, `r0 = inf`.
pub fn quadratic_benchmark(a: f64, sign: f64) -> FixedPointProblem {
    let phi: VecMap = Arc::new(move |x: &DVector<f64>| x.map(|v| a + v + sign * v * v));
    FixedPointProblem::new(format!("a + x {} x^2, a = {a}", if sign < 0.0 { "-" } else { "+" }), 1, 1.0, 1.0, f64::INFINITY, phi, Arc::new(|f: &DVector<f64>| f.clone()))
}

/// Galerkin truncation of `Ric - lambda g = 0` on the gluing zone.
///
/// Unknowns perturb `B -> B (1 + u)`, `C -> C (1 + v)` with
/// `u, v = sum_m x_m sin(m pi s)`, `s` the normalized `log r` over
/// `[t^{1/4}/2, 4 t^{1/4}]`. Equations are the projections of
/// `r^2 (Ric - lambda g)_{11}` and `_{22}` on the same modes. `A` is the gauge
/// and the `00` component is left to the Bianchi identity.
pub struct GluingSystem {
    pub glued: GluedRadialMetric,
    pub modes: usize,
    pub log_lo: f64,
    pub log_len: f64,
    nodes: Vec<(f64, f64)>,
}

impl GluingSystem {
    pub fn new(orbifold: &RadialMetric, ale: &RadialMetric, cfg: &GluingConfig, t: f64, modes: usize) -> Result<Self, NumError> {
        if modes == 0 || 2 * modes > 50 {
            return Err(NumError::OutOfRange { what: "modes".into(), value: modes as f64, range: "1..=25".into() });
        }
        let glued = build_gluing(orbifold, ale, t, cfg)?;
        let q = t.powf(0.25);
        let (gx, gw) = gauss_legendre_unit(8 * modes.max(8));
        let nodes = gx.into_iter().zip(gw).collect();
        Ok(Self { glued, modes, log_lo: (0.5 * q).ln(), log_len: 8f64.ln(), nodes })
    }

    pub fn dim(&self) -> usize {
        2 * self.modes
    }

    pub fn perturbed(&self, x: &[f64]) -> RadialMetric {
        let base = self.glued.metric.profile.clone();
        let (lo, len, n) = (self.log_lo, self.log_len, self.modes);
        let x = x.to_vec();
        let mut m = self.glued.metric.clone();
        m.profile = Arc::new(move |r: Dual2_64| {
            let [a, b, c] = base(r);
            let s = (r.ln() - lo) / len;
            if s.re <= 0.0 || s.re >= 1.0 {
                return [a, b, c];
            }
            let (mut u, mut v) = (Dual2_64::from(0.0), Dual2_64::from(0.0));
            for k in 0..n {
                let mode = (s * (std::f64::consts::PI * (k + 1) as f64)).sin();
                u += mode * x[k];
                v += mode * x[n + k];
            }
            [a, b * (u + 1.0), c * (v + 1.0)]
        });
        m
    }

    pub fn phi(&self, x: &DVector<f64>) -> DVector<f64> {
        let m = self.perturbed(x.as_slice());
        let n = self.modes;
        let mut out = DVector::zeros(2 * n);
        for &(s, w) in &self.nodes {
            let r = (self.log_lo + self.log_len * s).exp();
            let psi = warped_curvature(&m, r).ricci - nalgebra::Matrix4::identity() * self.glued.lambda;
            for k in 0..n {
                let mode = 2.0 * w * (std::f64::consts::PI * (k + 1) as f64 * s).sin() * r * r;
                out[k] += mode * psi[(1, 1)];
                out[n + k] += mode * psi[(2, 2)];
            }
        }
        out
    }

    /// `d_0 Phi` by central differences.
    pub fn jacobian(&self) -> DMatrix<f64> {
        let d = self.dim();
        let h = 1e-6;
        let mut j = DMatrix::zeros(d, d);
        for i in 0..d {
            let mut e = DVector::zeros(d);
            e[i] = h;
            let col = (self.phi(&e) - self.phi(&-e)) / (2.0 * h);
            j.set_column(i, &col);
        }
        j
    }

    /// The fixed-point problem with `c = |J^-1|` and `q` estimated by
    /// sampling pairs in `B(0, r0)`, inflated by a safety factor 2. The
    /// sampled `q` is empirical, not a proven bound.
    pub fn problem(self: &Arc<Self>, r0: f64, samples: usize, seed: u64) -> Result<FixedPointProblem, NumError> {
        let j = self.jacobian();
        let inv = j.clone().try_inverse().ok_or_else(|| NumError::Invalid("singular linearization".into()))?;
        let c = inv.clone().svd(false, false).singular_values.max();
        let d = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut point = || {
            let v = DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
            v.normalize() * (r0 * rng.gen_range(0.1..1.0))
        };
        let mut q = 0.0f64;
        for _ in 0..samples {
            let (x, y) = (point(), point());
            let defect = (self.phi(&x) - self.phi(&y) - &j * (&x - &y)).norm();
            q = q.max(defect / ((&x - &y).norm() * (x.norm() + y.norm())));
        }
        let sys = self.clone();
        let phi: VecMap = Arc::new(move |x: &DVector<f64>| sys.phi(x));
        let inverse: VecMap = Arc::new(move |f: &DVector<f64>| &inv * f);
        let mut p = FixedPointProblem::new(format!("gluing system, t = {:e}, {} modes", self.glued.t, self.modes), d, c, 2.0 * q, r0, phi, inverse);
        p.target = 1e-12;
        Ok(p)
    }
}
