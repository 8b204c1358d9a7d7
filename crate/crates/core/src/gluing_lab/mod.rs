//! Radial laboratory for naive gluings of an ALE space into an orbifold
//! point: residuals in weighted norms, pinching, a curvature-bounded warp and
//! a quantified fixed-point solver.
//!
//! All metrics are cohomogeneity-one, `A^2 dr^2 + B^2 s1^2 + C^2 (s2^2 + s3^2)`,
//! in a common coordinate `r` that is geodesic distance on the orbifold side
//! and the asymptotic Euclidean radius on the ALE side.

pub mod norms;
pub mod picard;
pub mod studies;

use std::sync::Arc;

use nalgebra::Matrix4;
use num_dual::{Dual2_64, DualNum};
use serde::Serialize;

use crate::ale_library::{warped_curvature, Closure, RadialMetric};
use crate::error::NumError;

pub use norms::{weighted_norm, RadialField, WeightMode, WeightedNormSpec};
pub use picard::{multistart_spread, picard_solve, quadratic_benchmark, Refusal, FixedPointProblem, GluingSystem, PicardCertificate, PicardError, PicardSolution};
pub use studies::{
    pinching_study, residual_scaling_study, sin_warp_metric, PinchingRow, PinchingStudy, ResidualRow, ResidualScaling,
    ResidualStudyConfig, SinWarpReport,
};

/// `0` for `s <= 0`, `1` for `s >= 1`, built from `exp(-1/x)`. Exactly `0.0`
/// and `1.0` outside `(0, 1)`.
pub fn smooth_step<D: DualNum<Primitive = f64> + Copy>(s: D) -> D {
    let x = s.re();
    if x <= 0.0 {
        return D::from(0.0);
    }
    if x >= 1.0 {
        return D::from(1.0);
    }
    let f = |y: D| (y.recip() * (-1.0)).exp();
    let a = f(s);
    let b = f(-s + 1.0);
    a / (a + b)
}

/// The cutoff `chi(s)`: `0` for `s <= 1`, `1` for `s >= 2`.
pub fn cutoff<D: DualNum<Primitive = f64> + Copy>(s: D) -> D {
    smooth_step(s - 1.0)
}

/// `sup |chi^(k)|` for `k = 0, 1, 2`, tabulated on a fine grid.
pub fn cutoff_constants() -> [f64; 3] {
    let mut c = [0.0f64; 3];
    for i in 0..=20_000 {
        let s = Dual2_64::from_re(1.0 + i as f64 / 20_000.0).derivative();
        let v = cutoff(s);
        c[0] = c[0].max(v.re.abs());
        c[1] = c[1].max(v.v1.abs());
        c[2] = c[2].max(v.v2.abs());
    }
    c
}

/// Whether one or both ends of the orbifold interval are desingularized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GluedEnds {
    Inner,
    /// Both ends, for an orbifold profile symmetric under `r -> r_max - r`.
    Both,
}

#[derive(Clone, Debug, Serialize)]
pub struct GluingConfig {
    /// Admissibility requires `t < eps0^4`.
    pub eps0: f64,
    pub ends: GluedEnds,
    /// Target Einstein constant of the glued metric.
    pub lambda: f64,
    /// Einstein constant of the orbifold, if it is Einstein. Verified on
    /// samples, then used for the residual where the gluing is exactly `g_o`.
    pub orbifold_einstein: Option<f64>,
    /// Einstein constant of the unscaled ALE metric, used likewise where the
    /// gluing is exactly `t g_b`. Without it the residual there is computed,
    /// and its rounding error grows like `1/t`.
    pub ale_einstein: Option<f64>,
}

impl Default for GluingConfig {
    fn default() -> Self {
        Self { eps0: 0.5, ends: GluedEnds::Inner, lambda: 3.0, orbifold_einstein: Some(3.0), ale_einstein: Some(0.0) }
    }
}

impl GluingConfig {
    /// No Einstein assumptions on either piece.
    pub fn computed(lambda: f64, ends: GluedEnds) -> Self {
        Self { eps0: 0.5, ends, lambda, orbifold_einstein: None, ale_einstein: None }
    }
}

/// Checks `Ric = lambda g` on sample radii to `1e-8` relative to `|Rm|`.
fn verify_einstein(m: &RadialMetric, lambda: f64, lo: f64, hi: f64) -> Result<(), NumError> {
    for i in 0..=32 {
        let r = lo * (hi / lo).powf(i as f64 / 32.0);
        let c = warped_curvature(m, r);
        let defect = (c.ricci - Matrix4::identity() * lambda).amax();
        if defect > 1e-8 * c.rm_sq.sqrt().max(lambda.abs()).max(1.0) {
            return Err(NumError::Invalid(format!("{} is not Einstein with constant {lambda}: defect {defect:.3e} at r = {r:e}", m.name)));
        }
    }
    Ok(())
}

/// `chi(t^-1/4 r) g_o + (1 - chi(t^-1/4 r)) t g_b` on a common radial coordinate.
#[derive(Clone, Debug)]
pub struct GluedRadialMetric {
    pub t: f64,
    pub lambda: f64,
    pub ends: GluedEnds,
    pub metric: RadialMetric,
    pub orbifold_einstein: Option<f64>,
    pub ale_einstein: Option<f64>,
    pub orbifold: RadialMetric,
    /// The ALE metric scaled by `t`.
    pub ale_scaled: RadialMetric,
    /// `C_k` with `|d^k chi / dr^k| <= C_k / r^k` on the gluing zone.
    pub cutoff_bounds: [f64; 3],
}

impl GluedRadialMetric {
    pub fn zone(&self) -> (f64, f64) {
        let q = self.t.powf(0.25);
        (q, 2.0 * q)
    }

    /// Distance-to-singularity function `r_D`.
    pub fn r_d(&self, r: f64) -> f64 {
        match self.ends {
            GluedEnds::Inner => r.min(self.orbifold.r_max - r),
            GluedEnds::Both => r.min(self.metric.r_max + self.metric.r_min - r),
        }
    }

    /// Largest radius needed to see every distinct point: half the interval
    /// for symmetric gluings.
    pub fn half_span(&self) -> f64 {
        match self.ends {
            GluedEnds::Inner => self.orbifold.r_max.min(1e6),
            GluedEnds::Both => 0.5 * (self.metric.r_min + self.metric.r_max),
        }
    }

    /// Radius in the orbifold coordinate of the nearest glued end.
    fn local_r(&self, r: f64) -> f64 {
        match self.ends {
            GluedEnds::Both if r > 0.5 * self.orbifold.r_max => self.orbifold.r_max - r,
            _ => r,
        }
    }

    /// `Ric - lambda g` in the orthonormal frame at `r`.
    pub fn residual(&self, r: f64) -> Matrix4<f64> {
        let chi = cutoff(self.local_r(r) / self.t.powf(0.25));
        match (chi, self.orbifold_einstein, self.ale_einstein) {
            (c, Some(l), _) if c == 1.0 => Matrix4::identity() * (l - self.lambda),
            (c, _, Some(l)) if c == 0.0 => Matrix4::identity() * (l / self.t - self.lambda),
            _ => warped_curvature(&self.metric, r).ricci - Matrix4::identity() * self.lambda,
        }
    }

    /// `sup |g^D - g_e|` over the gluing zone, relative to the cone metric.
    pub fn matching_defect(&self, samples: usize) -> f64 {
        let (lo, hi) = self.zone();
        (0..=samples)
            .map(|i| {
                let r = lo + (hi - lo) * i as f64 / samples as f64;
                let [a, b, c] = self.metric.jets(r);
                (a.v * a.v - 1.0).abs().max((b.v * b.v / (r * r) - 1.0).abs()).max((c.v * c.v / (r * r) - 1.0).abs())
            })
            .fold(0.0, f64::max)
    }
}

fn scaled_profile(m: &RadialMetric, t: f64) -> impl Fn(Dual2_64) -> [Dual2_64; 3] + Send + Sync + Clone + 'static {
    let p = m.profile.clone();
    let st = t.sqrt();
    move |r: Dual2_64| {
        let [a, b, c] = p(r / st);
        [a, b * st, c * st]
    }
}

/// Builds the naive gluing of `ale` (unscaled) into the singular point of
/// `orbifold` at `r = 0`, at scale `t`.
pub fn build_gluing(orbifold: &RadialMetric, ale: &RadialMetric, t: f64, cfg: &GluingConfig) -> Result<GluedRadialMetric, NumError> {
    let limit = cfg.eps0.powi(4);
    if !(t > 0.0 && t < limit) {
        return Err(NumError::OutOfRange { what: "t".into(), value: t, range: format!("(0, eps0^4 = {limit})") });
    }
    if orbifold.r_min != 0.0 {
        return Err(NumError::Invalid("the orbifold profile must start at its singular point r = 0".into()));
    }
    let q = t.powf(0.25);
    let r_max_o = orbifold.r_max;
    if cfg.ends == GluedEnds::Both && !(r_max_o.is_finite() && 4.0 * q < 0.5 * r_max_o) {
        return Err(NumError::Invalid("both-ends gluing needs a finite orbifold interval wider than the zones".into()));
    }
    let orb = orbifold.profile.clone();
    let ale_p = scaled_profile(ale, t);
    let ale_scaled = RadialMetric::new(
        format!("{} scaled by t = {t:e}", ale.name),
        ale.r_min * t.sqrt(),
        ale.r_max * t.sqrt(),
        ale.closure.clone(),
        ale.group_order,
        ale_p.clone(),
    );
    let glue = move |r: Dual2_64| -> [Dual2_64; 3] {
        let chi = cutoff(r / q);
        if chi.re == 1.0 {
            return orb(r);
        }
        if chi.re == 0.0 {
            return ale_p(r);
        }
        let o = orb(r);
        let b = ale_p(r);
        let one = Dual2_64::from(1.0);
        std::array::from_fn(|i| (chi * o[i] * o[i] + (one - chi) * b[i] * b[i]).sqrt())
    };
    let r_min = ale.r_min * t.sqrt();
    let (r_max, profile): (f64, Arc<dyn Fn(Dual2_64) -> [Dual2_64; 3] + Send + Sync>) = match cfg.ends {
        GluedEnds::Inner => (r_max_o, Arc::new(glue)),
        GluedEnds::Both => {
            let top = r_max_o - r_min;
            let mid = 0.5 * r_max_o;
            let g = glue.clone();
            // second end by the reflection r -> r_max_o - r of the orbifold coordinate
            (top, Arc::new(move |r: Dual2_64| if r.re <= mid { g(r) } else { g(-r + r_max_o) }))
        }
    };
    let metric = RadialMetric {
        name: format!("glued({}, {}, t = {t:e})", orbifold.name, ale.name),
        r_min,
        r_max,
        profile,
        closure: ale.closure.clone(),
        group_order: orbifold.group_order,
    };
    let cutoff_bounds = verify_cutoff_bounds(q)?;
    if let Some(l) = cfg.orbifold_einstein {
        let hi = if r_max_o.is_finite() { 0.95 * r_max_o } else { 10.0 };
        verify_einstein(orbifold, l, hi * 1e-3, hi)?;
    }
    if let Some(l) = cfg.ale_einstein {
        let lo = if ale.r_min > 0.0 { ale.r_min * 1.01 } else { 1e-3 };
        verify_einstein(ale, l, lo, lo.max(1.0) * 1e3)?;
    }
    Ok(GluedRadialMetric {
        t,
        lambda: cfg.lambda,
        ends: cfg.ends,
        metric,
        orbifold_einstein: cfg.orbifold_einstein,
        ale_einstein: cfg.ale_einstein,
        orbifold: orbifold.clone(),
        ale_scaled,
        cutoff_bounds,
    })
}

/// Checks `|d^k/dr^k chi(r / q)| <= C_k / r^k` on the zone with `C_k = 2^k sup |chi^(k)|`.
fn verify_cutoff_bounds(q: f64) -> Result<[f64; 3], NumError> {
    let c = cutoff_constants();
    let bounds = [c[0], 2.0 * c[1], 4.0 * c[2]];
    for i in 0..=400 {
        let r = q * (1.0 + i as f64 / 400.0);
        let v = cutoff(Dual2_64::from_re(r).derivative() / q);
        let (d1, d2) = (v.v1.abs() * r, v.v2.abs() * r * r);
        if d1 > bounds[1] * (1.0 + 1e-9) || d2 > bounds[2] * (1.0 + 1e-9) {
            return Err(NumError::Invalid(format!("cutoff derivative bound fails at r = {r:e}")));
        }
    }
    Ok(bounds)
}

/// The flat cone as an orbifold profile on `(0, r_max)`.
pub fn flat_orbifold(group_order: usize, r_max: f64) -> RadialMetric {
    let mut m = RadialMetric::flat(group_order);
    m.r_max = r_max;
    m
}

/// The flat cone, viewed as an ALE space whose bolt is replaced by an open end at `r_min`.
pub fn flat_ale(group_order: usize, r_min: f64) -> RadialMetric {
    let mut m = RadialMetric::flat(group_order);
    m.r_min = r_min;
    m.closure = Closure::Open;
    m
}
