//! Parameter sweeps over the gluing scale: weighted residual decay, `L^p`
//! pinching and the curvature-bounded warp of the round sphere.

use num_dual::{Dual2_64, DualNum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::norms::{log_grid, weighted_norm, RadialField, WeightMode, WeightedNormSpec};
use super::{build_gluing, smooth_step, GluedEnds, GluedRadialMetric, GluingConfig};
use crate::ale_library::invariants::radial_nodes;
use crate::ale_library::{Closure, RadialMetric};
use crate::error::NumError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResidualStudyConfig {
    pub t_list: Vec<f64>,
    pub beta: f64,
    pub alpha: f64,
    pub k: usize,
    pub shells: usize,
    pub inj_fraction: f64,
}

impl Default for ResidualStudyConfig {
    fn default() -> Self {
        Self { t_list: vec![1e-2, 1e-3, 1e-4, 1e-5], beta: 0.5, alpha: 0.5, k: 1, shells: 512, inj_fraction: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualRow {
    pub t: f64,
    pub beta: f64,
    /// Norm on the refined grid.
    pub norm: f64,
    /// `|N(2n) - N(n)|`.
    pub error_bar: f64,
    pub norm_coarse: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualScaling {
    pub beta: f64,
    pub rows: Vec<ResidualRow>,
    /// Least-squares slope of `log N` against `log t` on the refined grid.
    pub exponent: f64,
    pub exponent_coarse: f64,
    pub drift: f64,
    /// `(2 - beta) / 4`.
    pub bound: f64,
    pub pass: bool,
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn fit_exponent(rows: &[(f64, f64)]) -> f64 {
    if rows.iter().all(|(_, n)| *n == 0.0) {
        return f64::INFINITY;
    }
    let xs: Vec<f64> = rows.iter().map(|(t, _)| t.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|(_, n)| n.ln()).collect();
    slope(&xs, &ys)
}

/// Shell range of the residual grid: just outside the ALE core up to the
/// middle of the interval.
fn shell_range(g: &GluedRadialMetric) -> (f64, f64) {
    let lo = if g.metric.r_min > 0.0 { g.metric.r_min * (1.0 + 1e-3) } else { g.t.sqrt() * 1e-1 };
    let hi = if g.metric.r_max.is_finite() { 0.5 * (g.metric.r_min + g.metric.r_max) } else { 1.0 };
    (lo, hi)
}

pub fn residual_norm(g: &GluedRadialMetric, shells: usize, spec: &WeightedNormSpec) -> Result<f64, NumError> {
    let (lo, hi) = shell_range(g);
    let field = RadialField::residual(g, log_grid(lo, hi, shells), spec.mode)?;
    Ok(weighted_norm(&field, spec)?.total)
}

pub fn residual_scaling_study(
    orbifold: &RadialMetric,
    ale: &RadialMetric,
    gcfg: &GluingConfig,
    cfg: &ResidualStudyConfig,
) -> Result<ResidualScaling, NumError> {
    let mut ts = cfg.t_list.clone();
    ts.sort_by(|a, b| b.total_cmp(a));
    let (tmax, tmin) = (ts[0], *ts.last().ok_or_else(|| NumError::Invalid("empty t-list".into()))?);
    if (tmax / tmin).log10() < 3.0 - 1e-9 {
        return Err(NumError::Invalid(format!("t-list spans {:.2} decades, need at least 3", (tmax / tmin).log10())));
    }
    if cfg.shells < 512 {
        return Err(NumError::Resolution(format!("{} shells, need at least 512", cfg.shells)));
    }
    let spec = WeightedNormSpec {
        k: cfg.k,
        alpha: cfg.alpha,
        beta: cfg.beta,
        mode: WeightMode::Desing,
        outer: 2.0,
        inj_fraction: cfg.inj_fraction,
    };
    let rows = ts
        .par_iter()
        .map(|&t| {
            let g = build_gluing(orbifold, ale, t, gcfg)?;
            let coarse = residual_norm(&g, cfg.shells, &spec)?;
            let fine = residual_norm(&g, 2 * cfg.shells, &spec)?;
            Ok(ResidualRow { t, beta: cfg.beta, norm: fine, error_bar: (fine - coarse).abs(), norm_coarse: coarse })
        })
        .collect::<Result<Vec<_>, NumError>>()?;
    for w in rows.windows(2) {
        if w[1].norm > w[0].norm + w[0].error_bar + w[1].error_bar {
            return Err(NumError::NonMonotone(format!(
                "weighted residual grows from {:.4e} at t = {:e} to {:.4e} at t = {:e}; double the shell count",
                w[0].norm, w[0].t, w[1].norm, w[1].t
            )));
        }
    }
    let exponent = fit_exponent(&rows.iter().map(|r| (r.t, r.norm)).collect::<Vec<_>>());
    let exponent_coarse = fit_exponent(&rows.iter().map(|r| (r.t, r.norm_coarse)).collect::<Vec<_>>());
    let drift = if exponent.is_finite() { (exponent - exponent_coarse).abs() } else { 0.0 };
    let bound = (2.0 - cfg.beta) / 4.0;
    Ok(ResidualScaling { beta: cfg.beta, pass: exponent >= bound - 0.05 && drift < 0.01, rows, exponent, exponent_coarse, drift, bound })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PinchingRow {
    pub t: f64,
    pub p: f64,
    pub lp: f64,
    pub sup: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PinchingStudy {
    pub rows: Vec<PinchingRow>,
    /// `(min, max)` over `t` of `sup |Ric - lambda g|`.
    pub sup_band: (f64, f64),
    /// `L^p` strictly decreasing along the t-list for every `p`.
    pub monotone: bool,
    /// Fitted `d log L^p / d log t` per `p`.
    pub rates: Vec<(f64, f64)>,
    /// `(p, L^p)` of the orbifold's own residual outside the largest gluing
    /// region; excluded from `lp`, zero up to rounding for an Einstein orbifold.
    pub orbifold_lp: Vec<(f64, f64)>,
}

/// `int f` on `[a, b]`, refined until two resolutions agree to `tol`
/// relative to `max(|value|, floor)`.
fn integral_rel(f: &(dyn Fn(f64) -> f64 + Sync), a: f64, b: f64, scale: f64, tol: f64, floor: f64) -> Result<f64, NumError> {
    let eval = |refine: usize| radial_nodes(a, b, scale, 16, refine).iter().map(|(r, w)| w * f(*r)).sum::<f64>();
    let mut prev = eval(1);
    for refine in [2, 4, 8, 16] {
        let cur = eval(refine);
        if (cur - prev).abs() <= tol * cur.abs().max(floor) || cur == 0.0 && prev == 0.0 {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(NumError::Quadrature(format!("L^p integral did not settle on [{a:e}, {b:e}]")))
}

/// `int |Ric - lambda g|^p dvol` over one end, for `r_D <= 2 t^{1/4}`.
/// Beyond that the glued metric is bitwise the orbifold one.
fn lp_integral(g: &GluedRadialMetric, p: f64) -> Result<f64, NumError> {
    let (lo, hi) = g.zone();
    let r0 = g.metric.r_min;
    let f = |r: f64| g.residual(r).norm().powf(p) * g.metric.volume_density(r);
    let total = integral_rel(&f, r0, lo, r0.max(1e-300), 1e-8, 0.0)? + integral_rel(&f, lo, hi, lo, 1e-8, 0.0)?;
    Ok(total * g.metric.sphere_volume())
}

/// `L^p` norm of the orbifold's own residual on `r_o >= r1`, both ends.
fn orbifold_lp(m: &RadialMetric, lambda: f64, r1: f64, p: f64) -> f64 {
    let mid = 0.5 * m.r_max;
    let f = |r: f64| {
        let psi = crate::ale_library::warped_curvature(m, r).ricci - nalgebra::Matrix4::identity() * lambda;
        psi.norm().powf(p) * m.volume_density(r)
    };
    let v: f64 = radial_nodes(r1, mid, r1, 16, 4).iter().map(|(r, w)| w * f(*r)).sum();
    (2.0 * v * m.sphere_volume()).powf(1.0 / p)
}

/// Default scales for the pinching sequence, down to `1e-16`.
pub fn default_pinching_ts() -> Vec<f64> {
    (0..8).map(|i| 10f64.powi(-2 - 2 * i)).collect()
}

/// Glues `ale` at both ends of `orbifold`; `gcfg.ends` is overridden.
pub fn pinching_study(
    orbifold: &RadialMetric,
    ale: &RadialMetric,
    gcfg: &GluingConfig,
    t_list: &[f64],
    p_list: &[f64],
) -> Result<PinchingStudy, NumError> {
    if t_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(NumError::Invalid("t-list must be strictly decreasing".into()));
    }
    if let Some(p) = p_list.iter().find(|p| !(**p >= 1.0 && p.is_finite())) {
        return Err(NumError::OutOfRange { what: "p".into(), value: *p, range: "[1, inf)".into() });
    }
    let cfg = GluingConfig { ends: GluedEnds::Both, ..gcfg.clone() };
    let per_t = t_list
        .par_iter()
        .map(|&t| {
            let g = build_gluing(orbifold, ale, t, &cfg)?;
            let (a, b) = shell_range(&g);
            let sup = log_grid(a, b, 2048).into_iter().map(|r| g.residual(r).norm()).fold(0.0, f64::max);
            let lps = p_list
                .iter()
                .map(|&p| Ok(PinchingRow { t, p, lp: (2.0 * lp_integral(&g, p)?).powf(1.0 / p), sup }))
                .collect::<Result<Vec<_>, NumError>>()?;
            Ok((sup, lps))
        })
        .collect::<Result<Vec<_>, NumError>>()?;
    let sup_band = per_t.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), (s, _)| (lo.min(*s), hi.max(*s)));
    let rows: Vec<PinchingRow> = per_t.into_iter().flat_map(|(_, r)| r).collect();
    let mut monotone = true;
    let mut rates = Vec::new();
    for &p in p_list {
        let series: Vec<(f64, f64)> = rows.iter().filter(|r| r.p == p).map(|r| (r.t, r.lp)).collect();
        monotone &= series.windows(2).all(|w| w[1].1 < w[0].1);
        rates.push((p, fit_exponent(&series)));
    }
    let r1 = 2.0 * t_list.first().map_or(0.0, |t| t.powf(0.25));
    let orbifold_lp = p_list.iter().map(|&p| (p, orbifold_lp(orbifold, cfg.lambda, r1, p))).collect();
    Ok(PinchingStudy { rows, sup_band, monotone, rates, orbifold_lp })
}

/// The cutoff `chi_{b,eps}`: `1` on `[0, eps]`, `0` beyond `b eps`, logarithmic in between.
pub fn log_cutoff<D: DualNum<Primitive = f64> + Copy>(r: D, eps: f64, b: f64) -> D {
    -smooth_step((r / eps).ln() / b.ln()) + 1.0
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SinWarpReport {
    pub eps: f64,
    pub b: f64,
    pub min_sectional: f64,
    pub max_sectional: f64,
    /// Sectional curvatures at `eps / 2`, inside the `chi = 1` region.
    pub inner_sectional: f64,
    /// Sectional curvatures halfway between `b eps` and `pi`.
    pub outer_sectional: f64,
    /// `(1 - min_sectional) log b`.
    pub measured_c: f64,
    pub warning: Option<String>,
}

/// `sin x - x cos x` without cancellation at small `x`.
fn sin_minus_x_cos(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let x2 = x * x;
        x * x2 * (1.0 / 3.0 - x2 * (1.0 / 30.0 - x2 * (1.0 / 840.0 - x2 / 45360.0)))
    } else {
        x.sin() - x * x.cos()
    }
}

/// Radial and tangential sectional curvature of `dr^2 + f^2 g_{S^3}` with
/// `f = sin(k r) / k`, `k = 1 + chi_{b,eps}`, in a cancellation-free form.
pub fn sin_warp_sectional(r: f64, eps: f64, b: f64) -> (f64, f64) {
    let kd = log_cutoff(Dual2_64::from_re(r).derivative(), eps, b) + 1.0;
    let (k, k1, k2) = (kd.re, kd.v1, kd.v2);
    let x = k * r;
    let s = sin_minus_x_cos(x);
    let f = x.sin() / k;
    let g = k1 / (k * k);
    let one_minus_fp = 2.0 * (0.5 * x).sin().powi(2) + g * s;
    let fp = 1.0 - one_minus_fp;
    let dx = k + k1 * r;
    let fpp = -x.sin() * dx - (k2 / (k * k) - 2.0 * k1 * k1 / (k * k * k)) * s - g * x * x.sin() * dx;
    (-fpp / f, one_minus_fp * (1.0 + fp) / (f * f))
}

/// `dr^2 + f(r)^2 g_{S^3/Gamma}` with `f = sin((1 + chi) r) / (1 + chi)`.
pub fn sin_warp_metric(eps: f64, b: f64, group_order: usize) -> Result<(RadialMetric, SinWarpReport), NumError> {
    if !(eps > 0.0) {
        return Err(NumError::OutOfRange { what: "eps".into(), value: eps, range: "(0, inf)".into() });
    }
    if !(b > 1.0) {
        return Err(NumError::OutOfRange { what: "b".into(), value: b, range: "(1, inf)".into() });
    }
    if b * eps >= std::f64::consts::FRAC_PI_4 {
        return Err(NumError::OutOfRange { what: "b eps".into(), value: b * eps, range: "(0, pi/4)".into() });
    }
    let warning = (b * eps > 0.1).then(|| format!("b eps = {:.3} is not small; curvature bounds are not asymptotic", b * eps));
    let metric = RadialMetric::new(
        format!("sin-warp(eps={eps:e}, b={b:e})"),
        0.0,
        std::f64::consts::PI,
        Closure::Point,
        group_order,
        move |r: Dual2_64| {
            let k = log_cutoff(r, eps, b) + 1.0;
            let f = (k * r).sin() / k;
            [Dual2_64::from(1.0), f, f]
        },
    );
    let mut radii = log_grid(eps * 1e-2, b * eps, 4000);
    radii.extend((1..1000).map(|i| b * eps + (std::f64::consts::PI - 1e-3 - b * eps) * i as f64 / 1000.0));
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in radii {
        let (a, t) = sin_warp_sectional(r, eps, b);
        lo = lo.min(a).min(t);
        hi = hi.max(a).max(t);
    }
    let mean = |(a, t): (f64, f64)| 0.5 * (a + t);
    let report = SinWarpReport {
        eps,
        b,
        min_sectional: lo,
        max_sectional: hi,
        inner_sectional: mean(sin_warp_sectional(0.5 * eps, eps, b)),
        outer_sectional: mean(sin_warp_sectional(0.5 * (b * eps + std::f64::consts::PI), eps, b)),
        measured_c: (1.0 - lo) * b.ln(),
        warning,
    };
    Ok((metric, report))
}
