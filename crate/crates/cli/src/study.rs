use std::sync::Arc;

use anyhow::{bail, Result};
use nalgebra::Matrix4;
use orbiglue::ale_library::{eguchi_hanson_profile, RadialMetric};
use orbiglue::annulus_solver::{dirichlet_extend, AnnulusConfig, AnnulusProblem};
use orbiglue::cone_geometry::make_group;
use orbiglue::gluing_lab::norms::log_grid;
use orbiglue::gluing_lab::studies::sin_warp_sectional;
use orbiglue::gluing_lab::*;
use orbiglue::sphere_harmonics::HarmonicCache;
use serde::Serialize;

use crate::config::*;
use crate::output::Output;

fn pieces(g: &GluingSection) -> Result<(RadialMetric, RadialMetric, GluingConfig)> {
    g.validate()?;
    let cfg = GluingConfig { eps0: g.eps0, ..Default::default() };
    Ok((RadialMetric::round_sphere(2), eguchi_hanson_profile(g.ale_scale)?, cfg))
}

fn band_limited(x: &[f64; 4], outer: bool) -> Matrix4<f64> {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    if outer {
        let mut m = Matrix4::identity() * (-0.1 + x[1] * x[3] / r2);
        m[(1, 1)] += x[0] * x[0] * x[1] * x[1] / (r2 * r2);
        m
    } else {
        let mut m = Matrix4::identity() * (0.3 + x[0] * x[1] / r2);
        m[(0, 2)] = (x[2] * x[2] - x[3] * x[3]) / r2;
        m[(2, 0)] = m[(0, 2)];
        m
    }
}

#[derive(Serialize)]
struct ModeRow {
    eps: f64,
    component: usize,
    k: usize,
    index: usize,
    plus: f64,
    minus: f64,
    data_inner: f64,
    data_outer: f64,
}

#[derive(Serialize)]
struct OracleRow {
    eps: f64,
    shells: usize,
    fd_relative_error: f64,
    truncation_residual: f64,
}

pub fn annulus(cfg: &AnnulusStudy, out: &mut Output) -> Result<i32> {
    if cfg.shells < 16 {
        bail!("grid under-resolved: shells = {} < 16; refine the grid (shells >= 128 recommended)", cfg.shells);
    }
    let group = make_group(&cfg.group)?;
    let cache = HarmonicCache::new();
    let acfg = AnnulusConfig { k_max: cfg.k_max, ..Default::default() };
    let constant = Matrix4::new(1.0, 0.2, 0.0, 0.0, 0.2, -0.5, 0.1, 0.0, 0.0, 0.1, 0.3, 0.0, 0.0, 0.0, 0.0, 2.0);
    let data = cfg.data;
    let inner = move |x: &[f64; 4]| match data {
        AnnulusData::BandLimited => band_limited(x, false),
        AnnulusData::Constant => constant,
    };
    let outer = move |x: &[f64; 4]| match data {
        AnnulusData::BandLimited => band_limited(x, true),
        AnnulusData::Constant => constant,
    };
    let mut modes = Vec::new();
    let mut oracle = Vec::new();
    for &eps in &cfg.eps_list {
        let p = AnnulusProblem::from_fields(eps, &group, &inner, &outer, &acfg, &cache)?;
        let sol = dirichlet_extend(&p, &cache)?;
        for m in &sol.modes {
            modes.push(ModeRow {
                eps,
                component: m.component,
                k: m.k,
                index: m.index,
                plus: m.plus,
                minus: m.minus,
                data_inner: m.data_inner,
                data_outer: m.data_outer,
            });
        }
        let err = sol.compare_with_fd(cfg.shells);
        println!("eps = {eps}: {} modes, finite-difference relative error {err:.3e}", sol.modes.len());
        oracle.push(OracleRow { eps, shells: cfg.shells, fd_relative_error: err, truncation_residual: p.truncation_residual });
    }
    let converged = oracle.iter().all(|o| o.fd_relative_error <= 1e-3);
    out.csv("modes.csv", &modes)?;
    out.csv("oracle.csv", &oracle)?;
    out.note("grid_converged", converged.to_string());
    Ok(0)
}

#[derive(Serialize)]
struct FitRow {
    beta: f64,
    exponent: f64,
    exponent_coarse: f64,
    drift: f64,
    bound: f64,
    pass: bool,
}

pub fn residual_scaling(cfg: &ResidualScalingStudy, out: &mut Output) -> Result<i32> {
    let (orb, ale, gcfg) = pieces(&cfg.gluing)?;
    let s = residual_scaling_study(&orb, &ale, &gcfg, &cfg.study)?;
    out.csv("residual_scaling.csv", &s.rows)?;
    let fit = FitRow { beta: s.beta, exponent: s.exponent, exponent_coarse: s.exponent_coarse, drift: s.drift, bound: s.bound, pass: s.pass };
    println!(
        "beta = {}: exponent {:.4} (coarse {:.4}, drift {:.4}), bound {:.4}",
        s.beta, s.exponent, s.exponent_coarse, s.drift, s.bound
    );
    out.csv("fit.csv", &[fit])?;
    out.note("exponent", s.exponent.to_string());
    out.note("grid_converged", (s.drift < 0.01).to_string());
    Ok(0)
}

#[derive(Serialize)]
struct RateRow {
    p: f64,
    rate: f64,
}

#[derive(Serialize)]
struct OrbifoldRow {
    p: f64,
    orbifold_lp: f64,
}

pub fn pinching(cfg: &PinchingStudyConfig, out: &mut Output) -> Result<i32> {
    let (orb, ale, gcfg) = pieces(&cfg.gluing)?;
    let s = pinching_study(&orb, &ale, &gcfg, &cfg.t_list, &cfg.p_list)?;
    out.csv("pinching.csv", &s.rows)?;
    let rates: Vec<RateRow> = s.rates.iter().map(|&(p, rate)| RateRow { p, rate }).collect();
    out.csv("rates.csv", &rates)?;
    let orb_rows: Vec<OrbifoldRow> = s.orbifold_lp.iter().map(|&(p, orbifold_lp)| OrbifoldRow { p, orbifold_lp }).collect();
    out.csv("orbifold_lp.csv", &orb_rows)?;
    for r in &rates {
        println!("p = {}: L^p decays like t^{:.3}", r.p, r.rate);
    }
    println!("sup |Ric - 3g| in [{:.4}, {:.4}]; monotone: {}", s.sup_band.0, s.sup_band.1, s.monotone);
    out.note("monotone", s.monotone.to_string());
    out.note("sup_band", format!("{},{}", s.sup_band.0, s.sup_band.1));
    Ok(0)
}

#[derive(Serialize)]
struct WarpRow {
    r: f64,
    radial: f64,
    tangential: f64,
}

pub fn sin_warp(cfg: &SinWarpStudy, out: &mut Output) -> Result<i32> {
    if cfg.samples < 2 {
        bail!("grid under-resolved: samples = {} < 2; refine the grid", cfg.samples);
    }
    let (_, rep) = sin_warp_metric(cfg.eps, cfg.b, cfg.group_order)?;
    let hi = (4.0 * cfg.eps * cfg.b).min(1.0);
    let rows: Vec<WarpRow> = log_grid(cfg.eps / 100.0, hi, cfg.samples)
        .into_iter()
        .map(|r| {
            let (radial, tangential) = sin_warp_sectional(r, cfg.eps, cfg.b);
            WarpRow { r, radial, tangential }
        })
        .collect();
    out.csv("sin_warp.csv", &rows)?;
    out.csv("summary.csv", std::slice::from_ref(&rep))?;
    if let Some(w) = &rep.warning {
        eprintln!("warning: {w}");
        out.note("warning", w.clone());
    }
    println!("min sectional {:.6}, measured C = {:.4}", rep.min_sectional, rep.measured_c);
    Ok(0)
}

#[derive(Serialize)]
struct SolutionRow {
    index: usize,
    x: f64,
}

pub fn picard(cfg: &PicardStudy, out: &mut Output, seed: u64) -> Result<i32> {
    let (mut problem, overrides, starts) = match cfg {
        PicardStudy::Quadratic { a, sign, overrides, starts } => (quadratic_benchmark(*a, *sign), overrides, *starts),
        PicardStudy::Gluing { t, modes, r0, samples, overrides, starts, gluing } => {
            let (orb, ale, gcfg) = pieces(gluing)?;
            let sys = Arc::new(GluingSystem::new(&orb, &ale, &gcfg, *t, *modes)?);
            (sys.problem(*r0, *samples, seed)?, overrides, *starts)
        }
    };
    if let Some(c) = overrides.c {
        problem.c = c;
    }
    if let Some(q) = overrides.q {
        problem.q = q;
    }
    if let Some(r0) = overrides.r0 {
        problem.r0 = r0;
    }
    match picard_solve(&problem) {
        Ok(sol) => {
            let spread = multistart_spread(&problem, starts, seed)?;
            let rows: Vec<SolutionRow> = sol.x.iter().enumerate().map(|(index, &x)| SolutionRow { index, x }).collect();
            out.csv("solution.csv", &rows)?;
            out.record("certificate.toml", &sol.certificate)?;
            out.note("multistart_spread", spread.to_string());
            println!(
                "{}: converged in {} iterations, residual {:.3e}, radius {:.3e}, multistart spread {spread:.3e}",
                problem.name, sol.certificate.iterations, sol.certificate.final_residual, sol.certificate.r
            );
            Ok(0)
        }
        Err(PicardError::Refused(r)) => {
            println!("{}: refused, {} (|Phi(0)| = {:.3e} > r/(2c) = {:.3e})", r.problem, r.reason, r.phi0_norm, r.bound);
            out.record("refusal.toml", &r)?;
            out.note("refused", "true".into());
            Ok(1)
        }
        Err(e) => Err(e.into()),
    }
}
