use anyhow::Result;
use orbiglue::ale_library::{eguchi_hanson_profile, o4_basis, scaling_deformation};
use orbiglue::cone_geometry::jet::{jet_from_curvature, space_form_jet};
use orbiglue::cone_geometry::make_group;
use orbiglue::curvature::CurvatureOperator;
use orbiglue::obstruction_engine::*;
use orbiglue::QuadraticJet;

use crate::config::{matrix, BasisInput, JetInput, ObstructionConfig};
use crate::output::Output;

pub fn jet(input: &JetInput, seed: u64) -> Result<QuadraticJet> {
    Ok(match input {
        JetInput::Flat {} => QuadraticJet::zero(0.0),
        JetInput::Sphere {} => space_form_jet(1.0),
        JetInput::Hyperbolic {} => space_form_jet(-1.0),
        JetInput::RandomEinstein { lambda } => random_einstein_jet(seed, *lambda),
        JetInput::RankDeficient { lambda } => rank_deficient_jet(seed, *lambda)?,
        JetInput::Curvature { rplus, rminus, ric0, scal } => {
            let op = CurvatureOperator { rplus: matrix(rplus), rminus: matrix(rminus), ric0: matrix(ric0), scal: *scal };
            jet_from_curvature(&op, scal / 4.0, true)?
        }
    })
}

/// Returns the exit code: 0 when some orientation is unobstructed, 1 otherwise.
pub fn run(cfg: &ObstructionConfig, out: &mut Output, seed: u64) -> Result<i32> {
    let group = make_group(&cfg.group)?;
    let h = jet(&cfg.jet, seed)?;
    let basis = match cfg.basis {
        BasisInput::O4 => o4_basis(),
        BasisInput::EguchiHansonScaling => {
            scaling_leading_field(scaling_deformation(&eguchi_hanson_profile(1.0)?)?.leading_radial)
        }
    };
    let rule = default_rule();
    // verifies invariance of the basis and the jet under the group
    lambda_integrals(&h, &basis, &group, &rule)?;
    let mut scan = cfg.scan.clone();
    scan.record_grid = true;
    let grid = OrientationGrid::new(&basis, &group, &rule, &scan);
    let report = orientation_scan(&h, &grid, &rule, &scan);

    let m = basis.len();
    let mut header: Vec<String> = ["parity", "n0", "n1", "n2"].iter().map(|s| s.to_string()).collect();
    header.extend((1..=m).map(|i| format!("lambda_{i}")));
    let rows: Vec<Vec<String>> = report
        .grid
        .iter()
        .map(|g| {
            let mut r = vec![(g.parity as u8).to_string(), g.n[0].to_string(), g.n[1].to_string(), g.n[2].to_string()];
            r.extend(g.lambda.iter().map(|v| v.to_string()));
            r
        })
        .collect();
    out.table("lambda_grid.csv", &header, &rows)?;
    out.record("report.toml", &report)?;
    out.note("verdict", format!("{:?}", report.verdict));
    out.note("consistent_with_det", report.consistent.to_string());
    println!(
        "verdict: {:?} (best max|lambda| = {:.3e}, tol {:.0e}); det R+ = {:.6e}, det R- = {:.6e}; consistent: {}",
        report.verdict,
        report.lambda.iter().fold(0.0f64, |a, v| a.max(v.abs())),
        report.tol,
        report.det_rplus,
        report.det_rminus,
        report.consistent
    );
    Ok(match report.verdict {
        Verdict::UnobstructedAtTolerance => 0,
        Verdict::Obstructed => 1,
    })
}
