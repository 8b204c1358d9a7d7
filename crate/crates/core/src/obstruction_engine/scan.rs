//! Scan of the obstruction over orientations `SO(4)/U(2) = S^2`, with an
//! optional orientation reversal.

use nalgebra::{Matrix3, Matrix4, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{jet_norm, normalized_basis, LambdaKernel, PairingForm};
use crate::ale_library::asymptotics::DeformationAsymptotics;
use crate::cone_geometry::group::{left_mult, GroupAction, Quat};
use crate::cone_geometry::jet::{curvature_from_jet, jet_from_curvature, QuadraticJet};
use crate::curvature::CurvatureOperator;
use crate::error::GeomError;
use crate::sphere_harmonics::QuadratureRule;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    /// Number of points of the Fibonacci net on `S^2`.
    pub grid_points: usize,
    pub reflection: bool,
    /// Threshold on `max |lambda_i|` for the normalized jet and basis.
    pub tol: f64,
    /// Number of best grid points refined by Gauss-Newton.
    pub polish_starts: usize,
    pub record_grid: bool,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { grid_points: 10_000, reflection: true, tol: 1e-6, polish_starts: 4, record_grid: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Obstructed,
    UnobstructedAtTolerance,
}

/// Unit quaternion `q` with `q i q^-1 = n`.
pub fn orientation_quat(n: &Vector3<f64>) -> Quat {
    let n = n.normalize();
    // q = (1 - n i) / |1 - n i|, with n i = -n.e1 + n x e1
    let c = Vector3::new(1.0, 0.0, 0.0);
    let cr = n.cross(&c);
    let w = 1.0 + n.dot(&c);
    if w < 1e-12 {
        return [0.0, 0.0, 1.0, 0.0];
    }
    let q = [w, -cr[0], -cr[1], -cr[2]];
    let s = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    q.map(|v| v / s)
}

/// Orientation map for direction `n`. With `parity` the reflection acts first
/// on the jet, so the left rotation then moves the former `R_-` block.
pub fn orientation_map(n: &Vector3<f64>, parity: bool) -> Matrix4<f64> {
    let l = left_mult(&orientation_quat(n));
    if parity {
        Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, 1.0, -1.0)) * l
    } else {
        l
    }
}

/// Fibonacci net of `n` points on `S^2`.
pub fn fibonacci_sphere(n: usize) -> Vec<Vector3<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = (1.0 - z * z).sqrt();
            let th = golden * i as f64;
            Vector3::new(z, r * th.cos(), r * th.sin())
        })
        .collect()
}

/// Precomputed rotated kernels on the net, shared across jets.
pub struct OrientationGrid {
    pub points: Vec<Vector3<f64>>,
    pub reflection: bool,
    base: LambdaKernel,
    kernels: Vec<Vec<f64>>,
    nbasis: usize,
}

impl OrientationGrid {
    /// `basis` is normalized to unit `L^2(S^3)` before use.
    pub fn new(basis: &DeformationAsymptotics, group: &GroupAction, rule: &QuadratureRule, cfg: &ScanConfig) -> Self {
        let basis = normalized_basis(basis, rule);
        let base = LambdaKernel::new(&basis, group.order(), rule, PairingForm::Bianchi);
        let points = fibonacci_sphere(cfg.grid_points.max(1));
        let parities: &[bool] = if cfg.reflection { &[false, true] } else { &[false] };
        let kernels = parities
            .iter()
            .flat_map(|&p| points.iter().map(move |n| (p, *n)))
            .collect::<Vec<_>>()
            .par_iter()
            .map(|(p, n)| base.rotated(&orientation_map(n, *p)).kernels.concat())
            .collect();
        Self { points, reflection: cfg.reflection, base, kernels, nbasis: basis.len() }
    }

    fn lambda_at(&self, t: &[f64], slot: usize) -> Vec<f64> {
        self.kernels[slot].chunks(256).map(|k| k.iter().zip(t).map(|(a, b)| a * b).sum()).collect()
    }

    fn lambda_off_grid(&self, t: &[f64], n: &Vector3<f64>, parity: bool) -> Vec<f64> {
        self.base.rotated(&orientation_map(n, parity)).apply_flat(t)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GridRow {
    pub parity: bool,
    pub n: [f64; 3],
    pub lambda: Vec<f64>,
}

/// Best orientation for one parity.
#[derive(Clone, Debug, Serialize)]
pub struct ParityResult {
    pub parity: bool,
    pub n: [f64; 3],
    pub lambda: Vec<f64>,
    pub max_abs: f64,
    pub grid_min: f64,
    /// `det R_+` of the jet in this orientation, `det R_-` for the reflected one.
    pub det_block: f64,
    pub sigma_min_block: f64,
    pub predicate: bool,
    pub unobstructed: bool,
}

/// Result of an orientation scan.
#[derive(Clone, Debug, Serialize)]
pub struct ObstructionReport {
    /// `lambda` at the best orientation, for the normalized jet and basis.
    pub lambda: Vec<f64>,
    /// `lambda` at the identity orientation.
    pub lambda_identity: Vec<f64>,
    pub det_rplus: f64,
    pub det_rminus: f64,
    pub jet_norm: f64,
    pub orientation: String,
    pub grid_points: usize,
    pub reflection: bool,
    pub tol: f64,
    pub verdict: Verdict,
    pub parities: Vec<ParityResult>,
    /// Whether the verdict agrees with `det R_+ = 0` (or `det R_- = 0` with
    /// reflection) at the same tolerance.
    pub consistent: bool,
    #[serde(skip)]
    pub grid: Vec<GridRow>,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn tangent_basis(n: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let a = if n[0].abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let t1 = n.cross(&a).normalize();
    (t1, n.cross(&t1))
}

/// Gauss-Newton on `|lambda(n)|^2` over the sphere.
fn polish(grid: &OrientationGrid, t: &[f64], start: Vector3<f64>, parity: bool) -> (Vector3<f64>, Vec<f64>) {
    let f = |n: &Vector3<f64>| grid.lambda_off_grid(t, n, parity);
    let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    let mut n = start;
    let mut val = f(&n);
    let h = 1e-6;
    for _ in 0..40 {
        let (t1, t2) = tangent_basis(&n);
        let m = grid.nbasis;
        let mut jac = nalgebra::DMatrix::zeros(m, 2);
        for (c, dir) in [t1, t2].iter().enumerate() {
            let p = f(&(n + dir * h).normalize());
            let q = f(&(n - dir * h).normalize());
            for r in 0..m {
                jac[(r, c)] = (p[r] - q[r]) / (2.0 * h);
            }
        }
        let rhs = nalgebra::DVector::from_iterator(m, val.iter().map(|v| -v));
        let Ok(step) = jac.clone().svd(true, true).solve(&rhs, 1e-14) else { break };
        let mut s = 1.0;
        let mut improved = false;
        while s > 1e-4 {
            let cand = (n + (t1 * step[0] + t2 * step[1]) * s).normalize();
            let cv = f(&cand);
            if sq(&cv) < sq(&val) {
                n = cand;
                val = cv;
                improved = true;
                break;
            }
            s *= 0.5;
        }
        if !improved || sq(&val) < 1e-30 {
            break;
        }
    }
    (n, val)
}

/// Scans `lambda(phi^* H2)` over the orientation net, polishes the best
/// candidates and cross-checks against `det R_+ = 0`.
pub fn orientation_scan(h2: &QuadraticJet, grid: &OrientationGrid, rule: &QuadratureRule, cfg: &ScanConfig) -> ObstructionReport {
    let norm = jet_norm(h2, rule);
    let t: Vec<f64> = if norm > 0.0 { h2.scale(1.0 / norm).coeff_vector() } else { h2.coeff_vector() };
    let op = curvature_from_jet(h2);
    let op_n = if norm > 0.0 { curvature_from_jet(&h2.scale(1.0 / norm)) } else { op.clone() };
    let npts = grid.points.len();
    let parities: Vec<bool> = if grid.reflection { vec![false, true] } else { vec![false] };
    let mut rows = Vec::new();
    let mut results = Vec::new();
    for (pi, &parity) in parities.iter().enumerate() {
        let vals: Vec<Vec<f64>> = (0..npts).into_par_iter().map(|i| grid.lambda_at(&t, pi * npts + i)).collect();
        let mut order: Vec<usize> = (0..npts).collect();
        order.sort_by(|a, b| max_abs(&vals[*a]).total_cmp(&max_abs(&vals[*b])));
        let grid_min = max_abs(&vals[order[0]]);
        let mut best = (grid.points[order[0]], vals[order[0]].clone());
        for &i in order.iter().take(cfg.polish_starts.max(1)) {
            let (n, v) = polish(grid, &t, grid.points[i], parity);
            if max_abs(&v) < max_abs(&best.1) {
                best = (n, v);
            }
        }
        let block = if parity { op_n.rminus } else { op_n.rplus };
        let sigma = super::smallest_singular(&block);
        let m = max_abs(&best.1);
        results.push(ParityResult {
            parity,
            n: [best.0[0], best.0[1], best.0[2]],
            lambda: best.1,
            max_abs: m,
            grid_min,
            det_block: if parity { op.rminus.determinant() } else { op.rplus.determinant() },
            sigma_min_block: sigma,
            predicate: sigma <= cfg.tol,
            unobstructed: m <= cfg.tol,
        });
        if cfg.record_grid {
            rows.extend(grid.points.iter().zip(vals).map(|(n, l)| GridRow { parity, n: [n[0], n[1], n[2]], lambda: l }));
        }
    }
    let best = results.iter().min_by(|a, b| a.max_abs.total_cmp(&b.max_abs)).expect("at least one parity");
    let unobstructed = results.iter().any(|r| r.unobstructed);
    let predicate = results.iter().any(|r| r.predicate);
    ObstructionReport {
        lambda: best.lambda.clone(),
        lambda_identity: grid.base.apply_flat(&t),
        det_rplus: op.rplus.determinant(),
        det_rminus: op.rminus.determinant(),
        jet_norm: norm,
        orientation: format!(
            "n = ({:.6}, {:.6}, {:.6}){}",
            best.n[0],
            best.n[1],
            best.n[2],
            if best.parity { ", reflected" } else { "" }
        ),
        grid_points: npts,
        reflection: grid.reflection,
        tol: cfg.tol,
        verdict: if unobstructed { Verdict::UnobstructedAtTolerance } else { Verdict::Obstructed },
        parities: results.clone(),
        consistent: unobstructed == predicate,
        grid: rows,
    }
}

fn random_traceless(rng: &mut ChaCha8Rng) -> Matrix3<f64> {
    let m = Matrix3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
    let s = (m + m.transpose()) * 0.5;
    s - Matrix3::identity() * (s.trace() / 3.0)
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Matrix3<f64> {
    let m = Matrix3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
    let q = m.qr().q();
    if q.determinant() < 0.0 {
        -q
    } else {
        q
    }
}

/// Einstein-compatible jet with random traceless `W_+`, `W_-` and `Ric = lambda g`.
pub fn random_einstein_jet(seed: u64, lambda: f64) -> QuadraticJet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wp = random_traceless(&mut rng);
    let wm = random_traceless(&mut rng);
    jet_from_curvature(&CurvatureOperator::einstein(&wp, &wm, lambda), lambda, true).expect("Einstein by construction")
}

/// Einstein-compatible jet whose `R_+` has a zero eigenvalue.
pub fn rank_deficient_jet(seed: u64, lambda: f64) -> Result<QuadraticJet, GeomError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // tr R_+ = scal / 4 = lambda
    let mu: f64 = rng.gen_range(-1.0..1.0);
    let rp = Matrix3::from_diagonal(&Vector3::new(mu, lambda - mu, 0.0));
    let rot = random_rotation(&mut rng);
    let wp = rot * rp * rot.transpose() - Matrix3::identity() * (lambda / 3.0);
    let wm = random_traceless(&mut rng);
    jet_from_curvature(&CurvatureOperator::einstein(&wp, &wm, lambda), lambda, true)
}
