//! Quadrature on `S^3` and `Gamma`-invariant spherical harmonics.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

use nalgebra::{DMatrix, DVector, Matrix4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cone_geometry::field::{transform_values, TensorKind};
use crate::cone_geometry::group::GroupAction;
use crate::error::{GeomError, NumError};
use crate::linalg::null_space_scaled;
use crate::poly::{harmonic_basis_raw, monomials, sphere_monomial_integral, Exp, Poly};

pub const MAX_QUADRATURE_DEGREE: usize = 40;
pub const DEFAULT_DEGREE_CAP: usize = 16;

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = 0.5 * (1.0 - z);
        w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Product rule on the unit `S^3`.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub nodes: Vec<[f64; 4]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(&[f64; 4]) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(x)).sum()
    }

    /// Largest error over all monomials of degree at most `self.degree`.
    pub fn monomial_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for d in 0..=self.degree {
            for e in monomials(d) {
                let q = self.integrate(|x| monomial_value(&e, x));
                worst = worst.max((q - sphere_monomial_integral(&e)).abs());
            }
        }
        worst
    }
}

fn monomial_value(e: &Exp, x: &[f64; 4]) -> f64 {
    (0..4).map(|k| x[k].powi(e[k] as i32)).product()
}

/// Rule exact for polynomials of degree at most `degree`.
///
/// Hopf coordinates `x = (cos n cos a, cos n sin a, sin n cos b, sin n sin b)`
/// with `u = sin^2 n` give `dS = (1/2) du da db`; the angles use the trapezoid
/// rule and `u` Gauss-Legendre.
pub fn build_quadrature(degree: usize) -> Result<QuadratureRule, NumError> {
    if degree > MAX_QUADRATURE_DEGREE {
        return Err(NumError::OutOfRange {
            what: "quadrature degree".into(),
            value: degree as f64,
            range: format!("0..={MAX_QUADRATURE_DEGREE}"),
        });
    }
    let na = degree + 1;
    let nu = degree / 4 + 1;
    let (us, uw) = gauss_legendre_unit(nu);
    let da = 2.0 * PI / na as f64;
    let mut nodes = Vec::with_capacity(na * na * nu);
    let mut weights = Vec::with_capacity(na * na * nu);
    for (u, wu) in us.iter().zip(&uw) {
        let (c, s) = ((1.0 - u).sqrt(), u.sqrt());
        for i in 0..na {
            let a = i as f64 * da;
            for j in 0..na {
                let b = j as f64 * da;
                nodes.push([c * a.cos(), c * a.sin(), s * b.cos(), s * b.sin()]);
                weights.push(0.5 * wu * da * da);
            }
        }
    }
    Ok(QuadratureRule { nodes, weights, degree })
}

/// Values of all monomials of degree `k` at the points, one row per point.
pub fn monomial_matrix(k: usize, points: &[[f64; 4]]) -> (Vec<Exp>, DMatrix<f64>) {
    let mons = monomials(k);
    let mut m = DMatrix::zeros(points.len(), mons.len());
    for (i, x) in points.iter().enumerate() {
        let pw: Vec<Vec<f64>> = (0..4)
            .map(|v| {
                let mut p = vec![1.0; k + 1];
                for d in 1..=k {
                    p[d] = p[d - 1] * x[v];
                }
                p
            })
            .collect();
        for (j, e) in mons.iter().enumerate() {
            m[(i, j)] = pw[0][e[0] as usize] * pw[1][e[1] as usize] * pw[2][e[2] as usize] * pw[3][e[3] as usize];
        }
    }
    (mons, m)
}

/// Exact `L^2(S^3)` Gram matrix of the monomials of degree `k`.
fn moment_matrix(mons: &[Exp]) -> DMatrix<f64> {
    let n = mons.len();
    DMatrix::from_fn(n, n, |i, j| {
        let e = [mons[i][0] + mons[j][0], mons[i][1] + mons[j][1], mons[i][2] + mons[j][2], mons[i][3] + mons[j][3]];
        sphere_monomial_integral(&e)
    })
}

fn random_sphere_points(n: usize, seed: u64) -> Vec<[f64; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| loop {
            let v: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let r2: f64 = v.iter().map(|a| a * a).sum();
            if r2 > 0.05 && r2 <= 1.0 {
                let r = r2.sqrt();
                break v.map(|a| a / r);
            }
        })
        .collect()
}

/// `L^2(S^3)`-orthonormal basis of `Gamma`-invariant harmonic polynomials of
/// degree `k`.
pub fn invariant_harmonic_basis(group: &GroupAction, k: usize) -> Result<Vec<Poly>, GeomError> {
    if k > DEFAULT_DEGREE_CAP {
        return Err(GeomError::DegreeCap { degree: k as i32, cap: DEFAULT_DEGREE_CAP as i32 });
    }
    let raw = harmonic_basis_raw(k);
    let mons = monomials(k);
    let c = DMatrix::from_fn(mons.len(), raw.len(), |i, j| raw[j].coeff(&mons[i]));
    let mut coeffs = c.clone();
    if !group.is_trivial() {
        let pts = random_sphere_points(2 * raw.len() + 8, 0x5eed + k as u64);
        let (_, at_x) = monomial_matrix(k, &pts);
        let base = &at_x * &c;
        let mut rows: Vec<DMatrix<f64>> = Vec::new();
        for g in &group.generators {
            let gpts: Vec<[f64; 4]> = pts.iter().map(|x| apply(g, x)).collect();
            let (_, at_gx) = monomial_matrix(k, &gpts);
            rows.push(&at_gx * &c - &base);
        }
        let n = raw.len();
        let total: usize = rows.iter().map(|r| r.nrows()).sum();
        let mut d = DMatrix::zeros(total, n);
        let mut r0 = 0;
        for r in &rows {
            d.view_mut((r0, 0), (r.nrows(), n)).copy_from(r);
            r0 += r.nrows();
        }
        let ns = null_space_scaled(&d, 1e-8, base.norm());
        coeffs = &c * ns;
    }
    if coeffs.ncols() == 0 {
        return Ok(Vec::new());
    }
    let gram = coeffs.transpose() * moment_matrix(&mons) * &coeffs;
    let eig = nalgebra::SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let mut out = Vec::with_capacity(order.len());
    for i in order {
        let lam = eig.eigenvalues[i];
        let v = &coeffs * eig.eigenvectors.column(i) / lam.sqrt();
        out.push(canonical_sign(Poly::from_coeffs(&mons, v.as_slice()).prune(1e-14)));
    }
    Ok(out)
}

/// Flips the sign so the largest coefficient is positive.
fn canonical_sign(p: Poly) -> Poly {
    let lead = p.terms().map(|(_, c)| *c).fold(0.0_f64, |a, c| if c.abs() > a.abs() + 1e-12 { c } else { a });
    if lead < 0.0 {
        p.scale(-1.0)
    } else {
        p
    }
}

fn apply(g: &Matrix4<f64>, x: &[f64; 4]) -> [f64; 4] {
    std::array::from_fn(|i| (0..4).map(|j| g[(i, j)] * x[j]).sum())
}

/// Read-concurrent cache of invariant harmonic bases keyed by group label and degree.
#[derive(Default)]
pub struct HarmonicCache {
    inner: RwLock<HashMap<(String, usize), Arc<Vec<Poly>>>>,
}

impl HarmonicCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, group: &GroupAction, k: usize) -> Result<Arc<Vec<Poly>>, GeomError> {
        let key = (group.label(), k);
        if let Some(v) = self.inner.read().expect("cache lock").get(&key) {
            return Ok(v.clone());
        }
        let basis = Arc::new(invariant_harmonic_basis(group, k)?);
        self.inner.write().expect("cache lock").entry(key).or_insert_with(|| basis.clone());
        Ok(basis)
    }
}

/// Coefficients keyed by `(component, k, index)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ModeCoefficients {
    pub radius: f64,
    pub ncomp: usize,
    pub k_max: usize,
    pub entries: Vec<ModeEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeEntry {
    pub component: usize,
    pub k: usize,
    pub index: usize,
    pub value: f64,
}

impl ModeCoefficients {
    pub fn sum_of_squares(&self) -> f64 {
        self.entries.iter().map(|e| e.value * e.value).sum()
    }

    /// Energy per harmonic degree.
    pub fn k_profile(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.k_max + 1];
        for e in &self.entries {
            out[e.k] += e.value * e.value;
        }
        out
    }

    /// Rows `(component, k, index, value)` for CSV export.
    pub fn csv_rows(&self) -> Vec<(usize, usize, usize, f64)> {
        self.entries.iter().map(|e| (e.component, e.k, e.index, e.value)).collect()
    }

    pub fn get(&self, component: usize, k: usize, index: usize) -> f64 {
        self.entries
            .iter()
            .find(|e| e.component == component && e.k == k && e.index == index)
            .map_or(0.0, |e| e.value)
    }
}

/// Harmonic bases used for the Cartesian components of a tensor of `kind`.
///
/// Scalars use the `Gamma`-invariant harmonics. Tensor components are not
/// invariant functions in general; when every element of `Gamma` is `+-I` the
/// components are functions of parity `(-1)^rank` and the matching degrees are
/// kept, otherwise the full harmonic space is used.
pub struct ComponentBases {
    pub by_degree: Vec<Arc<Vec<Poly>>>,
}

pub fn component_bases(
    group: &GroupAction,
    kind: TensorKind,
    k_max: usize,
    cache: &HarmonicCache,
) -> Result<ComponentBases, GeomError> {
    let trivial = crate::cone_geometry::make_group(&crate::cone_geometry::GroupSpec::Trivial)?;
    let central = group
        .elements()
        .iter()
        .all(|g| (g - Matrix4::identity()).amax() < 1e-12 || (g + Matrix4::identity()).amax() < 1e-12);
    let rank = match kind {
        TensorKind::Scalar => 0,
        TensorKind::Covector => 1,
        TensorKind::Sym2 => 2,
    };
    let has_minus = group.elements().iter().any(|g| (g + Matrix4::identity()).amax() < 1e-12);
    let mut by_degree = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let basis = if kind == TensorKind::Scalar {
            cache.get(group, k)?
        } else if central && has_minus && (k + rank) % 2 == 1 {
            Arc::new(Vec::new())
        } else {
            cache.get(&trivial, k)?
        };
        by_degree.push(basis);
    }
    Ok(ComponentBases { by_degree })
}

/// Samples of a tensor field restricted to the sphere of radius `radius`.
pub fn decompose(
    data: &dyn Fn(&[f64; 4]) -> Vec<f64>,
    kind: TensorKind,
    radius: f64,
    group: &GroupAction,
    k_max: usize,
    cache: &HarmonicCache,
) -> Result<ModeCoefficients, NumError> {
    let rule = build_quadrature((2 * k_max + 8).min(MAX_QUADRATURE_DEGREE))?;
    let at = |x: &[f64; 4]| -> Vec<f64> { data(&x.map(|v| v * radius)) };
    // invariance on a subset of nodes
    let mut worst = (0usize, 0.0f64);
    let step = (rule.len() / 200).max(1);
    for (gi, g) in group.elements().iter().enumerate() {
        for x in rule.nodes.iter().step_by(step) {
            let fx = at(x);
            let gx = transform_values(kind, g, &at(&apply(g, x)));
            let scale = 1.0 + fx.iter().map(|v| v.abs()).fold(0.0, f64::max);
            let d = fx.iter().zip(&gx).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale;
            if d > worst.1 {
                worst = (gi, d);
            }
        }
    }
    if worst.1 > 1e-10 {
        return Err(GeomError::NotInvariant { element: worst.0, defect: worst.1 }.into());
    }
    let bases = component_bases(group, kind, k_max, cache)?;
    let samples: Vec<Vec<f64>> = rule.nodes.iter().map(at).collect();
    let ncomp = kind.ncomp();
    let mut entries = Vec::new();
    for (k, basis) in bases.by_degree.iter().enumerate() {
        if basis.is_empty() {
            continue;
        }
        let (mons, mm) = monomial_matrix(k, &rule.nodes);
        let cm = DMatrix::from_fn(mons.len(), basis.len(), |i, j| basis[j].coeff(&mons[i]));
        let phi = mm * cm;
        for comp in 0..ncomp {
            let f = DVector::from_iterator(rule.len(), samples.iter().zip(&rule.weights).map(|(s, w)| s[comp] * w));
            let c = phi.transpose() * f;
            for (index, value) in c.iter().enumerate() {
                entries.push(ModeEntry { component: comp, k, index, value: *value });
            }
        }
    }
    Ok(ModeCoefficients { radius, ncomp, k_max, entries })
}

/// Evaluates `sum c phi(x / |x|)` at a point, for coefficients from [`decompose`].
pub fn reconstruct(
    coeffs: &ModeCoefficients,
    bases: &ComponentBases,
    x: &[f64; 4],
) -> Vec<f64> {
    let r: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let u = x.map(|v| v / r);
    let mut out = vec![0.0; coeffs.ncomp];
    for e in &coeffs.entries {
        out[e.component] += e.value * bases.by_degree[e.k][e.index].eval(&u);
    }
    out
}

/// Restriction of a polynomial to the unit sphere, extended as a degree-0
/// function; its Euclidean Laplacian on `S^3` is the spherical Laplacian.
pub fn sphere_laplacian_fd(p: &Poly, x: &[f64; 4], h: f64) -> f64 {
    let f = |y: &[f64; 4]| {
        let r: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        p.eval(&y.map(|v| v / r))
    };
    let f0 = f(x);
    let mut acc = 0.0;
    for i in 0..4 {
        let mut a = *x;
        let mut b = *x;
        a[i] += h;
        b[i] -= h;
        acc += (f(&a) - 2.0 * f0 + f(&b)) / (h * h);
    }
    acc
}

/// Nodes of a rule together with random points, for test sampling.
pub fn sample_points(n: usize, seed: u64) -> Vec<[f64; 4]> {
    random_sphere_points(n, seed)
}
