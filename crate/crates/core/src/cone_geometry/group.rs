use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::GeomError;

const ORTHO_TOL: f64 = 1e-12;
const DEDUP_TOL: f64 = 1e-9;
const MAX_ORDER: usize = 4096;

/// Named finite subgroups of `O(4)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GroupSpec {
    Trivial,
    /// Cyclic group of order `n` inside the right `SU(2)`.
    CyclicSu2 { n: u32 },
    BinaryDihedral { n: u32 },
    BinaryTetrahedral,
    BinaryOctahedral,
    BinaryIcosahedral,
    /// The cyclic group `(1/dn^2)(1, dnm - 1)` inside `U(2)`.
    U2Family { d: u32, n: u32, m: u32 },
    /// Rotation by `2 pi / n` in the `(x, y)` plane only. Never acts freely.
    PlaneRotation { n: u32 },
    Custom { generators: Vec<[[f64; 4]; 4]> },
}

impl GroupSpec {
    pub fn label(&self) -> String {
        match self {
            GroupSpec::Trivial => "trivial".into(),
            GroupSpec::CyclicSu2 { n } => format!("cyclic-SU2({n})"),
            GroupSpec::BinaryDihedral { n } => format!("binary-dihedral({n})"),
            GroupSpec::BinaryTetrahedral => "binary-tetrahedral".into(),
            GroupSpec::BinaryOctahedral => "binary-octahedral".into(),
            GroupSpec::BinaryIcosahedral => "binary-icosahedral".into(),
            GroupSpec::U2Family { d, n, m } => format!("U2-family({d},{n},{m})"),
            GroupSpec::PlaneRotation { n } => format!("plane-rotation({n})"),
            GroupSpec::Custom { generators } => format!("custom({} generators)", generators.len()),
        }
    }
}

/// A finite group acting on `R^4` by orthogonal matrices.
#[derive(Clone, Debug)]
pub struct GroupAction {
    pub spec: GroupSpec,
    pub generators: Vec<Matrix4<f64>>,
    elements: Vec<Matrix4<f64>>,
}

/// Unit quaternion `a + b i + c j + d k` as a 4-vector.
pub type Quat = [f64; 4];

pub fn quat_mul(p: &Quat, q: &Quat) -> Quat {
    [
        p[0] * q[0] - p[1] * q[1] - p[2] * q[2] - p[3] * q[3],
        p[0] * q[1] + p[1] * q[0] + p[2] * q[3] - p[3] * q[2],
        p[0] * q[2] - p[1] * q[3] + p[2] * q[0] + p[3] * q[1],
        p[0] * q[3] + p[1] * q[2] - p[2] * q[1] + p[3] * q[0],
    ]
}

/// Matrix of `x -> q x` on `R^4 = H`.
pub fn left_mult(q: &Quat) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| {
        let mut e = [0.0; 4];
        e[j] = 1.0;
        quat_mul(q, &e)[i]
    })
}

/// Matrix of `x -> x q` on `R^4 = H`.
pub fn right_mult(q: &Quat) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| {
        let mut e = [0.0; 4];
        e[j] = 1.0;
        quat_mul(&e, q)[i]
    })
}

/// Complex structures `J_1, J_2, J_3`: left multiplication by `i, j, k`.
pub fn complex_structures() -> [Matrix4<f64>; 3] {
    [
        left_mult(&[0.0, 1.0, 0.0, 0.0]),
        left_mult(&[0.0, 0.0, 1.0, 0.0]),
        left_mult(&[0.0, 0.0, 0.0, 1.0]),
    ]
}

fn torus_element(theta1: f64, theta2: f64) -> Matrix4<f64> {
    let (s1, c1) = theta1.sin_cos();
    let (s2, c2) = theta2.sin_cos();
    Matrix4::new(c1, -s1, 0.0, 0.0, s1, c1, 0.0, 0.0, 0.0, 0.0, c2, -s2, 0.0, 0.0, s2, c2)
}

fn gcd(a: u32, b: u32) -> u32 {
    num_integer::gcd(a, b)
}

impl GroupAction {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Matrix4<f64>] {
        &self.elements
    }

    pub fn label(&self) -> String {
        self.spec.label()
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }

    /// Whether every generator commutes with `J_1, J_2, J_3`, i.e. lies in the
    /// `SU(2)` preserving the standard hyperkähler triple.
    pub fn in_su2(&self) -> bool {
        let js = complex_structures();
        self.generators
            .iter()
            .all(|g| js.iter().all(|j| (g * j - j * g).amax() < 1e-10))
    }

    /// Torus angles `(theta1, theta2)` of every generator when all generators
    /// are rotations in the `(x,y)` and `(z,t)` planes.
    pub fn torus_angles(&self) -> Option<Vec<(f64, f64)>> {
        self.generators
            .iter()
            .map(|g| {
                let t1 = g[(1, 0)].atan2(g[(0, 0)]);
                let t2 = g[(3, 2)].atan2(g[(2, 2)]);
                if (g - torus_element(t1, t2)).amax() < 1e-10 {
                    Some((t1, t2))
                } else {
                    None
                }
            })
            .collect()
    }
}

/// Builds the group named by `spec`, checking orthogonality, closure and
/// freeness of the action on `S^3`.
pub fn make_group(spec: &GroupSpec) -> Result<GroupAction, GeomError> {
    let gens = generators_for(spec)?;
    for (k, g) in gens.iter().enumerate() {
        let err = (g.transpose() * g - Matrix4::identity()).amax();
        if err > ORTHO_TOL {
            return Err(GeomError::NotOrthogonal { index: k, error: err });
        }
    }
    let elements = close_group(&gens)?;
    for g in &elements {
        if (g - Matrix4::identity()).amax() < DEDUP_TOL {
            continue;
        }
        if let Some(v) = fixed_vector(g) {
            return Err(GeomError::NotFree { fixed: [v[0], v[1], v[2], v[3]] });
        }
    }
    Ok(GroupAction { spec: spec.clone(), generators: gens, elements })
}

fn generators_for(spec: &GroupSpec) -> Result<Vec<Matrix4<f64>>, GeomError> {
    let bad = |msg: &str| Err(GeomError::BadParameters(format!("{}: {msg}", spec.label())));
    Ok(match spec {
        GroupSpec::Trivial => vec![Matrix4::identity()],
        GroupSpec::CyclicSu2 { n } => {
            if *n < 2 {
                return bad("need n >= 2");
            }
            let th = 2.0 * PI / *n as f64;
            vec![right_mult(&[th.cos(), th.sin(), 0.0, 0.0])]
        }
        GroupSpec::BinaryDihedral { n } => {
            if *n < 2 {
                return bad("need n >= 2");
            }
            let th = PI / *n as f64;
            vec![right_mult(&[th.cos(), th.sin(), 0.0, 0.0]), right_mult(&[0.0, 0.0, 1.0, 0.0])]
        }
        GroupSpec::BinaryTetrahedral => vec![
            right_mult(&[0.0, 1.0, 0.0, 0.0]),
            right_mult(&[0.5, 0.5, 0.5, 0.5]),
        ],
        GroupSpec::BinaryOctahedral => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            vec![right_mult(&[s, s, 0.0, 0.0]), right_mult(&[0.5, 0.5, 0.5, 0.5])]
        }
        GroupSpec::BinaryIcosahedral => {
            let phi = (1.0 + 5f64.sqrt()) / 2.0;
            vec![
                right_mult(&[0.0, 1.0, 0.0, 0.0]),
                right_mult(&[phi / 2.0, 0.5 / phi, 0.5, 0.0]),
            ]
        }
        GroupSpec::U2Family { d, n, m } => {
            if *d < 1 || *n < 2 || gcd(*n, *m) != 1 {
                return bad("need d >= 1, n >= 2, gcd(n, m) = 1");
            }
            let order = d * n * n;
            let p = (d * n * m) as i64 - 1;
            let th = 2.0 * PI / order as f64;
            vec![torus_element(th, th * p as f64)]
        }
        GroupSpec::PlaneRotation { n } => {
            if *n < 2 {
                return bad("need n >= 2");
            }
            vec![torus_element(2.0 * PI / *n as f64, 0.0)]
        }
        GroupSpec::Custom { generators } => {
            if generators.is_empty() {
                return bad("no generators");
            }
            generators.iter().map(|a| Matrix4::from_fn(|i, j| a[i][j])).collect()
        }
    })
}

fn close_group(gens: &[Matrix4<f64>]) -> Result<Vec<Matrix4<f64>>, GeomError> {
    let mut elements = vec![Matrix4::identity()];
    let mut frontier = vec![Matrix4::identity()];
    while let Some(h) = frontier.pop() {
        for g in gens {
            let p = g * h;
            if !elements.iter().any(|e| (e - p).amax() < DEDUP_TOL) {
                if elements.len() >= MAX_ORDER {
                    return Err(GeomError::NotFinite(MAX_ORDER));
                }
                elements.push(p);
                frontier.push(p);
            }
        }
    }
    Ok(elements)
}

/// Unit vector fixed by `g`, if any.
fn fixed_vector(g: &Matrix4<f64>) -> Option<Vector4<f64>> {
    let a = g - Matrix4::identity();
    let svd = a.svd(false, true);
    let vt = svd.v_t?;
    let (k, smin) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    if smin < 1e-9 {
        Some(vt.row(k).transpose().normalize())
    } else {
        None
    }
}
