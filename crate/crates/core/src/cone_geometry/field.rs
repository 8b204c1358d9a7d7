use nalgebra::{Matrix4, Vector4};

use super::group::GroupAction;
use crate::error::GeomError;
use crate::poly::Poly;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TensorKind {
    Scalar,
    Covector,
    Sym2,
}

impl TensorKind {
    pub fn ncomp(self) -> usize {
        match self {
            TensorKind::Scalar => 1,
            TensorKind::Covector => 4,
            TensorKind::Sym2 => 16,
        }
    }
}

/// A homogeneous tensor field on `R^4 \ {0}` written as `r^s P(x)` with every
/// Cartesian component of `P` a homogeneous polynomial.
///
/// Polynomial fields have `s = 0`. Negative-degree fields such as `x_i / r^4`
/// carry a negative even `s`. The degree is `s + deg P`.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousTensorField {
    kind: TensorKind,
    s: i32,
    degree: i32,
    comps: Vec<Poly>,
}

fn lift(p: &Poly, k: i32) -> Poly {
    if k == 0 {
        p.clone()
    } else {
        p.mul(&Poly::r2().pow(k as usize))
    }
}

impl HomogeneousTensorField {
    /// Builds a field, checking that components are homogeneous of a common
    /// degree. `degree` is needed to pin down the zero field.
    pub fn new(kind: TensorKind, s: i32, degree: i32, comps: Vec<Poly>) -> Result<Self, GeomError> {
        if comps.len() != kind.ncomp() {
            return Err(GeomError::KindMismatch(format!("{kind:?} needs {} components", kind.ncomp())));
        }
        let m = degree - s;
        for c in &comps {
            if let (Some(lo), Some(hi)) = (c.low_degree(), c.degree()) {
                if lo != hi || hi as i32 != m {
                    return Err(GeomError::Invalid(format!(
                        "component degrees {lo}..{hi} do not match {m} = degree - s"
                    )));
                }
            }
        }
        if kind == TensorKind::Sym2 {
            for i in 0..4 {
                for j in 0..i {
                    if comps[4 * i + j].sub(&comps[4 * j + i]).max_coeff() > 1e-12 {
                        return Err(GeomError::Invalid("sym2 components are not symmetric".into()));
                    }
                }
            }
        }
        Ok(Self { kind, s, degree, comps })
    }

    pub fn scalar(s: i32, p: Poly) -> Self {
        let deg = s + p.degree().unwrap_or(0) as i32;
        Self::new(TensorKind::Scalar, s, deg, vec![p]).expect("homogeneous scalar")
    }

    pub fn covector(s: i32, comps: [Poly; 4]) -> Self {
        let m = comps.iter().filter_map(|c| c.degree()).next().unwrap_or(0) as i32;
        Self::new(TensorKind::Covector, s, s + m, comps.to_vec()).expect("homogeneous covector")
    }

    /// Symmetric 2-tensor from a full 4x4 array of components.
    pub fn sym2(s: i32, comps: Vec<Vec<Poly>>) -> Self {
        let flat: Vec<Poly> = comps.into_iter().flatten().collect();
        let m = flat.iter().filter_map(|c| c.degree()).next().unwrap_or(0) as i32;
        Self::new(TensorKind::Sym2, s, s + m, flat).expect("homogeneous symmetric 2-tensor")
    }

    /// Unchecked constructor for 16 components that may fail symmetry.
    pub(crate) fn raw_sym2(s: i32, degree: i32, comps: Vec<Poly>) -> Self {
        Self { kind: TensorKind::Sym2, s, degree, comps }
    }

    pub fn zero(kind: TensorKind, degree: i32) -> Self {
        Self { kind, s: 0, degree, comps: vec![Poly::zero(); kind.ncomp()] }
    }

    pub fn kind(&self) -> TensorKind {
        self.kind
    }

    pub fn degree(&self) -> i32 {
        self.degree
    }

    pub fn radial_exponent(&self) -> i32 {
        self.s
    }

    pub fn comps(&self) -> &[Poly] {
        &self.comps
    }

    pub fn comp(&self, i: usize) -> &Poly {
        &self.comps[i]
    }

    pub fn entry(&self, i: usize, j: usize) -> &Poly {
        &self.comps[4 * i + j]
    }

    /// Largest polynomial coefficient, a norm for exact comparisons.
    pub fn max_coeff(&self) -> f64 {
        self.comps.iter().map(|c| c.max_coeff()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.max_coeff() <= tol
    }

    fn with_s(&self, s: i32) -> Self {
        let k = self.s - s;
        assert!(k >= 0 && k % 2 == 0, "radial exponents {} and {} are not compatible", self.s, s);
        Self { kind: self.kind, s, degree: self.degree, comps: self.comps.iter().map(|c| lift(c, k / 2)).collect() }
    }

    /// The same field written with radial exponent `s`, if `self.s - s` is a
    /// non-negative even integer.
    pub fn with_radial_exponent(&self, s: i32) -> Option<Self> {
        let k = self.s - s;
        (k >= 0 && k % 2 == 0).then(|| self.with_s(s))
    }

    fn aligned(&self, other: &Self) -> (Self, Self) {
        assert_eq!(self.kind, other.kind, "tensor kinds differ");
        assert_eq!(self.degree, other.degree, "degrees differ");
        let s = self.s.min(other.s);
        (self.with_s(s), other.with_s(s))
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = self.aligned(other);
        Self { comps: a.comps.iter().zip(&b.comps).map(|(p, q)| p.add(q)).collect(), ..a }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { comps: self.comps.iter().map(|p| p.scale(c)).collect(), ..self.clone() }
    }

    /// Drops polynomial coefficients of magnitude at most `tol`.
    pub fn prune(&self, tol: f64) -> Self {
        Self { comps: self.comps.iter().map(|p| p.prune(tol)).collect(), ..self.clone() }
    }

    /// Value of `r^s` at `x`.
    fn radial(&self, x: &[f64; 4]) -> f64 {
        if self.s == 0 {
            1.0
        } else {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            r2.powf(self.s as f64 / 2.0)
        }
    }

    pub fn eval(&self, x: &[f64; 4]) -> Vec<f64> {
        let f = self.radial(x);
        self.comps.iter().map(|p| f * p.eval(x)).collect()
    }

    pub fn eval_scalar(&self, x: &[f64; 4]) -> f64 {
        self.eval(x)[0]
    }

    pub fn eval_covector(&self, x: &[f64; 4]) -> Vector4<f64> {
        Vector4::from_column_slice(&self.eval(x))
    }

    pub fn eval_sym2(&self, x: &[f64; 4]) -> Matrix4<f64> {
        Matrix4::from_row_slice(&self.eval(x))
    }

    /// Componentwise partial derivative `d/dx_i`, using
    /// `d_i (r^s p) = r^{s-2} (s x_i p + r^2 d_i p)`.
    pub fn partial(&self, i: usize) -> Self {
        if self.s == 0 {
            return Self { comps: self.comps.iter().map(|p| p.deriv(i)).collect(), degree: self.degree - 1, ..self.clone() };
        }
        let xi = Poly::var(i);
        let r2 = Poly::r2();
        let s = self.s as f64;
        Self {
            kind: self.kind,
            s: self.s - 2,
            degree: self.degree - 1,
            comps: self.comps.iter().map(|p| xi.mul(p).scale(s).add(&r2.mul(&p.deriv(i)))).collect(),
        }
    }

    fn from_parts(kind: TensorKind, degree: i32, parts: Vec<Self>) -> Self {
        // parts are scalar fields of equal degree; align and pack
        let s = parts.iter().map(|p| p.s).min().unwrap_or(0);
        let comps = parts.iter().map(|p| p.with_s(s).comps[0].clone()).collect();
        Self { kind, s, degree, comps }
    }

    fn component_field(&self, i: usize) -> Self {
        Self { kind: TensorKind::Scalar, s: self.s, degree: self.degree, comps: vec![self.comps[i].clone()] }
    }

    pub fn trace(&self) -> Self {
        assert_eq!(self.kind, TensorKind::Sym2);
        let mut p = Poly::zero();
        for i in 0..4 {
            p = p.add(&self.comps[5 * i]);
        }
        Self { kind: TensorKind::Scalar, s: self.s, degree: self.degree, comps: vec![p] }
    }

    /// Divergence with the geometer's sign: `(delta h)_j = -sum_i d_i h_ij`,
    /// and `delta w = -sum_i d_i w_i` on covectors.
    pub fn divergence(&self) -> Self {
        match self.kind {
            TensorKind::Sym2 => {
                let parts: Vec<Self> = (0..4)
                    .map(|j| {
                        let mut acc: Option<Self> = None;
                        for i in 0..4 {
                            let t = self.component_field(4 * i + j).partial(i);
                            acc = Some(match acc {
                                None => t,
                                Some(a) => a.add(&t),
                            });
                        }
                        acc.unwrap().scale(-1.0)
                    })
                    .collect();
                Self::from_parts(TensorKind::Covector, self.degree - 1, parts)
            }
            TensorKind::Covector => {
                let mut acc = self.component_field(0).partial(0);
                for i in 1..4 {
                    acc = acc.add(&self.component_field(i).partial(i));
                }
                acc.scale(-1.0)
            }
            TensorKind::Scalar => panic!("divergence of a scalar"),
        }
    }

    /// Differential of a scalar field.
    pub fn grad(&self) -> Self {
        assert_eq!(self.kind, TensorKind::Scalar);
        let parts = (0..4).map(|i| self.partial(i)).collect();
        Self::from_parts(TensorKind::Covector, self.degree - 1, parts)
    }

    /// Symmetrized gradient `delta^* w = (d_i w_j + d_j w_i) / 2`.
    pub fn sym_grad(&self) -> Self {
        assert_eq!(self.kind, TensorKind::Covector);
        let d: Vec<Vec<Self>> =
            (0..4).map(|i| (0..4).map(|j| self.component_field(j).partial(i)).collect()).collect();
        let mut parts = Vec::with_capacity(16);
        for i in 0..4 {
            for j in 0..4 {
                parts.push(d[i][j].add(&d[j][i]).scale(0.5));
            }
        }
        Self::from_parts(TensorKind::Sym2, self.degree - 1, parts)
    }

    /// Hessian of a scalar field as a symmetric 2-tensor.
    pub fn hessian(&self) -> Self {
        self.grad().sym_grad()
    }

    /// Bianchi operator `B_e h = delta_e h + (1/2) d tr_e h`.
    pub fn bianchi(&self) -> Self {
        self.divergence().add(&self.trace().grad().scale(0.5))
    }

    /// Componentwise Euclidean Laplacian `sum_i d_i d_i`.
    pub fn laplacian(&self) -> Self {
        let mut acc = self.partial(0).partial(0);
        for i in 1..4 {
            acc = acc.add(&self.partial(i).partial(i));
        }
        acc
    }

    /// Linearized Ricci tensor at the flat metric,
    /// `(1/2)(d_k d_i h_jk + d_k d_j h_ik - d_k d_k h_ij - d_i d_j tr h)`.
    pub fn linearized_ricci(&self) -> Self {
        assert_eq!(self.kind, TensorKind::Sym2);
        // -2 delta^* delta h = d_i (div h)_j + d_j (div h)_i with div = -delta
        let term1 = self.divergence().sym_grad().scale(-2.0);
        let lap = self.laplacian();
        let hess_tr = self.trace().hessian();
        term1.sub(&lap).sub(&hess_tr).scale(0.5)
    }

    /// Pullback `G^* F` by a linear map.
    pub fn pullback(&self, g: &Matrix4<f64>) -> Self {
        let m: [[f64; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| g[(i, j)]));
        let sub: Vec<Poly> = self.comps.iter().map(|p| p.substitute_linear(&m)).collect();
        let comps = match self.kind {
            TensorKind::Scalar => sub,
            TensorKind::Covector => (0..4)
                .map(|j| {
                    let mut acc = Poly::zero();
                    for i in 0..4 {
                        acc = acc.add(&sub[i].scale(g[(i, j)]));
                    }
                    acc
                })
                .collect(),
            TensorKind::Sym2 => {
                let mut out = vec![Poly::zero(); 16];
                for a in 0..4 {
                    for b in 0..4 {
                        let mut acc = Poly::zero();
                        for i in 0..4 {
                            for j in 0..4 {
                                let c = g[(i, a)] * g[(j, b)];
                                if c != 0.0 {
                                    acc = acc.add(&sub[4 * i + j].scale(c));
                                }
                            }
                        }
                        out[4 * a + b] = acc;
                    }
                }
                out
            }
        };
        Self { comps, ..self.clone() }.prune(1e-14)
    }

    /// Reynolds projection onto group-invariant fields.
    pub fn average(&self, group: &GroupAction) -> Self {
        let n = group.order() as f64;
        let mut acc = Self::zero(self.kind, self.degree).with_s_unchecked(self.s);
        for g in group.elements() {
            acc = acc.add(&self.pullback(g));
        }
        acc.scale(1.0 / n).prune(1e-13)
    }

    fn with_s_unchecked(mut self, s: i32) -> Self {
        self.s = s;
        self
    }

    /// Largest defect `|G^* F - F|` over sample points and group elements,
    /// with the index of the worst element.
    pub fn invariance_defect(&self, group: &GroupAction, samples: &[[f64; 4]]) -> (usize, f64) {
        let mut worst = (0, 0.0);
        for (k, g) in group.elements().iter().enumerate() {
            for x in samples {
                let gx = g * Vector4::from_column_slice(x);
                let gx = [gx[0], gx[1], gx[2], gx[3]];
                let a = self.eval(x);
                let b = transform_values(self.kind, g, &self.eval(&gx));
                let d = a.iter().zip(&b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
                if d > worst.1 {
                    worst = (k, d);
                }
            }
        }
        worst
    }

    /// Largest defect of `F(lambda x) = lambda^d F(x)` over the samples.
    pub fn homogeneity_defect(&self, samples: &[[f64; 4]], lambdas: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for x in samples {
            let base = self.eval(x);
            for &l in lambdas {
                let lx = [l * x[0], l * x[1], l * x[2], l * x[3]];
                let scaled = self.eval(&lx);
                let f = l.powi(self.degree);
                for (a, b) in base.iter().zip(&scaled) {
                    worst = worst.max((f * a - b).abs() / (1.0 + (f * a).abs()));
                }
            }
        }
        worst
    }
}

/// Components of `G^* F` at `x` given the components of `F` at `G x`.
pub fn transform_values(kind: TensorKind, g: &Matrix4<f64>, vals: &[f64]) -> Vec<f64> {
    match kind {
        TensorKind::Scalar => vals.to_vec(),
        TensorKind::Covector => {
            let v = Vector4::from_column_slice(vals);
            (g.transpose() * v).iter().copied().collect()
        }
        TensorKind::Sym2 => {
            let h = Matrix4::from_row_slice(vals);
            let t = g.transpose() * h * g;
            (0..16).map(|k| t[(k / 4, k % 4)]).collect()
        }
    }
}

/// The flat metric `g_e` as a degree-0 field.
pub fn euclidean_metric() -> HomogeneousTensorField {
    let comps = (0..4)
        .map(|i| (0..4).map(|j| if i == j { Poly::constant(1.0) } else { Poly::zero() }).collect())
        .collect();
    HomogeneousTensorField::sym2(0, comps)
}

/// `r^2 g_e`.
pub fn r2_metric() -> HomogeneousTensorField {
    let comps = (0..4)
        .map(|i| (0..4).map(|j| if i == j { Poly::r2() } else { Poly::zero() }).collect())
        .collect();
    HomogeneousTensorField::sym2(0, comps)
}

/// `r^2 dr^2 = sum x_i x_j dx_i dx_j`.
pub fn r2_dr2() -> HomogeneousTensorField {
    let comps = (0..4).map(|i| (0..4).map(|j| Poly::var(i).mul(&Poly::var(j))).collect()).collect();
    HomogeneousTensorField::sym2(0, comps)
}

/// `r dr = sum x_i dx_i`.
pub fn r_dr() -> HomogeneousTensorField {
    HomogeneousTensorField::covector(0, [Poly::var(0), Poly::var(1), Poly::var(2), Poly::var(3)])
}

/// `r^4 (alpha_1^2 + alpha_2^2 + alpha_3^2) = r^2 g_e - r^2 dr^2`.
pub fn r4_sum_alpha_sq() -> HomogeneousTensorField {
    r2_metric().sub(&r2_dr2())
}
