//! Sparse polynomials in four variables.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::ops::{AddAssign, MulAssign, Neg};

use nalgebra::Complex;
use num_traits::Num;

/// Exponent vector of a monomial `x0^e0 x1^e1 x2^e2 x3^e3`.
pub type Exp = [u8; 4];

/// Scalar field usable as polynomial coefficient.
pub trait Coeff:
    Copy + Num + Neg<Output = Self> + AddAssign + MulAssign + Debug + Send + Sync + 'static
{
    fn from_f64(v: f64) -> Self;
    fn magnitude(self) -> f64;
}

impl Coeff for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Coeff for Complex<f64> {
    fn from_f64(v: f64) -> Self {
        Complex::new(v, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Polynomial with coefficients in `T`, stored sparsely by exponent.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Poly<T: Coeff = f64> {
    terms: BTreeMap<Exp, T>,
}

/// All exponent vectors of total degree `deg`, in lexicographic order.
pub fn monomials(deg: usize) -> Vec<Exp> {
    let mut out = Vec::new();
    for a in (0..=deg).rev() {
        for b in (0..=deg - a).rev() {
            for c in (0..=deg - a - b).rev() {
                let d = deg - a - b - c;
                out.push([a as u8, b as u8, c as u8, d as u8]);
            }
        }
    }
    out
}

/// Number of monomials of total degree `deg` in four variables.
pub fn monomial_count(deg: usize) -> usize {
    (deg + 1) * (deg + 2) * (deg + 3) / 6
}

impl<T: Coeff> Poly<T> {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn constant(c: T) -> Self {
        Self::monomial([0; 4], c)
    }

    pub fn monomial(e: Exp, c: T) -> Self {
        let mut p = Self::zero();
        if c != T::zero() {
            p.terms.insert(e, c);
        }
        p
    }

    /// The coordinate function `x_i`.
    pub fn var(i: usize) -> Self {
        let mut e = [0u8; 4];
        e[i] = 1;
        Self::monomial(e, T::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exp, &T)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &Exp) -> T {
        self.terms.get(e).copied().unwrap_or_else(T::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest total degree present, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(|e| e.iter().map(|&k| k as usize).sum()).max()
    }

    /// Lowest total degree present.
    pub fn low_degree(&self) -> Option<usize> {
        self.terms.keys().map(|e| e.iter().map(|&k| k as usize).sum()).min()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.degree() == self.low_degree()
    }

    pub fn add_term(&mut self, e: Exp, c: T) {
        let entry = self.terms.entry(e).or_insert_with(T::zero);
        *entry += c;
        if *entry == T::zero() {
            self.terms.remove(&e);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, *c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, -*c);
        }
        out
    }

    pub fn scale(&self, s: T) -> Self {
        if s == T::zero() {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(e, c)| (*e, *c * s)).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e = [e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2], e1[3] + e2[3]];
                out.add_term(e, *c1 * *c2);
            }
        }
        out
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut out = Self::constant(T::one());
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Partial derivative with respect to variable `i`.
    pub fn deriv(&self, i: usize) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut f = *e;
                f[i] -= 1;
                out.add_term(f, *c * T::from_f64(e[i] as f64));
            }
        }
        out
    }

    pub fn eval(&self, x: &[T; 4]) -> T {
        let mut acc = T::zero();
        for (e, c) in &self.terms {
            let mut m = *c;
            for k in 0..4 {
                for _ in 0..e[k] {
                    m *= x[k];
                }
            }
            acc += m;
        }
        acc
    }

    /// Drop coefficients with magnitude at most `tol`.
    pub fn prune(&self, tol: f64) -> Self {
        Self { terms: self.terms.iter().filter(|(_, c)| c.magnitude() > tol).map(|(e, c)| (*e, *c)).collect() }
    }

    pub fn max_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.magnitude()).fold(0.0, f64::max)
    }
}

impl Poly<f64> {
    /// `|x|^2 = x0^2 + x1^2 + x2^2 + x3^2`.
    pub fn r2() -> Self {
        let mut p = Self::zero();
        for i in 0..4 {
            let mut e = [0u8; 4];
            e[i] = 2;
            p.add_term(e, 1.0);
        }
        p
    }

    /// Euclidean Laplacian.
    pub fn laplacian(&self) -> Self {
        let mut out = Self::zero();
        for i in 0..4 {
            out = out.add(&self.deriv(i).deriv(i));
        }
        out
    }

    pub fn eval_f(&self, x: &[f64; 4]) -> f64 {
        self.eval(x)
    }

    /// The polynomial `x -> p(M x)`.
    pub fn substitute_linear(&self, m: &[[f64; 4]; 4]) -> Self {
        let lin: Vec<Poly> = (0..4)
            .map(|i| {
                let mut p = Poly::zero();
                for j in 0..4 {
                    let mut e = [0u8; 4];
                    e[j] = 1;
                    p.add_term(e, m[i][j]);
                }
                p
            })
            .collect();
        let maxdeg = self.terms.keys().flat_map(|e| e.iter().copied()).max().unwrap_or(0) as usize;
        let powers: Vec<Vec<Poly>> = lin
            .iter()
            .map(|l| {
                let mut v = vec![Poly::constant(1.0)];
                for k in 1..=maxdeg {
                    let next = v[k - 1].mul(l);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = Poly::zero();
        for (e, c) in &self.terms {
            let mut term = Poly::constant(*c);
            for k in 0..4 {
                if e[k] > 0 {
                    term = term.mul(&powers[k][e[k] as usize]);
                }
            }
            out = out.add(&term);
        }
        out.prune(1e-14 * self.max_coeff().max(1.0))
    }

    /// Dense coefficient vector over `monomials(deg)`.
    pub fn coeffs_in(&self, basis: &[Exp]) -> Vec<f64> {
        basis.iter().map(|e| self.coeff(e)).collect()
    }

    pub fn from_coeffs(basis: &[Exp], v: &[f64]) -> Self {
        let mut p = Poly::zero();
        for (e, c) in basis.iter().zip(v) {
            p.add_term(*e, *c);
        }
        p
    }
}

/// Basis of harmonic homogeneous polynomials of degree `k`, of size `(k+1)^2`.
///
/// Each element is fixed by its part of degree at most one in `x0`; the rest
/// follows from `h_{n+2} = -Delta' h_n` where `h = sum x0^n / n! h_n` and
/// `Delta'` is the Laplacian in `(x1, x2, x3)`.
pub fn harmonic_basis_raw(k: usize) -> Vec<Poly> {
    let lap3 = |p: &Poly| -> Poly {
        let mut out = Poly::zero();
        for i in 1..4 {
            out = out.add(&p.deriv(i).deriv(i));
        }
        out
    };
    let build = |seed: Poly, start: usize| -> Poly {
        let mut h = Poly::zero();
        let mut hn = seed;
        let mut n = start;
        let mut fact: f64 = (1..=start).map(|v| v as f64).product();
        let x0 = Poly::var(0);
        while !hn.is_zero() {
            h = h.add(&x0.pow(n).mul(&hn).scale(1.0 / fact));
            hn = lap3(&hn).scale(-1.0);
            fact *= ((n + 1) * (n + 2)) as f64;
            n += 2;
        }
        h
    };
    let mut out = Vec::with_capacity((k + 1) * (k + 1));
    for e in monomials(k).into_iter().filter(|e| e[0] == 0) {
        out.push(build(Poly::monomial(e, 1.0), 0));
    }
    if k >= 1 {
        for e in monomials(k - 1).into_iter().filter(|e| e[0] == 0) {
            out.push(build(Poly::monomial(e, 1.0), 1));
        }
    }
    out
}

/// Exact integral of a monomial over the unit sphere `S^3` in `R^4`.
pub fn sphere_monomial_integral(e: &Exp) -> f64 {
    if e.iter().any(|k| k % 2 == 1) {
        return 0.0;
    }
    // 2 * prod Gamma((e_i+1)/2) / Gamma((|e|+4)/2), with half-integer gammas
    let half_gamma = |k: u32| -> f64 {
        // Gamma((k+1)/2) for even k: (k-1)!! / 2^{k/2} * sqrt(pi)
        let mut v = std::f64::consts::PI.sqrt();
        let mut j = 1;
        while j < k {
            v *= j as f64 / 2.0;
            j += 2;
        }
        v
    };
    let num: f64 = e.iter().map(|&k| half_gamma(k as u32)).product();
    let n: u32 = e.iter().map(|&k| k as u32).sum::<u32>() / 2 + 2;
    let den: f64 = (1..n).map(|k| k as f64).product();
    2.0 * num / den
}

/// Exact `L^2(S^3)` inner product of two real polynomials.
pub fn sphere_inner(p: &Poly, q: &Poly) -> f64 {
    let prod = p.mul(q);
    prod.terms().map(|(e, c)| c * sphere_monomial_integral(e)).sum()
}
