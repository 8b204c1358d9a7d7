//! Brute-force enumeration of exceptional values of `delta delta^*` on
//! 1-forms of the flat cone, and dimension counts of harmonic 2-tensors.
//!
//! A homogeneous 1-form of degree `gamma` is written `r^{gamma - m} P` with the
//! components of `P` homogeneous polynomials of degree `m`. The operator maps
//! it to `r^{gamma - m - 4} Q` with `deg Q = m + 2`, so the kernel is the null
//! space of a finite matrix. Multiplying `P` by `r^2` embeds degree `m` into
//! `m + 2`, so the two parities `m = k_max` and `m = k_max + 1` exhaust all
//! solutions whose angular part has polynomial degree at most `k_max + 1`.
//!
//! The operator commutes with the maximal torus of `U(2)`. In the complex
//! coordinates `(w1, w1bar, w2, w2bar)` and the coframe `(dw1, dw1bar, dw2,
//! dw2bar)` every basis element has a definite torus weight, so the matrix
//! splits into small blocks. Groups inside the torus select blocks by
//! character. Other groups go through the kernel and a Reynolds projection.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{Complex, DMatrix};
use serde::Serialize;

use super::field::{HomogeneousTensorField, TensorKind};
use super::group::GroupAction;
use crate::error::GeomError;
use crate::linalg::{null_space, nullity, rank, RANK_TOL};
use crate::poly::{harmonic_basis_raw, monomials, Exp, Poly};

/// Degree cap for [`harmonic_sym2_dimensions`].
pub const DEGREE_CAP: i32 = 12;

const CONJ: [usize; 4] = [1, 0, 3, 2];
const FORM_WEIGHT: [(i32, i32); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExceptionalValue {
    pub gamma: i32,
    pub multiplicity: usize,
}

/// One growth rate of the separated 1-form modes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CatalogRate {
    /// `'a'` for co-closed tangential modes, `'b'` for modes built from a scalar harmonic.
    pub family: char,
    pub j: u32,
    pub rate: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExceptionalReport {
    pub window: (f64, f64),
    pub k_max: usize,
    pub values: Vec<ExceptionalValue>,
    /// Exceptional values sitting exactly on a window endpoint; excluded from `values`.
    pub flagged_endpoints: Vec<ExceptionalValue>,
    /// Catalog rates inside the closed window, for comparison.
    pub catalog: Vec<CatalogRate>,
}

impl ExceptionalReport {
    pub fn gammas(&self) -> Vec<i32> {
        self.values.iter().map(|v| v.gamma).collect()
    }
}

/// Growth rates predicted by separation of variables: tangential co-closed
/// modes `j, -2-j` for `j >= 1` and scalar-built modes `j-1, -3-j, j+1, -1-j`
/// for `j >= 0`.
pub fn catalog_rates(lo: f64, hi: f64) -> Vec<CatalogRate> {
    let mut out = Vec::new();
    let jmax = (hi.abs().max(lo.abs()) as u32) + 4;
    for j in 0..=jmax {
        let ji = j as i32;
        if j >= 1 {
            for rate in [ji, -2 - ji] {
                out.push(CatalogRate { family: 'a', j, rate });
            }
        }
        for rate in [ji - 1, -3 - ji, ji + 1, -1 - ji] {
            out.push(CatalogRate { family: 'b', j, rate });
        }
    }
    out.retain(|c| (c.rate as f64) >= lo && (c.rate as f64) <= hi);
    out.sort_by_key(|c| (c.rate, c.family, c.j));
    out.dedup();
    out
}

fn r2w() -> Poly {
    // w1 w1bar + w2 w2bar
    Poly::monomial([1, 1, 0, 0], 1.0).add(&Poly::monomial([0, 0, 1, 1], 1.0))
}

/// `d/dW_a (r^s p) = r^{s-2} ((s/2) Wbar_a p + r^2 d_a p)`; returns the polynomial factor.
fn dw(a: usize, s: f64, p: &Poly, r2: &Poly) -> Poly {
    Poly::var(CONJ[a]).mul(p).scale(s / 2.0).add(&r2.mul(&p.deriv(a)))
}

/// `delta delta^* (r^s u)` in complex components, returned as the polynomial
/// factor of `r^{s-4}`. Uses `(delta delta^* w)_a = -(1/2)(Delta w_a + d_a div w)`
/// with `Delta = 4 (d_0 d_1 + d_2 d_3)` and `div w = 2 sum_b d_b u_{bbar}`.
fn apply_operator(s: f64, u: &[Poly; 4], r2: &Poly) -> [Poly; 4] {
    let mut div = Poly::zero();
    for b in 0..4 {
        if !u[CONJ[b]].is_zero() {
            div = div.add(&dw(b, s, &u[CONJ[b]], r2).scale(2.0));
        }
    }
    std::array::from_fn(|a| {
        let mut lap = Poly::zero();
        if !u[a].is_zero() {
            for (b, c) in [(0, 1), (2, 3)] {
                let inner = dw(c, s, &u[a], r2);
                lap = lap.add(&dw(b, s - 2.0, &inner, r2).scale(4.0));
            }
        }
        let grad = if div.is_zero() { Poly::zero() } else { dw(a, s - 2.0, &div, r2) };
        lap.add(&grad).scale(-0.5)
    })
}

fn weight(e: &Exp, a: usize) -> (i32, i32) {
    (
        e[0] as i32 - e[1] as i32 + FORM_WEIGHT[a].0,
        e[2] as i32 - e[3] as i32 + FORM_WEIGHT[a].1,
    )
}

struct Block {
    cols: Vec<(usize, Exp)>,
    matrix: DMatrix<f64>,
}

fn blocks(gamma: i32, m: usize, keep: impl Fn((i32, i32)) -> bool) -> Vec<Block> {
    let s = (gamma - m as i32) as f64;
    let r2 = r2w();
    let mut grouped: BTreeMap<(i32, i32), Vec<(usize, Exp)>> = BTreeMap::new();
    for e in monomials(m) {
        for a in 0..4 {
            let w = weight(&e, a);
            if keep(w) {
                grouped.entry(w).or_default().push((a, e));
            }
        }
    }
    grouped
        .into_values()
        .map(|cols| {
            let mut rows: HashMap<(usize, Exp), usize> = HashMap::new();
            let mut entries = Vec::new();
            for (c, (a, e)) in cols.iter().enumerate() {
                let mut u: [Poly; 4] = std::array::from_fn(|_| Poly::zero());
                u[*a] = Poly::monomial(*e, 1.0);
                let out = apply_operator(s, &u, &r2);
                for (b, q) in out.iter().enumerate() {
                    for (f, v) in q.terms() {
                        let n = rows.len();
                        let r = *rows.entry((b, *f)).or_insert(n);
                        entries.push((r, c, *v));
                    }
                }
            }
            let mut matrix = DMatrix::zeros(rows.len(), cols.len());
            for (r, c, v) in entries {
                matrix[(r, c)] += v;
            }
            Block { cols, matrix }
        })
        .collect()
}

/// Character test: is the torus weight `w` fixed by every generator angle pair?
fn weight_invariant(w: (i32, i32), angles: &[(f64, f64)]) -> bool {
    angles.iter().all(|&(t1, t2)| {
        let phase = w.0 as f64 * t1 + w.1 as f64 * t2;
        let c = Complex::new(phase.cos(), phase.sin());
        (c - Complex::new(1.0, 0.0)).norm() < 1e-9
    })
}

/// Converts a polynomial in `(w1, w1bar, w2, w2bar)` to Cartesian coordinates.
fn to_cartesian(p: &Poly) -> Poly<Complex<f64>> {
    let i = Complex::new(0.0, 1.0);
    let one = Complex::new(1.0, 0.0);
    let lin = |re: usize, im: usize, sign: f64| -> Poly<Complex<f64>> {
        Poly::<Complex<f64>>::var(re).add(&Poly::<Complex<f64>>::var(im).scale(i * sign))
    };
    let subs = [lin(0, 1, 1.0), lin(0, 1, -1.0), lin(2, 3, 1.0), lin(2, 3, -1.0)];
    let mut out = Poly::<Complex<f64>>::zero();
    for (e, c) in p.terms() {
        let mut term = Poly::constant(one * *c);
        for k in 0..4 {
            if e[k] > 0 {
                term = term.mul(&subs[k].pow(e[k] as usize));
            }
        }
        out = out.add(&term);
    }
    out
}

fn real_part(p: &Poly<Complex<f64>>, imag: bool) -> Poly {
    let mut out = Poly::zero();
    for (e, c) in p.terms() {
        out.add_term(*e, if imag { c.im } else { c.re });
    }
    out.prune(1e-13)
}

/// Coefficient matrix of a list of fields of a common kind and degree, one
/// column per field, after aligning radial exponents.
pub fn coefficient_matrix(fields: &[HomogeneousTensorField]) -> DMatrix<f64> {
    let s = fields.iter().map(|f| f.radial_exponent()).min().unwrap_or(0);
    let aligned: Vec<_> = fields
        .iter()
        .map(|f| f.with_radial_exponent(s).expect("compatible radial exponents"))
        .collect();
    let mut rows: HashMap<(usize, Exp), usize> = HashMap::new();
    let mut entries = Vec::new();
    for (c, f) in aligned.iter().enumerate() {
        for (k, p) in f.comps().iter().enumerate() {
            for (e, v) in p.terms() {
                let n = rows.len();
                let r = *rows.entry((k, *e)).or_insert(n);
                entries.push((r, c, *v));
            }
        }
    }
    let mut m = DMatrix::zeros(rows.len(), fields.len());
    for (r, c, v) in entries {
        m[(r, c)] += v;
    }
    m
}

/// Dimension of the `Gamma`-invariant kernel of `delta delta^*` among 1-forms
/// `r^{gamma - m} P` with `P` of polynomial degree `m`.
pub fn invariant_kernel_dimension(group: &GroupAction, gamma: i32, m: usize) -> usize {
    if let Some(angles) = group.torus_angles() {
        return blocks(gamma, m, |w| weight_invariant(w, &angles))
            .iter()
            .map(|b| nullity(&b.matrix, RANK_TOL))
            .sum();
    }
    let kernel = kernel_forms(gamma, m);
    if kernel.is_empty() {
        return 0;
    }
    let averaged: Vec<_> = kernel.iter().map(|f| f.average(group)).collect();
    rank(&coefficient_matrix(&averaged), RANK_TOL)
}

/// Real basis of the full kernel as Cartesian 1-forms `r^{gamma - m} P`.
pub fn kernel_forms(gamma: i32, m: usize) -> Vec<HomogeneousTensorField> {
    let s = gamma - m as i32;
    let mut out = Vec::new();
    for b in blocks(gamma, m, |_| true) {
        let mut scaled = b.matrix.clone();
        let norms: Vec<f64> = scaled.column_iter().map(|c| c.norm()).collect();
        for (mut c, n) in scaled.column_iter_mut().zip(&norms) {
            if *n > 0.0 {
                c /= *n;
            }
        }
        let ns = null_space(&scaled, RANK_TOL);
        for v in ns.column_iter() {
            let mut u: [Poly; 4] = std::array::from_fn(|_| Poly::zero());
            for (k, (a, e)) in b.cols.iter().enumerate() {
                let coef = if norms[k] > 0.0 { v[k] / norms[k] } else { v[k] };
                u[*a].add_term(*e, coef);
            }
            let uc: Vec<_> = u.iter().map(to_cartesian).collect();
            let i = Complex::new(0.0, 1.0);
            let cart = [
                uc[0].add(&uc[1]),
                uc[0].sub(&uc[1]).scale(i),
                uc[2].add(&uc[3]),
                uc[2].sub(&uc[3]).scale(i),
            ];
            for imag in [false, true] {
                let comps: [Poly; 4] = std::array::from_fn(|k| real_part(&cart[k], imag));
                if comps.iter().any(|p| !p.is_zero()) {
                    out.push(
                        HomogeneousTensorField::new(TensorKind::Covector, s, gamma, comps.to_vec())
                            .expect("homogeneous kernel element"),
                    );
                }
            }
        }
    }
    out
}

/// Multiplicity of `gamma` as an exceptional value, summing both parities.
pub fn multiplicity(group: &GroupAction, gamma: i32, k_max: usize) -> usize {
    invariant_kernel_dimension(group, gamma, k_max) + invariant_kernel_dimension(group, gamma, k_max + 1)
}

/// Exceptional values of `delta delta^*` on `Gamma`-invariant 1-forms inside
/// the open window `(lo, hi)`.
pub fn exceptional_values_vector(
    group: &GroupAction,
    window: (f64, f64),
    k_max: usize,
) -> Result<ExceptionalReport, GeomError> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(GeomError::BadParameters(format!("window ({lo}, {hi}) is not a bounded interval")));
    }
    if k_max < 3 {
        return Err(GeomError::BadParameters(format!("k_max = {k_max} < 3")));
    }
    let mut values = Vec::new();
    let mut flagged = Vec::new();
    for gamma in (lo.ceil() as i32)..=(hi.floor() as i32) {
        let g = gamma as f64;
        let mult = multiplicity(group, gamma, k_max);
        if mult == 0 {
            continue;
        }
        let v = ExceptionalValue { gamma, multiplicity: mult };
        if g == lo || g == hi {
            flagged.push(v);
        } else {
            values.push(v);
        }
    }
    Ok(ExceptionalReport { window, k_max, values, flagged_endpoints: flagged, catalog: catalog_rates(lo, hi) })
}

/// Which constraints [`harmonic_sym2_dimensions`] imposes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Sym2Filters {
    pub traceless: bool,
    pub divergence_free: bool,
}

/// Basis of symmetric 2-tensors of degree `degree` whose entries are harmonic
/// homogeneous functions: `Harm_d` for `d >= 0`, `r^{-2-2k} Harm_k` with
/// `k = -2 - d` for `d <= -2`, and nothing for `d = -1`.
pub fn harmonic_sym2_space(degree: i32) -> Vec<HomogeneousTensorField> {
    let (k, s) = if degree >= 0 {
        (degree as usize, 0)
    } else if degree <= -2 {
        let k = (-2 - degree) as usize;
        (k, -2 - 2 * k as i32)
    } else {
        return Vec::new();
    };
    let harm = harmonic_basis_raw(k);
    let mut out = Vec::new();
    for i in 0..4 {
        for j in i..4 {
            for h in &harm {
                let mut comps = vec![Poly::zero(); 16];
                comps[4 * i + j] = h.clone();
                comps[4 * j + i] = h.clone();
                out.push(HomogeneousTensorField::new(TensorKind::Sym2, s, degree, comps).expect("harmonic entry"));
            }
        }
    }
    out
}

/// Dimension of the `Gamma`-invariant part of [`harmonic_sym2_space`] after the
/// requested filters.
pub fn harmonic_sym2_dimensions(group: &GroupAction, degree: i32, filters: Sym2Filters) -> Result<usize, GeomError> {
    if degree.abs() > DEGREE_CAP {
        return Err(GeomError::DegreeCap { degree, cap: DEGREE_CAP });
    }
    let basis = harmonic_sym2_space(degree);
    if basis.is_empty() {
        return Ok(0);
    }
    // kernel of the stacked map h -> (h - avg h, tr h, delta h)
    let mut blocks: Vec<DMatrix<f64>> = Vec::new();
    if !group.is_trivial() {
        let diffs: Vec<_> = basis.iter().map(|b| b.sub(&b.average(group))).collect();
        blocks.push(coefficient_matrix(&diffs));
    }
    if filters.traceless {
        let tr: Vec<_> = basis.iter().map(|b| b.trace()).collect();
        blocks.push(coefficient_matrix(&tr));
    }
    if filters.divergence_free {
        let dv: Vec<_> = basis.iter().map(|b| b.divergence()).collect();
        blocks.push(coefficient_matrix(&dv));
    }
    let n = basis.len();
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut stacked = DMatrix::zeros(rows, n);
    let mut r0 = 0;
    for b in &blocks {
        stacked.view_mut((r0, 0), (b.nrows(), n)).copy_from(b);
        r0 += b.nrows();
    }
    Ok(nullity(&stacked, RANK_TOL))
}
