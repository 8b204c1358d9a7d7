//! Weighted Hölder norms of radial fields.
//!
//! A field is sampled on shells `r_i`; derivatives are taken along the radial
//! geodesic (arclength `s`) by finite differences. The Hölder seminorm is a
//! max over sampled pairs and is therefore a lower bound for the true one.

use serde::{Deserialize, Serialize};

use super::GluedRadialMetric;
use crate::ale_library::RadialMetric;
use crate::error::NumError;
use crate::sphere_harmonics::gauss_legendre_unit;

/// Which distance function weights the norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMode {
    /// `r_o`, distance to the orbifold point, capped at 1.
    Orbifold,
    /// `r_b = r / sqrt(t)`, the ALE radius before rescaling.
    Ale,
    /// `r_D`, distance to the nearest glued point, capped at 1.
    Desing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeightedNormSpec {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub mode: WeightMode,
    /// The norm is `r^{-outer} C^{k,alpha}_beta`; `2` for curvature residuals.
    pub outer: f64,
    /// Hölder pairs are taken at separation up to `inj_fraction * w`.
    pub inj_fraction: f64,
}

impl Default for WeightedNormSpec {
    fn default() -> Self {
        Self { k: 1, alpha: 0.5, beta: 0.5, mode: WeightMode::Desing, outer: 2.0, inj_fraction: 0.5 }
    }
}

impl WeightedNormSpec {
    pub fn validate(&self) -> Result<(), NumError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(NumError::OutOfRange { what: "alpha".into(), value: self.alpha, range: "(0, 1)".into() });
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(NumError::OutOfRange { what: "beta".into(), value: self.beta, range: "(0, 1)".into() });
        }
        if self.k > 2 {
            return Err(NumError::OutOfRange { what: "k".into(), value: self.k as f64, range: "{0, 1, 2}".into() });
        }
        if !(self.inj_fraction > 0.0) {
            return Err(NumError::OutOfRange { what: "inj_fraction".into(), value: self.inj_fraction, range: "(0, inf)".into() });
        }
        Ok(())
    }
}

/// Frame components of a tensor field on radial shells.
#[derive(Clone, Debug)]
pub struct RadialField {
    pub r: Vec<f64>,
    /// Arclength from the first shell.
    pub s: Vec<f64>,
    pub w: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    /// Conformal weight: `|s|_{lambda g} = lambda^{-l/2} |s|_g`.
    pub tensor_weight: f64,
}

/// Arclength positions of the shells, by Gauss-Legendre on each gap.
pub fn arclength(metric: &RadialMetric, r: &[f64]) -> Vec<f64> {
    let (gx, gw) = gauss_legendre_unit(8);
    let mut s = Vec::with_capacity(r.len());
    let mut acc = 0.0;
    for (i, &ri) in r.iter().enumerate() {
        if i > 0 {
            let (a, b) = (r[i - 1], ri);
            acc += gx.iter().zip(&gw).map(|(x, w)| w * (b - a) * metric.jets(a + (b - a) * x)[0].v).sum::<f64>();
        }
        s.push(acc);
    }
    s
}

impl RadialField {
    pub fn from_fn(
        metric: &RadialMetric,
        r: Vec<f64>,
        weight: impl Fn(f64) -> f64,
        tensor_weight: f64,
        f: impl Fn(f64) -> Vec<f64>,
    ) -> Result<Self, NumError> {
        if r.len() < 3 || r.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(NumError::Resolution("need at least three strictly increasing shells".into()));
        }
        let s = arclength(metric, &r);
        let w = r.iter().map(|&x| weight(x)).collect();
        let values = r.iter().map(|&x| f(x)).collect();
        Ok(Self { r, s, w, values, tensor_weight })
    }

    /// `Ric - lambda g` of a glued metric, as a 2-tensor.
    pub fn residual(glued: &GluedRadialMetric, r: Vec<f64>, mode: WeightMode) -> Result<Self, NumError> {
        let st = glued.t.sqrt();
        let weight = move |x: f64| match mode {
            WeightMode::Orbifold => x.min(1.0),
            WeightMode::Ale => x / st,
            WeightMode::Desing => glued.r_d(x).min(1.0),
        };
        Self::from_fn(&glued.metric, r, weight, 2.0, |x| glued.residual(x).as_slice().to_vec())
    }

    fn derivative(&self, f: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let s = &self.s;
        let n = s.len();
        let combo = |c: [(usize, f64); 3]| -> Vec<f64> {
            (0..f[0].len()).map(|q| c.iter().map(|(i, w)| w * f[*i][q]).sum()).collect()
        };
        (0..n)
            .map(|i| {
                if i == 0 || i == n - 1 {
                    let (a, b, c, sign) = if i == 0 { (0, 1, 2, 1.0) } else { (n - 1, n - 2, n - 3, -1.0) };
                    let h1 = (s[b] - s[a]).abs();
                    let h2 = (s[c] - s[b]).abs();
                    combo([
                        (a, -sign * (2.0 * h1 + h2) / (h1 * (h1 + h2))),
                        (b, sign * (h1 + h2) / (h1 * h2)),
                        (c, -sign * h1 / (h2 * (h1 + h2))),
                    ])
                } else {
                    let h1 = s[i] - s[i - 1];
                    let h2 = s[i + 1] - s[i];
                    combo([
                        (i - 1, -h2 / (h1 * (h1 + h2))),
                        (i, (h2 - h1) / (h1 * h2)),
                        (i + 1, h1 / (h2 * (h1 + h2))),
                    ])
                }
            })
            .collect()
    }
}

/// Term-by-term value of a weighted norm.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightedNorm {
    /// `sup w^{i - beta + outer} |d^i s|` for `i = 0..=k`.
    pub terms: Vec<f64>,
    /// Sampled Hölder quotient of the top derivative.
    pub holder: f64,
    pub holder_pairs: usize,
    pub total: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn weighted(w: f64, e: f64, v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else if w == 0.0 {
        if e < 0.0 {
            f64::INFINITY
        } else if e == 0.0 {
            v
        } else {
            0.0
        }
    } else {
        w.powf(e) * v
    }
}

pub fn weighted_norm(field: &RadialField, spec: &WeightedNormSpec) -> Result<WeightedNorm, NumError> {
    spec.validate()?;
    let n = field.s.len();
    let mut derivs = vec![field.values.clone()];
    for i in 0..spec.k {
        derivs.push(field.derivative(&derivs[i]));
    }
    let terms: Vec<f64> = derivs
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let e = i as f64 - spec.beta + spec.outer;
            d.iter().zip(&field.w).map(|(v, &w)| weighted(w, e, norm(v))).fold(0.0, f64::max)
        })
        .collect();
    let top = &derivs[spec.k];
    let e = spec.k as f64 + spec.alpha - spec.beta + spec.outer;
    let mut holder = 0.0f64;
    let mut pairs = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            let d = field.s[j] - field.s[i];
            let w = field.w[i].min(field.w[j]);
            if d > spec.inj_fraction * w {
                break;
            }
            if d <= 0.0 {
                continue;
            }
            pairs += 1;
            let diff: Vec<f64> = top[j].iter().zip(&top[i]).map(|(a, b)| a - b).collect();
            holder = holder.max(weighted(w, e, norm(&diff)) / d.powf(spec.alpha));
        }
    }
    if pairs == 0 {
        return Err(NumError::Resolution("no sample pairs inside the Hölder radius; refine the grid".into()));
    }
    let total = terms.iter().sum::<f64>() + holder;
    Ok(WeightedNorm { terms, holder, holder_pairs: pairs, total })
}

/// `n` shells, log-uniform on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}
