//! Config files. Every struct rejects unknown keys.

use std::path::Path;

use anyhow::{bail, Context, Result};
use nalgebra::Matrix3;
use orbiglue::obstruction_engine::scan::ScanConfig;
use orbiglue::GroupSpec;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => parse(p),
    }
}

pub fn parse<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

fn z2() -> GroupSpec {
    GroupSpec::CyclicSu2 { n: 2 }
}

/// Quadratic jet input for the obstruction command.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum JetInput {
    // empty braces so that extra keys are rejected
    Flat {},
    Sphere {},
    Hyperbolic {},
    /// Random `W+`, `W-` with `Ric = lambda g`, drawn from `--seed`.
    RandomEinstein { lambda: f64 },
    /// As above with `det R+ = 0`.
    RankDeficient { lambda: f64 },
    /// Curvature operator blocks, rows listed top to bottom.
    Curvature {
        rplus: [[f64; 3]; 3],
        rminus: [[f64; 3]; 3],
        #[serde(default)]
        ric0: [[f64; 3]; 3],
        scal: f64,
    },
}

pub fn matrix(rows: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| rows[i][j])
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisInput {
    /// The three `O(r^-4)` transverse-traceless fields.
    #[default]
    O4,
    /// Leading term of the Eguchi-Hanson scaling deformation.
    EguchiHansonScaling,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstructionConfig {
    pub jet: JetInput,
    #[serde(default)]
    pub basis: BasisInput,
    #[serde(default = "z2")]
    pub group: GroupSpec,
    #[serde(default)]
    pub scan: ScanConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GluingSection {
    /// Eguchi-Hanson parameter of the ALE piece.
    pub ale_scale: f64,
    pub eps0: f64,
}

impl Default for GluingSection {
    fn default() -> Self {
        Self { ale_scale: 1.0, eps0: 0.5 }
    }
}

impl GluingSection {
    pub fn validate(&self) -> Result<()> {
        if !(self.ale_scale > 0.0 && self.ale_scale.is_finite()) {
            bail!("gluing.ale_scale = {} must be positive", self.ale_scale);
        }
        if !(self.eps0 > 0.0 && self.eps0 < 1.0) {
            bail!("gluing.eps0 = {} must lie in (0, 1)", self.eps0);
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnnulusData {
    /// Low-degree harmonic data, resolved exactly by the mode expansion.
    #[default]
    BandLimited,
    Constant,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnnulusStudy {
    pub eps_list: Vec<f64>,
    pub k_max: usize,
    /// Radial shells of the finite-difference oracle.
    pub shells: usize,
    pub group: GroupSpec,
    pub data: AnnulusData,
}

impl Default for AnnulusStudy {
    fn default() -> Self {
        Self { eps_list: vec![0.2, 0.1], k_max: 4, shells: 128, group: z2(), data: AnnulusData::default() }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResidualScalingStudy {
    pub study: orbiglue::gluing_lab::ResidualStudyConfig,
    pub gluing: GluingSection,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PinchingStudyConfig {
    pub t_list: Vec<f64>,
    pub p_list: Vec<f64>,
    pub gluing: GluingSection,
}

impl Default for PinchingStudyConfig {
    fn default() -> Self {
        Self {
            t_list: orbiglue::gluing_lab::studies::default_pinching_ts(),
            p_list: vec![1.0, 2.0, 4.0],
            gluing: GluingSection::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SinWarpStudy {
    pub eps: f64,
    /// Ratio of the outer to the inner radius of the cutoff.
    pub b: f64,
    pub group_order: usize,
    /// Log-spaced sample radii written to the CSV.
    pub samples: usize,
}

impl Default for SinWarpStudy {
    fn default() -> Self {
        Self { eps: 1e-6, b: 10f64.exp(), group_order: 2, samples: 400 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "problem", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PicardStudy {
    /// `Phi(x) = a + x + sign x^2`.
    Quadratic {
        a: f64,
        #[serde(default = "minus_one")]
        sign: f64,
        #[serde(default)]
        overrides: ConstantOverrides,
        #[serde(default = "default_starts")]
        starts: usize,
    },
    /// Mode-truncated gluing system on the round `S^4/Z2` with an Eguchi-Hanson node.
    Gluing {
        t: f64,
        #[serde(default = "default_modes")]
        modes: usize,
        #[serde(default = "default_r0")]
        r0: f64,
        /// Sample points for the Lipschitz constant.
        #[serde(default = "default_samples")]
        samples: usize,
        #[serde(default)]
        overrides: ConstantOverrides,
        #[serde(default = "default_starts")]
        starts: usize,
        #[serde(default)]
        gluing: GluingSection,
    },
}

impl Default for PicardStudy {
    fn default() -> Self {
        PicardStudy::Quadratic { a: 0.1, sign: -1.0, overrides: ConstantOverrides::default(), starts: default_starts() }
    }
}

/// Replaces the computed constants of a fixed-point problem.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantOverrides {
    pub c: Option<f64>,
    pub q: Option<f64>,
    pub r0: Option<f64>,
}

fn minus_one() -> f64 {
    -1.0
}

fn default_starts() -> usize {
    8
}

fn default_modes() -> usize {
    4
}

fn default_r0() -> f64 {
    0.05
}

fn default_samples() -> usize {
    16
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<SinWarpStudy>("eps = 1e-3\nbogus = 1").is_err());
        assert!(toml::from_str::<ObstructionConfig>("[jet]\nkind = \"sphere\"\nextra = 2").is_err());
        assert!(toml::from_str::<PicardStudy>("problem = \"quadratic\"\na = 0.1\nwhat = 1").is_err());
    }

    #[test]
    fn curvature_jet_parses() {
        let text = "[jet]\nkind = \"curvature\"\nscal = 12.0\nrplus = [[1,0,0],[0,1,0],[0,0,1]]\nrminus = [[1,0,0],[0,1,0],[0,0,1]]\n";
        let c: ObstructionConfig = toml::from_str(text).unwrap();
        assert!(matches!(c.jet, JetInput::Curvature { scal, .. } if scal == 12.0));
        assert_eq!(c.basis, BasisInput::O4);
    }
}
