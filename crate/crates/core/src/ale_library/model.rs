//! ALE models and catalog entries.

use serde::{Deserialize, Serialize};

use super::asymptotics::{o4_basis, DeformationAsymptotics};
use super::invariants::{curvature_invariants, eguchi_hanson_profile};
use super::radial::RadialMetric;
use crate::cone_geometry::group::{make_group, GroupSpec};
use crate::error::{GeomError, NumError};

/// Where a tabulated number comes from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ComputedByQuadrature,
    EnteredWithCitation(String),
}

/// A named ALE piece with tabulated invariants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub name: String,
    pub group: GroupSpec,
    pub chi: f64,
    pub tau: f64,
    #[serde(default)]
    pub b: Option<f64>,
    #[serde(default)]
    pub basis: Vec<String>,
    #[serde(default)]
    pub kahler: bool,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AleTag {
    EguchiHanson { a: f64 },
    KronheimerAsymptotic { group: GroupSpec, zeta: Vec<f64> },
    TableEntry(TableEntry),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AleModel {
    pub tag: AleTag,
    pub group_at_infinity: GroupSpec,
}

impl AleModel {
    pub fn eguchi_hanson(a: f64) -> Result<Self, NumError> {
        eguchi_hanson_profile(a)?;
        Ok(Self { tag: AleTag::EguchiHanson { a }, group_at_infinity: GroupSpec::CyclicSu2 { n: 2 } })
    }

    /// Leading asymptotics only. `zeta` must be nonzero and `group` inside `SU(2)`.
    pub fn kronheimer(group: GroupSpec, zeta: Vec<f64>) -> Result<Self, GeomError> {
        if zeta.is_empty() || zeta.len() % 3 != 0 || zeta.iter().all(|z| *z == 0.0) {
            return Err(GeomError::BadParameters("zeta must be a nonzero vector in R^{3k}".into()));
        }
        let action = make_group(&group)?;
        if !action.in_su2() {
            return Err(GeomError::BadParameters(format!("{} is not inside SU(2)", group.label())));
        }
        Ok(Self { tag: AleTag::KronheimerAsymptotic { group: group.clone(), zeta }, group_at_infinity: group })
    }

    pub fn table(entry: TableEntry) -> Self {
        let g = entry.group.clone();
        Self { tag: AleTag::TableEntry(entry), group_at_infinity: g }
    }

    pub fn name(&self) -> String {
        match &self.tag {
            AleTag::EguchiHanson { a } => format!("eguchi-hanson(a={a})"),
            AleTag::KronheimerAsymptotic { group, .. } => format!("kronheimer({})", group.label()),
            AleTag::TableEntry(e) => e.name.clone(),
        }
    }

    pub fn radial_profile(&self) -> Option<RadialMetric> {
        match &self.tag {
            AleTag::EguchiHanson { a } => eguchi_hanson_profile(*a).ok(),
            _ => None,
        }
    }

    /// Leading terms of the deformations. Kronheimer metrics share the
    /// Eguchi-Hanson triple after normalizing one coordinate of `zeta`.
    pub fn deformation_basis(&self) -> Option<DeformationAsymptotics> {
        match &self.tag {
            AleTag::EguchiHanson { .. } | AleTag::KronheimerAsymptotic { .. } => Some(o4_basis()),
            AleTag::TableEntry(_) => None,
        }
    }

    /// `(chi, tau)`, computed when a profile is available.
    pub fn invariants(&self) -> Result<(f64, f64, Provenance), NumError> {
        match &self.tag {
            AleTag::TableEntry(e) => Ok((e.chi, e.tau, e.provenance.clone())),
            _ => match self.radial_profile() {
                Some(m) => {
                    let ci = curvature_invariants(&m)?;
                    Ok((ci.chi, ci.tau, Provenance::ComputedByQuadrature))
                }
                None => Err(NumError::Invalid(format!("{}: no profile to integrate", self.name()))),
            },
        }
    }
}

/// A list of tabulated pieces.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AleCatalog {
    #[serde(default)]
    pub entries: Vec<TableEntry>,
}

impl AleCatalog {
    pub fn get(&self, name: &str) -> Option<&TableEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

/// Fails when a tabulated `(chi, tau)` disagrees with a computed value.
/// The sign of `tau` is orientation-dependent and compared in absolute value.
pub fn reconcile(entry: &TableEntry, chi: f64, tau: f64, tol: f64) -> Result<(), NumError> {
    if (entry.chi - chi).abs() > tol || (entry.tau.abs() - tau.abs()).abs() > tol {
        return Err(NumError::Invalid(format!(
            "{}: entered (chi, tau) = ({}, {}) but computed ({chi:.9}, {tau:.9})",
            entry.name, entry.chi, entry.tau
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eguchi_hanson_model() {
        let m = AleModel::eguchi_hanson(1.0).unwrap();
        assert_eq!(m.group_at_infinity, GroupSpec::CyclicSu2 { n: 2 });
        let (chi, tau, p) = m.invariants().unwrap();
        assert_eq!(p, Provenance::ComputedByQuadrature);
        assert!((chi - 1.5).abs() < 1e-6 && (tau.abs() - 1.0).abs() < 1e-6);
        let entry = TableEntry {
            name: "eh".into(),
            group: GroupSpec::CyclicSu2 { n: 2 },
            chi: 1.5,
            tau: -1.0,
            b: None,
            basis: vec![],
            kahler: true,
            provenance: Provenance::EnteredWithCitation("test".into()),
        };
        reconcile(&entry, chi, tau, 1e-6).unwrap();
        assert!(reconcile(&TableEntry { chi: 2.0, ..entry }, chi, tau, 1e-6).is_err());
    }

    #[test]
    fn kronheimer_requires_nonzero_zeta() {
        assert!(AleModel::kronheimer(GroupSpec::CyclicSu2 { n: 3 }, vec![0.0; 6]).is_err());
        assert!(AleModel::kronheimer(GroupSpec::CyclicSu2 { n: 3 }, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).is_ok());
        assert!(AleModel::kronheimer(GroupSpec::U2Family { d: 1, n: 3, m: 1 }, vec![1.0, 0.0, 0.0]).is_err());
    }
}
