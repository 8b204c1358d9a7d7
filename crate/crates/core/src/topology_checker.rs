//! Euler characteristic and signature bookkeeping on desingularization trees.
//!
//! Every piece carries the boundary-corrected pair `(chi~, tau~)` as exact
//! rationals. For a tree, `chi(M)` and `tau(M)` are sums over the pieces, with
//! the sign of `tau~` of each node flipped when it is glued in the opposite
//! orientation.

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::ale_library::invariants::curvature_invariants;
use crate::ale_library::{eguchi_hanson_profile, Provenance, RadialMetric};
use crate::cone_geometry::group::{make_group, GroupSpec};
use crate::error::TopologyError;

pub type Rational = Ratio<i64>;

/// Closest rational with denominator at most `max_den`, if within `tol`.
pub fn rationalize(x: f64, max_den: i64, tol: f64) -> Option<Rational> {
    (1..=max_den).find_map(|d| {
        let n = (x * d as f64).round();
        ((x - n / d as f64).abs() <= tol).then(|| Rational::new(n as i64, d))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularPoint {
    pub id: String,
    pub group: GroupSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PieceRole {
    OrbifoldRoot,
    AleNode { gamma_inf: GroupSpec },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopPiece {
    pub name: String,
    pub role: PieceRole,
    pub chi: Rational,
    pub tau: Rational,
    /// Orbifold points still to be resolved.
    pub singular_points: Vec<SingularPoint>,
    pub kahler: bool,
    pub spin: bool,
    /// Dimension of the Einstein deformation space of the piece.
    pub deformations: u32,
    pub provenance: Provenance,
}

impl TopPiece {
    /// `2 chi~ - 3 |tau~|`.
    pub fn slack(&self) -> Rational {
        Rational::from_integer(2) * self.chi - Rational::from_integer(3) * self.tau.abs()
    }

    /// Einstein pieces satisfy `2 chi~ >= 3 |tau~|`, with equality for Kähler pieces.
    pub fn validate(&self) -> Result<(), TopologyError> {
        let bad = |reason: String| Err(TopologyError::BadPiece { piece: self.name.clone(), reason });
        if self.slack() < Rational::zero() {
            return bad(format!("2 chi - 3 |tau| = {} < 0", self.slack()));
        }
        if self.kahler && matches!(self.role, PieceRole::AleNode { .. }) && !self.slack().is_zero() {
            return bad(format!("Kähler ALE piece with 2 chi - 3 |tau| = {}", self.slack()));
        }
        Ok(())
    }

    pub fn gamma_inf(&self) -> Option<&GroupSpec> {
        match &self.role {
            PieceRole::AleNode { gamma_inf } => Some(gamma_inf),
            PieceRole::OrbifoldRoot => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Orientation {
    pub fn sign(self) -> i64 {
        match self {
            Orientation::Plus => 1,
            Orientation::Minus => -1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TreeNode {
    pub label: String,
    pub piece: TopPiece,
    /// `None` for the root, else the index of the parent node.
    pub parent: Option<usize>,
    pub point: String,
    pub scale: f64,
    pub orientation: Orientation,
}

/// A root orbifold with ALE nodes glued at its singular points and, recursively,
/// at theirs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DesingTree {
    pub root: TopPiece,
    pub nodes: Vec<TreeNode>,
}

impl DesingTree {
    pub fn new(root: TopPiece) -> Result<Self, TopologyError> {
        root.validate()?;
        Ok(Self { root, nodes: Vec::new() })
    }

    fn parent_piece(&self, parent: Option<usize>) -> &TopPiece {
        parent.map_or(&self.root, |i| &self.nodes[i].piece)
    }

    fn parent_label(&self, parent: Option<usize>) -> String {
        parent.map_or("root".to_string(), |i| self.nodes[i].label.clone())
    }

    pub fn find(&self, label: &str) -> Option<Option<usize>> {
        if label == "root" {
            return Some(None);
        }
        self.nodes.iter().position(|n| n.label == label).map(Some)
    }

    /// Glues `piece` at `point` of the parent, checking the group match and
    /// that the point is still free.
    pub fn attach(
        &mut self,
        label: &str,
        piece: TopPiece,
        parent: &str,
        point: &str,
        scale: f64,
        orientation: Orientation,
    ) -> Result<usize, TopologyError> {
        piece.validate()?;
        if self.find(label).is_some() {
            return Err(TopologyError::DuplicateNode(label.into()));
        }
        let parent_idx = self.find(parent).ok_or_else(|| TopologyError::UnknownParent(parent.into()))?;
        if !(scale > 0.0 && scale < 1.0) {
            return Err(TopologyError::BadScale { node: label.into(), scale });
        }
        let gamma = piece.gamma_inf().ok_or_else(|| TopologyError::BadPiece {
            piece: piece.name.clone(),
            reason: "an orbifold root cannot be glued as a node".into(),
        })?;
        let pp = self.parent_piece(parent_idx);
        let sp = pp.singular_points.iter().find(|p| p.id == point).ok_or_else(|| TopologyError::UnknownPoint {
            parent: parent.into(),
            point: point.into(),
        })?;
        if sp.group != *gamma {
            return Err(TopologyError::GroupMismatch {
                node: label.into(),
                child: gamma.label(),
                parent: parent.into(),
                point: point.into(),
                point_group: sp.group.label(),
            });
        }
        if self.nodes.iter().any(|n| n.parent == parent_idx && n.point == point) {
            return Err(TopologyError::PointReused { parent: parent.into(), point: point.into() });
        }
        self.nodes.push(TreeNode { label: label.into(), piece, parent: parent_idx, point: point.into(), scale, orientation });
        Ok(self.nodes.len() - 1)
    }

    /// `T_j`, the product of relative scales from the root to node `j`.
    pub fn absolute_scales(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.nodes.len()];
        for (j, n) in self.nodes.iter().enumerate() {
            // parents precede children
            out[j] = n.scale * n.parent.map_or(1.0, |p| out[p]);
        }
        out
    }

    /// Singular points not yet resolved, as `(owner, point)`.
    pub fn open_points(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for owner in std::iter::once(None).chain((0..self.nodes.len()).map(Some)) {
            for p in &self.parent_piece(owner).singular_points {
                if !self.nodes.iter().any(|n| n.parent == owner && n.point == p.id) {
                    out.push((self.parent_label(owner), p.id.clone()));
                }
            }
        }
        out
    }

    pub fn is_fully_smoothed(&self) -> bool {
        self.open_points().is_empty()
    }

    /// Signed `tau~` of each node.
    fn signed_taus(&self) -> Vec<Rational> {
        self.nodes.iter().map(|n| n.piece.tau * Rational::from_integer(n.orientation.sign())).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub chi: Rational,
    pub tau: Rational,
    pub fully_smoothed: bool,
}

/// `chi(M) = chi~(M_o) + sum chi~(N_j)` and likewise for `tau`.
pub fn aggregate(tree: &DesingTree) -> Result<Aggregate, TopologyError> {
    let chi = tree.nodes.iter().fold(tree.root.chi, |acc, n| acc + n.piece.chi);
    let tau = tree.signed_taus().into_iter().fold(tree.root.tau, |acc, t| acc + t);
    let fully_smoothed = tree.is_fully_smoothed();
    if fully_smoothed && (!chi.is_integer() || !tau.is_integer()) {
        return Err(TopologyError::NonIntegral { chi: chi.to_string(), tau: tau.to_string() });
    }
    Ok(Aggregate { chi, tau, fully_smoothed })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HtVerdict {
    StrictIncrease,
    Equality,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HtReport {
    pub verdict: HtVerdict,
    pub chi: Rational,
    pub tau: Rational,
    pub root_slack: Rational,
    pub total_slack: Rational,
    /// Set in the equality case: `det R = 0` is required at every singular point.
    pub det_r_required: bool,
    pub diagnosis: Vec<String>,
}

/// Compares `2 chi(M) - 3 |tau(M)|` with the slack of the root.
pub fn ht_verdict(tree: &DesingTree) -> Result<HtReport, TopologyError> {
    let agg = aggregate(tree)?;
    let two = Rational::from_integer(2);
    let three = Rational::from_integer(3);
    let root_slack = tree.root.slack();
    let total_slack = two * agg.chi - three * agg.tau.abs();
    if total_slack < root_slack {
        return Err(TopologyError::Violation { root: root_slack.to_string(), total: total_slack.to_string() });
    }
    let taus = tree.signed_taus();
    let dominant = if !tree.root.tau.is_zero() {
        tree.root.tau.signum()
    } else {
        taus.iter().find(|t| !t.is_zero()).map_or(Rational::zero(), |t| t.signum())
    };
    let mut diagnosis = Vec::new();
    for (n, t) in tree.nodes.iter().zip(&taus) {
        if !n.piece.kahler {
            diagnosis.push(format!("{}: not Kähler (2 chi - 3 |tau| = {})", n.label, n.piece.slack()));
        } else if !t.is_zero() && t.signum() != dominant {
            diagnosis.push(format!("{}: orientation opposite to the dominant one", n.label));
        }
    }
    let structural = diagnosis.is_empty();
    let arithmetic = total_slack == root_slack;
    if structural != arithmetic {
        return Err(TopologyError::Inconsistent(format!(
            "slack equality is {arithmetic} but Kähler and orientation data say {structural}"
        )));
    }
    let verdict = if arithmetic { HtVerdict::Equality } else { HtVerdict::StrictIncrease };
    if arithmetic {
        diagnosis.push("all nodes Kähler and aligned: det R = 0 required at every singular point".into());
    }
    Ok(HtReport {
        verdict,
        chi: agg.chi,
        tau: agg.tau,
        root_slack,
        total_slack,
        det_r_required: arithmetic,
        diagnosis,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlaggedPoint {
    pub point: String,
    pub group: String,
}

/// Root singular points whose group lies in `SU(2)`, where `det R = 0` is
/// forced when the smoothed manifold is spin. Empty when not spin.
pub fn spin_applicability(tree: &DesingTree, spin: bool) -> Result<Vec<FlaggedPoint>, TopologyError> {
    if !spin {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for p in &tree.root.singular_points {
        let g = make_group(&p.group).map_err(|e| TopologyError::Numeric(e.into()))?;
        if g.in_su2() {
            out.push(FlaggedPoint { point: p.id.clone(), group: p.group.label() });
        }
    }
    Ok(out)
}

/// Dimension count of the approximate kernel: root deformations plus those of
/// every node.
pub fn degrees_of_freedom(tree: &DesingTree) -> u32 {
    tree.root.deformations + tree.nodes.iter().map(|n| n.piece.deformations).sum::<u32>()
}

fn computed(m: &RadialMetric) -> Result<(Rational, Rational), TopologyError> {
    let ci = curvature_invariants(m)?;
    let r = |x: f64, what: &str| {
        rationalize(x, 1000, 1e-6).ok_or_else(|| TopologyError::BadPiece {
            piece: m.name.clone(),
            reason: format!("{what} = {x} is not close to a rational"),
        })
    };
    Ok((r(ci.chi, "chi")?, r(ci.tau, "tau")?))
}

fn z2() -> GroupSpec {
    GroupSpec::CyclicSu2 { n: 2 }
}

/// Eguchi-Hanson, with `(chi~, tau~)` from curvature quadrature.
pub fn eguchi_hanson_piece() -> Result<TopPiece, TopologyError> {
    let (chi, tau) = computed(&eguchi_hanson_profile(1.0)?)?;
    Ok(TopPiece {
        name: "EH".into(),
        role: PieceRole::AleNode { gamma_inf: z2() },
        chi,
        tau,
        singular_points: Vec::new(),
        kahler: true,
        spin: true,
        deformations: 3,
        provenance: Provenance::ComputedByQuadrature,
    })
}

/// The flat `T^4/Z_2` with its 16 points `p0 .. p15`. Its curvature vanishes,
/// so `chi~ = tau~ = 0`.
pub fn t4_z2_root() -> TopPiece {
    TopPiece {
        name: "T4/Z2".into(),
        role: PieceRole::OrbifoldRoot,
        chi: Rational::zero(),
        tau: Rational::zero(),
        singular_points: (0..16).map(|i| SingularPoint { id: format!("p{i}"), group: z2() }).collect(),
        kahler: true,
        spin: true,
        deformations: 9,
        provenance: Provenance::ComputedByQuadrature,
    }
}

/// The round `S^4/Z_2` with its two points `north`, `south`, invariants by quadrature.
pub fn s4_z2_root() -> Result<TopPiece, TopologyError> {
    let (chi, tau) = computed(&RadialMetric::round_sphere(2))?;
    Ok(TopPiece {
        name: "S4/Z2".into(),
        role: PieceRole::OrbifoldRoot,
        chi,
        tau,
        singular_points: ["north", "south"].iter().map(|id| SingularPoint { id: (*id).into(), group: z2() }).collect(),
        kahler: false,
        spin: true,
        deformations: 0,
        provenance: Provenance::ComputedByQuadrature,
    })
}

/// Named pieces available to tree descriptions.
#[derive(Clone, Debug, Default)]
pub struct PieceCatalog {
    pub pieces: Vec<TopPiece>,
}

impl PieceCatalog {
    pub fn builtin() -> Result<Self, TopologyError> {
        Ok(Self { pieces: vec![t4_z2_root(), s4_z2_root()?, eguchi_hanson_piece()?] })
    }

    pub fn get(&self, name: &str) -> Result<TopPiece, TopologyError> {
        self.pieces.iter().find(|p| p.name == name).cloned().ok_or_else(|| TopologyError::UnknownPiece(name.into()))
    }
}

/// Tree description as read from a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeSpec {
    pub root: String,
    #[serde(default)]
    pub nodes: Vec<NodeSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub label: String,
    pub piece: String,
    #[serde(default = "root_label")]
    pub parent: String,
    pub point: String,
    pub scale: f64,
    pub orientation: Orientation,
}

fn root_label() -> String {
    "root".into()
}

impl DesingTree {
    pub fn from_spec(spec: &TreeSpec, catalog: &PieceCatalog) -> Result<Self, TopologyError> {
        let mut tree = Self::new(catalog.get(&spec.root)?)?;
        for n in &spec.nodes {
            tree.attach(&n.label, catalog.get(&n.piece)?, &n.parent, &n.point, n.scale, n.orientation)?;
        }
        Ok(tree)
    }
}

/// `T^4/Z_2` with an Eguchi-Hanson node at each of its 16 points.
pub fn kummer_tree(orientation: Orientation) -> Result<DesingTree, TopologyError> {
    let mut tree = DesingTree::new(t4_z2_root())?;
    let eh = eguchi_hanson_piece()?;
    for i in 0..16 {
        tree.attach(&format!("eh{i}"), eh.clone(), "root", &format!("p{i}"), 0.1, orientation)?;
    }
    Ok(tree)
}

/// Two routes to `|tau~|` for a hyperkähler ALE piece: direct Weyl quadrature
/// and `2 chi~ / 3` from the equality case.
pub fn tau_routes(m: &RadialMetric) -> Result<(f64, f64), TopologyError> {
    let ci = curvature_invariants(m)?;
    Ok((ci.tau.abs(), 2.0 * ci.chi / 3.0))
}
