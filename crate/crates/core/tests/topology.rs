use orbiglue::ale_library::{eguchi_hanson_profile, Provenance};
use orbiglue::topology_checker::*;
use orbiglue::{GroupSpec, TopologyError};
use proptest::prelude::*;

fn piece(tau: i64, extra_half: i64, kahler: bool) -> TopPiece {
    // chi = 3|tau|/2 + extra/2, so 2 chi - 3 |tau| = extra
    let chi = Rational::new(3 * tau.abs() + extra_half, 2);
    TopPiece {
        name: format!("piece({tau},{extra_half})"),
        role: PieceRole::AleNode { gamma_inf: GroupSpec::CyclicSu2 { n: 2 } },
        chi,
        tau: Rational::from_integer(tau),
        singular_points: Vec::new(),
        kahler,
        spin: false,
        deformations: 1,
        provenance: Provenance::EnteredWithCitation("synthetic".into()),
    }
}

fn node_strategy() -> impl Strategy<Value = (i64, i64, bool, bool)> {
    (-3i64..=3, 0i64..4, any::<bool>(), any::<bool>()).prop_map(|(tau, extra, kahler, plus)| {
        let kahler = kahler && tau != 0;
        let extra = if kahler { 0 } else { extra.max(1) };
        (tau, extra, kahler, plus)
    })
}

fn orient(plus: bool) -> Orientation {
    if plus {
        Orientation::Plus
    } else {
        Orientation::Minus
    }
}

fn build(nodes: &[(i64, i64, bool, bool)], order: &[usize]) -> DesingTree {
    let mut tree = DesingTree::new(t4_z2_root()).unwrap();
    for &i in order {
        let (tau, extra, kahler, plus) = nodes[i];
        tree.attach(&format!("n{i}"), piece(tau, extra, kahler), "root", &format!("p{i}"), 0.5, orient(plus)).unwrap();
    }
    tree
}

proptest! {
    #[test]
    fn slack_never_decreases(nodes in prop::collection::vec(node_strategy(), 1..16)) {
        let mut tree = DesingTree::new(t4_z2_root()).unwrap();
        let mut prev = ht_verdict(&tree).unwrap().total_slack;
        for (i, &(tau, extra, kahler, plus)) in nodes.iter().enumerate() {
            tree.attach(&format!("n{i}"), piece(tau, extra, kahler), "root", &format!("p{i}"), 0.5, orient(plus)).unwrap();
            let s = ht_verdict(&tree).unwrap().total_slack;
            prop_assert!(s >= prev);
            prev = s;
        }
    }

    #[test]
    fn aggregate_ignores_order(nodes in prop::collection::vec(node_strategy(), 1..16), seed in any::<u64>()) {
        let forward: Vec<usize> = (0..nodes.len()).collect();
        let mut shuffled = forward.clone();
        let mut s = seed;
        for i in (1..shuffled.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (s >> 33) as usize % (i + 1));
        }
        let a = aggregate(&build(&nodes, &forward)).unwrap();
        let b = aggregate(&build(&nodes, &shuffled)).unwrap();
        prop_assert_eq!(a.chi, b.chi);
        prop_assert_eq!(a.tau, b.tau);
    }

    #[test]
    fn equality_needs_kahler_and_alignment(n in 1usize..16, flip in 0usize..16, mutate_kahler in any::<bool>()) {
        let flip = flip % n;
        let nodes: Vec<_> = (0..n).map(|_| (-1i64, 0i64, true, true)).collect();
        let order: Vec<usize> = (0..n).collect();
        prop_assert_eq!(ht_verdict(&build(&nodes, &order)).unwrap().verdict, HtVerdict::Equality);
        let mut mutated = nodes.clone();
        if mutate_kahler {
            mutated[flip] = (-1, 1, false, true);
        } else if n > 1 {
            mutated[flip].3 = false;
        } else {
            return Ok(());
        }
        let r = ht_verdict(&build(&mutated, &order)).unwrap();
        prop_assert_eq!(r.verdict, HtVerdict::StrictIncrease);
        prop_assert!(!r.det_r_required);
    }
}

#[test]
fn non_kahler_node_is_strict_in_either_orientation() {
    for o in [Orientation::Plus, Orientation::Minus] {
        let mut tree = DesingTree::new(s4_z2_root().unwrap()).unwrap();
        tree.attach("x", piece(1, 2, false), "root", "north", 0.5, o).unwrap();
        assert_eq!(ht_verdict(&tree).unwrap().verdict, HtVerdict::StrictIncrease);
    }
}

#[test]
fn kahler_flag_requires_equality() {
    let mut p = piece(1, 0, true);
    p.chi = Rational::from_integer(3);
    let mut tree = DesingTree::new(t4_z2_root()).unwrap();
    assert!(matches!(tree.attach("x", p, "root", "p0", 0.5, Orientation::Plus), Err(TopologyError::BadPiece { .. })));
}

#[test]
fn partially_smoothed_kummer_may_be_fractional() {
    let mut tree = DesingTree::new(t4_z2_root()).unwrap();
    tree.attach("a", eguchi_hanson_piece().unwrap(), "root", "p0", 0.5, Orientation::Plus).unwrap();
    let agg = aggregate(&tree).unwrap();
    assert_eq!(agg.chi, Rational::new(3, 2));
    assert!(!agg.fully_smoothed);
}

#[test]
fn fractional_full_smoothing_is_an_error() {
    let mut root = t4_z2_root();
    root.singular_points.truncate(1);
    let mut tree = DesingTree::new(root).unwrap();
    tree.attach("a", eguchi_hanson_piece().unwrap(), "root", "p0", 0.5, Orientation::Plus).unwrap();
    assert!(matches!(aggregate(&tree), Err(TopologyError::NonIntegral { .. })));
}

#[test]
fn tree_spec_round_trip() {
    let text = r#"
root = "S4/Z2"
[[nodes]]
label = "a"
piece = "EH"
point = "north"
scale = 0.1
orientation = "+"
[[nodes]]
label = "b"
piece = "EH"
point = "south"
scale = 0.2
orientation = "-"
"#;
    let spec: TreeSpec = toml::from_str(text).unwrap();
    let tree = DesingTree::from_spec(&spec, &PieceCatalog::builtin().unwrap()).unwrap();
    let r = ht_verdict(&tree).unwrap();
    assert_eq!(r.verdict, HtVerdict::StrictIncrease);
    assert!(toml::from_str::<TreeSpec>("root = \"EH\"\nextra = 1").is_err());
}

#[test]
fn tau_two_routes_agree_for_eguchi_hanson() {
    let (direct, from_chi) = tau_routes(&eguchi_hanson_profile(2.0).unwrap()).unwrap();
    assert!((direct - 1.0).abs() < 1e-8 && (from_chi - 1.0).abs() < 1e-8);
}
