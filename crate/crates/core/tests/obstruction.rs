use nalgebra::{Matrix3, Matrix4};
use orbiglue::ale_library::{eguchi_hanson_profile, o4_basis, scaling_deformation, DeformationAsymptotics};
use orbiglue::cone_geometry::group::{left_mult, make_group, right_mult};
use orbiglue::cone_geometry::jet::space_form_jet;
use orbiglue::obstruction_engine::*;
use orbiglue::sphere_harmonics::QuadratureRule;
use orbiglue::{GroupAction, GroupSpec, QuadraticJet};
use proptest::prelude::*;

fn z2() -> GroupAction {
    make_group(&GroupSpec::CyclicSu2 { n: 2 }).unwrap()
}

fn lam(h: &QuadraticJet, basis: &DeformationAsymptotics, rule: &QuadratureRule) -> Vec<f64> {
    lambda_integrals(h, basis, &z2(), rule).unwrap()
}

fn unit_quat(v: [f64; 4]) -> [f64; 4] {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.map(|x| x / n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lambda_is_linear(s1 in 0u64..1000, s2 in 0u64..1000, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let rule = default_rule();
        let basis = o4_basis();
        let h = random_einstein_jet(s1, 0.3);
        let k = random_einstein_jet(s2, -0.7);
        let combo = lam(&h.scale(a).add(&k.scale(b)), &basis, &rule);
        let (lh, lk) = (lam(&h, &basis, &rule), lam(&k, &basis, &rule));
        for i in 0..3 {
            prop_assert!((combo[i] - a * lh[i] - b * lk[i]).abs() < 1e-11);
        }
    }

    #[test]
    fn lambda_is_linear_in_the_basis(s in 0u64..1000, a in -2.0f64..2.0) {
        let rule = default_rule();
        let b = o4_basis();
        let h = random_einstein_jet(s, 0.1);
        let l = lam(&h, &b, &rule);
        let mixed = DeformationAsymptotics { labels: vec!["m".into()], fields: vec![b.fields[0].add(&b.fields[2].scale(a))] };
        let lm = lam(&h, &mixed, &rule);
        prop_assert!((lm[0] - l[0] - a * l[2]).abs() < 1e-11);
    }

    #[test]
    fn orientation_equivariance(s in 0u64..1000, theta in 0.0f64..6.3, p in prop::array::uniform4(-1.0f64..1.0)) {
        prop_assume!(p.iter().map(|x| x * x).sum::<f64>() > 0.05);
        let rule = default_rule();
        let basis = normalized_basis(&o4_basis(), &rule);
        let h = random_einstein_jet(s, 0.5);
        // isometries of the model: U(1) on the left, SU(2) on the right
        let phi = left_mult(&[theta.cos(), theta.sin(), 0.0, 0.0]) * right_mult(&unit_quat(p));
        // pulled-back basis as a fixed orthogonal combination of the basis
        let pulled: Vec<_> = basis.fields.iter().map(|f| f.pullback(&phi)).collect();
        let inner = |a: &orbiglue::HomogeneousTensorField, b: &orbiglue::HomogeneousTensorField| {
            rule.integrate(|x| a.eval_sym2(x).component_mul(&b.eval_sym2(x)).sum())
        };
        let m = Matrix3::from_fn(|i, j| inner(&pulled[i], &basis.fields[j]));
        prop_assert!((m * m.transpose() - Matrix3::identity()).amax() < 1e-10);
        let rotated = DeformationAsymptotics { labels: basis.labels.clone(), fields: pulled };
        let moved = lam(&h.pullback(&phi), &rotated, &rule);
        let fixed = lam(&h, &basis, &rule);
        for i in 0..3 {
            prop_assert!((moved[i] - fixed[i]).abs() < 1e-10);
        }
        let plain = lam(&h.pullback(&phi), &basis, &rule);
        let predicted = m * nalgebra::Vector3::from_column_slice(&plain);
        for i in 0..3 {
            prop_assert!((predicted[i] - fixed[i]).abs() < 1e-10);
        }
    }
}

#[test]
fn scale_equivariance() {
    let rule = default_rule();
    let basis = o4_basis();
    let h = random_einstein_jet(17, 0.8);
    let l = lam(&h, &basis, &rule);
    for s in [2.0, 10.0] {
        let ls = lam(&h.scale(s), &basis, &rule);
        for i in 0..3 {
            assert!((ls[i] - s * l[i]).abs() < 1e-11 * s);
        }
    }
}

#[test]
fn non_einstein_jet_is_rejected() {
    let rule = default_rule();
    let mut h = space_form_jet(1.0);
    h.lambda = 0.0;
    assert!(lambda_integrals(&h, &o4_basis(), &z2(), &rule).is_err());
}

#[test]
fn non_invariant_basis_is_rejected() {
    let rule = default_rule();
    // left multiplication by i: free, preserves the jet, moves O4_2 and O4_3
    let m = left_mult(&[0.0, 1.0, 0.0, 0.0]);
    let gens = vec![std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))];
    let z4 = make_group(&GroupSpec::Custom { generators: gens }).unwrap();
    let r = lambda_integrals(&space_form_jet(1.0), &o4_basis(), &z4, &rule);
    assert!(r.is_err());
}

#[test]
fn space_form_jets_at_identity() {
    // sphere and hyperbolic jets pair only with the diagonal element
    let rule = default_rule();
    let s = lam(&space_form_jet(1.0), &o4_basis(), &rule);
    let h = lam(&space_form_jet(-1.0), &o4_basis(), &rule);
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((s[0] - 2.0 * pi2).abs() < 1e-11, "{s:?}");
    assert!((h[0] + 2.0 * pi2).abs() < 1e-11, "{h:?}");
    assert!(s[1].abs() < 1e-12 && s[2].abs() < 1e-12);
}

#[test]
fn spaceform_closed_form() {
    let z2 = z2();
    assert_eq!(spaceform_obstruction(0.0, SpaceForm::Hyperbolic, &z2).unwrap(), 0.0);
    let v = spaceform_obstruction(1.0, SpaceForm::Hyperbolic, &z2).unwrap();
    assert!((v + 12.0 * std::f64::consts::PI.powi(2)).abs() < 1e-12);
    assert!(spaceform_obstruction(-1.0, SpaceForm::Spherical, &z2).is_err());
}

#[test]
fn eguchi_hanson_scaling_matches_closed_form() {
    let rule = default_rule();
    let m = eguchi_hanson_profile(1.0).unwrap();
    let sd = scaling_deformation(&m).unwrap();
    let basis = scaling_leading_field(sd.leading_radial);
    for form in [SpaceForm::Hyperbolic, SpaceForm::Spherical] {
        let k = if form == SpaceForm::Hyperbolic { -1.0 } else { 1.0 };
        let direct = lam(&space_form_jet(k), &basis, &rule)[0];
        let closed = spaceform_obstruction(sd.b, form, &z2()).unwrap();
        assert!((direct - closed).abs() < 0.01 * closed.abs(), "{direct} {closed}");
    }
}

#[test]
fn gauge_transfer_on_random_jets() {
    let rule = default_rule();
    let basis = o4_basis();
    for s in 0..20 {
        let h = random_einstein_jet(100 + s, (s as f64 - 10.0) / 7.0);
        let g = gauge_transfer_check(&h, &basis, &z2(), &rule).unwrap();
        assert!(g.discrepancy <= 1e-8, "jet {s}: {:.3e}", g.discrepancy);
    }
}

#[test]
fn divergence_free_jet_needs_no_correction() {
    let rule = default_rule();
    let h = QuadraticJet::zero(0.0);
    let g = gauge_transfer_check(&h, &o4_basis(), &z2(), &rule).unwrap();
    assert!(g.v_coefficients.iter().all(|v| *v == 0.0));
    assert_eq!(g.lambda, g.lambda_hat);
}

#[test]
fn lambda_hat_requires_divergence_free_input() {
    let rule = default_rule();
    let r = lambda_hat_integrals(&space_form_jet(1.0), &Matrix4::zeros(), &o4_basis(), &z2(), &rule, None);
    assert!(r.is_err());
}

#[test]
fn bulk_term_vanishes_for_every_cutoff() {
    let rule = default_rule();
    let g = gauge_transfer_check(&space_form_jet(1.0), &o4_basis(), &z2(), &rule).unwrap();
    let h_hat = g.h_hat.unwrap();
    let o = Matrix4::new(1.0, 0.3, -0.2, 0.0, 0.3, -2.0, 0.5, 0.1, -0.2, 0.5, 0.4, 0.7, 0.0, 0.1, 0.7, 0.6);
    // truncated-radius sequence and its Richardson extrapolation
    let vals: Vec<Vec<f64>> = [4.0, 8.0, 16.0]
        .iter()
        .map(|&cut| {
            let eh = EguchiHansonObstructions { a: 1.0, cut, radial_nodes: 96, sphere_degree: 6 };
            eh.bulk(&o).unwrap()
        })
        .collect();
    for i in 0..3 {
        let rich = vals[2][i] + (vals[2][i] - vals[1][i]) / 3.0;
        assert!(rich.abs() < 1e-12 && vals[0][i].abs() < 1e-12);
    }
    let eh = EguchiHansonObstructions { a: 1.0, cut: 6.0, radial_nodes: 96, sphere_degree: 6 };
    let with = lambda_hat_integrals(&h_hat, &o, &o4_basis(), &z2(), &rule, Some(&eh)).unwrap();
    let without = lambda_hat_integrals(&h_hat, &Matrix4::zeros(), &o4_basis(), &z2(), &rule, None).unwrap();
    for i in 0..3 {
        assert!((with[i] - without[i]).abs() < 1e-12);
    }
    assert!(lambda_hat_integrals(&h_hat, &o, &o4_basis(), &z2(), &rule, None).is_err());
}

#[test]
fn determinant_factorization() {
    for s in 0..20 {
        let h = random_einstein_jet(s, 0.25 * s as f64 - 2.0);
        let op = orbiglue::cone_geometry::jet::curvature_from_jet(&h);
        let (p, m, full) = det_rplus_test(&op);
        assert!((full - p * m).abs() < 1e-10 * (1.0 + full.abs()));
    }
    let h = rank_deficient_jet(3, 0.6).unwrap();
    let (p, m, _) = det_rplus_test(&orbiglue::cone_geometry::jet::curvature_from_jet(&h));
    assert!(p.abs() < 1e-12 && m.abs() > 1e-6);
}

#[test]
fn scan_verdicts_agree_with_det_rplus() {
    let rule = default_rule();
    let cfg = ScanConfig::default();
    let grid = OrientationGrid::new(&o4_basis(), &z2(), &rule, &cfg);
    let mut deficient = 0;
    let mut total = 0;
    for s in 0..90u64 {
        let h = random_einstein_jet(1000 + s, (s % 7) as f64 * 0.3 - 0.9);
        let r = orientation_scan(&h, &grid, &rule, &cfg);
        assert!(r.consistent, "random jet {s}: {:?}", r.parities);
        total += 1;
    }
    for s in 0..25u64 {
        let h = rank_deficient_jet(2000 + s, (s % 5) as f64 * 0.4 - 0.8).unwrap();
        let r = orientation_scan(&h, &grid, &rule, &cfg);
        assert!(r.consistent, "rank-deficient jet {s}: {:?}", r.parities);
        assert_eq!(r.verdict, Verdict::UnobstructedAtTolerance);
        deficient += 1;
        total += 1;
    }
    assert!(total >= 100 && deficient >= 20);
    for k in [1.0, -1.0] {
        let r = orientation_scan(&space_form_jet(k), &grid, &rule, &cfg);
        assert_eq!(r.verdict, Verdict::Obstructed);
        assert!(r.det_rplus.abs() > 1e-3);
    }
}
