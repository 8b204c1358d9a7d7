use nalgebra::Matrix4;
use orbiglue::ale_library::invariants::{curvature_invariants, ricci_residual};
use orbiglue::ale_library::*;
use orbiglue::annulus_solver::*;
use orbiglue::cone_geometry::exceptional::{exceptional_values_vector, harmonic_sym2_dimensions, Sym2Filters};
use orbiglue::cone_geometry::field::{r2_dr2, r2_metric, r4_sum_alpha_sq, r_dr};
use orbiglue::cone_geometry::*;
use orbiglue::gluing_lab::{build_gluing, GluedEnds, GluingConfig};
use orbiglue::sphere_harmonics::*;
use proptest::prelude::*;

fn groups() -> Vec<GroupSpec> {
    vec![
        GroupSpec::Trivial,
        GroupSpec::CyclicSu2 { n: 2 },
        GroupSpec::CyclicSu2 { n: 5 },
        GroupSpec::BinaryDihedral { n: 3 },
        GroupSpec::BinaryTetrahedral,
        GroupSpec::BinaryOctahedral,
        GroupSpec::BinaryIcosahedral,
        GroupSpec::U2Family { d: 1, n: 2, m: 1 },
        GroupSpec::U2Family { d: 2, n: 3, m: 1 },
    ]
}

fn z2() -> GroupAction {
    make_group(&GroupSpec::CyclicSu2 { n: 2 }).unwrap()
}

fn apply(g: &Matrix4<f64>, x: &[f64; 4]) -> [f64; 4] {
    std::array::from_fn(|i| (0..4).map(|j| g[(i, j)] * x[j]).sum())
}

#[test]
fn group_elements_are_orthogonal_closed_and_free() {
    let expected = [1, 2, 5, 12, 24, 48, 120, 4, 18];
    for (spec, order) in groups().iter().zip(expected) {
        let g = make_group(spec).unwrap();
        assert_eq!(g.order(), order, "{}", spec.label());
        let els = g.elements();
        for a in els {
            assert!((a.transpose() * a - Matrix4::identity()).amax() < 1e-12);
            // free: no fixed vector unless identity
            if (a - Matrix4::identity()).amax() > 1e-9 {
                assert!((a - Matrix4::identity()).determinant().abs() > 1e-9, "{}", spec.label());
            }
            for b in els {
                let ab = a * b;
                assert!(els.iter().any(|c| (c - ab).amax() < 1e-9));
            }
        }
    }
    assert!(matches!(make_group(&GroupSpec::PlaneRotation { n: 3 }), Err(orbiglue::GeomError::NotFree { .. })));
}

#[test]
fn bianchi_examples() {
    assert!(r2_metric().bianchi().sub(&r_dr().scale(2.0)).is_zero(1e-12));
    assert!(r2_dr2().bianchi().sub(&r_dr().scale(-4.0)).is_zero(1e-12));
    assert!(r4_sum_alpha_sq().bianchi().sub(&r_dr().scale(6.0)).is_zero(1e-12));
}

#[test]
fn exceptional_values_are_stable_in_k_max() {
    for k in 3..=8 {
        let rep = exceptional_values_vector(&z2(), (0.0, 2.0), k).unwrap();
        assert_eq!(rep.gammas(), vec![1], "k_max = {k}");
        assert_eq!(rep.values[0].multiplicity, 16);
    }
}

#[test]
fn gauge_filter_kills_decaying_harmonics() {
    let g = z2();
    let f = Sym2Filters { traceless: true, divergence_free: true };
    for d in [-2, -3] {
        assert_eq!(harmonic_sym2_dimensions(&g, d, f).unwrap(), 0);
    }
    // ten constant symmetric tensors, nine of them traceless
    assert_eq!(harmonic_sym2_dimensions(&g, 0, Sym2Filters::default()).unwrap(), 10);
    assert_eq!(harmonic_sym2_dimensions(&g, 0, Sym2Filters { traceless: true, ..Default::default() }).unwrap(), 9);
}

#[test]
fn space_form_jets_satisfy_the_linearized_equation() {
    for k in [-1.0, 0.5, 1.0, 2.0] {
        assert!(space_form_jet(k).linearized_ricci_check() < 1e-12, "k = {k}");
    }
}

#[test]
fn harmonics_are_laplace_eigenfunctions() {
    let g = make_group(&GroupSpec::CyclicSu2 { n: 3 }).unwrap();
    let pts = sample_points(12, 5);
    for k in 0..=6 {
        for p in invariant_harmonic_basis(&g, k).unwrap().iter() {
            for x in &pts {
                let lap = sphere_laplacian_fd(p, x, 1e-4);
                let want = -((k * (k + 2)) as f64) * p.eval(x);
                assert!((lap - want).abs() < 1e-4 * (1.0 + want.abs()), "k = {k}: {lap} vs {want}");
            }
        }
    }
}

#[test]
fn invariant_basis_dimensions() {
    // Z2 = {1, -1}: odd degrees vanish, even degrees have (k+1)^2 functions
    let g = z2();
    for k in 0..=8 {
        let want = if k % 2 == 0 { (k + 1) * (k + 1) } else { 0 };
        assert_eq!(invariant_harmonic_basis(&g, k).unwrap().len(), want);
    }
    let t = make_group(&GroupSpec::Trivial).unwrap();
    assert_eq!(invariant_harmonic_basis(&t, 3).unwrap().len(), 16);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bianchi_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let f = r2_metric().scale(a).add(&r2_dr2().scale(b));
        let want = r2_metric().bianchi().scale(a).add(&r2_dr2().bianchi().scale(b));
        prop_assert!(f.bianchi().sub(&want).is_zero(1e-12));
    }

    #[test]
    fn decompose_then_reconstruct(c in prop::array::uniform8(-1.0f64..1.0), radius in 0.3f64..3.0) {
        let g = z2();
        let cache = HarmonicCache::new();
        let bases = component_bases(&g, TensorKind::Scalar, 4, &cache).unwrap();
        // random invariant data of degree at most four
        let f = move |x: &[f64; 4]| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            let u = x.map(|v| v / r2.sqrt());
            vec![c[0] + c[1] * u[0] * u[1] + c[2] * (u[2] * u[2] - u[3] * u[3]) + c[3] * u[0] * u[3]
                + c[4] * u[0].powi(4) + c[5] * u[1] * u[2].powi(3) + c[6] * u[0] * u[1] * u[2] * u[3] + c[7] * u[3] * u[3]]
        };
        let m = decompose(&f, TensorKind::Scalar, radius, &g, 4, &cache).unwrap();
        for x in sample_points(20, 9) {
            let y = x.map(|v| v * radius);
            prop_assert!((reconstruct(&m, &bases, &y)[0] - f(&y)[0]).abs() < 1e-10);
        }
    }

    #[test]
    fn annulus_extension_obeys_maximum_principle(seed in 0u64..1000) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let eps = rng.gen_range(0.1..0.4);
        let cache = HarmonicCache::new();
        let cfg = AnnulusConfig { k_max: 4, ..Default::default() };
        // a scalar-valued multiple of a fixed matrix, so each entry is a scalar harmonic problem
        let shape = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 0.0, 0.0, 0.0));
        let inner = move |x: &[f64; 4]| {
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let u = x.map(|v| v / r);
            shape * (a[0] + a[1] * u[0] * u[1] + a[2] * (u[0] * u[0] - u[2] * u[2]))
        };
        let outer = move |x: &[f64; 4]| {
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let u = x.map(|v| v / r);
            shape * (a[3] + a[4] * u[1] * u[3] + a[5] * (u[1] * u[1] - u[3] * u[3]))
        };
        let p = AnnulusProblem::from_fields(eps, &z2(), &inner, &outer, &cfg, &cache).unwrap();
        let sol = dirichlet_extend(&p, &cache).unwrap();
        let pts = sample_points(400, seed);
        let bound = pts.iter().flat_map(|x| {
            [inner(&x.map(|v| v * eps))[(0, 0)].abs(), outer(&x.map(|v| v / eps))[(0, 0)].abs()]
        }).fold(0.0, f64::max);
        for (i, x) in pts.iter().enumerate().take(100) {
            let r = eps * (1.0 / (eps * eps)).powf(i as f64 / 99.0);
            let v = sol.eval(&x.map(|c| c * r))[(0, 0)];
            prop_assert!(v.abs() <= bound * (1.0 + 1e-9), "{v} > {bound}");
        }
    }

    #[test]
    fn invariant_fields_are_invariant(seed in 0u64..1000) {
        let g = make_group(&GroupSpec::BinaryDihedral { n: 2 }).unwrap();
        let cache = HarmonicCache::new();
        let basis = cache.get(&g, 4).unwrap();
        let x = sample_points(1, seed)[0];
        for p in basis.iter() {
            for e in g.elements() {
                prop_assert!((p.eval(&apply(e, &x)) - p.eval(&x)).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn annulus_matches_finite_difference_oracle() {
    let cache = HarmonicCache::new();
    let cfg = AnnulusConfig { k_max: 4, ..Default::default() };
    let f = |x: &[f64; 4]| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let mut m = Matrix4::identity() * (0.2 + x[0] * x[1] / r2);
        m[(0, 3)] = x[2] * x[2] / r2;
        m[(3, 0)] = m[(0, 3)];
        m
    };
    let p = AnnulusProblem::from_fields(0.25, &z2(), &f, &f, &cfg, &cache).unwrap();
    let sol = dirichlet_extend(&p, &cache).unwrap();
    assert!(sol.compare_with_fd(400) < 1e-3);
}

#[test]
fn decoupling_constants_do_not_grow() {
    let cache = HarmonicCache::new();
    let cfg = AnnulusConfig { k_max: 4, ..Default::default() };
    let fam = vec![TestTensor {
        name: "log-plus-quadratic".into(),
        field: Box::new(|_eps: f64| {
            Box::new(|x: &[f64; 4]| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let mut m = Matrix4::identity() * (0.1 * r2.sqrt().ln());
                m[(0, 0)] += 0.05 * x[0] * x[0];
                m[(1, 2)] = 0.02 * x[1] * x[2] / r2;
                m[(2, 1)] = m[(1, 2)];
                m
            }) as Box<TensorFn>
        }),
    }];
    let out = verify_decoupling_estimates(&fam, &[0.2, 0.05], 0.5, &z2(), &cfg, 24, &cache).unwrap();
    assert!(out[1].ratio_h_star <= 3.0 * out[0].ratio_h_star.max(1e-12));
    if let (Some(a), Some(b)) = (out[0].ratio_remainder, out[1].ratio_remainder) {
        assert!(b <= 3.0 * a, "{a} {b}");
    }
}

#[test]
fn o4_basis_is_transverse_traceless() {
    o4_basis().verify(&z2(), &sample_points(40, 3), 1e-10).unwrap();
    for zeta in [[1.0, 0.0, 0.0], [0.3, -0.4, 1.2]] {
        let h = kronheimer_leading(&zeta).unwrap();
        assert!(h.trace().is_zero(1e-10) && h.divergence().is_zero(1e-10));
    }
    assert!(kronheimer_leading(&[1.0, 2.0]).is_err());
}

#[test]
fn eguchi_hanson_is_ricci_flat() {
    let m = eguchi_hanson_profile(1.0).unwrap();
    assert!(ricci_residual(&m, 1.0 + 1e-6, 100.0, 400) < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn eguchi_hanson_scales_covariantly(a in 0.2f64..5.0) {
        let d1 = scaling_deformation(&eguchi_hanson_profile(1.0).unwrap()).unwrap();
        let da = scaling_deformation(&eguchi_hanson_profile(a).unwrap()).unwrap();
        // b has the units of length^4
        prop_assert!((da.b - d1.b * a.powi(4)).abs() < 1e-6 * a.powi(4));
    }
}

#[test]
fn eguchi_hanson_radial_leading_term() {
    let d = scaling_deformation(&eguchi_hanson_profile(1.0).unwrap()).unwrap();
    assert!((d.leading_radial - 12.0 * d.b).abs() < 0.01 * (12.0 * d.b).abs(), "{} {}", d.leading_radial, d.b);
    assert!((d.b - d.b_volume).abs() < 1e-3 * d.b.abs());
}

#[test]
fn euler_characteristic_is_additive_under_gluing() {
    let s = RadialMetric::round_sphere(2);
    let eh = eguchi_hanson_profile(1.0).unwrap();
    let chi_s = gauss_bonnet_chi(&s).unwrap();
    let chi_eh = gauss_bonnet_chi(&eh).unwrap();
    let cfg = GluingConfig { ends: GluedEnds::Inner, ..Default::default() };
    let g = build_gluing(&s, &eh, 1e-3, &cfg).unwrap();
    let glued = curvature_invariants(&g.metric).unwrap();
    // the ALE integral already carries the -1/|Gamma| boundary term, so the integrals add
    assert!((glued.chi - (chi_s + chi_eh)).abs() < 1e-4, "{}", glued.chi);
    assert!((glued.tau.abs() - 1.0).abs() < 1e-4, "{}", glued.tau);
}
