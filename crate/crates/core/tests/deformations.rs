mod common;

use common::*;
use wact_core::classify::{survey, Classification, Quantity};
use wact_core::deform::{self, DeformError, DeformParams, Direction, PotentialField};
use wact_core::structure::Structure;
use wact_core::{classify, linalg, Chart, Flag, SamplePlan, ScalarExpr, Sequential, TensorField, Valence};

fn max_diff(a: &Structure, b: &Structure, plan: &SamplePlan) -> f64 {
    let mut worst = (a.nu() - b.nu()).abs();
    for i in 0..plan.count {
        let p = plan.point(a.chart(), i);
        for (x, y) in [
            (a.phi(), b.phi()),
            (a.q(), b.q()),
            (a.xi(), b.xi()),
            (a.eta(), b.eta()),
            (a.g(), b.g()),
        ] {
            let (x, y) = (x.evaluate(&p).unwrap(), y.evaluate(&p).unwrap());
            worst = worst.max(linalg::sup(&linalg::sub(x.data(), y.data())));
        }
    }
    worst
}

#[test]
fn identity_parameters_do_nothing() {
    let s = weak_l2();
    let id = DeformParams::new(1.0, 1.0).unwrap();
    assert!(id.is_identity());
    let t = deform::deform(&s, id, Direction::Forward, &plan(), TOL, &Sequential).unwrap();
    assert_eq!(max_diff(&s, &t, &plan()), 0.0);
}

#[test]
fn bad_parameters_are_rejected() {
    for (l, lp) in [(0.0, 1.0), (1.0, -2.0), (f64::NAN, 1.0), (f64::INFINITY, 1.0)] {
        assert!(matches!(
            DeformParams::new(l, lp),
            Err(DeformError::BadParameters { .. })
        ));
    }
}

#[test]
fn deformed_sasakian_is_weak_sasakian_with_scalar_q() {
    let s = weak_l2();
    assert!((s.nu() - 2.0).abs() <= 1e-15);
    let plan = plan();
    for i in 0..10 {
        let f = s.frame(&plan.point(s.chart(), i)).unwrap();
        let want = linalg::scaled(&linalg::identity(3), 2.0);
        assert!(linalg::sup(&linalg::sub(f.q_matrix(), &want)) <= 1e-14);
    }
    assert!(classify(&s, &plan, TOL, &Sequential).unwrap().holds(Flag::WeakSasakian));
}

#[test]
fn extraction_recovers_the_classical_structure() {
    let e = deform::extract_sasakian(&weak_l2(), &plan(), TOL, &Sequential).unwrap();
    assert!(max_diff(&e, &sasakian(1), &plan()) <= 1e-8);
    let c = classify(&e, &plan(), TOL, &Sequential).unwrap();
    assert!(c.holds(Flag::Normal) && c.holds(Flag::WeakContactMetric));
    assert!((c.lambda - 1.0).abs() <= 1e-12);
}

#[test]
fn extraction_leaves_classical_structures_alone() {
    let s = sasakian(2);
    let e = deform::extract_sasakian(&s, &plan(), TOL, &Sequential).unwrap();
    assert_eq!(max_diff(&s, &e, &plan()), 0.0);
}

#[test]
fn extraction_rejects_non_sasakian_structures() {
    for (s, want) in [
        (product(2.0, 4.0), "weak_contact_metric"),
        (mismatch(), "weak_contact_metric"),
        (variable_lambda(), "normal"),
    ] {
        match deform::extract_sasakian(&s, &plan(), TOL, &Sequential) {
            Err(DeformError::NotWeakSasakian { condition, residual }) => {
                assert_eq!(condition, want);
                assert!(residual > TOL);
            }
            other => panic!("{other:?}"),
        }
    }
}

#[test]
fn product_has_the_expected_q() {
    let s = product(2.0, 4.0);
    assert_eq!(s.chart().coords().last().unwrap(), "t");
    let plan = plan();
    for i in 0..plan.count {
        let f = s.frame(&plan.point(s.chart(), i)).unwrap();
        let want = linalg::scaled(&linalg::identity(3), 4.0);
        assert!(linalg::sup(&linalg::sub(f.q_matrix(), &want)) <= 1e-14);
    }
    let v = survey(&s, &plan, TOL, &Sequential).unwrap();
    for q in [Quantity::DEta, Quantity::DPhi, Quantity::NablaPhi, Quantity::NablaXiXi] {
        assert!(v.get(q) <= 1e-8, "{}", q.name());
    }
    for q in [Quantity::N5, Quantity::Nijenhuis] {
        assert!(v.get(q) <= 1e-7, "{}", q.name());
    }
    let c = Classification::from_survey(&v, TOL);
    assert!(c.holds(Flag::PhiParallel) && c.holds(Flag::WeakCosymplectic));
}

#[test]
fn unit_rotation_gives_classical_cosymplectic() {
    let s = product(1.0, 1.0);
    let f = s.frame(&[0.1, 0.2, 0.3]).unwrap();
    assert!(linalg::sup(&linalg::sub(f.q_matrix(), &linalg::identity(3))) <= 1e-15);
}

fn base() -> Chart {
    Chart::base(vec!["u".into(), "v".into()], vec![(-1.0, 1.0); 2]).unwrap()
}

fn euclid() -> TensorField {
    TensorField::constant(&base(), Valence::BILINEAR, &[1.0, 0.0, 0.0, 1.0]).unwrap()
}

fn try_product(src: &[&str]) -> Result<Structure, DeformError> {
    let ph = TensorField::parse(&base(), Valence::ENDOMORPHISM, src).unwrap();
    deform::product_construction(&ph, &euclid(), 1.0, &plan(), TOL, &Sequential)
}

#[test]
fn product_rejects_bad_input() {
    assert!(matches!(
        try_product(&["0", "0", "1", "0"]),
        Err(DeformError::RankDeficient {
            rank: 1,
            expected: 2,
            ..
        })
    ));
    assert!(matches!(
        try_product(&["0", "-exp(u)", "exp(-u)", "0"]),
        Err(DeformError::NotParallel { .. })
    ));
    assert!(matches!(
        try_product(&["1", "0", "0", "1"]),
        Err(DeformError::NotCompatible { .. })
    ));
}

#[test]
fn xi_is_a_strict_contact_field() {
    let s = sasakian(1);
    let r = deform::contact_vector_field(&s, s.xi(), &plan(), TOL, &Sequential).unwrap();
    assert!(r.is_weak_contact && r.strict);
    assert!(r.residual <= 1e-12 && r.sigma_sup <= 1e-12);
    assert!(r.samples.iter().all(|x| (x.f - 1.0).abs() <= 1e-14));
}

#[test]
fn perturbed_field_fails() {
    let s = sasakian(1);
    let x = TensorField::parse(s.chart(), Valence::VECTOR, &["1", "0", "2+y1"]).unwrap();
    let r = deform::contact_vector_field(&s, &x, &plan(), TOL, &Sequential).unwrap();
    assert!(!r.is_weak_contact);
    assert!(r.residual > 0.1);
    assert_eq!(r.worst_point.len(), 3);
}

fn potential(s: &Structure, src: &str) -> ScalarExpr {
    ScalarExpr::parse(src, s.chart().coords()).unwrap()
}

#[test]
fn potential_fields_are_contact() {
    for s in [sasakian(1), weak_l2()] {
        let x = PotentialField {
            structure: &s,
            potential: potential(&s, "x1"),
        };
        let r = deform::contact_vector_field(&s, &x, &plan(), TOL, &Sequential).unwrap();
        assert!(r.is_weak_contact && r.lie_consistent, "{}", r.residual);
        assert!(r.lie_residual <= 1e-5);
        // xi = 2 d/dz, so xi(x1) = 0
        assert!(r.strict && r.sigma_sup <= 1e-12);
        for smp in &r.samples {
            assert!((smp.f - smp.point[0]).abs() <= 1e-12);
        }
        let z = PotentialField {
            structure: &s,
            potential: potential(&s, "z"),
        };
        let r = deform::contact_vector_field(&s, &z, &plan(), TOL, &Sequential).unwrap();
        assert!(r.is_weak_contact && !r.strict);
        assert!(r.samples.iter().all(|smp| (smp.sigma - 2.0).abs() <= 1e-12));
    }
}

#[test]
fn contact_verdict_ignores_the_seed() {
    let s = weak_l2();
    let fields = [
        TensorField::parse(s.chart(), Valence::VECTOR, &["1", "0", "2+y1"]).unwrap(),
        s.xi().clone(),
    ];
    let other = SamplePlan::new(100, 43, 0.05).unwrap();
    for x in &fields {
        let a = deform::contact_vector_field(&s, x, &plan(), TOL, &Sequential).unwrap();
        let b = deform::contact_vector_field(&s, x, &other, TOL, &Sequential).unwrap();
        assert_eq!((a.is_weak_contact, a.strict), (b.is_weak_contact, b.strict));
    }
}

#[test]
fn contact_field_needs_a_contact_metric_structure() {
    let s = product(2.0, 4.0);
    assert!(matches!(
        deform::contact_vector_field(&s, s.xi(), &plan(), TOL, &Sequential),
        Err(DeformError::NotContactMetric { .. })
    ));
}
