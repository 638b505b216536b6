use std::collections::BTreeSet;
use std::time::Instant;

use toricurve_core::curve::{CurvePoint, ProjectiveLine, RationalFunction};
use toricurve_core::embed::{
    build_embedding_data, chart_map, chart_maps, check_theorem_conditions, ChartMap,
    ConditionWitness, EmbeddingData,
};
use toricurve_core::intersect::{find_ample, xi_vector, TDivisor, XiMethod};
use toricurve_core::rational::{int, rat, Rational};
use toricurve_core::verify::{
    certify, chart_immersive, chart_injective, charts_cover, gluing_consistent, pullback_check,
    recheck, sample_collisions, VerifyOptions, Witness,
};
use toricurve_core::{fixtures, Error, Fan};

fn ones() -> [Rational; 3] {
    [int(1), int(1), int(1)]
}

fn pipeline(fan: &Fan, seed: u64) -> EmbeddingData {
    let h = find_ample(fan).unwrap();
    let xi = xi_vector(fan, &h, XiMethod::Intersection, &ProjectiveLine).unwrap();
    build_embedding_data(fan, &h, &xi, seed, &ones()).unwrap()
}

fn chart_of(coords: [RationalFunction; 3], excluded: &[CurvePoint]) -> ChartMap {
    ChartMap {
        index: 0,
        cone: [0, 1, 2],
        duals: [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
        coords,
        excluded: excluded.iter().cloned().collect(),
    }
}

fn func(roots: &[(i64, i64)]) -> RationalFunction {
    RationalFunction::new(int(1), roots.iter().map(|&(a, e)| (int(a), e))).unwrap()
}

#[test]
fn presets_certify_over_several_seeds() {
    for name in Fan::PRESETS {
        let fan = Fan::preset(name).unwrap();
        for seed in 0..5 {
            let start = Instant::now();
            let data = pipeline(&fan, seed);
            assert!(check_theorem_conditions(&data).passed(), "{name} seed {seed}");
            let cert = certify(&data, &VerifyOptions::default()).unwrap();
            assert!(cert.embedding, "{name} seed {seed}: {}", cert.to_json());
            eprintln!("{name} seed {seed}: {:?}", start.elapsed());
        }
    }
}

#[test]
fn p1p1p1_with_anticanonical_xi() {
    let fan = Fan::preset("p1p1p1").unwrap();
    let h = TDivisor::anticanonical(6);
    let xi = xi_vector(&fan, &h, XiMethod::Intersection, &ProjectiveLine).unwrap();
    assert_eq!(xi.xi, vec![8; 6]);
    let start = Instant::now();
    let data = build_embedding_data(&fan, &h, &xi, 1, &ones()).unwrap();
    let cert = certify(&data, &VerifyOptions::default()).unwrap();
    eprintln!("p1p1p1 xi=8: {:?}", start.elapsed());
    assert!(cert.embedding);
}

#[test]
fn degree_cap_is_reported_with_chart() {
    let fan = Fan::preset("p1p1p1").unwrap();
    let h = TDivisor::anticanonical(6);
    let xi = xi_vector(&fan, &h, XiMethod::Intersection, &ProjectiveLine).unwrap();
    let data = build_embedding_data(&fan, &h, &xi, 1, &ones()).unwrap();
    let err = certify(&data, &VerifyOptions { degree_cap: 50 }).unwrap_err();
    assert!(matches!(err, Error::DegreeOverflow { degree: 98, cap: 50, .. }), "{err:?}");
}

#[test]
fn p3_linear_coordinates() {
    let fan = Fan::preset("p3").unwrap();
    for seed in 0..20 {
        let data = pipeline(&fan, seed);
        for chart in chart_maps(&data).unwrap() {
            for f in &chart.coords {
                assert_eq!(f.numerator().deg0(), 1);
                assert_eq!(f.denominator().deg0(), 1);
            }
            assert!(chart_injective(&chart, &VerifyOptions::default()).unwrap().pass);
            assert!(chart_immersive(&chart).pass);
        }
    }
}

#[test]
fn nodal_curve_has_rational_collision() {
    // t^2, t^3 - t, t^4 identify t = 1 and t = -1
    let ch = chart_of(
        [func(&[(0, 2)]), func(&[(0, 1), (1, 1), (-1, 1)]), func(&[(0, 4)])],
        &[CurvePoint::Infinity],
    );
    let v = chart_injective(&ch, &VerifyOptions::default()).unwrap();
    assert!(!v.pass);
    let w = &v.witnesses[0];
    assert!(recheck(&ch, w));
    match w {
        Witness::Collision { s, u } => {
            let pair: BTreeSet<_> = [s.clone(), u.clone()].into();
            let expected: BTreeSet<_> =
                [CurvePoint::Finite(int(1)), CurvePoint::Finite(int(-1))].into();
            assert_eq!(pair, expected);
        }
        other => panic!("{other:?}"),
    }
    assert!(chart_immersive(&ch).pass);
}

#[test]
fn plane_node_with_irrational_branches() {
    // (x, y, x^2) with x = t(t - 1), y = t(t - 2)(t + 3): the node of the
    // plane curve (x, y) sits over a conjugate pair of parameters
    let x = func(&[(0, 1), (1, 1)]);
    let y = func(&[(0, 1), (2, 1), (-3, 1)]);
    let ch = chart_of([x.clone(), y, x.pow(2)], &[CurvePoint::Infinity]);
    let v = chart_injective(&ch, &VerifyOptions::default()).unwrap();
    assert!(!v.pass);
    assert!(v.witnesses.iter().all(|w| recheck(&ch, w)));
    assert!(matches!(v.witnesses[0], Witness::AlgebraicCollision { .. }), "{:?}", v.witnesses);
}

#[test]
fn excluded_collisions_are_ignored() {
    // the only collision of the nodal curve is lost once t = -1 is removed
    let ch = chart_of(
        [func(&[(0, 2)]), func(&[(0, 1), (1, 1), (-1, 1)]), func(&[(0, 4)])],
        &[CurvePoint::Infinity, CurvePoint::Finite(int(-1))],
    );
    let v = chart_injective(&ch, &VerifyOptions::default()).unwrap();
    assert!(v.pass, "{:?}", v.witnesses);
}

fn symmetric_fixture(fan: &Fan, radii: &[i64]) -> EmbeddingData {
    fixtures::symmetric(fan, radii).unwrap()
}

#[test]
fn symmetric_fixture_fails_with_opposite_pair() {
    let fan = Fan::preset("p3").unwrap();
    let data = symmetric_fixture(&fan, &[3, 5, 7, 11]);
    assert!(check_theorem_conditions(&data).passed());
    let cert = certify(&data, &VerifyOptions::default()).unwrap();
    assert!(!cert.embedding);
    let charts = chart_maps(&data).unwrap();
    let mut found = false;
    for rec in &cert.charts {
        assert!(!rec.injective);
        for w in &rec.witnesses {
            assert!(recheck(&charts[rec.chart], w));
            if let Witness::Collision { s: CurvePoint::Finite(s), u: CurvePoint::Finite(u) } = w {
                found |= *s == -u.clone();
            }
        }
    }
    assert!(found, "{}", cert.to_json());
}

#[test]
fn doubled_point_fails_reducedness() {
    let (data, a) = fixtures::doubled_point().unwrap();
    let charts = chart_maps(&data).unwrap();
    let v = pullback_check(&data, &charts);
    assert!(!v.pass);
    for w in &v.witnesses {
        match w {
            Witness::Pullback { ray, point, divisor_multiplicity, zero_order, .. } => {
                assert_eq!(*ray, 0);
                assert_eq!(*point, a);
                assert_eq!((*divisor_multiplicity, *zero_order), (2, 2));
            }
            other => panic!("{other:?}"),
        }
    }
    assert!(!certify(&data, &VerifyOptions::default()).unwrap().embedding);
}

#[test]
fn smuggled_zero_breaks_both_checks() {
    let (data, z) = fixtures::smuggled_zero(4).unwrap();
    let report = check_theorem_conditions(&data);
    assert!(!report.principal_divisors);
    assert!(report.witnesses.contains(&ConditionWitness::DivisorMismatch {
        basis: 0,
        point: z.clone(),
        expected: 0,
        found: 1,
    }));
    let chart = chart_map(&data, 0).unwrap();
    let v = pullback_check(&data, std::slice::from_ref(&chart));
    assert_eq!(
        v.witnesses,
        vec![Witness::Pullback {
            chart: 0,
            ray: 0,
            point: z,
            divisor_multiplicity: 0,
            zero_order: 1,
        }]
    );
}

#[test]
fn shared_point_violates_disjointness() {
    let (data, shared) = fixtures::shared_point(2).unwrap();
    let report = check_theorem_conditions(&data);
    assert!(report.principal_divisors);
    assert!(!report.disjoint_collections);
    assert_eq!(
        report.witnesses,
        vec![ConditionWitness::SharedPoint { collection: vec![0, 1], point: shared }]
    );
}

#[test]
fn sampling_and_gluing_agree_with_certificates() {
    for name in Fan::PRESETS {
        let fan = Fan::preset(name).unwrap();
        let data = pipeline(&fan, 8);
        let charts = chart_maps(&data).unwrap();
        assert!(sample_collisions(&charts, 1000, 1).is_none());
        assert!(gluing_consistent(&data, &charts, 100, 2));
        let probe: Vec<CurvePoint> = data.divisors.iter().flat_map(|d| d.support().cloned()).collect();
        assert!(charts_cover(&charts, &probe));
        assert!(charts_cover(&charts, &[CurvePoint::Infinity]));
    }
}

#[test]
fn torus_does_not_change_verdicts() {
    let fan = Fan::preset("p3").unwrap();
    let h = find_ample(&fan).unwrap();
    let xi = xi_vector(&fan, &h, XiMethod::Intersection, &ProjectiveLine).unwrap();
    let base = build_embedding_data(&fan, &h, &xi, 3, &ones()).unwrap();
    let v0 = certify(&base, &VerifyOptions::default()).unwrap().verdicts();
    for t in [[2, 3, -1], [-5, 7, 11]] {
        let torus = t.map(int);
        let data = build_embedding_data(&fan, &h, &xi, 3, &torus).unwrap();
        assert_eq!(certify(&data, &VerifyOptions::default()).unwrap().verdicts(), v0);
    }
    // the non-general fixture keeps its failing verdicts too
    let sym = symmetric_fixture(&fan, &[3, 5, 7, 11]);
    let v1 = certify(&sym, &VerifyOptions::default()).unwrap().verdicts();
    let scaled = EmbeddingData::from_divisors(
        &fan,
        &sym.h,
        &sym.xi,
        sym.divisors.clone(),
        &[rat(1, 3), int(-2), int(5)],
        None,
    )
    .unwrap();
    assert_eq!(certify(&scaled, &VerifyOptions::default()).unwrap().verdicts(), v1);
}

#[test]
fn certificate_replay_is_byte_identical() {
    let fan = Fan::preset("bl-p3-point").unwrap();
    let a = certify(&pipeline(&fan, 12), &VerifyOptions::default()).unwrap().to_json();
    let b = certify(&pipeline(&fan, 12), &VerifyOptions::default()).unwrap().to_json();
    assert_eq!(a, b);
}
