use legendre_core::betti::{CmInt, RelationVector};
use legendre_core::exec::Sequential;
use legendre_core::family::{FamilySpec, SecondFactor};
use legendre_core::legendre::{division_poly_torsion_params, PointExpr, RationalFunction};
use legendre_core::locus::*;
use legendre_core::mp::Complex;
use num_complex::Complex64;

const P: u32 = 192;

fn c(a: f64, b: f64) -> Complex64 {
    Complex64::new(a, b)
}

fn p1() -> PointExpr {
    PointExpr::new(RationalFunction::from_ints(&[2], &[1]), c(0.0, 0.0), c(2.0, 0.0)).unwrap()
}

fn p2() -> PointExpr {
    PointExpr::new(RationalFunction::from_ints(&[3], &[1]), c(0.0, 0.0), c(18f64.sqrt(), 0.0)).unwrap()
}

fn units_family() -> FamilySpec {
    FamilySpec::new(vec![p1()], SecondFactor::Units(vec![RationalFunction::lambda(), RationalFunction::from_ints(&[-1, 1], &[1])])).unwrap()
}

fn example1() -> FamilySpec {
    let mu = RationalFunction::from_ints(&[0, -1], &[1]);
    let q1 = PointExpr::on_curve(RationalFunction::from_ints(&[2], &[1]), mu.clone(), c(0.0, 0.0), c(2.0, 0.0)).unwrap();
    let q2 = PointExpr::on_curve(RationalFunction::from_ints(&[3], &[1]), mu.clone(), c(0.0, 0.0), c(18f64.sqrt(), 0.0)).unwrap();
    FamilySpec::new(vec![p1(), p2()], SecondFactor::Elliptic { mu, points: vec![q1, q2] }).unwrap()
}

fn disc(cx: f64, r: f64) -> SearchDisc {
    SearchDisc::new(c(cx, 0.0), r, 0.01, 32).unwrap()
}

fn near(z: &Complex, re: f64, im: f64) -> bool {
    (z.to_f64().0 - re).abs() < 1e-12 && (z.to_f64().1 - im).abs() < 1e-12
}

#[test]
fn two_torsion_of_p1_is_at_two() {
    let fam = units_family();
    let s = find_single_locus(&fam, &Side::First(vec![2]), &disc(2.0, 0.5), P, &Sequential).unwrap();
    assert_eq!(s.points.len(), 1);
    assert!(near(&s.points[0].t0, 2.0, 0.0));
    assert_eq!(s.points[0].level, Level::Certified);
    let s = find_single_locus(&fam, &Side::First(vec![2]), &disc(10.0, 1.0), P, &Sequential).unwrap();
    assert!(s.points.is_empty());
}

#[test]
fn four_torsion_matches_division_polynomials() {
    let fam = units_family();
    let d = disc(0.0, 8.0);
    let s = find_single_locus(&fam, &Side::First(vec![4]), &d, P, &Sequential).unwrap();
    let mut oracle = division_poly_torsion_params(&fam.points[0], 2, &d.region(), P).unwrap();
    oracle.extend(division_poly_torsion_params(&fam.points[0], 4, &d.region(), P).unwrap());
    assert_eq!(s.points.len(), oracle.len());
    for o in &oracle {
        assert!(s.points.iter().any(|p| (&p.t0 - &o.with_prec(p.t0.prec())).max_abs().le_pow2(-48)));
    }
    for p in &s.points {
        let w = p.first_witness.unwrap();
        assert!(w[0].abs() <= s.witness_bound && w[1].abs() <= s.witness_bound);
    }
}

#[test]
fn torsion_parameters_agree_with_oracle() {
    let fam = units_family();
    for n in [2, 3] {
        let r = torsion_parameters(&fam, 0, n, &disc(0.0, 6.0), P, &Sequential).unwrap();
        assert!(r.is_ok(), "order {n}: {:?}", r.err());
    }
    let r = torsion_parameters(&fam, 0, 2, &disc(10.0, 1.0), P, &Sequential).unwrap().unwrap();
    assert!(r.is_empty());
    assert!(torsion_parameters(&fam, 0, 65, &disc(0.0, 6.0), P, &Sequential).is_err());
}

#[test]
fn separated_conditions_give_no_double_point() {
    // a = (2, 0) forces λ = 2 while b = (2, 0) forces λ = −2.
    let fam = example1();
    let r = find_double_locus(&fam, &RelationVector::integral(&[2, 0], &[2, 0]), &disc(2.0, 0.5), P, &Sequential).unwrap();
    assert!(r.certified.is_empty());
}

#[test]
fn units_double_point_at_two() {
    let fam = units_family();
    let r = find_double_locus(&fam, &RelationVector::integral(&[2], &[0, 1]), &disc(2.0, 0.5), P, &Sequential).unwrap();
    assert_eq!(r.certified.len(), 1);
    assert!(near(&r.certified[0].t0, 2.0, 0.0));
}

#[test]
fn golden_ratio_from_second_factor_alone() {
    let fam = units_family();
    let r = find_double_locus(&fam, &RelationVector::integral(&[0], &[1, 1]), &disc(1.6, 0.2), P, &Sequential).unwrap();
    assert_eq!(r.certified.len(), 1);
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    assert!(near(&r.certified[0].t0, phi, 0.0));
    assert_eq!(r.certified[0].second_witness, Some([0, 0]));
}

#[test]
fn dimension_and_zero_checks() {
    let fam = example1();
    let d = disc(4.0, 1.0);
    assert!(find_single_locus(&fam, &Side::First(vec![1]), &d, P, &Sequential).is_err());
    assert!(find_single_locus(&fam, &Side::First(vec![0, 0]), &d, P, &Sequential).is_err());
    assert!(find_single_locus(&fam, &Side::Second(vec![CmInt { re: 1, im: 1 }, CmInt::int(0)]), &d, P, &Sequential).is_err());
}

#[test]
fn counts_are_monotone_in_t() {
    let fam = units_family();
    let rel = RelationVector::integral(&[4], &[0, 1]);
    let d = disc(0.0, 8.0);
    let mut last = 0;
    for t in [1, 2, 3, 100] {
        let r = count_sets(&fam, &rel, t, &d, P, &Sequential).unwrap();
        assert!(r.single >= last);
        last = r.single;
    }
    assert_eq!(last, 3);
    assert!(count_sets(&fam, &rel, 0, &d, P, &Sequential).is_err());
}

#[test]
fn count_at_large_t_matches_double_locus() {
    let fam = units_family();
    let rel = RelationVector::integral(&[2], &[0, 1]);
    let d = disc(2.0, 0.5);
    let full = find_double_locus(&fam, &rel, &d, P, &Sequential).unwrap();
    let r = count_sets(&fam, &rel, 1000, &d, P, &Sequential).unwrap();
    assert_eq!(r.double, full.certified.len());
}

#[test]
fn no_torsion_at_small_roots_of_unity() {
    let x = RationalFunction::from_ints(&[2], &[1]);
    let r = stoll_scan(&x, 2, 64, P).unwrap();
    assert_eq!((r.entries.len(), r.detections), (1, 0));
    let r = stoll_scan(&x, 8, 64, P).unwrap();
    assert_eq!(r.detections, 0);
    assert!(r.min_distance > 2f64.powi(-48));
    let control = stoll_scan(&RationalFunction::from_ints(&[0], &[1]), 8, 64, P).unwrap();
    assert_eq!(control.detections, control.entries.len());
    assert!(control.entries.iter().all(|e| e.best_denominator == 2));
}

#[test]
fn relation_enumeration() {
    let v = relation_vectors(2, 1);
    assert_eq!(v.len(), 4);
    assert!(v.iter().all(|a| a.iter().find(|x| **x != 0).unwrap() > &0));
    assert_eq!(relation_vectors(2, 8).len(), (17 * 17 - 1) / 2);
    let g = cm_relation_vectors(1, 2);
    // Nonzero Gaussian integers of norm ≤ 2, up to sign: 1, i, 1±i.
    assert_eq!(g.len(), 4);
}

#[test]
fn constant_curve_witnesses() {
    let w = constant_witness(&[CmInt::int(2), CmInt::int(0)], [1, 3], None).unwrap();
    assert_eq!(w[0].0, num_rational::BigRational::new(1.into(), 2.into()));
    assert_eq!(w[0].1, num_rational::BigRational::new(3.into(), 2.into()));
    assert_eq!(affine_height_of(&w[0].1), 3.into());
}

fn example2() -> FamilySpec {
    let m1 = RationalFunction::from_ints(&[-1], &[1]);
    let q1 = PointExpr::on_curve(RationalFunction::from_ints(&[0, 1], &[1]), m1.clone(), c(2.0, 0.0), c(6f64.sqrt(), 0.0)).unwrap();
    let q2 = PointExpr::on_curve(RationalFunction::from_ints(&[0, 2], &[1]), m1, c(2.0, 0.0), c(60f64.sqrt(), 0.0)).unwrap();
    let mu0 = num_rational::BigRational::from_integer((-1).into());
    FamilySpec::new(vec![p1(), p2()], SecondFactor::Constant { mu0, points: vec![q1, q2], cm: true }).unwrap()
}

#[test]
fn gaussian_relations_on_the_constant_curve() {
    // 3-torsion of y² = x³ − x has x² = 1 + 2/√3.
    let fam = example2();
    let d = SearchDisc::new(c(1.5, 0.0), 0.3, 0.01, 32).unwrap();
    let x0 = (1.0 + 2.0 / 3f64.sqrt()).sqrt();
    for b in [CmInt::int(3), CmInt { re: 0, im: 3 }] {
        let s = find_single_locus(&fam, &Side::Second(vec![b, CmInt::int(0)]), &d, P, &Sequential).unwrap();
        let hits: Vec<_> = s.points.iter().filter(|p| p.level == Level::Certified).collect();
        assert_eq!(hits.len(), 1, "{:?}", b);
        assert!((hits[0].t0_f64() - c(x0, 0.0)).norm() < 1e-12);
    }
    // (1 + i) has norm 2: its kernel is the 2-torsion point x = 0, outside the disc.
    let s = find_single_locus(&fam, &Side::Second(vec![CmInt { re: 1, im: 1 }, CmInt::int(0)]), &d, P, &Sequential).unwrap();
    assert!(s.points.is_empty());
}

#[test]
fn gaussian_kernels_agree_with_the_group_law() {
    use legendre_core::legendre::{scalar_mul, AffinePoint, Multiplier};
    let fam = example2();
    let d = SearchDisc::new(c(0.0, 0.0), 2.5, 0.01, 48).unwrap();
    for (re, im) in [(1, 2), (1, -2)] {
        let s = find_single_locus(&fam, &Side::Second(vec![CmInt { re, im }, CmInt::int(0)]), &d, P, &Sequential).unwrap();
        let hits: Vec<_> = s.points.iter().filter(|p| p.level == Level::Certified).collect();
        assert!(!hits.is_empty());
        let m1 = Complex::from_i64(-1, P + 32);
        for p in hits {
            let x = p.t0.with_prec(P + 32);
            let r = &x * (&x - Complex::one(P + 32)) * (&x + Complex::one(P + 32));
            let q = AffinePoint::new(x, r.sqrt());
            let out = scalar_mul(Multiplier::Gaussian(re, im), &q, &m1, P + 32).unwrap();
            assert!(out.distance_to_infinity().le_pow2(-40), "{re}+{im}i at {:?}", p.t0_f64());
        }
    }
}
