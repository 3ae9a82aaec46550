use legendre_core::legendre::{cm_i, scalar_mul, AffinePoint, Multiplier};
use legendre_core::mp::{Complex, Float};
use legendre_core::periods::{exp_map, period_basis};
use legendre_core::relations::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PREC: u32 = 128;

fn q(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

fn mul(k: i64, p: &AffinePoint, l: &Complex) -> AffinePoint {
    scalar_mul(Multiplier::Int(k), p, l, 2 * PREC + 32).unwrap()
}

fn random_lambda(rng: &mut ChaCha8Rng) -> Complex {
    loop {
        let r = q(rng.gen_range(2..40), rng.gen_range(1..7));
        if r != q(1, 1) {
            return Complex::from_rational(&r, 2 * PREC + 32);
        }
    }
}

fn random_point(rng: &mut ChaCha8Rng, lambda0: &Complex) -> AffinePoint {
    let basis = period_basis(lambda0, 2 * PREC + 32).unwrap();
    let (a, b): (f64, f64) = (rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95));
    let z = basis.combine(&Float::from_f64(a, 2 * PREC + 32), &Float::from_f64(b, 2 * PREC + 32));
    exp_map(&z, &basis, 2 * PREC + 32)
}

#[test]
fn multiples_give_the_expected_lattice() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..50 {
        let l = random_lambda(&mut rng);
        let p = random_point(&mut rng, &l);
        let pts = vec![p.clone(), mul(2, &p, &l), mul(3, &p, &l)];
        let basis = period_basis(&l, 2 * PREC + 32).unwrap();
        let lat = detect_elliptic_lattice(&pts, &basis, PREC, 20).unwrap();
        assert_eq!(lat.rank, 2, "trial {trial}");
        assert!(lat.equals(&[vec![-2, 1, 0], vec![-3, 0, 1]]), "trial {trial}: {:?}", lat.basis);
        assert!(lat.residuals.iter().all(|r| r.log < 1e-15));
    }
}

#[test]
fn combinations_of_independent_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..10 {
        let l = random_lambda(&mut rng);
        let (p1, p2) = (random_point(&mut rng, &l), random_point(&mut rng, &l));
        let (c1, c2): (i64, i64) = (rng.gen_range(-10..=10), rng.gen_range(1..=10));
        let sum = legendre_core::legendre::group_add(&mul(c1, &p1, &l), &mul(c2, &p2, &l), &l, 2 * PREC + 32).unwrap();
        let basis = period_basis(&l, 2 * PREC + 32).unwrap();
        let lat = detect_elliptic_lattice(&[p1, p2, sum], &basis, PREC, 20).unwrap_or_else(|e| panic!("{e:?} {l:?} {c1} {c2}"));
        assert!(lat.equals(&[vec![c1, c2, -1]]), "trial {trial}: {:?} vs ({c1},{c2},-1)", lat.basis);
    }
}

#[test]
fn single_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let l = Complex::from_rational(&q(5, 1), 2 * PREC + 32);
    let basis = period_basis(&l, 2 * PREC + 32).unwrap();
    let p = random_point(&mut rng, &l);
    assert_eq!(detect_elliptic_lattice(&[p.clone()], &basis, PREC, 50).unwrap().rank, 0);
    let two_torsion = AffinePoint::new(Complex::zero(2 * PREC + 32), Complex::zero(2 * PREC + 32));
    let lat = detect_elliptic_lattice(&[two_torsion], &basis, PREC, 50).unwrap();
    assert_eq!(lat.basis, vec![vec![2]]);
    // Saturation: 2·(P, 2P, 4P) relations plus a point of order 2.
    let pts = vec![p.clone(), mul(4, &p, &l), AffinePoint::new(Complex::from_i64(1, 2 * PREC + 32), Complex::zero(2 * PREC + 32))];
    let lat = detect_elliptic_lattice(&pts, &basis, PREC, 50).unwrap();
    assert!(lat.equals(&[vec![-4, 1, 0], vec![0, 0, 2]]), "{:?}", lat.basis);
}

#[test]
fn low_precision_points_are_rejected() {
    let l = Complex::from_i64(5, PREC);
    let basis = period_basis(&l, PREC).unwrap();
    let p = AffinePoint::new(Complex::zero(PREC), Complex::zero(PREC));
    assert!(detect_elliptic_lattice(&[p], &basis, PREC, 5).is_err());
}

#[test]
fn gaussian_relations() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let l = Complex::from_i64(-1, 2 * PREC + 32);
    let basis = period_basis(&l, 2 * PREC + 32).unwrap();
    let qp = random_point(&mut rng, &l);
    let r = scalar_mul(Multiplier::Gaussian(1, 2), &qp, &l, 2 * PREC + 32).unwrap();
    let lat = detect_cm_lattice(&[qp.clone(), r], &basis, PREC, 20).unwrap();
    assert!(lat.equals(&[vec![-1, 1, -2, 0], vec![2, 0, -1, 1]]), "{:?}", lat.basis);
    let rows = lat.cm_rows().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(lat.norms.iter().all(|&n| n <= 5));
    let _ = cm_i(&qp);
    let l5 = Complex::from_i64(5, 2 * PREC + 32);
    let b5 = period_basis(&l5, 2 * PREC + 32).unwrap();
    assert!(detect_cm_lattice(&[random_point(&mut rng, &l5)], &b5, PREC, 5).is_err());
}

#[test]
fn multiplicative_lattices() {
    let ex = |v: &[(i64, i64)]| v.iter().map(|&(a, b)| MultInput::Exact(q(a, b))).collect::<Vec<_>>();
    let lat = detect_mult_lattice(&ex(&[(2, 1), (4, 1), (8, 1)]), PREC, 20).unwrap();
    assert_eq!(lat.rank, 2);
    assert!(lat.equals(&[vec![-2, 1, 0], vec![-3, 0, 1]]));
    assert_eq!(detect_mult_lattice(&ex(&[(2, 1), (3, 1)]), PREC, 50).unwrap().rank, 0);
    let phi = (Complex::one(2 * PREC) + Complex::from_i64(5, 2 * PREC).sqrt()).mul_2k(-1);
    let psi = &phi - Complex::one(2 * PREC);
    let lat = detect_mult_lattice(&[MultInput::Numeric(phi), MultInput::Numeric(psi)], PREC, 20).unwrap();
    assert!(lat.equals(&[vec![1, 1]]), "{:?}", lat.basis);
    let zeta = Complex::new(Float::zero(2 * PREC), Float::one(2 * PREC));
    let lat = detect_mult_lattice(&[MultInput::Numeric(zeta), MultInput::Exact(q(-1, 1))], PREC, 20).unwrap();
    assert!(lat.equals(&[vec![2, -1], vec![0, 2]]), "{:?}", lat.basis);
}

#[test]
fn exact_inputs_match_the_factorisation_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let small = [2i64, 3, 5, 6, 10, 12, 15, 18, 1, -1, -2, -6];
    for _ in 0..30 {
        let m = rng.gen_range(1..=4);
        let xs: Vec<BigRational> = (0..m)
            .map(|_| q(small[rng.gen_range(0..small.len())], small[rng.gen_range(0..8)].abs()))
            .collect();
        let inputs: Vec<MultInput> = xs.iter().cloned().map(MultInput::Exact).collect();
        let lat = detect_mult_lattice(&inputs, PREC, 30).unwrap();
        let oracle = mult_lattice_exact(&xs).unwrap();
        assert!(lat.equals(&oracle), "{xs:?}: {:?} vs {:?}", lat.basis, oracle);
    }
}

#[test]
fn bound_shapes() {
    let c = BoundConstants::default();
    assert_eq!(roots_of_unity_bound(1, &c).0, 2);
    assert_eq!(roots_of_unity_bound(2, &c).0, 6);
    for k in 1..=1000 {
        let (exact, quadratic) = roots_of_unity_bound(k, &c);
        assert!(exact as f64 <= quadratic, "kappa {k}");
    }
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    assert!(dobrowolski_eta(2) <= golden.ln() / 2.0);
    assert_eq!(dobrowolski_eta(1), std::f64::consts::LN_2);
    for k in 2..200 {
        assert!(dobrowolski_eta(k + 1) < dobrowolski_eta(k));
    }
    let g = GeneratorBoundInputs::new(3, 2.0, 1.0, 1).unwrap();
    let e = generator_bound_elliptic(&g);
    assert!((e - 9.0 * 9.0).abs() < 1e-9);
    let g3 = GeneratorBoundInputs::new(3, 2.0, 1.0, 3).unwrap();
    let doubled = GeneratorBoundInputs { q: 2.0, ..g3 };
    let ratio = generator_bound_elliptic(&doubled) / generator_bound_elliptic(&g3);
    assert!((ratio - 2.0).abs() < 1e-12);
    assert!(GeneratorBoundInputs::new(0, 2.0, 1.0, 1).is_err());
    assert!(GeneratorBoundInputs::new(1, 2.0, 0.5, 1).is_err());
    assert_eq!(generator_bound_mult(2, 1.0, 1, true, &c).unwrap(), 6.0);
    assert_eq!(generator_bound_mult(2, 5.0, 1, false, &c).unwrap(), 4.0f64.min(6.0));
    let big = BoundConstants { gamma3: 1e12, ..c };
    let b1 = generator_bound_mult(2, 3.0, 3, false, &big).unwrap();
    let b2 = generator_bound_mult(2, 6.0, 3, false, &big).unwrap();
    assert!((b2 / b1 - 4.0).abs() < 1e-9);
    let eta = dobrowolski_eta(2);
    assert!((b1 - 9.0 * 6.0 * (3.0 / eta).powi(2)).abs() < 1e-6 * b1);
}
