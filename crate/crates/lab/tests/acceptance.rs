//! Acceptance criteria A1–A11, one line each. Run with `cargo test --test acceptance`.

use std::path::Path;
use std::time::{Duration, Instant};

use legendre_core::betti::{betti_coords, theta_sample, CmInt, Disc, RelationVector};
use legendre_core::exec::Sequential;
use legendre_core::family::FamilySpec;
use legendre_core::heights::{double_x, neron_tate, torsion_survey, weil_height, AlgebraicNumber};
use legendre_core::legendre::{j_invariant_exact, scalar_mul, AffinePoint, Multiplier, RationalFunction};
use legendre_core::locus::{find_double_locus, scan_double, stoll_scan, torsion_parameters, SearchDisc};
use legendre_core::mp::{Complex, Float};
use legendre_core::periods::{elliptic_log, exp_map, period_basis, tau_reduce, PeriodBasis};
use legendre_core::poly::ZPoly;
use legendre_core::relations::*;
use legendre_lab::exec::Rayon;
use legendre_lab::fixture::load_family;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn fixture(name: &str) -> FamilySpec {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    load_family(&p).unwrap_or_else(|e| panic!("{name}: {e}")).1
}

fn q(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

/// `floor(log2 |x|) + 1`, printable.
fn lg(x: &Float) -> String {
    match x.lead_exp() {
        i64::MIN => "-inf".into(),
        e => e.to_string(),
    }
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_lambda(rng: &mut ChaCha8Rng, prec: u32) -> Complex {
    loop {
        let re = q(rng.gen_range(-60..60), rng.gen_range(1..9));
        let im = q(rng.gen_range(-30..30), rng.gen_range(1..9));
        let t = Complex64::new(libm_f(&re), libm_f(&im));
        if (t - 1.0).norm() > 0.05 && t.norm() > 0.05 {
            return Complex::new(Float::from_rational(&re, prec), Float::from_rational(&im, prec));
        }
    }
}

fn libm_f(r: &BigRational) -> f64 {
    Float::from_rational(r, 64).to_f64()
}

fn random_z(rng: &mut ChaCha8Rng, basis: &PeriodBasis, prec: u32) -> Complex {
    let (a, b): (f64, f64) = (rng.gen_range(0.02..0.98), rng.gen_range(0.02..0.98));
    basis.combine(&Float::from_f64(a, prec), &Float::from_f64(b, prec))
}

fn a1() -> Outcome {
    let prec = 192;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = Float::zero(prec);
    for _ in 0..10 {
        let l = random_lambda(&mut rng, prec);
        let basis = period_basis(&l, prec).map_err(|e| e.to_string())?;
        for _ in 0..10 {
            let p = exp_map(&random_z(&mut rng, &basis, prec), &basis, prec);
            let rec = elliptic_log(&p, &basis, prec).map_err(|e| e.to_string())?;
            let back = exp_map(&rec.z, &basis, prec);
            let d = back.distance(&p).ok_or("point at infinity")?;
            let scale = Float::one(prec).max(p.x.abs()).max(p.y.abs());
            worst = worst.max(d / scale);
        }
    }
    let t = start.elapsed();
    check(worst.le_pow2(-96) && t < Duration::from_secs(60), format!("max residual 2^{} over 100 points, {:.1?}", lg(&worst), t))
}

fn a2() -> Outcome {
    let prec = 192;
    let fam = fixture("example1.json");
    let disc = Disc::new(Complex64::new(4.5, 0.0), 1.0, 0.01, 64, 16).map_err(|e| e.to_string())?;
    let grid = theta_sample(&fam, &disc, prec, &Rayon::new(4).unwrap()).map_err(|e| e.to_string())?;
    let (mut imag, mut rec) = (Float::zero(prec), Float::zero(prec));
    let mut bad = 0;
    for n in &grid.nodes {
        match &n.value {
            Ok(v) => {
                imag = imag.max(v.imag.clone());
                rec = rec.max(v.reconstruction.clone());
            }
            Err(_) => bad += 1,
        }
    }
    let ok = bad == 0 && imag.le_pow2(-96) && rec.le_pow2(-96);
    check(ok, format!("example1, 64x16 grid around 4.5 radius 1: {} nodes, {bad} failed, max |Im| 2^{}, max relative reconstruction 2^{}", grid.nodes.len(), lg(&imag), lg(&rec)))
}

fn a3() -> Outcome {
    let prec = 192;
    let m1 = Complex::from_i64(-1, prec);
    let basis = period_basis(&m1, prec).map_err(|e| e.to_string())?;
    let (tau, _) = tau_reduce(&basis);
    let dist = (&tau - &Complex::i(prec)).abs();
    let j = j_invariant_exact(&q(-1, 1)).map_err(|e| e.to_string())?;
    check(dist.le_pow2(-64) && j == q(1728, 1), format!("|tau - i| 2^{}, j(-1) = {j}", lg(&dist)))
}

fn a4() -> Outcome {
    let prec = 192;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = Float::zero(prec);
    for _ in 0..10 {
        let l = random_lambda(&mut rng, prec);
        let basis = period_basis(&l, prec).map_err(|e| e.to_string())?;
        for x in [Complex::zero(prec), Complex::one(prec), l.clone()] {
            let rec = elliptic_log(&AffinePoint::new(x, Complex::zero(prec)), &basis, prec).map_err(|e| e.to_string())?;
            let (p, qq) = betti_coords(&rec.z, &basis).map_err(|e| e.to_string())?;
            for c in [p, qq] {
                worst = worst.max(c.mul_2k(1).dist_to_int().mul_2k(-1));
            }
        }
    }
    check(worst.le_pow2(-96), format!("30 two-torsion points, max distance to (1/2)Z 2^{}", lg(&worst)))
}

fn a5() -> Outcome {
    let start = Instant::now();
    let fam = fixture("golden.json");
    let disc = SearchDisc::new(Complex64::new(0.0, 0.0), 6.0, 0.01, 64).map_err(|e| e.to_string())?;
    let mut counts = Vec::new();
    for n in 2..=4 {
        match torsion_parameters(&fam, 0, n, &disc, 192, &Rayon::new(4).unwrap()).map_err(|e| e.to_string())? {
            Ok(pts) => counts.push(format!("N={n}: {}", pts.len())),
            Err(m) => return Err(format!("N={n}: Betti {} vs oracle {} parameters", m.betti.len(), m.oracle.len())),
        }
    }
    let t = start.elapsed();
    check(t < Duration::from_secs(300), format!("P1 on disc(0,6), sets agree at 2^-48: {}; {:.1?}", counts.join(", "), t))
}

fn a6() -> Outcome {
    let prec = 192;
    let p = stoll_scan(&RationalFunction::from_ints(&[2], &[1]), 16, 64, prec).map_err(|e| e.to_string())?;
    let c = stoll_scan(&RationalFunction::from_ints(&[0], &[1]), 16, 64, prec).map_err(|e| e.to_string())?;
    let ok = p.detections == 0 && c.detections == c.entries.len() && !c.entries.is_empty();
    check(ok, format!("P1: {} detections over {} roots of unity (min distance {:.3e}); control (0,0): {}/{}", p.detections, p.entries.len(), p.min_distance, c.detections, c.entries.len()))
}

fn a7() -> Outcome {
    let fam = fixture("example1.json");
    let exec = Rayon::new(8).unwrap();
    let mut runs = Vec::new();
    for (grid, prec) in [(64, 192), (128, 192), (64, 384)] {
        let disc = SearchDisc::new(Complex64::new(4.0, 0.0), 1.5, 0.01, grid).map_err(|e| e.to_string())?;
        let r = scan_double(&fam, 8, 8, &disc, prec, &exec).map_err(|e| e.to_string())?;
        runs.push((grid, prec, r));
    }
    let doubles: Vec<usize> = runs.iter().map(|r| r.2.distinct_double).collect();
    let singles: Vec<usize> = runs[0].2.single_counts.iter().filter(|(k, _)| *k >= 2).map(|(_, c)| *c).collect();
    let same_singles = runs.iter().all(|r| r.2.single_counts == runs[0].2.single_counts);
    let increasing = singles.len() == 7 && singles.windows(2).all(|w| w[0] < w[1]);
    let stable = doubles.iter().all(|&d| d == doubles[0]);
    let quarantine: Vec<usize> = runs.iter().map(|r| r.2.quarantine.len()).collect();
    check(
        stable && increasing,
        format!(
            "example1 disc(4,1.5), |a|,|b| <= 8: certified double locus {:?} at grid/prec 64/192, 128/192, 64/384 (quarantined {:?}); single counts |a| = 2..8: {:?}{}",
            doubles,
            quarantine,
            singles,
            if same_singles { "" } else { " (single counts differ between runs)" }
        ),
    )
}

fn a8() -> Outcome {
    let prec = 128;
    let hi = 2 * prec + 32;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut good = 0;
    for _ in 0..50 {
        let l = random_lambda(&mut rng, hi);
        let basis = period_basis(&l, hi).map_err(|e| e.to_string())?;
        let p = exp_map(&random_z(&mut rng, &basis, hi), &basis, hi);
        let m = |k| scalar_mul(Multiplier::Int(k), &p, &l, hi).map_err(|e| e.to_string());
        let lat = detect_elliptic_lattice(&[p.clone(), m(2)?, m(3)?], &basis, prec, 20).map_err(|e| e.to_string())?;
        if lat.rank == 2 && lat.equals(&[vec![-2, 1, 0], vec![-3, 0, 1]]) {
            good += 1;
        }
    }
    let ex = |v: &[i64]| v.iter().map(|&a| MultInput::Exact(q(a, 1))).collect::<Vec<_>>();
    let pow = detect_mult_lattice(&ex(&[2, 4, 8]), prec, 20).map_err(|e| e.to_string())?;
    let pow_ok = pow.equals(&[vec![-2, 1, 0], vec![-3, 0, 1]]);
    let phi = (Complex::one(hi) + Complex::from_i64(5, hi).sqrt()).mul_2k(-1);
    let psi = &phi - Complex::one(hi);
    let gold = detect_mult_lattice(&[MultInput::Numeric(phi), MultInput::Numeric(psi)], prec, 20).map_err(|e| e.to_string())?;
    let gold_ok = gold.equals(&[vec![1, 1]]);
    check(good == 50 && pow_ok && gold_ok, format!("(P,2P,3P): {good}/50; (2,4,8): {:?}; (phi, phi-1): {:?}", pow.basis, gold.basis))
}

fn a9() -> Outcome {
    let c = BoundConstants::default();
    let (w1, w2) = (roots_of_unity_bound(1, &c).0, roots_of_unity_bound(2, &c).0);
    let omega_ok = (1..=1000u64).all(|k| roots_of_unity_bound(k, &c).0 <= 6 * k * k);
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let eta = dobrowolski_eta(2);
    let rel = |a: f64, b: f64| ((a - b) / b).abs() < 1e-12;
    let g = GeneratorBoundInputs::new(3, 2.0, 5.0, 3).map_err(|e| e.to_string())?;
    let base = generator_bound_elliptic(&g);
    let kappa = rel(generator_bound_elliptic(&GeneratorBoundInputs { kappa: 6, ..g }) / base, 4.0);
    let height = rel(generator_bound_elliptic(&GeneratorBoundInputs { h: 5.0, ..g }) / base, 64.0);
    let big = BoundConstants { gamma3: 1e-6, ..c };
    let m1 = generator_bound_mult(3, 4.0, 4, false, &big).map_err(|e| e.to_string())?;
    let mh = rel(generator_bound_mult(3, 8.0, 4, false, &big).map_err(|e| e.to_string())? / m1, 8.0);
    let mk = rel(generator_bound_mult(6, 4.0, 4, false, &big).map_err(|e| e.to_string())? / m1, 4.0);
    let ok = w1 == 2 && w2 == 6 && omega_ok && eta <= phi.ln() / 2.0 && kappa && height && mh && mk;
    check(
        ok,
        format!(
            "omega(1) = {w1}, omega(2) = {w2}, omega <= 6k^2 to 1000: {omega_ok}; eta(2) = {eta:.6} <= {:.6}; doubling kappa x4: {kappa}, h+1 x2^(2n): {height}, mult h x2^(m-1): {mh}, mult kappa x4: {mk}",
            phi.ln() / 2.0
        ),
    )
}

fn a10() -> Outcome {
    let prec = 192;
    let phi = AlgebraicNumber::new(ZPoly::from_i64s(&[-1, -1, 1]), Complex64::new(1.618, 0.0), prec).map_err(|e| e.to_string())?;
    let h = weil_height(&phi, prec).to_f64();
    let target = ((1.0 + 5f64.sqrt()) / 2.0).ln() / 2.0;
    let (x, l) = (q(2, 1), q(5, 1));
    let one = neron_tate(&x, &l, 6).map_err(|e| e.to_string())?;
    let two = neron_tate(&double_x(&x, &l).ok_or("2-torsion")?, &l, 6).map_err(|e| e.to_string())?;
    let ratio = two.value / one.value;
    let tol = (two.error + 4.0 * one.error) / one.value;
    let quad = (ratio - 4.0).abs() <= tol;
    let fam = fixture("golden.json");
    let small = torsion_survey(&fam.points[0], 8, 20_000, prec).map_err(|e| e.to_string())?;
    let large = torsion_survey(&fam.points[0], 12, 20_000, prec).map_err(|e| e.to_string())?;
    let (m8, m12) = (small.max.unwrap_or(0.0), large.max.unwrap_or(0.0));
    let ok = (h - target).abs() <= 1e-10 && quad && m12 <= 2.0 * m8 && m8 > 0.0;
    check(
        ok,
        format!(
            "h(phi) - (log phi)/2 = {:.1e}; x=2 on E_5: h^(2P)/h^(P) = {ratio:.8} (4 +- {tol:.1e}); survey max N<=8 {m8:.5}, N<=12 {m12:.5} ({} factors)",
            h - target,
            large.entries.len()
        ),
    )
}

fn a11() -> Outcome {
    let fam = fixture("golden.json");
    let disc = SearchDisc::new(Complex64::new(1.6, 0.0), 0.2, 0.01, 32).map_err(|e| e.to_string())?;
    let rel = RelationVector::new(vec![0], vec![CmInt::int(1), CmInt::int(1)]);
    let r = find_double_locus(&fam, &rel, &disc, 192, &Sequential).map_err(|e| e.to_string())?;
    let phi = Complex::from_real((Float::one(256) + Float::from_i64(5, 256).sqrt()).mul_2k(-1));
    let d: Vec<Float> = r.certified.iter().map(|p| (&p.t0 - &phi).abs()).collect();
    let ok = d.len() == 1 && d[0].le_pow2(-48);
    check(ok, format!("{} certified point(s), |t0 - phi| = 2^{}", d.len(), d.first().map(lg).unwrap_or_default()))
}

fn main() {
    // `cargo test` passes harness flags such as `--list`; there is nothing to list or filter.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("A1", a1),
        ("A2", a2),
        ("A3", a3),
        ("A4", a4),
        ("A5", a5),
        ("A6", a6),
        ("A7", a7),
        ("A8", a8),
        ("A9", a9),
        ("A10", a10),
        ("A11", a11),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let r = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match r {
            Ok(d) => println!("{name} PASS ({secs:.1}s) {d}"),
            Err(d) => {
                failed += 1;
                println!("{name} FAIL ({secs:.1}s) {d}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
