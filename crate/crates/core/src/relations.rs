//! Relation lattices of points and of nonzero numbers, found by lattice reduction on their
//! logarithms and confirmed by arithmetic, plus the generator-size bounds.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::betti::CmInt;
use crate::error::{Error, Result};
use crate::legendre::{cm_i, group_add, AffinePoint};
use crate::mp::{Complex, Float};
use crate::periods::{elliptic_log, mult_log, period_basis, PeriodBasis};

type Row = Vec<BigInt>;

/// Integer LLL (δ = 3/4) on the rows of `b`, with exact rational Gram–Schmidt data.
/// The rows must be linearly independent.
pub fn lll(b: &mut [Row]) {
    let n = b.len();
    if n < 2 {
        return;
    }
    let zero = BigRational::zero();
    let mut mu = vec![vec![zero.clone(); n]; n];
    let mut bb = vec![zero.clone(); n];
    let mut star: Vec<Vec<BigRational>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut v: Vec<BigRational> = b[i].iter().map(|x| BigRational::from_integer(x.clone())).collect();
        for j in 0..i {
            if bb[j].is_zero() {
                continue;
            }
            let num: BigRational = b[i].iter().zip(&star[j]).map(|(x, s)| s * x).sum();
            mu[i][j] = num / &bb[j];
            for (vk, sk) in v.iter_mut().zip(&star[j]) {
                *vk -= &mu[i][j] * sk;
            }
        }
        bb[i] = v.iter().map(|x| x * x).sum();
        star.push(v);
    }
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let delta = BigRational::new(BigInt::from(3), BigInt::from(4));
    let mut k = 1;
    while k < n {
        size_reduce(b, &mut mu, k, k - 1, &half);
        let lhs = &bb[k];
        let rhs = (&delta - &mu[k][k - 1] * &mu[k][k - 1]) * &bb[k - 1];
        if *lhs >= rhs || bb[k - 1].is_zero() {
            for j in (0..k.saturating_sub(1)).rev() {
                size_reduce(b, &mut mu, k, j, &half);
            }
            k += 1;
            continue;
        }
        b.swap(k, k - 1);
        let m = mu[k][k - 1].clone();
        let bn = &bb[k] + &m * &m * &bb[k - 1];
        if bn.is_zero() {
            // Both vectors are zero in the orthogonal complement; only the order changes.
            for j in 0..k - 1 {
                let t = mu[k][j].clone();
                mu[k][j] = mu[k - 1][j].clone();
                mu[k - 1][j] = t;
            }
            k = (k - 1).max(1);
            continue;
        }
        mu[k][k - 1] = &m * &bb[k - 1] / &bn;
        bb[k] = &bb[k - 1] * &bb[k] / &bn;
        bb[k - 1] = bn;
        for j in 0..k - 1 {
            let t = mu[k][j].clone();
            mu[k][j] = mu[k - 1][j].clone();
            mu[k - 1][j] = t;
        }
        for i in k + 1..n {
            let t = mu[i][k].clone();
            mu[i][k] = &mu[i][k - 1] - &m * &t;
            mu[i][k - 1] = t + &mu[k][k - 1] * &mu[i][k];
        }
        k = (k - 1).max(1);
    }
}

fn size_reduce(b: &mut [Row], mu: &mut [Vec<BigRational>], k: usize, j: usize, half: &BigRational) {
    if mu[k][j].abs() <= *half {
        return;
    }
    let q = mu[k][j].round().to_integer();
    let bj = b[j].clone();
    for (x, y) in b[k].iter_mut().zip(&bj) {
        *x -= &q * y;
    }
    let qr = BigRational::from_integer(q);
    for l in 0..j {
        let t = &qr * &mu[j][l];
        mu[k][l] -= t;
    }
    mu[k][j] -= qr;
}

/// Unimodular row reduction to echelon form in the first `cols` columns; returns the rank there.
fn echelon(rows: &mut Vec<Row>, cols: usize) -> usize {
    let mut r = 0;
    for c in 0..cols {
        loop {
            let pivot = (r..rows.len()).filter(|&i| !rows[i][c].is_zero()).min_by(|&a, &b| rows[a][c].abs().cmp(&rows[b][c].abs()));
            let Some(p) = pivot else { break };
            rows.swap(r, p);
            let mut clean = true;
            for i in r + 1..rows.len() {
                if rows[i][c].is_zero() {
                    continue;
                }
                let q = rows[i][c].div_floor(&rows[r][c]);
                let pr = rows[r].clone();
                for (x, y) in rows[i].iter_mut().zip(&pr) {
                    *x -= &q * y;
                }
                if !rows[i][c].is_zero() {
                    clean = false;
                }
            }
            if clean {
                r += 1;
                break;
            }
        }
        if r == rows.len() {
            break;
        }
    }
    r
}

/// Row Hermite normal form of the lattice spanned by `rows` (zero rows dropped).
pub fn hnf(rows: &[Row]) -> Vec<Row> {
    let Some(width) = rows.first().map(|r| r.len()) else { return Vec::new() };
    let mut m: Vec<Row> = rows.to_vec();
    let rank = echelon(&mut m, width);
    m.truncate(rank);
    for i in 0..rank {
        let c = m[i].iter().position(|x| !x.is_zero()).expect("echelon rows are nonzero");
        if m[i][c].is_negative() {
            for x in m[i].iter_mut() {
                *x = -x.clone();
            }
        }
        let pr = m[i].clone();
        for row in m.iter_mut().take(i) {
            let q = row[c].div_floor(&pr[c]);
            if !q.is_zero() {
                for (x, y) in row.iter_mut().zip(&pr) {
                    *x -= &q * y;
                }
            }
        }
    }
    m
}

/// A basis of `{x ∈ Z^m : A x = 0}` for the `k × m` matrix `a`.
pub fn integer_kernel(a: &[Row], m: usize) -> Vec<Row> {
    let k = a.len();
    let mut rows: Vec<Row> = (0..m)
        .map(|j| {
            let mut r: Row = a.iter().map(|row| row[j].clone()).collect();
            r.extend((0..m).map(|i| if i == j { BigInt::one() } else { BigInt::zero() }));
            r
        })
        .collect();
    let rank = echelon(&mut rows, k);
    rows.into_iter().skip(rank).map(|r| r[k..].to_vec()).collect()
}

pub fn same_lattice(a: &[Row], b: &[Row]) -> bool {
    hnf(a) == hnf(b)
}

fn to_rows(v: &[Vec<i64>]) -> Vec<Row> {
    v.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

fn from_rows(v: &[Row]) -> Option<Vec<Vec<i64>>> {
    v.iter().map(|r| r.iter().map(|x| x.to_i64()).collect()).collect()
}

/// Verification data for one generator.
#[derive(Clone, Debug)]
pub struct Residuals {
    /// Distance of the combined logarithm from the period lattice (or from `2πiZ`), in Betti units.
    pub log: f64,
    /// Arithmetic residual at the working precision.
    pub low: f64,
    /// Arithmetic residual at doubled precision.
    pub high: f64,
}

/// A verified, saturated relation lattice.
#[derive(Clone, Debug)]
pub struct RelationLattice {
    pub rank: usize,
    /// Generators, LLL-reduced. CM lattices store `(b'_1..b'_m, b''_1..b''_m)`.
    pub basis: Vec<Vec<i64>>,
    pub norms: Vec<i64>,
    pub residuals: Vec<Residuals>,
    pub cm: bool,
    pub prec: u32,
}

impl RelationLattice {
    pub fn rows(&self) -> Vec<Row> {
        to_rows(&self.basis)
    }

    /// Lattice equality with the span of `rows`.
    pub fn equals(&self, rows: &[Vec<i64>]) -> bool {
        same_lattice(&self.rows(), &to_rows(rows))
    }

    /// Generators as Gaussian-integer vectors (CM lattices only).
    pub fn cm_rows(&self) -> Option<Vec<Vec<CmInt>>> {
        if !self.cm {
            return None;
        }
        Some(self.basis.iter().map(|r| split_cm(r)).collect())
    }
}

fn split_cm(r: &[i64]) -> Vec<CmInt> {
    let m = r.len() / 2;
    (0..m).map(|j| CmInt { re: r[j], im: r[m + j] }).collect()
}

fn row_norm(r: &[i64], cm: bool) -> i64 {
    if cm {
        split_cm(r).iter().map(|b| b.norm()).max().unwrap_or(0)
    } else {
        r.iter().map(|x| x.abs()).max().unwrap_or(0)
    }
}

/// Outcome of checking one candidate at both precisions.
enum Check {
    Holds(Residuals),
    Fails,
    Unstable,
}

/// Reduction, candidate extraction, verification and saturation, shared by both lattice kinds.
fn detect<V>(reals: &[(Float, Float)], scale: u32, extra: &[[i64; 2]], bound: i64, mut verify: V) -> Result<Vec<(Vec<i64>, Residuals)>>
where
    V: FnMut(&[i64]) -> Check,
{
    let n = reals.len();
    let mut rows: Vec<Row> = reals
        .iter()
        .enumerate()
        .map(|(i, (p, q))| {
            let mut r = vec![p.scaled_int(scale as i64), q.scaled_int(scale as i64)];
            r.extend((0..n).map(|j| BigInt::from((i == j) as i64)));
            r
        })
        .collect();
    let unit = BigInt::one() << scale as usize;
    for e in extra {
        let mut r = vec![&unit * e[0], &unit * e[1]];
        r.extend((0..n).map(|_| BigInt::zero()));
        rows.push(r);
    }
    lll(&mut rows);
    let mut found: Vec<(Vec<i64>, Residuals)> = Vec::new();
    let mut unstable = false;
    let mut consider = |a: Vec<i64>, found: &mut Vec<(Vec<i64>, Residuals)>, unstable: &mut bool| -> bool {
        if a.iter().all(|x| *x == 0) {
            return false;
        }
        match verify(&a) {
            Check::Holds(res) => {
                found.push((a, res));
                true
            }
            Check::Fails => false,
            Check::Unstable => {
                *unstable = true;
                false
            }
        }
    };
    for r in &rows {
        let a: Option<Vec<i64>> = r[2..].iter().map(|x| x.to_i64()).collect();
        let Some(mut a) = a else { continue };
        if a.iter().any(|x| x.abs() > bound) {
            continue;
        }
        if let Some(first) = a.iter().find(|x| **x != 0) {
            if *first < 0 {
                a.iter_mut().for_each(|x| *x = -*x);
            }
        }
        consider(a, &mut found, &mut unstable);
    }
    // Saturation: any p-divisible combination of generators whose quotient also verifies.
    loop {
        let basis = hnf(&to_rows(&found.iter().map(|f| f.0.clone()).collect::<Vec<_>>()));
        let basis = from_rows(&basis).ok_or(Error::DimensionMismatch("relation entries overflow".into()))?;
        let mut grew = false;
        'primes: for p in [2i64, 3] {
            let r = basis.len();
            if r == 0 {
                break;
            }
            let total = (p as usize).pow(r as u32);
            for code in 1..total {
                let mut c = code;
                let mut v = vec![0i64; n];
                for row in &basis {
                    let ck = (c % p as usize) as i64;
                    c /= p as usize;
                    for (x, y) in v.iter_mut().zip(row) {
                        *x += ck * y;
                    }
                }
                if v.iter().all(|x| x % p == 0) {
                    let w: Vec<i64> = v.iter().map(|x| x / p).collect();
                    if consider(w, &mut found, &mut unstable) {
                        grew = true;
                        break 'primes;
                    }
                }
            }
        }
        if !grew {
            break;
        }
    }
    if unstable {
        return Err(Error::PrecisionInsufficient);
    }
    Ok(found)
}

fn finish(found: Vec<(Vec<i64>, Residuals)>, cm: bool, prec: u32, mut verify: impl FnMut(&[i64]) -> Option<Residuals>) -> Result<RelationLattice> {
    let mut rows = hnf(&to_rows(&found.iter().map(|f| f.0.clone()).collect::<Vec<_>>()));
    lll(&mut rows);
    let basis = from_rows(&rows).ok_or(Error::DimensionMismatch("relation entries overflow".into()))?;
    let mut residuals = Vec::with_capacity(basis.len());
    for b in &basis {
        // Reduced generators are integer combinations of verified ones; recheck each directly.
        match found.iter().find(|f| &f.0 == b) {
            Some(f) => residuals.push(f.1.clone()),
            None => residuals.push(verify(b).ok_or(Error::PrecisionInsufficient)?),
        }
    }
    let norms = basis.iter().map(|r| row_norm(r, cm)).collect();
    Ok(RelationLattice { rank: basis.len(), basis, norms, residuals, cm, prec })
}

/// `Σ a_i P_i` by the group law.
fn combine_points(points: &[AffinePoint], a: &[i64], lambda0: &Complex, prec: u32) -> Result<AffinePoint> {
    let mut acc = AffinePoint::infinity(prec);
    for (p, &k) in points.iter().zip(a) {
        if k != 0 {
            let kp = crate::legendre::scalar_mul(crate::legendre::Multiplier::Int(k), p, lambda0, prec)?;
            acc = group_add(&acc, &kp, lambda0, prec)?;
        }
    }
    Ok(acc)
}

fn point_check(points: &[AffinePoint], a: &[i64], lambda0: &Complex, prec: u32, log: f64) -> Check {
    let at = |bits: u32| -> Option<Float> {
        let pts: Vec<AffinePoint> = points.iter().map(|p| p.with_prec(bits)).collect();
        let s = combine_points(&pts, a, &lambda0.with_prec(bits), bits).ok()?;
        s.at_infinity.then(|| s.distance_to_infinity())
    };
    match at(prec) {
        None => Check::Fails,
        Some(low) => match at(2 * prec) {
            Some(high) => Check::Holds(Residuals { log, low: low.to_f64(), high: high.to_f64() }),
            None => Check::Unstable,
        },
    }
}

fn betti_residual(coords: &[(Float, Float)], a: &[i64], prec: u32) -> Float {
    let (p, q): (Vec<Float>, Vec<Float>) = coords.iter().cloned().unzip();
    let (sp, sq) = crate::betti::combine_first(&p, &q, a, prec);
    crate::betti::target_distance(&sp, &sq, false)
}

fn check_inputs(points: &[AffinePoint], lambda0: &Complex, prec: u32, bound: i64) -> Result<()> {
    if bound < 1 {
        return Err(Error::InvalidInput("search bound must be at least 1".into()));
    }
    if points.is_empty() {
        return Err(Error::DimensionMismatch("no points".into()));
    }
    if points.iter().any(|p| p.at_infinity) {
        return Err(Error::PointAtInfinity);
    }
    if points.iter().any(|p| p.prec() < 2 * prec) || lambda0.prec() < 2 * prec {
        return Err(Error::PrecisionInsufficient);
    }
    Ok(())
}

/// `L(P_1, …, P_n)` for points of `E_{λ0}` given at precision at least `2·prec`.
///
/// `basis` may be any period basis of `E_{λ0}`; its parameter must carry `2·prec` bits.
pub fn detect_elliptic_lattice(points: &[AffinePoint], basis: &PeriodBasis, prec: u32, bound: i64) -> Result<RelationLattice> {
    let lambda0 = &basis.lambda;
    check_inputs(points, lambda0, prec, bound)?;
    let b = if basis.prec() >= prec { basis.clone() } else { period_basis(&lambda0.with_prec(prec), prec)? };
    let mut coords = Vec::with_capacity(points.len());
    for p in points {
        let z = elliptic_log(&p.with_prec(prec), &b, prec)?.z;
        coords.push(b.coords(&z));
    }
    let tol = Float::one(prec).mul_2k(-(prec as i64) / 2);
    let verify = |a: &[i64]| -> Check {
        let r = betti_residual(&coords, a, prec);
        if r > tol {
            return Check::Fails;
        }
        point_check(points, a, lambda0, prec, r.to_f64())
    };
    let found = detect(&coords, prec, &[[1, 0], [0, 1]], bound, verify)?;
    finish(found, false, prec, |a| match point_check(points, a, lambda0, prec, betti_residual(&coords, a, prec).to_f64()) {
        Check::Holds(r) => Some(r),
        _ => None,
    })
}

/// `L(Q_1, …, Q_m, iQ_1, …, iQ_m)` on `E_{-1}`, read as Gaussian relations `Σ (b'_j + b''_j i) Q_j = O`.
pub fn detect_cm_lattice(points: &[AffinePoint], basis: &PeriodBasis, prec: u32, bound: i64) -> Result<RelationLattice> {
    let d = (&basis.lambda + Complex::one(basis.lambda.prec())).max_abs();
    if !d.le_pow2(-(prec as i64)) {
        return Err(Error::CmUnsupported);
    }
    let mut doubled: Vec<AffinePoint> = points.to_vec();
    doubled.extend(points.iter().map(cm_i));
    let mut out = detect_elliptic_lattice(&doubled, basis, prec, bound)?;
    out.cm = true;
    out.norms = out.basis.iter().map(|r| row_norm(r, true)).collect();
    Ok(out)
}

/// A nonzero input to [`detect_mult_lattice`].
#[derive(Clone, Debug)]
pub enum MultInput {
    Exact(BigRational),
    /// Known to at least twice the working precision.
    Numeric(Complex),
}

fn rational_pow_product(xs: &[BigRational], b: &[i64]) -> BigRational {
    let mut acc = BigRational::one();
    for (x, &k) in xs.iter().zip(b) {
        let p = num_traits::pow::pow(x.clone(), k.unsigned_abs() as usize);
        acc = if k >= 0 { acc * p } else { acc / p };
    }
    acc
}

/// `L(α_1, …, α_m)`.
pub fn detect_mult_lattice(numbers: &[MultInput], prec: u32, bound: i64) -> Result<RelationLattice> {
    if bound < 1 {
        return Err(Error::InvalidInput("search bound must be at least 1".into()));
    }
    if numbers.is_empty() {
        return Err(Error::DimensionMismatch("no numbers".into()));
    }
    let hi = 2 * prec;
    let mut values = Vec::with_capacity(numbers.len());
    for x in numbers {
        let v = match x {
            MultInput::Exact(r) => Complex::from_rational(r, hi + 16),
            MultInput::Numeric(c) => {
                if c.prec() < hi {
                    return Err(Error::PrecisionInsufficient);
                }
                c.clone()
            }
        };
        if v.is_zero() {
            return Err(Error::ZeroInput);
        }
        values.push(v);
    }
    let logs = |bits: u32| -> Result<Vec<(Float, Float)>> {
        values.iter().map(|v| mult_log(&v.with_prec(bits)).map(|l| (l.r, l.s))).collect()
    };
    let (low, high) = (logs(prec)?, logs(hi)?);
    let exact: Option<Vec<BigRational>> = numbers
        .iter()
        .map(|x| match x {
            MultInput::Exact(r) => Some(r.clone()),
            MultInput::Numeric(_) => None,
        })
        .collect();
    let residual = |l: &[(Float, Float)], b: &[i64], bits: u32| -> Float {
        let (r, s): (Vec<Float>, Vec<Float>) = l.iter().cloned().unzip();
        let (sr, ss) = crate::betti::combine_first(&r, &s, b, bits);
        crate::betti::target_distance(&sr, &ss, true)
    };
    let verify = |b: &[i64]| -> Check {
        let lo = residual(&low, b, prec);
        if !lo.le_pow2(-(prec as i64) / 2) {
            return Check::Fails;
        }
        if let Some(xs) = &exact {
            return if rational_pow_product(xs, b).is_one() {
                Check::Holds(Residuals { log: lo.to_f64(), low: 0.0, high: 0.0 })
            } else {
                Check::Unstable
            };
        }
        let h = residual(&high, b, hi);
        if h.le_pow2(-(prec as i64)) {
            Check::Holds(Residuals { log: lo.to_f64(), low: lo.to_f64(), high: h.to_f64() })
        } else {
            Check::Unstable
        }
    };
    let mut verify = verify;
    let found = detect(&low, prec, &[[0, 1]], bound, &mut verify)?;
    finish(found, false, prec, |b| match verify(b) {
        Check::Holds(r) => Some(r),
        _ => None,
    })
}

/// Prime factorisation by trial division (desk-scale inputs).
fn factor(n: &BigInt) -> Vec<(BigInt, u32)> {
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut p = BigInt::from(2);
    while &p * &p <= n {
        let mut e = 0;
        while (&n % &p).is_zero() {
            n /= &p;
            e += 1;
        }
        if e > 0 {
            out.push((p.clone(), e));
        }
        p += if p == BigInt::from(2) { 1 } else { 2 };
    }
    if n > BigInt::one() {
        out.push((n, 1));
    }
    out
}

/// `L(α_1, …, α_m)` for nonzero rationals from unique factorisation, with the sign tracked mod 2.
pub fn mult_lattice_exact(xs: &[BigRational]) -> Result<Vec<Vec<i64>>> {
    if xs.iter().any(|x| x.is_zero()) {
        return Err(Error::ZeroInput);
    }
    let m = xs.len();
    let mut primes: Vec<BigInt> = Vec::new();
    let mut exps: Vec<Vec<(BigInt, i64)>> = Vec::with_capacity(m);
    for x in xs {
        let mut e: Vec<(BigInt, i64)> = factor(x.numer()).into_iter().map(|(p, k)| (p, k as i64)).collect();
        e.extend(factor(x.denom()).into_iter().map(|(p, k)| (p, -(k as i64))));
        for (p, _) in &e {
            if !primes.contains(p) {
                primes.push(p.clone());
            }
        }
        exps.push(e);
    }
    // Unknowns b_1..b_m and a slack k with Σ b_j [α_j < 0] − 2k = 0.
    let mut a: Vec<Row> = primes
        .iter()
        .map(|p| {
            let mut r: Row = exps.iter().map(|e| e.iter().filter(|(q, _)| q == p).map(|(_, k)| BigInt::from(*k)).sum()).collect();
            r.push(BigInt::zero());
            r
        })
        .collect();
    let mut sign: Row = xs.iter().map(|x| BigInt::from(x.is_negative() as i64)).collect();
    sign.push(BigInt::from(-2));
    a.push(sign);
    let ker = integer_kernel(&a, m + 1);
    let proj: Vec<Row> = ker.into_iter().map(|mut r| {
        r.truncate(m);
        r
    }).collect();
    from_rows(&hnf(&proj)).ok_or(Error::DimensionMismatch("relation entries overflow".into()))
}

/// Defaults are calibrations, not derived values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundConstants {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub gamma4: f64,
    pub gamma6: f64,
}

impl Default for BoundConstants {
    fn default() -> Self {
        BoundConstants { gamma1: 1.0, gamma2: 2.0, gamma3: 1.0, gamma4: 2.0, gamma6: 6.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratorBoundInputs {
    pub kappa: u64,
    /// Height of the parameter.
    pub h: f64,
    /// Upper bound for the Néron–Tate heights of the points.
    pub q: f64,
    /// Number of points or numbers.
    pub n: usize,
    pub constants: BoundConstants,
}

impl GeneratorBoundInputs {
    pub fn new(kappa: u64, h: f64, q: f64, n: usize) -> Result<Self> {
        let g = GeneratorBoundInputs { kappa, h, q, n, constants: BoundConstants::default() };
        g.check()?;
        Ok(g)
    }

    fn check(&self) -> Result<()> {
        if self.kappa < 1 || !(self.q >= 1.0) || !(self.h >= 1.0) || self.n < 1 {
            return Err(Error::InvalidInput("need kappa >= 1, h >= 1, q >= 1, n >= 1".into()));
        }
        Ok(())
    }
}

/// `γ1 κ^γ2 (h + 1)^{2n} q^{(n−1)/2}`. With CM the caller passes the doubled point count.
pub fn generator_bound_elliptic(g: &GeneratorBoundInputs) -> f64 {
    let c = g.constants;
    let n = g.n as f64;
    c.gamma1 * libm::pow(g.kappa as f64, c.gamma2) * libm::pow(g.h + 1.0, 2.0 * n) * libm::pow(g.q, (n - 1.0) / 2.0)
}

/// Generator size for multiplicative relations among `m` numbers of height ≤ `h` over a degree-`κ` field.
///
/// `torsion` selects the all-roots-of-unity branch, where `ω(κ)` alone bounds the exponents.
pub fn generator_bound_mult(kappa: u64, h: f64, m: usize, torsion: bool, c: &BoundConstants) -> Result<f64> {
    if kappa < 1 || !(h >= 1.0) || m < 1 {
        return Err(Error::InvalidInput("need kappa >= 1, h >= 1, m >= 1".into()));
    }
    let omega = roots_of_unity_bound(kappa, c).0 as f64;
    if torsion {
        return Ok(omega);
    }
    let e = (m - 1) as f64;
    let shape = c.gamma3 * libm::pow(kappa as f64, c.gamma4) * libm::pow(h, e);
    let eta = if kappa == 1 { core::f64::consts::LN_2 } else { dobrowolski_eta(kappa) };
    let inner = libm::pow(m as f64, e) * omega * libm::pow(h / eta, e);
    Ok(shape.min(inner))
}

fn totients(limit: usize) -> Vec<u64> {
    let mut phi: Vec<u64> = (0..=limit as u64).collect();
    for p in 2..=limit {
        if phi[p] == p as u64 {
            let mut k = p;
            while k <= limit {
                phi[k] -= phi[k] / p as u64;
                k += p;
            }
        }
    }
    phi
}

/// `(max{N : φ(N) ≤ κ}, γ6 κ²)`.
///
/// The sieve runs to `max(2κ², 6)`, which is enough since `φ(N) ≥ √(N/2)`.
pub fn roots_of_unity_bound(kappa: u64, c: &BoundConstants) -> (u64, f64) {
    let k = kappa.max(1);
    let limit = (2 * k * k).max(6) as usize;
    let phi = totients(limit);
    let exact = (1..=limit).rev().find(|&n| phi[n] <= k).unwrap_or(1) as u64;
    (exact, c.gamma6 * (k * k) as f64)
}

/// Explicit lower bound `2 / (κ (log 3κ)³)` for the height of a non-torsion algebraic number of degree `κ`.
pub fn dobrowolski_eta(kappa: u64) -> f64 {
    if kappa <= 1 {
        return core::f64::consts::LN_2;
    }
    let k = kappa as f64;
    2.0 / (k * libm::pow(libm::log(3.0 * k), 3.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(v: &[&[i64]]) -> Vec<Row> {
        v.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    #[test]
    fn hnf_and_kernel() {
        let h = hnf(&rows(&[&[2, 4, 6], &[1, 2, 3], &[0, 3, 1]]));
        assert_eq!(h, rows(&[&[1, 2, 3], &[0, 3, 1]]));
        let k = integer_kernel(&rows(&[&[1, 2, 3]]), 3);
        assert!(same_lattice(&k, &rows(&[&[-2, 1, 0], &[-3, 0, 1]])));
        assert!(integer_kernel(&rows(&[&[1, 0], &[0, 1]]), 2).is_empty());
    }

    #[test]
    fn lll_shortens() {
        let mut b = rows(&[&[1, 1, 1], &[-1, 0, 2], &[3, 5, 6]]);
        let before = hnf(&b);
        lll(&mut b);
        assert_eq!(hnf(&b), before);
        let n2 = |r: &Row| -> BigInt { r.iter().map(|x| x * x).sum() };
        assert!(b.iter().all(|r| n2(r) <= BigInt::from(5)));
    }

    #[test]
    fn factorisation_oracle() {
        let q = |a: i64, b: i64| BigRational::new(BigInt::from(a), BigInt::from(b));
        let l = mult_lattice_exact(&[q(2, 1), q(4, 1), q(8, 1)]).unwrap();
        assert!(same_lattice(&to_rows(&l), &rows(&[&[-2, 1, 0], &[-3, 0, 1]])));
        assert!(mult_lattice_exact(&[q(2, 1), q(3, 1)]).unwrap().is_empty());
        let l = mult_lattice_exact(&[q(-1, 1)]).unwrap();
        assert_eq!(l, vec![vec![2]]);
        let l = mult_lattice_exact(&[q(-2, 3), q(3, 2)]).unwrap();
        assert_eq!(l, vec![vec![2, 2]]);
    }

    #[test]
    fn totient_bound() {
        let c = BoundConstants::default();
        assert_eq!(roots_of_unity_bound(1, &c).0, 2);
        assert_eq!(roots_of_unity_bound(2, &c).0, 6);
        assert_eq!(roots_of_unity_bound(4, &c).0, 12);
    }
}
