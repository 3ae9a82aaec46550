//! Affine, Weil and Néron–Tate heights, and height surveys over torsion parameters.
//!
//! Néron–Tate heights use `ĥ(P) = lim 4^{-k} h(x(2^k P))` with the logarithmic Weil height `h`
//! of the x-coordinate, which is twice the `½h(x)` convention.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::legendre::{to_c64, torsion_condition, PointExpr};
use crate::mp::{Complex, Float};
use crate::poly::{irreducible_factors, is_irreducible, ZPoly};

/// An algebraic number: primitive irreducible polynomial with positive leading coefficient and a chosen root.
#[derive(Clone, Debug)]
pub struct AlgebraicNumber {
    pub poly: ZPoly,
    pub root: Complex,
}

impl AlgebraicNumber {
    /// The root of `poly` nearest `approx`.
    pub fn new(poly: ZPoly, approx: Complex64, prec: u32) -> Result<Self> {
        let mut poly = poly.primitive();
        if poly.lc().is_negative() {
            poly = poly.scale(&BigInt::from(-1));
        }
        if !is_irreducible(&poly) {
            return Err(Error::ReducibleInput);
        }
        let root = poly
            .roots(prec)
            .into_iter()
            .min_by(|a, b| (to_c64(a) - approx).norm().total_cmp(&(to_c64(b) - approx).norm()))
            .ok_or(Error::ReducibleInput)?;
        Ok(AlgebraicNumber { poly, root })
    }

    pub fn rational(r: &BigRational, prec: u32) -> Self {
        let poly = ZPoly::new(alloc::vec![-r.numer().clone(), r.denom().clone()]);
        AlgebraicNumber { poly, root: Complex::from_rational(r, prec) }
    }

    pub fn degree(&self) -> usize {
        self.poly.degree().max(0) as usize
    }
}

/// `max` over entries of `max(|a|, |b|)` for `a/b` in lowest terms.
pub fn affine_height(xs: &[BigRational]) -> BigInt {
    xs.iter().map(|x| x.numer().abs().max(x.denom().abs())).max().unwrap_or_else(BigInt::one)
}

/// `log max(|a|, |b|)`.
pub fn rational_height(x: &BigRational) -> f64 {
    log_bigint(&x.numer().abs().max(x.denom().abs()))
}

fn log_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return libm::log(Float::from_bigint(n, 64).to_f64());
    }
    let shift = bits - 64;
    let top: BigInt = n >> shift as usize;
    libm::log(Float::from_bigint(&top, 64).to_f64()) + shift as f64 * core::f64::consts::LN_2
}

/// Logarithmic Weil height: Mahler measure of the minimal polynomial over the degree.
pub fn weil_height(a: &AlgebraicNumber, prec: u32) -> Float {
    let d = a.degree().max(1) as i64;
    a.poly.log_mahler_measure(prec) / Float::from_i64(d, prec)
}

/// Minimal polynomial of `αβ`, recovered from the products of conjugates.
pub fn product(a: &AlgebraicNumber, b: &AlgebraicNumber, prec: u32) -> Result<AlgebraicNumber> {
    let (ra, rb) = (a.poly.roots(prec), b.poly.roots(prec));
    let lc = num_traits::pow::pow(a.poly.lc(), b.degree()) * num_traits::pow::pow(b.poly.lc(), a.degree());
    let mut coeffs = alloc::vec![Complex::from_rational(&BigRational::from_integer(lc), prec)];
    for x in &ra {
        for y in &rb {
            let r = x * y;
            let mut next = alloc::vec![Complex::zero(prec); coeffs.len() + 1];
            for (i, c) in coeffs.iter().enumerate() {
                next[i + 1] = &next[i + 1] + c;
                next[i] = &next[i] - c * &r;
            }
            coeffs = next;
        }
    }
    let mut ints = Vec::with_capacity(coeffs.len());
    for c in &coeffs {
        if !c.im.abs().le_pow2(-8) || !c.re.dist_to_int().le_pow2(-8) {
            return Err(Error::NonConvergence);
        }
        ints.push(c.re.round_int());
    }
    let target = &a.root * &b.root;
    let full = ZPoly::new(ints);
    let factor = irreducible_factors(&full)
        .into_iter()
        .min_by(|f, g| f.eval_complex(&target).abs().cmp(&g.eval_complex(&target).abs()))
        .ok_or(Error::ReducibleInput)?;
    AlgebraicNumber::new(factor, to_c64(&target), prec)
}

/// A Néron–Tate height estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct NeronTate {
    pub value: f64,
    pub error: f64,
    /// `2^k P = O` for some `k`, or the doubling orbit repeated: the height is exactly zero.
    pub torsion: bool,
    /// `4^{-k} h(x(2^k P))` for `k = 0..`.
    pub sequence: Vec<f64>,
}

/// `x(2P)` on `y² = x(x-1)(x-λ)`, or `None` when `P` is 2-torsion.
pub fn double_x(x: &BigRational, lambda0: &BigRational) -> Option<BigRational> {
    let one = BigRational::one();
    let den = x * (x - &one) * (x - lambda0) * BigRational::from_integer(BigInt::from(4));
    if den.is_zero() {
        return None;
    }
    let n = x * x - lambda0;
    Some(&n * &n / den)
}

/// Néron–Tate height of a point with rational x-coordinate on `E_{λ0}`, `λ0` rational.
///
/// `error` bounds the tail `Σ_{j≥k} 4^{-j-1}|h_{j+1} - 4h_j|` using the largest observed defect.
pub fn neron_tate(x: &BigRational, lambda0: &BigRational, k_max: usize) -> Result<NeronTate> {
    if lambda0.is_zero() || lambda0.is_one() {
        return Err(Error::SingularParameter);
    }
    let mut xs: Vec<BigRational> = alloc::vec![x.clone()];
    let mut hs: Vec<f64> = alloc::vec![rational_height(x)];
    for _ in 0..k_max {
        let last = xs.last().expect("nonempty");
        let Some(next) = double_x(last, lambda0) else {
            return Ok(NeronTate { value: 0.0, error: 0.0, torsion: true, sequence: scaled(&hs) });
        };
        if xs.contains(&next) {
            return Ok(NeronTate { value: 0.0, error: 0.0, torsion: true, sequence: scaled(&hs) });
        }
        hs.push(rational_height(&next));
        xs.push(next);
    }
    let seq = scaled(&hs);
    let defect = hs.windows(2).map(|w| (w[1] - 4.0 * w[0]).abs()).fold(0.0, f64::max);
    let k = (hs.len() - 1) as i32;
    let error = defect * libm::pow(4.0, -(k as f64)) / 3.0;
    Ok(NeronTate { value: *seq.last().expect("nonempty"), error, torsion: false, sequence: seq })
}

fn scaled(hs: &[f64]) -> Vec<f64> {
    hs.iter().enumerate().map(|(k, h)| h / libm::pow(4.0, k as f64)).collect()
}

/// Heights of a point and its parameter, with the implied Zimmer-type constant.
#[derive(Clone, Debug, PartialEq)]
pub struct HeightReport {
    /// Weil height of the x-coordinate.
    pub h: f64,
    pub neron_tate: NeronTate,
    pub h_lambda: f64,
    /// `(ĥ - h) / (h_λ + 1)`.
    pub implied: f64,
}

pub fn zimmer_gap(x: &BigRational, lambda0: &BigRational, k_max: usize) -> Result<HeightReport> {
    let nt = neron_tate(x, lambda0, k_max)?;
    let h = rational_height(x);
    let h_lambda = rational_height(lambda0);
    let implied = (nt.value - h) / (h_lambda + 1.0);
    Ok(HeightReport { h, neron_tate: nt, h_lambda, implied })
}

/// One irreducible factor of a torsion condition.
#[derive(Clone, Debug)]
pub struct SurveyEntry {
    pub order: u32,
    pub poly: ZPoly,
    pub height: f64,
}

#[derive(Clone, Debug, Default)]
pub struct SurveyReport {
    pub entries: Vec<SurveyEntry>,
    pub max: Option<f64>,
    pub min: Option<f64>,
    /// Counts per bin of width `bin` starting at 0.
    pub histogram: Vec<usize>,
    pub bin: f64,
}

/// Heights of the given parameters, with extremes and a histogram.
pub fn silverman_survey(params: &[(u32, AlgebraicNumber)], prec: u32) -> SurveyReport {
    let entries: Vec<SurveyEntry> = params
        .iter()
        .map(|(n, a)| SurveyEntry { order: *n, poly: a.poly.clone(), height: weil_height(a, prec).to_f64() })
        .collect();
    summarize(entries)
}

fn summarize(entries: Vec<SurveyEntry>) -> SurveyReport {
    let bin = 0.25;
    let max = entries.iter().map(|e| e.height).reduce(f64::max);
    let min = entries.iter().map(|e| e.height).reduce(f64::min);
    let mut histogram = Vec::new();
    if let Some(m) = max {
        histogram = alloc::vec![0; (m / bin) as usize + 1];
        for e in &entries {
            histogram[(e.height.max(0.0) / bin) as usize] += 1;
        }
    }
    SurveyReport { entries, max, min, histogram, bin }
}

/// Survey over the parameters where `expr` has exact order `N` for `2 ≤ N ≤ n_max`, one entry per
/// irreducible factor (conjugates share a height).
pub fn torsion_survey(expr: &PointExpr, n_max: u32, degree_cap: usize, prec: u32) -> Result<SurveyReport> {
    let mut entries = Vec::new();
    for n in 2..=n_max {
        let cond = torsion_condition(expr, n, degree_cap)?;
        if cond.degree() <= 0 {
            continue;
        }
        for f in irreducible_factors(&cond) {
            let d = f.degree().max(1) as i64;
            let h = (f.log_mahler_measure(prec) / Float::from_i64(d, prec)).to_f64();
            entries.push(SurveyEntry { order: n, poly: f, height: h });
        }
    }
    Ok(summarize(entries))
}
