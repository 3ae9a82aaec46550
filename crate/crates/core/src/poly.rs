//! Dense univariate polynomials over Z and Q, complex root isolation, and
//! factorization over Q.
//!
//! Coefficients are stored lowest degree first. The zero polynomial is the
//! empty vector.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::mp::{Complex, Float};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct ZPoly(pub Vec<BigInt>);

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct QPoly(pub Vec<BigRational>);

impl ZPoly {
    pub fn new(mut c: Vec<BigInt>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        ZPoly(c)
    }

    pub fn from_i64s(c: &[i64]) -> Self {
        ZPoly::new(c.iter().map(|&v| BigInt::from(v)).collect())
    }

    pub fn zero() -> Self {
        ZPoly(Vec::new())
    }

    pub fn one() -> Self {
        ZPoly(vec![BigInt::one()])
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        ZPoly(vec![BigInt::zero(), BigInt::one()])
    }

    pub fn constant(c: BigInt) -> Self {
        ZPoly::new(vec![c])
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; `-1` for the zero polynomial.
    pub fn degree(&self) -> isize {
        self.0.len() as isize - 1
    }

    pub fn lc(&self) -> BigInt {
        self.0.last().cloned().unwrap_or_default()
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.0.get(i).cloned().unwrap_or_default()
    }

    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in &self.0 {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Divides out the content and makes the leading coefficient positive.
    pub fn primitive(&self) -> ZPoly {
        if self.is_zero() {
            return self.clone();
        }
        let mut g = self.content();
        if self.lc().is_negative() {
            g = -g;
        }
        ZPoly(self.0.iter().map(|c| c / &g).collect())
    }

    pub fn scale(&self, k: &BigInt) -> ZPoly {
        ZPoly::new(self.0.iter().map(|c| c * k).collect())
    }

    pub fn derivative(&self) -> ZPoly {
        ZPoly::new(self.0.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect())
    }

    pub fn pow(&self, e: u32) -> ZPoly {
        let mut acc = ZPoly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + BigRational::from_integer(c.clone());
        }
        acc
    }

    pub fn eval_complex(&self, z: &Complex) -> Complex {
        let p = z.prec();
        let mut acc = Complex::zero(p);
        for c in self.0.iter().rev() {
            acc = &acc * z + Complex::from_real(Float::from_bigint(c, p));
        }
        acc
    }

    /// `(p(z), p'(z))` by a single Horner pass.
    pub fn eval_with_derivative(&self, z: &Complex) -> (Complex, Complex) {
        let p = z.prec();
        let mut v = Complex::zero(p);
        let mut d = Complex::zero(p);
        for c in self.0.iter().rev() {
            d = &d * z + &v;
            v = &v * z + Complex::from_real(Float::from_bigint(c, p));
        }
        (v, d)
    }

    /// Exact quotient when `d` divides `self` over Z; `None` otherwise.
    pub fn exact_div(&self, d: &ZPoly) -> Option<ZPoly> {
        assert!(!d.is_zero(), "division by the zero polynomial");
        if self.is_zero() {
            return Some(ZPoly::zero());
        }
        if self.degree() < d.degree() {
            return None;
        }
        let mut r = self.0.clone();
        let dl = d.lc();
        let dd = d.0.len() - 1;
        let mut q = vec![BigInt::zero(); r.len() - dd];
        for i in (0..q.len()).rev() {
            let top = &r[i + dd];
            if top.is_zero() {
                continue;
            }
            let (qi, rem) = top.div_rem(&dl);
            if !rem.is_zero() {
                return None;
            }
            for (j, c) in d.0.iter().enumerate() {
                r[i + j] -= &qi * c;
            }
            q[i] = qi;
        }
        if r.iter().any(|c| !c.is_zero()) {
            return None;
        }
        Some(ZPoly::new(q))
    }

    pub fn to_q(&self) -> QPoly {
        QPoly::new(self.0.iter().map(|c| BigRational::from_integer(c.clone())).collect())
    }

    /// Primitive gcd over Q, normalized with positive leading coefficient.
    pub fn gcd(&self, other: &ZPoly) -> ZPoly {
        self.to_q().gcd(&other.to_q()).to_primitive_z()
    }

    /// Product of the distinct irreducible factors (primitive).
    pub fn squarefree_part(&self) -> ZPoly {
        if self.degree() <= 0 {
            return self.primitive();
        }
        let g = self.gcd(&self.derivative());
        self.primitive().exact_div(&g).expect("gcd divides").primitive()
    }

    /// Removes every factor shared with `d` (to any multiplicity).
    pub fn remove_factors_of(&self, d: &ZPoly) -> ZPoly {
        let mut f = self.primitive();
        if d.is_zero() {
            return f;
        }
        loop {
            let g = f.gcd(d);
            if g.degree() <= 0 {
                return f;
            }
            f = f.exact_div(&g).expect("gcd divides").primitive();
        }
    }

    /// Maximal coefficient bit length.
    pub fn max_bits(&self) -> u64 {
        self.0.iter().map(|c| c.bits()).max().unwrap_or(0)
    }

    /// All complex roots to `prec` bits. Accuracy assumes squarefree input.
    pub fn roots(&self, prec: u32) -> Vec<Complex> {
        aberth_roots(self, prec)
    }

    /// Mahler measure `log M(f) = log|lc| + sum log max(1, |root|)`.
    pub fn log_mahler_measure(&self, prec: u32) -> Float {
        let lc = Float::from_bigint(&self.lc().abs(), prec);
        let mut acc = lc.ln();
        for r in self.roots(prec) {
            let a = r.abs();
            if a > Float::one(prec) {
                acc += a.ln();
            }
        }
        acc
    }
}

fn add_vec(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).cloned().unwrap_or_default() + b.get(i).cloned().unwrap_or_default())
        .collect()
}

fn mul_vec(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

impl Add<&ZPoly> for &ZPoly {
    type Output = ZPoly;
    fn add(self, rhs: &ZPoly) -> ZPoly {
        ZPoly::new(add_vec(&self.0, &rhs.0))
    }
}
impl Sub<&ZPoly> for &ZPoly {
    type Output = ZPoly;
    fn sub(self, rhs: &ZPoly) -> ZPoly {
        self + &(-rhs)
    }
}
impl Mul<&ZPoly> for &ZPoly {
    type Output = ZPoly;
    fn mul(self, rhs: &ZPoly) -> ZPoly {
        ZPoly::new(mul_vec(&self.0, &rhs.0))
    }
}
impl Neg for &ZPoly {
    type Output = ZPoly;
    fn neg(self) -> ZPoly {
        ZPoly(self.0.iter().map(|c| -c).collect())
    }
}

impl QPoly {
    pub fn new(mut c: Vec<BigRational>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        QPoly(c)
    }

    pub fn zero() -> Self {
        QPoly(Vec::new())
    }

    pub fn one() -> Self {
        QPoly(vec![BigRational::one()])
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> isize {
        self.0.len() as isize - 1
    }

    pub fn lc(&self) -> BigRational {
        self.0.last().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn monic(&self) -> QPoly {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.lc();
        QPoly(self.0.iter().map(|c| c / &l).collect())
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_complex(&self, z: &Complex) -> Complex {
        let p = z.prec();
        let mut acc = Complex::zero(p);
        for c in self.0.iter().rev() {
            acc = &acc * z + Complex::from_rational(c, p);
        }
        acc
    }

    pub fn derivative(&self) -> QPoly {
        QPoly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    pub fn div_rem(&self, d: &QPoly) -> (QPoly, QPoly) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        if self.degree() < d.degree() {
            return (QPoly::zero(), self.clone());
        }
        let mut r = self.0.clone();
        let dd = d.0.len() - 1;
        let inv = d.lc().recip();
        let mut q = vec![BigRational::zero(); r.len() - dd];
        for i in (0..q.len()).rev() {
            let qi = &r[i + dd] * &inv;
            if qi.is_zero() {
                continue;
            }
            for (j, c) in d.0.iter().enumerate() {
                r[i + j] -= &qi * c;
            }
            q[i] = qi;
        }
        r.truncate(dd);
        (QPoly::new(q), QPoly::new(r))
    }

    /// Monic gcd (zero if both are zero).
    pub fn gcd(&self, other: &QPoly) -> QPoly {
        let (mut a, mut b) = (self.monic(), other.monic());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.monic();
        }
        a
    }

    /// Clears denominators and returns the primitive integer multiple.
    pub fn to_primitive_z(&self) -> ZPoly {
        if self.is_zero() {
            return ZPoly::zero();
        }
        let mut l = BigInt::one();
        for c in &self.0 {
            l = l.lcm(c.denom());
        }
        ZPoly::new(self.0.iter().map(|c| (c * BigRational::from_integer(l.clone())).to_integer()).collect())
            .primitive()
    }

    /// `(common denominator, integer numerator polynomial)` with `self = num / den`.
    pub fn clear_denominators(&self) -> (BigInt, ZPoly) {
        let mut l = BigInt::one();
        for c in &self.0 {
            l = l.lcm(c.denom());
        }
        let z = ZPoly::new(self.0.iter().map(|c| (c * BigRational::from_integer(l.clone())).to_integer()).collect());
        (l, z)
    }
}

impl Add<&QPoly> for &QPoly {
    type Output = QPoly;
    fn add(self, rhs: &QPoly) -> QPoly {
        let n = self.0.len().max(rhs.0.len());
        QPoly::new(
            (0..n)
                .map(|i| {
                    self.0.get(i).cloned().unwrap_or_else(BigRational::zero)
                        + rhs.0.get(i).cloned().unwrap_or_else(BigRational::zero)
                })
                .collect(),
        )
    }
}
impl Sub<&QPoly> for &QPoly {
    type Output = QPoly;
    fn sub(self, rhs: &QPoly) -> QPoly {
        self + &QPoly(rhs.0.iter().map(|c| -c).collect())
    }
}
impl Mul<&QPoly> for &QPoly {
    type Output = QPoly;
    fn mul(self, rhs: &QPoly) -> QPoly {
        if self.is_zero() || rhs.is_zero() {
            return QPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.0.len() + rhs.0.len() - 1];
        for (i, x) in self.0.iter().enumerate() {
            for (j, y) in rhs.0.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        QPoly::new(out)
    }
}

// ---------------------------------------------------------------------------
// Complex roots by Aberth–Ehrlich iteration with a precision ramp.

fn aberth_roots(f: &ZPoly, prec: u32) -> Vec<Complex> {
    let n = f.degree();
    if n <= 0 {
        return Vec::new();
    }
    let n = n as usize;
    if n == 1 {
        let r = Float::from_ratio(&-f.coeff(0), &f.coeff(1), prec);
        return vec![Complex::from_real(r)];
    }
    // Fujiwara-style radius for the initial circle.
    let lc = f.lc().abs();
    let lcf = Float::from_bigint(&lc, 64).to_f64();
    let mut radius: f64 = 0.0;
    for k in 1..=n {
        let c = Float::from_bigint(&f.coeff(n - k).abs(), 64).to_f64();
        if c > 0.0 {
            radius = radius.max(libm::pow(c / lcf, 1.0 / k as f64));
        }
    }
    let radius = (2.0 * radius).max(1e-3);
    let mut z: Vec<Complex> = (0..n)
        .map(|k| {
            let th = 2.0 * core::f64::consts::PI * (k as f64 + 0.37) / n as f64 + 0.4;
            Complex::from_f64(radius * libm::cos(th), radius * libm::sin(th), 64)
        })
        .collect();
    let extra = 32 + (f.max_bits() as u32).min(4096) / 4;
    let mut p = 64u32;
    loop {
        let wp = p + if p == 64 { 0 } else { extra };
        z = z.iter().map(|c| c.with_prec(wp)).collect();
        let tol = -(wp as i64) + 8;
        let max_iter = if p == 64 { 60 + 4 * n } else { 40 };
        for _ in 0..max_iter {
            let mut worst = i64::MIN;
            for k in 0..n {
                let (v, d) = f.eval_with_derivative(&z[k]);
                if v.is_zero() {
                    continue;
                }
                if d.is_zero() {
                    z[k] = &z[k] + Complex::from_f64(1e-8, 1e-8, wp);
                    worst = i64::MAX;
                    continue;
                }
                let w = &v / &d;
                let mut s = Complex::zero(wp);
                for j in 0..n {
                    if j != k {
                        let diff = &z[k] - &z[j];
                        if !diff.is_zero() {
                            s += &diff.recip();
                        }
                    }
                }
                let denom = Complex::one(wp) - &w * &s;
                let step = if denom.is_zero() { w } else { &w / &denom };
                let scale = z[k].lead_exp().max(0);
                worst = worst.max(step.lead_exp().saturating_sub(scale));
                z[k] = &z[k] - &step;
            }
            if worst < tol {
                break;
            }
        }
        if p >= prec {
            break;
        }
        p = (p * 2).min(prec);
    }
    z.into_iter().map(|c| c.with_prec(prec)).collect()
}

// ---------------------------------------------------------------------------
// Arithmetic in F_p[x], p < 2^31.

type Fp = Vec<u64>;

fn fp_trim(mut a: Fp) -> Fp {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn fp_from_z(f: &ZPoly, p: u64) -> Fp {
    let pb = BigInt::from(p);
    fp_trim(f.0.iter().map(|c| c.mod_floor(&pb).to_u64().unwrap()).collect())
}

fn fp_pow_u(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

fn fp_inv(a: u64, p: u64) -> u64 {
    fp_pow_u(a, p - 2, p)
}

fn fp_sub(a: &Fp, b: &Fp, p: u64) -> Fp {
    let n = a.len().max(b.len());
    fp_trim((0..n).map(|i| (a.get(i).copied().unwrap_or(0) + p - b.get(i).copied().unwrap_or(0)) % p).collect())
}

fn fp_mul(a: &Fp, b: &Fp, p: u64) -> Fp {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    fp_trim(out)
}

fn fp_divrem(a: &Fp, b: &Fp, p: u64) -> (Fp, Fp) {
    let mut r = a.clone();
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let db = b.len() - 1;
    let inv = fp_inv(*b.last().unwrap(), p);
    let mut q = vec![0u64; r.len() - db];
    for i in (0..q.len()).rev() {
        let c = r[i + db] * inv % p;
        if c == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            r[i + j] = (r[i + j] + p - c * y % p) % p;
        }
        q[i] = c;
    }
    r.truncate(db);
    (fp_trim(q), fp_trim(r))
}

fn fp_monic(a: &Fp, p: u64) -> Fp {
    match a.last() {
        None => Vec::new(),
        Some(&l) => {
            let inv = fp_inv(l, p);
            a.iter().map(|&c| c * inv % p).collect()
        }
    }
}

fn fp_gcd(a: &Fp, b: &Fp, p: u64) -> Fp {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_empty() {
        let (_, r) = fp_divrem(&a, &b, p);
        a = b;
        b = r;
    }
    fp_monic(&a, p)
}

/// `(g, s, t)` with `s a + t b = g` monic.
fn fp_xgcd(a: &Fp, b: &Fp, p: u64) -> (Fp, Fp, Fp) {
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (vec![1u64], Vec::new());
    let (mut t0, mut t1) = (Vec::new(), vec![1u64]);
    while !r1.is_empty() {
        let (q, r) = fp_divrem(&r0, &r1, p);
        let s2 = fp_sub(&s0, &fp_mul(&q, &s1, p), p);
        let t2 = fp_sub(&t0, &fp_mul(&q, &t1, p), p);
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s2;
        t0 = t1;
        t1 = t2;
    }
    let inv = fp_inv(*r0.last().unwrap(), p);
    let sc = |v: &Fp| fp_trim(v.iter().map(|&c| c * inv % p).collect());
    (sc(&r0), sc(&s0), sc(&t0))
}

fn fp_powmod(base: &Fp, e: &BigUint, m: &Fp, p: u64) -> Fp {
    let mut acc = vec![1u64];
    let b = fp_divrem(base, m, p).1;
    for i in (0..e.bits()).rev() {
        acc = fp_divrem(&fp_mul(&acc, &acc, p), m, p).1;
        if e.bit(i) {
            acc = fp_divrem(&fp_mul(&acc, &b, p), m, p).1;
        }
    }
    acc
}

fn fp_derivative(a: &Fp, p: u64) -> Fp {
    fp_trim(a.iter().enumerate().skip(1).map(|(i, &c)| c * (i as u64 % p) % p).collect())
}

struct XorShift(u64);

impl XorShift {
    fn next(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }
}

/// Monic irreducible factors of a squarefree monic `f` over F_p (p odd).
fn fp_factor(f: &Fp, p: u64, rng: &mut XorShift) -> Vec<Fp> {
    let mut out = Vec::new();
    let mut rest = f.clone();
    let x: Fp = vec![0, 1];
    let mut h = x.clone();
    let pb = BigUint::from(p);
    let mut d = 1usize;
    while rest.len() > 1 && 2 * d <= rest.len() - 1 {
        h = fp_powmod(&h, &pb, &rest, p);
        let g = fp_gcd(&fp_sub(&h, &x, p), &rest, p);
        if g.len() > 1 {
            equal_degree(&g, d, p, rng, &mut out);
            rest = fp_divrem(&rest, &g, p).0;
            h = fp_divrem(&h, &rest, p).1;
        }
        d += 1;
    }
    if rest.len() > 1 {
        out.push(fp_monic(&rest, p));
    }
    out
}

fn equal_degree(g: &Fp, d: usize, p: u64, rng: &mut XorShift, out: &mut Vec<Fp>) {
    let n = g.len() - 1;
    if n == d {
        out.push(fp_monic(g, p));
        return;
    }
    let e = (num_traits::pow(BigUint::from(p), d) - 1u32) / 2u32;
    loop {
        let a: Fp = fp_trim((0..n).map(|_| rng.next() % p).collect());
        if a.len() < 2 {
            continue;
        }
        let b = fp_powmod(&a, &e, g, p);
        let c = fp_gcd(&fp_sub(&b, &vec![1], p), g, p);
        if c.len() > 1 && c.len() < g.len() {
            let other = fp_divrem(g, &c, p).0;
            equal_degree(&c, d, p, rng, out);
            equal_degree(&other, d, p, rng, out);
            return;
        }
    }
}

// ---------------------------------------------------------------------------
// Hensel lifting over Z/m for m = p^(2^k).

fn zm(v: &BigInt, m: &BigInt) -> BigInt {
    v.mod_floor(m)
}

fn zm_poly(a: &ZPoly, m: &BigInt) -> ZPoly {
    ZPoly::new(a.0.iter().map(|c| zm(c, m)).collect())
}

fn zm_mul(a: &ZPoly, b: &ZPoly, m: &BigInt) -> ZPoly {
    zm_poly(&(a * b), m)
}

/// Division by a monic divisor modulo m.
fn zm_divrem_monic(a: &ZPoly, b: &ZPoly, m: &BigInt) -> (ZPoly, ZPoly) {
    let mut r: Vec<BigInt> = a.0.iter().map(|c| zm(c, m)).collect();
    if r.len() < b.0.len() {
        return (ZPoly::zero(), ZPoly::new(r));
    }
    let db = b.0.len() - 1;
    let mut q = vec![BigInt::zero(); r.len() - db];
    for i in (0..q.len()).rev() {
        let c = zm(&r[i + db], m);
        if c.is_zero() {
            continue;
        }
        for (j, y) in b.0.iter().enumerate() {
            r[i + j] = zm(&(&r[i + j] - &c * y), m);
        }
        q[i] = c;
    }
    r.truncate(db);
    (ZPoly::new(q), ZPoly::new(r))
}

fn z_from_fp(a: &Fp) -> ZPoly {
    ZPoly::new(a.iter().map(|&c| BigInt::from(c)).collect())
}

/// One quadratic Hensel step: `f ≡ g h`, `s g + t h ≡ 1` mod m, `h` monic.
#[allow(clippy::too_many_arguments)]
fn hensel_step(f: &ZPoly, g: &ZPoly, h: &ZPoly, s: &ZPoly, t: &ZPoly, m2: &BigInt) -> (ZPoly, ZPoly, ZPoly, ZPoly) {
    let e = zm_poly(&(f - &(g * h)), m2);
    let (q, r) = zm_divrem_monic(&zm_mul(s, &e, m2), h, m2);
    let g2 = zm_poly(&(&(g + &(t * &e)) + &(&q * g)), m2);
    let h2 = zm_poly(&(h + &r), m2);
    let b = zm_poly(&(&(&(s * &g2) + &(t * &h2)) - &ZPoly::one()), m2);
    let (c, d) = zm_divrem_monic(&zm_mul(s, &b, m2), &h2, m2);
    let s2 = zm_poly(&(s - &d), m2);
    let t2 = zm_poly(&(&(t - &(t * &b)) - &(&c * &g2)), m2);
    (g2, h2, s2, t2)
}

/// Lifts `f ≡ lc(f) * prod(factors)` (factors monic mod p) to modulus `p^(2^k) >= bound`.
fn multi_lift(f: &ZPoly, factors: &[Fp], p: u64, bound: &BigInt) -> (Vec<ZPoly>, BigInt) {
    let pb = BigInt::from(p);
    let mut m = pb.clone();
    let mut steps = 0;
    while &m < bound {
        m = &m * &m;
        steps += 1;
    }
    let mut out = Vec::new();
    lift_tree(f, factors, p, steps, &mut out);
    (out, m)
}

fn lift_tree(f: &ZPoly, factors: &[Fp], p: u64, steps: u32, out: &mut Vec<ZPoly>) {
    if factors.len() == 1 {
        // f ≡ lc * u; make monic modulo the final modulus.
        let mut m = BigInt::from(p);
        for _ in 0..steps {
            m = &m * &m;
        }
        let lc_inv = f.lc().modinv(&m).expect("lc coprime to p");
        out.push(zm_poly(&f.scale(&lc_inv), &m));
        return;
    }
    let mid = factors.len() / 2;
    let (left, right) = factors.split_at(mid);
    let mut gl: Fp = vec![1];
    for u in left {
        gl = fp_mul(&gl, u, p);
    }
    let mut hr: Fp = vec![1];
    for u in right {
        hr = fp_mul(&hr, u, p);
    }
    let lcp = f.lc().mod_floor(&BigInt::from(p)).to_u64().unwrap();
    let g0: Fp = gl.iter().map(|&c| c * lcp % p).collect();
    let (_, s0, t0) = fp_xgcd(&g0, &hr, p);
    let (mut g, mut h, mut s, mut t) = (z_from_fp(&g0), z_from_fp(&hr), z_from_fp(&s0), z_from_fp(&t0));
    let mut m = BigInt::from(p);
    for _ in 0..steps {
        m = &m * &m;
        let r = hensel_step(f, &g, &h, &s, &t, &m);
        g = r.0;
        h = r.1;
        s = r.2;
        t = r.3;
    }
    lift_tree(&g, left, p, steps, out);
    lift_tree(&h, right, p, steps, out);
}

fn symmetric(a: &ZPoly, m: &BigInt) -> ZPoly {
    let half = m / 2;
    ZPoly::new(
        a.0.iter()
            .map(|c| {
                let c = c.mod_floor(m);
                if c > half {
                    c - m
                } else {
                    c
                }
            })
            .collect(),
    )
}

const SMALL_PRIMES: [u64; 24] = [
    5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101,
];

fn more_primes() -> impl Iterator<Item = u64> {
    SMALL_PRIMES.iter().copied().chain((103u64..100_000).filter(|&n| {
        let mut d = 2;
        while d * d <= n {
            if n % d == 0 {
                return false;
            }
            d += 1;
        }
        true
    }))
}

/// Irreducible factors over Q of a squarefree primitive polynomial, each primitive with
/// positive leading coefficient, sorted by degree then coefficients.
pub fn factor_squarefree(f: &ZPoly) -> Vec<ZPoly> {
    let f = f.primitive();
    let n = f.degree();
    if n <= 1 {
        return if n == 1 { vec![f] } else { Vec::new() };
    }
    // Pull out factors of x directly.
    let mut out = Vec::new();
    let mut f = f;
    if f.0[0].is_zero() {
        out.push(ZPoly::x());
        f = ZPoly::new(f.0[1..].to_vec()).primitive();
        if f.degree() <= 1 {
            if f.degree() == 1 {
                out.push(f);
            }
            sort_factors(&mut out);
            return out;
        }
    }
    let mut rng = XorShift(0x9E37_79B9_7F4A_7C15);
    let mut best: Option<(u64, Vec<Fp>)> = None;
    let mut tried = 0;
    for p in more_primes() {
        let pb = BigInt::from(p);
        if f.lc().mod_floor(&pb).is_zero() {
            continue;
        }
        let fp = fp_from_z(&f, p);
        if fp.len() != f.0.len() {
            continue;
        }
        let g = fp_gcd(&fp, &fp_derivative(&fp, p), p);
        if g.len() > 1 {
            continue;
        }
        let facs = fp_factor(&fp_monic(&fp, p), p, &mut rng);
        if best.as_ref().is_none_or(|(_, b)| facs.len() < b.len()) {
            best = Some((p, facs));
        }
        tried += 1;
        if tried >= 6 || best.as_ref().is_some_and(|(_, b)| b.len() == 1) {
            break;
        }
    }
    let (p, facs) = best.expect("a good prime exists for a squarefree polynomial");
    if facs.len() == 1 {
        out.push(f);
        sort_factors(&mut out);
        return out;
    }
    // Mignotte-type bound for coefficients of lc * (any factor).
    let norm2: BigInt = f.0.iter().map(|c| c * c).sum();
    let norm = norm2.sqrt() + 1;
    let bound = (norm * (BigInt::one() << (n as usize + 1)) * f.lc().abs()) * 2;
    let (mut lifted, m) = multi_lift(&f, &facs, p, &bound);
    let mut rem = f.clone();
    let mut size = 1;
    while 2 * size <= lifted.len() {
        let mut found = false;
        for subset in combinations(lifted.len(), size) {
            let lc = rem.lc();
            let mut g = ZPoly::constant(lc.clone());
            for &i in &subset {
                g = zm_mul(&g, &lifted[i], &m);
            }
            let g = symmetric(&g, &m);
            // Cheap constant-term screen.
            let c0 = g.coeff(0);
            let r0 = &rem.coeff(0) * &lc;
            if !c0.is_zero() && !(r0.mod_floor(&c0)).is_zero() {
                continue;
            }
            let g = g.primitive();
            if let Some(q) = rem.exact_div(&g) {
                out.push(g);
                rem = q.primitive();
                let mut idx = subset.clone();
                idx.sort_unstable_by(|a, b| b.cmp(a));
                for i in idx {
                    lifted.remove(i);
                }
                found = true;
                break;
            }
        }
        if !found {
            size += 1;
        }
    }
    if rem.degree() > 0 {
        out.push(rem);
    }
    sort_factors(&mut out);
    out
}

/// Irreducible factors over Q of any nonzero polynomial, without multiplicities.
pub fn irreducible_factors(f: &ZPoly) -> Vec<ZPoly> {
    factor_squarefree(&f.squarefree_part())
}

pub fn is_irreducible(f: &ZPoly) -> bool {
    let f = f.primitive();
    if f.degree() <= 0 {
        return false;
    }
    let g = f.gcd(&f.derivative());
    g.degree() == 0 && factor_squarefree(&f).len() == 1
}

fn sort_factors(v: &mut [ZPoly]) {
    v.sort_by(|a, b| a.degree().cmp(&b.degree()).then_with(|| a.0.cmp(&b.0)));
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Monic polynomial with the given integer roots.
pub fn zpoly_from_roots(roots: &[i64]) -> ZPoly {
    let mut acc = ZPoly::one();
    for &r in roots {
        acc = &acc * &ZPoly::from_i64s(&[-r, 1]);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(c: &[i64]) -> ZPoly {
        ZPoly::from_i64s(c)
    }

    #[test]
    fn gcd_and_squarefree() {
        let a = &z(&[-1, 1]) * &z(&[-1, 1]);
        let b = &a * &z(&[2, 1]);
        assert_eq!(b.squarefree_part(), &z(&[-1, 1]) * &z(&[2, 1]));
        assert_eq!(a.gcd(&z(&[1, 1])), ZPoly::one());
        assert_eq!(b.remove_factors_of(&z(&[-1, 1])), z(&[2, 1]));
    }

    #[test]
    fn exact_division() {
        let f = &z(&[1, 2, 3]) * &z(&[5, 0, 7]);
        assert_eq!(f.exact_div(&z(&[5, 0, 7])), Some(z(&[1, 2, 3])));
        assert_eq!(f.exact_div(&z(&[1, 1])), None);
    }

    #[test]
    fn roots_of_cyclotomic_and_golden() {
        let r = z(&[-1, -1, 1]).roots(128);
        let mut re: Vec<f64> = r.iter().map(|c| c.re.to_f64()).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((re[1] - 1.618_033_988_749_895).abs() < 1e-15);
        let phi = (Float::from_i64(5, 128).sqrt() + Float::one(128)).mul_2k(-1);
        let best = r.iter().map(|c| (&c.re - &phi).abs()).min().unwrap();
        assert!(best.le_pow2(-120));
        for c in z(&[1, 1, 1, 1, 1]).roots(96) {
            assert!((c.abs() - Float::one(96)).abs().le_pow2(-88));
        }
    }

    #[test]
    fn mahler_measure() {
        let m = z(&[-1, -1, 1]).log_mahler_measure(128).to_f64();
        assert!((m - libm::log(1.618_033_988_749_895)).abs() < 1e-14);
        assert!(z(&[1, 0, 1]).log_mahler_measure(96).to_f64().abs() < 1e-20);
        assert!((z(&[-2, 3]).log_mahler_measure(96).to_f64() - libm::log(3.0)).abs() < 1e-15);
    }

    #[test]
    fn factor_small() {
        let f = &(&z(&[-2, 0, 1]) * &z(&[1, 1, 1])) * &z(&[3, 2]);
        let fs = factor_squarefree(&f);
        assert_eq!(fs, vec![z(&[3, 2]), z(&[-2, 0, 1]), z(&[1, 1, 1])]);
        assert!(is_irreducible(&z(&[-16, 8, 1])));
        assert!(!is_irreducible(&z(&[-4, 0, 1])));
        // x^4 + 1 is irreducible over Q but splits mod every prime.
        assert_eq!(factor_squarefree(&z(&[1, 0, 0, 0, 1])).len(), 1);
        let f = &z(&[0, 3, 0, 4]) * &z(&[-1, 1]);
        assert_eq!(factor_squarefree(&f).len(), 3);
    }

    #[test]
    fn factor_recombination_degree_eight() {
        // (x^4 - 10x^2 + 1)(x^4 + 1): both irreducible, both split mod many primes.
        let a = z(&[1, 0, -10, 0, 1]);
        let b = z(&[1, 0, 0, 0, 1]);
        let fs = factor_squarefree(&(&a * &b));
        assert_eq!(fs.len(), 2);
        assert!(fs.contains(&a) && fs.contains(&b));
    }
}
