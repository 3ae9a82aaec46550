//! Binary floating point with a per-value precision, and complex numbers built on it.
//!
//! A [`Float`] is `(-1)^neg * mag * 2^exp` with `mag` holding at most `prec` bits.
//! Binary operations return a value carrying the larger of the two operand
//! precisions and round to nearest. Transcendental functions evaluate with
//! guard bits and round once at the end.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use once_cell::race::OnceBox;

/// Precision (in bits) of the cached `pi` and `ln 2` constants.
const CONST_CACHE_BITS: u32 = 4160;

#[derive(Clone)]
pub struct Float {
    neg: bool,
    mag: BigUint,
    exp: i64,
    prec: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse `{0}` as a number")]
pub struct ParseFloatError(pub String);

impl Float {
    pub fn zero(prec: u32) -> Self {
        Float { neg: false, mag: BigUint::zero(), exp: 0, prec }
    }

    pub fn one(prec: u32) -> Self {
        Float::from_i64(1, prec)
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        Float::from_parts(v < 0, BigUint::from(v.unsigned_abs()), 0, prec)
    }

    pub fn from_bigint(v: &BigInt, prec: u32) -> Self {
        Float::from_parts(v.is_negative(), v.magnitude().clone(), 0, prec)
    }

    /// Exact conversion when `prec >= 53`.
    pub fn from_f64(v: f64, prec: u32) -> Self {
        if v == 0.0 || !v.is_finite() {
            return Float::zero(prec);
        }
        let (m, e) = libm::frexp(v.abs());
        let mant = libm::ldexp(m, 53) as u64;
        Float::from_parts(v < 0.0, BigUint::from(mant), e as i64 - 53, prec)
    }

    /// `num / den` rounded to `prec` bits.
    ///
    /// # Panics
    /// If `den` is zero.
    pub fn from_ratio(num: &BigInt, den: &BigInt, prec: u32) -> Self {
        assert!(!den.is_zero(), "from_ratio: zero denominator");
        let neg = num.is_negative() != den.is_negative();
        let (a, b) = (num.magnitude(), den.magnitude());
        if a.is_zero() {
            return Float::zero(prec);
        }
        let shift = (prec as i64 + 2 + b.bits() as i64 - a.bits() as i64).max(0);
        let q = (a << shift as usize) / b;
        Float::from_parts(neg, q, -shift, prec)
    }

    pub fn from_rational(r: &BigRational, prec: u32) -> Self {
        Float::from_ratio(r.numer(), r.denom(), prec)
    }

    fn from_parts(neg: bool, mag: BigUint, exp: i64, prec: u32) -> Self {
        Float { neg, mag, exp, prec }.rounded()
    }

    fn rounded(mut self) -> Self {
        if self.mag.is_zero() {
            self.neg = false;
            self.exp = 0;
            return self;
        }
        let bits = self.mag.bits();
        let prec = self.prec.max(2) as u64;
        if bits > prec {
            let sh = bits - prec;
            let half = self.mag.bit(sh - 1);
            self.mag >>= sh as usize;
            self.exp += sh as i64;
            if half {
                self.mag += 1u32;
                if self.mag.bits() > prec {
                    self.mag >>= 1usize;
                    self.exp += 1;
                }
            }
        }
        self
    }

    /// Parses `"p/q"`, integers, and decimals with an optional exponent (`"-1.25e-3"`).
    pub fn parse(s: &str, prec: u32) -> Result<Self, ParseFloatError> {
        let r = parse_rational(s).ok_or_else(|| ParseFloatError(s.into()))?;
        Ok(Float::from_rational(&r, prec))
    }

    #[inline]
    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// Same value re-rounded (or widened) to `prec` bits.
    pub fn with_prec(&self, prec: u32) -> Self {
        Float { prec, ..self.clone() }.rounded()
    }

    pub fn is_zero(&self) -> bool {
        self.mag.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.neg && !self.mag.is_zero()
    }

    pub fn signum(&self) -> i32 {
        if self.mag.is_zero() {
            0
        } else if self.neg {
            -1
        } else {
            1
        }
    }

    pub fn abs(&self) -> Self {
        Float { neg: false, ..self.clone() }
    }

    /// Multiplies by `2^k` exactly.
    pub fn mul_2k(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        Float { exp: self.exp + k, ..self.clone() }
    }

    /// `floor(log2 |x|) + 1`; `i64::MIN` for zero.
    pub fn lead_exp(&self) -> i64 {
        if self.mag.is_zero() {
            i64::MIN
        } else {
            self.exp + self.mag.bits() as i64
        }
    }

    /// True when `|self| <= 2^k`.
    pub fn le_pow2(&self, k: i64) -> bool {
        self.lead_exp() <= k
    }

    pub fn to_f64(&self) -> f64 {
        if self.mag.is_zero() {
            return 0.0;
        }
        let bits = self.mag.bits();
        let (m, e) = if bits > 64 {
            let sh = bits - 64;
            ((&self.mag >> sh as usize).to_u64().unwrap_or(u64::MAX), self.exp + sh as i64)
        } else {
            (self.mag.to_u64().unwrap_or(0), self.exp)
        };
        let e = e.clamp(-4000, 4000) as i32;
        let v = libm::ldexp(m as f64, e);
        if self.neg {
            -v
        } else {
            v
        }
    }

    pub fn square(&self) -> Self {
        self * self
    }

    pub fn recip(&self) -> Self {
        Float::one(self.prec) / self
    }

    pub fn floor_int(&self) -> BigInt {
        if self.mag.is_zero() {
            return BigInt::zero();
        }
        if self.exp >= 0 {
            let m = BigInt::from_biguint(Sign::Plus, &self.mag << self.exp as usize);
            return if self.neg { -m } else { m };
        }
        let sh = (-self.exp) as u64;
        let q = if sh >= self.mag.bits() { BigUint::zero() } else { &self.mag >> sh as usize };
        let exact = q.clone() << sh as usize == self.mag;
        let q = BigInt::from_biguint(Sign::Plus, q);
        if self.neg {
            if exact {
                -q
            } else {
                -q - 1
            }
        } else {
            q
        }
    }

    /// Nearest integer, ties toward +infinity.
    pub fn round_int(&self) -> BigInt {
        let half = Float { neg: false, mag: BigUint::one(), exp: -1, prec: 2 };
        (self + &half).floor_int()
    }

    pub fn round_i64(&self) -> Option<i64> {
        self.round_int().to_i64()
    }

    /// Distance from the nearest integer.
    pub fn dist_to_int(&self) -> Float {
        let n = Float::from_bigint(&self.round_int(), self.prec.max(64));
        (self - &n).abs()
    }

    /// `round(self * 2^k)` as an integer.
    pub fn scaled_int(&self, k: i64) -> BigInt {
        self.mul_2k(k).round_int()
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Exact conversion to a rational.
    pub fn to_rational(&self) -> BigRational {
        let m = BigInt::from_biguint(if self.neg { Sign::Minus } else { Sign::Plus }, self.mag.clone());
        if self.exp >= 0 {
            BigRational::from_integer(m << self.exp as usize)
        } else {
            BigRational::new(m, BigInt::one() << (-self.exp) as usize)
        }
    }

    fn div_small(&self, d: u64) -> Self {
        let prec = self.prec;
        if self.mag.is_zero() {
            return self.clone();
        }
        let shift = (prec as i64 + 2 + 64 - self.mag.bits() as i64).max(0);
        let q = (&self.mag << shift as usize) / d;
        Float::from_parts(self.neg, q, self.exp - shift, prec)
    }

    pub fn sqrt(&self) -> Self {
        assert!(!self.is_negative(), "sqrt of a negative number");
        if self.mag.is_zero() {
            return self.clone();
        }
        let prec = self.prec as i64;
        let mut k = (2 * prec + 4 - self.mag.bits() as i64).max(0);
        if (self.exp - k).rem_euclid(2) != 0 {
            k += 1;
        }
        let s = (&self.mag << k as usize).sqrt();
        Float::from_parts(false, s, (self.exp - k) / 2, self.prec)
    }

    /// Integer power by repeated squaring.
    pub fn powi(&self, n: i64) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut acc = Float::one(self.prec);
        let mut base = self.clone();
        let mut n = n as u64;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = base.square();
            }
        }
        acc
    }

    pub fn pi(prec: u32) -> Self {
        static PI: OnceBox<Float> = OnceBox::new();
        if prec + 16 <= CONST_CACHE_BITS {
            PI.get_or_init(|| Box::new(compute_pi(CONST_CACHE_BITS))).with_prec(prec)
        } else {
            compute_pi(prec + 16).with_prec(prec)
        }
    }

    pub fn ln2(prec: u32) -> Self {
        static LN2: OnceBox<Float> = OnceBox::new();
        if prec + 16 <= CONST_CACHE_BITS {
            LN2.get_or_init(|| Box::new(compute_ln2(CONST_CACHE_BITS))).with_prec(prec)
        } else {
            compute_ln2(prec + 16).with_prec(prec)
        }
    }

    pub fn exp(&self) -> Self {
        let prec = self.prec;
        if self.is_zero() {
            return Float::one(prec);
        }
        let halvings = (isqrt(prec as u64) / 2 + 2) as i64;
        let wp = prec + 24 + halvings as u32;
        let k = libm::round(self.to_f64() / core::f64::consts::LN_2);
        assert!(k.abs() < 4.0e15, "exp argument out of range");
        let k = k as i64;
        let kbits = 64 - k.unsigned_abs().leading_zeros();
        let r = self.with_prec(wp + kbits) - Float::ln2(wp + kbits) * Float::from_i64(k, wp);
        let r = r.with_prec(wp).mul_2k(-halvings);
        let mut sum = Float::one(wp);
        let mut term = Float::one(wp);
        let stop = -(wp as i64) - 4;
        for n in 1u64.. {
            term = (&term * &r).div_small(n);
            if term.is_zero() || term.lead_exp() < stop {
                break;
            }
            sum += &term;
        }
        for _ in 0..halvings {
            sum = sum.square();
        }
        sum.mul_2k(k).with_prec(prec)
    }

    /// Natural logarithm.
    ///
    /// # Panics
    /// If `self <= 0`.
    pub fn ln(&self) -> Self {
        assert!(!self.is_zero() && !self.neg, "ln of a non-positive number");
        let prec = self.prec;
        let wp = prec + 32;
        let lead = self.lead_exp();
        // |x| in [0.5, 2): iterate directly so ln(1+eps) keeps relative accuracy.
        let (m, e) = if (0..=1).contains(&lead) {
            (self.with_prec(wp), 0i64)
        } else {
            (Float { exp: self.exp - lead, prec: wp, ..self.clone() }.rounded(), lead)
        };
        let mut y = Float::from_f64(libm::log(m.to_f64()), wp);
        let mut good = 48u32;
        while good < wp {
            let ey = y.exp();
            let num = (&m - &ey).mul_2k(1);
            y = y + num / (&m + &ey);
            good = good.saturating_mul(3);
        }
        if e != 0 {
            y = y + Float::ln2(wp + 64) * Float::from_i64(e, wp);
        }
        y.with_prec(prec)
    }

    /// `(sin x, cos x)`.
    pub fn sin_cos(&self) -> (Self, Self) {
        let prec = self.prec;
        if self.is_zero() {
            return (Float::zero(prec), Float::one(prec));
        }
        let halvings = (isqrt(prec as u64) / 2 + 2) as i64;
        let wp = prec + 24 + halvings as u32;
        let lead = self.lead_exp().max(0) as u32;
        let two_pi = Float::pi(wp + lead + 8).mul_2k(1);
        let x = self.with_prec(wp + lead + 8);
        let k = (&x / &two_pi).round_int();
        let r = if k.is_zero() { x } else { &x - &two_pi * Float::from_bigint(&k, wp) };
        let r = r.with_prec(wp).mul_2k(-halvings);
        let r2 = r.square();
        let stop = -(wp as i64) - 4;
        let mut s = r.clone();
        let mut t = r.clone();
        for n in 1u64.. {
            t = -(&t * &r2).div_small((2 * n) * (2 * n + 1));
            if t.is_zero() || t.lead_exp() < stop {
                break;
            }
            s += &t;
        }
        let mut c = Float::one(wp);
        let mut t = Float::one(wp);
        for n in 1u64.. {
            t = -(&t * &r2).div_small((2 * n - 1) * (2 * n));
            if t.is_zero() || t.lead_exp() < stop {
                break;
            }
            c += &t;
        }
        for _ in 0..halvings {
            let s2 = (&s * &c).mul_2k(1);
            c = Float::one(wp) - s.square().mul_2k(1);
            s = s2;
        }
        (s.with_prec(prec), c.with_prec(prec))
    }

    /// Angle of the vector `(x, y)` in `(-pi, pi]`; zero for the origin.
    pub fn atan2(y: &Float, x: &Float) -> Float {
        let prec = y.prec.max(x.prec);
        if y.is_zero() && x.is_zero() {
            return Float::zero(prec);
        }
        if y.is_zero() {
            return if x.neg { Float::pi(prec) } else { Float::zero(prec) };
        }
        let wp = prec + 16;
        let top = y.lead_exp().max(x.lead_exp());
        let ys = y.mul_2k(-top).with_prec(wp);
        let xs = x.mul_2k(-top).with_prec(wp);
        let mut th = Float::from_f64(libm::atan2(ys.to_f64(), xs.to_f64()), wp);
        let mut good = 50u32;
        loop {
            let (s, c) = th.sin_cos();
            let num = &ys * &c - &xs * &s;
            let den = &xs * &c + &ys * &s;
            let t = num / den;
            let t3 = t.powi(3);
            th = th + &t - t3.div_small(3);
            good = good.saturating_mul(5);
            if good >= wp {
                break;
            }
        }
        th.with_prec(prec)
    }

    /// Scientific decimal string with `digits` significant digits, e.g. `-1.25e-3`.
    pub fn to_sci_string(&self, digits: usize) -> String {
        use core::fmt::Write;
        let digits = digits.max(1);
        if self.mag.is_zero() {
            return String::from("0");
        }
        let mut e10 = libm::floor((self.lead_exp() - 1) as f64 * core::f64::consts::LOG10_2) as i64;
        let scaled = loop {
            let k = digits as i64 - 1 - e10;
            let mut num = BigInt::from_biguint(Sign::Plus, self.mag.clone());
            let mut den = BigInt::one();
            if self.exp >= 0 {
                num <<= self.exp as usize;
            } else {
                den <<= (-self.exp) as usize;
            }
            let ten = BigInt::from(10u32);
            if k >= 0 {
                num *= num_traits::pow(ten, k as usize);
            } else {
                den *= num_traits::pow(ten, (-k) as usize);
            }
            let (q, r) = num.div_rem(&den);
            let q = if r * 2 >= den { q + 1 } else { q };
            let s = q.to_str_radix(10);
            if s.len() > digits {
                e10 += 1;
                continue;
            }
            if s.len() < digits {
                e10 -= 1;
                continue;
            }
            break s;
        };
        let mut out = String::new();
        if self.neg {
            out.push('-');
        }
        out.push_str(&scaled[..1]);
        if digits > 1 {
            out.push('.');
            out.push_str(scaled[1..].trim_end_matches('0'));
            if out.ends_with('.') {
                out.pop();
            }
        }
        let _ = write!(out, "e{}", e10);
        out
    }

    /// Decimal digits needed to round-trip `prec` bits.
    pub fn decimal_digits(prec: u32) -> usize {
        (prec as f64 * core::f64::consts::LOG10_2) as usize + 2
    }

    fn cmp_abs(&self, other: &Float) -> Ordering {
        match (self.mag.is_zero(), other.mag.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let (la, lb) = (self.lead_exp(), other.lead_exp());
        if la != lb {
            return la.cmp(&lb);
        }
        let e = self.exp.min(other.exp);
        let a = &self.mag << (self.exp - e) as usize;
        let b = &other.mag << (other.exp - e) as usize;
        a.cmp(&b)
    }
}

fn isqrt(n: u64) -> u64 {
    libm::sqrt(n as f64) as u64
}

fn atan_inv_fixed(x: u64, p: usize) -> BigInt {
    let one = BigUint::one() << p;
    let mut power = one / x;
    let x2 = x * x;
    let mut pos = BigUint::zero();
    let mut neg = BigUint::zero();
    let mut k = 0u64;
    while !power.is_zero() {
        let term = &power / (2 * k + 1);
        if k % 2 == 0 {
            pos += term;
        } else {
            neg += term;
        }
        power /= x2;
        k += 1;
    }
    BigInt::from(pos) - BigInt::from(neg)
}

fn compute_pi(bits: u32) -> Float {
    let p = bits as usize + 32;
    let v: BigInt = atan_inv_fixed(5, p) * 16u32 - atan_inv_fixed(239, p) * 4u32;
    Float::from_parts(false, v.magnitude().clone(), -(p as i64), bits)
}

fn compute_ln2(bits: u32) -> Float {
    let p = bits as usize + 32;
    // ln 2 = 2 atanh(1/3)
    let mut power = (BigUint::one() << (p + 1)) / 3u32;
    let mut sum = BigUint::zero();
    let mut k = 0u64;
    while !power.is_zero() {
        sum += &power / (2 * k + 1);
        power /= 9u32;
        k += 1;
    }
    Float::from_parts(false, sum, -(p as i64), bits)
}

/// Parses `"p/q"`, integers, and decimal strings with optional exponent into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p = parse_rational(p)?;
        let q = parse_rational(q)?;
        if q.is_zero() {
            return None;
        }
        return Some(p / q);
    }
    let (mant, e10) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
    if ip.is_empty() && fp.is_empty() {
        return None;
    }
    if !ip.bytes().chain(fp.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let mut digits = String::from(ip);
    digits.push_str(fp);
    let n = BigInt::parse_bytes(if digits.is_empty() { b"0" } else { digits.as_bytes() }, 10)?;
    let n = if neg { -n } else { n };
    let k = e10 - fp.len() as i64;
    let ten = BigInt::from(10u32);
    Some(if k >= 0 {
        BigRational::from_integer(n * num_traits::pow(ten, k as usize))
    } else {
        BigRational::new(n, num_traits::pow(ten, (-k) as usize))
    })
}

fn add_signed(a: &Float, b: &Float, negate_b: bool) -> Float {
    let prec = a.prec.max(b.prec);
    let bneg = b.neg ^ negate_b;
    if b.mag.is_zero() {
        return a.with_prec(prec);
    }
    if a.mag.is_zero() {
        return Float { neg: bneg, mag: b.mag.clone(), exp: b.exp, prec }.rounded();
    }
    let (la, lb) = (a.lead_exp(), b.lead_exp());
    let guard = prec as i64 + 4;
    if lb < la - guard {
        return a.with_prec(prec);
    }
    if la < lb - guard {
        return Float { neg: bneg, mag: b.mag.clone(), exp: b.exp, prec }.rounded();
    }
    let e = a.exp.min(b.exp);
    let ma = &a.mag << (a.exp - e) as usize;
    let mb = &b.mag << (b.exp - e) as usize;
    let (neg, mag) = if a.neg == bneg {
        (a.neg, ma + mb)
    } else {
        match ma.cmp(&mb) {
            Ordering::Greater => (a.neg, ma - mb),
            Ordering::Less => (bneg, mb - ma),
            Ordering::Equal => (false, BigUint::zero()),
        }
    };
    Float { neg, mag, exp: e, prec }.rounded()
}

fn mul_f(a: &Float, b: &Float) -> Float {
    let prec = a.prec.max(b.prec);
    if a.mag.is_zero() || b.mag.is_zero() {
        return Float::zero(prec);
    }
    Float { neg: a.neg ^ b.neg, mag: &a.mag * &b.mag, exp: a.exp + b.exp, prec }.rounded()
}

fn div_f(a: &Float, b: &Float) -> Float {
    assert!(!b.mag.is_zero(), "Float division by zero");
    let prec = a.prec.max(b.prec);
    if a.mag.is_zero() {
        return Float::zero(prec);
    }
    let k = (prec as i64 + 2 + b.mag.bits() as i64 - a.mag.bits() as i64).max(0);
    let q = (&a.mag << k as usize) / &b.mag;
    Float { neg: a.neg ^ b.neg, mag: q, exp: a.exp - b.exp - k, prec }.rounded()
}

macro_rules! float_binop {
    ($tr:ident, $m:ident, $f:expr) => {
        impl $tr<&Float> for &Float {
            type Output = Float;
            fn $m(self, rhs: &Float) -> Float {
                $f(self, rhs)
            }
        }
        impl $tr<Float> for &Float {
            type Output = Float;
            fn $m(self, rhs: Float) -> Float {
                $f(self, &rhs)
            }
        }
        impl $tr<&Float> for Float {
            type Output = Float;
            fn $m(self, rhs: &Float) -> Float {
                $f(&self, rhs)
            }
        }
        impl $tr<Float> for Float {
            type Output = Float;
            fn $m(self, rhs: Float) -> Float {
                $f(&self, &rhs)
            }
        }
    };
}

float_binop!(Add, add, |a, b| add_signed(a, b, false));
float_binop!(Sub, sub, |a, b| add_signed(a, b, true));
float_binop!(Mul, mul, mul_f);
float_binop!(Div, div, div_f);

impl AddAssign<&Float> for Float {
    fn add_assign(&mut self, rhs: &Float) {
        *self = add_signed(self, rhs, false);
    }
}
impl AddAssign<Float> for Float {
    fn add_assign(&mut self, rhs: Float) {
        *self = add_signed(self, &rhs, false);
    }
}
impl SubAssign<&Float> for Float {
    fn sub_assign(&mut self, rhs: &Float) {
        *self = add_signed(self, rhs, true);
    }
}
impl MulAssign<&Float> for Float {
    fn mul_assign(&mut self, rhs: &Float) {
        *self = mul_f(self, rhs);
    }
}

impl Neg for Float {
    type Output = Float;
    fn neg(mut self) -> Float {
        if !self.mag.is_zero() {
            self.neg = !self.neg;
        }
        self
    }
}
impl Neg for &Float {
    type Output = Float;
    fn neg(self) -> Float {
        -(self.clone())
    }
}

impl PartialEq for Float {
    fn eq(&self, other: &Float) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Float {}
impl PartialOrd for Float {
    fn partial_cmp(&self, other: &Float) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Float {
    fn cmp(&self, other: &Float) -> Ordering {
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb {
            return sa.cmp(&sb);
        }
        match sa {
            0 => Ordering::Equal,
            1 => self.cmp_abs(other),
            _ => other.cmp_abs(self),
        }
    }
}

impl fmt::Debug for Float {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sci_string(20))
    }
}
impl fmt::Display for Float {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sci_string(Float::decimal_digits(self.prec)))
    }
}

/// Complex number with [`Float`] parts.
#[derive(Clone, PartialEq, Eq)]
pub struct Complex {
    pub re: Float,
    pub im: Float,
}

impl Complex {
    pub fn new(re: Float, im: Float) -> Self {
        Complex { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        Complex { re: Float::zero(prec), im: Float::zero(prec) }
    }

    pub fn one(prec: u32) -> Self {
        Complex { re: Float::one(prec), im: Float::zero(prec) }
    }

    pub fn i(prec: u32) -> Self {
        Complex { re: Float::zero(prec), im: Float::one(prec) }
    }

    pub fn from_real(re: Float) -> Self {
        let p = re.prec();
        Complex { re, im: Float::zero(p) }
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        Complex::from_real(Float::from_i64(v, prec))
    }

    pub fn from_f64(re: f64, im: f64, prec: u32) -> Self {
        Complex { re: Float::from_f64(re, prec), im: Float::from_f64(im, prec) }
    }

    pub fn from_rational(r: &BigRational, prec: u32) -> Self {
        Complex::from_real(Float::from_rational(r, prec))
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        Complex { re: self.re.with_prec(prec), im: self.im.with_prec(prec) }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    pub fn conj(&self) -> Self {
        Complex { re: self.re.clone(), im: -&self.im }
    }

    pub fn norm_sqr(&self) -> Float {
        self.re.square() + self.im.square()
    }

    pub fn abs(&self) -> Float {
        self.norm_sqr().sqrt()
    }

    /// Max of `|re|` and `|im|`; cheap magnitude used in tolerance tests.
    pub fn max_abs(&self) -> Float {
        self.re.abs().max(self.im.abs())
    }

    /// `floor(log2)` of the larger component plus one, for quick scale checks.
    pub fn lead_exp(&self) -> i64 {
        self.re.lead_exp().max(self.im.lead_exp())
    }

    pub fn arg(&self) -> Float {
        Float::atan2(&self.im, &self.re)
    }

    pub fn mul_i(&self) -> Self {
        Complex { re: -&self.im, im: self.re.clone() }
    }

    pub fn mul_2k(&self, k: i64) -> Self {
        Complex { re: self.re.mul_2k(k), im: self.im.mul_2k(k) }
    }

    pub fn scale(&self, s: &Float) -> Self {
        Complex { re: &self.re * s, im: &self.im * s }
    }

    pub fn scale_i64(&self, k: i64) -> Self {
        let p = self.prec();
        self.scale(&Float::from_i64(k, p))
    }

    pub fn square(&self) -> Self {
        let re = (&self.re + &self.im) * (&self.re - &self.im);
        let im = (&self.re * &self.im).mul_2k(1);
        Complex { re, im }
    }

    pub fn recip(&self) -> Self {
        let d = self.norm_sqr();
        Complex { re: &self.re / &d, im: -(&self.im / &d) }
    }

    pub fn powi(&self, n: i64) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut acc = Complex::one(self.prec());
        let mut base = self.clone();
        let mut n = n as u64;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = base.square();
            }
        }
        acc
    }

    /// Principal square root (branch cut on the negative real axis, `Re >= 0`).
    pub fn sqrt(&self) -> Self {
        let p = self.prec();
        if self.is_zero() {
            return Complex::zero(p);
        }
        let r = self.abs();
        if !self.re.is_negative() {
            let u = ((&r + &self.re).mul_2k(-1)).sqrt();
            let v = &self.im / u.mul_2k(1);
            Complex { re: u, im: v }
        } else {
            let v = ((&r - &self.re).mul_2k(-1)).sqrt();
            let v = if self.im.is_negative() { -v } else { v };
            let u = &self.im / v.mul_2k(1);
            Complex { re: u, im: v }
        }
    }

    pub fn exp(&self) -> Self {
        let m = self.re.exp();
        let (s, c) = self.im.sin_cos();
        Complex { re: &m * c, im: m * s }
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Self {
        let n = self.norm_sqr();
        Complex { re: n.ln().mul_2k(-1), im: self.arg() }
    }

    /// `|self - other|`.
    pub fn dist(&self, other: &Complex) -> Float {
        (self - other).abs()
    }
}

fn cadd(a: &Complex, b: &Complex) -> Complex {
    Complex { re: &a.re + &b.re, im: &a.im + &b.im }
}
fn csub(a: &Complex, b: &Complex) -> Complex {
    Complex { re: &a.re - &b.re, im: &a.im - &b.im }
}
fn cmul(a: &Complex, b: &Complex) -> Complex {
    Complex { re: &a.re * &b.re - &a.im * &b.im, im: &a.re * &b.im + &a.im * &b.re }
}
fn cdiv(a: &Complex, b: &Complex) -> Complex {
    let d = b.norm_sqr();
    let re = &a.re * &b.re + &a.im * &b.im;
    let im = &a.im * &b.re - &a.re * &b.im;
    Complex { re: re / &d, im: im / &d }
}

macro_rules! complex_binop {
    ($tr:ident, $m:ident, $f:expr) => {
        impl $tr<&Complex> for &Complex {
            type Output = Complex;
            fn $m(self, rhs: &Complex) -> Complex {
                $f(self, rhs)
            }
        }
        impl $tr<Complex> for &Complex {
            type Output = Complex;
            fn $m(self, rhs: Complex) -> Complex {
                $f(self, &rhs)
            }
        }
        impl $tr<&Complex> for Complex {
            type Output = Complex;
            fn $m(self, rhs: &Complex) -> Complex {
                $f(&self, rhs)
            }
        }
        impl $tr<Complex> for Complex {
            type Output = Complex;
            fn $m(self, rhs: Complex) -> Complex {
                $f(&self, &rhs)
            }
        }
    };
}

complex_binop!(Add, add, cadd);
complex_binop!(Sub, sub, csub);
complex_binop!(Mul, mul, cmul);
complex_binop!(Div, div, cdiv);

impl AddAssign<&Complex> for Complex {
    fn add_assign(&mut self, rhs: &Complex) {
        *self = cadd(self, rhs);
    }
}
impl SubAssign<&Complex> for Complex {
    fn sub_assign(&mut self, rhs: &Complex) {
        *self = csub(self, rhs);
    }
}

impl Neg for Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        Complex { re: -self.re, im: -self.im }
    }
}
impl Neg for &Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        Complex { re: -&self.re, im: -&self.im }
    }
}

impl fmt::Debug for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?} {} {:?}i)", self.re, if self.im.is_negative() { "-" } else { "+" }, self.im.abs())
    }
}

/// Collects the real parts of a slice, mostly for diagnostics.
pub fn real_parts(v: &[Complex]) -> Vec<Float> {
    v.iter().map(|c| c.re.clone()).collect()
}
