//! The Legendre curve `y^2 = x(x-1)(x-λ)`: rational coordinate functions,
//! branch-tracked point evaluation, the group law, CM on `E_{-1}`, the
//! j-invariant, and a division-polynomial torsion oracle.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::mp::{Complex, Float};
use crate::poly::{QPoly, ZPoly};

/// Default cap on the degree of cleared torsion-condition polynomials.
pub const DEFAULT_DEGREE_CAP: usize = 4096;

/// Quotient of two rational polynomials in λ, kept reduced with a monic denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalFunction {
    num: QPoly,
    den: QPoly,
}

impl RationalFunction {
    pub fn new(num: QPoly, den: QPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidFamily("zero denominator".into()));
        }
        if num.is_zero() {
            return Ok(RationalFunction { num, den: QPoly::one() });
        }
        let g = num.gcd(&den);
        let (num, _) = num.div_rem(&g);
        let (den, _) = den.div_rem(&g);
        let l = den.lc();
        Ok(RationalFunction {
            num: QPoly::new(num.0.iter().map(|c| c / &l).collect()),
            den: den.monic(),
        })
    }

    pub fn poly(p: QPoly) -> Self {
        RationalFunction { num: p, den: QPoly::one() }
    }

    pub fn constant(c: BigRational) -> Self {
        RationalFunction::poly(QPoly::new(vec![c]))
    }

    /// The identity function `λ`.
    pub fn lambda() -> Self {
        RationalFunction::from_ints(&[0, 1], &[1])
    }

    /// Integer coefficient lists, lowest degree first.
    pub fn from_ints(num: &[i64], den: &[i64]) -> Self {
        let q = |c: &[i64]| QPoly::new(c.iter().map(|&v| BigRational::from_integer(v.into())).collect());
        RationalFunction::new(q(num), q(den)).expect("nonzero denominator")
    }

    pub fn num(&self) -> &QPoly {
        &self.num
    }

    pub fn den(&self) -> &QPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        if self.den.degree() == 0 && self.num.degree() <= 0 {
            Some(self.num.0.first().cloned().unwrap_or_else(BigRational::zero))
        } else {
            None
        }
    }

    /// `(X, W)` with integer coefficients and `self = X / W`.
    pub fn integer_parts(&self) -> (ZPoly, ZPoly) {
        let (dn, n) = self.num.clear_denominators();
        let (dd, d) = self.den.clear_denominators();
        (n.scale(&dd), d.scale(&dn))
    }

    pub fn eval(&self, t: &Complex) -> Option<Complex> {
        let d = self.den.eval_complex(t);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval_complex(t) / d)
    }

    pub fn eval_exact(&self, t: &BigRational) -> Option<BigRational> {
        let d = self.den.eval(t);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(t) / d)
    }

    pub fn eval_f64(&self, t: Complex64) -> Complex64 {
        horner_f64(&self.num, t) / horner_f64(&self.den, t)
    }

    pub fn add(&self, o: &Self) -> Self {
        RationalFunction::new(&(&self.num * &o.den) + &(&o.num * &self.den), &self.den * &o.den).unwrap()
    }

    pub fn sub(&self, o: &Self) -> Self {
        RationalFunction::new(&(&self.num * &o.den) - &(&o.num * &self.den), &self.den * &o.den).unwrap()
    }

    pub fn mul(&self, o: &Self) -> Self {
        RationalFunction::new(&self.num * &o.num, &self.den * &o.den).unwrap()
    }

    /// `None` when dividing by the zero function.
    pub fn div(&self, o: &Self) -> Option<Self> {
        if o.is_zero() {
            return None;
        }
        RationalFunction::new(&self.num * &o.den, &self.den * &o.num).ok()
    }
}

fn horner_f64(p: &QPoly, t: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for c in p.0.iter().rev() {
        acc = acc * t + rat_f64(c);
    }
    acc
}

pub(crate) fn rat_f64(r: &BigRational) -> f64 {
    Float::from_rational(r, 64).to_f64()
}

pub(crate) fn to_c64(z: &Complex) -> Complex64 {
    Complex64::new(z.re.to_f64(), z.im.to_f64())
}

/// Six-element orbit of λ under the anharmonic group.
pub fn lambda_orbit() -> [RationalFunction; 6] {
    [
        RationalFunction::from_ints(&[0, 1], &[1]),
        RationalFunction::from_ints(&[1], &[0, 1]),
        RationalFunction::from_ints(&[1, -1], &[1]),
        RationalFunction::from_ints(&[1], &[1, -1]),
        RationalFunction::from_ints(&[0, 1], &[-1, 1]),
        RationalFunction::from_ints(&[-1, 1], &[0, 1]),
    ]
}

/// A point `(x(λ), ±sqrt(x(x-1)(x-c(λ))))` on the Legendre curve with parameter `c(λ)`,
/// the branch of the square root fixed by its value at an anchor.
#[derive(Clone, Debug)]
pub struct PointExpr {
    x: RationalFunction,
    curve: RationalFunction,
    anchor: Complex64,
    y_anchor: Complex64,
    exceptional: Vec<Complex64>,
    /// Values where `y` vanishes but the point is finite (2-torsion specializations).
    branch_points: Vec<Complex64>,
}

impl PointExpr {
    /// A point on `E_λ`.
    pub fn new(x: RationalFunction, anchor: Complex64, y_anchor: Complex64) -> Result<Self> {
        PointExpr::on_curve(x, RationalFunction::lambda(), anchor, y_anchor)
    }

    /// A point on `E_{c(λ)}`.
    pub fn on_curve(x: RationalFunction, curve: RationalFunction, anchor: Complex64, y_anchor: Complex64) -> Result<Self> {
        let one = RationalFunction::from_ints(&[1], &[1]);
        if x.is_zero() || x == one || x == curve {
            return Err(Error::InvalidFamily("x is identically a root of the cubic".into()));
        }
        let (xn, xd) = x.integer_parts();
        let (cn, cd) = curve.integer_parts();
        let mut exceptional = Vec::new();
        let mut branch_points = Vec::new();
        let push_roots = |p: &ZPoly, out: &mut Vec<Complex64>| {
            if p.degree() > 0 {
                for r in p.squarefree_part().roots(64) {
                    out.push(to_c64(&r));
                }
            }
        };
        // Poles of x and of the curve parameter, and degenerate curves c ∈ {0, 1}.
        push_roots(&xd, &mut exceptional);
        push_roots(&cd, &mut exceptional);
        push_roots(&cn, &mut exceptional);
        push_roots(&(&cn - &cd), &mut exceptional);
        // x ∈ {0, 1, c}: finite points with y = 0.
        push_roots(&xn, &mut branch_points);
        push_roots(&(&xn - &xd), &mut branch_points);
        push_roots(&(&(&xn * &cd) - &(&cn * &xd)), &mut branch_points);
        let e = PointExpr { x, curve, anchor, y_anchor, exceptional, branch_points };
        if e.near_branch(anchor, 1e-12) {
            return Err(Error::InvalidFamily("anchor is a branch value".into()));
        }
        let r = e.radicand_f64(anchor);
        if !(r.re.is_finite() && r.im.is_finite()) {
            return Err(Error::InvalidFamily("anchor is a pole".into()));
        }
        let tol = 1e-6 * r.norm().max(1.0);
        if (y_anchor * y_anchor - r).norm() > tol || y_anchor.norm() < 1e-300 {
            return Err(Error::InvalidFamily(format!("anchor y does not match the curve: y^2={} vs {}", y_anchor * y_anchor, r)));
        }
        Ok(e)
    }

    pub fn x(&self) -> &RationalFunction {
        &self.x
    }

    pub fn curve(&self) -> &RationalFunction {
        &self.curve
    }

    pub fn anchor(&self) -> Complex64 {
        self.anchor
    }

    pub fn y_anchor(&self) -> Complex64 {
        self.y_anchor
    }

    /// True when this point lives on `E_λ` itself.
    pub fn on_legendre(&self) -> bool {
        self.curve == RationalFunction::lambda()
    }

    /// Parameter values where the point or its curve degenerates.
    pub fn exceptional_values(&self) -> &[Complex64] {
        &self.exceptional
    }

    /// Parameter values where the point specializes to a 2-torsion point.
    pub fn branch_values(&self) -> &[Complex64] {
        &self.branch_points
    }

    /// Integer polynomials in λ whose roots are the branch values.
    pub fn branch_polys(&self) -> Vec<ZPoly> {
        let (xn, xd) = self.x.integer_parts();
        let (cn, cd) = self.curve.integer_parts();
        [xn.clone(), &xn - &xd, &(&xn * &cd) - &(&cn * &xd)].into_iter().filter(|p| p.degree() > 0).map(|p| p.squarefree_part()).collect()
    }

    fn near_branch(&self, t: Complex64, eps: f64) -> bool {
        self.branch_points.iter().any(|e| (e - t).norm() <= eps * e.norm().max(1.0))
    }

    pub fn radicand_f64(&self, t: Complex64) -> Complex64 {
        let x = self.x.eval_f64(t);
        let c = self.curve.eval_f64(t);
        x * (x - 1.0) * (x - c)
    }

    /// `(x, c, x(x-1)(x-c))` at `t`; `None` at a pole.
    pub fn eval_parts(&self, t: &Complex) -> Option<(Complex, Complex, Complex)> {
        let x = self.x.eval(t)?;
        let c = self.curve.eval(t)?;
        let p = t.prec();
        let r = &x * (&x - Complex::one(p)) * (&x - &c);
        Some((x, c, r))
    }

    /// Branch-tracked y in double precision along the segment list; returns y at the end.
    pub(crate) fn track_f64(&self, pts: &[Complex64]) -> Result<Complex64> {
        let mut y = {
            let s = self.radicand_f64(pts[0]).sqrt();
            if (s - self.y_anchor).norm() <= (s + self.y_anchor).norm() {
                s
            } else {
                -s
            }
        };
        let mut r_prev = self.radicand_f64(pts[0]);
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mut h = 1.0f64;
            let mut done = 0.0f64;
            let mut guard = 0;
            while done < 1.0 {
                guard += 1;
                if guard > 100_000 {
                    return Err(Error::BranchAmbiguous);
                }
                let step = h.min(1.0 - done);
                let t2 = a + (b - a) * (done + step);
                let r2 = self.radicand_f64(t2);
                let last = done + step >= 1.0;
                if last && r2.norm() <= 1e-300_f64.max(1e-14 * r_prev.norm()) {
                    return Ok(Complex64::new(0.0, 0.0));
                }
                let ok = (r2 * r_prev.conj()).re > 0.0 && r2.norm() > 0.0;
                if !ok {
                    h *= 0.5;
                    if h < 1e-15 {
                        return Err(Error::BranchAmbiguous);
                    }
                    continue;
                }
                let s = r2.sqrt();
                y = if (s - y).norm() <= (s + y).norm() { s } else { -s };
                r_prev = r2;
                done += step;
                h = (h * 2.0).min(1.0);
            }
        }
        Ok(y)
    }

    /// Branch-consistent y choice: the square root of the radicand nearest `y_ref`.
    pub fn nearest_y(r: &Complex, y_ref: Complex64) -> Complex {
        let s = r.sqrt();
        let sf = to_c64(&s);
        if (sf - y_ref).norm() <= (sf + y_ref).norm() {
            s
        } else {
            -s
        }
    }
}

/// Minimum distance from the segment `[a, b]` to the point `p`.
pub(crate) fn seg_dist(a: Complex64, b: Complex64, p: Complex64) -> f64 {
    let d = b - a;
    let n = d.norm_sqr();
    if n == 0.0 {
        return (p - a).norm();
    }
    let s = ((p - a) * d.conj()).re / n;
    let s = s.clamp(0.0, 1.0);
    (a + d * s - p).norm()
}

/// A point of `E_{λ0}` in affine coordinates, or the point at infinity.
#[derive(Clone, Debug)]
pub struct AffinePoint {
    pub x: Complex,
    pub y: Complex,
    pub at_infinity: bool,
}

impl AffinePoint {
    pub fn new(x: Complex, y: Complex) -> Self {
        AffinePoint { x, y, at_infinity: false }
    }

    pub fn infinity(prec: u32) -> Self {
        AffinePoint { x: Complex::zero(prec), y: Complex::zero(prec), at_infinity: true }
    }

    pub fn neg(&self) -> Self {
        AffinePoint { x: self.x.clone(), y: -&self.y, at_infinity: self.at_infinity }
    }

    pub fn prec(&self) -> u32 {
        self.x.prec().max(self.y.prec())
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        AffinePoint { x: self.x.with_prec(prec), y: self.y.with_prec(prec), at_infinity: self.at_infinity }
    }

    /// `|y^2 - x(x-1)(x-λ0)|`; zero at infinity.
    pub fn curve_residual(&self, lambda0: &Complex) -> Float {
        if self.at_infinity {
            return Float::zero(self.prec());
        }
        let p = self.prec();
        let rhs = &self.x * (&self.x - Complex::one(p)) * (&self.x - lambda0);
        (self.y.square() - rhs).abs()
    }

    /// Max-norm distance between two points, infinity being far from every affine point.
    pub fn distance(&self, other: &AffinePoint) -> Option<Float> {
        match (self.at_infinity, other.at_infinity) {
            (true, true) => Some(Float::zero(self.prec())),
            (false, false) => Some((&self.x - &other.x).max_abs().max((&self.y - &other.y).max_abs())),
            _ => None,
        }
    }

    /// `|x / y|`, a local coordinate at infinity; zero at infinity itself.
    pub fn distance_to_infinity(&self) -> Float {
        if self.at_infinity {
            return Float::zero(self.prec());
        }
        if self.y.is_zero() {
            return self.x.abs().max(Float::one(self.prec()));
        }
        (&self.x / &self.y).abs()
    }
}

/// Evaluates `expr` at `λ0`, continuing the square root from the anchor through `path`.
pub fn eval_point(expr: &PointExpr, lambda0: &Complex, path: &[Complex64], prec: u32) -> Result<AffinePoint> {
    let l0 = to_c64(lambda0);
    let mut pts = Vec::with_capacity(path.len() + 2);
    pts.push(expr.anchor);
    pts.extend_from_slice(path);
    pts.push(l0);
    let eps = 1e-12;
    for (i, w) in pts.windows(2).enumerate() {
        for e in &expr.exceptional {
            // The anchor itself may sit on a degenerate fibre; nothing after it may.
            let from_anchor = i == 0 && (w[0] - e).norm() <= eps * e.norm().max(1.0);
            let d = if from_anchor { (w[1] - e).norm() } else { seg_dist(w[0], w[1], *e) };
            if d <= eps * e.norm().max(1.0) {
                return Err(Error::PathThroughSingularity);
            }
        }
        // Branch values may be the endpoint, never an interior waypoint.
        for e in &expr.branch_points {
            let d = seg_dist(w[0], w[1], *e);
            let at_end = i == pts.len() - 2 && (w[1] - e).norm() <= eps * e.norm().max(1.0);
            if d <= eps * e.norm().max(1.0) && !at_end {
                return Err(Error::PathThroughSingularity);
            }
        }
    }
    let y_ref = expr.track_f64(&pts)?;
    let (x, _, r) = expr.eval_parts(&lambda0.with_prec(prec)).ok_or(Error::PathThroughSingularity)?;
    let y = PointExpr::nearest_y(&r, y_ref);
    Ok(AffinePoint::new(x, y))
}

fn tolerance(prec: u32, scale: &Float) -> Float {
    scale.mul_2k(-(prec as i64) / 2)
}

/// Chord-tangent addition on `E_{λ0}`.
pub fn group_add(p: &AffinePoint, q: &AffinePoint, lambda0: &Complex, prec: u32) -> Result<AffinePoint> {
    if p.at_infinity {
        return Ok(q.with_prec(prec));
    }
    if q.at_infinity {
        return Ok(p.with_prec(prec));
    }
    let (p, q) = (p.with_prec(prec), q.with_prec(prec));
    let one = Float::one(prec);
    let scale = one.clone().max(p.x.max_abs()).max(q.x.max_abs());
    let yscale = scale.clone() * scale.sqrt();
    let tx = tolerance(prec, &scale);
    let ty = tolerance(prec, &yscale);
    let a2 = -(Complex::one(prec) + lambda0);
    let a4 = lambda0.with_prec(prec);
    if (&p.x - &q.x).max_abs() <= tx {
        if (&p.y + &q.y).max_abs() <= ty {
            return Ok(AffinePoint::infinity(prec));
        }
        if (&p.y - &q.y).max_abs() <= ty {
            return double(&p, &a2, &a4, prec, &ty);
        }
        return Err(Error::NearCancellation);
    }
    let m = (&q.y - &p.y) / (&q.x - &p.x);
    let x3 = m.square() - &a2 - &p.x - &q.x;
    let y3 = -(&p.y + &m * (&x3 - &p.x));
    Ok(AffinePoint::new(x3, y3))
}

fn double(p: &AffinePoint, a2: &Complex, a4: &Complex, prec: u32, ty: &Float) -> Result<AffinePoint> {
    if p.y.max_abs() <= *ty {
        return Ok(AffinePoint::infinity(prec));
    }
    let three_x2 = p.x.square().scale_i64(3);
    let num = three_x2 + (a2 * &p.x).mul_2k(1) + a4;
    let m = num / p.y.mul_2k(1);
    let x3 = m.square() - a2 - p.x.mul_2k(1);
    let y3 = -(&p.y + &m * (&x3 - &p.x));
    Ok(AffinePoint::new(x3, y3))
}

/// Multiplier for [`scalar_mul`]: a rational integer or a Gaussian integer `re + im·i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Multiplier {
    Int(i64),
    Gaussian(i64, i64),
}

/// The CM action `i·(x, y) = (-x, i y)` on `E_{-1}`.
pub fn cm_i(p: &AffinePoint) -> AffinePoint {
    if p.at_infinity {
        return p.clone();
    }
    AffinePoint::new(-&p.x, p.y.mul_i())
}

fn is_minus_one(lambda0: &Complex, prec: u32) -> bool {
    let d = (lambda0 + Complex::one(lambda0.prec().max(prec))).max_abs();
    d.le_pow2(-(prec as i64) / 2)
}

fn mul_int(k: i64, p: &AffinePoint, lambda0: &Complex, prec: u32) -> Result<AffinePoint> {
    let mut base = if k < 0 { p.neg() } else { p.clone() };
    let mut n = k.unsigned_abs();
    let mut acc = AffinePoint::infinity(prec);
    while n > 0 {
        if n & 1 == 1 {
            acc = group_add(&acc, &base, lambda0, prec)?;
        }
        n >>= 1;
        if n > 0 {
            base = group_add(&base, &base, lambda0, prec)?;
        }
    }
    Ok(acc)
}

/// `k·P` by double-and-add.
pub fn scalar_mul(k: Multiplier, p: &AffinePoint, lambda0: &Complex, prec: u32) -> Result<AffinePoint> {
    match k {
        Multiplier::Int(k) => mul_int(k, p, lambda0, prec),
        Multiplier::Gaussian(a, b) => {
            if b != 0 && !is_minus_one(lambda0, prec) {
                return Err(Error::CmUnsupported);
            }
            let u = mul_int(a, p, lambda0, prec)?;
            let v = mul_int(b, &cm_i(p), lambda0, prec)?;
            group_add(&u, &v, lambda0, prec)
        }
    }
}

/// `256(λ²-λ+1)³ / (λ²(λ-1)²)`.
pub fn j_invariant(lambda0: &Complex) -> Result<Complex> {
    let p = lambda0.prec();
    let one = Complex::one(p);
    let lm1 = lambda0 - &one;
    if lambda0.is_zero() || lm1.is_zero() {
        return Err(Error::SingularParameter);
    }
    let s = lambda0.square() - lambda0 + &one;
    let num = (&s * &s * &s).scale_i64(256);
    let den = (lambda0 * &lm1).square();
    Ok(num / den)
}

pub fn j_invariant_exact(lambda0: &BigRational) -> Result<BigRational> {
    let one = BigRational::one();
    let lm1 = lambda0 - &one;
    if lambda0.is_zero() || lm1.is_zero() {
        return Err(Error::SingularParameter);
    }
    let s = lambda0 * lambda0 - lambda0 + &one;
    let num = &s * &s * &s * BigRational::from_integer(256.into());
    let d = lambda0 * &lm1;
    Ok(num / (&d * &d))
}

/// Parameter region for searches.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    Disc { center: Complex64, radius: f64 },
    Annulus { center: Complex64, inner: f64, outer: f64 },
}

impl Region {
    pub fn disc(cx: f64, cy: f64, r: f64) -> Self {
        Region::Disc { center: Complex64::new(cx, cy), radius: r }
    }

    pub fn contains(&self, t: Complex64) -> bool {
        match *self {
            Region::Disc { center, radius } => (t - center).norm() <= radius,
            Region::Annulus { center, inner, outer } => {
                let d = (t - center).norm();
                d >= inner && d <= outer
            }
        }
    }

    pub fn center(&self) -> Complex64 {
        match *self {
            Region::Disc { center, .. } | Region::Annulus { center, .. } => center,
        }
    }

    pub fn outer_radius(&self) -> f64 {
        match *self {
            Region::Disc { radius, .. } => radius,
            Region::Annulus { outer, .. } => outer,
        }
    }
}

/// Homogenized division polynomials `W^{d_n} f_n(X/W)` as polynomials in λ.
struct DivisionPolys {
    x: ZPoly,
    w: ZPoly,
    b2: ZPoly,
    b4: ZPoly,
    b8: ZPoly,
    ff: ZPoly,
    memo: BTreeMap<u32, ZPoly>,
}

impl DivisionPolys {
    fn new(x: ZPoly, w: ZPoly) -> Self {
        let lam = ZPoly::x();
        let a2 = -&(&ZPoly::one() + &lam);
        let a4 = lam.clone();
        let b2 = a2.scale(&BigInt::from(4));
        let b4 = a4.scale(&BigInt::from(2));
        let b8 = -&(&a4 * &a4);
        let x2 = &x * &x;
        let w2 = &w * &w;
        let t0 = (&x2 * &x).scale(&BigInt::from(4));
        let t1 = &(&b2 * &x2) * &w;
        let t2 = (&(&b4 * &x) * &w2).scale(&BigInt::from(2));
        let ff = &(&t0 + &t1) + &t2;
        DivisionPolys { x, w, b2, b4, b8, ff, memo: BTreeMap::new() }
    }

    fn f(&mut self, n: u32) -> ZPoly {
        if let Some(v) = self.memo.get(&n) {
            return v.clone();
        }
        let (x, w) = (&self.x, &self.w);
        let v = match n {
            0 => ZPoly::zero(),
            1 | 2 => ZPoly::one(),
            3 => {
                let x2 = x * x;
                let w2 = w * w;
                let t0 = (&x2 * &x2).scale(&BigInt::from(3));
                let t1 = &(&self.b2 * &(&x2 * x)) * w;
                let t2 = &(&self.b4 * &x2) * &w2;
                let t3 = &self.b8 * &(&w2 * &w2);
                &(&(&t0 + &t1) + &t2.scale(&BigInt::from(3))) + &t3
            }
            4 => {
                let xp: Vec<ZPoly> = (0..=6).map(|k| x.pow(k)).collect();
                let wp: Vec<ZPoly> = (0..=6).map(|k| w.pow(k)).collect();
                let term = |c: &ZPoly, i: usize| &(c * &xp[i]) * &wp[6 - i];
                let two = ZPoly::constant(2.into());
                let mut acc = term(&two, 6);
                acc = &acc + &term(&self.b2, 5);
                acc = &acc + &term(&self.b4.scale(&BigInt::from(5)), 4);
                acc = &acc + &term(&self.b8.scale(&BigInt::from(10)), 2);
                acc = &acc + &term(&(&self.b2 * &self.b8), 1);
                acc = &acc + &term(&(&self.b4 * &self.b8), 0);
                acc
            }
            _ if n % 2 == 1 => {
                let m = (n - 1) / 2;
                let (fm2, fm, fm1, fp1) = (self.f(m + 2), self.f(m), self.f(m - 1), self.f(m + 1));
                let ff2 = &self.ff * &self.ff;
                let a = &fm2 * &(&fm * &(&fm * &fm));
                let b = &fm1 * &(&fp1 * &(&fp1 * &fp1));
                if m % 2 == 0 {
                    &(&ff2 * &a) - &b
                } else {
                    &a - &(&ff2 * &b)
                }
            }
            _ => {
                let m = n / 2;
                let (fm, fm2, fm1, fmm2, fp1) = (self.f(m), self.f(m + 2), self.f(m - 1), self.f(m - 2), self.f(m + 1));
                let inner = &(&fm2 * &(&fm1 * &fm1)) - &(&fmm2 * &(&fp1 * &fp1));
                &fm * &inner
            }
        };
        self.memo.insert(n, v.clone());
        v
    }

    /// Vanishes exactly where `n·P = O` (for `P ≠ O`).
    fn condition(&mut self, n: u32) -> ZPoly {
        let f = self.f(n);
        if n % 2 == 0 {
            &f * &self.ff
        } else {
            f
        }
    }
}

/// Formal x-degree of the reduced division polynomial.
fn formal_degree(n: u32) -> usize {
    let n = n as usize;
    if n % 2 == 1 {
        (n * n - 1) / 2
    } else {
        (n * n - 4) / 2 + 3
    }
}

/// Squarefree primitive polynomial in λ whose roots are exactly the λ0 ∉ {0, 1} at which
/// `expr` has exact order `n`.
pub fn torsion_condition(expr: &PointExpr, n: u32, degree_cap: usize) -> Result<ZPoly> {
    if !expr.on_legendre() {
        return Err(Error::InvalidFamily("torsion oracle needs a point on E_λ".into()));
    }
    if n < 2 {
        return Err(Error::InvalidFamily("order must be at least 2".into()));
    }
    let (xn, xd) = expr.x.integer_parts();
    let xdeg = xn.degree().max(xd.degree()).max(0) as usize;
    let bound = formal_degree(n) * (xdeg + 1);
    if bound > degree_cap {
        return Err(Error::DegreeOverflow(bound));
    }
    let mut dp = DivisionPolys::new(xn, xd);
    let cond = dp.condition(n);
    if cond.is_zero() {
        return Err(Error::InvalidFamily("point is torsion identically".into()));
    }
    if cond.degree() as usize > degree_cap {
        return Err(Error::DegreeOverflow(cond.degree() as usize));
    }
    let mut g = cond.squarefree_part();
    g = g.remove_factors_of(&ZPoly::from_i64s(&[0, 1]));
    g = g.remove_factors_of(&ZPoly::from_i64s(&[-1, 1]));
    for d in 2..n {
        if n % d == 0 {
            let c = dp.condition(d);
            if !c.is_zero() {
                g = g.remove_factors_of(&c);
            }
        }
    }
    Ok(g.primitive())
}

/// All λ0 in `region` where `n·P(λ0) = O` with exact order `n`, sorted by real then imaginary part.
pub fn division_poly_torsion_params(expr: &PointExpr, n: u32, region: &Region, prec: u32) -> Result<Vec<Complex>> {
    let g = torsion_condition(expr, n, DEFAULT_DEGREE_CAP)?;
    let mut roots: Vec<Complex> = g.roots(prec).into_iter().filter(|r| region.contains(to_c64(r))).collect();
    sort_complex(&mut roots);
    Ok(roots)
}

pub(crate) fn sort_complex(v: &mut [Complex]) {
    v.sort_by(|a, b| a.re.cmp(&b.re).then_with(|| a.im.cmp(&b.im)));
}

/// Exact rational x-coordinate of `expr` at a rational parameter.
pub fn exact_x(expr: &PointExpr, lambda0: &BigRational) -> Option<BigRational> {
    expr.x.eval_exact(lambda0)
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 192;

    fn p1() -> PointExpr {
        // (2, sqrt(2(2-λ))), branch positive real at λ = 0.
        PointExpr::new(RationalFunction::from_ints(&[2], &[1]), Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0)).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex {
        Complex::from_f64(re, im, P)
    }

    #[test]
    fn eval_point_examples() {
        let e = p1();
        assert_eq!(eval_point(&e, &c(2.0, 0.0), &[], P).unwrap_err(), Error::PathThroughSingularity);
        let q = eval_point(&e, &c(2.0, 0.0), &[Complex64::new(1.0, 0.5)], P).unwrap();
        assert!(q.y.is_zero());
        let q = eval_point(&e, &c(-2.0, 0.0), &[], P).unwrap();
        let want = Float::from_i64(8, P).sqrt();
        assert!((&q.y.re - &want).abs().le_pow2(-(P as i64) / 2));
        assert!(q.curve_residual(&c(-2.0, 0.0)).le_pow2(-(P as i64) / 2));
        // Going once around λ = 2 flips the branch.
        let loop_path = [
            Complex64::new(1.0, 0.5),
            Complex64::new(1.5, 0.0),
            Complex64::new(2.0, 1.0),
            Complex64::new(2.5, 0.0),
            Complex64::new(2.0, -1.0),
            Complex64::new(1.5, 0.0),
            Complex64::new(1.0, 0.5),
        ];
        let a = eval_point(&e, &c(-2.0, 0.0), &loop_path, P).unwrap();
        assert!((&a.y.re + &want).abs().le_pow2(-(P as i64) / 2));
    }

    #[test]
    fn path_through_singularity() {
        let e = PointExpr::new(RationalFunction::from_ints(&[3], &[1]), Complex64::new(-0.5, 0.0), Complex64::new(21f64.sqrt(), 0.0))
            .unwrap();
        assert_eq!(eval_point(&e, &c(0.5, 0.0), &[], P).unwrap_err(), Error::PathThroughSingularity);
        assert!(eval_point(&e, &c(0.5, 0.0), &[Complex64::new(0.0, 1.0)], P).is_ok());
    }

    #[test]
    fn group_law_examples() {
        let l = c(0.3, 0.7);
        let a = AffinePoint::new(c(0.0, 0.0), c(0.0, 0.0));
        let b = AffinePoint::new(c(1.0, 0.0), c(0.0, 0.0));
        let s = group_add(&a, &b, &l, P).unwrap();
        assert!((&s.x - &l).max_abs().le_pow2(-150) && s.y.max_abs().le_pow2(-150));
        let s = scalar_mul(Multiplier::Int(2), &a, &l, P).unwrap();
        assert!(s.at_infinity);
        assert!(scalar_mul(Multiplier::Int(0), &b, &l, P).unwrap().at_infinity);
    }

    #[test]
    fn cm_on_e_minus_one() {
        let l = c(-1.0, 0.0);
        let x = c(2.0, 0.0);
        let y = (x.square() * &x - &x).sqrt();
        let p = AffinePoint::new(x, y);
        let ip = scalar_mul(Multiplier::Gaussian(0, 1), &p, &l, P).unwrap();
        assert!(ip.curve_residual(&l).le_pow2(-150));
        let iip = scalar_mul(Multiplier::Gaussian(0, 1), &ip, &l, P).unwrap();
        assert!(iip.distance(&p.neg()).unwrap().le_pow2(-150));
        assert_eq!(scalar_mul(Multiplier::Gaussian(1, 1), &p, &c(2.0, 0.0), P).unwrap_err(), Error::CmUnsupported);
    }

    #[test]
    fn j_values() {
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert_eq!(j_invariant_exact(&r(-1, 1)).unwrap(), r(1728, 1));
        assert_eq!(j_invariant_exact(&r(1, 2)).unwrap(), r(1728, 1));
        let l = r(7, 3);
        assert_eq!(j_invariant_exact(&l).unwrap(), j_invariant_exact(&(r(1, 1) / &l)).unwrap());
        assert_eq!(j_invariant_exact(&r(0, 1)).unwrap_err(), Error::SingularParameter);
    }

    #[test]
    fn torsion_condition_matches_hand_computation() {
        let e = p1();
        let c3 = torsion_condition(&e, 3, DEFAULT_DEGREE_CAP).unwrap();
        assert_eq!(c3, ZPoly::from_i64s(&[-16, 8, 1]));
        let c4 = torsion_condition(&e, 4, DEFAULT_DEGREE_CAP).unwrap();
        assert_eq!(c4, &ZPoly::from_i64s(&[-4, 1]) * &ZPoly::from_i64s(&[-4, 3]));
        let c2 = torsion_condition(&e, 2, DEFAULT_DEGREE_CAP).unwrap();
        assert_eq!(c2, ZPoly::from_i64s(&[-2, 1]));
        let r = division_poly_torsion_params(&e, 2, &Region::disc(10.0, 0.0, 1.0), P).unwrap();
        assert!(r.is_empty());
    }
}
