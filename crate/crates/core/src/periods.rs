//! Period lattices of `E_λ` by the AGM, the exponential map via theta series,
//! elliptic logarithms, basis continuation, and the multiplicative logarithm.
//!
//! Conventions: with `s = (1+λ)/3`, the uniformization is
//! `x = s + 4℘(z)`, `y = 4℘'(z)`, so `dz = dx/y` and the lattice of `℘` is the
//! period lattice of `dx/y`.

use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::legendre::{to_c64, AffinePoint};
use crate::mp::{Complex, Float};

/// Extra bits carried internally above the requested precision.
pub const GUARD_BITS: u32 = 24;

/// Ordered period pair with `Im(g/f) > 0`.
#[derive(Clone, Debug)]
pub struct PeriodBasis {
    pub f: Complex,
    pub g: Complex,
    pub lambda: Complex,
}

impl PeriodBasis {
    pub fn prec(&self) -> u32 {
        self.f.prec().min(self.g.prec())
    }

    pub fn tau(&self) -> Complex {
        &self.g / &self.f
    }

    /// Real coordinates `(p, q)` with `z = p f + q g`.
    pub fn coords(&self, z: &Complex) -> (Float, Float) {
        real_coords(z, &self.f, &self.g)
    }

    pub fn combine(&self, p: &Float, q: &Float) -> Complex {
        self.f.scale(p) + self.g.scale(q)
    }

    /// Same lattice, basis transformed by the integer matrix `[[a, b], [c, d]]`:
    /// `f' = a f + b g`, `g' = c f + d g`.
    pub fn transform(&self, m: [[i64; 2]; 2]) -> PeriodBasis {
        PeriodBasis {
            f: self.f.scale_i64(m[0][0]) + self.g.scale_i64(m[0][1]),
            g: self.f.scale_i64(m[1][0]) + self.g.scale_i64(m[1][1]),
            lambda: self.lambda.clone(),
        }
    }

    /// Representative of `z` modulo the lattice with coordinates in `[-1/2, 1/2)`.
    pub fn reduce(&self, z: &Complex) -> Complex {
        let (p, q) = self.coords(z);
        let (m, n) = (p.round_int(), q.round_int());
        let prec = z.prec();
        z - self.f.scale(&Float::from_bigint(&m, prec)) - self.g.scale(&Float::from_bigint(&n, prec))
    }
}

/// `(p, q)` solving `z = p f + q g` over the reals.
pub(crate) fn real_coords(z: &Complex, f: &Complex, g: &Complex) -> (Float, Float) {
    // Δ = f ḡ − f̄ g is purely imaginary; use its imaginary part directly.
    let d = (f * &g.conj()).im.mul_2k(1);
    let p = (z * &g.conj()).im.mul_2k(1) / &d;
    let q = -((z * &f.conj()).im.mul_2k(1) / &d);
    (p, q)
}

fn right_choice(a: &Complex, b: Complex) -> Complex {
    let minus = (a - &b).norm_sqr();
    let plus = (a + &b).norm_sqr();
    match minus.cmp(&plus) {
        core::cmp::Ordering::Less => b,
        core::cmp::Ordering::Greater => -b,
        core::cmp::Ordering::Equal => {
            if b.re.is_negative() {
                -b
            } else {
                b
            }
        }
    }
}

/// Arithmetic–geometric mean with the right choice of square root at each step.
pub fn agm(a: &Complex, b: &Complex, prec: u32) -> Result<Complex> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::ZeroInput);
    }
    let wp = prec + 16;
    let mut a = a.with_prec(wp);
    let mut b = right_choice(&a, b.with_prec(wp));
    for _ in 0..(4 * prec as usize) {
        let d = (&a - &b).max_abs();
        let scale = a.max_abs();
        if d.is_zero() || d.lead_exp() <= scale.lead_exp() - prec as i64 {
            return Ok(a.with_prec(prec));
        }
        let a1 = (&a + &b).mul_2k(-1);
        let b1 = right_choice(&a1, (&a * &b).sqrt());
        a = a1;
        b = b1;
    }
    Err(Error::NonConvergence)
}

/// Gauss reduction of a lattice basis: `|f| <= |g|`, `|Re(g/f)| <= 1/2`, `Im(g/f) > 0`.
fn gauss_reduce(mut f: Complex, mut g: Complex) -> (Complex, Complex) {
    for _ in 0..10_000 {
        if g.norm_sqr() < f.norm_sqr() {
            core::mem::swap(&mut f, &mut g);
        }
        let m = (&g / &f).re.round_int();
        if m.is_zero() {
            break;
        }
        let prec = f.prec();
        g = &g - f.scale(&Float::from_bigint(&m, prec));
        if g.norm_sqr() >= f.norm_sqr() {
            break;
        }
    }
    if (&g / &f).im.is_negative() {
        g = -g;
    }
    (f, g)
}

/// Minimum distance to `{0, 1}` below which parameters count as near-singular.
pub fn default_margin(prec: u32) -> f64 {
    libm::ldexp(1.0, -(prec as i32) / 8)
}

/// Period basis of `E_{λ0}` from AGMs of square roots of branch-point differences,
/// Gauss-reduced and oriented so that `Im(g/f) > 0`; a real-positive `f` is preferred.
pub fn period_basis(lambda0: &Complex, prec: u32) -> Result<PeriodBasis> {
    period_basis_with_margin(lambda0, prec, default_margin(prec))
}

pub fn period_basis_with_margin(lambda0: &Complex, prec: u32, margin: f64) -> Result<PeriodBasis> {
    let l = to_c64(lambda0);
    if lambda0.is_zero() || (lambda0 - Complex::one(lambda0.prec())).is_zero() {
        return Err(Error::SingularParameter);
    }
    if l.norm() < margin || (l - 1.0).norm() < margin {
        return Err(Error::NearSingular);
    }
    // Cancellation near 0 or 1 costs about log2(1/dist) bits.
    let dist = l.norm().min((l - 1.0).norm());
    let extra = (-libm::log2(dist)).max(0.0) as u32;
    let wp = prec + GUARD_BITS + extra;
    let lam = lambda0.with_prec(wp);
    let roots = [Complex::zero(wp), Complex::one(wp), lam.clone()];
    let two_pi = Float::pi(wp).mul_2k(1);
    let mut cands = Vec::with_capacity(3);
    for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        let a = (&roots[i] - &roots[k]).sqrt();
        let b = (&roots[i] - &roots[j]).sqrt();
        let m = agm(&a, &b, wp)?;
        cands.push(Complex::from_real(two_pi.clone()) / m);
    }
    // The pair with the smallest nonzero covolume is a basis; the third must be integral in it.
    let mut best: Option<(Float, usize, usize)> = None;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let cov = (&cands[i].conj() * &cands[j]).im.abs();
        let scale = cands[i].norm_sqr().max(cands[j].norm_sqr());
        if cov.lead_exp() < scale.lead_exp() - (prec as i64) / 2 {
            continue;
        }
        if best.as_ref().is_none_or(|(c, _, _)| cov < *c) {
            best = Some((cov, i, j));
        }
    }
    let (_, i, j) = best.ok_or(Error::DegenerateBasis)?;
    let (f, g) = gauss_reduce(cands[i].clone(), cands[j].clone());
    let k = 3 - i - j;
    let (p, q) = real_coords(&cands[k], &f, &g);
    let tol = -(prec as i64) / 2;
    if !p.dist_to_int().le_pow2(tol) || !q.dist_to_int().le_pow2(tol) {
        return Err(Error::NonConvergence);
    }
    let (mut f, mut g) = (f, g);
    if f.re.is_negative() {
        f = -f;
        g = -g;
    }
    Ok(PeriodBasis { f: f.with_prec(prec + GUARD_BITS), g: g.with_prec(prec + GUARD_BITS), lambda: lambda0.clone() })
}

/// Moves `τ` into the standard fundamental domain.
/// Returns `(τ', M)` with `τ' = (aτ + b)/(cτ + d)` for `M = [[a, b], [c, d]]`.
pub fn tau_reduce(basis: &PeriodBasis) -> (Complex, [[i64; 2]; 2]) {
    let mut tau = basis.tau();
    let prec = tau.prec();
    let mut m = [[1i64, 0], [0, 1]];
    let one = Float::one(prec);
    for _ in 0..10_000 {
        let n = tau.re.round_int().to_i64().unwrap_or(0);
        if n != 0 {
            tau = &tau - Complex::from_i64(n, prec);
            m = [[m[0][0] - n * m[1][0], m[0][1] - n * m[1][1]], m[1]];
        }
        if tau.norm_sqr() < one {
            tau = -tau.recip();
            m = [[-m[1][0], -m[1][1]], m[0]];
        } else {
            break;
        }
    }
    (tau, m)
}

/// Precomputed theta data for evaluating `℘` and `℘'` on one lattice.
#[derive(Clone, Debug)]
pub struct LatticeContext {
    pub basis: PeriodBasis,
    prec: u32,
    /// Reduced basis actually used in the series.
    fr: Complex,
    gr: Complex,
    s: Complex,
    q: Complex,
    a: Complex,
    e3: Complex,
    g2: Complex,
    wp_prefactor: Complex,
    dwp_prefactor: Complex,
    shadow: LatticeF64,
}

/// Double-precision lattice with theta data: starting values and cheap continuation.
#[derive(Clone, Copy, Debug)]
pub struct LatticeF64 {
    /// Basis as supplied.
    pub f: Complex64,
    pub g: Complex64,
    pub lambda: Complex64,
    fr: Complex64,
    gr: Complex64,
    s: Complex64,
    q: Complex64,
    a: Complex64,
    e3: Complex64,
    wp_pre: Complex64,
    dwp_pre: Complex64,
    g2: Complex64,
}

struct ThetaSums {
    th1: Complex,
    th2: Complex,
    th3: Complex,
    th4: Complex,
}

fn theta_terms(log2_q: f64, log2_e: f64, wp: u32) -> usize {
    // |q|^{n^2} |E|^{2n+1} < 2^{-wp}
    let mut n = 1usize;
    while n < 200 {
        let nn = n as f64;
        if log2_q * nn * nn + log2_e.abs() * (2.0 * nn + 1.0) < -(wp as f64) - 8.0 {
            break;
        }
        n += 1;
    }
    n
}

/// `θ̃1, θ̃2, θ3, θ4` at `v` (the nome powers `q^{1/4}` stripped from θ1, θ2).
fn theta_series(v: &Complex, q: &Complex, wp: u32) -> ThetaSums {
    let e = v.mul_i().exp();
    let einv = e.recip();
    let e2 = e.square();
    let e2inv = einv.square();
    let log2_q = libm::log2(to_c64(q).norm().max(1e-300));
    let log2_e = libm::log2(to_c64(&e).norm().max(1e-300));
    let nterms = theta_terms(log2_q, log2_e, wp);
    let one = Complex::one(wp);
    // Odd harmonics: E^{2n+1}, E^{-(2n+1)} with weights q^{n(n+1)}.
    let mut po = e.clone();
    let mut ni = einv.clone();
    let mut qw = one.clone();
    let mut qstep = q.square();
    let mut s1 = Complex::zero(wp);
    let mut s2 = Complex::zero(wp);
    // Even harmonics: E^{2n}, E^{-2n} with weights q^{n^2}.
    let mut pe = e2.clone();
    let mut ne = e2inv.clone();
    let mut qe = q.clone();
    let mut qestep = q.mul_2k(0) * q.square();
    let mut s3 = Complex::zero(wp);
    let mut s4 = Complex::zero(wp);
    for n in 0..=nterms {
        let sin_like = &po - &ni;
        let cos_like = &po + &ni;
        let t1 = &qw * &sin_like;
        let t2 = &qw * &cos_like;
        if n % 2 == 0 {
            s1 += &t1;
        } else {
            s1 -= &t1;
        }
        s2 += &t2;
        if n >= 1 {
            let c = &pe + &ne;
            let t = &qe * &c;
            s3 += &t;
            if n % 2 == 1 {
                s4 -= &t;
            } else {
                s4 += &t;
            }
            qe = &qe * &qestep;
            qestep = &qestep * &q.square();
            pe = &pe * &e2;
            ne = &ne * &e2inv;
        }
        qw = &qw * &qstep;
        qstep = &qstep * &q.square();
        po = &po * &e2;
        ni = &ni * &e2inv;
    }
    // 2 sin(x) = -i (E - 1/E), 2 cos(x) = E + 1/E.
    let th1 = -s1.mul_i();
    ThetaSums { th1, th2: s2, th3: &one + &s3, th4: &one + &s4 }
}

fn theta_series_f64(v: Complex64, q: Complex64) -> (Complex64, Complex64, Complex64, Complex64) {
    let i = Complex64::new(0.0, 1.0);
    let e = (i * v).exp();
    let einv = 1.0 / e;
    let (e2, e2i) = (e * e, einv * einv);
    let nterms = theta_terms(libm::log2(q.norm().max(1e-300)), libm::log2(e.norm().max(1e-300)), 53);
    let (mut po, mut ni, mut qw, mut qstep) = (e, einv, Complex64::new(1.0, 0.0), q * q);
    let (mut pe, mut ne, mut qe, mut qestep) = (e2, e2i, q, q * q * q);
    let (mut s1, mut s2, mut s3, mut s4) = (Complex64::default(), Complex64::default(), Complex64::default(), Complex64::default());
    for n in 0..=nterms {
        let t1 = qw * (po - ni);
        let t2 = qw * (po + ni);
        if n % 2 == 0 {
            s1 += t1;
        } else {
            s1 -= t1;
        }
        s2 += t2;
        if n >= 1 {
            let t = qe * (pe + ne);
            s3 += t;
            if n % 2 == 1 {
                s4 -= t;
            } else {
                s4 += t;
            }
            qe *= qestep;
            qestep *= q * q;
            pe *= e2;
            ne *= e2i;
        }
        qw *= qstep;
        qstep *= q * q;
        po *= e2;
        ni *= e2i;
    }
    (-s1 * i, s2, 1.0 + s3, 1.0 + s4)
}

impl LatticeContext {
    pub fn new(basis: &PeriodBasis) -> Self {
        let prec = basis.prec();
        let wp = prec;
        let (fr, gr) = gauss_reduce(basis.f.with_prec(wp), basis.g.with_prec(wp));
        let lam = basis.lambda.with_prec(wp);
        let one = Complex::one(wp);
        let s = (&one + &lam).scale(&Float::from_i64(3, wp).recip());
        let pi = Float::pi(wp);
        let tau = &gr / &fr;
        let q = tau.scale(&pi).mul_i().exp();
        let a = Complex::from_real(pi.clone()) / &fr;
        let th0 = theta_series(&Complex::zero(wp), &q, wp);
        let (t2, t3, t4) = (th0.th2, th0.th3, th0.th4);
        let a2 = a.square();
        let third = Float::from_i64(3, wp).recip();
        let t2_4 = &q * t2.square().square();
        let e3 = -(a2.scale(&third) * (&t2_4 + t3.square().square()));
        let wp_prefactor = &a2 * (&t2 * &t3).square();
        let dwp_prefactor = -(&a2 * &a * (&t2 * &t3 * &t4).square()).mul_2k(1);
        // g2 from the curve: y² = X³ + A X + B with A = λ - 3s², and g2 = -A/4.
        let big_a = &lam - s.square().scale_i64(3);
        let g2 = -big_a.mul_2k(-2);
        let shadow = LatticeF64 {
            f: to_c64(&fr),
            g: to_c64(&gr),
            lambda: to_c64(&lam),
            fr: to_c64(&fr),
            gr: to_c64(&gr),
            s: to_c64(&s),
            q: to_c64(&q),
            a: to_c64(&a),
            e3: to_c64(&e3),
            wp_pre: to_c64(&wp_prefactor),
            dwp_pre: to_c64(&dwp_prefactor),
            g2: to_c64(&g2),
        };
        LatticeContext { basis: basis.clone(), prec, fr, gr, s, q, a, e3, g2, wp_prefactor, dwp_prefactor, shadow }
    }

    pub fn for_lambda(lambda0: &Complex, prec: u32) -> Result<Self> {
        Ok(LatticeContext::new(&period_basis(lambda0, prec)?))
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn lambda(&self) -> &Complex {
        &self.basis.lambda
    }

    fn reduce_internal(&self, z: &Complex) -> Complex {
        let (p, q) = real_coords(z, &self.fr, &self.gr);
        let prec = self.prec;
        z - self.fr.scale(&Float::from_bigint(&p.round_int(), prec)) - self.gr.scale(&Float::from_bigint(&q.round_int(), prec))
    }

    /// `(℘(z), ℘'(z))`, or `None` when `z` is within `2^{-prec/2}|f|` of a lattice point.
    pub fn wp(&self, z: &Complex) -> Option<(Complex, Complex)> {
        let wp = self.prec;
        let z = self.reduce_internal(&z.with_prec(wp));
        if z.max_abs().lead_exp() <= self.fr.max_abs().lead_exp() - (wp as i64) / 2 {
            return None;
        }
        let v = &z * &self.a;
        let th = theta_series(&v, &self.q, wp);
        let r = &th.th4 / &th.th1;
        let w = &self.e3 + &self.wp_prefactor * r.square();
        let th1_3 = th.th1.square() * &th.th1;
        let dw = &self.dwp_prefactor * &th.th2 * &th.th3 * &th.th4 / th1_3;
        Some((w, dw))
    }

    /// The point of `E_λ` with logarithm `z`; lattice points map to infinity.
    pub fn exp_map(&self, z: &Complex) -> AffinePoint {
        let out = self.prec.saturating_sub(GUARD_BITS).max(self.prec / 2);
        match self.wp(z) {
            None => AffinePoint::infinity(out),
            Some((w, dw)) => AffinePoint::new((&self.s + w.mul_2k(2)).with_prec(out), dw.mul_2k(2).with_prec(out)),
        }
    }

    /// Half-periods `f/2`, `g/2`, `(f+g)/2` of the reduced basis and their `℘` values.
    pub fn half_periods(&self) -> Vec<(Complex, Complex)> {
        let wp = self.prec;
        [self.fr.mul_2k(-1), self.gr.mul_2k(-1), (&self.fr + &self.gr).mul_2k(-1)]
            .into_iter()
            .map(|h| {
                let w = self.wp(&h).map(|(w, _)| w).unwrap_or_else(|| Complex::zero(wp));
                (h, w)
            })
            .collect()
    }

    pub fn shadow(&self) -> &LatticeF64 {
        &self.shadow
    }

    /// An elliptic logarithm of `(x, y)`; with `hint`, Newton starts there first.
    pub fn log_xy(&self, x: &Complex, y: &Complex, hint: Option<&Complex>) -> Result<Complex> {
        let wp = self.prec;
        let x = x.with_prec(wp);
        let y = y.with_prec(wp);
        let target = (&x - &self.s).mul_2k(-2);
        let dtarget = y.mul_2k(-2);
        let scale = Float::one(wp).max(target.max_abs());
        let dscale = Float::one(wp).max(dtarget.max_abs());
        if dtarget.max_abs().lead_exp() <= dscale.lead_exp() - wp as i64 + 8 {
            let halves = self.half_periods();
            let best = halves
                .iter()
                .min_by(|a, b| (&a.1 - &target).max_abs().cmp(&(&b.1 - &target).max_abs()))
                .unwrap();
            return Ok(best.0.clone());
        }
        // Near O, ℘ ~ z^{-2} and ℘' ~ -2z^{-3}, so z ≈ -2℘/℘' with relative error O(z^4).
        let fexp = self.fr.max_abs().lead_exp();
        let near_o = target.max_abs().lead_exp() > 8 - 2 * fexp;
        let mut z = if near_o {
            let z0 = -(&target / &dtarget).mul_2k(1);
            if z0.max_abs().lead_exp() <= fexp - (wp as i64) / 4 - 2 {
                return Ok(z0);
            }
            z0
        } else {
            let z0 = self.shadow.log(to_c64(&x), to_c64(&y), hint.map(to_c64)).ok_or(Error::NonConvergence)?;
            Complex::from_f64(z0.re, z0.im, wp)
        };
        // ℘-Newton unless the point is close to 2-torsion, where ℘'-Newton is better conditioned.
        let ddw_t = target.square().scale_i64(6) - self.g2.mul_2k(-1);
        let use_dwp = {
            let lhs = dtarget.max_abs() / &scale;
            let rhs = ddw_t.max_abs() / &dscale;
            lhs.lead_exp() + 4 < rhs.lead_exp()
        };
        let mut bits = 40i64;
        let mut iters = 0;
        while iters < 40 {
            iters += 1;
            let (w, dw) = self.wp(&z).ok_or(Error::NonConvergence)?;
            let step = if use_dwp {
                let ddw = w.square().scale_i64(6) - self.g2.mul_2k(-1);
                (&dw - &dtarget) / ddw
            } else {
                (&w - &target) / &dw
            };
            z = &z - &step;
            let sz = step.max_abs();
            let zs = Float::one(wp).max(self.fr.max_abs());
            if sz.is_zero() || sz.lead_exp() < zs.lead_exp() - wp as i64 + 4 {
                break;
            }
            if bits >= 2 * wp as i64 {
                break;
            }
            bits *= 2;
        }
        // Sign from ℘'.
        if !use_dwp {
            let (_, dw) = self.wp(&z).ok_or(Error::NonConvergence)?;
            if (&dw + &dtarget).max_abs() < (&dw - &dtarget).max_abs() {
                z = -z;
            }
        }
        Ok(z)
    }

    /// Elliptic logarithm of an affine point, reduced modulo the user basis.
    pub fn elliptic_log(&self, p: &AffinePoint, hint: Option<&Complex>) -> Result<Complex> {
        if p.at_infinity {
            return Err(Error::PointAtInfinity);
        }
        let z = self.log_xy(&p.x, &p.y, hint)?;
        Ok(self.basis.reduce(&z))
    }

    /// Representative of `±z + lattice` nearest `z_ref` (sign flip only if `allow_sign`).
    pub fn nearest_representative(&self, z: &Complex, z_ref: &Complex, allow_sign: bool) -> Complex {
        let pick = |w: &Complex| {
            let d = w - z_ref;
            let r = self.basis.reduce(&d);
            z_ref + &r
        };
        let a = pick(z);
        if !allow_sign {
            return a;
        }
        let b = pick(&-z);
        if (&a - z_ref).norm_sqr() <= (&b - z_ref).norm_sqr() {
            a
        } else {
            b
        }
    }
}

impl LatticeF64 {
    pub fn new(f: Complex64, g: Complex64, lambda: Complex64) -> Self {
        let (fr, gr) = gauss_reduce_f64(f, g);
        let s = (1.0 + lambda) / 3.0;
        let pi = core::f64::consts::PI;
        let i = Complex64::new(0.0, 1.0);
        let q = (i * pi * gr / fr).exp();
        let a = pi / fr;
        let (_, t2, t3, t4) = theta_series_f64(Complex64::new(0.0, 0.0), q);
        let a2 = a * a;
        let e3 = -(a2 / 3.0) * (q * t2 * t2 * t2 * t2 + t3 * t3 * t3 * t3);
        let wp_pre = a2 * (t2 * t3) * (t2 * t3);
        let dwp_pre = -2.0 * a2 * a * (t2 * t3 * t4) * (t2 * t3 * t4);
        let g2 = -(lambda - 3.0 * s * s) * 0.25;
        LatticeF64 { f, g, lambda, fr, gr, s, q, a, e3, wp_pre, dwp_pre, g2 }
    }

    /// `(℘(z), ℘'(z))`.
    pub fn wp(&self, z: Complex64) -> (Complex64, Complex64) {
        let z = reduce_f64(z, self.fr, self.gr);
        let v = z * self.a;
        let (t1, t2, t3, t4) = theta_series_f64(v, self.q);
        let r = t4 / t1;
        let w = self.e3 + self.wp_pre * r * r;
        let dw = self.dwp_pre * t2 * t3 * t4 / (t1 * t1 * t1);
        (w, dw)
    }

    /// The point `(s + 4℘(z), 4℘'(z))`.
    pub fn exp(&self, z: Complex64) -> (Complex64, Complex64) {
        let (w, dw) = self.wp(z);
        (self.s + 4.0 * w, 4.0 * dw)
    }

    /// Real coordinates of `z` in the supplied basis.
    pub fn coords(&self, z: Complex64) -> (f64, f64) {
        coords_f64(z, self.f, self.g)
    }

    /// The translate of `z` by a period nearest `z_ref`.
    pub fn nearest_translate(&self, z: Complex64, z_ref: Complex64) -> Complex64 {
        z_ref + reduce_f64(z - z_ref, self.f, self.g)
    }

    /// An elliptic logarithm of `(x, y)` in double precision; Newton from `hint` first,
    /// then from the best nodes of a coarse grid.
    pub fn log(&self, x: Complex64, y: Complex64, hint: Option<Complex64>) -> Option<Complex64> {
        let t = (x - self.s) * 0.25;
        let d = y * 0.25;
        let scale = t.norm().max(1.0);
        let dscale = d.norm().max(1.0);
        let g2 = self.g2;
        let ddw_t = 6.0 * t * t - g2 * 0.5;
        let use_dwp = d.norm() / scale * 16.0 < ddw_t.norm() / dscale;
        let newton = |mut z: Complex64| -> Option<Complex64> {
            for _ in 0..60 {
                let (w, dw) = self.wp(z);
                let step = if use_dwp { (dw - d) / (6.0 * w * w - g2 * 0.5) } else { (w - t) / dw };
                if !(step.re.is_finite() && step.im.is_finite()) {
                    return None;
                }
                z -= step;
                if step.norm() < 1e-15 * self.fr.norm().max(1.0) {
                    break;
                }
            }
            let (w, dw) = self.wp(z);
            if use_dwp {
                if (dw - d).norm() > 1e-8 * dscale || (w - t).norm() > 1e-4 * scale {
                    return None;
                }
                Some(z)
            } else {
                if (w - t).norm() > 1e-9 * scale {
                    return None;
                }
                if (dw + d).norm() < (dw - d).norm() {
                    Some(-z)
                } else {
                    Some(z)
                }
            }
        };
        if let Some(h) = hint {
            if let Some(z) = newton(h) {
                return Some(z);
            }
        }
        let (f, g) = (self.fr, self.gr);
        let k = 12usize;
        let mut scored: Vec<(f64, Complex64)> = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                let u = (i as f64 + 0.5) / k as f64 - 0.5;
                let v = (j as f64 + 0.5) / k as f64 - 0.5;
                let z = f * u + g * v;
                let (w, dw) = self.wp(z);
                let err = (w - t).norm() / scale + 0.25 * (dw - d).norm() / dscale;
                if err.is_finite() {
                    scored.push((err, z));
                }
            }
        }
        scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal));
        for &(_, z) in scored.iter().take(8) {
            if let Some(z) = newton(z) {
                return Some(z);
            }
        }
        None
    }

}

pub(crate) fn coords_f64(z: Complex64, f: Complex64, g: Complex64) -> (f64, f64) {
    let d = (f * g.conj()).im;
    ((z * g.conj()).im / d, -(z * f.conj()).im / d)
}

fn reduce_f64(z: Complex64, f: Complex64, g: Complex64) -> Complex64 {
    let (p, q) = coords_f64(z, f, g);
    z - f * libm::round(p) - g * libm::round(q)
}

fn gauss_reduce_f64(mut f: Complex64, mut g: Complex64) -> (Complex64, Complex64) {
    for _ in 0..1000 {
        if g.norm_sqr() < f.norm_sqr() {
            core::mem::swap(&mut f, &mut g);
        }
        let m = libm::round((g / f).re);
        if m == 0.0 {
            break;
        }
        g -= f * m;
        if g.norm_sqr() >= f.norm_sqr() {
            break;
        }
    }
    if (g / f).im < 0.0 {
        g = -g;
    }
    (f, g)
}

fn agm_f64(mut a: Complex64, mut b: Complex64) -> Option<Complex64> {
    let pick = |a: Complex64, b: Complex64| if (a - b).norm_sqr() > (a + b).norm_sqr() || ((a - b).norm_sqr() == (a + b).norm_sqr() && b.re < 0.0) { -b } else { b };
    b = pick(a, b);
    for _ in 0..200 {
        if (a - b).norm() <= 1e-15 * a.norm() {
            return Some(a);
        }
        let a1 = (a + b) * 0.5;
        b = pick(a1, (a * b).sqrt());
        a = a1;
    }
    None
}

/// Double-precision analogue of [`period_basis`] (reduced, `Im(g/f) > 0`).
pub fn period_basis_f64(lambda: Complex64) -> Result<(Complex64, Complex64)> {
    if lambda.norm() < 1e-12 || (lambda - 1.0).norm() < 1e-12 {
        return Err(Error::NearSingular);
    }
    let roots = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), lambda];
    let mut c = [Complex64::default(); 3];
    for (n, (i, j, k)) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)].into_iter().enumerate() {
        let m = agm_f64((roots[i] - roots[k]).sqrt(), (roots[i] - roots[j]).sqrt()).ok_or(Error::NonConvergence)?;
        c[n] = 2.0 * core::f64::consts::PI / m;
    }
    let mut best: Option<(f64, usize, usize)> = None;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let cov = (c[i].conj() * c[j]).im.abs();
        if cov < 1e-9 * c[i].norm_sqr().max(c[j].norm_sqr()) {
            continue;
        }
        if best.is_none_or(|(b, _, _)| cov < b) {
            best = Some((cov, i, j));
        }
    }
    let (_, i, j) = best.ok_or(Error::DegenerateBasis)?;
    let (mut f, mut g) = gauss_reduce_f64(c[i], c[j]);
    if f.re < 0.0 {
        f = -f;
        g = -g;
    }
    Ok((f, g))
}

/// Matches each reference period to the nearest vector of a fresh lattice (double precision).
pub fn align_f64(fresh: (Complex64, Complex64), reference: (Complex64, Complex64)) -> Result<(Complex64, Complex64)> {
    let (f, g) = fresh;
    let mut out = [Complex64::default(); 2];
    let mut m = [[0i64; 2]; 2];
    for (k, w) in [reference.0, reference.1].into_iter().enumerate() {
        let (p, q) = coords_f64(w, f, g);
        let (p0, q0) = (libm::round(p) as i64, libm::round(q) as i64);
        let mut best = (f64::INFINITY, 0, 0);
        let mut second = f64::INFINITY;
        for dp in -1..=1 {
            for dq in -1..=1 {
                let (a, b) = (p0 + dp, q0 + dq);
                let d = (f * a as f64 + g * b as f64 - w).norm();
                if d < best.0 {
                    second = best.0;
                    best = (d, a, b);
                } else if d < second {
                    second = d;
                }
            }
        }
        if second < 2.0 * best.0 {
            return Err(Error::StepTooLarge);
        }
        m[k] = [best.1, best.2];
        out[k] = f * best.1 as f64 + g * best.2 as f64;
    }
    if m[0][0] * m[1][1] - m[0][1] * m[1][0] != 1 {
        return Err(Error::StepTooLarge);
    }
    Ok((out[0], out[1]))
}

/// Elliptic logarithm bundled with its inputs.
#[derive(Clone, Debug)]
pub struct LogRecord {
    pub z: Complex,
    pub point: AffinePoint,
    pub basis: PeriodBasis,
    pub path_id: u32,
}

/// `exp` of the Lie algebra of `E_{λ0}` for the lattice of `basis`.
pub fn exp_map(z: &Complex, basis: &PeriodBasis, prec: u32) -> AffinePoint {
    let b = PeriodBasis {
        f: basis.f.with_prec(prec + GUARD_BITS),
        g: basis.g.with_prec(prec + GUARD_BITS),
        lambda: basis.lambda.with_prec(prec + GUARD_BITS),
    };
    LatticeContext::new(&b).exp_map(z)
}

/// Elliptic logarithm of `p`, reduced into the centred fundamental parallelogram of `basis`.
pub fn elliptic_log(p: &AffinePoint, basis: &PeriodBasis, prec: u32) -> Result<LogRecord> {
    let b = PeriodBasis {
        f: basis.f.with_prec(prec + GUARD_BITS),
        g: basis.g.with_prec(prec + GUARD_BITS),
        lambda: basis.lambda.with_prec(prec + GUARD_BITS),
    };
    let ctx = LatticeContext::new(&b);
    let z = ctx.elliptic_log(p, None)?;
    Ok(LogRecord { z, point: p.clone(), basis: basis.clone(), path_id: 0 })
}

/// Aligns a freshly computed basis with a nearby reference basis of a neighbouring fibre.
///
/// Each reference period is matched to the nearest lattice vector of the fresh lattice;
/// `StepTooLarge` if the second-nearest candidate is within a factor 2.
pub fn align_basis(fresh: &PeriodBasis, reference: &PeriodBasis) -> Result<PeriodBasis> {
    let prec = fresh.prec();
    let mut out = [Complex::zero(prec), Complex::zero(prec)];
    let mut m = [[0i64; 2]; 2];
    for (k, w) in [&reference.f, &reference.g].into_iter().enumerate() {
        let (p, q) = fresh.coords(w);
        let (p0, q0) = (p.round_i64().ok_or(Error::StepTooLarge)?, q.round_i64().ok_or(Error::StepTooLarge)?);
        let mut dists: Vec<(Float, i64, i64)> = Vec::with_capacity(9);
        for dp in -1..=1 {
            for dq in -1..=1 {
                let (a, b) = (p0 + dp, q0 + dq);
                let cand = fresh.f.scale_i64(a) + fresh.g.scale_i64(b);
                dists.push(((&cand - w).abs(), a, b));
            }
        }
        dists.sort_by(|x, y| x.0.cmp(&y.0));
        if dists[1].0 < dists[0].0.mul_2k(1) {
            return Err(Error::StepTooLarge);
        }
        m[k] = [dists[0].1, dists[0].2];
        out[k] = fresh.f.scale_i64(dists[0].1) + fresh.g.scale_i64(dists[0].2);
    }
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det != 1 {
        return Err(Error::StepTooLarge);
    }
    let [f, g] = out;
    Ok(PeriodBasis { f, g, lambda: fresh.lambda.clone() })
}

/// Continues `basis` along the waypoints with steps `|Δλ| <= dist(λ, {0,1})/8`.
pub fn continue_basis(basis: &PeriodBasis, path: &[Complex64], prec: u32) -> Result<PeriodBasis> {
    let mut cur = basis.clone();
    let mut here = to_c64(&basis.lambda);
    for &target in path {
        loop {
            let dist = here.norm().min((here - 1.0).norm());
            let max_step = dist / 8.0;
            let remaining = target - here;
            let next = if remaining.norm() <= max_step {
                target
            } else {
                here + remaining * (max_step / remaining.norm())
            };
            let lam = Complex::from_f64(next.re, next.im, prec + GUARD_BITS);
            let fresh = period_basis(&lam, prec)?;
            cur = align_basis(&fresh, &cur)?;
            here = next;
            if next == target {
                break;
            }
        }
    }
    Ok(cur)
}

/// Integer matrix `M` with `(f', g') = M (f, g)` for two bases of the same lattice;
/// `None` if the entries are not within `2^{-prec/2}` of integers.
pub fn basis_change(from: &PeriodBasis, to: &PeriodBasis, prec: u32) -> Option<[[i64; 2]; 2]> {
    let tol = -(prec as i64) / 2;
    let mut m = [[0i64; 2]; 2];
    for (k, w) in [&to.f, &to.g].into_iter().enumerate() {
        let (p, q) = from.coords(w);
        if !p.dist_to_int().le_pow2(tol) || !q.dist_to_int().le_pow2(tol) {
            return None;
        }
        m[k] = [p.round_i64()?, q.round_i64()?];
    }
    Some(m)
}

/// `u = e^r e^{2πi s}` with `s ∈ [0, 1)`.
#[derive(Clone, Debug)]
pub struct MultLog {
    pub r: Float,
    pub s: Float,
}

impl MultLog {
    /// The logarithm `r + 2πi s`.
    pub fn value(&self) -> Complex {
        let prec = self.s.prec();
        Complex::new(self.r.clone(), self.s.clone() * Float::pi(prec).mul_2k(1))
    }
}

pub fn mult_log(u: &Complex) -> Result<MultLog> {
    if u.is_zero() {
        return Err(Error::ZeroInput);
    }
    let prec = u.prec();
    let r = u.norm_sqr().ln().mul_2k(-1);
    let two_pi = Float::pi(prec + 8).mul_2k(1);
    let mut s = u.arg().with_prec(prec + 8) / &two_pi;
    if s.is_negative() {
        s = s + Float::one(prec);
    }
    if s >= Float::one(prec) {
        s = s - Float::one(prec);
    }
    Ok(MultLog { r, s: s.with_prec(prec) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::legendre::{group_add, AffinePoint};

    const P: u32 = 192;

    fn c(re: f64, im: f64) -> Complex {
        Complex::from_f64(re, im, P)
    }

    #[test]
    fn agm_identities() {
        let x = c(1.5, -0.25);
        assert!((agm(&x, &x, P).unwrap() - &x).max_abs().le_pow2(-180));
        let (a, b) = (c(1.0, 0.2), c(0.3, 0.9));
        let k = c(3.0, 4.0);
        let lhs = agm(&(&k * &a), &(&k * &b), P).unwrap();
        let rhs = &k * agm(&a, &b, P).unwrap();
        assert!((lhs - rhs).max_abs().le_pow2(-170));
        assert_eq!(agm(&Complex::zero(P), &x, P).unwrap_err(), Error::ZeroInput);
    }

    #[test]
    fn square_lattice_at_minus_one() {
        let b = period_basis(&c(-1.0, 0.0), P).unwrap();
        let (tau, _) = tau_reduce(&b);
        assert!((tau - Complex::i(P)).max_abs().le_pow2(-(P as i64) / 2));
    }

    #[test]
    fn tau_reduce_examples() {
        let f = c(1.0, 0.0);
        let b = PeriodBasis { f: f.clone(), g: c(5.0, 1.0), lambda: c(2.0, 0.0) };
        let (tau, m) = tau_reduce(&b);
        assert!((tau - Complex::i(P)).max_abs().le_pow2(-180));
        assert_eq!(m, [[1, -5], [0, 1]]);
        let b = PeriodBasis { f, g: c(0.1, 0.1), lambda: c(2.0, 0.0) };
        let (tau, m) = tau_reduce(&b);
        assert!(tau.norm_sqr() >= Float::one(P));
        assert!(tau.re.abs() <= Float::from_f64(0.5, P));
        assert_eq!(m[0][0] * m[1][1] - m[0][1] * m[1][0], 1);
    }

    #[test]
    fn real_lambda_in_unit_interval() {
        let b = period_basis(&c(0.3, 0.0), P).unwrap();
        assert!(b.f.im.abs().le_pow2(-150) && !b.f.re.is_negative());
        assert!(b.g.re.abs().le_pow2(-150));
    }

    #[test]
    fn half_periods_hit_branch_points() {
        for l in [c(0.5, 0.0), c(2.0, 3.0), c(-5.0, 0.1), c(0.5, -0.01)] {
            let ctx = LatticeContext::for_lambda(&l, P).unwrap();
            let mut xs: Vec<Complex> = ctx.half_periods().iter().map(|h| ctx.exp_map(&h.0).x).collect();
            for r in [Complex::zero(P), Complex::one(P), l.clone()] {
                let (i, d) = xs
                    .iter()
                    .enumerate()
                    .map(|(i, x)| (i, (x - &r).max_abs()))
                    .min_by(|a, b| a.1.cmp(&b.1))
                    .unwrap();
                assert!(d.le_pow2(-150), "{:?}", d);
                xs.remove(i);
            }
        }
    }

    #[test]
    fn exp_log_round_trip() {
        let l = c(2.0, 3.0);
        let ctx = LatticeContext::for_lambda(&l, P).unwrap();
        for z in [c(0.3, 0.7), c(-0.2, 0.05), c(1.1, -0.4)] {
            let p = ctx.exp_map(&z);
            assert!(p.curve_residual(&l).le_pow2(-(P as i64) / 2));
            let w = ctx.elliptic_log(&p, None).unwrap();
            let q = ctx.exp_map(&w);
            assert!(p.distance(&q).unwrap().le_pow2(-160), "{:?}", p.distance(&q));
        }
    }

    #[test]
    fn periods_map_to_infinity() {
        let l = c(-3.0, 0.5);
        let b = period_basis(&l, P).unwrap();
        let ctx = LatticeContext::new(&b);
        assert!(ctx.exp_map(&Complex::zero(P)).at_infinity);
        assert!(ctx.exp_map(&b.f).at_infinity);
        assert!(ctx.exp_map(&(&b.g - b.f.scale_i64(2))).at_infinity);
    }

    #[test]
    fn log_is_additive() {
        let l = c(0.7, -1.3);
        let ctx = LatticeContext::for_lambda(&l, P).unwrap();
        let (a, b) = (c(0.31, 0.2), c(-0.17, 0.44));
        let pa = ctx.exp_map(&a);
        let pb = ctx.exp_map(&b);
        let s = group_add(&pa, &pb, &l, P).unwrap();
        let ps = ctx.exp_map(&(&a + &b));
        assert!(s.distance(&ps).unwrap().le_pow2(-150));
        let n = AffinePoint::new(pa.x.clone(), -&pa.y);
        let zn = ctx.elliptic_log(&n, None).unwrap();
        let za = ctx.elliptic_log(&pa, None).unwrap();
        let (p, q) = ctx.basis.coords(&(&zn + &za));
        assert!(p.dist_to_int().le_pow2(-150) && q.dist_to_int().le_pow2(-150));
    }

    #[test]
    fn mult_log_examples() {
        let m = mult_log(&c(1.0, 0.0)).unwrap();
        assert!(m.r.is_zero() && m.s.is_zero());
        let m = mult_log(&c(-1.0, 0.0)).unwrap();
        assert!((m.s - Float::from_f64(0.5, P)).abs().le_pow2(-180));
        let th = Float::from_f64(0.3, P) * Float::pi(P).mul_2k(1);
        let (s, co) = th.sin_cos();
        let u = Complex::new(co, s).scale(&Float::from_i64(2, P));
        let m = mult_log(&u).unwrap();
        assert!((m.r - Float::ln2(P)).abs().le_pow2(-180));
        assert!((m.s - Float::from_f64(0.3, P)).abs().le_pow2(-180));
        assert_eq!(mult_log(&Complex::zero(P)).unwrap_err(), Error::ZeroInput);
    }

    /// Tanh-sinh rule on [-1, 1]: nodes as `(1 - u, weight)` so endpoint gaps stay exact.
    fn tanh_sinh(prec: u32, h_log2: i64, kmax: i64) -> Vec<(Float, Float, Float)> {
        let h = Float::one(prec).mul_2k(-h_log2);
        let half_pi = Float::pi(prec).mul_2k(-1);
        let mut out = Vec::new();
        for k in -kmax..=kmax {
            let t = Float::from_i64(k, prec) * &h;
            let et = t.exp();
            let sinh = (&et - et.recip()).mul_2k(-1);
            let cosh = (&et + et.recip()).mul_2k(-1);
            let a = &half_pi * &sinh;
            let e2a = a.mul_2k(1).exp();
            let one = Float::one(prec);
            // 1 - tanh(a) and 1 + tanh(a)
            let c = Float::from_i64(2, prec) / (&e2a + &one);
            let d = Float::from_i64(2, prec) / (e2a.recip() + &one);
            let cosh_a = (a.exp() + (-&a).exp()).mul_2k(-1);
            let w = &h * &half_pi * &cosh / cosh_a.square();
            out.push((c, d, w));
        }
        out
    }

    /// `2 ∫ dx/y` along the segment from `ri` to `rj`, with `rk` the third root.
    fn segment_period(ri: &Complex, rj: &Complex, rk: &Complex, nodes: &[(Float, Float, Float)]) -> Complex {
        let prec = ri.prec();
        let delta = rj - ri;
        let w_mid = -(&(ri + &delta.mul_2k(-1)) - rk);
        let sq_mid = w_mid.sqrt();
        let mut acc = Complex::zero(prec);
        for (c, d, wt) in nodes {
            // s = (1 + u)/2 = d/2
            let x = ri + delta.scale(&d.mul_2k(-1));
            let w = -(&x - rk);
            let root = (&w / &w_mid).sqrt() * &sq_mid;
            let denom = root.scale(&(c * d).sqrt());
            acc += &(Complex::from_real(wt.clone()) / denom);
        }
        acc.mul_2k(1)
    }

    #[test]
    fn agm_matches_elliptic_integral() {
        let prec = 128;
        let nodes = tanh_sinh(prec, 6, 6 * 64);
        // ∫_0^{π/2} dθ / sqrt(1 - sin²θ / 2), θ = π(1 + u)/4
        let quarter_pi = Float::pi(prec).mul_2k(-2);
        let mut acc = Float::zero(prec);
        for (c, _, w) in &nodes {
            let th = &quarter_pi * (Float::from_i64(2, prec) - c);
            let (s, _) = th.sin_cos();
            let v = Float::one(prec) - s.square().mul_2k(-1);
            acc += &(w / v.sqrt());
        }
        acc = acc * &quarter_pi;
        let m = agm(&Complex::one(prec), &Complex::from_real(Float::from_i64(2, prec).sqrt()), prec).unwrap();
        let expected = Float::pi(prec) * Float::from_i64(2, prec).sqrt() / m.re.mul_2k(1);
        assert!((acc - expected).abs().le_pow2(-(prec as i64) / 2));
    }

    #[test]
    fn periods_match_quadrature() {
        let prec = 128u32;
        let nodes = tanh_sinh(prec, 5, 5 * 32);
        let samples = [
            (0.5, 0.0),
            (0.3, 0.0),
            (-1.0, 0.0),
            (2.0, 0.0),
            (2.0, 3.0),
            (-5.0, 0.1),
            (0.5, 0.7),
            (0.9, -0.2),
            (4.0, -1.5),
            (-0.3, -0.4),
        ];
        for (re, im) in samples {
            let l = Complex::from_f64(re, im, prec);
            let b = period_basis(&l, P).unwrap();
            let roots = [Complex::zero(prec), Complex::one(prec), l.clone()];
            let mut quad = Vec::new();
            for (i, j, k) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
                // Skip segments passing near the third root.
                let (a, b, r) = (to_c64(&roots[i]), to_c64(&roots[j]), to_c64(&roots[k]));
                let t = ((r - a) * (b - a).conj()).re / (b - a).norm_sqr();
                let foot = a + (b - a) * t.clamp(0.0, 1.0);
                if (r - foot).norm() < 0.1 * (b - a).norm() {
                    continue;
                }
                quad.push(segment_period(&roots[i], &roots[j], &roots[k], &nodes));
            }
            assert!(quad.len() >= 2);
            let mut coords = Vec::new();
            for w in &quad {
                let (p, q) = b.coords(&w.with_prec(P));
                assert!(p.dist_to_int().le_pow2(-48) && q.dist_to_int().le_pow2(-48), "λ={re}+{im}i");
                coords.push((p.round_i64().unwrap(), q.round_i64().unwrap()));
            }
            let generates = [(0, 1), (0, 2), (1, 2)]
                .iter()
                .filter(|&&(i, j)| i < coords.len() && j < coords.len())
                .any(|&(i, j)| (coords[i].0 * coords[j].1 - coords[i].1 * coords[j].0).abs() == 1);
            assert!(generates, "λ={re}+{im}i: {coords:?}");
        }
    }

    #[test]
    fn continuation_constant_and_contractible() {
        let l = c(0.5, 0.5);
        let b = period_basis(&l, P).unwrap();
        let same = continue_basis(&b, &[Complex64::new(0.5, 0.5)], P).unwrap();
        assert_eq!(basis_change(&b, &same, P), Some([[1, 0], [0, 1]]));
        let loop_path: Vec<Complex64> = (1..=32)
            .map(|k| {
                let t = core::f64::consts::TAU * k as f64 / 32.0;
                Complex64::new(0.5, 0.5) + Complex64::new(libm::cos(t), libm::sin(t)) * 0.2
            })
            .collect();
        let mut loop_path = loop_path;
        *loop_path.last_mut().unwrap() = Complex64::new(0.7, 0.5);
        let start = continue_basis(&b, &[Complex64::new(0.7, 0.5)], P).unwrap();
        let back = continue_basis(&start, &loop_path, P).unwrap();
        assert_eq!(basis_change(&start, &back, P), Some([[1, 0], [0, 1]]));
    }

    #[test]
    fn monodromy_around_zero() {
        let b = period_basis(&c(0.5, 0.0), P).unwrap();
        let loop_path: Vec<Complex64> = (1..=64)
            .map(|k| {
                let t = core::f64::consts::TAU * k as f64 / 64.0;
                Complex64::new(libm::cos(t), libm::sin(t)) * 0.5
            })
            .collect();
        let mut loop_path = loop_path;
        *loop_path.last_mut().unwrap() = Complex64::new(0.5, 0.0);
        let back = continue_basis(&b, &loop_path, P).unwrap();
        let m = basis_change(&b, &back, P).expect("integral monodromy");
        assert_eq!(m[0][0] * m[1][1] - m[0][1] * m[1][0], 1);
        assert_eq!(m, [[1, -2], [0, 1]], "monodromy {m:?}");
    }

    #[test]
    fn near_two_torsion_logs() {
        let l = c(-2.5, 0.4);
        let ctx = LatticeContext::for_lambda(&l, P).unwrap();
        for h in ctx.half_periods().clone() {
            let p = ctx.exp_map(&h.0);
            let z = ctx.elliptic_log(&p, None).unwrap();
            let (a, b) = ctx.basis.coords(&(&z.mul_2k(1)));
            assert!(a.dist_to_int().le_pow2(-150) && b.dist_to_int().le_pow2(-150));
            let eps = Complex::from_f64(1e-20, 3e-21, P);
            let z0 = &h.0 + &eps;
            let p = ctx.exp_map(&z0);
            let z = ctx.elliptic_log(&p, None).unwrap();
            let (a, b) = ctx.basis.coords(&(&z - &z0));
            assert!(a.dist_to_int().le_pow2(-150) && b.dist_to_int().le_pow2(-150), "{a:?} {b:?}");
        }
    }
}
