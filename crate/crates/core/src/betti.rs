//! The Betti map: real coordinates of the logarithms with respect to a continued
//! period basis, sampled over discs of the parameter plane.
//!
//! Continuation happens in two layers. A [`Track`] carries double-precision
//! periods, square roots and logarithms along small steps; the multiprecision
//! evaluation at a parameter snaps every branch choice to the nearby track.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::family::FamilySpec;
use crate::legendre::{to_c64, AffinePoint, PointExpr, RationalFunction};
use crate::mp::{Complex, Float};
use crate::periods::{align_f64, coords_f64, mult_log, period_basis, period_basis_f64, LatticeContext, LatticeF64, PeriodBasis};

const TWO_PI: f64 = core::f64::consts::TAU;

/// Double-precision state of one elliptic factor.
#[derive(Clone, Debug, PartialEq)]
pub struct EllTrack {
    pub lattice: (Complex64, Complex64),
    pub ys: Vec<Complex64>,
    pub zs: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SecondTrack {
    Elliptic(EllTrack),
    /// Continuous logarithms of the `u_j`.
    Units(Vec<Complex64>),
}

/// Double-precision continuation state of every period and logarithm at `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct Track {
    pub t: Complex64,
    pub first: EllTrack,
    pub second: SecondTrack,
}

fn nearest_root(r: Complex64, y_ref: Complex64) -> Complex64 {
    let s = r.sqrt();
    if (s - y_ref).norm() <= (s + y_ref).norm() {
        s
    } else {
        -s
    }
}

fn shift_log(w: Complex64, w_ref: Complex64) -> Complex64 {
    let k = libm::round((w_ref.im - w.im) / TWO_PI);
    w + Complex64::new(0.0, TWO_PI * k)
}

fn anchored_factor(fam: &FamilySpec, curve: &RationalFunction, points: &[PointExpr], t: Complex64) -> Result<EllTrack> {
    let c = curve.eval_f64(t);
    let lattice = period_basis_f64(c)?;
    let lat = LatticeF64::new(lattice.0, lattice.1, c);
    let mut ys = Vec::with_capacity(points.len());
    let mut zs = Vec::with_capacity(points.len());
    for p in points {
        let route = fam.route(p.anchor(), t)?;
        let y = p.track_f64(&route)?;
        let x = p.x().eval_f64(t);
        let z = lat.log(x, y, None).ok_or(Error::NonConvergence)?;
        ys.push(y);
        zs.push(z);
    }
    Ok(EllTrack { lattice, ys, zs })
}

fn step_factor(old: &EllTrack, curve: &RationalFunction, points: &[PointExpr], t: Complex64) -> Result<EllTrack> {
    let c = curve.eval_f64(t);
    let lattice = align_f64(period_basis_f64(c)?, old.lattice)?;
    let lat = LatticeF64::new(lattice.0, lattice.1, c);
    let spacing = lattice.0.norm().min(lattice.1.norm());
    let mut ys = Vec::with_capacity(points.len());
    let mut zs = Vec::with_capacity(points.len());
    for (k, p) in points.iter().enumerate() {
        let y = nearest_root(p.radicand_f64(t), old.ys[k]);
        let x = p.x().eval_f64(t);
        let z = lat.log(x, y, Some(old.zs[k])).ok_or(Error::StepTooLarge)?;
        let z = lat.nearest_translate(z, old.zs[k]);
        if (z - old.zs[k]).norm() > 0.25 * spacing {
            return Err(Error::StepTooLarge);
        }
        ys.push(y);
        zs.push(z);
    }
    Ok(EllTrack { lattice, ys, zs })
}

impl Track {
    /// State at `t`, each point continued from its own anchor along a route avoiding singular values.
    pub fn anchored(fam: &FamilySpec, t: Complex64) -> Result<Track> {
        let first = anchored_factor(fam, fam.lambda_rf(), &fam.points, t)?;
        let second = match fam.second_curve() {
            Some(c) => SecondTrack::Elliptic(anchored_factor(fam, c, fam.second_points(), t)?),
            None => SecondTrack::Units(fam.units().iter().map(|u| u.eval_f64(t).ln()).collect()),
        };
        Ok(Track { t, first, second })
    }

    fn step(&self, fam: &FamilySpec, t: Complex64) -> Result<Track> {
        let first = step_factor(&self.first, fam.lambda_rf(), &fam.points, t)?;
        let second = match (&self.second, fam.second_curve()) {
            (SecondTrack::Elliptic(old), Some(c)) => SecondTrack::Elliptic(step_factor(old, c, fam.second_points(), t)?),
            (SecondTrack::Units(old), None) => {
                let mut ws = Vec::with_capacity(old.len());
                for (u, w_old) in fam.units().iter().zip(old) {
                    let w = shift_log(u.eval_f64(t).ln(), *w_old);
                    if (w - w_old).norm() > 1.0 {
                        return Err(Error::StepTooLarge);
                    }
                    ws.push(w);
                }
                SecondTrack::Units(ws)
            }
            _ => return Err(Error::InvalidFamily("track does not match family".into())),
        };
        Ok(Track { t, first, second })
    }

    /// Continues the state along the straight segment to `to` with steps of at most
    /// one eighth of the distance to the nearest singular value.
    pub fn advance(&self, fam: &FamilySpec, to: Complex64) -> Result<Track> {
        let mut cur = self.clone();
        let mut budget = 100_000usize;
        let mut shrink = 1.0f64;
        while cur.t != to {
            budget = budget.checked_sub(1).ok_or(Error::StepTooLarge)?;
            let d = fam.singular_distance(cur.t);
            if d == 0.0 {
                return Err(Error::PathThroughSingularity);
            }
            let remaining = to - cur.t;
            let max_step = shrink * d / 8.0;
            let next = if remaining.norm() <= max_step { to } else { cur.t + remaining * (max_step / remaining.norm()) };
            if fam.singular_distance(next) < 1e-12 {
                return Err(Error::PathThroughSingularity);
            }
            match cur.step(fam, next) {
                Ok(n) => {
                    cur = n;
                    shrink = (shrink * 2.0).min(1.0);
                }
                Err(Error::StepTooLarge | Error::NonConvergence) if shrink > 1e-6 => shrink *= 0.25,
                Err(e) => return Err(e),
            }
        }
        Ok(cur)
    }

    /// Sum `Σ c_k z_k` of first-factor logs, with the lattice.
    pub fn first_combination(&self, a: &[i64]) -> Complex64 {
        a.iter().zip(&self.first.zs).map(|(c, z)| z * *c as f64).sum()
    }
}

/// Multiprecision values of one elliptic factor.
#[derive(Clone, Debug)]
pub struct EllValue {
    pub basis: PeriodBasis,
    pub points: Vec<AffinePoint>,
    pub logs: Vec<Complex>,
}

#[derive(Clone, Debug)]
pub enum SecondValue {
    Elliptic(EllValue),
    Units { values: Vec<Complex>, logs: Vec<Complex> },
}

/// All periods, points and logarithms at one parameter, branch-matched to a track.
#[derive(Clone, Debug)]
pub struct NodeValue {
    pub t: Complex,
    pub first: EllValue,
    pub second: SecondValue,
}

/// The basis of the fresh lattice closest to a double-precision reference basis.
pub fn align_to_f64(fresh: &PeriodBasis, reference: (Complex64, Complex64)) -> Result<PeriodBasis> {
    let (f, g) = (to_c64(&fresh.f), to_c64(&fresh.g));
    let mut m = [[0i64; 2]; 2];
    for (k, w) in [reference.0, reference.1].into_iter().enumerate() {
        let (p, q) = coords_f64(w, f, g);
        let (a, b) = (libm::round(p), libm::round(q));
        let off = (p - a).abs().max((q - b).abs());
        if off > 0.25 {
            return Err(Error::StepTooLarge);
        }
        m[k] = [a as i64, b as i64];
    }
    if m[0][0] * m[1][1] - m[0][1] * m[1][0] != 1 {
        return Err(Error::StepTooLarge);
    }
    Ok(fresh.transform(m))
}

/// With `direct` set, `t` may sit on a branch value: tiny radicands give `y = 0` and the
/// logarithm is only matched to the track modulo the lattice, without a distance check.
pub(crate) fn eval_factor(
    curve: &RationalFunction,
    points: &[PointExpr],
    track: &EllTrack,
    t: &Complex,
    prec: u32,
    direct: bool,
) -> Result<EllValue> {
    let c = curve.eval(t).ok_or(Error::PathThroughSingularity)?;
    let fresh = period_basis(&c, prec)?;
    let basis = align_to_f64(&fresh, track.lattice)?;
    let ctx = LatticeContext::new(&basis);
    let wp = ctx.prec();
    let spacing = track.lattice.0.norm().min(track.lattice.1.norm());
    let mut pts = Vec::with_capacity(points.len());
    let mut logs = Vec::with_capacity(points.len());
    for (k, p) in points.iter().enumerate() {
        let (x, _, r) = p.eval_parts(&t.with_prec(wp)).ok_or(Error::PathThroughSingularity)?;
        let scale = Float::one(wp).max(x.abs().powi(3));
        let y = if direct && r.abs().le_pow2(scale.lead_exp() - (prec as i64) / 2) {
            Complex::zero(wp)
        } else {
            PointExpr::nearest_y(&r, track.ys[k])
        };
        let zt = Complex::from_f64(track.zs[k].re, track.zs[k].im, wp);
        let z = ctx.log_xy(&x, &y, Some(&zt))?;
        let z = &zt + basis.reduce(&(&z - &zt));
        if !direct && to_c64(&(&z - &zt)).norm() > 1e-3 * spacing {
            return Err(Error::BranchAmbiguous);
        }
        pts.push(AffinePoint::new(x.with_prec(prec), y.with_prec(prec)));
        logs.push(z);
    }
    Ok(EllValue { basis, points: pts, logs })
}

/// Multiprecision evaluation at `t`, which must be close to `track.t`.
pub fn evaluate(fam: &FamilySpec, track: &Track, t: &Complex, prec: u32) -> Result<NodeValue> {
    let first = eval_first(fam, track, t, prec, false)?;
    let second = eval_second(fam, track, t, prec, false)?;
    Ok(NodeValue { t: t.clone(), first, second })
}

pub(crate) fn eval_first(fam: &FamilySpec, track: &Track, t: &Complex, prec: u32, direct: bool) -> Result<EllValue> {
    eval_factor(fam.lambda_rf(), &fam.points, &track.first, t, prec, direct)
}

pub(crate) fn eval_second(fam: &FamilySpec, track: &Track, t: &Complex, prec: u32, direct: bool) -> Result<SecondValue> {
    Ok(match (&track.second, fam.second_curve()) {
        (SecondTrack::Elliptic(tr), Some(c)) => SecondValue::Elliptic(eval_factor(c, fam.second_points(), tr, t, prec, direct)?),
        (SecondTrack::Units(ws), None) => {
            let wp = prec + crate::periods::GUARD_BITS;
            let tt = t.with_prec(wp);
            let two_pi = Float::pi(wp).mul_2k(1);
            let mut values = Vec::with_capacity(ws.len());
            let mut logs = Vec::with_capacity(ws.len());
            for (u, w_ref) in fam.units().iter().zip(ws) {
                let v = u.eval(&tt).ok_or(Error::PathThroughSingularity)?;
                if v.is_zero() {
                    return Err(Error::ZeroInput);
                }
                let l = v.ln();
                let k = libm::round((w_ref.im - l.im.to_f64()) / TWO_PI) as i64;
                let l = Complex::new(l.re.clone(), &l.im + &two_pi * Float::from_i64(k, wp));
                values.push(v);
                logs.push(l);
            }
            SecondValue::Units { values, logs }
        }
        _ => return Err(Error::InvalidFamily("track does not match family".into())),
    })
}

/// `Δ = f ḡ − f̄ g`.
pub fn delta(basis: &PeriodBasis) -> Result<Complex> {
    let d = &basis.f * &basis.g.conj() - &basis.f.conj() * &basis.g;
    let prec = basis.prec();
    let bound = basis.f.abs() * basis.g.abs();
    if d.abs().lead_exp() <= bound.lead_exp() - (prec as i64) / 2 {
        return Err(Error::DegenerateBasis);
    }
    Ok(d)
}

/// `(p, q)` with `z = p f + q g`, from the quotients `(zḡ − z̄g)/Δ` and `−(z f̄ − z̄ f)/Δ`.
/// Also returns the larger imaginary part of the two quotients.
pub fn betti_coords_checked(z: &Complex, basis: &PeriodBasis) -> Result<(Float, Float, Float)> {
    let d = delta(basis)?;
    let p = (z * &basis.g.conj() - &z.conj() * &basis.g) / &d;
    let q = -((z * &basis.f.conj() - &z.conj() * &basis.f) / &d);
    let im = p.im.abs().max(q.im.abs());
    Ok((p.re, q.re, im))
}

pub fn betti_coords(z: &Complex, basis: &PeriodBasis) -> Result<(Float, Float)> {
    let (p, q, _) = betti_coords_checked(z, basis)?;
    Ok((p, q))
}

/// The coordinate vector `Θ(t) = (p_1, q_1, …, r_m, s_m)`.
#[derive(Clone, Debug)]
pub struct BettiVector {
    pub t: Complex,
    pub p: Vec<Float>,
    pub q: Vec<Float>,
    pub r: Vec<Float>,
    pub s: Vec<Float>,
    /// Largest imaginary part of the defining quotients.
    pub imag: Float,
    /// Largest `|p f + q g − z| / |z|` over all logarithms (absolute when `z = 0`).
    pub reconstruction: Float,
    pub prec: u32,
}

fn factor_coords(v: &EllValue, prec: u32, imag: &mut Float, rec: &mut Float) -> Result<(Vec<Float>, Vec<Float>)> {
    let mut ps = Vec::with_capacity(v.logs.len());
    let mut qs = Vec::with_capacity(v.logs.len());
    for z in &v.logs {
        let (p, q, im) = betti_coords_checked(z, &v.basis)?;
        let back = v.basis.combine(&p, &q);
        let scale = if z.is_zero() { Float::one(prec) } else { z.abs() };
        let res = (&back - z).abs() / scale;
        *imag = imag.clone().max(im);
        *rec = rec.clone().max(res);
        ps.push(p.with_prec(prec));
        qs.push(q.with_prec(prec));
    }
    Ok((ps, qs))
}

pub fn betti_vector(node: &NodeValue, prec: u32) -> Result<BettiVector> {
    let mut imag = Float::zero(prec);
    let mut rec = Float::zero(prec);
    let (p, q) = factor_coords(&node.first, prec, &mut imag, &mut rec)?;
    let (r, s) = match &node.second {
        SecondValue::Elliptic(v) => factor_coords(v, prec, &mut imag, &mut rec)?,
        SecondValue::Units { values, .. } => {
            let mut rs = Vec::with_capacity(values.len());
            let mut ss = Vec::with_capacity(values.len());
            for v in values {
                let ml = mult_log(v)?;
                rs.push(ml.r.with_prec(prec));
                ss.push(ml.s.with_prec(prec));
            }
            (rs, ss)
        }
    };
    Ok(BettiVector { t: node.t.clone(), p, q, r, s, imag, reconstruction: rec, prec })
}

/// A Gaussian integer `b' + b'' i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CmInt {
    pub re: i64,
    pub im: i64,
}

impl CmInt {
    pub fn int(v: i64) -> Self {
        CmInt { re: v, im: 0 }
    }

    pub fn norm(&self) -> i64 {
        self.re * self.re + self.im * self.im
    }
}

/// Integer relation vector `(a, b)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelationVector {
    pub a: Vec<i64>,
    pub b: Vec<CmInt>,
}

impl RelationVector {
    pub fn new(a: Vec<i64>, b: Vec<CmInt>) -> Self {
        RelationVector { a, b }
    }

    pub fn integral(a: &[i64], b: &[i64]) -> Self {
        RelationVector { a: a.to_vec(), b: b.iter().map(|&v| CmInt::int(v)).collect() }
    }

    pub fn norm_a(&self) -> i64 {
        self.a.iter().map(|v| v.abs()).max().unwrap_or(0)
    }

    /// `max |b_j|`, or `max |N(b_j)|` for Gaussian entries.
    pub fn norm_b(&self) -> i64 {
        if self.b.iter().any(|v| v.im != 0) {
            self.b.iter().map(CmInt::norm).max().unwrap_or(0)
        } else {
            self.b.iter().map(|v| v.re.abs()).max().unwrap_or(0)
        }
    }

    pub fn has_cm_entries(&self) -> bool {
        self.b.iter().any(|v| v.im != 0)
    }
}

/// Action of `i` on Betti coordinates of `E_{-1}`: `(r, s) ↦ M (r, s)ᵀ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CmMatrix(pub [[i64; 2]; 2]);

impl CmMatrix {
    pub fn apply(&self, r: &Float, s: &Float) -> (Float, Float) {
        let m = self.0;
        let prec = r.prec();
        (
            r * Float::from_i64(m[0][0], prec) + s * Float::from_i64(m[0][1], prec),
            r * Float::from_i64(m[1][0], prec) + s * Float::from_i64(m[1][1], prec),
        )
    }

    pub fn square(&self) -> [[i64; 2]; 2] {
        let m = self.0;
        [
            [m[0][0] * m[0][0] + m[0][1] * m[1][0], m[0][0] * m[0][1] + m[0][1] * m[1][1]],
            [m[1][0] * m[0][0] + m[1][1] * m[1][0], m[1][0] * m[0][1] + m[1][1] * m[1][1]],
        ]
    }
}

/// Solves `i h = α h + β k`, `i k = γ h + δ k` over the basis `(h, k)` of `E_{-1}` and rounds.
pub fn cm_matrix(basis: &PeriodBasis) -> Result<CmMatrix> {
    let prec = basis.prec();
    let tol = -(prec as i64) / 2;
    let (al, be) = betti_coords(&basis.f.mul_i(), basis)?;
    let (ga, de) = betti_coords(&basis.g.mul_i(), basis)?;
    for v in [&al, &be, &ga, &de] {
        if !v.dist_to_int().le_pow2(tol) {
            return Err(Error::CmUnsupported);
        }
    }
    let r = |v: &Float| v.round_i64().ok_or(Error::CmUnsupported);
    // w = r h + s k  ⇒  i w = (α r + γ s) h + (β r + δ s) k
    Ok(CmMatrix([[r(&al)?, r(&ga)?], [r(&be)?, r(&de)?]]))
}

/// Residuals `(ρ1, ρ2)`: distances of the relation combinations from the integral targets.
pub fn relation_residual(v: &BettiVector, rel: &RelationVector, case_tag: u8, cm: Option<&CmMatrix>) -> Result<(Float, Float)> {
    if rel.a.len() != v.p.len() {
        return Err(Error::DimensionMismatch(format!("a has length {}, family has n = {}", rel.a.len(), v.p.len())));
    }
    if rel.b.len() != v.r.len() {
        return Err(Error::DimensionMismatch(format!("b has length {}, family has m = {}", rel.b.len(), v.r.len())));
    }
    if rel.has_cm_entries() && cm.is_none() {
        return Err(Error::CmUnsupported);
    }
    let (sp, sq) = combine_first(&v.p, &v.q, &rel.a, v.prec);
    let (sr, ss) = combine_second(&v.r, &v.s, &rel.b, cm, v.prec);
    Ok((target_distance(&sp, &sq, false), target_distance(&sr, &ss, case_tag == 3)))
}

/// `(Σ a_i p_i, Σ a_i q_i)`.
pub(crate) fn combine_first(p: &[Float], q: &[Float], a: &[i64], prec: u32) -> (Float, Float) {
    let mut sp = Float::zero(prec);
    let mut sq = Float::zero(prec);
    for (k, a) in a.iter().enumerate() {
        let c = Float::from_i64(*a, prec);
        sp += &(&c * &p[k]);
        sq += &(&c * &q[k]);
    }
    (sp, sq)
}

/// `Σ_j (b'_j I + b''_j M)(r_j, s_j)ᵀ`; the CM matrix must be present when some `b''_j ≠ 0`.
pub(crate) fn combine_second(r: &[Float], s: &[Float], b: &[CmInt], cm: Option<&CmMatrix>, prec: u32) -> (Float, Float) {
    let mut sr = Float::zero(prec);
    let mut ss = Float::zero(prec);
    for (k, b) in b.iter().enumerate() {
        let (r, s) = (&r[k], &s[k]);
        let (mut cr, mut cs) = (r * Float::from_i64(b.re, prec), s * Float::from_i64(b.re, prec));
        if b.im != 0 {
            let (ir, is) = cm.expect("CM matrix required").apply(r, s);
            cr += &(ir * Float::from_i64(b.im, prec));
            cs += &(is * Float::from_i64(b.im, prec));
        }
        sr += &cr;
        ss += &cs;
    }
    (sr, ss)
}

/// Distance of `(x, y)` to `Z²`, or to `{0}×Z` for multiplicative coordinates.
pub(crate) fn target_distance(x: &Float, y: &Float, units: bool) -> Float {
    let dx = if units { x.abs() } else { x.dist_to_int() };
    (dx.square() + y.dist_to_int().square()).sqrt()
}

/// A disc of the parameter plane sampled on a polar grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Disc {
    pub center: Complex64,
    pub radius: f64,
    pub margin: f64,
    pub spokes: usize,
    pub rings: usize,
}

impl Disc {
    pub fn new(center: Complex64, radius: f64, margin: f64, spokes: usize, rings: usize) -> Result<Disc> {
        if !(radius > 0.0 && margin > 0.0) {
            return Err(Error::InvalidDisc("radius and margin must be positive".into()));
        }
        if spokes == 0 && rings > 0 {
            return Err(Error::InvalidDisc("rings need at least one spoke".into()));
        }
        Ok(Disc { center, radius, margin, spokes, rings })
    }

    /// The closed disc must keep `margin` away from every singular value of the family.
    pub fn check(&self, fam: &FamilySpec) -> Result<()> {
        let d = fam.singular_distance(self.center);
        if d <= self.radius + self.margin {
            return Err(Error::InvalidDisc(format!("singular value within {:.3e} of the centre", d)));
        }
        Ok(())
    }

    pub fn node(&self, ring: usize, spoke: usize) -> Complex64 {
        if ring == 0 {
            return self.center;
        }
        let r = self.radius * ring as f64 / self.rings as f64;
        let a = TWO_PI * spoke as f64 / self.spokes as f64;
        self.center + Complex64::new(libm::cos(a), libm::sin(a)) * r
    }

    pub fn contains(&self, t: Complex64) -> bool {
        (t - self.center).norm() <= self.radius
    }
}

/// Double-precision tracks over a disc grid: `spokes[j][k]` is ring `k + 1` of spoke `j`.
#[derive(Clone, Debug)]
pub struct TrackGrid {
    pub disc: Disc,
    pub center: Track,
    pub spokes: Vec<Vec<core::result::Result<Track, Error>>>,
}

impl TrackGrid {
    /// Track at grid position `(ring, spoke)`; ring 0 is the centre.
    pub fn get(&self, ring: usize, spoke: usize) -> Option<&Track> {
        if ring == 0 {
            Some(&self.center)
        } else {
            self.spokes[spoke][ring - 1].as_ref().ok()
        }
    }

    /// Valid track nearest to `t`.
    pub fn nearest(&self, t: Complex64) -> &Track {
        let mut best = &self.center;
        let mut bd = (self.center.t - t).norm();
        for spoke in &self.spokes {
            for tr in spoke.iter().flatten() {
                let d = (tr.t - t).norm();
                if d < bd {
                    bd = d;
                    best = tr;
                }
            }
        }
        best
    }

    pub fn excluded(&self) -> usize {
        self.spokes.iter().flatten().filter(|r| r.is_err()).count()
    }
}

/// Continues `center` radially along every spoke of the disc grid.
pub fn track_grid<E: Executor>(fam: &FamilySpec, disc: &Disc, center: Track, exec: &E) -> TrackGrid {
    let spokes: Vec<usize> = (0..disc.spokes).collect();
    let c = &center;
    let out = exec.map(spokes, |j| {
        let mut last = c.clone();
        let mut row = Vec::with_capacity(disc.rings);
        for k in 1..=disc.rings {
            let t = disc.node(k, j);
            match last.advance(fam, t) {
                Ok(tr) => {
                    last = tr.clone();
                    row.push(Ok(tr));
                }
                Err(e) => row.push(Err(e)),
            }
        }
        row
    });
    TrackGrid { disc: *disc, center, spokes: out }
}

/// One sample of the Betti map.
#[derive(Clone, Debug)]
pub struct GridNode {
    pub ring: usize,
    pub spoke: usize,
    pub t: Complex64,
    pub value: core::result::Result<BettiVector, Error>,
}

#[derive(Clone, Debug)]
pub struct BettiGrid {
    pub disc: Disc,
    /// Centre first, then spoke-major, ring-minor.
    pub nodes: Vec<GridNode>,
}

impl BettiGrid {
    pub fn excluded(&self) -> usize {
        self.nodes.iter().filter(|n| n.value.is_err()).count()
    }
}

/// Samples `Θ` on the polar grid of `disc`, continuing from the centre along spokes.
pub fn theta_sample<E: Executor>(fam: &FamilySpec, disc: &Disc, prec: u32, exec: &E) -> Result<BettiGrid> {
    disc.check(fam)?;
    let center = Track::anchored(fam, disc.center)?;
    theta_sample_from(fam, disc, center, prec, exec)
}

/// As [`theta_sample`] with a given centre state.
pub fn theta_sample_from<E: Executor>(fam: &FamilySpec, disc: &Disc, center: Track, prec: u32, exec: &E) -> Result<BettiGrid> {
    let grid = track_grid(fam, disc, center, exec);
    let eval = |tr: &Track| -> Result<BettiVector> {
        let t = Complex::from_f64(tr.t.re, tr.t.im, prec + crate::periods::GUARD_BITS);
        let node = evaluate(fam, tr, &t, prec)?;
        betti_vector(&node, prec)
    };
    let c = eval(&grid.center)?;
    let jobs: Vec<usize> = (0..disc.spokes).collect();
    let rows = exec.map(jobs, |j| {
        grid.spokes[j]
            .iter()
            .enumerate()
            .map(|(k, tr)| GridNode {
                ring: k + 1,
                spoke: j,
                t: disc.node(k + 1, j),
                value: match tr {
                    Ok(tr) => eval(tr),
                    Err(e) => Err(e.clone()),
                },
            })
            .collect::<Vec<_>>()
    });
    let mut nodes = Vec::with_capacity(1 + disc.spokes * disc.rings);
    nodes.push(GridNode { ring: 0, spoke: 0, t: disc.center, value: Ok(c) });
    for row in rows {
        nodes.extend(row);
    }
    Ok(BettiGrid { disc: *disc, nodes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::family::SecondFactor;
    use crate::legendre::eval_point;
    use crate::periods::elliptic_log;
    use alloc::vec;

    const P: u32 = 192;

    fn p1() -> PointExpr {
        PointExpr::new(RationalFunction::from_ints(&[2], &[1]), Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0)).unwrap()
    }

    fn p2() -> PointExpr {
        PointExpr::new(RationalFunction::from_ints(&[3], &[1]), Complex64::new(0.0, 0.0), Complex64::new(18f64.sqrt(), 0.0)).unwrap()
    }

    /// Points of the first worked example with `Q_j` on `E_{-λ}`.
    pub(crate) fn example1() -> FamilySpec {
        let mu = RationalFunction::from_ints(&[0, -1], &[1]);
        let q1 = PointExpr::on_curve(RationalFunction::from_ints(&[2], &[1]), mu.clone(), Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0)).unwrap();
        let q2 = PointExpr::on_curve(RationalFunction::from_ints(&[3], &[1]), mu.clone(), Complex64::new(0.0, 0.0), Complex64::new(18f64.sqrt(), 0.0))
            .unwrap();
        FamilySpec::new(vec![p1(), p2()], SecondFactor::Elliptic { mu, points: vec![q1, q2] }).unwrap()
    }

    #[test]
    fn delta_examples() {
        let b = PeriodBasis { f: Complex::one(P), g: Complex::i(P), lambda: Complex::from_i64(2, P) };
        let d = delta(&b).unwrap();
        assert!((d - Complex::from_f64(0.0, -2.0, P)).max_abs().is_zero());
        let sw = PeriodBasis { f: b.g.clone(), g: b.f.clone(), lambda: b.lambda.clone() };
        assert!((delta(&sw).unwrap() + delta(&b).unwrap()).max_abs().is_zero());
        let deg = PeriodBasis { f: Complex::one(P), g: Complex::from_i64(2, P), lambda: b.lambda.clone() };
        assert_eq!(delta(&deg).unwrap_err(), Error::DegenerateBasis);
    }

    #[test]
    fn coords_examples() {
        let b = period_basis(&Complex::from_f64(2.0, 1.0, P), P).unwrap();
        let (p, q) = betti_coords(&b.f, &b).unwrap();
        assert!((p - Float::one(P)).abs().le_pow2(-180) && q.abs().le_pow2(-180));
        let (p, q) = betti_coords(&(&b.f + &b.g).mul_2k(-1), &b).unwrap();
        let half = Float::from_f64(0.5, P);
        assert!((p - &half).abs().le_pow2(-180) && (q - &half).abs().le_pow2(-180));
    }

    #[test]
    fn center_node_matches_direct_computation() {
        let fam = example1();
        let disc = Disc::new(Complex64::new(4.0, 0.5), 0.4, 0.05, 1, 0).unwrap();
        let g = theta_sample(&fam, &disc, P, &Sequential).unwrap();
        assert_eq!(g.nodes.len(), 1);
        let v = g.nodes[0].value.as_ref().unwrap();
        let t = Complex::from_f64(4.0, 0.5, P + 24);
        let route = fam.route(Complex64::new(0.0, 0.0), Complex64::new(4.0, 0.5)).unwrap();
        let pt = eval_point(&fam.points[0], &t, &route[1..route.len() - 1], P).unwrap();
        let b = period_basis(&t, P).unwrap();
        let lg = elliptic_log(&pt, &b, P).unwrap();
        let (p, q) = betti_coords(&lg.z, &b).unwrap();
        // Same point, possibly a different basis and representative: compare modulo the lattice action.
        let (p0, q0) = (&v.p[0], &v.q[0]);
        let direct = b.combine(&p, &q);
        let node = evaluate(&fam, &Track::anchored(&fam, disc.center).unwrap(), &t, P).unwrap();
        let via = node.first.basis.combine(p0, q0);
        let (dp, dq) = b.coords(&(&direct - &via));
        assert!(dp.dist_to_int().le_pow2(-150) && dq.dist_to_int().le_pow2(-150));
        assert!(v.imag.le_pow2(-96) && v.reconstruction.le_pow2(-96));
    }

    #[test]
    fn grid_is_continuous_and_refinement_stable() {
        let fam = example1();
        let disc = Disc::new(Complex64::new(4.0, 0.5), 0.4, 0.05, 8, 2).unwrap();
        let g = theta_sample(&fam, &disc, P, &Sequential).unwrap();
        assert_eq!(g.excluded(), 0);
        let fine = Disc::new(disc.center, disc.radius, disc.margin, 16, 4).unwrap();
        let gf = theta_sample(&fam, &fine, P, &Sequential).unwrap();
        for n in &g.nodes[1..] {
            let m = gf.nodes.iter().find(|m| m.ring == 2 * n.ring && m.spoke == 2 * n.spoke).unwrap();
            let (a, b) = (n.value.as_ref().unwrap(), m.value.as_ref().unwrap());
            for k in 0..2 {
                assert!((&a.p[k] - &b.p[k]).abs().le_pow2(-100));
                assert!((&a.s[k] - &b.s[k]).abs().le_pow2(-100));
            }
        }
        // Neighbours along a spoke differ by O(spacing).
        for j in 0..8 {
            let a = g.nodes[1 + 2 * j].value.as_ref().unwrap();
            let b = g.nodes[2 + 2 * j].value.as_ref().unwrap();
            assert!((&a.q[1] - &b.q[1]).abs().to_f64() < 1.0);
        }
    }

    #[test]
    fn two_torsion_specializations_have_half_integral_coordinates() {
        // P1 is 2-torsion at λ = 2; Betti coordinates sit in (1/2)Z².
        let fam = FamilySpec::new(vec![p1()], SecondFactor::Units(vec![RationalFunction::lambda()])).unwrap();
        let t = Complex::from_i64(2, P + 24);
        let tr = Track::anchored(&fam, Complex64::new(2.0, 0.3)).unwrap();
        let node = evaluate(&fam, &tr, &Complex::from_f64(2.0, 0.3, P + 24), P).unwrap();
        let b = betti_vector(&node, P).unwrap();
        assert!(b.p[0].dist_to_int() > Float::from_f64(1e-6, P) || b.q[0].dist_to_int() > Float::from_f64(1e-6, P));
        let ctx = LatticeContext::new(&period_basis(&t, P).unwrap());
        let pt = AffinePoint::new(Complex::from_i64(2, P), Complex::zero(P));
        let z = ctx.elliptic_log(&pt, None).unwrap();
        let (p, q) = betti_coords(&z, &ctx.basis).unwrap();
        for v in [p.mul_2k(1), q.mul_2k(1)] {
            assert!(v.dist_to_int().le_pow2(-150));
        }
    }

    #[test]
    fn residuals() {
        let fam = FamilySpec::new(vec![p1()], SecondFactor::Units(vec![RationalFunction::lambda(), RationalFunction::from_ints(&[-1, 1], &[1])]))
            .unwrap();
        // u1 = λ = 1 is a singular value, so probe u2 = λ − 1 = 1 at λ = 2 via direct vectors.
        let v = BettiVector {
            t: Complex::from_i64(2, P),
            p: vec![Float::from_f64(0.5, P)],
            q: vec![Float::zero(P)],
            r: vec![Float::from_f64(0.69, P), Float::zero(P)],
            s: vec![Float::zero(P), Float::zero(P)],
            imag: Float::zero(P),
            reconstruction: Float::zero(P),
            prec: P,
        };
        let rel = RelationVector::integral(&[2], &[0, 1]);
        let (r1, r2) = relation_residual(&v, &rel, 3, None).unwrap();
        assert!(r1.is_zero() && r2.is_zero());
        let rel = RelationVector::integral(&[1], &[1, 0]);
        let (r1, r2) = relation_residual(&v, &rel, 3, None).unwrap();
        assert!((r1 - Float::from_f64(0.5, P)).abs().le_pow2(-100));
        assert!((r2 - Float::from_f64(0.69, P)).abs().le_pow2(-100));
        let bad = RelationVector::integral(&[1, 2], &[1, 0]);
        assert!(matches!(relation_residual(&v, &bad, 3, None), Err(Error::DimensionMismatch(_))));
        let _ = fam;
    }

    #[test]
    fn cm_matrix_squares_to_minus_identity() {
        let b = period_basis(&Complex::from_i64(-1, P), P).unwrap();
        let m = cm_matrix(&b).unwrap();
        assert_eq!(m.square(), [[-1, 0], [0, -1]]);
        let b2 = period_basis(&Complex::from_i64(2, P), P).unwrap();
        // λ = 2 has j = 1728 as well; the Gaussian action exists there too, in a sheared basis.
        assert!(cm_matrix(&b2).is_ok());
        let b3 = period_basis(&Complex::from_f64(0.3, 0.2, P), P).unwrap();
        assert_eq!(cm_matrix(&b3).unwrap_err(), Error::CmUnsupported);
    }
}
