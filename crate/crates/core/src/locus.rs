//! Relation loci in a disc: zeros of `Σ a_i z_i − m_1 f − m_2 g` (and of the second-factor
//! analogue), double-relation points, torsion parameters, the roots-of-unity scan and the
//! counting sets.
//!
//! Every distinct zero becomes a [`Site`]: it is refined once and its Betti coordinates are
//! cached, so further relations only need a residual check.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::betti::{betti_coords, cm_matrix, combine_first, combine_second, eval_first, eval_second, target_distance, CmInt, CmMatrix, RelationVector, SecondTrack, SecondValue, Track};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::family::FamilySpec;
use crate::legendre::{division_poly_torsion_params, sort_complex, to_c64, AffinePoint, Region, RationalFunction};
use crate::mp::{Complex, Float};
use crate::periods::{coords_f64, period_basis, LatticeContext, GUARD_BITS};

const TWO_PI: f64 = core::f64::consts::TAU;

/// The factor a single relation constrains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Side {
    First(Vec<i64>),
    Second(Vec<CmInt>),
}

impl Side {
    fn is_zero(&self) -> bool {
        match self {
            Side::First(a) => a.iter().all(|v| *v == 0),
            Side::Second(b) => b.iter().all(|v| v.re == 0 && v.im == 0),
        }
    }

    fn relation(&self, n: usize, m: usize) -> RelationVector {
        match self {
            Side::First(a) => RelationVector::new(a.clone(), vec![CmInt::int(0); m]),
            Side::Second(b) => RelationVector::new(vec![0; n], b.clone()),
        }
    }
}

/// Square-gridded search disc; zeros closer than `margin` to a singular value are not searched
/// for, except at branch values, which are evaluated directly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchDisc {
    pub center: Complex64,
    pub radius: f64,
    pub margin: f64,
    /// Grid cells per diameter.
    pub grid: usize,
}

impl SearchDisc {
    pub fn new(center: Complex64, radius: f64, margin: f64, grid: usize) -> Result<SearchDisc> {
        if !(radius > 0.0 && radius.is_finite()) || !(margin > 0.0) {
            return Err(Error::InvalidDisc("radius and margin must be positive".into()));
        }
        if grid < 2 {
            return Err(Error::InvalidDisc("grid needs at least two cells".into()));
        }
        Ok(SearchDisc { center, radius, margin, grid })
    }

    pub fn contains(&self, t: Complex64) -> bool {
        (t - self.center).norm() <= self.radius
    }

    pub fn region(&self) -> Region {
        Region::disc(self.center.re, self.center.im, self.radius)
    }

    fn spacing(&self) -> f64 {
        2.0 * self.radius / self.grid as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    Candidate,
    Refined,
    Certified,
}

#[derive(Clone, Debug)]
pub struct LocusPoint {
    pub t0: Complex,
    pub rel: RelationVector,
    /// `(a_{n+1}, a_{n+2})`.
    pub first_witness: Option<[i64; 2]>,
    /// `(b_{m+1}, b_{m+2})`; the first entry is 0 for multiplicative coordinates.
    pub second_witness: Option<[i64; 2]>,
    pub rho1: f64,
    pub rho2: f64,
    pub level: Level,
    /// Evaluated at a branch value instead of Newton-refined.
    pub direct: bool,
}

impl LocusPoint {
    pub fn t0_f64(&self) -> Complex64 {
        to_c64(&self.t0)
    }
}

struct Leaf {
    v: [Complex64; 3],
    tracks: [Track; 3],
}

/// Continued double-precision state on a triangulation of the disc.
pub struct Cover {
    leaves: Vec<Leaf>,
    /// Grid vertices and triangles given up on (unreachable or too close to a singular value).
    pub excluded: usize,
}

fn in_triangle(v: &[Complex64; 3], p: Complex64) -> bool {
    let cross = |a: Complex64, b: Complex64| a.re * b.im - a.im * b.re;
    let d1 = cross(v[1] - v[0], p - v[0]);
    let d2 = cross(v[2] - v[1], p - v[1]);
    let d3 = cross(v[0] - v[2], p - v[2]);
    let neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
    let pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
    !(neg && pos)
}

impl Cover {
    pub fn build(fam: &FamilySpec, disc: &SearchDisc) -> Result<Cover> {
        let k = disc.grid;
        let h = disc.spacing();
        let origin = disc.center - Complex64::new(disc.radius, disc.radius);
        let vert = |i: usize, j: usize| origin + Complex64::new(i as f64 * h, j as f64 * h);
        let reach = disc.radius + 1.5 * h;
        let usable = |t: Complex64| (t - disc.center).norm() <= reach && fam.singular_distance(t) >= disc.margin / 2.0;
        let idx = |i: usize, j: usize| i * (k + 1) + j;
        let mut tracks: Vec<Option<Track>> = vec![None; (k + 1) * (k + 1)];
        let mut excluded = 0usize;
        let mut start = None;
        let mut best = f64::INFINITY;
        for i in 0..=k {
            for j in 0..=k {
                let t = vert(i, j);
                let d = (t - disc.center).norm();
                if usable(t) && d < best {
                    best = d;
                    start = Some((i, j));
                }
            }
        }
        let (i0, j0) = start.ok_or_else(|| Error::InvalidDisc("no usable grid vertex".into()))?;
        tracks[idx(i0, j0)] = Some(Track::anchored(fam, vert(i0, j0))?);
        let mut queue = VecDeque::from([(i0, j0)]);
        while let Some((i, j)) = queue.pop_front() {
            let cur = tracks[idx(i, j)].clone().unwrap();
            let nbrs = [(i.wrapping_sub(1), j), (i + 1, j), (i, j.wrapping_sub(1)), (i, j + 1)];
            for (a, b) in nbrs {
                if a > k || b > k || tracks[idx(a, b)].is_some() || !usable(vert(a, b)) {
                    continue;
                }
                match cur.advance(fam, vert(a, b)) {
                    Ok(tr) => {
                        tracks[idx(a, b)] = Some(tr);
                        queue.push_back((a, b));
                    }
                    Err(_) => excluded += 1,
                }
            }
        }
        let mut leaves = Vec::new();
        for i in 0..k {
            for j in 0..k {
                for tri in [[(i, j), (i + 1, j), (i + 1, j + 1)], [(i, j), (i + 1, j + 1), (i, j + 1)]] {
                    let v = [vert(tri[0].0, tri[0].1), vert(tri[1].0, tri[1].1), vert(tri[2].0, tri[2].1)];
                    if v.iter().all(|t| (t - disc.center).norm() > disc.radius + h) {
                        continue;
                    }
                    // Rotate so that the first vertex carries a track.
                    let Some(r) = (0..3).find(|&r| tracks[idx(tri[r].0, tri[r].1)].is_some()) else {
                        excluded += 1;
                        continue;
                    };
                    let v = [v[r], v[(r + 1) % 3], v[(r + 2) % 3]];
                    let tr0 = tracks[idx(tri[r].0, tri[r].1)].clone().unwrap();
                    subdivide(fam, disc, v, tr0, 0, &mut leaves, &mut excluded);
                }
            }
        }
        Ok(Cover { leaves, excluded })
    }

    pub fn leaves(&self) -> usize {
        self.leaves.len()
    }

    /// Track at the leaf vertex nearest to `t`.
    fn nearest_track(&self, t: Complex64) -> Option<&Track> {
        self.leaves.iter().flat_map(|l| l.tracks.iter()).min_by(|a, b| (a.t - t).norm().total_cmp(&(b.t - t).norm()))
    }
}

fn subdivide(fam: &FamilySpec, disc: &SearchDisc, v: [Complex64; 3], tr0: Track, depth: u32, out: &mut Vec<Leaf>, excluded: &mut usize) {
    let diam = (v[0] - v[1]).norm().max((v[1] - v[2]).norm()).max((v[2] - v[0]).norm());
    if v.iter().all(|t| (t - disc.center).norm() > disc.radius + diam) {
        return;
    }
    let cen = (v[0] + v[1] + v[2]) / 3.0;
    let ds = fam.singular_distance(cen);
    let encloses = fam.singular_values().iter().any(|s| in_triangle(&v, *s));
    if encloses || diam > ds / 2.0 {
        if diam < disc.margin / 4.0 || depth >= 16 {
            *excluded += 1;
            return;
        }
        let m01 = (v[0] + v[1]) / 2.0;
        let m12 = (v[1] + v[2]) / 2.0;
        let m20 = (v[2] + v[0]) / 2.0;
        for sub in [[v[0], m01, m20], [m01, v[1], m12], [m20, m12, v[2]], [m01, m12, m20]] {
            let tr = if sub[0] == v[0] { Ok(tr0.clone()) } else { tr0.advance(fam, sub[0]) };
            match tr {
                Ok(tr) => subdivide(fam, disc, sub, tr, depth + 1, out, excluded),
                Err(_) => *excluded += 1,
            }
        }
        return;
    }
    match (tr0.advance(fam, v[1]), tr0.advance(fam, v[2])) {
        (Ok(t1), Ok(t2)) => out.push(Leaf { v, tracks: [tr0, t1, t2] }),
        _ => *excluded += 1,
    }
}

/// `(L, ω1, ω2)` in double precision: the relation combination and the lattice it is reduced by.
fn side_f64(track: &Track, side: &Side) -> Option<(Complex64, Complex64, Complex64)> {
    match side {
        Side::First(a) => Some((track.first_combination(a), track.first.lattice.0, track.first.lattice.1)),
        Side::Second(b) => match &track.second {
            SecondTrack::Elliptic(e) => {
                let l = b.iter().zip(&e.zs).map(|(c, w)| Complex64::new(c.re as f64, c.im as f64) * w).sum();
                Some((l, e.lattice.0, e.lattice.1))
            }
            SecondTrack::Units(ws) => {
                if b.iter().any(|c| c.im != 0) {
                    return None;
                }
                let l = b.iter().zip(ws).map(|(c, w)| w * c.re as f64).sum();
                Some((l, Complex64::new(1.0, 0.0), Complex64::new(0.0, TWO_PI)))
            }
        },
    }
}

fn g_f64(track: &Track, side: &Side, m: [i64; 2]) -> Option<Complex64> {
    let (l, w1, w2) = side_f64(track, side)?;
    Some(l - w1 * m[0] as f64 - w2 * m[1] as f64)
}

fn units_side(fam: &FamilySpec, side: &Side) -> bool {
    matches!(side, Side::Second(_)) && fam.case_tag() == 3
}

/// Integer targets inside the image triangle, with barycentric seeds.
fn leaf_seeds(leaf: &Leaf, side: &Side, units: bool, out: &mut Vec<([i64; 2], Complex64)>) {
    let mut vs = [(0.0, 0.0); 3];
    for k in 0..3 {
        let Some((l, w1, w2)) = side_f64(&leaf.tracks[k], side) else { return };
        vs[k] = coords_f64(l, w1, w2);
    }
    let (e1, e2) = ((vs[1].0 - vs[0].0, vs[1].1 - vs[0].1), (vs[2].0 - vs[0].0, vs[2].1 - vs[0].1));
    let det = e1.0 * e2.1 - e1.1 * e2.0;
    if !(det.abs() > 1e-14) {
        return;
    }
    let slack = 1e-6;
    let lo = |k: usize| vs.iter().map(|v| if k == 0 { v.0 } else { v.1 }).fold(f64::INFINITY, f64::min) - slack;
    let hi = |k: usize| vs.iter().map(|v| if k == 0 { v.0 } else { v.1 }).fold(f64::NEG_INFINITY, f64::max) + slack;
    let (a0, a1) = (libm::ceil(lo(0)), libm::floor(hi(0)));
    let (b0, b1) = (libm::ceil(lo(1)), libm::floor(hi(1)));
    if (a1 - a0 + 1.0) * (b1 - b0 + 1.0) > 1e5 {
        return;
    }
    let mut m1 = a0;
    while m1 <= a1 {
        if units && m1 != 0.0 {
            m1 += 1.0;
            continue;
        }
        let mut m2 = b0;
        while m2 <= b1 {
            let d = (m1 - vs[0].0, m2 - vs[0].1);
            let l1 = (d.0 * e2.1 - d.1 * e2.0) / det;
            let l2 = (e1.0 * d.1 - e1.1 * d.0) / det;
            if l1 >= -slack && l2 >= -slack && l1 + l2 <= 1.0 + slack {
                let t = leaf.v[0] + (leaf.v[1] - leaf.v[0]) * l1 + (leaf.v[2] - leaf.v[0]) * l2;
                out.push(([m1 as i64, m2 as i64], t));
            }
            m2 += 1.0;
        }
        m1 += 1.0;
    }
}

/// Newton in one complex variable with central differences, continuing from `tr0`.
fn newton_f64(fam: &FamilySpec, tr0: &Track, side: &Side, m: [i64; 2], seed: Complex64, limit: f64) -> Option<(Complex64, Track)> {
    let mut t = seed;
    for _ in 0..30 {
        let tr = tr0.advance(fam, t).ok()?;
        let g = g_f64(&tr, side, m)?;
        let h = (1e-5 * t.norm().max(1.0)).min(fam.singular_distance(t) / 16.0);
        let gp = g_f64(&tr.advance(fam, t + h).ok()?, side, m)?;
        let gm = g_f64(&tr.advance(fam, t - h).ok()?, side, m)?;
        let d = (gp - gm) / (2.0 * h);
        if !(d.norm() > 0.0) {
            return None;
        }
        let dt = g / d;
        t -= dt;
        if !(t.re.is_finite() && t.im.is_finite()) || (t - seed).norm() > limit {
            return None;
        }
        if dt.norm() <= 1e-13 * t.norm().max(1.0) {
            let tr = tr0.advance(fam, t).ok()?;
            return Some((t, tr));
        }
    }
    None
}

/// One factor evaluated at a multiprecision parameter: logarithms, the reducing lattice and
/// real coordinates of every logarithm.
#[derive(Clone, Debug)]
struct SideData {
    logs: Vec<Complex>,
    w1: Complex,
    w2: Complex,
    coords: Vec<(Float, Float)>,
    cm: Option<CmMatrix>,
}

fn side_data(fam: &FamilySpec, track: &Track, t: &Complex, prec: u32, first: bool, direct: bool) -> Result<SideData> {
    if first {
        let v = eval_first(fam, track, t, prec, direct)?;
        let coords = v.logs.iter().map(|z| betti_coords(z, &v.basis)).collect::<Result<Vec<_>>>()?;
        return Ok(SideData { logs: v.logs, w1: v.basis.f.clone(), w2: v.basis.g.clone(), coords, cm: None });
    }
    match eval_second(fam, track, t, prec, direct)? {
        SecondValue::Elliptic(v) => {
            let coords = v.logs.iter().map(|z| betti_coords(z, &v.basis)).collect::<Result<Vec<_>>>()?;
            let cm = if fam.cm() { Some(cm_matrix(&v.basis)?) } else { None };
            Ok(SideData { logs: v.logs, w1: v.basis.f.clone(), w2: v.basis.g.clone(), coords, cm })
        }
        SecondValue::Units { logs, .. } => {
            let wp = prec + GUARD_BITS;
            let two_pi = Float::pi(wp).mul_2k(1);
            let coords = logs.iter().map(|w| (w.re.clone(), &w.im / &two_pi)).collect();
            Ok(SideData { logs, w1: Complex::one(wp), w2: Complex::new(Float::zero(wp), two_pi), coords, cm: None })
        }
    }
}

fn g_mp(d: &SideData, side: &Side, m: [i64; 2]) -> Complex {
    let prec = d.w1.prec();
    let mut l = Complex::zero(prec);
    match side {
        Side::First(a) => {
            for (c, z) in a.iter().zip(&d.logs) {
                l += &z.scale_i64(*c);
            }
        }
        Side::Second(b) => {
            for (c, w) in b.iter().zip(&d.logs) {
                l += &w.scale_i64(c.re);
                if c.im != 0 {
                    l += &w.mul_i().scale_i64(c.im);
                }
            }
        }
    }
    l - d.w1.scale_i64(m[0]) - d.w2.scale_i64(m[1])
}

/// Distance of the relation combination from its target, with the nearest target.
fn residual(d: &SideData, side: &Side, units: bool) -> Option<(Float, [i64; 2])> {
    let prec = d.coords.first().map(|c| c.0.prec()).unwrap_or(64);
    let xs: Vec<Float> = d.coords.iter().map(|c| c.0.clone()).collect();
    let ys: Vec<Float> = d.coords.iter().map(|c| c.1.clone()).collect();
    let (x, y) = match side {
        Side::First(a) => combine_first(&xs, &ys, a, prec),
        Side::Second(b) => {
            if b.iter().any(|c| c.im != 0) && d.cm.is_none() {
                return None;
            }
            combine_second(&xs, &ys, b, d.cm.as_ref(), prec)
        }
    };
    let m1 = if units { 0 } else { x.round_i64()? };
    Some((target_distance(&x, &y, units), [m1, y.round_i64()?]))
}

fn mp_newton(fam: &FamilySpec, track: &Track, t: &Complex, prec: u32, side: &Side, m: [i64; 2], h_exp: i64, stop_exp: i64) -> Result<Complex> {
    let first = matches!(side, Side::First(_));
    let wp = prec + GUARD_BITS;
    let g = |t: &Complex| side_data(fam, track, t, prec, first, false).map(|d| g_mp(&d, side, m));
    let mut t = t.with_prec(wp);
    let h = Complex::from_real(Float::one(wp).mul_2k(h_exp));
    let deriv = |t: &Complex| -> Result<Complex> {
        let d = (g(&(t + &h))? - g(&(t - &h))?) / h.scale_i64(2);
        if d.is_zero() {
            return Err(Error::NewtonDivergence);
        }
        Ok(d)
    };
    // The derivative is refreshed once after the first step; later steps reuse it.
    let mut d = deriv(&t)?;
    let mut gt = g(&t)?;
    for it in 0..10 {
        if it == 1 {
            d = deriv(&t)?;
        }
        let dt = &gt / &d;
        t = &t - &dt;
        if dt.max_abs().le_pow2(stop_exp) {
            return Ok(t);
        }
        if to_c64(&dt).norm() > 1e-6 {
            return Err(Error::NewtonDivergence);
        }
        gt = g(&t)?;
    }
    Err(Error::NewtonDivergence)
}

/// A distinct zero with cached coordinates at `prec` and `2·prec`.
#[derive(Clone, Debug)]
pub struct Site {
    t_f64: Complex64,
    track: Track,
    t1: Complex,
    t2: Option<Complex>,
    direct: bool,
    level: Level,
    first: [Option<SideData>; 2],
    second: [Option<SideData>; 2],
}

impl Site {
    pub fn t0(&self) -> &Complex {
        self.t2.as_ref().unwrap_or(&self.t1)
    }

    pub fn t_f64(&self) -> Complex64 {
        self.t_f64
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn direct(&self) -> bool {
        self.direct
    }

    fn data(&self, first: bool) -> &[Option<SideData>; 2] {
        if first {
            &self.first
        } else {
            &self.second
        }
    }

    /// Fills in the coordinates of one factor at both precisions.
    fn ensure(&mut self, fam: &FamilySpec, prec: u32, first: bool) {
        let have = self.data(first)[0].is_some();
        if have {
            return;
        }
        let d1 = side_data(fam, &self.track, &self.t1, prec, first, self.direct).ok();
        let d2 = self.t2.as_ref().and_then(|t2| side_data(fam, &self.track, t2, 2 * prec, first, self.direct).ok());
        let slot = if first { &mut self.first } else { &mut self.second };
        *slot = [d1, d2];
    }

    /// Residuals of `side` at `prec` and `2·prec`, with the witness, when the cached data exist.
    fn check(&self, side: &Side, units: bool) -> Option<(Float, Option<Float>, [i64; 2])> {
        let first = matches!(side, Side::First(_));
        let d = self.data(first);
        let (r1, w) = residual(d[0].as_ref()?, side, units)?;
        let r2 = d[1].as_ref().and_then(|d| residual(d, side, units)).map(|r| r.0);
        Some((r1, r2, w))
    }
}

fn classify(prec: u32, site_level: Level, r1: &Float, r2: Option<&Float>, tol_exp: i64) -> Level {
    if !r1.le_pow2(tol_exp) {
        return Level::Candidate;
    }
    match (site_level, r2) {
        (Level::Certified, Some(r2)) if r2.le_pow2(-(prec as i64)) => Level::Certified,
        _ => Level::Refined,
    }
}

fn refine_site(fam: &FamilySpec, t: Complex64, track: Track, side: &Side, m: [i64; 2], prec: u32) -> Result<Site> {
    let p = prec as i64;
    let first = matches!(side, Side::First(_));
    let t0 = Complex::from_f64(t.re, t.im, prec + GUARD_BITS);
    let t1 = mp_newton(fam, &track, &t0, prec, side, m, -p / 4, -p + 16)?;
    let mut site = Site { t_f64: t, track, t1, t2: None, direct: false, level: Level::Candidate, first: [None, None], second: [None, None] };
    site.ensure(fam, prec, first);
    let units = units_side(fam, side);
    let ok1 = site.check(side, units).is_some_and(|(r, _, _)| r.le_pow2(-p / 2));
    if !ok1 {
        return Ok(site);
    }
    site.level = Level::Refined;
    let t2 = mp_newton(fam, &site.track, &site.t1, 2 * prec, side, m, -p / 2, -2 * p + 16);
    if let Ok(t2) = t2 {
        let moved = (&t2 - &site.t1).max_abs();
        site.t2 = Some(t2);
        let slot = if first { &mut site.first } else { &mut site.second };
        slot[1] = side_data(fam, &site.track, site.t2.as_ref().unwrap(), 2 * prec, first, false).ok();
        if moved.le_pow2(-p / 4) && site.check(side, units).is_some_and(|(_, r2, _)| r2.is_some_and(|r2| r2.le_pow2(-p))) {
            site.level = Level::Certified;
        }
    }
    Ok(site)
}

fn direct_site(fam: &FamilySpec, cover: &Cover, s: &Complex, s2: &Complex, disc: &SearchDisc) -> Option<Site> {
    let sf = to_c64(s);
    let near = cover.nearest_track(sf)?;
    let dir = near.t - sf;
    if dir.norm() == 0.0 {
        return None;
    }
    let step = dir.norm().min(disc.margin / 4.0);
    let track = near.advance(fam, sf + dir * (step / dir.norm())).ok()?;
    Some(Site { t_f64: sf, track, t1: s.clone(), t2: Some(s2.clone()), direct: true, level: Level::Certified, first: [None, None], second: [None, None] })
}

/// Output of one single-relation search.
#[derive(Clone, Debug)]
pub struct SingleLocus {
    pub side: Side,
    pub points: Vec<LocusPoint>,
    /// Sup-norm bound on the witnesses over the sampled disc.
    pub witness_bound: i64,
    pub seeds: usize,
    /// Seeds whose Newton iteration failed or left the disc.
    pub dropped: usize,
}

/// Holds the triangulated disc and the cache of refined zeros across many relations.
pub struct Scanner<'a, E: Executor> {
    fam: &'a FamilySpec,
    disc: SearchDisc,
    prec: u32,
    exec: &'a E,
    cover: Cover,
    sites: Vec<Site>,
}

fn same_point(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= 1e-9 * a.norm().max(1.0)
}

fn cmp_c64(a: &Complex64, b: &Complex64) -> core::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

impl<'a, E: Executor> Scanner<'a, E> {
    pub fn new(fam: &'a FamilySpec, disc: SearchDisc, prec: u32, exec: &'a E) -> Result<Self> {
        if prec < 64 {
            return Err(Error::PrecisionInsufficient);
        }
        let cover = Cover::build(fam, &disc)?;
        let mut sites = Vec::new();
        let s1 = fam.special_values(prec + GUARD_BITS);
        let s2 = fam.special_values(2 * prec + GUARD_BITS);
        for s in &s1 {
            if !disc.contains(to_c64(s)) {
                continue;
            }
            let Some(s2) = s2.iter().find(|o| same_point(to_c64(o), to_c64(s))) else { continue };
            if let Some(site) = direct_site(fam, &cover, s, s2, &disc) {
                sites.push(site);
            }
        }
        Ok(Scanner { fam, disc, prec, exec, cover, sites })
    }

    pub fn excluded(&self) -> usize {
        self.cover.excluded
    }

    pub fn cover(&self) -> &Cover {
        &self.cover
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    fn check_dims(&self, side: &Side) -> Result<()> {
        let (len, want) = match side {
            Side::First(a) => (a.len(), self.fam.n()),
            Side::Second(b) => (b.len(), self.fam.m()),
        };
        if len != want {
            return Err(Error::DimensionMismatch(format!("relation has length {}, expected {}", len, want)));
        }
        if side.is_zero() {
            return Err(Error::DimensionMismatch("relation vector is zero".into()));
        }
        if let Side::Second(b) = side {
            if b.iter().any(|c| c.im != 0) && !self.fam.cm() {
                return Err(Error::CmUnsupported);
            }
        }
        Ok(())
    }

    /// Zeros of one relation in the disc, refined and certified.
    pub fn single(&mut self, side: &Side) -> Result<SingleLocus> {
        self.check_dims(side)?;
        let fam = self.fam;
        let disc = self.disc;
        let units = units_side(fam, side);
        let mut seeds = Vec::new();
        let mut bound = 0f64;
        for (li, leaf) in self.cover.leaves.iter().enumerate() {
            let start = seeds.len();
            let mut local = Vec::new();
            leaf_seeds(leaf, side, units, &mut local);
            seeds.extend(local.into_iter().map(|(m, t)| (li, m, t)));
            let _ = start;
            for tr in &leaf.tracks {
                if let Some((l, w1, w2)) = side_f64(tr, side) {
                    let (x, y) = coords_f64(l, w1, w2);
                    bound = bound.max(x.abs()).max(y.abs());
                }
            }
        }
        let n_seeds = seeds.len();
        let leaves = &self.cover.leaves;
        let found = self.exec.map(seeds, |(li, m, t)| {
            let leaf = &leaves[li];
            let diam = (leaf.v[0] - leaf.v[1]).norm().max((leaf.v[1] - leaf.v[2]).norm()).max((leaf.v[2] - leaf.v[0]).norm());
            newton_f64(fam, &leaf.tracks[0], side, m, t, 2.0 * diam + 1e-9).map(|(t, tr)| (t, tr, m))
        });
        let mut cands: Vec<(Complex64, Track, [i64; 2])> = Vec::new();
        let mut dropped = 0usize;
        for c in found {
            match c {
                Some((t, tr, m)) if disc.contains(t) && fam.singular_distance(t) >= disc.margin => cands.push((t, tr, m)),
                _ => dropped += 1,
            }
        }
        cands.sort_by(|a, b| cmp_c64(&a.0, &b.0).then(a.2.cmp(&b.2)));
        let mut uniq: Vec<(Complex64, Track, [i64; 2])> = Vec::new();
        for c in cands {
            if !uniq.iter().any(|u| same_point(u.0, c.0)) {
                uniq.push(c);
            }
        }
        let mut hit: Vec<usize> = Vec::new();
        let mut fresh = Vec::new();
        for c in uniq {
            match self.sites.iter().position(|s| same_point(s.t_f64, c.0)) {
                Some(i) => hit.push(i),
                None => fresh.push(c),
            }
        }
        let prec = self.prec;
        let refined = self.exec.map(fresh, |(t, tr, m)| refine_site(fam, t, tr, side, m, prec));
        for r in refined {
            match r {
                Ok(site) => {
                    hit.push(self.sites.len());
                    self.sites.push(site);
                }
                Err(_) => dropped += 1,
            }
        }
        for (i, s) in self.sites.iter().enumerate() {
            if s.direct && !hit.contains(&i) {
                hit.push(i);
            }
        }
        let first = matches!(side, Side::First(_));
        self.fill(&hit, first);
        let rel = side.relation(fam.n(), fam.m());
        let mut points = Vec::new();
        for &i in &hit {
            let s = &self.sites[i];
            let Some((r1, r2, w)) = s.check(side, units) else { continue };
            let level = classify(prec, s.level, &r1, r2.as_ref(), -(prec as i64) / 2);
            if level == Level::Candidate {
                continue;
            }
            let rho = r2.as_ref().filter(|_| level == Level::Certified).unwrap_or(&r1).to_f64();
            let (fw, sw, rho1, rho2) = if first { (Some(w), None, rho, 0.0) } else { (None, Some(w), 0.0, rho) };
            points.push(LocusPoint { t0: s.t0().clone(), rel: rel.clone(), first_witness: fw, second_witness: sw, rho1, rho2, level, direct: s.direct });
        }
        points.sort_by(|a, b| cmp_c64(&a.t0_f64(), &b.t0_f64()));
        Ok(SingleLocus { side: side.clone(), points, witness_bound: libm::ceil(bound) as i64 + 1, seeds: n_seeds, dropped })
    }

    /// Computes the missing coordinates of one factor at the listed sites.
    fn fill(&mut self, idx: &[usize], first: bool) {
        let fam = self.fam;
        let prec = self.prec;
        let todo: Vec<(usize, Site)> = idx.iter().filter(|&&i| self.sites[i].data(first)[0].is_none()).map(|&i| (i, self.sites[i].clone())).collect();
        let done = self.exec.map(todo, |(i, mut s)| {
            s.ensure(fam, prec, first);
            (i, s)
        });
        for (i, s) in done {
            self.sites[i] = s;
        }
    }

    /// Attaches the second relation `b` to certified first-relation points.
    pub fn double_from(&mut self, single: &SingleLocus, b: &[CmInt]) -> Result<DoubleLocus> {
        let side = Side::Second(b.to_vec());
        self.check_dims(&side)?;
        let a = match &single.side {
            Side::First(a) => a.clone(),
            Side::Second(_) => return Err(Error::DimensionMismatch("first relation expected".into())),
        };
        let idx: Vec<usize> =
            single.points.iter().filter_map(|p| self.sites.iter().position(|s| same_point(to_c64(s.t0()), p.t0_f64()))).collect();
        self.fill(&idx, false);
        let units = units_side(self.fam, &side);
        let p = self.prec as i64;
        let mut out = DoubleLocus::default();
        for (pt, &i) in single.points.iter().zip(&idx) {
            if pt.level != Level::Certified {
                continue;
            }
            let s = &self.sites[i];
            let Some((r1, r2, w)) = s.check(&side, units) else { continue };
            let rel = RelationVector::new(a.clone(), b.to_vec());
            let mut lp = LocusPoint { second_witness: Some(w), rel, ..pt.clone() };
            if classify(self.prec, s.level, &r1, r2.as_ref(), -p / 4) == Level::Certified {
                lp.rho2 = r2.map(|r| r.to_f64()).unwrap_or(0.0);
                out.certified.push(lp);
            } else if r1.le_pow2(-8) {
                lp.rho2 = r1.to_f64();
                lp.level = Level::Refined;
                out.quarantine.push(lp);
            }
        }
        out.excluded_nodes = self.excluded();
        Ok(out)
    }
}

#[derive(Clone, Debug, Default)]
pub struct DoubleLocus {
    pub certified: Vec<LocusPoint>,
    /// Certified on the first relation with `ρ2 ∈ (2^(−prec/4), 2^(−8)]`.
    pub quarantine: Vec<LocusPoint>,
    pub excluded_nodes: usize,
}

/// Zeros of one relation (first factor `a` or second factor `b`) in the disc.
pub fn find_single_locus<E: Executor>(fam: &FamilySpec, side: &Side, disc: &SearchDisc, prec: u32, exec: &E) -> Result<SingleLocus> {
    Scanner::new(fam, *disc, prec, exec)?.single(side)
}

/// Points of `D(a, b)` in the disc. With `a = 0` only the second relation is imposed.
pub fn find_double_locus<E: Executor>(fam: &FamilySpec, rel: &RelationVector, disc: &SearchDisc, prec: u32, exec: &E) -> Result<DoubleLocus> {
    if rel.a.len() != fam.n() || rel.b.len() != fam.m() {
        return Err(Error::DimensionMismatch(format!("relation shape ({}, {}) vs family ({}, {})", rel.a.len(), rel.b.len(), fam.n(), fam.m())));
    }
    let mut sc = Scanner::new(fam, *disc, prec, exec)?;
    if rel.a.iter().all(|v| *v == 0) {
        let single = sc.single(&Side::Second(rel.b.clone()))?;
        let mut out = DoubleLocus { excluded_nodes: sc.excluded(), ..Default::default() };
        for mut p in single.points {
            p.rel = rel.clone();
            p.first_witness = Some([0, 0]);
            match p.level {
                Level::Certified => out.certified.push(p),
                _ => out.quarantine.push(p),
            }
        }
        return Ok(out);
    }
    let single = sc.single(&Side::First(rel.a.clone()))?;
    sc.double_from(&single, &rel.b)
}

/// Both torsion lists when they disagree.
#[derive(Clone, Debug)]
pub struct MismatchReport {
    pub betti: Vec<Complex>,
    pub oracle: Vec<Complex>,
}

/// Parameters in the disc where `P_i` has exact order `n`, from the Betti map and checked
/// against the division-polynomial roots at tolerance `2^(−48)`.
pub fn torsion_parameters<E: Executor>(
    fam: &FamilySpec,
    i: usize,
    n: u32,
    disc: &SearchDisc,
    prec: u32,
    exec: &E,
) -> Result<core::result::Result<Vec<LocusPoint>, MismatchReport>> {
    if n < 2 || n > 64 {
        return Err(Error::InvalidInput(format!("torsion order {} outside 2..=64", n)));
    }
    if i >= fam.n() {
        return Err(Error::DimensionMismatch(format!("point index {} with n = {}", i, fam.n())));
    }
    let mut a = vec![0i64; fam.n()];
    a[i] = n as i64;
    let single = find_single_locus(fam, &Side::First(a), disc, prec, exec)?;
    let nn = n as i64;
    let exact: Vec<LocusPoint> = single
        .points
        .into_iter()
        .filter(|p| p.level == Level::Certified)
        .filter(|p| p.first_witness.is_some_and(|w| w[0].gcd(&w[1]).gcd(&nn) == 1))
        .collect();
    let oracle = division_poly_torsion_params(&fam.points[i], n, &disc.region(), prec)?;
    let close = |x: &Complex, y: &Complex| (x - y.with_prec(x.prec())).max_abs().le_pow2(-48);
    let matched = exact.len() == oracle.len()
        && exact.iter().all(|p| oracle.iter().any(|o| close(&p.t0, o)))
        && oracle.iter().all(|o| exact.iter().any(|p| close(&p.t0, o)));
    if matched {
        Ok(Ok(exact))
    } else {
        let mut betti: Vec<Complex> = exact.iter().map(|p| p.t0.clone()).collect();
        sort_complex(&mut betti);
        Ok(Err(MismatchReport { betti, oracle }))
    }
}

#[derive(Clone, Debug)]
pub struct StollEntry {
    pub order: u32,
    pub k: u32,
    pub lambda0: Complex,
    pub p: Float,
    pub q: Float,
    /// `min_N dist((p, q), N⁻¹Z²)` over `N ≤ N_max`.
    pub min_distance: f64,
    pub best_denominator: u32,
    pub detected: bool,
}

#[derive(Clone, Debug)]
pub struct StollReport {
    pub entries: Vec<StollEntry>,
    pub detections: usize,
    pub min_distance: f64,
}

/// Checks whether `(x(λ0), y)` is torsion of order at most `n_max` for every primitive root of
/// unity `λ0 ≠ 1` of order at most `m_max`.
pub fn stoll_scan(x: &RationalFunction, m_max: u32, n_max: u32, prec: u32) -> Result<StollReport> {
    if m_max > 64 || n_max > 64 || n_max == 0 {
        return Err(Error::InvalidInput("orders and torsion bound must lie in 1..=64".into()));
    }
    let wp = prec + GUARD_BITS;
    let tol = -(prec as i64) / 4;
    let mut entries = Vec::new();
    for d in 2..=m_max {
        for k in 1..d {
            if k.gcd(&d) != 1 {
                continue;
            }
            let ang = Float::pi(wp).mul_2k(1) * Float::from_i64(k as i64, wp) / Float::from_i64(d as i64, wp);
            let (s, c) = ang.sin_cos();
            let l0 = Complex::new(c, s);
            let x0 = x.eval(&l0).ok_or(Error::PointAtInfinity)?;
            let r = &x0 * (&x0 - Complex::one(wp)) * (&x0 - &l0);
            let y = if r.max_abs().le_pow2(-(prec as i64)) { Complex::zero(wp) } else { r.sqrt() };
            let basis = period_basis(&l0, prec)?;
            let ctx = LatticeContext::new(&basis);
            let z = ctx.elliptic_log(&AffinePoint::new(x0, y), None)?;
            let (p, q) = betti_coords(&z, &basis)?;
            let mut best = f64::INFINITY;
            let mut best_n = 1;
            let mut detected = false;
            for n in 1..=n_max {
                let nf = Float::from_i64(n as i64, wp);
                let dist = target_distance(&(&p * &nf), &(&q * &nf), false) / nf;
                if dist.le_pow2(tol) && !detected {
                    detected = true;
                    best_n = n;
                }
                let dv = dist.to_f64();
                if dv < best {
                    best = dv;
                    if !detected {
                        best_n = n;
                    }
                }
            }
            entries.push(StollEntry { order: d, k, lambda0: l0, p, q, min_distance: best, best_denominator: best_n, detected });
        }
    }
    let detections = entries.iter().filter(|e| e.detected).count();
    let min_distance = entries.iter().map(|e| e.min_distance).fold(f64::INFINITY, f64::min);
    Ok(StollReport { entries, detections, min_distance })
}

/// Rational witnesses `(d_j, e_j)` on a constant curve: a torsion translate of denominator
/// dividing `N(b_j*)` for the entry of smallest nonzero norm.
pub fn constant_witness(b: &[CmInt], w: [i64; 2], cm: Option<&CmMatrix>) -> Option<Vec<(BigRational, BigRational)>> {
    let (js, bj) = b.iter().enumerate().filter(|(_, c)| c.norm() != 0).min_by_key(|(i, c)| (c.norm(), *i))?;
    // Matrix of b_j on coordinate columns.
    let mm = cm.map(|c| c.0).unwrap_or([[0, -1], [1, 0]]);
    if bj.im != 0 && cm.is_none() {
        return None;
    }
    let m = [[bj.re + bj.im * mm[0][0], bj.im * mm[0][1]], [bj.im * mm[1][0], bj.re + bj.im * mm[1][1]]];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det == 0 {
        return None;
    }
    let r = |n: i64| BigRational::new(BigInt::from(n), BigInt::from(det));
    let d = r(m[1][1] * w[0] - m[0][1] * w[1]);
    let e = r(-m[1][0] * w[0] + m[0][0] * w[1]);
    let mut out = vec![(BigRational::zero(), BigRational::zero()); b.len()];
    out[js] = (d, e);
    Some(out)
}

/// Affine height `max(|num|, |den|)` of a rational.
pub fn affine_height_of(r: &BigRational) -> BigInt {
    let n = r.numer().abs();
    let d = r.denom().abs();
    if n > d {
        n
    } else {
        d
    }
}

#[derive(Clone, Debug)]
pub struct CountReport {
    pub rel: RelationVector,
    pub t_bound: i64,
    /// Points of the single relation with witnesses of height at most `T`.
    pub single: usize,
    /// Points of `D(a, b)` with witnesses of height at most `T`.
    pub double: usize,
    pub points: Vec<LocusPoint>,
    pub excluded_nodes: usize,
    /// Sup-norm bound on first-factor witnesses over the disc.
    pub witness_bound: i64,
}

fn witness_height(p: &LocusPoint, fam: &FamilySpec, cm: Option<&CmMatrix>) -> Option<BigInt> {
    let mut h = BigInt::zero();
    if let Some(w) = p.first_witness {
        h = h.max(BigInt::from(w[0].abs().max(w[1].abs())));
    }
    if let Some(w) = p.second_witness {
        if fam.case_tag() == 2 {
            for (d, e) in constant_witness(&p.rel.b, w, cm)? {
                h = h.max(affine_height_of(&d)).max(affine_height_of(&e));
            }
        } else {
            h = h.max(BigInt::from(w[0].abs().max(w[1].abs())));
        }
    }
    Some(h)
}

/// Sizes of the counting sets for witnesses of height at most `T`.
pub fn count_sets<E: Executor>(fam: &FamilySpec, rel: &RelationVector, t_bound: i64, disc: &SearchDisc, prec: u32, exec: &E) -> Result<CountReport> {
    if t_bound < 1 {
        return Err(Error::InvalidInput("T must be at least 1".into()));
    }
    let mut sc = Scanner::new(fam, *disc, prec, exec)?;
    let single = sc.single(&Side::First(rel.a.clone()))?;
    let double = sc.double_from(&single, &rel.b)?;
    let cm = if fam.cm() {
        let b = period_basis(&Complex::from_i64(-1, prec + GUARD_BITS), prec)?;
        Some(cm_matrix(&b)?)
    } else {
        None
    };
    let tb = BigInt::from(t_bound);
    let single_count =
        single.points.iter().filter(|p| p.level == Level::Certified && witness_height(p, fam, cm.as_ref()).is_some_and(|h| h <= tb)).count();
    let points: Vec<LocusPoint> = double.certified.into_iter().filter(|p| witness_height(p, fam, cm.as_ref()).is_some_and(|h| h <= tb)).collect();
    Ok(CountReport {
        rel: rel.clone(),
        t_bound,
        single: single_count,
        double: points.len(),
        points,
        excluded_nodes: sc.excluded(),
        witness_bound: single.witness_bound,
    })
}

/// Nonzero integer vectors of sup norm at most `bound`, one of each `±` pair.
pub fn relation_vectors(len: usize, bound: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut v = vec![-bound; len];
    loop {
        let lead = v.iter().find(|x| **x != 0);
        if lead.is_some_and(|x| *x > 0) {
            out.push(v.clone());
        }
        let mut k = 0;
        loop {
            if k == len {
                out.sort_by_key(|v| (v.iter().map(|x| x.abs()).max().unwrap_or(0), v.clone()));
                return out;
            }
            if v[k] < bound {
                v[k] += 1;
                break;
            }
            v[k] = -bound;
            k += 1;
        }
    }
}

/// Gaussian-integer vectors with `N(b_j) ≤ bound`, one of each associate class under `±1`.
pub fn cm_relation_vectors(len: usize, bound: i64) -> Vec<Vec<CmInt>> {
    let r = libm::floor(libm::sqrt(bound as f64)) as i64;
    let entries: Vec<CmInt> =
        (-r..=r).flat_map(|re| (-r..=r).map(move |im| CmInt { re, im })).filter(|c| c.norm() <= bound).collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; len];
    loop {
        let v: Vec<CmInt> = idx.iter().map(|&i| entries[i]).collect();
        if let Some(lead) = v.iter().find(|c| c.norm() != 0) {
            if lead.re > 0 || (lead.re == 0 && lead.im > 0) {
                out.push(v);
            }
        }
        let mut k = 0;
        loop {
            if k == len {
                out.sort_by_key(|v| (v.iter().map(CmInt::norm).max().unwrap_or(0), v.clone()));
                return out;
            }
            if idx[k] + 1 < entries.len() {
                idx[k] += 1;
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn gcd_all(a: &[i64], b: &[CmInt]) -> i64 {
    let mut g = 0i64;
    for v in a {
        g = g.gcd(v);
    }
    for c in b {
        g = g.gcd(&c.re).gcd(&c.im);
    }
    g
}

/// Counts from a sweep over all relations up to given norms.
#[derive(Clone, Debug)]
pub struct ScanReport {
    /// `(k, number of distinct certified single-relation points with |a| ≤ k)`.
    pub single_counts: Vec<(i64, usize)>,
    /// Certified points of `D(a, b)` for jointly primitive `(a, b)`.
    pub double: Vec<LocusPoint>,
    pub quarantine: Vec<LocusPoint>,
    /// Number of distinct parameters among `double`.
    pub distinct_double: usize,
    /// Distinct parameters of `D(a, b)` over all nonzero pairs, primitive or not.
    pub distinct_double_any: usize,
    pub excluded_nodes: usize,
    pub relations_searched: usize,
}

/// What one first relation `a` contributes to a sweep.
#[derive(Clone, Debug)]
pub struct RelationOutcome {
    pub a: Vec<i64>,
    /// Certified single-relation parameters.
    pub single: Vec<Complex64>,
    /// Certified double-relation points over jointly primitive `(a, b)`.
    pub double: Vec<LocusPoint>,
    pub quarantine: Vec<LocusPoint>,
    /// Certified double-relation parameters over all `b`, primitive or not.
    pub any_pair: Vec<Complex64>,
}

/// The second relations swept for a family with entries up to `bmax`.
pub fn second_relations(fam: &FamilySpec, bmax: i64) -> Vec<Vec<CmInt>> {
    if fam.cm() {
        cm_relation_vectors(fam.m(), bmax)
    } else {
        relation_vectors(fam.m(), bmax).into_iter().map(|v| v.into_iter().map(CmInt::int).collect()).collect()
    }
}

impl<'a, E: Executor> Scanner<'a, E> {
    /// The single locus of `a` and its double loci against every `b` in `bvs`.
    pub fn relation(&mut self, a: &[i64], bvs: &[Vec<CmInt>]) -> Result<RelationOutcome> {
        let single = self.single(&Side::First(a.to_vec()))?;
        let mut out = RelationOutcome {
            a: a.to_vec(),
            single: single.points.iter().filter(|p| p.level == Level::Certified).map(LocusPoint::t0_f64).collect(),
            double: Vec::new(),
            quarantine: Vec::new(),
            any_pair: Vec::new(),
        };
        for b in bvs {
            let d = self.double_from(&single, b)?;
            for p in &d.certified {
                if !out.any_pair.iter().any(|s| same_point(*s, p.t0_f64())) {
                    out.any_pair.push(p.t0_f64());
                }
            }
            if gcd_all(a, b) != 1 {
                continue;
            }
            out.double.extend(d.certified);
            out.quarantine.extend(d.quarantine);
        }
        Ok(out)
    }
}

/// Combines per-relation outcomes (in enumeration order) into counts.
pub fn aggregate(outcomes: &[RelationOutcome], excluded_nodes: usize) -> ScanReport {
    let mut by_norm: BTreeMap<i64, Vec<Complex64>> = BTreeMap::new();
    let mut double = Vec::new();
    let mut quarantine = Vec::new();
    let mut any_pair: Vec<Complex64> = Vec::new();
    for o in outcomes {
        let norm = o.a.iter().map(|x| x.abs()).max().unwrap_or(0);
        by_norm.entry(norm).or_default().extend(o.single.iter().copied());
        for t in &o.any_pair {
            if !any_pair.iter().any(|s| same_point(*s, *t)) {
                any_pair.push(*t);
            }
        }
        double.extend(o.double.iter().cloned());
        quarantine.extend(o.quarantine.iter().cloned());
    }
    let mut seen: Vec<Complex64> = Vec::new();
    let mut single_counts = Vec::new();
    for (norm, pts) in by_norm {
        for t in pts {
            if !seen.iter().any(|s| same_point(*s, t)) {
                seen.push(t);
            }
        }
        single_counts.push((norm, seen.len()));
    }
    let mut distinct: Vec<Complex64> = Vec::new();
    for p in &double {
        if !distinct.iter().any(|s| same_point(*s, p.t0_f64())) {
            distinct.push(p.t0_f64());
        }
    }
    let sort = |v: &mut Vec<LocusPoint>| v.sort_by(|a, b| cmp_c64(&a.t0_f64(), &b.t0_f64()).then(a.rel.cmp(&b.rel)));
    sort(&mut double);
    sort(&mut quarantine);
    ScanReport {
        single_counts,
        distinct_double: distinct.len(),
        distinct_double_any: any_pair.len(),
        double,
        quarantine,
        excluded_nodes,
        relations_searched: outcomes.len(),
    }
}

/// Sweeps every `a` with `|a| ≤ amax` and every `b` with `|b| ≤ bmax`; `(a, b)` must be jointly
/// primitive to count as a double-relation point.
pub fn scan_double<E: Executor>(fam: &FamilySpec, amax: i64, bmax: i64, disc: &SearchDisc, prec: u32, exec: &E) -> Result<ScanReport> {
    scan_double_with(fam, amax, bmax, disc, prec, exec, |_, _| {})
}

/// As [`scan_double`], reporting `(done, total)` after each first relation.
pub fn scan_double_with<E: Executor, F: FnMut(usize, usize)>(
    fam: &FamilySpec,
    amax: i64,
    bmax: i64,
    disc: &SearchDisc,
    prec: u32,
    exec: &E,
    mut progress: F,
) -> Result<ScanReport> {
    if amax < 1 || bmax < 1 {
        return Err(Error::InvalidInput("bounds must be at least 1".into()));
    }
    let mut sc = Scanner::new(fam, *disc, prec, exec)?;
    let avs = relation_vectors(fam.n(), amax);
    let bvs = second_relations(fam, bmax);
    let mut outcomes = Vec::with_capacity(avs.len());
    for (k, a) in avs.iter().enumerate() {
        outcomes.push(sc.relation(a, &bvs)?);
        progress(k + 1, avs.len());
    }
    Ok(aggregate(&outcomes, sc.excluded()))
}
