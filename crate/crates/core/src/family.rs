//! Family specifications: the points `P_i` on `E_λ` and the second factor of cases (1)–(3).

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::legendre::{lambda_orbit, seg_dist, PointExpr, RationalFunction};
use crate::mp::Complex;

/// Second factor of the ambient group.
#[derive(Clone, Debug)]
pub enum SecondFactor {
    /// Case (1): points `Q_j` on `E_{μ(λ)}`.
    Elliptic { mu: RationalFunction, points: Vec<PointExpr> },
    /// Case (2): points `Q_j` on the constant curve `E_{μ0}`, optionally with CM by `Z[i]` (`μ0 = -1`).
    Constant { mu0: BigRational, points: Vec<PointExpr>, cm: bool },
    /// Case (3): multiplicative coordinates `u_j(λ)`.
    Units(Vec<RationalFunction>),
}

#[derive(Clone, Debug)]
pub struct FamilySpec {
    pub points: Vec<PointExpr>,
    pub second: SecondFactor,
    lambda: RationalFunction,
    second_curve: Option<RationalFunction>,
    singular: Vec<Complex64>,
}

fn push_roots(rf: &RationalFunction, zeros: bool, poles: bool, out: &mut Vec<Complex64>) {
    let (n, d) = rf.integer_parts();
    for (p, want) in [(n, zeros), (d, poles)] {
        if want && p.degree() > 0 {
            for r in p.squarefree_part().roots(64) {
                out.push(crate::legendre::to_c64(&r));
            }
        }
    }
}

impl FamilySpec {
    pub fn new(points: Vec<PointExpr>, second: SecondFactor) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidFamily("at least one point P_i is required".into()));
        }
        let lambda = RationalFunction::lambda();
        for (i, p) in points.iter().enumerate() {
            if p.curve() != &lambda {
                return Err(Error::InvalidFamily(format!("P_{} is not on E_lambda", i + 1)));
            }
        }
        let second_curve = match &second {
            SecondFactor::Elliptic { mu, points: qs } => {
                if lambda_orbit().iter().any(|o| o == mu) {
                    return Err(Error::InvalidFamily("mu lies in the lambda-orbit; E_lambda and E_mu are isogenous".into()));
                }
                if mu.as_constant().is_some() {
                    return Err(Error::InvalidFamily("constant mu belongs to case 2".into()));
                }
                for (j, q) in qs.iter().enumerate() {
                    if q.curve() != mu {
                        return Err(Error::InvalidFamily(format!("Q_{} is not on E_mu", j + 1)));
                    }
                }
                Some(mu.clone())
            }
            SecondFactor::Constant { mu0, points: qs, cm } => {
                if mu0.is_zero() || mu0.is_one() {
                    return Err(Error::InvalidFamily("mu0 must avoid 0 and 1".into()));
                }
                let minus_one = -BigRational::one();
                if *cm && *mu0 != minus_one {
                    return Err(Error::CmUnsupported);
                }
                let c = RationalFunction::constant(mu0.clone());
                for (j, q) in qs.iter().enumerate() {
                    if q.curve() != &c {
                        return Err(Error::InvalidFamily(format!("Q_{} is not on E_mu0", j + 1)));
                    }
                }
                Some(c)
            }
            SecondFactor::Units(us) => {
                for (j, u) in us.iter().enumerate() {
                    if u.is_zero() {
                        return Err(Error::InvalidFamily(format!("u_{} vanishes identically", j + 1)));
                    }
                }
                None
            }
        };
        let mut singular = Vec::new();
        singular.push(Complex64::new(0.0, 0.0));
        singular.push(Complex64::new(1.0, 0.0));
        let second_points: &[PointExpr] = match &second {
            SecondFactor::Elliptic { points, .. } | SecondFactor::Constant { points, .. } => points,
            SecondFactor::Units(_) => &[],
        };
        for p in points.iter().chain(second_points) {
            singular.extend_from_slice(p.exceptional_values());
            singular.extend_from_slice(p.branch_values());
        }
        match &second {
            SecondFactor::Elliptic { mu, .. } => {
                push_roots(mu, true, true, &mut singular);
                let one = RationalFunction::from_ints(&[1], &[1]);
                push_roots(&mu.sub(&one), true, false, &mut singular);
            }
            SecondFactor::Units(us) => {
                for u in us {
                    push_roots(u, true, true, &mut singular);
                }
            }
            SecondFactor::Constant { .. } => {}
        }
        singular.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap_or(core::cmp::Ordering::Equal));
        singular.dedup_by(|a, b| (*a - *b).norm() <= 1e-12 * b.norm().max(1.0));
        Ok(FamilySpec { points, second, lambda, second_curve, singular })
    }

    /// Case tag 1, 2 or 3.
    pub fn case_tag(&self) -> u8 {
        match self.second {
            SecondFactor::Elliptic { .. } => 1,
            SecondFactor::Constant { .. } => 2,
            SecondFactor::Units(_) => 3,
        }
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn m(&self) -> usize {
        match &self.second {
            SecondFactor::Elliptic { points, .. } | SecondFactor::Constant { points, .. } => points.len(),
            SecondFactor::Units(us) => us.len(),
        }
    }

    pub fn cm(&self) -> bool {
        matches!(self.second, SecondFactor::Constant { cm: true, .. })
    }

    /// The curve parameter `λ` as a rational function.
    pub fn lambda_rf(&self) -> &RationalFunction {
        &self.lambda
    }

    /// `μ(λ)` or the constant `μ0`; `None` in case (3).
    pub fn second_curve(&self) -> Option<&RationalFunction> {
        self.second_curve.as_ref()
    }

    pub fn second_points(&self) -> &[PointExpr] {
        match &self.second {
            SecondFactor::Elliptic { points, .. } | SecondFactor::Constant { points, .. } => points,
            SecondFactor::Units(_) => &[],
        }
    }

    pub fn units(&self) -> &[RationalFunction] {
        match &self.second {
            SecondFactor::Units(us) => us,
            _ => &[],
        }
    }

    /// Parameter values where some logarithm or period fails to be analytic.
    pub fn singular_values(&self) -> &[Complex64] {
        &self.singular
    }

    /// Distance from `t` to the nearest singular value.
    pub fn singular_distance(&self, t: Complex64) -> f64 {
        self.singular.iter().map(|s| (s - t).norm()).fold(f64::INFINITY, f64::min)
    }

    /// A polyline from `from` to `to` avoiding singular values (straight when possible).
    pub fn route(&self, from: Complex64, to: Complex64) -> Result<Vec<Complex64>> {
        let clear = |pts: &[Complex64]| {
            pts.windows(2).all(|w| {
                let scale = (w[1] - w[0]).norm().max(1e-3);
                self.singular.iter().all(|s| {
                    // The start may sit on a singular value (anchors on degenerate fibres).
                    let start_here = (w[0] - s).norm() <= 1e-12;
                    start_here || seg_dist(w[0], w[1], *s) > 1e-3 * scale
                })
            })
        };
        let straight = [from, to];
        if clear(&straight) {
            return Ok(straight.to_vec());
        }
        let d = (to - from).norm().max(1.0);
        let dir = if (to - from).norm() > 0.0 { (to - from) / (to - from).norm() } else { Complex64::new(1.0, 0.0) };
        let normal = dir * Complex64::new(0.0, 1.0);
        for k in [0.25, 0.5, 1.0, 2.0, 0.125, 4.0] {
            for sign in [1.0, -1.0] {
                let off = normal * (sign * k * d);
                let pts = [from, from + off, to + off, to];
                if clear(&pts) {
                    return Ok(pts.to_vec());
                }
            }
        }
        Err(Error::PathThroughSingularity)
    }

    /// Branch values at full precision: parameters where some point is 2-torsion while every
    /// curve, point and unit stays finite and nondegenerate.
    pub fn special_values(&self, prec: u32) -> Vec<Complex> {
        let mut out: Vec<Complex> = Vec::new();
        let tol = 1e-9;
        let exceptional: Vec<Complex64> = self.points.iter().chain(self.second_points()).flat_map(|p| p.exceptional_values().iter().copied()).collect();
        for p in self.points.iter().chain(self.second_points()) {
            for poly in p.branch_polys() {
                for r in poly.roots(prec) {
                    let rf = crate::legendre::to_c64(&r);
                    if rf.norm() < tol || (rf - 1.0).norm() < tol || exceptional.iter().any(|e| (e - rf).norm() < tol) {
                        continue;
                    }
                    if self.units().iter().any(|u| !u.eval_f64(rf).is_finite() || u.eval_f64(rf).norm() < tol) {
                        continue;
                    }
                    if self.second_curve().is_some_and(|c| {
                        let v = c.eval_f64(rf);
                        !v.is_finite() || v.norm() < tol || (v - 1.0).norm() < tol
                    }) {
                        continue;
                    }
                    if !out.iter().any(|o| (crate::legendre::to_c64(o) - rf).norm() < tol) {
                        out.push(r);
                    }
                }
            }
        }
        crate::legendre::sort_complex(&mut out);
        out
    }

    /// Short human-readable description.
    pub fn describe(&self) -> String {
        format!("case {} with n = {}, m = {}", self.case_tag(), self.n(), self.m())
    }
}

/// `λ` as an exact rational when `t` is one.
pub fn rational_from_ints(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn p1() -> PointExpr {
        PointExpr::new(RationalFunction::from_ints(&[2], &[1]), Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0)).unwrap()
    }

    #[test]
    fn validation() {
        let lam = RationalFunction::lambda();
        let inv = RationalFunction::from_ints(&[1], &[0, 1]);
        let q = PointExpr::on_curve(RationalFunction::from_ints(&[2], &[1]), inv.clone(), Complex64::new(2.0, 0.0), Complex64::new(3.0f64.sqrt(), 0.0))
            .unwrap();
        let e = FamilySpec::new(vec![p1()], SecondFactor::Elliptic { mu: inv, points: vec![q] }).unwrap_err();
        assert!(matches!(e, Error::InvalidFamily(_)));
        let e = FamilySpec::new(vec![p1()], SecondFactor::Constant { mu0: rational_from_ints(2, 1), points: vec![], cm: true }).unwrap_err();
        assert_eq!(e, Error::CmUnsupported);
        let e = FamilySpec::new(vec![p1()], SecondFactor::Units(vec![lam.sub(&lam)])).unwrap_err();
        assert!(matches!(e, Error::InvalidFamily(_)));
        let f = FamilySpec::new(vec![p1()], SecondFactor::Units(vec![lam.clone(), RationalFunction::from_ints(&[-1, 1], &[1])])).unwrap();
        assert_eq!(f.case_tag(), 3);
        let s = f.singular_values();
        assert!(s.iter().any(|z| (z - Complex64::new(2.0, 0.0)).norm() < 1e-9));
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn routes_avoid_singular_values() {
        let f = FamilySpec::new(vec![p1()], SecondFactor::Units(vec![RationalFunction::lambda()])).unwrap();
        let r = f.route(Complex64::new(0.0, 0.0), Complex64::new(4.0, 0.0)).unwrap();
        assert!(r.len() > 2);
        let r = f.route(Complex64::new(3.0, 1.0), Complex64::new(4.0, 0.0)).unwrap();
        assert_eq!(r.len(), 2);
    }
}
