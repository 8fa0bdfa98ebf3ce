//! Complex 2x2 matrices with a declared determinant sign, Möbius actions,
//! fixed points and complex geodesic length.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::ops::Mul;
use thiserror::Error;

pub type C64 = Complex64;

/// Traces within this distance of ±2 (det +1) count as parabolic.
pub const PARABOLIC_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MobiusError {
    #[error("matrix is projectively the identity")]
    IdentityMatrix,
    #[error("complex length jumped by {jump:.3e} between path samples {step} and {next}", next = step + 1)]
    BranchJump { step: usize, jump: f64 },
    #[error("empty deformation path")]
    EmptyPath,
}

/// A point of the Riemann sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Point {
    Finite(C64),
    Infinity,
}

impl Point {
    pub fn real(x: f64) -> Self {
        Point::Finite(C64::new(x, 0.0))
    }

    pub fn finite(self) -> Option<C64> {
        match self {
            Point::Finite(z) => Some(z),
            Point::Infinity => None,
        }
    }

    /// Chordal-style distance that treats large moduli as near infinity.
    pub fn distance(self, other: Point) -> f64 {
        match (self, other) {
            (Point::Infinity, Point::Infinity) => 0.0,
            (Point::Finite(z), Point::Infinity) | (Point::Infinity, Point::Finite(z)) => 1.0 / (1.0 + z.norm()),
            (Point::Finite(z), Point::Finite(w)) => (z - w).norm(),
        }
    }
}

/// An element of SL±(2,C): entries plus the declared determinant sign.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixRep {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
    pub det_sign: i8,
}

impl MatrixRep {
    /// Builds a matrix and rescales it so that its determinant equals `det_sign`.
    pub fn new(a: C64, b: C64, c: C64, d: C64, det_sign: i8) -> Self {
        MatrixRep { a, b, c, d, det_sign }.normalized()
    }

    /// Real matrix; the determinant sign is read off the entries.
    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        let det = a * d - b * c;
        let sign = if det < 0.0 { -1 } else { 1 };
        Self::new(C64::new(a, 0.0), C64::new(b, 0.0), C64::new(c, 0.0), C64::new(d, 0.0), sign)
    }

    pub fn identity() -> Self {
        Self::real(1.0, 0.0, 0.0, 1.0)
    }

    /// The unit translation z ↦ z + 1.
    pub fn translation() -> Self {
        Self::real(1.0, 1.0, 0.0, 1.0)
    }

    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> C64 {
        self.a + self.d
    }

    pub fn normalized(self) -> Self {
        let target = f64::from(self.det_sign);
        let s = (self.det() / target).sqrt();
        if s.norm() == 0.0 {
            return self;
        }
        MatrixRep { a: self.a / s, b: self.b / s, c: self.c / s, d: self.d / s, det_sign: self.det_sign }
    }

    pub fn compose(&self, other: &MatrixRep) -> MatrixRep {
        MatrixRep {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
            det_sign: self.det_sign * other.det_sign,
        }
        .renormalized()
    }

    /// `normalized`, skipped when the determinant is already ±1 to rounding
    /// at the scale of the entries (recomputing it would only add noise).
    pub fn renormalized(self) -> Self {
        let drift = (self.det() - f64::from(self.det_sign)).norm();
        if drift > 1e-12 * self.max_abs().powi(2).max(1.0) {
            self.normalized()
        } else {
            self
        }
    }

    pub fn inverse(&self) -> MatrixRep {
        let s = C64::new(f64::from(self.det_sign), 0.0);
        MatrixRep { a: self.d * s, b: -self.b * s, c: -self.c * s, d: self.a * s, det_sign: self.det_sign }
    }

    pub fn neg(&self) -> MatrixRep {
        MatrixRep { a: -self.a, b: -self.b, c: -self.c, d: -self.d, det_sign: self.det_sign }
    }

    pub fn pow(&self, n: i64) -> MatrixRep {
        let base = if n < 0 { self.inverse() } else { *self };
        let mut out = MatrixRep::identity();
        for _ in 0..n.unsigned_abs() {
            out = out.compose(&base);
        }
        out
    }

    pub fn conjugate_by(&self, g: &MatrixRep) -> MatrixRep {
        g.compose(self).compose(&g.inverse())
    }

    pub fn max_abs(&self) -> f64 {
        [self.a, self.b, self.c, self.d].iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        [self.a, self.b, self.c, self.d].iter().all(|z| z.im.abs() <= tol * (1.0 + z.re.abs()))
    }

    /// Projective distance to another matrix (min over the sign of the lift).
    pub fn distance(&self, other: &MatrixRep) -> f64 {
        let diff = |s: f64| {
            [(self.a, other.a), (self.b, other.b), (self.c, other.c), (self.d, other.d)]
                .iter()
                .map(|(x, y)| (x - y * s).norm())
                .fold(0.0, f64::max)
        };
        diff(1.0).min(diff(-1.0))
    }

    pub fn is_parabolic(&self) -> bool {
        self.det_sign == 1 && ((self.trace() - 2.0).norm() < PARABOLIC_TOL || (self.trace() + 2.0).norm() < PARABOLIC_TOL)
    }

    pub fn is_projective_identity(&self) -> bool {
        self.det_sign == 1 && self.b.norm() < 1e-12 && self.c.norm() < 1e-12 && (self.a - self.d).norm() < 1e-12
    }

    /// Derivative of the Möbius map at a finite fixed point.
    fn multiplier_at(&self, z: C64) -> C64 {
        let den = self.c * z + self.d;
        f64::from(self.det_sign) / (den * den)
    }
}

impl Mul for MatrixRep {
    type Output = MatrixRep;
    fn mul(self, rhs: MatrixRep) -> MatrixRep {
        self.compose(&rhs)
    }
}

impl fmt::Display for MatrixRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]] (det {:+})", self.a, self.b, self.c, self.d, self.det_sign)
    }
}

pub fn compose(a: &MatrixRep, b: &MatrixRep) -> MatrixRep {
    a.compose(b)
}

/// (a z + b)/(c z + d) with the usual conventions at ∞.
pub fn apply(m: &MatrixRep, z: Point) -> Point {
    match z {
        Point::Infinity => {
            if m.c.norm() == 0.0 {
                Point::Infinity
            } else {
                Point::Finite(m.a / m.c)
            }
        }
        Point::Finite(z) => {
            let den = m.c * z + m.d;
            if den.norm() == 0.0 {
                Point::Infinity
            } else {
                Point::Finite((m.a * z + m.b) / den)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FixedPoints {
    Parabolic(Point),
    Loxodromic { attracting: Point, repelling: Point },
    Elliptic(Point, Point),
}

impl FixedPoints {
    pub fn points(&self) -> Vec<Point> {
        match *self {
            FixedPoints::Parabolic(p) => vec![p],
            FixedPoints::Loxodromic { attracting, repelling } => vec![attracting, repelling],
            FixedPoints::Elliptic(p, q) => vec![p, q],
        }
    }
}

/// Roots of c z² + (d − a) z − b = 0, labelled by the multiplier.
pub fn fixed_points(m: &MatrixRep) -> Result<FixedPoints, MobiusError> {
    if m.is_projective_identity() {
        return Err(MobiusError::IdentityMatrix);
    }
    let scale = m.max_abs().max(1.0);
    if m.c.norm() <= 1e-14 * scale {
        // upper triangular: ∞ is fixed
        let diff = m.d - m.a;
        if diff.norm() <= 1e-12 * scale {
            return Ok(FixedPoints::Parabolic(Point::Infinity));
        }
        let other = Point::Finite(m.b / diff);
        let at_inf = m.d / m.a;
        return Ok(classify(Point::Infinity, other, at_inf.norm()));
    }
    let disc = (m.d - m.a) * (m.d - m.a) + 4.0 * m.b * m.c;
    let root = disc.sqrt();
    if disc.norm() <= 1e-20 * scale * scale || m.is_parabolic() {
        return Ok(FixedPoints::Parabolic(Point::Finite((m.a - m.d) / (2.0 * m.c))));
    }
    let z1 = (m.a - m.d + root) / (2.0 * m.c);
    let z2 = (m.a - m.d - root) / (2.0 * m.c);
    let k = m.multiplier_at(z1).norm();
    Ok(classify(Point::Finite(z1), Point::Finite(z2), k))
}

fn classify(p: Point, q: Point, multiplier_p: f64) -> FixedPoints {
    if (multiplier_p - 1.0).abs() < 1e-12 {
        FixedPoints::Elliptic(p, q)
    } else if multiplier_p < 1.0 {
        FixedPoints::Loxodromic { attracting: p, repelling: q }
    } else {
        FixedPoints::Loxodromic { attracting: q, repelling: p }
    }
}

/// Complex geodesic length: translation length plus i·(rotation angle).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexLength {
    pub value: C64,
    pub branch_index: i64,
}

impl ComplexLength {
    pub fn zero() -> Self {
        ComplexLength { value: C64::new(0.0, 0.0), branch_index: 0 }
    }
}

/// e^{ℓ/2} for the lift sign `s`: the root of modulus ≥ 1 of
/// y² − s·tr·y + 1 = 0 (det +1) or y² − s·tr·y − 1 = 0 (det −1).
pub fn half_exp_length(m: &MatrixRep, s: f64) -> C64 {
    let t = m.trace() * s;
    let e = if m.det_sign == 1 { C64::new(1.0, 0.0) } else { C64::new(-1.0, 0.0) };
    let disc = t * t - 4.0 * e;
    let root = if disc.norm() < 1e-12 * t.norm_sqr().max(1.0) { C64::new(0.0, 0.0) } else { disc.sqrt() };
    let y1 = (t + root) / 2.0;
    let y2 = (t - root) / 2.0;
    if y1.norm() >= y2.norm() {
        y1
    } else {
        y2
    }
}

/// Lift sign making the length real positive at a Fuchsian point.
pub fn basepoint_sign(m: &MatrixRep) -> f64 {
    if m.trace().re < 0.0 {
        -1.0
    } else {
        1.0
    }
}

fn length_candidates(m: &MatrixRep) -> [C64; 2] {
    [2.0 * half_exp_length(m, 1.0).ln(), 2.0 * half_exp_length(m, -1.0).ln()]
}

/// Complex length of a single matrix: the lift sign is chosen from the
/// real part of the trace, which is the continuation-free choice.
pub fn complex_length_at(m: &MatrixRep) -> ComplexLength {
    if m.is_parabolic() {
        return ComplexLength::zero();
    }
    let value = 2.0 * half_exp_length(m, basepoint_sign(m)).ln();
    ComplexLength { value, branch_index: 0 }
}

/// Complex length continued along a sampled deformation path, starting from
/// the real positive value at `path[0]`.
pub fn complex_length(path: &[MatrixRep]) -> Result<ComplexLength, MobiusError> {
    let first = path.first().ok_or(MobiusError::EmptyPath)?;
    if first.is_parabolic() {
        return Ok(ComplexLength::zero());
    }
    let mut current = complex_length_at(first).value;
    let mut winding = 0i64;
    for (step, m) in path.iter().enumerate().skip(1) {
        let mut best: Option<(C64, i64)> = None;
        for cand in length_candidates(m) {
            // ℓ is defined modulo 4πi by e^{ℓ/2}; the sign flip adds 2πi
            let k = ((current.im - cand.im) / (2.0 * PI)).round() as i64;
            for kk in [k - 1, k, k + 1] {
                let v = cand + C64::new(0.0, 2.0 * PI * kk as f64);
                if best.map_or(true, |(b, _)| (v - current).norm() < (b - current).norm()) {
                    best = Some((v, kk));
                }
            }
        }
        let (next, kk) = best.expect("two candidates");
        let jump = (next - current).norm();
        if jump > PI / 2.0 {
            return Err(MobiusError::BranchJump { step: step - 1, jump });
        }
        winding = kk;
        current = next;
    }
    Ok(ComplexLength { value: current, branch_index: winding })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn compose_examples() {
        let t = MatrixRep::translation();
        assert!(compose(&MatrixRep::identity(), &t).distance(&t) < 1e-15);
        let t2 = t * t;
        assert!(t2.distance(&MatrixRep::real(1.0, 2.0, 0.0, 1.0)) < 1e-15);
        let r = MatrixRep::real(0.0, 1.0, 1.0, 0.0);
        assert_eq!(r.det_sign, -1);
        assert_eq!((r * r).det_sign, 1);
    }

    #[test]
    fn fixed_point_examples() {
        let t = MatrixRep::translation();
        assert_eq!(fixed_points(&t).unwrap(), FixedPoints::Parabolic(Point::Infinity));
        let m = MatrixRep::real(2.0, 0.0, 0.0, 0.5);
        match fixed_points(&m).unwrap() {
            FixedPoints::Loxodromic { attracting, repelling } => {
                assert_eq!(attracting, Point::Infinity);
                assert!(repelling.distance(Point::real(0.0)) < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        let e = MatrixRep::real(0.0, 1.0, -1.0, 0.0);
        let pts = fixed_points(&e).unwrap().points();
        assert!(matches!(fixed_points(&e).unwrap(), FixedPoints::Elliptic(..)));
        let i = Point::Finite(C64::new(0.0, 1.0));
        let mi = Point::Finite(C64::new(0.0, -1.0));
        assert!(pts.iter().any(|p| p.distance(i) < 1e-12));
        assert!(pts.iter().any(|p| p.distance(mi) < 1e-12));
        assert_eq!(fixed_points(&MatrixRep::identity()), Err(MobiusError::IdentityMatrix));
    }

    #[test]
    fn apply_examples() {
        let t = MatrixRep::translation();
        assert_eq!(apply(&t, Point::real(0.0)), Point::real(1.0));
        let m = MatrixRep::real(2.0, 0.0, 0.0, 0.5);
        assert!(apply(&m, Point::real(1.0)).distance(Point::real(4.0)) < 1e-15);
        let g = MatrixRep::real(2.0, 1.0, 3.0, 2.0);
        assert!(apply(&g, Point::Infinity).distance(Point::real(2.0 / 3.0)) < 1e-15);
        assert_eq!(apply(&t, Point::Infinity), Point::Infinity);
    }

    #[test]
    fn length_examples() {
        assert_eq!(complex_length_at(&MatrixRep::translation()).value, c(0.0));
        let m = MatrixRep::real(2.0, 0.0, 0.0, 0.5);
        assert!((complex_length_at(&m).value - c(4f64.ln())).norm() < 1e-12);
        // squaring oracle for a glide reflection
        let g = MatrixRep::real(2f64.sqrt(), 0.0, 0.0, -1.0 / 2f64.sqrt());
        let half = complex_length_at(&(g * g)).value / 2.0;
        assert!((complex_length_at(&g).value - half).norm() < 1e-12);
        assert!((complex_length_at(&g).value - c(2f64.ln())).norm() < 1e-12);
    }

    #[test]
    fn path_continuation_tracks_rotation() {
        // loxodromic with rotation angle θ growing past π
        let path: Vec<MatrixRep> = (0..=40)
            .map(|j| {
                let z = C64::new(0.5, 4.0 * j as f64 / 40.0);
                MatrixRep::new(z.exp(), c(0.0), c(0.0), (-z).exp(), 1)
            })
            .collect();
        let l = complex_length(&path).unwrap();
        assert!((l.value - C64::new(1.0, 8.0)).norm() < 1e-9, "{:?}", l);
        assert_ne!(l.branch_index, 0);
        let coarse = [path[0], path[40]];
        assert!(matches!(complex_length(&coarse), Err(MobiusError::BranchJump { .. })));
    }
}
