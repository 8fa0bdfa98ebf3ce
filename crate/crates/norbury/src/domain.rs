//! Ideal triangulations of the built-in families at a Fuchsian basepoint:
//! side gluings, lifting of triangles, point location and geodesic walks.

use crate::mobius::{fixed_points, FixedPoints, MatrixRep, Point, C64};
use crate::repbuild::{Representation, SurfaceId};
use crate::surface::GroupWord;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("triangulation unavailable: {0}")]
    Unavailable(String),
    #[error("side {side:?} of triangle {tri} has no gluing")]
    Unglued { tri: usize, side: (usize, usize) },
    #[error("walk exceeded {0} triangles")]
    RadiusOverflow(usize),
    #[error("point location failed at {0}")]
    Locate(String),
}

/// Real 2×2 matrix with determinant ±1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RMat {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl RMat {
    pub const IDENTITY: RMat = RMat { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    pub fn from_rep(m: &MatrixRep) -> RMat {
        RMat { a: m.a.re, b: m.b.re, c: m.c.re, d: m.d.re }
    }

    pub fn to_rep(self) -> MatrixRep {
        let s = if self.det() < 0.0 { -1 } else { 1 };
        MatrixRep::new(C64::new(self.a, 0.0), C64::new(self.b, 0.0), C64::new(self.c, 0.0), C64::new(self.d, 0.0), s)
    }

    pub fn mul(&self, o: &RMat) -> RMat {
        RMat {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn inv(&self) -> RMat {
        let det = self.det();
        RMat { a: self.d / det, b: -self.b / det, c: -self.c / det, d: self.a / det }
    }

    /// Action on the extended real line; `f64::INFINITY` is ∞.
    pub fn act(&self, x: f64) -> f64 {
        if x.is_infinite() {
            return if self.c != 0.0 { self.a / self.c } else { f64::INFINITY };
        }
        let den = self.c * x + self.d;
        if den == 0.0 {
            f64::INFINITY
        } else {
            (self.a * x + self.b) / den
        }
    }

    /// Isometric action on the upper half plane (anti-holomorphic when det < 0).
    pub fn act_h(&self, z: C64) -> C64 {
        let z = if self.det() < 0.0 { z.conj() } else { z };
        (z * self.a + self.b) / (z * self.c + self.d)
    }

    /// Fixed points on the extended real line, ordered (repelling, attracting).
    /// A parabolic element returns its fixed point twice.
    pub fn axis(&self) -> Option<(f64, f64)> {
        let m = self.to_rep();
        match fixed_points(&m).ok()? {
            FixedPoints::Loxodromic { attracting, repelling } => Some((to_real(repelling), to_real(attracting))),
            FixedPoints::Parabolic(p) => Some((to_real(p), to_real(p))),
            FixedPoints::Elliptic(..) => None,
        }
    }
}

fn to_real(p: Point) -> f64 {
    match p {
        Point::Infinity => f64::INFINITY,
        Point::Finite(z) => z.re,
    }
}

/// Group element at the basepoint with its word.
#[derive(Clone, Debug, PartialEq)]
pub struct Elem {
    pub m: RMat,
    pub w: GroupWord,
}

impl Elem {
    pub fn identity() -> Elem {
        Elem { m: RMat::IDENTITY, w: GroupWord::empty() }
    }

    pub fn mul(&self, o: &Elem) -> Elem {
        Elem { m: self.m.mul(&o.m), w: self.w.mul(&o.w) }
    }

    pub fn inv(&self) -> Elem {
        Elem { m: self.m.inv(), w: self.w.inverse() }
    }

    pub fn pow(&self, n: i64) -> Elem {
        let base = if n < 0 { self.inv() } else { self.clone() };
        let mut out = Elem::identity();
        for _ in 0..n.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }
}

#[derive(Clone, Debug)]
pub enum VertexSpec {
    /// ρ(w)·∞, a lift of the distinguished cusp.
    Cusp(&'static str),
    /// Fixed point of the parabolic ρ(w), a lift of another cusp.
    Fixed(&'static str),
}

fn polygon(id: SurfaceId) -> Vec<VertexSpec> {
    use VertexSpec::*;
    match id {
        SurfaceId::N21 => vec![Cusp(""), Cusp("b"), Cusp("bb"), Cusp("abb")],
        SurfaceId::N12 => vec![Cusp(""), Fixed("x"), Cusp("x"), Cusp("ax")],
        SurfaceId::N13 => vec![Cusp(""), Fixed("y"), Cusp("y"), Fixed("x"), Cusp("xy"), Cusp("axy")],
    }
}

/// A lifted triangle `h·Δ_k`.
#[derive(Clone, Debug)]
pub struct Lift {
    pub h: Elem,
    pub k: usize,
}

#[derive(Clone, Debug)]
pub struct Tessellation {
    pub points: Vec<f64>,
    pub elems: Vec<Option<Elem>>,
    pub tris: Vec<[usize; 3]>,
    pub meridian: Elem,
    glue: HashMap<(usize, usize, usize), (usize, Elem)>,
    /// Fan at ∞: lifted triangles with a corner at ∞ and their bottom side.
    pub fan: Vec<(Lift, (usize, usize), usize)>,
    /// Horoball diameters at the model positions of the other cusps.
    horo: Vec<f64>,
    window: f64,
}

fn same_point(a: f64, b: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return (a.is_infinite() || a.abs() > 1e12) && (b.is_infinite() || b.abs() > 1e12);
    }
    (a - b).abs() < 1e-9 * (1.0 + a.abs())
}

fn point_err(a: f64, b: f64) -> f64 {
    match (a.is_infinite(), b.is_infinite()) {
        (true, true) => 0.0,
        (false, false) => (a - b).abs() / (1.0 + a.abs()),
        _ => 1e9,
    }
}

fn side_key(k: usize, i: usize, j: usize) -> (usize, usize, usize) {
    (k, i.min(j), i.max(j))
}

impl Tessellation {
    pub fn new(rep: &Representation) -> Result<Tessellation, DomainError> {
        if rep.boundary.is_some() {
            return Err(DomainError::Unavailable("bordered representations have no cusp triangulation".into()));
        }
        let base = rep.base();
        let spec = polygon(rep.id);
        let parse = |s: &str| base.surface.parse(s).map_err(|e| DomainError::Unavailable(e.to_string()));
        let mut points = Vec::new();
        let mut elems = Vec::new();
        for v in &spec {
            match v {
                VertexSpec::Cusp(s) => {
                    let w = parse(s)?;
                    let m = RMat::from_rep(&base.evaluate(&w));
                    points.push(m.act(f64::INFINITY));
                    elems.push(Some(Elem { m, w }));
                }
                VertexSpec::Fixed(s) => {
                    let w = parse(s)?;
                    let m = RMat::from_rep(&base.evaluate(&w));
                    let (p, _) = m.axis().ok_or_else(|| DomainError::Unavailable(format!("{s} is elliptic")))?;
                    points.push(p);
                    elems.push(None);
                }
            }
        }
        let n = spec.len();
        let tris: Vec<[usize; 3]> = (1..n - 1).map(|i| [0, i, i + 1]).collect();
        let mut gens = vec![Elem::identity()];
        for k in 0..base.rank() {
            let w = GroupWord::generator(k);
            let e = Elem { m: RMat::from_rep(&base.evaluate(&w)), w };
            gens.push(e.inv());
            gens.push(e);
        }
        let sides = |t: &[usize; 3]| [(t[0], t[1]), (t[1], t[2]), (t[0], t[2])];
        let mut glue = HashMap::new();
        for (k, t) in tris.iter().enumerate() {
            for (i, j) in sides(t) {
                let mut found = None;
                'search: for (k2, t2) in tris.iter().enumerate() {
                    for (a, b) in sides(t2) {
                        for (gi, g) in gens.iter().enumerate() {
                            if gi == 0 && (k2 == k || !((a == i && b == j) || (a == j && b == i))) {
                                continue;
                            }
                            let pa = g.m.act(points[a]);
                            let pb = g.m.act(points[b]);
                            let hit = (same_point(pa, points[i]) && same_point(pb, points[j]))
                                || (same_point(pa, points[j]) && same_point(pb, points[i]));
                            if hit {
                                found = Some((k2, g.clone()));
                                break 'search;
                            }
                        }
                    }
                }
                let f = found.ok_or(DomainError::Unglued { tri: k, side: (i, j) })?;
                glue.insert(side_key(k, i, j), f);
            }
        }
        let mer = base.surface.meridian().clone();
        let meridian = Elem { m: RMat::from_rep(&base.evaluate(&mer)), w: mer };
        let horo = vec![0.0; points.len()];
        let mut tess = Tessellation { points, elems, tris, meridian, glue, fan: Vec::new(), horo, window: 0.0 };
        let mut fan = Vec::new();
        for (k, t) in tess.tris.iter().enumerate() {
            for &j in t {
                if let Some(e) = &tess.elems[j] {
                    let h = e.inv();
                    let others: Vec<usize> = t.iter().copied().filter(|&v| v != j).collect();
                    fan.push((Lift { h, k }, (others[0], others[1]), j));
                }
            }
        }
        tess.window = fan
            .iter()
            .map(|(l, s, _)| tess.point(&l.h, s.0).min(tess.point(&l.h, s.1)))
            .fold(f64::INFINITY, f64::min);
        let width: f64 = fan.iter().map(|(l, s, _)| (tess.point(&l.h, s.0) - tess.point(&l.h, s.1)).abs()).sum();
        if (width - 1.0).abs() > 1e-8 {
            return Err(DomainError::Unavailable(format!("fan at the cusp covers width {width}, expected 1")));
        }
        // horoballs at the other cusps: a quarter of the largest scale seen from the fan
        for i in 0..tess.points.len() {
            if tess.is_cusp(i) {
                continue;
            }
            let scale = fan
                .iter()
                .filter(|(l, _, _)| tess.tris[l.k].contains(&i))
                .map(|(l, _, _)| {
                    let den = l.h.m.c * tess.points[i] + l.h.m.d;
                    1.0 / (den * den)
                })
                .fold(0.0, f64::max);
            if scale == 0.0 {
                return Err(DomainError::Unavailable(format!("vertex {i} does not touch the fan")));
            }
            tess.horo[i] = 0.25 / scale;
        }
        tess.fan = fan;
        Ok(tess)
    }

    /// Lifted vertex position; images of ∞ that overflow the chart snap to ∞.
    pub fn point(&self, h: &Elem, i: usize) -> f64 {
        let p = h.m.act(self.points[i]);
        if p.abs() > 1e11 {
            f64::INFINITY
        } else {
            p
        }
    }

    pub fn vertex_elem(&self, h: &Elem, i: usize) -> Option<Elem> {
        self.elems[i].as_ref().map(|e| h.mul(e))
    }

    /// Euclidean diameter of the horoball at the lifted vertex `h·v_i`.
    pub fn horoball(&self, h: &Elem, i: usize) -> f64 {
        match &self.elems[i] {
            Some(e) => {
                let c = h.m.mul(&e.m).c;
                1.0 / (c * c)
            }
            None => {
                let den = h.m.c * self.points[i] + h.m.d;
                self.horo[i] / (den * den)
            }
        }
    }

    pub fn is_cusp(&self, i: usize) -> bool {
        self.elems[i].is_some()
    }

    /// Neighbour of `h·Δ_k` across side (i, j): returns the lifted neighbour,
    /// its matching side and the opposite vertex.
    pub fn cross(&self, lift: &Lift, side: (usize, usize)) -> (Lift, (usize, usize), usize) {
        let u = self.point(&lift.h, side.0);
        let v = self.point(&lift.h, side.1);
        let (k2, g) = &self.glue[&side_key(lift.k, side.0, side.1)];
        let hg = lift.h.mul(g);
        let t2 = self.tris[*k2];
        let mut best = (f64::INFINITY, (t2[0], t2[1]));
        for (a, b) in [(t2[0], t2[1]), (t2[1], t2[2]), (t2[0], t2[2])] {
            let pa = self.point(&hg, a);
            let pb = self.point(&hg, b);
            let e = (point_err(pa, u) + point_err(pb, v)).min(point_err(pa, v) + point_err(pb, u));
            if e < best.0 {
                best = (e, (a, b));
            }
        }
        let found = best.1;
        let opp = t2.iter().copied().find(|&w| w != found.0 && w != found.1).expect("triangle has three vertices");
        (Lift { h: hg, k: *k2 }, found, opp)
    }

    fn std_map(&self, k: usize, z: C64) -> C64 {
        let [i, j, l] = self.tris[k];
        let (a, b, c) = (self.points[i], self.points[j], self.points[l]);
        if c.is_infinite() {
            (z - a) / (b - a)
        } else if a.is_infinite() {
            C64::new(b - c, 0.0) / (z - c)
        } else if b.is_infinite() {
            (z - a) / (z - c)
        } else {
            ((z - a) * (b - c)) / ((z - c) * (b - a))
        }
    }

    /// Cyclic boundary parameter in [0, 3) of a point on the boundary of
    /// the model triangle `k`, with the vertices at 0, 1, 2.
    pub fn boundary_param(&self, k: usize, z: C64) -> f64 {
        let mut w = self.std_map(k, z);
        if w.im < 0.0 {
            w = w.conj();
        }
        if ((w - 0.5).norm() - 0.5).abs() < 1e-7 * w.norm().max(1.0) {
            return w.re;
        }
        if (w.re - 1.0).abs() < 1e-7 {
            return 1.0 + (1.0 - 1.0 / (1.0 + w.im));
        }
        2.0 + 1.0 / (1.0 + w.im)
    }

    pub fn vertex_param(&self, k: usize, i: usize) -> f64 {
        self.tris[k].iter().position(|&v| v == i).expect("vertex of triangle") as f64
    }

    /// Parameter of the point where the vertical line Re z = x meets the
    /// lifted side, mapped back to the model triangle.
    pub fn vertical_param(&self, lift: &Lift, side: (usize, usize), x: f64) -> f64 {
        let (u, v) = sorted(self.point(&lift.h, side.0), self.point(&lift.h, side.1));
        let z = C64::new(x, ((x - u) * (v - x)).max(0.0).sqrt());
        self.boundary_param(lift.k, lift.h.m.inv().act_h(z))
    }

    /// Lifted triangle containing `z` (upper half plane).
    pub fn locate(&self, z: C64) -> Result<Lift, DomainError> {
        let n = (z.re - self.window).floor();
        let zt = z - n;
        let shift = self.meridian.pow(n as i64);
        let start = self
            .fan
            .iter()
            .find(|(l, s, _)| {
                let (u, v) = sorted(self.point(&l.h, s.0), self.point(&l.h, s.1));
                u <= zt.re && zt.re < v
            })
            .ok_or_else(|| DomainError::Locate(format!("{z}")))?;
        let (mut lift, mut side) = (start.0.clone(), start.1);
        for _ in 0..100_000 {
            let (u, v) = sorted(self.point(&lift.h, side.0), self.point(&lift.h, side.1));
            if !below(zt, u, v) {
                return Ok(Lift { h: shift.mul(&lift.h), k: lift.k });
            }
            let (child, found, opp) = self.cross(&lift, side);
            let mut next = None;
            for s in [(found.0, opp), (found.1, opp)] {
                let (a, b) = sorted(self.point(&child.h, s.0), self.point(&child.h, s.1));
                if below(zt, a, b) {
                    next = Some(s);
                }
            }
            match next {
                None => return Ok(Lift { h: shift.mul(&child.h), k: child.k }),
                Some(s) => {
                    lift = child;
                    side = s;
                }
            }
        }
        Err(DomainError::Locate(format!("{z}")))
    }

    /// Chords cut out by the closed geodesic of the hyperbolic element
    /// `m` (one period), as (model triangle, entry param, exit param).
    pub fn closed_chords(&self, m: &RMat, max_steps: usize) -> Result<Vec<(usize, f64, f64)>, DomainError> {
        let (p1, p2) = m.axis().ok_or_else(|| DomainError::Locate("elliptic element".into()))?;
        if same_point(p1, p2) {
            return Err(DomainError::Locate("parabolic element".into()));
        }
        let geo = AxisCoords::new(p1, p2);
        let ell = geo.t_of(m.act_h(geo.point(0.0)));
        if ell <= 1e-12 {
            return Err(DomainError::Locate("translation length vanishes".into()));
        }
        // start slightly off a rational value so the base point avoids sides
        let t0 = 0.123_456_789;
        let z0 = geo.point(t0);
        let mut lift = self.locate(z0)?;
        let mut pieces: Vec<(Lift, Option<(usize, usize)>, (usize, usize), f64)> = Vec::new();
        let mut entry: Option<(usize, usize)> = None;
        for _ in 0..max_steps {
            let tri = self.tris[lift.k];
            let mut exit = None;
            for s in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[0], tri[2])] {
                if Some(s) == entry || Some((s.1, s.0)) == entry {
                    continue;
                }
                let a = self.point(&lift.h, s.0);
                let b = self.point(&lift.h, s.1);
                if let Some(t) = geo.crossing(a, b) {
                    let prev = pieces.last().map_or(f64::NEG_INFINITY, |p| p.3);
                    let start = if pieces.is_empty() { t0 } else { prev };
                    if t > start + 1e-12 && exit.is_none_or(|(_, te)| t < te) {
                        exit = Some((s, t));
                    }
                }
            }
            let (s, t) = exit.ok_or_else(|| DomainError::Locate("geodesic left a triangle without exit".into()))?;
            pieces.push((lift.clone(), entry, s, t));
            if t >= t0 + ell {
                break;
            }
            let (next, found, _) = self.cross(&lift, s);
            lift = next;
            entry = Some(found);
        }
        let last_t = pieces.last().map_or(0.0, |p| p.3);
        if last_t < t0 + ell {
            return Err(DomainError::RadiusOverflow(max_steps));
        }
        let param_at = |l: &Lift, side: (usize, usize)| {
            let z = geo.side_point(self.point(&l.h, side.0), self.point(&l.h, side.1));
            self.boundary_param(l.k, l.h.m.inv().act_h(z))
        };
        let mut chords = Vec::new();
        let n = pieces.len();
        if n == 1 {
            return Err(DomainError::Locate("period inside a single triangle".into()));
        }
        let (first, _, first_exit, _) = &pieces[0];
        let (last, last_entry, _, _) = &pieces[n - 1];
        if last.k != first.k {
            return Err(DomainError::Locate("period does not close up".into()));
        }
        let le = last_entry.expect("last piece has an entry side");
        chords.push((first.k, param_at(last, le), param_at(first, *first_exit)));
        for (l, en, ex, _) in &pieces[1..n - 1] {
            chords.push((l.k, param_at(l, en.expect("interior piece has an entry")), param_at(l, *ex)));
        }
        Ok(chords)
    }
}

fn sorted(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// z strictly below the geodesic (u, v); vertical sides count as never above.
fn below(z: C64, u: f64, v: f64) -> bool {
    if u.is_infinite() || v.is_infinite() {
        return false;
    }
    let c = 0.5 * (u + v);
    let r = 0.5 * (v - u);
    (z - c).norm() < r
}

/// Arclength coordinate along the geodesic from p1 to p2.
struct AxisCoords {
    p1: f64,
    p2: f64,
}

impl AxisCoords {
    fn new(p1: f64, p2: f64) -> Self {
        AxisCoords { p1, p2 }
    }

    /// Image under the map sending p1 ↦ 0, p2 ↦ ∞.
    fn q(&self, x: f64) -> f64 {
        if x.is_infinite() {
            if self.p2.is_infinite() {
                f64::INFINITY
            } else if self.p1.is_infinite() {
                0.0
            } else {
                1.0
            }
        } else if self.p2.is_infinite() {
            x - self.p1
        } else if self.p1.is_infinite() {
            1.0 / (self.p2 - x)
        } else {
            (x - self.p1) / (x - self.p2)
        }
    }

    fn q_inv(&self, w: C64) -> C64 {
        if self.p2.is_infinite() {
            w + self.p1
        } else if self.p1.is_infinite() {
            C64::new(self.p2, 0.0) - w.inv()
        } else {
            (w * self.p2 - self.p1) / (w - 1.0)
        }
    }

    fn point(&self, t: f64) -> C64 {
        let z = self.q_inv(C64::new(0.0, t.exp()));
        if z.im < 0.0 {
            z.conj()
        } else {
            z
        }
    }

    fn t_of(&self, z: C64) -> f64 {
        let w = if self.p2.is_infinite() {
            z - self.p1
        } else if self.p1.is_infinite() {
            (C64::new(self.p2, 0.0) - z).inv()
        } else {
            (z - self.p1) / (z - self.p2)
        };
        w.norm().ln()
    }

    /// Arclength where the geodesic (a, b) crosses this one transversally.
    fn crossing(&self, a: f64, b: f64) -> Option<f64> {
        let qa = self.q(a);
        let qb = self.q(b);
        if qa.is_infinite() || qb.is_infinite() || qa == 0.0 || qb == 0.0 {
            return None;
        }
        let prod = qa * qb;
        if prod < 0.0 {
            Some(0.5 * (-prod).ln())
        } else {
            None
        }
    }

    fn side_point(&self, a: f64, b: f64) -> C64 {
        let qa = self.q(a);
        let qb = self.q(b);
        self.point(0.5 * (-(qa * qb)).ln())
    }
}

/// Strict interleaving of chord endpoints on the cyclic boundary parameter.
pub fn interleave(a: f64, b: f64, c: f64, d: f64) -> bool {
    let (a, b) = sorted(a, b);
    let eps = 1e-9;
    let inside = |t: f64| a + eps < t && t < b - eps;
    let outside = |t: f64| t < a - eps || t > b + eps;
    (inside(c) && outside(d)) || (inside(d) && outside(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repbuild::build_family;

    #[test]
    fn tessellations_build() {
        for (id, p) in [(SurfaceId::N12, vec![1.0]), (SurfaceId::N21, vec![1.0, 1.5]), (SurfaceId::N13, vec![1.0, 1.2, 0.3])] {
            let rep = build_family(id, &p).unwrap();
            let t = Tessellation::new(&rep).unwrap();
            assert_eq!(t.tris.len(), t.points.len() - 2);
        }
    }

    #[test]
    fn locate_contains_point() {
        let rep = build_family(SurfaceId::N21, &[1.0, 1.5]).unwrap();
        let t = Tessellation::new(&rep).unwrap();
        for z in [C64::new(0.3, 0.01), C64::new(-2.7, 0.2), C64::new(5.1, 3.0)] {
            let l = t.locate(z).unwrap();
            let w = l.h.m.inv().act_h(z);
            // inside the model triangle: standardized image has positive imaginary part
            let s = t.std_map(l.k, w);
            assert!(s.im.abs() > 0.0);
            let [i, j, k] = t.tris[l.k];
            let pts: Vec<f64> = [i, j, k].iter().map(|&v| t.point(&l.h, v)).collect();
            for (a, b) in [(pts[0], pts[1]), (pts[1], pts[2]), (pts[0], pts[2])] {
                let (a, b) = sorted(a, b);
                let (lo, hi) = sorted(pts.iter().copied().fold(f64::INFINITY, f64::min), pts.iter().copied().fold(f64::NEG_INFINITY, f64::max));
                if a == lo && b == hi && !hi.is_infinite() {
                    assert!(below(z, a, b));
                } else {
                    assert!(!below(z, a, b));
                }
            }
        }
    }

    #[test]
    fn interleaving() {
        assert!(interleave(0.0, 1.5, 1.0, 2.0));
        assert!(!interleave(0.0, 1.0, 1.5, 2.0));
        assert!(!interleave(0.0, 1.0, 1.0, 2.0));
    }
}
