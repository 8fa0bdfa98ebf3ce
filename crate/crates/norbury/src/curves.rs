//! Enumeration of embedded pants and Möbius bands containing the cusp,
//! through simple ideal arcs from the cusp to itself.

use crate::domain::{interleave, DomainError, Elem, Lift, RMat, Tessellation};
use crate::mobius::{fixed_points, FixedPoints, Point, C64, PARABOLIC_TOL};
use crate::repbuild::{RepError, Representation};
use crate::surface::{canonical_conjugacy, GroupWord, SurfacePresentation};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("calibration failed: {0}")]
    CalibrationFailed(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("interlacing violated: {0}")]
    InterlaceViolation(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Rep(#[from] RepError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PairKind {
    Pants,
    Moebius,
}

impl PairKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PairKind::Pants => "pants",
            PairKind::Moebius => "moebius",
        }
    }
}

/// Endpoint of a gap: the attracting fixed point of `word` at the basepoint
/// (the fixed point itself when `word` is parabolic).
#[derive(Clone, Debug, PartialEq)]
pub struct GapEnd {
    pub word: GroupWord,
    pub parabolic: bool,
    pub point: f64,
}

/// A simple ideal arc from the cusp to itself, with its launch direction
/// in [0, 1) and the pair of curves bounding its neighbourhood.
#[derive(Clone, Debug, PartialEq)]
pub struct OrientedArc {
    pub g: GroupWord,
    pub direction: f64,
    pub reverse_direction: f64,
    pub alpha: GroupWord,
    pub beta: GroupWord,
    pub det_sign: i8,
    pub len_alpha: f64,
    pub len_beta: f64,
    pub summand: f64,
    pub gap: (f64, f64),
    pub ends: [GapEnd; 2],
}

impl OrientedArc {
    pub fn kind(&self) -> PairKind {
        if self.det_sign < 0 {
            PairKind::Moebius
        } else {
            PairKind::Pants
        }
    }

    pub fn length_sum(&self) -> f64 {
        self.len_alpha + self.len_beta
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CuspPair {
    pub kind: PairKind,
    pub alpha: GroupWord,
    pub beta: GroupWord,
    pub parity: u8,
    pub band_boundary: Option<GroupWord>,
    pub fuchsian_direction: f64,
    /// Words for the arc of `fuchsian_direction` (α·β ~ m_p for pants).
    pub alpha_raw: GroupWord,
    pub beta_raw: GroupWord,
    pub len_alpha: f64,
    pub len_beta: f64,
    /// Indices of the two oriented arcs in `Enumeration::arcs`.
    pub arcs: Vec<usize>,
}

impl CuspPair {
    pub fn length_sum(&self) -> f64 {
        self.len_alpha + self.len_beta
    }
}

#[derive(Clone, Debug)]
pub struct Enumeration {
    pub arcs: Vec<OrientedArc>,
    pub pairs: Vec<CuspPair>,
    pub cutoff: f64,
    pub expanded: usize,
    pub gap_mismatches: usize,
}

pub const MAX_EXPANSIONS: usize = 20_000_000;

struct GapSet {
    los: Vec<f64>,
    his: Vec<f64>,
}

impl GapSet {
    fn covers(&self, u: f64, v: f64) -> bool {
        let n = u.floor();
        let (u, v) = (u - n, v - n);
        let i = self.los.partition_point(|&l| l <= u);
        i > 0 && self.his[i - 1] >= v
    }

    fn add(&mut self, lo: f64, hi: f64) {
        let n = lo.floor();
        for sh in [-1.0, 0.0, 1.0] {
            let l = lo - n + sh;
            let j = self.los.partition_point(|&x| x <= l);
            self.los.insert(j, l);
            self.his.insert(j, hi - n + sh);
        }
    }
}

struct Node {
    lift: Lift,
    parent: Option<usize>,
    entry: Option<(usize, usize)>,
    top: Option<usize>,
    parent_side: Option<(usize, usize)>,
}

struct Pending {
    bound: f64,
    seq: usize,
    node: usize,
    side: (usize, usize),
}

impl PartialEq for Pending {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Pending {}
impl PartialOrd for Pending {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Pending {
    fn cmp(&self, o: &Self) -> Ordering {
        self.bound.total_cmp(&o.bound).then(o.seq.cmp(&self.seq))
    }
}

fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f < 1.0 {
        f
    } else {
        0.0
    }
}

struct ArcData {
    alpha: Elem,
    beta: Elem,
    la: f64,
    lb: f64,
    summand: f64,
    det_sign: i8,
}

/// The two curves adjacent to the arc of `g` (c ≠ 0): α = g·m_p^k, β = α·m_p
/// with k chosen so the traces straddle zero.
fn arc_data(g: &Elem, meridian: &Elem) -> Option<ArcData> {
    let c = g.m.c;
    if c.abs() < 1e-300 {
        return None;
    }
    let t0 = g.m.trace();
    let k = (-t0 / c).floor();
    let ta = (t0 + c * k).abs();
    let tb = (t0 + c * (k + 1.0)).abs();
    let det = g.m.det();
    let (la, lb, summand, det_sign) = if det > 0.0 {
        if ta < 2.0 - 1e-9 || tb < 2.0 - 1e-9 {
            return None;
        }
        let len = |t: f64| if (t - 2.0).abs() < PARABOLIC_TOL { 0.0 } else { 2.0 * (t / 2.0).max(1.0).acosh() };
        let (la, lb) = (len(ta), len(tb));
        (la, lb, 1.0 / (((la + lb) / 2.0).exp() + 1.0), 1)
    } else {
        let la = 2.0 * (ta / 2.0).asinh();
        let lb = 2.0 * (tb / 2.0).asinh();
        (la, lb, 1.0 / (((la + lb) / 2.0).exp() - 1.0), -1)
    };
    let alpha = g.mul(&meridian.pow(k as i64));
    let beta = alpha.mul(meridian);
    Some(ArcData { alpha, beta, la, lb, summand, det_sign })
}

/// Real fixed points of `m` as (point, word with that point attracting, parabolic).
fn fixed_ends(e: &Elem) -> Vec<(f64, GroupWord, bool)> {
    let m = &e.m;
    let disc = (m.d - m.a).powi(2) + 4.0 * m.b * m.c;
    let scale = m.a.abs().max(m.d.abs()).max(1.0).powi(2);
    if disc.abs() < 1e-9 * scale || disc < 0.0 {
        if m.c.abs() < 1e-300 {
            return Vec::new();
        }
        let p = (m.a - m.d) / (2.0 * m.c);
        return vec![(p, e.w.clone(), true)];
    }
    match fixed_points(&m.to_rep()) {
        Ok(FixedPoints::Loxodromic { attracting: Point::Finite(a), repelling: Point::Finite(r) }) => {
            vec![(a.re, e.w.clone(), false), (r.re, e.w.inverse(), false)]
        }
        Ok(FixedPoints::Loxodromic { attracting, repelling }) => {
            let mut out = Vec::new();
            if let Point::Finite(a) = attracting {
                out.push((a.re, e.w.clone(), false));
            }
            if let Point::Finite(r) = repelling {
                out.push((r.re, e.w.inverse(), false));
            }
            out
        }
        _ => Vec::new(),
    }
}

struct Enumerator<'a> {
    tess: &'a Tessellation,
    nodes: Vec<Node>,
    seen: HashSet<i64>,
    gaps: GapSet,
    arcs: Vec<OrientedArc>,
    mismatches: usize,
}

impl Enumerator<'_> {
    fn simple(&self, nid: usize, x: f64, xv: usize) -> bool {
        let mut chain = Vec::new();
        let mut cur = Some(nid);
        while let Some(n) = cur {
            chain.push(n);
            cur = self.nodes[n].parent;
        }
        chain.reverse();
        let t = self.tess;
        let segs: Vec<(usize, f64, f64)> = chain
            .iter()
            .enumerate()
            .map(|(idx, &n)| {
                let node = &self.nodes[n];
                let k = node.lift.k;
                let p1 = match node.entry {
                    None => t.vertex_param(k, node.top.expect("root node has a top vertex")),
                    Some(s) => t.vertical_param(&node.lift, s, x),
                };
                let p2 = match chain.get(idx + 1) {
                    Some(&next) => t.vertical_param(&node.lift, self.nodes[next].parent_side.expect("child has parent side"), x),
                    None => t.vertex_param(k, xv),
                };
                (k, p1, p2)
            })
            .collect();
        for i in 0..segs.len() {
            for j in 0..i {
                if segs[i].0 == segs[j].0 && interleave(segs[i].1, segs[i].2, segs[j].1, segs[j].2) {
                    return false;
                }
            }
        }
        true
    }

    fn consider(&mut self, nid: Option<usize>, vi: usize, x: f64, g: Elem) {
        let key = (frac(x) * 1e10).round() as i64;
        if !self.seen.insert(key) {
            return;
        }
        let xn = frac(x);
        if self.gaps.covers(xn, xn) {
            return;
        }
        if arc_data(&g, &self.tess.meridian).is_none() {
            return;
        }
        if let Some(n) = nid {
            if !self.simple(n, x, vi) {
                return;
            }
        }
        let shift = x.floor();
        let g = self.tess.meridian.pow(-(shift as i64)).mul(&g);
        let x = x - shift;
        let Some(d) = arc_data(&g, &self.tess.meridian) else { return };
        let mut ends = fixed_ends(&d.alpha);
        ends.extend(fixed_ends(&d.beta));
        let lo = ends.iter().filter(|e| e.0 < x).max_by(|a, b| a.0.total_cmp(&b.0)).cloned();
        let hi = ends.iter().filter(|e| e.0 > x).min_by(|a, b| a.0.total_cmp(&b.0)).cloned();
        let (Some(lo), Some(hi)) = (lo, hi) else {
            self.mismatches += 1;
            return;
        };
        if ((hi.0 - lo.0) - d.summand).abs() > 1e-7 {
            self.mismatches += 1;
        }
        self.gaps.add(lo.0, hi.0);
        let rev = g.m.inv().act(f64::INFINITY);
        self.arcs.push(OrientedArc {
            g: g.w.clone(),
            direction: x,
            reverse_direction: frac(rev),
            alpha: d.alpha.w,
            beta: d.beta.w,
            det_sign: d.det_sign,
            len_alpha: d.la,
            len_beta: d.lb,
            summand: d.summand,
            gap: (lo.0, hi.0),
            ends: [GapEnd { point: lo.0, word: lo.1, parabolic: lo.2 }, GapEnd { point: hi.0, word: hi.1, parabolic: hi.2 }],
        });
    }
}

/// All simple cusp-to-cusp arcs whose adjacent curves have total length
/// at most `cutoff`, at the Fuchsian basepoint of `rep`.
pub fn enumerate_arcs(rep: &Representation, cutoff: f64) -> Result<Enumeration, CurveError> {
    let base = rep.base();
    let tess = Tessellation::new(&base)?;
    enumerate_with(&tess, &base.surface, cutoff)
}

pub fn enumerate_with(tess: &Tessellation, surface: &SurfacePresentation, cutoff: f64) -> Result<Enumeration, CurveError> {
    if !(cutoff.is_finite() && cutoff > 0.0) {
        return Err(CurveError::CalibrationFailed(format!("cutoff {cutoff} must be positive")));
    }
    let bound_c = 2.0 * (cutoff / 2.0).cosh() + 2.0;
    let dmin = 1.0 / (bound_c * bound_c);
    let mut en = Enumerator {
        tess,
        nodes: Vec::new(),
        seen: HashSet::new(),
        gaps: GapSet { los: Vec::new(), his: Vec::new() },
        arcs: Vec::new(),
        mismatches: 0,
    };
    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    for (lift, side, top) in &tess.fan {
        en.nodes.push(Node { lift: lift.clone(), parent: None, entry: None, top: Some(*top), parent_side: None });
        heap.push(Pending { bound: f64::INFINITY, seq, node: en.nodes.len() - 1, side: *side });
        seq += 1;
    }
    for n in 0..en.nodes.len() {
        let lift = en.nodes[n].lift.clone();
        let top = en.nodes[n].top;
        for &i in &tess.tris[lift.k] {
            if Some(i) != top && tess.is_cusp(i) {
                let g = tess.vertex_elem(&lift.h, i).expect("cusp vertex");
                en.consider(None, i, tess.point(&lift.h, i), g);
            }
        }
    }
    let mut expanded = 0usize;
    while let Some(p) = heap.pop() {
        let lift = en.nodes[p.node].lift.clone();
        let u0 = tess.point(&lift.h, p.side.0);
        let v0 = tess.point(&lift.h, p.side.1);
        let (u, v) = if u0 <= v0 { (u0, v0) } else { (v0, u0) };
        let mut b = p.bound;
        for i in [p.side.0, p.side.1] {
            b = b.min((v - u).powi(2) / tess.horoball(&lift.h, i));
        }
        if b < dmin || en.gaps.covers(u, v) {
            continue;
        }
        expanded += 1;
        if expanded > MAX_EXPANSIONS {
            return Err(CurveError::CalibrationFailed(format!("more than {MAX_EXPANSIONS} triangles expanded")));
        }
        let (child, found, opp) = tess.cross(&lift, p.side);
        en.nodes.push(Node { lift: child.clone(), parent: Some(p.node), entry: Some(found), top: None, parent_side: Some(p.side) });
        let nn = en.nodes.len() - 1;
        if let Some(g) = tess.vertex_elem(&child.h, opp) {
            if g.m.c.abs() <= bound_c {
                let w = tess.point(&child.h, opp);
                en.consider(Some(nn), opp, w, g);
            }
        }
        for sd in [(found.0, opp), (found.1, opp)] {
            heap.push(Pending { bound: b, seq, node: nn, side: sd });
            seq += 1;
        }
    }
    let mut arcs: Vec<OrientedArc> = en.arcs.into_iter().filter(|a| a.length_sum() <= cutoff).collect();
    arcs.sort_by(|a, b| a.length_sum().total_cmp(&b.length_sum()).then(a.direction.total_cmp(&b.direction)));
    let pairs = assemble_pairs(&arcs, surface);
    Ok(Enumeration { arcs, pairs, cutoff, expanded, gap_mismatches: en.mismatches })
}

fn pair_key(a: &GroupWord, b: &GroupWord) -> (GroupWord, GroupWord) {
    let ca = canonical_conjugacy(a);
    let cb = canonical_conjugacy(b);
    if ca <= cb {
        (ca, cb)
    } else {
        (cb, ca)
    }
}

fn assemble_pairs(arcs: &[OrientedArc], surface: &SurfacePresentation) -> Vec<CuspPair> {
    let mut groups: BTreeMap<(GroupWord, GroupWord), Vec<usize>> = BTreeMap::new();
    for (i, a) in arcs.iter().enumerate() {
        groups.entry(pair_key(&a.alpha, &a.beta)).or_default().push(i);
    }
    let mut pairs: Vec<CuspPair> = groups
        .into_values()
        .map(|mut idx| {
            idx.sort_by(|&i, &j| arcs[i].direction.total_cmp(&arcs[j].direction));
            let a = &arcs[idx[0]];
            let (alpha, beta, la, lb) = if (a.len_alpha, canonical_conjugacy(&a.alpha)) <= (a.len_beta, canonical_conjugacy(&a.beta)) {
                (canonical_conjugacy(&a.alpha), canonical_conjugacy(&a.beta), a.len_alpha, a.len_beta)
            } else {
                (canonical_conjugacy(&a.beta), canonical_conjugacy(&a.alpha), a.len_beta, a.len_alpha)
            };
            let kind = a.kind();
            let band_boundary = match kind {
                PairKind::Moebius => Some(canonical_conjugacy(&a.alpha.mul(&a.beta))),
                PairKind::Pants => None,
            };
            let _ = surface;
            CuspPair {
                kind,
                alpha,
                beta,
                parity: u8::from(kind == PairKind::Moebius),
                band_boundary,
                fuchsian_direction: a.direction,
                alpha_raw: a.alpha.clone(),
                beta_raw: a.beta.clone(),
                len_alpha: la,
                len_beta: lb,
                arcs: idx,
            }
        })
        .collect();
    pairs.sort_by(|p, q| {
        p.length_sum()
            .total_cmp(&q.length_sum())
            .then_with(|| (&p.alpha, &p.beta).cmp(&(&q.alpha, &q.beta)))
    });
    pairs
}

pub fn enumerate_pairs(rep: &Representation, cutoff: f64) -> Result<Vec<CuspPair>, CurveError> {
    Ok(enumerate_arcs(rep, cutoff)?.pairs)
}

/// Geometric simplicity of the closed geodesic of `w` at the basepoint.
pub fn is_simple(rep: &Representation, w: &GroupWord) -> Result<bool, CurveError> {
    let base = rep.base();
    let tess = Tessellation::new(&base)?;
    is_simple_with(&tess, &base, w)
}

pub const MAX_WALK: usize = 200_000;

pub fn is_simple_with(tess: &Tessellation, base: &Representation, w: &GroupWord) -> Result<bool, CurveError> {
    let w = w.cyclically_reduced();
    if w.is_empty() {
        return Err(CurveError::NotApplicable("trivial word".into()));
    }
    let m = base.evaluate(&w);
    if m.is_parabolic() {
        return Err(CurveError::NotApplicable(format!("{} is peripheral", base.surface.render(&w))));
    }
    let chords = tess.closed_chords(&RMat::from_rep(&m), MAX_WALK)?;
    for i in 0..chords.len() {
        for j in 0..i {
            let (ki, a, b) = chords[i];
            let (kj, c, d) = chords[j];
            if ki != kj {
                continue;
            }
            let same = ((a - c).abs() < 1e-9 && (b - d).abs() < 1e-9) || ((a - d).abs() < 1e-9 && (b - c).abs() < 1e-9);
            if same || interleave(a, b, c, d) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Interior 1-sided curves μ, μ′ of a band and its boundary ν, with
/// half-exponentiated lengths e^{ℓ/2} under `rep`.
#[derive(Clone, Debug, PartialEq)]
pub struct MoebiusTriple {
    pub mu: GroupWord,
    pub mu_prime: GroupWord,
    pub nu: GroupWord,
    pub y_mu: C64,
    pub y_mu_prime: C64,
    pub y_nu: C64,
}

impl MoebiusTriple {
    pub fn lengths(&self) -> (C64, C64, C64) {
        (self.y_mu.ln() * 2.0, self.y_mu_prime.ln() * 2.0, self.y_nu.ln() * 2.0)
    }
}

pub fn moebius_triple(pair: &CuspPair, rep: &Representation) -> Result<MoebiusTriple, CurveError> {
    if pair.kind != PairKind::Moebius {
        return Err(CurveError::NotApplicable("moebius_triple expects a band".into()));
    }
    let nu = pair.alpha_raw.mul(&pair.beta_raw);
    Ok(MoebiusTriple {
        y_mu: rep.half_exp_length(&pair.alpha_raw),
        y_mu_prime: rep.half_exp_length(&pair.beta_raw),
        y_nu: rep.half_exp_length(&nu),
        mu: pair.alpha_raw.clone(),
        mu_prime: pair.beta_raw.clone(),
        nu,
    })
}

/// Trace relation residual |1 + cosh(ℓν/2) − 2 sinh(ℓμ/2) sinh(ℓμ′/2)|.
pub fn trace_relation_residual(t: &MoebiusTriple) -> f64 {
    let ch = |y: C64| (y + y.inv()) / 2.0;
    let sh = |y: C64| (y - y.inv()) / 2.0;
    (ch(t.y_nu) + 1.0 - sh(t.y_mu) * sh(t.y_mu_prime) * 2.0).norm()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FourteenLabel {
    Nu,
    LambdaAlpha,
    MuAlpha,
    Lambda,
    MuBeta,
    LambdaBeta,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourteenReport {
    pub points: Vec<(f64, FourteenLabel)>,
    pub min_separation: f64,
    pub gaps_disjoint: bool,
}

/// The fourteen directions around a band: both orientations of the band arc
/// and its two pants arcs, and the eight spiralling endpoints of their gaps.
pub fn fourteen_check(en: &Enumeration, band: &CuspPair) -> Result<FourteenReport, CurveError> {
    use FourteenLabel::*;
    if band.kind != PairKind::Moebius {
        return Err(CurveError::NotApplicable("fourteen_check expects a band".into()));
    }
    let nu = band.band_boundary.clone().expect("band has a boundary");
    let mu_a = canonical_conjugacy(&band.alpha_raw);
    let mu_b = canonical_conjugacy(&band.beta_raw);
    let key_a = pair_key(&nu, &band.alpha_raw.mul(&band.alpha_raw));
    let key_b = pair_key(&nu, &band.beta_raw.mul(&band.beta_raw));
    let find = |key: &(GroupWord, GroupWord)| {
        en.pairs.iter().find(|p| &pair_key(&p.alpha, &p.beta) == key).ok_or_else(|| {
            CurveError::NotApplicable("a pants pair of the band is beyond the enumeration cutoff".into())
        })
    };
    let lam_a = find(&key_a)?;
    let lam_b = find(&key_b)?;
    let label_of = |w: &GroupWord| {
        let c = canonical_conjugacy(w);
        if c == nu {
            Some(Nu)
        } else if c == mu_a || c == canonical_conjugacy(&band.alpha_raw.mul(&band.alpha_raw)) {
            Some(MuAlpha)
        } else if c == mu_b || c == canonical_conjugacy(&band.beta_raw.mul(&band.beta_raw)) {
            Some(MuBeta)
        } else {
            None
        }
    };
    let mut points: Vec<(f64, FourteenLabel)> = Vec::new();
    let mut gaps = Vec::new();
    let mut cusp_nu = false;
    for (pair, label) in [(band, Lambda), (lam_a, LambdaAlpha), (lam_b, LambdaBeta)] {
        for &i in &pair.arcs {
            let arc = &en.arcs[i];
            points.push((arc.direction, label));
            gaps.push((arc.gap.0, arc.gap.1));
            for e in &arc.ends {
                let l = label_of(&e.word)
                    .ok_or_else(|| CurveError::InterlaceViolation("gap endpoint spirals to an unexpected curve".into()))?;
                cusp_nu |= l == Nu && e.parabolic;
                let p = frac(e.point);
                if !points.iter().any(|(q, m)| *m == l && cyclic_dist(*q, p) < 1e-9) {
                    points.push((p, l));
                }
            }
        }
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = points.len();
    let min_separation =
        (0..n).map(|i| cyclic_dist(points[i].0, points[(i + 1) % n].0)).fold(f64::INFINITY, f64::min);
    let mut gaps_disjoint = true;
    for i in 0..gaps.len() {
        for j in 0..i {
            let (a, b) = (gaps[i], gaps[j]);
            for sh in [-1.0, 0.0, 1.0] {
                let lo = (a.0 - a.0.floor()) + sh;
                let hi = lo + (a.1 - a.0);
                let lo2 = b.0 - b.0.floor();
                let hi2 = lo2 + (b.1 - b.0);
                if lo < hi2 - 1e-12 && lo2 < hi - 1e-12 {
                    gaps_disjoint = false;
                }
            }
        }
    }
    let report = FourteenReport { points, min_separation, gaps_disjoint };
    let labels: Vec<FourteenLabel> = report.points.iter().map(|p| p.1).collect();
    // a cusp boundary is approached from one direction only, merging the two ν points
    // the two orientations of the three arcs appear in mirrored order
    let core = [LambdaAlpha, MuAlpha, Lambda, MuBeta, LambdaBeta];
    let nus: &[FourteenLabel] = if cusp_nu { &[Nu] } else { &[Nu, Nu] };
    let mut target: Vec<FourteenLabel> = nus.to_vec();
    target.extend(core);
    target.extend(nus);
    target.extend(core.iter().rev());
    let n = labels.len();
    let rotated = |t: &[FourteenLabel]| (0..n).any(|r| (0..n).all(|i| labels[(i + r) % n] == t[i]));
    let reversed: Vec<FourteenLabel> = target.iter().rev().copied().collect();
    let ok_pattern = target.len() == n && (rotated(&target) || rotated(&reversed));
    if !ok_pattern || report.min_separation < 1e-9 || !report.gaps_disjoint {
        return Err(CurveError::InterlaceViolation(format!("{labels:?}")));
    }
    Ok(report)
}

fn cyclic_dist(a: f64, b: f64) -> f64 {
    let d = frac(a - b);
    d.min(1.0 - d)
}

/// Pair list as CSV: kind, alpha_word, beta_word, parity, re_len_alpha,
/// re_len_beta, direction.
pub fn pairs_csv(pairs: &[CuspPair], surface: &SurfacePresentation) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["kind", "alpha_word", "beta_word", "parity", "re_len_alpha", "re_len_beta", "direction"])
        .expect("in-memory write");
    for p in pairs {
        w.write_record([
            p.kind.as_str().to_string(),
            surface.render(&p.alpha),
            surface.render(&p.beta),
            p.parity.to_string(),
            format!("{:.12}", p.len_alpha),
            format!("{:.12}", p.len_beta),
            format!("{:.12}", p.fuchsian_direction),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repbuild::{build_family, SurfaceId};

    #[test]
    fn n12_has_three_pairs() {
        let rep = build_family(SurfaceId::N12, &[1.0]).unwrap();
        let en = enumerate_arcs(&rep, 18.0).unwrap();
        assert_eq!(en.pairs.len(), 3);
        assert_eq!(en.arcs.len(), 6);
        let total: f64 = en.arcs.iter().map(|a| a.summand).sum();
        assert!((total - 1.0).abs() < 1e-9, "{total}");
        assert_eq!(en.pairs.iter().filter(|p| p.kind == PairKind::Moebius).count(), 1);
        for p in en.pairs.iter().filter(|p| p.kind == PairKind::Pants) {
            assert!(p.len_alpha.min(p.len_beta) < 1e-6);
        }
    }

    #[test]
    fn generators_are_simple() {
        let rep = build_family(SurfaceId::N12, &[1.0]).unwrap();
        let s = &rep.surface;
        assert!(is_simple(&rep, &s.parse("a").unwrap()).unwrap());
        assert!(!is_simple(&rep, &s.parse("axAx").unwrap()).unwrap());
        assert!(matches!(is_simple(&rep, &s.parse("aax").unwrap()), Err(CurveError::NotApplicable(_))));
        let rep = build_family(SurfaceId::N21, &[1.0, 1.5]).unwrap();
        let s = &rep.surface;
        assert!(is_simple(&rep, &s.parse("a").unwrap()).unwrap());
        assert!(is_simple(&rep, &s.parse("b").unwrap()).unwrap());
        assert!(is_simple(&rep, &s.parse("ab").unwrap()).unwrap());
        assert!(!is_simple(&rep, &s.parse("aa").unwrap().pow(2)).unwrap());
    }
}
