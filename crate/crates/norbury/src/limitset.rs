//! Limit curve sampling, height extremes, the horo-core modulus and the
//! partition of the identity by the extremal points.

use crate::curves::{Enumeration, OrientedArc};
use crate::identity::{arc_summand, attracting_point, pairwise_sum, IdentityError};
use crate::mobius::{apply, fixed_points, FixedPoints, MatrixRep, Point, C64};
use crate::repbuild::Representation;
use crate::surface::GroupWord;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LimitError {
    #[error("extremes moved by {shift:.3e} between word bounds {from} and {to}")]
    NotConverged { shift: f64, from: usize, to: usize },
    #[error("extreme at direction {direction:.6} is not bracketed by an enumerated gap")]
    PartitionAmbiguous { direction: f64 },
    #[error("empty sample")]
    Empty,
    #[error(transparent)]
    Identity(#[from] IdentityError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitPoint {
    pub z: C64,
    pub word: GroupWord,
    /// Position at the Fuchsian basepoint, mod 1.
    pub direction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitSample {
    pub points: Vec<LimitPoint>,
    pub word_length: usize,
}

fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f < 1.0 {
        f
    } else {
        0.0
    }
}

/// The point of ρ's limit set matching the base point `x` under the
/// boundary map, shifted into the strip of directions [0, 1).
fn shifted(z: C64, x: f64) -> C64 {
    z - x.floor()
}

fn attracting(m: &MatrixRep) -> Option<Point> {
    match fixed_points(m).ok()? {
        FixedPoints::Loxodromic { attracting, .. } => Some(attracting),
        FixedPoints::Parabolic(p) => Some(p),
        FixedPoints::Elliptic(..) => None,
    }
}

/// Limit point data for one word: its attracting fixed point and its image
/// of ∞, each paired with the Fuchsian counterpart.
fn word_points(w: &GroupWord, m: &MatrixRep, m0: &MatrixRep, out: &mut Vec<LimitPoint>) {
    let mut push = |p: Point, p0: Point| {
        if let (Point::Finite(z), Point::Finite(x)) = (p, p0) {
            if z.norm().is_finite() && x.re.abs() < 1e9 {
                out.push(LimitPoint { z: shifted(z, x.re), word: w.clone(), direction: frac(x.re) });
            }
        }
    };
    if let (Some(p), Some(p0)) = (attracting(m), attracting(m0)) {
        push(p, p0);
    }
    push(apply(m, Point::Infinity), apply(m0, Point::Infinity));
}

/// One limit point per word from `word_points` at the attracting fixed point.
fn fixed_point_of(rep: &Representation, w: &GroupWord) -> Option<LimitPoint> {
    let m = rep.evaluate(w);
    let m0 = rep.evaluate_base(w);
    let (Point::Finite(z), Point::Finite(x)) = (attracting(&m)?, attracting(&m0)?) else {
        return None;
    };
    Some(LimitPoint { z: shifted(z, x.re), word: w.clone(), direction: frac(x.re) })
}

fn letters(rank: usize) -> Vec<i32> {
    (1..=rank as i32).flat_map(|g| [g, -g]).collect()
}

fn extend(w: &GroupWord, l: i32) -> Option<GroupWord> {
    if w.letters().last() == Some(&-l) {
        return None;
    }
    let mut v = w.clone();
    v.push(l);
    Some(v)
}

/// Orbit images of ∞ and attracting fixed points of all reduced words up
/// to `max_word_len`, reduced to one period and sorted by direction.
pub fn orbit_points(rep: &Representation, max_word_len: usize) -> LimitSample {
    let rank = rep.surface.rank();
    let gens = letters(rank);
    let prefixes: Vec<GroupWord> = gens.iter().map(|&l| GroupWord::from_letters(&[l])).collect();
    let mut points: Vec<LimitPoint> = prefixes
        .par_iter()
        .flat_map_iter(|p| {
            let mut out = Vec::new();
            let mut level = vec![(p.clone(), rep.evaluate(p), rep.evaluate_base(p))];
            for depth in 1..=max_word_len {
                for (w, m, m0) in &level {
                    word_points(w, m, m0, &mut out);
                }
                if depth == max_word_len {
                    break;
                }
                let mut next = Vec::with_capacity(level.len() * (gens.len() - 1));
                for (w, m, m0) in &level {
                    for &l in &gens {
                        if let Some(v) = extend(w, l) {
                            let g = GroupWord::from_letters(&[l]);
                            next.push((v, m.compose(&rep.evaluate(&g)), m0.compose(&rep.evaluate_base(&g))));
                        }
                    }
                }
                level = next;
            }
            out
        })
        .collect();
    dedup(&mut points);
    LimitSample { points, word_length: max_word_len }
}

fn dedup(points: &mut Vec<LimitPoint>) {
    let key = |p: &LimitPoint| ((p.z.re * 1e9).round() as i64, (p.z.im * 1e9).round() as i64);
    let mut seen: BTreeMap<(i64, i64), LimitPoint> = BTreeMap::new();
    for p in points.drain(..) {
        seen.entry(key(&p))
            .and_modify(|q| {
                if (p.word.len(), &p.word) < (q.word.len(), &q.word) {
                    *q = p.clone();
                }
            })
            .or_insert(p);
    }
    points.extend(seen.into_values());
    points.sort_by(|a, b| a.direction.total_cmp(&b.direction).then_with(|| a.word.cmp(&b.word)));
}

/// Greedy search among words close to `start` for a higher (sign +1) or
/// lower (sign −1) limit point.
fn refine(rep: &Representation, start: LimitPoint, sign: f64) -> LimitPoint {
    let gens = letters(rep.surface.rank());
    let mut tails: Vec<GroupWord> = vec![GroupWord::empty()];
    let mut frontier = tails.clone();
    for _ in 0..3 {
        let mut next = Vec::new();
        for t in &frontier {
            for &l in &gens {
                if let Some(v) = extend(t, l) {
                    next.push(v);
                }
            }
        }
        tails.extend(next.iter().cloned());
        frontier = next;
    }
    let mut best = start;
    for _ in 0..40 {
        let ww = best.word.mul(&best.word);
        let n = ww.len();
        let cands: Vec<LimitPoint> = (1..=n)
            .into_par_iter()
            .flat_map_iter(|j| {
                let p = GroupWord::from_letters(&ww.letters()[..j]);
                tails.iter().filter_map(move |t| {
                    let w = p.mul(t);
                    (!w.is_empty() && w.len() <= 4 * best_len(n)).then_some(w)
                })
                .collect::<Vec<_>>()
            })
            .filter_map(|w| fixed_point_of(rep, &w))
            .collect();
        let top = cands.into_iter().fold(None::<LimitPoint>, |acc, c| match acc {
            Some(a) if sign * a.z.im >= sign * c.z.im => Some(a),
            _ => Some(c),
        });
        match top {
            Some(c) if sign * (c.z.im - best.z.im) > 1e-13 => best = c,
            _ => break,
        }
    }
    best
}

fn best_len(n: usize) -> usize {
    n.max(8)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeightExtremes {
    pub z_minus: LimitPoint,
    pub z_plus: LimitPoint,
    pub modulus: f64,
    /// Number of other sample points tying with each extreme within 1e−9.
    pub ties: (usize, usize),
    pub word_length: usize,
}

fn extremes_at(rep: &Representation, max_word_len: usize) -> Result<HeightExtremes, LimitError> {
    let s = orbit_points(rep, max_word_len);
    // points are in direction order, so the first of tied extremes wins
    let lo = s.points.iter().fold(None::<&LimitPoint>, |a, p| match a {
        Some(q) if q.z.im <= p.z.im => Some(q),
        _ => Some(p),
    });
    let hi = s.points.iter().fold(None::<&LimitPoint>, |a, p| match a {
        Some(q) if q.z.im >= p.z.im => Some(q),
        _ => Some(p),
    });
    let (Some(lo), Some(hi)) = (lo, hi) else { return Err(LimitError::Empty) };
    let z_minus = refine(rep, lo.clone(), -1.0);
    let z_plus = refine(rep, hi.clone(), 1.0);
    let ties = (
        s.points.iter().filter(|p| (p.z.im - z_minus.z.im).abs() < 1e-9).count().saturating_sub(1),
        s.points.iter().filter(|p| (p.z.im - z_plus.z.im).abs() < 1e-9).count().saturating_sub(1),
    );
    Ok(HeightExtremes { modulus: z_plus.z.im - z_minus.z.im, z_minus, z_plus, ties, word_length: max_word_len })
}

/// Lowest and highest points of the limit curve over one period. The
/// extremes are recomputed with a word bound two larger; a height shift
/// above 1e−4 is reported as NotConverged.
pub fn height_extremes(rep: &Representation, max_word_len: usize) -> Result<HeightExtremes, LimitError> {
    let a = extremes_at(rep, max_word_len)?;
    let b = extremes_at(rep, max_word_len + 2)?;
    let shift = (a.z_minus.z.im - b.z_minus.z.im).abs().max((a.z_plus.z.im - b.z_plus.z.im).abs());
    if shift > 1e-4 {
        return Err(LimitError::NotConverged { shift, from: max_word_len, to: max_word_len + 2 });
    }
    Ok(b)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionEnd {
    pub word: GroupWord,
    pub direction: f64,
    pub point: C64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusReport {
    pub extremes: HeightExtremes,
    pub lower: PartitionEnd,
    pub upper: PartitionEnd,
    pub sigma_plus: C64,
    pub sigma_minus: C64,
    pub terms: (usize, usize),
    /// Height span of the enumerated gap endpoints.
    pub endpoint_modulus: f64,
    /// |Im Σ₊ − mod|, |Im Σ₋ + mod|, |Im Σ₊ + Im Σ₋|.
    pub residuals: [f64; 3],
}

fn in_gap(x: f64, gap: (f64, f64)) -> bool {
    [-1.0, 0.0, 1.0].iter().any(|s| gap.0 < x + s && x + s < gap.1)
}

/// The gap endpoint bracketing direction `x` with the extreme height.
fn bracket(rep: &Representation, en: &Enumeration, x: f64, sign: f64) -> Result<PartitionEnd, LimitError> {
    let arc: Option<&OrientedArc> = en.arcs.iter().find(|a| in_gap(x, a.gap));
    let ends: Vec<_> = match arc {
        Some(a) => a.ends.iter().collect(),
        None => {
            let near = en
                .arcs
                .iter()
                .flat_map(|a| a.ends.iter())
                .min_by(|a, b| cyclic(a.point, x).total_cmp(&cyclic(b.point, x)));
            match near {
                Some(e) if cyclic(e.point, x) < 1e-6 => vec![e],
                _ => return Err(LimitError::PartitionAmbiguous { direction: x }),
            }
        }
    };
    let mut best: Option<PartitionEnd> = None;
    for e in ends {
        let z = attracting_point(rep, &e.word)? - e.point.floor();
        let cand = PartitionEnd { word: e.word.clone(), direction: frac(e.point), point: z };
        best = match best {
            Some(b) if sign * b.point.im >= sign * z.im => Some(b),
            _ => Some(cand),
        };
    }
    best.ok_or(LimitError::PartitionAmbiguous { direction: x })
}

fn cyclic(a: f64, b: f64) -> f64 {
    let d = frac(a - b);
    d.min(1.0 - d)
}

/// Splits the arcs at the gap endpoints bracketing z₋ and z₊: Σ₊ runs over
/// directions in [dir z₋, dir z₊), Σ₋ over the rest of the circle.
pub fn modulus_identity_check(
    rep: &Representation,
    en: &Enumeration,
    cutoff: f64,
    max_word_len: usize,
) -> Result<ModulusReport, LimitError> {
    let extremes = height_extremes(rep, max_word_len)?;
    let lower = bracket(rep, en, extremes.z_minus.direction, -1.0)?;
    let upper = bracket(rep, en, extremes.z_plus.direction, 1.0)?;
    let (a, b) = (lower.direction, upper.direction);
    let plus = |d: f64| if a <= b { a <= d && d < b } else { d >= a || d < b };
    let terms: Vec<(bool, C64)> = en
        .arcs
        .par_iter()
        .map(|arc| {
            let y = rep.half_exp_length(&arc.alpha) * rep.half_exp_length(&arc.beta);
            if 2.0 * y.norm().ln() > cutoff {
                return Ok(None);
            }
            Ok(Some((plus(arc.direction), arc_summand(arc, rep)?)))
        })
        .collect::<Result<Vec<_>, IdentityError>>()?
        .into_iter()
        .flatten()
        .collect();
    let pick = |side: bool| -> Vec<C64> { terms.iter().filter(|t| t.0 == side).map(|t| t.1).collect() };
    let (vp, vm) = (pick(true), pick(false));
    let sigma_plus = pairwise_sum(&vp);
    let sigma_minus = pairwise_sum(&vm);
    let m = extremes.modulus;
    let heights: Vec<f64> = gap_images(rep, en).iter().flat_map(|(p, q)| [p.im, q.im]).collect();
    let endpoint_modulus = heights.iter().cloned().fold(f64::MIN, f64::max) - heights.iter().cloned().fold(f64::MAX, f64::min);
    Ok(ModulusReport {
        endpoint_modulus,
        residuals: [
            (sigma_plus.im - m).abs(),
            (sigma_minus.im + m).abs(),
            (sigma_plus.im + sigma_minus.im).abs(),
        ],
        extremes,
        lower,
        upper,
        sigma_plus,
        sigma_minus,
        terms: (vp.len(), vm.len()),
    })
}

pub fn sample_csv(sample: &LimitSample, rep: &Representation) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["re", "im", "word", "direction"]).expect("in-memory write");
    for p in &sample.points {
        w.write_record([
            format!("{:.12}", p.z.re),
            format!("{:.12}", p.z.im),
            rep.surface.render(&p.word),
            format!("{:.12}", p.direction),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8 csv")
}

/// One period of the limit curve, drawn in direction order, with the
/// extremes marked and the images of enumerated gaps shaded.
pub fn render_svg(
    sample: &LimitSample,
    extremes: Option<&HeightExtremes>,
    gaps: &[(C64, C64)],
) -> String {
    let (w, h, pad) = (800.0, 400.0, 30.0);
    let pts: Vec<C64> = sample.points.iter().map(|p| p.z).collect();
    let (mut x0, mut x1, mut ymax) = (0.0f64, 1.0f64, 1e-3f64);
    for z in &pts {
        x0 = x0.min(z.re);
        x1 = x1.max(z.re);
        ymax = ymax.max(z.im.abs());
    }
    let (y0, y1) = (-1.3 * ymax, 1.3 * ymax);
    let sx = (w - 2.0 * pad) / (x1 - x0).max(1e-9);
    let sy = (h - 2.0 * pad) / (y1 - y0);
    let map = |z: C64| (pad + (z.re - x0) * sx, h - pad - (z.im - y0) * sy);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let mut spans: Vec<(f64, f64)> = gaps
        .iter()
        .map(|(a, b)| {
            let (xa, _) = map(*a);
            let (xb, _) = map(*b);
            (xa.min(xb), xa.max(xb))
        })
        .filter(|(l, r)| r - l >= 1.0)
        .collect();
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (k, (l, r)) in spans.iter().enumerate() {
        let fill = if k % 2 == 0 { "#dde6f5" } else { "#eef2fa" };
        let _ = writeln!(s, r#"<rect x="{l:.2}" y="{pad}" width="{:.2}" height="{:.2}" fill="{fill}" stroke="white" stroke-width="0.5"/>"#, r - l, h - 2.0 * pad);
    }
    let (_, axis) = map(C64::new(0.0, 0.0));
    let _ = writeln!(s, r##"<line x1="{pad}" y1="{axis:.2}" x2="{:.2}" y2="{axis:.2}" stroke="#999" stroke-dasharray="4 3"/>"##, w - pad);
    let path: Vec<String> = pts.iter().map(|z| {
        let (x, y) = map(*z);
        format!("{x:.2},{y:.2}")
    }).collect();
    let _ = writeln!(s, r#"<polyline fill="none" stroke="black" stroke-width="0.8" points="{}"/>"#, path.join(" "));
    if let Some(e) = extremes {
        for (p, col, label) in [(&e.z_plus, "red", "z+"), (&e.z_minus, "blue", "z-")] {
            let (x, y) = map(p.z);
            let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="{col}"/>"#);
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="12" fill="{col}">{label}</text>"#, x + 6.0, y - 6.0);
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Deformed images of the endpoints of every enumerated gap.
pub fn gap_images(rep: &Representation, en: &Enumeration) -> Vec<(C64, C64)> {
    en.arcs
        .iter()
        .filter_map(|a| {
            let p = attracting_point(rep, &a.ends[0].word).ok()? - a.ends[0].point.floor();
            let q = attracting_point(rep, &a.ends[1].word).ok()? - a.ends[0].point.floor();
            Some((p, q))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repbuild::{build_family, SurfaceId};

    #[test]
    fn fuchsian_sample_is_real_and_periodic() {
        let rep = build_family(SurfaceId::N21, &[1.0, 1.5]).unwrap();
        let s = orbit_points(&rep, 6);
        assert!(s.points.len() > 100);
        assert!(s.points.iter().all(|p| p.z.im.abs() < 1e-10));
        let e = height_extremes(&rep, 5).unwrap();
        assert!(e.modulus.abs() < 1e-10);
    }

    #[test]
    fn csv_header() {
        let rep = build_family(SurfaceId::N12, &[1.0]).unwrap();
        let s = orbit_points(&rep, 3);
        assert!(sample_csv(&s, &rep).starts_with("re,im,word,direction\n"));
        assert!(render_svg(&s, None, &[]).contains("<polyline"));
    }
}
