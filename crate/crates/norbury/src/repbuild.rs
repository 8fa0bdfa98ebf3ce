//! Representations of surface groups with SL± lifts: Fuchsian families,
//! validation, cusp normalization and complex deformations.

use crate::mobius::{self, complex_length, fixed_points, ComplexLength, FixedPoints, MatrixRep, MobiusError, Point, C64};
use crate::surface::{presentation, GroupWord, SurfaceError, SurfacePresentation, SurfaceSpec};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::OnceLock;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RepError {
    #[error("parameters {params:?} are outside the {family} chart: {reason}")]
    OutsideChart { family: String, params: Vec<f64>, reason: String },
    #[error("validation failed: {0}")]
    ValidationFailed(String),
    #[error("image of {word} has det sign {found} but the word has sidedness {expected}")]
    DetSidednessMismatch { word: String, found: i8, expected: i8 },
    #[error("peripheral word {word} is not parabolic (trace residual {residual:.3e})")]
    ParabolicityFailed { word: String, residual: f64 },
    #[error("distinguished peripheral is not parabolic")]
    NotParabolic,
    #[error("Jørgensen screen failed for pair ({0}, {1}); representation is probably indiscrete")]
    ProbablyIndiscrete(String, String),
    #[error("bending along {curve} is not supported on {family}")]
    BendUnsupported { family: String, curve: String },
    #[error("unknown surface id {0:?}")]
    UnknownSurface(String),
    #[error(transparent)]
    Mobius(#[from] MobiusError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SurfaceId {
    N12,
    N21,
    N13,
}

impl SurfaceId {
    pub fn spec(self) -> SurfaceSpec {
        match self {
            SurfaceId::N12 => SurfaceSpec { crosscaps: 1, punctures: 2, cusp: 1 },
            SurfaceId::N21 => SurfaceSpec { crosscaps: 2, punctures: 1, cusp: 0 },
            SurfaceId::N13 => SurfaceSpec { crosscaps: 1, punctures: 3, cusp: 2 },
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            SurfaceId::N12 => 1,
            SurfaceId::N21 => 2,
            SurfaceId::N13 => 3,
        }
    }

    /// Default chart point used when no parameters are given.
    pub fn default_params(self) -> Vec<f64> {
        match self {
            SurfaceId::N12 => vec![1.0],
            SurfaceId::N21 => vec![1.0, 1.5],
            SurfaceId::N13 => vec![2.0, 3.0, 0.0],
        }
    }

    pub fn from_spec(spec: SurfaceSpec) -> Result<Self, RepError> {
        [SurfaceId::N12, SurfaceId::N21, SurfaceId::N13]
            .into_iter()
            .find(|id| id.spec() == spec)
            .ok_or_else(|| RepError::UnknownSurface(format!("{spec:?}")))
    }
}

impl fmt::Display for SurfaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SurfaceId::N12 => "N12",
            SurfaceId::N21 => "N21",
            SurfaceId::N13 => "N13",
        };
        f.write_str(s)
    }
}

impl FromStr for SurfaceId {
    type Err = RepError;
    fn from_str(s: &str) -> Result<Self, RepError> {
        match s.to_ascii_uppercase().replace(['_', ','], "").as_str() {
            "N12" => Ok(SurfaceId::N12),
            "N21" => Ok(SurfaceId::N21),
            "N13" => Ok(SurfaceId::N13),
            _ => Err(RepError::UnknownSurface(s.to_string())),
        }
    }
}

/// Boundary lengths replacing punctures (N12 only): `l1` replaces the
/// distinguished cusp, `l2` optionally replaces the second one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Boundary {
    pub l1: f64,
    pub l2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RepKind {
    Fuchsian,
    Deformed,
}

/// How a deformed representation is reached from its Fuchsian basepoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Deformation {
    /// Complex twist along a 2-sided curve.
    Bend { word: GroupWord, t: C64, steps: usize },
    /// Straight-line path in complexified family parameters.
    Param { target: Vec<C64>, steps: usize },
}

impl Deformation {
    pub fn steps(&self) -> usize {
        match self {
            Deformation::Bend { steps, .. } | Deformation::Param { steps, .. } => *steps,
        }
    }

    fn with_steps(&self, steps: usize) -> Deformation {
        let mut d = self.clone();
        match &mut d {
            Deformation::Bend { steps: s, .. } | Deformation::Param { steps: s, .. } => *s = steps,
        }
        d
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Representation {
    pub surface: SurfacePresentation,
    pub id: SurfaceId,
    pub params: Vec<f64>,
    pub boundary: Option<Boundary>,
    pub images: Vec<MatrixRep>,
    pub kind: RepKind,
    pub deformation: Option<Deformation>,
    /// Generator images at the Fuchsian basepoint.
    pub base_images: Vec<MatrixRep>,
    /// Conjugator applied by `normalize_cusp`.
    pub conjugator: MatrixRep,
    frame: Frame,
}

/// Cached balancer, keyed by the base images it was computed from.
#[derive(Clone, Debug, Default)]
struct Frame(OnceLock<(Vec<MatrixRep>, MatrixRep)>);

impl PartialEq for Frame {
    fn eq(&self, _: &Frame) -> bool {
        true
    }
}

fn cx(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn mat(a: C64, b: C64, c: C64, d: C64, sign: i8) -> MatrixRep {
    MatrixRep::new(a, b, c, d, sign)
}

/// The glide reflection [[t/2, q],[r, t/2]] with det −1.
fn glide(t: C64, r: C64) -> MatrixRep {
    let q = (t * t / 4.0 + 1.0) / r;
    mat(t / 2.0, q, r, t / 2.0, -1)
}

fn minus_t() -> MatrixRep {
    MatrixRep::translation().neg()
}

fn n21_images(la: C64, lb: C64) -> Result<Vec<MatrixRep>, String> {
    let ta = (la / 2.0).sinh() * 2.0;
    let tb = (lb / 2.0).sinh() * 2.0;
    let r = (ta * ta + tb * tb + 4.0) / ta;
    let a = glide(ta, r);
    let m = (a * a).inverse() * minus_t();
    let tau = (m.trace() - 2.0).sqrt();
    if tau.norm() < 1e-12 {
        return Err("degenerate crosscap pair".into());
    }
    let b = mat((m.a - 1.0) / tau, m.b / tau, m.c / tau, (m.d - 1.0) / tau, -1);
    Ok(vec![a, b])
}

fn n12_images(ta: C64) -> Vec<MatrixRep> {
    let r = (ta * ta + 4.0) / ta;
    let a = glide(ta, r);
    let x = (a * a).inverse() * minus_t();
    vec![a, x]
}

fn n13_images(ta: C64, lg: C64, s: C64) -> Result<Vec<MatrixRep>, String> {
    let r = (ta * ta + 2.0 + (lg / 2.0).cosh() * 2.0) / ta;
    let a = glide(ta, r);
    let z = (a * a).inverse() * minus_t();
    let lam = (lg / 2.0).exp();
    if z.b.norm() < 1e-14 {
        return Err("degenerate pants curve".into());
    }
    let p = mat(z.b, z.b, lam - z.a, lam.inv() - z.a, 1);
    let u = C64::new(1.0, 0.0) / (lg / 4.0).tanh();
    let v = -u * s.exp();
    let w = u * (-s).exp();
    let xp = mat(u + 1.0, v, w, C64::new(1.0, 0.0) - u, 1);
    let x = p * xp * p.inverse();
    let y = x.inverse() * z;
    Ok(vec![a, x, y])
}

/// Bordered N12: the distinguished cusp becomes a boundary of length l1,
/// the other cusp a boundary of length l2 (l2 = 0 keeps it a cusp).
fn n12_bordered_images(ta: C64, l1: C64, l2: C64) -> Vec<MatrixRep> {
    let lam = (l1 / 2.0).exp();
    let w = mat(-lam, cx(-1.0), cx(0.0), -lam.inv(), 1);
    let r = ((l2 / 2.0).cosh() * 2.0 + (ta * ta + 2.0) * (l1 / 2.0).cosh()) / ta;
    let a = glide(ta, r);
    let x = (a * a).inverse() * w;
    vec![a, x]
}

fn family_images(id: SurfaceId, params: &[C64], boundary: Option<Boundary>) -> Result<Vec<MatrixRep>, RepError> {
    let outside = |reason: String| RepError::OutsideChart {
        family: id.to_string(),
        params: params.iter().map(|p| p.re).collect(),
        reason,
    };
    if params.len() != id.param_count() {
        return Err(outside(format!("expected {} parameters, got {}", id.param_count(), params.len())));
    }
    if params.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
        return Err(outside("non-finite parameter".into()));
    }
    match (id, boundary) {
        (SurfaceId::N12, Some(bd)) => {
            if params[0].re <= 0.0 || bd.l1 <= 0.0 || bd.l2 < 0.0 {
                return Err(outside("need tr(a) > 0, L1 > 0, L2 >= 0".into()));
            }
            Ok(n12_bordered_images(params[0], cx(bd.l1), cx(bd.l2)))
        }
        (_, Some(_)) => Err(outside("boundaries are only supported on N12".into())),
        (SurfaceId::N12, None) => {
            if params[0].re <= 0.0 {
                return Err(outside("tr(a) must be positive".into()));
            }
            Ok(n12_images(params[0]))
        }
        (SurfaceId::N21, None) => {
            if params[0].re <= 0.0 || params[1].re <= 0.0 {
                return Err(outside("crosscap lengths must be positive".into()));
            }
            n21_images(params[0], params[1]).map_err(outside)
        }
        (SurfaceId::N13, None) => {
            if params[0].re <= 0.0 || params[1].re <= 0.0 {
                return Err(outside("tr(a) and the pants length must be positive".into()));
            }
            n13_images(params[0], params[1], params[2]).map_err(outside)
        }
    }
}

/// Fuchsian representation of one of the built-in families.
///
/// N12: `[tr a]`; N21: `[ℓ(a), ℓ(b)]`; N13: `[tr a, ℓ(xy), twist]`.
pub fn build_family(id: SurfaceId, params: &[f64]) -> Result<Representation, RepError> {
    build(id, params, None)
}

pub fn build_bordered(ta: f64, boundary: Boundary) -> Result<Representation, RepError> {
    build(SurfaceId::N12, &[ta], Some(boundary))
}

fn build(id: SurfaceId, params: &[f64], boundary: Option<Boundary>) -> Result<Representation, RepError> {
    let spec = id.spec();
    let surface = presentation(spec.crosscaps, spec.punctures, spec.cusp)?;
    let cparams: Vec<C64> = params.iter().map(|&p| cx(p)).collect();
    let images = family_images(id, &cparams, boundary)?;
    let rep = Representation {
        surface,
        id,
        params: params.to_vec(),
        boundary,
        base_images: images.clone(),
        images,
        kind: RepKind::Fuchsian,
        deformation: None,
        conjugator: MatrixRep::identity(),
        frame: Frame::default(),
    };
    let report = validate(&rep);
    if let Some(f) = report.first_failure() {
        return Err(RepError::ValidationFailed(f));
    }
    Ok(rep)
}

/// A single named check from `validate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<String> {
        self.checks.iter().find(|c| !c.passed).map(|c| format!("{}: {} (residual {:.3e})", c.name, c.detail, c.residual))
    }

    pub fn to_error(&self) -> Option<RepError> {
        let c = self.checks.iter().find(|c| !c.passed)?;
        Some(match c.name.as_str() {
            "det_sidedness" => {
                let f: Vec<&str> = c.detail.split_whitespace().collect();
                RepError::DetSidednessMismatch {
                    word: f.first().unwrap_or(&"").to_string(),
                    found: f.get(1).and_then(|x| x.parse().ok()).unwrap_or(0),
                    expected: f.get(2).and_then(|x| x.parse().ok()).unwrap_or(0),
                }
            }
            "parabolicity" => RepError::ParabolicityFailed { word: c.detail.clone(), residual: c.residual },
            "jorgensen" => {
                let mut it = c.detail.split(',');
                RepError::ProbablyIndiscrete(it.next().unwrap_or("").into(), it.next().unwrap_or("").into())
            }
            _ => RepError::ValidationFailed(format!("{}: {}", c.name, c.detail)),
        })
    }
}

/// Structural checks: sidedness of determinants, parabolic peripherals,
/// a Jørgensen screen on generator pairs and realness for Fuchsian kind.
pub fn validate(rep: &Representation) -> ValidationReport {
    let mut checks = Vec::new();
    let s = &rep.surface;
    for (k, m) in rep.images.iter().enumerate() {
        let w = GroupWord::generator(k);
        let expected: i8 = if s.is_one_sided(&w) { -1 } else { 1 };
        let det_res = (m.det() - f64::from(m.det_sign)).norm();
        checks.push(Check {
            name: "det_sidedness".into(),
            passed: m.det_sign == expected && det_res < 1e-12 * m.max_abs().powi(2).max(1.0),
            residual: det_res,
            detail: format!("{} {} {}", s.render(&w), m.det_sign, expected),
        });
    }
    for (j, w) in s.peripheral_words.iter().enumerate() {
        let bordered = match rep.boundary {
            Some(bd) => j == s.distinguished_cusp || (bd.l2 > 0.0),
            None => false,
        };
        if bordered {
            continue;
        }
        let m = rep.evaluate(w);
        let t = m.trace();
        let residual = (t - 2.0).norm().min((t + 2.0).norm());
        checks.push(Check {
            name: "parabolicity".into(),
            passed: residual < 1e-9,
            residual,
            detail: s.render(w),
        });
    }
    // Jørgensen: |tr²A − 4| + |tr[A,B] − 2| ≥ 1 for non-elementary pairs in SL(2,C)
    let mut elems: Vec<(String, MatrixRep)> = Vec::new();
    for (k, m) in rep.images.iter().enumerate() {
        let w = GroupWord::generator(k);
        let name = s.render(&w);
        if m.det_sign == -1 {
            elems.push((format!("{name}{name}"), *m * *m));
        } else {
            elems.push((name, *m));
        }
    }
    for i in 0..elems.len() {
        for j in 0..elems.len() {
            if i == j {
                continue;
            }
            let (a, b) = (&elems[i].1, &elems[j].1);
            let comm = *a * *b * a.inverse() * b.inverse();
            if (comm.trace() - 2.0).norm() < 1e-9 {
                continue;
            }
            let v = (a.trace() * a.trace() - 4.0).norm() + (comm.trace() - 2.0).norm();
            checks.push(Check {
                name: "jorgensen".into(),
                passed: v >= 1.0 - 1e-9,
                residual: v,
                detail: format!("{},{}", elems[i].0, elems[j].0),
            });
        }
    }
    if rep.kind == RepKind::Fuchsian {
        let worst = rep.images.iter().flat_map(|m| [m.a, m.b, m.c, m.d]).map(|z| z.im.abs()).fold(0.0, f64::max);
        checks.push(Check { name: "realness".into(), passed: worst < 1e-12, residual: worst, detail: "generator entries".into() });
    }
    ValidationReport { checks }
}

impl Representation {
    pub fn rank(&self) -> usize {
        self.images.len()
    }

    fn eval_with(images: &[MatrixRep], w: &GroupWord) -> MatrixRep {
        let mut out = MatrixRep::identity();
        for &l in w.letters() {
            let m = images[(l.unsigned_abs() - 1) as usize];
            out = out * if l > 0 { m } else { m.inverse() };
        }
        out
    }

    /// Product of generator images along the word, multiplied out in the
    /// balanced frame.
    pub fn evaluate(&self, w: &GroupWord) -> MatrixRep {
        self.eval_balanced(&self.images, w)
    }

    /// Image of the word at the Fuchsian basepoint.
    pub fn evaluate_base(&self, w: &GroupWord) -> MatrixRep {
        self.eval_balanced(&self.base_images, w)
    }

    fn eval_balanced(&self, images: &[MatrixRep], w: &GroupWord) -> MatrixRep {
        if w.len() <= 1 {
            return Self::eval_with(images, w);
        }
        let p = self.balancer();
        let pi = p.inverse();
        let conj: Vec<MatrixRep> = images.iter().map(|g| pi.compose(g).compose(&p)).collect();
        p.compose(&Self::eval_with(&conj, w)).compose(&pi)
    }

    /// ρ(m_p), multiplied out in the cusp-normalized frame where it is exact.
    pub fn meridian_image(&self) -> MatrixRep {
        Self::eval_with(&self.images, self.surface.meridian())
    }

    /// The Fuchsian basepoint of this representation.
    pub fn base(&self) -> Representation {
        Representation {
            images: self.base_images.clone(),
            kind: RepKind::Fuchsian,
            deformation: None,
            ..self.clone()
        }
    }

    pub fn is_fuchsian(&self) -> bool {
        self.kind == RepKind::Fuchsian
    }

    /// Representation at fraction `s ∈ [0,1]` of the deformation path.
    pub fn at(&self, s: f64) -> Result<Representation, RepError> {
        let base = self.base();
        match &self.deformation {
            None => Ok(base),
            Some(Deformation::Bend { word, t, .. }) => bend_images(&base, word, *t * s).map(|images| Representation {
                images,
                kind: RepKind::Deformed,
                deformation: self.deformation.clone(),
                ..base
            }),
            Some(Deformation::Param { target, .. }) => {
                let p: Vec<C64> =
                    base.params.iter().zip(target).map(|(&p0, &p1)| cx(p0) + (p1 - cx(p0)) * s).collect();
                let imgs = family_images(self.id, &p, self.boundary)?;
                Ok(Representation {
                    images: imgs.iter().map(|m| m.conjugate_by(&self.conjugator)).collect(),
                    kind: RepKind::Deformed,
                    deformation: self.deformation.clone(),
                    ..base
                })
            }
        }
    }

    /// Images of a word at each sample of the deformation path.
    pub fn path_images(&self, w: &GroupWord, steps: usize) -> Result<Vec<MatrixRep>, RepError> {
        if self.deformation.is_none() {
            return Ok(vec![self.evaluate(w)]);
        }
        (0..=steps).map(|j| self.at(j as f64 / steps as f64).map(|r| r.evaluate(w))).collect()
    }

    /// Branch-tracked complex length; the step count doubles on BranchJump.
    pub fn length(&self, w: &GroupWord) -> Result<ComplexLength, RepError> {
        let mut steps = self.deformation.as_ref().map_or(1, |d| d.steps().max(1));
        loop {
            let path = self.path_images(w, steps)?;
            match complex_length(&path) {
                Ok(l) => return Ok(l),
                Err(MobiusError::BranchJump { .. }) if steps < 1 << 14 => steps *= 2,
                Err(e) => return Err(e.into()),
            }
        }
    }

    /// Conjugator P with P(i) = z0, where z0 roughly minimises the total
    /// displacement of the Fuchsian generators. Products of the conjugated
    /// generators have far smaller entries, so traces keep their precision.
    pub fn balancer(&self) -> MatrixRep {
        if let Some((key, p)) = self.frame.0.get() {
            if key == &self.base_images {
                return *p;
            }
        }
        let p = self.search_balancer();
        let _ = self.frame.0.set((self.base_images.clone(), p));
        p
    }

    fn search_balancer(&self) -> MatrixRep {
        let cost = |x: f64, ly: f64| -> f64 {
            let y = ly.exp();
            let z = C64::new(x, y);
            self.base_images
                .iter()
                .map(|g| {
                    let zz = if g.det_sign < 0 { z.conj() } else { z };
                    let gz = (g.a * zz + g.b) / (g.c * zz + g.d);
                    (gz - z).norm_sqr() / (y * gz.im.abs().max(1e-300))
                })
                .sum()
        };
        let (mut x, mut ly, mut h) = (0.0f64, 0.0f64, 1.0f64);
        let mut best = cost(x, ly);
        for _ in 0..200 {
            let mut moved = false;
            for (dx, dy) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
                let c = cost(x + dx, ly + dy);
                if c < best {
                    best = c;
                    x += dx;
                    ly += dy;
                    moved = true;
                    break;
                }
            }
            if !moved {
                h /= 2.0;
                if h < 1e-6 {
                    break;
                }
            }
        }
        let sy = (ly / 2.0).exp();
        MatrixRep::real(sy, x / sy, 0.0, 1.0 / sy)
    }

    /// Images conjugated by `balancer`, for trace computations.
    pub fn balanced_images(&self) -> (Vec<MatrixRep>, Vec<MatrixRep>) {
        let p = self.balancer();
        let pi = p.inverse();
        let conj = |v: &[MatrixRep]| v.iter().map(|g| pi.compose(g).compose(&p)).collect();
        (conj(&self.images), conj(&self.base_images))
    }

    /// e^{ℓ/2} with the lift sign fixed at the Fuchsian basepoint.
    pub fn half_exp_length(&self, w: &GroupWord) -> C64 {
        let (imgs, base) = self.balanced_images();
        Self::half_exp_with(&imgs, &base, w)
    }

    /// `half_exp_length` with precomputed `balanced_images`.
    pub fn half_exp_with(images: &[MatrixRep], base_images: &[MatrixRep], w: &GroupWord) -> C64 {
        let w = w.cyclically_reduced();
        let s = mobius::basepoint_sign(&Self::eval_with(base_images, &w));
        mobius::half_exp_length(&Self::eval_with(images, &w), s)
    }

    /// Global conjugation g·ρ·g⁻¹ of both the images and the basepoint.
    pub fn conjugated(&self, g: &MatrixRep) -> Representation {
        let conj = |ms: &[MatrixRep]| ms.iter().map(|x| x.conjugate_by(g)).collect::<Vec<_>>();
        Representation {
            images: conj(&self.images),
            base_images: conj(&self.base_images),
            conjugator: *g * self.conjugator,
            frame: Frame::default(),
            ..self.clone()
        }
    }

    pub fn with_steps(&self, steps: usize) -> Representation {
        Representation { deformation: self.deformation.as_ref().map(|d| d.with_steps(steps)), ..self.clone() }
    }
}

/// Global conjugation taking ρ(m_p) to ±[[1,1],[0,1]].
pub fn normalize_cusp(rep: &Representation) -> Result<Representation, RepError> {
    let m = rep.meridian_image();
    if !m.is_parabolic() {
        return Err(RepError::NotParabolic);
    }
    let g1 = match fixed_points(&m)? {
        FixedPoints::Parabolic(Point::Infinity) => MatrixRep::identity(),
        FixedPoints::Parabolic(Point::Finite(u)) => mat(cx(0.0), cx(1.0), cx(-1.0), u, 1),
        _ => return Err(RepError::NotParabolic),
    };
    let m1 = m.conjugate_by(&g1);
    // m1 = ±[[1, τ],[0, 1]]
    let sign = if m1.a.re < 0.0 { -1.0 } else { 1.0 };
    let tau = m1.b * sign;
    let sq = tau.sqrt();
    let g2 = mat(sq.inv(), cx(0.0), cx(0.0), sq, 1);
    let g = g2 * g1;
    let conj = |ms: &[MatrixRep]| ms.iter().map(|x| x.conjugate_by(&g).normalized()).collect::<Vec<_>>();
    Ok(Representation {
        images: conj(&rep.images),
        base_images: conj(&rep.base_images),
        conjugator: g * rep.conjugator,
        frame: Frame::default(),
        ..rep.clone()
    })
}

/// exp((t/2)·X_c) for the one-parameter subgroup through the hyperbolic `c`.
fn twist_matrix(c: &MatrixRep, t: C64) -> Result<MatrixRep, RepError> {
    let fp = fixed_points(c)?;
    let (p, q) = match fp {
        FixedPoints::Loxodromic { attracting, repelling } => (attracting, repelling),
        _ => return Err(RepError::ValidationFailed("bending curve is not loxodromic".into())),
    };
    // P maps ∞ ↦ attracting, 0 ↦ repelling
    let col = |z: Point| match z {
        Point::Infinity => (cx(1.0), cx(0.0)),
        Point::Finite(z) => (z, cx(1.0)),
    };
    let (pa, pc) = col(p);
    let (qb, qd) = col(q);
    let pm = mat(pa, qb, pc, qd, 1);
    let e = (t / 2.0).exp();
    let d = mat(e, cx(0.0), cx(0.0), e.inv(), 1);
    Ok(pm * d * pm.inverse())
}

/// Per-generator factors (left, right) for a bend: g ↦ L·ρ(g)·R, each factor
/// being I, E or E⁻¹ (encoded as 0, 1, −1).
fn bend_table(id: SurfaceId, curve: &str) -> Option<Vec<(i8, i8)>> {
    match (id, curve) {
        (SurfaceId::N21, "ab") => Some(vec![(0, 1), (-1, 0)]),
        (SurfaceId::N21, "aa") | (SurfaceId::N21, "bb") => Some(vec![(0, 0), (0, 0)]),
        (SurfaceId::N13, "xy") => Some(vec![(0, 0), (1, -1), (1, -1)]),
        (SurfaceId::N13, "aa") => Some(vec![(0, 0), (0, 0), (0, 0)]),
        _ => None,
    }
}

fn bend_images(base: &Representation, word: &GroupWord, t: C64) -> Result<Vec<MatrixRep>, RepError> {
    let curve = base.surface.render(word);
    let table = bend_table(base.id, &curve)
        .ok_or_else(|| RepError::BendUnsupported { family: base.id.to_string(), curve: curve.clone() })?;
    let c = base.evaluate(word);
    if t.norm() == 0.0 || table.iter().all(|&f| f == (0, 0)) {
        return Ok(base.images.clone());
    }
    let e = twist_matrix(&c, t)?;
    let pick = |f: i8| match f {
        1 => e,
        -1 => e.inverse(),
        _ => MatrixRep::identity(),
    };
    Ok(base.images.iter().zip(&table).map(|(m, &(l, r))| pick(l) * *m * pick(r)).collect())
}

/// Complex twist along a 2-sided curve from a Fuchsian representation.
pub fn bend(rep: &Representation, curve: &GroupWord, t: C64, steps: usize) -> Result<Representation, RepError> {
    if !rep.is_fuchsian() {
        return Err(RepError::ValidationFailed("bend expects a Fuchsian representation".into()));
    }
    if rep.surface.is_one_sided(curve) {
        return Err(RepError::BendUnsupported { family: rep.id.to_string(), curve: rep.surface.render(curve) });
    }
    let images = bend_images(rep, curve, t)?;
    let out = Representation {
        images,
        kind: RepKind::Deformed,
        deformation: Some(Deformation::Bend { word: curve.clone(), t, steps: steps.max(1) }),
        ..rep.clone()
    };
    let report = validate(&out);
    if let Some(e) = report.to_error() {
        return Err(e);
    }
    Ok(out)
}

/// Deformation by complexified family parameters.
pub fn deform_params(rep: &Representation, target: &[C64], steps: usize) -> Result<Representation, RepError> {
    let out = Representation {
        kind: RepKind::Deformed,
        deformation: Some(Deformation::Param { target: target.to_vec(), steps: steps.max(1) }),
        ..rep.clone()
    };
    let out = out.at(1.0)?;
    let report = validate(&out);
    if let Some(e) = report.to_error() {
        return Err(e);
    }
    Ok(out)
}

pub fn evaluate(rep: &Representation, w: &GroupWord) -> MatrixRep {
    rep.evaluate(w)
}

#[derive(Serialize, Deserialize)]
struct GeneratorJson {
    name: String,
    det_sign: i8,
    entries: [[f64; 2]; 4],
}

#[derive(Serialize, Deserialize)]
struct PathJson {
    kind: String,
    bend_word: Option<String>,
    t: Option<[f64; 2]>,
    target: Option<Vec<[f64; 2]>>,
    steps: usize,
}

#[derive(Serialize, Deserialize)]
struct RepresentationJson {
    surface: SurfaceSpec,
    family: SurfaceId,
    params: Vec<f64>,
    boundary: Option<Boundary>,
    kind: RepKind,
    generators: Vec<GeneratorJson>,
    base_generators: Vec<GeneratorJson>,
    conjugator: [[f64; 2]; 4],
    path: Option<PathJson>,
}

fn entries(m: &MatrixRep) -> [[f64; 2]; 4] {
    [[m.a.re, m.a.im], [m.b.re, m.b.im], [m.c.re, m.c.im], [m.d.re, m.d.im]]
}

fn from_entries(e: &[[f64; 2]; 4], sign: i8) -> MatrixRep {
    let z = |k: usize| C64::new(e[k][0], e[k][1]);
    MatrixRep { a: z(0), b: z(1), c: z(2), d: z(3), det_sign: sign }
}

impl Representation {
    pub fn to_json(&self) -> serde_json::Value {
        let gens = |ms: &[MatrixRep]| {
            ms.iter()
                .enumerate()
                .map(|(k, m)| GeneratorJson {
                    name: self.surface.render(&GroupWord::generator(k)),
                    det_sign: m.det_sign,
                    entries: entries(m),
                })
                .collect::<Vec<_>>()
        };
        let path = self.deformation.as_ref().map(|d| match d {
            Deformation::Bend { word, t, steps } => PathJson {
                kind: "bend".into(),
                bend_word: Some(self.surface.render(word)),
                t: Some([t.re, t.im]),
                target: None,
                steps: *steps,
            },
            Deformation::Param { target, steps } => PathJson {
                kind: "param".into(),
                bend_word: None,
                t: None,
                target: Some(target.iter().map(|z| [z.re, z.im]).collect()),
                steps: *steps,
            },
        });
        let j = RepresentationJson {
            surface: self.surface.spec(),
            family: self.id,
            params: self.params.clone(),
            boundary: self.boundary,
            kind: self.kind,
            generators: gens(&self.images),
            base_generators: gens(&self.base_images),
            conjugator: entries(&self.conjugator),
            path,
        };
        serde_json::to_value(j).expect("representation serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Representation, RepError> {
        let j: RepresentationJson =
            serde_json::from_value(v.clone()).map_err(|e| RepError::ValidationFailed(format!("bad representation JSON: {e}")))?;
        let surface = SurfacePresentation::from_spec(j.surface)?;
        let images = j.generators.iter().map(|g| from_entries(&g.entries, g.det_sign)).collect();
        let base_images = j.base_generators.iter().map(|g| from_entries(&g.entries, g.det_sign)).collect();
        let deformation = match j.path {
            None => None,
            Some(p) if p.kind == "bend" => {
                let word = surface.parse(p.bend_word.as_deref().unwrap_or(""))?;
                let t = p.t.map(|t| C64::new(t[0], t[1])).unwrap_or_default();
                Some(Deformation::Bend { word, t, steps: p.steps })
            }
            Some(p) => Some(Deformation::Param {
                target: p.target.unwrap_or_default().iter().map(|z| C64::new(z[0], z[1])).collect(),
                steps: p.steps,
            }),
        };
        Ok(Representation {
            surface,
            id: j.family,
            params: j.params,
            boundary: j.boundary,
            images,
            kind: j.kind,
            deformation,
            base_images,
            conjugator: from_entries(&j.conjugator, 1),
            frame: Frame::default(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n12_traces() {
        let rep = build_family(SurfaceId::N12, &[1.0]).unwrap();
        let s = &rep.surface;
        let x = rep.evaluate(&s.parse("x").unwrap());
        let aax = rep.evaluate(&s.parse("aax").unwrap());
        assert!((x.trace() - 2.0).norm() < 1e-10);
        assert!((aax.trace() + 2.0).norm() < 1e-10);
        assert!((rep.images[0].trace() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn meridian_is_unit_translation() {
        for (id, p) in [(SurfaceId::N12, vec![0.7]), (SurfaceId::N21, vec![1.0, 1.5]), (SurfaceId::N13, vec![1.0, 1.2, 0.3])] {
            let rep = build_family(id, &p).unwrap();
            let m = rep.meridian_image();
            assert!(m.distance(&MatrixRep::translation()) < 1e-10, "{id}: {m}");
        }
    }

    #[test]
    fn symmetric_n21() {
        let rep = build_family(SurfaceId::N21, &[1.3, 1.3]).unwrap();
        assert!((rep.images[0].trace() - rep.images[1].trace()).norm() < 1e-10);
        assert!((rep.length(&rep.surface.parse("b").unwrap()).unwrap().value.re - 1.3).abs() < 1e-10);
    }

    #[test]
    fn validation_failures() {
        let mut rep = build_family(SurfaceId::N12, &[1.0]).unwrap();
        rep.images[0].det_sign = 1;
        assert!(matches!(validate(&rep).to_error(), Some(RepError::DetSidednessMismatch { found: 1, expected: -1, .. })));
        let mut rep = build_family(SurfaceId::N12, &[1.0]).unwrap();
        let bump = MatrixRep::real(1.0, 0.0, 0.1, 1.0);
        rep.images[1] = bump * rep.images[1];
        let v = validate(&rep);
        assert!(v.checks.iter().any(|c| c.name == "parabolicity" && !c.passed));
        let mut rep = build_family(SurfaceId::N12, &[1.0]).unwrap();
        rep.images[1] = MatrixRep::real(2.1, -1.0, 1.0, 0.0);
        let v = validate(&rep);
        let c = v.checks.iter().find(|c| c.name == "parabolicity" && c.detail == "x").unwrap();
        assert!((c.residual - 0.1).abs() < 1e-12);
        assert!(matches!(build_family(SurfaceId::N12, &[-1.0]), Err(RepError::OutsideChart { .. })));
    }

    #[test]
    fn normalize_examples() {
        let mut rep = build_family(SurfaceId::N12, &[1.0]).unwrap();
        let s = MatrixRep::real(2f64.sqrt(), 0.0, 0.0, 1.0 / 2f64.sqrt());
        rep.images = rep.images.iter().map(|m| m.conjugate_by(&s)).collect();
        rep.base_images = rep.images.clone();
        assert!(rep.meridian_image().distance(&MatrixRep::real(1.0, 2.0, 0.0, 1.0)) < 1e-10);
        let n = normalize_cusp(&rep).unwrap();
        assert!(n.meridian_image().distance(&MatrixRep::translation()) < 1e-10);
        let inv = MatrixRep::real(0.0, -1.0, 1.0, 0.0);
        rep.images = rep.images.iter().map(|m| m.conjugate_by(&inv)).collect();
        let n = normalize_cusp(&rep).unwrap();
        assert!(n.meridian_image().distance(&MatrixRep::translation()) < 1e-9);
        let fresh = build_family(SurfaceId::N21, &[1.0, 1.0]).unwrap();
        let n = normalize_cusp(&fresh).unwrap();
        assert!(n.conjugator.distance(&MatrixRep::identity()) < 1e-12);
    }

    #[test]
    fn bend_zero_is_identity() {
        let rep = build_family(SurfaceId::N21, &[1.0, 1.5]).unwrap();
        let ab = rep.surface.parse("ab").unwrap();
        let b = bend(&rep, &ab, C64::new(0.0, 0.0), 8).unwrap();
        for (x, y) in b.images.iter().zip(&rep.images) {
            assert!(x.distance(y) < 1e-15);
        }
        let b = bend(&rep, &ab, C64::new(0.0, 0.1), 8).unwrap();
        assert!(b.meridian_image().distance(&MatrixRep::translation()) < 1e-10);
        assert!(matches!(bend(&rep, &rep.surface.parse("a").unwrap(), C64::new(0.0, 0.1), 8), Err(RepError::BendUnsupported { .. })));
    }

    #[test]
    fn json_roundtrip() {
        let rep = build_family(SurfaceId::N21, &[1.0, 1.5]).unwrap();
        let b = bend(&rep, &rep.surface.parse("ab").unwrap(), C64::new(0.0, 0.1), 16).unwrap();
        let back = Representation::from_json(&b.to_json()).unwrap();
        assert_eq!(back.deformation, b.deformation);
        for (x, y) in back.images.iter().zip(&b.images) {
            assert!(x.distance(y) < 1e-15);
        }
    }
}
