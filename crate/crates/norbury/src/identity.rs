//! Series engine: summands, the cusped identity and its alternative form,
//! per-band decompositions, bordered functions and the width formula.

use crate::curves::{self, enumerate_arcs, CurveError, CuspPair, Enumeration, MoebiusTriple, OrientedArc, PairKind};
use crate::mobius::{fixed_points, FixedPoints, MobiusError, Point, C64};
use crate::repbuild::{RepError, Representation};
use crate::surface::{canonical_conjugacy, GroupWord};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IdentityError {
    #[error("summand pole at {pair}: |denominator| = {modulus:.3e}")]
    PoleHit { pair: String, modulus: f64 },
    #[error("negative real argument x = {0}")]
    DomainError(f64),
    #[error("{0}")]
    NotApplicable(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Mobius(#[from] MobiusError),
}

pub const POLE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub kind: String,
    pub alpha: String,
    pub beta: String,
    pub re_length: f64,
    pub value: C64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    pub value: C64,
    pub target: f64,
    pub term_count: usize,
    pub cutoff: f64,
    pub tail_estimate: f64,
    pub ledger: Vec<TermRecord>,
}

impl SeriesReport {
    pub fn error(&self) -> f64 {
        (self.value - self.target).norm()
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.error() <= tol + self.tail_estimate
    }
}

/// Sum in a fixed pairwise order.
pub fn pairwise_sum(v: &[C64]) -> C64 {
    match v.len() {
        0 => C64::new(0.0, 0.0),
        1 => v[0],
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

fn gap_term(y: C64, parity: u8, label: impl Fn() -> String) -> Result<C64, IdentityError> {
    let den = if parity == 1 { y - 1.0 } else { y + 1.0 };
    if den.norm() < POLE_TOL {
        return Err(IdentityError::PoleHit { pair: label(), modulus: den.norm() });
    }
    Ok(den.inv())
}

/// (e^{(ℓα+ℓβ)/2} + (−1)^parity)^{-1} under `rep`.
pub fn summand(pair: &CuspPair, rep: &Representation) -> Result<C64, IdentityError> {
    let y = rep.half_exp_length(&pair.alpha_raw) * rep.half_exp_length(&pair.beta_raw);
    gap_term(y, pair.parity, || rep.surface.render(&pair.alpha) + "," + &rep.surface.render(&pair.beta))
}

/// Summand of an oriented arc under `rep`.
pub fn arc_summand(arc: &OrientedArc, rep: &Representation) -> Result<C64, IdentityError> {
    let y = rep.half_exp_length(&arc.alpha) * rep.half_exp_length(&arc.beta);
    let parity = u8::from(arc.det_sign < 0);
    gap_term(y, parity, || rep.surface.render(&arc.g))
}

/// Re(ℓ) from e^{ℓ/2}.
fn re_len(y: C64) -> f64 {
    2.0 * y.norm().ln()
}

#[derive(Clone, Debug)]
struct Term {
    re_length: f64,
    value: C64,
    record: TermRecord,
}

fn pair_terms(en: &Enumeration, rep: &Representation) -> Result<Vec<Term>, IdentityError> {
    en.pairs
        .par_iter()
        .map(|p| {
            let ya = rep.half_exp_length(&p.alpha_raw);
            let yb = rep.half_exp_length(&p.beta_raw);
            let value = summand(p, rep)?;
            let re_length = re_len(ya) + re_len(yb);
            Ok(Term {
                re_length,
                value,
                record: TermRecord {
                    kind: p.kind.as_str().into(),
                    alpha: rep.surface.render(&p.alpha),
                    beta: rep.surface.render(&p.beta),
                    re_length,
                    value,
                },
            })
        })
        .collect()
}

fn sorted_terms(mut terms: Vec<Term>) -> Vec<Term> {
    terms.sort_by(|a, b| {
        a.re_length
            .total_cmp(&b.re_length)
            .then_with(|| (&a.record.alpha, &a.record.beta).cmp(&(&b.record.alpha, &b.record.beta)))
    });
    terms
}

fn partial(terms: &[Term], cutoff: f64) -> (C64, usize) {
    let vals: Vec<C64> = terms.iter().filter(|t| t.re_length <= cutoff).map(|t| t.value).collect();
    (pairwise_sum(&vals), vals.len())
}

/// Power-law count N(L) ≈ a·L^k fitted on [cutoff/2, cutoff].
pub fn fit_count(lengths: &[f64], cutoff: f64) -> Option<(f64, f64)> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for j in 0..=20 {
        let l = cutoff * (0.5 + 0.5 * j as f64 / 20.0);
        let n = lengths.iter().filter(|&&x| x <= l).count();
        if n > 0 {
            xs.push(l.ln());
            ys.push((n as f64).ln());
        }
    }
    if xs.len() < 2 {
        return None;
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let k = if sxx > 0.0 { (sxy / sxx).max(0.0) } else { 0.0 };
    let a = (my - k * mx).exp();
    Some((a, k))
}

/// ∫_cutoff^∞ N′(L)/(e^{L/2} − 1) dL for N(L) = a·L^k (Simpson's rule).
pub fn tail_integral(a: f64, k: f64, cutoff: f64) -> f64 {
    if k <= 0.0 {
        return 0.0;
    }
    let f = |l: f64| a * k * l.powf(k - 1.0) / ((l / 2.0).exp() - 1.0);
    let upper = cutoff + 80.0;
    let n = 4000;
    let h = (upper - cutoff) / n as f64;
    let mut s = f(cutoff) + f(upper);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(cutoff + i as f64 * h);
    }
    s * h / 3.0
}

fn tail_estimate(terms: &[Term], cutoff: f64) -> f64 {
    let lengths: Vec<f64> = terms.iter().map(|t| t.re_length).collect();
    let fitted = fit_count(&lengths, cutoff).map_or(0.0, |(a, k)| tail_integral(a, k, cutoff));
    let (s0, _) = partial(terms, cutoff);
    let (s2, _) = partial(terms, cutoff + 2.0);
    fitted + (s2 - s0).norm()
}

/// Extra base-point length needed so that deformed lengths up to the
/// cutoff (plus the tail window) are all enumerated.
pub const ENUMERATION_MARGIN: f64 = 4.0;

pub fn enumerate_for(rep: &Representation, cutoff: f64) -> Result<Enumeration, IdentityError> {
    Ok(enumerate_arcs(rep, cutoff + ENUMERATION_MARGIN)?)
}

/// The cusped identity Σ (e^{(ℓα+ℓβ)/2} ± 1)^{-1} = 1/2.
pub fn sum_identity(rep: &Representation, cutoff: f64) -> Result<SeriesReport, IdentityError> {
    let en = enumerate_for(rep, cutoff)?;
    sum_identity_with(rep, &en, cutoff)
}

pub fn sum_identity_with(rep: &Representation, en: &Enumeration, cutoff: f64) -> Result<SeriesReport, IdentityError> {
    let terms = sorted_terms(pair_terms(en, rep)?);
    let (value, term_count) = partial(&terms, cutoff);
    let tail = tail_estimate(&terms, cutoff);
    Ok(SeriesReport {
        value,
        target: 0.5,
        term_count,
        cutoff,
        tail_estimate: tail,
        ledger: terms.into_iter().filter(|t| t.re_length <= cutoff).map(|t| t.record).collect(),
    })
}

/// True when one boundary curve of a pants pair doubles a 1-sided curve,
/// so the pants sits inside an embedded Möbius band.
pub fn inside_band(pair: &CuspPair, rep: &Representation) -> bool {
    pair.kind == PairKind::Pants && [&pair.alpha, &pair.beta].iter().any(|w| is_one_sided_square(w, rep))
}

fn is_one_sided_square(w: &GroupWord, rep: &Representation) -> bool {
    let c = canonical_conjugacy(w);
    let l = c.letters();
    if l.is_empty() || l.len() % 2 == 1 {
        return false;
    }
    let h = l.len() / 2;
    l[..h] == l[h..] && rep.surface.is_one_sided(&GroupWord::from_letters(&l[..h]))
}

/// Alternative identity: band boundary terms plus pants outside bands.
pub fn sum_alternative(rep: &Representation, cutoff: f64) -> Result<SeriesReport, IdentityError> {
    let en = enumerate_for(rep, cutoff)?;
    sum_alternative_with(rep, &en, cutoff)
}

pub fn sum_alternative_with(rep: &Representation, en: &Enumeration, cutoff: f64) -> Result<SeriesReport, IdentityError> {
    let terms: Vec<Term> = en
        .pairs
        .par_iter()
        .filter_map(|p| match p.kind {
            PairKind::Moebius => {
                let nu = p.alpha_raw.mul(&p.beta_raw);
                let y = rep.half_exp_length(&nu);
                Some(gap_term(y, 0, || rep.surface.render(&nu)).map(|value| Term {
                    re_length: re_len(y),
                    value,
                    record: TermRecord {
                        kind: "band".into(),
                        alpha: rep.surface.render(&canonical_conjugacy(&nu)),
                        beta: String::new(),
                        re_length: re_len(y),
                        value,
                    },
                }))
            }
            PairKind::Pants if inside_band(p, rep) => None,
            PairKind::Pants => {
                let ya = rep.half_exp_length(&p.alpha_raw);
                let yb = rep.half_exp_length(&p.beta_raw);
                Some(summand(p, rep).map(|value| Term {
                    re_length: re_len(ya) + re_len(yb),
                    value,
                    record: TermRecord {
                        kind: "pants".into(),
                        alpha: rep.surface.render(&p.alpha),
                        beta: rep.surface.render(&p.beta),
                        re_length: re_len(ya) + re_len(yb),
                        value,
                    },
                }))
            }
        })
        .collect::<Result<_, _>>()?;
    let terms = sorted_terms(terms);
    let (value, term_count) = partial(&terms, cutoff);
    let tail = tail_estimate(&terms, cutoff);
    Ok(SeriesReport {
        value,
        target: 0.5,
        term_count,
        cutoff,
        tail_estimate: tail,
        ledger: terms.into_iter().filter(|t| t.re_length <= cutoff).map(|t| t.record).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandResiduals {
    /// Three-term regrouping residual.
    pub regroup: f64,
    /// Trace relation residual with the first boundary a cusp.
    pub trace: f64,
}

pub fn band_decomposition_check(band: &CuspPair, rep: &Representation) -> Result<BandResiduals, IdentityError> {
    let t: MoebiusTriple = curves::moebius_triple(band, rep)?;
    let one = C64::new(1.0, 0.0);
    let yn = t.y_nu;
    let lhs = (yn + 1.0).inv();
    let rhs = (yn * t.y_mu * t.y_mu + 1.0).inv() + (yn * t.y_mu_prime * t.y_mu_prime + 1.0).inv()
        + (t.y_mu * t.y_mu_prime - one).inv();
    Ok(BandResiduals { regroup: (lhs - rhs).norm(), trace: curves::trace_relation_residual(&t) })
}

fn check_x(x: C64) -> Result<(), IdentityError> {
    if x.im == 0.0 && x.re < 0.0 {
        return Err(IdentityError::DomainError(x.re));
    }
    Ok(())
}

/// R(x,y,z) = x − ln[(cosh(y/2) + cosh((x+z)/2)) / (cosh(y/2) + cosh((x−z)/2))].
pub fn norbury_r(x: C64, y: C64, z: C64) -> C64 {
    let cy = (y / 2.0).cosh();
    x - ((cy + ((x + z) / 2.0).cosh()) / (cy + ((x - z) / 2.0).cosh())).ln()
}

/// D(x,y,z) = R(x,y,z) + R(x,z,y) − x.
pub fn norbury_d(x: C64, y: C64, z: C64) -> C64 {
    norbury_r(x, y, z) + norbury_r(x, z, y) - x
}

/// E(x,y,z) = R(x,2z,y) − x/2.
pub fn norbury_e(x: C64, y: C64, z: C64) -> C64 {
    norbury_r(x, z * 2.0, y) - x / 2.0
}

fn r_hat_zero(y: C64, z: C64) -> C64 {
    let cy = (y / 2.0).cosh();
    (cy + (-z / 2.0).exp()) / (cy + (z / 2.0).cosh())
}

/// R/x, with its limit at x = 0.
pub fn norbury_r_hat(x: C64, y: C64, z: C64) -> Result<C64, IdentityError> {
    check_x(x)?;
    Ok(if x == C64::new(0.0, 0.0) { r_hat_zero(y, z) } else { norbury_r(x, y, z) / x })
}

/// D/x, with its limit at x = 0.
pub fn norbury_d_hat(x: C64, y: C64, z: C64) -> Result<C64, IdentityError> {
    check_x(x)?;
    Ok(if x == C64::new(0.0, 0.0) { r_hat_zero(y, z) + r_hat_zero(z, y) - 1.0 } else { norbury_d(x, y, z) / x })
}

/// (E(x,ν,μ) + E(x,ν,μ′))/x, with its limit at x = 0.
pub fn norbury_e_pair_hat(x: C64, nu: C64, mu: C64, mu_prime: C64) -> Result<C64, IdentityError> {
    check_x(x)?;
    Ok(if x == C64::new(0.0, 0.0) {
        r_hat_zero(mu * 2.0, nu) + r_hat_zero(mu_prime * 2.0, nu) - 1.0
    } else {
        (norbury_e(x, nu, mu) + norbury_e(x, nu, mu_prime)) / x
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NorburyValues {
    pub r: C64,
    pub d: C64,
    pub e: C64,
    pub r_hat: C64,
    pub d_hat: C64,
}

pub fn norbury_functions(x: C64, y: C64, z: C64) -> Result<NorburyValues, IdentityError> {
    Ok(NorburyValues {
        r: norbury_r(x, y, z),
        d: norbury_d(x, y, z),
        e: norbury_e(x, y, z),
        r_hat: norbury_r_hat(x, y, z)?,
        d_hat: norbury_d_hat(x, y, z)?,
    })
}

/// Band data of a bordered N12 representation: the interior 1-sided pair
/// and the second boundary or cusp ν, with lengths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BorderedBand {
    pub l1: f64,
    pub len_nu: f64,
    pub len_mu: f64,
    pub len_mu_prime: f64,
}

fn real_len(rep: &Representation, w: &GroupWord) -> f64 {
    let y = rep.half_exp_length(w);
    2.0 * y.norm().ln()
}

pub fn bordered_band(rep_b: &Representation) -> Result<(BorderedBand, CuspPair), IdentityError> {
    let bd = rep_b
        .boundary
        .ok_or_else(|| IdentityError::NotApplicable("representation has no boundary".into()))?;
    let cusped = crate::repbuild::build_family(rep_b.id, &rep_b.params)?;
    let en = enumerate_arcs(&cusped, 8.0)?;
    let band = en
        .pairs
        .iter()
        .find(|p| p.kind == PairKind::Moebius)
        .cloned()
        .ok_or_else(|| IdentityError::NotApplicable("no embedded band found".into()))?;
    let out = BorderedBand {
        l1: bd.l1,
        len_nu: bd.l2,
        len_mu: real_len(rep_b, &band.alpha_raw),
        len_mu_prime: real_len(rep_b, &band.beta_raw),
    };
    Ok((out, band))
}

/// Bordered identity on N12 with one boundary of length L1: the
/// configuration consists of the single band around the crosscap, so the
/// series is the finite sum E(L1,ℓν,ℓμ) + E(L1,ℓν,ℓμ′) with target L1.
pub fn bordered_identity_check(rep_b: &Representation, cutoff: f64) -> Result<SeriesReport, IdentityError> {
    let (b, band) = bordered_band(rep_b)?;
    if b.len_nu > 0.0 {
        return Err(IdentityError::NotApplicable("the second puncture must remain a cusp".into()));
    }
    let c = |x: f64| C64::new(x, 0.0);
    let e1 = norbury_e(c(b.l1), c(b.len_nu), c(b.len_mu));
    let e2 = norbury_e(c(b.l1), c(b.len_nu), c(b.len_mu_prime));
    let rec = |w: &GroupWord, v: C64, l: f64| TermRecord {
        kind: "band-E".into(),
        alpha: rep_b.surface.render(&canonical_conjugacy(w)),
        beta: format!("{}", b.len_nu),
        re_length: l,
        value: v,
    };
    Ok(SeriesReport {
        value: e1 + e2,
        target: b.l1,
        term_count: 2,
        cutoff,
        tail_estimate: 0.0,
        ledger: vec![rec(&band.alpha_raw, e1, b.len_mu), rec(&band.beta_raw, e2, b.len_mu_prime)],
    })
}

/// Trace relation residual |cosh(L1/2) + cosh(ℓν/2) − 2 sinh(ℓμ/2) sinh(ℓμ′/2)|
/// for the bordered band.
pub fn bordered_trace_residual(rep_b: &Representation) -> Result<f64, IdentityError> {
    let (b, _) = bordered_band(rep_b)?;
    Ok(((b.l1 / 2.0).cosh() + (b.len_nu / 2.0).cosh() - 2.0 * (b.len_mu / 2.0).sinh() * (b.len_mu_prime / 2.0).sinh()).abs())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegluedCheck {
    pub l1a: f64,
    pub l1b: f64,
    pub e_pair: f64,
    pub r_pair: f64,
}

/// Cut the band along the 1-sided orthogeodesic from the boundary to
/// itself and reglue: the boundary splits into arcs of lengths L1A, L1B,
/// and E(L1,ν,μ)+E(L1,ν,μ′) is compared with R(L1A,L1B,ν)+R(L1B,L1A,ν).
pub fn reglued_check(rep_b: &Representation) -> Result<RegluedCheck, IdentityError> {
    let (b, band) = bordered_band(rep_b)?;
    let w = rep_b.meridian_image();
    let f = match fixed_points(&w)? {
        FixedPoints::Loxodromic { attracting: Point::Infinity, repelling: Point::Finite(p) }
        | FixedPoints::Loxodromic { attracting: Point::Finite(p), repelling: Point::Infinity } => p.re,
        _ => return Err(IdentityError::NotApplicable("boundary axis is not vertical".into())),
    };
    let mu = rep_b.evaluate(&band.alpha_raw);
    let foot = |m: &crate::mobius::MatrixRep| -> Result<f64, IdentityError> {
        let r = crate::mobius::apply(m, Point::Infinity);
        let s = crate::mobius::apply(m, Point::real(f));
        match (r, s) {
            (Point::Finite(r), Point::Finite(s)) => {
                let prod = (r.re - f) * (s.re - f);
                if prod <= 0.0 {
                    return Err(IdentityError::NotApplicable("translated boundary axes cross".into()));
                }
                Ok(0.5 * prod.ln())
            }
            _ => Err(IdentityError::NotApplicable("degenerate boundary translate".into())),
        }
    };
    let h1 = foot(&mu)?;
    let h2 = foot(&mu.inverse())?;
    let l1a = (h1 - h2).rem_euclid(b.l1);
    let l1b = b.l1 - l1a;
    let c = |x: f64| C64::new(x, 0.0);
    let e_pair = (norbury_e(c(b.l1), c(b.len_nu), c(b.len_mu)) + norbury_e(c(b.l1), c(b.len_nu), c(b.len_mu_prime))).re;
    let r_pair = (norbury_r(c(l1a), c(l1b), c(b.len_nu)) + norbury_r(c(l1b), c(l1a), c(b.len_nu))).re;
    Ok(RegluedCheck { l1a, l1b, e_pair, r_pair })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidthReport {
    pub sum: C64,
    pub expected: C64,
    pub window: (f64, f64),
    pub terms: usize,
}

impl WidthReport {
    pub fn residual(&self) -> f64 {
        (self.sum - self.expected).norm()
    }
}

/// Attracting fixed point of ρ(g) (the fixed point when parabolic).
pub fn attracting_point(rep: &Representation, g: &GroupWord) -> Result<C64, IdentityError> {
    let m = rep.evaluate(g);
    let p = match fixed_points(&m)? {
        FixedPoints::Loxodromic { attracting, .. } => attracting,
        FixedPoints::Parabolic(p) => p,
        FixedPoints::Elliptic(..) => return Err(IdentityError::NotApplicable("elliptic endpoint word".into())),
    };
    p.finite().ok_or_else(|| IdentityError::NotApplicable("endpoint at infinity".into()))
}

fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f < 1.0 {
        f
    } else {
        0.0
    }
}

/// Sum of arc summands with launch direction in [dir ξ, dir η), against the
/// difference of the endpoints Fix⁺ρ(g_η) − Fix⁺ρ(g_ξ) (plus one turn when
/// the window wraps or ξ = η).
pub fn width(
    rep: &Representation,
    en: &Enumeration,
    xi: &GroupWord,
    eta: &GroupWord,
    cutoff: f64,
) -> Result<WidthReport, IdentityError> {
    let base = rep.base();
    let bx = attracting_point(&base, xi)?.re;
    let be = attracting_point(&base, eta)?.re;
    let (dx, de) = (frac(bx), frac(be));
    let full = (dx - de).abs() < 1e-12;
    let in_window = |d: f64| {
        if full {
            true
        } else if dx < de {
            dx <= d && d < de
        } else {
            d >= dx || d < de
        }
    };
    let vals: Vec<C64> = en
        .arcs
        .par_iter()
        .filter(|a| in_window(a.direction))
        .map(|a| {
            let ya = rep.half_exp_length(&a.alpha);
            let yb = rep.half_exp_length(&a.beta);
            if re_len(ya) + re_len(yb) > cutoff {
                return Ok(None);
            }
            arc_summand(a, rep).map(Some)
        })
        .collect::<Result<Vec<_>, IdentityError>>()?
        .into_iter()
        .flatten()
        .collect();
    let sum = pairwise_sum(&vals);
    let zx = attracting_point(rep, xi)? - bx.floor();
    let ze = attracting_point(rep, eta)? - be.floor();
    let turn = if full || de < dx { 1.0 } else { 0.0 };
    Ok(WidthReport { sum, expected: ze - zx + turn, window: (dx, de), terms: vals.len() })
}

/// Width between the lower ends of the two widest gaps of the Fuchsian
/// basepoint.
pub fn calibration_width(rep: &Representation, en: &Enumeration, cutoff: f64) -> Result<WidthReport, IdentityError> {
    let mut by_width: Vec<&OrientedArc> = en.arcs.iter().collect();
    by_width.sort_by(|a, b| (b.gap.1 - b.gap.0).total_cmp(&(a.gap.1 - a.gap.0)).then_with(|| a.g.cmp(&b.g)));
    if by_width.len() < 2 {
        return Err(IdentityError::NotApplicable("fewer than two gaps".into()));
    }
    let xi = by_width[0].ends[0].word.clone();
    let eta = by_width[1].ends[0].word.clone();
    width(rep, en, &xi, &eta, cutoff)
}

/// Width over the full circle, whose expected value is 1.
pub fn full_circle_width(rep: &Representation, en: &Enumeration, cutoff: f64) -> Result<WidthReport, IdentityError> {
    let arc = en.arcs.first().ok_or_else(|| IdentityError::NotApplicable("no arcs enumerated".into()))?;
    let w = arc.ends[0].word.clone();
    width(rep, en, &w, &w, cutoff)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn d_is_sum_of_rs() {
        for (x, y, z) in [(0.3, 1.0, 2.0), (1.5, 0.2, 0.7)] {
            let lhs = norbury_d(c(x), c(y), c(z)) + c(x);
            let rhs = norbury_r(c(x), c(y), c(z)) + norbury_r(c(x), c(z), c(y));
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn hatted_limits_at_zero() {
        let (y, z) = (1.0, 1.0);
        let lim = 2.0 / (((y + z) / 2.0f64).exp() + 1.0);
        assert!((norbury_d_hat(c(0.0), c(y), c(z)).unwrap().re - lim).abs() < 1e-12);
        assert!((norbury_r_hat(c(0.0), c(0.0), c(z)).unwrap().re - 2.0 / ((z / 2.0f64).exp() + 1.0)).abs() < 1e-12);
        assert!(matches!(norbury_r_hat(c(-1.0), c(0.0), c(z)), Err(IdentityError::DomainError(_))));
    }

    #[test]
    fn summand_examples() {
        // pants with ℓα + ℓβ = 2 ln 3
        assert!((gap_term(c(3.0), 0, String::new).unwrap() - 0.25).norm() < 1e-15);
        assert!((gap_term(c(3.0), 1, String::new).unwrap() - 0.5).norm() < 1e-15);
        assert!(matches!(gap_term(c(1.0), 1, String::new), Err(IdentityError::PoleHit { .. })));
    }

    #[test]
    fn pairwise_sum_matches() {
        let v: Vec<C64> = (1..=100).map(|k| c(1.0 / k as f64)).collect();
        let direct: C64 = v.iter().sum();
        assert!((pairwise_sum(&v) - direct).norm() < 1e-12);
    }
}
