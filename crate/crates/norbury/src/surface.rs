//! Presentations of punctured nonorientable surfaces and word algebra.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("surface with {crosscaps} crosscaps and {punctures} punctures is not hyperbolic (Euler characteristic {chi})")]
    NotHyperbolic { crosscaps: usize, punctures: usize, chi: i64 },
    #[error("cusp index {cusp} out of range for {punctures} punctures")]
    BadCusp { cusp: usize, punctures: usize },
    #[error("cannot parse word {word:?}: {reason}")]
    Parse { word: String, reason: String },
}

/// Surface spec as it appears in configuration files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceSpec {
    pub crosscaps: usize,
    pub punctures: usize,
    pub cusp: usize,
}

/// A freely reduced word. Letter `k + 1` is generator `k`, `-(k + 1)` its inverse.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupWord(pub Vec<i32>);

fn letter_key(l: i32) -> (i32, bool) {
    (l.abs(), l < 0)
}

fn cmp_letters(a: &[i32], b: &[i32]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match letter_key(*x).cmp(&letter_key(*y)) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

impl GroupWord {
    pub fn empty() -> Self {
        GroupWord(Vec::new())
    }

    pub fn generator(k: usize) -> Self {
        GroupWord(vec![k as i32 + 1])
    }

    pub fn from_letters(letters: &[i32]) -> Self {
        let mut w = GroupWord(Vec::with_capacity(letters.len()));
        for &l in letters {
            w.push(l);
        }
        w
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[i32] {
        &self.0
    }

    /// Appends a letter, cancelling against the last one when possible.
    pub fn push(&mut self, l: i32) {
        assert!(l != 0, "zero is not a letter");
        if self.0.last() == Some(&-l) {
            self.0.pop();
        } else {
            self.0.push(l);
        }
    }

    pub fn mul(&self, other: &GroupWord) -> GroupWord {
        let mut out = self.clone();
        for &l in &other.0 {
            out.push(l);
        }
        out
    }

    pub fn inverse(&self) -> GroupWord {
        GroupWord(self.0.iter().rev().map(|l| -l).collect())
    }

    pub fn pow(&self, n: i64) -> GroupWord {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = GroupWord::empty();
        for _ in 0..n.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    pub fn conjugate_by(&self, g: &GroupWord) -> GroupWord {
        g.mul(self).mul(&g.inverse())
    }

    /// Removes cancelling letters at the two ends of the word.
    pub fn cyclically_reduced(&self) -> GroupWord {
        let v = &self.0;
        let (mut i, mut j) = (0usize, v.len());
        while j >= i + 2 && v[i] == -v[j - 1] {
            i += 1;
            j -= 1;
        }
        GroupWord(v[i..j].to_vec())
    }

    fn rotations(&self) -> impl Iterator<Item = Vec<i32>> + '_ {
        let n = self.0.len();
        (0..n.max(1)).map(move |k| {
            let mut r = self.0[k.min(n)..].to_vec();
            r.extend_from_slice(&self.0[..k.min(n)]);
            r
        })
    }

    /// Exponent sum of each generator.
    pub fn exponent_sums(&self, rank: usize) -> Vec<i64> {
        let mut out = vec![0i64; rank];
        for &l in &self.0 {
            let k = (l.unsigned_abs() - 1) as usize;
            if k < rank {
                out[k] += if l > 0 { 1 } else { -1 };
            }
        }
        out
    }

    /// Letter names: crosscap generators a, b, c, ...; puncture loops x, y, z, w, ...;
    /// inverses in upper case.
    pub fn render(&self, crosscaps: usize) -> String {
        self.0.iter().map(|&l| letter_name(l, crosscaps)).collect()
    }
}

const CROSSCAP_NAMES: &[u8] = b"abcdefgh";
const PUNCTURE_NAMES: &[u8] = b"xyzwuvst";

fn letter_name(l: i32, crosscaps: usize) -> char {
    let k = (l.unsigned_abs() - 1) as usize;
    let ch = if k < crosscaps { CROSSCAP_NAMES[k] } else { PUNCTURE_NAMES[k - crosscaps] } as char;
    if l < 0 {
        ch.to_ascii_uppercase()
    } else {
        ch
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let s: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", s.join("."))
    }
}

/// Cyclically reduced, lexicographically least rotation of the word or its inverse.
pub fn canonical_conjugacy(w: &GroupWord) -> GroupWord {
    let r = w.cyclically_reduced();
    let inv = r.inverse();
    let best = r.rotations().chain(inv.rotations()).min_by(|a, b| cmp_letters(a, b)).unwrap_or_default();
    GroupWord(best)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfacePresentation {
    pub crosscaps: usize,
    pub punctures: usize,
    /// Generator sidedness: true for crosscap generators.
    pub one_sided: Vec<bool>,
    pub peripheral_words: Vec<GroupWord>,
    pub distinguished_cusp: usize,
}

/// Free group on a₁..a_g, x₁..x_{n−1}; peripherals x₁, …, x_{n−1} and the
/// relation word a₁²···a_g² x₁···x_{n−1}.
pub fn presentation(g: usize, n: usize, cusp: usize) -> Result<SurfacePresentation, SurfaceError> {
    let chi = 2 - g as i64 - n as i64;
    if chi >= 0 || g == 0 || n == 0 {
        return Err(SurfaceError::NotHyperbolic { crosscaps: g, punctures: n, chi });
    }
    if cusp >= n {
        return Err(SurfaceError::BadCusp { cusp, punctures: n });
    }
    let rank = g + n - 1;
    let one_sided = (0..rank).map(|k| k < g).collect();
    let mut peripheral_words: Vec<GroupWord> = (g..rank).map(GroupWord::generator).collect();
    let mut rel = GroupWord::empty();
    for k in 0..g {
        rel.push(k as i32 + 1);
        rel.push(k as i32 + 1);
    }
    for k in g..rank {
        rel.push(k as i32 + 1);
    }
    peripheral_words.push(rel);
    Ok(SurfacePresentation { crosscaps: g, punctures: n, one_sided, peripheral_words, distinguished_cusp: cusp })
}

impl SurfacePresentation {
    pub fn from_spec(spec: SurfaceSpec) -> Result<Self, SurfaceError> {
        presentation(spec.crosscaps, spec.punctures, spec.cusp)
    }

    pub fn spec(&self) -> SurfaceSpec {
        SurfaceSpec { crosscaps: self.crosscaps, punctures: self.punctures, cusp: self.distinguished_cusp }
    }

    pub fn rank(&self) -> usize {
        self.one_sided.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        2 - self.crosscaps as i64 - self.punctures as i64
    }

    /// The peripheral word m_p of the distinguished cusp.
    pub fn meridian(&self) -> &GroupWord {
        &self.peripheral_words[self.distinguished_cusp]
    }

    pub fn orientation_character(&self, w: &GroupWord) -> u8 {
        let odd = w.0.iter().filter(|l| self.one_sided[(l.unsigned_abs() - 1) as usize]).count();
        (odd % 2) as u8
    }

    pub fn is_one_sided(&self, w: &GroupWord) -> bool {
        self.orientation_character(w) == 1
    }

    /// Mod 2 intersection pairing on H₁(N; Z/2): crosscap classes pair
    /// diagonally, puncture loops lie in the radical.
    pub fn parity_z2(&self, u: &GroupWord, v: &GroupWord) -> u8 {
        let su = u.exponent_sums(self.rank());
        let sv = v.exponent_sums(self.rank());
        let dot: i64 = (0..self.crosscaps).map(|k| su[k].rem_euclid(2) * sv[k].rem_euclid(2)).sum();
        (dot % 2) as u8
    }

    pub fn render(&self, w: &GroupWord) -> String {
        if w.is_empty() {
            "1".to_string()
        } else {
            w.render(self.crosscaps)
        }
    }

    /// Parses letter names as produced by `render` ("1" or "" is the empty word).
    pub fn parse(&self, s: &str) -> Result<GroupWord, SurfaceError> {
        let mut w = GroupWord::empty();
        let t = s.trim();
        if t == "1" {
            return Ok(w);
        }
        for ch in t.chars() {
            let lower = ch.to_ascii_lowercase() as u8;
            let k = if let Some(i) = CROSSCAP_NAMES.iter().position(|&c| c == lower) {
                if i >= self.crosscaps {
                    None
                } else {
                    Some(i)
                }
            } else {
                PUNCTURE_NAMES
                    .iter()
                    .position(|&c| c == lower)
                    .filter(|&i| i + 1 < self.punctures)
                    .map(|i| i + self.crosscaps)
            };
            let k = k.ok_or_else(|| SurfaceError::Parse { word: s.to_string(), reason: format!("unknown letter {ch:?}") })?;
            let l = k as i32 + 1;
            w.push(if ch.is_ascii_uppercase() { -l } else { l });
        }
        Ok(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presentations() {
        let n12 = presentation(1, 2, 1).unwrap();
        assert_eq!(n12.rank(), 2);
        assert_eq!(n12.peripheral_words.len(), 2);
        assert_eq!(n12.render(&n12.peripheral_words[0]), "x");
        assert_eq!(n12.render(&n12.peripheral_words[1]), "aax");
        let n21 = presentation(2, 1, 0).unwrap();
        assert_eq!(n21.render(n21.meridian()), "aabb");
        assert!(matches!(presentation(1, 1, 0), Err(SurfaceError::NotHyperbolic { .. })));
    }

    #[test]
    fn orientation_examples() {
        let n21 = presentation(2, 1, 0).unwrap();
        assert_eq!(n21.orientation_character(&GroupWord::empty()), 0);
        assert_eq!(n21.orientation_character(&n21.parse("a").unwrap()), 1);
        assert_eq!(n21.orientation_character(n21.meridian()), 0);
    }

    #[test]
    fn canonical_examples() {
        let n12 = presentation(1, 2, 1).unwrap();
        let w = n12.parse("xaX").unwrap();
        assert_eq!(n12.render(&canonical_conjugacy(&w)), "a");
        let n21 = presentation(2, 1, 0).unwrap();
        let ba = n21.parse("ba").unwrap();
        assert_eq!(n21.render(&canonical_conjugacy(&ba)), "ab");
        let w = n21.parse("abbA").unwrap();
        assert_eq!(canonical_conjugacy(&w), canonical_conjugacy(&w.inverse()));
    }

    #[test]
    fn parity_examples() {
        let n21 = presentation(2, 1, 0).unwrap();
        let a = n21.parse("a").unwrap();
        assert_eq!(n21.parity_z2(&a, &a), 1);
        assert_eq!(n21.parity_z2(&a, n21.meridian()), 0);
        let beta = a.mul(n21.meridian());
        assert_eq!(n21.parity_z2(&a, &beta), 1);
        let ab = n21.parse("ab").unwrap();
        assert_eq!(n21.parity_z2(&ab, &ab), 0);
    }

    #[test]
    fn parse_render_roundtrip() {
        let n13 = presentation(1, 3, 2).unwrap();
        for s in ["axyXA", "Y", "aaxy"] {
            assert_eq!(n13.render(&n13.parse(s).unwrap()), s);
        }
        assert!(n13.parse("q").is_err());
    }
}
