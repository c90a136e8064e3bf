//! PSL(2, C) elements: normalized 2x2 complex matrices together with the
//! generator word that produced them.
//!
//! All elements are projective classes: `g` and `-g` denote the same isometry,
//! and every comparison in this module is modulo that sign. A canonical sign
//! is chosen at construction time (first entry of magnitude above tolerance
//! gets argument in (-pi/2, pi/2]) so stored matrices are reproducible.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::tolerance::Tolerance;

/// A word in the group generators: nonzero signed 1-based indices,
/// `k` for generator k, `-k` for its inverse. The empty word is the identity
/// and is rendered as `e`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(pub Vec<i32>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn single(letter: i32) -> Self {
        Word(vec![letter])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Concatenation, with free cancellation of adjacent inverse letters.
    pub fn concat(&self, other: &Word) -> Word {
        let mut out = self.0.clone();
        for &letter in &other.0 {
            if out.last() == Some(&-letter) {
                out.pop();
            } else {
                out.push(letter);
            }
        }
        Word(out)
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|&l| -l).collect())
    }

    pub fn parse(s: &str) -> Result<Word, MoebiusError> {
        let s = s.trim();
        if s.is_empty() || s == "e" {
            return Ok(Word::empty());
        }
        let mut letters = Vec::new();
        for tok in s.split(|c: char| c.is_whitespace() || c == ',') {
            if tok.is_empty() {
                continue;
            }
            let v: i32 = tok
                .parse()
                .map_err(|_| MoebiusError::BadWord(s.to_string()))?;
            if v == 0 {
                return Err(MoebiusError::BadWord(s.to_string()));
            }
            letters.push(v);
        }
        Ok(Word(letters))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum MoebiusError {
    #[error("matrix is singular within tolerance (|det| = {0:.3e})")]
    SingularMatrix(f64),
    #[error("complex length is undefined for the identity element")]
    IdentityElement,
    #[error("malformed word: {0:?}")]
    BadWord(String),
    #[error("word references generator {0} but only {1} generators exist")]
    BadGeneratorIndex(i32, usize),
}

/// Translation length plus rotation angle of an isometry, `lambda + i theta`.
///
/// `lambda >= 0`; `theta` is normalized into (-pi, pi]. Loxodromic elements
/// have `lambda > 0`; parabolic and elliptic elements report `lambda = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexLength {
    pub lambda: f64,
    pub theta: f64,
}

impl ComplexLength {
    /// Angle distance modulo 2 pi, respecting the (-pi, pi] wrap seam.
    pub fn theta_dist(a: f64, b: f64) -> f64 {
        let mut d = (a - b).rem_euclid(2.0 * std::f64::consts::PI);
        if d > std::f64::consts::PI {
            d = 2.0 * std::f64::consts::PI - d;
        }
        d
    }
}

/// Wrap an angle into (-pi, pi].
pub fn wrap_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut t = theta.rem_euclid(two_pi);
    if t > std::f64::consts::PI {
        t -= two_pi;
    }
    t
}

/// A normalized element of PSL(2, C) with provenance word.
#[derive(Debug, Clone)]
pub struct MoebiusElement {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
    pub word: Word,
    /// |det - 1| measured after normalization.
    pub det_residual: f64,
}

impl MoebiusElement {
    pub fn identity() -> Self {
        MoebiusElement {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            c: Complex64::new(0.0, 0.0),
            d: Complex64::new(1.0, 0.0),
            word: Word::empty(),
            det_residual: 0.0,
        }
    }

    /// Normalize a raw matrix to determinant one and canonical sign.
    pub fn normalize(
        entries: [Complex64; 4],
        word: Word,
        tol: &Tolerance,
    ) -> Result<Self, MoebiusError> {
        let [a, b, c, d] = entries;
        let det = a * d - b * c;
        if det.norm() <= tol.eps_equal {
            return Err(MoebiusError::SingularMatrix(det.norm()));
        }
        let s = det.sqrt();
        let mut m = MoebiusElement {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
            word,
            det_residual: 0.0,
        };
        m.det_residual = (m.det() - Complex64::new(1.0, 0.0)).norm();
        m.canonicalize_sign(tol);
        Ok(m)
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Complex64 {
        self.a + self.d
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// Flip the overall sign so the first entry of magnitude above tolerance
    /// has argument in (-pi/2, pi/2].
    fn canonicalize_sign(&mut self, tol: &Tolerance) {
        let lead = [self.a, self.b, self.c, self.d]
            .into_iter()
            .find(|e| e.norm() > tol.eps_equal);
        if let Some(e) = lead {
            let flip = if e.re.abs() > tol.eps_equal {
                e.re < 0.0
            } else {
                e.im < 0.0
            };
            if flip {
                self.negate_in_place();
            }
        }
    }

    fn negate_in_place(&mut self) {
        self.a = -self.a;
        self.b = -self.b;
        self.c = -self.c;
        self.d = -self.d;
    }

    /// Matrix product; words concatenate left-to-right.
    pub fn compose(&self, other: &MoebiusElement, tol: &Tolerance) -> MoebiusElement {
        let mut m = MoebiusElement {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
            word: self.word.concat(&other.word),
            det_residual: 0.0,
        };
        m.det_residual = (m.det() - Complex64::new(1.0, 0.0)).norm();
        m.canonicalize_sign(tol);
        m
    }

    /// Inverse of a determinant-one matrix; word reversed with signs flipped.
    pub fn inverse(&self, tol: &Tolerance) -> MoebiusElement {
        let mut m = MoebiusElement {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
            word: self.word.inverse(),
            det_residual: self.det_residual,
        };
        m.canonicalize_sign(tol);
        m
    }

    /// Entrywise equality up to overall sign.
    pub fn projectively_eq(&self, other: &MoebiusElement, eps: f64) -> bool {
        let direct = (self.a - other.a)
            .norm()
            .max((self.b - other.b).norm())
            .max((self.c - other.c).norm())
            .max((self.d - other.d).norm());
        if direct <= eps {
            return true;
        }
        let flipped = (self.a + other.a)
            .norm()
            .max((self.b + other.b).norm())
            .max((self.c + other.c).norm())
            .max((self.d + other.d).norm());
        flipped <= eps
    }

    pub fn is_identity(&self, eps: f64) -> bool {
        self.projectively_eq(&MoebiusElement::identity(), eps)
    }

    /// Complex translation length `2 arccosh(tr/2)`, sign fixed so the real
    /// part is nonnegative and the angle lies in (-pi, pi].
    pub fn complex_length(&self, tol: &Tolerance) -> Result<ComplexLength, MoebiusError> {
        if self.is_identity(tol.eps_equal) {
            return Err(MoebiusError::IdentityElement);
        }
        let half = self.trace() / 2.0;
        let l = 2.0 * half.acosh();
        // The principal branch already gives Re >= 0; tiny negative values can
        // appear from rounding on parabolic traces.
        let lambda = l.re.max(0.0);
        let theta = wrap_angle(l.im);
        Ok(ComplexLength { lambda, theta })
    }
}
