//! Rigorous element equality and scalable deduplication.
//!
//! Equality of group elements is decided by a three-stage cascade on
//! approximate data: compare real trace parts, compare basepoint translation
//! distances, then compare the distance between basepoint images against
//! twice the injectivity radius. Distinct elements move the basepoint to
//! orbit points at least `2 rho` apart, so the final test is two-sided.
//!
//! Hashing keys quantize the *squared* trace (invariant under `g -> -g`
//! without any sign normalization, which would be unstable near the
//! boundary of the canonical-sign rule) together with the Klein coordinates
//! of the basepoint image. Lookups probe the key cell and all adjacent
//! cells, so quantization boundaries never separate equal elements; key
//! collisions are only candidates, never verdicts.

use std::collections::HashMap;

use thiserror::Error;

use crate::minkowski::{self, dist, KleinPoint, MinkowskiPoint};
use crate::moebius::MoebiusElement;
use crate::tolerance::Tolerance;

#[derive(Debug, Error)]
pub enum WordProbError {
    #[error("injectivity radius {0:.3e} is not above eps_geom")]
    InvalidRho(f64),
}

/// Quantized invariants of a projective element: cells of the squared trace
/// and of the basepoint image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CanonicalKey {
    pub trace_sq_re_q: i64,
    pub trace_sq_im_q: i64,
    pub image_q: [i64; 3],
}

#[inline]
fn quantize(v: f64, quantum: f64) -> i64 {
    (v / quantum).floor() as i64
}

/// Key of `g` relative to basepoint `x` with the given cell size.
pub fn canonical_key(g: &MoebiusElement, x: &MinkowskiPoint, quantum: f64) -> CanonicalKey {
    let image = minkowski::apply(g, x).to_klein();
    canonical_key_from_parts(g, &image, quantum)
}

fn canonical_key_from_parts(g: &MoebiusElement, image: &KleinPoint, quantum: f64) -> CanonicalKey {
    let tr = g.trace();
    let tr_sq = tr * tr;
    CanonicalKey {
        trace_sq_re_q: quantize(tr_sq.re, quantum),
        trace_sq_im_q: quantize(tr_sq.im, quantum),
        image_q: [
            quantize(image[0], quantum),
            quantize(image[1], quantum),
            quantize(image[2], quantum),
        ],
    }
}

/// The 3^5 cells adjacent to (and including) a key, probed on lookup.
pub fn neighbor_keys(key: &CanonicalKey) -> impl Iterator<Item = CanonicalKey> + '_ {
    const OFF: [i64; 3] = [0, -1, 1];
    OFF.iter().flat_map(move |&a| {
        OFF.iter().flat_map(move |&b| {
            OFF.iter().flat_map(move |&c| {
                OFF.iter().flat_map(move |&d| {
                    OFF.iter().map(move |&e| CanonicalKey {
                        trace_sq_re_q: key.trace_sq_re_q + a,
                        trace_sq_im_q: key.trace_sq_im_q + b,
                        image_q: [
                            key.image_q[0] + c,
                            key.image_q[1] + d,
                            key.image_q[2] + e,
                        ],
                    })
                })
            })
        })
    })
}

/// Fraction of the quantum cell at which a coordinate counts as sitting on
/// a boundary; equal elements differ by far less than this times the
/// quantum, so cells whose coordinates are all interior need no neighbor
/// probes.
const BOUNDARY_MARGIN: f64 = 1e-3;

/// Per-coordinate neighbor offsets that can possibly hold an equal element:
/// the home cell always, plus the adjacent cell when the raw value lies
/// within the margin of that boundary.
fn probe_offsets(raw: f64, quantum: f64) -> [Option<i64>; 2] {
    let frac = (raw / quantum).rem_euclid(1.0);
    let mut extra = None;
    if frac < BOUNDARY_MARGIN {
        extra = Some(-1);
    } else if frac > 1.0 - BOUNDARY_MARGIN {
        extra = Some(1);
    }
    [Some(0), extra]
}

/// Measured quantities of the equality cascade, reported by the CLI.
#[derive(Debug, Clone, Copy)]
pub struct EqualityEvidence {
    /// 1-based stage at which the cascade decided.
    pub stage: u8,
    pub equal: bool,
    pub re_trace_gap: f64,
    pub base_dist_gap: f64,
    /// `d(g(x), g'(x))`; only measured when stage 3 is reached.
    pub image_dist: Option<f64>,
    pub two_rho: f64,
}

/// Decide whether `g` and `h` represent the same element of the group, given
/// the injectivity radius `rho` of the Dirichlet domain at `x`.
pub fn same_element(
    g: &MoebiusElement,
    h: &MoebiusElement,
    x: &MinkowskiPoint,
    rho: f64,
    tol: &Tolerance,
) -> Result<bool, WordProbError> {
    Ok(same_element_evidence(g, h, x, rho, tol)?.equal)
}

/// As [`same_element`], returning the measured cascade quantities.
pub fn same_element_evidence(
    g: &MoebiusElement,
    h: &MoebiusElement,
    x: &MinkowskiPoint,
    rho: f64,
    tol: &Tolerance,
) -> Result<EqualityEvidence, WordProbError> {
    if rho <= tol.eps_geom {
        return Err(WordProbError::InvalidRho(rho));
    }
    let gx = minkowski::apply(g, x);
    let hx = minkowski::apply(h, x);
    Ok(cascade(
        g,
        h,
        &CachedImage::new(gx, x),
        &CachedImage::new(hx, x),
        rho,
        tol,
    ))
}

struct CachedImage {
    image: MinkowskiPoint,
    base_dist: f64,
}

impl CachedImage {
    fn new(image: MinkowskiPoint, x: &MinkowskiPoint) -> Self {
        CachedImage {
            base_dist: dist(x, &image),
            image,
        }
    }
}

fn cascade(
    g: &MoebiusElement,
    h: &MoebiusElement,
    gi: &CachedImage,
    hi: &CachedImage,
    rho: f64,
    tol: &Tolerance,
) -> EqualityEvidence {
    let two_rho = 2.0 * rho;
    let re_trace_gap = (g.trace().re.abs() - h.trace().re.abs()).abs();
    if re_trace_gap > tol.eps_equal {
        return EqualityEvidence {
            stage: 1,
            equal: false,
            re_trace_gap,
            base_dist_gap: f64::NAN,
            image_dist: None,
            two_rho,
        };
    }
    let base_dist_gap = (gi.base_dist - hi.base_dist).abs();
    if base_dist_gap >= two_rho {
        return EqualityEvidence {
            stage: 2,
            equal: false,
            re_trace_gap,
            base_dist_gap,
            image_dist: None,
            two_rho,
        };
    }
    let image_dist = dist(&gi.image, &hi.image);
    // Equal elements have image distance at the rounding floor; distinct
    // ones sit at 2 rho or beyond, and domain neighbors realize 2 rho
    // exactly. The acceptance threshold backs off the boundary so float
    // jitter on such pairs cannot flip the verdict; anywhere inside the
    // open gap (0, 2 rho) is sound.
    let accept = two_rho - 1e3 * tol.eps_geom;
    EqualityEvidence {
        stage: 3,
        equal: image_dist < accept,
        re_trace_gap,
        base_dist_gap,
        image_dist: Some(image_dist),
        two_rho,
    }
}

/// An element with its cached basepoint image, as stored in [`ElementIndex`].
#[derive(Debug, Clone)]
pub struct ElementRecord {
    pub element: MoebiusElement,
    pub image: MinkowskiPoint,
    pub image_klein: KleinPoint,
    pub base_dist: f64,
    pub key: CanonicalKey,
}

impl ElementRecord {
    pub fn new(element: MoebiusElement, x: &MinkowskiPoint, quantum: f64) -> Self {
        let image = minkowski::apply(&element, x);
        let image_klein = image.to_klein();
        let base_dist = dist(x, &image);
        let key = canonical_key_from_parts(&element, &image_klein, quantum);
        ElementRecord {
            element,
            image,
            image_klein,
            base_dist,
            key,
        }
    }

    fn raw_key_values(&self) -> [f64; 5] {
        let tr = self.element.trace();
        let tr_sq = tr * tr;
        [
            tr_sq.re,
            tr_sq.im,
            self.image_klein[0],
            self.image_klein[1],
            self.image_klein[2],
        ]
    }
}

/// How candidate key collisions are confirmed or refuted.
#[derive(Debug, Clone, Copy)]
pub enum EqualityRule {
    /// Entrywise comparison up to sign; used before a domain (and hence a
    /// trusted injectivity radius) exists.
    ExactMatrix { eps: f64 },
    /// The Lemma-based cascade with the domain's injectivity radius.
    Geometric { rho: f64 },
}

impl EqualityRule {
    fn decide(&self, a: &ElementRecord, b: &ElementRecord, tol: &Tolerance) -> bool {
        match *self {
            EqualityRule::ExactMatrix { eps } => a.element.projectively_eq(&b.element, eps),
            EqualityRule::Geometric { rho } => {
                cascade(
                    &a.element,
                    &b.element,
                    &CachedImage {
                        image: a.image,
                        base_dist: a.base_dist,
                    },
                    &CachedImage {
                        image: b.image,
                        base_dist: b.base_dist,
                    },
                    rho,
                    tol,
                )
                .equal
            }
        }
    }
}

/// Dedup index over group elements keyed by [`CanonicalKey`] cells.
#[derive(Debug, Default)]
pub struct ElementIndex {
    cells: HashMap<CanonicalKey, Vec<usize>>,
    records: Vec<ElementRecord>,
}

impl ElementIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[ElementRecord] {
        &self.records
    }

    /// Index of the record equal to `rec` under `rule`, if present. Probes
    /// the home cell and, per coordinate, the adjacent cell when the value
    /// lies within the boundary margin (equivalent to scanning all 3^5
    /// neighbors, since interior coordinates cannot disagree for equal
    /// elements).
    pub fn find(&self, rec: &ElementRecord, rule: EqualityRule, tol: &Tolerance) -> Option<usize> {
        let raw = rec.raw_key_values();
        let offs: Vec<[Option<i64>; 2]> = raw
            .iter()
            .map(|&v| probe_offsets(v, tol.quantum))
            .collect();
        for &a in offs[0].iter().flatten() {
            for &b in offs[1].iter().flatten() {
                for &c in offs[2].iter().flatten() {
                    for &d in offs[3].iter().flatten() {
                        for &e in offs[4].iter().flatten() {
                            let key = CanonicalKey {
                                trace_sq_re_q: rec.key.trace_sq_re_q + a,
                                trace_sq_im_q: rec.key.trace_sq_im_q + b,
                                image_q: [
                                    rec.key.image_q[0] + c,
                                    rec.key.image_q[1] + d,
                                    rec.key.image_q[2] + e,
                                ],
                            };
                            if let Some(bucket) = self.cells.get(&key) {
                                for &i in bucket {
                                    if rule.decide(&self.records[i], rec, tol) {
                                        return Some(i);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        None
    }

    /// Insert unless an equal element is already present. Returns the index
    /// of the stored record and whether it was newly inserted.
    pub fn insert_if_new(
        &mut self,
        rec: ElementRecord,
        rule: EqualityRule,
        tol: &Tolerance,
    ) -> (usize, bool) {
        if let Some(i) = self.find(&rec, rule, tol) {
            return (i, false);
        }
        let i = self.records.len();
        self.cells.entry(rec.key).or_default().push(i);
        self.records.push(rec);
        (i, true)
    }
}

/// Remove duplicate group elements from a big list, keeping the first
/// occurrence of each. Key collisions are candidates; verdicts come from the
/// cascade with the supplied injectivity radius.
pub fn dedup(
    biglist: &[MoebiusElement],
    x: &MinkowskiPoint,
    rho: f64,
    tol: &Tolerance,
) -> Result<Vec<MoebiusElement>, WordProbError> {
    if rho <= tol.eps_geom {
        return Err(WordProbError::InvalidRho(rho));
    }
    let mut index = ElementIndex::new();
    let mut out = Vec::new();
    for g in biglist {
        let rec = ElementRecord::new(g.clone(), x, tol.quantum);
        let (_, fresh) = index.insert_if_new(rec, EqualityRule::Geometric { rho }, tol);
        if fresh {
            out.push(g.clone());
        }
    }
    Ok(out)
}
