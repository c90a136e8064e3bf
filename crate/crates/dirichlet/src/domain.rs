//! Construction of the approximate Dirichlet domain.
//!
//! Words are enumerated breadth-first by length over the generators and
//! their inverses, deduplicated to group elements through the wordprob
//! index, and each element's bisector half-space is cut into the current
//! polyhedron (candidates within a length are tried nearest first). The
//! build stops at the first length that produces no new face; hitting the
//! word-length bound instead leaves the result flagged as non-converged.

use log::{debug, warn};
use thiserror::Error;

use crate::minkowski::{self, MinkowskiPoint};
use crate::moebius::{MoebiusElement, MoebiusError, Word};
use crate::polyhedron::{bisector_halfspace, DirichletPolyhedron, PolyhedronError};
use crate::tolerance::Tolerance;
use crate::volume::{self, VolumeError, VolumeEstimate, VolumeOptions};
use crate::wordprob::{ElementIndex, ElementRecord, EqualityRule};

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("no generators given")]
    EmptyGenerators,
    #[error("generator {index} does not support a face{}", eliminated_note(.witness))]
    GeneratorNotFace { index: usize, witness: Option<Word> },
    #[error("generator index {0} out of range (have {1} generators)")]
    IndexOutOfRange(usize, usize),
    #[error("could not re-express the removed generator within the search budget")]
    NotVerified,
    #[error(transparent)]
    Polyhedron(#[from] PolyhedronError),
    #[error(transparent)]
    Moebius(#[from] MoebiusError),
}

fn eliminated_note(witness: &Option<Word>) -> String {
    match witness {
        Some(w) => format!(" (eliminated by word {w})"),
        None => String::new(),
    }
}

/// Summary statistics of a built domain.
#[derive(Debug, Clone)]
pub struct DomainStats {
    pub injectivity_radius: f64,
    pub spine_radius: Option<f64>,
    pub volume: Option<VolumeEstimate>,
    pub max_vertex_distance: Option<f64>,
    pub word_length_reached: usize,
    /// The stopping rule fired (a full word length produced no new face).
    pub converged: bool,
    /// Faces of the initial bounding cube that survived.
    pub synthetic_faces: usize,
    /// Vertices at the ideal boundary (cusped domain).
    pub has_ideal_vertices: bool,
    pub near_miss_count: usize,
    pub vertex_count: usize,
    pub edge_count: usize,
    pub face_count: usize,
    pub elements_considered: usize,
}

/// A cut whose section fell below the face threshold: a candidate hidden wall.
#[derive(Debug, Clone)]
pub struct NearMiss {
    pub word: Word,
    pub section_diameter: f64,
}

#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub max_word_length: usize,
    pub tolerance: Tolerance,
    /// Compute the volume when the finished domain is bounded.
    pub compute_volume: bool,
    pub volume: VolumeOptions,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            max_word_length: 20,
            tolerance: Tolerance::default(),
            compute_volume: true,
            volume: VolumeOptions::default(),
        }
    }
}

#[derive(Debug)]
pub struct BuildResult {
    pub poly: DirichletPolyhedron,
    pub stats: DomainStats,
    /// Injectivity radius after each accepted cut, in order.
    pub injectivity_trace: Vec<f64>,
    pub near_misses: Vec<NearMiss>,
}

/// Compose a word over `generators` into an element.
pub fn element_of_word(
    generators: &[MoebiusElement],
    word: &Word,
    tol: &Tolerance,
) -> Result<MoebiusElement, MoebiusError> {
    let mut out = MoebiusElement::identity();
    for &letter in &word.0 {
        let idx = letter.unsigned_abs() as usize;
        if idx == 0 || idx > generators.len() {
            return Err(MoebiusError::BadGeneratorIndex(letter, generators.len()));
        }
        let g = &generators[idx - 1];
        let g = if letter > 0 { g.clone() } else { g.inverse(tol) };
        out = out.compose(&g, tol);
    }
    Ok(out)
}

/// Generator letters: each generator with its word set to the 1-based index,
/// followed by the inverses.
pub fn generator_letters(
    generators: &[MoebiusElement],
    tol: &Tolerance,
) -> Vec<MoebiusElement> {
    let mut letters = Vec::with_capacity(generators.len() * 2);
    for (i, g) in generators.iter().enumerate() {
        let mut g = g.clone();
        g.word = Word::single(i as i32 + 1);
        letters.push(g);
    }
    for (i, g) in generators.iter().enumerate() {
        let mut inv = g.inverse(tol);
        inv.word = Word::single(-(i as i32 + 1));
        letters.push(inv);
    }
    letters
}

/// Build the approximate Dirichlet domain centered at `x`.
pub fn build_domain(
    generators: &[MoebiusElement],
    x: &MinkowskiPoint,
    opts: &BuildOptions,
) -> Result<BuildResult, DomainError> {
    if generators.is_empty() {
        return Err(DomainError::EmptyGenerators);
    }
    let tol = &opts.tolerance;
    let letters = generator_letters(generators, tol);
    let match_eps = 1e-9;

    let mut poly = DirichletPolyhedron::initial_cube(x);
    let mut index = ElementIndex::new();
    index.insert_if_new(
        ElementRecord::new(MoebiusElement::identity(), x, tol.quantum),
        EqualityRule::ExactMatrix { eps: match_eps },
        tol,
    );
    let mut frontier: Vec<MoebiusElement> = vec![MoebiusElement::identity()];

    let mut injectivity_trace: Vec<f64> = Vec::new();
    let mut near_misses: Vec<NearMiss> = Vec::new();
    // word of a removed face -> word of the cut that removed it
    let mut eliminations: std::collections::HashMap<Word, Word> = std::collections::HashMap::new();
    let mut converged = false;
    let mut word_length_reached = 0;

    for length in 1..=opts.max_word_length {
        word_length_reached = length;
        // Expand the frontier by one letter, dedup to group elements.
        let mut fresh: Vec<ElementRecord> = Vec::new();
        for f in &frontier {
            for s in &letters {
                if f.word.0.last() == Some(&-s.word.0[0]) {
                    continue; // freely reduced words only
                }
                let e = f.compose(s, tol);
                let rec = ElementRecord::new(e, x, tol.quantum);
                let (idx, new) =
                    index.insert_if_new(rec, EqualityRule::ExactMatrix { eps: match_eps }, tol);
                if new {
                    fresh.push(index.records()[idx].clone());
                }
            }
        }
        // Nearest candidates first; word order breaks ties deterministically.
        fresh.sort_by(|a, b| {
            a.base_dist
                .total_cmp(&b.base_dist)
                .then_with(|| a.element.word.cmp(&b.element.word))
        });

        let mut new_face_this_length = false;
        let mut prune_bound = cut_prune_bound(&poly, tol);
        for rec in &fresh {
            if rec.element.is_identity(match_eps) {
                continue;
            }
            if rec.base_dist > prune_bound {
                continue; // bisector lies beyond every vertex; cannot cut
            }
            let hs = match bisector_halfspace(x, &rec.element, tol) {
                Ok(hs) => hs,
                Err(PolyhedronError::FixesBasepoint(_)) => {
                    warn!("element {} fixes the basepoint; skipped", rec.element.word);
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            let report = poly.clip(&hs, tol)?;
            if report.new_face {
                new_face_this_length = true;
                if let Some(r) = poly.injectivity_radius() {
                    injectivity_trace.push(r);
                }
                for removed in report.removed_faces {
                    eliminations.insert(removed, rec.element.word.clone());
                }
                prune_bound = cut_prune_bound(&poly, tol);
            } else if report.degenerate && report.section_diameter > 0.0 {
                near_misses.push(NearMiss {
                    word: rec.element.word.clone(),
                    section_diameter: report.section_diameter,
                });
            }
        }
        frontier = fresh.into_iter().map(|r| r.element).collect();
        debug!(
            "length {length}: {} elements known, {} faces",
            index.len(),
            poly.faces.len()
        );
        if !new_face_this_length && length >= 2 {
            // Word length alone can stop early: an uncut element may only
            // have long words over the given generators. Require closure
            // under products of the current face pairings before accepting
            // convergence; any product that still cuts re-arms the loop.
            let cut = face_product_closure(
                &mut poly,
                x,
                &mut index,
                &mut injectivity_trace,
                &mut eliminations,
                &mut near_misses,
                tol,
            )?;
            if !cut {
                converged = true;
                break;
            }
        }
    }

    // Standing assumption: every generator and inverse supports a face.
    for (i, letter) in letters.iter().enumerate() {
        let found = poly.faces.iter().any(|f| {
            f.element
                .as_ref()
                .is_some_and(|e| e.projectively_eq(letter, match_eps))
        });
        if !found {
            let witness = eliminations
                .get(&letter.word)
                .cloned()
                .or_else(|| hidden_face_witness(&poly, x, letter, tol));
            return Err(DomainError::GeneratorNotFace {
                index: i % generators.len(),
                witness,
            });
        }
    }

    assign_pairings(&mut poly, match_eps, tol);
    poly.validate()?;

    let injectivity_radius = poly
        .injectivity_radius()
        .expect("generator faces exist, so the radius is defined");
    let spine_radius = poly.spine_radius().ok();
    let synthetic_faces = poly.synthetic_face_count();
    let vol = if opts.compute_volume && synthetic_faces == 0 {
        match volume::volume(&poly, &opts.volume, tol) {
            Ok(v) => Some(v),
            Err(VolumeError::QuadratureNotConverged {
                value,
                error_estimate,
                evaluations,
            }) => {
                warn!(
                    "volume quadrature stopped at error {error_estimate:.3e} (> requested); \
                     reporting the partial estimate"
                );
                Some(VolumeEstimate {
                    value,
                    error_estimate,
                    evaluations,
                })
            }
            Err(VolumeError::Unbounded(_)) => None,
        }
    } else {
        None
    };

    let stats = DomainStats {
        injectivity_radius,
        spine_radius,
        volume: vol,
        max_vertex_distance: poly.max_vertex_distance(),
        word_length_reached,
        converged,
        synthetic_faces,
        has_ideal_vertices: poly.has_ideal_vertices(),
        near_miss_count: near_misses.len(),
        vertex_count: poly.vertices.len(),
        edge_count: poly.edges().len(),
        face_count: poly.faces.len(),
        elements_considered: index.len(),
    };
    Ok(BuildResult {
        poly,
        stats,
        injectivity_trace,
        near_misses,
    })
}

/// Cut with every product of two face-pairing elements that still cuts,
/// iterating to a fixed point. Returns whether anything was cut.
fn face_product_closure(
    poly: &mut DirichletPolyhedron,
    x: &MinkowskiPoint,
    index: &mut ElementIndex,
    injectivity_trace: &mut Vec<f64>,
    eliminations: &mut std::collections::HashMap<Word, Word>,
    near_misses: &mut Vec<NearMiss>,
    tol: &Tolerance,
) -> Result<bool, DomainError> {
    let match_eps = 1e-9;
    let mut cut_anything = false;
    loop {
        let face_elements: Vec<MoebiusElement> = poly
            .faces
            .iter()
            .filter_map(|f| f.element.clone())
            .collect();
        let mut candidates: Vec<ElementRecord> = Vec::new();
        let prune_bound = cut_prune_bound(poly, tol);
        for f in &face_elements {
            for g in &face_elements {
                let h = f.compose(g, tol);
                if h.is_identity(match_eps) {
                    continue;
                }
                let rec = ElementRecord::new(h, x, tol.quantum);
                if rec.base_dist > prune_bound {
                    continue;
                }
                // Elements already tested once can never cut again: the
                // polyhedron only shrinks.
                let (idx, new) =
                    index.insert_if_new(rec, EqualityRule::ExactMatrix { eps: match_eps }, tol);
                if new {
                    candidates.push(index.records()[idx].clone());
                }
            }
        }
        if candidates.is_empty() {
            return Ok(cut_anything);
        }
        candidates.sort_by(|a, b| {
            a.base_dist
                .total_cmp(&b.base_dist)
                .then_with(|| a.element.word.cmp(&b.element.word))
        });
        let mut cut_this_pass = false;
        for rec in &candidates {
            let hs = match bisector_halfspace(x, &rec.element, tol) {
                Ok(hs) => hs,
                Err(PolyhedronError::FixesBasepoint(_)) => continue,
                Err(e) => return Err(e.into()),
            };
            let report = poly.clip(&hs, tol)?;
            if report.new_face {
                cut_this_pass = true;
                cut_anything = true;
                if let Some(r) = poly.injectivity_radius() {
                    injectivity_trace.push(r);
                }
                for removed in report.removed_faces {
                    eliminations.insert(removed, rec.element.word.clone());
                }
            } else if report.degenerate && report.section_diameter > 0.0 {
                near_misses.push(NearMiss {
                    word: rec.element.word.clone(),
                    section_diameter: report.section_diameter,
                });
            }
        }
        if !cut_this_pass {
            return Ok(cut_anything);
        }
    }
}

/// Bisectors of elements moving the basepoint beyond this bound cannot cut
/// the current polyhedron. With ideal (or beyond-ball) vertices present no
/// finite bound applies.
fn cut_prune_bound(poly: &DirichletPolyhedron, tol: &Tolerance) -> f64 {
    if poly.has_ideal_vertices() {
        return f64::INFINITY;
    }
    match poly.max_vertex_distance() {
        Some(d) => 2.0 * d + tol.eps_geom,
        None => f64::INFINITY,
    }
}

/// A face whose bisector never supported the polyhedron: find an existing
/// face that cuts off the midpoint of the segment from `x` to `g(x)` (the
/// point where the hidden face would be closest to the basepoint).
fn hidden_face_witness(
    poly: &DirichletPolyhedron,
    x: &MinkowskiPoint,
    g: &MoebiusElement,
    _tol: &Tolerance,
) -> Option<Word> {
    let gx = minkowski::apply(g, x);
    let mid = MinkowskiPoint(x.0 + gx.0).renormalized().to_klein();
    poly.faces
        .iter()
        .filter(|f| f.is_group_face())
        .map(|f| (f, f.plane.signed_dist(&mid)))
        .filter(|(_, s)| *s > 0.0)
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .and_then(|(f, _)| f.element.as_ref().map(|e| e.word.clone()))
}

/// Match each group face with the face of the inverse element.
fn assign_pairings(poly: &mut DirichletPolyhedron, eps: f64, tol: &Tolerance) {
    let inverses: Vec<Option<MoebiusElement>> = poly
        .faces
        .iter()
        .map(|f| f.element.as_ref().map(|e| e.inverse(tol)))
        .collect();
    let n = poly.faces.len();
    for (i, inv_slot) in inverses.iter().enumerate() {
        let Some(inv) = inv_slot else { continue };
        let partner = (0..n).find(|&j| {
            poly.faces[j]
                .element
                .as_ref()
                .is_some_and(|e| e.projectively_eq(inv, eps))
        });
        if partner.is_none() {
            warn!(
                "face {} ({}) has no paired face",
                i,
                poly.faces[i].element.as_ref().unwrap().word
            );
        }
        poly.faces[i].paired = partner;
    }
}

/// Substitute a removed generator by the element of `by_word` and verify the
/// new set still generates the same group by re-expressing the removed
/// generator as a word in the new generators.
pub struct ReplaceOutcome {
    pub generators: Vec<MoebiusElement>,
    /// The removed generator as a word in the new generators.
    pub removed_expression: Word,
}

pub fn replace_generator(
    generators: &[MoebiusElement],
    removed_index: usize,
    by_word: &Word,
    tol: &Tolerance,
    search_length: usize,
) -> Result<ReplaceOutcome, DomainError> {
    if removed_index >= generators.len() {
        return Err(DomainError::IndexOutOfRange(
            removed_index,
            generators.len(),
        ));
    }
    let old = generators[removed_index].clone();
    let replacement = element_of_word(generators, by_word, tol)?;
    let mut new_gens = generators.to_vec();
    new_gens[removed_index] = replacement;
    for (i, g) in new_gens.iter_mut().enumerate() {
        g.word = Word::single(i as i32 + 1);
    }

    // BFS over the new generators looking for the old element.
    let x = MinkowskiPoint::origin();
    let letters = generator_letters(&new_gens, tol);
    let mut index = ElementIndex::new();
    index.insert_if_new(
        ElementRecord::new(MoebiusElement::identity(), &x, tol.quantum),
        EqualityRule::ExactMatrix { eps: 1e-9 },
        tol,
    );
    let mut frontier = vec![MoebiusElement::identity()];
    for _ in 0..search_length {
        let mut next = Vec::new();
        for f in &frontier {
            for s in &letters {
                if f.word.0.last() == Some(&-s.word.0[0]) {
                    continue;
                }
                let e = f.compose(s, tol);
                if e.projectively_eq(&old, 1e-9) {
                    return Ok(ReplaceOutcome {
                        generators: new_gens,
                        removed_expression: e.word,
                    });
                }
                let rec = ElementRecord::new(e.clone(), &x, tol.quantum);
                let (_, new) =
                    index.insert_if_new(rec, EqualityRule::ExactMatrix { eps: 1e-9 }, tol);
                if new {
                    next.push(e);
                }
            }
        }
        frontier = next;
    }
    Err(DomainError::NotVerified)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn loxo_z(l: f64, t: f64) -> MoebiusElement {
        let half = Complex64::new(l / 2.0, t / 2.0).exp();
        MoebiusElement::normalize([half, c(0.0, 0.0), c(0.0, 0.0), half.inv()], Word(vec![1]), &tol())
            .unwrap()
    }

    #[test]
    fn empty_generators_error() {
        let r = build_domain(&[], &MinkowskiPoint::origin(), &BuildOptions::default());
        assert!(matches!(r, Err(DomainError::EmptyGenerators)));
    }

    #[test]
    fn cyclic_group_gives_slab() {
        let g = loxo_z(1.0, 0.0);
        let result = build_domain(&[g], &MinkowskiPoint::origin(), &BuildOptions::default()).unwrap();
        assert!(result.stats.converged);
        assert_eq!(result.stats.synthetic_faces, 4);
        assert!(result.stats.volume.is_none());
        assert_abs_diff_eq!(result.stats.injectivity_radius, 0.5, epsilon = 1e-12);
        assert!(result.stats.spine_radius.is_none());
        assert_eq!(
            result.poly.faces.iter().filter(|f| f.is_group_face()).count(),
            2
        );
        // Pairing: the two group faces pair with each other.
        let group_faces: Vec<usize> = result
            .poly
            .faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.is_group_face())
            .map(|(i, _)| i)
            .collect();
        assert_eq!(
            result.poly.faces[group_faces[0]].paired,
            Some(group_faces[1])
        );
        assert_eq!(
            result.poly.faces[group_faces[1]].paired,
            Some(group_faces[0])
        );
    }

    #[test]
    fn twisted_cyclic_group_slab() {
        let g = loxo_z(1.0, 0.3);
        let result = build_domain(&[g], &MinkowskiPoint::origin(), &BuildOptions::default()).unwrap();
        assert!(result.stats.converged);
        assert_abs_diff_eq!(result.stats.injectivity_radius, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn injectivity_trace_non_increasing() {
        let g = loxo_z(1.0, 0.0);
        let result = build_domain(&[g], &MinkowskiPoint::origin(), &BuildOptions::default()).unwrap();
        for w in result.injectivity_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-15);
        }
    }

    #[test]
    fn element_of_word_validates_indices() {
        let g = loxo_z(1.0, 0.0);
        let gens = std::slice::from_ref(&g);
        assert!(element_of_word(gens, &Word(vec![2]), &tol()).is_err());
        let e = element_of_word(gens, &Word(vec![1, 1, -1]), &tol()).unwrap();
        assert!(e.projectively_eq(&g, 1e-12));
    }

    #[test]
    fn replace_generator_checks_range() {
        let g = loxo_z(1.0, 0.0);
        let r = replace_generator(&[g], 3, &Word(vec![1]), &tol(), 4);
        assert!(matches!(r, Err(DomainError::IndexOutOfRange(3, 1))));
    }

    #[test]
    fn replace_generator_reexpresses_old() {
        // Two independent translations; replace b by ab. The old b = a^{-1} (ab).
        let a = loxo_z(1.0, 0.0);
        let conj = MoebiusElement::normalize(
            [c(1.0, 0.0), c(0.4, 0.1), c(0.0, 0.0), c(1.0, 0.0)],
            Word::empty(),
            &tol(),
        )
        .unwrap();
        let b = conj
            .compose(&loxo_z(1.2, 0.0), &tol())
            .compose(&conj.inverse(&tol()), &tol());
        let out = replace_generator(&[a, b], 1, &Word(vec![1, 2]), &tol(), 4).unwrap();
        assert_eq!(out.generators.len(), 2);
        assert_eq!(out.removed_expression, Word(vec![-1, 2]));
    }
}
