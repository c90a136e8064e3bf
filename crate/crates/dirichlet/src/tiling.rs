//! Covering a ball by translates of the domain, and the diagnostics that
//! justify trusting it.
//!
//! `tile_ball` grows the covering breadth-first through face pairings (the
//! Cayley-graph walk); `enumerate_words` finds the same set of group
//! elements by exhaustive word enumeration, independent of the domain's
//! face set. Agreement of the two is the checkable content of the covering
//! theorem; the remaining report fields quantify the volume-difference and
//! extra-area bounds from its proof.


use log::{info, warn};
use thiserror::Error;

use crate::minkowski::{self, dist, translation_to, MinkowskiPoint};
use crate::moebius::{MoebiusElement, Word};
use crate::polyhedron::DirichletPolyhedron;
use crate::tolerance::Tolerance;
use crate::volume::{ball_volume, VolumeEstimate};
use crate::wordprob::{ElementIndex, ElementRecord, EqualityRule};

#[derive(Debug, Error)]
pub enum TilingError {
    #[error("tile count exceeded the explosion cap of {cap}")]
    ExplosionGuard { cap: usize },
    #[error("domain has no group faces to expand through")]
    NoFaces,
    #[error("injectivity radius unavailable")]
    NoInjectivityRadius,
}

/// Radius needed so that every geodesic of real length up to `lambda_cutoff`
/// has a representative moving the basepoint at most this far:
/// `R = 2 arccosh(cosh(r) cosh(lambda/2))`.
pub fn tiling_radius(spine_radius: f64, lambda_cutoff: f64) -> f64 {
    2.0 * (spine_radius.cosh() * (lambda_cutoff / 2.0).cosh()).acosh()
}

/// One translate `g D'` of the domain.
#[derive(Debug, Clone)]
pub struct Tile {
    pub element: MoebiusElement,
    pub image: MinkowskiPoint,
    pub base_dist: f64,
    /// Spawning tile index and face index; `None` for the identity tile.
    pub parent: Option<(usize, usize)>,
    /// Breadth-first layer.
    pub depth: usize,
}

/// The big list: deduplicated translates reached by face-neighbor expansion,
/// sorted by translation distance (ties broken by word).
#[derive(Debug)]
pub struct TileSet {
    pub tiles: Vec<Tile>,
    pub radius: f64,
    pub retention_radius: f64,
    index: ElementIndex,
    rho: f64,
}

impl TileSet {
    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    /// Whether an element is already represented among the tiles.
    pub fn contains(&self, rec: &ElementRecord, tol: &Tolerance) -> bool {
        self.index
            .find(rec, EqualityRule::Geometric { rho: self.rho }, tol)
            .is_some()
    }
}

/// Cover `B(x, R)` by translates: breadth-first through face pairings.
///
/// A candidate `g h` (tile `g`, face element `h`) is retained when its
/// center lies within `R` plus twice the max vertex distance, so every
/// translate whose domain can meet the ball is explored.
pub fn tile_ball(
    poly: &DirichletPolyhedron,
    radius: f64,
    cap: usize,
    tol: &Tolerance,
) -> Result<TileSet, TilingError> {
    let rho = poly
        .injectivity_radius()
        .ok_or(TilingError::NoInjectivityRadius)?;
    let face_elements: Vec<MoebiusElement> = poly
        .faces
        .iter()
        .filter_map(|f| f.element.clone())
        .collect();
    if face_elements.is_empty() {
        return Err(TilingError::NoFaces);
    }
    let margin = 2.0 * poly.max_vertex_distance().unwrap_or(0.0);
    let retention = radius + margin + tol.eps_geom;
    let x = &poly.basepoint;

    let mut index = ElementIndex::new();
    let rule = EqualityRule::Geometric { rho };
    index.insert_if_new(
        ElementRecord::new(MoebiusElement::identity(), x, tol.quantum),
        rule,
        tol,
    );
    let mut tiles = vec![Tile {
        element: MoebiusElement::identity(),
        image: *x,
        base_dist: 0.0,
        parent: None,
        depth: 0,
    }];

    let mut layer: Vec<usize> = vec![0];
    let mut depth = 0;
    while !layer.is_empty() {
        depth += 1;
        let mut next = Vec::new();
        for &ti in &layer {
            for (fi, h) in face_elements.iter().enumerate() {
                let cand = tiles[ti].element.compose(h, tol);
                let rec = ElementRecord::new(cand, x, tol.quantum);
                if rec.base_dist > retention {
                    continue;
                }
                let (_, new) = index.insert_if_new(rec.clone(), rule, tol);
                if !new {
                    continue;
                }
                if tiles.len() >= cap {
                    return Err(TilingError::ExplosionGuard { cap });
                }
                tiles.push(Tile {
                    element: rec.element,
                    image: rec.image,
                    base_dist: rec.base_dist,
                    parent: Some((ti, fi)),
                    depth,
                });
                next.push(tiles.len() - 1);
            }
        }
        layer = next;
    }

    // Sort by translation distance, remapping the parent links.
    let mut order: Vec<usize> = (0..tiles.len()).collect();
    order.sort_by(|&i, &j| {
        tiles[i]
            .base_dist
            .total_cmp(&tiles[j].base_dist)
            .then_with(|| tiles[i].element.word.cmp(&tiles[j].element.word))
    });
    let mut rank = vec![0usize; tiles.len()];
    for (new_pos, &old) in order.iter().enumerate() {
        rank[old] = new_pos;
    }
    let mut sorted: Vec<Tile> = order.into_iter().map(|i| tiles[i].clone()).collect();
    for t in &mut sorted {
        if let Some((p, f)) = t.parent {
            t.parent = Some((rank[p], f));
        }
    }
    info!(
        "tile_ball: {} tiles within retention radius {:.6}",
        sorted.len(),
        retention
    );
    Ok(TileSet {
        tiles: sorted,
        radius,
        retention_radius: retention,
        index,
        rho,
    })
}

/// Result of the exhaustive word-enumeration oracle.
#[derive(Debug)]
pub struct WordBall {
    /// Records of the distinct group elements within the retention radius.
    pub in_ball: Vec<ElementRecord>,
    /// No new in-ball element appeared at the final word length.
    pub frontier_closed: bool,
    pub max_length: usize,
    index: ElementIndex,
}

impl WordBall {
    pub fn contains(&self, rec: &ElementRecord, rho: f64, tol: &Tolerance) -> bool {
        // An element is found if any equal record exists, whether or not it
        // fell inside the ball; membership in the comparison is restricted
        // via `in_ball`.
        self.index
            .find(rec, EqualityRule::Geometric { rho }, tol)
            .is_some()
    }
}

/// Exhaustively enumerate distinct group elements by word length, keeping
/// those whose basepoint translation distance is at most `retention_radius`.
/// Depends only on the generators, never on the domain.
///
/// Stops early once `quiet_stop` consecutive lengths added no in-ball
/// element (0 disables the early stop); the frontier is reported closed
/// when the final length was quiet.
pub fn enumerate_words(
    generators: &[MoebiusElement],
    max_length: usize,
    retention_radius: f64,
    x: &MinkowskiPoint,
    cap: usize,
    quiet_stop: usize,
    tol: &Tolerance,
) -> Result<WordBall, TilingError> {
    let letters = crate::domain::generator_letters(generators, tol);
    let match_eps = 1e-9;
    let rule = EqualityRule::ExactMatrix { eps: match_eps };
    let mut index = ElementIndex::new();
    index.insert_if_new(
        ElementRecord::new(MoebiusElement::identity(), x, tol.quantum),
        rule,
        tol,
    );
    let mut in_ball: Vec<ElementRecord> = vec![index.records()[0].clone()];
    let mut frontier: Vec<MoebiusElement> = vec![MoebiusElement::identity()];
    let mut last_new_in_ball = 0usize;
    let mut reached = 0usize;

    for length in 1..=max_length {
        reached = length;
        let mut next = Vec::new();
        for f in &frontier {
            for s in &letters {
                if f.word.0.last() == Some(&-s.word.0[0]) {
                    continue;
                }
                let e = f.compose(s, tol);
                let rec = ElementRecord::new(e, x, tol.quantum);
                if index.len() >= cap {
                    return Err(TilingError::ExplosionGuard { cap });
                }
                let (idx, new) = index.insert_if_new(rec, rule, tol);
                if new {
                    let stored = index.records()[idx].clone();
                    if stored.base_dist <= retention_radius + tol.eps_geom {
                        in_ball.push(stored.clone());
                        last_new_in_ball = length;
                    }
                    next.push(stored.element);
                }
            }
        }
        info!(
            "enumerate_words: length {length}: {} distinct elements, {} in ball",
            index.len(),
            in_ball.len()
        );
        frontier = next;
        if quiet_stop > 0 && length >= last_new_in_ball + quiet_stop {
            break;
        }
    }
    let frontier_closed = last_new_in_ball < reached;
    if !frontier_closed {
        warn!(
            "enumerate_words: new in-ball elements still appeared at length {max_length}; \
             frontier not closed"
        );
    }
    Ok(WordBall {
        in_ball,
        frontier_closed,
        max_length,
        index,
    })
}

/// Empirical covering check: fraction of volume-uniform samples of
/// `B(x, R - eps)` lying in at least one translate.
#[derive(Debug, Clone, Copy)]
pub struct CoverageReport {
    pub fraction: f64,
    pub mean_multiplicity: f64,
    pub samples: usize,
}

pub fn verify_covering(
    tileset: &TileSet,
    poly: &DirichletPolyhedron,
    n_samples: usize,
    seed: u64,
    tol: &Tolerance,
) -> CoverageReport {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    if n_samples == 0 {
        info!("verify_covering: no samples requested, coverage vacuously 1");
        return CoverageReport {
            fraction: 1.0,
            mean_multiplicity: 0.0,
            samples: 0,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = &poly.basepoint;
    let to_base = translation_to(x, tol);
    let radius = (tileset.radius - tol.eps_geom).max(0.0);
    let total_vol = ball_volume(radius);
    // Membership slack: points on shared faces must count for both sides.
    let slack = 10.0 * tol.eps_equal;
    let inverses: Vec<MoebiusElement> = tileset
        .tiles
        .iter()
        .map(|t| t.element.inverse(tol))
        .collect();
    // A tile can contain a point only if the point is within the domain
    // radius of the tile's center.
    let domain_reach = if poly.has_ideal_vertices() {
        f64::INFINITY
    } else {
        poly.max_vertex_distance().unwrap_or(f64::INFINITY) + tol.eps_geom
    };

    let mut covered = 0usize;
    let mut multiplicity_sum = 0usize;
    for _ in 0..n_samples {
        // Volume-uniform radius by inverting t -> ball_volume(t).
        let target = rng.gen::<f64>() * total_vol;
        let (mut lo, mut hi) = (0.0f64, radius);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if ball_volume(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        // Uniform direction.
        let dir: nalgebra::Vector3<f64> = loop {
            let v = nalgebra::Vector3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let n = v.norm();
            if n > 1e-6 && n <= 1.0 {
                break v / n;
            }
        };
        let local = MinkowskiPoint(nalgebra::Vector4::new(
            t.cosh(),
            t.sinh() * dir[0],
            t.sinh() * dir[1],
            t.sinh() * dir[2],
        ));
        let y = minkowski::apply(&to_base, &local);

        let mut mult = 0usize;
        for (tile, inv) in tileset.tiles.iter().zip(&inverses) {
            if dist(&tile.image, &y) > domain_reach {
                continue;
            }
            let pulled = minkowski::apply(inv, &y).to_klein();
            if poly.contains_klein(&pulled, slack) {
                mult += 1;
            }
        }
        if mult > 0 {
            covered += 1;
        }
        multiplicity_sum += mult;
    }
    CoverageReport {
        fraction: covered as f64 / n_samples as f64,
        mean_multiplicity: multiplicity_sum as f64 / n_samples as f64,
        samples: n_samples,
    }
}

/// Quantities of the covering theorem's hypothesis and proof, plus the
/// oracle comparison verdict.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub reference_volume: Option<f64>,
    pub computed_volume: Option<VolumeEstimate>,
    /// `vol(D') - vol(M)`, when both are known.
    pub delta_v: Option<f64>,
    pub injectivity_radius: f64,
    pub spine_radius_upper_bound: Option<f64>,
    pub tiling_ball_radius: f64,
    /// Upper bound on the number of domains meeting a hidden wall:
    /// inscribed-ball count in the ball of radius `R + r + rho`.
    pub ndd_upper: Option<f64>,
    /// Area of a disk of radius rho, the inscribed-ball cross-section bound.
    pub hidden_wall_area_lower: f64,
    pub extra_area_lower: Option<f64>,
    /// Words found by enumeration but absent from the tiling (theorem
    /// failure witnesses).
    pub oracle_missing: Vec<Word>,
    /// Words found by the tiling but absent from the enumeration.
    pub oracle_extra: Vec<Word>,
    pub oracle_frontier_closed: bool,
    pub tile_count: usize,
    pub word_ball_count: usize,
}

impl VerificationReport {
    pub fn oracle_passed(&self) -> bool {
        self.oracle_missing.is_empty() && self.oracle_frontier_closed
    }
}

/// Assemble the verification report from a tiling and the word oracle.
///
/// The oracle comparison restricts both sides to basepoint translation
/// distance at most the tiling ball radius `R`: the covering theorem's
/// checkable content is that face-neighbor expansion reaches every group
/// element inside the ball, while the wider retention margin of the tiling
/// exists only so no connecting path is cut off.
pub fn theorem1_diagnostics(
    poly: &DirichletPolyhedron,
    tileset: &TileSet,
    word_ball: &WordBall,
    reference_volume: Option<f64>,
    computed_volume: Option<VolumeEstimate>,
    tol: &Tolerance,
) -> VerificationReport {
    let rho = poly.injectivity_radius().unwrap_or(0.0);
    let r_ub = poly.max_vertex_distance();
    let radius = tileset.radius;
    let ndd_upper = r_ub.map(|r| (ball_volume(radius + r + rho) / ball_volume(rho)).floor());
    let hidden_wall_area_lower =
        4.0 * std::f64::consts::PI * (rho / 2.0).sinh() * (rho / 2.0).sinh();
    let extra_area_lower = ndd_upper.map(|n| hidden_wall_area_lower / n);
    let delta_v = match (computed_volume, reference_volume) {
        (Some(v), Some(r)) => Some(v.value - r),
        _ => None,
    };

    let compare_radius = radius + tol.eps_geom;
    let mut oracle_missing = Vec::new();
    for rec in &word_ball.in_ball {
        if rec.base_dist > compare_radius {
            continue;
        }
        if !tileset.contains(rec, tol) {
            oracle_missing.push(rec.element.word.clone());
        }
    }
    let mut oracle_extra = Vec::new();
    for tile in &tileset.tiles {
        if tile.base_dist > compare_radius {
            continue;
        }
        let rec = ElementRecord::new(tile.element.clone(), &poly.basepoint, tol.quantum);
        if !word_ball.contains(&rec, tileset.rho, tol) {
            oracle_extra.push(tile.element.word.clone());
        }
    }

    VerificationReport {
        reference_volume,
        computed_volume,
        delta_v,
        injectivity_radius: rho,
        spine_radius_upper_bound: r_ub,
        tiling_ball_radius: radius,
        ndd_upper,
        hidden_wall_area_lower,
        extra_area_lower,
        oracle_missing,
        oracle_extra,
        oracle_frontier_closed: word_ball.frontier_closed,
        tile_count: tileset.len(),
        word_ball_count: word_ball.in_ball.len(),
    }
}
