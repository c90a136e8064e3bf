//! Convex polyhedra in the Klein ball and incremental half-space clipping.
//!
//! Hyperbolic planes are Euclidean planes in the Klein model, so the domain
//! is maintained as an ordinary convex polytope: shared vertex list plus
//! faces as ordered vertex cycles (counterclockwise seen from outside).
//! Metric quantities are evaluated by lifting back to the hyperboloid.

use nalgebra::{Vector3, Vector4};
use thiserror::Error;

use crate::minkowski::{self, dist, mink_dot, KleinPoint, MinkowskiPoint};
use crate::moebius::{MoebiusElement, Word};
use crate::tolerance::Tolerance;

/// Klein norm at or above which a vertex is treated as ideal (including
/// intersection junk beyond the unit sphere, which is excluded from all
/// metric queries).
pub const IDEAL_EPS: f64 = 1e-7;

/// A cut creates a face only if its polygon has Euclidean diameter above
/// this; smaller sections are logged as near-misses (candidate hidden walls).
pub const FACE_DIAMETER_EPS: f64 = 1e-7;

/// Half-width margin of the initial bounding cube, `[-1+delta, 1-delta]^3`.
pub const INITIAL_CUBE_DELTA: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum PolyhedronError {
    #[error("half-space does not contain the basepoint")]
    BasepointOutside,
    #[error("clipping removed the whole polyhedron")]
    EmptyResult,
    #[error("element fixes the basepoint (moves it {0:.3e} < eps_geom)")]
    FixesBasepoint(f64),
    #[error("polyhedron has no group-face edges")]
    NoEdges,
    #[error("combinatorial inconsistency: {0}")]
    BadTopology(String),
}

/// A Euclidean plane `{u : normal . u = offset}` in Klein coordinates with
/// unit normal; the inside of the associated half-space is `normal . u <= offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KleinPlane {
    pub normal: Vector3<f64>,
    pub offset: f64,
}

impl KleinPlane {
    #[inline]
    pub fn signed_dist(&self, u: &KleinPoint) -> f64 {
        self.normal.dot(u) - self.offset
    }

    /// Hyperbolic distance from a hyperboloid point to this plane,
    /// `sinh d = |<p, w>| / sqrt(1 - offset^2)` for the lift `w = (offset, normal)`.
    pub fn hyperbolic_dist(&self, p: &MinkowskiPoint) -> f64 {
        let w = Vector4::new(self.offset, self.normal[0], self.normal[1], self.normal[2]);
        let s = mink_dot(&p.0, &w).abs() / (1.0 - self.offset * self.offset).sqrt();
        s.asinh()
    }
}

/// The perpendicular bisector half-space `{y : d(x,y) <= d(g(x), y)}`.
#[derive(Debug, Clone)]
pub struct HalfSpace {
    /// Minkowski normal `v = x - g(x)`; the half-space is `<y, v> >= 0`.
    pub normal: Vector4<f64>,
    /// Same plane in Klein coordinates, inside `normal . u <= offset`.
    pub plane: KleinPlane,
    pub element: MoebiusElement,
}

/// Build the bisector half-space of `x` and `g(x)`.
pub fn bisector_halfspace(
    x: &MinkowskiPoint,
    g: &MoebiusElement,
    tol: &Tolerance,
) -> Result<HalfSpace, PolyhedronError> {
    let gx = minkowski::apply(g, x);
    let moved = dist(x, &gx);
    if moved <= tol.eps_geom {
        return Err(PolyhedronError::FixesBasepoint(moved));
    }
    let v = x.0 - gx.0;
    // <y, v> >= 0 with y = y0 (1, u) reads  spatial(v) . u >= v0; flip signs
    // to the canonical `n . u <= c` inside form.
    let spatial = Vector3::new(v[1], v[2], v[3]);
    let len = spatial.norm();
    let plane = KleinPlane {
        normal: -spatial / len,
        offset: -v[0] / len,
    };
    Ok(HalfSpace {
        normal: v,
        plane,
        element: g.clone(),
    })
}

/// A face of the polyhedron: supporting plane, boundary cycle, and (for
/// bisector faces) the group element that produced it. Synthetic faces of
/// the initial bounding cube carry no element.
#[derive(Debug, Clone)]
pub struct Face {
    pub plane: KleinPlane,
    pub cycle: Vec<usize>,
    pub element: Option<MoebiusElement>,
    pub paired: Option<usize>,
}

impl Face {
    pub fn is_group_face(&self) -> bool {
        self.element.is_some()
    }
}

/// An edge of the polyhedron: endpoint vertex indices and the two incident
/// faces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub vertices: (usize, usize),
    pub faces: (usize, usize),
}

/// Outcome of one clipping step.
#[derive(Debug, Clone, Default)]
pub struct ClipReport {
    pub new_face: bool,
    pub new_face_index: Option<usize>,
    /// The cut section was nonempty but below the face-diameter threshold.
    pub degenerate: bool,
    pub section_diameter: f64,
    /// Words of group faces eliminated by this cut.
    pub removed_faces: Vec<Word>,
}

/// Convex polyhedron with Dirichlet metadata.
#[derive(Debug, Clone)]
pub struct DirichletPolyhedron {
    pub basepoint: MinkowskiPoint,
    pub basepoint_klein: KleinPoint,
    pub vertices: Vec<KleinPoint>,
    pub faces: Vec<Face>,
}

impl DirichletPolyhedron {
    /// The initial bounding cube `[-1+delta, 1-delta]^3` around the origin of
    /// the Klein ball; its six faces are synthetic and must be cut away (or
    /// survive only as ideal-boundary truncation in the cusped case).
    pub fn initial_cube(basepoint: &MinkowskiPoint) -> Self {
        let h = 1.0 - INITIAL_CUBE_DELTA;
        let mut vertices = Vec::with_capacity(8);
        for &z in &[-h, h] {
            for &y in &[-h, h] {
                for &x in &[-h, h] {
                    vertices.push(Vector3::new(x, y, z));
                }
            }
        }
        // Index layout: bit 0 = +x, bit 1 = +y, bit 2 = +z.
        let quads: [(Vector3<f64>, [usize; 4]); 6] = [
            (Vector3::new(1.0, 0.0, 0.0), [1, 3, 7, 5]),
            (Vector3::new(-1.0, 0.0, 0.0), [0, 4, 6, 2]),
            (Vector3::new(0.0, 1.0, 0.0), [2, 6, 7, 3]),
            (Vector3::new(0.0, -1.0, 0.0), [0, 1, 5, 4]),
            (Vector3::new(0.0, 0.0, 1.0), [4, 5, 7, 6]),
            (Vector3::new(0.0, 0.0, -1.0), [0, 2, 3, 1]),
        ];
        let mut faces = Vec::with_capacity(6);
        for (normal, cycle) in quads {
            let mut face = Face {
                plane: KleinPlane { normal, offset: h },
                cycle: cycle.to_vec(),
                element: None,
                paired: None,
            };
            // Orientation discipline: outward Newell normal.
            if newell_normal(&vertices, &face.cycle).dot(&normal) < 0.0 {
                face.cycle.reverse();
            }
            faces.push(face);
        }
        DirichletPolyhedron {
            basepoint: *basepoint,
            basepoint_klein: basepoint.to_klein(),
            vertices,
            faces,
        }
    }

    /// Clip by a half-space in place. Returns what happened; on a degenerate
    /// section (diameter below threshold) the polyhedron is left unchanged
    /// and the near-miss is reported.
    pub fn clip(&mut self, hs: &HalfSpace, tol: &Tolerance) -> Result<ClipReport, PolyhedronError> {
        let plane = &hs.plane;
        if plane.signed_dist(&self.basepoint_klein) >= -tol.eps_equal {
            return Err(PolyhedronError::BasepointOutside);
        }
        let on_eps = tol.eps_equal;
        let sides: Vec<f64> = self.vertices.iter().map(|v| plane.signed_dist(v)).collect();
        let strictly_out = sides.iter().any(|&s| s > on_eps);
        if !strictly_out {
            let grazing = sides.iter().any(|&s| s.abs() <= on_eps);
            return Ok(ClipReport {
                degenerate: grazing,
                ..Default::default()
            });
        }
        if sides.iter().all(|&s| s > -on_eps) {
            return Err(PolyhedronError::EmptyResult);
        }
        // A face coplanar with the cut means the cut is already a supporting
        // plane; nothing changes.
        for f in &self.faces {
            if f.cycle.iter().all(|&i| sides[i].abs() <= on_eps) {
                return Ok(ClipReport::default());
            }
        }

        // Intersection points, shared across faces through the edge key.
        let mut crossings: std::collections::HashMap<(usize, usize), usize> =
            std::collections::HashMap::new();
        let mut vertices = self.vertices.clone();
        let mut crossing_index = |i: usize, j: usize, vertices: &mut Vec<KleinPoint>| -> usize {
            let key = (i.min(j), i.max(j));
            if let Some(&k) = crossings.get(&key) {
                return k;
            }
            let (si, sj) = (sides[i], sides[j]);
            let t = si / (si - sj);
            let p = self.vertices[i] + (self.vertices[j] - self.vertices[i]) * t;
            vertices.push(p);
            let k = vertices.len() - 1;
            crossings.insert(key, k);
            k
        };

        let mut new_faces: Vec<Face> = Vec::with_capacity(self.faces.len() + 1);
        let mut removed_faces = Vec::new();
        let mut on_plane_vertices: std::collections::BTreeSet<usize> =
            std::collections::BTreeSet::new();
        for face in &self.faces {
            let n = face.cycle.len();
            let mut cyc: Vec<usize> = Vec::with_capacity(n + 2);
            for k in 0..n {
                let a = face.cycle[k];
                let b = face.cycle[(k + 1) % n];
                let (sa, sb) = (sides[a], sides[b]);
                if sa <= on_eps {
                    cyc.push(a);
                }
                if sa > on_eps && sb < -on_eps || sa < -on_eps && sb > on_eps {
                    cyc.push(crossing_index(a, b, &mut vertices));
                }
            }
            cyc.dedup();
            while cyc.len() > 1 && cyc.first() == cyc.last() {
                cyc.pop();
            }
            if cyc.len() < 3 {
                if let Some(el) = &face.element {
                    removed_faces.push(el.word.clone());
                }
                continue;
            }
            for &i in &cyc {
                let s = if i < sides.len() { sides[i] } else { 0.0 };
                if s.abs() <= on_eps || i >= sides.len() {
                    on_plane_vertices.insert(i);
                }
            }
            new_faces.push(Face {
                plane: face.plane,
                cycle: cyc,
                element: face.element.clone(),
                paired: None,
            });
        }

        // Section polygon on the cutting plane.
        let section: Vec<usize> = on_plane_vertices.into_iter().collect();
        let diameter = polygon_diameter(&vertices, &section);
        if section.len() < 3 || diameter <= FACE_DIAMETER_EPS {
            // Near-miss: shaving a sliver thinner than the face threshold.
            // Leave the polyhedron unchanged (it stays a superset).
            return Ok(ClipReport {
                degenerate: true,
                section_diameter: diameter,
                ..Default::default()
            });
        }
        let cycle = order_on_plane(&vertices, &section, plane);
        new_faces.push(Face {
            plane: *plane,
            cycle,
            element: Some(hs.element.clone()),
            paired: None,
        });
        let new_face_index = new_faces.len() - 1;

        self.vertices = vertices;
        self.faces = new_faces;
        self.compact_vertices();
        Ok(ClipReport {
            new_face: true,
            new_face_index: Some(new_face_index),
            degenerate: false,
            section_diameter: diameter,
            removed_faces,
        })
    }

    fn compact_vertices(&mut self) {
        let mut used = vec![usize::MAX; self.vertices.len()];
        let mut kept: Vec<KleinPoint> = Vec::with_capacity(self.vertices.len());
        for face in &mut self.faces {
            for idx in &mut face.cycle {
                if used[*idx] == usize::MAX {
                    used[*idx] = kept.len();
                    kept.push(self.vertices[*idx]);
                }
                *idx = used[*idx];
            }
        }
        self.vertices = kept;
    }

    /// Edge list derived from face cycles; every edge joins exactly two faces.
    pub fn edges(&self) -> Vec<Edge> {
        let mut map: std::collections::BTreeMap<(usize, usize), Vec<usize>> =
            std::collections::BTreeMap::new();
        for (fi, face) in self.faces.iter().enumerate() {
            let n = face.cycle.len();
            for k in 0..n {
                let a = face.cycle[k];
                let b = face.cycle[(k + 1) % n];
                map.entry((a.min(b), a.max(b))).or_default().push(fi);
            }
        }
        map.into_iter()
            .filter(|(_, fs)| fs.len() == 2)
            .map(|((a, b), fs)| Edge {
                vertices: (a, b),
                faces: (fs[0], fs[1]),
            })
            .collect()
    }

    /// Check manifold combinatorics: every edge in exactly two faces, with
    /// opposite orientations, and Euler characteristic two.
    pub fn validate(&self) -> Result<(), PolyhedronError> {
        let mut map: std::collections::BTreeMap<(usize, usize), i32> =
            std::collections::BTreeMap::new();
        for face in &self.faces {
            let n = face.cycle.len();
            if n < 3 {
                return Err(PolyhedronError::BadTopology(format!(
                    "face with {n} vertices"
                )));
            }
            for k in 0..n {
                let a = face.cycle[k];
                let b = face.cycle[(k + 1) % n];
                if a == b {
                    return Err(PolyhedronError::BadTopology("repeated vertex".into()));
                }
                *map.entry((a.min(b), a.max(b))).or_default() += if a < b { 1 } else { -1 };
            }
        }
        for (e, orient) in &map {
            if *orient != 0 {
                return Err(PolyhedronError::BadTopology(format!(
                    "edge {e:?} not traversed once in each direction"
                )));
            }
        }
        let (v, e, f) = (
            self.vertices.len() as i64,
            map.len() as i64,
            self.faces.len() as i64,
        );
        if v - e + f != 2 {
            return Err(PolyhedronError::BadTopology(format!(
                "Euler characteristic {v} - {e} + {f} = {}",
                v - e + f
            )));
        }
        Ok(())
    }

    pub fn euler_characteristic(&self) -> i64 {
        let v = self.vertices.len() as i64;
        let e = self.edges().len() as i64;
        let f = self.faces.len() as i64;
        v - e + f
    }

    pub fn synthetic_face_count(&self) -> usize {
        self.faces.iter().filter(|f| !f.is_group_face()).count()
    }

    pub fn is_vertex_ideal(&self, i: usize) -> bool {
        self.vertices[i].norm() >= 1.0 - IDEAL_EPS
    }

    pub fn has_ideal_vertices(&self) -> bool {
        (0..self.vertices.len()).any(|i| self.is_vertex_ideal(i))
    }

    /// Half the minimal translation distance of the basepoint over group
    /// faces (the domain's injectivity radius at the basepoint).
    pub fn injectivity_radius(&self) -> Option<f64> {
        self.faces
            .iter()
            .filter_map(|f| f.element.as_ref())
            .map(|g| dist(&self.basepoint, &minkowski::apply(g, &self.basepoint)) / 2.0)
            .min_by(|a, b| a.total_cmp(b))
    }

    /// Max hyperbolic distance from the basepoint to a finite vertex.
    /// `None` when every vertex is ideal.
    pub fn max_vertex_distance(&self) -> Option<f64> {
        (0..self.vertices.len())
            .filter(|&i| !self.is_vertex_ideal(i))
            .map(|i| {
                let p = MinkowskiPoint::from_klein(&self.vertices[i])
                    .expect("finite vertex lies in the ball");
                dist(&self.basepoint, &p)
            })
            .max_by(|a, b| a.total_cmp(b))
    }

    /// Maximum over edges (between two group faces) of the minimal distance
    /// from the basepoint to the edge; edges reaching the ideal boundary are
    /// clamped just inside the ball.
    pub fn spine_radius(&self) -> Result<f64, PolyhedronError> {
        let mut best: Option<f64> = None;
        for edge in self.edges() {
            let (fa, fb) = edge.faces;
            if !self.faces[fa].is_group_face() || !self.faces[fb].is_group_face() {
                continue;
            }
            let (a, b) = edge.vertices;
            if let Some(d) =
                dist_to_clamped_segment(&self.basepoint, &self.vertices[a], &self.vertices[b])
            {
                best = Some(best.map_or(d, |m: f64| m.max(d)));
            }
        }
        best.ok_or(PolyhedronError::NoEdges)
    }

    /// Membership test in Klein coordinates.
    pub fn contains_klein(&self, u: &KleinPoint, slack: f64) -> bool {
        self.faces.iter().all(|f| f.plane.signed_dist(u) <= slack)
    }
}

/// Newell normal (unnormalized) of a polygon given by vertex indices.
fn newell_normal(vertices: &[KleinPoint], cycle: &[usize]) -> Vector3<f64> {
    let mut n = Vector3::zeros();
    for k in 0..cycle.len() {
        let p = &vertices[cycle[k]];
        let q = &vertices[cycle[(k + 1) % cycle.len()]];
        n += p.cross(q);
    }
    n
}

fn polygon_diameter(vertices: &[KleinPoint], idx: &[usize]) -> f64 {
    let mut d = 0.0f64;
    for i in 0..idx.len() {
        for j in (i + 1)..idx.len() {
            d = d.max((vertices[idx[i]] - vertices[idx[j]]).norm());
        }
    }
    d
}

/// Order coplanar points counterclockwise about the plane normal (so the
/// Newell normal of the resulting cycle points along `plane.normal`, i.e.
/// outward).
fn order_on_plane(vertices: &[KleinPoint], idx: &[usize], plane: &KleinPlane) -> Vec<usize> {
    let n = plane.normal;
    let e1 = if n[0].abs() < 0.9 {
        Vector3::new(1.0, 0.0, 0.0).cross(&n).normalize()
    } else {
        Vector3::new(0.0, 1.0, 0.0).cross(&n).normalize()
    };
    let e2 = n.cross(&e1);
    let centroid: Vector3<f64> =
        idx.iter().map(|&i| vertices[i]).sum::<Vector3<f64>>() / idx.len() as f64;
    let mut order: Vec<usize> = idx.to_vec();
    order.sort_by(|&i, &j| {
        let pi = vertices[i] - centroid;
        let pj = vertices[j] - centroid;
        let ai = pi.dot(&e2).atan2(pi.dot(&e1));
        let aj = pj.dot(&e2).atan2(pj.dot(&e1));
        ai.total_cmp(&aj)
    });
    // (e1, e2, n) is right-handed, so increasing angle about n gives a cycle
    // whose Newell normal is +n.
    order
}

/// Minimal hyperbolic distance from `p` to the Klein segment `a..b`, with
/// the segment clamped to the part strictly inside the ball. Returns `None`
/// when the whole segment lies at or beyond the ideal boundary.
pub fn dist_to_clamped_segment(
    p: &MinkowskiPoint,
    a: &KleinPoint,
    b: &KleinPoint,
) -> Option<f64> {
    let cap = 1.0 - IDEAL_EPS;
    // |a + t (b-a)|^2 <= cap^2 as a quadratic in t on [0,1].
    let d = b - a;
    let (qa, qb, qc) = (d.norm_squared(), 2.0 * a.dot(&d), a.norm_squared() - cap * cap);
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    if qa.abs() < 1e-300 {
        if qc > 0.0 {
            return None;
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc <= 0.0 {
            if qc > 0.0 {
                return None;
            }
        } else {
            let r = disc.sqrt();
            t0 = t0.max((-qb - r) / (2.0 * qa));
            t1 = t1.min((-qb + r) / (2.0 * qa));
            if t0 >= t1 {
                return None;
            }
        }
    }
    let pa = MinkowskiPoint::from_klein(&(a + d * t0)).ok()?;
    let pb = MinkowskiPoint::from_klein(&(a + d * t1)).ok()?;
    Some(dist_to_geodesic_segment(p, &pa, &pb))
}

/// Minimal distance from `p` to the geodesic segment between two hyperboloid
/// points. Along the geodesic `A cosh t + U sinh t`, the distance satisfies
/// `cosh d(t) = alpha cosh t + beta sinh t`; the interior minimum is
/// `sqrt(alpha^2 - beta^2)` at `tanh t = -beta/alpha` when that parameter
/// falls inside the segment.
pub fn dist_to_geodesic_segment(p: &MinkowskiPoint, a: &MinkowskiPoint, b: &MinkowskiPoint) -> f64 {
    let len = dist(a, b);
    if len < 1e-15 {
        return dist(p, a);
    }
    // Unit tangent at a toward b.
    let mut u = b.0 + a.0 * mink_dot(&b.0, &a.0);
    u /= mink_dot(&u, &u).sqrt();
    let alpha = -mink_dot(&p.0, &a.0);
    let beta = -mink_dot(&p.0, &u);
    let end = (alpha * len.cosh() + beta * len.sinh()).max(1.0).acosh();
    let start = alpha.max(1.0).acosh();
    let mut best = start.min(end);
    if beta.abs() < alpha {
        let t_star = (-beta / alpha).atanh();
        if t_star > 0.0 && t_star < len {
            let interior = (alpha * alpha - beta * beta).sqrt().max(1.0).acosh();
            best = best.min(interior);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moebius::Word;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn axis_translation(length: f64) -> MoebiusElement {
        let h = (length / 2.0).exp();
        MoebiusElement::normalize(
            [
                Complex64::new(h, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0 / h, 0.0),
            ],
            Word(vec![1]),
            &tol(),
        )
        .unwrap()
    }

    #[test]
    fn initial_cube_is_valid() {
        let cube = DirichletPolyhedron::initial_cube(&MinkowskiPoint::origin());
        cube.validate().unwrap();
        assert_eq!(cube.vertices.len(), 8);
        assert_eq!(cube.faces.len(), 6);
        assert_eq!(cube.edges().len(), 12);
        assert_eq!(cube.euler_characteristic(), 2);
    }

    #[test]
    fn bisector_of_axis_translation() {
        // d(x, gx) = 1 along the Klein z-axis: plane z <= tanh(1/2).
        let g = axis_translation(1.0);
        let hs = bisector_halfspace(&MinkowskiPoint::origin(), &g, &tol()).unwrap();
        assert_abs_diff_eq!(hs.plane.normal[2], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hs.plane.offset, (0.5f64).tanh(), epsilon = 1e-12);
        // Basepoint strictly inside, g(x) strictly outside.
        assert!(hs.plane.signed_dist(&Vector3::zeros()) < 0.0);
        let gx = minkowski::apply(&g, &MinkowskiPoint::origin()).to_klein();
        assert!(hs.plane.signed_dist(&gx) > 0.0);
        // Distance from basepoint to the plane is half the translation.
        assert_abs_diff_eq!(
            hs.plane.hyperbolic_dist(&MinkowskiPoint::origin()),
            0.5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn bisectors_of_inverse_pair_are_mirrors() {
        let g = axis_translation(1.0);
        let h1 = bisector_halfspace(&MinkowskiPoint::origin(), &g, &tol()).unwrap();
        let h2 = bisector_halfspace(&MinkowskiPoint::origin(), &g.inverse(&tol()), &tol()).unwrap();
        assert_abs_diff_eq!(h1.plane.offset, h2.plane.offset, epsilon = 1e-12);
        assert!((h1.plane.normal + h2.plane.normal).norm() < 1e-12);
    }

    #[test]
    fn bisector_rejects_basepoint_fixing() {
        let r = bisector_halfspace(
            &MinkowskiPoint::origin(),
            &MoebiusElement::identity(),
            &tol(),
        );
        assert!(matches!(r, Err(PolyhedronError::FixesBasepoint(_))));
    }

    #[test]
    fn clip_cube_through_middle() {
        // Euclidean clipping oracle: cutting [-h,h]^3 with z <= 0 leaves the
        // half cube with the four new vertices (+-h, +-h, 0).
        let cube = DirichletPolyhedron::initial_cube(&MinkowskiPoint::origin());
        let below = MinkowskiPoint::from_klein(&Vector3::new(0.0, 0.0, -0.3)).unwrap();
        let mut poly = DirichletPolyhedron {
            basepoint: below,
            basepoint_klein: below.to_klein(),
            ..cube.clone()
        };
        let hs = HalfSpace {
            normal: Vector4::new(0.0, 0.0, 0.0, -1.0),
            plane: KleinPlane {
                normal: Vector3::new(0.0, 0.0, 1.0),
                offset: 0.0,
            },
            element: Some(axis_translation(1.0)).unwrap(),
        };
        let report = poly.clip(&hs, &tol()).unwrap();
        assert!(report.new_face);
        poly.validate().unwrap();
        assert_eq!(poly.vertices.len(), 8);
        assert_eq!(poly.faces.len(), 6);
        let h = 1.0 - INITIAL_CUBE_DELTA;
        let mut top: Vec<_> = poly
            .vertices
            .iter()
            .filter(|v| v[2].abs() < 1e-12)
            .map(|v| (v[0], v[1]))
            .collect();
        top.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(top.len(), 4);
        assert_abs_diff_eq!(top[0].0, -h, epsilon = 1e-12);
        assert_abs_diff_eq!(top[3].0, h, epsilon = 1e-12);

        // Cutting again with the same plane changes nothing.
        let again = poly.clip(&hs, &tol()).unwrap();
        assert!(!again.new_face);

        cube.validate().unwrap();
    }

    #[test]
    fn clip_entirely_outside_is_noop() {
        let mut cube = DirichletPolyhedron::initial_cube(&MinkowskiPoint::origin());
        let hs = HalfSpace {
            normal: Vector4::zeros(),
            plane: KleinPlane {
                normal: Vector3::new(0.0, 0.0, 1.0),
                offset: 0.9999999,
            },
            element: axis_translation(8.0),
        };
        let before = cube.vertices.clone();
        let report = cube.clip(&hs, &tol()).unwrap();
        assert!(!report.new_face && !report.degenerate);
        assert_eq!(cube.vertices, before);
    }

    #[test]
    fn clip_tangent_at_vertex_is_degenerate() {
        let mut cube = DirichletPolyhedron::initial_cube(&MinkowskiPoint::origin());
        let h = 1.0 - INITIAL_CUBE_DELTA;
        let n = Vector3::new(1.0, 1.0, 1.0).normalize();
        let hs = HalfSpace {
            normal: Vector4::zeros(),
            plane: KleinPlane {
                normal: n,
                // Tangent plane through the (+,+,+) corner, within tolerance.
                offset: n.dot(&Vector3::new(h, h, h)) + 1e-12,
            },
            element: axis_translation(8.0),
        };
        let report = cube.clip(&hs, &tol()).unwrap();
        assert!(!report.new_face);
        assert!(report.degenerate);
        cube.validate().unwrap();
    }

    #[test]
    fn clip_corner_produces_triangle() {
        let mut cube = DirichletPolyhedron::initial_cube(&MinkowskiPoint::origin());
        let h = 1.0 - INITIAL_CUBE_DELTA;
        let n = Vector3::new(1.0, 1.0, 1.0).normalize();
        let hs = HalfSpace {
            normal: Vector4::zeros(),
            plane: KleinPlane {
                normal: n,
                offset: n.dot(&Vector3::new(h, h, h)) - 0.3,
            },
            element: axis_translation(8.0),
        };
        let report = cube.clip(&hs, &tol()).unwrap();
        assert!(report.new_face);
        cube.validate().unwrap();
        assert_eq!(cube.faces.len(), 7);
        let tri = &cube.faces[report.new_face_index.unwrap()];
        assert_eq!(tri.cycle.len(), 3);
        assert_eq!(cube.euler_characteristic(), 2);
    }

    #[test]
    fn slab_from_single_generator_pair() {
        let mut poly = DirichletPolyhedron::initial_cube(&MinkowskiPoint::origin());
        let g = axis_translation(1.0);
        for el in [g.clone(), g.inverse(&tol())] {
            let hs = bisector_halfspace(&MinkowskiPoint::origin(), &el, &tol()).unwrap();
            let report = poly.clip(&hs, &tol()).unwrap();
            assert!(report.new_face);
        }
        poly.validate().unwrap();
        assert_eq!(poly.faces.len(), 6);
        assert_eq!(poly.synthetic_face_count(), 4);
        // Injectivity radius: half the translation length.
        assert_abs_diff_eq!(poly.injectivity_radius().unwrap(), 0.5, epsilon = 1e-12);
        // Spine radius undefined: no edge joins two group faces.
        assert!(matches!(poly.spine_radius(), Err(PolyhedronError::NoEdges)));
    }

    #[test]
    fn spine_distance_matches_dense_sampling() {
        // Distance from an interior point to a segment, against brute force.
        let p = MinkowskiPoint::from_klein(&Vector3::new(0.1, -0.05, 0.2)).unwrap();
        let a = Vector3::new(0.5, 0.5, -0.4);
        let b = Vector3::new(-0.3, 0.5, 0.45);
        let fast = dist_to_clamped_segment(&p, &a, &b).unwrap();
        let mut brute = f64::INFINITY;
        for k in 0..=20000 {
            let t = k as f64 / 20000.0;
            let q = MinkowskiPoint::from_klein(&(a + (b - a) * t)).unwrap();
            brute = brute.min(dist(&p, &q));
        }
        assert_abs_diff_eq!(fast, brute, epsilon = 1e-6);
    }

    #[test]
    fn segment_through_point_has_zero_distance() {
        let p = MinkowskiPoint::origin();
        let a = Vector3::new(-0.4, 0.0, 0.0);
        let b = Vector3::new(0.6, 0.0, 0.0);
        assert_abs_diff_eq!(
            dist_to_clamped_segment(&p, &a, &b).unwrap(),
            0.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn point_plane_distance_formula() {
        // Plane z = tanh(s) is at hyperbolic distance s from the origin.
        for &s in &[0.2, 0.5, 1.0] {
            let plane = KleinPlane {
                normal: Vector3::new(0.0, 0.0, 1.0),
                offset: (s as f64).tanh(),
            };
            assert_abs_diff_eq!(
                plane.hyperbolic_dist(&MinkowskiPoint::origin()),
                s,
                epsilon = 1e-12
            );
        }
    }
}
