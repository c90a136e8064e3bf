//! Hyperbolic volume of the domain by adaptive quadrature.
//!
//! The polyhedron is moved to basepoint-centered coordinates and decomposed
//! into cones from the origin over a fan triangulation of each face. In the
//! Klein model the volume element is `dV = du / (1-|u|^2)^2`; integrating it
//! radially in closed form reduces each cone to a 2-dimensional integral
//! over its base triangle,
//!
//! `V(cone over T) = int_T F(|u|) (n.u) / |u|^3 dA`,  `F(r) = int_0^r s^2/(1-s^2)^2 ds`,
//!
//! which splits off the integrable singularity at ideal vertices. The
//! remaining 2-d integrals use an adaptive degree-5 triangle rule driven by
//! a worst-error-first queue.

use std::collections::BinaryHeap;

use nalgebra::{Matrix4, Vector3, Vector4};
use thiserror::Error;

use crate::minkowski::{translation_to, KleinPoint};
use crate::moebius::MoebiusElement;
use crate::polyhedron::DirichletPolyhedron;
use crate::tolerance::Tolerance;

/// Klein radius cap for the radial primitive; volume beyond the cap (deeper
/// than ~13 into a cusp) is below 1e-11 and is absorbed into the estimate.
const RADIAL_CAP: f64 = 1.0 - 1e-11;

#[derive(Debug, Error)]
pub enum VolumeError {
    #[error("domain is unbounded ({0} synthetic faces remain)")]
    Unbounded(usize),
    #[error(
        "quadrature did not converge: value {value}, error estimate {error_estimate:.3e} \
         after {evaluations} evaluations"
    )]
    QuadratureNotConverged {
        value: f64,
        error_estimate: f64,
        evaluations: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeEstimate {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct VolumeOptions {
    /// Absolute error bound requested of the quadrature.
    pub abs_tol: f64,
    pub max_evaluations: u64,
}

impl Default for VolumeOptions {
    fn default() -> Self {
        VolumeOptions {
            abs_tol: 1e-9,
            max_evaluations: 40_000_000,
        }
    }
}

/// Volume of a hyperbolic ball of radius `t`: `pi (sinh 2t - 2t)`.
pub fn ball_volume(t: f64) -> f64 {
    std::f64::consts::PI * ((2.0 * t).sinh() - 2.0 * t)
}

/// Antiderivative of `r^2/(1-r^2)^2` vanishing at zero.
#[inline]
fn radial_primitive(r: f64) -> f64 {
    let r = r.min(RADIAL_CAP);
    r / (2.0 * (1.0 - r * r)) - 0.5 * r.atanh()
}

/// The Lorentz matrix of the Hermitian action `X -> g X g*`, acting on
/// Minkowski coordinates `(x0, x1, x2, x3)`.
pub fn lorentz_matrix(g: &MoebiusElement) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    for col in 0..4 {
        let mut e = Vector4::zeros();
        e[col] = 1.0;
        let image = apply_linear(g, &e);
        for row in 0..4 {
            m[(row, col)] = image[row];
        }
    }
    m
}

/// The linear extension of the isometry action to all of Minkowski space.
fn apply_linear(g: &MoebiusElement, x: &Vector4<f64>) -> Vector4<f64> {
    use num_complex::Complex64;
    let p00 = Complex64::new(x[0] + x[3], 0.0);
    let p01 = Complex64::new(x[1], x[2]);
    let p10 = p01.conj();
    let p11 = Complex64::new(x[0] - x[3], 0.0);
    let q00 = g.a * p00 + g.b * p10;
    let q01 = g.a * p01 + g.b * p11;
    let q10 = g.c * p00 + g.d * p10;
    let q11 = g.c * p01 + g.d * p11;
    let r00 = q00 * g.a.conj() + q01 * g.b.conj();
    let r01 = q00 * g.c.conj() + q01 * g.d.conj();
    let r11 = q10 * g.c.conj() + q11 * g.d.conj();
    Vector4::new(
        (r00.re + r11.re) / 2.0,
        r01.re,
        r01.im,
        (r00.re - r11.re) / 2.0,
    )
}

// Degree-5 Radon rule, barycentric points and weights (weights sum to 1).
const RULE: [(f64, f64, f64, f64); 7] = {
    const A: f64 = 0.101_286_507_323_456_34; // (6 - sqrt(15))/21
    const B: f64 = 0.470_142_064_105_115_1; // (6 + sqrt(15))/21
    const WA: f64 = 0.125_939_180_544_827_15; // (155 - sqrt(15))/1200
    const WB: f64 = 0.132_394_152_788_506_2; // (155 + sqrt(15))/1200
    [
        (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.225),
        (1.0 - 2.0 * A, A, A, WA),
        (A, 1.0 - 2.0 * A, A, WA),
        (A, A, 1.0 - 2.0 * A, WA),
        (1.0 - 2.0 * B, B, B, WB),
        (B, 1.0 - 2.0 * B, B, WB),
        (B, B, 1.0 - 2.0 * B, WB),
    ]
};

#[derive(Clone, Copy)]
struct Tri {
    a: KleinPoint,
    b: KleinPoint,
    c: KleinPoint,
    /// Plane data of the parent face, in centered coordinates.
    normal: Vector3<f64>,
    offset: f64,
}

impl Tri {
    fn area(&self) -> f64 {
        (self.b - self.a).cross(&(self.c - self.a)).norm() / 2.0
    }

    fn quadrature(&self, evals: &mut u64) -> f64 {
        let area = self.area();
        let mut sum = 0.0;
        for (l1, l2, l3, w) in RULE {
            let u = self.a * l1 + self.b * l2 + self.c * l3;
            sum += w * integrand(&u, &self.normal, self.offset);
        }
        *evals += 7;
        area * sum
    }

    fn split(&self) -> [Tri; 4] {
        let ab = (self.a + self.b) / 2.0;
        let bc = (self.b + self.c) / 2.0;
        let ca = (self.c + self.a) / 2.0;
        let t = |a, b, c| Tri {
            a,
            b,
            c,
            normal: self.normal,
            offset: self.offset,
        };
        [
            t(self.a, ab, ca),
            t(ab, self.b, bc),
            t(ca, bc, self.c),
            t(ab, bc, ca),
        ]
    }
}

#[inline]
fn integrand(u: &KleinPoint, normal: &Vector3<f64>, offset: f64) -> f64 {
    let r = u.norm();
    if r < 1e-300 {
        return 0.0;
    }
    let _ = offset;
    // (n . u)/|u| is the cosine factor of the solid-angle transform; using
    // the actual dot product (rather than the face offset) keeps the
    // formula exact on subdivided triangles too.
    radial_primitive(r) * normal.dot(u) / (r * r * r)
}

struct QueueItem {
    err: f64,
    seq: u64,
    fine: f64,
    children: [Tri; 4],
}

impl PartialEq for QueueItem {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err && self.seq == other.seq
    }
}
impl Eq for QueueItem {}
impl PartialOrd for QueueItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for QueueItem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Integrate the Klein volume element over the polyhedron.
pub fn volume(
    poly: &DirichletPolyhedron,
    opts: &VolumeOptions,
    tol: &Tolerance,
) -> Result<VolumeEstimate, VolumeError> {
    let synthetic = poly.synthetic_face_count();
    if synthetic > 0 {
        return Err(VolumeError::Unbounded(synthetic));
    }
    let to_center = lorentz_matrix(&translation_to(&poly.basepoint, tol).inverse(tol));
    let centered: Vec<KleinPoint> = poly
        .vertices
        .iter()
        .map(|u| {
            let w = to_center * Vector4::new(1.0, u[0], u[1], u[2]);
            Vector3::new(w[1] / w[0], w[2] / w[0], w[3] / w[0])
        })
        .collect();

    let mut evals: u64 = 0;
    let mut heap: BinaryHeap<QueueItem> = BinaryHeap::new();
    let mut seq: u64 = 0;
    let mut total = 0.0;
    let mut total_err = 0.0;
    let push = |tri: Tri,
                    heap: &mut BinaryHeap<QueueItem>,
                    total: &mut f64,
                    total_err: &mut f64,
                    evals: &mut u64,
                    seq: &mut u64| {
        let coarse = tri.quadrature(evals);
        let children = tri.split();
        let fine: f64 = children.iter().map(|t| t.quadrature(evals)).sum();
        let err = (fine - coarse).abs();
        *total += fine;
        *total_err += err;
        *seq += 1;
        heap.push(QueueItem {
            err,
            seq: *seq,
            fine,
            children,
        });
    };

    for face in &poly.faces {
        let cycle: Vec<KleinPoint> = face.cycle.iter().map(|&i| centered[i]).collect();
        let n = cycle.len();
        let centroid: KleinPoint = cycle.iter().sum::<Vector3<f64>>() / n as f64;
        // Face plane in centered coordinates, oriented away from the origin.
        let mut normal = Vector3::zeros();
        for k in 0..n {
            normal += cycle[k].cross(&cycle[(k + 1) % n]);
        }
        let normal = normal.normalize();
        let offset = normal.dot(&centroid);
        let (normal, offset) = if offset < 0.0 {
            (-normal, -offset)
        } else {
            (normal, offset)
        };
        for k in 0..n {
            let tri = Tri {
                a: centroid,
                b: cycle[k],
                c: cycle[(k + 1) % n],
                normal,
                offset,
            };
            push(tri, &mut heap, &mut total, &mut total_err, &mut evals, &mut seq);
        }
    }

    while total_err > opts.abs_tol {
        if evals >= opts.max_evaluations {
            return Err(VolumeError::QuadratureNotConverged {
                value: total,
                error_estimate: total_err,
                evaluations: evals,
            });
        }
        let Some(worst) = heap.pop() else { break };
        total -= worst.fine;
        total_err -= worst.err;
        for tri in worst.children {
            push(tri, &mut heap, &mut total, &mut total_err, &mut evals, &mut seq);
        }
    }

    Ok(VolumeEstimate {
        value: total,
        error_estimate: total_err,
        evaluations: evals,
    })
}
