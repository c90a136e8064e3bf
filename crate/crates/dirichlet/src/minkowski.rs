//! Hyperboloid-model points and the isometry action.
//!
//! Points of H^3 live on the upper sheet of the hyperboloid `<x,x> = -1`
//! in Minkowski space with signature (-,+,+,+). Metric quantities are
//! computed here; polyhedral combinatorics happen in the projective Klein
//! ball (see [`crate::polyhedron`]), reached through [`MinkowskiPoint::to_klein`].

use nalgebra::{Vector3, Vector4};
use num_complex::Complex64;
use thiserror::Error;

use crate::moebius::MoebiusElement;
use crate::tolerance::Tolerance;

/// A point of the Klein ball model: Euclidean coordinates with norm < 1
/// for finite points. Plain `Vector3` so Euclidean predicates apply directly.
pub type KleinPoint = Vector3<f64>;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("point is not on the hyperboloid: <x,x> = {0}")]
    OffHyperboloid(f64),
    #[error("Klein point has norm {0} >= 1, not a finite hyperbolic point")]
    OutsideBall(f64),
}

/// A point on the hyperboloid, coordinates `(x0, x1, x2, x3)` with `x0 > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinkowskiPoint(pub Vector4<f64>);

/// Minkowski bilinear form `<x,y> = -x0 y0 + x1 y1 + x2 y2 + x3 y3`.
#[inline]
pub fn mink_dot(x: &Vector4<f64>, y: &Vector4<f64>) -> f64 {
    -x[0] * y[0] + x[1] * y[1] + x[2] * y[2] + x[3] * y[3]
}

impl MinkowskiPoint {
    /// The basepoint `(1, 0, 0, 0)`.
    pub fn origin() -> Self {
        MinkowskiPoint(Vector4::new(1.0, 0.0, 0.0, 0.0))
    }

    pub fn new(coords: Vector4<f64>, tol: &Tolerance) -> Result<Self, ModelError> {
        let q = mink_dot(&coords, &coords);
        if (q + 1.0).abs() > 1e3 * tol.eps_equal || coords[0] <= 0.0 {
            return Err(ModelError::OffHyperboloid(q));
        }
        Ok(MinkowskiPoint(coords))
    }

    /// Rescale onto the hyperboloid, absorbing rounding drift.
    pub fn renormalized(&self) -> Self {
        let q = -mink_dot(&self.0, &self.0);
        MinkowskiPoint(self.0 / q.sqrt())
    }

    /// Projective image in the Klein ball, `(x1/x0, x2/x0, x3/x0)`.
    pub fn to_klein(&self) -> KleinPoint {
        Vector3::new(
            self.0[1] / self.0[0],
            self.0[2] / self.0[0],
            self.0[3] / self.0[0],
        )
    }

    /// Lift a Klein point back onto the hyperboloid.
    pub fn from_klein(u: &KleinPoint) -> Result<Self, ModelError> {
        let n2 = u.norm_squared();
        if n2 >= 1.0 {
            return Err(ModelError::OutsideBall(n2.sqrt()));
        }
        let x0 = 1.0 / (1.0 - n2).sqrt();
        Ok(MinkowskiPoint(Vector4::new(
            x0,
            x0 * u[0],
            x0 * u[1],
            x0 * u[2],
        )))
    }

    /// The point at hyperbolic distance `s` from this one along the unit
    /// tangent `t` (`<t,t> = 1`, `<x,t> = 0`).
    pub fn geodesic_step(&self, tangent: &Vector4<f64>, s: f64) -> Self {
        MinkowskiPoint(self.0 * s.cosh() + tangent * s.sinh()).renormalized()
    }
}

/// Hyperbolic distance `arccosh(-<p,q>)`, clamped so rounding never pushes
/// the argument below one. Near-coincident points read as ~1e-8 rather than
/// zero: arccosh amplifies rounding at 1 as sqrt(2 eps).
pub fn dist(p: &MinkowskiPoint, q: &MinkowskiPoint) -> f64 {
    let c = -mink_dot(&p.0, &q.0);
    c.max(1.0).acosh()
}

/// Apply an isometry through the Hermitian-matrix model: the point
/// `X = [[x0+x3, x1+i x2], [x1-i x2, x0-x3]]` maps to `g X g*`.
pub fn apply(g: &MoebiusElement, p: &MinkowskiPoint) -> MinkowskiPoint {
    let x = &p.0;
    let p00 = Complex64::new(x[0] + x[3], 0.0);
    let p01 = Complex64::new(x[1], x[2]);
    let p10 = p01.conj();
    let p11 = Complex64::new(x[0] - x[3], 0.0);

    // g * X
    let q00 = g.a * p00 + g.b * p10;
    let q01 = g.a * p01 + g.b * p11;
    let q10 = g.c * p00 + g.d * p10;
    let q11 = g.c * p01 + g.d * p11;

    // (g * X) * g^dagger
    let r00 = q00 * g.a.conj() + q01 * g.b.conj();
    let r01 = q00 * g.c.conj() + q01 * g.d.conj();
    let r11 = q10 * g.c.conj() + q11 * g.d.conj();

    MinkowskiPoint(Vector4::new(
        (r00.re + r11.re) / 2.0,
        r01.re,
        r01.im,
        (r00.re - r11.re) / 2.0,
    ))
    .renormalized()
}

/// The pure translation taking the origin to `p`, as a Moebius element.
///
/// For the Hermitian point `X` of `p`, the positive square root
/// `(X + I)/sqrt(tr X + 2)` is the unique positive-definite matrix with
/// `g g* = X`.
pub fn translation_to(p: &MinkowskiPoint, tol: &Tolerance) -> MoebiusElement {
    let x = &p.0;
    let s = (2.0 * x[0] + 2.0).sqrt();
    let entries = [
        Complex64::new((x[0] + x[3] + 1.0) / s, 0.0),
        Complex64::new(x[1] / s, x[2] / s),
        Complex64::new(x[1] / s, -x[2] / s),
        Complex64::new((x[0] - x[3] + 1.0) / s, 0.0),
    ];
    MoebiusElement::normalize(entries, crate::moebius::Word::empty(), tol)
        .expect("translation matrix is nonsingular")
}

/// An orthonormal tangent frame at `p`: three spacelike unit vectors
/// orthogonal to `p` and to each other, the image of the coordinate frame
/// at the origin under `translation_to(p)`.
pub fn tangent_frame(p: &MinkowskiPoint, tol: &Tolerance) -> [Vector4<f64>; 3] {
    let t = translation_to(p, tol);
    let step = 1e-3f64;
    let mut frame = [Vector4::zeros(); 3];
    for (i, f) in frame.iter_mut().enumerate() {
        // Push the origin slightly along axis i, map by the translation, and
        // recover the tangent by normalizing the Minkowski projection.
        let mut u = Vector4::new(1.0 / (1.0 - step * step).sqrt(), 0.0, 0.0, 0.0);
        u[i + 1] = step * u[0];
        let img = apply(&t, &MinkowskiPoint(u));
        let mut v = img.0 - p.0;
        let vp = mink_dot(&v, &p.0);
        v += p.0 * vp; // project out the point component (note <p,p> = -1)
        let n = mink_dot(&v, &v).sqrt();
        *f = v / n;
    }
    frame
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moebius::Word;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn axis_translation(length: f64) -> MoebiusElement {
        let h = (length / 2.0).exp();
        MoebiusElement::normalize(
            [c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0 / h, 0.0)],
            Word::empty(),
            &tol(),
        )
        .unwrap()
    }

    fn random_point(rng: &mut impl Rng) -> MinkowskiPoint {
        let u = Vector3::new(
            rng.gen_range(-0.55..0.55),
            rng.gen_range(-0.55..0.55),
            rng.gen_range(-0.55..0.55),
        );
        MinkowskiPoint::from_klein(&u).unwrap()
    }

    #[test]
    fn apply_identity_fixes_points() {
        let p = MinkowskiPoint::from_klein(&Vector3::new(0.1, -0.2, 0.3)).unwrap();
        let q = apply(&MoebiusElement::identity(), &p);
        assert!((p.0 - q.0).norm() < 1e-14);
    }

    #[test]
    fn apply_axis_translation_moves_origin_unit_distance() {
        // diag(e^{1/2}, e^{-1/2}) is the vertical translation (0,0,1) -> (0,0,e)
        // in the upper half-space, i.e. hyperbolic distance ln e = 1.
        let g = axis_translation(1.0);
        let q = apply(&g, &MinkowskiPoint::origin());
        assert_abs_diff_eq!(dist(&MinkowskiPoint::origin(), &q), 1.0, epsilon = 1e-12);
        // Image lies on the Klein z-axis.
        let k = q.to_klein();
        assert_abs_diff_eq!(k[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(k[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(k[2], (1.0f64).tanh(), epsilon = 1e-12);
    }

    #[test]
    fn apply_respects_inverse() {
        let g = MoebiusElement::normalize(
            [c(1.2, 0.3), c(0.1, -0.4), c(0.0, 0.2), c(0.9, 0.1)],
            Word::empty(),
            &tol(),
        )
        .unwrap();
        let p = MinkowskiPoint::from_klein(&Vector3::new(0.2, 0.1, -0.3)).unwrap();
        let q = apply(&g, &apply(&g.inverse(&tol()), &p));
        assert!((p.0 - q.0).norm() < 1e-12);
    }

    #[test]
    fn dist_is_zero_on_diagonal() {
        let p = MinkowskiPoint::from_klein(&Vector3::new(0.4, 0.0, 0.2)).unwrap();
        // At the noise floor of arccosh near 1, not exactly zero.
        assert!(dist(&p, &p) < 3e-8);
    }

    #[test]
    fn dist_axis_example() {
        let g = axis_translation(1.0);
        let q = apply(&g, &MinkowskiPoint::origin());
        assert_abs_diff_eq!(dist(&MinkowskiPoint::origin(), &q), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn triangle_inequality_on_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let (p, q, r) = (
                random_point(&mut rng),
                random_point(&mut rng),
                random_point(&mut rng),
            );
            assert!(dist(&p, &r) <= dist(&p, &q) + dist(&q, &r) + tol().eps_geom);
        }
    }

    #[test]
    fn klein_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let p = random_point(&mut rng);
            let q = MinkowskiPoint::from_klein(&p.to_klein()).unwrap();
            assert!((p.0 - q.0).norm() < 1e-12);
        }
    }

    #[test]
    fn klein_of_origin_and_axis_point() {
        assert_eq!(MinkowskiPoint::origin().to_klein(), Vector3::zeros());
        // (cosh t, 0, 0, sinh t) maps to (0, 0, tanh t).
        let t = 1.0f64;
        let p = MinkowskiPoint(Vector4::new(t.cosh(), 0.0, 0.0, t.sinh()));
        assert_abs_diff_eq!(p.to_klein()[2], t.tanh(), epsilon = 1e-15);
    }

    #[test]
    fn from_klein_rejects_outside() {
        assert!(MinkowskiPoint::from_klein(&Vector3::new(0.8, 0.8, 0.0)).is_err());
    }

    #[test]
    fn translation_to_maps_origin() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let p = random_point(&mut rng);
            let t = translation_to(&p, &tol());
            let q = apply(&t, &MinkowskiPoint::origin());
            assert!((p.0 - q.0).norm() < 1e-12);
        }
    }

    #[test]
    fn tangent_frame_is_orthonormal() {
        let p = MinkowskiPoint::from_klein(&Vector3::new(0.3, -0.1, 0.25)).unwrap();
        let f = tangent_frame(&p, &tol());
        for i in 0..3 {
            assert_abs_diff_eq!(mink_dot(&f[i], &f[i]), 1.0, epsilon = 1e-9);
            assert_abs_diff_eq!(mink_dot(&f[i], &p.0), 0.0, epsilon = 1e-9);
            for j in (i + 1)..3 {
                assert_abs_diff_eq!(mink_dot(&f[i], &f[j]), 0.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn geodesic_step_has_requested_length() {
        let p = MinkowskiPoint::from_klein(&Vector3::new(0.2, 0.2, -0.1)).unwrap();
        let f = tangent_frame(&p, &tol());
        let q = p.geodesic_step(&f[1], 0.37);
        assert_abs_diff_eq!(dist(&p, &q), 0.37, epsilon = 1e-12);
    }

    #[test]
    fn isometry_preserves_distances() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let g = MoebiusElement::normalize(
            [c(1.5, 0.2), c(0.3, 0.7), c(-0.2, 0.1), c(0.8, -0.3)],
            Word::empty(),
            &tol(),
        )
        .unwrap();
        for _ in 0..100 {
            let p = random_point(&mut rng);
            let q = random_point(&mut rng);
            let d0 = dist(&p, &q);
            let d1 = dist(&apply(&g, &p), &apply(&g, &q));
            assert_abs_diff_eq!(d0, d1, epsilon = 1e-11);
        }
    }
}
