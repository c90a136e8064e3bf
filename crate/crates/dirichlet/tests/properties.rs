//! Property tests for the kernel invariants.

use dirichlet::minkowski::{self, dist, MinkowskiPoint};
use dirichlet::moebius::{ComplexLength, MoebiusElement, Word};
use dirichlet::tolerance::Tolerance;
use nalgebra::Vector3;
use num_complex::Complex64;
use proptest::prelude::*;

fn tol() -> Tolerance {
    Tolerance::default()
}

fn klein_point() -> impl Strategy<Value = MinkowskiPoint> {
    (-0.55f64..0.55, -0.55f64..0.55, -0.55f64..0.55)
        .prop_map(|(x, y, z)| MinkowskiPoint::from_klein(&Vector3::new(x, y, z)).unwrap())
}

fn element() -> impl Strategy<Value = MoebiusElement> {
    let entry = (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im));
    (entry.clone(), entry.clone(), entry.clone(), entry)
        .prop_filter_map("nonsingular, well-conditioned", |(a, b, c, d)| {
            let m = MoebiusElement::normalize([a, b, c, d], Word::empty(), &tol()).ok()?;
            m.entries().iter().all(|z| z.norm() < 3.0).then_some(m)
        })
}

proptest! {
    #[test]
    fn isometries_preserve_distance(g in element(), p in klein_point(), q in klein_point()) {
        let d0 = dist(&p, &q);
        let d1 = dist(&minkowski::apply(&g, &p), &minkowski::apply(&g, &q));
        prop_assert!((d0 - d1).abs() < 1e-9);
    }

    #[test]
    fn action_respects_composition(g in element(), h in element(), p in klein_point()) {
        let lhs = minkowski::apply(&g.compose(&h, &tol()), &p);
        let rhs = minkowski::apply(&g, &minkowski::apply(&h, &p));
        prop_assert!((lhs.0 - rhs.0).norm() < 1e-9);
    }

    #[test]
    fn sign_does_not_matter(g in element(), p in klein_point()) {
        let mut neg = g.clone();
        neg.a = -neg.a; neg.b = -neg.b; neg.c = -neg.c; neg.d = -neg.d;
        let a = minkowski::apply(&g, &p);
        let b = minkowski::apply(&neg, &p);
        prop_assert!((a.0 - b.0).norm() < 1e-12);
        if let (Ok(ca), Ok(cb)) = (g.complex_length(&tol()), neg.complex_length(&tol())) {
            prop_assert!((ca.lambda - cb.lambda).abs() < 1e-12);
            prop_assert!(ComplexLength::theta_dist(ca.theta, cb.theta) < 1e-12);
        }
    }

    #[test]
    fn complex_length_is_a_class_function(g in element(), q in element()) {
        prop_assume!(!g.is_identity(1e-6));
        let conj = q.compose(&g, &tol()).compose(&q.inverse(&tol()), &tol());
        if let (Ok(a), Ok(b)) = (g.complex_length(&tol()), conj.complex_length(&tol())) {
            prop_assert!((a.lambda - b.lambda).abs() < 1e-9);
            prop_assert!(ComplexLength::theta_dist(a.theta, b.theta) < 1e-9);
        }
    }

    #[test]
    fn klein_round_trip(p in klein_point()) {
        let back = MinkowskiPoint::from_klein(&p.to_klein()).unwrap();
        prop_assert!((p.0 - back.0).norm() < 1e-12);
    }

    #[test]
    fn triangle_inequality(p in klein_point(), q in klein_point(), r in klein_point()) {
        prop_assert!(dist(&p, &r) <= dist(&p, &q) + dist(&q, &r) + 1e-9);
    }

    #[test]
    fn word_display_parse_round_trip(letters in proptest::collection::vec(
        (1i32..9, proptest::bool::ANY).prop_map(|(k, neg)| if neg { -k } else { k }), 0..12)
    ) {
        let w = Word(letters);
        prop_assert_eq!(Word::parse(&w.to_string()).unwrap(), w);
    }
}
