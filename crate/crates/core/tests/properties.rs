use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;

use frenetkit::discretize::{discretize_centered, discretize_circumscribed, CircleCurve, SampleMap, SmoothCurve};
use frenetkit::frames::{analyze, frenet_residual, IntrinsicData};
use frenetkit::ngon::{angle_from_kappa, kappa_from_angle, ngon_of_circle, vertex_curvatures, Convention};
use frenetkit::reconstruct::{congruent, reconstruct_curve, InitialPose};
use frenetkit::specfun::{fresnel, jacobi_sncndn, EllipticModulus};
use frenetkit::Vec3;

fn convention() -> impl Strategy<Value = Convention> {
    prop_oneof![
        Just(Convention::Inscribed),
        Just(Convention::Circumscribed),
        Just(Convention::Centered)
    ]
}

/// Alternating intrinsic data for an open refined curve: turning at even
/// entries, twisting at odd ones.
fn intrinsic() -> impl Strategy<Value = (f64, Vec<(f64, f64)>)> {
    (0.1f64..3.0, proptest::collection::vec((0.05f64..=FRAC_PI_2, -FRAC_PI_2..=FRAC_PI_2), 3..40))
}

fn build(ell: f64, pairs: &[(f64, f64)], c: Convention) -> IntrinsicData {
    let mut theta = Vec::new();
    let mut phi = Vec::new();
    for (i, &(t, p)) in pairs.iter().enumerate() {
        theta.push(t);
        phi.push(0.0);
        if i + 1 < pairs.len() {
            theta.push(0.0);
            phi.push(p);
        }
    }
    IntrinsicData::new(ell, c, theta, phi, false, 0).unwrap()
}

proptest! {
    #[test]
    fn kappa_angle_inverse(theta in 1e-6f64..=FRAC_PI_2, ell in 1e-3f64..1e3, c in convention()) {
        let k = kappa_from_angle(theta, ell, c).unwrap();
        let back = angle_from_kappa(k, ell, c).unwrap();
        prop_assert!((back - theta).abs() <= 1e-14 * theta.max(1.0));
    }

    #[test]
    fn conventions_are_ordered(theta in 1e-3f64..=FRAC_PI_2, ell in 1e-2f64..1e2) {
        let k = |c| kappa_from_angle(theta, ell, c).unwrap();
        prop_assert!(k(Convention::Inscribed) < k(Convention::Centered));
        prop_assert!(k(Convention::Centered) < k(Convention::Circumscribed));
    }

    #[test]
    fn regular_polygons_see_their_circle(r in 0.05f64..20.0, n in 3usize..200, phase in -PI..PI, c in convention()) {
        let poly = ngon_of_circle(r, n, c, [0.4, -1.3], phase).unwrap();
        for k in vertex_curvatures(&poly, c) {
            prop_assert!((k * r - 1.0).abs() <= 1e-11);
        }
    }

    #[test]
    fn frenet_equations_hold((ell, pairs) in intrinsic(), c in convention()) {
        let rc = reconstruct_curve(&build(ell, &pairs, c), &InitialPose::standard()).unwrap();
        for other in [Convention::Inscribed, Convention::Circumscribed, Convention::Centered] {
            let (ff, id) = analyze(&rc, other).unwrap();
            prop_assert!(frenet_residual(&ff, &id).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn reconstruct_then_analyze_recovers_angles((ell, pairs) in intrinsic(), c in convention()) {
        let id = build(ell, &pairs, c);
        let rc = reconstruct_curve(&id, &InitialPose::standard()).unwrap();
        let (_, back) = analyze(&rc, c).unwrap();
        for (a, b) in id.theta().iter().zip(back.theta()).chain(id.phi().iter().zip(back.phi())) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
        let again = reconstruct_curve(&back, &InitialPose::standard()).unwrap();
        let m = congruent(&rc, &again, 1e-9).unwrap();
        prop_assert!(m.congruent, "rms {}", m.rms);
    }

    #[test]
    fn circumscribed_edges_touch(r in 0.1f64..10.0, n in 3usize..64, phase in -PI..PI) {
        let c = CircleCurve { center: [1.0, 2.0], radius: r, phase };
        let poly = discretize_circumscribed(&c, &SampleMap::uniform(&c, n).unwrap()).unwrap();
        let pts = poly.points();
        for i in 0..pts.len() {
            let (a, b) = (pts[i], pts[(i + 1) % pts.len()]);
            let e = b - a;
            let w = Vec3::new(1.0, 2.0, 0.0) - a;
            let dist = (e.x * w.y - e.y * w.x).abs() / e.norm();
            prop_assert!((dist - r).abs() <= 1e-12 * r.max(1.0));
        }
    }

    #[test]
    fn centered_circles_keep_length(r in 0.1f64..10.0, n in 3usize..200) {
        let c = CircleCurve { center: [0.0, 0.0], radius: r, phase: 0.1 };
        let rc = discretize_centered(&c, n as f64 / c.length()).unwrap();
        prop_assert!((rc.total_length() / c.length() - 1.0).abs() <= 1e-12);
        prop_assert!(rc.midpoint_defect() <= 1e-12 * r);
    }

    #[test]
    fn fresnel_is_odd(s in -20f64..20.0) {
        let (a, b) = (fresnel(s), fresnel(-s));
        prop_assert!((a.c + b.c).abs() <= 1e-15 && (a.s + b.s).abs() <= 1e-15);
    }

    #[test]
    fn jacobi_identities(u in -30f64..30.0, k in 0f64..0.999) {
        let (sn, cn, dn) = jacobi_sncndn(u, EllipticModulus::new(k).unwrap());
        prop_assert!((sn * sn + cn * cn - 1.0).abs() <= 1e-13);
        prop_assert!((dn * dn + k * k * sn * sn - 1.0).abs() <= 1e-13);
    }
}
