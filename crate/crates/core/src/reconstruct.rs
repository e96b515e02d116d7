//! Rebuilding a curve from its intrinsic data, and congruence testing.
//!
//! Starting from a pose `(origin, T, N, B)` for edge 0, each step advances
//! the position by `ell * T` and then moves the frame to the next edge: a
//! rotation by `theta_j` about `B` at turning indices, or by `phi_j` about
//! `T` at twisting indices. Curves with the same lengths and angles are
//! therefore congruent, and [`congruent`] checks that numerically.

use nalgebra::{Matrix3, SVD};
use thiserror::Error;

use crate::curve::{RefinedCurve, Vec3};
use crate::frames::{IntrinsicData, Triad};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReconstructError {
    #[error("initial frame is not orthonormal and right-handed (defect {0:e})")]
    BadPose(f64),
    #[error("need {needed} angle entries for {steps} steps, got {got}")]
    InvalidAngles { steps: usize, needed: usize, got: usize },
    #[error("point counts differ: {0} vs {1}")]
    CountMismatch(usize, usize),
    #[error("cannot align empty curves")]
    Empty,
}

/// Start point and edge-0 frame of a reconstruction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialPose {
    origin: Vec3,
    frame: Triad,
}

impl InitialPose {
    pub fn new(origin: Vec3, t: Vec3, n: Vec3, b: Vec3) -> Result<Self, ReconstructError> {
        let frame = Triad { t, n, b };
        let defect = frame.defect();
        if defect > Tolerances::DEFAULT.orthonormal {
            return Err(ReconstructError::BadPose(defect));
        }
        Ok(InitialPose { origin, frame })
    }

    /// Pose from a tangent and a normal; the binormal is `t x n`.
    pub fn from_tangent_normal(origin: Vec3, t: Vec3, n: Vec3) -> Result<Self, ReconstructError> {
        Self::new(origin, t, n, t.cross(&n))
    }

    /// Origin at zero, `T = x`, `N = y`, `B = z`.
    pub fn standard() -> Self {
        InitialPose {
            origin: Vec3::zeros(),
            frame: Triad {
                t: Vec3::x(),
                n: Vec3::y(),
                b: Vec3::z(),
            },
        }
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn frame(&self) -> Triad {
        self.frame
    }
}

/// Frames are projected back onto the rotation group this often.
const REORTHONORMALIZE_EVERY: usize = 64;

/// Runs `n_steps` steps of the reconstruction recurrence and returns the
/// `n_steps + 1` visited points as an open refined curve.
///
/// Step `j` uses angle entry `j - 1` to move onto edge `j`, so `n_steps - 1`
/// entries are needed; closed data wraps around.
pub fn reconstruct(id: &IntrinsicData, pose: &InitialPose, n_steps: usize) -> Result<RefinedCurve, ReconstructError> {
    let needed = n_steps.saturating_sub(1);
    if id.is_empty() && needed > 0 || (!id.closed() && id.len() < needed) {
        return Err(ReconstructError::InvalidAngles {
            steps: n_steps,
            needed,
            got: id.len(),
        });
    }
    let ell = id.ell();
    let mut points = Vec::with_capacity(n_steps + 1);
    let mut p = pose.origin;
    let mut f = pose.frame;
    points.push(p);
    for step in 0..n_steps {
        p += f.t * ell;
        points.push(p);
        if step + 1 == n_steps {
            break;
        }
        let j = step % id.len();
        f = if id.is_turning(j) {
            turn(f, id.theta()[j])
        } else {
            twist(f, id.phi()[j])
        };
        if (step + 1) % REORTHONORMALIZE_EVERY == 0 {
            f = reorthonormalize(f);
        }
    }
    let planar = pose.frame.b == Vec3::z() && pose.origin.z == 0.0 && id.phi().iter().all(|&a| a == 0.0);
    let dim = if planar { 2 } else { 3 };
    if planar {
        points.iter_mut().for_each(|q| q.z = 0.0);
    }
    Ok(RefinedCurve::from_parts(dim, points, ell, false, id.first_index()))
}

/// Reconstructs the full curve described by `id`: closed data yields a
/// closed curve with one point per angle entry, open data an open curve
/// with one edge more than there are entries.
pub fn reconstruct_curve(id: &IntrinsicData, pose: &InitialPose) -> Result<RefinedCurve, ReconstructError> {
    if id.closed() {
        let open = reconstruct(id, pose, id.len())?;
        let mut pts = open.points().to_vec();
        pts.pop();
        Ok(RefinedCurve::from_parts(open.dim(), pts, id.ell(), true, id.first_index()))
    } else {
        reconstruct(id, pose, id.len() + 1)
    }
}

/// Rotation about `B` by `theta`.
pub(crate) fn turn(f: Triad, theta: f64) -> Triad {
    let (s, c) = theta.sin_cos();
    Triad {
        t: f.t * c + f.n * s,
        n: f.n * c - f.t * s,
        b: f.b,
    }
}

/// Rotation about `T` by `phi`.
pub(crate) fn twist(f: Triad, phi: f64) -> Triad {
    let (s, c) = phi.sin_cos();
    Triad {
        t: f.t,
        n: f.n * c + f.b * s,
        b: f.b * c - f.n * s,
    }
}

/// Nearest rotation (polar factor) to the matrix with columns `t, n, b`.
fn reorthonormalize(f: Triad) -> Triad {
    let m = Matrix3::from_columns(&[f.t, f.n, f.b]);
    let svd = SVD::new(m, true, true);
    let r = svd.u.unwrap() * svd.v_t.unwrap();
    Triad {
        t: r.column(0).into(),
        n: r.column(1).into(),
        b: r.column(2).into(),
    }
}

/// Result of a least-squares rigid alignment of `a` onto `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Congruence {
    pub congruent: bool,
    pub rms: f64,
    pub rotation: Matrix3<f64>,
    pub translation: Vec3,
}

/// Best proper rigid motion `x -> R x + t` taking the points of `a` onto the
/// corresponding points of `b` (reflections excluded).
pub fn align(a: &[Vec3], b: &[Vec3]) -> Result<(Matrix3<f64>, Vec3, f64), ReconstructError> {
    if a.len() != b.len() {
        return Err(ReconstructError::CountMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(ReconstructError::Empty);
    }
    let n = a.len() as f64;
    let ca = a.iter().sum::<Vec3>() / n;
    let cb = b.iter().sum::<Vec3>() / n;
    let mut h = Matrix3::zeros();
    for (p, q) in a.iter().zip(b) {
        h += (p - ca) * (q - cb).transpose();
    }
    let svd = SVD::new(h, true, true);
    let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    let v = v_t.transpose();
    let d = (v * u.transpose()).determinant().signum();
    let r = v * Matrix3::from_diagonal(&Vec3::new(1.0, 1.0, d)) * u.transpose();
    let t = cb - r * ca;
    let sq: f64 = a.iter().zip(b).map(|(p, q)| (r * p + t - q).norm_squared()).sum();
    Ok((r, t, (sq / n).sqrt()))
}

/// Whether two refined curves agree up to a proper rigid motion.
pub fn congruent(a: &RefinedCurve, b: &RefinedCurve, tol: f64) -> Result<Congruence, ReconstructError> {
    let (rotation, translation, rms) = align(a.points(), b.points())?;
    Ok(Congruence {
        congruent: rms <= tol,
        rms,
        rotation,
        translation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{refine, DiscreteCurve};
    use crate::frames::{analyze, frame_field, frenet_residual, turn_twist_angles};
    use crate::ngon::Convention;
    use nalgebra::{Rotation3, Unit};
    use std::f64::consts::PI;

    #[test]
    fn zero_angles_give_a_line() {
        let id = IntrinsicData::new(0.5, Convention::Inscribed, vec![0.0; 9], vec![0.0; 9], false, 0).unwrap();
        let rc = reconstruct(&id, &InitialPose::standard(), 10).unwrap();
        assert_eq!(rc.len(), 11);
        for (i, p) in rc.points().iter().enumerate() {
            assert!((p - Vec3::x() * (0.5 * i as f64)).norm() < 1e-15);
        }
    }

    #[test]
    fn hexagon_closes() {
        let theta: Vec<f64> = (0..11).map(|j| if j % 2 == 0 { PI / 3.0 } else { 0.0 }).collect();
        let id = IntrinsicData::new(0.5, Convention::Inscribed, theta, vec![0.0; 11], false, 0).unwrap();
        let rc = reconstruct(&id, &InitialPose::standard(), 12).unwrap();
        assert_eq!(rc.len(), 13);
        assert!((rc.points()[12] - rc.points()[0]).norm() < 1e-12);
        assert_eq!(rc.dim(), 2);
    }

    #[test]
    fn turn_and_twist_are_rotations() {
        let f = InitialPose::standard().frame();
        let g = twist(turn(f, 0.7), -0.4);
        assert!(g.defect() < 1e-15);
        let rot = Rotation3::from_axis_angle(&Unit::new_normalize(f.b), 0.7);
        let h = turn(f, 0.7);
        assert!((rot * f.t - h.t).norm() < 1e-15);
        assert!((rot * f.n - h.n).norm() < 1e-15);
        let rot = Rotation3::from_axis_angle(&Unit::new_normalize(h.t), -0.4);
        assert!((rot * h.b - g.b).norm() < 1e-15);
    }

    #[test]
    fn helix_round_trip_is_exact() {
        let n = 200;
        let theta: Vec<f64> = (0..n - 1).map(|j| if j % 2 == 0 { 0.3 } else { 0.0 }).collect();
        let phi: Vec<f64> = (0..n - 1).map(|j| if j % 2 == 1 { 0.3 } else { 0.0 }).collect();
        let id = IntrinsicData::new(1.0, Convention::Centered, theta.clone(), phi.clone(), false, 0).unwrap();
        let rc = reconstruct(&id, &InitialPose::standard(), n).unwrap();
        let ff = frame_field(&rc).unwrap();
        let tt = turn_twist_angles(&ff);
        for j in 0..theta.len() {
            assert!((tt.theta[j] - theta[j]).abs() < 1e-10);
            assert!((tt.phi[j] - phi[j]).abs() < 1e-10);
        }
        let (ff, id2) = analyze(&rc, Convention::Centered).unwrap();
        assert!(frenet_residual(&ff, &id2).unwrap() < 1e-12);
        assert!((id2.kappa()[0] - 0.3).abs() < 1e-12);
        assert!((id2.tau()[1] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn congruence_under_rigid_motion() {
        let id = IntrinsicData::new(
            1.0,
            Convention::Inscribed,
            (0..39).map(|j| if j % 2 == 0 { 0.2 + 0.01 * j as f64 } else { 0.0 }).collect(),
            (0..39).map(|j| if j % 2 == 1 { -0.3 + 0.015 * j as f64 } else { 0.0 }).collect(),
            false,
            0,
        )
        .unwrap();
        let rc = reconstruct(&id, &InitialPose::standard(), 40).unwrap();
        let rot = Rotation3::from_axis_angle(&Unit::new_normalize(Vec3::new(0.3, -1.0, 2.0)), 37f64.to_radians());
        let moved: Vec<Vec3> = rc.points().iter().map(|p| rot * p + Vec3::new(1.0, 2.0, -3.0)).collect();
        let other = RefinedCurve::from_parts(3, moved, 1.0, false, 0);
        let c = congruent(&rc, &other, 1e-12).unwrap();
        assert!(c.congruent, "rms {}", c.rms);
        assert!(c.rms <= 1e-12);
        assert!((c.rotation - rot.matrix()).norm() < 1e-12);
    }

    #[test]
    fn mirror_image_is_not_congruent() {
        let id = IntrinsicData::new(
            1.0,
            Convention::Inscribed,
            (0..19).map(|j| if j % 2 == 0 { 0.4 } else { 0.0 }).collect(),
            (0..19).map(|j| if j % 2 == 1 { 0.3 } else { 0.0 }).collect(),
            false,
            0,
        )
        .unwrap();
        let rc = reconstruct(&id, &InitialPose::standard(), 20).unwrap();
        let mirrored: Vec<Vec3> = rc.points().iter().map(|p| Vec3::new(p.x, p.y, -p.z)).collect();
        let other = RefinedCurve::from_parts(3, mirrored, 1.0, false, 0);
        assert!(!congruent(&rc, &other, 1e-6).unwrap().congruent);
    }

    #[test]
    fn hexagon_vs_pentagon() {
        let poly = |n: usize| {
            let pts: Vec<[f64; 2]> = (0..n)
                .map(|k| {
                    let a = 2.0 * PI * k as f64 / n as f64;
                    [a.cos(), a.sin()]
                })
                .collect();
            refine(&DiscreteCurve::planar(&pts, true).unwrap()).unwrap()
        };
        let hex = poly(6);
        let pent = poly(5);
        assert!(matches!(congruent(&hex, &pent, 1e-9), Err(ReconstructError::CountMismatch(12, 10))));
        let hex_pts = &hex.points()[..10];
        let (_, _, rms) = align(hex_pts, pent.points()).unwrap();
        assert!(rms > 1e-3);
    }

    #[test]
    fn closed_round_trip() {
        let pts: Vec<[f64; 2]> = (0..7)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / 7.0;
                [2.0 * a.cos(), 2.0 * a.sin()]
            })
            .collect();
        let rc = refine(&DiscreteCurve::planar(&pts, true).unwrap()).unwrap();
        let (ff, id) = analyze(&rc, Convention::Circumscribed).unwrap();
        let e = ff.edges()[0];
        let pose = InitialPose::new(rc.points()[0], e.t, e.n, e.b).unwrap();
        let back = reconstruct_curve(&id, &pose).unwrap();
        assert!(back.closed());
        assert_eq!(back.len(), rc.len());
        let c = congruent(&rc, &back, 1e-9).unwrap();
        assert!(c.rms < 1e-13, "{}", c.rms);
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!(
            InitialPose::new(Vec3::zeros(), Vec3::x(), Vec3::x(), Vec3::z()),
            Err(ReconstructError::BadPose(_))
        ));
        // left-handed triad
        assert!(matches!(
            InitialPose::new(Vec3::zeros(), Vec3::x(), Vec3::y(), -Vec3::z()),
            Err(ReconstructError::BadPose(_))
        ));
        let id = IntrinsicData::new(1.0, Convention::Inscribed, vec![0.0; 3], vec![0.0; 3], false, 0).unwrap();
        assert!(matches!(
            reconstruct(&id, &InitialPose::standard(), 10),
            Err(ReconstructError::InvalidAngles { .. })
        ));
    }

    #[test]
    fn long_reconstruction_stays_orthonormal() {
        let n = 10_000;
        let theta: Vec<f64> = (0..n).map(|j| if j % 2 == 0 { 0.31 } else { 0.0 }).collect();
        let phi: Vec<f64> = (0..n).map(|j| if j % 2 == 1 { 0.17 } else { 0.0 }).collect();
        let id = IntrinsicData::new(1.0, Convention::Inscribed, theta, phi, true, 0).unwrap();
        let rc = reconstruct(&id, &InitialPose::standard(), n).unwrap();
        let ff = crate::frames::edge_frames(&rc).unwrap();
        let worst = ff.edges().iter().map(|f| f.defect()).fold(0.0, f64::max);
        assert!(worst < 1e-12, "{worst}");
    }
}
