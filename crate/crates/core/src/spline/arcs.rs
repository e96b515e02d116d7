//! Inscribed splining: one circular arc per original vertex, tangent to the
//! two adjacent half-edges at their midpoints.

use super::{Arc, Spline, SplineError, SplineSegment};
use crate::curve::{CurveError, RefinedCurve, Vec3};
use crate::ngon::signed_angle_2d;
use crate::tolerances::Tolerances;

pub fn spline_inscribed(rc: &RefinedCurve) -> Result<Spline, SplineError> {
    spline_inscribed_with(rc, &Tolerances::DEFAULT)
}

pub fn spline_inscribed_with(rc: &RefinedCurve, tol: &Tolerances) -> Result<Spline, SplineError> {
    if rc.dim() != 2 {
        return Err(SplineError::NonPlanar);
    }
    let lengths = rc.edge_lengths();
    let (min, max) = lengths
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &l| (a.min(l), b.max(l)));
    if max - min > tol.uniform_length_rel * max {
        return Err(CurveError::NonUniformLength { min, max }.into());
    }
    let n = rc.len();
    if n < 3 {
        return Err(SplineError::TooFewPoints { needed: 3, got: n });
    }
    let p = rc.points();
    let xy = |v: &Vec3| [v.x, v.y];
    let mut segments = Vec::new();
    for j in 0..n {
        if !rc.is_vertex(j) {
            continue;
        }
        let has_prev = rc.closed() || j > 0;
        let has_next = rc.closed() || j + 1 < n;
        if !has_prev {
            segments.push(SplineSegment::line(xy(&p[0]), xy(&p[1])));
            continue;
        }
        if !has_next {
            segments.push(SplineSegment::line(xy(&p[n - 2]), xy(&p[n - 1])));
            continue;
        }
        let a = p[(j + n - 1) % n];
        let b = p[j];
        let c = p[(j + 1) % n];
        segments.push(tangent_arc(a, b, c));
    }
    Ok(Spline::new(segments, rc.closed()))
}

/// Arc from `a` to `c` tangent to `ab` at `a` and to `bc` at `c`; assumes
/// `|ab| = |bc|`.
fn tangent_arc(a: Vec3, b: Vec3, c: Vec3) -> SplineSegment {
    let u = b - a;
    let w = c - b;
    let theta = signed_angle_2d(u, w);
    if theta.abs() < 1e-14 {
        return SplineSegment::line([a.x, a.y], [c.x, c.y]);
    }
    let ell = u.norm();
    let radius = ell / (0.5 * theta.abs()).tan();
    let side = theta.signum();
    let un = u / ell;
    let center = [a.x - side * radius * un.y, a.y + side * radius * un.x];
    SplineSegment::Arc(Arc {
        center,
        radius,
        start_angle: (a.y - center[1]).atan2(a.x - center[0]),
        sweep: theta,
    })
}
