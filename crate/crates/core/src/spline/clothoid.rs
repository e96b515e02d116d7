//! Clothoid segments and the G1 Hermite fitting problem.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{wrap_angle, Arc, Spline, SplineError, SplineSegment};
use crate::curve::DiscreteCurve;
use crate::quad::GaussLegendre;
use crate::specfun::fresnel;

/// Curve with curvature `kappa0 + sharpness * s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clothoid {
    pub start: [f64; 2],
    pub heading: f64,
    pub kappa0: f64,
    pub sharpness: f64,
    pub length: f64,
}

/// Below this value of `|sharpness| * length^2` points are integrated by
/// quadrature instead of through Fresnel integrals.
const FRESNEL_THRESHOLD: f64 = 0.1;

impl Clothoid {
    pub fn heading_at(&self, s: f64) -> f64 {
        self.heading + self.kappa0 * s + 0.5 * self.sharpness * s * s
    }

    pub fn point_at(&self, s: f64) -> [f64; 2] {
        let (dx, dy) = if self.sharpness.abs() * self.length * self.length >= FRESNEL_THRESHOLD {
            self.offset_fresnel(s)
        } else {
            self.offset_quadrature(s)
        };
        [self.start[0] + dx, self.start[1] + dy]
    }

    pub fn energy(&self) -> f64 {
        let (k, a, l) = (self.kappa0, self.sharpness, self.length);
        k * k * l + k * a * l * l + a * a * l * l * l / 3.0
    }

    /// Completing the square turns the heading into `c + sign(a) pi u^2 / 2`.
    fn offset_fresnel(&self, s: f64) -> (f64, f64) {
        let a = self.sharpness;
        let sigma = a.signum();
        let scale = (a.abs() / PI).sqrt();
        let shift = self.kappa0 / a;
        let u0 = scale * shift;
        let u1 = scale * (s + shift);
        let f0 = fresnel(u0);
        let f1 = fresnel(u1);
        let dc = f1.c - f0.c;
        let ds = sigma * (f1.s - f0.s);
        let phase = self.heading - self.kappa0 * self.kappa0 / (2.0 * a);
        let (sp, cp) = phase.sin_cos();
        let k = (PI / a.abs()).sqrt();
        (k * (cp * dc - sp * ds), k * (sp * dc + cp * ds))
    }

    pub(crate) fn offset_quadrature(&self, s: f64) -> (f64, f64) {
        let spread = (self.kappa0 * s).abs() + (0.5 * self.sharpness * s * s).abs();
        let panels = 1 + (spread / 0.5).ceil() as usize;
        let g = GaussLegendre::new(16);
        let x = g.composite(0.0, s, panels, |t| self.heading_at(t).cos());
        let y = g.composite(0.0, s, panels, |t| self.heading_at(t).sin());
        (x, y)
    }
}

/// `X = int_0^1 cos(a t^2 / 2 + b t + c) dt` and the matching sine
/// integral `Y`.
pub fn generalized_fresnel(a: f64, b: f64, c: f64) -> (f64, f64) {
    let spread = 0.5 * a.abs() + b.abs();
    let panels = 1 + (spread / 1.0).ceil() as usize;
    let g = GaussLegendre::new(16);
    let f = |t: f64| 0.5 * a * t * t + b * t + c;
    (g.composite(0.0, 1.0, panels, |t| f(t).cos()), g.composite(0.0, 1.0, panels, |t| f(t).sin()))
}

const MAX_ITER: usize = 200;

/// Clothoid (or arc, or line) from pose `(p0, t0)` to pose `(p1, t1)`.
///
/// In the chord frame the heading is `phi0 + (delta - A) t + A t^2` for
/// normalized arc length `t` in `[0, 1]`; the endpoint condition reduces to
/// a scalar equation in `A`. Among the admissible roots the one giving the
/// shortest curve is kept.
pub fn clothoid_g1_fit(p0: [f64; 2], t0: [f64; 2], p1: [f64; 2], t1: [f64; 2]) -> Result<SplineSegment, SplineError> {
    let (dx, dy) = (p1[0] - p0[0], p1[1] - p0[1]);
    let r = dx.hypot(dy);
    if !(r > 0.0) {
        return Err(SplineError::CoincidentPoints);
    }
    let psi = dy.atan2(dx);
    let th0 = t0[1].atan2(t0[0]);
    let th1 = t1[1].atan2(t1[0]);
    let phi0 = wrap_angle(th0 - psi);
    let phi1 = wrap_angle(th1 - psi);
    let delta = phi1 - phi0;
    const SNAP: f64 = 1e-13;
    if phi0.abs() < SNAP && phi1.abs() < SNAP {
        return Ok(SplineSegment::line(p0, p1));
    }
    if (phi0 + phi1).abs() < SNAP {
        let (x, _) = generalized_fresnel(0.0, delta, phi0);
        let length = r / x;
        let radius = length / delta.abs();
        let side = delta.signum();
        // center sits to the left of the start tangent for counterclockwise arcs
        let center = [p0[0] - side * radius * th0.sin(), p0[1] + side * radius * th0.cos()];
        let start_angle = (p0[1] - center[1]).atan2(p0[0] - center[0]);
        return Ok(SplineSegment::Arc(Arc {
            center,
            radius,
            start_angle,
            sweep: delta,
        }));
    }
    let g = |a: f64| generalized_fresnel(2.0 * a, delta - a, phi0).1;
    let a_guess = 3.0 * (phi0 + phi1);
    let mut roots: Vec<f64> = Vec::new();
    if let Some(a) = newton(&g, a_guess, delta, phi0) {
        roots.push(a);
    }
    let span = 4.0 * PI;
    let steps = 320;
    let h = 2.0 * span / steps as f64;
    let mut lo = a_guess - span;
    let mut glo = g(lo);
    for _ in 0..steps {
        let hi = lo + h;
        let ghi = g(hi);
        if glo == 0.0 {
            roots.push(lo);
        } else if glo * ghi < 0.0 {
            roots.push(bracketed(&g, lo, hi, glo, ghi));
        }
        lo = hi;
        glo = ghi;
    }
    let mut best: Option<(f64, f64)> = None;
    let mut worst_residual = f64::INFINITY;
    for a in roots {
        let (x, y) = generalized_fresnel(2.0 * a, delta - a, phi0);
        worst_residual = worst_residual.min(y.abs());
        if x <= 0.0 || y.abs() > 1e-13 {
            continue;
        }
        let length = r / x;
        if best.map_or(true, |(_, l)| length < l) {
            best = Some((a, length));
        }
    }
    let Some((a, length)) = best else {
        return Err(SplineError::NoConvergence {
            residual: worst_residual,
        });
    };
    Ok(SplineSegment::Clothoid(Clothoid {
        start: p0,
        heading: th0,
        kappa0: (delta - a) / length,
        sharpness: 2.0 * a / (length * length),
        length,
    }))
}

fn derivative(a: f64, delta: f64, phi0: f64) -> f64 {
    // d/dA of Y(2A, delta - A, phi0) = int (t^2 - t) cos(...) dt
    let g = GaussLegendre::new(16);
    let panels = 1 + (a.abs() + (delta - a).abs()).ceil() as usize;
    g.composite(0.0, 1.0, panels, |t| {
        (t * t - t) * (a * t * t + (delta - a) * t + phi0).cos()
    })
}

fn newton<G: Fn(f64) -> f64>(g: &G, mut a: f64, delta: f64, phi0: f64) -> Option<f64> {
    for _ in 0..MAX_ITER {
        let v = g(a);
        if v.abs() < 1e-15 {
            return Some(a);
        }
        let d = derivative(a, delta, phi0);
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let step = v / d;
        a -= step.clamp(-1.0, 1.0);
        if step.abs() < 1e-15 * a.abs().max(1.0) {
            return Some(a);
        }
    }
    None
}

/// Bisection safeguarded secant iteration on a sign-changing bracket.
fn bracketed<G: Fn(f64) -> f64>(g: &G, mut lo: f64, mut hi: f64, mut glo: f64, mut ghi: f64) -> f64 {
    for i in 0..MAX_ITER {
        let mut m = hi - ghi * (hi - lo) / (ghi - glo);
        if i % 3 == 2 || !(m > lo.min(hi) && m < lo.max(hi)) {
            m = 0.5 * (lo + hi);
        }
        let gm = g(m);
        if gm == 0.0 || (hi - lo).abs() < 1e-15 * m.abs().max(1.0) {
            return m;
        }
        if gm.signum() == glo.signum() {
            lo = m;
            glo = gm;
        } else {
            hi = m;
            ghi = gm;
        }
    }
    0.5 * (lo + hi)
}

/// Clothoid spline through the vertices of a planar curve. The tangent at a
/// vertex is the normalized sum of the adjacent unit edge directions; at an
/// open end it is the edge direction.
pub fn spline_circumscribed(dc: &DiscreteCurve) -> Result<Spline, SplineError> {
    if dc.dim() != 2 {
        return Err(SplineError::NonPlanar);
    }
    let n = dc.len();
    if n < 3 {
        return Err(SplineError::TooFewPoints { needed: 3, got: n });
    }
    let pts: Vec<[f64; 2]> = dc.points().iter().map(|p| [p.x, p.y]).collect();
    let unit = |i: usize| {
        let e = dc.edge(i);
        let l = e.norm();
        [e.x / l, e.y / l]
    };
    let tangents: Vec<[f64; 2]> = (0..n)
        .map(|k| {
            if !dc.closed() && k == 0 {
                return unit(0);
            }
            if !dc.closed() && k == n - 1 {
                return unit(n - 2);
            }
            let a = unit((k + n - 1) % n);
            let b = unit(k);
            let s = [a[0] + b[0], a[1] + b[1]];
            let l = s[0].hypot(s[1]);
            [s[0] / l, s[1] / l]
        })
        .collect();
    let spans = dc.edge_count();
    let segments = (0..spans)
        .map(|i| {
            let j = (i + 1) % n;
            clothoid_g1_fit(pts[i], tangents[i], pts[j], tangents[j]).map_err(|e| SplineError::Segment {
                index: i,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Spline::new(segments, dc.closed()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn end_residual(seg: &SplineSegment, p1: [f64; 2], t1: [f64; 2]) -> (f64, f64) {
        let e = seg.end_pose();
        let pos = (e.point[0] - p1[0]).hypot(e.point[1] - p1[1]);
        let ang = wrap_angle(e.heading - t1[1].atan2(t1[0])).abs();
        (pos, ang)
    }

    #[test]
    fn aligned_tangents_give_a_line() {
        let seg = clothoid_g1_fit([1.0, 1.0], [0.6, 0.8], [4.0, 5.0], [0.6, 0.8]).unwrap();
        match seg {
            SplineSegment::Line(l) => assert!((l.length - 5.0).abs() < 1e-15),
            other => panic!("expected line, got {other:?}"),
        }
    }

    #[test]
    fn symmetric_data_give_an_arc() {
        let a = 0.7_f64;
        let seg = clothoid_g1_fit([0.0, 0.0], [a.cos(), a.sin()], [2.0, 0.0], [a.cos(), -a.sin()]).unwrap();
        let SplineSegment::Arc(arc) = &seg else {
            panic!("expected arc, got {seg:?}");
        };
        assert!((arc.radius - 1.0 / a.sin()).abs() < 1e-12);
        let (pos, ang) = end_residual(&seg, [2.0, 0.0], [a.cos(), -a.sin()]);
        assert!(pos < 1e-12 && ang < 1e-12);
    }

    #[test]
    fn fresnel_and_quadrature_evaluation_agree() {
        let c = Clothoid {
            start: [0.3, -0.2],
            heading: 0.4,
            kappa0: -0.8,
            sharpness: 1.3,
            length: 2.5,
        };
        for i in 0..=10 {
            let s = 0.25 * i as f64;
            let (x0, y0) = c.offset_fresnel(s);
            let (x1, y1) = c.offset_quadrature(s);
            assert!((x0 - x1).abs() < 1e-13 && (y0 - y1).abs() < 1e-13, "s={s}");
        }
    }

    #[test]
    fn generic_fit_is_exact() {
        let p0 = [0.0, 0.0];
        let p1 = [3.0, 1.0];
        let t0 = [1.0, 0.0];
        let t1 = [0.0f64.cos(), 1.0f64.sin()];
        let t1 = {
            let l = t1[0].hypot(t1[1]);
            [t1[0] / l, t1[1] / l]
        };
        let seg = clothoid_g1_fit(p0, t0, p1, t1).unwrap();
        assert_eq!(seg.type_name(), "clothoid");
        let (pos, ang) = end_residual(&seg, p1, t1);
        assert!(pos < 1e-10 && ang < 1e-12, "{pos} {ang}");
    }

    #[test]
    fn random_pose_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let p1: [f64; 2] = [rng.gen_range(0.2..3.0), rng.gen_range(-2.0..2.0)];
            let chord = p1[1].atan2(p1[0]);
            let a0 = chord + rng.gen_range(-PI / 2.0..PI / 2.0);
            let a1 = chord + rng.gen_range(-PI / 2.0..PI / 2.0);
            let t0 = [a0.cos(), a0.sin()];
            let t1 = [a1.cos(), a1.sin()];
            let seg = clothoid_g1_fit([0.0, 0.0], t0, p1, t1).unwrap();
            let (pos, ang) = end_residual(&seg, p1, t1);
            assert!(pos < 1e-9 && ang < 1e-9, "{seg:?}: {pos} {ang}");
            let st = seg.start_pose();
            assert!(st.point[0].hypot(st.point[1]) < 1e-15);
            assert!(wrap_angle(st.heading - a0).abs() < 1e-15);
        }
    }

    #[test]
    fn energy_matches_quadrature() {
        let c = Clothoid {
            start: [0.0, 0.0],
            heading: 0.0,
            kappa0: 0.5,
            sharpness: -0.3,
            length: 2.0,
        };
        let g = GaussLegendre::new(8);
        let e = g.integrate(0.0, 2.0, |s| (0.5 - 0.3 * s).powi(2));
        assert!((c.energy() - e).abs() < 1e-14);
    }

    #[test]
    fn hexagon_gives_congruent_arcs() {
        let pts: Vec<[f64; 2]> = (0..6)
            .map(|k| {
                let a = PI / 3.0 * k as f64;
                [a.cos(), a.sin()]
            })
            .collect();
        let dc = DiscreteCurve::planar(&pts, true).unwrap();
        let sp = spline_circumscribed(&dc).unwrap();
        assert_eq!(sp.segments.len(), 6);
        for s in &sp.segments {
            let SplineSegment::Arc(a) = s else { panic!("{s:?}") };
            assert!((a.radius - 1.0).abs() < 1e-12);
        }
        sp.check_g1(1e-9, 1e-9).unwrap();
    }

    #[test]
    fn collinear_points_give_lines() {
        let dc = DiscreteCurve::planar(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [4.0, 4.0]], false).unwrap();
        let sp = spline_circumscribed(&dc).unwrap();
        assert!(sp.segments.iter().all(|s| s.type_name() == "line"));
        assert_eq!(sp.energy(), 0.0);
    }
}
