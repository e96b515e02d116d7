//! Geometric splines of planar discrete curves.
//!
//! Each discretization convention has a matching spline: circular arcs
//! through the edge midpoints ([`spline_inscribed`]), clothoids through the
//! vertices ([`spline_circumscribed`]) and elastica through offset points
//! ([`spline_centered`]). Segments are stored in closed form where one
//! exists; elastica carry a sampled turning-angle profile.

mod arcs;
mod clothoid;
mod elastica;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::CurveError;
use crate::specfun::SpecfunError;

pub use arcs::{spline_inscribed, spline_inscribed_with};
pub use clothoid::{clothoid_g1_fit, generalized_fresnel, spline_circumscribed, Clothoid};
pub use elastica::{
    elastica_bvp, elastica_bvp_with, sogo_turning_angles, spline_centered, spline_centered_with, Elastica,
    ElasticaOptions, ElasticaProblem, ElasticaSolution,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SplineError {
    #[error("spline needs a planar curve")]
    NonPlanar,
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("start and end points coincide")]
    CoincidentPoints,
    #[error("clothoid fit did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },
    #[error("segment {index}: {source}")]
    Segment {
        index: usize,
        #[source]
        source: Box<SplineError>,
    },
    #[error("length {length} is shorter than the chord {chord}")]
    Infeasible { length: f64, chord: f64 },
    #[error("G1 violation at joint {joint}: position gap {position:e}, tangent gap {angle:e}")]
    G1Violation { joint: usize, position: f64, angle: f64 },
    #[error("invalid segment: {0}")]
    InvalidSegment(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
}

/// Position and heading (angle of the unit tangent).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub point: [f64; 2],
    pub heading: f64,
}

impl Pose {
    pub fn new(point: [f64; 2], heading: f64) -> Self {
        Pose { point, heading }
    }

    pub fn tangent(&self) -> [f64; 2] {
        [self.heading.cos(), self.heading.sin()]
    }
}

/// Straight segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub start: [f64; 2],
    /// Unit direction.
    pub direction: [f64; 2],
    pub length: f64,
}

/// Circular arc. `sweep` is signed: positive sweeps turn counterclockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub center: [f64; 2],
    pub radius: f64,
    /// Polar angle of the start point seen from the center.
    pub start_angle: f64,
    pub sweep: f64,
}

impl Arc {
    pub fn length(&self) -> f64 {
        self.radius * self.sweep.abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SplineSegment {
    Line(Line),
    Arc(Arc),
    Clothoid(Clothoid),
    Elastica(Elastica),
}

impl SplineSegment {
    pub fn length(&self) -> f64 {
        match self {
            SplineSegment::Line(l) => l.length,
            SplineSegment::Arc(a) => a.length(),
            SplineSegment::Clothoid(c) => c.length,
            SplineSegment::Elastica(e) => e.length,
        }
    }

    /// Point at arc length `s` from the start, `0 <= s <= length`.
    pub fn point_at(&self, s: f64) -> [f64; 2] {
        match self {
            SplineSegment::Line(l) => [l.start[0] + s * l.direction[0], l.start[1] + s * l.direction[1]],
            SplineSegment::Arc(a) => {
                let ang = a.start_angle + a.sweep.signum() * s / a.radius;
                [a.center[0] + a.radius * ang.cos(), a.center[1] + a.radius * ang.sin()]
            }
            SplineSegment::Clothoid(c) => c.point_at(s),
            SplineSegment::Elastica(e) => e.point_at(s),
        }
    }

    pub fn heading_at(&self, s: f64) -> f64 {
        match self {
            SplineSegment::Line(l) => l.direction[1].atan2(l.direction[0]),
            SplineSegment::Arc(a) => a.start_angle + a.sweep.signum() * (s / a.radius + 0.5 * PI),
            SplineSegment::Clothoid(c) => c.heading_at(s),
            SplineSegment::Elastica(e) => e.heading_at(s),
        }
    }

    /// Signed curvature at arc length `s`.
    pub fn curvature_at(&self, s: f64) -> f64 {
        match self {
            SplineSegment::Line(_) => 0.0,
            SplineSegment::Arc(a) => a.sweep.signum() / a.radius,
            SplineSegment::Clothoid(c) => c.kappa0 + c.sharpness * s,
            SplineSegment::Elastica(e) => e.curvature_at(s),
        }
    }

    pub fn start_pose(&self) -> Pose {
        Pose::new(self.point_at(0.0), self.heading_at(0.0))
    }

    pub fn end_pose(&self) -> Pose {
        let l = self.length();
        Pose::new(self.point_at(l), self.heading_at(l))
    }

    /// Bending energy `int kappa^2 ds`.
    pub fn energy(&self) -> f64 {
        match self {
            SplineSegment::Line(_) => 0.0,
            SplineSegment::Arc(a) => a.length() / (a.radius * a.radius),
            SplineSegment::Clothoid(c) => c.energy(),
            SplineSegment::Elastica(e) => e.energy(),
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            SplineSegment::Line(_) => "line",
            SplineSegment::Arc(_) => "arc",
            SplineSegment::Clothoid(_) => "clothoid",
            SplineSegment::Elastica(_) => "elastica",
        }
    }

    pub(crate) fn line(start: [f64; 2], end: [f64; 2]) -> SplineSegment {
        let d = [end[0] - start[0], end[1] - start[1]];
        let length = d[0].hypot(d[1]);
        SplineSegment::Line(Line {
            start,
            direction: [d[0] / length, d[1] / length],
            length,
        })
    }

    /// Checks the variant invariants (positive length and radius, grid size).
    pub fn validate(&self) -> Result<(), SplineError> {
        let bad = |m: &str| Err(SplineError::InvalidSegment(m.to_string()));
        if !(self.length() > 0.0) || !self.length().is_finite() {
            return bad("length must be positive");
        }
        match self {
            SplineSegment::Line(l) if ((l.direction[0].hypot(l.direction[1])) - 1.0).abs() > 1e-9 => {
                bad("line direction must be a unit vector")
            }
            SplineSegment::Arc(a) if !(a.radius > 0.0) => bad("arc radius must be positive"),
            SplineSegment::Elastica(e) if e.theta.len() < 17 => bad("elastica needs at least 16 cells"),
            _ => Ok(()),
        }
    }
}

/// A chain of segments, optionally closed.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Spline {
    pub segments: Vec<SplineSegment>,
    #[serde(default)]
    pub closed: bool,
}

/// Position and tangent discontinuities of a spline, over all joints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct G1Report {
    pub worst_joint: Option<usize>,
    pub position: f64,
    pub angle: f64,
}

impl Spline {
    pub fn new(segments: Vec<SplineSegment>, closed: bool) -> Self {
        Spline { segments, closed }
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(SplineSegment::length).sum()
    }

    pub fn energy(&self) -> f64 {
        self.segments.iter().map(SplineSegment::energy).sum()
    }

    /// Largest position and heading gaps across joints. Joint `i` connects
    /// segment `i` to segment `i + 1` (wrapping for closed splines).
    pub fn g1_report(&self) -> G1Report {
        let n = self.segments.len();
        let joints = if self.closed { n } else { n.saturating_sub(1) };
        let mut rep = G1Report {
            worst_joint: None,
            position: 0.0,
            angle: 0.0,
        };
        for j in 0..joints {
            let a = self.segments[j].end_pose();
            let b = self.segments[(j + 1) % n].start_pose();
            let pos = (a.point[0] - b.point[0]).hypot(a.point[1] - b.point[1]);
            let ang = wrap_angle(a.heading - b.heading).abs();
            if pos > rep.position || ang > rep.angle {
                rep.worst_joint = Some(j);
            }
            rep.position = rep.position.max(pos);
            rep.angle = rep.angle.max(ang);
        }
        rep
    }

    pub fn check_g1(&self, position_tol: f64, angle_tol: f64) -> Result<(), SplineError> {
        let rep = self.g1_report();
        match rep.worst_joint {
            Some(joint) if rep.position > position_tol || rep.angle > angle_tol => Err(SplineError::G1Violation {
                joint,
                position: rep.position,
                angle: rep.angle,
            }),
            _ => Ok(()),
        }
    }
}

/// Maps an angle to `(-pi, pi]`.
pub(crate) fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arc_evaluation() {
        let seg = SplineSegment::Arc(Arc {
            center: [0.0, 0.0],
            radius: 2.0,
            start_angle: 0.0,
            sweep: PI / 2.0,
        });
        assert!((seg.length() - PI).abs() < 1e-15);
        let e = seg.end_pose();
        assert!((e.point[0]).abs() < 1e-15 && (e.point[1] - 2.0).abs() < 1e-15);
        assert!((wrap_angle(e.heading - PI)).abs() < 1e-15);
        assert!((seg.energy() - PI / 4.0).abs() < 1e-15);
        let cw = SplineSegment::Arc(Arc {
            center: [0.0, 0.0],
            radius: 1.0,
            start_angle: PI / 2.0,
            sweep: -PI / 2.0,
        });
        let s = cw.start_pose();
        assert!(wrap_angle(s.heading).abs() < 1e-15);
        assert_eq!(cw.curvature_at(0.3), -1.0);
    }

    #[test]
    fn json_tagging() {
        let sp = Spline::new(vec![SplineSegment::line([0.0, 0.0], [3.0, 4.0])], false);
        let js = serde_json::to_string(&sp).unwrap();
        assert!(js.contains("\"type\":\"line\""), "{js}");
        let back: Spline = serde_json::from_str(&js).unwrap();
        assert_eq!(back, sp);
        let parsed: Spline = serde_json::from_str(
            r#"{"segments":[{"type":"arc","center":[0,0],"radius":1,"start_angle":0,"sweep":1}]}"#,
        )
        .unwrap();
        assert!(!parsed.closed);
        assert_eq!(parsed.segments[0].type_name(), "arc");
    }

    #[test]
    fn g1_detects_gaps() {
        let sp = Spline::new(
            vec![
                SplineSegment::line([0.0, 0.0], [1.0, 0.0]),
                SplineSegment::line([1.0, 0.0], [1.0, 1.0]),
            ],
            false,
        );
        let rep = sp.g1_report();
        assert_eq!(rep.position, 0.0);
        assert!((rep.angle - PI / 2.0).abs() < 1e-15);
        assert!(sp.check_g1(1e-9, 1e-9).is_err());
    }

    #[test]
    fn validation() {
        let bad = SplineSegment::Arc(Arc {
            center: [0.0, 0.0],
            radius: -1.0,
            start_angle: 0.0,
            sweep: 1.0,
        });
        assert!(bad.validate().is_err());
        assert!(SplineSegment::line([0.0, 0.0], [1.0, 0.0]).validate().is_ok());
    }
}
