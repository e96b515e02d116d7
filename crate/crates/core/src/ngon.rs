//! Regular polygons and circles under the three conventions.
//!
//! For a regular polygon with side `ell` and exterior angle `theta`:
//!
//! | convention    | polygon vs. circle          | curvature               |
//! |---------------|-----------------------------|-------------------------|
//! | inscribed     | vertices on the circle      | `(2/ell) sin(theta/2)`  |
//! | circumscribed | edges tangent to the circle | `(2/ell) tan(theta/2)`  |
//! | centered      | equal perimeter             | `theta/ell`             |

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{DiscreteCurve, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    Inscribed,
    Circumscribed,
    Centered,
}

impl Convention {
    pub const ALL: [Convention; 3] = [
        Convention::Inscribed,
        Convention::Circumscribed,
        Convention::Centered,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Convention::Inscribed => "inscribed",
            Convention::Circumscribed => "circumscribed",
            Convention::Centered => "centered",
        }
    }

    /// `ell * kappa` as a function of the angle: `2 sin(a/2)`, `2 tan(a/2)` or `a`.
    pub fn scaled(self, angle: f64) -> f64 {
        match self {
            Convention::Inscribed => 2.0 * (angle / 2.0).sin(),
            Convention::Circumscribed => 2.0 * (angle / 2.0).tan(),
            Convention::Centered => angle,
        }
    }

    fn unscaled(self, value: f64) -> f64 {
        match self {
            Convention::Inscribed => 2.0 * (value / 2.0).asin(),
            Convention::Circumscribed => 2.0 * (value / 2.0).atan(),
            Convention::Centered => value,
        }
    }

    /// Largest `ell * kappa` reachable with an angle in `[0, pi/2]`.
    pub fn scaled_bound(self) -> f64 {
        match self {
            Convention::Inscribed => 2.0 * FRAC_PI_4.sin(),
            Convention::Circumscribed => 2.0 * FRAC_PI_4.tan(),
            Convention::Centered => FRAC_PI_2,
        }
    }
}

impl std::fmt::Display for Convention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Convention {
    type Err = NgonError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "inscribed" => Ok(Convention::Inscribed),
            "circumscribed" => Ok(Convention::Circumscribed),
            "centered" => Ok(Convention::Centered),
            _ => Err(NgonError::UnknownConvention(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NgonError {
    #[error("angle {0} outside [0, pi/2]")]
    AngleOutOfRange(f64),
    #[error("length must be positive, got {0}")]
    NonpositiveLength(f64),
    #[error("curvature {kappa} with length {ell} is outside the {convention} image of [0, pi/2]")]
    OutOfImage {
        kappa: f64,
        ell: f64,
        convention: Convention,
    },
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    #[error("unknown convention {0:?}")]
    UnknownConvention(String),
}

const RANGE_SLACK: f64 = 1e-12;

fn check_angle(angle: f64, ell: f64) -> Result<(), NgonError> {
    if !(ell > 0.0) {
        return Err(NgonError::NonpositiveLength(ell));
    }
    if !(angle >= 0.0 && angle <= FRAC_PI_2 + RANGE_SLACK) {
        return Err(NgonError::AngleOutOfRange(angle));
    }
    Ok(())
}

/// Curvature of a vertex with turning angle `theta` in `[0, pi/2]`.
pub fn kappa_from_angle(theta: f64, ell: f64, c: Convention) -> Result<f64, NgonError> {
    check_angle(theta, ell)?;
    Ok(c.scaled(theta) / ell)
}

/// Torsion from a twisting angle; same formulas as the curvature.
pub fn tau_from_angle(phi: f64, ell: f64, c: Convention) -> Result<f64, NgonError> {
    check_angle(phi, ell)?;
    Ok(c.scaled(phi) / ell)
}

/// Inverse of [`kappa_from_angle`].
pub fn angle_from_kappa(kappa: f64, ell: f64, c: Convention) -> Result<f64, NgonError> {
    if !(ell > 0.0) {
        return Err(NgonError::NonpositiveLength(ell));
    }
    let scaled = kappa * ell;
    if !(scaled >= 0.0 && scaled <= c.scaled_bound() * (1.0 + RANGE_SLACK)) {
        return Err(NgonError::OutOfImage {
            kappa,
            ell,
            convention: c,
        });
    }
    Ok(c.unscaled(scaled.min(c.scaled_bound())))
}

/// Polygon curvature for any exterior angle in `[0, pi)`. This is the
/// formula applied directly to a polygon vertex, without the `[0, pi/2]`
/// restriction of the frame theory, so triangles and squares are covered.
pub fn polygon_kappa(theta: f64, ell: f64, c: Convention) -> f64 {
    c.scaled(theta) / ell
}

/// A regular polygon with `sides` sides of length `side_length`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NGonSpec {
    sides: f64,
    side_length: f64,
    center: [f64; 2],
    phase: f64,
}

impl NGonSpec {
    /// `sides` may be any real number above 2.
    pub fn new(sides: f64, side_length: f64, center: [f64; 2], phase: f64) -> Result<Self, NgonError> {
        if !(sides > 2.0) {
            return Err(NgonError::InvalidPolygon(format!("need N > 2, got {sides}")));
        }
        if !(side_length > 0.0) {
            return Err(NgonError::NonpositiveLength(side_length));
        }
        Ok(NGonSpec {
            sides,
            side_length,
            center,
            phase,
        })
    }

    pub fn sides(&self) -> f64 {
        self.sides
    }

    pub fn side_length(&self) -> f64 {
        self.side_length
    }

    pub fn center(&self) -> [f64; 2] {
        self.center
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn exterior_angle(&self) -> f64 {
        TAU / self.sides
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: [f64; 2],
    pub radius: f64,
}

/// The circle a polygon determines under convention `c`.
pub fn circle_of_ngon(spec: &NGonSpec, c: Convention) -> Circle {
    Circle {
        center: spec.center,
        radius: 1.0 / polygon_kappa(spec.exterior_angle(), spec.side_length, c),
    }
}

/// Side length of the regular `n`-gon paired with a circle of `radius`.
pub fn ngon_side(radius: f64, sides: f64, c: Convention) -> f64 {
    c.scaled(TAU / sides) * radius
}

/// The regular `sides`-gon paired with the circle under convention `c`.
/// Vertex 0 sits at polar angle `phase` around `center`.
pub fn ngon_of_circle(
    radius: f64,
    sides: usize,
    c: Convention,
    center: [f64; 2],
    phase: f64,
) -> Result<DiscreteCurve, NgonError> {
    if sides < 3 {
        return Err(NgonError::InvalidPolygon(format!("need at least 3 sides, got {sides}")));
    }
    if !(radius > 0.0) {
        return Err(NgonError::NonpositiveLength(radius));
    }
    let n = sides as f64;
    let side = ngon_side(radius, n, c);
    let vertex_radius = side / (2.0 * (PI / n).sin());
    let pts: Vec<[f64; 2]> = (0..sides)
        .map(|k| {
            let a = phase + TAU * k as f64 / n;
            [center[0] + vertex_radius * a.cos(), center[1] + vertex_radius * a.sin()]
        })
        .collect();
    DiscreteCurve::planar(&pts, true).map_err(|e| NgonError::InvalidPolygon(e.to_string()))
}

/// Signed turning angle at every vertex of a planar curve, and the mean of
/// the two adjacent edge lengths. Open curves omit their endpoints.
pub fn vertex_turning(curve: &DiscreteCurve) -> Vec<(usize, f64, f64)> {
    let n = curve.len();
    let range: Box<dyn Iterator<Item = usize>> = if curve.closed() {
        Box::new(0..n)
    } else {
        Box::new(1..n.saturating_sub(1))
    };
    range
        .map(|k| {
            let incoming = curve.edge((k + n - 1) % n);
            let outgoing = curve.edge(k);
            let turn = signed_angle_2d(incoming, outgoing);
            (k, turn, 0.5 * (incoming.norm() + outgoing.norm()))
        })
        .collect()
}

/// Polygon curvature at every vertex (signed by turning direction) using the
/// full edge length. For a regular polygon this is the curvature of the
/// paired circle.
pub fn vertex_curvatures(curve: &DiscreteCurve, c: Convention) -> Vec<f64> {
    vertex_turning(curve)
        .into_iter()
        .map(|(_, turn, ell)| turn.signum() * polygon_kappa(turn.abs(), ell, c))
        .collect()
}

pub(crate) fn signed_angle_2d(a: Vec3, b: Vec3) -> f64 {
    (a.x * b.y - a.y * b.x).atan2(a.x * b.x + a.y * b.y)
}

/// Offset of a sample from its curve in the centered discretization at
/// density `m` samples per unit length, as `(x - sin x) / (k sin x)` with
/// `x = k / m`. This is the distance between a vertex of the centered
/// polygon with half exterior angle `x` and its circle of radius `1/k`.
pub fn centered_offset(k: f64, m: f64) -> f64 {
    let x = k / m;
    if x.abs() < 1.0 {
        // x - sin x summed from its Taylor series to avoid cancellation
        let x2 = x * x;
        let mut term = x * x2 / 6.0;
        let mut sum = 0.0;
        for n in 2..=12 {
            sum += term;
            term *= -x2 / ((2 * n) as f64 * (2 * n + 1) as f64);
        }
        return sum / (k * x.sin());
    }
    (x - x.sin()) / (k * x.sin())
}

/// `|B_2n| / (2n)!` for `n = 1..=11`.
const COT_SERIES: [f64; 11] = [
    8.333333333333333e-2,
    1.388888888888889e-3,
    3.306878306878307e-5,
    8.267195767195768e-7,
    2.08767569878681e-8,
    5.284190138687493e-10,
    1.3382536530684679e-11,
    3.3896802963225827e-13,
    8.586062056277845e-15,
    2.174868698558062e-16,
    5.5090028283602295e-18,
];

/// Offset toward the center of curvature that makes equally spaced samples
/// of a circle the edge midpoints of its centered polygon:
/// `(1/k) (1 - (x/2) cot(x/2))` with `x = k / m`.
pub fn centered_offset_exact(k: f64, m: f64) -> f64 {
    let x = k / m;
    if x.abs() < 1.0 {
        // 1 - (x/2) cot(x/2) = sum |B_2n| x^2n / (2n)!
        let x2 = x * x;
        let sum = COT_SERIES.iter().rev().fold(0.0, |acc, c| acc * x2 + c) * x2;
        return sum / k;
    }
    let h = x / 2.0;
    (1.0 - h / h.tan()) / k
}
