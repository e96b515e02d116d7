//! Inscribed, circumscribed and centered discretizations of smooth planar
//! curves.
//!
//! Smooth curves are arc-length parametrized. The inscribed discretization
//! puts vertices on the curve, the circumscribed one intersects consecutive
//! tangent lines, and the centered one places edge midpoints near the curve
//! so that the polygon has the curve's length.

use std::f64::consts::PI;
use std::str::FromStr;

use thiserror::Error;

use crate::curve::{unrefine, DiscreteCurve, RefinedCurve, Vec3};
use crate::ngon::{centered_offset, centered_offset_exact};
use crate::quad::GaussLegendre;
use crate::spline::Clothoid;
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiscretizeError {
    #[error("sample {value} outside the curve domain [0, {length}]")]
    OutOfDomain { value: f64, length: f64 },
    #[error("sample map not strictly increasing at index {index}")]
    NotIncreasing { index: usize },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("tangents at samples {index} and {next} are parallel")]
    ParallelTangents { index: usize, next: usize },
    #[error("inflection at s = {parameter} is not a sample")]
    MissingInflectionSample { parameter: f64 },
    #[error("no sample strictly between the inflections at {a} and {b}")]
    NoSampleBetweenInflections { a: f64, b: f64 },
    #[error("more than {max} inflections")]
    InfinitelyManyInflections { max: usize },
    #[error("curvature is not positive at sample {index}")]
    NonConvexCurve { index: usize },
    #[error("density too small at sample {index}{}", min_density.map(|m| format!(", need at least {m}")).unwrap_or_default())]
    MTooSmall { index: usize, min_density: Option<f64> },
    #[error("density must be positive and finite")]
    BadDensity,
    #[error("bad curve specification: {0}")]
    BadCurveSpec(String),
}

/// An arc-length parametrized planar curve.
pub trait SmoothCurve {
    fn length(&self) -> f64;
    fn closed(&self) -> bool;
    fn position(&self, s: f64) -> [f64; 2];
    fn tangent(&self, s: f64) -> [f64; 2];
    /// Signed curvature; positive when turning counterclockwise.
    fn curvature(&self, s: f64) -> f64;
    /// `position(s + ds) - position(s)`. Curves with a closed form override
    /// this to avoid cancellation for short chords.
    fn chord(&self, s: f64, ds: f64) -> [f64; 2] {
        let a = self.position(s);
        let b = self.position(s + ds);
        [b[0] - a[0], b[1] - a[1]]
    }
}

/// Circle of the given radius, traversed counterclockwise from angle `phase`.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleCurve {
    pub center: [f64; 2],
    pub radius: f64,
    pub phase: f64,
}

impl SmoothCurve for CircleCurve {
    fn length(&self) -> f64 {
        2.0 * PI * self.radius
    }
    fn closed(&self) -> bool {
        true
    }
    fn position(&self, s: f64) -> [f64; 2] {
        let a = self.phase + s / self.radius;
        [self.center[0] + self.radius * a.cos(), self.center[1] + self.radius * a.sin()]
    }
    fn tangent(&self, s: f64) -> [f64; 2] {
        let a = self.phase + s / self.radius;
        [-a.sin(), a.cos()]
    }
    fn curvature(&self, _s: f64) -> f64 {
        1.0 / self.radius
    }
    fn chord(&self, s: f64, ds: f64) -> [f64; 2] {
        let half = 0.5 * ds / self.radius;
        let mid = self.phase + (s + 0.5 * ds) / self.radius;
        let l = 2.0 * self.radius * half.sin();
        [-l * mid.sin(), l * mid.cos()]
    }
}

/// Cumulative arc length of a regular parametrization `t -> c(t)` on
/// `[t0, t1]`, tabulated on equal panels and inverted by Newton steps.
#[derive(Debug, Clone, PartialEq)]
struct ArcTable {
    t0: f64,
    dt: f64,
    cum: Vec<f64>,
}

const ARC_PANELS: usize = 256;

impl ArcTable {
    fn new<F: Fn(f64) -> f64>(t0: f64, t1: f64, speed: F) -> Self {
        let g = GaussLegendre::new(16);
        let dt = (t1 - t0) / ARC_PANELS as f64;
        let mut cum = vec![0.0];
        for i in 0..ARC_PANELS {
            let a = t0 + dt * i as f64;
            let last = *cum.last().unwrap();
            cum.push(last + g.integrate(a, a + dt, &speed));
        }
        ArcTable { t0, dt, cum }
    }

    fn length(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    fn param<F: Fn(f64) -> f64>(&self, s: f64, speed: F) -> f64 {
        let s = s.clamp(0.0, self.length());
        let i = match self.cum.binary_search_by(|c| c.total_cmp(&s)) {
            Ok(i) => return self.t0 + self.dt * i as f64,
            Err(i) => (i - 1).min(ARC_PANELS - 1),
        };
        let a = self.t0 + self.dt * i as f64;
        let g = GaussLegendre::new(16);
        let target = s - self.cum[i];
        let mut t = a + self.dt * target / (self.cum[i + 1] - self.cum[i]);
        for _ in 0..30 {
            let f = g.integrate(a, t, &speed) - target;
            let step = f / speed(t);
            t -= step;
            if step.abs() < 1e-15 * (1.0 + t.abs()) {
                break;
            }
        }
        t
    }
}

/// Ellipse with semi-axes `a` (along x) and `b`, counterclockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipse {
    pub a: f64,
    pub b: f64,
    table: ArcTable,
}

impl Ellipse {
    pub fn new(a: f64, b: f64) -> Result<Self, DiscretizeError> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(DiscretizeError::BadCurveSpec("ellipse axes must be positive".into()));
        }
        let table = ArcTable::new(0.0, 2.0 * PI, |t| Self::speed_of(a, b, t));
        Ok(Ellipse { a, b, table })
    }

    fn speed_of(a: f64, b: f64, t: f64) -> f64 {
        (a * t.sin()).hypot(b * t.cos())
    }

    fn param(&self, s: f64) -> f64 {
        self.table.param(s, |t| Self::speed_of(self.a, self.b, t))
    }
}

impl SmoothCurve for Ellipse {
    fn length(&self) -> f64 {
        self.table.length()
    }
    fn closed(&self) -> bool {
        true
    }
    fn position(&self, s: f64) -> [f64; 2] {
        let t = self.param(s);
        [self.a * t.cos(), self.b * t.sin()]
    }
    fn tangent(&self, s: f64) -> [f64; 2] {
        let t = self.param(s);
        let v = [-self.a * t.sin(), self.b * t.cos()];
        let l = v[0].hypot(v[1]);
        [v[0] / l, v[1] / l]
    }
    fn curvature(&self, s: f64) -> f64 {
        let t = self.param(s);
        self.a * self.b / Self::speed_of(self.a, self.b, t).powi(3)
    }
}

/// Graph of `amplitude * sin(wavenumber * x)` for `x` in `[0, x_end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SineArc {
    pub amplitude: f64,
    pub wavenumber: f64,
    pub x_end: f64,
    table: ArcTable,
}

impl SineArc {
    pub fn new(amplitude: f64, wavenumber: f64, x_end: f64) -> Result<Self, DiscretizeError> {
        if !(wavenumber > 0.0 && x_end > 0.0 && amplitude.is_finite() && x_end.is_finite()) {
            return Err(DiscretizeError::BadCurveSpec("sine arc needs w > 0 and x > 0".into()));
        }
        let table = ArcTable::new(0.0, x_end, |x| Self::speed_of(amplitude, wavenumber, x));
        Ok(SineArc {
            amplitude,
            wavenumber,
            x_end,
            table,
        })
    }

    fn speed_of(a: f64, w: f64, x: f64) -> f64 {
        1f64.hypot(a * w * (w * x).cos())
    }

    fn param(&self, s: f64) -> f64 {
        self.table
            .param(s, |x| Self::speed_of(self.amplitude, self.wavenumber, x))
    }
}

impl SmoothCurve for SineArc {
    fn length(&self) -> f64 {
        self.table.length()
    }
    fn closed(&self) -> bool {
        false
    }
    fn position(&self, s: f64) -> [f64; 2] {
        let x = self.param(s);
        [x, self.amplitude * (self.wavenumber * x).sin()]
    }
    fn tangent(&self, s: f64) -> [f64; 2] {
        let x = self.param(s);
        let d = self.amplitude * self.wavenumber * (self.wavenumber * x).cos();
        let l = 1f64.hypot(d);
        [1.0 / l, d / l]
    }
    fn curvature(&self, s: f64) -> f64 {
        let x = self.param(s);
        let w = self.wavenumber;
        let d1 = self.amplitude * w * (w * x).cos();
        let d2 = -self.amplitude * w * w * (w * x).sin();
        d2 / (1.0 + d1 * d1).powf(1.5)
    }
}

/// Clothoid arc from the origin with heading 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ClothoidArc(pub Clothoid);

impl ClothoidArc {
    pub fn new(kappa0: f64, sharpness: f64, length: f64) -> Result<Self, DiscretizeError> {
        if !(length > 0.0 && length.is_finite() && kappa0.is_finite() && sharpness.is_finite()) {
            return Err(DiscretizeError::BadCurveSpec("clothoid needs a positive length".into()));
        }
        Ok(ClothoidArc(Clothoid {
            start: [0.0, 0.0],
            heading: 0.0,
            kappa0,
            sharpness,
            length,
        }))
    }
}

impl SmoothCurve for ClothoidArc {
    fn length(&self) -> f64 {
        self.0.length
    }
    fn closed(&self) -> bool {
        false
    }
    fn position(&self, s: f64) -> [f64; 2] {
        self.0.point_at(s)
    }
    fn tangent(&self, s: f64) -> [f64; 2] {
        let h = self.0.heading_at(s);
        [h.cos(), h.sin()]
    }
    fn curvature(&self, s: f64) -> f64 {
        self.0.kappa0 + self.0.sharpness * s
    }
}

/// Straight segment between two points.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: [f64; 2],
    pub end: [f64; 2],
}

impl SmoothCurve for Segment {
    fn length(&self) -> f64 {
        (self.end[0] - self.start[0]).hypot(self.end[1] - self.start[1])
    }
    fn closed(&self) -> bool {
        false
    }
    fn position(&self, s: f64) -> [f64; 2] {
        let t = self.tangent(0.0);
        [self.start[0] + s * t[0], self.start[1] + s * t[1]]
    }
    fn tangent(&self, _s: f64) -> [f64; 2] {
        let l = self.length();
        [(self.end[0] - self.start[0]) / l, (self.end[1] - self.start[1]) / l]
    }
    fn curvature(&self, _s: f64) -> f64 {
        0.0
    }
}

/// Built-in curves, parsed from specs like `circle:r=1`,
/// `ellipse:a=2,b=1`, `sine:a=1,w=1,x=6.283185307179586`,
/// `clothoid:k0=0,a=1,l=2` and `segment:x0=0,y0=0,x1=1,y1=0`.
#[derive(Debug, Clone, PartialEq)]
pub enum BuiltinCurve {
    Circle(CircleCurve),
    Ellipse(Ellipse),
    Sine(SineArc),
    Clothoid(ClothoidArc),
    Segment(Segment),
}

impl BuiltinCurve {
    fn inner(&self) -> &dyn SmoothCurve {
        match self {
            BuiltinCurve::Circle(c) => c,
            BuiltinCurve::Ellipse(c) => c,
            BuiltinCurve::Sine(c) => c,
            BuiltinCurve::Clothoid(c) => c,
            BuiltinCurve::Segment(c) => c,
        }
    }
}

impl SmoothCurve for BuiltinCurve {
    fn length(&self) -> f64 {
        self.inner().length()
    }
    fn closed(&self) -> bool {
        self.inner().closed()
    }
    fn position(&self, s: f64) -> [f64; 2] {
        self.inner().position(s)
    }
    fn tangent(&self, s: f64) -> [f64; 2] {
        self.inner().tangent(s)
    }
    fn curvature(&self, s: f64) -> f64 {
        self.inner().curvature(s)
    }
    fn chord(&self, s: f64, ds: f64) -> [f64; 2] {
        self.inner().chord(s, ds)
    }
}

impl FromStr for BuiltinCurve {
    type Err = DiscretizeError;

    fn from_str(spec: &str) -> Result<Self, Self::Err> {
        let bad = |m: String| DiscretizeError::BadCurveSpec(m);
        let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
        let mut params = std::collections::BTreeMap::new();
        for kv in args.split(',').filter(|s| !s.trim().is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got '{kv}'")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| bad(format!("'{v}' is not a number")))?;
            params.insert(k.trim().to_string(), v);
        }
        let known: &[&str] = match name {
            "circle" => &["r", "cx", "cy", "phase"],
            "ellipse" => &["a", "b"],
            "sine" => &["a", "w", "x"],
            "clothoid" => &["k0", "a", "l"],
            "segment" => &["x0", "y0", "x1", "y1"],
            other => return Err(bad(format!("unknown curve '{other}'"))),
        };
        if let Some(k) = params.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(bad(format!("unknown parameter '{k}' for {name}")));
        }
        let get = |k: &str, d: f64| params.get(k).copied().unwrap_or(d);
        Ok(match name {
            "circle" => {
                let r = get("r", 1.0);
                if !(r > 0.0) {
                    return Err(bad("circle radius must be positive".into()));
                }
                BuiltinCurve::Circle(CircleCurve {
                    center: [get("cx", 0.0), get("cy", 0.0)],
                    radius: r,
                    phase: get("phase", 0.0),
                })
            }
            "ellipse" => BuiltinCurve::Ellipse(Ellipse::new(get("a", 2.0), get("b", 1.0))?),
            "sine" => BuiltinCurve::Sine(SineArc::new(get("a", 1.0), get("w", 1.0), get("x", 2.0 * PI))?),
            "clothoid" => BuiltinCurve::Clothoid(ClothoidArc::new(get("k0", 0.0), get("a", 1.0), get("l", 2.0))?),
            _ => {
                let s = Segment {
                    start: [get("x0", 0.0), get("y0", 0.0)],
                    end: [get("x1", 1.0), get("y1", 0.0)],
                };
                if !(s.length() > 0.0) {
                    return Err(bad("segment endpoints coincide".into()));
                }
                BuiltinCurve::Segment(s)
            }
        })
    }
}

/// Strictly increasing arc-length parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMap(Vec<f64>);

impl SampleMap {
    pub fn new(values: Vec<f64>) -> Result<Self, DiscretizeError> {
        if let Some(i) = values.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(DiscretizeError::NotIncreasing { index: i + 1 });
        }
        Ok(SampleMap(values))
    }

    /// `n` equally spaced samples: over `[0, L)` for closed curves, over
    /// `[0, L]` for open ones.
    pub fn uniform(curve: &dyn SmoothCurve, n: usize) -> Result<Self, DiscretizeError> {
        let l = curve.length();
        let values = if curve.closed() {
            (0..n).map(|i| l * i as f64 / n as f64).collect()
        } else {
            if n < 2 {
                return Err(DiscretizeError::TooFewSamples { needed: 2, got: n });
            }
            (0..n).map(|i| l * i as f64 / (n - 1) as f64).collect()
        };
        SampleMap::new(values)
    }

    /// Uniform samples with every inflection of the curve added.
    pub fn uniform_with_inflections(curve: &dyn SmoothCurve, n: usize, tol: &Tolerances) -> Result<Self, DiscretizeError> {
        let mut v = SampleMap::uniform(curve, n)?.0;
        let l = curve.length();
        let eps = 1e-9 * l;
        for s in inflections(curve, tol)? {
            if let Some(pos) = v.iter().position(|&x| (x - s).abs() <= eps) {
                v[pos] = s;
            } else {
                v.push(s);
            }
        }
        v.sort_by(f64::total_cmp);
        SampleMap::new(v)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn check_domain(&self, curve: &dyn SmoothCurve) -> Result<(), DiscretizeError> {
        let l = curve.length();
        for &v in &self.0 {
            let inside = if curve.closed() { (0.0..l).contains(&v) } else { (0.0..=l).contains(&v) };
            if !inside {
                return Err(DiscretizeError::OutOfDomain { value: v, length: l });
            }
        }
        Ok(())
    }
}

fn to_curve(points: Vec<[f64; 2]>, closed: bool) -> DiscreteCurve {
    let pts = points.into_iter().map(|p| Vec3::new(p[0], p[1], 0.0)).collect();
    // vertices of a valid discretization are distinct; skip re-validation
    DiscreteCurve::new(2, pts, closed).expect("discretization produced an invalid curve")
}

/// Vertices on the curve at the sample parameters.
pub fn discretize_inscribed(c: &dyn SmoothCurve, map: &SampleMap) -> Result<DiscreteCurve, DiscretizeError> {
    map.check_domain(c)?;
    let needed = if c.closed() { 3 } else { 2 };
    if map.len() < needed {
        return Err(DiscretizeError::TooFewSamples { needed, got: map.len() });
    }
    Ok(to_curve(map.values().iter().map(|&s| c.position(s)).collect(), c.closed()))
}

/// Parameters where the curvature changes sign, located by a sign scan on a
/// fine grid and refined by bisection.
pub fn inflections(c: &dyn SmoothCurve, tol: &Tolerances) -> Result<Vec<f64>, DiscretizeError> {
    let l = c.length();
    let grid = 4096;
    let zero = 1e-14;
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=grid {
        let s = l * i as f64 / grid as f64;
        let k = c.curvature(s);
        // exact zeros are skipped; the sign change around them is still seen
        if k.abs() <= zero {
            continue;
        }
        if let Some((sp, kp)) = prev {
            if kp.signum() != k.signum() {
                let (mut a, mut b) = (sp, s);
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    let km = c.curvature(m);
                    if km == 0.0 || (b - a) < 1e-15 * l {
                        a = m;
                        b = m;
                        break;
                    }
                    if km.signum() == kp.signum() {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                let root = 0.5 * (a + b);
                let root = if c.closed() { root % l } else { root };
                out.push(root);
                if out.len() > tol.max_inflections {
                    return Err(DiscretizeError::InfinitelyManyInflections {
                        max: tol.max_inflections,
                    });
                }
            }
        }
        prev = Some((s, k));
    }
    // snap roots at the domain ends of open curves
    out.retain(|&s| c.closed() || (s > 1e-12 * l && s < l * (1.0 - 1e-12)));
    out.sort_by(f64::total_cmp);
    Ok(out)
}

fn tangent_intersection(p: [f64; 2], t: [f64; 2], q: [f64; 2], u: [f64; 2], tol: &Tolerances) -> Option<[f64; 2]> {
    let cross = t[0] * u[1] - t[1] * u[0];
    if cross.abs() < tol.parallel_cross.min(1e-12) {
        return None;
    }
    let d = [q[0] - p[0], q[1] - p[1]];
    let a = (d[0] * u[1] - d[1] * u[0]) / cross;
    Some([p[0] + a * t[0], p[1] + a * t[1]])
}

pub fn discretize_circumscribed(c: &dyn SmoothCurve, map: &SampleMap) -> Result<DiscreteCurve, DiscretizeError> {
    discretize_circumscribed_with(c, map, &Tolerances::DEFAULT)
}

/// Vertices at intersections of consecutive tangent lines. Open curves keep
/// their two endpoints as first and last vertex, so every sample touches an
/// edge.
pub fn discretize_circumscribed_with(
    c: &dyn SmoothCurve,
    map: &SampleMap,
    tol: &Tolerances,
) -> Result<DiscreteCurve, DiscretizeError> {
    map.check_domain(c)?;
    let needed = if c.closed() { 3 } else { 2 };
    let m = map.len();
    if m < needed {
        return Err(DiscretizeError::TooFewSamples { needed, got: m });
    }
    let s = map.values();
    let l = c.length();
    let infl = inflections(c, tol)?;
    let eps = 1e-9 * l;
    for &x in &infl {
        if !s.iter().any(|&v| (v - x).abs() <= eps) {
            return Err(DiscretizeError::MissingInflectionSample { parameter: x });
        }
    }
    for w in infl.windows(2) {
        if !s.iter().any(|&v| v > w[0] + eps && v < w[1] - eps) {
            return Err(DiscretizeError::NoSampleBetweenInflections { a: w[0], b: w[1] });
        }
    }
    let pts: Vec<[f64; 2]> = s.iter().map(|&v| c.position(v)).collect();
    let tan: Vec<[f64; 2]> = s.iter().map(|&v| c.tangent(v)).collect();
    let pairs = if c.closed() { m } else { m - 1 };
    let mut verts = Vec::with_capacity(pairs + 2);
    if !c.closed() {
        verts.push(pts[0]);
    }
    for i in 0..pairs {
        let j = (i + 1) % m;
        let v = tangent_intersection(pts[i], tan[i], pts[j], tan[j], tol)
            .ok_or(DiscretizeError::ParallelTangents { index: i, next: j })?;
        verts.push(v);
    }
    if !c.closed() {
        verts.push(pts[m - 1]);
    }
    Ok(to_curve(verts, c.closed()))
}

/// Which offset formula places the centered samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OffsetRule {
    /// `(x - sin x) / (k sin x)` with `x = k h`.
    SineRatio,
    /// `(1/k) (1 - (x/2) cot(x/2))`, which makes equally spaced samples of
    /// a circle the edge midpoints of its centered polygon.
    Exact,
}

/// Direction of the offset relative to the center of curvature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OffsetSide {
    TowardCenter,
    AwayFromCenter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CenteredOptions {
    pub rule: OffsetRule,
    pub side: OffsetSide,
}

impl Default for CenteredOptions {
    fn default() -> Self {
        CenteredOptions {
            rule: OffsetRule::Exact,
            side: OffsetSide::TowardCenter,
        }
    }
}

pub fn discretize_centered(c: &dyn SmoothCurve, density: f64) -> Result<RefinedCurve, DiscretizeError> {
    discretize_centered_with(c, density, CenteredOptions::default())
}

/// Centered discretization at `density` samples per unit length.
///
/// Samples are spaced `h = L / round(L * density)` apart and offset along
/// the normal; they become the even (midpoint) indices of a refined curve.
/// Each odd vertex is the point at distance `h / 2` from both neighbouring
/// samples on the convex side, so every half-edge has length `h / 2` and
/// the polygon has the curve's length.
pub fn discretize_centered_with(
    c: &dyn SmoothCurve,
    density: f64,
    opts: CenteredOptions,
) -> Result<RefinedCurve, DiscretizeError> {
    if !(density > 0.0 && density.is_finite()) {
        return Err(DiscretizeError::BadDensity);
    }
    match centered_points(c, density, opts) {
        Ok(rc) => Ok(rc),
        Err(DiscretizeError::MTooSmall { index, .. }) => Err(DiscretizeError::MTooSmall {
            index,
            min_density: minimal_density(c, density, opts),
        }),
        Err(e) => Err(e),
    }
}

fn gaps(c: &dyn SmoothCurve, density: f64) -> usize {
    let min = if c.closed() { 3 } else { 1 };
    ((c.length() * density).round() as usize).max(min)
}

fn centered_points(c: &dyn SmoothCurve, density: f64, opts: CenteredOptions) -> Result<RefinedCurve, DiscretizeError> {
    let l = c.length();
    let n = gaps(c, density);
    let h = l / n as f64;
    let count = if c.closed() { n } else { n + 1 };
    let sign = match opts.side {
        OffsetSide::TowardCenter => 1.0,
        OffsetSide::AwayFromCenter => -1.0,
    };
    let half = 0.5 * h;
    // offset vectors, kept apart from positions so that sample differences
    // can use the curve's chord
    let mut offsets = Vec::with_capacity(count);
    let mut samples = Vec::with_capacity(count);
    let mut points = Vec::with_capacity(2 * count);
    // odd vertex between samples i and j = i + 1 (mod count), built as soon
    // as both exist so that infeasible densities fail early
    let vertex = |i: usize, j: usize, samples: &[[f64; 2]], offsets: &[[f64; 2]]| {
        let a = samples[i];
        let ch = c.chord(h * i as f64, h);
        let d = [ch[0] + offsets[j][0] - offsets[i][0], ch[1] + offsets[j][1] - offsets[i][1]];
        let dist = d[0].hypot(d[1]);
        let q2 = (half - 0.5 * dist) * (half + 0.5 * dist);
        if q2 < -1e-15 * half * half {
            return Err(DiscretizeError::MTooSmall {
                index: i,
                min_density: None,
            });
        }
        let q = q2.max(0.0).sqrt();
        // right of the chord, away from the center of a counterclockwise curve
        let right = [d[1] / dist, -d[0] / dist];
        Ok(Vec3::new(a[0] + 0.5 * d[0] + q * right[0], a[1] + 0.5 * d[1] + q * right[1], 0.0))
    };
    for i in 0..count {
        let s = h * i as f64;
        let k = c.curvature(s);
        if !(k > 0.0) {
            return Err(DiscretizeError::NonConvexCurve { index: i });
        }
        // checked between samples as well, so an inflection cannot hide
        if i + 1 < count || c.closed() {
            let mid = c.curvature((s + 0.5 * h).min(l));
            if !(mid > 0.0) {
                return Err(DiscretizeError::NonConvexCurve { index: i });
            }
        }
        let x = k * h;
        if x >= PI {
            return Err(DiscretizeError::MTooSmall {
                index: i,
                min_density: None,
            });
        }
        let off = match opts.rule {
            OffsetRule::SineRatio => centered_offset(k, 1.0 / h),
            OffsetRule::Exact => centered_offset_exact(k, 1.0 / h),
        };
        let p = c.position(s);
        let t = c.tangent(s);
        let o = [-sign * off * t[1], sign * off * t[0]];
        offsets.push(o);
        samples.push([p[0] + o[0], p[1] + o[1]]);
        if i > 0 {
            let v = vertex(i - 1, i, &samples, &offsets)?;
            let a = samples[i - 1];
            points.push(Vec3::new(a[0], a[1], 0.0));
            points.push(v);
        }
    }
    let last = samples[count - 1];
    points.push(Vec3::new(last[0], last[1], 0.0));
    if c.closed() {
        points.push(vertex(count - 1, 0, &samples, &offsets)?);
    }
    Ok(RefinedCurve::from_parts(2, points, half, c.closed(), 0))
}

/// Smallest feasible density above `from`, by doubling then bisection.
fn minimal_density(c: &dyn SmoothCurve, from: f64, opts: CenteredOptions) -> Option<f64> {
    const MAX_GAPS: f64 = 1e6;
    let feasible = |m: f64| centered_points(c, m, opts).is_ok();
    let mut lo = from;
    let mut hi = from;
    loop {
        hi *= 2.0;
        if hi * c.length() > MAX_GAPS {
            return None;
        }
        if feasible(hi) {
            break;
        }
        lo = hi;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-9 * hi {
            break;
        }
    }
    Some(hi)
}

/// Outcome of one offset variant in a [`centered_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredVariant {
    pub rule: OffsetRule,
    pub side: OffsetSide,
    /// Perimeter of the polygon through the odd vertices; `None` when the
    /// construction fails, with the error message kept.
    pub total_length: Option<f64>,
    pub length_error: Option<f64>,
    pub midpoint_defect: Option<f64>,
    pub error: Option<String>,
    /// Whether the perimeter matches the curve length within `1e-9`.
    pub passes: bool,
}

/// Runs every offset variant at the given density and reports which ones
/// preserve the curve length. Half-edges always have length `h / 2`, so the
/// perimeter falls short exactly when the polygon bends at the samples.
pub fn centered_report(c: &dyn SmoothCurve, density: f64) -> Vec<CenteredVariant> {
    let mut out = Vec::new();
    for rule in [OffsetRule::Exact, OffsetRule::SineRatio] {
        for side in [OffsetSide::TowardCenter, OffsetSide::AwayFromCenter] {
            let r = discretize_centered_with(c, density, CenteredOptions { rule, side });
            out.push(match r {
                Ok(rc) => {
                    let total = unrefine(&rc).total_length();
                    let err = (total - c.length()).abs();
                    CenteredVariant {
                        rule,
                        side,
                        total_length: Some(total),
                        length_error: Some(err),
                        midpoint_defect: Some(rc.midpoint_defect()),
                        error: None,
                        passes: err <= 1e-9,
                    }
                }
                Err(e) => CenteredVariant {
                    rule,
                    side,
                    total_length: None,
                    length_error: None,
                    midpoint_defect: None,
                    error: Some(e.to_string()),
                    passes: false,
                },
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ngon::{vertex_curvatures, Convention};

    fn unit_circle() -> CircleCurve {
        CircleCurve {
            center: [0.0, 0.0],
            radius: 1.0,
            phase: 0.0,
        }
    }

    fn check_parametrization(c: &dyn SmoothCurve) {
        let l = c.length();
        let h = 1e-5;
        for i in 1..50 {
            let s = l * i as f64 / 50.0;
            let t = c.tangent(s);
            assert!((t[0].hypot(t[1]) - 1.0).abs() < 1e-10);
            let p0 = c.position(s - h);
            let p1 = c.position(s + h);
            let v = [(p1[0] - p0[0]) / (2.0 * h), (p1[1] - p0[1]) / (2.0 * h)];
            assert!((v[0] - t[0]).abs() < 1e-6 && (v[1] - t[1]).abs() < 1e-6, "speed at {s}");
            let t0 = c.tangent(s - h);
            let t1 = c.tangent(s + h);
            let dtheta = (t0[0] * t1[1] - t0[1] * t1[0]).atan2(t0[0] * t1[0] + t0[1] * t1[1]);
            assert!((dtheta / (2.0 * h) - c.curvature(s)).abs() < 1e-6, "curvature at {s}");
        }
    }

    #[test]
    fn builtin_parametrizations() {
        for spec in ["circle:r=2", "ellipse:a=2,b=1", "sine:a=1,w=1.5,x=5", "clothoid:k0=-0.5,a=1.2,l=2", "segment:x1=3,y1=4"] {
            let c: BuiltinCurve = spec.parse().unwrap();
            check_parametrization(&c);
        }
        let e = Ellipse::new(1.0, 1.0).unwrap();
        assert!((e.length() - 2.0 * PI).abs() < 1e-13);
        let p = e.position(1.0);
        assert!((p[0] - 1f64.cos()).abs() < 1e-13 && (p[1] - 1f64.sin()).abs() < 1e-13);
        let c: BuiltinCurve = "circle:r=3,cx=1,phase=0.4".parse().unwrap();
        for (a, b) in [(0.1, 0.3), (5.0, 19.0), (18.0, 3.0 * 2.0 * PI)] {
            let ch = c.chord(a, b - a);
            let (p, q) = (c.position(a), c.position(b));
            assert!((ch[0] - (q[0] - p[0])).abs() < 1e-14 && (ch[1] - (q[1] - p[1])).abs() < 1e-14);
        }
        assert!("blob:r=1".parse::<BuiltinCurve>().is_err());
        assert!("circle:q=1".parse::<BuiltinCurve>().is_err());
        assert!("circle:r=x".parse::<BuiltinCurve>().is_err());
        assert!("circle:r=-1".parse::<BuiltinCurve>().is_err());
    }

    #[test]
    fn sample_maps() {
        assert!(matches!(
            SampleMap::new(vec![0.0, 1.0, 1.0]),
            Err(DiscretizeError::NotIncreasing { index: 2 })
        ));
        let c = unit_circle();
        let m = SampleMap::new(vec![0.0, 7.0]).unwrap();
        assert!(matches!(discretize_inscribed(&c, &m), Err(DiscretizeError::OutOfDomain { .. })));
    }

    #[test]
    fn inscribed_circle_is_exact() {
        let c = unit_circle();
        for n in 3..=100 {
            let dc = discretize_inscribed(&c, &SampleMap::uniform(&c, n).unwrap()).unwrap();
            for k in vertex_curvatures(&dc, Convention::Inscribed) {
                assert!((k - 1.0).abs() < 1e-12, "n={n}");
            }
        }
        let seg = Segment {
            start: [0.0, 0.0],
            end: [2.0, 0.0],
        };
        let dc = discretize_inscribed(&seg, &SampleMap::uniform(&seg, 2).unwrap()).unwrap();
        assert_eq!(dc.len(), 2);
    }

    #[test]
    fn circumscribed_circle_is_exact() {
        let c = unit_circle();
        for n in 3..=100 {
            let dc = discretize_circumscribed(&c, &SampleMap::uniform(&c, n).unwrap()).unwrap();
            for k in vertex_curvatures(&dc, Convention::Circumscribed) {
                assert!((k - 1.0).abs() < 1e-12, "n={n}");
            }
        }
    }

    #[test]
    fn circumscribed_edges_are_tangent() {
        let c = SineArc::new(1.0, 1.0, 2.0 * PI).unwrap();
        let map = SampleMap::uniform_with_inflections(&c, 25, &Tolerances::DEFAULT).unwrap();
        let dc = discretize_circumscribed(&c, &map).unwrap();
        assert_eq!(dc.len(), map.len() + 1);
        for (i, &s) in map.values().iter().enumerate() {
            let p = c.position(s);
            let a = dc.points()[i];
            let b = dc.points()[i + 1];
            let e = b - a;
            let dist = (e.x * (p[1] - a.y) - e.y * (p[0] - a.x)).abs() / e.norm();
            assert!(dist <= 1e-10, "sample {i}: {dist}");
            let t = ((p[0] - a.x) * e.x + (p[1] - a.y) * e.y) / e.norm_squared();
            assert!((-1e-12..=1.0 + 1e-12).contains(&t), "sample {i} outside its edge: {t}");
        }
    }

    #[test]
    fn circumscribed_errors() {
        let seg = Segment {
            start: [0.0, 0.0],
            end: [2.0, 0.0],
        };
        assert!(matches!(
            discretize_circumscribed(&seg, &SampleMap::uniform(&seg, 4).unwrap()),
            Err(DiscretizeError::ParallelTangents { index: 0, next: 1 })
        ));
        let c = SineArc::new(1.0, 1.0, 2.0 * PI).unwrap();
        let map = SampleMap::uniform(&c, 10).unwrap();
        assert!(matches!(
            discretize_circumscribed(&c, &map),
            Err(DiscretizeError::MissingInflectionSample { .. })
        ));
        let many = SineArc::new(0.1, 200.0, 2.0 * PI).unwrap();
        assert!(matches!(
            inflections(&many, &Tolerances::DEFAULT),
            Err(DiscretizeError::InfinitelyManyInflections { max: 64 })
        ));
    }

    #[test]
    fn centered_circle_preserves_length() {
        let c = unit_circle();
        for m in [2.0, 4.0, 10.0, 50.0] {
            let rc = discretize_centered(&c, m).unwrap();
            assert!((rc.total_length() - 2.0 * PI).abs() < 1e-9, "M={m}");
            assert!((unrefine(&rc).total_length() - 2.0 * PI).abs() < 1e-9, "M={m}");
            assert!(rc.length_spread() < 1e-9);
            assert!(rc.midpoint_defect() < 1e-12, "M={m}: {}", rc.midpoint_defect());
        }
    }

    #[test]
    fn sine_ratio_offset_away_from_center_is_infeasible() {
        let c = unit_circle();
        let opts = CenteredOptions {
            rule: OffsetRule::SineRatio,
            side: OffsetSide::AwayFromCenter,
        };
        for m in [4.0, 10.0, 50.0] {
            assert!(matches!(
                discretize_centered_with(&c, m, opts),
                Err(DiscretizeError::MTooSmall { min_density: None, .. })
            ));
        }
        let report = centered_report(&c, 10.0);
        assert_eq!(report.len(), 4);
        let passing: Vec<_> = report.iter().filter(|v| v.passes).map(|v| (v.rule, v.side)).collect();
        assert!(passing.contains(&(OffsetRule::Exact, OffsetSide::TowardCenter)));
        assert_eq!(passing, vec![(OffsetRule::Exact, OffsetSide::TowardCenter)]);
        let sine_ratio = &report[2];
        assert_eq!((sine_ratio.rule, sine_ratio.side), (OffsetRule::SineRatio, OffsetSide::TowardCenter));
        assert!(sine_ratio.midpoint_defect.unwrap() > 1e-6);
    }

    #[test]
    fn offsets_vanish_at_second_order() {
        let k = 1.3;
        let mut prev: Option<f64> = None;
        for m in [10.0, 20.0, 40.0, 80.0] {
            let o: f64 = centered_offset_exact(k, m);
            assert!((o - (k / m).powi(2) / 12.0 / k).abs() < 1e-3 * o);
            if let Some(p) = prev {
                let slope = (p / o).log2();
                assert!((slope - 2.0).abs() < 0.02);
            }
            prev = Some(o);
        }
    }

    #[test]
    fn centered_errors() {
        let c = SineArc::new(1.0, 1.0, 2.0 * PI).unwrap();
        assert!(matches!(discretize_centered(&c, 10.0), Err(DiscretizeError::NonConvexCurve { .. })));
        let small = Ellipse::new(1.0, 0.05).unwrap();
        match discretize_centered(&small, 1.0) {
            Err(DiscretizeError::MTooSmall {
                min_density: Some(m), ..
            }) => {
                assert!(discretize_centered(&small, m).is_ok());
                assert!(discretize_centered(&small, m * 0.999).is_err());
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(discretize_centered(&small, 0.0), Err(DiscretizeError::BadDensity)));
    }

    #[test]
    fn centered_ellipse() {
        let e = Ellipse::new(2.0, 1.0).unwrap();
        let rc = discretize_centered(&e, 20.0).unwrap();
        assert!((rc.total_length() - e.length()).abs() < 1e-9);
        assert!(rc.length_spread() < 1e-9);
    }
}
