//! SVG rendering of planar curves, circles and splines.
//!
//! The y axis is flipped so that counterclockwise in the plane stays
//! counterclockwise on screen. Arcs become native `A` path commands; other
//! curved segments become polylines whose chordal deviation stays below
//! `RenderStyle::tolerance` times the larger viewport extent.

use std::f64::consts::PI;
use std::fmt::Write;

use thiserror::Error;

use crate::curve::{DiscreteCurve, RefinedCurve};
use crate::spline::{Spline, SplineSegment};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SvgError {
    #[error("cannot render non-planar data")]
    NonPlanarData,
    #[error("invalid style: {0}")]
    BadStyle(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderStyle {
    /// Width of the drawing in pixels; the height follows the aspect ratio.
    pub width: f64,
    pub padding: f64,
    pub polygon_stroke: f64,
    pub spline_stroke: f64,
    pub circle_stroke: f64,
    pub marker_radius: f64,
    pub polygon_color: String,
    pub spline_color: String,
    /// Cycled over the circles in order.
    pub circle_colors: Vec<String>,
    pub marker_color: String,
    pub background: Option<String>,
    /// Chordal deviation bound for polylines, relative to the viewport.
    pub tolerance: f64,
}

impl Default for RenderStyle {
    fn default() -> Self {
        RenderStyle {
            width: 480.0,
            padding: 16.0,
            polygon_stroke: 1.5,
            spline_stroke: 2.0,
            circle_stroke: 1.0,
            marker_radius: 2.5,
            polygon_color: "#222222".into(),
            spline_color: "#c0392b".into(),
            circle_colors: vec!["#2e86c1".into(), "#28b463".into(), "#af7ac5".into()],
            marker_color: "#222222".into(),
            background: Some("#ffffff".into()),
            tolerance: 1e-3,
        }
    }
}

impl RenderStyle {
    fn validate(&self) -> Result<(), SvgError> {
        let positive = [
            ("width", self.width),
            ("polygon_stroke", self.polygon_stroke),
            ("spline_stroke", self.spline_stroke),
            ("circle_stroke", self.circle_stroke),
            ("tolerance", self.tolerance),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SvgError::BadStyle(format!("{name} must be positive")));
            }
        }
        if !(self.padding >= 0.0 && self.marker_radius >= 0.0) {
            return Err(SvgError::BadStyle("padding and marker radius must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Polygon {
    points: Vec<[f64; 2]>,
    closed: bool,
    markers: bool,
}

/// Things to draw. Polygons first, then circles, then splines, then free
/// markers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scene {
    polygons: Vec<Polygon>,
    circles: Vec<([f64; 2], f64)>,
    splines: Vec<Spline>,
    markers: Vec<[f64; 2]>,
}

fn planar_points(points: &[crate::Vec3]) -> Result<Vec<[f64; 2]>, SvgError> {
    if points.iter().any(|p| p.z != 0.0) {
        return Err(SvgError::NonPlanarData);
    }
    Ok(points.iter().map(|p| [p.x, p.y]).collect())
}

impl Scene {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a polygon with markers at its vertices. Spatial curves are
    /// rejected unless every `z` is zero.
    pub fn curve(&mut self, c: &DiscreteCurve) -> Result<&mut Self, SvgError> {
        if c.dim() != 2 {
            return Err(SvgError::NonPlanarData);
        }
        self.polygons.push(Polygon {
            points: planar_points(c.points())?,
            closed: c.closed(),
            markers: true,
        });
        Ok(self)
    }

    /// Adds a refined curve: its polygon, with markers at the original
    /// vertices and at the midpoints.
    pub fn refined(&mut self, rc: &RefinedCurve) -> Result<&mut Self, SvgError> {
        if rc.dim() != 2 {
            return Err(SvgError::NonPlanarData);
        }
        self.polygons.push(Polygon {
            points: planar_points(rc.points())?,
            closed: rc.closed(),
            markers: true,
        });
        Ok(self)
    }

    pub fn polyline(&mut self, points: &[[f64; 2]], closed: bool) -> &mut Self {
        self.polygons.push(Polygon {
            points: points.to_vec(),
            closed,
            markers: false,
        });
        self
    }

    pub fn circle(&mut self, center: [f64; 2], radius: f64) -> &mut Self {
        self.circles.push((center, radius));
        self
    }

    pub fn spline(&mut self, sp: &Spline) -> &mut Self {
        self.splines.push(sp.clone());
        self
    }

    pub fn markers(&mut self, points: &[[f64; 2]]) -> &mut Self {
        self.markers.extend_from_slice(points);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.polygons.is_empty() && self.circles.is_empty() && self.splines.iter().all(|s| s.segments.is_empty()) && self.markers.is_empty()
    }

    fn bounds(&self) -> Option<[f64; 4]> {
        let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        let mut add = |p: [f64; 2]| {
            b[0] = b[0].min(p[0]);
            b[1] = b[1].min(p[1]);
            b[2] = b[2].max(p[0]);
            b[3] = b[3].max(p[1]);
        };
        for poly in &self.polygons {
            poly.points.iter().for_each(|&p| add(p));
        }
        for &(c, r) in &self.circles {
            add([c[0] - r, c[1] - r]);
            add([c[0] + r, c[1] + r]);
        }
        for sp in &self.splines {
            for seg in &sp.segments {
                let l = seg.length();
                for i in 0..=64 {
                    add(seg.point_at(l * i as f64 / 64.0));
                }
            }
        }
        self.markers.iter().for_each(|&p| add(p));
        b[0].is_finite().then_some(b)
    }
}

struct View {
    scale: f64,
    x0: f64,
    y1: f64,
    pad: f64,
}

impl View {
    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        (self.pad + self.scale * (p[0] - self.x0), self.pad + self.scale * (self.y1 - p[1]))
    }
}

fn num(x: f64) -> String {
    let s = format!("{:.3}", x);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Parameters along a segment such that the chords stay within `dev` (in
/// world units) of the curve.
fn polyline_params(seg: &SplineSegment, dev: f64) -> Vec<f64> {
    let l = seg.length();
    // sag of a chord of length h at curvature k is about k h^2 / 8
    let kmax = match seg {
        SplineSegment::Line(_) => 0.0,
        SplineSegment::Arc(a) => 1.0 / a.radius,
        SplineSegment::Clothoid(c) => c.kappa0.abs().max((c.kappa0 + c.sharpness * c.length).abs()),
        SplineSegment::Elastica(e) => {
            let h = e.length / e.cells() as f64;
            e.theta.windows(2).map(|w| (w[1] - w[0]).abs() / h).fold(0.0, f64::max)
        }
    };
    let n = if kmax == 0.0 {
        1
    } else {
        let h = (8.0 * dev / kmax).sqrt();
        ((l / h).ceil() as usize).max(1)
    };
    let n = n.min(100_000);
    (0..=n).map(|i| l * i as f64 / n as f64).collect()
}

fn segment_path(seg: &SplineSegment, view: &View, dev: f64, first: bool, out: &mut String) {
    let start = seg.point_at(0.0);
    if first {
        let (x, y) = view.map(start);
        let _ = write!(out, "M{} {}", num(x), num(y));
    }
    match seg {
        SplineSegment::Line(l) => {
            let (x, y) = view.map(seg.point_at(l.length));
            let _ = write!(out, " L{} {}", num(x), num(y));
        }
        SplineSegment::Arc(a) => {
            // split so that no piece needs the large-arc flag
            let pieces = ((a.sweep.abs() / (0.75 * PI)).ceil() as usize).max(1);
            let r = a.radius * view.scale;
            // the flipped y axis turns counterclockwise into sweep flag 0
            let flag = if a.sweep > 0.0 { 0 } else { 1 };
            for i in 1..=pieces {
                let ang = a.start_angle + a.sweep * i as f64 / pieces as f64;
                let p = [a.center[0] + a.radius * ang.cos(), a.center[1] + a.radius * ang.sin()];
                let (x, y) = view.map(p);
                let _ = write!(out, " A{} {} 0 0 {} {} {}", num(r), num(r), flag, num(x), num(y));
            }
        }
        _ => {
            for s in polyline_params(seg, dev).into_iter().skip(1) {
                let (x, y) = view.map(seg.point_at(s));
                let _ = write!(out, " L{} {}", num(x), num(y));
            }
        }
    }
}

/// Renders the scene as an SVG 1.1 document.
pub fn render_svg(scene: &Scene, style: &RenderStyle) -> Result<String, SvgError> {
    style.validate()?;
    let mut out = String::new();
    let Some(b) = scene.bounds() else {
        let w = num(style.width);
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{w}" viewBox="0 0 {w} {w}"></svg>"#
        );
        return Ok(out);
    };
    let extent = (b[2] - b[0]).max(b[3] - b[1]).max(1e-12);
    let inner = style.width - 2.0 * style.padding;
    if !(inner > 0.0) {
        return Err(SvgError::BadStyle("padding leaves no room".into()));
    }
    let scale = inner / extent;
    let width = style.width;
    let height = 2.0 * style.padding + scale * (b[3] - b[1]);
    let view = View {
        scale,
        x0: b[0] - 0.5 * (extent - (b[2] - b[0])),
        y1: b[3],
        pad: style.padding,
    };
    let dev = style.tolerance * extent;
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        num(width),
        num(height),
        num(width),
        num(height)
    );
    if let Some(bg) = &style.background {
        let _ = writeln!(out, r#"  <rect width="100%" height="100%" fill="{bg}"/>"#);
    }
    for poly in &scene.polygons {
        let pts: Vec<String> = poly
            .points
            .iter()
            .map(|&p| {
                let (x, y) = view.map(p);
                format!("{},{}", num(x), num(y))
            })
            .collect();
        let tag = if poly.closed { "polygon" } else { "polyline" };
        let _ = writeln!(
            out,
            r#"  <{tag} points="{}" fill="none" stroke="{}" stroke-width="{}"/>"#,
            pts.join(" "),
            style.polygon_color,
            num(style.polygon_stroke)
        );
        if poly.markers && style.marker_radius > 0.0 {
            for &p in &poly.points {
                let (x, y) = view.map(p);
                let _ = writeln!(
                    out,
                    r#"  <circle cx="{}" cy="{}" r="{}" fill="{}"/>"#,
                    num(x),
                    num(y),
                    num(style.marker_radius),
                    style.marker_color
                );
            }
        }
    }
    for (i, &(c, r)) in scene.circles.iter().enumerate() {
        let (x, y) = view.map(c);
        let color = if style.circle_colors.is_empty() {
            style.polygon_color.as_str()
        } else {
            style.circle_colors[i % style.circle_colors.len()].as_str()
        };
        let _ = writeln!(
            out,
            r#"  <circle cx="{}" cy="{}" r="{}" fill="none" stroke="{color}" stroke-width="{}"/>"#,
            num(x),
            num(y),
            num(r * scale),
            num(style.circle_stroke)
        );
    }
    for sp in &scene.splines {
        if sp.segments.is_empty() {
            continue;
        }
        let mut d = String::new();
        let mut prev_end: Option<[f64; 2]> = None;
        for seg in &sp.segments {
            let start = seg.point_at(0.0);
            // start a new subpath when a joint is visibly open
            let gap = prev_end.map_or(true, |e| (e[0] - start[0]).hypot(e[1] - start[1]) > dev);
            segment_path(seg, &view, dev, gap, &mut d);
            prev_end = Some(seg.point_at(seg.length()));
        }
        if sp.closed {
            d.push_str(" Z");
        }
        let _ = writeln!(
            out,
            r#"  <path d="{d}" fill="none" stroke="{}" stroke-width="{}"/>"#,
            style.spline_color,
            num(style.spline_stroke)
        );
    }
    for &p in &scene.markers {
        let (x, y) = view.map(p);
        let _ = writeln!(
            out,
            r#"  <circle cx="{}" cy="{}" r="{}" fill="{}"/>"#,
            num(x),
            num(y),
            num(style.marker_radius),
            style.marker_color
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::refine;
    use crate::spline::{spline_circumscribed, spline_inscribed, Clothoid};

    fn hexagon() -> DiscreteCurve {
        let pts: Vec<[f64; 2]> = (0..6)
            .map(|i| {
                let a = PI / 3.0 * i as f64;
                [a.cos(), a.sin()]
            })
            .collect();
        DiscreteCurve::planar(&pts, true).unwrap()
    }

    #[test]
    fn empty_scene_is_a_valid_shell() {
        let svg = render_svg(&Scene::new(), &RenderStyle::default()).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        let mut s = Scene::new();
        s.spline(&Spline::default());
        assert_eq!(render_svg(&s, &RenderStyle::default()).unwrap(), svg);
    }

    #[test]
    fn spatial_curve_is_rejected() {
        let c = DiscreteCurve::spatial(&[[0.0, 0.0, 0.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]], false).unwrap();
        assert_eq!(Scene::new().curve(&c).err(), Some(SvgError::NonPlanarData));
    }

    #[test]
    fn arcs_are_native() {
        let sp = spline_inscribed(&refine(&hexagon()).unwrap()).unwrap();
        let mut s = Scene::new();
        s.spline(&sp);
        let svg = render_svg(&s, &RenderStyle::default()).unwrap();
        assert_eq!(svg.matches(" A").count(), 6);
        assert!(!svg.contains(" L"));
        assert!(svg.contains(" Z"));
    }

    #[test]
    fn polylines_meet_the_deviation_bound() {
        let c = Clothoid {
            start: [0.0, 0.0],
            heading: 0.0,
            kappa0: -1.0,
            sharpness: 3.0,
            length: 3.0,
        };
        let seg = SplineSegment::Clothoid(c.clone());
        let dev = 1e-3 * 2.0;
        let params = polyline_params(&seg, dev);
        for w in params.windows(2) {
            let a = c.point_at(w[0]);
            let b = c.point_at(w[1]);
            let d = [b[0] - a[0], b[1] - a[1]];
            let len = d[0].hypot(d[1]);
            for k in 1..10 {
                let p = c.point_at(w[0] + (w[1] - w[0]) * k as f64 / 10.0);
                let dist = (d[0] * (p[1] - a[1]) - d[1] * (p[0] - a[0])).abs() / len;
                assert!(dist <= dev, "{dist}");
            }
        }
    }

    #[test]
    fn render_is_deterministic_and_flipped() {
        let hex = hexagon();
        let sp = spline_circumscribed(&hex).unwrap();
        let mut s = Scene::new();
        s.curve(&hex).unwrap().circle([0.0, 0.0], 1.0).spline(&sp);
        let a = render_svg(&s, &RenderStyle::default()).unwrap();
        let b = render_svg(&s, &RenderStyle::default()).unwrap();
        assert_eq!(a, b);
        let mut tri = Scene::new();
        tri.polyline(&[[0.0, 0.0], [1.0, 1.0]], false);
        let svg = render_svg(&tri, &RenderStyle::default()).unwrap();
        // the upper point in the plane is the upper point on screen
        assert!(svg.contains(r#"points="16,464 464,16""#), "{svg}");
    }

    #[test]
    fn style_is_checked() {
        let style = RenderStyle {
            width: 0.0,
            ..RenderStyle::default()
        };
        assert!(matches!(render_svg(&Scene::new(), &style), Err(SvgError::BadStyle(_))));
    }
}
