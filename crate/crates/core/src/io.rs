//! File formats: curve JSON and CSV, intrinsic data JSON, spline JSON and
//! the analysis report.
//!
//! Numbers are written in the shortest form that parses back to the same
//! `f64`, so every written file reads back bit for bit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{refine_with, DiscreteCurve, Vec3};
use crate::error::Error;
use crate::frames::{analyze, frenet_residual, IntrinsicData};
use crate::ngon::{vertex_curvatures, Convention};
use crate::spline::Spline;
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IoError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0}")]
    Io(String),
}

fn parse_err(e: impl std::fmt::Display) -> IoError {
    IoError::Parse(e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CurveFile {
    dim: usize,
    closed: bool,
    points: Vec<Vec<f64>>,
}

pub fn curve_from_json(text: &str) -> Result<DiscreteCurve, Error> {
    let f: CurveFile = serde_json::from_str(text).map_err(parse_err)?;
    if f.dim != 2 && f.dim != 3 {
        return Err(IoError::Parse(format!("dim must be 2 or 3, got {}", f.dim)).into());
    }
    let mut pts = Vec::with_capacity(f.points.len());
    for (i, p) in f.points.iter().enumerate() {
        if p.len() != f.dim {
            return Err(IoError::Parse(format!("point {i} has {} coordinates, expected {}", p.len(), f.dim)).into());
        }
        pts.push(Vec3::new(p[0], p[1], if f.dim == 3 { p[2] } else { 0.0 }));
    }
    Ok(DiscreteCurve::new(f.dim, pts, f.closed)?)
}

pub fn curve_to_json(c: &DiscreteCurve) -> String {
    let points = c
        .points()
        .iter()
        .map(|p| p.as_slice()[..c.dim()].to_vec())
        .collect();
    let f = CurveFile {
        dim: c.dim(),
        closed: c.closed(),
        points,
    };
    serde_json::to_string_pretty(&f).expect("curve serializes")
}

/// One point per row, comma or whitespace separated. A row with two
/// numbers is planar, three numbers spatial. Lines starting with `#` are
/// comments; `# closed` marks a closed curve. A non-numeric first row is a
/// header.
pub fn curve_from_csv(text: &str) -> Result<DiscreteCurve, Error> {
    let mut closed = false;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            if c.trim() == "closed" {
                closed = true;
            }
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        let values: Result<Vec<f64>, _> = fields.iter().map(|s| s.parse::<f64>()).collect();
        match values {
            Ok(v) => rows.push(v),
            Err(_) if rows.is_empty() => continue,
            Err(e) => return Err(IoError::Parse(format!("line {}: {e}", n + 1)).into()),
        }
    }
    let dim = rows.first().map_or(2, |r| r.len());
    if dim != 2 && dim != 3 {
        return Err(IoError::Parse(format!("rows must have 2 or 3 columns, got {dim}")).into());
    }
    if let Some(i) = rows.iter().position(|r| r.len() != dim) {
        return Err(IoError::Parse(format!("row {} has {} columns, expected {dim}", i + 1, rows[i].len())).into());
    }
    let pts = rows
        .iter()
        .map(|r| Vec3::new(r[0], r[1], if dim == 3 { r[2] } else { 0.0 }))
        .collect();
    Ok(DiscreteCurve::new(dim, pts, closed)?)
}

pub fn curve_to_csv(c: &DiscreteCurve) -> String {
    let mut out = String::new();
    if c.closed() {
        out.push_str("# closed\n");
    }
    for p in c.points() {
        let row: Vec<String> = p.as_slice()[..c.dim()].iter().map(|x| format!("{x:?}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Reads a curve, choosing CSV for `.csv` paths and JSON otherwise.
pub fn read_curve(path: &std::path::Path) -> Result<DiscreteCurve, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::Io(format!("{}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        curve_from_csv(&text)
    } else {
        curve_from_json(&text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct IntrinsicFile {
    ell: f64,
    convention: Convention,
    theta: Vec<f64>,
    phi: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    closed: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    first_index: Option<usize>,
}

/// Reads intrinsic data. `closed` defaults to `false`; `first_index`
/// defaults to the index a refinement would produce (0 when closed, 1 when
/// open).
pub fn intrinsic_from_json(text: &str) -> Result<IntrinsicData, Error> {
    let f: IntrinsicFile = serde_json::from_str(text).map_err(parse_err)?;
    let closed = f.closed.unwrap_or(false);
    let first = f.first_index.unwrap_or(if closed { 0 } else { 1 });
    Ok(IntrinsicData::new(f.ell, f.convention, f.theta, f.phi, closed, first)?)
}

pub fn intrinsic_to_json(id: &IntrinsicData) -> String {
    let f = IntrinsicFile {
        ell: id.ell(),
        convention: id.convention(),
        theta: id.theta().to_vec(),
        phi: id.phi().to_vec(),
        closed: Some(id.closed()),
        first_index: Some(id.first_index()),
    };
    serde_json::to_string_pretty(&f).expect("intrinsic data serializes")
}

pub fn spline_from_json(text: &str) -> Result<Spline, Error> {
    let sp: Spline = serde_json::from_str(text).map_err(parse_err)?;
    for seg in &sp.segments {
        seg.validate()?;
    }
    Ok(sp)
}

pub fn spline_to_json(sp: &Spline) -> String {
    serde_json::to_string_pretty(sp).expect("spline serializes")
}

/// One row of an analysis table, at a lattice index of the refined curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub index: usize,
    pub ell: f64,
    pub theta: f64,
    pub phi: f64,
    pub kappa: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConventionReport {
    pub convention: Convention,
    /// Vertex curvature of the input polygon with its own edge length.
    pub kappa_polygon: Vec<f64>,
    pub frenet_residual: f64,
    pub rows: Vec<ReportRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub note: String,
    pub dim: usize,
    pub closed: bool,
    pub vertices: usize,
    /// Half-edge length of the refined curve.
    pub ell: f64,
    pub conventions: Vec<ConventionReport>,
    pub max_frenet_residual: f64,
    pub tolerance: f64,
    pub residual_ok: bool,
}

const REPORT_NOTE: &str = "kappa_polygon uses the input polygon's edge length; table rows refer to the refined curve (midpoints inserted, half-edge ell, turning at even indices, twisting at odd)";

/// Analyzes a curve under the given conventions. The Frenet residual is
/// compared against `tol.frenet_residual`.
pub fn analysis_report(c: &DiscreteCurve, conventions: &[Convention], tol: &Tolerances) -> Result<AnalysisReport, Error> {
    let rc = refine_with(c, tol)?;
    let mut reports = Vec::new();
    let mut max_res: f64 = 0.0;
    for &conv in conventions {
        let (ff, id) = analyze(&rc, conv)?;
        let res = frenet_residual(&ff, &id)?;
        max_res = max_res.max(res);
        let rows = (0..id.len())
            .map(|j| ReportRow {
                index: j + id.first_index(),
                ell: id.ell(),
                theta: id.theta()[j],
                phi: id.phi()[j],
                kappa: id.kappa()[j],
                tau: id.tau()[j],
            })
            .collect();
        reports.push(ConventionReport {
            convention: conv,
            kappa_polygon: vertex_curvatures(c, conv),
            frenet_residual: res,
            rows,
        });
    }
    Ok(AnalysisReport {
        note: REPORT_NOTE.to_string(),
        dim: c.dim(),
        closed: c.closed(),
        vertices: c.len(),
        ell: rc.ell(),
        conventions: reports,
        max_frenet_residual: max_res,
        tolerance: tol.frenet_residual,
        residual_ok: max_res <= tol.frenet_residual,
    })
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# {}\n# max_frenet_residual={:?}\n", self.note, self.max_frenet_residual);
        for c in &self.conventions {
            let k: Vec<String> = c.kappa_polygon.iter().map(|x| format!("{x:?}")).collect();
            out.push_str(&format!("# {} kappa_polygon={}\n", c.convention.name(), k.join(" ")));
        }
        out.push_str("convention,index,ell,theta,phi,kappa,tau\n");
        for c in &self.conventions {
            for r in &c.rows {
                out.push_str(&format!(
                    "{},{},{:?},{:?},{:?},{:?},{:?}\n",
                    c.convention.name(),
                    r.index,
                    r.ell,
                    r.theta,
                    r.phi,
                    r.kappa,
                    r.tau
                ));
            }
        }
        out
    }
}
