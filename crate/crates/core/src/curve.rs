//! Curve containers, midpoint refinement and the discrete calculus.
//!
//! A [`RefinedCurve`] interleaves the vertices of an original polyline with
//! its edge midpoints. Positions carry a *lattice index*: original vertices sit
//! at odd indices and midpoints at even ones. For closed curves the stored
//! sequence starts at the midpoint of the closing edge (lattice index 0); open
//! curves produced by [`refine`] start at their first vertex (lattice index 1).

use std::ops::{Add, Sub};

use nalgebra::Vector3;
use thiserror::Error;

use crate::tolerances::Tolerances;

/// Position or direction vector. Planar data keeps `z = 0`.
pub type Vec3 = Vector3<f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("curve dimension must be 2 or 3, got {0}")]
    BadDimension(usize),
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("edge {index} has zero length")]
    ZeroLengthEdge { index: usize },
    #[error("point {index} is not finite")]
    NonFinite { index: usize },
    #[error("planar curve has nonzero z at point {index}")]
    NonPlanar { index: usize },
    #[error("edge lengths are not uniform: min {min}, max {max}")]
    NonUniformLength { min: f64, max: f64 },
    #[error("midpoint invariant violated at index {index} (error {error:e})")]
    MidpointViolation { index: usize, error: f64 },
    #[error("first_index must be 0 or 1, got {0}")]
    BadFirstIndex(usize),
    #[error("sequence too short: need at least 2 values, got {0}")]
    TooShort(usize),
}

/// An ordered point sequence in the plane or in space.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteCurve {
    dim: usize,
    points: Vec<Vec3>,
    closed: bool,
}

impl DiscreteCurve {
    pub fn new(dim: usize, points: Vec<Vec3>, closed: bool) -> Result<Self, CurveError> {
        if dim != 2 && dim != 3 {
            return Err(CurveError::BadDimension(dim));
        }
        let needed = if closed { 3 } else { 2 };
        if points.len() < needed {
            return Err(CurveError::TooFewPoints {
                needed,
                got: points.len(),
            });
        }
        for (index, p) in points.iter().enumerate() {
            if !p.iter().all(|c| c.is_finite()) {
                return Err(CurveError::NonFinite { index });
            }
            if dim == 2 && p.z != 0.0 {
                return Err(CurveError::NonPlanar { index });
            }
        }
        let curve = DiscreteCurve {
            dim,
            points,
            closed,
        };
        if let Some(index) = (0..curve.edge_count()).find(|&i| curve.edge(i) == Vec3::zeros()) {
            return Err(CurveError::ZeroLengthEdge { index });
        }
        Ok(curve)
    }

    /// Planar curve from `(x, y)` pairs.
    pub fn planar(points: &[[f64; 2]], closed: bool) -> Result<Self, CurveError> {
        let pts = points.iter().map(|p| Vec3::new(p[0], p[1], 0.0)).collect();
        Self::new(2, pts, closed)
    }

    pub fn spatial(points: &[[f64; 3]], closed: bool) -> Result<Self, CurveError> {
        let pts = points.iter().map(|p| Vec3::new(p[0], p[1], p[2])).collect();
        Self::new(3, pts, closed)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn closed(&self) -> bool {
        self.closed
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        edge_count(self.points.len(), self.closed)
    }

    /// Vector from point `i` to point `i + 1` (wrapping when closed).
    pub fn edge(&self, i: usize) -> Vec3 {
        self.points[(i + 1) % self.points.len()] - self.points[i]
    }

    pub fn edge_lengths(&self) -> Vec<f64> {
        (0..self.edge_count()).map(|i| self.edge(i).norm()).collect()
    }

    pub fn total_length(&self) -> f64 {
        self.edge_lengths().iter().sum()
    }

    /// True when every point has `z == 0`, whatever the declared dimension.
    pub fn is_planar(&self) -> bool {
        self.points.iter().all(|p| p.z == 0.0)
    }
}

fn edge_count(n: usize, closed: bool) -> usize {
    if closed {
        n
    } else {
        n.saturating_sub(1)
    }
}

/// The doubled-index curve: original vertices interleaved with edge midpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinedCurve {
    dim: usize,
    points: Vec<Vec3>,
    ell: f64,
    closed: bool,
    first_index: usize,
}

impl RefinedCurve {
    /// Validating constructor. Checks the uniform half-edge length and the
    /// midpoint invariant at every even lattice index that has both neighbors.
    pub fn new(
        dim: usize,
        points: Vec<Vec3>,
        closed: bool,
        first_index: usize,
        tol: &Tolerances,
    ) -> Result<Self, CurveError> {
        if first_index > 1 {
            return Err(CurveError::BadFirstIndex(first_index));
        }
        let base = DiscreteCurve::new(dim, points, closed)?;
        let lengths = base.edge_lengths();
        let (min, max) = min_max(&lengths);
        if (max - min) > tol.uniform_length_rel * max {
            return Err(CurveError::NonUniformLength { min, max });
        }
        let ell = lengths.iter().sum::<f64>() / lengths.len() as f64;
        let rc = RefinedCurve {
            dim,
            points: base.points,
            ell,
            closed,
            first_index,
        };
        if let Some((index, error)) = rc.worst_midpoint() {
            if error > tol.midpoint_abs {
                return Err(CurveError::MidpointViolation { index, error });
            }
        }
        Ok(rc)
    }

    /// Builds a refined curve without checking the midpoint invariant or the
    /// length spread. Used by constructions that guarantee them by design or,
    /// for the centered discretization, only approximately.
    pub(crate) fn from_parts(
        dim: usize,
        points: Vec<Vec3>,
        ell: f64,
        closed: bool,
        first_index: usize,
    ) -> Self {
        RefinedCurve {
            dim,
            points,
            ell,
            closed,
            first_index,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    /// Half-edge length.
    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn closed(&self) -> bool {
        self.closed
    }

    /// Lattice index of `points()[0]`; 0 (a midpoint) or 1 (a vertex).
    pub fn first_index(&self) -> usize {
        self.first_index
    }

    pub fn lattice_index(&self, j: usize) -> usize {
        j + self.first_index
    }

    /// Whether stored point `j` is an original vertex.
    pub fn is_vertex(&self, j: usize) -> bool {
        self.lattice_index(j) % 2 == 1
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        edge_count(self.points.len(), self.closed)
    }

    pub fn edge(&self, j: usize) -> Vec3 {
        self.points[(j + 1) % self.points.len()] - self.points[j]
    }

    pub fn edge_lengths(&self) -> Vec<f64> {
        (0..self.edge_count()).map(|j| self.edge(j).norm()).collect()
    }

    pub fn total_length(&self) -> f64 {
        self.edge_lengths().iter().sum()
    }

    /// Relative spread of the half-edge lengths.
    pub fn length_spread(&self) -> f64 {
        let (min, max) = min_max(&self.edge_lengths());
        (max - min) / max
    }

    /// Largest deviation of an even-index point from the average of its two
    /// neighbors. Zero when no even point has both neighbors.
    pub fn midpoint_defect(&self) -> f64 {
        self.worst_midpoint().map_or(0.0, |(_, e)| e)
    }

    fn worst_midpoint(&self) -> Option<(usize, f64)> {
        let n = self.points.len();
        (0..n)
            .filter(|&j| !self.is_vertex(j))
            .filter_map(|j| {
                let (prev, next) = if self.closed {
                    ((j + n - 1) % n, (j + 1) % n)
                } else if j == 0 || j + 1 == n {
                    return None;
                } else {
                    (j - 1, j + 1)
                };
                let avg = (self.points[prev] + self.points[next]) * 0.5;
                Some((j, (self.points[j] - avg).norm()))
            })
            .fold(None, |acc: Option<(usize, f64)>, cur| match acc {
                Some(a) if a.1 >= cur.1 => Some(a),
                _ => Some(cur),
            })
    }

    /// The same points as a plain curve.
    pub fn to_discrete(&self) -> DiscreteCurve {
        DiscreteCurve {
            dim: self.dim,
            points: self.points.clone(),
            closed: self.closed,
        }
    }
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

/// Interleaves the vertices of `curve` with its edge midpoints.
///
/// All edges must have the same length `2 * ell` within
/// [`Tolerances::uniform_length_rel`].
pub fn refine(curve: &DiscreteCurve) -> Result<RefinedCurve, CurveError> {
    refine_with(curve, &Tolerances::DEFAULT)
}

pub fn refine_with(curve: &DiscreteCurve, tol: &Tolerances) -> Result<RefinedCurve, CurveError> {
    let lengths = curve.edge_lengths();
    let (min, max) = min_max(&lengths);
    if (max - min) > tol.uniform_length_rel * max {
        return Err(CurveError::NonUniformLength { min, max });
    }
    let ell = lengths.iter().sum::<f64>() / lengths.len() as f64 / 2.0;
    let pts = curve.points();
    let n = pts.len();
    let mut out = Vec::with_capacity(2 * n);
    if curve.closed() {
        for k in 0..n {
            let prev = pts[(k + n - 1) % n];
            out.push((prev + pts[k]) * 0.5);
            out.push(pts[k]);
        }
        Ok(RefinedCurve::from_parts(curve.dim(), out, ell, true, 0))
    } else {
        for k in 0..n {
            if k > 0 {
                out.push((pts[k - 1] + pts[k]) * 0.5);
            }
            out.push(pts[k]);
        }
        Ok(RefinedCurve::from_parts(curve.dim(), out, ell, false, 1))
    }
}

/// Extracts the original vertices (odd sine_ratio indices).
pub fn unrefine(refined: &RefinedCurve) -> DiscreteCurve {
    let points: Vec<Vec3> = refined
        .points()
        .iter()
        .enumerate()
        .filter(|(j, _)| refined.is_vertex(*j))
        .map(|(_, p)| *p)
        .collect();
    DiscreteCurve {
        dim: refined.dim(),
        points,
        closed: refined.closed(),
    }
}

/// A finite stretch of a map `Z -> R` or `Z -> R^3`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMap<T> {
    values: Vec<T>,
    closed: bool,
}

impl<T> DiscreteMap<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T>,
{
    pub fn new(values: Vec<T>, closed: bool) -> Self {
        DiscreteMap { values, closed }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn closed(&self) -> bool {
        self.closed
    }

    fn pairwise(&self, f: impl Fn(T, T) -> T) -> Result<Self, CurveError> {
        let n = self.values.len();
        if n < 2 {
            return Err(CurveError::TooShort(n));
        }
        let m = edge_count(n, self.closed);
        let values = (0..m)
            .map(|i| f(self.values[(i + 1) % n], self.values[i]))
            .collect();
        Ok(DiscreteMap {
            values,
            closed: self.closed,
        })
    }

    /// `(D chi)_i = chi_{i+1} - chi_i`.
    pub fn diff(&self) -> Result<Self, CurveError> {
        self.pairwise(|next, cur| next - cur)
    }

    /// `(M chi)_i = chi_{i+1} + chi_i`.
    pub fn msum(&self) -> Result<Self, CurveError> {
        self.pairwise(|next, cur| next + cur)
    }
}
