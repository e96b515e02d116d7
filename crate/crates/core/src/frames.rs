//! Edge and vertex Frenet frames of a refined curve.
//!
//! Every edge `j` carries an orthonormal triad `(T, N, B)` with `T` along the
//! edge. Binormals come from the turning at vertices: the two half-edges that
//! meet at an original vertex share `B = T_j x T_{j+1} / |.|`. Tangents are
//! shared across midpoints. The frame therefore alternately turns about `B`
//! (at vertices, angle `theta`) and twists about `T` (at midpoints, angle
//! `phi`), and the discrete Frenet equations hold without error terms.
//!
//! Index `j` of a vertex frame or of an angle sits between edges `j` and
//! `j + 1`. Parity is taken from the lattice index of edge `j`: even indices
//! turn, odd indices twist.

use thiserror::Error;

use crate::curve::{RefinedCurve, Vec3};
use crate::ngon::{Convention, NgonError};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameError {
    #[error("edge {index} has zero length")]
    ZeroLengthEdge { index: usize },
    #[error("binormal undefined: the curve is straight")]
    UndefinedBinormal,
    #[error("vertex frame {index} is degenerate (antiparallel edge frames)")]
    DegenerateVertexFrame { index: usize },
    #[error("angle {angle} at index {index} outside [-pi/2, pi/2]")]
    AngleOutOfRange { index: usize, angle: f64 },
    #[error("alternation violated at index {index}: {which} must vanish there")]
    PatternViolation { index: usize, which: &'static str },
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error(transparent)]
    Ngon(#[from] NgonError),
}

/// Right-handed orthonormal triad.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triad {
    pub t: Vec3,
    pub n: Vec3,
    pub b: Vec3,
}

impl Triad {
    /// Largest deviation from orthonormality and from `n = b x t`.
    pub fn defect(&self) -> f64 {
        let vals = [
            (self.t.norm() - 1.0).abs(),
            (self.n.norm() - 1.0).abs(),
            (self.b.norm() - 1.0).abs(),
            self.t.dot(&self.n).abs(),
            self.t.dot(&self.b).abs(),
            self.n.dot(&self.b).abs(),
            (self.n - self.b.cross(&self.t)).norm(),
        ];
        vals.into_iter().fold(0.0, f64::max)
    }
}

/// Edge frames and, once [`vertex_frames`] has run, vertex frames.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameField {
    edges: Vec<Triad>,
    vertices: Vec<Triad>,
    closed: bool,
    first_index: usize,
    ell: f64,
}

impl FrameField {
    pub fn edges(&self) -> &[Triad] {
        &self.edges
    }

    /// Empty until [`vertex_frames`] has been applied.
    pub fn vertices(&self) -> &[Triad] {
        &self.vertices
    }

    pub fn closed(&self) -> bool {
        self.closed
    }

    pub fn first_index(&self) -> usize {
        self.first_index
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    /// Number of indices between two consecutive edges.
    pub fn pair_count(&self) -> usize {
        pair_count(self.edges.len(), self.closed)
    }

    fn next(&self, j: usize) -> usize {
        (j + 1) % self.edges.len()
    }

    /// Whether index `j` is a turning index (even lattice index).
    pub fn is_turning(&self, j: usize) -> bool {
        (j + self.first_index) % 2 == 0
    }
}

fn pair_count(edges: usize, closed: bool) -> usize {
    if closed {
        edges
    } else {
        edges.saturating_sub(1)
    }
}

/// Turning and twisting angle sequences, indexed like vertex frames.
#[derive(Debug, Clone, PartialEq)]
pub struct TurnTwist {
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub closed: bool,
    pub first_index: usize,
}

/// The curve's lengths and angles together with curvature and torsion in
/// one convention.
#[derive(Debug, Clone, PartialEq)]
pub struct IntrinsicData {
    ell: f64,
    convention: Convention,
    theta: Vec<f64>,
    phi: Vec<f64>,
    kappa: Vec<f64>,
    tau: Vec<f64>,
    closed: bool,
    first_index: usize,
}

const ANGLE_LIMIT: f64 = std::f64::consts::FRAC_PI_2;

impl IntrinsicData {
    /// Validates the alternation pattern (`theta` vanishes at odd sine_ratio
    /// indices, `phi` at even ones, exactly) and the range
    /// `|angle| <= pi/2`, then derives signed curvature and torsion.
    pub fn new(
        ell: f64,
        convention: Convention,
        theta: Vec<f64>,
        phi: Vec<f64>,
        closed: bool,
        first_index: usize,
    ) -> Result<Self, FrameError> {
        if theta.len() != phi.len() {
            return Err(FrameError::LengthMismatch(format!(
                "theta has {} entries, phi has {}",
                theta.len(),
                phi.len()
            )));
        }
        if first_index > 1 {
            return Err(FrameError::LengthMismatch(format!("first_index {first_index}")));
        }
        if !(ell > 0.0) {
            return Err(NgonError::NonpositiveLength(ell).into());
        }
        let slack = Tolerances::DEFAULT.angle_slack;
        let mut kappa = Vec::with_capacity(theta.len());
        let mut tau = Vec::with_capacity(theta.len());
        for (j, (&t, &p)) in theta.iter().zip(&phi).enumerate() {
            let turning = (j + first_index) % 2 == 0;
            if turning && p != 0.0 {
                return Err(FrameError::PatternViolation { index: j, which: "phi" });
            }
            if !turning && t != 0.0 {
                return Err(FrameError::PatternViolation { index: j, which: "theta" });
            }
            for angle in [t, p] {
                if !(angle.abs() <= ANGLE_LIMIT + slack) {
                    return Err(FrameError::AngleOutOfRange { index: j, angle });
                }
            }
            kappa.push(signed_value(t, ell, convention)?);
            tau.push(signed_value(p, ell, convention)?);
        }
        Ok(IntrinsicData {
            ell,
            convention,
            theta,
            phi,
            kappa,
            tau,
            closed,
            first_index,
        })
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn closed(&self) -> bool {
        self.closed
    }

    pub fn first_index(&self) -> usize {
        self.first_index
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn is_turning(&self, j: usize) -> bool {
        (j + self.first_index) % 2 == 0
    }

    /// Same angles, curvature and torsion re-derived in another convention.
    pub fn with_convention(&self, convention: Convention) -> Self {
        IntrinsicData::new(
            self.ell,
            convention,
            self.theta.clone(),
            self.phi.clone(),
            self.closed,
            self.first_index,
        )
        .expect("angles were validated on construction")
    }
}

fn signed_value(angle: f64, ell: f64, c: Convention) -> Result<f64, NgonError> {
    let magnitude = crate::ngon::kappa_from_angle(angle.abs().min(ANGLE_LIMIT), ell, c)?;
    Ok(if angle < 0.0 { -magnitude } else { magnitude })
}

/// Edge frames of a refined curve.
///
/// Planar curves (`dim == 2`) use the plane normal as binormal everywhere, so
/// turning angles are signed and twisting vanishes. In space, where two
/// consecutive tangents are parallel the binormal is transported from the
/// neighboring edge; a curve that is straight everywhere has no binormal.
pub fn edge_frames(rc: &RefinedCurve) -> Result<FrameField, FrameError> {
    edge_frames_with(rc, &Tolerances::DEFAULT)
}

pub fn edge_frames_with(rc: &RefinedCurve, tol: &Tolerances) -> Result<FrameField, FrameError> {
    let m = rc.edge_count();
    let mut te = Vec::with_capacity(m);
    for j in 0..m {
        let e = rc.edge(j);
        let len = e.norm();
        if len == 0.0 {
            return Err(FrameError::ZeroLengthEdge { index: j });
        }
        te.push(e / len);
    }
    let be = if rc.dim() == 2 {
        vec![Vec3::z(); m]
    } else {
        spatial_binormals(rc, &te, tol)?
    };
    let edges = te
        .iter()
        .zip(&be)
        .map(|(&t, &b)| Triad { t, n: b.cross(&t), b })
        .collect();
    Ok(FrameField {
        edges,
        vertices: Vec::new(),
        closed: rc.closed(),
        first_index: rc.first_index(),
        ell: rc.ell(),
    })
}

fn spatial_binormals(rc: &RefinedCurve, te: &[Vec3], tol: &Tolerances) -> Result<Vec<Vec3>, FrameError> {
    let m = te.len();
    let closed = rc.closed();
    let mut be: Vec<Option<Vec3>> = vec![None; m];
    for j in (0..m).filter(|&j| rc.lattice_index(j) % 2 == 0) {
        let k = if closed {
            (j + 1) % m
        } else if j + 1 < m {
            j + 1
        } else {
            continue;
        };
        let c = te[j].cross(&te[k]);
        let norm = c.norm();
        if norm > tol.parallel_cross {
            be[j] = Some(c / norm);
            be[k] = Some(c / norm);
        }
    }
    let first = be.iter().position(Option::is_some).ok_or(FrameError::UndefinedBinormal)?;
    let transport = |from: Vec3, t: Vec3| -> Vec3 {
        let v = from - t * from.dot(&t);
        let n = v.norm();
        if n > 1e-8 {
            v / n
        } else {
            any_perpendicular(t)
        }
    };
    if closed {
        for step in 1..m {
            let j = (first + step) % m;
            if be[j].is_none() {
                let prev = be[(j + m - 1) % m].unwrap();
                be[j] = Some(transport(prev, te[j]));
            }
        }
    } else {
        for j in first + 1..m {
            if be[j].is_none() {
                be[j] = Some(transport(be[j - 1].unwrap(), te[j]));
            }
        }
        for j in (0..first).rev() {
            be[j] = Some(transport(be[j + 1].unwrap(), te[j]));
        }
    }
    Ok(be.into_iter().map(Option::unwrap).collect())
}

fn any_perpendicular(t: Vec3) -> Vec3 {
    let axis = if t.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    t.cross(&axis).normalize()
}

/// Vertex frames: normalized sums of consecutive edge frame vectors.
pub fn vertex_frames(ff: &FrameField) -> Result<FrameField, FrameError> {
    vertex_frames_with(ff, &Tolerances::DEFAULT)
}

pub fn vertex_frames_with(ff: &FrameField, tol: &Tolerances) -> Result<FrameField, FrameError> {
    let unit_sum = |a: Vec3, b: Vec3, index: usize| -> Result<Vec3, FrameError> {
        let s = a + b;
        let n = s.norm();
        if n <= tol.degenerate_sum {
            Err(FrameError::DegenerateVertexFrame { index })
        } else {
            Ok(s / n)
        }
    };
    let vertices = (0..ff.pair_count())
        .map(|j| {
            let (a, b) = (ff.edges[j], ff.edges[ff.next(j)]);
            Ok(Triad {
                t: unit_sum(a.t, b.t, j)?,
                n: unit_sum(a.n, b.n, j)?,
                b: unit_sum(a.b, b.b, j)?,
            })
        })
        .collect::<Result<Vec<_>, FrameError>>()?;
    Ok(FrameField {
        vertices,
        ..ff.clone()
    })
}

/// Edge and vertex frames in one call.
pub fn frame_field(rc: &RefinedCurve) -> Result<FrameField, FrameError> {
    vertex_frames(&edge_frames(rc)?)
}

/// Signed turning angles (about the shared binormal) and twisting angles
/// (about the shared tangent). The alternating zeros are exact.
pub fn turn_twist_angles(ff: &FrameField) -> TurnTwist {
    let p = ff.pair_count();
    let mut theta = vec![0.0; p];
    let mut phi = vec![0.0; p];
    for j in 0..p {
        let (a, b) = (ff.edges[j], ff.edges[ff.next(j)]);
        if ff.is_turning(j) {
            theta[j] = a.t.cross(&b.t).dot(&a.b).atan2(a.t.dot(&b.t));
        } else {
            phi[j] = a.b.cross(&b.b).dot(&a.t).atan2(a.b.dot(&b.b));
        }
    }
    TurnTwist {
        theta,
        phi,
        closed: ff.closed,
        first_index: ff.first_index,
    }
}

/// Curvature and torsion in convention `c` from turning/twisting angles.
pub fn curvature_torsion(angles: &TurnTwist, ell: f64, c: Convention) -> Result<IntrinsicData, FrameError> {
    IntrinsicData::new(
        ell,
        c,
        angles.theta.clone(),
        angles.phi.clone(),
        angles.closed,
        angles.first_index,
    )
}

/// Frames and intrinsic data of a refined curve in one convention.
pub fn analyze(rc: &RefinedCurve, c: Convention) -> Result<(FrameField, IntrinsicData), FrameError> {
    let ff = frame_field(rc)?;
    let id = curvature_torsion(&turn_twist_angles(&ff), rc.ell(), c)?;
    Ok((ff, id))
}

/// Ratio between `ell * |kappa|` and `|D T|` for the convention at hand;
/// 1 for the inscribed convention and wherever the angle vanishes.
fn normalizer(ell_value: f64, angle: f64) -> f64 {
    if angle == 0.0 {
        1.0
    } else {
        ell_value.abs() / (2.0 * (angle.abs() / 2.0).sin())
    }
}

/// Largest residual of the scaled discrete Frenet equations
///
/// ```text
/// nu (D T^e) =  ell kappa N^v
/// nu (D N^e) = -ell kappa T^v + ell tau B^v
/// nu (D B^e) =                - ell tau N^v
/// ```
///
/// where `nu` converts the unit chord `|D T^e| = 2 sin(theta/2)` into the
/// convention's `ell kappa` (and likewise for twisting).
pub fn frenet_residual(ff: &FrameField, id: &IntrinsicData) -> Result<f64, FrameError> {
    let p = ff.pair_count();
    if ff.vertices.len() != p {
        return Err(FrameError::LengthMismatch("vertex frames missing".into()));
    }
    if id.len() != p {
        return Err(FrameError::LengthMismatch(format!(
            "{} angle entries for {} frame pairs",
            id.len(),
            p
        )));
    }
    let ell = id.ell();
    let mut worst: f64 = 0.0;
    for j in 0..p {
        let (a, b) = (ff.edges[j], ff.edges[ff.next(j)]);
        let v = ff.vertices[j];
        let lk = ell * id.kappa[j];
        let lt = ell * id.tau[j];
        let nu = if ff.is_turning(j) {
            normalizer(lk, id.theta[j])
        } else {
            normalizer(lt, id.phi[j])
        };
        let r1 = ((b.t - a.t) * nu - v.n * lk).norm();
        let r2 = ((b.n - a.n) * nu + v.t * lk - v.b * lt).norm();
        let r3 = ((b.b - a.b) * nu + v.n * lt).norm();
        worst = worst.max(r1).max(r2).max(r3);
    }
    Ok(worst)
}
