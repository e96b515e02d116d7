//! Discrete curves under three curvature conventions.
//!
//! A polygon can be paired with a circle in three natural ways: its vertices
//! lie on the circle ([`Convention::Inscribed`]), its edges touch the circle
//! ([`Convention::Circumscribed`]), or its perimeter equals the circumference
//! ([`Convention::Centered`]). Each pairing gives its own discrete curvature
//! and torsion. This crate builds the whole theory on top of that choice:
//!
//! - [`curve`]: curve containers, the midpoint refinement and the `D`/`M` calculus.
//! - [`ngon`]: the polygon/circle kernel that every other module is checked against.
//! - [`frames`]: edge and vertex Frenet frames, turning and twisting angles,
//!   curvature/torsion profiles and an exact Frenet-equation verifier.
//! - [`reconstruct`]: rebuild a curve from its lengths and angles, and test
//!   congruence up to rigid motion.
//! - [`discretize`]: inscribed, circumscribed and centered discretizations of
//!   smooth planar curves.
//! - [`specfun`]: Fresnel integrals, complete elliptic integral `K`, Jacobi `sn`.
//! - [`spline`]: arc, clothoid and elastica splines of planar polylines.
//! - [`io`] and [`svg`]: file formats and rendering used by the command line tool.

pub mod curve;
pub mod discretize;
pub mod error;
pub mod frames;
pub mod io;
pub mod ngon;
pub mod quad;
pub mod reconstruct;
pub mod specfun;
pub mod spline;
pub mod svg;
pub mod tolerances;

#[cfg(test)]
mod oracle;

pub use curve::{DiscreteCurve, DiscreteMap, RefinedCurve, Vec3};
pub use error::Error;
pub use frames::{FrameField, IntrinsicData};
pub use ngon::Convention;
pub use tolerances::Tolerances;
