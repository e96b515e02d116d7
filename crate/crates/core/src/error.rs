//! Crate-wide error type.

use thiserror::Error;

use crate::curve::CurveError;
use crate::discretize::DiscretizeError;
use crate::frames::FrameError;
use crate::io::IoError;
use crate::ngon::NgonError;
use crate::reconstruct::ReconstructError;
use crate::specfun::SpecfunError;
use crate::spline::SplineError;
use crate::svg::SvgError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("curve: {0}")]
    Curve(#[from] CurveError),
    #[error("ngon: {0}")]
    Ngon(#[from] NgonError),
    #[error("frames: {0}")]
    Frames(#[from] FrameError),
    #[error("reconstruct: {0}")]
    Reconstruct(#[from] ReconstructError),
    #[error("discretize: {0}")]
    Discretize(#[from] DiscretizeError),
    #[error("specfun: {0}")]
    Specfun(#[from] SpecfunError),
    #[error("spline: {0}")]
    Spline(#[from] SplineError),
    #[error("io: {0}")]
    Io(#[from] IoError),
    #[error("svg: {0}")]
    Svg(#[from] SvgError),
}

/// Variant name taken from the derived `Debug` output.
fn variant(debug: String) -> String {
    let end = debug.find(|c: char| !c.is_alphanumeric()).unwrap_or(debug.len());
    debug[..end].to_string()
}

impl Error {
    /// Module-qualified code such as `curve.NonUniformLength`.
    pub fn code(&self) -> String {
        let (module, inner) = match self {
            Error::Curve(e) => ("curve", variant(format!("{e:?}"))),
            Error::Ngon(e) => ("ngon", variant(format!("{e:?}"))),
            Error::Frames(e) => ("frames", variant(format!("{e:?}"))),
            Error::Reconstruct(e) => ("reconstruct", variant(format!("{e:?}"))),
            Error::Discretize(e) => ("discretize", variant(format!("{e:?}"))),
            Error::Specfun(e) => ("specfun", variant(format!("{e:?}"))),
            Error::Spline(SplineError::Segment { source, .. }) => ("spline", variant(format!("{source:?}"))),
            Error::Spline(e) => ("spline", variant(format!("{e:?}"))),
            Error::Io(e) => ("io", variant(format!("{e:?}"))),
            Error::Svg(e) => ("svg", variant(format!("{e:?}"))),
        };
        format!("{module}.{inner}")
    }

    /// Whether the failure is numerical (a solver gave up or an invariant
    /// check failed) rather than a problem with the input.
    pub fn is_numerical(&self) -> bool {
        fn spline(e: &SplineError) -> bool {
            match e {
                SplineError::NoConvergence { .. } | SplineError::G1Violation { .. } => true,
                SplineError::Segment { source, .. } => spline(source),
                _ => false,
            }
        }
        matches!(self, Error::Spline(e) if spline(e))
    }

    /// Process exit code: 1 for numerical failures, 2 for input errors.
    pub fn exit_code(&self) -> i32 {
        if self.is_numerical() {
            1
        } else {
            2
        }
    }
}
