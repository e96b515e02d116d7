//! Numerical tolerances shared by every module.
//!
//! Each operation documents which field it reads. The defaults are the
//! thresholds the test suites are written against.

/// All tolerances in one place.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative spread `(max - min) / max` allowed between edge lengths of a
    /// curve that is treated as parametrized proportional to arc length.
    pub uniform_length_rel: f64,
    /// Absolute error allowed in the refined-curve midpoint invariant.
    pub midpoint_abs: f64,
    /// Cross-product norm below which two unit tangents count as parallel.
    pub parallel_cross: f64,
    /// Norm below which a sum of two unit vectors counts as degenerate.
    pub degenerate_sum: f64,
    /// Orthonormality slack for user supplied frames.
    pub orthonormal: f64,
    /// Slack on angle range checks (`[0, pi/2]` and friends).
    pub angle_slack: f64,
    /// Largest Frenet residual accepted by the analysis report.
    pub frenet_residual: f64,
    /// Largest rms error for two curves to be reported congruent.
    pub congruence_rms: f64,
    /// Upper bound on the number of inflections a smooth curve may have
    /// before circumscribed discretization gives up.
    pub max_inflections: usize,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        uniform_length_rel: 1e-9,
        midpoint_abs: 1e-12,
        parallel_cross: 1e-10,
        degenerate_sum: 1e-10,
        orthonormal: 1e-12,
        angle_slack: 1e-12,
        frenet_residual: 1e-10,
        congruence_rms: 1e-9,
        max_inflections: 64,
    };

    /// Default tolerances with the residual and congruence thresholds
    /// replaced by `tol`.
    pub fn with_tol(tol: f64) -> Self {
        Tolerances {
            frenet_residual: tol,
            congruence_rms: tol,
            ..Self::DEFAULT
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
