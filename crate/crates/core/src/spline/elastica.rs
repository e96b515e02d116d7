//! Discrete elastica: bending-energy minimizers with clamped ends and fixed
//! length, the centered spline built from them, and the Sogo turning-angle
//! sequence.
//!
//! The turning angle is piecewise linear on a uniform grid of `n` cells, so
//! every cell is an exact circular arc. The unknowns are the interior node
//! angles; the energy `sum (dtheta)^2 / h` is minimized subject to the two
//! endpoint position equations by a null-space SQP method with an L1 merit
//! line search.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{wrap_angle, Spline, SplineError, SplineSegment};
use crate::curve::{CurveError, RefinedCurve, Vec3};
use crate::ngon::{centered_offset, signed_angle_2d};
use crate::specfun::{elliptic_k, jacobi_sn, EllipticModulus};
use crate::tolerances::Tolerances;

/// Elastica segment: absolute turning angles at `theta.len()` uniformly
/// spaced nodes starting at `start`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Elastica {
    pub start: [f64; 2],
    pub theta: Vec<f64>,
    pub length: f64,
    /// First-integral constant fitted to the samples.
    pub c: f64,
}

impl Elastica {
    pub fn cells(&self) -> usize {
        self.theta.len() - 1
    }

    fn h(&self) -> f64 {
        self.length / self.cells() as f64
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let h = self.h();
        let i = ((s / h).floor().max(0.0) as usize).min(self.cells() - 1);
        (i, s - i as f64 * h)
    }

    pub fn point_at(&self, s: f64) -> [f64; 2] {
        let h = self.h();
        let (cell, t) = self.locate(s);
        let mut p = self.start;
        for i in 0..cell {
            let w = cell_offset(h, self.theta[i], self.theta[i + 1]);
            p[0] += w[0];
            p[1] += w[1];
        }
        let k = (self.theta[cell + 1] - self.theta[cell]) / h;
        let w = cell_offset(t, self.theta[cell], self.theta[cell] + k * t);
        [p[0] + w[0], p[1] + w[1]]
    }

    pub fn heading_at(&self, s: f64) -> f64 {
        let (cell, t) = self.locate(s);
        let k = (self.theta[cell + 1] - self.theta[cell]) / self.h();
        self.theta[cell] + k * t
    }

    pub fn curvature_at(&self, s: f64) -> f64 {
        let (cell, _) = self.locate(s);
        (self.theta[cell + 1] - self.theta[cell]) / self.h()
    }

    pub fn energy(&self) -> f64 {
        let h = self.h();
        self.theta.windows(2).map(|w| (w[1] - w[0]).powi(2) / h).sum()
    }

    /// Least-squares constant `C` and the max-norm residual of
    /// `theta''' + theta'^3 / 2 + C theta' = 0` at the interior nodes, with
    /// derivatives from fourth-order central differences.
    pub fn euler_lagrange_residual(&self) -> (f64, f64) {
        let (d1, rest) = self.derivative_samples();
        let num: f64 = d1.iter().zip(&rest).map(|(a, b)| a * b).sum();
        let den: f64 = d1.iter().map(|a| a * a).sum();
        let c = if den > 0.0 { -num / den } else { 0.0 };
        let res = d1
            .iter()
            .zip(&rest)
            .map(|(a, b)| (b + c * a).abs())
            .fold(0.0, f64::max);
        (c, res)
    }

    /// `theta'` and `theta''' + theta'^3 / 2` at nodes 3..n-3.
    fn derivative_samples(&self) -> (Vec<f64>, Vec<f64>) {
        let h = self.h();
        let t = &self.theta;
        let n = t.len();
        let mut d1 = Vec::new();
        let mut rest = Vec::new();
        for k in 3..n.saturating_sub(3) {
            let first = (-t[k + 2] + 8.0 * t[k + 1] - 8.0 * t[k - 1] + t[k - 2]) / (12.0 * h);
            let third = (-t[k + 3] + 8.0 * t[k + 2] - 13.0 * t[k + 1] + 13.0 * t[k - 1] - 8.0 * t[k - 2] + t[k - 3])
                / (8.0 * h * h * h);
            d1.push(first);
            rest.push(third + 0.5 * first.powi(3));
        }
        (d1, rest)
    }
}

/// `sin(x/2) / (x/2)` and its first two derivatives in `x`.
fn half_sinc(d: f64) -> (f64, f64, f64) {
    let x = 0.5 * d;
    if x.abs() < 1e-3 {
        let x2 = x * x;
        let s = 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
        let s1 = -x / 3.0 + x * x2 / 30.0;
        let s2 = -1.0 / 3.0 + x2 / 10.0 - x2 * x2 / 168.0;
        return (s, 0.5 * s1, 0.25 * s2);
    }
    let (sn, cs) = x.sin_cos();
    let s = sn / x;
    let s1 = cs / x - sn / (x * x);
    let s2 = -sn / x - 2.0 * cs / (x * x) + 2.0 * sn / (x * x * x);
    (s, 0.5 * s1, 0.25 * s2)
}

/// Displacement across an arc of length `h` whose heading runs linearly
/// from `a` to `b`.
fn cell_offset(h: f64, a: f64, b: f64) -> [f64; 2] {
    let (s, _, _) = half_sinc(b - a);
    let m = 0.5 * (a + b);
    [h * s * m.cos(), h * s * m.sin()]
}

/// The finite-dimensional minimization behind [`elastica_bvp`], exposed for
/// verification. Variables are the interior node angles.
#[derive(Debug, Clone, PartialEq)]
pub struct ElasticaProblem {
    chord: [f64; 2],
    length: f64,
    cells: usize,
    theta_start: f64,
    theta_end: f64,
}

impl ElasticaProblem {
    /// End heading is chosen as the start heading plus the turn between the
    /// two tangents measured relative to the chord, without extra windings.
    pub fn new(p0: [f64; 2], t0: [f64; 2], p1: [f64; 2], t1: [f64; 2], length: f64, cells: usize) -> Self {
        let chord = [p1[0] - p0[0], p1[1] - p0[1]];
        let psi = chord[1].atan2(chord[0]);
        let a0 = t0[1].atan2(t0[0]);
        let a1 = t1[1].atan2(t1[0]);
        let phi0 = wrap_angle(a0 - psi);
        let phi1 = wrap_angle(a1 - psi);
        ElasticaProblem {
            chord,
            length,
            cells,
            theta_start: a0,
            theta_end: a0 + (phi1 - phi0),
        }
    }

    pub fn dim(&self) -> usize {
        self.cells - 1
    }

    fn h(&self) -> f64 {
        self.length / self.cells as f64
    }

    pub fn nodes(&self, x: &[f64]) -> Vec<f64> {
        let mut t = Vec::with_capacity(self.cells + 1);
        t.push(self.theta_start);
        t.extend_from_slice(x);
        t.push(self.theta_end);
        t
    }

    pub fn energy(&self, x: &[f64]) -> f64 {
        let h = self.h();
        self.nodes(x).windows(2).map(|w| (w[1] - w[0]).powi(2) / h).sum()
    }

    pub fn constraints(&self, x: &[f64]) -> [f64; 2] {
        let h = self.h();
        let t = self.nodes(x);
        let mut c = [-self.chord[0], -self.chord[1]];
        for w in t.windows(2) {
            let d = cell_offset(h, w[0], w[1]);
            c[0] += d[0];
            c[1] += d[1];
        }
        c
    }

    fn gradient(&self, x: &[f64]) -> DVector<f64> {
        let h = self.h();
        let t = self.nodes(x);
        DVector::from_fn(self.dim(), |k, _| {
            let j = k + 1;
            (2.0 / h) * ((t[j] - t[j - 1]) - (t[j + 1] - t[j]))
        })
    }

    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let h = self.h();
        let t = self.nodes(x);
        let mut jac = DMatrix::zeros(2, self.dim());
        for i in 0..self.cells {
            let (s, s1, _) = half_sinc(t[i + 1] - t[i]);
            let (sm, cm) = (0.5 * (t[i] + t[i + 1])).sin_cos();
            // d/du (u = theta_{i+1}) of h S e^{im} is h (S' + i S/2) e^{im}
            let du = mul(h * s1, 0.5 * h * s, cm, sm);
            let dv = mul(-h * s1, 0.5 * h * s, cm, sm);
            if i + 1 < self.cells {
                jac[(0, i)] += du.0;
                jac[(1, i)] += du.1;
            }
            if i >= 1 {
                jac[(0, i - 1)] += dv.0;
                jac[(1, i - 1)] += dv.1;
            }
        }
        jac
    }

    /// Hessian of the Lagrangian `E + lambda . c`, which is tridiagonal:
    /// returns the diagonal and the off-diagonal.
    fn hessian_lagrangian(&self, x: &[f64], lambda: Vector2<f64>) -> (Vec<f64>, Vec<f64>) {
        let h = self.h();
        let t = self.nodes(x);
        let p = self.dim();
        let mut diag = vec![4.0 / h; p];
        let mut off = vec![-2.0 / h; p.saturating_sub(1)];
        for i in 0..self.cells {
            let (s, s1, s2) = half_sinc(t[i + 1] - t[i]);
            let (sm, cm) = (0.5 * (t[i] + t[i + 1])).sin_cos();
            let proj = |re: f64, im: f64| {
                let z = mul(h * re, h * im, cm, sm);
                lambda[0] * z.0 + lambda[1] * z.1
            };
            // node i + 1 is variable i, node i is variable i - 1
            if i + 1 < self.cells {
                diag[i] += proj(s2 - 0.25 * s, s1);
            }
            if i >= 1 {
                diag[i - 1] += proj(s2 - 0.25 * s, -s1);
            }
            if i >= 1 && i + 1 < self.cells {
                off[i - 1] += proj(-s2 - 0.25 * s, 0.0);
            }
        }
        (diag, off)
    }

    /// Restores feasibility by minimum-norm Gauss-Newton corrections.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut x = x.to_vec();
        for _ in 0..50 {
            let c = self.constraints(&x);
            if c[0].abs().max(c[1].abs()) <= 1e-14 * self.length.max(1.0) {
                break;
            }
            let j = self.jacobian(&x);
            let jjt = &j * j.transpose();
            let Some(inv) = Matrix2::new(jjt[(0, 0)], jjt[(0, 1)], jjt[(1, 0)], jjt[(1, 1)]).try_inverse() else {
                break;
            };
            let y = inv * Vector2::new(c[0], c[1]);
            let dx = j.transpose() * DVector::from_column_slice(y.as_slice());
            for (xi, d) in x.iter_mut().zip(dx.iter()) {
                *xi -= d;
            }
        }
        x
    }

    fn merit(&self, x: &[f64], mu: f64) -> f64 {
        let c = self.constraints(x);
        self.energy(x) + mu * (c[0].abs() + c[1].abs())
    }

    /// Least-squares multipliers and the stationarity residual.
    fn multipliers(&self, g: &DVector<f64>, jac: &DMatrix<f64>) -> Option<(Vector2<f64>, f64)> {
        let jjt = jac * jac.transpose();
        let inv = Matrix2::new(jjt[(0, 0)], jjt[(0, 1)], jjt[(1, 0)], jjt[(1, 1)]).try_inverse()?;
        let jg = jac * g;
        let lambda = -(inv * Vector2::new(jg[0], jg[1]));
        let stat = g + jac.transpose() * DVector::from_column_slice(lambda.as_slice());
        Some((lambda, stat.amax()))
    }

    fn solve_from(&self, mut x: Vec<f64>, opts: &ElasticaOptions) -> LocalSolve {
        let feas_tol = 1e-13 * self.length.max(1.0);
        let scale = 4.0 / self.h();
        let mut mu = 1.0;
        let mut last = (f64::INFINITY, f64::INFINITY);
        let mut lambda_qp: Option<Vector2<f64>> = None;
        for _ in 0..opts.max_iter {
            let c = self.constraints(&x);
            let cv = Vector2::new(c[0], c[1]);
            let g = self.gradient(&x);
            let jac = self.jacobian(&x);
            let Some((lambda_ls, kkt)) = self.multipliers(&g, &jac) else {
                return LocalSolve::failed(x, last);
            };
            let feas = cv.amax();
            last = (kkt, feas);
            let lambda = lambda_qp.unwrap_or(lambda_ls);
            let (diag, off) = self.hessian_lagrangian(&x, lambda);
            // the gradient carries rounding errors of order eps |theta| / h
            let theta_max = x.iter().fold(self.theta_start.abs().max(self.theta_end.abs()), |m, v| m.max(v.abs()));
            let kkt_tol = opts.tolerance.max(64.0 * f64::EPSILON * scale * theta_max.max(1.0));
            if kkt <= kkt_tol && feas <= feas_tol {
                let (dl, ol) = self.hessian_lagrangian(&x, lambda_ls);
                let local_min = KktFactor::new(&dl, &ol, 0.0, &jac).is_some_and(|f| f.correct_inertia());
                return LocalSolve {
                    x,
                    kkt,
                    feas,
                    converged: true,
                    local_min,
                };
            }
            let mut delta = 0.0;
            let factor = loop {
                match KktFactor::new(&diag, &off, delta, &jac) {
                    Some(f) if f.correct_inertia() => break f,
                    _ => {}
                }
                delta = if delta == 0.0 { 1e-10 * scale } else { delta * 10.0 };
                if delta > 1e12 * scale {
                    return LocalSolve::failed(x, last);
                }
            };
            let Some((step, lam)) = factor.solve(&g, cv) else {
                return LocalSolve::failed(x, last);
            };
            lambda_qp = Some(lam);
            mu = f64::max(mu, 1.1 * lam.amax() + 1e-3);
            let dir = g.dot(&step) - mu * (c[0].abs() + c[1].abs());
            let base = self.merit(&x, mu);
            let trial = |alpha: f64, extra: Option<&DVector<f64>>| -> Vec<f64> {
                x.iter()
                    .enumerate()
                    .map(|(i, xi)| xi + alpha * step[i] + extra.map_or(0.0, |e| e[i]))
                    .collect()
            };
            let mut next = trial(1.0, None);
            if self.merit(&next, mu) > base + 1e-4 * dir {
                // second-order correction against the curvature of the constraints
                let ct = self.constraints(&next);
                let corr = min_norm_correction(&jac, Vector2::new(ct[0], ct[1]));
                let soc = corr.map(|corr| trial(1.0, Some(&corr)));
                match soc {
                    Some(soc) if self.merit(&soc, mu) <= base + 1e-4 * dir => next = soc,
                    _ => {
                        let mut alpha = 0.5;
                        loop {
                            next = trial(alpha, None);
                            if self.merit(&next, mu) <= base + 1e-4 * alpha * dir || alpha < 1e-12 {
                                break;
                            }
                            alpha *= 0.5;
                        }
                    }
                }
            }
            if next.iter().any(|v| !v.is_finite()) {
                return LocalSolve::failed(x, last);
            }
            x = next;
        }
        LocalSolve::failed(x, last)
    }
}

/// `-J^T (J J^T)^{-1} c`.
fn min_norm_correction(jac: &DMatrix<f64>, c: Vector2<f64>) -> Option<DVector<f64>> {
    let jjt = jac * jac.transpose();
    let inv = Matrix2::new(jjt[(0, 0)], jjt[(0, 1)], jjt[(1, 0)], jjt[(1, 1)]).try_inverse()?;
    let y = inv * c;
    Some(-(jac.transpose() * DVector::from_column_slice(y.as_slice())))
}

/// Factorization of the KKT matrix `[W J^T; J 0]` with tridiagonal `W`
/// (shifted by `delta`): an LDL^T of `W` and the 2x2 Schur complement.
struct KktFactor<'a> {
    pivots: Vec<f64>,
    mult: Vec<f64>,
    jac: &'a DMatrix<f64>,
    winv_jt: [DVector<f64>; 2],
    schur: Matrix2<f64>,
}

impl<'a> KktFactor<'a> {
    fn new(diag: &[f64], off: &[f64], delta: f64, jac: &'a DMatrix<f64>) -> Option<Self> {
        let p = diag.len();
        let mut pivots = Vec::with_capacity(p);
        let mut mult = Vec::with_capacity(p.saturating_sub(1));
        let tiny = 1e-14 * diag.iter().map(|d| d.abs()).fold(0.0, f64::max);
        for k in 0..p {
            let d = if k == 0 {
                diag[0] + delta
            } else {
                diag[k] + delta - mult[k - 1] * off[k - 1]
            };
            if !(d.abs() > tiny) {
                return None;
            }
            pivots.push(d);
            if k + 1 < p {
                mult.push(off[k] / d);
            }
        }
        let mut f = KktFactor {
            pivots,
            mult,
            jac,
            winv_jt: [DVector::zeros(0), DVector::zeros(0)],
            schur: Matrix2::zeros(),
        };
        let r0 = f.solve_w(&jac.row(0).transpose());
        let r1 = f.solve_w(&jac.row(1).transpose());
        let a = |r: &DVector<f64>, i: usize| jac.row(i).transpose().dot(r);
        f.schur = Matrix2::new(a(&r0, 0), a(&r1, 0), a(&r0, 1), a(&r1, 1));
        f.winv_jt = [r0, r1];
        Some(f)
    }

    fn solve_w(&self, b: &DVector<f64>) -> DVector<f64> {
        let p = self.pivots.len();
        let mut y = b.clone();
        for k in 1..p {
            y[k] -= self.mult[k - 1] * y[k - 1];
        }
        for k in 0..p {
            y[k] /= self.pivots[k];
        }
        for k in (0..p.saturating_sub(1)).rev() {
            y[k] -= self.mult[k] * y[k + 1];
        }
        y
    }

    /// The reduced Hessian is positive definite iff the KKT matrix has
    /// exactly two negative eigenvalues. By Sylvester's law of inertia the
    /// count is the negative pivots of `W` plus the positive eigenvalues of
    /// the Schur complement `J W^{-1} J^T`.
    fn correct_inertia(&self) -> bool {
        let neg = self.pivots.iter().filter(|&&d| d < 0.0).count();
        let s = &self.schur;
        let det = s[(0, 0)] * s[(1, 1)] - s[(0, 1)] * s[(1, 0)];
        let tr = s[(0, 0)] + s[(1, 1)];
        let pos_schur = if det < 0.0 {
            1
        } else if det > 0.0 && tr > 0.0 {
            2
        } else if det > 0.0 {
            0
        } else {
            return false;
        };
        neg + pos_schur == 2
    }

    /// Solves `W p + J^T lambda = -g`, `J p = -c`.
    fn solve(&self, g: &DVector<f64>, c: Vector2<f64>) -> Option<(DVector<f64>, Vector2<f64>)> {
        let wg = self.solve_w(g);
        let jwg = self.jac * &wg;
        let lam = self.schur.try_inverse()? * (c - Vector2::new(jwg[0], jwg[1]));
        let p = -(wg + &self.winv_jt[0] * lam[0] + &self.winv_jt[1] * lam[1]);
        Some((p, lam))
    }
}

fn mul(re: f64, im: f64, cm: f64, sm: f64) -> (f64, f64) {
    (re * cm - im * sm, re * sm + im * cm)
}

struct LocalSolve {
    x: Vec<f64>,
    kkt: f64,
    feas: f64,
    converged: bool,
    local_min: bool,
}

impl LocalSolve {
    fn failed(x: Vec<f64>, (kkt, feas): (f64, f64)) -> Self {
        LocalSolve {
            x,
            kkt,
            feas,
            converged: false,
            local_min: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElasticaOptions {
    /// Grid cells per segment.
    pub cells: usize,
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Stationarity tolerance, max norm of the Lagrangian gradient.
    pub tolerance: f64,
    /// When set, the grid is doubled from `cells` until the Euler-Lagrange
    /// finite-difference residual drops below this value.
    pub residual_target: Option<f64>,
    pub max_cells: usize,
}

impl Default for ElasticaOptions {
    fn default() -> Self {
        ElasticaOptions {
            cells: 64,
            restarts: 8,
            seed: 0x5eed,
            max_iter: 200,
            tolerance: 1e-11,
            residual_target: Some(1e-5),
            max_cells: 16384,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElasticaSolution {
    /// An [`Elastica`], or a [`super::Line`] for straight data.
    pub segment: SplineSegment,
    pub energy: f64,
    /// Stationarity residual of the returned solution.
    pub residual: f64,
    /// Number of distinct local minima found across restarts; more than one
    /// means the boundary data admit several elastica.
    pub distinct_minima: usize,
}

impl ElasticaSolution {
    pub fn multiple_solutions(&self) -> bool {
        self.distinct_minima > 1
    }
}

pub fn elastica_bvp(p0: [f64; 2], t0: [f64; 2], p1: [f64; 2], t1: [f64; 2], length: f64) -> Result<ElasticaSolution, SplineError> {
    elastica_bvp_with(p0, t0, p1, t1, length, &ElasticaOptions::default())
}

/// Minimal bending-energy curve of the given length from `(p0, t0)` to
/// `(p1, t1)`. Restarts from perturbed initial profiles; the lowest-energy
/// local minimum is returned.
pub fn elastica_bvp_with(
    p0: [f64; 2],
    t0: [f64; 2],
    p1: [f64; 2],
    t1: [f64; 2],
    length: f64,
    opts: &ElasticaOptions,
) -> Result<ElasticaSolution, SplineError> {
    let chord = (p1[0] - p0[0]).hypot(p1[1] - p0[1]);
    if !(chord > 0.0) {
        return Err(SplineError::CoincidentPoints);
    }
    let problem = ElasticaProblem::new(p0, t0, p1, t1, length, opts.cells.max(16));
    let aligned = wrap_angle(problem.theta_start - (p1[1] - p0[1]).atan2(p1[0] - p0[0])).abs() < 1e-13
        && (problem.theta_end - problem.theta_start).abs() < 1e-13;
    if length < chord * (1.0 - 1e-12) {
        return Err(SplineError::Infeasible { length, chord });
    }
    if length <= chord * (1.0 + 1e-12) {
        if aligned {
            return Ok(ElasticaSolution {
                segment: SplineSegment::line(p0, p1),
                energy: 0.0,
                residual: 0.0,
                distinct_minima: 1,
            });
        }
        return Err(SplineError::Infeasible { length, chord });
    }
    let p = problem.dim();
    let n = problem.cells as f64;
    let base: Vec<f64> = (1..=p)
        .map(|k| problem.theta_start + (problem.theta_end - problem.theta_start) * k as f64 / n)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut minima: Vec<(Vec<f64>, f64, f64)> = Vec::new();
    let mut best_residual = f64::INFINITY;
    for restart in 0..opts.restarts.max(1) {
        let mut x0 = base.clone();
        if restart > 0 {
            let amps: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.5..1.5)).collect();
            for (k, xk) in x0.iter_mut().enumerate() {
                let s = (k + 1) as f64 / n;
                for (m, a) in amps.iter().enumerate() {
                    *xk += a * (std::f64::consts::PI * (m + 1) as f64 * s).sin() / (m + 1) as f64;
                }
            }
        }
        let sol = problem.solve_from(x0, opts);
        best_residual = best_residual.min(sol.kkt.max(sol.feas));
        if !(sol.converged && sol.local_min) {
            continue;
        }
        let e = problem.energy(&sol.x);
        let known = minima.iter().any(|(x, _, _)| {
            x.iter().zip(&sol.x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) < 1e-6
        });
        if !known {
            minima.push((sol.x, e, sol.kkt));
        }
    }
    let distinct = minima.len();
    let Some((mut x, mut energy, mut residual)) = minima.into_iter().min_by(|a, b| a.1.total_cmp(&b.1)) else {
        return Err(SplineError::NoConvergence {
            residual: best_residual,
        });
    };
    let mut problem = problem;
    let make = |problem: &ElasticaProblem, x: &[f64]| {
        let mut el = Elastica {
            start: p0,
            theta: problem.nodes(x),
            length,
            c: 0.0,
        };
        let (c, res) = el.euler_lagrange_residual();
        el.c = c;
        (el, res)
    };
    let (mut el, mut el_res) = make(&problem, &x);
    if let Some(target) = opts.residual_target {
        // Doubling the grid shrinks the discretization error by four until
        // rounding in the third differences takes over; stop there.
        while el_res > target && problem.cells * 2 <= opts.max_cells {
            let fine = ElasticaProblem {
                cells: problem.cells * 2,
                ..problem.clone()
            };
            let nodes = problem.nodes(&x);
            let guess: Vec<f64> = (1..fine.cells)
                .map(|k| {
                    if k % 2 == 0 {
                        nodes[k / 2]
                    } else {
                        0.5 * (nodes[k / 2] + nodes[k / 2 + 1])
                    }
                })
                .collect();
            let sol = fine.solve_from(guess, opts);
            if !(sol.converged && sol.local_min) {
                break;
            }
            let (fine_el, fine_res) = make(&fine, &sol.x);
            if fine_res >= el_res {
                break;
            }
            let improved = fine_res < 0.5 * el_res;
            problem = fine;
            energy = problem.energy(&sol.x);
            residual = sol.kkt;
            x = sol.x;
            el = fine_el;
            el_res = fine_res;
            if !improved {
                break;
            }
        }
    }
    Ok(ElasticaSolution {
        segment: SplineSegment::Elastica(el),
        energy,
        residual,
        distinct_minima: distinct,
    })
}

pub fn spline_centered(rc: &RefinedCurve) -> Result<Spline, SplineError> {
    spline_centered_with(rc, &ElasticaOptions::default()).map(|(s, _)| s)
}

/// Elastica spline through the centered offset points of a planar refined
/// curve. Each vertex with turning angle `theta` moves toward the center of
/// the centered circle of the polygon with side `2 ell` and exterior angle
/// `theta`, and the spline direction there is the vertex tangent. Span
/// lengths equal the polyline length between control points. Also returns
/// the span indices whose boundary data admit several elastica.
pub fn spline_centered_with(rc: &RefinedCurve, opts: &ElasticaOptions) -> Result<(Spline, Vec<usize>), SplineError> {
    if rc.dim() != 2 {
        return Err(SplineError::NonPlanar);
    }
    let tol = Tolerances::DEFAULT;
    let spread = rc.length_spread();
    if spread > tol.uniform_length_rel {
        let l = rc.edge_lengths();
        let min = l.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = l.iter().cloned().fold(0.0, f64::max);
        return Err(CurveError::NonUniformLength { min, max }.into());
    }
    let n = rc.len();
    if n < 3 {
        return Err(SplineError::TooFewPoints { needed: 3, got: n });
    }
    let pts = rc.points();
    let ell = rc.ell();
    let side = 2.0 * ell;
    let unit = |v: Vec3| v / v.norm();
    let mut controls: Vec<(usize, [f64; 2], [f64; 2])> = Vec::new();
    for j in 0..n {
        let interior = rc.closed() || (j > 0 && j + 1 < n);
        if interior && !rc.is_vertex(j) {
            continue;
        }
        let p = pts[j];
        if !interior {
            let e = unit(if j == 0 { rc.edge(0) } else { rc.edge(n - 2) });
            controls.push((j, [p.x, p.y], [e.x, e.y]));
            continue;
        }
        let u = unit(rc.edge((j + n - 1) % n));
        let w = unit(rc.edge(j % n));
        let theta = signed_angle_2d(u, w);
        let tv = unit(u + w);
        let off = if theta == 0.0 {
            0.0
        } else {
            centered_offset(theta.abs() / side, 2.0 / side)
        };
        let inward = Vec3::new(-tv.y, tv.x, 0.0) * theta.signum();
        let q = p + inward * off;
        controls.push((j, [q.x, q.y], [tv.x, tv.y]));
    }
    let spans = if rc.closed() { controls.len() } else { controls.len() - 1 };
    let mut segments = Vec::with_capacity(spans);
    let mut multiple = Vec::new();
    for i in 0..spans {
        let (ja, pa, ta) = controls[i];
        let (jb, pb, tb) = controls[(i + 1) % controls.len()];
        let steps = (jb + n - ja) % n;
        let steps = if steps == 0 { n } else { steps };
        let length = ell * steps as f64;
        let sol = elastica_bvp_with(pa, ta, pb, tb, length, opts).map_err(|e| SplineError::Segment {
            index: i,
            source: Box::new(e),
        })?;
        if sol.multiple_solutions() {
            multiple.push(i);
        }
        segments.push(sol.segment);
    }
    Ok((Spline::new(segments, rc.closed()), multiple))
}

/// Turning angles `theta_j = 2 asin(sin(theta0/2) sn(K (N - j) / N, k))`
/// for `j = 0..=N`, a discrete elastica profile.
pub fn sogo_turning_angles(theta0: f64, k: f64, steps: usize) -> Result<Vec<f64>, SplineError> {
    let m = EllipticModulus::new(k)?;
    if steps < 2 {
        return Err(SplineError::TooFewPoints { needed: 2, got: steps });
    }
    let kk = elliptic_k(m);
    let a = (0.5 * theta0).sin();
    Ok((0..=steps)
        .map(|j| match j {
            0 => theta0,
            j if j == steps => 0.0,
            j => {
                let u = kk * (steps - j) as f64 / steps as f64;
                2.0 * (a * jacobi_sn(u, m)).asin()
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{refine, DiscreteCurve};
    use std::f64::consts::PI;

    fn dir(a: f64) -> [f64; 2] {
        [a.cos(), a.sin()]
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let pr = ElasticaProblem::new([0.0, 0.0], dir(0.3), [1.5, 0.4], dir(-0.5), 2.0, 16);
        let x: Vec<f64> = (0..pr.dim()).map(|k| 0.3 - 0.05 * k as f64 + 0.1 * (k as f64).sin()).collect();
        let jac = pr.jacobian(&x);
        let g = pr.gradient(&x);
        let lam = Vector2::new(0.7, -1.3);
        let w = pr.hessian_lagrangian(&x, lam);
        let h = 1e-6;
        for k in 0..pr.dim() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += h;
            xm[k] -= h;
            let (cp, cm) = (pr.constraints(&xp), pr.constraints(&xm));
            assert!(((cp[0] - cm[0]) / (2.0 * h) - jac[(0, k)]).abs() < 1e-8);
            assert!(((cp[1] - cm[1]) / (2.0 * h) - jac[(1, k)]).abs() < 1e-8);
            let de = (pr.energy(&xp) - pr.energy(&xm)) / (2.0 * h);
            assert!((de - g[k]).abs() < 1e-6);
            let lag = |x: &[f64]| {
                let gl = pr.gradient(x) + pr.jacobian(x).transpose() * DVector::from_column_slice(lam.as_slice());
                gl
            };
            let col = (lag(&xp) - lag(&xm)) / (2.0 * h);
            for i in 0..pr.dim() {
                let want = match i.abs_diff(k) {
                    0 => w.0[i],
                    1 => w.1[i.min(k)],
                    _ => 0.0,
                };
                assert!((col[i] - want).abs() < 1e-6, "{i},{k}");
            }
        }
    }

    #[test]
    fn straight_data() {
        let s = elastica_bvp([0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [1.0, 0.0], 2.0).unwrap();
        assert_eq!(s.segment.type_name(), "line");
        assert_eq!(s.energy, 0.0);
        assert!(matches!(
            elastica_bvp([0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [1.0, 0.0], 1.5),
            Err(SplineError::Infeasible { .. })
        ));
    }

    #[test]
    fn circular_data_give_the_arc() {
        let r: f64 = 1.5;
        let sweep: f64 = 1.2;
        let p1 = [r * sweep.sin(), r * (1.0 - sweep.cos())];
        let s = elastica_bvp([0.0, 0.0], [1.0, 0.0], p1, dir(sweep), r * sweep).unwrap();
        assert!((s.energy - r * sweep / (r * r)).abs() < 1e-8, "{}", s.energy);
        let SplineSegment::Elastica(e) = &s.segment else { panic!() };
        for i in 0..=20 {
            let t = e.length * i as f64 / 20.0;
            assert!((e.curvature_at(t) - 1.0 / r).abs() < 1e-6);
        }
        let end = s.segment.end_pose();
        assert!((end.point[0] - p1[0]).hypot(end.point[1] - p1[1]) < 1e-10);
    }

    #[test]
    fn generic_solution_is_a_local_minimum() {
        let s = elastica_bvp([0.0, 0.0], dir(0.8), [2.0, 0.5], dir(-0.4), 2.6).unwrap();
        assert!(s.residual <= 1e-8);
        let SplineSegment::Elastica(e) = &s.segment else { panic!() };
        let pr = ElasticaProblem::new([0.0, 0.0], dir(0.8), [2.0, 0.5], dir(-0.4), 2.6, e.cells());
        let x = e.theta[1..e.cells()].to_vec();
        let e0 = pr.energy(&x);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let d: Vec<f64> = (0..x.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            let y: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + 1e-4 * b / norm).collect();
            let y = pr.project(&y);
            assert!(pr.energy(&y) >= e0 - 1e-10);
        }
        let end = s.segment.end_pose();
        assert!((end.point[0] - 2.0).hypot(end.point[1] - 0.5) < 1e-10);
        assert!(wrap_angle(end.heading + 0.4).abs() < 1e-14);
    }

    #[test]
    fn euler_lagrange_residual_is_small() {
        for (a0, p1, a1, l) in [(0.8, [2.0, 0.5], -0.4, 2.6), (0.3, [1.0, 0.0], 0.3, 1.5), (1.2, [1.0, 1.0], 2.0, 2.0)] {
            let s = elastica_bvp([0.0, 0.0], dir(a0), p1, dir(a1), l).unwrap();
            let SplineSegment::Elastica(e) = &s.segment else { panic!() };
            let (c, res) = e.euler_lagrange_residual();
            assert!(res <= 1e-4, "{res}");
            assert_eq!(c, e.c);
        }
    }

    #[test]
    fn centered_spline_of_regular_polygon_is_circular() {
        let n = 7;
        let pts: Vec<[f64; 2]> = (0..n)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / n as f64;
                [a.cos(), a.sin()]
            })
            .collect();
        let dc = DiscreteCurve::planar(&pts, true).unwrap();
        let rc = refine(&dc).unwrap();
        let sp = spline_centered(&rc).unwrap();
        assert_eq!(sp.segments.len(), n);
        assert!((sp.length() - dc.total_length()).abs() < 1e-9);
        sp.check_g1(1e-9, 1e-9).unwrap();
        let side = dc.edge(0).norm();
        let radius = side / (2.0 * PI / n as f64);
        for seg in &sp.segments {
            for i in 0..=10 {
                let s = seg.length() * i as f64 / 10.0;
                assert!((seg.curvature_at(s) - 1.0 / radius).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn sogo_endpoints() {
        let t = sogo_turning_angles(1.1, 0.6, 10).unwrap();
        assert_eq!(t[0], 1.1);
        assert_eq!(t[10], 0.0);
        let t = sogo_turning_angles(0.9, 0.0, 12).unwrap();
        for (j, v) in t.iter().enumerate() {
            let want = 2.0 * ((0.45f64).sin() * (PI / 2.0 * (12 - j) as f64 / 12.0).sin()).asin();
            assert!((v - want).abs() < 1e-14);
        }
        assert!(sogo_turning_angles(0.5, 1.0, 5).is_err());
        assert!(sogo_turning_angles(0.5, 0.3, 1).is_err());
    }
}
