//! Fresnel integrals, the complete elliptic integral of the first kind and
//! the Jacobi elliptic functions.
//!
//! Fresnel integrals use the normalized convention
//! `C(s) = int_0^s cos(pi t^2 / 2) dt`, `S(s) = int_0^s sin(pi t^2 / 2) dt`.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Complex;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SpecfunError {
    #[error("elliptic modulus {0} outside [0, 1)")]
    ModulusOutOfRange(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FresnelPair {
    pub c: f64,
    pub s: f64,
}

const FRESNEL_SWITCH: f64 = 1.6;

/// Normalized Fresnel integrals `(C(s), S(s))`.
pub fn fresnel(s: f64) -> FresnelPair {
    let ax = s.abs();
    let (c, sn) = if ax == 0.0 {
        (0.0, 0.0)
    } else if ax < FRESNEL_SWITCH {
        fresnel_series(ax)
    } else {
        fresnel_cf(ax)
    };
    if s < 0.0 {
        FresnelPair { c: -c, s: -sn }
    } else {
        FresnelPair { c, s: sn }
    }
}

/// Power series, summed term by term until the terms drop below rounding.
fn fresnel_series(x: f64) -> (f64, f64) {
    let fact = FRAC_PI_2 * x * x;
    // term_k = x * fact^k / k!, entering C for even k and S for odd k with
    // alternating signs and denominator 2k + 1.
    let mut term = x;
    let (mut c, mut s) = (x, 0.0);
    for k in 1..200 {
        term *= fact / k as f64;
        let contrib = term / (2 * k + 1) as f64;
        match k % 4 {
            0 => c += contrib,
            1 => s += contrib,
            2 => c -= contrib,
            _ => s -= contrib,
        }
        if term < 1e-17 * c.abs().max(s.abs()) {
            break;
        }
    }
    (c, s)
}

/// Continued fraction for the complementary error function form, evaluated
/// by the modified Lentz method.
fn fresnel_cf(x: f64) -> (f64, f64) {
    let tiny = 1e-300;
    let pix2 = PI * x * x;
    let mut b = Complex::new(1.0, -pix2);
    let mut cc = Complex::new(1.0 / tiny, 0.0);
    let mut d = Complex::new(1.0, 0.0) / b;
    let mut h = d;
    let mut n = -1.0;
    for _ in 2..500 {
        n += 2.0;
        let a = -n * (n + 1.0);
        b += Complex::new(4.0, 0.0);
        d = Complex::new(1.0, 0.0) / (d * a + b);
        cc = b + Complex::new(a, 0.0) / cc;
        let del = cc * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < 1e-16 {
            break;
        }
    }
    h *= Complex::new(x, -x);
    let (sin, cos) = (0.5 * pix2).sin_cos();
    let cs = Complex::new(0.5, 0.5) * (Complex::new(1.0, 0.0) - Complex::new(cos, sin) * h);
    (cs.re, cs.im)
}

/// Validated elliptic modulus `k` in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticModulus(f64);

impl EllipticModulus {
    pub fn new(k: f64) -> Result<Self, SpecfunError> {
        if (0.0..1.0).contains(&k) {
            Ok(EllipticModulus(k))
        } else {
            Err(SpecfunError::ModulusOutOfRange(k))
        }
    }

    pub fn k(self) -> f64 {
        self.0
    }
}

/// Complete elliptic integral of the first kind, `K(k)`, by the
/// arithmetic-geometric mean.
pub fn elliptic_k(k: EllipticModulus) -> f64 {
    PI / (2.0 * agm(1.0, (1.0 - k.0 * k.0).sqrt()))
}

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    0.5 * (a + b)
}

/// Jacobi `sn(u, k)`.
pub fn jacobi_sn(u: f64, k: EllipticModulus) -> f64 {
    jacobi_sncndn(u, k).0
}

/// Jacobi `(sn, cn, dn)` by the descending Landen (AGM) scheme.
pub fn jacobi_sncndn(u: f64, k: EllipticModulus) -> (f64, f64, f64) {
    let m = k.0 * k.0;
    if m == 0.0 {
        let (s, c) = u.sin_cos();
        return (s, c, 1.0);
    }
    let mut a = vec![1.0];
    let mut c = vec![k.0];
    let mut b = (1.0 - m).sqrt();
    while c.last().unwrap().abs() > 1e-17 && a.len() < 64 {
        let an = *a.last().unwrap();
        let next = 0.5 * (an + b);
        c.push(0.5 * (an - b));
        b = (an * b).sqrt();
        a.push(next);
    }
    let n = a.len() - 1;
    let mut phi = 2f64.powi(n as i32) * a[n] * u;
    for i in (1..=n).rev() {
        phi = 0.5 * (phi + (c[i] / a[i] * phi.sin()).asin());
    }
    let (s, cn) = phi.sin_cos();
    let dn = (1.0 - m * s * s).sqrt();
    (s, cn, dn)
}
