//! Independent reference computations for tests: adaptive quadrature,
//! inversion of the incomplete elliptic integral, and a circle/cylinder fit.
#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss-Kronrod integral of `f` over `[a, b]`: the interval with
/// the largest error estimate is bisected until the total estimate drops
/// below `tol` (or rounding level) or the interval budget runs out.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let mut parts = vec![(a, b, gk15(&f, a, b))];
    for _ in 0..4000 {
        let total: f64 = parts.iter().map(|p| p.2 .0).sum();
        let err: f64 = parts.iter().map(|p| p.2 .1).sum();
        if err <= tol.max(1e-15 * total.abs()) {
            break;
        }
        let (i, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .unwrap();
        let (lo, hi, _) = parts.swap_remove(i);
        let m = 0.5 * (lo + hi);
        parts.push((lo, m, gk15(&f, lo, m)));
        parts.push((m, hi, gk15(&f, m, hi)));
    }
    parts.iter().map(|p| p.2 .0).sum()
}

/// Incomplete elliptic integral of the first kind by quadrature.
pub fn elliptic_f(phi: f64, k: f64) -> f64 {
    integrate(|t| 1.0 / (1.0 - k * k * t.sin().powi(2)).sqrt(), 0.0, phi, 1e-15)
}

/// `sn(u, k)` by solving `F(phi, k) = u` with safeguarded Newton steps.
pub fn jacobi_sn(u: f64, k: f64) -> f64 {
    let kk = elliptic_f(FRAC_PI_2, k);
    // F(phi + pi) = F(phi) + 2K, so phi lies within a bracket of width pi.
    let mut lo = (u / (2.0 * kk)).floor() * std::f64::consts::PI - FRAC_PI_2;
    let mut hi = lo + 2.0 * std::f64::consts::PI;
    let mut phi = u * FRAC_PI_2 / kk;
    for _ in 0..200 {
        let r = elliptic_f(phi, k) - u;
        if r > 0.0 {
            hi = phi;
        } else {
            lo = phi;
        }
        let d = 1.0 / (1.0 - k * k * phi.sin().powi(2)).sqrt();
        let mut next = phi - r / d;
        if next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        if (next - phi).abs() < 1e-15 {
            phi = next;
            break;
        }
        phi = next;
    }
    phi.sin()
}

/// Algebraic (Kasa) least-squares circle fit of planar points; returns
/// `(cx, cy, r)`.
pub fn fit_circle(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
    let (mut suu, mut suv, mut svv, mut suuu, mut svvv, mut suvv, mut svuu) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y) in pts {
        let (u, v) = (x - mx, y - my);
        suu += u * u;
        suv += u * v;
        svv += v * v;
        suuu += u * u * u;
        svvv += v * v * v;
        suvv += u * v * v;
        svuu += v * u * u;
    }
    let r1 = 0.5 * (suuu + suvv);
    let r2 = 0.5 * (svvv + svuu);
    let det = suu * svv - suv * suv;
    let uc = (r1 * svv - r2 * suv) / det;
    let vc = (suu * r2 - suv * r1) / det;
    let r = (uc * uc + vc * vc + (suu + svv) / n).sqrt();
    (uc + mx, vc + my, r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_sanity() {
        let v = integrate(|x| x.exp(), 0.0, 1.0, 1e-15);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-14);
        let v = integrate(f64::sin, 0.0, 20.0, 1e-14);
        assert!((v - (1.0 - 20f64.cos())).abs() < 1e-12);
    }

    #[test]
    fn circle_fit_sanity() {
        let pts: Vec<(f64, f64)> = (0..7)
            .map(|i| {
                let a = 0.3 + i as f64 * 0.4;
                (1.0 + 2.0 * a.cos(), -3.0 + 2.0 * a.sin())
            })
            .collect();
        let (x, y, r) = fit_circle(&pts);
        assert!((x - 1.0).abs() < 1e-12 && (y + 3.0).abs() < 1e-12 && (r - 2.0).abs() < 1e-12);
    }
}
