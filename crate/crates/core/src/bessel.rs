//! Bessel functions `J_ν`, `Y_ν` of real order `0 ≤ ν < 2` and positive
//! argument, with derivatives.
//!
//! Steed's continued fractions give `J'/J` and, for `x ≥ 2`, the complex
//! ratio `(J' + iY')/(J + iY)`; below 2 Temme's series supplies `Y`. The
//! order is shifted to `|μ| ≤ 1/2` and recurred back.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// `J_ν(x)`, `Y_ν(x)` and their derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesselJY {
    pub j: f64,
    pub y: f64,
    pub jp: f64,
    pub yp: f64,
}

const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;
const MAXIT: usize = 100_000;
const XMIN: f64 = 2.0;

/// Taylor coefficients of `1/Γ(1 + μ) = Σ_k C[k] μ^k`.
#[allow(clippy::excessive_precision)]
const RGAMMA: [f64; 26] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_9,
    -0.042_002_635_034_095_236,
    0.166_538_611_382_291_5,
    -0.042_197_734_555_544_34,
    -0.009_621_971_527_876_973,
    0.007_218_943_246_663_1,
    -0.001_165_167_591_859_065,
    -0.000_215_241_674_114_951,
    0.000_128_050_282_388_116_2,
    -2.013_485_478_078_824e-5,
    -1.250_493_482_142_671e-6,
    1.133_027_231_981_696e-6,
    -2.056_338_416_977_607e-7,
    6.116_095_104_481_416e-9,
    5.002_007_644_469_223e-9,
    -1.181_274_570_487_02e-9,
    1.043_426_711_691_1e-10,
    7.782_263_439_905_071e-12,
    -3.696_805_618_642_206e-12,
    5.100_370_287_454_476e-13,
    -2.058_326_053_566_507e-14,
    -5.348_122_539_423_018e-15,
    1.226_778_628_238_261e-15,
    -1.181_259_301_697_459e-16,
];

/// `(Γ₁, Γ₂, 1/Γ(1+μ), 1/Γ(1−μ))` for Temme's series, `|μ| ≤ 1/2`, with
/// `Γ₁ = (1/Γ(1−μ) − 1/Γ(1+μ))/(2μ)` and `Γ₂ = (1/Γ(1−μ) + 1/Γ(1+μ))/2`.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let m2 = mu * mu;
    let (mut odd, mut even, mut p) = (0.0, 0.0, 1.0);
    for k in 0..RGAMMA.len() / 2 {
        even += RGAMMA[2 * k] * p;
        odd += RGAMMA[2 * k + 1] * p;
        p *= m2;
    }
    let gampl = even + mu * odd;
    let gammi = even - mu * odd;
    (-odd, even, gampl, gammi)
}

/// `J_ν(x)`, `Y_ν(x)`, `J_ν'(x)`, `Y_ν'(x)` for `0 ≤ ν < 2`, `x > 0`.
pub fn jy(nu: f64, x: f64) -> Result<BesselJY> {
    if !(nu.is_finite() && (0.0..2.0).contains(&nu)) {
        return Err(Error::Parameter(format!("Bessel order {nu} outside [0, 2)")));
    }
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain(format!("Bessel argument {x} must be positive")));
    }
    let nl = if x < XMIN {
        (nu + 0.5) as usize
    } else {
        (nu - x + 1.5).max(0.0) as usize
    };
    let xmu = nu - nl as f64;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let w = xi2 / PI;

    // J'/J at order ν by the continued fraction CF1.
    let mut isign = 1.0;
    let mut h = (nu * xi).max(FPMIN);
    let mut b = xi2 * nu;
    let mut d = 0.0;
    let mut c = h;
    let mut converged = false;
    for _ in 0..MAXIT {
        b += xi2;
        d = b - d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b - 1.0 / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if d < 0.0 {
            isign = -isign;
        }
        if (del - 1.0).abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Evaluation(format!("CF1 failed for J_{nu}({x})")));
    }
    let mut rjl = isign * FPMIN;
    let mut rjpl = h * rjl;
    let rjl1 = rjl;
    let rjp1 = rjpl;
    let mut fact = nu * xi;
    for _ in 0..nl {
        let rjtemp = fact * rjl + rjpl;
        fact -= xi;
        rjpl = fact * rjtemp - rjl;
        rjl = rjtemp;
    }
    if rjl == 0.0 {
        rjl = EPS;
    }
    let f = rjpl / rjl;

    let (rjmu, mut rymu, mut ry1);
    if x < XMIN {
        let x2 = 0.5 * x;
        let pimu = PI * xmu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = xmu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(xmu);
        let mut ff = 2.0 / PI * fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let e = e.exp();
        let mut p = e / (gampl * PI);
        let mut q = 1.0 / (e * PI * gammi);
        let pimu2 = 0.5 * pimu;
        let fact3 = if pimu2.abs() < EPS { 1.0 } else { pimu2.sin() / pimu2 };
        let r = PI * pimu2 * fact3 * fact3;
        let mut c = 1.0;
        let d = -x2 * x2;
        let mut sum = ff + r * q;
        let mut sum1 = p;
        let mut converged = false;
        for i in 1..MAXIT {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - xmu2);
            c *= d / fi;
            p /= fi - xmu;
            q /= fi + xmu;
            let del = c * (ff + r * q);
            sum += del;
            let del1 = c * p - fi * del;
            sum1 += del1;
            if del.abs() < (1.0 + sum.abs()) * EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Evaluation(format!("Temme series failed for Y_{nu}({x})")));
        }
        rymu = -sum;
        ry1 = -sum1 * xi2;
        let rymup = xmu * xi * rymu - ry1;
        rjmu = w / (rymup - f * rymu);
    } else {
        // Steed's CF2 for p + iq = (J' + iY')/(J + iY).
        let mut a = 0.25 - xmu2;
        let mut p = -0.5 * xi;
        let mut q = 1.0;
        let br = 2.0 * x;
        let mut bi = 2.0;
        let mut fact = a * xi / (p * p + q * q);
        let mut cr = br + q * fact;
        let mut ci = bi + p * fact;
        let mut den = br * br + bi * bi;
        let mut dr = br / den;
        let mut di = -bi / den;
        let mut dlr = cr * dr - ci * di;
        let mut dli = cr * di + ci * dr;
        let mut temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        let mut converged = false;
        for i in 2..MAXIT {
            a += 2.0 * (i as f64 - 1.0);
            bi += 2.0;
            dr = a * dr + br;
            di = a * di + bi;
            if dr.abs() + di.abs() < FPMIN {
                dr = FPMIN;
            }
            fact = a / (cr * cr + ci * ci);
            cr = br + cr * fact;
            ci = bi - ci * fact;
            if cr.abs() + ci.abs() < FPMIN {
                cr = FPMIN;
            }
            den = dr * dr + di * di;
            dr /= den;
            di /= -den;
            dlr = cr * dr - ci * di;
            dli = cr * di + ci * dr;
            temp = p * dlr - q * dli;
            q = p * dli + q * dlr;
            p = temp;
            if (dlr - 1.0).abs() + dli.abs() < EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Evaluation(format!("CF2 failed for Y_{nu}({x})")));
        }
        let gam = (p - f) / q;
        rjmu = (w / ((p - f) * gam + q)).sqrt().copysign(rjl);
        rymu = rjmu * gam;
        let rymup = rymu * (p + q / gam);
        ry1 = xmu * xi * rymu - rymup;
    }
    let fact = rjmu / rjl;
    let j = rjl1 * fact;
    let jp = rjp1 * fact;
    for i in 1..=nl {
        let rytemp = (xmu + i as f64) * xi2 * ry1 - rymu;
        rymu = ry1;
        ry1 = rytemp;
    }
    let y = rymu;
    let yp = nu * xi * rymu - ry1;
    Ok(BesselJY { j, y, jp, yp })
}

/// Taylor coefficients `a_k = y^(k)(z0)/k!`, `k ≤ n`, of the solution of
/// Bessel's equation of order `ν` with `y(z0) = a0`, `y'(z0) = a1`.
pub fn taylor_coefficients(nu: f64, z0: f64, a0: f64, a1: f64, n: usize) -> Vec<f64> {
    let mut a = vec![0.0; n.max(1) + 1];
    a[0] = a0;
    a[1] = a1;
    let at = |a: &[f64], i: isize| if i < 0 { 0.0 } else { a[i as usize] };
    for k in 0..n.saturating_sub(1) {
        let kf = k as f64;
        let ki = k as isize;
        let rest = (2.0 * z0 * kf * (kf + 1.0) + z0 * (kf + 1.0)) * a[k + 1]
            + (kf * (kf - 1.0) + kf + z0 * z0 - nu * nu) * a[k]
            + 2.0 * z0 * at(&a, ki - 1)
            + at(&a, ki - 2);
        a[k + 2] = -rest / (z0 * z0 * (kf + 2.0) * (kf + 1.0));
    }
    a.truncate(n + 1);
    a
}
