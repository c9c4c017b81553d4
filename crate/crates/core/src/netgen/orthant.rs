//! Upper-orthant probabilities of the standard bivariate normal.

use std::f64::consts::PI;

use super::normal::{std_normal_cdf, std_normal_sf};
use crate::error::{Error, Result};

/// `P(W1 >= h, W2 >= k)` for a standard bivariate normal with correlation `rho`.
///
/// Uses `L(h,k,ρ) = (1-Φ(h))(1-Φ(k)) + (1/2π) ∫_0^{asin ρ} exp(-(h²+k²-2hk sin t) / (2cos²t)) dt`,
/// whose integrand is bounded on the whole range, and adaptive Gauss–Kronrod
/// quadrature. `|rho| = 1` uses the comonotone / countermonotone limits.
pub fn orthant_prob(h: f64, k: f64, rho: f64) -> Result<f64> {
    if !(rho.abs() <= 1.0) || h.is_nan() || k.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "orthant probability needs |rho| <= 1, got rho = {rho}"
        )));
    }
    if rho == 1.0 {
        return Ok(std_normal_sf(h.max(k)));
    }
    if rho == -1.0 {
        // W2 = -W1: need h <= W1 <= -k
        return Ok((std_normal_cdf(-k) - std_normal_cdf(h)).max(0.0));
    }
    let base = std_normal_sf(h) * std_normal_sf(k);
    if rho == 0.0 || h.is_infinite() || k.is_infinite() {
        return Ok(base);
    }
    let f = |t: f64| {
        let (s, c) = t.sin_cos();
        (-(h * h + k * k - 2.0 * h * k * s) / (2.0 * c * c)).exp()
    };
    let upper = rho.asin();
    let integral = adaptive_gk(&f, 0.0, upper, 1e-13, 40);
    Ok((base + integral / (2.0 * PI)).clamp(0.0, 1.0))
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const K15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss–Kronrod 7/15 panel: (Kronrod estimate, |Kronrod - Gauss|).
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let mut kron = K15_WEIGHTS[7] * f(c);
    let mut gauss = G7_WEIGHTS[3] * f(c);
    for i in 0..7 {
        let x = hw * GK_NODES[i];
        let s = f(c - x) + f(c + x);
        kron += K15_WEIGHTS[i] * s;
        if i % 2 == 1 {
            gauss += G7_WEIGHTS[i / 2] * s;
        }
    }
    (kron * hw, ((kron - gauss) * hw).abs())
}

fn adaptive_gk(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (val, err) = gk15(f, a, b);
    if err <= tol || depth == 0 {
        return val;
    }
    let m = 0.5 * (a + b);
    adaptive_gk(f, a, m, 0.5 * tol, depth - 1) + adaptive_gk(f, m, b, 0.5 * tol, depth - 1)
}
