use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

fn standard() -> Normal {
    Normal::standard()
}

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    standard().cdf(x)
}

/// Standard normal upper tail `1 - Φ(x)`, accurate far into the tail.
pub fn std_normal_sf(x: f64) -> f64 {
    standard().sf(x)
}

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Gaussian threshold `μ = Φ⁻¹(p)` reproducing an edge probability `p`.
pub fn threshold_from_theta(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold needs a probability strictly inside (0, 1), got {p}"
        )));
    }
    Ok(standard().inverse_cdf(p))
}

/// Like [`threshold_from_theta`] but maps 0 and 1 to -inf and +inf.
pub(crate) fn threshold_or_infinite(p: f64) -> f64 {
    if p <= 0.0 {
        f64::NEG_INFINITY
    } else if p >= 1.0 {
        f64::INFINITY
    } else {
        standard().inverse_cdf(p)
    }
}
