//! Gaussian special functions with tail-safe evaluation.

use statrs::function::erf::{erfc, erfc_inv};
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Below this unscaled bin mass the truncated moments are reported as coming
/// from the tail regime.
pub const TAIL_MASS_FLOOR: f64 = 1e-300;

pub fn norm_pdf(x: f64) -> f64 {
    if x.is_infinite() {
        return 0.0;
    }
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF `Φ(x)`.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `1 - Φ(x)`, accurate for large positive `x`.
pub fn norm_sf(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// `Φ⁻¹(1 - t)` for a tail probability `t ∈ (0, 1)`.
pub fn norm_sf_inv(t: f64) -> f64 {
    SQRT_2 * erfc_inv(2.0 * t)
}

/// Scaled complementary error function `exp(x²)·erfc(x)` for `x ≥ 0`.
pub fn erfcx(x: f64) -> f64 {
    debug_assert!(x >= 0.0 || x.is_nan());
    if x.is_infinite() {
        return 0.0;
    }
    if x < 10.0 {
        return (x * x).exp() * erfc(x);
    }
    // Asymptotic series, truncated before the terms start growing.
    let inv2x2 = 1.0 / (2.0 * x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..40 {
        let next = -term * (2 * k - 1) as f64 * inv2x2;
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (x * PI.sqrt())
}

/// Moments of a standard normal truncated to `[alpha, beta]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedMoments {
    /// Probability mass `Φ(β) - Φ(α)`; may underflow to zero in the far tail.
    pub mass: f64,
    pub mean: f64,
    /// Variance in `[0, 1]`.
    pub var: f64,
    /// Set when `mass` fell below [`TAIL_MASS_FLOOR`] and the moments came
    /// from the scaled tail evaluation.
    pub tail: bool,
}

/// Mean and variance of `N(0, 1)` conditioned on `alpha < X ≤ beta`.
///
/// Bins that sit entirely in one tail are evaluated with `erfcx` scaling so
/// that the ratios `φ/Z` stay finite when `Z` itself underflows.
pub fn truncated_std_moments(alpha: f64, beta: f64) -> TruncatedMoments {
    debug_assert!(alpha < beta, "empty interval [{alpha}, {beta}]");
    if beta <= 0.0 {
        let m = upper_tail_moments(-beta, -alpha);
        return TruncatedMoments { mean: -m.mean, ..m };
    }
    if alpha >= 0.0 {
        return upper_tail_moments(alpha, beta);
    }
    // alpha < 0 < beta: the mass is bounded away from zero unless the
    // interval is tiny, so the direct form is safe.
    let mass = 1.0 - norm_sf(beta) - norm_sf(-alpha);
    let (pa, pb) = (norm_pdf(alpha), norm_pdf(beta));
    let mean = (pa - pb) / mass;
    let xa = if alpha.is_finite() { alpha * pa } else { 0.0 };
    let xb = if beta.is_finite() { beta * pb } else { 0.0 };
    let var = 1.0 + (xa - xb) / mass - mean * mean;
    TruncatedMoments {
        mass,
        mean,
        var: var.clamp(0.0, 1.0),
        tail: false,
    }
}

fn upper_tail_moments(alpha: f64, beta: f64) -> TruncatedMoments {
    // Everything below is scaled by exp(alpha²/2).
    let qa = 0.5 * erfcx(alpha * FRAC_1_SQRT_2);
    let (qb, pb_scaled) = if beta.is_finite() {
        let eb = (-0.5 * (beta - alpha) * (beta + alpha)).exp();
        (0.5 * erfcx(beta * FRAC_1_SQRT_2) * eb, FRAC_1_SQRT_2PI * eb)
    } else {
        (0.0, 0.0)
    };
    let pa_scaled = FRAC_1_SQRT_2PI;
    let z_scaled = qa - qb;
    let mean = (pa_scaled - pb_scaled) / z_scaled;
    let xb = if beta.is_finite() { beta * pb_scaled } else { 0.0 };
    let var = 1.0 + (alpha * pa_scaled - xb) / z_scaled - mean * mean;
    let mass = z_scaled * (-0.5 * alpha * alpha).exp();
    TruncatedMoments {
        mass,
        mean,
        var: var.clamp(0.0, 1.0),
        tail: mass < TAIL_MASS_FLOOR,
    }
}
