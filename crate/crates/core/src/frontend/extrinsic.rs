//! Gaussian extrinsic-message computation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Bounds applied to every extrinsic variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceClip {
    pub min: f64,
    pub max: f64,
}

impl Default for VarianceClip {
    fn default() -> Self {
        Self { min: 1e-9, max: 1e9 }
    }
}

impl VarianceClip {
    pub fn apply(&self, v: f64) -> f64 {
        if v.is_nan() {
            self.max
        } else {
            v.clamp(self.min, self.max)
        }
    }
}

/// Result of removing a prior message from a posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct Extrinsic {
    pub mean: Vec<Complex64>,
    pub var: f64,
    /// Set when the raw variance left the clip range (or was negative).
    pub clipped: bool,
}

/// `v_e = 1/(1/v_post − 1/v_prior)`, `r_e = v_e·(x_post/v_post − r_prior/v_prior)`.
pub fn extrinsic_update(
    post_mean: &[Complex64],
    avg_post_var: f64,
    prior_mean: &[Complex64],
    prior_var: f64,
    clip: VarianceClip,
) -> Extrinsic {
    debug_assert_eq!(post_mean.len(), prior_mean.len());
    let post = avg_post_var.max(clip.min);
    let precision = 1.0 / post - 1.0 / prior_var;
    let raw = 1.0 / precision;
    let (var, clipped) = if precision <= 0.0 || !raw.is_finite() {
        (clip.max, true)
    } else {
        let v = clip.apply(raw);
        (v, v != raw)
    };
    let (a, b) = (var / post, var / prior_var);
    let mean = post_mean.iter().zip(prior_mean).map(|(x, r)| x * a - r * b).collect();
    Extrinsic { mean, var, clipped }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn halving_variance_doubles_mean() {
        let e = extrinsic_update(&[Complex64::new(0.4, -0.2)], 0.5, &[Complex64::new(0.0, 0.0)], 1.0, VarianceClip::default());
        assert_relative_eq!(e.var, 1.0, epsilon = 1e-15);
        assert_relative_eq!(e.mean[0].re, 0.8, epsilon = 1e-15);
        assert!(!e.clipped);
    }

    #[test]
    fn no_information_hits_upper_clip() {
        let e = extrinsic_update(&[Complex64::new(0.1, 0.0)], 1.0, &[Complex64::new(0.1, 0.0)], 1.0, VarianceClip::default());
        assert_eq!(e.var, 1e9);
        assert!(e.clipped);
    }
}
