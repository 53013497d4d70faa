//! Scalar transfer functions of the state evolution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontend::AdcSpec;
use crate::numerics::{adaptive_gauss_kronrod, gauss_hermite, norm_pdf, truncated_std_moments};

/// Singular values of `A` with its dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSpectrum {
    pub values: Vec<f64>,
    pub k: usize,
    pub n: usize,
}

impl SingularSpectrum {
    pub fn new(values: Vec<f64>, k: usize, n: usize) -> Result<Self> {
        if k == 0 || n == 0 {
            return Err(Error::invalid("spectrum dimensions must be positive"));
        }
        if values.len() > k.min(n) || values.iter().any(|&l| !(l >= 0.0)) {
            return Err(Error::invalid("need at most min(K, N) nonnegative singular values"));
        }
        Ok(Self { values, k, n })
    }

    pub fn alpha(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    /// `Σλ²/N`.
    pub fn power(&self) -> f64 {
        self.values.iter().map(|l| l * l).sum::<f64>() / self.n as f64
    }
}

/// `E[(1 − tanh X)²]` for `X ~ N(η, η)`: the MMSE of a ±1 input at SNR `η`.
///
/// Small `η` uses the shared Gauss–Hermite rule. Larger `η` integrates the
/// exponentially tilted form `e^{−η/2}/√(2πη)·∫ e^{−x}·sech²x·e^{−x²/(2η)} dx`,
/// which keeps full relative accuracy while the value decays like `e^{−η/2}`.
pub fn mmse_u(eta: f64) -> f64 {
    if !(eta > 0.0) {
        return 1.0;
    }
    if eta.is_infinite() {
        return 0.0;
    }
    if eta < 1.0 {
        let s = eta.sqrt();
        return gauss_hermite().expect_std_normal(|z| {
            let t = 1.0 - (eta + s * z).tanh();
            t * t
        });
    }
    let scale = (-0.5 * eta).exp() / (2.0 * std::f64::consts::PI * eta).sqrt();
    if scale == 0.0 {
        return 0.0;
    }
    let g = |x: f64| {
        let sech = 1.0 / x.cosh();
        (-x - x * x / (2.0 * eta)).exp() * sech * sech
    };
    let (v, _) = adaptive_gauss_kronrod(g, -40.0, 40.0, 1e-13, 0.0);
    scale * v
}

/// `(1/K)·Σ_j 1/(1 + v_x·η_z·λ_j²)`, zero-padded to `K` terms.
pub fn psi_r(v_x: f64, eta_z: f64, spectrum: &SingularSpectrum) -> f64 {
    let g = v_x * eta_z;
    let k = spectrum.k as f64;
    let zeros = (spectrum.k - spectrum.values.len()) as f64;
    (spectrum.values.iter().map(|l| 1.0 / (1.0 + g * l * l)).sum::<f64>() + zeros) / k
}

/// `1 − α·(1 − ψ_r)`.
pub fn psi_f(v_x: f64, eta_z: f64, spectrum: &SingularSpectrum) -> f64 {
    1.0 - spectrum.alpha() * (1.0 - psi_r(v_x, eta_z, spectrum))
}

/// `Σ_b Z_b·μ_b²` over the bins for a Gaussian with mean `a` and std `c`:
/// the location Fisher information of the quantized output times `c²`.
fn bin_information(spec: &AdcSpec, a: f64, c: f64) -> f64 {
    let mut prev = f64::NEG_INFINITY;
    let mut acc = 0.0;
    for i in 0..=spec.thresholds.len() {
        let hi = spec.thresholds.get(i).copied().unwrap_or(f64::INFINITY);
        let t = truncated_std_moments((prev - a) / c, (hi - a) / c);
        if !t.tail {
            acc += t.mass * t.mean * t.mean;
        }
        prev = hi;
    }
    acc
}

/// Quantized-output transfer function `ζ(v_z, P_z, v_w, Γ)`.
///
/// The outer expectation over `z ~ N(0, 1)` uses Gauss–Hermite when the
/// per-bin features are wide on the `z` scale; otherwise adaptive
/// Gauss–Kronrod with breakpoints at the thresholds.
pub fn zeta(v_z: f64, power: f64, v_w: f64, spec: &AdcSpec) -> Result<f64> {
    if !(v_z > 0.0) || v_w < 0.0 {
        return Err(Error::invalid("zeta needs v_z > 0 and v_w ≥ 0"));
    }
    if v_z > power * (1.0 + 1e-12) {
        return Err(Error::invalid(format!("v_z = {v_z} exceeds P_z = {power}")));
    }
    let c2 = 0.5 * (v_w + v_z);
    let c = c2.sqrt();
    let s = (0.5 * (power - v_z)).max(0.0).sqrt();
    if !spec.is_quantized() {
        return Ok(zeta_unquantized(s, c));
    }
    let f = |z: f64| bin_information(spec, s * z, c);
    let expectation = if s <= c {
        gauss_hermite().expect_std_normal(f)
    } else {
        let lim = 12.0;
        let mut knots = vec![-lim];
        if spec.thresholds.len() <= 64 {
            knots.extend(spec.thresholds.iter().map(|r| r / s).filter(|z| z.abs() < lim));
        }
        knots.push(lim);
        knots
            .windows(2)
            .map(|w| adaptive_gauss_kronrod(|z| f(z) * norm_pdf(z), w[0], w[1], 1e-11, 1e-15).0)
            .sum()
    };
    Ok(expectation / (2.0 * c2))
}

/// Ideal-ADC branch: Fisher information of `y ~ N(a, c²)` in `a`, averaged
/// over `a = s·z` by nested Gauss–Hermite (equals `1/(2c²)`).
fn zeta_unquantized(s: f64, c: f64) -> f64 {
    let rule = gauss_hermite();
    let c2 = c * c;
    rule.expect_std_normal(|z| {
        let a = s * z;
        rule.expect_std_normal(|u| {
            let score = ((a + c * u) - a) / c2;
            score * score
        })
    }) / 2.0
}
