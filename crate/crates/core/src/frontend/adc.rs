//! Uniform mid-rise ADC model.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{norm_cdf, norm_pdf, truncated_std_moments};

/// Per-real-dimension quantizer; `bits = None` is an ideal (infinite-resolution) ADC.
///
/// Bins are numbered `1..=2^B`; bin `b` covers `(r_{b−1}, r_b]` with
/// `r_0 = −∞` and `r_{2^B} = +∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdcSpec {
    pub bits: Option<u32>,
    /// Interior thresholds `r_1 < … < r_{2^B−1}`.
    pub thresholds: Vec<f64>,
}

impl AdcSpec {
    pub fn unquantized() -> Self {
        Self {
            bits: None,
            thresholds: Vec::new(),
        }
    }

    pub fn is_quantized(&self) -> bool {
        self.bits.is_some()
    }

    pub fn num_bins(&self) -> usize {
        self.thresholds.len() + 1
    }

    /// Edges `(r_{b−1}, r_b)` of bin `b ∈ 1..=2^B`.
    pub fn bin_edges(&self, bin: u16) -> (f64, f64) {
        let b = bin as usize;
        let lo = if b <= 1 { f64::NEG_INFINITY } else { self.thresholds[b - 2] };
        let hi = if b > self.thresholds.len() { f64::INFINITY } else { self.thresholds[b - 1] };
        (lo, hi)
    }

    /// Bin of a real value under the `value ≤ r_b → b` rule.
    pub fn bin_of(&self, value: f64) -> u16 {
        (self.thresholds.partition_point(|&r| r < value) + 1) as u16
    }

    pub fn validate(&self) -> Result<()> {
        match self.bits {
            None if !self.thresholds.is_empty() => Err(Error::invalid("unquantized ADC cannot carry thresholds")),
            None => Ok(()),
            Some(b) => {
                if b == 0 || b > 15 {
                    return Err(Error::invalid(format!("ADC resolution {b} outside 1..=15 bits")));
                }
                if self.thresholds.len() != (1usize << b) - 1 {
                    return Err(Error::invalid("threshold count must be 2^B − 1"));
                }
                if self.thresholds.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::invalid("thresholds must be strictly increasing"));
                }
                let n = self.thresholds.len();
                let asym = (0..n).any(|i| (self.thresholds[i] + self.thresholds[n - 1 - i]).abs() > 1e-9 * (1.0 + self.thresholds[i].abs()));
                if asym {
                    return Err(Error::invalid("thresholds must be symmetric about zero"));
                }
                Ok(())
            }
        }
    }

    /// Conditional means of each bin for a `N(0, std²)` input.
    pub fn centroids(&self, std: f64) -> Vec<f64> {
        (1..=self.num_bins() as u16)
            .map(|b| {
                let (lo, hi) = self.bin_edges(b);
                std * truncated_std_moments(lo / std, hi / std).mean
            })
            .collect()
    }
}

/// MSE of a uniform mid-rise quantizer with step `delta` on `N(0, 1)` when
/// every bin is reconstructed at its midpoint (outer bins at the last midpoint).
pub fn uniform_midpoint_mse(bits: u32, delta: f64) -> f64 {
    let n = 1i64 << bits;
    let half = n / 2;
    let mut mse = 0.0;
    for b in 1..=n {
        let lo = if b == 1 { f64::NEG_INFINITY } else { delta * (b - 1 - half) as f64 };
        let hi = if b == n { f64::INFINITY } else { delta * (b - half) as f64 };
        let c = delta * (b as f64 - half as f64 - 0.5);
        let z = norm_cdf(hi) - norm_cdf(lo);
        let (pl, ph) = (norm_pdf(lo), norm_pdf(hi));
        let xl = if lo.is_finite() { lo * pl } else { 0.0 };
        let xh = if hi.is_finite() { hi * ph } else { 0.0 };
        let second = z + xl - xh;
        let first = pl - ph;
        mse += second - 2.0 * c * first + c * c * z;
    }
    mse
}

/// MSE-optimal uniform step `Δ_B` for a unit Gaussian (golden-section search).
pub fn optimal_uniform_step(bits: u32) -> f64 {
    if bits == 1 {
        return 1.0;
    }
    let f = |log_d: f64| uniform_midpoint_mse(bits, log_d.exp());
    let (mut a, mut b) = ((1e-4f64).ln(), (4.0f64).ln());
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-12 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    (0.5 * (a + b)).exp()
}

/// Thresholds `Δ·(k − 2^{B−1})`, `k = 1..2^B−1`, with `Δ = Δ_B·scale`.
pub fn make_thresholds(bits: Option<u32>, scale: f64) -> Result<AdcSpec> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::invalid(format!("ADC scale {scale} must be positive")));
    }
    let Some(b) = bits else {
        return Ok(AdcSpec::unquantized());
    };
    if b == 0 || b > 15 {
        return Err(Error::invalid(format!("ADC resolution {b} outside 1..=15 bits")));
    }
    let delta = optimal_uniform_step(b) * scale;
    let half = 1i64 << (b - 1);
    let thresholds = (1..(1i64 << b)).map(|k| delta * (k - half) as f64).collect();
    Ok(AdcSpec {
        bits: Some(b),
        thresholds,
    })
}

/// Default ADC scale `sqrt((P_z + v_w)/2)`: received std per real dimension.
pub fn default_scale(power: f64, noise_var: f64) -> f64 {
    ((power + noise_var) / 2.0).sqrt()
}

/// Distortion factor `ρ = 1 − E[q²]/E[y²]` of centroid reconstruction on a
/// `N(0, std²)` input.
pub fn distortion_factor(spec: &AdcSpec, std: f64) -> f64 {
    if !spec.is_quantized() {
        return 0.0;
    }
    let kept: f64 = (1..=spec.num_bins() as u16)
        .map(|b| {
            let (lo, hi) = spec.bin_edges(b);
            let m = truncated_std_moments(lo / std, hi / std);
            m.mass * m.mean * m.mean
        })
        .sum();
    1.0 - kept
}

/// Quantized observation matrix (`N × T`, column-major by channel use).
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedObs {
    pub rows: usize,
    pub cols: usize,
    pub data: ObsData,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ObsData {
    /// `[re_bin, im_bin]` per entry.
    Bins(Vec<[u16; 2]>),
    /// Ideal ADC: exact values.
    Exact(Vec<Complex64>),
}

impl QuantizedObs {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn quantize(y: &DMatrix<Complex64>, spec: &AdcSpec) -> Result<QuantizedObs> {
    if y.iter().any(|v| v.re.is_nan() || v.im.is_nan()) {
        return Err(Error::invalid("cannot quantize NaN"));
    }
    let data = if spec.is_quantized() {
        ObsData::Bins(y.iter().map(|v| [spec.bin_of(v.re), spec.bin_of(v.im)]).collect())
    } else {
        ObsData::Exact(y.iter().copied().collect())
    };
    Ok(QuantizedObs {
        rows: y.nrows(),
        cols: y.ncols(),
        data,
    })
}
