//! Posterior moments of `z` given quantized observations `y = Q(z + w)`.

use num_complex::Complex64;

use super::adc::{AdcSpec, ObsData, QuantizedObs};
use crate::error::{Error, Result};
use crate::numerics::truncated_std_moments;

/// Posterior mean and variance of one real dimension.
///
/// Prior `z ~ N(m, tau)`, noise `w ~ N(0, tau_w)`, observation `z + w ∈ (lo, hi]`.
/// Returns `(mean, var, tail)` where `tail` flags the scaled-tail regime.
pub fn posterior_real(lo: f64, hi: f64, m: f64, tau: f64, tau_w: f64) -> (f64, f64, bool) {
    let s2 = tau + tau_w;
    let s = s2.sqrt();
    let t = truncated_std_moments((lo - m) / s, (hi - m) / s);
    let mean = m + tau / s * t.mean;
    let var = tau * tau_w / s2 + tau * tau / s2 * t.var;
    (mean, var.clamp(0.0, tau), t.tail)
}

/// Scalar Gaussian conditioning on an exactly observed `y = z + w`.
pub fn posterior_exact(y: f64, m: f64, tau: f64, tau_w: f64) -> (f64, f64) {
    let s2 = tau + tau_w;
    (m + tau * (y - m) / s2, tau * tau_w / s2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZPosterior {
    pub mean: Vec<Complex64>,
    /// Complex variance per entry (sum of the two real-dimension variances).
    pub var: Vec<f64>,
    /// Real dimensions evaluated in the scaled-tail regime.
    pub tail_events: usize,
}

impl ZPosterior {
    pub fn avg_var(&self) -> f64 {
        self.var.iter().sum::<f64>() / self.var.len().max(1) as f64
    }
}

/// Elementwise posterior of `z` under the prior `CN(r_1z, v_1z)`.
pub fn posterior_z(obs: &QuantizedObs, r1z: &[Complex64], v1z: f64, vw: f64, spec: &AdcSpec) -> Result<ZPosterior> {
    if r1z.len() != obs.len() {
        return Err(Error::invalid(format!(
            "prior has {} entries but observation has {}",
            r1z.len(),
            obs.len()
        )));
    }
    if !(v1z > 0.0) || vw < 0.0 {
        return Err(Error::invalid("posterior_z needs v_1z > 0 and v_w ≥ 0"));
    }
    let (tau, tau_w) = (v1z / 2.0, vw / 2.0);
    let mut mean = Vec::with_capacity(r1z.len());
    let mut var = Vec::with_capacity(r1z.len());
    let mut tail_events = 0;
    match &obs.data {
        ObsData::Bins(bins) => {
            if !spec.is_quantized() {
                return Err(Error::invalid("binned observation with an unquantized ADC spec"));
            }
            for (b, m) in bins.iter().zip(r1z) {
                let (lr, hr) = spec.bin_edges(b[0]);
                let (li, hi) = spec.bin_edges(b[1]);
                let (mr, vr, tr) = posterior_real(lr, hr, m.re, tau, tau_w);
                let (mi, vi, ti) = posterior_real(li, hi, m.im, tau, tau_w);
                tail_events += tr as usize + ti as usize;
                mean.push(Complex64::new(mr, mi));
                var.push(vr + vi);
            }
        }
        ObsData::Exact(y) => {
            for (y, m) in y.iter().zip(r1z) {
                let (mr, vr) = posterior_exact(y.re, m.re, tau, tau_w);
                let (mi, vi) = posterior_exact(y.im, m.im, tau, tau_w);
                mean.push(Complex64::new(mr, mi));
                var.push(vr + vi);
            }
        }
    }
    Ok(ZPosterior { mean, var, tail_events })
}
