//! One-shot LMMSE receiver under the additive quantization noise model.

use nalgebra::Cholesky;
use num_complex::Complex64;

use crate::channel::CMatrix;
use crate::coding::{demap_hard, viterbi_decode, Interleaver, Trellis};
use crate::error::{Error, Result};
use crate::frontend::{default_scale, distortion_factor, AdcSpec, ObsData, QuantizedObs};

/// Bin centroids (or exact values) as an `N × T` matrix.
pub fn reconstruct(obs: &QuantizedObs, adc: &AdcSpec, std: f64) -> CMatrix {
    match &obs.data {
        ObsData::Exact(v) => CMatrix::from_vec(obs.rows, obs.cols, v.clone()),
        ObsData::Bins(bins) => {
            let c = adc.centroids(std);
            let data = bins
                .iter()
                .map(|b| Complex64::new(c[b[0] as usize - 1], c[b[1] as usize - 1]))
                .collect();
            CMatrix::from_vec(obs.rows, obs.cols, data)
        }
    }
}

/// Soft symbol estimates `x̂ = (1−ρ)·Aᴴ·C⁻¹·ỹ` for every channel use.
pub fn aqnm_estimate(obs: &QuantizedObs, a: &CMatrix, noise_var: f64, adc: &AdcSpec) -> Result<CMatrix> {
    if obs.rows != a.nrows() {
        return Err(Error::invalid("observation rows do not match the channel"));
    }
    let n = a.nrows();
    let power = a.iter().map(|x| x.norm_sqr()).sum::<f64>() / n as f64;
    let std = default_scale(power, noise_var);
    let rho = distortion_factor(adc, std);
    let y = reconstruct(obs, adc, std);
    let mut ryy = a * a.adjoint();
    for i in 0..n {
        ryy[(i, i)] += noise_var;
    }
    let mut c = ryy.scale((1.0 - rho) * (1.0 - rho));
    for i in 0..n {
        c[(i, i)] += rho * (1.0 - rho) * ryy[(i, i)];
    }
    let chol = Cholesky::new(c).ok_or_else(|| Error::invalid("AQNM covariance is not positive definite"))?;
    let w = chol.solve(&y);
    Ok((a.adjoint() * w).scale(1.0 - rho))
}

/// Hard-demaps the AQNM estimates, deinterleaves and Viterbi-decodes.
pub fn benchmark_aqnm(
    obs: &QuantizedObs,
    a: &CMatrix,
    noise_var: f64,
    adc: &AdcSpec,
    trellis: &Trellis,
    interleaver: &Interleaver,
) -> Result<Vec<u8>> {
    if a.ncols() * obs.cols * 2 != interleaver.len() {
        return Err(Error::invalid("codeword length does not match channel uses × K"));
    }
    let x = aqnm_estimate(obs, a, noise_var, adc)?;
    let bits = demap_hard(x.as_slice());
    viterbi_decode(&interleaver.deinterleave(&bits)?, trellis)
}
