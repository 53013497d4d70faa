//! Low-resolution ADC model and the quantized-observation estimator.

pub mod adc;
pub mod extrinsic;
pub mod posterior;

pub use adc::{
    default_scale, distortion_factor, make_thresholds, optimal_uniform_step, quantize, uniform_midpoint_mse,
    AdcSpec, ObsData, QuantizedObs,
};
pub use extrinsic::{extrinsic_update, Extrinsic, VarianceClip};
pub use posterior::{posterior_exact, posterior_real, posterior_z, ZPosterior};
