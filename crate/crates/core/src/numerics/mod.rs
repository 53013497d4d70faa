//! Scalar numerics shared by the estimators and the state-evolution code.

pub mod quadrature;
pub mod special;

pub use quadrature::{adaptive_gauss_kronrod, gauss_hermite, GaussHermite};
pub use special::{erfcx, norm_cdf, norm_pdf, norm_sf, norm_sf_inv, truncated_std_moments};
