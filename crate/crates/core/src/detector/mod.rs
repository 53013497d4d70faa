//! GEC-C / GEC-U detectors, the SVD LMMSE stage and the AQNM benchmark.

pub mod aqnm;
pub mod gec;
pub mod lmmse;

pub use aqnm::{aqnm_estimate, benchmark_aqnm, reconstruct};
pub use gec::{detect_gecc, detect_gecu, DetectorInput, GecConfig, GecOutput, GecState, IterationDiag};
pub use lmmse::{lmmse_dense, lmmse_stage, LmmseOutput, SvdFactorization};
