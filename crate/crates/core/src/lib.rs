//! Simulation of RIS-assisted mmWave MIMO uplinks with low-resolution ADCs.
//!
//! The crate builds synthetic channels from indoor geometry, detects coded
//! 4-QAM streams through quantized observations with expectation-consistent
//! message passing, and predicts the detector's BER with a scalar state
//! evolution driven by a Monte-Carlo characterization of the code.

pub mod channel;
pub mod coding;
pub mod detector;
pub mod error;
pub mod frontend;
pub mod harness;
pub mod numerics;
pub mod se;
pub mod seed;

pub use error::{Error, Result};
pub use channel::{synthesize, CMatrix, Scenario, SyntheticChannel};
pub use coding::{ConvCodeSpec, Interleaver, InterleaverSpec, Trellis};
pub use detector::{DetectorInput, GecConfig, GecOutput, SvdFactorization};
pub use frontend::{AdcSpec, QuantizedObs};
pub use harness::{BerCurve, BerPoint, DetectorKind, ExperimentConfig};
pub use se::{CodeTransfer, SeTrace, SingularSpectrum, TransferParams};
