//! Synthetic UE→RIS→BS channels built from indoor geometry.

pub mod geometry;
pub mod ris;
pub mod scenario;
pub mod synth;

pub use geometry::{
    angles_between, direction_cosines, kron, steering_vector, steering_vector_with, Angles, ArrayGeometry,
    Convention, ElevationRef, Facing, Layout, PhaseSign, Position,
};
pub use ris::{
    cell_gain, direct_path_gain, egc_phase_profile, panel_response, path_loss_far_field, quantize_phase,
    AntennaGains, RisPanel,
};
pub use scenario::{CircleDeployment, Scenario, Terminal};
pub use synth::{singular_values, spectrum_stats, synthesize, ChannelMetadata, CMatrix, SpectrumStats, SyntheticChannel};
