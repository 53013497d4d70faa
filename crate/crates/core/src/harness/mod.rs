//! Experiment orchestration: configs, Monte-Carlo runs, SE curves, sweeps.

pub mod analysis;
pub mod config;
pub mod run;

pub use analysis::{crossing_snr, steepest_drop};
pub use config::{
    ArrayLayout, DetectorKind, ExperimentConfig, IndoorPreset, SnrMode, SnrSweep, SweepAxis, SweepSpec, TrialBudget,
};
pub use run::{
    apply_axis, load_transfer, noise_for_point, prepare_channel, run_mc_ber, run_se_curve, sweep, write_curves,
    BerCurve, BerPoint, PreparedChannel, SweepKind,
};
