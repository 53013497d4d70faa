//! Convolutional coding, interleaving and 4-QAM (de)modulation.

pub mod bcjr;
pub mod conv;
pub mod interleaver;
pub mod modulation;
pub mod viterbi;

pub use bcjr::{bcjr_decode, BcjrMode, BcjrOutput};
pub use conv::{conv_encode, ConvCodeSpec, Trellis};
pub use interleaver::{Interleaver, InterleaverSpec};
pub use modulation::{clamp_llr, demap_hard, map_qam4, qam4_denoise, soft_demod, soft_modulate, LLR_CLAMP};
pub use viterbi::viterbi_decode;
