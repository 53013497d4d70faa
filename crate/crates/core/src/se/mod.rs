//! State evolution: transfer functions, code characterization and the
//! descent/ascent recursions.

pub mod code;
pub mod evolution;
pub mod functions;

pub use code::{
    ber_to_eta, characterize_code, mmse_c, zero_event_upper_bound, CodePoint, CodeTransfer, McParams, TransferParams,
    TransferRow,
};
pub use evolution::{se_ascent, se_descent, Prior, Process, SeConfig, SeRow, SeSystem, SeTrace};
pub use functions::{mmse_u, psi_f, psi_r, zeta, SingularSpectrum};
