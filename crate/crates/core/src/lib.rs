//! Treating interference as noise (TIN) in two-user Gaussian interference
//! channels with multiple antennas.
//!
//! The crate evaluates TIN and genie-aided sum rates, maximises the TIN rate
//! over input covariances, constructs genies whose side information certifies
//! that TIN is sum-capacity optimal, and computes the low-interference
//! threshold `h₀(θ, P)` for symmetric MISO/SIMO channels.

pub mod channel;
pub mod covopt;
pub mod error;
pub mod genie;
pub mod matkit;
pub mod regime;
pub mod selftest;

pub use channel::{
    canonicalize, diff_rate, ga_sum_rate, tin_sum_rate, Canonical, ChannelInput, ChannelMatrices, ChannelSpec,
    CovariancePair, SymmetricVectorChannel, VectorKind,
};
pub use covopt::{
    brute_force_best, kkt_residual, optimize_tin, psd_trace_project, tin_gradient, GridSpec, OptimizationReport,
    OptimizeOptions,
};
pub use error::{Error, Result};
pub use genie::{
    miso_genie, simo_genie_search, simo_usefulness_check, smartness_residual, theorem1_verify, usefulness_check,
    GenieParams, MisoGenie, SimoGenie, Theorem1Report, Theorem1Status,
};
pub use matkit::{SymMatrix, EigenDecomp};
pub use regime::{
    certify_miso, certify_simo, siso_threshold, sweep_threshold, threshold_h0, threshold_residual, RegimeVerdict,
    ThresholdQuery,
};
