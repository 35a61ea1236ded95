//! Construction and verification of the directional tight filter bank.

mod bank;
mod config;
mod verify;

pub use bank::{
    build_bank, build_from_sos, build_g, build_lowpass, build_p, FilterBank, MaskRole,
};
pub use config::{default_coset_reps, validate_coset_reps, BankConfig, DirectionSpec};
pub use verify::{
    default_grid, gram_residual, grid_residual, moments_report, verify_sos_identity, verify_uep,
    verify_uep_with_grid, MomentsReport, VerificationReport, DEFAULT_VERIFY_TOL,
    GRID_POINT_BUDGET,
};
