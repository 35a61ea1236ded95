//! Tight wavelet filter banks with prescribed directions.
//!
//! The crate builds the bank `{tau, q_D, q_C}` from a list of integer
//! directions, vanishing-moment counts and a dilation factor, checks its
//! tightness exactly through the polyphase Gram identity, and runs the fast
//! multi-level analysis and the two synthesis algorithms on periodic n-D
//! signals.
//!
//! ```
//! use twfpd::construct::{build_bank, verify_uep, BankConfig, DirectionSpec};
//!
//! let config = BankConfig::new(
//!     2,
//!     2,
//!     vec![
//!         DirectionSpec::new([1, 0], 1),
//!         DirectionSpec::new([0, 1], 1),
//!         DirectionSpec::new([1, 1], 1),
//!     ],
//! )
//! .unwrap();
//! let bank = build_bank(&config).unwrap();
//! assert!(verify_uep(&bank, 1e-9).tight);
//! ```

pub mod construct;
pub mod error;
pub mod spectral;
pub mod transform;
pub mod trigpoly;

pub use error::{Error, Result};
pub use spectral::Orientation;
pub use trigpoly::{MultiIndex, TrigPoly};
