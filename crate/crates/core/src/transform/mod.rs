//! Fast multi-level analysis and the two synthesis algorithms on periodic
//! n-D signals, with multiplication counting.

mod complexity;
mod level;
mod ops;
mod signal;

pub use complexity::{complexity_report, ComplexityReport};
pub use level::{
    analyze, analyze_counted, analyze_direct, analyze_level, analyze_level_counted,
    lowpass_polyphase, synth_lp, synth_lp_counted, synth_standard, synth_standard_counted,
    synthesize, synthesize_counted, Decomposition, LevelDetails, LevelOutput, OpCounts,
    SynthesisMode,
};
pub use ops::{coset_add, coset_extract, convolve, convolve_counted, downsample, upsample};
pub use signal::Signal;
