//! Polar transform, synthesized cq channels and their parameters, and the
//! classical channels induced by product measurements.

mod classical;
mod encoder;
mod llr;
mod report;
mod synthesis;

pub use classical::{classical_split, classical_split_all, split_table, ClassicalMode, ClassicalSplit, SplitTable, MAX_CLASSICAL_TABLE};
pub use encoder::{bits_of, encode, encode_inverse, index_of, log2_blocklength, PolarTransform};
pub use llr::{base_llrs, boxplus, split_llr};
pub use report::{
    build_report, build_report_with, select_channels, subset_check, threshold, verify_subset, ChannelReport, IndexParameters, IndexRecord,
    SubsetRecord, DEFAULT_BETA,
};
pub use synthesis::{
    averaged_state_direct, split_fidelity, split_holevo, synthesize, LevelState, Route, SplitChannel, Synthesizer,
    MAX_SYNTH_DIM,
};
