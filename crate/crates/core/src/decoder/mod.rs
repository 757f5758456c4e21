//! Successive-cancellation decoding: exact quantum error probabilities,
//! measurement-collapse simulation, classical likelihood decoding and the
//! hybrid product/collective decoder.

mod arikan;
mod code;
mod scd;
mod simulate;

pub use arikan::arikan_decode;
pub use code::{prop_error_bound, CodeSpec, FrozenMode};
pub use scd::{
    exact_error, first_test_error, helstrom_projector, scd_povm_element, sqrt_helstrom_projector, success_probability,
    DecoderVariant, ScDecoder, Strategy,
};
pub use simulate::{
    decode_word, hybrid_decode, simulate, wilson_interval, BitRecord, DecodeTrace, SimulationResult, StrategyHistogram,
    Z99,
};
