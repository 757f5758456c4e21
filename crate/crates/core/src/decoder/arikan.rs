use super::code::CodeSpec;
use crate::channel::ClassicalChannel;
use crate::error::{Error, Result};
use crate::fuchs_caves::TIE_TOL;
use crate::polar::{base_llrs, split_llr};

/// Successive decisions from the likelihood recursion on the received
/// symbols; frozen bits are forced and λ ≥ −TIE_TOL (ties included) decides 0.
pub fn arikan_decode(c: &ClassicalChannel, code: &CodeSpec, y: &[usize]) -> Result<Vec<u8>> {
    let n = code.n();
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: y.len() });
    }
    if let Some(&s) = y.iter().find(|&&s| s >= c.outputs()) {
        return Err(Error::Domain(format!("received symbol {s} outside the channel alphabet")));
    }
    let base = base_llrs(c, y);
    let mut u: Vec<u8> = Vec::with_capacity(n);
    for i in 1..=n {
        let bit = if code.is_info(i) {
            u8::from(split_llr(&base, &u) < -TIE_TOL)
        } else {
            code.frozen_values()[i - 1]
        };
        u.push(bit);
    }
    Ok(u)
}
