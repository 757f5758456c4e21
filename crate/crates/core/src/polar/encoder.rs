use crate::error::{Error, Result};

/// log₂ N, or an error when N is not a power of two.
pub fn log2_blocklength(n: usize) -> Result<u32> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::Domain(format!("block length {n} is not a power of two")));
    }
    Ok(n.trailing_zeros())
}

/// Polar transform of size N = 2^n.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolarTransform {
    pub n: u32,
}

impl PolarTransform {
    pub fn new(block_length: usize) -> Result<Self> {
        Ok(PolarTransform { n: log2_blocklength(block_length)? })
    }

    pub fn block_length(&self) -> usize {
        1 << self.n
    }

    pub fn encode(&self, u: &[u8]) -> Result<Vec<u8>> {
        if u.len() != self.block_length() {
            return Err(Error::DimensionMismatch { expected: self.block_length(), found: u.len() });
        }
        encode(u)
    }

    pub fn decode(&self, x: &[u8]) -> Result<Vec<u8>> {
        if x.len() != self.block_length() {
            return Err(Error::DimensionMismatch { expected: self.block_length(), found: x.len() });
        }
        encode_inverse(x)
    }
}

/// Splits u into (u_odd ⊕ u_even, u_even) over the pairs (u_{2l−1}, u_{2l}).
pub(crate) fn split_pairs(u: &[u8]) -> (Vec<u8>, Vec<u8>) {
    u.chunks_exact(2).map(|p| (p[0] ^ p[1], p[1])).unzip()
}

/// x = u G_N: the first half of x encodes u_odd ⊕ u_even, the second half
/// encodes u_even.
pub fn encode(u: &[u8]) -> Result<Vec<u8>> {
    log2_blocklength(u.len())?;
    Ok(encode_unchecked(u))
}

fn encode_unchecked(u: &[u8]) -> Vec<u8> {
    if u.len() == 1 {
        return vec![u[0] & 1];
    }
    let (a, b) = split_pairs(u);
    let mut x = encode_unchecked(&a);
    x.extend(encode_unchecked(&b));
    x
}

/// u with u G_N = x.
pub fn encode_inverse(x: &[u8]) -> Result<Vec<u8>> {
    log2_blocklength(x.len())?;
    Ok(inverse_unchecked(x))
}

fn inverse_unchecked(x: &[u8]) -> Vec<u8> {
    if x.len() == 1 {
        return vec![x[0] & 1];
    }
    let h = x.len() / 2;
    let a = inverse_unchecked(&x[..h]);
    let b = inverse_unchecked(&x[h..]);
    a.iter().zip(&b).flat_map(|(&a, &b)| [a ^ b, b]).collect()
}

/// Bits of `v` as a length-`len` string, most significant first.
pub fn bits_of(v: usize, len: usize) -> Vec<u8> {
    (0..len).map(|k| ((v >> (len - 1 - k)) & 1) as u8).collect()
}

/// Inverse of [`bits_of`].
pub fn index_of(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert_eq!(encode(&[1, 0]).unwrap(), vec![1, 0]);
        assert_eq!(encode(&[1, 0, 0, 0]).unwrap(), vec![1, 0, 0, 0]);
        assert_eq!(encode(&[0, 1, 0, 1]).unwrap(), vec![0, 1, 0, 1]);
        assert_eq!(encode(&[0, 1, 1, 1]).unwrap(), vec![1, 0, 0, 1]);
        assert!(encode(&[0, 1, 0]).is_err());
    }

    #[test]
    fn four_and_eight_bit_maps() {
        for v in 0..16 {
            let u = bits_of(v, 4);
            let expected = vec![u[0] ^ u[1] ^ u[2] ^ u[3], u[2] ^ u[3], u[1] ^ u[3], u[3]];
            assert_eq!(encode(&u).unwrap(), expected);
        }
        for v in 0..256 {
            let u = bits_of(v, 8);
            let s: u8 = u.iter().fold(0, |a, b| a ^ b);
            let expected = vec![
                s,
                u[4] ^ u[5] ^ u[6] ^ u[7],
                u[2] ^ u[3] ^ u[6] ^ u[7],
                u[6] ^ u[7],
                u[1] ^ u[3] ^ u[5] ^ u[7],
                u[5] ^ u[7],
                u[3] ^ u[7],
                u[7],
            ];
            assert_eq!(encode(&u).unwrap(), expected);
        }
    }

    #[test]
    fn inverse_round_trip() {
        for n in [1usize, 2, 4, 8, 16] {
            let t = PolarTransform::new(n).unwrap();
            let limit = if n == 16 { 1 << 16 } else { 1 << n };
            for v in 0..limit {
                let x = bits_of(v, n);
                assert_eq!(t.encode(&t.decode(&x).unwrap()).unwrap(), x);
            }
        }
    }
}
