use crate::error::{Error, Result};
use crate::polar::{bits_of, log2_blocklength};
use serde::{Deserialize, Serialize};

/// How frozen bits are set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrozenMode {
    /// The stored frozen values (zeros by default).
    Fixed,
    /// Uniform over all frozen patterns, known to the decoder.
    UniformRandom,
}

/// Information set and frozen bits of a polar code of length N.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSpec {
    n: usize,
    info: Vec<bool>,
    frozen_values: Vec<u8>,
    mode: FrozenMode,
}

impl CodeSpec {
    /// `info_set` holds 1-based indices; `frozen_values` has length N and is
    /// read only at frozen positions.
    pub fn new(n: usize, info_set: &[usize], frozen_values: Vec<u8>, mode: FrozenMode) -> Result<Self> {
        log2_blocklength(n)?;
        if frozen_values.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: frozen_values.len() });
        }
        let mut info = vec![false; n];
        for &i in info_set {
            if i == 0 || i > n {
                return Err(Error::Domain(format!("information index {i} outside 1..={n}")));
            }
            if info[i - 1] {
                return Err(Error::Domain(format!("information index {i} listed twice")));
            }
            info[i - 1] = true;
        }
        let frozen_values = frozen_values.iter().zip(&info).map(|(&v, &a)| if a { 0 } else { v & 1 }).collect();
        Ok(CodeSpec { n, info, frozen_values, mode })
    }

    pub fn with_zeros(n: usize, info_set: &[usize], mode: FrozenMode) -> Result<Self> {
        Self::new(n, info_set, vec![0; n], mode)
    }

    /// The K indices with the smallest parameter (ties to the lower index).
    pub fn best_indices(params: &[f64], k: usize) -> Result<Vec<usize>> {
        if k > params.len() {
            return Err(Error::Domain(format!("K = {k} exceeds N = {}", params.len())));
        }
        let mut order: Vec<usize> = (0..params.len()).collect();
        order.sort_by(|&a, &b| params[a].total_cmp(&params[b]).then(a.cmp(&b)));
        let mut set: Vec<usize> = order[..k].iter().map(|i| i + 1).collect();
        set.sort_unstable();
        Ok(set)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.info.iter().filter(|&&a| a).count()
    }

    pub fn mode(&self) -> FrozenMode {
        self.mode
    }

    /// 1-based index.
    pub fn is_info(&self, i: usize) -> bool {
        self.info[i - 1]
    }

    pub fn info_set(&self) -> Vec<usize> {
        (1..=self.n).filter(|&i| self.is_info(i)).collect()
    }

    pub fn frozen_set(&self) -> Vec<usize> {
        (1..=self.n).filter(|&i| !self.is_info(i)).collect()
    }

    pub fn frozen_values(&self) -> &[u8] {
        &self.frozen_values
    }

    /// Same sets with the given frozen values, in fixed mode.
    pub fn with_frozen(&self, values: Vec<u8>) -> Result<CodeSpec> {
        CodeSpec::new(self.n, &self.info_set(), values, FrozenMode::Fixed)
    }

    /// Frozen assignments the error probability averages over.
    pub fn frozen_patterns(&self) -> Vec<Vec<u8>> {
        match self.mode {
            FrozenMode::Fixed => vec![self.frozen_values.clone()],
            FrozenMode::UniformRandom => {
                let fz = self.frozen_set();
                (0..(1usize << fz.len()))
                    .map(|p| {
                        let mut v = vec![0; self.n];
                        for (&i, b) in fz.iter().zip(bits_of(p, fz.len())) {
                            v[i - 1] = b;
                        }
                        v
                    })
                    .collect()
            }
        }
    }

    /// u with `info_bits` at the information positions and `frozen` elsewhere.
    pub fn word(&self, info_bits: &[u8], frozen: &[u8]) -> Vec<u8> {
        let mut it = info_bits.iter();
        (0..self.n).map(|k| if self.info[k] { *it.next().expect("K bits") & 1 } else { frozen[k] & 1 }).collect()
    }
}

/// 2√(Σ ½F_i) over the information set.
pub fn prop_error_bound(fidelities: &[f64]) -> f64 {
    2.0 * (0.5 * fidelities.iter().sum::<f64>()).sqrt()
}
