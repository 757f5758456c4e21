use super::encoder::{bits_of, encode, index_of, log2_blocklength, split_pairs};
use super::llr::{base_llrs, split_llr};
use crate::channel::ClassicalChannel;
use crate::error::{Error, Result};
use crate::rng::{Purpose, TrialRng};
use std::f64::consts::LN_2;

/// Largest |Y|^N · 2^{i−1} tabulated exactly.
pub const MAX_CLASSICAL_TABLE: u64 = 1 << 20;

/// W_N^{(i)}(y, u₁^{i−1} | u) for every output y, prefix and input bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitTable {
    pub n: usize,
    pub index: usize,
    /// |Y|^N
    pub outputs: usize,
    /// entry [(prefix · outputs + y) · 2 + u], output tuples most significant first
    pub prob: Vec<f64>,
}

impl SplitTable {
    pub fn get(&self, prefix: usize, y: usize, u: usize) -> f64 {
        self.prob[(prefix * self.outputs + y) * 2 + u]
    }

    /// Σ √(W(o|0) W(o|1)) over outputs o = (y, prefix).
    pub fn bhattacharyya(&self) -> f64 {
        self.prob.chunks_exact(2).map(|p| (p[0] * p[1]).sqrt()).sum()
    }

    /// I(U_i; Y, U₁^{i−1}) in bits.
    pub fn mutual_information(&self) -> f64 {
        let mut acc = 0.0;
        for p in self.prob.chunks_exact(2) {
            let q = 0.5 * (p[0] + p[1]);
            for &w in p {
                if w > 0.0 {
                    acc += 0.5 * w * (w / q).ln();
                }
            }
        }
        acc / LN_2
    }
}

fn check_table(outputs: usize, n: usize, i: usize) -> Result<()> {
    let size = (outputs as f64).powi(n as i32) * 2f64.powi(i as i32 - 1);
    if size > MAX_CLASSICAL_TABLE as f64 {
        return Err(Error::GuardExceeded {
            what: format!("exact split of a {outputs}-output channel at N = {n}, i = {i}"),
            limit: MAX_CLASSICAL_TABLE,
        });
    }
    Ok(())
}

/// Exact table of W_N^{(i)}, built from two half-length tables.
pub fn split_table(c: &ClassicalChannel, n: usize, i: usize) -> Result<SplitTable> {
    log2_blocklength(n)?;
    if i == 0 || i > n {
        return Err(Error::Domain(format!("index {i} outside 1..={n}")));
    }
    check_table(c.outputs(), n, i)?;
    Ok(table_unchecked(c, n, i))
}

fn table_unchecked(c: &ClassicalChannel, n: usize, i: usize) -> SplitTable {
    if n == 1 {
        let prob = c.p.iter().flat_map(|r| [r[0], r[1]]).collect();
        return SplitTable { n, index: 1, outputs: c.outputs(), prob };
    }
    let j = (i + 1) / 2;
    let h = table_unchecked(c, n / 2, j);
    let ny = h.outputs;
    let outputs = ny * ny;
    let prefixes = 1usize << (i - 1);
    let mut prob = vec![0.0; prefixes * outputs * 2];
    for p in 0..prefixes {
        let bits = bits_of(p, i - 1);
        let (a, b) = split_pairs(&bits[..2 * (j - 1)]);
        let (pa, pb) = (index_of(&a), index_of(&b));
        let last = if i % 2 == 0 { Some(bits[i - 2] as usize) } else { None };
        for ya in 0..ny {
            for yb in 0..ny {
                let base = (p * outputs + ya * ny + yb) * 2;
                for u in 0..2 {
                    prob[base + u] = match last {
                        None => 0.5 * (0..2).map(|t| h.get(pa, ya, u ^ t) * h.get(pb, yb, t)).sum::<f64>(),
                        Some(cb) => 0.5 * h.get(pa, ya, cb ^ u) * h.get(pb, yb, u),
                    };
                }
            }
        }
    }
    SplitTable { n, index: i, outputs, prob }
}

/// Exact or sampled evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassicalMode {
    Exact,
    MonteCarlo { samples: u64, seed: u64 },
}

/// Z and I of a classical split channel; standard errors when sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalSplit {
    pub z: f64,
    pub mutual_information: f64,
    pub z_stderr: Option<f64>,
    pub mi_stderr: Option<f64>,
}

pub fn classical_split(c: &ClassicalChannel, n: usize, i: usize, mode: ClassicalMode) -> Result<ClassicalSplit> {
    match mode {
        ClassicalMode::Exact => {
            let t = split_table(c, n, i)?;
            Ok(ClassicalSplit { z: t.bhattacharyya(), mutual_information: t.mutual_information(), z_stderr: None, mi_stderr: None })
        }
        ClassicalMode::MonteCarlo { samples, seed } => monte_carlo(c, n, i, samples, seed),
    }
}

/// Exact Z and I for every index.
pub fn classical_split_all(c: &ClassicalChannel, n: usize) -> Result<Vec<ClassicalSplit>> {
    (1..=n).map(|i| classical_split(c, n, i, ClassicalMode::Exact)).collect()
}

fn sample_output(c: &ClassicalChannel, x: u8, r: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for y in 0..c.outputs() {
        let p = c.prob(y, x);
        if p > 0.0 {
            acc += p;
            last = y;
            if r < acc {
                return y;
            }
        }
    }
    last
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn monte_carlo(c: &ClassicalChannel, n: usize, i: usize, samples: u64, seed: u64) -> Result<ClassicalSplit> {
    log2_blocklength(n)?;
    if i == 0 || i > n {
        return Err(Error::Domain(format!("index {i} outside 1..={n}")));
    }
    if samples < 2 {
        return Err(Error::Domain("Monte Carlo needs at least 2 samples".into()));
    }
    let (mut sz, mut szz, mut si, mut sii) = (0.0, 0.0, 0.0, 0.0);
    for s in 0..samples {
        let mut rng = TrialRng::new(seed, s);
        let u: Vec<u8> = (0..n).map(|k| rng.bit(Purpose::InfoBits, k as u64)).collect();
        let x = encode(&u)?;
        let y: Vec<usize> =
            x.iter().enumerate().map(|(k, &b)| sample_output(c, b, rng.uniform(Purpose::ChannelOutput, k as u64))).collect();
        let lam = split_llr(&base_llrs(c, &y), &u[..i - 1]);
        let sign = if u[i - 1] == 0 { 1.0 } else { -1.0 };
        let z = (-sign * lam / 2.0).exp();
        let m = 1.0 - softplus(-sign * lam) / LN_2;
        sz += z;
        szz += z * z;
        si += m;
        sii += m * m;
    }
    let k = samples as f64;
    let se = |s: f64, ss: f64| ((ss / k - (s / k).powi(2)).max(0.0) * k / (k - 1.0) / k).sqrt();
    Ok(ClassicalSplit { z: sz / k, mutual_information: si / k, z_stderr: Some(se(sz, szz)), mi_stderr: Some(se(si, sii)) })
}
