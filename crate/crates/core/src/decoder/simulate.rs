use super::code::{CodeSpec, FrozenMode};
use super::scd::{ScDecoder, Strategy};
use crate::error::{Error, Result};
use crate::linalg::{eig_herm, inner, C64};
use crate::polar::encode;
use crate::rng::{Purpose, TrialRng};
use serde::{Deserialize, Serialize};

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.5758293035489004;

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitRecord {
    pub index: usize,
    pub strategy: Strategy,
    pub decided: u8,
    pub truth: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeTrace {
    pub bits: Vec<BitRecord>,
    pub success: bool,
}

impl DecodeTrace {
    pub fn decided(&self) -> Vec<u8> {
        self.bits.iter().map(|b| b.decided).collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyHistogram {
    pub product: u64,
    pub collective: u64,
    pub frozen: u64,
}

impl StrategyHistogram {
    fn add(&mut self, t: &DecodeTrace) {
        for b in &t.bits {
            match b.strategy {
                Strategy::Product => self.product += 1,
                Strategy::Collective => self.collective += 1,
                Strategy::Frozen => self.frozen += 1,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub trials: u64,
    pub errors: u64,
    pub error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub strategy_histogram: StrategyHistogram,
    /// Trace of trial 0.
    pub sample_trace: DecodeTrace,
}

impl SimulationResult {
    /// √(p(1−p)/trials) at the given reference probability.
    pub fn sigma_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// Pure components (weight, vector) of ρ0 and ρ1.
struct Unraveling {
    parts: [Vec<(f64, Vec<C64>)>; 2],
}

impl Unraveling {
    fn new(dec: &ScDecoder) -> Result<Self> {
        let w = dec.synthesizer().channel();
        let mut parts: [Vec<(f64, Vec<C64>)>; 2] = [Vec::new(), Vec::new()];
        for x in 0..2u8 {
            let es = eig_herm(w.rho(x).op())?;
            let total: f64 = es.values.iter().filter(|&&l| l > 0.0).sum();
            for (k, &l) in es.values.iter().enumerate() {
                if l > 0.0 {
                    parts[x as usize].push((l / total, es.vector(k)));
                }
            }
        }
        Ok(Unraveling { parts })
    }

    fn pick(&self, x: u8, r: f64) -> &[C64] {
        let parts = &self.parts[x as usize];
        let mut acc = 0.0;
        for (p, v) in parts {
            acc += p;
            if r < acc {
                return v;
            }
        }
        &parts[parts.len() - 1].1
    }

    /// ⊗_j |ψ_j⟩ with ψ_j a component of ρ_{x_j} drawn from `rng`.
    fn sample(&self, x: &[u8], rng: &mut TrialRng) -> Vec<C64> {
        let mut psi = vec![C64::new(1.0, 0.0)];
        for (j, &b) in x.iter().enumerate() {
            let v = self.pick(b, rng.uniform(Purpose::ChannelOutput, j as u64));
            psi = psi.iter().flat_map(|a| v.iter().map(move |c| a * c)).collect();
        }
        psi
    }
}

fn run_trial(dec: &mut ScDecoder, code: &CodeSpec, u: &[u8], un: &Unraveling, rng: &mut TrialRng) -> Result<DecodeTrace> {
    let n = dec.block_length();
    if code.n() != n || u.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: u.len() });
    }
    let x = encode(u)?;
    let mut psi = un.sample(&x, rng);
    let mut decided: Vec<u8> = Vec::with_capacity(n);
    let mut bits = Vec::with_capacity(n);
    for i in 1..=n {
        let strategy = dec.strategy(code, i);
        let bit = if strategy == Strategy::Frozen {
            u[i - 1]
        } else {
            let p = dec.projector(i, &decided)?;
            let v = p.matrix().matvec(&psi);
            let p0 = inner(&psi, &v).re.clamp(0.0, 1.0);
            let r = rng.uniform(Purpose::Measurement, i as u64);
            if r < p0 {
                let s = 1.0 / p0.sqrt();
                psi = v.iter().map(|z| z * s).collect();
                0
            } else {
                let s = 1.0 / (1.0 - p0).sqrt();
                psi = psi.iter().zip(&v).map(|(a, b)| (a - b) * s).collect();
                1
            }
        };
        decided.push(bit);
        bits.push(BitRecord { index: i, strategy, decided: bit, truth: u[i - 1] });
    }
    let success = decided == u;
    Ok(DecodeTrace { bits, success })
}

/// Decodes the word u once: the channel output is a pure component of
/// ⊗ρ_{x_j} drawn from the trial generator, and each test collapses it by
/// the Born rule.
pub fn decode_word(dec: &mut ScDecoder, code: &CodeSpec, u: &[u8], rng: &mut TrialRng) -> Result<DecodeTrace> {
    let un = Unraveling::new(dec)?;
    run_trial(dec, code, u, &un, rng)
}

/// One hybrid decoding of u under trial `trial` of `seed`.
pub fn hybrid_decode(dec: &mut ScDecoder, code: &CodeSpec, u: &[u8], seed: u64, trial: u64) -> Result<DecodeTrace> {
    if dec.report().is_none() {
        return Err(Error::Domain("hybrid decoding needs a decoder built with a channel report".into()));
    }
    decode_word(dec, code, u, &mut TrialRng::new(seed, trial))
}

fn trial_word(code: &CodeSpec, rng: &mut TrialRng) -> Vec<u8> {
    (1..=code.n())
        .map(|i| {
            if code.is_info(i) {
                rng.bit(Purpose::InfoBits, i as u64)
            } else {
                match code.mode() {
                    FrozenMode::Fixed => code.frozen_values()[i - 1],
                    FrozenMode::UniformRandom => rng.bit(Purpose::FrozenBits, i as u64),
                }
            }
        })
        .collect()
}

/// Block error rate over `trials` independent words.
pub fn simulate(dec: &mut ScDecoder, code: &CodeSpec, trials: u64, seed: u64) -> Result<SimulationResult> {
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    let un = Unraveling::new(dec)?;
    let mut errors = 0;
    let mut hist = StrategyHistogram::default();
    let mut sample = None;
    for t in 0..trials {
        let mut rng = TrialRng::new(seed, t);
        let u = trial_word(code, &mut rng);
        let trace = run_trial(dec, code, &u, &un, &mut rng)?;
        if !trace.success {
            errors += 1;
        }
        hist.add(&trace);
        if sample.is_none() {
            sample = Some(trace);
        }
    }
    let (ci_low, ci_high) = wilson_interval(errors, trials, Z99);
    Ok(SimulationResult {
        trials,
        errors,
        error: errors as f64 / trials as f64,
        ci_low,
        ci_high,
        strategy_histogram: hist,
        sample_trace: sample.expect("trials >= 1"),
    })
}
