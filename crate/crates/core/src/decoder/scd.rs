use super::code::CodeSpec;
use crate::channel::ClassicalChannel;
use crate::error::{Error, Result};
use crate::fuchs_caves::{TIE_TOL, fc_measurement, fc_measurement_states, product_basis_projector, tuple_digits};
use crate::linalg::{func_herm, pos_projector, CMat, DensityOperator, HermitianOperator, Regularization};
use crate::polar::{base_llrs, build_report, encode, split_llr, ChannelReport, Synthesizer};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

/// Measurement used for each successive test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderVariant {
    /// {ρ̄_{p0} − ρ̄_{p1} ≥ 0}
    Helstrom,
    /// {√ρ̄_{p0} − √ρ̄_{p1} ≥ 0}
    SqrtHelstrom,
    /// Collective Fuchs-Caves decision on each block pair.
    FuchsCaves,
    /// Product Fuchs-Caves decisions on 𝒢(W_FC, β), collective Helstrom tests
    /// on the remaining information bits.
    Hybrid { beta: f64 },
}

impl DecoderVariant {
    pub fn name(&self) -> &'static str {
        match self {
            DecoderVariant::Helstrom => "helstrom",
            DecoderVariant::SqrtHelstrom => "sqrt-helstrom",
            DecoderVariant::FuchsCaves => "fuchs-caves",
            DecoderVariant::Hybrid { .. } => "hybrid",
        }
    }

    pub fn beta(&self) -> Option<f64> {
        match self {
            DecoderVariant::Hybrid { beta } => Some(*beta),
            _ => None,
        }
    }
}

impl fmt::Display for DecoderVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecoderVariant {
    type Err = Error;

    /// `helstrom`, `sqrt-helstrom`, `fuchs-caves`, `hybrid` (β = 0.45) or
    /// `hybrid:<β>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "helstrom" => Ok(DecoderVariant::Helstrom),
            "sqrt-helstrom" => Ok(DecoderVariant::SqrtHelstrom),
            "fuchs-caves" => Ok(DecoderVariant::FuchsCaves),
            "hybrid" => Ok(DecoderVariant::Hybrid { beta: crate::polar::DEFAULT_BETA }),
            _ => match s.strip_prefix("hybrid:").map(str::parse::<f64>) {
                Some(Ok(beta)) => Ok(DecoderVariant::Hybrid { beta }),
                _ => Err(Error::Config(format!("unknown decoder variant '{s}'"))),
            },
        }
    }
}

/// How one bit was decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Product,
    Collective,
    Frozen,
}

struct HybridData {
    report: ChannelReport,
    /// single-use Fuchs-Caves basis (columns)
    basis: CMat,
    induced: ClassicalChannel,
}

/// Successive-cancellation decoder over the exact synthesized states, with
/// the decision projectors cached by (i, prefix).
pub struct ScDecoder {
    synth: Arc<Synthesizer>,
    variant: DecoderVariant,
    hybrid: Option<HybridData>,
    cache: HashMap<(usize, usize), Arc<HermitianOperator>>,
}

fn prefix_key(prefix: &[u8]) -> usize {
    crate::polar::index_of(prefix)
}

impl ScDecoder {
    /// For the hybrid variant the channel report is built here.
    pub fn new(synth: Arc<Synthesizer>, variant: DecoderVariant) -> Result<Self> {
        match variant {
            DecoderVariant::Hybrid { beta } => {
                let report = build_report(&synth, beta)?;
                Self::with_report(synth, report)
            }
            _ => Ok(ScDecoder { synth, variant, hybrid: None, cache: HashMap::new() }),
        }
    }

    /// Hybrid decoder driven by an existing report for the same (W, N, β).
    pub fn with_report(synth: Arc<Synthesizer>, report: ChannelReport) -> Result<Self> {
        let n = synth.block_length();
        if report.n != n || report.records.len() != n || report.records.iter().enumerate().any(|(k, r)| r.i != k + 1) {
            return Err(Error::Domain(format!("report for N = {} does not match a decoder for N = {n}", report.n)));
        }
        let w = synth.channel();
        let m = fc_measurement(w)?;
        let induced = m.induced(w)?;
        let variant = DecoderVariant::Hybrid { beta: report.beta };
        let hybrid = Some(HybridData { report, basis: m.basis.vectors.clone(), induced });
        Ok(ScDecoder { synth, variant, hybrid, cache: HashMap::new() })
    }

    pub fn variant(&self) -> DecoderVariant {
        self.variant
    }

    pub fn synthesizer(&self) -> &Synthesizer {
        &self.synth
    }

    pub fn report(&self) -> Option<&ChannelReport> {
        self.hybrid.as_ref().map(|h| &h.report)
    }

    pub fn block_length(&self) -> usize {
        self.synth.block_length()
    }

    /// Strategy for index i (1-based) under `code`.
    pub fn strategy(&self, code: &CodeSpec, i: usize) -> Strategy {
        if !code.is_info(i) {
            return Strategy::Frozen;
        }
        match &self.hybrid {
            Some(h) if h.report.is_good_wfc(i) => Strategy::Product,
            _ => Strategy::Collective,
        }
    }

    /// Projector onto outcome 0 of the test for u_i given u₁^{i−1} = `prefix`.
    pub fn projector(&mut self, i: usize, prefix: &[u8]) -> Result<Arc<HermitianOperator>> {
        if i == 0 || i > self.block_length() || prefix.len() != i - 1 {
            return Err(Error::Domain(format!("no test for index {i} with a prefix of length {}", prefix.len())));
        }
        let key = (i, prefix_key(prefix));
        if let Some(p) = self.cache.get(&key) {
            return Ok(p.clone());
        }
        let p = Arc::new(self.build_projector(i, prefix)?);
        self.cache.insert(key, p.clone());
        Ok(p)
    }

    fn build_projector(&self, i: usize, prefix: &[u8]) -> Result<HermitianOperator> {
        if let Some(h) = &self.hybrid {
            if h.report.is_good_wfc(i) {
                return Ok(self.product_projector(h, prefix));
            }
            let (s0, s1) = self.synth.block(prefix)?;
            return helstrom_projector(&s0, &s1);
        }
        let (s0, s1) = self.synth.block(prefix)?;
        match self.variant {
            DecoderVariant::Helstrom => helstrom_projector(&s0, &s1),
            DecoderVariant::SqrtHelstrom => sqrt_helstrom_projector(&s0, &s1),
            DecoderVariant::FuchsCaves => Ok(fc_measurement_states(&s0, &s1, Regularization::Auto)?.pi0),
            DecoderVariant::Hybrid { .. } => unreachable!("hybrid data present"),
        }
    }

    /// Σ |y⟩⟨y| over product Fuchs-Caves outcomes y^N whose likelihood
    /// recursion on the induced channel decides 0.
    fn product_projector(&self, h: &HybridData, prefix: &[u8]) -> HermitianOperator {
        let mask = self.product_mask(h, prefix);
        product_basis_projector(&h.basis, self.block_length(), &mask)
    }

    fn product_mask(&self, h: &HybridData, prefix: &[u8]) -> Vec<bool> {
        let n = self.block_length();
        let d = self.synth.channel().dim();
        (0..d.pow(n as u32))
            .map(|y| {
                let ys = tuple_digits(y, d, n);
                split_llr(&base_llrs(&h.induced, &ys), prefix) >= -TIE_TOL
            })
            .collect()
    }

    /// Decision mask of a product step over outcome tuples (system 1 most
    /// significant); `None` unless the index is handled by product decisions.
    pub fn product_decisions(&self, i: usize, prefix: &[u8]) -> Option<Vec<bool>> {
        let h = self.hybrid.as_ref()?;
        h.report.is_good_wfc(i).then(|| self.product_mask(h, prefix))
    }

    /// ρ_{uG_N}
    pub fn codeword_state(&self, u: &[u8]) -> Result<DensityOperator> {
        let x = encode(u)?;
        let w = self.synth.channel();
        let m = CMat::kron_all(x.iter().map(|&b| w.rho(b).matrix()));
        Ok(DensityOperator::from_constructed(HermitianOperator::from_constructed(m)))
    }

    pub fn cached_projectors(&self) -> usize {
        self.cache.len()
    }
}

pub fn helstrom_projector(s0: &DensityOperator, s1: &DensityOperator) -> Result<HermitianOperator> {
    pos_projector(&s0.op().sub(s1.op()))
}

pub fn sqrt_helstrom_projector(s0: &DensityOperator, s1: &DensityOperator) -> Result<HermitianOperator> {
    let a = func_herm(s0.op(), f64::sqrt, false)?;
    let b = func_herm(s1.op(), f64::sqrt, false)?;
    pos_projector(&a.sub(&b))
}

fn outcome_operator(p: &HermitianOperator, bit: u8) -> HermitianOperator {
    if bit == 0 {
        p.clone()
    } else {
        p.complement()
    }
}

fn check_word(code: &CodeSpec, n: usize, u: &[u8]) -> Result<()> {
    if code.n() != n || u.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: u.len().min(code.n()) });
    }
    Ok(())
}

/// Λ_{u^N} = Π₁⋯Π_N⋯Π₁ with identities at frozen indices, for the frozen
/// values carried by `u`.
pub fn scd_povm_element(dec: &mut ScDecoder, code: &CodeSpec, u: &[u8]) -> Result<HermitianOperator> {
    let n = dec.block_length();
    check_word(code, n, u)?;
    let info = code.info_set();
    let dim = dec.synthesizer().output_dim();
    let mut m = HermitianOperator::identity(dim);
    for &i in info.iter().rev() {
        let q = outcome_operator(&*dec.projector(i, &u[..i - 1])?, u[i - 1]);
        m = HermitianOperator::from_constructed(q.matrix().matmul(m.matrix()).matmul(q.matrix()));
    }
    Ok(m)
}

/// Tr{Λ_u ρ_u} by applying the tests in order to ρ_u.
pub fn success_probability(dec: &mut ScDecoder, code: &CodeSpec, u: &[u8]) -> Result<f64> {
    let n = dec.block_length();
    check_word(code, n, u)?;
    let info = code.info_set();
    if info.is_empty() {
        return Ok(1.0);
    }
    let mut sigma = dec.codeword_state(u)?.op().matrix().clone();
    for (t, &i) in info.iter().enumerate() {
        let q = outcome_operator(&*dec.projector(i, &u[..i - 1])?, u[i - 1]);
        if t + 1 == info.len() {
            return Ok(q.matrix().trace_product_re(&sigma));
        }
        sigma = q.matrix().matmul(&sigma).matmul(q.matrix());
    }
    unreachable!()
}

/// P_e = 1 − 2^{−K} Σ_{u_𝒜} Tr{Λ_u ρ_u}, averaged over the frozen patterns of
/// the code's mode.
pub fn exact_error(dec: &mut ScDecoder, code: &CodeSpec) -> Result<f64> {
    let n = dec.block_length();
    if code.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: code.n() });
    }
    if n > 16 {
        return Err(Error::GuardExceeded { what: "exact error enumeration over 2^N words".into(), limit: 1 << 16 });
    }
    let k = code.k();
    let patterns = code.frozen_patterns();
    let mut acc = 0.0;
    for f in &patterns {
        for a in 0..(1usize << k) {
            let u = code.word(&crate::polar::bits_of(a, k), f);
            acc += success_probability(dec, code, &u)?;
        }
    }
    Ok(1.0 - acc / (patterns.len() as f64 * (1u64 << k) as f64))
}

/// Error of the first information test alone, ½(Tr{Π₀ρ̄₁} + Tr{Π₁ρ̄₀}),
/// with the frozen prefix of the code.
pub fn first_test_error(dec: &mut ScDecoder, code: &CodeSpec) -> Result<f64> {
    let i = *code.info_set().first().ok_or_else(|| Error::Domain("code has no information bits".into()))?;
    let prefix = code.frozen_values()[..i - 1].to_vec();
    let p = dec.projector(i, &prefix)?;
    let (s0, s1) = dec.synthesizer().block(&prefix)?;
    Ok(0.5 * (p.trace_with(s1.op()) + 1.0 - p.trace_with(s0.op())))
}
