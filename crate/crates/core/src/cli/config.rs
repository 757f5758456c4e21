//! Experiment configuration: a JSON document validated into
//! [`ExperimentConfig`], with every violation reported at once.

use crate::bosonic;
use crate::channel::{ClassicalChannel, CqChannel};
use crate::decoder::{DecoderVariant, FrozenMode};
use crate::error::Error;
use crate::linalg::{CMat, DensityOperator, HermitianOperator, C64, TOL};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::fmt;

pub const DEFAULT_N: usize = 8;
pub const DEFAULT_TRIALS: u64 = 1000;
pub const DEFAULT_OUTPUT: &str = "out";

/// Output states of the channel under test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ChannelKind {
    /// Two dim × dim matrices given as rows of [re, im] pairs.
    ExplicitMatrices { dim: usize, rho0: Vec<Vec<[f64; 2]>>, rho1: Vec<Vec<[f64; 2]>> },
    /// Coherent states |±α⟩ with mean photon number E.
    Bpsk {
        #[serde(rename = "E")]
        energy: f64,
    },
    /// Binary symmetric channel embedded on the diagonal.
    Bsc { p: f64 },
    /// |0⟩ and o|0⟩ + √(1−o²)|1⟩.
    PurePair { overlap: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    #[serde(flatten)]
    pub kind: ChannelKind,
    /// Fixed Fuchs-Caves mixing weight; automatic when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

impl ChannelConfig {
    pub fn build(&self) -> crate::Result<CqChannel> {
        match &self.kind {
            ChannelKind::ExplicitMatrices { dim, rho0, rho1 } => {
                CqChannel::new(density_of(*dim, rho0)?, density_of(*dim, rho1)?)
            }
            ChannelKind::Bpsk { energy } => bosonic::bpsk_channel(*energy),
            ChannelKind::Bsc { p } => CqChannel::diagonal(&ClassicalChannel::bsc(*p)?),
            ChannelKind::PurePair { overlap } => {
                let o = *overlap;
                let a = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
                let b = [C64::new(o, 0.0), C64::new((1.0 - o * o).max(0.0).sqrt(), 0.0)];
                CqChannel::pure_pair(&a, &b)
            }
        }
    }

    pub fn name(&self) -> String {
        match &self.kind {
            ChannelKind::ExplicitMatrices { dim, .. } => format!("explicit-matrices({dim})"),
            ChannelKind::Bpsk { energy } => format!("bpsk({energy})"),
            ChannelKind::Bsc { p } => format!("bsc({p})"),
            ChannelKind::PurePair { overlap } => format!("pure-pair({overlap})"),
        }
    }
}

fn matrix_of(dim: usize, rows: &[Vec<[f64; 2]>]) -> CMat {
    CMat::from_fn(dim, |r, c| C64::new(rows[r][c][0], rows[r][c][1]))
}

fn density_of(dim: usize, rows: &[Vec<[f64; 2]>]) -> crate::Result<DensityOperator> {
    DensityOperator::from_matrix(matrix_of(dim, rows))
}

/// Information-set rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum CodeRule {
    /// The K indices with the smallest F_i.
    BestKByF {
        #[serde(rename = "K")]
        k: usize,
    },
    /// 1-based indices.
    Explicit { info_set: Vec<usize> },
}

impl CodeRule {
    pub fn k(&self) -> usize {
        match self {
            CodeRule::BestKByF { k } => *k,
            CodeRule::Explicit { info_set } => info_set.len(),
        }
    }
}

/// Energy grid for `bosonic-curve`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveConfig {
    pub e_min: f64,
    pub e_max: f64,
    pub points: usize,
    pub log_spacing: bool,
}

impl Default for CurveConfig {
    fn default() -> Self {
        CurveConfig { e_min: 1e-8, e_max: 100.0, points: 100, log_spacing: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub channel: ChannelConfig,
    #[serde(rename = "N")]
    pub n: usize,
    pub beta: f64,
    pub code: CodeRule,
    /// helstrom, sqrt-helstrom, fuchs-caves or hybrid (hybrid uses `beta`).
    pub variant: String,
    pub frozen: FrozenMode,
    pub trials: u64,
    pub seed: u64,
    pub output: String,
    pub curve: CurveConfig,
}

impl ExperimentConfig {
    pub fn decoder_variant(&self) -> DecoderVariant {
        match self.variant.as_str() {
            "hybrid" => DecoderVariant::Hybrid { beta: self.beta },
            v => v.parse().unwrap_or(DecoderVariant::Helstrom),
        }
    }

    /// Canonical JSON with every default filled in; parses back to an equal
    /// config.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Why a config was rejected.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Syntax { line: usize, column: usize, message: String },
    Invalid(Vec<String>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Syntax { line, column, message } => {
                write!(f, "syntax error at line {line}, column {column}: {message}")
            }
            ConfigError::Invalid(v) => {
                write!(f, "{} violation{}:", v.len(), if v.len() == 1 { "" } else { "s" })?;
                for m in v {
                    write!(f, "\n  - {m}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ConfigError {}

impl From<ConfigError> for Error {
    fn from(e: ConfigError) -> Self {
        Error::Config(e.to_string())
    }
}

const TOP_KEYS: [&str; 10] = ["channel", "N", "beta", "code", "variant", "frozen", "trials", "seed", "output", "curve"];
const VARIANTS: [&str; 4] = ["helstrom", "sqrt-helstrom", "fuchs-caves", "hybrid"];

struct Collector {
    errors: Vec<String>,
}

impl Collector {
    fn push(&mut self, m: impl Into<String>) {
        self.errors.push(m.into());
    }

    fn unknown_keys(&mut self, obj: &Map<String, Value>, allowed: &[&str], ctx: &str) {
        for k in obj.keys() {
            if !allowed.contains(&k.as_str()) {
                self.push(format!("{ctx}unknown key '{k}' (expected one of: {})", allowed.join(", ")));
            }
        }
    }

    fn number(&mut self, obj: &Map<String, Value>, key: &str, ctx: &str) -> Option<f64> {
        match obj.get(key) {
            None => None,
            Some(v) => match v.as_f64() {
                Some(x) if x.is_finite() => Some(x),
                _ => {
                    self.push(format!("{ctx}{key}: expected a finite number, found {v}"));
                    None
                }
            },
        }
    }

    fn required_number(&mut self, obj: &Map<String, Value>, key: &str, ctx: &str) -> Option<f64> {
        if !obj.contains_key(key) {
            self.push(format!("{ctx}missing key '{key}'"));
        }
        self.number(obj, key, ctx)
    }

    fn unsigned(&mut self, obj: &Map<String, Value>, key: &str, ctx: &str) -> Option<u64> {
        match obj.get(key) {
            None => None,
            Some(v) => match v.as_u64() {
                Some(x) => Some(x),
                None => {
                    self.push(format!("{ctx}{key}: expected a non-negative integer, found {v}"));
                    None
                }
            },
        }
    }

    fn string<'a>(&mut self, obj: &'a Map<String, Value>, key: &str, ctx: &str) -> Option<&'a str> {
        match obj.get(key) {
            None => None,
            Some(Value::String(s)) => Some(s),
            Some(v) => {
                self.push(format!("{ctx}{key}: expected a string, found {v}"));
                None
            }
        }
    }

    fn boolean(&mut self, obj: &Map<String, Value>, key: &str, ctx: &str) -> Option<bool> {
        match obj.get(key) {
            None => None,
            Some(Value::Bool(b)) => Some(*b),
            Some(v) => {
                self.push(format!("{ctx}{key}: expected true or false, found {v}"));
                None
            }
        }
    }

    fn object<'a>(&mut self, obj: &'a Map<String, Value>, key: &str) -> Option<&'a Map<String, Value>> {
        match obj.get(key) {
            None => None,
            Some(Value::Object(m)) => Some(m),
            Some(v) => {
                self.push(format!("{key}: expected an object, found {v}"));
                None
            }
        }
    }
}

fn parse_matrix(c: &mut Collector, v: Option<&Value>, dim: usize, name: &str) -> Option<Vec<Vec<[f64; 2]>>> {
    let ctx = format!("channel.{name}");
    let Some(v) = v else {
        c.push(format!("{ctx}: missing matrix"));
        return None;
    };
    let Some(rows) = v.as_array() else {
        c.push(format!("{ctx}: expected an array of rows"));
        return None;
    };
    if rows.len() != dim {
        c.push(format!("{ctx}: {} rows, expected dim = {dim}", rows.len()));
        return None;
    }
    let mut out = Vec::with_capacity(dim);
    let mut ok = true;
    for (r, row) in rows.iter().enumerate() {
        let entries = row.as_array().map(Vec::as_slice).unwrap_or(&[]);
        if entries.len() != dim {
            c.push(format!("{ctx}[{r}]: {} entries, expected {dim}", entries.len()));
            ok = false;
            continue;
        }
        let mut parsed = Vec::with_capacity(dim);
        for (col, e) in entries.iter().enumerate() {
            let pair = e.as_array().filter(|p| p.len() == 2).and_then(|p| Some([p[0].as_f64()?, p[1].as_f64()?]));
            match pair {
                Some(p) if p[0].is_finite() && p[1].is_finite() => parsed.push(p),
                _ => {
                    c.push(format!("{ctx}[{r}][{col}]: expected [re, im] with finite numbers, found {e}"));
                    ok = false;
                }
            }
        }
        out.push(parsed);
    }
    ok.then_some(out)
}

fn check_density(c: &mut Collector, dim: usize, rows: &[Vec<[f64; 2]>], name: &str) {
    let m = matrix_of(dim, rows);
    let tr = m.trace();
    if (tr.re - 1.0).abs() > TOL.density_trace || tr.im.abs() > TOL.density_trace {
        c.push(format!("channel.{name}: trace = {} must equal 1", fmt_complex(tr)));
    }
    let dev = m.hermitian_deviation();
    if dev > TOL.herm {
        c.push(format!("channel.{name}: not Hermitian (max |A_ij - conj(A_ji)| = {dev:.3e})"));
        return;
    }
    if let Ok(h) = HermitianOperator::new(m) {
        match crate::linalg::eigvals_herm(&h) {
            Ok(ev) => {
                let min = ev.last().copied().unwrap_or(0.0);
                if min < TOL.density_min_eig {
                    c.push(format!("channel.{name}: not positive semidefinite (min eigenvalue = {min:.6e})"));
                }
            }
            Err(e) => c.push(format!("channel.{name}: {e}")),
        }
    }
}

fn fmt_complex(z: C64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

fn parse_channel(c: &mut Collector, v: Option<&Value>) -> Option<ChannelConfig> {
    let Some(v) = v else {
        c.push("missing key 'channel'");
        return None;
    };
    let Some(obj) = v.as_object() else {
        c.push(format!("channel: expected an object, found {v}"));
        return None;
    };
    let ctx = "channel.";
    let delta = c.number(obj, "delta", ctx);
    if let Some(d) = delta {
        if !(0.0..1.0).contains(&d) {
            c.push(format!("channel.delta = {d} must lie in [0, 1)"));
        }
    }
    let kind = match c.string(obj, "kind", ctx) {
        None => {
            if !obj.contains_key("kind") {
                c.push("channel: missing key 'kind'");
            }
            return None;
        }
        Some(k) => k,
    };
    let kind = match kind {
        "bpsk" => {
            c.unknown_keys(obj, &["kind", "E", "delta"], ctx);
            let e = c.required_number(obj, "E", ctx)?;
            if e < 0.0 {
                c.push(format!("channel.E = {e} must be non-negative"));
            }
            ChannelKind::Bpsk { energy: e }
        }
        "bsc" => {
            c.unknown_keys(obj, &["kind", "p", "delta"], ctx);
            let p = c.required_number(obj, "p", ctx)?;
            if !(0.0..=1.0).contains(&p) {
                c.push(format!("channel.p = {p} must lie in [0, 1]"));
            }
            ChannelKind::Bsc { p }
        }
        "pure-pair" => {
            c.unknown_keys(obj, &["kind", "overlap", "delta"], ctx);
            let o = c.required_number(obj, "overlap", ctx)?;
            if !(0.0..=1.0).contains(&o) {
                c.push(format!("channel.overlap = {o} must lie in [0, 1]"));
            }
            ChannelKind::PurePair { overlap: o }
        }
        "explicit-matrices" => {
            c.unknown_keys(obj, &["kind", "dim", "rho0", "rho1", "delta"], ctx);
            if !obj.contains_key("dim") {
                c.push("channel: missing key 'dim'");
            }
            let dim = c.unsigned(obj, "dim", ctx)? as usize;
            if dim == 0 {
                c.push("channel.dim must be at least 1");
                return None;
            }
            let rho0 = parse_matrix(c, obj.get("rho0"), dim, "rho0");
            let rho1 = parse_matrix(c, obj.get("rho1"), dim, "rho1");
            if let Some(r) = &rho0 {
                check_density(c, dim, r, "rho0");
            }
            if let Some(r) = &rho1 {
                check_density(c, dim, r, "rho1");
            }
            ChannelKind::ExplicitMatrices { dim, rho0: rho0?, rho1: rho1? }
        }
        other => {
            c.push(format!("channel.kind '{other}' unknown (expected explicit-matrices, bpsk, bsc or pure-pair)"));
            return None;
        }
    };
    Some(ChannelConfig { kind, delta })
}

fn parse_code(c: &mut Collector, obj: Option<&Map<String, Value>>, n: Option<usize>) -> Option<CodeRule> {
    let Some(obj) = obj else {
        return n.map(|n| CodeRule::BestKByF { k: n / 2 });
    };
    let ctx = "code.";
    let rule = c.string(obj, "rule", ctx).unwrap_or("best-k-by-f");
    match rule {
        "best-k-by-f" => {
            c.unknown_keys(obj, &["rule", "K"], ctx);
            let k = c.unsigned(obj, "K", ctx).map(|k| k as usize).or(n.map(|n| n / 2))?;
            if let Some(n) = n {
                if k > n {
                    c.push(format!("code.K = {k} exceeds N = {n}"));
                }
            }
            Some(CodeRule::BestKByF { k })
        }
        "explicit" => {
            c.unknown_keys(obj, &["rule", "info_set"], ctx);
            let Some(list) = obj.get("info_set").and_then(Value::as_array) else {
                c.push("code.info_set: expected an array of 1-based indices");
                return None;
            };
            let mut set = Vec::new();
            for v in list {
                match v.as_u64() {
                    Some(i) => set.push(i as usize),
                    None => c.push(format!("code.info_set: {v} is not a positive integer")),
                }
            }
            if let Some(n) = n {
                if set.len() > n {
                    c.push(format!("code: K = {} exceeds N = {n}", set.len()));
                }
                for &i in &set {
                    if i == 0 || i > n {
                        c.push(format!("code.info_set: index {i} outside 1..={n}"));
                    }
                }
            }
            let mut sorted = set.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                c.push("code.info_set: repeated index");
            }
            Some(CodeRule::Explicit { info_set: set })
        }
        other => {
            c.push(format!("code.rule '{other}' unknown (expected best-k-by-f or explicit)"));
            None
        }
    }
}

fn parse_curve(c: &mut Collector, obj: Option<&Map<String, Value>>) -> CurveConfig {
    let mut curve = CurveConfig::default();
    let Some(obj) = obj else {
        return curve;
    };
    let ctx = "curve.";
    c.unknown_keys(obj, &["e_min", "e_max", "points", "log_spacing"], ctx);
    curve.e_min = c.number(obj, "e_min", ctx).unwrap_or(curve.e_min);
    curve.e_max = c.number(obj, "e_max", ctx).unwrap_or(curve.e_max);
    curve.points = c.unsigned(obj, "points", ctx).map_or(curve.points, |p| p as usize);
    curve.log_spacing = c.boolean(obj, "log_spacing", ctx).unwrap_or(curve.log_spacing);
    if !(curve.e_min > 0.0 && curve.e_min < curve.e_max) {
        c.push(format!("curve: need 0 < e_min < e_max, got [{}, {}]", curve.e_min, curve.e_max));
    }
    if curve.points < 2 {
        c.push(format!("curve.points = {} must be at least 2", curve.points));
    }
    curve
}

/// Parses and validates a config. Keys other than `channel` take defaults:
/// N = 8, β = 0.45, best-K-by-F with K = N/2, helstrom, fixed frozen bits,
/// 1000 trials, seed 0, output `out`, and a 100-point logarithmic energy grid
/// on [1e-8, 100].
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let root: Value = serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string().split(" at line").next().unwrap_or_default().to_string(),
    })?;
    let Some(obj) = root.as_object() else {
        return Err(ConfigError::Invalid(vec![format!("top level: expected an object, found {root}")]));
    };
    let mut c = Collector { errors: Vec::new() };
    c.unknown_keys(obj, &TOP_KEYS, "");

    let channel = parse_channel(&mut c, obj.get("channel"));

    let n = match c.unsigned(obj, "N", "") {
        None if obj.contains_key("N") => None,
        None => Some(DEFAULT_N),
        Some(n) if n == 0 || !n.is_power_of_two() => {
            c.push(format!("N = {n} must be a power of two"));
            None
        }
        Some(n) => Some(n as usize),
    };

    let beta = c.number(obj, "beta", "").unwrap_or(crate::polar::DEFAULT_BETA);
    if !(beta > 0.0 && beta < 0.5) {
        c.push(format!("beta = {beta} violates β ∈ (0, ½)"));
    }

    let code_obj = c.object(obj, "code");
    let code = if obj.contains_key("code") && code_obj.is_none() { None } else { parse_code(&mut c, code_obj, n) };

    let variant = c.string(obj, "variant", "").unwrap_or("helstrom").to_string();
    if !VARIANTS.contains(&variant.as_str()) {
        c.push(format!("variant '{variant}' unknown (expected one of: {})", VARIANTS.join(", ")));
    }

    let frozen = match c.string(obj, "frozen", "").unwrap_or("fixed") {
        "fixed" => FrozenMode::Fixed,
        "uniform-random" => FrozenMode::UniformRandom,
        other => {
            c.push(format!("frozen '{other}' unknown (expected fixed or uniform-random)"));
            FrozenMode::Fixed
        }
    };

    let trials = c.unsigned(obj, "trials", "").unwrap_or(DEFAULT_TRIALS);
    if trials == 0 {
        c.push("trials must be at least 1");
    }
    let seed = c.unsigned(obj, "seed", "").unwrap_or(0);
    let output = c.string(obj, "output", "").unwrap_or(DEFAULT_OUTPUT).to_string();
    if output.is_empty() {
        c.push("output must be a non-empty path");
    }
    let curve_obj = c.object(obj, "curve");
    let curve = parse_curve(&mut c, curve_obj);

    if let Some(ch) = &channel {
        if c.errors.is_empty() {
            if let Err(e) = ch.build() {
                c.push(format!("channel: {e}"));
            }
        }
    }

    if !c.errors.is_empty() {
        return Err(ConfigError::Invalid(c.errors));
    }
    Ok(ExperimentConfig {
        channel: channel.expect("validated"),
        n: n.expect("validated"),
        beta,
        code: code.expect("validated"),
        variant,
        frozen,
        trials,
        seed,
        output,
        curve,
    })
}
