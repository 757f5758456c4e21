//! Subcommands: each writes its artifacts, then a manifest listing them.

use super::config::{ChannelKind, CodeRule, ExperimentConfig};
use super::output::{check_csv, sha256_hex, to_json, write};
use crate::bosonic;
use crate::channel::{
    accessible_information_qubit, bhattacharyya, helstrom_povm, holevo_information, induce_classical,
    mutual_information, quantum_fidelity, two_outcome_error, CqChannel,
};
use crate::decoder::{
    exact_error, prop_error_bound, simulate, CodeSpec, DecoderVariant, ScDecoder, StrategyHistogram, Strategy,
};
use crate::error::{Error, Result};
use crate::fuchs_caves::{fc_measurement_with, fc_product_test, ENUMERATION_LOG2_LIMIT};
use crate::linalg::Regularization;
use crate::polar::{build_report_with, verify_subset, ChannelReport, Synthesizer};
use crate::random::{random_basis_povm, random_povm};
use crate::rng::stream;
use crate::small_codes::verify_small_codes;
use serde::Serialize;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

/// Grid resolution of the qubit accessible-information search in `info`.
pub const INFO_GRID: usize = 64;

/// Random POVMs tried per sign in `fc-test`.
pub const FC_TEST_POVMS: usize = 25;

/// Stream ids derived from the root seed.
const STREAM_POVMS: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Info,
    Synth,
    Select,
    Decode,
    VerifySmallCodes,
    FcTest,
    BosonicCurve,
    SubsetCheck,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Info,
        Command::Synth,
        Command::Select,
        Command::Decode,
        Command::VerifySmallCodes,
        Command::FcTest,
        Command::BosonicCurve,
        Command::SubsetCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Info => "info",
            Command::Synth => "synth",
            Command::Select => "select",
            Command::Decode => "decode",
            Command::VerifySmallCodes => "verify-smallcodes",
            Command::FcTest => "fc-test",
            Command::BosonicCurve => "bosonic-curve",
            Command::SubsetCheck => "subset-check",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown command '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecodeMode {
    Exact,
    MonteCarlo,
}

/// Command-line overrides of the config.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub trials: Option<u64>,
    pub mode: Option<DecodeMode>,
    pub points: Option<usize>,
    pub log_spacing: Option<bool>,
    /// Replace F_i at this 1-based index by Z_FC,i + 0.01 before the subset
    /// check.
    pub corrupt_f: Option<usize>,
}

impl RunOptions {
    /// The config with the overrides applied; this is what gets hashed.
    pub fn apply(&self, config: &ExperimentConfig) -> Result<ExperimentConfig> {
        let mut c = config.clone();
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(t) = self.trials {
            if t == 0 {
                return Err(Error::Config("--trials must be at least 1".into()));
            }
            c.trials = t;
        }
        if let Some(o) = &self.out {
            c.output = o.to_string_lossy().into_owned();
        }
        if let Some(p) = self.points {
            if p < 2 {
                return Err(Error::Config(format!("--points = {p} must be at least 2")));
            }
            c.curve.points = p;
        }
        if let Some(l) = self.log_spacing {
            c.curve.log_spacing = l;
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ArtifactRecord {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
struct Versions {
    cqpolar: &'static str,
    serde_json: &'static str,
}

#[derive(Debug, Clone, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    /// Hash of the effective config with the output path cleared.
    config_sha256: String,
    config: &'a ExperimentConfig,
    seed: u64,
    channel: String,
    delta: f64,
    versions: Versions,
    artifacts: &'a [ArtifactRecord],
    /// Excluded from every hash.
    wall_time_s: f64,
}

/// What a finished run produced.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub artifacts: Vec<ArtifactRecord>,
    /// Short human-readable result.
    pub message: String,
}

struct Outcome {
    files: Vec<(String, String)>,
    message: String,
    /// Written artifacts are kept even when the run raises an alarm.
    verdict: Result<()>,
}

impl Outcome {
    fn ok(files: Vec<(String, String)>, message: String) -> Self {
        Outcome { files, message, verdict: Ok(()) }
    }
}

/// Runs `command`, writing artifacts and `manifest.json` under the output
/// directory. Numeric artifacts depend only on the effective config.
pub fn run(command: Command, config: &ExperimentConfig, options: &RunOptions) -> Result<RunSummary> {
    let start = Instant::now();
    let config = options.apply(config)?;
    let w = config.channel.build()?;
    let reg = config.channel.delta.map_or(Regularization::Auto, Regularization::Fixed);
    let delta = reg.resolve(w.rho0(), w.rho1())?;

    let outcome = match command {
        Command::Info => info(&config, &w, reg)?,
        Command::Synth => synth(&config, &w, reg)?,
        Command::Select => select(&config, &w, reg)?,
        Command::Decode => decode(&config, &w, reg, options.mode)?,
        Command::VerifySmallCodes => small_codes(&config, &w)?,
        Command::FcTest => fc_test(&config, &w, reg)?,
        Command::BosonicCurve => curve(&config)?,
        Command::SubsetCheck => subset(&config, &w, reg, options.corrupt_f)?,
    };

    let out_dir = PathBuf::from(&config.output);
    std::fs::create_dir_all(&out_dir).map_err(|e| Error::Io(format!("{}: {e}", out_dir.display())))?;
    let mut artifacts = Vec::new();
    for (name, text) in &outcome.files {
        write(&out_dir.join(name), text)?;
        artifacts.push(ArtifactRecord { file: name.clone(), sha256: sha256_hex(text.as_bytes()) });
    }
    let manifest = Manifest {
        command: command.name(),
        config_sha256: config_hash(&config),
        config: &config,
        seed: config.seed,
        channel: config.channel.name(),
        delta,
        versions: Versions { cqpolar: env!("CARGO_PKG_VERSION"), serde_json: "1" },
        artifacts: &artifacts,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    write(&out_dir.join("manifest.json"), &to_json(&manifest)?)?;
    outcome.verdict?;
    Ok(RunSummary { out_dir, artifacts, message: outcome.message })
}

pub fn config_hash(config: &ExperimentConfig) -> String {
    let mut c = config.clone();
    c.output.clear();
    sha256_hex(c.to_json().as_bytes())
}

/// Hashes of the numeric artifacts of a finished run, for determinism
/// checks.
pub fn artifact_hashes(dir: &Path) -> Result<Vec<ArtifactRecord>> {
    let text = std::fs::read_to_string(dir.join("manifest.json"))?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Io(e.to_string()))?;
    let list = v["artifacts"].as_array().cloned().unwrap_or_default();
    Ok(list
        .iter()
        .map(|a| ArtifactRecord {
            file: a["file"].as_str().unwrap_or_default().to_string(),
            sha256: a["sha256"].as_str().unwrap_or_default().to_string(),
        })
        .collect())
}

fn json_file<T: Serialize>(name: &str, value: &T) -> Result<(String, String)> {
    Ok((name.to_string(), to_json(value)?))
}

fn csv_file(name: &str, text: String) -> Result<(String, String)> {
    check_csv(&text)?;
    Ok((name.to_string(), text))
}

#[derive(Debug, Serialize)]
struct BpskClosedForms {
    #[serde(rename = "E")]
    e: f64,
    chi: f64,
    i_hel: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    fraction: Option<f64>,
    quantum_fidelity: f64,
}

#[derive(Debug, Serialize)]
struct InfoRecord {
    channel: String,
    dim: usize,
    #[serde(rename = "I")]
    holevo: f64,
    #[serde(rename = "F")]
    fidelity: f64,
    #[serde(rename = "I_acc_lower")]
    accessible_lower: f64,
    accessible_method: &'static str,
    #[serde(rename = "I_hel")]
    i_hel: f64,
    #[serde(rename = "I_fc")]
    i_fc: f64,
    #[serde(rename = "Z_FC")]
    z_fc: f64,
    #[serde(rename = "Z_Hel")]
    z_hel: f64,
    p_e_hel: f64,
    p_e_fc: f64,
    delta: f64,
    faithful: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    bpsk: Option<BpskClosedForms>,
}

fn info(config: &ExperimentConfig, w: &CqChannel, reg: Regularization) -> Result<Outcome> {
    let hel = helstrom_povm(w)?;
    let whel = induce_classical(w, &hel)?;
    let m = fc_measurement_with(w, reg)?;
    let wfc = m.induced(w)?;
    let i_hel = mutual_information(&whel);
    let i_fc = mutual_information(&wfc);
    let (accessible_lower, accessible_method) = if w.dim() == 2 {
        (accessible_information_qubit(w, INFO_GRID)?.value.max(i_hel).max(i_fc), "qubit-projective-search")
    } else {
        (i_hel.max(i_fc), "max-helstrom-fuchs-caves")
    };
    let bpsk = match config.channel.kind {
        ChannelKind::Bpsk { energy } => Some(BpskClosedForms {
            e: energy,
            chi: bosonic::chi(energy)?,
            i_hel: bosonic::i_hel(energy)?,
            fraction: (energy > 0.0).then(|| bosonic::collective_fraction(energy)).transpose()?,
            quantum_fidelity: bosonic::overlap(energy),
        }),
        _ => None,
    };
    let rec = InfoRecord {
        channel: config.channel.name(),
        dim: w.dim(),
        holevo: holevo_information(w)?,
        fidelity: quantum_fidelity(w)?,
        accessible_lower,
        accessible_method,
        i_hel,
        i_fc,
        z_fc: bhattacharyya(&wfc),
        z_hel: bhattacharyya(&whel),
        p_e_hel: two_outcome_error(w, &hel.elements()[0]),
        p_e_fc: two_outcome_error(w, &m.pi0),
        delta: m.delta,
        faithful: w.is_faithful()?,
        bpsk,
    };
    let message = format!("I = {}, F = {}, I_acc_lower = {}", rec.holevo, rec.fidelity, rec.accessible_lower);
    Ok(Outcome::ok(vec![json_file("info.json", &rec)?], message))
}

fn report_for(config: &ExperimentConfig, synth: &Synthesizer, reg: Regularization) -> Result<ChannelReport> {
    build_report_with(synth, config.beta, reg)
}

fn synth(config: &ExperimentConfig, w: &CqChannel, reg: Regularization) -> Result<Outcome> {
    let s = Synthesizer::new(w, config.n)?;
    let report = report_for(config, &s, reg)?;
    let message = format!("N = {}: {} of {} indices good for W", config.n, report.good_w().len(), config.n);
    Ok(Outcome::ok(vec![csv_file("synth.csv", report.to_csv())?, json_file("synth.json", &report)?], message))
}

fn info_set(config: &ExperimentConfig, report: &ChannelReport) -> Result<Vec<usize>> {
    match &config.code {
        CodeRule::BestKByF { k } => CodeSpec::best_indices(&report.fidelities(), *k),
        CodeRule::Explicit { info_set } => {
            let mut s = info_set.clone();
            s.sort_unstable();
            Ok(s)
        }
    }
}

#[derive(Debug, Serialize)]
struct SelectRecord {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "K")]
    k: usize,
    beta: f64,
    threshold: f64,
    rule: CodeRule,
    info_set: Vec<usize>,
    frozen_set: Vec<usize>,
    good_w: Vec<usize>,
    good_wfc: Vec<usize>,
    collective_bits: usize,
    /// 2√(Σ ½F_i) over the information set.
    bound: f64,
}

fn select(config: &ExperimentConfig, w: &CqChannel, reg: Regularization) -> Result<Outcome> {
    let s = Synthesizer::new(w, config.n)?;
    let report = report_for(config, &s, reg)?;
    let set = info_set(config, &report)?;
    let code = CodeSpec::with_zeros(config.n, &set, config.frozen)?;
    let f = report.fidelities();
    let collective_bits = set.iter().filter(|&&i| !report.is_good_wfc(i)).count();
    let rec = SelectRecord {
        n: config.n,
        k: set.len(),
        beta: config.beta,
        threshold: report.threshold,
        rule: config.code.clone(),
        info_set: set.clone(),
        frozen_set: code.frozen_set(),
        good_w: report.good_w(),
        good_wfc: report.good_wfc(),
        collective_bits,
        bound: prop_error_bound(&set.iter().map(|&i| f[i - 1]).collect::<Vec<_>>()),
    };
    let message = format!("information set {:?}, bound {}", rec.info_set, rec.bound);
    Ok(Outcome::ok(vec![json_file("select.json", &rec)?], message))
}

#[derive(Debug, Serialize)]
struct DecodeRecord {
    variant: &'static str,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "K")]
    k: usize,
    beta: f64,
    seed: u64,
    trials: u64,
    mode: DecodeMode,
    error: f64,
    ci_low: f64,
    ci_high: f64,
    bound: f64,
    strategy_histogram: StrategyHistogram,
    info_set: Vec<usize>,
}

fn decode(config: &ExperimentConfig, w: &CqChannel, reg: Regularization, mode: Option<DecodeMode>) -> Result<Outcome> {
    let synth = Arc::new(Synthesizer::new(w, config.n)?);
    let report = report_for(config, &synth, reg)?;
    let set = info_set(config, &report)?;
    let code = CodeSpec::with_zeros(config.n, &set, config.frozen)?;
    let variant = config.decoder_variant();
    let mut dec = match variant {
        DecoderVariant::Hybrid { .. } => ScDecoder::with_report(synth, report.clone())?,
        v => ScDecoder::new(synth, v)?,
    };
    let mode = mode.unwrap_or(if config.n <= 8 { DecodeMode::Exact } else { DecodeMode::MonteCarlo });
    let f = report.fidelities();
    let bound = prop_error_bound(&set.iter().map(|&i| f[i - 1]).collect::<Vec<_>>());
    let (trials, error, ci_low, ci_high, strategy_histogram) = match mode {
        DecodeMode::Exact => {
            let e = exact_error(&mut dec, &code)?;
            let mut h = StrategyHistogram::default();
            for i in 1..=config.n {
                match dec.strategy(&code, i) {
                    Strategy::Product => h.product += 1,
                    Strategy::Collective => h.collective += 1,
                    Strategy::Frozen => h.frozen += 1,
                }
            }
            (0, e, e, e, h)
        }
        DecodeMode::MonteCarlo => {
            let r = simulate(&mut dec, &code, config.trials, config.seed)?;
            (r.trials, r.error, r.ci_low, r.ci_high, r.strategy_histogram)
        }
    };
    let rec = DecodeRecord {
        variant: variant.name(),
        n: config.n,
        k: set.len(),
        beta: config.beta,
        seed: config.seed,
        trials,
        mode,
        error,
        ci_low,
        ci_high,
        bound,
        strategy_histogram,
        info_set: set,
    };
    let message = format!("{} error {} (bound {})", rec.variant, rec.error, rec.bound);
    Ok(Outcome::ok(vec![json_file("decode.json", &rec)?], message))
}

fn small_codes(config: &ExperimentConfig, w: &CqChannel) -> Result<Outcome> {
    let rep = verify_small_codes(w, config.seed)?;
    let verdict = if rep.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = rep.checks.iter().filter(|c| !c.passed()).map(|c| c.label.as_str()).collect();
        Err(Error::InvariantViolation(format!("small-code identities failed: {failed:?}")))
    };
    let message = format!(
        "{} checks, max residual {}, max synthesis residual {}, {} degenerate",
        rep.checks.len(),
        rep.max_residual,
        rep.max_synthesis_residual,
        rep.degenerate_count
    );
    Ok(Outcome { files: vec![json_file("smallcodes.json", &rep)?], message, verdict })
}

#[derive(Debug, Serialize)]
struct ProductRow {
    n: usize,
    error: f64,
    /// ½F^n
    bound: f64,
    ok: bool,
}

#[derive(Debug, Serialize)]
struct FcTestRecord {
    #[serde(rename = "F")]
    fidelity: f64,
    #[serde(rename = "Z_FC")]
    z_fc: f64,
    gap: f64,
    tolerance: f64,
    delta: f64,
    lambdas: Vec<f64>,
    decides_zero: Vec<bool>,
    p_e_fc: f64,
    half_f: f64,
    p_e_hel: f64,
    random_povms: usize,
    /// min over random POVMs of Z(W, Λ) − F
    min_povm_margin: f64,
    product: Vec<ProductRow>,
    passed: bool,
}

fn fc_test(config: &ExperimentConfig, w: &CqChannel, reg: Regularization) -> Result<Outcome> {
    let f = quantum_fidelity(w)?;
    let m = fc_measurement_with(w, reg)?;
    let z_fc = bhattacharyya(&m.induced(w)?);
    let tol = m.tolerance();
    let p_e_fc = two_outcome_error(w, &m.pi0);
    let p_e_hel = two_outcome_error(w, &helstrom_povm(w)?.elements()[0]);
    let d = w.dim();
    let mut rng = stream(config.seed, STREAM_POVMS);
    let mut min_margin = f64::INFINITY;
    for k in 0..2 * FC_TEST_POVMS {
        let povm = if k % 2 == 0 { random_povm(d, d + 2, &mut rng)? } else { random_basis_povm(d, &mut rng)? };
        min_margin = min_margin.min(bhattacharyya(&induce_classical(w, &povm)?) - f);
    }
    let max_copies = ((ENUMERATION_LOG2_LIMIT / (d.max(2) as f64).log2()).floor() as usize).min(config.n);
    let mut product = Vec::new();
    for n in 1..=max_copies {
        let t = fc_product_test(w.rho0(), w.rho1(), n)?;
        let bound = 0.5 * f.powi(n as i32);
        product.push(ProductRow { n, error: t.error, bound, ok: t.error <= bound + n as f64 * tol });
    }
    let passed = (z_fc - f).abs() <= tol
        && min_margin >= -tol
        && p_e_fc <= 0.5 * f + tol
        && p_e_hel <= p_e_fc + 1e-9
        && product.iter().all(|r| r.ok);
    let rec = FcTestRecord {
        fidelity: f,
        z_fc,
        gap: (z_fc - f).abs(),
        tolerance: tol,
        delta: m.delta,
        decides_zero: (0..m.dim()).map(|y| m.decides_zero(y)).collect(),
        lambdas: m.lambdas.clone(),
        p_e_fc,
        half_f: 0.5 * f,
        p_e_hel,
        random_povms: 2 * FC_TEST_POVMS,
        min_povm_margin: min_margin,
        product,
        passed,
    };
    let verdict = if passed {
        Ok(())
    } else {
        Err(Error::InvariantViolation(format!("Fuchs-Caves checks failed (|Z_FC - F| = {:.3e})", rec.gap)))
    };
    let message = format!("F = {}, Z_FC = {}, p_e(FC) = {}, p_e(Hel) = {}", f, z_fc, p_e_fc, p_e_hel);
    Ok(Outcome { files: vec![json_file("fc_test.json", &rec)?], message, verdict })
}

fn curve(config: &ExperimentConfig) -> Result<Outcome> {
    let c = &config.curve;
    let pts = bosonic::fraction_curve(c.e_min, c.e_max, c.points, c.log_spacing)?;
    let message = format!("{} points on [{:e}, {:e}]", pts.len(), c.e_min, c.e_max);
    Ok(Outcome::ok(vec![csv_file("bosonic_curve.csv", bosonic::curve_csv(&pts))?], message))
}

fn margins_csv(report: &ChannelReport) -> String {
    let mut s = String::from("i,F,Z_FC,margin,good_W,good_WFC\n");
    for r in &report.records {
        s.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{},{}\n",
            r.i,
            r.fidelity,
            r.z_fc,
            r.z_fc - r.fidelity,
            r.good_w as u8,
            r.good_wfc as u8
        ));
    }
    s
}

fn subset(config: &ExperimentConfig, w: &CqChannel, reg: Regularization, corrupt: Option<usize>) -> Result<Outcome> {
    let s = Synthesizer::new(w, config.n)?;
    let mut report = report_for(config, &s, reg)?;
    if let Some(i) = corrupt {
        let r = report
            .records
            .get_mut(i.wrapping_sub(1))
            .ok_or_else(|| Error::Config(format!("--corrupt-f index {i} outside 1..={}", config.n)))?;
        r.fidelity = r.z_fc + 0.01;
    }
    let mut files = vec![csv_file("subset_margins.csv", margins_csv(&report))?];
    match verify_subset(&report) {
        Ok(rec) => {
            files.push(json_file("subset.json", &rec)?);
            let min = rec.margins.iter().copied().fold(f64::INFINITY, f64::min);
            let message = format!(
                "G(W_FC) within G(W): {} of {} good for W_FC, {} collective bits, min margin {min}",
                report.good_wfc().len(),
                report.good_w().len(),
                rec.collective_bits
            );
            Ok(Outcome::ok(files, message))
        }
        Err(e) => Ok(Outcome { files, message: e.to_string(), verdict: Err(e) }),
    }
}
