use super::classical::classical_split_all;
use super::synthesis::Synthesizer;
use crate::channel::{helstrom_povm, induce_classical, CqChannel};
use crate::error::{Error, Result};
use crate::fuchs_caves::fc_measurement_with;
use crate::linalg::Regularization;
use serde::{Deserialize, Serialize};

pub const DEFAULT_BETA: f64 = 0.45;

/// Slack allowed in F_i ≤ Z_FC,i.
pub const SUBSET_TOL: f64 = 1e-6;

/// 2^{−N^β}
pub fn threshold(n: usize, beta: f64) -> f64 {
    (-(n as f64).powf(beta)).exp2()
}

/// Parameters of one synthesized channel before classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexParameters {
    pub i: usize,
    pub fidelity: f64,
    pub holevo: f64,
    pub z_fc: f64,
    pub z_hel: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexRecord {
    pub i: usize,
    pub fidelity: f64,
    pub holevo: f64,
    pub z_fc: f64,
    pub z_hel: f64,
    pub good_w: bool,
    pub good_wfc: bool,
}

/// Per-index parameters and good-set membership at one (N, β).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelReport {
    pub n: usize,
    pub beta: f64,
    pub threshold: f64,
    pub records: Vec<IndexRecord>,
}

impl ChannelReport {
    /// Indices i (1-based) with F_i below threshold.
    pub fn good_w(&self) -> Vec<usize> {
        self.records.iter().filter(|r| r.good_w).map(|r| r.i).collect()
    }

    pub fn bad_w(&self) -> Vec<usize> {
        self.records.iter().filter(|r| !r.good_w).map(|r| r.i).collect()
    }

    /// Indices with Z_FC,i below threshold.
    pub fn good_wfc(&self) -> Vec<usize> {
        self.records.iter().filter(|r| r.good_wfc).map(|r| r.i).collect()
    }

    pub fn good_ratio(&self) -> f64 {
        self.good_w().len() as f64 / self.n as f64
    }

    pub fn good_wfc_ratio(&self) -> f64 {
        self.good_wfc().len() as f64 / self.n as f64
    }

    /// |𝒢(W) \ 𝒢(W_FC)|
    pub fn collective_bits(&self) -> usize {
        self.records.iter().filter(|r| r.good_w && !r.good_wfc).count()
    }

    pub fn fidelities(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.fidelity).collect()
    }

    pub fn is_good_wfc(&self, i: usize) -> bool {
        self.records.get(i - 1).is_some_and(|r| r.good_wfc)
    }

    /// Rows `i,F,I,Z_FC,Z_Hel,good_W,good_WFC`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("i,F,I,Z_FC,Z_Hel,good_W,good_WFC\n");
        for r in &self.records {
            s.push_str(&format!(
                "{},{:.17e},{:.17e},{:.17e},{:.17e},{},{}\n",
                r.i, r.fidelity, r.holevo, r.z_fc, r.z_hel, r.good_w as u8, r.good_wfc as u8
            ));
        }
        s
    }
}

/// Classifies every index by F_i and Z_FC,i against 2^{−N^β}.
pub fn select_channels(params: &[IndexParameters], beta: f64) -> Result<ChannelReport> {
    if !(beta > 0.0 && beta < 0.5) {
        return Err(Error::Domain(format!("beta = {beta} outside (0, 1/2)")));
    }
    let n = params.len();
    let t = threshold(n, beta);
    let records = params
        .iter()
        .map(|p| IndexRecord {
            i: p.i,
            fidelity: p.fidelity,
            holevo: p.holevo,
            z_fc: p.z_fc,
            z_hel: p.z_hel,
            good_w: p.fidelity < t,
            good_wfc: p.z_fc < t,
        })
        .collect();
    Ok(ChannelReport { n, beta, threshold: t, records })
}

/// F_i and I_i from the quantum synthesis, Z_FC,i and Z_Hel,i from exact
/// splits of the classical channels induced by the single-use Fuchs-Caves
/// and Helstrom measurements.
pub fn build_report(synth: &Synthesizer, beta: f64) -> Result<ChannelReport> {
    build_report_with(synth, beta, Regularization::Auto)
}

/// [`build_report`] with an explicit regularization of the Fuchs-Caves
/// measurement.
pub fn build_report_with(synth: &Synthesizer, beta: f64, reg: Regularization) -> Result<ChannelReport> {
    let w = synth.channel();
    let n = synth.block_length();
    let f = synth.fidelities()?;
    let h = synth.holevos()?;
    let (zfc, zhel) = induced_parameters(w, n, reg)?;
    let params: Vec<IndexParameters> = (0..n)
        .map(|k| IndexParameters { i: k + 1, fidelity: f[k], holevo: h[k], z_fc: zfc[k], z_hel: zhel[k] })
        .collect();
    select_channels(&params, beta)
}

fn induced_parameters(w: &CqChannel, n: usize, reg: Regularization) -> Result<(Vec<f64>, Vec<f64>)> {
    let wfc = fc_measurement_with(w, reg)?.induced(w)?;
    let whel = induce_classical(w, &helstrom_povm(w)?)?;
    let zfc = classical_split_all(&wfc, n)?.iter().map(|s| s.z).collect();
    let zhel = classical_split_all(&whel, n)?.iter().map(|s| s.z).collect();
    Ok((zfc, zhel))
}

/// Outcome of checking F_i ≤ Z_FC,i and 𝒢(W_FC) ⊆ 𝒢(W).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetRecord {
    pub report: ChannelReport,
    /// Z_FC,i − F_i
    pub margins: Vec<f64>,
    pub collective_bits: usize,
}

pub fn verify_subset(report: &ChannelReport) -> Result<SubsetRecord> {
    for r in &report.records {
        if !(r.fidelity <= r.z_fc + SUBSET_TOL) {
            return Err(Error::InvariantViolation(format!(
                "index {}: F = {:.12} exceeds Z_FC = {:.12}",
                r.i, r.fidelity, r.z_fc
            )));
        }
        if r.good_wfc && !r.good_w {
            return Err(Error::InvariantViolation(format!(
                "index {} is good for the measured channel but not for W",
                r.i
            )));
        }
    }
    Ok(SubsetRecord {
        report: report.clone(),
        margins: report.records.iter().map(|r| r.z_fc - r.fidelity).collect(),
        collective_bits: report.collective_bits(),
    })
}

pub fn subset_check(w: &CqChannel, n: usize, beta: f64) -> Result<SubsetRecord> {
    verify_subset(&build_report(&Synthesizer::new(w, n)?, beta)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ClassicalChannel;
    use crate::linalg::{DensityOperator, C64};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn params(f: &[f64]) -> Vec<IndexParameters> {
        f.iter().enumerate().map(|(k, &f)| IndexParameters { i: k + 1, fidelity: f, holevo: 0.0, z_fc: f, z_hel: f }).collect()
    }

    #[test]
    fn threshold_arithmetic() {
        assert!((threshold(8, 0.45) - 0.170859).abs() < 1e-6);
        assert_eq!(select_channels(&params(&[0.0; 8]), 0.45).unwrap().good_w().len(), 8);
        assert!(select_channels(&params(&[1.0; 8]), 0.45).unwrap().good_w().is_empty());
        assert!(select_channels(&params(&[0.0; 8]), 0.5).is_err());
    }

    #[test]
    fn commuting_channel_has_no_gap() {
        let w = CqChannel::diagonal(&ClassicalChannel::bsc(0.11).unwrap()).unwrap();
        let rec = subset_check(&w, 8, 0.45).unwrap();
        assert!(rec.margins.iter().all(|m| m.abs() < 1e-7), "{:?}", rec.margins);
        assert_eq!(rec.collective_bits, 0);
    }

    #[test]
    fn orthogonal_states_all_good() {
        let w = CqChannel::new(DensityOperator::diag(&[1.0, 0.0]).unwrap(), DensityOperator::diag(&[0.0, 1.0]).unwrap())
            .unwrap();
        let rec = subset_check(&w, 4, 0.45).unwrap();
        assert_eq!(rec.report.good_w(), vec![1, 2, 3, 4]);
        assert_eq!(rec.report.good_wfc(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn violation_is_reported() {
        let mut r = select_channels(&params(&[0.1, 0.2]), 0.45).unwrap();
        r.records[1].fidelity = 0.5;
        let e = verify_subset(&r).unwrap_err();
        assert!(matches!(e, Error::InvariantViolation(ref m) if m.contains("index 2")));
    }

    #[test]
    fn pure_pair_subset() {
        let z = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let p = [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)];
        let w = CqChannel::pure_pair(&z, &p).unwrap();
        let rec = subset_check(&w, 4, 0.45).unwrap();
        assert!(rec.margins.iter().all(|&m| m >= -SUBSET_TOL));
    }
}
