//! Pure-loss bosonic channel with BPSK coherent states |±α⟩, E = |α|².
//!
//! All quantities depend only on the overlap ε = ⟨α|−α⟩ = e^{−2E}; the two
//! states are embedded exactly as cos θ|0⟩ ± sin θ|1⟩ with cos 2θ = ε.

use crate::channel::CqChannel;
use crate::error::{Error, Result};
use crate::linalg::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

/// Below this t the series of c(t) is used.
const SERIES_CUTOFF: f64 = 1e-3;

fn xlogx(x: f64) -> f64 {
    if x <= 1e-300 {
        0.0
    } else {
        x * x.ln()
    }
}

/// −q log₂q − (1−q) log₂(1−q), accurate for small q.
fn h2_small(q: f64) -> f64 {
    if q <= 0.0 {
        return 0.0;
    }
    (-xlogx(q) - (1.0 - q) * (-q).ln_1p()) / LN_2
}

/// 1 − h₂((1−t)/2) for t ∈ [0, 1].
fn c(t: f64) -> f64 {
    if t < SERIES_CUTOFF {
        let t2 = t * t;
        return t2 * (1.0 + t2 / 6.0 + t2 * t2 / 15.0) / (2.0 * LN_2);
    }
    let minus = if t >= 1.0 { 0.0 } else { (1.0 - t) * (-t).ln_1p() };
    ((1.0 + t) * t.ln_1p() + minus) / (2.0 * LN_2)
}

/// ⟨α|−α⟩ = e^{−2E}
pub fn overlap(e: f64) -> f64 {
    (-2.0 * e).exp()
}

/// √(1 − e^{−4E})
fn helstrom_gap(e: f64) -> f64 {
    (-(-4.0 * e).exp_m1()).sqrt()
}

fn check_energy(e: f64) -> Result<()> {
    if !(e >= 0.0) || e.is_infinite() {
        return Err(Error::Domain(format!("mean photon number {e} must be finite and non-negative")));
    }
    Ok(())
}

/// Symmetric Holevo rate h₂((1+e^{−2E})/2).
pub fn chi(e: f64) -> Result<f64> {
    check_energy(e)?;
    let eps = overlap(e);
    Ok(if eps >= 0.5 { h2_small(-(-2.0 * e).exp_m1() / 2.0) } else { 1.0 - c(eps) })
}

/// Mutual information of the Helstrom-induced channel,
/// 1 − h₂((1 − √(1−e^{−4E}))/2).
pub fn i_hel(e: f64) -> Result<f64> {
    check_energy(e)?;
    let s = helstrom_gap(e);
    Ok(if s <= 0.5 { c(s) } else { 1.0 - h2_small(helstrom_error_small(e, s)) })
}

/// (1 − s)/2 = ε²/(2(1+s))
fn helstrom_error_small(e: f64, s: f64) -> f64 {
    let eps = overlap(e);
    eps * eps / (2.0 * (1.0 + s))
}

/// 1 − I_Hel(E)/χ(E), the share of information bits that need a collective
/// test.
pub fn collective_fraction(e: f64) -> Result<f64> {
    check_energy(e)?;
    if e == 0.0 {
        return Err(Error::Domain("collective fraction is 0/0 at E = 0".into()));
    }
    let x = chi(e)?;
    let s = helstrom_gap(e);
    let eps = overlap(e);
    let f = if s > 0.5 && eps < 0.5 {
        // χ − I_Hel = h₂(q_H) − c(ε) without cancellation
        (h2_small(helstrom_error_small(e, s)) - c(eps)) / x
    } else {
        1.0 - i_hel(e)? / x
    };
    Ok(f.max(0.0))
}

/// (x+1)log₂(x+1) − x log₂x
pub fn g_capacity(x: f64) -> Result<f64> {
    check_energy(x)?;
    Ok(((x + 1.0) * x.ln_1p() - xlogx(x)) / LN_2)
}

/// The two coherent states in the span of {|α⟩, |−α⟩}.
pub fn bpsk_channel(e: f64) -> Result<CqChannel> {
    check_energy(e)?;
    // cos²θ = (1+ε)/2, sin²θ = (1−ε)/2
    let sin2 = -(-2.0 * e).exp_m1() / 2.0;
    let (ct, st) = ((1.0 - sin2).sqrt(), sin2.sqrt());
    let a = [C64::new(ct, 0.0), C64::new(st, 0.0)];
    let b = [C64::new(ct, 0.0), C64::new(-st, 0.0)];
    CqChannel::pure_pair(&a, &b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BpskPoint {
    #[serde(rename = "E")]
    pub e: f64,
    pub chi: f64,
    pub i_hel: f64,
    pub fraction: f64,
    pub g_capacity: f64,
}

pub fn bpsk_point(e: f64) -> Result<BpskPoint> {
    Ok(BpskPoint { e, chi: chi(e)?, i_hel: i_hel(e)?, fraction: collective_fraction(e)?, g_capacity: g_capacity(e)? })
}

/// Fraction curve on `points` energies from `e_min` to `e_max`, linearly or
/// logarithmically spaced. Fails if the fraction ever increases by more than
/// 1e-12 between neighbours.
pub fn fraction_curve(e_min: f64, e_max: f64, points: usize, log_spacing: bool) -> Result<Vec<BpskPoint>> {
    if !(e_min > 0.0 && e_min < e_max && e_max.is_finite()) {
        return Err(Error::Domain(format!("need 0 < E_min < E_max, got [{e_min}, {e_max}]")));
    }
    if points < 2 {
        return Err(Error::Domain(format!("need at least 2 points, got {points}")));
    }
    let last = (points - 1) as f64;
    let curve: Vec<BpskPoint> = (0..points)
        .map(|k| {
            let t = k as f64 / last;
            let e = match k {
                0 => e_min,
                _ if k == points - 1 => e_max,
                _ if log_spacing => (e_min.ln() + t * (e_max / e_min).ln()).exp(),
                _ => e_min + t * (e_max - e_min),
            };
            bpsk_point(e)
        })
        .collect::<Result<_>>()?;
    for p in curve.windows(2) {
        if p[1].fraction > p[0].fraction + 1e-12 {
            return Err(Error::InvariantViolation(format!(
                "fraction increases from {} at E = {} to {} at E = {}",
                p[0].fraction, p[0].e, p[1].fraction, p[1].e
            )));
        }
    }
    Ok(curve)
}

/// Rows `E,chi,i_hel,fraction,g_capacity`.
pub fn curve_csv(curve: &[BpskPoint]) -> String {
    let mut s = String::from("E,chi,i_hel,fraction,g_capacity\n");
    for p in curve {
        s.push_str(&format!("{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n", p.e, p.chi, p.i_hel, p.fraction, p.g_capacity));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::h2;

    #[test]
    fn series_joins_closed_form() {
        let t = SERIES_CUTOFF;
        let closed = 1.0 - h2((1.0 - t) / 2.0);
        assert!((c(t) - closed).abs() < 1e-15);
        assert!(((c(t * 0.999) - c(t)) / c(t)).abs() < 3e-3);
    }

    #[test]
    fn branches_agree_at_switch() {
        let e_chi = -(0.5f64).ln() / 2.0;
        let below = h2_small(-(-2.0 * e_chi).exp_m1() / 2.0);
        assert!((below - (1.0 - c(overlap(e_chi)))).abs() < 1e-14);
        let e_hel = -(0.75f64).ln() / 4.0;
        let s = helstrom_gap(e_hel);
        assert!((c(s) - (1.0 - h2_small(helstrom_error_small(e_hel, s)))).abs() < 1e-14);
    }

    #[test]
    fn closed_forms_against_h2() {
        for e in [0.05, 0.3, 1.0, 2.0] {
            let eps = overlap(e);
            assert!((chi(e).unwrap() - h2((1.0 + eps) / 2.0)).abs() < 1e-13);
            let s = (1.0 - (-4.0 * e).exp()).sqrt();
            assert!((i_hel(e).unwrap() - (1.0 - h2((1.0 - s) / 2.0))).abs() < 1e-13);
        }
    }

    #[test]
    fn capacity_values() {
        assert_eq!(g_capacity(0.0).unwrap(), 0.0);
        assert!((g_capacity(1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((g_capacity(3.0).unwrap() - 3.24511).abs() < 1e-5);
    }

    #[test]
    fn domain_errors() {
        assert!(collective_fraction(0.0).is_err());
        assert!(chi(-1.0).is_err());
        assert!(fraction_curve(1.0, 1.0, 5, false).is_err());
        assert!(fraction_curve(0.1, 1.0, 1, false).is_err());
    }
}
